//! The bundled five-service flight booking application.
//!
//! Variant A uses uc = 20000 with the higher QoE values for the cheaper
//! versions; variant B uses uc = 5000 with the lower ones.

use crate::model::{parse_application, ApplicationModel};

pub const VARIANT_A_JSON: &str = include_str!("../data/flight_booking/app_variant_a.json");
pub const VARIANT_B_JSON: &str = include_str!("../data/flight_booking/app_variant_b.json");

pub fn variant_a() -> ApplicationModel {
    parse_application(VARIANT_A_JSON).expect("bundled variant A is valid")
}

pub fn variant_b() -> ApplicationModel {
    parse_application(VARIANT_B_JSON).expect("bundled variant B is valid")
}
