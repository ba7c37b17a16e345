mod common;

use carbon_budget::flight_booking::{variant_a, variant_b};
use carbon_budget::strategies::{
    branch_and_bound_select, ca_select, default_ca_candidates, hp_select, optimal_select, sca_select,
};
use carbon_budget::ApplicationModel;
use proptest::prelude::*;

fn table_app(b: bool) -> ApplicationModel {
    if b {
        variant_b()
    } else {
        variant_a()
    }
}

fn hour() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.0f64..40000.0, 50.0f64..600.0, 5.0f64..300.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn os_matches_brute_force_on_table_apps(b in any::<bool>(), (users, ci, budget) in hour()) {
        let app = table_app(b);
        let got = optimal_select(&app, users, ci, budget);
        let (want, violated) = common::brute_force(&app, users, ci, budget);
        prop_assert_eq!(&got.plan.config.0, &want.config);
        prop_assert!((got.plan.objective - want.objective).abs() <= 1e-12);
        prop_assert_eq!(got.violated, violated);
    }

    #[test]
    fn os_matches_brute_force_on_random_apps(seed in any::<u64>(), (users, ci, budget) in hour()) {
        let app = common::random_app(&mut common::rng(seed), 5, 4);
        let got = optimal_select(&app, users, ci, budget);
        let (want, violated) = common::brute_force(&app, users, ci, budget);
        prop_assert_eq!(&got.plan.config.0, &want.config);
        prop_assert_eq!(got.violated, violated);
        prop_assert_eq!(got.plan.emissions_g, want.emissions_g);
    }

    #[test]
    fn bnb_equals_os(seed in any::<u64>(), (users, ci, budget) in hour()) {
        let app = common::random_app(&mut common::rng(seed), 7, 4);
        prop_assert_eq!(
            branch_and_bound_select(&app, users, ci, budget),
            optimal_select(&app, users, ci, budget)
        );
    }

    #[test]
    fn os_dominates_feasible_baselines(b in any::<bool>(), (users, ci, budget) in hour()) {
        let app = table_app(b);
        let os = optimal_select(&app, users, ci, budget);
        let sca = sca_select(&app, users, ci, budget);
        let ca = ca_select(&app, users, ci, budget, &default_ca_candidates(&app)).unwrap();
        for base in [sca, ca] {
            if !base.violated {
                prop_assert!(!os.violated);
                prop_assert!(os.plan.objective >= base.plan.objective);
            }
        }
    }

    #[test]
    fn os_objective_grows_with_budget(b in any::<bool>(), (users, ci, budget) in hour(), extra in 0.0f64..200.0) {
        let app = table_app(b);
        let lo = optimal_select(&app, users, ci, budget);
        let hi = optimal_select(&app, users, ci, budget + extra);
        if !lo.violated {
            prop_assert!(hi.plan.objective >= lo.plan.objective);
        }
    }

    #[test]
    fn argmax_survives_joint_scaling(b in any::<bool>(), (users, ci, budget) in hour(), k in -8i32..8) {
        let app = table_app(b);
        let c = 2f64.powi(k);
        let base = optimal_select(&app, users, ci, budget);
        let scaled = optimal_select(&app, users, ci * c, budget * c);
        prop_assert_eq!(base.plan.config, scaled.plan.config);
        prop_assert_eq!(base.violated, scaled.violated);
    }

    #[test]
    fn argmax_survives_joint_scaling_off_boundary(b in any::<bool>(), (users, ci, budget) in hour(), c in 0.01f64..100.0) {
        let app = table_app(b);
        // skip budgets sitting within rounding distance of some configuration's emissions
        let near = common::enumerate(&app, users, ci)
            .iter()
            .any(|r| (r.emissions_g / budget - 1.0).abs() < 1e-9);
        prop_assume!(!near);
        let base = optimal_select(&app, users, ci, budget);
        let scaled = optimal_select(&app, users, ci * c, budget * c);
        prop_assert_eq!(base.plan.config, scaled.plan.config);
    }

    #[test]
    fn strategies_are_deterministic(b in any::<bool>(), (users, ci, budget) in hour()) {
        let app = table_app(b);
        let cands = default_ca_candidates(&app);
        prop_assert_eq!(optimal_select(&app, users, ci, budget), optimal_select(&app, users, ci, budget));
        prop_assert_eq!(hp_select(&app, users, ci, budget), hp_select(&app, users, ci, budget));
        prop_assert_eq!(sca_select(&app, users, ci, budget), sca_select(&app, users, ci, budget));
        prop_assert_eq!(
            ca_select(&app, users, ci, budget, &cands).unwrap(),
            ca_select(&app, users, ci, budget, &cands).unwrap()
        );
    }

    #[test]
    fn violated_flag_tracks_emissions(b in any::<bool>(), (users, ci, budget) in hour()) {
        let app = table_app(b);
        let cands = default_ca_candidates(&app);
        for out in [
            optimal_select(&app, users, ci, budget),
            branch_and_bound_select(&app, users, ci, budget),
            hp_select(&app, users, ci, budget),
            sca_select(&app, users, ci, budget),
            ca_select(&app, users, ci, budget, &cands).unwrap(),
        ] {
            prop_assert_eq!(out.violated, out.plan.emissions_g > budget);
        }
    }
}

#[test]
fn os_only_violates_when_nothing_fits() {
    let app = variant_b();
    for users in [0.0, 1000.0, 9000.0, 26000.0] {
        for budget in [0.5, 3.0, 8.0, 30.0] {
            let out = optimal_select(&app, users, 400.0, budget);
            let floor = common::min_emissions(&app, users, 400.0);
            assert_eq!(out.violated, floor > budget, "users {users} budget {budget}");
        }
    }
}

#[test]
fn bnb_on_table_example() {
    let app = variant_a();
    let out = branch_and_bound_select(&app, 20000.0, 300.0, 60.0);
    assert_eq!(out.plan.config.0, vec![1, 1, 1, 1, 0]);
    assert!((out.plan.objective - 0.95).abs() < 1e-12);
    assert!(!out.violated);
}

#[test]
fn bnb_on_ten_by_four() {
    let mut rng = common::rng(2024);
    let app = common::fixed_size_app(&mut rng, 10, 4);
    use rand::Rng;
    for _ in 0..20 {
        let users = rng.gen_range(0.0..40000.0);
        let ci = rng.gen_range(50.0..600.0);
        let budget = rng.gen_range(5.0..300.0);
        assert_eq!(
            branch_and_bound_select(&app, users, ci, budget),
            optimal_select(&app, users, ci, budget)
        );
    }
}
