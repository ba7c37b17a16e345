//! Single-hour evaluation of a configuration.
//!
//! Users flow down the chain as expected values: each stage receives the
//! previous stage's inflow scaled by the pass-through rate of the version
//! deployed there. Every stage is then sized independently.
//!
//! Energy, QoE and revenue are summed in integer micro-units, so two
//! configurations whose totals agree exactly also score bit-identically and
//! tie-breaking does not depend on summation order.

use crate::model::{ApplicationModel, VersionSpec, MICRO};

pub use crate::model::Configuration;

/// A configuration evaluated for one hour.
#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentPlan {
    pub config: Configuration,
    pub replicas: Vec<u64>,
    /// Users entering each microservice.
    pub users_in: Vec<f64>,
    /// Users leaving the last microservice.
    pub completers: f64,
    pub energy_wh: f64,
    pub emissions_g: f64,
    pub qoe_term: f64,
    pub rev_term: f64,
    /// Raw revenue of the chosen versions, before normalization.
    pub revenue: f64,
    pub objective: f64,
    pub feasible: bool,
}

pub fn propagate_users(app: &ApplicationModel, config: &Configuration, users0: f64) -> Vec<f64> {
    let mut users = users0;
    config
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let inflow = users;
            users = inflow * app.version(i, v).q;
            inflow
        })
        .collect()
}

/// Instances needed to serve `users_in` requests in one hour. Live versions
/// always run at least one instance; Off versions run none.
pub fn replicas_for(version: &VersionSpec, users_in: f64) -> u64 {
    match version.uc {
        Some(uc) if !version.is_off() => {
            let needed = (users_in / uc as f64).ceil();
            if needed >= 1.0 {
                needed as u64
            } else {
                1
            }
        }
        _ => 0,
    }
}

/// Largest revenue any configuration can collect.
pub fn rev_max(app: &ApplicationModel) -> f64 {
    rev_max_micro(app) as f64 / MICRO
}

pub(crate) fn rev_max_micro(app: &ApplicationModel) -> i64 {
    app.microservices
        .iter()
        .map(|ms| ms.versions.iter().map(VersionSpec::rev_micro).max().unwrap_or(0))
        .sum()
}

/// Emissions in grams for `energy_wh` at `ci` gCO2e/kWh.
#[inline]
pub fn emissions_g(energy_wh: f64, ci: f64) -> f64 {
    energy_wh * ci / 1000.0
}

/// Chain totals in fixed point (micro-units of W, QoE and revenue).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct Totals {
    pub energy: i128,
    pub qoe: i64,
    pub rev: i64,
}

impl Totals {
    pub fn energy_wh(&self) -> f64 {
        self.energy as f64 / MICRO
    }
}

/// `(qoe_term, rev_term, objective)` for the given fixed-point sums.
/// Non-decreasing in both sums.
#[inline]
pub(crate) fn objective_terms(app: &ApplicationModel, qoe: i64, rev: i64, rev_max_micro: i64) -> (f64, f64, f64) {
    let qoe_term = qoe as f64 / MICRO / app.len() as f64;
    let rev_term = if rev_max_micro > 0 {
        rev as f64 / rev_max_micro as f64
    } else {
        0.0
    };
    (qoe_term, rev_term, app.alpha * qoe_term + app.beta * rev_term)
}

/// Evaluates `config` for an hour with `users0` arriving users, grid
/// intensity `ci` and an hourly allowance of `budget_g` grams.
///
/// `config` must be valid for `app` (see [`Configuration::check`]).
pub fn evaluate_config(
    app: &ApplicationModel,
    config: &Configuration,
    users0: f64,
    ci: f64,
    budget_g: f64,
) -> DeploymentPlan {
    evaluate_with_rev_max(app, config, users0, ci, budget_g, rev_max_micro(app))
}

/// Walks the chain once, calling `visit(users_in, replicas)` per stage, and
/// returns the totals with the users leaving the last stage.
#[inline]
pub(crate) fn walk_chain(
    app: &ApplicationModel,
    chosen: &[usize],
    users0: f64,
    mut visit: impl FnMut(f64, u64),
) -> (Totals, f64) {
    let mut users = users0;
    let mut t = Totals::default();
    for (i, &v) in chosen.iter().enumerate() {
        let version = app.version(i, v);
        let n = replicas_for(version, users);
        visit(users, n);
        t.energy += n as i128 * version.ed_micro() as i128;
        t.qoe += version.qoe_micro();
        t.rev += version.rev_micro();
        users *= version.q;
    }
    (t, users)
}

/// Objective and emissions only, without building a plan.
#[inline]
pub(crate) fn score(app: &ApplicationModel, chosen: &[usize], users0: f64, ci: f64, rev_max_micro: i64) -> (f64, f64) {
    let (t, _) = walk_chain(app, chosen, users0, |_, _| {});
    let (_, _, obj) = objective_terms(app, t.qoe, t.rev, rev_max_micro);
    (obj, emissions_g(t.energy_wh(), ci))
}

pub(crate) fn evaluate_with_rev_max(
    app: &ApplicationModel,
    config: &Configuration,
    users0: f64,
    ci: f64,
    budget_g: f64,
    rev_max_micro: i64,
) -> DeploymentPlan {
    debug_assert_eq!(config.len(), app.len());
    let mut users_in = Vec::with_capacity(app.len());
    let mut replicas = Vec::with_capacity(app.len());
    let (t, completers) = walk_chain(app, config.as_slice(), users0, |u, n| {
        users_in.push(u);
        replicas.push(n);
    });
    let energy_wh = t.energy_wh();
    let emissions = emissions_g(energy_wh, ci);
    let (qoe_term, rev_term, objective) = objective_terms(app, t.qoe, t.rev, rev_max_micro);
    DeploymentPlan {
        config: config.clone(),
        replicas,
        users_in,
        completers,
        energy_wh,
        emissions_g: emissions,
        qoe_term,
        rev_term,
        revenue: t.rev as f64 / MICRO,
        objective,
        feasible: emissions <= budget_g,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flight_booking::{variant_a, variant_b};
    use crate::model::{config_space, parse_application};
    use proptest::prelude::*;

    const ALL_NORMAL: [usize; 5] = [1, 1, 1, 1, 0];
    const HP: [usize; 5] = [2, 1, 1, 2, 0];
    const ALL_LOW: [usize; 5] = [0, 0, 0, 0, 0];

    fn cfg(c: [usize; 5]) -> Configuration {
        Configuration(c.to_vec())
    }

    #[test]
    fn attrition_one_stage() {
        let app = variant_a();
        let users = propagate_users(&app, &cfg(ALL_NORMAL), 20000.0);
        assert_eq!(users[1], 14000.0);
    }

    #[test]
    fn attrition_hp_chain() {
        let app = variant_a();
        let plan = evaluate_config(&app, &cfg(HP), 20000.0, 300.0, 1e9);
        let expected = [20000.0, 18000.0, 18000.0, 17100.0, 17100.0];
        for (got, want) in plan.users_in.iter().zip(expected) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        assert!((plan.completers - 16929.0).abs() < 1e-9);
        let zero = propagate_users(&app, &cfg(HP), 0.0);
        assert!(zero.iter().all(|&u| u == 0.0));
    }

    #[test]
    fn replica_sizing() {
        let v = |uc| VersionSpec {
            name: "v".into(),
            instance_type: None,
            ed_watts: 10.0,
            q: 1.0,
            uc: Some(uc),
            qoe: 1.0,
            rev: 0.0,
        };
        assert_eq!(replicas_for(&v(20000), 20000.0), 1);
        assert_eq!(replicas_for(&v(20000), 20001.0), 2);
        assert_eq!(replicas_for(&v(5000), 18000.0), 4);
        assert_eq!(replicas_for(&v(5000), 0.0), 1);
        let off = VersionSpec {
            ed_watts: 0.0,
            uc: None,
            qoe: 0.0,
            ..v(1)
        };
        assert_eq!(replicas_for(&off, 1e6), 0);
    }

    #[test]
    fn rev_max_cases() {
        assert!((rev_max(&variant_a()) - 2.2).abs() < 1e-12);
        let doc = |revs: &str| {
            format!(
                r#"{{"name":"t","microservices":[{{"name":"s","optional":false,"versions":[{revs}]}}]}}"#
            )
        };
        let v = |n: &str, r: f64| {
            format!(r#"{{"name":"{n}","ed_watts":1,"q":1,"uc":1,"qoe":0,"rev":{r}}}"#)
        };
        let zero = parse_application(&doc(&v("a", 0.0))).unwrap();
        assert_eq!(rev_max(&zero), 0.0);
        let five = parse_application(&doc(&format!("{},{}", v("a", 0.0), v("b", 5.0)))).unwrap();
        assert_eq!(rev_max(&five), 5.0);
        // rev_term is defined as 0 when nothing can earn revenue
        let plan = evaluate_config(&zero, &Configuration(vec![0]), 10.0, 100.0, 1.0);
        assert_eq!(plan.rev_term, 0.0);
    }

    #[test]
    fn worked_examples() {
        let app = variant_a();
        let p = evaluate_config(&app, &cfg(ALL_NORMAL), 20000.0, 300.0, 60.0);
        assert!((p.energy_wh - 172.6).abs() < 1e-9);
        assert!((p.emissions_g - 51.78).abs() < 1e-9);
        assert!((p.qoe_term - 0.9).abs() < 1e-12);
        assert!((p.rev_term - 1.0).abs() < 1e-12);
        assert!((p.objective - 0.95).abs() < 1e-12);
        assert!(p.feasible);

        let p = evaluate_config(&app, &cfg(HP), 20000.0, 300.0, 60.0);
        assert!((p.energy_wh - 703.6).abs() < 1e-9);
        assert!((p.emissions_g - 211.08).abs() < 1e-9);
        assert!((p.objective - 1.0).abs() < 1e-12);
        assert!(!p.feasible);

        let p = evaluate_config(&app, &cfg(ALL_LOW), 20000.0, 300.0, 60.0);
        assert!((p.energy_wh - 65.9).abs() < 1e-9);
        assert!((p.emissions_g - 19.77).abs() < 1e-9);
        assert!((p.qoe_term - 0.4).abs() < 1e-12);
        assert_eq!(p.rev_term, 0.0);
        assert!((p.objective - 0.2).abs() < 1e-12);
        assert_eq!(p.replicas, vec![1, 0, 1, 0, 1]);
    }

    #[test]
    fn variant_b_scales_out() {
        let app = variant_b();
        let p = evaluate_config(&app, &cfg(HP), 20000.0, 300.0, 1e9);
        // 20000, 18000, 18000, 17100, 17100 users at 5000 per instance
        assert_eq!(p.replicas, vec![4, 4, 4, 4, 4]);
    }

    fn arb_hour() -> impl Strategy<Value = (f64, f64, usize, bool)> {
        (0.0f64..60000.0, 1.0f64..800.0, 0usize..36, any::<bool>())
    }

    proptest! {
        #[test]
        fn plan_invariants((users, ci, idx, use_b) in arb_hour()) {
            let app = if use_b { variant_b() } else { variant_a() };
            let config = config_space(&app).nth(idx).unwrap();
            let p = evaluate_config(&app, &config, users, ci, 100.0);
            let again = evaluate_config(&app, &config, users, ci, 100.0);
            prop_assert_eq!(&p, &again);

            let doubled = evaluate_config(&app, &config, users, 2.0 * ci, 100.0);
            prop_assert_eq!(doubled.emissions_g, 2.0 * p.emissions_g);

            for w in p.users_in.windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
            prop_assert!((0.0..=1.0).contains(&p.qoe_term));
            prop_assert!((0.0..=1.0).contains(&p.rev_term));
            prop_assert!(p.objective >= 0.0 && p.objective <= app.alpha + app.beta + 1e-12);

            let mut energy = 0.0;
            for (i, &v) in config.iter().enumerate() {
                let version = &app.microservices[i].versions[v];
                prop_assert_eq!(p.replicas[i] == 0, version.is_off());
                energy += p.replicas[i] as f64 * version.ed_watts;
            }
            prop_assert!((energy - p.energy_wh).abs() <= 1e-9 * energy.max(1.0));
            prop_assert_eq!(p.feasible, p.emissions_g <= 100.0);
        }

        #[test]
        fn off_contributes_nothing(users in 0.0f64..50000.0, ci in 1.0f64..800.0) {
            let app = variant_a();
            // toggle Weather (index 1) between Off and Normal with the rest fixed
            let on = evaluate_config(&app, &cfg(ALL_LOW), users, ci, 1.0);
            let mut c = ALL_LOW;
            c[1] = 1;
            let with_weather = evaluate_config(&app, &cfg(c), users, ci, 1.0);
            prop_assert_eq!(on.replicas[1], 0);
            prop_assert!(with_weather.energy_wh > on.energy_wh);
            prop_assert!((with_weather.revenue - on.revenue - 0.2).abs() < 1e-12);
        }
    }
}
