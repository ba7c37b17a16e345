//! Test-only brute-force oracle and random model generator.
//!
//! The oracle shares nothing with the library beyond reading the model's
//! fields: it enumerates with nested recursion, propagates users and sizes
//! replicas itself, and applies the selection rule from scratch.

#![allow(dead_code)]

use carbon_budget::model::{ApplicationModel, Microservice, VersionSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub config: Vec<usize>,
    pub energy_wh: f64,
    pub emissions_g: f64,
    pub objective: f64,
    pub qoe_term: f64,
    pub revenue: f64,
}

fn instances(v: &VersionSpec, users: f64) -> i128 {
    if v.ed_watts == 0.0 {
        return 0;
    }
    let uc = v.uc.unwrap() as f64;
    let mut n = 1;
    while n as f64 * uc < users {
        n += 1;
    }
    n
}

/// Quantities are summed as exact integers of 1e-6 units, so mathematically
/// equal totals tie exactly.
fn micro(x: f64) -> i128 {
    (x * 1e6).round() as i128
}

fn row(app: &ApplicationModel, config: &[usize], users0: f64, ci: f64) -> OracleRow {
    let mut users = users0;
    let mut energy = 0i128;
    let mut qoe = 0i128;
    let mut rev = 0i128;
    for (ms, &v) in app.microservices.iter().zip(config) {
        let spec = &ms.versions[v];
        energy += instances(spec, users) * micro(spec.ed_watts);
        qoe += micro(spec.qoe);
        rev += micro(spec.rev);
        users *= spec.q;
    }
    let rev_max: i128 = app
        .microservices
        .iter()
        .map(|m| m.versions.iter().map(|v| micro(v.rev)).max().unwrap())
        .sum();
    let energy_wh = energy as f64 / 1e6;
    let qoe_term = qoe as f64 / 1e6 / app.microservices.len() as f64;
    let rev_term = if rev_max > 0 { rev as f64 / rev_max as f64 } else { 0.0 };
    OracleRow {
        config: config.to_vec(),
        energy_wh,
        emissions_g: energy_wh * ci / 1000.0,
        objective: app.alpha * qoe_term + app.beta * rev_term,
        qoe_term,
        revenue: rev as f64 / 1e6,
    }
}

/// Every configuration, first microservice most significant.
pub fn enumerate(app: &ApplicationModel, users0: f64, ci: f64) -> Vec<OracleRow> {
    fn rec(app: &ApplicationModel, prefix: &mut Vec<usize>, users0: f64, ci: f64, out: &mut Vec<OracleRow>) {
        if prefix.len() == app.microservices.len() {
            out.push(row(app, prefix, users0, ci));
            return;
        }
        for v in 0..app.microservices[prefix.len()].versions.len() {
            prefix.push(v);
            rec(app, prefix, users0, ci, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(app, &mut Vec::new(), users0, ci, &mut out);
    out
}

/// Brute-force selection: (row, violated).
pub fn brute_force(app: &ApplicationModel, users0: f64, ci: f64, budget_g: f64) -> (OracleRow, bool) {
    let rows = enumerate(app, users0, ci);
    let feasible: Vec<&OracleRow> = rows.iter().filter(|r| r.emissions_g <= budget_g).collect();
    if feasible.is_empty() {
        let min = rows
            .iter()
            .min_by(|a, b| {
                a.emissions_g
                    .partial_cmp(&b.emissions_g)
                    .unwrap()
                    .then_with(|| a.config.cmp(&b.config))
            })
            .unwrap();
        return (min.clone(), true);
    }
    let best = feasible
        .into_iter()
        .min_by(|a, b| {
            b.objective
                .partial_cmp(&a.objective)
                .unwrap()
                .then(a.emissions_g.partial_cmp(&b.emissions_g).unwrap())
                .then_with(|| a.config.cmp(&b.config))
        })
        .unwrap();
    (best.clone(), false)
}

pub fn min_emissions(app: &ApplicationModel, users0: f64, ci: f64) -> f64 {
    enumerate(app, users0, ci)
        .iter()
        .map(|r| r.emissions_g)
        .fold(f64::INFINITY, f64::min)
}

/// A random valid chain. Values sit on coarse grids so objective and
/// emission ties actually happen.
pub fn random_app(rng: &mut ChaCha8Rng, max_ms: usize, max_versions: usize) -> ApplicationModel {
    let n = rng.gen_range(1..=max_ms);
    let microservices = (0..n)
        .map(|i| {
            let k = rng.gen_range(1..=max_versions);
            random_ms(rng, i, k)
        })
        .collect();
    let weights = [(0.5, 0.5), (1.0, 0.0), (0.3, 0.7), (0.0, 1.0), (2.0, 1.0)][rng.gen_range(0..5)];
    let app = ApplicationModel {
        name: "random".into(),
        alpha: weights.0,
        beta: weights.1,
        microservices,
    };
    app.validate().expect("generator builds valid models");
    app
}

pub fn fixed_size_app(rng: &mut ChaCha8Rng, n: usize, k: usize) -> ApplicationModel {
    let app = ApplicationModel {
        name: "fixed".into(),
        alpha: 0.5,
        beta: 0.5,
        microservices: (0..n).map(|i| random_ms(rng, i, k)).collect(),
    };
    app.validate().expect("generator builds valid models");
    app
}

fn random_ms(rng: &mut ChaCha8Rng, i: usize, k: usize) -> Microservice {
    let optional = k >= 2 && rng.gen_bool(0.35);
    let versions = (0..k)
        .map(|j| {
            if optional && j == 0 {
                VersionSpec {
                    name: format!("v{j}"),
                    instance_type: None,
                    ed_watts: 0.0,
                    q: rng.gen_range(50..=100) as f64 / 100.0,
                    uc: None,
                    qoe: 0.0,
                    rev: 0.0,
                }
            } else {
                VersionSpec {
                    name: format!("v{j}"),
                    instance_type: Some("m".into()),
                    ed_watts: rng.gen_range(1..=60) as f64 * 5.0,
                    q: rng.gen_range(50..=100) as f64 / 100.0,
                    uc: Some(rng.gen_range(1..=8) * 2500),
                    qoe: rng.gen_range(0..=4) as f64 / 4.0,
                    rev: if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(1..=4) as f64 / 2.0 },
                }
            }
        })
        .collect();
    Microservice {
        name: format!("ms{i}"),
        optional,
        versions,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
