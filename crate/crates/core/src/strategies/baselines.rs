use super::{better, StrategyOutcome};
use crate::engine::{evaluate_with_rev_max, rev_max_micro, DeploymentPlan};
use crate::error::Result;
use crate::model::{ApplicationModel, Configuration, Microservice};

/// Version indices of `ms` ordered by energy demand, ties in declaration order.
fn by_energy(ms: &Microservice) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..ms.versions.len()).collect();
    idx.sort_by(|&a, &b| ms.versions[a].ed_watts.total_cmp(&ms.versions[b].ed_watts));
    idx
}

/// The most power-hungry version of every microservice (last one on ties).
pub fn hp_config(app: &ApplicationModel) -> Configuration {
    Configuration(
        app.microservices
            .iter()
            .map(|ms| *by_energy(ms).last().expect("non-empty versions"))
            .collect(),
    )
}

pub fn hp_select(app: &ApplicationModel, users0: f64, ci: f64, budget_g: f64) -> StrategyOutcome {
    let plan = evaluate_with_rev_max(app, &hp_config(app), users0, ci, budget_g, rev_max_micro(app));
    StrategyOutcome::new(plan)
}

/// Low, mid and high configurations for the sequential baseline. Per
/// microservice the three picks are non-decreasing in energy demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaConfigs {
    pub low: Configuration,
    pub mid: Configuration,
    pub high: Configuration,
}

pub fn sca_configs(app: &ApplicationModel) -> ScaConfigs {
    let (mut low, mut mid, mut high) = (Vec::new(), Vec::new(), Vec::new());
    for ms in &app.microservices {
        let order = by_energy(ms);
        let k = order.len();
        low.push(order[0]);
        // ceil((k - 1) / 2)
        mid.push(order[k / 2]);
        high.push(order[k - 1]);
    }
    ScaConfigs {
        low: Configuration(low),
        mid: Configuration(mid),
        high: Configuration(high),
    }
}

pub(super) fn sequential_pick(
    app: &ApplicationModel,
    high_to_low: [&Configuration; 3],
    users0: f64,
    ci: f64,
    budget_g: f64,
) -> StrategyOutcome {
    let norm = rev_max_micro(app);
    let mut last = None;
    for config in high_to_low {
        let plan = evaluate_with_rev_max(app, config, users0, ci, budget_g, norm);
        if plan.feasible {
            return StrategyOutcome::new(plan);
        }
        last = Some(plan);
    }
    StrategyOutcome::new(last.expect("three configurations"))
}

/// Tries high, then mid, then low; the first that fits wins. If none fits the
/// low configuration is deployed anyway.
pub fn sca_select(app: &ApplicationModel, users0: f64, ci: f64, budget_g: f64) -> StrategyOutcome {
    let s = sca_configs(app);
    sequential_pick(app, [&s.high, &s.mid, &s.low], users0, ci, budget_g)
}

/// Default menu for the non-sequential baseline:
///
/// 1. mandatory services at their middle version, optional ones Off;
/// 2. mandatory services at their cheapest version, optional ones at their
///    cheapest live version;
/// 3. mandatory services at their most powerful version, optional ones Off.
pub fn default_ca_candidates(app: &ApplicationModel) -> [Configuration; 3] {
    let sca = sca_configs(app);
    let hp = hp_config(app);
    let mut c1 = Vec::new();
    let mut c2 = Vec::new();
    let mut c3 = Vec::new();
    for (i, ms) in app.microservices.iter().enumerate() {
        match ms.off_index() {
            Some(off) => {
                c1.push(off);
                let cheapest_live = by_energy(ms)
                    .into_iter()
                    .find(|&v| !ms.versions[v].is_off())
                    .unwrap_or(off);
                c2.push(cheapest_live);
                c3.push(off);
            }
            None => {
                c1.push(sca.mid.0[i]);
                c2.push(sca.low.0[i]);
                c3.push(hp.0[i]);
            }
        }
    }
    [Configuration(c1), Configuration(c2), Configuration(c3)]
}

pub(super) fn best_candidate(
    app: &ApplicationModel,
    candidates: &[Configuration; 3],
    users0: f64,
    ci: f64,
    budget_g: f64,
) -> StrategyOutcome {
    let norm = rev_max_micro(app);
    let plans: Vec<DeploymentPlan> = candidates
        .iter()
        .map(|c| evaluate_with_rev_max(app, c, users0, ci, budget_g, norm))
        .collect();
    let mut best: Option<&DeploymentPlan> = None;
    for p in plans.iter().filter(|p| p.feasible) {
        if best.is_none_or(|b| better(p, b)) {
            best = Some(p);
        }
    }
    let chosen = best.unwrap_or_else(|| {
        plans
            .iter()
            .reduce(|a, b| if b.emissions_g < a.emissions_g { b } else { a })
            .expect("three candidates")
    });
    StrategyOutcome::new(chosen.clone())
}

/// Best of three fixed candidates. Fails if a candidate is not a valid
/// configuration of `app`.
pub fn ca_select(
    app: &ApplicationModel,
    users0: f64,
    ci: f64,
    budget_g: f64,
    candidates: &[Configuration; 3],
) -> Result<StrategyOutcome> {
    for c in candidates {
        c.check(app)?;
    }
    Ok(best_candidate(app, candidates, users0, ci, budget_g))
}
