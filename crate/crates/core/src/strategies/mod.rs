//! Per-hour selection strategies.
//!
//! Every strategy maps `(users0, ci, budget_g)` to a [`StrategyOutcome`]. The
//! optimal selector searches the whole configuration space; the baselines pick
//! from a fixed menu.

mod baselines;
mod branch_bound;
mod exhaustive;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::engine::DeploymentPlan;
use crate::error::{Error, Result};
use crate::model::{ApplicationModel, Configuration};

pub use baselines::{ca_select, default_ca_candidates, hp_config, hp_select, sca_configs, sca_select, ScaConfigs};
pub use branch_bound::branch_and_bound_select;
pub use exhaustive::optimal_select;

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyOutcome {
    pub plan: DeploymentPlan,
    /// The plan exceeds the hourly budget.
    pub violated: bool,
}

impl StrategyOutcome {
    pub(crate) fn new(plan: DeploymentPlan) -> Self {
        let violated = !plan.feasible;
        StrategyOutcome { plan, violated }
    }
}

/// Ranking used by the optimal selectors: higher objective first, then lower
/// emissions. Configuration order breaks the remaining ties.
pub(crate) fn better(a: &DeploymentPlan, b: &DeploymentPlan) -> bool {
    match a.objective.partial_cmp(&b.objective) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Equal) => a.emissions_g < b.emissions_g,
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    /// Optimal selection by exhaustive enumeration.
    Os,
    /// Optimal selection by branch and bound.
    Bnb,
    /// High performance: everything at maximum power, budget ignored.
    Hp,
    /// Three nested configurations tried from high to low.
    Sca,
    /// Best of three freely chosen configurations.
    Ca,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Os,
        StrategyKind::Bnb,
        StrategyKind::Hp,
        StrategyKind::Sca,
        StrategyKind::Ca,
    ];

    pub fn id(self) -> &'static str {
        match self {
            StrategyKind::Os => "os",
            StrategyKind::Bnb => "bnb",
            StrategyKind::Hp => "hp",
            StrategyKind::Sca => "sca",
            StrategyKind::Ca => "ca",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| {
                Error::Scenario(format!(
                    "strategies: unknown strategy `{s}` (expected one of os, bnb, hp, sca, ca)"
                ))
            })
    }
}

/// A strategy bound to one application, with its fixed configurations
/// resolved up front.
#[derive(Debug, Clone)]
pub struct Strategy {
    kind: StrategyKind,
    menu: Option<[Configuration; 3]>,
}

impl Strategy {
    pub fn new(app: &ApplicationModel, kind: StrategyKind) -> Self {
        let menu = match kind {
            StrategyKind::Sca => {
                let s = sca_configs(app);
                Some([s.low, s.mid, s.high])
            }
            StrategyKind::Ca => Some(default_ca_candidates(app)),
            _ => None,
        };
        Strategy { kind, menu }
    }

    /// CA with explicit candidates.
    pub fn ca(app: &ApplicationModel, candidates: [Configuration; 3]) -> Result<Self> {
        for c in &candidates {
            c.check(app)?;
        }
        Ok(Strategy {
            kind: StrategyKind::Ca,
            menu: Some(candidates),
        })
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn id(&self) -> &'static str {
        self.kind.id()
    }

    pub fn select(&self, app: &ApplicationModel, users0: f64, ci: f64, budget_g: f64) -> StrategyOutcome {
        match (self.kind, &self.menu) {
            (StrategyKind::Os, _) => optimal_select(app, users0, ci, budget_g),
            (StrategyKind::Bnb, _) => branch_and_bound_select(app, users0, ci, budget_g),
            (StrategyKind::Hp, _) => hp_select(app, users0, ci, budget_g),
            (StrategyKind::Sca, Some([low, mid, high])) => {
                baselines::sequential_pick(app, [high, mid, low], users0, ci, budget_g)
            }
            (StrategyKind::Ca, Some(candidates)) => {
                baselines::best_candidate(app, candidates, users0, ci, budget_g)
            }
            (kind, None) => unreachable!("{kind} constructed without its configurations"),
        }
    }
}
