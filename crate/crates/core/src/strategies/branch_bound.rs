//! Depth-first branch and bound over the chain, returning exactly what
//! [`optimal_select`](super::optimal_select) returns.
//!
//! Partial assignments are cut when
//! - the objective, with every remaining microservice at its best QoE and
//!   revenue, cannot reach the incumbent, or
//! - the energy already committed plus a lower bound on the remaining
//!   microservices exceeds the budget.
//!
//! The remaining-energy bound sizes each downstream stage for the fewest
//! users it can possibly see (current inflow times the smallest pass-through
//! rates on the way). Sums are fixed point and the objective and emission
//! maps are monotone under rounding, so both bounds are exact: a cut never
//! discards a leaf the exhaustive search would accept. Leaves are scored with
//! the same evaluator as the exhaustive search.

use super::{better, StrategyOutcome};
use crate::engine::{emissions_g, evaluate_with_rev_max, objective_terms, replicas_for, rev_max_micro, DeploymentPlan};
use crate::model::{ApplicationModel, Configuration, MICRO};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Goal {
    /// Best objective within budget.
    Objective,
    /// Lowest emissions, used only when nothing fits.
    Emissions,
}

struct Search<'a> {
    app: &'a ApplicationModel,
    users0: f64,
    ci: f64,
    budget_g: f64,
    norm: i64,
    goal: Goal,
    /// suffix sums of per-microservice maximum QoE / revenue, length n + 1
    qoe_tail: Vec<i64>,
    rev_tail: Vec<i64>,
    min_q: Vec<f64>,
    /// child visiting order per microservice
    order: Vec<Vec<usize>>,
    chosen: Vec<usize>,
    best: Option<DeploymentPlan>,
}

impl<'a> Search<'a> {
    fn new(app: &'a ApplicationModel, users0: f64, ci: f64, budget_g: f64, goal: Goal) -> Self {
        let n = app.len();
        let norm = rev_max_micro(app);
        let mut qoe_tail = vec![0; n + 1];
        let mut rev_tail = vec![0; n + 1];
        for i in (0..n).rev() {
            let vs = &app.microservices[i].versions;
            qoe_tail[i] = qoe_tail[i + 1] + vs.iter().map(|v| v.qoe_micro()).max().unwrap_or(0);
            rev_tail[i] = rev_tail[i + 1] + vs.iter().map(|v| v.rev_micro()).max().unwrap_or(0);
        }
        let min_q = app
            .microservices
            .iter()
            .map(|ms| ms.versions.iter().map(|v| v.q).fold(1.0, f64::min))
            .collect();
        let order = app
            .microservices
            .iter()
            .map(|ms| {
                let mut idx: Vec<usize> = (0..ms.versions.len()).collect();
                match goal {
                    Goal::Objective => {
                        let gain = |v: usize| {
                            let s = &ms.versions[v];
                            objective_terms(app, s.qoe_micro(), s.rev_micro(), norm).2
                        };
                        idx.sort_by(|&a, &b| gain(b).total_cmp(&gain(a)));
                    }
                    Goal::Emissions => {
                        idx.sort_by_key(|&v| ms.versions[v].ed_micro());
                    }
                }
                idx
            })
            .collect();
        Search {
            app,
            users0,
            ci,
            budget_g,
            norm,
            goal,
            qoe_tail,
            rev_tail,
            min_q,
            order,
            chosen: Vec::with_capacity(n),
            best: None,
        }
    }

    /// Lower bound on the energy (micro-Wh) of microservices `depth..` given
    /// `users` entering microservice `depth`.
    fn energy_floor(&self, depth: usize, users: f64) -> i128 {
        let mut u = users;
        let mut total = 0;
        for j in depth..self.app.len() {
            total += self.app.microservices[j]
                .versions
                .iter()
                .map(|v| replicas_for(v, u) as i128 * v.ed_micro() as i128)
                .min()
                .unwrap_or(0);
            u *= self.min_q[j];
        }
        total
    }

    fn emissions_cap(&self) -> f64 {
        match (self.goal, &self.best) {
            (Goal::Objective, _) => self.budget_g,
            (Goal::Emissions, Some(b)) => b.emissions_g,
            (Goal::Emissions, None) => f64::INFINITY,
        }
    }

    fn objective_hopeless(&self, depth: usize, qoe: i64, rev: i64) -> bool {
        match (self.goal, &self.best) {
            (Goal::Objective, Some(best)) => {
                let (_, _, bound) =
                    objective_terms(self.app, qoe + self.qoe_tail[depth], rev + self.rev_tail[depth], self.norm);
                bound < best.objective
            }
            _ => false,
        }
    }

    fn accept(&mut self, plan: DeploymentPlan) {
        let replace = match &self.best {
            None => true,
            Some(b) => match self.goal {
                Goal::Objective => {
                    better(&plan, b)
                        || (plan.objective == b.objective
                            && plan.emissions_g == b.emissions_g
                            && plan.config < b.config)
                }
                Goal::Emissions => {
                    plan.emissions_g < b.emissions_g
                        || (plan.emissions_g == b.emissions_g && plan.config < b.config)
                }
            },
        };
        if replace {
            self.best = Some(plan);
        }
    }

    fn descend(&mut self, depth: usize, users: f64, energy: i128, qoe: i64, rev: i64) {
        if depth == self.app.len() {
            let config = Configuration(self.chosen.clone());
            let plan = evaluate_with_rev_max(self.app, &config, self.users0, self.ci, self.budget_g, self.norm);
            if self.goal == Goal::Emissions || plan.feasible {
                self.accept(plan);
            }
            return;
        }
        if self.objective_hopeless(depth, qoe, rev) {
            return;
        }
        let floor = (energy + self.energy_floor(depth, users)) as f64 / MICRO;
        if emissions_g(floor, self.ci) > self.emissions_cap() {
            return;
        }
        for k in 0..self.order[depth].len() {
            let v = self.order[depth][k];
            let version = self.app.version(depth, v);
            let e = energy + replicas_for(version, users) as i128 * version.ed_micro() as i128;
            self.chosen.push(v);
            self.descend(depth + 1, users * version.q, e, qoe + version.qoe_micro(), rev + version.rev_micro());
            self.chosen.pop();
        }
    }

    fn run(mut self) -> Option<DeploymentPlan> {
        self.descend(0, self.users0, 0, 0, 0);
        self.best
    }
}

/// Same contract and tie-breaking as [`optimal_select`](super::optimal_select),
/// without visiting every configuration.
pub fn branch_and_bound_select(
    app: &ApplicationModel,
    users0: f64,
    ci: f64,
    budget_g: f64,
) -> StrategyOutcome {
    let plan = Search::new(app, users0, ci, budget_g, Goal::Objective)
        .run()
        .or_else(|| Search::new(app, users0, ci, budget_g, Goal::Emissions).run())
        .expect("a valid model has at least one configuration");
    StrategyOutcome::new(plan)
}
