//! Hour-by-hour replay of strategies over carbon and workload traces.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::engine::evaluate_config;
use crate::model::{ApplicationModel, Configuration};
use crate::strategies::{hp_config, sca_configs, Strategy, StrategyOutcome};
use crate::traces::{BudgetSchedule, CarbonTrace, WorkloadTrace};

#[derive(Debug, Clone, PartialEq)]
pub struct HourRecord {
    pub hour: usize,
    pub strategy: String,
    pub versions: Vec<String>,
    pub replicas: Vec<u64>,
    pub energy_wh: f64,
    pub emissions_g: f64,
    pub budget_g: f64,
    /// `emissions_g / budget_g`; infinite for a positive draw on a zero budget.
    pub utilization: f64,
    pub qoe_term: f64,
    pub rev_term: f64,
    pub revenue: f64,
    pub objective: f64,
    pub users0: f64,
    pub completers: f64,
    pub violated: bool,
}

pub fn utilization(emissions_g: f64, budget_g: f64) -> f64 {
    if budget_g > 0.0 {
        emissions_g / budget_g
    } else if emissions_g > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

impl HourRecord {
    fn new(
        app: &ApplicationModel,
        hour: usize,
        strategy: &str,
        users0: f64,
        budget_g: f64,
        outcome: StrategyOutcome,
    ) -> Self {
        let plan = outcome.plan;
        HourRecord {
            hour,
            strategy: strategy.to_string(),
            versions: app
                .version_names(&plan.config)
                .into_iter()
                .map(str::to_string)
                .collect(),
            replicas: plan.replicas,
            energy_wh: plan.energy_wh,
            emissions_g: plan.emissions_g,
            budget_g,
            utilization: utilization(plan.emissions_g, budget_g),
            qoe_term: plan.qoe_term,
            rev_term: plan.rev_term,
            revenue: plan.revenue,
            objective: plan.objective,
            users0,
            completers: plan.completers,
            violated: outcome.violated,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyAggregate {
    pub strategy: String,
    pub hours: usize,
    pub total_emissions_g: f64,
    pub total_budget_g: f64,
    pub mean_utilization: f64,
    pub violations: usize,
    pub mean_qoe: f64,
    pub total_revenue: f64,
    pub mean_objective: f64,
}

impl StrategyAggregate {
    /// Folds the records of one strategy, in the order given.
    pub fn from_records<'r>(strategy: &str, records: impl IntoIterator<Item = &'r HourRecord>) -> Self {
        let mut agg = StrategyAggregate {
            strategy: strategy.to_string(),
            hours: 0,
            total_emissions_g: 0.0,
            total_budget_g: 0.0,
            mean_utilization: 0.0,
            violations: 0,
            mean_qoe: 0.0,
            total_revenue: 0.0,
            mean_objective: 0.0,
        };
        for r in records.into_iter().filter(|r| r.strategy == strategy) {
            agg.hours += 1;
            agg.total_emissions_g += r.emissions_g;
            agg.total_budget_g += r.budget_g;
            agg.mean_utilization += r.utilization;
            agg.violations += usize::from(r.violated);
            agg.mean_qoe += r.qoe_term;
            agg.total_revenue += r.revenue;
            agg.mean_objective += r.objective;
        }
        if agg.hours > 0 {
            let n = agg.hours as f64;
            agg.mean_utilization /= n;
            agg.mean_qoe /= n;
            agg.mean_objective /= n;
        }
        agg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    /// Ordered by hour, then by position in the strategy list.
    pub records: Vec<HourRecord>,
    /// One entry per strategy, in strategy-list order.
    pub aggregates: Vec<StrategyAggregate>,
}

impl SimulationReport {
    pub fn records_for<'s>(&'s self, strategy: &'s str) -> impl Iterator<Item = &'s HourRecord> + 's {
        self.records.iter().filter(move |r| r.strategy == strategy)
    }

    pub fn aggregate(&self, strategy: &str) -> Option<&StrategyAggregate> {
        self.aggregates.iter().find(|a| a.strategy == strategy)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimOptions {
    /// Roll each strategy's unspent allowance into its next hour.
    pub carryover: bool,
}

pub fn run_simulation(
    app: &ApplicationModel,
    carbon: &CarbonTrace,
    workload: &WorkloadTrace,
    schedule: &BudgetSchedule,
    strategies: &[Strategy],
    options: SimOptions,
) -> Result<SimulationReport> {
    let hours = carbon.len();
    if hours == 0 {
        return Err(Error::InvalidTrace("carbon trace is empty".into()));
    }
    if workload.len() != hours {
        return Err(Error::LengthMismatch {
            what: "workload trace",
            got: workload.len(),
            expected: hours,
        });
    }
    if schedule.len() != hours {
        return Err(Error::LengthMismatch {
            what: "budget schedule",
            got: schedule.len(),
            expected: hours,
        });
    }
    let mut seen = std::collections::HashSet::new();
    for s in strategies {
        if !seen.insert(s.id()) {
            return Err(Error::Scenario(format!("strategies: `{}` listed twice", s.id())));
        }
    }

    let ci = carbon.values();
    let users = workload.values();
    let budget = &schedule.hourly_g;

    let records: Vec<HourRecord> = if options.carryover {
        let mut per_strategy: Vec<Vec<HourRecord>> = Vec::with_capacity(strategies.len());
        for s in strategies {
            let mut carry = 0.0;
            let mut rows = Vec::with_capacity(hours);
            for h in 0..hours {
                let available = budget[h] + carry;
                let outcome = s.select(app, users[h], ci[h], available);
                carry = (available - outcome.plan.emissions_g).max(0.0);
                rows.push(HourRecord::new(app, h, s.id(), users[h], available, outcome));
            }
            per_strategy.push(rows);
        }
        (0..hours)
            .flat_map(|h| per_strategy.iter().map(move |rows| rows[h].clone()))
            .collect()
    } else {
        (0..hours)
            .into_par_iter()
            .flat_map_iter(|h| {
                strategies.iter().map(move |s| {
                    let outcome = s.select(app, users[h], ci[h], budget[h]);
                    HourRecord::new(app, h, s.id(), users[h], budget[h], outcome)
                })
            })
            .collect()
    };

    let aggregates = strategies
        .iter()
        .map(|s| StrategyAggregate::from_records(s.id(), &records))
        .collect();
    Ok(SimulationReport { records, aggregates })
}

/// Total emissions of running `config` every hour of the traces.
pub fn fixed_config_emissions(
    app: &ApplicationModel,
    config: &Configuration,
    carbon: &CarbonTrace,
    workload: &WorkloadTrace,
) -> f64 {
    carbon
        .values()
        .iter()
        .zip(workload.values())
        .map(|(&ci, &users)| evaluate_config(app, config, users, ci, f64::INFINITY).emissions_g)
        .sum()
}

/// A horizon budget placed `fraction` of the way from the low-power
/// configuration's emissions to the high-performance configuration's.
pub fn budget_between_low_and_hp(
    app: &ApplicationModel,
    carbon: &CarbonTrace,
    workload: &WorkloadTrace,
    fraction: f64,
) -> f64 {
    let low = fixed_config_emissions(app, &sca_configs(app).low, carbon, workload);
    let high = fixed_config_emissions(app, &hp_config(app), carbon, workload);
    low + fraction * (high - low)
}

/// Relative change of `a` over `b` in percent. A zero baseline yields 0 when
/// both are zero and a signed infinity otherwise.
pub fn pct_delta(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(a)
        }
    } else {
        (a - b) / b.abs() * 100.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub strategy_a: String,
    pub strategy_b: String,
    pub qoe_delta_pct: f64,
    pub revenue_delta_pct: f64,
    pub objective_delta_pct: f64,
    pub violations_a: usize,
    pub violations_b: usize,
}

/// Every pair `(a, b)` with `a` listed before `b`; deltas are `a` relative to `b`.
pub fn compare(report: &SimulationReport) -> Vec<ComparisonRow> {
    let aggs = &report.aggregates;
    let mut rows = Vec::new();
    for (i, a) in aggs.iter().enumerate() {
        for b in &aggs[i + 1..] {
            rows.push(ComparisonRow {
                strategy_a: a.strategy.clone(),
                strategy_b: b.strategy.clone(),
                qoe_delta_pct: pct_delta(a.mean_qoe, b.mean_qoe),
                revenue_delta_pct: pct_delta(a.total_revenue, b.total_revenue),
                objective_delta_pct: pct_delta(a.mean_objective, b.mean_objective),
                violations_a: a.violations,
                violations_b: b.violations,
            });
        }
    }
    rows
}
