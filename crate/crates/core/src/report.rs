//! CSV rendering of simulation results. Reals carry 6 fractional digits;
//! infinities render as `inf`.

use crate::sim::{ComparisonRow, SimulationReport};

pub const HOURLY_HEADER: [&str; 12] = [
    "hour", "strategy", "config", "replicas", "energy_wh", "emissions_g", "budget_g",
    "utilization", "qoe", "revenue", "objective", "violated",
];

pub const SUMMARY_HEADER: [&str; 9] = [
    "strategy", "hours", "total_emissions_g", "total_budget_g", "mean_utilization",
    "violations", "mean_qoe", "total_revenue", "mean_objective",
];

pub const COMPARISON_HEADER: [&str; 7] = [
    "strategy_a", "strategy_b", "qoe_delta_pct", "revenue_delta_pct", "objective_delta_pct",
    "violations_a", "violations_b",
];

pub fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.6}")
    }
}

fn render<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// One row per (hour, strategy). `config` joins version names with `;`.
pub fn hourly_csv(report: &SimulationReport) -> String {
    render(
        &HOURLY_HEADER,
        report.records.iter().map(|r| {
            let replicas: Vec<String> = r.replicas.iter().map(u64::to_string).collect();
            vec![
                r.hour.to_string(),
                r.strategy.clone(),
                r.versions.join(";"),
                replicas.join(";"),
                num(r.energy_wh),
                num(r.emissions_g),
                num(r.budget_g),
                num(r.utilization),
                num(r.qoe_term),
                num(r.revenue),
                num(r.objective),
                r.violated.to_string(),
            ]
        }),
    )
}

pub fn summary_csv(report: &SimulationReport) -> String {
    render(
        &SUMMARY_HEADER,
        report.aggregates.iter().map(|a| {
            vec![
                a.strategy.clone(),
                a.hours.to_string(),
                num(a.total_emissions_g),
                num(a.total_budget_g),
                num(a.mean_utilization),
                a.violations.to_string(),
                num(a.mean_qoe),
                num(a.total_revenue),
                num(a.mean_objective),
            ]
        }),
    )
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    render(
        &COMPARISON_HEADER,
        rows.iter().map(|c| {
            vec![
                c.strategy_a.clone(),
                c.strategy_b.clone(),
                num(c.qoe_delta_pct),
                num(c.revenue_delta_pct),
                num(c.objective_delta_pct),
                c.violations_a.to_string(),
                c.violations_b.to_string(),
            ]
        }),
    )
}
