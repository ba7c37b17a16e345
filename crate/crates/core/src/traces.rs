//! Hourly carbon-intensity and workload series, synthetic generators, and the
//! split of a horizon-wide carbon budget into hourly allowances.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CARBON_HEADER: [&str; 2] = ["hour", "ci_g_per_kwh"];
pub const WORKLOAD_HEADER: [&str; 2] = ["hour", "users"];

/// Relative amplitude of the uniform noise added by the generators.
pub const NOISE_FRACTION: f64 = 0.05;
const PERIOD_HOURS: f64 = 24.0;
/// Floor applied to generated values, as a fraction of the base level.
const CLAMP_FRACTION: f64 = 1e-3;

/// Grid carbon intensity per hour, gCO2e/kWh. Hour `h` is `values[h]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CarbonTrace {
    values: Vec<f64>,
}

impl CarbonTrace {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (h, &ci) in values.iter().enumerate() {
            if !(ci.is_finite() && ci > 0.0) {
                return Err(Error::InvalidTrace(format!(
                    "hour {h}: carbon intensity must be positive, got {ci}"
                )));
            }
        }
        Ok(CarbonTrace { values })
    }

    pub fn constant(hours: usize, ci: f64) -> Result<Self> {
        Self::new(vec![ci; hours])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Users entering the application per hour.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadTrace {
    values: Vec<f64>,
}

impl WorkloadTrace {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (h, &u) in values.iter().enumerate() {
            if !(u.is_finite() && u >= 0.0) {
                return Err(Error::InvalidTrace(format!(
                    "hour {h}: users must be non-negative, got {u}"
                )));
            }
        }
        Ok(WorkloadTrace { values })
    }

    pub fn constant(hours: usize, users: f64) -> Result<Self> {
        Self::new(vec![users; hours])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllocationMode {
    /// Hourly share follows the expected workload.
    Proportional,
    Uniform,
}

impl std::str::FromStr for AllocationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proportional" => Ok(AllocationMode::Proportional),
            "uniform" => Ok(AllocationMode::Uniform),
            other => Err(Error::Scenario(format!(
                "alloc: expected `proportional` or `uniform`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetSchedule {
    pub total_g: f64,
    pub hourly_g: Vec<f64>,
}

impl BudgetSchedule {
    pub fn len(&self) -> usize {
        self.hourly_g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hourly_g.is_empty()
    }
}

/// Splits `total_g` over the hours of `workload`.
pub fn allocate_budget(
    total_g: f64,
    workload: &WorkloadTrace,
    mode: AllocationMode,
) -> Result<BudgetSchedule> {
    if !(total_g.is_finite() && total_g > 0.0) {
        return Err(Error::Budget(format!(
            "total budget must be positive, got {total_g}"
        )));
    }
    if workload.is_empty() {
        return Err(Error::Budget("workload trace is empty".into()));
    }
    let hourly_g = match mode {
        AllocationMode::Uniform => {
            let share = total_g / workload.len() as f64;
            vec![share; workload.len()]
        }
        AllocationMode::Proportional => {
            let sum: f64 = workload.values().iter().sum();
            if sum <= 0.0 {
                return Err(Error::Budget(
                    "proportional allocation needs a workload with at least one user".into(),
                ));
            }
            workload
                .values()
                .iter()
                .map(|&u| total_g * (u / sum))
                .collect()
        }
    };
    Ok(BudgetSchedule { total_g, hourly_g })
}

fn check_generator(hours: usize, base: f64, amplitude: f64) -> Result<()> {
    if hours == 0 {
        return Err(Error::Generator("hours must be at least 1".into()));
    }
    if !(base.is_finite() && amplitude.is_finite()) {
        return Err(Error::Generator("base and amplitude must be finite".into()));
    }
    if amplitude < 0.0 {
        return Err(Error::Generator("amplitude must be non-negative".into()));
    }
    if amplitude >= base {
        return Err(Error::Generator(format!(
            "amplitude ({amplitude}) must be smaller than base ({base})"
        )));
    }
    Ok(())
}

/// `base + amplitude * sin(2*pi*h/24) + noise`, noise uniform in
/// `±NOISE_FRACTION * base`. A zero amplitude yields a flat series without
/// noise.
fn diurnal(hours: usize, base: f64, amplitude: f64, seed: u64) -> Result<Vec<f64>> {
    check_generator(hours, base, amplitude)?;
    if amplitude == 0.0 {
        return Ok(vec![base; hours]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let floor = base * CLAMP_FRACTION;
    Ok((0..hours)
        .map(|h| {
            let phase = 2.0 * PI * (h as f64 % PERIOD_HOURS) / PERIOD_HOURS;
            let noise = rng.gen_range(-1.0..=1.0) * NOISE_FRACTION * base;
            (base + amplitude * phase.sin() + noise).max(floor)
        })
        .collect())
}

pub fn gen_synthetic_carbon(
    hours: usize,
    base: f64,
    amplitude: f64,
    seed: u64,
) -> Result<CarbonTrace> {
    CarbonTrace::new(diurnal(hours, base, amplitude, seed)?)
}

pub fn gen_synthetic_workload(
    hours: usize,
    base: f64,
    amplitude: f64,
    seed: u64,
) -> Result<WorkloadTrace> {
    WorkloadTrace::new(diurnal(hours, base, amplitude, seed)?)
}

fn read_series(reader: impl Read, header: [&str; 2]) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let found = rdr
        .headers()
        .map_err(|e| Error::TraceParse {
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    if found.len() != 2 || found.get(0) != Some(header[0]) || found.get(1) != Some(header[1]) {
        return Err(Error::TraceParse {
            line: 1,
            msg: format!(
                "expected header `{}`, got `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::TraceParse {
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let err = |msg: String| Error::TraceParse { line, msg };
        if record.len() != 2 {
            return Err(err(format!("expected 2 fields, got {}", record.len())));
        }
        let hour: usize = record[0]
            .parse()
            .map_err(|_| err(format!("invalid hour `{}`", &record[0])))?;
        let value: f64 = record[1]
            .parse()
            .map_err(|_| err(format!("invalid {} `{}`", header[1], &record[1])))?;
        if hour != values.len() {
            return Err(err(format!(
                "hour {hour} out of sequence, expected {} (hours must be contiguous from 0)",
                values.len()
            )));
        }
        if !value.is_finite() {
            return Err(err(format!("{} must be finite", header[1])));
        }
        values.push(value);
    }
    Ok(values)
}

fn with_line(values: &[f64], check: impl Fn(f64) -> bool, what: &str) -> Result<()> {
    match values.iter().position(|&v| !check(v)) {
        // header is line 1, hour h sits on line h + 2
        Some(h) => Err(Error::TraceParse {
            line: h as u64 + 2,
            msg: format!("{what}, got {}", values[h]),
        }),
        None => Ok(()),
    }
}

pub fn read_carbon_trace(reader: impl Read) -> Result<CarbonTrace> {
    let values = read_series(reader, CARBON_HEADER)?;
    with_line(&values, |v| v > 0.0, "carbon intensity must be positive")?;
    CarbonTrace::new(values)
}

pub fn read_workload_trace(reader: impl Read) -> Result<WorkloadTrace> {
    let values = read_series(reader, WORKLOAD_HEADER)?;
    with_line(&values, |v| v >= 0.0, "users must be non-negative")?;
    WorkloadTrace::new(values)
}

pub fn load_carbon_trace(path: impl AsRef<Path>) -> Result<CarbonTrace> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_carbon_trace(file).map_err(|e| prefix_path(path, e))
}

pub fn load_workload_trace(path: impl AsRef<Path>) -> Result<WorkloadTrace> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_workload_trace(file).map_err(|e| prefix_path(path, e))
}

fn prefix_path(path: &Path, e: Error) -> Error {
    match e {
        Error::TraceParse { line, msg } => Error::TraceParse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    }
}

fn write_series(mut w: impl Write, header: [&str; 2], values: &[f64]) -> std::io::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for (h, v) in values.iter().enumerate() {
        writeln!(w, "{h},{v:.6}")?;
    }
    w.flush()
}

/// Writes a carbon trace; values carry 6 fractional digits.
pub fn write_carbon_trace(w: impl Write, trace: &CarbonTrace) -> std::io::Result<()> {
    write_series(w, CARBON_HEADER, trace.values())
}

pub fn write_workload_trace(w: impl Write, trace: &WorkloadTrace) -> std::io::Result<()> {
    write_series(w, WORKLOAD_HEADER, trace.values())
}
