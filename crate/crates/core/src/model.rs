//! Annotated application description: a linear chain of microservices, each
//! offered in one or more versions.
//!
//! The JSON document mirrors the types below field for field. Unknown fields
//! are rejected, which also rules out workflow constructs (gateways, branches)
//! that the chain model cannot express.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_WATTS: f64 = 1e9;
const MAX_REV: f64 = 1e9;

pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_BETA: f64 = 0.5;

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_beta() -> f64 {
    DEFAULT_BETA
}

/// One deployable variant of a microservice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VersionSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_type: Option<String>,
    /// Average power draw of one instance in watts, i.e. Wh per instance-hour.
    pub ed_watts: f64,
    /// Fraction of incoming users that continue to the next microservice.
    pub q: f64,
    /// Requests per hour one instance can serve. Absent on "Off" versions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uc: Option<u64>,
    pub qoe: f64,
    pub rev: f64,
}

/// Scale of the fixed-point view used when summing along the chain.
pub const MICRO: f64 = 1e6;

fn to_micro(x: f64) -> i64 {
    (x * MICRO).round() as i64
}

impl VersionSpec {
    /// Power draw in microwatts. Chain sums run on these integers so that
    /// equal totals compare equal regardless of summation order.
    pub fn ed_micro(&self) -> i64 {
        to_micro(self.ed_watts)
    }

    pub fn qoe_micro(&self) -> i64 {
        to_micro(self.qoe)
    }

    pub fn rev_micro(&self) -> i64 {
        to_micro(self.rev)
    }

    /// An "Off" version draws no power and runs no instances.
    pub fn is_off(&self) -> bool {
        self.ed_watts == 0.0
    }

    fn validate(&self, ms: &str) -> Result<()> {
        let fail = |what: &str| {
            Err(Error::InvalidModel(format!(
                "microservice `{ms}`, version `{}`: {what}",
                self.name
            )))
        };
        if self.name.is_empty() {
            return Err(Error::InvalidModel(format!(
                "microservice `{ms}`: version name must not be empty"
            )));
        }
        if !(self.ed_watts.is_finite() && (0.0..=MAX_WATTS).contains(&self.ed_watts)) {
            return fail("ed_watts must be a non-negative number of at most 1e9");
        }
        if self.ed_watts > 0.0 && self.ed_micro() == 0 {
            return fail("ed_watts below the 1e-6 W resolution");
        }
        if !(0.0..=1.0).contains(&self.q) {
            return fail("q must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.qoe) {
            return fail("qoe must lie in [0, 1]");
        }
        if !(self.rev.is_finite() && (0.0..=MAX_REV).contains(&self.rev)) {
            return fail("rev must be a non-negative number of at most 1e9");
        }
        if self.is_off() {
            if self.qoe != 0.0 || self.rev != 0.0 {
                return fail("an Off version (ed_watts = 0) must have qoe = 0 and rev = 0");
            }
            if self.uc.is_some() {
                return fail("an Off version (ed_watts = 0) must not declare uc");
            }
            if self.instance_type.is_some() {
                return fail("an Off version (ed_watts = 0) must not declare instance_type");
            }
        } else {
            match self.uc {
                None => return fail("uc is required when ed_watts > 0"),
                Some(0) => return fail("uc must be positive"),
                Some(_) => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Microservice {
    pub name: String,
    pub optional: bool,
    pub versions: Vec<VersionSpec>,
}

impl Microservice {
    /// Index of the Off version, if the microservice is optional.
    pub fn off_index(&self) -> Option<usize> {
        self.versions.iter().position(VersionSpec::is_off)
    }

    pub fn version_index(&self, name: &str) -> Option<usize> {
        self.versions.iter().position(|v| v.name == name)
    }

    fn validate(&self) -> Result<()> {
        let name = &self.name;
        if name.is_empty() {
            return Err(Error::InvalidModel(
                "microservice name must not be empty".into(),
            ));
        }
        if self.versions.is_empty() {
            return Err(Error::InvalidModel(format!(
                "microservice `{name}`: at least one version is required"
            )));
        }
        let mut seen = HashSet::new();
        for v in &self.versions {
            v.validate(name)?;
            if !seen.insert(v.name.as_str()) {
                return Err(Error::InvalidModel(format!(
                    "microservice `{name}`: duplicate version name `{}`",
                    v.name
                )));
            }
        }
        let off = self.versions.iter().filter(|v| v.is_off()).count();
        match (self.optional, off) {
            (true, 1) | (false, 0) => Ok(()),
            (true, n) => Err(Error::InvalidModel(format!(
                "microservice `{name}`: optional microservices need exactly one Off version \
                 (ed_watts = 0), found {n}"
            ))),
            (false, _) => Err(Error::InvalidModel(format!(
                "microservice `{name}`: mandatory microservices cannot have an Off version \
                 (ed_watts = 0)"
            ))),
        }
    }
}

/// The annotated application together with the objective weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplicationModel {
    pub name: String,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Execution order of the chain.
    pub microservices: Vec<Microservice>,
}

impl ApplicationModel {
    pub fn validate(&self) -> Result<()> {
        if self.microservices.is_empty() {
            return Err(Error::InvalidModel(
                "at least one microservice is required".into(),
            ));
        }
        let mut seen = HashSet::new();
        for ms in &self.microservices {
            ms.validate()?;
            if !seen.insert(ms.name.as_str()) {
                return Err(Error::InvalidModel(format!(
                    "duplicate microservice name `{}`",
                    ms.name
                )));
            }
        }
        check_weights(self.alpha, self.beta)
    }

    /// Replaces the objective weights, re-checking the weight invariant.
    pub fn with_weights(mut self, alpha: Option<f64>, beta: Option<f64>) -> Result<Self> {
        if let Some(a) = alpha {
            self.alpha = a;
        }
        if let Some(b) = beta {
            self.beta = b;
        }
        check_weights(self.alpha, self.beta)?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.microservices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.microservices.is_empty()
    }

    /// Number of configurations, saturating at `u128::MAX`.
    pub fn config_count(&self) -> u128 {
        self.microservices
            .iter()
            .fold(1u128, |acc, ms| acc.saturating_mul(ms.versions.len() as u128))
    }

    pub fn version(&self, ms: usize, v: usize) -> &VersionSpec {
        &self.microservices[ms].versions[v]
    }

    /// Resolves version names (one per microservice, in chain order).
    pub fn configuration_by_names<S: AsRef<str>>(&self, names: &[S]) -> Result<Configuration> {
        if names.len() != self.len() {
            return Err(Error::InvalidConfig(format!(
                "expected {} version names, got {}",
                self.len(),
                names.len()
            )));
        }
        let chosen = self
            .microservices
            .iter()
            .zip(names)
            .map(|(ms, n)| {
                ms.version_index(n.as_ref()).ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "microservice `{}` has no version `{}`",
                        ms.name,
                        n.as_ref()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Configuration(chosen))
    }

    pub fn version_names(&self, config: &Configuration) -> Vec<&str> {
        config
            .iter()
            .enumerate()
            .map(|(i, &v)| self.version(i, v).name.as_str())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }
}

fn check_weights(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha >= 0.0 && beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidModel(
            "alpha and beta must be finite and non-negative".into(),
        ));
    }
    if alpha + beta <= 0.0 {
        return Err(Error::InvalidModel("alpha + beta must be positive".into()));
    }
    Ok(())
}

/// Parses and validates an application description.
pub fn parse_application(document: &str) -> Result<ApplicationModel> {
    let app: ApplicationModel =
        serde_json::from_str(document).map_err(|e| Error::Schema(e.to_string()))?;
    app.validate()?;
    Ok(app)
}

pub fn load_application(path: impl AsRef<std::path::Path>) -> Result<ApplicationModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_application(&text)
}

/// One version index per microservice, in chain order.
///
/// Ordering is lexicographic over the index list, which is the order
/// [`config_space`] enumerates in and the final tie-breaker of every selector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Configuration(pub Vec<usize>);

impl Configuration {
    pub fn new(chosen: Vec<usize>) -> Self {
        Configuration(chosen)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn check(&self, app: &ApplicationModel) -> Result<()> {
        if self.len() != app.len() {
            return Err(Error::InvalidConfig(format!(
                "configuration has {} entries, application has {} microservices",
                self.len(),
                app.len()
            )));
        }
        for (ms, &v) in app.microservices.iter().zip(self.iter()) {
            if v >= ms.versions.len() {
                return Err(Error::InvalidConfig(format!(
                    "version index {v} out of range for microservice `{}` ({} versions)",
                    ms.name,
                    ms.versions.len()
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Odometer over all configurations; the last microservice varies fastest.
#[derive(Debug, Clone)]
pub struct ConfigSpace {
    radices: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for ConfigSpace {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut pos = succ.len();
        let mut carried_out = true;
        while pos > 0 {
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.radices[pos] {
                carried_out = false;
                break;
            }
            succ[pos] = 0;
        }
        if !carried_out {
            self.next = Some(succ);
        }
        Some(Configuration(current))
    }
}

pub fn config_space(app: &ApplicationModel) -> ConfigSpace {
    let radices: Vec<usize> = app.microservices.iter().map(|m| m.versions.len()).collect();
    let next = if radices.contains(&0) {
        None
    } else {
        Some(vec![0; radices.len()])
    };
    ConfigSpace { radices, next }
}
