//! Report records written by `verify`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use sparse_poincare_core::report::{Instance, Metric, VerificationReport};

use crate::config::{ExperimentConfig, TheoremId};
use crate::error::Result;

pub const REPORT_SCHEMA: u32 = 1;

/// Floats that may be infinite or NaN, written as JSON numbers when finite
/// and as the strings `"inf"`, `"-inf"`, `"nan"` otherwise.
mod float {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            super::text(*v).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => super::parse_text(&t).ok_or_else(|| serde::de::Error::custom(format!("bad float `{t}`"))),
        }
    }

    pub mod option {
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(x) => super::serialize(x, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            #[derive(Deserialize)]
            struct W(#[serde(with = "super")] f64);
            Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
        }
    }
}

fn text(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn parse_text(t: &str) -> Option<f64> {
    match t {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub name: String,
    #[serde(with = "float")]
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub label: String,
    #[serde(with = "float")]
    pub lhs: f64,
    #[serde(with = "float")]
    pub rhs: f64,
    #[serde(with = "float::option")]
    pub theoretical_constant: Option<f64>,
    #[serde(with = "float")]
    pub measured_constant: f64,
    pub pass: bool,
    pub witness: Option<String>,
    pub metrics: Vec<MetricRecord>,
}

impl From<Instance> for InstanceRecord {
    fn from(i: Instance) -> Self {
        Self {
            label: i.label,
            lhs: i.lhs,
            rhs: i.rhs,
            theoretical_constant: i.theoretical_constant,
            measured_constant: i.measured_constant,
            pass: i.pass,
            witness: i.witness,
            metrics: i.metrics.into_iter().map(|Metric { name, value }| MetricRecord { name, value }).collect(),
        }
    }
}

impl InstanceRecord {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Every inequality passed but a refinement or uniformity check did not.
    Inconclusive,
}

/// Build facts that a report depends on. Deliberately free of timestamps,
/// host names and thread counts, so reruns are byte-identical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub harness: String,
    pub arch: String,
    pub os: String,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            harness: env!("CARGO_PKG_VERSION").into(),
            arch: std::env::consts::ARCH.into(),
            os: std::env::consts::OS.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub theorem: TheoremId,
    pub status: Status,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub environment: Environment,
    pub instances: Vec<InstanceRecord>,
    pub notes: Vec<String>,
}

/// Labels of instances whose failure makes a run inconclusive rather than
/// failed.
pub const STABILITY_PREFIX: &str = "stability:";

impl Report {
    pub fn new(cfg: &ExperimentConfig, r: VerificationReport) -> Self {
        let instances: Vec<InstanceRecord> = r.instances.into_iter().map(Into::into).collect();
        let failed = |stab: bool| instances.iter().any(|i| !i.pass && i.label.starts_with(STABILITY_PREFIX) == stab);
        let status = if failed(false) {
            Status::Fail
        } else if failed(true) {
            Status::Inconclusive
        } else {
            Status::Pass
        };
        Self {
            schema: REPORT_SCHEMA,
            theorem: cfg.theorem,
            status,
            seed: cfg.seed,
            config: cfg.clone(),
            environment: Environment::current(),
            instances,
            notes: r.notes,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failures(&self) -> impl Iterator<Item = &InstanceRecord> {
        self.instances.iter().filter(|i| !i.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub const CSV_COLUMNS: [&'static str; 9] =
        ["theorem", "label", "lhs", "rhs", "theoretical_constant", "measured_constant", "pass", "witness", "metrics"];

    /// One row per instance; metrics are `name=value` pairs joined by `;`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_COLUMNS)?;
        let num = |v: f64| if v.is_finite() { format!("{v:e}") } else { text(v) };
        for i in &self.instances {
            let metrics = i.metrics.iter().map(|m| format!("{}={}", m.name, num(m.value))).collect::<Vec<_>>().join(";");
            w.write_record([
                self.theorem.as_str().to_string(),
                i.label.clone(),
                num(i.lhs),
                num(i.rhs),
                i.theoretical_constant.map(num).unwrap_or_default(),
                num(i.measured_constant),
                i.pass.to_string(),
                i.witness.clone().unwrap_or_default(),
                metrics,
            ])?;
        }
        w.flush().map_err(|e| crate::error::HarnessError::io("csv output", e))?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv is utf-8"))
    }

    /// One line per failing instance, naming the theorem and the witness.
    pub fn failure_lines(&self) -> Vec<String> {
        self.failures()
            .map(|i| {
                format!(
                    "{}: {} failed: lhs {} rhs {} constant {:?} measured {}{}",
                    self.theorem,
                    i.label,
                    i.lhs,
                    i.rhs,
                    i.theoretical_constant,
                    i.measured_constant,
                    i.witness.as_deref().map(|w| format!(" at {w}")).unwrap_or_default()
                )
            })
            .collect()
    }
}
