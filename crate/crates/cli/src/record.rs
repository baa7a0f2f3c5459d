use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;
use vcalc_core::context::Context;
use vcalc_core::decision::{Observation, Verdict};

/// A finite real written with 17 significant digits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Num {
    pub fn finite(x: f64) -> Option<Num> {
        x.is_finite().then_some(Num(x))
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let text = format!("{:.16e}", self.0);
        match RawValue::from_string(text) {
            Ok(raw) => raw.serialize(s),
            Err(_) => s.serialize_f64(self.0),
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Num, D::Error> {
        f64::deserialize(d).map(Num)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Value,
    Verdict,
    Definition,
    Error,
    /// Closing tally of a script that ran checks.
    Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seen {
    Flag(bool),
    Value(Num),
}

/// One index the engine actually looked at. `seen` is null where the
/// sequence was undefined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub index: u64,
    pub seen: Option<Seen>,
}

impl Evidence {
    pub fn from_observations(obs: &[(u64, Observation)]) -> Vec<Evidence> {
        obs.iter()
            .map(|&(index, o)| Evidence {
                index,
                seen: match o {
                    Observation::True => Some(Seen::Flag(true)),
                    Observation::False => Some(Seen::Flag(false)),
                    Observation::Undefined => None,
                    Observation::Value(x) => Num::finite(x).map(Seen::Value),
                },
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub expected: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Payload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rendered: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binding: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckResult>,
}

impl Payload {
    pub fn verdict(relation: &str, v: &Verdict) -> Payload {
        Payload {
            relation: Some(relation.to_string()),
            outcome: Some(v.outcome.name().to_string()),
            mode: Some(v.mode.name().to_string()),
            witness: v.witness,
            ..Payload::default()
        }
    }

    pub fn message(text: impl Into<String>) -> Payload {
        Payload {
            message: Some(text.into()),
            ..Payload::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSnapshot {
    pub start: u64,
    pub growth: Num,
    pub stages: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol: Num,
    pub quad_abs: Num,
    pub quad_rel: Num,
    pub divergence: Num,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub input: String,
    pub kind: Kind,
    pub payload: Payload,
    pub evidence: Vec<Evidence>,
    pub schedule: ScheduleSnapshot,
    pub tolerances: Tolerances,
}

impl OutputRecord {
    pub fn new(input: &str, kind: Kind, payload: Payload, ctx: &Context) -> OutputRecord {
        OutputRecord {
            input: input.to_string(),
            kind,
            payload,
            evidence: Vec::new(),
            schedule: ScheduleSnapshot {
                start: ctx.schedule.start(),
                growth: Num(ctx.schedule.growth()),
                stages: ctx.schedule.stage_count(),
            },
            tolerances: Tolerances {
                tol: Num(ctx.tol),
                quad_abs: Num(ctx.quadrature.abs_tol),
                quad_rel: Num(ctx.quadrature.rel_tol),
                divergence: Num(ctx.divergence_threshold),
            },
        }
    }

    pub fn is_error(&self) -> bool {
        self.kind == Kind::Error
    }
}

/// One JSON object on a single line.
pub fn export_json(record: &OutputRecord) -> String {
    serde_json::to_string(record).expect("records always serialize")
}

impl fmt::Display for OutputRecord {
    /// The plain-text form shown by the REPL.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.payload;
        match self.kind {
            Kind::Error => write!(
                f,
                "error: {}",
                p.message.as_deref().unwrap_or("unknown error")
            )?,
            Kind::Summary => f.write_str(p.message.as_deref().unwrap_or(""))?,
            Kind::Definition => write!(
                f,
                "{} := {}",
                p.name.as_deref().unwrap_or("?"),
                p.rendered.as_deref().unwrap_or("")
            )?,
            Kind::Verdict => {
                write!(
                    f,
                    "{}: {} ({})",
                    p.relation.as_deref().unwrap_or("verdict"),
                    p.outcome.as_deref().unwrap_or("unknown"),
                    p.mode.as_deref().unwrap_or("sampled")
                )?;
                if let Some(w) = p.witness {
                    write!(f, " from index {w}")?;
                }
            }
            Kind::Value => {
                let rendered = p.rendered.as_deref().unwrap_or("");
                f.write_str(rendered)?;
                match (p.value, &p.limit) {
                    (Some(Num(v)), _) if rendered != v.to_string() => write!(f, "  ≈ {v}")?,
                    (None, Some(limit)) => write!(f, "  [{limit}]")?,
                    _ => {}
                }
            }
        }
        if p.check.as_ref().is_some_and(|c| c.passed) {
            f.write_str("  [check passed]")?;
        }
        for (k, v) in &p.details {
            write!(f, "\n  {k}: {v}")?;
        }
        Ok(())
    }
}
