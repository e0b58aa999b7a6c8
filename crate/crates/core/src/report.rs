//! Machine-readable analysis records.
//!
//! Everything is pre-rendered to strings so that serialization is stable
//! across versions of the expression printer's internals: a record computed
//! once and stored as a golden file stays comparable byte for byte.

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "1";

/// A named verification with its outcome.  `detail` holds the residual or
/// the compared values when the check fails, and a short confirmation when
/// it passes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocusRecord {
    pub locus: String,
    pub kind: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchRecord {
    pub name: String,
    pub potential: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub from: String,
    pub to: String,
    /// The phase `chi` of the group element `exp(i chi)`.
    pub phase: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub label: String,
    pub coordinate: String,
    pub period: String,
    /// Winding per period divided by `2 pi`; the integer `n` when the
    /// condition holds.
    pub winding: String,
    pub statement: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChernRecord {
    pub label: String,
    pub form: String,
    pub cycle: String,
    pub number: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub label: String,
    pub axis: String,
    pub quantized: String,
}

/// One key/value line of free-form output (connection components, curvature
/// entries, invariants) used by the non-pipeline commands.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub key: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionRecord {
    pub title: String,
    pub entries: Vec<EntryRecord>,
}

/// The full result of one analysis run.  Empty collections are omitted from
/// JSON, so a freshly constructed record serializes as `{}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Record {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub loci: Vec<LocusRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub patches: Vec<PatchRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transitions: Vec<TransitionRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conditions: Vec<ConditionRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub chern: Vec<ChernRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub energies: Vec<EnergyRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sections: Vec<SectionRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Record {
    pub fn named(name: &str) -> Record {
        Record {
            name: name.to_string(),
            ..Record::default()
        }
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(CheckRecord {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        let envelope = serde_json::json!({
            "schema": SCHEMA_VERSION,
            "report": self,
        });
        let mut s = serde_json::to_string_pretty(&envelope).expect("record serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Record, serde_json::Error> {
        #[derive(Deserialize)]
        struct Envelope {
            #[allow(dead_code)]
            schema: String,
            report: Record,
        }
        Ok(serde_json::from_str::<Envelope>(s)?.report)
    }

    /// Section-per-key plain text, one fact per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, line: String| {
            out.push_str(&line);
            out.push('\n');
        };
        if !self.name.is_empty() {
            push(&mut out, format!("case: {}", self.name));
        }
        if !self.checks.is_empty() {
            push(&mut out, "checks:".into());
            for c in &self.checks {
                let status = if c.pass { "pass" } else { "FAIL" };
                if c.detail.is_empty() {
                    push(&mut out, format!("  {}: {}", c.name, status));
                } else {
                    push(&mut out, format!("  {}: {} ({})", c.name, status, c.detail));
                }
            }
        }
        if !self.loci.is_empty() {
            push(&mut out, "loci:".into());
            for l in &self.loci {
                push(&mut out, format!("  {}: {} ({})", l.locus, l.kind, l.detail));
            }
        }
        if !self.patches.is_empty() {
            push(&mut out, "patches:".into());
            for p in &self.patches {
                let excl = if p.excluded.is_empty() {
                    String::new()
                } else {
                    format!("  [excludes {}]", p.excluded.join(", "))
                };
                push(&mut out, format!("  {}: {}{}", p.name, p.potential, excl));
            }
        }
        if !self.transitions.is_empty() {
            push(&mut out, "transitions:".into());
            for t in &self.transitions {
                push(
                    &mut out,
                    format!("  {} -> {}: exp(i*({}))", t.from, t.to, t.phase),
                );
            }
        }
        if !self.conditions.is_empty() {
            push(&mut out, "conditions:".into());
            for c in &self.conditions {
                push(&mut out, format!("  {}: {}", c.label, c.statement));
                push(
                    &mut out,
                    format!(
                        "    winding {} over period {} in {}",
                        c.winding, c.period, c.coordinate
                    ),
                );
            }
        }
        if !self.chern.is_empty() {
            push(&mut out, "chern:".into());
            for c in &self.chern {
                push(&mut out, format!("  {}: {}", c.label, c.form));
                push(&mut out, format!("    over {}: {}", c.cycle, c.number));
            }
        }
        if !self.energies.is_empty() {
            push(&mut out, "energies:".into());
            for e in &self.energies {
                push(
                    &mut out,
                    format!("  {}: {} -> {}", e.label, e.axis, e.quantized),
                );
            }
        }
        for s in &self.sections {
            push(&mut out, format!("{}:", s.title));
            for e in &s.entries {
                push(&mut out, format!("  {} = {}", e.key, e.value));
            }
        }
        if !self.notes.is_empty() {
            push(&mut out, "notes:".into());
            for n in &self.notes {
                push(&mut out, format!("  {}", n));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_record_serializes_to_an_empty_object() {
        let r = Record::default();
        let json = r.to_json();
        assert!(json.contains("\"schema\": \"1\""));
        assert!(json.contains("\"report\": {}"));
        let back = Record::from_json(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn records_round_trip_through_json() {
        let mut r = Record::named("example");
        r.check("field-equations", true, "");
        r.patches.push(PatchRecord {
            name: "U1".into(),
            potential: "(e/r) dt".into(),
            excluded: vec!["r = r_plus".into()],
        });
        r.transitions.push(TransitionRecord {
            from: "U2".into(),
            to: "U1".into(),
            phase: "e*(1/r_minus - 1/r_plus)*t".into(),
        });
        r.conditions.push(ConditionRecord {
            label: "transition single-valuedness".into(),
            coordinate: "t".into(),
            period: "2*pi".into(),
            winding: "2*sqrt(-e^2 + m^2)/e".into(),
            statement: "2*sqrt(-e^2 + m^2)/e = n".into(),
        });
        r.chern.push(ChernRecord {
            label: "c1".into(),
            form: "(-e/(2*pi*r^2)) dt^dr".into(),
            cycle: "t in [0, 2*pi], r in [r_minus, r_plus]".into(),
            number: "-n".into(),
        });
        let json = r.to_json();
        for key in ["patches", "transitions", "conditions", "chern"] {
            assert!(json.contains(key), "missing key {}", key);
        }
        let back = Record::from_json(&json).unwrap();
        assert_eq!(back, r);
        let text = r.to_text();
        assert!(text.contains("case: example"));
        assert!(text.contains("patches:"));
    }
}
