//! Check records and the canonical machine report.

use crate::error::Result;


/// One named identity check.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    /// Stable key, e.g. `pentagon.V`.
    pub name: String,
    /// Neutral label of the identity being checked.
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub note: Option<String>,
}

impl Record {
    /// Pass iff the residual is finite and below `tolerance`; an error fails
    /// the record and is kept as its note.
    pub fn residual(name: &str, anchor: &str, r: Result<f64>, tolerance: f64) -> Record {
        match r {
            Ok(r) => Record {
                name: name.into(),
                anchor: anchor.into(),
                residual: r,
                tolerance,
                pass: r.is_finite() && r < tolerance,
                note: None,
            },
            Err(e) => Record {
                name: name.into(),
                anchor: anchor.into(),
                residual: f64::INFINITY,
                tolerance,
                pass: false,
                note: Some(e.to_string()),
            },
        }
    }

    /// A record whose verdict is decided by the caller.
    pub fn verdict(name: &str, anchor: &str, pass: bool, residual: f64, tolerance: f64, note: Option<String>) -> Record {
        Record { name: name.into(), anchor: anchor.into(), residual, tolerance, pass, note }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Record {
        self.note = Some(note.into());
        self
    }
}

pub fn all_pass(records: &[Record]) -> bool {
    records.iter().all(|r| r.pass)
}

/// Residuals and thresholds in the machine format: scientific notation with
/// six significant digits.
pub fn sci(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.5e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Hex SHA-256 of the input document.
pub fn digest(text: &str) -> String {
    use sha2::{Digest, Sha256};
    format!("sha256:{}", hex::encode(Sha256::digest(text.as_bytes())))
}

/// The result of one command on one input.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub tool_version: String,
    pub command: String,
    pub input_digest: String,
    /// Effective settings: tolerance, seed, negative control.
    pub settings: Vec<(String, String)>,
    pub sections: Vec<(String, Vec<Record>)>,
    pub dims: Vec<(String, usize)>,
    /// Wall-clock seconds; shown in the text format only.
    pub timing: Option<f64>,
}

impl VerificationReport {
    pub fn new(command: &str, input: &str) -> VerificationReport {
        VerificationReport {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            input_digest: digest(input),
            settings: Vec::new(),
            sections: Vec::new(),
            dims: Vec::new(),
            timing: None,
        }
    }

    pub fn records(&self) -> impl Iterator<Item = &Record> {
        self.sections.iter().flat_map(|(_, r)| r.iter())
    }

    pub fn pass(&self) -> bool {
        self.records().all(|r| r.pass)
    }

    pub fn failing(&self) -> Vec<&Record> {
        self.records().filter(|r| !r.pass).collect()
    }

    pub fn find(&self, name: &str) -> Option<&Record> {
        self.records().find(|r| r.name == name)
    }

    /// Canonical JSON: sorted keys, fixed-precision numbers, trailing newline.
    /// Timing is left out so that reruns are byte-identical.
    pub fn to_machine(&self) -> String {
        use serde_json::{json, Map, Value};
        let checks: Vec<Value> = self
            .sections
            .iter()
            .flat_map(|(sec, recs)| {
                recs.iter().map(move |r| {
                    json!({
                        "section": sec,
                        "check_name": r.name,
                        "paper_anchor": r.anchor,
                        "residual": sci(r.residual),
                        "threshold": sci(r.tolerance),
                        "pass": r.pass,
                        "note": r.note,
                    })
                })
            })
            .collect();
        let dims: Map<String, Value> = self.dims.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let settings: Map<String, Value> = self.settings.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let doc = json!({
            "tool_version": self.tool_version,
            "command": self.command,
            "input_digest": self.input_digest,
            "settings": settings,
            "checks": checks,
            "dimensions": dims,
            "pass": self.pass(),
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("plain JSON values serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("gkac {} {}\ninput {}\n", self.tool_version, self.command, self.input_digest);
        for (k, v) in &self.settings {
            s += &format!("{k} = {v}\n");
        }
        for (sec, recs) in &self.sections {
            s += &format!("\n[{sec}]\n");
            for r in recs {
                let mut line = format!(
                    "{} {:<44} {:>12} < {:<12}",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.name,
                    sci(r.residual),
                    sci(r.tolerance)
                );
                if let Some(n) = &r.note {
                    line += &format!("  {n}");
                }
                s += line.trim_end();
                s.push('\n');
            }
        }
        if !self.dims.is_empty() {
            s += "\n[dimensions]\n";
            for (k, v) in &self.dims {
                s += &format!("{k:<24} {v}\n");
            }
        }
        if let Some(t) = self.timing {
            s += &format!("\ntime {t:.3}s\n");
        }
        let n = self.records().count();
        let f = self.failing().len();
        s += &format!("\n{} ({} checks, {} failing)\n", if self.pass() { "PASS" } else { "FAIL" }, n, f);
        s
    }
}
