//! The `groupoid-format 1` text format.
//!
//! ```text
//! groupoid-format 1
//! # comments run to the end of the line
//! [units]
//! p q
//! [arrows]
//! e_p p p        # id source range
//! [mult]
//! e_p e_p e_p    # a b ab, one line per composable pair
//! [inv]
//! e_p e_p
//! [measure]
//! p 1
//! [haar]         # optional, counting measure by default
//! e_p 1
//! ```
//!
//! Sections may come in any order but each at most once. Identifiers are
//! whitespace-free tokens.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::groupoid::{Groupoid, Haar, Measure};

pub const HEADER: &str = "groupoid-format 1";

const SECTIONS: [&str; 6] = ["units", "arrows", "mult", "inv", "measure", "haar"];

#[derive(Clone, Copy, Debug)]
struct Tok<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col, msg: msg.into() }
}

fn tokens(line: &str, lineno: usize) -> Vec<Tok<'_>> {
    let body = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                let col = body[..s].chars().count() + 1;
                out.push(Tok { text: &body[s..i], line: lineno, col });
                start = None;
            }
            _ => {}
        }
    }
    out
}

struct Section<'a> {
    header: (usize, usize),
    rows: Vec<Vec<Tok<'a>>>,
}

fn positive(t: &Tok<'_>) -> Result<f64> {
    match t.text.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        Ok(_) => Err(err(t.line, t.col, format!("{:?} is not a positive number", t.text))),
        Err(_) => Err(err(t.line, t.col, format!("{:?} is not a decimal", t.text))),
    }
}

/// Parse and validate a groupoid file into its measure (which owns the
/// groupoid and the Haar system).
pub fn parse_groupoid_file(text: &str) -> Result<Measure> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let header = lines.by_ref().find(|(_, l)| !tokens(l, 0).is_empty());
    match header {
        Some((_, l)) if l.split('#').next().unwrap_or("").trim() == HEADER => {}
        Some((n, l)) => {
            let col = l.len() - l.trim_start().len() + 1;
            return Err(err(n, col, format!("expected header {HEADER:?}")));
        }
        None => return Err(err(1, 1, format!("empty document, expected header {HEADER:?}"))),
    }

    let mut sections: HashMap<&str, Section<'_>> = HashMap::new();
    let mut current: Option<&str> = None;
    for (n, l) in lines {
        let toks = tokens(l, n);
        let Some(first) = toks.first() else { continue };
        if first.text.starts_with('[') {
            let name = first.text.trim_start_matches('[').trim_end_matches(']');
            if toks.len() != 1 || !first.text.ends_with(']') {
                return Err(err(n, first.col, "malformed section header"));
            }
            let Some(&name) = SECTIONS.iter().find(|s| **s == name) else {
                return Err(err(n, first.col, format!("unknown section [{name}]")));
            };
            if sections.contains_key(name) {
                return Err(err(n, first.col, format!("duplicate section [{name}]")));
            }
            sections.insert(name, Section { header: (n, first.col), rows: Vec::new() });
            current = Some(name);
            continue;
        }
        let Some(name) = current else {
            return Err(err(n, first.col, "entry outside of any section"));
        };
        sections.get_mut(name).expect("current section exists").rows.push(toks);
    }
    let end = text.lines().count().max(1);
    for name in ["units", "arrows", "mult", "inv", "measure"] {
        if !sections.contains_key(name) {
            return Err(err(end, 1, format!("missing section [{name}]")));
        }
    }

    let arity = |name: &str, k: usize| -> Result<()> {
        for row in &sections[name].rows {
            if row.len() != k {
                let t = row.get(k).unwrap_or(&row[0]);
                return Err(err(t.line, t.col, format!("[{name}] entries have {k} fields, found {}", row.len())));
            }
        }
        Ok(())
    };

    let units: Vec<Tok<'_>> = sections["units"].rows.iter().flatten().copied().collect();
    let mut unit_ids = HashMap::new();
    for t in &units {
        if unit_ids.insert(t.text, ()).is_some() {
            return Err(err(t.line, t.col, format!("duplicate unit {:?}", t.text)));
        }
    }
    let known_unit = |t: &Tok<'_>| -> Result<String> {
        if unit_ids.contains_key(t.text) {
            Ok(t.text.to_string())
        } else {
            Err(err(t.line, t.col, format!("unknown unit {:?}", t.text)))
        }
    };

    arity("arrows", 3)?;
    let mut arrows = Vec::new();
    let mut arrow_ids = HashMap::new();
    for row in &sections["arrows"].rows {
        if arrow_ids.insert(row[0].text, ()).is_some() {
            return Err(err(row[0].line, row[0].col, format!("duplicate arrow {:?}", row[0].text)));
        }
        arrows.push((row[0].text.to_string(), known_unit(&row[1])?, known_unit(&row[2])?));
    }
    let known_arrow = |t: &Tok<'_>| -> Result<String> {
        if arrow_ids.contains_key(t.text) {
            Ok(t.text.to_string())
        } else {
            Err(err(t.line, t.col, format!("unknown arrow {:?}", t.text)))
        }
    };

    arity("mult", 3)?;
    let mut mult = Vec::new();
    for row in &sections["mult"].rows {
        mult.push((known_arrow(&row[0])?, known_arrow(&row[1])?, known_arrow(&row[2])?));
    }
    arity("inv", 2)?;
    let mut inv = Vec::new();
    for row in &sections["inv"].rows {
        inv.push((known_arrow(&row[0])?, known_arrow(&row[1])?));
    }

    let units: Vec<String> = units.iter().map(|t| t.text.to_string()).collect();
    let at = |name: &str| sections[name].header;
    let g = Groupoid::new(units, arrows, &mult, &inv).map_err(|e| {
        let (l, c) = at("mult");
        match e {
            Error::Groupoid(m) => err(l, c, m),
            other => other,
        }
    })?;
    let rep = g.validate();
    if !rep.pass() {
        let (l, c) = at("mult");
        return Err(err(l, c, format!("groupoid axioms fail: {}", rep.violations.join("; "))));
    }

    arity("measure", 2)?;
    let mut mu = vec![None; g.n_units()];
    for row in &sections["measure"].rows {
        let u = g.unit_index(&known_unit(&row[0])?).expect("known unit");
        if mu[u].replace(positive(&row[1])?).is_some() {
            return Err(err(row[0].line, row[0].col, format!("duplicate measure for {:?}", row[0].text)));
        }
    }
    if let Some(u) = mu.iter().position(Option::is_none) {
        let (l, c) = at("measure");
        return Err(err(l, c, format!("no measure for unit {:?}", g.units()[u])));
    }
    let mu: Vec<f64> = mu.into_iter().map(|m| m.expect("checked")).collect();

    let haar = match sections.get("haar") {
        None => Haar::counting(&g),
        Some(sec) => {
            arity("haar", 2)?;
            let mut w = vec![None; g.n_arrows()];
            for row in &sec.rows {
                let x = g.arrow_index(&known_arrow(&row[0])?).expect("known arrow");
                if w[x].replace(positive(&row[1])?).is_some() {
                    return Err(err(row[0].line, row[0].col, format!("duplicate weight for {:?}", row[0].text)));
                }
            }
            if let Some(x) = w.iter().position(Option::is_none) {
                return Err(err(sec.header.0, sec.header.1, format!("no Haar weight for arrow {:?}", g.arrows()[x])));
            }
            let haar = Haar::new(&g, w.into_iter().map(|x| x.expect("checked")).collect())
                .map_err(|e| err(sec.header.0, sec.header.1, e.to_string()))?;
            let r = haar.invariance_residual(&g);
            let scale = haar.weights().iter().cloned().fold(1.0, f64::max);
            if r > 1e-12 * scale {
                return Err(err(sec.header.0, sec.header.1, format!("Haar weights are not left invariant (residual {r:.3e})")));
            }
            haar
        }
    };
    Measure::new(&g, haar, mu).map_err(|e| {
        let (l, c) = at("measure");
        err(l, c, e.to_string())
    })
}

/// Render a measured groupoid in the file format. Weights use Rust's
/// shortest round-trip float formatting, so parsing the output gives back
/// identical data.
pub fn write_groupoid_file(m: &Measure) -> String {
    let g = m.groupoid();
    let mut s = format!("{HEADER}\n[units]\n{}\n[arrows]\n", g.units().join(" "));
    for x in 0..g.n_arrows() {
        s += &format!("{} {} {}\n", g.arrows()[x], g.units()[g.src(x)], g.units()[g.rng(x)]);
    }
    s += "[mult]\n";
    for x in 0..g.n_arrows() {
        for y in 0..g.n_arrows() {
            if let Some(z) = g.compose(x, y) {
                s += &format!("{} {} {}\n", g.arrows()[x], g.arrows()[y], g.arrows()[z]);
            }
        }
    }
    s += "[inv]\n";
    for x in 0..g.n_arrows() {
        s += &format!("{} {}\n", g.arrows()[x], g.arrows()[g.inv(x)]);
    }
    s += "[measure]\n";
    for (u, name) in g.units().iter().enumerate() {
        s += &format!("{name} {:?}\n", m.mu(u));
    }
    if m.haar().weights().iter().any(|&w| w != 1.0) {
        s += "[haar]\n";
        for x in 0..g.n_arrows() {
            s += &format!("{} {:?}\n", g.arrows()[x], m.haar().weight(x));
        }
    }
    s
}
