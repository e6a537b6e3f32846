//! Acceptance suite: one line per criterion, then a hard assertion.

mod common;

use std::time::Instant;

use common::{rank, Oracle};
use groupoid_kac::cli::{run_command, Command, Options};
use groupoid_kac::coaction::{check_coaction, fiber_product_bracketings, verify_duality, verify_duality_hat, Coaction, Side};
use groupoid_kac::corpus::{corpus, duality_corpus, pair2_weighted, Entry};
use groupoid_kac::format::write_groupoid_file;
use groupoid_kac::groupoid::{Groupoid, Measure};
use groupoid_kac::kac::{Control, KacSystem};
use groupoid_kac::report::Record;
use groupoid_kac::subspace::Tolerance;

type Verdict = Result<String, String>;
type Criterion<'a> = (&'a str, Box<dyn FnOnce() -> Verdict + Send>);

fn tol(residual: f64) -> Tolerance {
    Tolerance::default().with_residual(residual).unwrap()
}

fn first_failure<'a>(recs: impl IntoIterator<Item = &'a Record>) -> Option<String> {
    recs.into_iter().find(|r| !r.pass).map(|r| {
        format!("{} = {:.3e}{}", r.name, r.residual, r.note.as_ref().map(|n| format!(" ({n})")).unwrap_or_default())
    })
}

fn kac_battery(entries: &[Entry], t: f64) -> Verdict {
    let start = Instant::now();
    let mut n = 0;
    for e in entries {
        let ks = KacSystem::build(&e.measure, &tol(t)).map_err(|err| format!("{}: {err}", e.name))?;
        let recs: Vec<Record> = ks.battery().into_iter().flat_map(|(_, r)| r).collect();
        if let Some(f) = first_failure(&recs) {
            return Err(format!("{}: {f}", e.name));
        }
        n += recs.len();
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 60.0 {
        return Err(format!("took {secs:.1}s"));
    }
    Ok(format!("{} entries, {n} records, {secs:.2}s", entries.len()))
}

fn kac_forms(ks: &KacSystem) -> Result<(bool, bool), String> {
    let recs: Vec<Record> = ks.kac();
    let get = |name: &str| recs.iter().find(|r| r.name == name).map(|r| r.pass).ok_or(format!("no record {name}"));
    Ok((get("kac.(ΣU₂V)³=1")?, get("kac.V^VVˇ=U₁Σ")?))
}

fn kac_equivalence(entries: &[Entry], t: f64) -> Verdict {
    let mut runs = 0;
    for e in entries {
        for control in std::iter::once(None).chain(Control::ALL.into_iter().map(Some)) {
            let ks = KacSystem::build_with(&e.measure, control, &tol(t)).map_err(|err| err.to_string())?;
            let (a, b) = kac_forms(&ks)?;
            if a != b {
                return Err(format!("{} under {control:?}: forms disagree ({a} vs {b})", e.name));
            }
            runs += 1;
        }
    }
    // the documented corruptions must flip both forms where they act
    let power = [Measure::uniform(&Groupoid::cyclic(2).unwrap()), pair2_weighted().unwrap().measure];
    for m in &power {
        for control in [Control::FlipUSign, Control::PerturbHaarWeight, Control::RotateAlphaHat] {
            let ks = KacSystem::build_with(m, Some(control), &tol(t)).map_err(|err| err.to_string())?;
            if kac_forms(&ks)? != (false, false) {
                return Err(format!("{control} did not flip both forms on {:?}", m.groupoid().arrows()));
            }
        }
    }
    Ok(format!("{runs} runs agree"))
}

fn leg_dimensions(t: f64) -> Verdict {
    let mut cases: Vec<(Groupoid, usize)> = (1..=5).map(|n| (Groupoid::cyclic(n).unwrap(), n)).collect();
    cases.extend((1..=3).map(|n| (Groupoid::pair(n).unwrap(), n * n)));
    for (g, expected) in &cases {
        let o = Oracle::new(g);
        let ks = KacSystem::build(&Measure::uniform(g), &tol(t)).map_err(|e| e.to_string())?;
        let got = (
            ks.sys.hat_leg().map_err(|e| e.to_string())?.dim(),
            ks.sys.plain_leg().map_err(|e| e.to_string())?.dim(),
        );
        let oracle = (rank(&o.hat_leg()), rank(&o.plain_leg()));
        if got != oracle || got != (*expected, *expected) {
            return Err(format!("{:?}: library {got:?}, oracle {oracle:?}, expected {expected}", g.arrows()));
        }
    }
    Ok(format!("{} groupoids", cases.len()))
}

fn coaction_axioms(entries: &[Entry], t: f64) -> Verdict {
    let mut n = 0;
    for e in entries {
        let ks = KacSystem::build(&e.measure, &tol(t)).map_err(|err| err.to_string())?;
        for side in [Side::Plain, Side::Hat] {
            let co = Coaction::canonical(&ks.sys, side).map_err(|err| err.to_string())?;
            let recs = check_coaction(&co, "co", &ks.tol);
            for needed in ["co.injective", "co.fine-span"] {
                if !recs.iter().any(|r| r.name == needed) {
                    return Err(format!("{needed} missing"));
                }
            }
            if let Some(f) = first_failure(&recs) {
                return Err(format!("{} {side:?}: {f}", e.name));
            }
            n += recs.len();
        }
    }
    Ok(format!("{} entries, {n} records", entries.len()))
}

fn duality(entries: &[Entry], t: f64) -> Verdict {
    for e in entries {
        let ks = KacSystem::build(&e.measure, &tol(t)).map_err(|err| err.to_string())?;
        let s = &ks.sys;
        for side in [Side::Plain, Side::Hat] {
            let co = Coaction::canonical(s, side).map_err(|err| err.to_string())?;
            let (rep, prefix) = match side {
                Side::Plain => (verify_duality(s, &co, 0), "duality"),
                Side::Hat => (verify_duality_hat(s, &co, 0), "duality-hat"),
            };
            let rep = rep.map_err(|err| format!("{} {side:?}: {err}", e.name))?;
            for stage in 1..=6 {
                if !rep.records.iter().any(|r| r.name.starts_with(&format!("{prefix}.stage{stage}."))) {
                    return Err(format!("{} {side:?}: stage {stage} missing", e.name));
                }
            }
            let compact = format!("{prefix}.stage3.compact");
            if !rep.records.iter().any(|r| r.name == compact && r.pass) {
                return Err(format!("{} {side:?}: {compact} fails", e.name));
            }
            if let Some(f) = first_failure(&rep.records) {
                return Err(format!("{} {side:?}: {f}", e.name));
            }
            let dim = |k: &str| rep.dims.iter().find(|(n, _)| n == k).map(|d| d.1);
            if dim("C⋊Â⋊A") != dim("[|β⟩C⟨β|]") || dim("C⋊Â⋊A").is_none() {
                return Err(format!("{} {side:?}: dimension tables differ", e.name));
            }
        }
        match fiber_product_bracketings(s) {
            Ok((true, l, r)) if l == r => {}
            other => return Err(format!("{}: bracketings {other:?}", e.name)),
        }
    }
    Ok(format!("{} entries, both parts", entries.len()))
}

fn control_power() -> Verdict {
    let targets = [
        ("z2", Measure::uniform(&Groupoid::cyclic(2).unwrap())),
        ("pair2", Measure::uniform(&Groupoid::pair(2).unwrap())),
        ("pair2-weighted", pair2_weighted().unwrap().measure),
    ];
    let mut counts = Vec::new();
    for (name, m) in &targets {
        for control in [Control::FlipUSign, Control::PerturbHaarWeight, Control::RotateAlphaHat] {
            let ks = KacSystem::build_with(m, Some(control), &Tolerance::default()).map_err(|e| e.to_string())?;
            let failing = ks.battery().into_iter().flat_map(|(_, r)| r).filter(|r| !r.pass).count();
            if failing == 0 {
                return Err(format!("{control} fails no check on {name}"));
            }
            counts.push(failing);
        }
    }
    Ok(format!("failing checks per run {counts:?}"))
}

fn robustness() -> Verdict {
    let t = 1e-11;
    let uniform: Vec<Entry> = corpus().map_err(|e| e.to_string())?.into_iter().filter(|e| e.uniform).collect();
    let dual: Vec<Entry> = duality_corpus().map_err(|e| e.to_string())?.into_iter().filter(|e| e.uniform).collect();
    let parts = [
        ("1", kac_battery(&uniform, t)),
        ("2", kac_equivalence(&uniform, t)),
        ("3", leg_dimensions(t)),
        ("4", coaction_axioms(&uniform, t)),
        ("5", duality(&dual, t)),
    ];
    for (k, v) in &parts {
        if let Err(e) = v {
            return Err(format!("criterion {k} at 1e-11: {e}"));
        }
    }
    Ok(format!("criteria 1-5 at 1e-11 on {} uniform entries", uniform.len()))
}

fn determinism() -> Verdict {
    let mut inputs: Vec<String> = vec![write_groupoid_file(&pair2_weighted().map_err(|e| e.to_string())?.measure)];
    inputs.push(write_groupoid_file(&Measure::uniform(&Groupoid::cyclic(2).unwrap())));
    let opts = Options { seed: 11, ..Options::default() };
    let mut n = 0;
    for text in &inputs {
        for cmd in Command::ALL {
            let a = run_command(cmd, text, &opts).map_err(|e| e.to_string())?.to_machine();
            let b = run_command(cmd, text, &opts).map_err(|e| e.to_string())?.to_machine();
            if a != b {
                return Err(format!("{} differs between runs", cmd.name()));
            }
            n += 1;
        }
    }
    Ok(format!("{n} report pairs identical"))
}

#[test]
fn acceptance() {
    let all = corpus().unwrap();
    let dual = duality_corpus().unwrap();
    let criteria: Vec<Criterion> = vec![
        ("Kac battery on the corpus", Box::new({
            let all = all.clone();
            move || kac_battery(&all, 1e-9)
        })),
        ("Kac forms agree, controls flip both", Box::new({
            let all = all.clone();
            move || kac_equivalence(&all, 1e-9)
        })),
        ("leg dimensions against the span oracle", Box::new(|| leg_dimensions(1e-9))),
        ("canonical coactions pass and are fine", Box::new({
            let all = all.clone();
            move || coaction_axioms(&all, 1e-9)
        })),
        ("biduality, both parts", Box::new(move || duality(&dual, 1e-8))),
        ("negative controls have power", Box::new(control_power)),
        ("criteria 1-5 at 1e-11 on uniform entries", Box::new(robustness)),
        ("machine reports are deterministic", Box::new(determinism)),
    ];
    let results: Vec<(usize, &str, Verdict)> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria
            .into_iter()
            .enumerate()
            .map(|(i, (label, f))| (i + 1, label, scope.spawn(f)))
            .collect();
        handles
            .into_iter()
            .map(|(i, label, h)| (i, label, h.join().unwrap_or_else(|_| Err("panicked".into()))))
            .collect()
    });
    for (i, label, v) in &results {
        match v {
            Ok(d) => println!("criterion {i}: PASS  {label}: {d}"),
            Err(d) => println!("criterion {i}: FAIL  {label}: {d}"),
        }
    }
    let failed: Vec<usize> = results.iter().filter(|r| r.2.is_err()).map(|r| r.0).collect();
    assert!(failed.is_empty(), "failing criteria {failed:?}");
}
