//! Commands behind the `gkac` binary.

use std::str::FromStr;
use std::time::Instant;

use crate::coaction::{
    check_coaction, crossed_product, crossed_product_records, fiber_product, fiber_product_bracketings, verify_duality,
    verify_duality_hat, Carrier, Coaction, Side,
};
use crate::error::{Error, Result};
use crate::format::parse_groupoid_file;
use crate::groupoid::Measure;
use crate::kac::{Control, KacSystem};
use crate::report::{Record, VerificationReport};
use crate::subspace::Tolerance;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Validate,
    KacCheck,
    Legs,
    CoactionCheck,
    Duality,
}

impl Command {
    pub const ALL: [Command; 5] =
        [Command::Validate, Command::KacCheck, Command::Legs, Command::CoactionCheck, Command::Duality];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::KacCheck => "kac-check",
            Command::Legs => "legs",
            Command::CoactionCheck => "coaction-check",
            Command::Duality => "duality",
        }
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Command> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Hypothesis(format!("unknown command {s:?}")))
    }
}

/// Which built-in coaction `coaction-check` and `duality` look at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Which {
    /// `(H, A, α, Δ)`
    Plain,
    /// `(H, Â, β̂, Δ̂)`
    Hat,
    #[default]
    Both,
}

impl Which {
    fn sides(self) -> Vec<Side> {
        match self {
            Which::Plain => vec![Side::Plain],
            Which::Hat => vec![Side::Hat],
            Which::Both => vec![Side::Plain, Side::Hat],
        }
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    /// Overrides the residual threshold; the rank cutoff is unchanged.
    pub tolerance: Option<f64>,
    pub control: Option<Control>,
    pub seed: u64,
    pub coaction: Which,
    /// Largest carrier-target dimension for which the dual coactions of the
    /// crossed products get the full morphism check.
    pub morphism_limit: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { tolerance: None, control: None, seed: 0, coaction: Which::Both, morphism_limit: 64 }
    }
}

impl Options {
    pub fn tol(&self) -> Result<Tolerance> {
        match self.tolerance {
            None => Ok(Tolerance::default()),
            Some(t) => Tolerance::default().with_residual(t),
        }
    }
}

/// Parse `text` and run `cmd`. Only malformed input is an error; failing
/// checks are reported in the returned report.
pub fn run_command(cmd: Command, text: &str, opts: &Options) -> Result<VerificationReport> {
    let start = Instant::now();
    let tol = opts.tol()?;
    let measure = parse_groupoid_file(text)?;
    let mut rep = VerificationReport::new(cmd.name(), text);
    rep.settings = vec![
        ("negative_control".into(), opts.control.map(|c| c.name().to_string()).unwrap_or_else(|| "none".into())),
        ("rank_cutoff".into(), crate::report::sci(tol.rank_cutoff)),
        ("residual_tol".into(), crate::report::sci(tol.residual_tol)),
        ("seed".into(), opts.seed.to_string()),
    ];
    rep.sections = run_on(cmd, &measure, opts, &tol, &mut rep.dims)?;
    rep.timing = Some(start.elapsed().as_secs_f64());
    Ok(rep)
}

/// As [`run_command`] on an already built measure.
pub fn run_on(
    cmd: Command,
    m: &Measure,
    opts: &Options,
    tol: &Tolerance,
    dims: &mut Vec<(String, usize)>,
) -> Result<Vec<(String, Vec<Record>)>> {
    let g = m.groupoid();
    if cmd == Command::Validate {
        return Ok(vec![("groupoid".into(), validate(m, tol, dims))]);
    }
    let ks = KacSystem::build_with(m, opts.control, tol)?;
    let s = &ks.sys;
    dims.push(("H".into(), g.n_arrows()));
    Ok(match cmd {
        Command::Validate => unreachable!("handled above"),
        Command::KacCheck => ks.battery().into_iter().map(|(n, r)| (n.to_string(), r)).collect(),
        Command::Legs => {
            for f in [&s.alpha, &s.alpha_hat, &s.beta, &s.beta_hat] {
                dims.push((f.name.clone(), f.sub.dim()));
            }
            let mut recs = ks.legs();
            let fp = |side: Side| -> Result<(usize, usize)> {
                let co = Coaction::canonical(s, side)?;
                let hopf = &co.hopf;
                let alg = hopf.algebra.unital_closure(tol)?;
                let x = Carrier::new(ks.measure.clone(), s.h(), alg.clone(), hopf.left.clone())?;
                let y = Carrier::new(ks.measure.clone(), s.h(), alg, hopf.right.clone())?;
                Ok((hopf.algebra.dim(), fiber_product(&x, &y, tol)?.1.dim()))
            };
            for (label, side) in [("A", Side::Plain), ("Â", Side::Hat)] {
                match fp(side) {
                    Ok((d, f)) => {
                        dims.push((label.into(), d));
                        dims.push((format!("{label}∗{label}"), f));
                    }
                    Err(e) => recs.push(Record::residual(&format!("legs.{label}.fiber-product"), "fiber product", Err(e), tol.residual_tol)),
                }
            }
            vec![("legs".into(), recs)]
        }
        Command::CoactionCheck => {
            let mut out = Vec::new();
            for side in opts.coaction.sides() {
                let key = side_key(side);
                let recs = match Coaction::canonical(s, side) {
                    Ok(co) => {
                        dims.push((format!("{key}.C"), co.carrier.algebra.dim()));
                        dims.push((format!("{key}.target"), co.target.dim()));
                        check_coaction(&co, key, tol)
                    }
                    Err(e) => vec![Record::residual(&format!("{key}.build"), "coaction", Err(e), tol.residual_tol)],
                };
                out.push((key.to_string(), recs));
            }
            out
        }
        Command::Duality => {
            let mut out = Vec::new();
            for side in opts.coaction.sides() {
                out.push(duality_side(&ks, side, opts, dims));
            }
            let t = tol.residual_tol;
            let bracket = match fiber_product_bracketings(s) {
                Ok((eq, l, r)) => {
                    dims.push(("(A∗A)∗A".into(), l));
                    dims.push(("A∗(A∗A)".into(), r));
                    Record::verdict("bracketing.equal", "fiber product bracketings", eq, 0.0, t, Some(format!("dims {l} and {r}")))
                }
                Err(e) => Record::residual("bracketing.equal", "fiber product bracketings", Err(e), t),
            };
            out.push(("bracketing".into(), vec![bracket]));
            out
        }
    })
}

fn side_key(side: Side) -> &'static str {
    match side {
        Side::Plain => "coaction.A",
        Side::Hat => "coaction.Â",
    }
}

fn duality_side(ks: &KacSystem, side: Side, opts: &Options, dims: &mut Vec<(String, usize)>) -> (String, Vec<Record>) {
    let s = &ks.sys;
    let t = ks.tol.residual_tol;
    let (key, prefix) = match side {
        Side::Plain => ("duality", "cp"),
        Side::Hat => ("duality-hat", "cp-hat"),
    };
    let mut run = || -> Result<Vec<Record>> {
        let co = Coaction::canonical(s, side)?;
        let cp = crossed_product(&co, s)?;
        let morphism = cp.dual.target.dim() <= opts.morphism_limit;
        let mut recs = crossed_product_records(&cp, &co, s, prefix, morphism);
        if !morphism {
            recs.push(Record::verdict(
                &format!("{prefix}.dual.morphism"),
                "morphism condition",
                true,
                0.0,
                t,
                Some(format!("skipped: target dimension {} above {}", cp.dual.target.dim(), opts.morphism_limit)),
            ));
        }
        let rep = match side {
            Side::Plain => verify_duality(s, &co, opts.seed)?,
            Side::Hat => verify_duality_hat(s, &co, opts.seed)?,
        };
        dims.extend(rep.dims.iter().map(|(n, d)| (format!("{key}.{n}"), *d)));
        recs.extend(rep.records);
        Ok(recs)
    };
    let recs = run().unwrap_or_else(|e| vec![Record::residual(&format!("{key}.run"), "duality", Err(e), t)]);
    (key.to_string(), recs)
}

fn validate(m: &Measure, tol: &Tolerance, dims: &mut Vec<(String, usize)>) -> Vec<Record> {
    let g = m.groupoid();
    let t = tol.residual_tol;
    let rep = g.validate();
    let pairs = (0..g.n_arrows()).flat_map(|x| (0..g.n_arrows()).map(move |y| (x, y))).filter(|&(x, y)| g.compose(x, y).is_some()).count();
    dims.push(("units".into(), g.n_units()));
    dims.push(("arrows".into(), g.n_arrows()));
    dims.push(("composable pairs".into(), pairs));
    let note = if rep.pass() { None } else { Some(rep.violations.join("; ")) };
    let d = |x: usize| m.d(x);
    vec![
        Record::verdict("groupoid.axioms", "groupoid", rep.pass(), rep.violations.len() as f64, t, note),
        Record::residual("haar.left-invariance", "Haar system", Ok(m.haar().invariance_residual(g)), t),
        Record::residual("measure.nu-inverse", "induced measures", Ok(m.inverse_residual()), t),
        Record::residual("measure.D-cocycle", "modular function", Ok(m.cocycle_residual()), t),
        Record::verdict(
            "measure.positive",
            "quasi-invariant measure",
            m.mus().iter().all(|&u| u > 0.0) && (0..g.n_arrows()).all(|x| d(x) > 0.0 && d(x).is_finite()),
            0.0,
            t,
            None,
        ),
    ]
}
