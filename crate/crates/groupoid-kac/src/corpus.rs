//! The bundled corpus of small measured groupoids.

use crate::error::Result;
use crate::groupoid::{Groupoid, Haar, Measure};

/// One corpus entry. `uniform` marks counting Haar weights and `μ ≡ 1`,
/// where every structural matrix is an exact permutation.
#[derive(Clone, Debug)]
pub struct Entry {
    pub name: String,
    pub measure: Measure,
    pub uniform: bool,
}

fn entry(name: &str, g: &Groupoid, mu: Option<Vec<f64>>) -> Result<Entry> {
    let uniform = mu.is_none();
    let measure = match mu {
        None => Measure::uniform(g),
        Some(mu) => Measure::new(g, Haar::counting(g), mu)?,
    };
    let name = if uniform { name.to_string() } else { format!("{name}-weighted") };
    Ok(Entry { name, measure, uniform })
}

/// The groupoids of the corpus in declared order.
pub fn groupoids() -> Result<Vec<(&'static str, Groupoid)>> {
    let z2 = Groupoid::cyclic(2)?;
    Ok(vec![
        ("trivial", Groupoid::cyclic(1)?),
        ("z2", z2.clone()),
        ("z3", Groupoid::cyclic(3)?),
        ("pair3", Groupoid::pair(3)?),
        ("bundle-z2-z3", Groupoid::group_bundle(&[z2.clone(), Groupoid::cyclic(3)?])?),
        ("z2-on-two-points", Groupoid::transformation(&z2, &[vec![0, 1], vec![1, 0]], &["a", "b"])?),
    ])
}

/// A nonuniform μ for `g`: `μ(u_k) = k + 1` on several units, `μ ≡ 3` on a group.
pub fn weighted_mu(g: &Groupoid) -> Vec<f64> {
    if g.n_units() == 1 {
        vec![3.0]
    } else {
        (0..g.n_units()).map(|k| (k + 1) as f64).collect()
    }
}

/// Every corpus groupoid with uniform and with weighted μ.
pub fn corpus() -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (name, g) in groupoids()? {
        out.push(entry(name, &g, None)?);
        out.push(entry(name, &g, Some(weighted_mu(&g)))?);
    }
    Ok(out)
}

/// Pair groupoid on two points with `μ = (1, 2)`.
pub fn pair2_weighted() -> Result<Entry> {
    entry("pair2", &Groupoid::pair(2)?, Some(vec![1.0, 2.0]))
}

/// The duality corpus: trivial, ℤ/2, ℤ/3 (uniform) and weighted pair(2).
pub fn duality_corpus() -> Result<Vec<Entry>> {
    Ok(vec![
        entry("trivial", &Groupoid::cyclic(1)?, None)?,
        entry("z2", &Groupoid::cyclic(2)?, None)?,
        entry("z3", &Groupoid::cyclic(3)?, None)?,
        pair2_weighted()?,
    ])
}
