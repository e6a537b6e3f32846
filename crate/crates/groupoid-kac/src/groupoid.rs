//! Finite groupoids, left Haar systems and quasi-invariant measures.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Which structure map of an arrow a fiber condition refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fib {
    R,
    S,
}

impl Fib {
    pub fn flip(self) -> Fib {
        match self {
            Fib::R => Fib::S,
            Fib::S => Fib::R,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Groupoid {
    units: Vec<String>,
    arrows: Vec<String>,
    src: Vec<usize>,
    rng: Vec<usize>,
    inv: Vec<usize>,
    // row-major |G|×|G|; None off the composable pairs
    mult: Vec<Option<usize>>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

impl Groupoid {
    /// Assemble from identifiers. Structural problems (unknown ids, duplicate
    /// entries, composites of non-composable pairs) are errors; axiom
    /// violations are left to [`Groupoid::validate`].
    pub fn new(
        units: Vec<String>,
        arrows: Vec<(String, String, String)>,
        mult: &[(String, String, String)],
        inv: &[(String, String)],
    ) -> Result<Groupoid> {
        let uidx = index_of(&units, "unit")?;
        let names: Vec<String> = arrows.iter().map(|a| a.0.clone()).collect();
        let aidx = index_of(&names, "arrow")?;
        let unit = |s: &str| {
            uidx.get(s).copied().ok_or_else(|| Error::Groupoid(format!("unknown unit {s:?}")))
        };
        let arrow = |s: &str| {
            aidx.get(s).copied().ok_or_else(|| Error::Groupoid(format!("unknown arrow {s:?}")))
        };
        let mut src = Vec::with_capacity(arrows.len());
        let mut rng = Vec::with_capacity(arrows.len());
        for (_, s, r) in &arrows {
            src.push(unit(s)?);
            rng.push(unit(r)?);
        }
        let n = arrows.len();
        let mut table = vec![None; n * n];
        for (a, b, ab) in mult {
            let (x, y, z) = (arrow(a)?, arrow(b)?, arrow(ab)?);
            if src[x] != rng[y] {
                return Err(Error::Groupoid(format!("product of non-composable pair ({a}, {b})")));
            }
            if table[x * n + y].is_some() {
                return Err(Error::Groupoid(format!("duplicate product for ({a}, {b})")));
            }
            table[x * n + y] = Some(z);
        }
        for x in 0..n {
            for y in 0..n {
                if src[x] == rng[y] && table[x * n + y].is_none() {
                    return Err(Error::Groupoid(format!(
                        "missing product for composable pair ({}, {})",
                        names[x], names[y]
                    )));
                }
            }
        }
        let mut inverse = vec![usize::MAX; n];
        for (a, b) in inv {
            let x = arrow(a)?;
            if inverse[x] != usize::MAX {
                return Err(Error::Groupoid(format!("duplicate inverse for {a}")));
            }
            inverse[x] = arrow(b)?;
        }
        if let Some(x) = inverse.iter().position(|&i| i == usize::MAX) {
            return Err(Error::Groupoid(format!("missing inverse for {}", names[x])));
        }
        Ok(Groupoid { units, arrows: names, src, rng, inv: inverse, mult: table })
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    pub fn n_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn arrows(&self) -> &[String] {
        &self.arrows
    }

    pub fn src(&self, x: usize) -> usize {
        self.src[x]
    }

    pub fn rng(&self, x: usize) -> usize {
        self.rng[x]
    }

    pub fn fib(&self, x: usize, f: Fib) -> usize {
        match f {
            Fib::R => self.rng[x],
            Fib::S => self.src[x],
        }
    }

    pub fn inv(&self, x: usize) -> usize {
        self.inv[x]
    }

    pub fn compose(&self, x: usize, y: usize) -> Option<usize> {
        self.mult[x * self.arrows.len() + y]
    }

    /// Composite of a pair known to be composable.
    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.compose(x, y).unwrap_or_else(|| {
            panic!("({}, {}) not composable", self.arrows[x], self.arrows[y])
        })
    }

    pub fn arrow_index(&self, id: &str) -> Option<usize> {
        self.arrows.iter().position(|a| a == id)
    }

    pub fn unit_index(&self, id: &str) -> Option<usize> {
        self.units.iter().position(|u| u == id)
    }

    /// The identity arrow at `u`: the idempotent loop there, if any.
    pub fn unit_arrow(&self, u: usize) -> Option<usize> {
        (0..self.n_arrows())
            .find(|&x| self.src[x] == u && self.rng[x] == u && self.compose(x, x) == Some(x))
    }

    /// Arrows with range `u`.
    pub fn range_fiber(&self, u: usize) -> Vec<usize> {
        (0..self.n_arrows()).filter(|&x| self.rng[x] == u).collect()
    }

    pub fn with_inverse_map(&self, inv: Vec<usize>) -> Groupoid {
        Groupoid { inv, ..self.clone() }
    }

    /// Evaluate every groupoid axiom; violations are collected, not raised.
    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let n = self.n_arrows();
        let name = |x: usize| self.arrows[x].as_str();
        let mut units_arrow = vec![None; self.n_units()];
        for u in 0..self.n_units() {
            match self.unit_arrow(u) {
                Some(e) => units_arrow[u] = Some(e),
                None => v.push(format!("no identity arrow at unit {}", self.units[u])),
            }
        }
        for x in 0..n {
            for y in 0..n {
                let Some(xy) = self.compose(x, y) else { continue };
                if self.rng[xy] != self.rng[x] {
                    v.push(format!("r(xy) != r(x) for ({}, {})", name(x), name(y)));
                }
                if self.src[xy] != self.src[y] {
                    v.push(format!("s(xy) != s(y) for ({}, {})", name(x), name(y)));
                }
                for z in 0..n {
                    let Some(yz) = self.compose(y, z) else { continue };
                    if self.compose(xy, z) != self.compose(x, yz) {
                        v.push(format!(
                            "associativity fails on ({}, {}, {})",
                            name(x),
                            name(y),
                            name(z)
                        ));
                    }
                }
            }
        }
        for x in 0..n {
            let xi = self.inv[x];
            match (self.compose(x, xi), units_arrow[self.rng[x]]) {
                (Some(p), Some(e)) if p == e => {}
                _ => v.push(format!("x·x⁻¹ != unit at r(x) for {}", name(x))),
            }
            match (self.compose(xi, x), units_arrow[self.src[x]]) {
                (Some(p), Some(e)) if p == e => {}
                _ => v.push(format!("x⁻¹·x != unit at s(x) for {}", name(x))),
            }
        }
        for (u, e) in units_arrow.iter().enumerate() {
            let Some(e) = *e else { continue };
            for x in 0..n {
                if self.rng[x] == u && self.compose(e, x) != Some(x) {
                    v.push(format!("unit {} is not a left identity for {}", self.units[u], name(x)));
                }
                if self.src[x] == u && self.compose(x, e) != Some(x) {
                    v.push(format!("unit {} is not a right identity for {}", self.units[u], name(x)));
                }
            }
        }
        ValidationReport { violations: v }
    }

    /// Group from a multiplication table (`table[a][b] = ab`, elements `0..n`).
    pub fn group(name: &str, table: &[Vec<usize>]) -> Result<Groupoid> {
        let n = table.len();
        if n == 0 {
            return Err(Error::Groupoid("empty group table".into()));
        }
        for row in table {
            if row.len() != n || !is_permutation(row) {
                return Err(Error::Groupoid("group table is not a Latin square".into()));
            }
        }
        for j in 0..n {
            let col: Vec<usize> = table.iter().map(|r| r[j]).collect();
            if !is_permutation(&col) {
                return Err(Error::Groupoid("group table is not a Latin square".into()));
            }
        }
        let e = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| Error::Groupoid("group table has no identity".into()))?;
        let unit = format!("{name}.pt");
        let ids: Vec<String> = (0..n).map(|k| format!("{name}.{k}")).collect();
        let arrows = ids.iter().map(|a| (a.clone(), unit.clone(), unit.clone())).collect();
        let mut mult = Vec::new();
        let mut inv = Vec::new();
        for a in 0..n {
            for b in 0..n {
                mult.push((ids[a].clone(), ids[b].clone(), ids[table[a][b]].clone()));
            }
            let ai = (0..n).find(|&b| table[a][b] == e).expect("Latin square has inverses");
            inv.push((ids[a].clone(), ids[ai].clone()));
        }
        let g = Groupoid::new(vec![unit], arrows, &mult, &inv)?;
        checked(g)
    }

    pub fn cyclic(n: usize) -> Result<Groupoid> {
        let table: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Groupoid::group(&format!("z{n}"), &table)
    }

    /// Pair groupoid on points `1..=n`: arrow `(i,j)` has range `i`, source `j`.
    pub fn pair(n: usize) -> Result<Groupoid> {
        if n == 0 {
            return Err(Error::Groupoid("pair groupoid needs a point".into()));
        }
        let units: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
        let id = |i: usize, j: usize| format!("({i},{j})");
        let mut arrows = Vec::new();
        let mut mult = Vec::new();
        let mut inv = Vec::new();
        for i in 1..=n {
            for j in 1..=n {
                arrows.push((id(i, j), j.to_string(), i.to_string()));
                inv.push((id(i, j), id(j, i)));
                for k in 1..=n {
                    mult.push((id(i, j), id(j, k), id(i, k)));
                }
            }
        }
        checked(Groupoid::new(units, arrows, &mult, &inv)?)
    }

    /// Disjoint union; identifiers are prefixed `0:` and `1:`.
    pub fn disjoint_union(a: &Groupoid, b: &Groupoid) -> Result<Groupoid> {
        let parts = [("0:", a), ("1:", b)];
        let mut units = Vec::new();
        let mut arrows = Vec::new();
        let mut mult = Vec::new();
        let mut inv = Vec::new();
        for (p, g) in parts {
            let an = |x: usize| format!("{p}{}", g.arrows[x]);
            units.extend(g.units.iter().map(|u| format!("{p}{u}")));
            for x in 0..g.n_arrows() {
                arrows.push((
                    an(x),
                    format!("{p}{}", g.units[g.src[x]]),
                    format!("{p}{}", g.units[g.rng[x]]),
                ));
                inv.push((an(x), an(g.inv[x])));
                for y in 0..g.n_arrows() {
                    if let Some(z) = g.compose(x, y) {
                        mult.push((an(x), an(y), an(z)));
                    }
                }
            }
        }
        checked(Groupoid::new(units, arrows, &mult, &inv)?)
    }

    pub fn group_bundle(groups: &[Groupoid]) -> Result<Groupoid> {
        let mut it = groups.iter();
        let first = it.next().ok_or_else(|| Error::Groupoid("empty bundle".into()))?;
        if first.n_units() != 1 {
            return Err(Error::Groupoid("bundle members must be groups".into()));
        }
        let mut acc = first.clone();
        for g in it {
            if g.n_units() != 1 {
                return Err(Error::Groupoid("bundle members must be groups".into()));
            }
            acc = Groupoid::disjoint_union(&acc, g)?;
        }
        Ok(acc)
    }

    /// Transformation groupoid of a group acting on `points` by the
    /// permutations `action[g]`. Arrow `g|p` goes from `p` to `g·p`.
    pub fn transformation(group: &Groupoid, action: &[Vec<usize>], points: &[&str]) -> Result<Groupoid> {
        if group.n_units() != 1 {
            return Err(Error::Groupoid("acting groupoid must be a group".into()));
        }
        let n = group.n_arrows();
        if action.len() != n || action.iter().any(|p| p.len() != points.len() || !is_permutation(p)) {
            return Err(Error::Groupoid("action must give one permutation per element".into()));
        }
        for g in 0..n {
            for h in 0..n {
                let gh = group.mul(g, h);
                for p in 0..points.len() {
                    if action[gh][p] != action[g][action[h][p]] {
                        return Err(Error::Groupoid("action is not a homomorphism".into()));
                    }
                }
            }
        }
        let id = |g: usize, p: usize| format!("{}|{}", group.arrows[g], points[p]);
        let mut arrows = Vec::new();
        let mut mult = Vec::new();
        let mut inv = Vec::new();
        for g in 0..n {
            for p in 0..points.len() {
                let gp = action[g][p];
                arrows.push((id(g, p), points[p].to_string(), points[gp].to_string()));
                inv.push((id(g, p), id(group.inv(g), gp)));
                for h in 0..n {
                    mult.push((id(h, gp), id(g, p), id(group.mul(h, g), p)));
                }
            }
        }
        let units = points.iter().map(|p| p.to_string()).collect();
        checked(Groupoid::new(units, arrows, &mult, &inv)?)
    }
}

fn checked(g: Groupoid) -> Result<Groupoid> {
    let rep = g.validate();
    if rep.pass() {
        Ok(g)
    } else {
        Err(Error::Groupoid(rep.violations.join("; ")))
    }
}

fn is_permutation(row: &[usize]) -> bool {
    let mut seen = vec![false; row.len()];
    for &x in row {
        if x >= row.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

fn index_of(ids: &[String], what: &str) -> Result<HashMap<String, usize>> {
    let mut m = HashMap::new();
    for (i, s) in ids.iter().enumerate() {
        if m.insert(s.clone(), i).is_some() {
            return Err(Error::Groupoid(format!("duplicate {what} {s:?}")));
        }
    }
    Ok(m)
}

/// Left Haar system: one positive weight per arrow, `λ^{r(x)}({x})`.
#[derive(Clone, Debug, PartialEq)]
pub struct Haar {
    weights: Vec<f64>,
}

impl Haar {
    pub fn counting(g: &Groupoid) -> Haar {
        Haar { weights: vec![1.0; g.n_arrows()] }
    }

    /// Positive weights; left invariance is reported by
    /// [`Haar::invariance_residual`], not enforced.
    pub fn new(g: &Groupoid, weights: Vec<f64>) -> Result<Haar> {
        if weights.len() != g.n_arrows() {
            return Err(Error::Measure(format!(
                "{} Haar weights for {} arrows",
                weights.len(),
                g.n_arrows()
            )));
        }
        if let Some(x) = weights.iter().position(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::Measure(format!("Haar weight of {} not positive", g.arrows[x])));
        }
        Ok(Haar { weights })
    }

    pub fn weight(&self, x: usize) -> f64 {
        self.weights[x]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Right system: `λ⁻¹` gives `x` the weight of `x⁻¹`.
    pub fn right_weight(&self, g: &Groupoid, x: usize) -> f64 {
        self.weights[g.inv(x)]
    }

    /// Worst `|λ(xy) − λ(y)|` over `y ∈ G^{s(x)}`: left translation must preserve weights.
    pub fn invariance_residual(&self, g: &Groupoid) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..g.n_arrows() {
            for y in g.range_fiber(g.src(x)) {
                worst = worst.max((self.weights[g.mul(x, y)] - self.weights[y]).abs());
            }
        }
        worst
    }
}

/// μ on units with the derived ν, ν⁻¹ and D = dν/dν⁻¹.
#[derive(Clone, Debug, PartialEq)]
pub struct Measure {
    groupoid: Groupoid,
    haar: Haar,
    mu: Vec<f64>,
    nu: Vec<f64>,
    nu_inv: Vec<f64>,
    d: Vec<f64>,
}

impl Measure {
    pub fn new(g: &Groupoid, haar: Haar, mu: Vec<f64>) -> Result<Measure> {
        if mu.len() != g.n_units() {
            return Err(Error::Measure(format!("{} μ values for {} units", mu.len(), g.n_units())));
        }
        if let Some(u) = mu.iter().position(|m| !(*m > 0.0) || !m.is_finite()) {
            return Err(Error::Measure(format!("μ({}) is not positive", g.units[u])));
        }
        if haar.weights.len() != g.n_arrows() {
            return Err(Error::Measure("Haar system belongs to another groupoid".into()));
        }
        let n = g.n_arrows();
        let nu: Vec<f64> = (0..n).map(|x| mu[g.rng(x)] * haar.weight(x)).collect();
        let nu_inv: Vec<f64> = (0..n).map(|x| nu[g.inv(x)]).collect();
        let d = (0..n).map(|x| nu[x] / nu_inv[x]).collect();
        Ok(Measure { groupoid: g.clone(), haar, mu, nu, nu_inv, d })
    }

    pub fn uniform(g: &Groupoid) -> Measure {
        Measure::new(g, Haar::counting(g), vec![1.0; g.n_units()]).expect("uniform data is valid")
    }

    pub fn groupoid(&self) -> &Groupoid {
        &self.groupoid
    }

    pub fn haar(&self) -> &Haar {
        &self.haar
    }

    pub fn mu(&self, u: usize) -> f64 {
        self.mu[u]
    }

    pub fn mus(&self) -> &[f64] {
        &self.mu
    }

    pub fn nu(&self, x: usize) -> f64 {
        self.nu[x]
    }

    pub fn nu_inv(&self, x: usize) -> f64 {
        self.nu_inv[x]
    }

    pub fn d(&self, x: usize) -> f64 {
        self.d[x]
    }

    pub fn lambda(&self, x: usize) -> f64 {
        self.haar.weight(x)
    }

    /// λ along the given fiber: `λ(x)` on range fibers, `λ(x⁻¹)` on source fibers.
    pub fn lambda_on(&self, x: usize, f: Fib) -> f64 {
        match f {
            Fib::R => self.haar.weight(x),
            Fib::S => self.haar.weight(self.groupoid.inv(x)),
        }
    }

    /// Worst `|D(x)D(x⁻¹) − 1|`.
    pub fn inverse_residual(&self) -> f64 {
        let g = &self.groupoid;
        (0..g.n_arrows()).map(|x| (self.d[x] * self.d[g.inv(x)] - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Worst `|D(x)D(y)D(y⁻¹x⁻¹) − 1|` over composable pairs.
    pub fn cocycle_residual(&self) -> f64 {
        let g = &self.groupoid;
        let mut worst: f64 = 0.0;
        for x in 0..g.n_arrows() {
            for y in 0..g.n_arrows() {
                if g.compose(x, y).is_none() {
                    continue;
                }
                let z = g.mul(g.inv(y), g.inv(x));
                worst = worst.max((self.d[x] * self.d[y] * self.d[z] - 1.0).abs());
            }
        }
        worst
    }

    /// ν(G).
    pub fn total_mass(&self) -> f64 {
        self.nu.iter().sum()
    }

    /// A copy with one Haar weight multiplied by `factor`; used as a negative control.
    pub fn with_scaled_haar_weight(&self, x: usize, factor: f64) -> Result<Measure> {
        let mut w = self.haar.weights.clone();
        w[x] *= factor;
        Measure::new(&self.groupoid, Haar::new(&self.groupoid, w)?, self.mu.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_and_cyclic_validate() {
        let t = Groupoid::cyclic(1).unwrap();
        assert!(t.validate().pass());
        assert_eq!((t.n_units(), t.n_arrows()), (1, 1));
        let z3 = Groupoid::cyclic(3).unwrap();
        assert_eq!((z3.n_units(), z3.n_arrows()), (1, 3));
    }

    #[test]
    fn pair_groupoid_shape() {
        let p = Groupoid::pair(2).unwrap();
        assert_eq!((p.n_units(), p.n_arrows()), (2, 4));
        let x = p.arrow_index("(1,2)").unwrap();
        assert_eq!(p.units()[p.rng(x)], "1");
        assert_eq!(p.units()[p.src(x)], "2");
    }

    #[test]
    fn corrupted_inverse_is_reported() {
        let p = Groupoid::pair(2).unwrap();
        let mut inv: Vec<usize> = (0..4).map(|x| p.inv(x)).collect();
        let a = p.arrow_index("(1,2)").unwrap();
        inv[a] = a;
        let bad = p.with_inverse_map(inv);
        let rep = bad.validate();
        assert!(rep.violations.iter().any(|v| v.starts_with("x·x⁻¹ != unit at r(x)")));
    }

    #[test]
    fn transformation_groupoid_counts() {
        let z2 = Groupoid::cyclic(2).unwrap();
        let g = Groupoid::transformation(&z2, &[vec![0, 1], vec![1, 0]], &["a", "b"]).unwrap();
        assert_eq!((g.n_units(), g.n_arrows()), (2, 4));
    }

    #[test]
    fn missing_product_names_pair() {
        let units = vec!["pt".to_string()];
        let arrows = vec![
            ("e".to_string(), "pt".to_string(), "pt".to_string()),
            ("a".to_string(), "pt".to_string(), "pt".to_string()),
        ];
        let s = |x: &str| x.to_string();
        let mult = vec![(s("e"), s("e"), s("e")), (s("e"), s("a"), s("a")), (s("a"), s("e"), s("a"))];
        let inv = vec![(s("e"), s("e")), (s("a"), s("a"))];
        let err = Groupoid::new(units, arrows, &mult, &inv).unwrap_err();
        assert_eq!(err, Error::Groupoid("missing product for composable pair (a, a)".into()));
    }

    #[test]
    fn counting_haar_fibers() {
        let p3 = Groupoid::pair(3).unwrap();
        let h = Haar::counting(&p3);
        for u in 0..3 {
            let fiber = p3.range_fiber(u);
            assert_eq!(fiber.iter().map(|&x| h.weight(x)).sum::<f64>(), 3.0);
        }
        assert_eq!(h.invariance_residual(&p3), 0.0);
        let z2 = Groupoid::cyclic(2).unwrap();
        assert_eq!(Haar::counting(&z2).weights().iter().sum::<f64>(), 2.0);
    }

    #[test]
    fn measure_examples() {
        let z2 = Groupoid::cyclic(2).unwrap();
        let m = Measure::uniform(&z2);
        assert!((0..2).all(|x| m.d(x) == 1.0));
        let p2 = Groupoid::pair(2).unwrap();
        let m = Measure::new(&p2, Haar::counting(&p2), vec![1.0, 2.0]).unwrap();
        let x = p2.arrow_index("(1,2)").unwrap();
        assert_eq!(m.d(x), 0.5);
        assert!(m.cocycle_residual() < 1e-12);
        assert!(Measure::new(&p2, Haar::counting(&p2), vec![1.0, 0.0]).is_err());
        let bundle =
            Groupoid::group_bundle(&[Groupoid::cyclic(2).unwrap(), Groupoid::cyclic(3).unwrap()])
                .unwrap();
        let m = Measure::new(&bundle, Haar::counting(&bundle), vec![1.0, 5.0]).unwrap();
        assert!((0..bundle.n_arrows()).all(|x| m.d(x) == 1.0));
    }
}
