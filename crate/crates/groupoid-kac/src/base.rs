//! The C*-base of a measured groupoid and its factorizations α = β, α̂ = β̂.
//!
//! Bases: `e_x = δ_x/√ν(x)` on `H = L²(G,ν)` and `e_u = δ_u/√μ(u)` on
//! `ℌ = L²(G⁰,μ)`. In these bases `j(δ_x) = √λ(x)·E_{x,r(x)}` and
//! `ĵ(δ_x) = √λ(x⁻¹)·E_{x,s(x)}`.

use crate::error::{Error, Result};
use crate::groupoid::{Fib, Groupoid, Measure};
use crate::rtp::{anchor_defect, Node, SpaceRef};
use crate::subspace::{c, matrix_unit, op_norm, unitarity_residual, Mat, Subspace, Tolerance};

/// 𝔅 = 𝔅† = diagonal multiplication operators on ℌ.
#[derive(Clone, Debug)]
pub struct CStarBase {
    pub n_units: usize,
    pub b: Subspace,
    pub b_dag: Subspace,
}

impl CStarBase {
    pub fn new(m: &Measure, tol: &Tolerance) -> Result<CStarBase> {
        let n = m.groupoid().n_units();
        let gens: Vec<Mat> = (0..n).map(|u| matrix_unit(n, n, u, u)).collect();
        let b = Subspace::from_orthonormal(n, n, gens, tol)?;
        Ok(CStarBase { n_units: n, b: b.clone(), b_dag: b })
    }

    /// Worst commutator between 𝔅 and 𝔅†.
    pub fn commutation_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in self.b.basis() {
            for y in self.b_dag.basis() {
                worst = worst.max(op_norm(&(x * y - y * x)));
            }
        }
        worst
    }

    /// Nondegeneracy: the identity lies in 𝔅.
    pub fn nondegeneracy_residual(&self) -> f64 {
        let n = self.n_units;
        self.b.residual(&Mat::identity(n, n)).unwrap_or(f64::INFINITY)
    }

    /// The projection `P_u` onto `e_u`.
    pub fn unit_projection(&self, u: usize) -> Mat {
        matrix_unit(self.n_units, self.n_units, u, u)
    }
}

/// A C*-factorization `α ⊆ L(ℌ, K)` with `ρ_α(P_u)` stored per unit.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub name: String,
    pub space: SpaceRef,
    /// Canonical anchor `(coordinate, fiber)` when the span is `span{E_{t, f(t_k)}}`.
    pub anchor: Option<Node>,
    pub sub: Subspace,
    pub rho: Vec<Mat>,
    /// Distinguished generators (`j(δ_x)` for the groupoid factorizations).
    pub frame: Vec<Mat>,
}

impl Factorization {
    /// `span{E_{t, f(t_k)}}` with `ρ(P_u)` the projection onto `{t : f(t_k) = u}`.
    pub fn canonical(name: &str, g: &Groupoid, space: &SpaceRef, anchor: Node, tol: &Tolerance) -> Result<Factorization> {
        let n = space.dim();
        let nu = g.n_units();
        let fiber = |t: &[usize]| g.fib(t[anchor.0], anchor.1);
        let frame: Vec<Mat> =
            space.tuples().iter().enumerate().map(|(i, t)| matrix_unit(n, nu, i, fiber(t))).collect();
        let sub = Subspace::from_orthonormal(n, nu, frame.clone(), tol)?;
        let rho = (0..nu)
            .map(|u| {
                let mut p = Mat::zeros(n, n);
                for (i, t) in space.tuples().iter().enumerate() {
                    if fiber(t) == u {
                        p[(i, i)] = c(1.0);
                    }
                }
                p
            })
            .collect();
        Ok(Factorization { name: name.to_string(), space: space.clone(), anchor: Some(anchor), sub, rho, frame })
    }

    pub fn dim(&self) -> usize {
        self.sub.dim()
    }

    /// Worst residual among `[α*α] = 𝔅`, `[α𝔅] = α`, `[αℌ] = H` and
    /// `ρ(b†)ξζ = ξb†ζ` on basis data.
    pub fn axiom_residual(&self, base: &CStarBase, tol: &Tolerance) -> Result<f64> {
        let n = self.space.dim();
        let mut worst: f64 = 0.0;
        let aa = self.sub.adjoint().product(&self.sub, tol)?;
        worst = worst.max(aa.equal(&base.b, tol)?.1);
        let ab = self.sub.product(&base.b, tol)?;
        worst = worst.max(ab.equal(&self.sub, tol)?.1);
        // [αℌ] = H: the columns of the basis elements span the whole space
        let mut cols = Mat::zeros(n, self.sub.dim() * base.n_units);
        for (k, b) in self.sub.basis().iter().enumerate() {
            for u in 0..base.n_units {
                cols.column_mut(k * base.n_units + u).copy_from(&b.column(u));
            }
        }
        let rank = if cols.ncols() == 0 {
            0
        } else {
            crate::subspace::singular_values(&cols).iter().filter(|s| **s > tol.rank_cutoff).count()
        };
        if rank != n {
            worst = worst.max(1.0);
        }
        if self.rho.len() != base.n_units {
            return Err(Error::Shape(format!("{} ρ matrices for {} units", self.rho.len(), base.n_units)));
        }
        for (u, r) in self.rho.iter().enumerate() {
            let p = base.unit_projection(u);
            for xi in self.sub.basis() {
                worst = worst.max(op_norm(&(r * xi - xi * &p)));
            }
        }
        Ok(worst)
    }

    /// `U_*`: `space ↦ U·space`, `ρ ↦ UρU*`.
    pub fn pushforward(&self, u: &Mat, name: &str, tol: &Tolerance) -> Result<Factorization> {
        let res = unitarity_residual(u);
        if !(res < tol.residual_tol) {
            return Err(Error::Hypothesis(format!("pushforward by a non-unitary (residual {res:.3e})")));
        }
        if u.nrows() != self.space.dim() {
            return Err(Error::Shape("pushforward operator has the wrong size".into()));
        }
        let sub = self.sub.left_mul(u, tol)?;
        let rho = self.rho.iter().map(|r| u * r * u.adjoint()).collect();
        let frame = self.frame.iter().map(|f| u * f).collect();
        let space = self.space.clone();
        // the image of a canonical span is canonical only if U permutes fibers; callers compare spans
        Ok(Factorization { name: name.to_string(), space, anchor: None, sub, rho, frame })
    }

    /// Worst entry of the frame outside the canonical span of `anchor`.
    pub fn anchor_defect(&self, g: &Groupoid, anchor: Node) -> f64 {
        self.frame.iter().map(|f| anchor_defect(g, &self.space, anchor, f)).fold(0.0, f64::max)
    }
}

/// α = β: the image of `j`.
pub fn j_factorization(m: &Measure, space: &SpaceRef, name: &str, tol: &Tolerance) -> Result<Factorization> {
    let g = m.groupoid();
    let mut f = Factorization::canonical(name, g, space, (0, Fib::R), tol)?;
    f.frame = (0..g.n_arrows())
        .map(|x| matrix_unit(g.n_arrows(), g.n_units(), x, g.rng(x)) * c(m.lambda(x).sqrt()))
        .collect();
    Ok(f)
}

/// α̂ = β̂: the image of `ĵ`.
pub fn jhat_factorization(m: &Measure, space: &SpaceRef, name: &str, tol: &Tolerance) -> Result<Factorization> {
    let g = m.groupoid();
    let mut f = Factorization::canonical(name, g, space, (0, Fib::S), tol)?;
    f.frame = (0..g.n_arrows())
        .map(|x| matrix_unit(g.n_arrows(), g.n_units(), x, g.src(x)) * c(m.lambda(g.inv(x)).sqrt()))
        .collect();
    Ok(f)
}

/// `(ĵ(δ_x)δ_{s(x)})(x)` in the function picture: `D(x)^{-1/2}`.
pub fn jhat_function_value(m: &Measure, x: usize) -> f64 {
    m.d(x).powf(-0.5)
}

/// Compatibility: `[ρ₁(𝔅†)·α₂] = α₂`, `[ρ₂(𝔅†)·α₁] = α₁`, and commuting ρ's.
pub fn check_compatible(f1: &Factorization, f2: &Factorization, tol: &Tolerance) -> Result<(bool, f64)> {
    if f1.space.dim() != f2.space.dim() {
        return Err(Error::Shape("factorizations of different spaces".into()));
    }
    let mut worst: f64 = 0.0;
    for (a, b) in [(f1, f2), (f2, f1)] {
        let mut gens = Vec::new();
        for r in &a.rho {
            for x in b.sub.basis() {
                gens.push(r * x);
            }
        }
        let s = Subspace::span(b.sub.rows(), b.sub.cols(), &gens, tol)?;
        worst = worst.max(s.equal(&b.sub, tol)?.1);
    }
    for r1 in &f1.rho {
        for r2 in &f2.rho {
            worst = worst.max(op_norm(&(r1 * r2 - r2 * r1)));
        }
    }
    Ok((worst < tol.residual_tol, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::Haar;
    use crate::rtp::Space;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn base_dimensions() {
        let t = Measure::uniform(&Groupoid::cyclic(1).unwrap());
        assert_eq!(CStarBase::new(&t, &tol()).unwrap().b.dim(), 1);
        let p = Measure::uniform(&Groupoid::pair(2).unwrap());
        assert_eq!(CStarBase::new(&p, &tol()).unwrap().b.dim(), 2);
        let bundle =
            Groupoid::group_bundle(&[Groupoid::cyclic(2).unwrap(), Groupoid::cyclic(3).unwrap()]).unwrap();
        let m = Measure::uniform(&bundle);
        let base = CStarBase::new(&m, &tol()).unwrap();
        assert_eq!(base.b.dim(), 2);
        assert_eq!(base.commutation_residual(), 0.0);
        assert!(base.nondegeneracy_residual() < 1e-12, "{}", base.nondegeneracy_residual());
    }

    #[test]
    fn j_axioms_and_rho() {
        let g = Groupoid::pair(2).unwrap();
        let m = Measure::new(&g, Haar::counting(&g), vec![1.0, 2.0]).unwrap();
        let h = Space::single(&m);
        let base = CStarBase::new(&m, &tol()).unwrap();
        let a = j_factorization(&m, &h, "α", &tol()).unwrap();
        assert!(a.axiom_residual(&base, &tol()).unwrap() < 1e-10);
        let p1 = &a.rho[g.unit_index("1").unwrap()];
        let on: Vec<usize> = (0..4).filter(|&i| p1[(i, i)] == c(1.0)).collect();
        let want: Vec<usize> = (0..4).filter(|&x| g.units()[g.rng(x)] == "1").collect();
        assert_eq!(on, want);
        assert_eq!(on.len(), 2);
    }

    #[test]
    fn jhat_function_factor() {
        let g = Groupoid::pair(2).unwrap();
        let m = Measure::new(&g, Haar::counting(&g), vec![1.0, 2.0]).unwrap();
        let x = g.arrow_index("(1,2)").unwrap();
        assert!((jhat_function_value(&m, x) - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn trivial_factorizations() {
        let m = Measure::uniform(&Groupoid::cyclic(1).unwrap());
        let h = Space::single(&m);
        let a = j_factorization(&m, &h, "α", &tol()).unwrap();
        let ah = jhat_factorization(&m, &h, "α̂", &tol()).unwrap();
        assert_eq!(a.frame[0], Mat::identity(1, 1));
        assert_eq!(ah.frame[0], Mat::identity(1, 1));
    }

    #[test]
    fn rho_agree_on_groups() {
        let m = Measure::uniform(&Groupoid::cyclic(2).unwrap());
        let h = Space::single(&m);
        let a = j_factorization(&m, &h, "α", &tol()).unwrap();
        let ah = jhat_factorization(&m, &h, "α̂", &tol()).unwrap();
        assert_eq!(a.rho, ah.rho);
        assert!(check_compatible(&a, &a, &tol()).unwrap().0);
    }
}
