//! The Kac system of a measured groupoid and its axiom battery.
//!
//! A [`System`] is a tuple `(α, α̂, β, β̂, U, W)` with `W : P(b̂,a) → P(a,b)`,
//! where `a, â, b, b̂` are the fibers the four factorizations are anchored on
//! and `P(f₁,f₂)` is the pair space with `f₁(x) = f₂(y)`. Everything below is
//! written against the tags, so the same code checks `V`, its predual `V̌`, its
//! dual `V̂`, its opposite and `Ad_{U⊗U}(V)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::base::{check_compatible, j_factorization, jhat_factorization, CStarBase, Factorization};
use crate::error::{Error, Result};
use crate::groupoid::{Fib, Groupoid, Measure};
use crate::report::Record;
use crate::rtp::{flip, ket, lift, permute, Node, Op, Space, SpaceRef};
use crate::subspace::{c, op_norm, Mat, Subspace, Tolerance};

/// The fiber a factorization is anchored on.
pub fn tag(f: &Factorization) -> Result<Fib> {
    f.anchor.map(|a| a.1).ok_or_else(|| Error::Hypothesis(format!("{} has no canonical anchor", f.name)))
}

/// `(α, α̂, β, β̂, U, W)`.
#[derive(Clone, Debug)]
pub struct System {
    pub name: String,
    pub measure: Arc<Measure>,
    pub alpha: Arc<Factorization>,
    pub alpha_hat: Arc<Factorization>,
    pub beta: Arc<Factorization>,
    pub beta_hat: Arc<Factorization>,
    pub u: Op,
    pub w: Op,
    pub tol: Tolerance,
    a: Fib,
    ah: Fib,
    b: Fib,
    bh: Fib,
}

/// One side of an intertwining relation: `(pos, block, elem)` is `[|block⟩_{pos+1} elem]`.
type KetSide<'a> = (usize, &'a Factorization, &'a Factorization);

impl System {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        measure: Arc<Measure>,
        alpha: Arc<Factorization>,
        alpha_hat: Arc<Factorization>,
        beta: Arc<Factorization>,
        beta_hat: Arc<Factorization>,
        u: Op,
        w: Op,
        tol: Tolerance,
    ) -> Result<System> {
        let (a, ah, b, bh) = (tag(&alpha)?, tag(&alpha_hat)?, tag(&beta)?, tag(&beta_hat)?);
        let sys = System { name: name.into(), measure, alpha, alpha_hat, beta, beta_hat, u, w, tol, a, ah, b, bh };
        if *sys.w.dom != *sys.p(bh, a) || *sys.w.cod != *sys.p(a, b) {
            return Err(Error::Flavor(format!(
                "{}: unitary runs {:?} -> {:?}, expected P(b̂,a) -> P(a,b)",
                sys.name, sys.w.dom, sys.w.cod
            )));
        }
        if sys.u.dom.arity() != 1 || sys.u.cod.arity() != 1 {
            return Err(Error::Flavor("U must act on H".into()));
        }
        Ok(sys)
    }

    pub fn groupoid(&self) -> &Groupoid {
        self.measure.groupoid()
    }

    /// Tags `(a, â, b, b̂)`.
    pub fn tags(&self) -> (Fib, Fib, Fib, Fib) {
        (self.a, self.ah, self.b, self.bh)
    }

    pub fn h(&self) -> SpaceRef {
        Space::single(&self.measure)
    }

    pub fn p(&self, f1: Fib, f2: Fib) -> SpaceRef {
        Space::pair(&self.measure, f1, f2)
    }

    /// A triple space from 0-based links.
    pub fn triple(&self, links: &[(Node, Node)]) -> Result<SpaceRef> {
        Space::new(&self.measure, 3, links)
    }

    /// The fiber `U` carries `f` to.
    fn uf(&self, f: Fib) -> Fib {
        if f == self.a {
            self.ah
        } else if f == self.ah {
            self.a
        } else {
            f
        }
    }

    pub fn u_leg(&self, leg: usize, dom: &SpaceRef, cod: &SpaceRef) -> Result<Op> {
        lift(&self.u, &[leg], dom, cod)
    }

    /// `U⊗U` on a pair space.
    pub fn uu(&self, dom: &SpaceRef) -> Result<Op> {
        let cls = dom.links();
        if dom.arity() != 2 || cls.len() != 1 {
            return Err(Error::Flavor(format!("U⊗U needs a pair space, got {dom:?}")));
        }
        let ((i, f), (_, g)) = cls[0];
        let (f1, f2) = if i == 0 { (f, g) } else { (g, f) };
        let mid = self.p(self.uf(f1), f2);
        let cod = self.p(self.uf(f1), self.uf(f2));
        let u1 = self.u_leg(0, dom, &mid)?;
        let u2 = self.u_leg(1, &mid, &cod)?;
        u2.mul(&u1)
    }

    /// `V̌ = ΣU₂WU₂Σ : P(â,b̂) → P(b̂,a)`.
    pub fn v_check(&self) -> Result<Op> {
        let (a, ah, _, bh) = self.tags();
        let m = &self.measure;
        let s1 = flip(m, &self.p(ah, bh))?;
        let u2 = self.u_leg(1, &s1.cod, &self.p(bh, a))?;
        let u2b = self.u_leg(1, &self.w.cod, &self.p(a, bh))?;
        let s2 = flip(m, &u2b.cod)?;
        Op::chain(&[&s2, &u2b, &self.w, &u2, &s1])
    }

    /// `V̂ = ΣU₁WU₁Σ : P(a,b) → P(b,â)`.
    pub fn v_hat(&self) -> Result<Op> {
        let (a, ah, b, bh) = self.tags();
        let m = &self.measure;
        let s1 = flip(m, &self.p(a, b))?;
        let u1 = self.u_leg(0, &s1.cod, &self.p(bh, a))?;
        let u1b = self.u_leg(0, &self.w.cod, &self.p(ah, b))?;
        let s2 = flip(m, &u1b.cod)?;
        Op::chain(&[&s2, &u1b, &self.w, &u1, &s1])
    }

    /// `W^op = ΣW*Σ : P(b,a) → P(a,b̂)`.
    pub fn v_op(&self) -> Result<Op> {
        let m = &self.measure;
        let s1 = flip(m, &self.p(self.b, self.a))?;
        let s2 = flip(m, &self.w.dom)?;
        Op::chain(&[&s2, &self.w.adjoint(), &s1])
    }

    /// `Ad_{U⊗U}(W) : P(b,â) → P(â,b̂)`.
    pub fn ad_uu(&self) -> Result<Op> {
        let pre = self.uu(&self.p(self.b, self.ah))?;
        let post = self.uu(&self.w.cod)?;
        Op::chain(&[&post, &self.w, &pre])
    }

    fn with(&self, name: &str, roles: [&Arc<Factorization>; 4], w: Op) -> Result<System> {
        System::new(
            name,
            self.measure.clone(),
            roles[0].clone(),
            roles[1].clone(),
            roles[2].clone(),
            roles[3].clone(),
            self.u.clone(),
            w,
            self.tol,
        )
    }

    /// `(β̂, β, α, α̂, U, V̌)`.
    pub fn predual(&self) -> Result<System> {
        let name = format!("{}ˇ", self.name);
        self.with(&name, [&self.beta_hat, &self.beta, &self.alpha, &self.alpha_hat], self.v_check()?)
    }

    /// `(β, β̂, α̂, α, U, V̂)`.
    pub fn dual(&self) -> Result<System> {
        let name = format!("{}^", self.name);
        self.with(&name, [&self.beta, &self.beta_hat, &self.alpha_hat, &self.alpha], self.v_hat()?)
    }

    /// `(α, α̂, β̂, β, U, V^op)`.
    pub fn opposite(&self) -> Result<System> {
        let name = format!("{}^op", self.name);
        self.with(&name, [&self.alpha, &self.alpha_hat, &self.beta_hat, &self.beta], self.v_op()?)
    }

    /// `(α̂, α, β̂, β, U, Ad_{U⊗U}(V))`.
    pub fn conjugated(&self) -> Result<System> {
        let name = format!("Ad(U⊗U)({})", self.name);
        self.with(&name, [&self.alpha_hat, &self.alpha, &self.beta_hat, &self.beta], self.ad_uu()?)
    }

    fn ket_op(&self, big: &SpaceRef, pos: usize, f: &Factorization, xi: &Mat) -> Result<Op> {
        ket(self.groupoid(), &self.h(), big, pos, &self.h(), (0, tag(f)?), xi)
    }

    fn kets(&self, big: &SpaceRef, pos: usize, f: &Factorization) -> Result<Vec<Op>> {
        f.sub.basis().iter().map(|xi| self.ket_op(big, pos, f, xi)).collect()
    }

    fn ket_side(&self, big: &SpaceRef, (pos, block, elem): KetSide) -> Result<Subspace> {
        let mut gens = Vec::new();
        for k in self.kets(big, pos, block)? {
            for e in elem.sub.basis() {
                gens.push(&k.mat * e);
            }
        }
        Subspace::span(big.dim(), self.groupoid().n_units(), &gens, &self.tol)
    }

    /// Residual of `T_*(lhs) = rhs` for a unitary `t`.
    pub fn relation(&self, t: &Op, lhs: KetSide, rhs: KetSide) -> Result<f64> {
        let l = self.ket_side(&t.dom, lhs)?;
        let r = self.ket_side(&t.cod, rhs)?;
        let pushed = l.left_mul(&t.mat, &self.tol)?;
        Ok(pushed.equal(&r, &self.tol)?.1)
    }

    /// The four relations `W_*(α◁α) = α▷α`, `W_*(β̂▷β) = β̂◁β`,
    /// `W_*(β̂▷β̂) = α▷β̂`, `W_*(β◁α) = β◁β`.
    pub fn intertwine(&self, w_name: &str, names: [&str; 4]) -> Vec<Record> {
        let (al, bt, bth) = (&*self.alpha, &*self.beta, &*self.beta_hat);
        let [na, _, nb, nbh] = names;
        let rels: [(String, KetSide, KetSide); 4] = [
            (format!("{w_name}_*({na}◁{na}) = {na}▷{na}"), (1, al, al), (0, al, al)),
            (format!("{w_name}_*({nbh}▷{nb}) = {nbh}◁{nb}"), (0, bth, bt), (1, bt, bth)),
            (format!("{w_name}_*({nbh}▷{nbh}) = {na}▷{nbh}"), (0, bth, bth), (0, al, bth)),
            (format!("{w_name}_*({nb}◁{na}) = {nb}◁{nb}"), (1, al, bt), (1, bt, bt)),
        ];
        rels.into_iter()
            .map(|(name, l, r)| {
                Record::residual(&name, "intertwining relation", self.relation(&self.w, l, r), self.tol.residual_tol)
            })
            .collect()
    }

    /// The pentagon `W₁₂W₁₃W₂₃ = W₂₃W₁₂` on its triple spaces.
    pub fn pentagon(&self) -> Result<f64> {
        let (a, _, b, bh) = self.tags();
        let d0 = self.triple(&[((0, bh), (1, a)), ((1, bh), (2, a))])?;
        let d1 = self.triple(&[((0, a), (1, b)), ((1, bh), (2, a))])?;
        let d2 = self.triple(&[((0, a), (1, b)), ((1, a), (2, b))])?;
        let e1 = self.triple(&[((1, a), (2, b)), ((0, bh), (2, a))])?;
        let e2 = self.triple(&[((0, bh), (1, a)), ((1, b), (2, a))])?;
        let e3 = self.triple(&[((0, a), (1, b)), ((0, bh), (2, a))])?;
        let e4 = self.triple(&[((0, bh), (1, a)), ((0, a), (2, b))])?;
        let w = &self.w;
        let w23 = lift(w, &[1, 2], &d0, &e1)?;
        let s1 = permute(&e1, &[0, 2, 1], &e2)?;
        let w12a = lift(w, &[0, 1], &e2, &e3)?;
        let s2 = permute(&e3, &[0, 2, 1], &e4)?;
        let w12b = lift(w, &[0, 1], &e4, &d2)?;
        let lhs = Op::chain(&[&w12b, &s2, &w12a, &s1, &w23])?;
        let r12 = lift(w, &[0, 1], &d0, &d1)?;
        let r23 = lift(w, &[1, 2], &d1, &d2)?;
        let rhs = r23.mul(&r12)?;
        Ok(op_norm(&(lhs.mat - rhs.mat)))
    }

    /// `Â(W) = [⟨β|₂W|α⟩₂]`.
    pub fn hat_leg(&self) -> Result<Subspace> {
        let kb = self.kets(&self.w.cod, 1, &self.beta)?;
        let ka = self.kets(&self.w.dom, 1, &self.alpha)?;
        self.sandwich(&kb, &ka)
    }

    /// `A(W) = [⟨α|₁W|β̂⟩₁]`.
    pub fn plain_leg(&self) -> Result<Subspace> {
        let ka = self.kets(&self.w.cod, 0, &self.alpha)?;
        let kbh = self.kets(&self.w.dom, 0, &self.beta_hat)?;
        self.sandwich(&ka, &kbh)
    }

    fn sandwich(&self, bras: &[Op], kets: &[Op]) -> Result<Subspace> {
        let n = self.h().dim();
        let mut gens = Vec::with_capacity(bras.len() * kets.len());
        for b in bras {
            let bw = b.mat.adjoint() * &self.w.mat;
            for k in kets {
                gens.push(&bw * &k.mat);
            }
        }
        Subspace::span(n, n, &gens, &self.tol)
    }

    /// `[⟨α|₁W|α⟩₂]` against `[αα*]`.
    pub fn regularity(&self) -> Result<f64> {
        let ka1 = self.kets(&self.w.cod, 0, &self.alpha)?;
        let ka2 = self.kets(&self.w.dom, 1, &self.alpha)?;
        let lhs = self.sandwich(&ka1, &ka2)?;
        let n = self.h().dim();
        let mut gens = Vec::new();
        for x in self.alpha.sub.basis() {
            for y in self.alpha.sub.basis() {
                gens.push(x * y.adjoint());
            }
        }
        let rhs = Subspace::span(n, n, &gens, &self.tol)?;
        Ok(lhs.equal(&rhs, &self.tol)?.1)
    }

    fn on_h(&self, x: &Mat) -> Result<Op> {
        Op::new(self.h(), self.h(), x.clone())
    }

    /// `Δ̂(y) = W*(1⊗y)W` on `P(b̂,a)`.
    pub fn delta_hat(&self, y: &Mat) -> Result<Op> {
        let y2 = lift(&self.on_h(y)?, &[1], &self.w.cod, &self.w.cod)?;
        Op::chain(&[&self.w.adjoint(), &y2, &self.w])
    }

    /// `Δ(z) = W(z⊗1)W*` on `P(a,b)`.
    pub fn delta(&self, z: &Mat) -> Result<Op> {
        let z1 = lift(&self.on_h(z)?, &[0], &self.w.dom, &self.w.dom)?;
        Op::chain(&[&self.w, &z1, &self.w.adjoint()])
    }

    /// `‖(Δ∗Id)Δ(z) − (Id∗Δ)Δ(z)‖`.
    pub fn coassociativity(&self, z: &Mat) -> Result<f64> {
        let (a, _, b, bh) = self.tags();
        let x = self.delta(z)?;
        let d1 = self.triple(&[((0, a), (1, b)), ((1, bh), (2, a))])?;
        let d2 = self.triple(&[((0, a), (1, b)), ((1, a), (2, b))])?;
        let e4 = self.triple(&[((0, bh), (1, a)), ((0, a), (2, b))])?;
        let w23 = lift(&self.w, &[1, 2], &d1, &d2)?;
        let x12 = lift(&x, &[0, 1], &d1, &d1)?;
        let lhs = Op::chain(&[&w23, &x12, &w23.adjoint()])?;
        let w12 = lift(&self.w, &[0, 1], &e4, &d2)?;
        let x13 = lift(&x, &[0, 2], &e4, &e4)?;
        let rhs = Op::chain(&[&w12, &x13, &w12.adjoint()])?;
        Ok(op_norm(&(lhs.mat - rhs.mat)))
    }

    /// `‖(Δ̂∗Id)Δ̂(y) − (Id∗Δ̂)Δ̂(y)‖`.
    pub fn coassociativity_hat(&self, y: &Mat) -> Result<f64> {
        let (a, _, b, bh) = self.tags();
        let x = self.delta_hat(y)?;
        let d0 = self.triple(&[((0, bh), (1, a)), ((1, bh), (2, a))])?;
        let d1 = self.triple(&[((0, a), (1, b)), ((1, bh), (2, a))])?;
        let e1 = self.triple(&[((1, a), (2, b)), ((0, bh), (2, a))])?;
        let w12 = lift(&self.w, &[0, 1], &d0, &d1)?;
        let x23 = lift(&x, &[1, 2], &d1, &d1)?;
        let lhs = Op::chain(&[&w12.adjoint(), &x23, &w12])?;
        let w23 = lift(&self.w, &[1, 2], &d0, &e1)?;
        let x13 = lift(&x, &[0, 2], &e1, &e1)?;
        let rhs = Op::chain(&[&w23.adjoint(), &x13, &w23])?;
        Ok(op_norm(&(lhs.mat - rhs.mat)))
    }

    /// `Ad_U(x) = UxU*` on `H`.
    pub fn ad_u(&self, x: &Mat) -> Mat {
        self.u.conj(x)
    }

    /// Span of `ρ_f(𝔅)`.
    pub fn rho_span(&self, f: &Factorization) -> Result<Subspace> {
        let n = self.h().dim();
        Subspace::span(n, n, &f.rho, &self.tol)
    }
}

/// Leg algebra with its comultiplication on a spanning set.
#[derive(Clone, Debug)]
pub struct HopfBimodule {
    pub algebra: Subspace,
    /// Image of each basis element of `algebra`.
    pub delta: Vec<Op>,
}

impl HopfBimodule {
    /// `Â(W)` with `Δ̂`.
    pub fn hat(sys: &System) -> Result<HopfBimodule> {
        let algebra = sys.hat_leg()?;
        let delta = algebra.basis().iter().map(|y| sys.delta_hat(y)).collect::<Result<_>>()?;
        Ok(HopfBimodule { algebra, delta })
    }

    /// `A(W)` with `Δ`.
    pub fn plain(sys: &System) -> Result<HopfBimodule> {
        let algebra = sys.plain_leg()?;
        let delta = algebra.basis().iter().map(|z| sys.delta(z)).collect::<Result<_>>()?;
        Ok(HopfBimodule { algebra, delta })
    }

    /// Comultiplication of any element, extended linearly from the basis.
    pub fn comultiply(&self, x: &Mat, tol: &Tolerance) -> Result<Mat> {
        let (ok, r) = self.algebra.contains(x, tol)?;
        if !ok {
            return Err(Error::Membership(format!("element outside the leg algebra (residual {r:.3e})")));
        }
        let first = self.delta.first().ok_or_else(|| Error::Membership("empty leg algebra".into()))?;
        let mut out = Mat::zeros(first.mat.nrows(), first.mat.ncols());
        for (z, d) in self.algebra.coords(x).iter().zip(&self.delta) {
            out += &d.mat * *z;
        }
        Ok(out)
    }
}

/// Documented corruptions used to show that the checks have power.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    /// Negate `U` on the first unit arrow.
    FlipUSign,
    /// Scale the last non-unit arrow's Haar weight by 1.5.
    PerturbHaarWeight,
    /// Rotate `α̂` by a fixed unitary mixing two arrows.
    RotateAlphaHat,
    /// Replace `U` by the identity.
    IdentityU,
}

impl Control {
    pub const ALL: [Control; 4] =
        [Control::FlipUSign, Control::PerturbHaarWeight, Control::RotateAlphaHat, Control::IdentityU];

    pub fn name(&self) -> &'static str {
        match self {
            Control::FlipUSign => "flip-U-sign",
            Control::PerturbHaarWeight => "perturb-one-haar-weight",
            Control::RotateAlphaHat => "rotate-alpha-hat",
            Control::IdentityU => "identity-U",
        }
    }
}

impl fmt::Display for Control {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Control {
    type Err = Error;
    fn from_str(s: &str) -> Result<Control> {
        Control::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Hypothesis(format!("unknown negative control {s:?}")))
    }
}

/// `(Vζ)(x,y) = ζ(x,x⁻¹y)` in the orthonormal bases: `e_{(x,z)} ↦ √(λ(xz)/λ(z))·e_{(x,xz)}`.
pub fn build_v(m: &Measure) -> Result<Op> {
    let g = m.groupoid();
    let dom = Space::pair(m, Fib::S, Fib::R);
    let cod = Space::pair(m, Fib::R, Fib::R);
    let mut mat = Mat::zeros(cod.dim(), dom.dim());
    for (j, t) in dom.tuples().iter().enumerate() {
        let (x, z) = (t[0], t[1]);
        let y = g.mul(x, z);
        let i = cod.index(&[x, y]).expect("(x, xz) shares its range with x");
        mat[(i, j)] = c((m.lambda(y) / m.lambda(z)).sqrt());
    }
    Op::new(dom, cod, mat)
}

/// `(Uξ)(x) = ξ(x⁻¹)D(x)^{-1/2}` in the basis `e_x`.
pub fn build_u(m: &Measure) -> Op {
    let g = m.groupoid();
    let h = Space::single(m);
    let n = g.n_arrows();
    let mut mat = Mat::zeros(n, n);
    for y in 0..n {
        let yi = g.inv(y);
        // U δ_y = D(y⁻¹)^{-1/2} δ_{y⁻¹}; rescaling to e_y leaves √(ν(y⁻¹)/ν(y)) / √D(y⁻¹)
        let coef = (m.nu(yi) / m.nu(y) / m.d(yi)).sqrt();
        mat[(yi, y)] = c(coef);
    }
    Op::new(h.clone(), h, mat).expect("square on H")
}

/// `(α, α̂, β, β̂, U, V)` of a measured groupoid, optionally corrupted.
#[derive(Clone, Debug)]
pub struct KacSystem {
    pub measure: Arc<Measure>,
    pub base: CStarBase,
    pub sys: System,
    pub control: Option<Control>,
    pub tol: Tolerance,
}

impl KacSystem {
    pub fn build(m: &Measure, tol: &Tolerance) -> Result<KacSystem> {
        KacSystem::build_with(m, None, tol)
    }

    pub fn build_with(m: &Measure, control: Option<Control>, tol: &Tolerance) -> Result<KacSystem> {
        let g = m.groupoid();
        let measure = match control {
            Some(Control::PerturbHaarWeight) => {
                let x = (0..g.n_arrows()).rev().find(|&x| g.unit_arrow(g.src(x)) != Some(x));
                m.with_scaled_haar_weight(x.unwrap_or(0), 1.5)?
            }
            _ => m.clone(),
        };
        let measure = Arc::new(measure);
        let h = Space::single(&measure);
        let base = CStarBase::new(&measure, tol)?;
        let alpha = Arc::new(j_factorization(&measure, &h, "α", tol)?);
        let mut alpha_hat = jhat_factorization(&measure, &h, "α̂", tol)?;
        let mut beta = (*alpha).clone();
        beta.name = "β".into();
        let mut beta_hat = alpha_hat.clone();
        beta_hat.name = "β̂".into();
        let mut u = build_u(&measure);
        match control {
            Some(Control::FlipUSign) => {
                let e = g.unit_arrow(0).unwrap_or(0);
                for i in 0..u.mat.nrows() {
                    u.mat[(i, e)] = -u.mat[(i, e)];
                }
            }
            Some(Control::IdentityU) => u.mat = Mat::identity(g.n_arrows(), g.n_arrows()),
            Some(Control::RotateAlphaHat) => alpha_hat = rotated(g, &alpha_hat),
            _ => {}
        }
        beta_hat.name = "β̂".into();
        let v = build_v(&measure)?;
        let sys = System::new(
            "V",
            measure.clone(),
            alpha,
            Arc::new(alpha_hat),
            Arc::new(beta),
            Arc::new(beta_hat),
            u,
            v,
            *tol,
        )?;
        Ok(KacSystem { measure, base, sys, control, tol: *tol })
    }

    pub fn groupoid(&self) -> &Groupoid {
        self.measure.groupoid()
    }

    fn rec(&self, name: &str, anchor: &str, r: Result<f64>) -> Record {
        Record::residual(name, anchor, r, self.tol.residual_tol)
    }

    /// Balanced hypotheses: unitarity, `U` a symmetry, `Uα = α̂`, `Uβ = β̂`
    /// (as spans and on the frames `U j(δ_x) = ĵ(δ_{x⁻¹})`), compatibility,
    /// and the measure data.
    pub fn hypotheses(&self) -> Vec<Record> {
        let s = &self.sys;
        let g = self.groupoid();
        let n = g.n_arrows();
        let id = Mat::identity(n, n);
        let tol = &self.tol;
        let mut out = vec![
            self.rec("haar.left-invariance", "Haar system", Ok(self.measure.haar().invariance_residual(g))),
            self.rec("measure.D-cocycle", "modular function", Ok(self.measure.cocycle_residual())),
            self.rec("base.commutation", "C*-base", Ok(self.base.commutation_residual())),
            self.rec("base.nondegenerate", "C*-base", Ok(self.base.nondegeneracy_residual())),
        ];
        for f in [&s.alpha, &s.alpha_hat, &s.beta, &s.beta_hat] {
            out.push(self.rec(&format!("factorization.{}", f.name), "C*-factorization", f.axiom_residual(&self.base, tol)));
        }
        out.push(self.rec("V.unitary", "unitarity", Ok(s.w.unitarity_residual())));
        out.push(self.rec("U.unitary", "symmetry", Ok(s.u.unitarity_residual())));
        out.push(self.rec("U.self-adjoint", "symmetry", Ok(op_norm(&(&s.u.mat - s.u.mat.adjoint())))));
        out.push(self.rec("U.involution", "symmetry", Ok(op_norm(&(&s.u.mat * &s.u.mat - &id)))));
        let push = |f: &Factorization, t: &Factorization| -> Result<f64> {
            Ok(f.sub.left_mul(&s.u.mat, tol)?.equal(&t.sub, tol)?.1)
        };
        out.push(self.rec("U.alpha=alpha-hat", "balanced factorizations", push(&s.alpha, &s.alpha_hat)));
        out.push(self.rec("U.beta=beta-hat", "balanced factorizations", push(&s.beta, &s.beta_hat)));
        let frames = |f: &Factorization, t: &Factorization| -> Result<f64> {
            if f.frame.len() != n || t.frame.len() != n {
                return Err(Error::Shape("frames are not indexed by arrows".into()));
            }
            Ok((0..n).map(|x| op_norm(&(&s.u.mat * &f.frame[x] - &t.frame[g.inv(x)]))).fold(0.0, f64::max))
        };
        out.push(self.rec("U.j=jhat-inverse", "balanced factorizations", frames(&s.alpha, &s.alpha_hat)));
        out.push(self.rec("U.j=jhat-inverse.beta", "balanced factorizations", frames(&s.beta, &s.beta_hat)));
        let roles = [&s.alpha, &s.alpha_hat, &s.beta, &s.beta_hat];
        for i in 0..4 {
            for j in i + 1..4 {
                let name = format!("compatible.{}.{}", roles[i].name, roles[j].name);
                out.push(self.rec(&name, "compatible factorizations", check_compatible(roles[i], roles[j], tol).map(|r| r.1)));
            }
        }
        out
    }

    /// Unitarity of the derived unitaries and the pentagon for `V`, `V̌`, `V̂`,
    /// `V^op` and `Ad_{U⊗U}(V)`.
    pub fn pentagon(&self) -> Vec<Record> {
        let mut out = vec![self.rec("pentagon.V", "pentagon equation", self.sys.pentagon())];
        let derived: [(&str, Result<System>); 4] = [
            ("Vˇ", self.sys.predual()),
            ("V^", self.sys.dual()),
            ("V^op", self.sys.opposite()),
            ("Ad(U⊗U)V", self.sys.conjugated()),
        ];
        for (name, s) in derived {
            out.push(self.rec(&format!("{name}.unitary"), "unitarity", s.as_ref().map(|s| s.w.unitarity_residual()).map_err(Clone::clone)));
            out.push(self.rec(&format!("pentagon.{name}"), "pentagon equation", s.and_then(|s| s.pentagon())));
        }
        out
    }

    /// The 18 intertwining relations.
    pub fn intertwine(&self) -> Vec<Record> {
        let s = &self.sys;
        let names = ["α", "α̂", "β", "β̂"];
        let mut out = s.intertwine("V", names);
        match s.predual() {
            Ok(p) => out.extend(p.intertwine("Vˇ", ["β̂", "β", "α", "α̂"])),
            Err(e) => out.push(self.rec("intertwine.Vˇ", "intertwining relation", Err(e))),
        }
        match s.dual() {
            Ok(d) => out.extend(d.intertwine("V^", ["β", "β̂", "α̂", "α"])),
            Err(e) => out.push(self.rec("intertwine.V^", "intertwining relation", Err(e))),
        }
        let (al, alh, bt, bth) = (&*s.alpha, &*s.alpha_hat, &*s.beta, &*s.beta_hat);
        let derived = |which: u8, name: &str, l: KetSide, r: KetSide| -> Record {
            let t = match which {
                0 => Ok(s.w.clone()),
                1 => s.v_check(),
                _ => s.v_hat(),
            };
            self.rec(name, "intertwining relation", t.and_then(|t| s.relation(&t, l, r)))
        };
        out.push(derived(0, "V_*(β̂▷α̂) = α▷α̂", (0, bth, alh), (0, al, alh)));
        out.push(derived(1, "Vˇ_*(α̂▷β) = β̂▷β", (0, alh, bt), (0, bth, bt)));
        out.push(derived(2, "V^_*(α▷β̂) = β▷β̂", (0, al, bth), (0, bt, bth)));
        out.push(derived(0, "V_*(α̂◁α) = α̂◁β", (1, al, alh), (1, bt, alh)));
        out.push(derived(1, "Vˇ_*(β◁β̂) = β◁α", (1, bth, bt), (1, al, bt)));
        out.push(derived(2, "V^_*(β̂◁β) = β̂◁α̂", (1, bt, bth), (1, alh, bth)));
        out
    }

    /// Leg algebras: dimensions, algebra property, absorption, module
    /// properties, `Δ(1) = 1` and coassociativity on generators.
    pub fn legs(&self) -> Vec<Record> {
        let s = &self.sys;
        let tol = &self.tol;
        let mut out = Vec::new();
        let hat = match HopfBimodule::hat(s) {
            Ok(h) => h,
            Err(e) => return vec![self.rec("legs.Â", "leg algebra", Err(e))],
        };
        let plain = match HopfBimodule::plain(s) {
            Ok(p) => p,
            Err(e) => return vec![self.rec("legs.A", "leg algebra", Err(e))],
        };
        let n = s.h().dim();
        for (label, leg, rho1, rho2, module) in [
            ("Â", &hat, &s.beta_hat, &s.alpha, &s.beta),
            ("A", &plain, &s.beta, &s.alpha, &s.beta_hat),
        ] {
            let alg = &leg.algebra;
            out.push(
                Record::verdict(&format!("legs.{label}.dim"), "leg algebra", alg.dim() > 0, 0.0, tol.residual_tol, None)
                    .with_note(format!("dim {}", alg.dim())),
            );
            let (_, r) = alg.is_algebra(tol);
            out.push(self.rec(&format!("legs.{label}.algebra"), "leg algebra", Ok(r)));
            let absorb = || -> Result<f64> {
                let r1 = s.rho_span(rho1)?;
                let r2 = s.rho_span(rho2)?;
                let mut worst: f64 = 0.0;
                for sp in [alg.product(alg, tol)?, alg.product(&r1, tol)?, r1.product(alg, tol)?, alg.product(&r2, tol)?, r2.product(alg, tol)?] {
                    worst = worst.max(sp.equal(alg, tol)?.1);
                }
                Ok(worst)
            };
            out.push(self.rec(&format!("legs.{label}.absorption"), "leg algebra absorption", absorb()));
            let preserves = || -> Result<f64> {
                let m = &module.sub;
                let r1 = m.includes(&alg.product(m, tol)?, tol)?.1;
                let r2 = m.includes(&alg.adjoint().product(m, tol)?, tol)?.1;
                Ok(r1.max(r2))
            };
            out.push(self.rec(&format!("legs.{label}.module-{}", module.name), "leg algebra module", preserves()));
            out.push(self.rec(
                &format!("legs.{label}.delta-unit"),
                "comultiplication",
                leg.comultiply(&Mat::identity(n, n), tol).map(|d| {
                    let k = d.nrows();
                    op_norm(&(d - Mat::identity(k, k)))
                }),
            ));
            let coassoc = || -> Result<f64> {
                let mut worst: f64 = 0.0;
                for x in alg.basis() {
                    let r = if label == "Â" { s.coassociativity_hat(x)? } else { s.coassociativity(x)? };
                    worst = worst.max(r);
                }
                Ok(worst)
            };
            out.push(self.rec(&format!("legs.{label}.coassociative"), "coassociativity", coassoc()));
        }
        out
    }

    /// Regularity of `V`, `V̌` and `V̂`.
    pub fn regularity(&self) -> Vec<Record> {
        let s = &self.sys;
        vec![
            self.rec("regular.V", "regularity", s.regularity()),
            self.rec("regular.Vˇ", "regularity", s.predual().and_then(|p| p.regularity())),
            self.rec("regular.V^", "regularity", s.dual().and_then(|d| d.regularity())),
        ]
    }

    /// The eight leg identities relating `V`, `V̌` and `V̂`.
    pub fn balanced_legs(&self) -> Vec<Record> {
        let anchor = "balanced legs";
        let run = || -> Result<Vec<Record>> {
            let s = &self.sys;
            let tol = &self.tol;
            let p = s.predual()?;
            let d = s.dual()?;
            let (hv, av) = (s.hat_leg()?, s.plain_leg()?);
            let (hc, ac) = (p.hat_leg()?, p.plain_leg()?);
            let (hh, ah) = (d.hat_leg()?, d.plain_leg()?);
            let ad = |x: &Subspace| x.map(|m| s.ad_u(m), tol);
            let eq = |x: &Subspace, y: &Subspace| -> Result<f64> { Ok(x.equal(y, tol)?.1) };
            let cmp = |basis: &[Mat], f: &dyn Fn(&Mat) -> Result<Mat>, g: &dyn Fn(&Mat) -> Result<Mat>| -> Result<f64> {
                let mut worst: f64 = 0.0;
                for x in basis {
                    worst = worst.max(op_norm(&(f(x)? - g(x)?)));
                }
                Ok(worst)
            };
            let r = vec![
                self.rec("Â(Vˇ) = Ad_U(A(V))", anchor, eq(&hc, &ad(&av)?)),
                self.rec(
                    "Δ̂_Vˇ = Ad_(U⊗U)∘Δ_V∘Ad_U",
                    anchor,
                    cmp(hc.basis(), &|y| Ok(p.delta_hat(y)?.mat), &|y| {
                        let dz = s.delta(&s.ad_u(y))?;
                        Ok(s.uu(&dz.cod)?.conj(&dz.mat))
                    }),
                ),
                self.rec("A(Vˇ) = Â(V)", anchor, eq(&ac, &hv)),
                self.rec(
                    "Δ_Vˇ = Δ̂_V",
                    anchor,
                    cmp(ac.basis(), &|x| Ok(p.delta(x)?.mat), &|x| Ok(s.delta_hat(x)?.mat)),
                ),
                self.rec("A(V^) = Ad_U(Â(V))", anchor, eq(&ah, &ad(&hv)?)),
                self.rec(
                    "Δ_V^ = Ad_(U⊗U)∘Δ̂_V∘Ad_U",
                    anchor,
                    cmp(ah.basis(), &|x| Ok(d.delta(x)?.mat), &|x| {
                        let dy = s.delta_hat(&s.ad_u(x))?;
                        Ok(s.uu(&dy.cod)?.conj(&dy.mat))
                    }),
                ),
                self.rec("Â(V^) = A(V)", anchor, eq(&hh, &av)),
                self.rec(
                    "Δ̂_V^ = Δ_V",
                    anchor,
                    cmp(hh.basis(), &|y| Ok(d.delta_hat(y)?.mat), &|y| Ok(s.delta(y)?.mat)),
                ),
            ];
            Ok(r)
        };
        run().unwrap_or_else(|e| vec![self.rec("balanced-legs", anchor, Err(e))])
    }

    /// Conditions i)(a)–(d) and ii)(a)–(d) of the weak Kac lemma, plus an
    /// agreement record per family.
    pub fn weak_kac(&self) -> Vec<Record> {
        let s = &self.sys;
        let (a, ah, b, bh) = s.tags();
        let hv = s.hat_leg();
        let av = s.plain_leg();
        let commute = |xs: &[Mat], ys: &[Mat]| -> f64 {
            let mut worst: f64 = 0.0;
            for x in xs {
                for y in ys {
                    worst = worst.max(op_norm(&(x * y - y * x)));
                }
            }
            worst
        };
        // (1⊗x)T = T(1⊗x) or (x⊗1)T = T(x⊗1) for each x
        let leg_commute = |t: &Op, leg: usize, xs: &[Mat]| -> Result<f64> {
            let mut worst: f64 = 0.0;
            for x in xs {
                let xo = Op::new(s.h(), s.h(), x.clone())?;
                let before = lift(&xo, &[leg], &t.dom, &t.dom)?;
                let after = lift(&xo, &[leg], &t.cod, &t.cod)?;
                worst = worst.max(op_norm(&(&after.mat * &t.mat - &t.mat * &before.mat)));
            }
            Ok(worst)
        };
        let i_a = || -> Result<f64> {
            let vh = s.v_hat()?;
            let t1 = s.triple(&[((0, a), (1, b)), ((1, bh), (2, a))])?;
            let top = s.triple(&[((0, b), (1, ah)), ((1, bh), (2, a))])?;
            let bot = s.triple(&[((0, a), (1, b)), ((1, a), (2, b))])?;
            let corner = s.triple(&[((0, b), (1, ah)), ((1, a), (2, b))])?;
            let p1 = lift(&s.w, &[1, 2], &top, &corner)?.mul(&lift(&vh, &[0, 1], &t1, &top)?)?;
            let p2 = lift(&vh, &[0, 1], &bot, &corner)?.mul(&lift(&s.w, &[1, 2], &t1, &bot)?)?;
            Ok(op_norm(&(p1.mat - p2.mat)))
        };
        let ii_a = || -> Result<f64> {
            let vc = s.v_check()?;
            let t2 = s.triple(&[((0, bh), (1, a)), ((1, ah), (2, bh))])?;
            let top = s.triple(&[((0, a), (1, b)), ((1, ah), (2, bh))])?;
            let bot = s.triple(&[((0, bh), (1, a)), ((1, bh), (2, a))])?;
            let corner = s.triple(&[((0, a), (1, b)), ((1, bh), (2, a))])?;
            let p1 = lift(&vc, &[1, 2], &top, &corner)?.mul(&lift(&s.w, &[0, 1], &t2, &top)?)?;
            let p2 = lift(&s.w, &[0, 1], &bot, &corner)?.mul(&lift(&vc, &[1, 2], &t2, &bot)?)?;
            Ok(op_norm(&(p1.mat - p2.mat)))
        };
        let adu = |xs: &Subspace| -> Vec<Mat> { xs.basis().iter().map(|x| s.ad_u(x)).collect() };
        let hv2 = hv.clone();
        let i_b = || -> Result<f64> { leg_commute(&s.v_hat()?, 1, hv2.clone()?.basis()) };
        let i_c = || -> Result<f64> { leg_commute(&s.w, 0, &adu(&hv.clone()?)) };
        let i_d = || -> Result<f64> {
            let h = hv.clone()?;
            Ok(commute(h.basis(), &adu(&h)))
        };
        let ii_b = || -> Result<f64> { leg_commute(&s.v_check()?, 0, av.clone()?.basis()) };
        let ii_c = || -> Result<f64> { leg_commute(&s.w, 1, &adu(&av.clone()?)) };
        let ii_d = || -> Result<f64> {
            let x = av.clone()?;
            Ok(commute(x.basis(), &adu(&x)))
        };
        let anchor = "weak Kac condition";
        let i = [
            self.rec("weak-kac.i.a", anchor, i_a()),
            self.rec("weak-kac.i.b", anchor, i_b()),
            self.rec("weak-kac.i.c", anchor, i_c()),
            self.rec("weak-kac.i.d", anchor, i_d()),
        ];
        let ii = [
            self.rec("weak-kac.ii.a", anchor, ii_a()),
            self.rec("weak-kac.ii.b", anchor, ii_b()),
            self.rec("weak-kac.ii.c", anchor, ii_c()),
            self.rec("weak-kac.ii.d", anchor, ii_d()),
        ];
        let mut out: Vec<Record> = i.iter().chain(ii.iter()).cloned().collect();
        // Forms that cannot even be typed (V̂ or V̌ missing) are left out of the comparison.
        for (fam, rs) in [("i", &i), ("ii", &ii)] {
            let evaluated: Vec<&Record> = rs.iter().filter(|r| r.residual.is_finite()).collect();
            let agree = evaluated.iter().all(|r| r.pass == evaluated[0].pass);
            let verdicts: Vec<String> = rs
                .iter()
                .map(|r| if r.residual.is_finite() { r.pass.to_string() } else { "untyped".into() })
                .collect();
            out.push(Record::verdict(
                &format!("weak-kac.{fam}.equivalent"),
                "equivalent formulations",
                agree && !evaluated.is_empty(),
                0.0,
                self.tol.residual_tol,
                Some(format!("verdicts [{}]", verdicts.join(", "))),
            ));
        }
        out
    }

    /// `(ΣU₂V)³ = 1`, `V̂VV̌ = U₁Σ`, `(U₂VΣ)³ = 1`, `(VΣU₂)³ = 1`, their
    /// agreement, and the balanced hypotheses folded into one record.
    pub fn kac(&self) -> Vec<Record> {
        let s = &self.sys;
        let (a, ah, b, bh) = s.tags();
        let m = &self.measure;
        let cube_res = |z: &Op| -> Result<f64> {
            let z3 = Op::chain(&[z, z, z])?;
            let k = z3.mat.nrows();
            Ok(op_norm(&(z3.mat - Mat::identity(k, k))))
        };
        let f1 = || -> Result<f64> {
            let u2 = s.u_leg(1, &s.w.cod, &s.p(a, bh))?;
            let sg = flip(m, &u2.cod)?;
            cube_res(&Op::chain(&[&sg, &u2, &s.w])?)
        };
        let f2 = || -> Result<f64> {
            let lhs = Op::chain(&[&s.v_hat()?, &s.w, &s.v_check()?])?;
            let sg = flip(m, &s.p(ah, bh))?;
            let u1 = s.u_leg(0, &sg.cod, &s.p(b, ah))?;
            let rhs = u1.mul(&sg)?;
            if *lhs.cod != *rhs.cod {
                return Err(Error::Flavor("V̂VV̌ and U₁Σ land in different spaces".into()));
            }
            Ok(op_norm(&(lhs.mat - rhs.mat)))
        };
        let f3 = || -> Result<f64> {
            let sg = flip(m, &s.p(a, bh))?;
            let u2 = s.u_leg(1, &s.w.cod, &s.p(a, bh))?;
            cube_res(&Op::chain(&[&u2, &s.w, &sg])?)
        };
        let f4 = || -> Result<f64> {
            let u2 = s.u_leg(1, &s.w.cod, &s.p(a, bh))?;
            let sg = flip(m, &u2.cod)?;
            cube_res(&Op::chain(&[&s.w, &sg, &u2])?)
        };
        let anchor = "Kac condition";
        // The Kac condition is a property of a balanced tuple: a form passes only
        // when its residual is small and the balanced hypotheses hold.
        let hyp = self.hypotheses();
        let failed: Vec<&str> = hyp.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
        let fold = |r: Record| -> Record {
            if failed.is_empty() {
                r
            } else {
                let note = format!("tuple not balanced: {}", failed.join(", "));
                Record { pass: false, note: Some(r.note.map_or(note.clone(), |n| format!("{n}; {note}"))), ..r }
            }
        };
        let forms = [
            fold(self.rec("kac.(ΣU₂V)³=1", anchor, f1())),
            fold(self.rec("kac.V^VVˇ=U₁Σ", anchor, f2())),
            fold(self.rec("kac.(U₂VΣ)³=1", anchor, f3())),
            fold(self.rec("kac.(VΣU₂)³=1", anchor, f4())),
        ];
        let mut out = forms.to_vec();
        out.push(Record::verdict(
            "kac.forms-agree",
            "equivalent formulations",
            forms.iter().all(|r| r.pass == forms[0].pass),
            0.0,
            self.tol.residual_tol,
            Some(format!("verdicts {:?}", forms.iter().map(|r| r.pass).collect::<Vec<_>>())),
        ));
        let worst = hyp.iter().map(|r| r.residual).fold(0.0, f64::max);
        out.push(Record::verdict(
            "kac.balanced",
            "balanced hypotheses",
            failed.is_empty(),
            worst,
            self.tol.residual_tol,
            if failed.is_empty() { None } else { Some(format!("failed: {}", failed.join(", "))) },
        ));
        out
    }

    /// `[AÂ] = [α̂α̂*]`, `[V|α⟩₂Â] = [|β⟩₂Â]`, `[Âα̂] = α̂`, `[Aα̂] = α̂`.
    pub fn kac_compact(&self) -> Vec<Record> {
        let s = &self.sys;
        let tol = &self.tol;
        let anchor = "compact legs";
        let hv = s.hat_leg();
        let av = s.plain_leg();
        let compact = || -> Result<f64> {
            let (h, a) = (hv.clone()?, av.clone()?);
            let lhs = a.product(&h, tol)?;
            let ah = &s.alpha_hat.sub;
            let rhs = ah.product(&ah.adjoint(), tol)?;
            Ok(lhs.equal(&rhs, tol)?.1)
        };
        let aux = || -> Result<f64> {
            let h = hv.clone()?;
            let mut l = Vec::new();
            let mut r = Vec::new();
            for k in s.kets(&s.w.dom, 1, &s.alpha)? {
                let vk = &s.w.mat * &k.mat;
                l.extend(h.basis().iter().map(|y| &vk * y));
            }
            for k in s.kets(&s.w.cod, 1, &s.beta)? {
                r.extend(h.basis().iter().map(|y| &k.mat * y));
            }
            let (rows, cols) = (s.w.cod.dim(), s.h().dim());
            let ls = Subspace::span(rows, cols, &l, tol)?;
            let rs = Subspace::span(rows, cols, &r, tol)?;
            Ok(ls.equal(&rs, tol)?.1)
        };
        let absorbs = |x: &Result<Subspace>| -> Result<f64> {
            let x = x.clone()?;
            Ok(x.product(&s.alpha_hat.sub, tol)?.equal(&s.alpha_hat.sub, tol)?.1)
        };
        vec![
            self.rec("[AÂ] = [α̂α̂*]", anchor, compact()),
            self.rec("[V|α⟩₂Â] = [|β⟩₂Â]", anchor, aux()),
            self.rec("[Âα̂] = α̂", anchor, absorbs(&hv)),
            self.rec("[Aα̂] = α̂", anchor, absorbs(&av)),
        ]
    }

    /// Identities between the derived unitaries.
    pub fn derived(&self) -> Vec<Record> {
        let s = &self.sys;
        let anchor = "derived unitaries";
        let diff = |x: Result<Op>, y: Result<Op>| -> Result<f64> {
            let (x, y) = (x?, y?);
            if *x.dom != *y.dom || *x.cod != *y.cod {
                return Err(Error::Flavor(format!("{:?} -> {:?} vs {:?} -> {:?}", x.dom, x.cod, y.dom, y.cod)));
            }
            Ok(op_norm(&(x.mat - y.mat)))
        };
        let pent_gap = || -> Result<f64> {
            let p = s.pentagon()?;
            let q = s.opposite()?.pentagon()?;
            Ok((p - q).abs())
        };
        vec![
            self.rec("V^ = V^op", anchor, diff(s.v_hat(), s.v_op())),
            self.rec("Vˇˇ = Ad_(U⊗U)(V)", anchor, diff(s.predual().and_then(|p| p.v_check()), s.ad_uu())),
            self.rec("V^^ = Ad_(U⊗U)(V)", anchor, diff(s.dual().and_then(|d| d.v_hat()), s.ad_uu())),
            self.rec(
                "Vˇˇˇ = V^",
                anchor,
                diff(s.predual().and_then(|p| p.predual()).and_then(|p| p.v_check()), s.v_hat()),
            ),
            self.rec("(V^op)ˇ = (V^)^op", anchor, diff(s.opposite().and_then(|o| o.v_check()), s.dual().and_then(|d| d.v_op()))),
            self.rec("pentagon(V) ≈ pentagon(V^op)", anchor, pent_gap()),
        ]
    }

    /// Every section, keyed by a stable section name.
    pub fn battery(&self) -> Vec<(&'static str, Vec<Record>)> {
        vec![
            ("hypotheses", self.hypotheses()),
            ("pentagon", self.pentagon()),
            ("derived", self.derived()),
            ("intertwine", self.intertwine()),
            ("legs", self.legs()),
            ("regularity", self.regularity()),
            ("balanced-legs", self.balanced_legs()),
            ("weak-kac", self.weak_kac()),
            ("kac", self.kac()),
            ("kac-compact", self.kac_compact()),
        ]
    }
}

/// `α̂` rotated by a unitary mixing two arrows, with its anchor tag kept.
fn rotated(g: &Groupoid, f: &Factorization) -> Factorization {
    let n = g.n_arrows();
    let mut r = Mat::identity(n, n);
    if n >= 2 {
        let pair = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .find(|&(p, q)| g.src(p) != g.src(q))
            .unwrap_or((0, 1));
        let (cs, sn) = ((std::f64::consts::PI / 5.0).cos(), (std::f64::consts::PI / 5.0).sin());
        let (p, q) = pair;
        r[(p, p)] = c(cs);
        r[(p, q)] = c(-sn);
        r[(q, p)] = c(sn);
        r[(q, q)] = c(cs);
    }
    let mut out = f.clone();
    out.sub = Subspace::from_orthonormal(
        f.sub.rows(),
        f.sub.cols(),
        f.sub.basis().iter().map(|b| &r * b).collect(),
        &Tolerance::default(),
    )
    .expect("a unitary keeps the basis orthonormal");
    out.frame = f.frame.iter().map(|b| &r * b).collect();
    out.rho = f.rho.iter().map(|p| &r * p * r.adjoint()).collect();
    out
}
