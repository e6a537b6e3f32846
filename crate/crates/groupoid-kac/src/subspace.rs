//! Closed linear spans of complex matrices.
//!
//! Every bracket `[X]` is realized as an [`Subspace`]: an orthonormal basis
//! under the Hilbert–Schmidt inner product `⟨X,Y⟩ = trace(X*Y)`. Vectorization
//! is column-major throughout, matching nalgebra's storage.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;

/// Rank and residual thresholds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_cutoff: f64,
    /// Absolute threshold for identity checks.
    pub residual_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rank_cutoff: 1e-9, residual_tol: 1e-8 }
    }
}

impl Tolerance {
    pub fn new(rank_cutoff: f64, residual_tol: f64) -> Result<Self> {
        if !(rank_cutoff > 0.0 && rank_cutoff < 1.0) {
            return Err(Error::Tolerance(format!("rank_cutoff {rank_cutoff} not in (0,1)")));
        }
        if !(residual_tol > 0.0) || !residual_tol.is_finite() {
            return Err(Error::Tolerance(format!("residual_tol {residual_tol} not positive")));
        }
        Ok(Tolerance { rank_cutoff, residual_tol })
    }

    pub fn with_residual(self, residual_tol: f64) -> Result<Self> {
        Tolerance::new(self.rank_cutoff, residual_tol)
    }

    // The floor of 1 keeps round-off debris from registering as rank when
    // every generator is numerically zero.
    pub fn threshold(&self, sigma_max: f64) -> f64 {
        self.rank_cutoff * sigma_max.max(1.0)
    }
}

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn hs_inner(a: &Mat, b: &Mat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn hs_norm(a: &Mat) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Operator norm (largest singular value).
pub fn op_norm(a: &Mat) -> f64 {
    if a.is_empty() || hs_norm(a) == 0.0 {
        return 0.0;
    }
    singular_values(a).into_iter().fold(0.0, f64::max)
}

/// Singular values in no particular order.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    match to_faer(a).singular_values() {
        Ok(sv) => sv,
        // faer reports non-convergence only
        Err(_) => a.clone().singular_values().iter().cloned().collect(),
    }
}

pub fn is_finite(a: &Mat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn matrix_unit(rows: usize, cols: usize, i: usize, j: usize) -> Mat {
    let mut m = Mat::zeros(rows, cols);
    m[(i, j)] = c(1.0);
    m
}

/// Build a matrix from row-major entries.
pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<Mat> {
    if entries.len() != rows * cols {
        return Err(Error::Shape(format!("{} entries for {rows}x{cols}", entries.len())));
    }
    let m = Mat::from_row_slice(rows, cols, entries);
    if !is_finite(&m) {
        return Err(Error::Shape("non-finite entry".into()));
    }
    Ok(m)
}

/// ‖a − b‖ in operator norm, shapes checked.
pub fn diff_norm(a: &Mat, b: &Mat) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(op_norm(&(a - b)))
}

/// Residual of `m` being unitary: ‖m*m − 1‖ and ‖mm* − 1‖.
pub fn unitarity_residual(m: &Mat) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let id = Mat::identity(n, n);
    let a = op_norm(&(m.adjoint() * m - &id));
    let b = op_norm(&(m * m.adjoint() - &id));
    a.max(b)
}

/// Kronecker product with the usual block layout.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = Mat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Orthonormal basis of the nullspace of `m` (as column vectors).
pub(crate) fn nullspace(m: &Mat, tol: &Tolerance) -> Vec<Vec<C64>> {
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }
    let square = compress_rows(m);
    let Ok(svd) = to_faer(&square).svd() else {
        // faer reports non-convergence only; nalgebra is the slower fallback
        return nullspace_slow(&square, tol);
    };
    let s = svd.S().column_vector();
    let v = svd.V();
    let smax = (0..n).map(|i| s[i].re).fold(0.0, f64::max);
    let thr = tol.threshold(smax);
    (0..n).filter(|&i| s[i].re <= thr).map(|i| (0..n).map(|r| v[(r, i)]).collect()).collect()
}

fn nullspace_slow(square: &Mat, tol: &Tolerance) -> Vec<Vec<C64>> {
    let svd = square.clone().svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let thr = tol.threshold(smax);
    let mut out = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s <= thr {
            out.push(vt.row(i).iter().map(|z| z.conj()).collect());
        }
    }
    out
}

fn to_faer(m: &Mat) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

// Reduce to an n×n matrix with the same row space: QR when tall, zero padding when wide.
fn compress_rows(m: &Mat) -> Mat {
    let (r, n) = m.shape();
    if r > n {
        let qr = to_faer(m).qr();
        let rr = qr.thin_R();
        Mat::from_fn(n, n, |i, j| rr[(i, j)])
    } else {
        let mut sq = Mat::zeros(n, n);
        sq.rows_mut(0, r).copy_from(m);
        sq
    }
}

/// Accumulates linear constraint rows on an unknown vector, compressing as it goes.
pub(crate) struct RowStack {
    n: usize,
    acc: Mat,
}

impl RowStack {
    pub(crate) fn new(n: usize) -> Self {
        RowStack { n, acc: Mat::zeros(0, n) }
    }

    pub(crate) fn push(&mut self, block: &Mat) {
        assert_eq!(block.ncols(), self.n);
        if block.nrows() == 0 {
            return;
        }
        let old = self.acc.nrows();
        let mut next = Mat::zeros(old + block.nrows(), self.n);
        next.rows_mut(0, old).copy_from(&self.acc);
        next.rows_mut(old, block.nrows()).copy_from(block);
        self.acc = if next.nrows() > 4 * self.n.max(1) { compress_rows(&next) } else { next };
    }

    pub(crate) fn nullspace(&self, tol: &Tolerance) -> Vec<Vec<C64>> {
        nullspace(&self.acc, tol)
    }
}

/// A closed linear span of `rows × cols` matrices with an orthonormal basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    rows: usize,
    cols: usize,
    basis: Vec<Mat>,
}

/// One requirement `left·T·right ∈ target` (or `left·T*·right ∈ target`).
#[derive(Clone, Debug)]
pub struct Constraint {
    pub left: Mat,
    pub right: Mat,
    pub target: Subspace,
    pub conjugate: bool,
}

impl Subspace {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Subspace { rows, cols, basis: Vec::new() }
    }

    /// The full matrix space, spanned by matrix units.
    pub fn full(rows: usize, cols: usize) -> Self {
        let mut basis = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                basis.push(matrix_unit(rows, cols, i, j));
            }
        }
        Subspace { rows, cols, basis }
    }

    /// Orthonormal span of `gens`; rank is decided at `tol.rank_cutoff`.
    pub fn span(rows: usize, cols: usize, gens: &[Mat], tol: &Tolerance) -> Result<Self> {
        for g in gens {
            if g.shape() != (rows, cols) {
                return Err(Error::Shape(format!(
                    "generator {:?}, expected {:?}",
                    g.shape(),
                    (rows, cols)
                )));
            }
        }
        if gens.is_empty() || rows * cols == 0 {
            return Ok(Subspace::zero(rows, cols));
        }
        let n = rows * cols;
        let mut g = Mat::zeros(n, gens.len());
        for (k, m) in gens.iter().enumerate() {
            g.column_mut(k).copy_from_slice(m.as_slice());
        }
        Ok(Subspace { rows, cols, basis: orthonormal_columns(g, rows, cols, tol) })
    }

    /// Keeps an already orthonormal family as the basis, after checking its Gram matrix.
    pub fn from_orthonormal(rows: usize, cols: usize, basis: Vec<Mat>, tol: &Tolerance) -> Result<Self> {
        if basis.iter().any(|b| b.shape() != (rows, cols)) {
            return Err(Error::Shape("basis element of the wrong shape".into()));
        }
        let s = Subspace { rows, cols, basis };
        let r = s.gram_residual();
        if !(r < tol.residual_tol) {
            return Err(Error::Shape(format!("family is not orthonormal (Gram residual {r:.3e})")));
        }
        Ok(s)
    }

    /// Span of generators whose shape is taken from the first one.
    pub fn span_of(gens: &[Mat], tol: &Tolerance) -> Result<Self> {
        match gens.first() {
            None => Err(Error::Shape("empty generator list has no shape".into())),
            Some(g) => Subspace::span(g.nrows(), g.ncols(), gens, tol),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Mat] {
        &self.basis
    }

    /// ‖Gram − 1‖ in max-entry norm.
    pub fn gram_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let g = hs_inner(a, b);
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - c(want)).norm());
            }
        }
        worst
    }

    fn check_shape(&self, m: &Mat) -> Result<()> {
        if m.shape() != (self.rows, self.cols) {
            return Err(Error::Shape(format!(
                "matrix {:?} vs subspace {:?}",
                m.shape(),
                (self.rows, self.cols)
            )));
        }
        Ok(())
    }

    pub fn project(&self, m: &Mat) -> Mat {
        let mut p = Mat::zeros(self.rows, self.cols);
        for b in &self.basis {
            p += b * hs_inner(b, m);
        }
        p
    }

    /// Coordinates of `m` in the orthonormal basis.
    pub fn coords(&self, m: &Mat) -> Vec<C64> {
        self.basis.iter().map(|b| hs_inner(b, m)).collect()
    }

    pub fn combine(&self, coords: &[C64]) -> Mat {
        let mut m = Mat::zeros(self.rows, self.cols);
        for (b, z) in self.basis.iter().zip(coords) {
            m += b * *z;
        }
        m
    }

    /// Relative projection residual `‖m − P(m)‖ / max(1, ‖m‖)`.
    pub fn residual(&self, m: &Mat) -> Result<f64> {
        self.check_shape(m)?;
        let r = hs_norm(&(m - self.project(m)));
        Ok(r / hs_norm(m).max(1.0))
    }

    pub fn contains(&self, m: &Mat, tol: &Tolerance) -> Result<(bool, f64)> {
        let r = self.residual(m)?;
        Ok((r < tol.residual_tol, r))
    }

    /// Worst residual of `other`'s basis inside `self`.
    pub fn includes(&self, other: &Subspace, tol: &Tolerance) -> Result<(bool, f64)> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!("{:?} vs {:?}", self.shape(), other.shape())));
        }
        let mut worst: f64 = 0.0;
        for b in &other.basis {
            worst = worst.max(self.residual(b)?);
        }
        Ok((worst < tol.residual_tol, worst))
    }

    pub fn equal(&self, other: &Subspace, tol: &Tolerance) -> Result<(bool, f64)> {
        let (_, r1) = self.includes(other, tol)?;
        let (_, r2) = other.includes(self, tol)?;
        let r = r1.max(r2);
        let r = if self.dim() != other.dim() { r.max(tol.residual_tol) } else { r };
        Ok((self.dim() == other.dim() && r < tol.residual_tol, r))
    }

    /// `[S·T]`.
    pub fn product(&self, other: &Subspace, tol: &Tolerance) -> Result<Subspace> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "inner dimensions {} and {}",
                self.cols, other.rows
            )));
        }
        let mut gens = Vec::with_capacity(self.dim() * other.dim());
        for s in &self.basis {
            for t in &other.basis {
                gens.push(s * t);
            }
        }
        Subspace::span(self.rows, other.cols, &gens, tol)
    }

    /// `[m·S]` for a single matrix.
    pub fn left_mul(&self, m: &Mat, tol: &Tolerance) -> Result<Subspace> {
        if m.ncols() != self.rows {
            return Err(Error::Shape(format!("{} vs {}", m.ncols(), self.rows)));
        }
        let gens: Vec<Mat> = self.basis.iter().map(|b| m * b).collect();
        Subspace::span(m.nrows(), self.cols, &gens, tol)
    }

    /// `[S·m]` for a single matrix.
    pub fn right_mul(&self, m: &Mat, tol: &Tolerance) -> Result<Subspace> {
        if m.nrows() != self.cols {
            return Err(Error::Shape(format!("{} vs {}", self.cols, m.nrows())));
        }
        let gens: Vec<Mat> = self.basis.iter().map(|b| b * m).collect();
        Subspace::span(self.rows, m.ncols(), &gens, tol)
    }

    pub fn adjoint(&self) -> Subspace {
        Subspace {
            rows: self.cols,
            cols: self.rows,
            basis: self.basis.iter().map(|b| b.adjoint()).collect(),
        }
    }

    pub fn sum(&self, other: &Subspace, tol: &Tolerance) -> Result<Subspace> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!("{:?} vs {:?}", self.shape(), other.shape())));
        }
        let gens: Vec<Mat> = self.basis.iter().chain(other.basis.iter()).cloned().collect();
        Subspace::span(self.rows, self.cols, &gens, tol)
    }

    /// Intersection via principal vectors with vanishing angle.
    pub fn intersection(&self, other: &Subspace, tol: &Tolerance) -> Result<Subspace> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!("{:?} vs {:?}", self.shape(), other.shape())));
        }
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(Subspace::zero(self.rows, self.cols));
        }
        let mut cross = Mat::zeros(self.dim(), other.dim());
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in other.basis.iter().enumerate() {
                cross[(i, j)] = hs_inner(a, b);
            }
        }
        let svd = cross.svd(true, false);
        let u = svd.u.expect("u requested");
        let mut gens = Vec::new();
        for (k, s) in svd.singular_values.iter().enumerate() {
            // a rank decision, so it follows the rank cutoff and not the residual threshold
            let sin = (1.0 - s * s).max(0.0).sqrt();
            if sin < tol.rank_cutoff.sqrt() {
                let coords: Vec<C64> = u.column(k).iter().cloned().collect();
                gens.push(self.combine(&coords));
            }
        }
        Subspace::span(self.rows, self.cols, &gens, tol)
    }

    /// All matrices commuting with every element of `self`.
    pub fn commutant(&self, tol: &Tolerance) -> Result<Subspace> {
        if self.rows != self.cols {
            return Err(Error::Shape(format!("commutant of non-square {:?}", self.shape())));
        }
        let n = self.rows;
        let id = Mat::identity(n, n);
        let mut stack = RowStack::new(n * n);
        for s in &self.basis {
            // vec(T s − s T) = (sᵀ ⊗ 1 − 1 ⊗ s) vec(T)
            let block = kron(&s.transpose(), &id) - kron(&id, s);
            stack.push(&block);
        }
        Ok(Subspace { rows: n, cols: n, basis: pack(stack.nullspace(tol), n, n) })
    }

    /// Closed under products and adjoints.
    pub fn is_algebra(&self, tol: &Tolerance) -> (bool, f64) {
        if self.rows != self.cols {
            return (false, f64::INFINITY);
        }
        let mut worst: f64 = 0.0;
        for s in &self.basis {
            for t in &self.basis {
                worst = worst.max(self.residual(&(s * t)).unwrap_or(f64::INFINITY));
            }
            worst = worst.max(self.residual(&s.adjoint()).unwrap_or(f64::INFINITY));
        }
        (worst < tol.residual_tol, worst)
    }

    /// Span of `self` and the identity.
    pub fn unital_closure(&self, tol: &Tolerance) -> Result<Subspace> {
        if self.rows != self.cols {
            return Err(Error::Shape("unital closure of non-square space".into()));
        }
        let mut gens = self.basis.clone();
        gens.push(Mat::identity(self.rows, self.rows));
        Subspace::span(self.rows, self.cols, &gens, tol)
    }

    /// Image under a linear map given elementwise.
    pub fn map<F: Fn(&Mat) -> Mat>(&self, f: F, tol: &Tolerance) -> Result<Subspace> {
        let gens: Vec<Mat> = self.basis.iter().map(f).collect();
        match gens.first() {
            Some(g) => Subspace::span(g.nrows(), g.ncols(), &gens, tol),
            None => Err(Error::Shape("image shape of an empty span is unknown".into())),
        }
    }
}

fn orthonormal_columns(g: Mat, rows: usize, cols: usize, tol: &Tolerance) -> Vec<Mat> {
    let sv = singular_values(&g);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Vec::new();
    }
    let thr = tol.threshold(smax);
    let rank = sv.iter().filter(|s| **s >= thr).count();
    // SVD decides the rank; the basis comes from a column-pivoted QR, whose
    // leading columns lie in the span of the generators to working precision.
    // Singular vectors of degenerate singular values drift by ~1e-11.
    let q = g.col_piv_qr().q();
    (0..rank).map(|j| Mat::from_column_slice(rows, cols, q.column(j).as_slice())).collect()
}

fn pack(vectors: Vec<Vec<C64>>, rows: usize, cols: usize) -> Vec<Mat> {
    vectors.into_iter().map(|v| Mat::from_column_slice(rows, cols, &v)).collect()
}

/// Solution space of the complex-linear membership constraints on an unknown
/// `rows × cols` matrix.
///
/// A conjugate constraint `L·T*·R ∈ S` is rewritten as `R*·T·L* ∈ S*`, so the
/// whole system stays complex-linear and no realification is needed.
pub fn solve_membership_constraints(
    rows: usize,
    cols: usize,
    constraints: &[Constraint],
    tol: &Tolerance,
) -> Result<Subspace> {
    solve_constraints(rows, cols, constraints, &[], tol)
}

/// Like [`solve_membership_constraints`], with additional intertwining
/// constraints `P·T = T·Q` given as pairs `(P, Q)`.
pub fn solve_constraints(
    rows: usize,
    cols: usize,
    constraints: &[Constraint],
    intertwining: &[(Mat, Mat)],
    tol: &Tolerance,
) -> Result<Subspace> {
    let n = rows * cols;
    let mut stack = RowStack::new(n);
    let (id_r, id_c) = (Mat::identity(rows, rows), Mat::identity(cols, cols));
    for (k, (p, q)) in intertwining.iter().enumerate() {
        if p.shape() != (rows, rows) || q.shape() != (cols, cols) {
            return Err(Error::Shape(format!(
                "intertwining pair {k}: {:?}, {:?} with T {rows}x{cols}",
                p.shape(),
                q.shape()
            )));
        }
        // vec(P T − T Q) = (1 ⊗ P − Qᵀ ⊗ 1) vec(T)
        stack.push(&(kron(&id_c, p) - kron(&q.transpose(), &id_r)));
    }
    for (k, con) in constraints.iter().enumerate() {
        let (left, right, target) = if con.conjugate {
            (con.right.adjoint(), con.left.adjoint(), con.target.adjoint())
        } else {
            (con.left.clone(), con.right.clone(), con.target.clone())
        };
        if left.ncols() != rows || right.nrows() != cols {
            return Err(Error::Shape(format!(
                "constraint {k}: factors {:?}·T·{:?} with T {rows}x{cols}",
                left.shape(),
                right.shape()
            )));
        }
        if target.shape() != (left.nrows(), right.ncols()) {
            return Err(Error::Shape(format!(
                "constraint {k}: target {:?} vs product {:?}",
                target.shape(),
                (left.nrows(), right.ncols())
            )));
        }
        stack.push(&constraint_rows(&left, &right, &target));
    }
    Ok(Subspace { rows, cols, basis: pack(stack.nullspace(tol), rows, cols) })
}

// Rows of (1 − P_S)(Rᵀ ⊗ L), restricted to nonzero rows.
fn constraint_rows(left: &Mat, right: &Mat, target: &Subspace) -> Mat {
    let k = kron(&right.transpose(), left);
    if target.dim() == 0 {
        return k;
    }
    let mut b = Mat::zeros(k.nrows(), target.dim());
    for (j, t) in target.basis().iter().enumerate() {
        b.column_mut(j).copy_from_slice(t.as_slice());
    }
    let proj = &b * (b.adjoint() * &k);
    k - proj
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn diag2() -> Subspace {
        Subspace::span(2, 2, &[matrix_unit(2, 2, 0, 0), matrix_unit(2, 2, 1, 1)], &tol()).unwrap()
    }

    #[test]
    fn empty_span_is_zero() {
        assert_eq!(Subspace::span(2, 2, &[], &tol()).unwrap().dim(), 0);
    }

    #[test]
    fn collinear_generators() {
        let i2 = Mat::identity(2, 2);
        let s = Subspace::span(2, 2, &[i2.clone(), i2.clone() * c(2.0)], &tol()).unwrap();
        assert_eq!(s.dim(), 1);
        let b = &s.basis()[0];
        let phase = b[(0, 0)] / b[(0, 0)].norm();
        let expect = i2 * c(1.0 / 2f64.sqrt()) * phase;
        assert!(hs_norm(&(b - expect)) < 1e-12);
    }

    #[test]
    fn matrix_units_span_everything() {
        let units: Vec<Mat> =
            (0..4).map(|k| matrix_unit(2, 2, k / 2, k % 2)).collect();
        assert_eq!(Subspace::span(2, 2, &units, &tol()).unwrap().dim(), 4);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let r = Subspace::span(2, 2, &[Mat::identity(3, 3)], &tol());
        assert!(matches!(r, Err(Error::Shape(_))));
    }

    #[test]
    fn product_examples() {
        let id = Subspace::span(2, 2, &[Mat::identity(2, 2)], &tol()).unwrap();
        let x = Mat::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(-1.0)]);
        let sx = Subspace::span(2, 2, std::slice::from_ref(&x), &tol()).unwrap();
        assert!(id.product(&sx, &tol()).unwrap().equal(&sx, &tol()).unwrap().0);
        let d = diag2();
        let dd = d.product(&d, &tol()).unwrap();
        assert_eq!(dd.dim(), 2);
        assert!(dd.equal(&d, &tol()).unwrap().0);
        let z = Subspace::zero(2, 2);
        assert_eq!(z.product(&sx, &tol()).unwrap().dim(), 0);
        assert!(matches!(
            Subspace::full(2, 3).product(&Subspace::full(2, 3), &tol()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn adjoint_sum_intersection() {
        let d = diag2();
        assert!(d.intersection(&d, &tol()).unwrap().equal(&d, &tol()).unwrap().0);
        let anti =
            Subspace::span(2, 2, &[matrix_unit(2, 2, 0, 1), matrix_unit(2, 2, 1, 0)], &tol())
                .unwrap();
        assert_eq!(d.sum(&anti, &tol()).unwrap().dim(), 4);
        assert_eq!(d.intersection(&anti, &tol()).unwrap().dim(), 0);
        let e12 = Subspace::span(2, 2, &[matrix_unit(2, 2, 0, 1)], &tol()).unwrap();
        let e21 = Subspace::span(2, 2, &[matrix_unit(2, 2, 1, 0)], &tol()).unwrap();
        assert!(e12.adjoint().equal(&e21, &tol()).unwrap().0);
    }

    #[test]
    fn contains_examples() {
        let id = Subspace::span(2, 2, &[Mat::identity(2, 2)], &tol()).unwrap();
        let (f, r) = id.contains(&(Mat::identity(2, 2) * c(3.0)), &tol()).unwrap();
        assert!(f && r < 1e-14);
        let (f, r) = id.contains(&matrix_unit(2, 2, 0, 1), &tol()).unwrap();
        assert!(!f && (r - 1.0).abs() < 1e-14);
        let (f, r) = Subspace::zero(2, 2).contains(&Mat::zeros(2, 2), &tol()).unwrap();
        assert!(f && r == 0.0);
    }

    #[test]
    fn equality_examples() {
        let id = Subspace::span(2, 2, &[Mat::identity(2, 2)], &tol()).unwrap();
        assert_eq!(id.equal(&id, &tol()).unwrap(), (true, 0.0));
        let id2 = Subspace::span(2, 2, &[Mat::identity(2, 2) * c(2.0)], &tol()).unwrap();
        assert!(id.equal(&id2, &tol()).unwrap().0);
        let e11 = Subspace::span(2, 2, &[matrix_unit(2, 2, 0, 0)], &tol()).unwrap();
        let (f, r) = id.equal(&e11, &tol()).unwrap();
        assert!(!f && r > 0.1);
    }

    #[test]
    fn commutant_examples() {
        let full = Subspace::full(2, 2);
        let cm = full.commutant(&tol()).unwrap();
        assert_eq!(cm.dim(), 1);
        assert!(cm.contains(&Mat::identity(2, 2), &tol()).unwrap().0);
        let id = Subspace::span(2, 2, &[Mat::identity(2, 2)], &tol()).unwrap();
        assert_eq!(id.commutant(&tol()).unwrap().dim(), 4);
        let d = diag2();
        assert!(d.commutant(&tol()).unwrap().equal(&d, &tol()).unwrap().0);
        assert!(Subspace::full(2, 3).commutant(&tol()).is_err());
    }

    #[test]
    fn constraint_examples() {
        let full = solve_membership_constraints(2, 2, &[], &tol()).unwrap();
        assert_eq!(full.dim(), 4);
        let zero = solve_membership_constraints(
            2,
            2,
            &[Constraint {
                left: Mat::identity(2, 2),
                right: Mat::identity(2, 2),
                target: Subspace::zero(2, 2),
                conjugate: false,
            }],
            &tol(),
        )
        .unwrap();
        assert_eq!(zero.dim(), 0);
        let e1 = Mat::from_column_slice(2, 1, &[c(1.0), c(0.0)]);
        let line = Subspace::span(2, 1, std::slice::from_ref(&e1), &tol()).unwrap();
        let cons = vec![
            Constraint { left: Mat::identity(2, 2), right: e1.clone(), target: line.clone(), conjugate: false },
            Constraint { left: Mat::identity(2, 2), right: e1.clone(), target: line, conjugate: true },
        ];
        let sol = solve_membership_constraints(2, 2, &cons, &tol()).unwrap();
        assert_eq!(sol.dim(), 2);
        assert!(sol.equal(&diag2(), &tol()).unwrap().0);
    }

    #[test]
    fn algebra_examples() {
        assert!(Subspace::full(3, 3).is_algebra(&tol()).0);
        let e12 = Subspace::span(2, 2, &[matrix_unit(2, 2, 0, 1)], &tol()).unwrap();
        assert!(!e12.is_algebra(&tol()).0);
        assert!(diag2().is_algebra(&tol()).0);
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(0.0, 1e-8).is_err());
        assert!(Tolerance::new(1e-9, 0.0).is_err());
        assert!(Tolerance::new(1e-9, 1e-8).is_ok());
    }
}
