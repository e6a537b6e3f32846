//! Relative tensor products realized on composable-tuple bases.
//!
//! A [`Space`] is the span of tuples of arrows satisfying a list of fiber
//! links `(i, f) = (j, g)`, read as `f(t_i) = g(t_j)`. Its orthonormal basis
//! `e_t` corresponds to `ε_{t_1} ⊗ e_u ⊗ ε_{t_2} ⊗ …`, so every structural map
//! (flip, lift, ket) is a 0/1 matrix in these bases. The ν-weights are kept for
//! the function picture only.
//!
//! Two spaces are the same *flavor* when their links induce the same
//! partition of `(coordinate, fiber)` nodes. [`Op`] carries its domain and
//! codomain spaces and refuses compositions across different flavors.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::groupoid::{Fib, Groupoid, Measure};
use crate::subspace::{c, unitarity_residual, Mat, Subspace, Tolerance};

pub type Node = (usize, Fib);

#[derive(Clone)]
pub struct Space {
    arity: usize,
    links: Vec<(Node, Node)>,
    classes: Vec<Vec<Node>>,
    tuples: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    weights: Vec<f64>,
    n_units: usize,
}

pub type SpaceRef = Arc<Space>;

impl PartialEq for Space {
    fn eq(&self, other: &Space) -> bool {
        self.arity == other.arity && self.classes == other.classes && self.n_units == other.n_units
    }
}

impl fmt::Debug for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Space[{}", self.arity)?;
        for class in &self.classes {
            let parts: Vec<String> =
                class.iter().map(|(k, g)| format!("{}.{}", k + 1, fib_name(*g))).collect();
            write!(f, " {}", parts.join("="))?;
        }
        write!(f, "; dim {}]", self.tuples.len())
    }
}

fn fib_name(f: Fib) -> &'static str {
    match f {
        Fib::R => "r",
        Fib::S => "s",
    }
}

fn node_id((k, f): Node) -> usize {
    2 * k + usize::from(f == Fib::S)
}

fn id_node(i: usize) -> Node {
    (i / 2, if i.is_multiple_of(2) { Fib::R } else { Fib::S })
}

fn partition(arity: usize, links: &[(Node, Node)]) -> Vec<Vec<Node>> {
    let mut parent: Vec<usize> = (0..2 * arity).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for (a, b) in links {
        let (ra, rb) = (find(&mut parent, node_id(*a)), find(&mut parent, node_id(*b)));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: HashMap<usize, Vec<Node>> = HashMap::new();
    for i in 0..2 * arity {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(id_node(i));
    }
    let mut classes: Vec<Vec<Node>> = groups.into_values().filter(|g| g.len() > 1).collect();
    for cl in classes.iter_mut() {
        cl.sort();
    }
    classes.sort();
    classes
}

fn links_of(classes: &[Vec<Node>]) -> Vec<(Node, Node)> {
    let mut links = Vec::new();
    for cl in classes {
        for w in cl.windows(2) {
            links.push((w[0], w[1]));
        }
    }
    links
}

impl Space {
    /// Tuples of length `arity` satisfying `links`, in lexicographic order of
    /// the arrow order.
    pub fn new(m: &Measure, arity: usize, links: &[(Node, Node)]) -> Result<SpaceRef> {
        if arity == 0 {
            return Err(Error::Flavor("arity must be positive".into()));
        }
        for ((i, _), (j, _)) in links {
            if *i >= arity || *j >= arity || i == j {
                return Err(Error::Flavor(format!("link between coordinates {i} and {j}")));
            }
        }
        let g = m.groupoid();
        let classes = partition(arity, links);
        let links = links_of(&classes);
        let mut tuples = Vec::new();
        let mut cur = Vec::with_capacity(arity);
        enumerate(g, arity, &links, &mut cur, &mut tuples);
        let index = tuples.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let weights = tuples.iter().map(|t| tuple_weight(m, &links, t)).collect();
        Ok(Arc::new(Space { arity, links, classes, tuples, index, weights, n_units: g.n_units() }))
    }

    /// `H` itself.
    pub fn single(m: &Measure) -> SpaceRef {
        Space::new(m, 1, &[]).expect("arity one is valid")
    }

    /// Pair space with the single link `f1(x) = f2(y)`.
    pub fn pair(m: &Measure, f1: Fib, f2: Fib) -> SpaceRef {
        Space::new(m, 2, &[((0, f1), (1, f2))]).expect("pair links are valid")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        self.tuples.len()
    }

    pub fn n_units(&self) -> usize {
        self.n_units
    }

    pub fn links(&self) -> &[(Node, Node)] {
        &self.links
    }

    pub fn classes(&self) -> &[Vec<Node>] {
        &self.classes
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn tuple(&self, i: usize) -> &[usize] {
        &self.tuples[i]
    }

    pub fn index(&self, t: &[usize]) -> Option<usize> {
        self.index.get(t).copied()
    }

    /// ν-mass of the basis point (nested sums: μ outermost, λ along each fiber).
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Appends one coordinate linked by `anchor = (new, f)`.
    pub fn append(&self, m: &Measure, anchor: Node, f: Fib) -> Result<SpaceRef> {
        let mut links = self.links.clone();
        links.push((anchor, (self.arity, f)));
        Space::new(m, self.arity + 1, &links)
    }

    /// Appends a whole block: links of `other` shifted, plus `anchor = (first block coordinate + k, f)`.
    pub fn append_block(&self, m: &Measure, anchor: Node, other: &Space, at: Node) -> Result<SpaceRef> {
        let sh = self.arity;
        let mut links = self.links.clone();
        links.extend(other.links.iter().map(|((i, f), (j, g))| ((i + sh, *f), (j + sh, *g))));
        links.push((anchor, (at.0 + sh, at.1)));
        Space::new(m, sh + other.arity, &links)
    }
}

fn enumerate(g: &Groupoid, arity: usize, links: &[(Node, Node)], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let k = cur.len();
    if k == arity {
        out.push(cur.clone());
        return;
    }
    for x in 0..g.n_arrows() {
        cur.push(x);
        let ok = links.iter().all(|((i, f), (j, h))| {
            if (*i == k && *j <= k) || (*j == k && *i <= k) {
                g.fib(cur[*i], *f) == g.fib(cur[*j], *h)
            } else {
                true
            }
        });
        if ok {
            enumerate(g, arity, links, cur, out);
        }
        cur.pop();
    }
}

fn tuple_weight(m: &Measure, links: &[(Node, Node)], t: &[usize]) -> f64 {
    let mut w = m.nu(t[0]);
    for k in 1..t.len() {
        let earlier = links.iter().find_map(|((i, f), (j, h))| {
            if *i == k && *j < k {
                Some(*f)
            } else if *j == k && *i < k {
                Some(*h)
            } else {
                None
            }
        });
        w *= match earlier {
            Some(f) => m.lambda_on(t[k], f),
            None => m.nu(t[k]),
        };
    }
    w
}

/// An operator between two fibered spaces.
#[derive(Clone, Debug)]
pub struct Op {
    pub dom: SpaceRef,
    pub cod: SpaceRef,
    pub mat: Mat,
}

// Entries below this are treated as round-off when auditing where a lift lands.
const AUDIT_FLOOR: f64 = 1e-12;

impl Op {
    pub fn new(dom: SpaceRef, cod: SpaceRef, mat: Mat) -> Result<Op> {
        if mat.shape() != (cod.dim(), dom.dim()) {
            return Err(Error::Shape(format!(
                "matrix {:?} between spaces of dims {} -> {}",
                mat.shape(),
                dom.dim(),
                cod.dim()
            )));
        }
        Ok(Op { dom, cod, mat })
    }

    pub fn identity(space: &SpaceRef) -> Op {
        let n = space.dim();
        Op { dom: space.clone(), cod: space.clone(), mat: Mat::identity(n, n) }
    }

    pub fn adjoint(&self) -> Op {
        Op { dom: self.cod.clone(), cod: self.dom.clone(), mat: self.mat.adjoint() }
    }

    /// `self ∘ rhs`.
    pub fn mul(&self, rhs: &Op) -> Result<Op> {
        if *self.dom != *rhs.cod {
            return Err(Error::Flavor(format!(
                "composing {:?} after an operator into {:?}",
                self.dom, rhs.cod
            )));
        }
        Ok(Op { dom: rhs.dom.clone(), cod: self.cod.clone(), mat: &self.mat * &rhs.mat })
    }

    /// Right-to-left product of a chain, `ops[0] ∘ ops[1] ∘ …`.
    pub fn chain(ops: &[&Op]) -> Result<Op> {
        let (last, rest) = ops.split_last().ok_or_else(|| Error::Flavor("empty chain".into()))?;
        let mut acc = (*last).clone();
        for op in rest.iter().rev() {
            acc = op.mul(&acc)?;
        }
        Ok(acc)
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.mat)
    }

    /// `self·x·self*` for an operator `x` on the domain.
    pub fn conj(&self, x: &Mat) -> Mat {
        &self.mat * x * self.mat.adjoint()
    }
}

/// Acts by `op` on the coordinates `legs` of `dom` and as identity elsewhere.
///
/// When `op` changes arity the legs must be contiguous and the image block is
/// spliced in their place. Every image tuple must lie in `cod`; otherwise the
/// spaces were assembled with the wrong fiber conditions and a flavor error is
/// returned.
pub fn lift(op: &Op, legs: &[usize], dom: &SpaceRef, cod: &SpaceRef) -> Result<Op> {
    let m_in = op.dom.arity();
    let m_out = op.cod.arity();
    if legs.len() != m_in || legs.iter().any(|&l| l >= dom.arity()) {
        return Err(Error::Flavor(format!("legs {legs:?} for an arity-{m_in} operator")));
    }
    let contiguous = legs.windows(2).all(|w| w[1] == w[0] + 1);
    if m_in != m_out && !contiguous {
        return Err(Error::Flavor("arity-changing lift needs contiguous legs".into()));
    }
    if dom.arity() - m_in + m_out != cod.arity() {
        return Err(Error::Flavor("codomain arity does not match the lift".into()));
    }
    let scale = op.mat.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let mut mat = Mat::zeros(cod.dim(), dom.dim());
    let mut sub = vec![0; m_in];
    for (j, t) in dom.tuples().iter().enumerate() {
        for (k, &l) in legs.iter().enumerate() {
            sub[k] = t[l];
        }
        let Some(sj) = op.dom.index(&sub) else {
            return Err(Error::Flavor(format!(
                "tuple {t:?} restricts to {sub:?}, outside the operator domain {:?}",
                op.dom
            )));
        };
        for si in 0..op.cod.dim() {
            let v = op.mat[(si, sj)];
            if v.norm() <= AUDIT_FLOOR * scale {
                continue;
            }
            let w = op.cod.tuple(si);
            let image: Vec<usize> = if m_in == m_out {
                let mut u = t.clone();
                for (k, &l) in legs.iter().enumerate() {
                    u[l] = w[k];
                }
                u
            } else {
                let p = legs[0];
                t[..p].iter().chain(w.iter()).chain(t[p + m_in..].iter()).copied().collect()
            };
            let Some(i) = cod.index(&image) else {
                return Err(Error::Flavor(format!(
                    "lift sends {t:?} to {image:?}, outside {cod:?}"
                )));
            };
            mat[(i, j)] += v;
        }
    }
    Op::new(dom.clone(), cod.clone(), mat)
}

/// Coordinate permutation `e_t ↦ e_{t'}` with `t'[k] = t[perm[k]]`.
pub fn permute(dom: &SpaceRef, perm: &[usize], cod: &SpaceRef) -> Result<Op> {
    let n = dom.arity();
    let mut seen = vec![false; n];
    if perm.len() != n || cod.arity() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::Flavor(format!("{perm:?} is not a permutation of {n} coordinates")));
    }
    let mut mat = Mat::zeros(cod.dim(), dom.dim());
    for (j, t) in dom.tuples().iter().enumerate() {
        let image: Vec<usize> = perm.iter().map(|&p| t[p]).collect();
        let i = cod.index(&image).ok_or_else(|| {
            Error::Flavor(format!("permutation sends {t:?} outside {cod:?}"))
        })?;
        mat[(i, j)] = c(1.0);
    }
    Op::new(dom.clone(), cod.clone(), mat)
}

/// The flip Σ of a pair space onto its mirrored flavor.
pub fn flip(m: &Measure, dom: &SpaceRef) -> Result<Op> {
    if dom.arity() != 2 {
        return Err(Error::Flavor("flip needs a pair space".into()));
    }
    let links: Vec<(Node, Node)> =
        dom.links().iter().map(|((i, f), (j, g))| ((1 - i, *f), (1 - j, *g))).collect();
    let cod = Space::new(m, 2, &links)?;
    permute(dom, &[1, 0], &cod)
}

/// Columns of `xi` must vanish away from the anchor fiber: `ξ[w,u] = 0` unless
/// `u = f(w_a)`. Returns the worst offending entry.
pub fn anchor_defect(g: &Groupoid, block: &Space, anchor: Node, xi: &Mat) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, w) in block.tuples().iter().enumerate() {
        let u0 = g.fib(w[anchor.0], anchor.1);
        for u in 0..xi.ncols() {
            if u != u0 {
                worst = worst.max(xi[(i, u)].norm());
            }
        }
    }
    worst
}

/// `|ξ⟩` inserting the block `block` at coordinate `pos` of `big`.
///
/// `ξ ∈ L(ℌ, K_block)` must lie in the canonical span of `anchor`, and the
/// block must attach to the rest of `big` only through the anchor node;
/// removing it from `big` must leave exactly `small`.
pub fn ket(
    g: &Groupoid,
    small: &SpaceRef,
    big: &SpaceRef,
    pos: usize,
    block: &SpaceRef,
    anchor: Node,
    xi: &Mat,
) -> Result<Op> {
    let m = block.arity();
    if big.arity() != small.arity() + m || pos > small.arity() {
        return Err(Error::Flavor("ket: arities do not add up".into()));
    }
    if xi.shape() != (block.dim(), g.n_units()) {
        return Err(Error::Shape(format!("ket vector {:?}", xi.shape())));
    }
    let defect = anchor_defect(g, block, anchor, xi);
    let size = xi.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    if defect > 1e-10 * size {
        return Err(Error::Membership(format!(
            "ket vector leaves the canonical span of its factorization (defect {defect:.3e})"
        )));
    }
    check_ket_flavor(small, big, pos, block, anchor)?;
    let mut mat = Mat::zeros(big.dim(), small.dim());
    for (j, t) in small.tuples().iter().enumerate() {
        for (bi, w) in block.tuples().iter().enumerate() {
            let image: Vec<usize> =
                t[..pos].iter().chain(w.iter()).chain(t[pos..].iter()).copied().collect();
            if let Some(i) = big.index(&image) {
                mat[(i, j)] += xi[(bi, g.fib(w[anchor.0], anchor.1))];
            }
        }
    }
    Op::new(small.clone(), big.clone(), mat)
}

fn check_ket_flavor(small: &Space, big: &Space, pos: usize, block: &Space, anchor: Node) -> Result<()> {
    let m = block.arity();
    let in_block = |k: usize| k >= pos && k < pos + m;
    let anchor_big = (anchor.0 + pos, anchor.1);
    let mut rest = Vec::new();
    let mut inner = Vec::new();
    for class in big.classes() {
        let b: Vec<Node> = class.iter().filter(|(k, _)| in_block(*k)).map(|(k, f)| (k - pos, *f)).collect();
        let r: Vec<Node> = class
            .iter()
            .filter(|(k, _)| !in_block(*k))
            .map(|(k, f)| (if *k >= pos + m { k - m } else { *k }, *f))
            .collect();
        if !b.is_empty() && !r.is_empty() && !class.contains(&anchor_big) {
            return Err(Error::Flavor(format!(
                "block attaches to {big:?} away from its anchor"
            )));
        }
        if b.len() > 1 {
            inner.push(b);
        }
        if r.len() > 1 {
            rest.push(r);
        }
    }
    let rest = partition(small.arity(), &links_of(&rest));
    let inner = partition(m, &links_of(&inner));
    if rest != small.classes() || inner != block.classes() {
        return Err(Error::Flavor(format!(
            "removing the block from {big:?} does not leave {small:?}"
        )));
    }
    Ok(())
}

/// `[|ξ⟩ η]`: kets of `frame` inserted at `pos`, applied to the elements of `elems`.
#[allow(clippy::too_many_arguments)]
pub fn ket_span(
    g: &Groupoid,
    small: &SpaceRef,
    big: &SpaceRef,
    pos: usize,
    block: &SpaceRef,
    anchor: Node,
    frame: &[Mat],
    elems: &[Mat],
    tol: &Tolerance,
) -> Result<Subspace> {
    let mut gens = Vec::new();
    for xi in frame {
        let k = ket(g, small, big, pos, block, anchor, xi)?;
        for e in elems {
            gens.push(&k.mat * e);
        }
    }
    Subspace::span(big.dim(), g.n_units(), &gens, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::Haar;

    fn pair_weighted() -> Measure {
        let g = Groupoid::pair(2).unwrap();
        Measure::new(&g, Haar::counting(&g), vec![1.0, 2.0]).unwrap()
    }

    #[test]
    fn pair_space_counts() {
        let t = Measure::uniform(&Groupoid::cyclic(1).unwrap());
        assert_eq!(Space::pair(&t, Fib::S, Fib::R).dim(), 1);
        let z2 = Measure::uniform(&Groupoid::cyclic(2).unwrap());
        assert_eq!(Space::pair(&z2, Fib::S, Fib::R).dim(), 4);
        let p2 = pair_weighted();
        assert_eq!(Space::pair(&p2, Fib::R, Fib::R).dim(), 8);
    }

    #[test]
    fn weights_follow_nested_sums() {
        let m = pair_weighted();
        let g = m.groupoid();
        let sr = Space::pair(&m, Fib::S, Fib::R);
        for (i, t) in sr.tuples().iter().enumerate() {
            assert_eq!(sr.weight(i), m.mu(g.rng(t[0])));
        }
    }

    #[test]
    fn flavor_is_partition() {
        let m = pair_weighted();
        let a = Space::new(&m, 3, &[((0, Fib::S), (1, Fib::R)), ((1, Fib::R), (2, Fib::R))]).unwrap();
        let b = Space::new(&m, 3, &[((0, Fib::S), (2, Fib::R)), ((2, Fib::R), (1, Fib::R))]).unwrap();
        assert_eq!(*a, *b);
        let c3 = Space::new(&m, 3, &[((0, Fib::S), (1, Fib::R)), ((1, Fib::S), (2, Fib::R))]).unwrap();
        assert_ne!(*a, *c3);
    }

    #[test]
    fn flip_is_involutive_and_unitary() {
        let m = pair_weighted();
        let sr = Space::pair(&m, Fib::S, Fib::R);
        let s1 = flip(&m, &sr).unwrap();
        let s2 = flip(&m, &s1.cod).unwrap();
        assert!(s1.unitarity_residual() < 1e-12);
        let back = s2.mul(&s1).unwrap();
        assert!(crate::subspace::op_norm(&(back.mat - Mat::identity(8, 8))) < 1e-12);
        assert_eq!(*s2.cod, *sr);
    }

    #[test]
    fn mismatched_composition_rejected() {
        let m = pair_weighted();
        let sr = Space::pair(&m, Fib::S, Fib::R);
        let rr = Space::pair(&m, Fib::R, Fib::R);
        assert_eq!(sr.dim(), rr.dim());
        let a = Op::identity(&sr);
        let b = Op::identity(&rr);
        assert!(matches!(a.mul(&b), Err(Error::Flavor(_))));
    }

    #[test]
    fn ket_on_z2_inserts_coordinate() {
        let m = Measure::uniform(&Groupoid::cyclic(2).unwrap());
        let h = Space::single(&m);
        let rr = Space::pair(&m, Fib::R, Fib::R);
        let xi = crate::subspace::matrix_unit(2, 1, 0, 0);
        let k = ket(m.groupoid(), &h, &rr, 0, &h, (0, Fib::R), &xi).unwrap();
        for y in 0..2 {
            let col = k.mat.column(y);
            let i = rr.index(&[0, y]).unwrap();
            assert_eq!(col[i], c(1.0));
            assert_eq!(col.iter().filter(|z| z.norm() > 0.0).count(), 1);
        }
    }

    #[test]
    fn ket_rejects_wrong_anchor() {
        let m = pair_weighted();
        let h = Space::single(&m);
        let sr = Space::pair(&m, Fib::S, Fib::R);
        let xi = crate::subspace::matrix_unit(4, 2, 0, 0);
        // the first coordinate of an (s=r) pair must be an s-anchored vector
        assert!(matches!(
            ket(m.groupoid(), &h, &sr, 0, &h, (0, Fib::R), &xi),
            Err(Error::Flavor(_))
        ));
    }

    #[test]
    fn lift_of_identity_is_identity() {
        let m = pair_weighted();
        let h = Space::single(&m);
        let t = Space::new(&m, 3, &[((0, Fib::S), (1, Fib::R)), ((1, Fib::S), (2, Fib::R))]).unwrap();
        let l = lift(&Op::identity(&h), &[1], &t, &t).unwrap();
        assert!(crate::subspace::op_norm(&(l.mat - Mat::identity(t.dim(), t.dim()))) == 0.0);
    }
}
