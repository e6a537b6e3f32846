//! Test-side oracles. Everything here is built from the multiplication table
//! alone, with real 0/1 matrices and nalgebra's real SVD, and shares no code
//! with the library's span machinery.
#![allow(dead_code)]

use std::collections::HashMap;

use groupoid_kac::groupoid::Groupoid;
use nalgebra::DMatrix;

pub type R = DMatrix<f64>;

pub fn rank(mats: &[R]) -> usize {
    if mats.is_empty() {
        return 0;
    }
    let len = mats[0].len();
    let mut g = R::zeros(len, mats.len());
    for (j, m) in mats.iter().enumerate() {
        g.column_mut(j).copy_from_slice(m.as_slice());
    }
    let sv = g.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|s| **s > 1e-9 * smax.max(1.0)).count()
}

/// An indexed list of tuples.
pub struct Tuples {
    pub list: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl Tuples {
    fn new(list: Vec<Vec<usize>>) -> Tuples {
        let index = list.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Tuples { list, index }
    }
    pub fn len(&self) -> usize {
        self.list.len()
    }
    pub fn at(&self, t: &[usize]) -> Option<usize> {
        self.index.get(t).copied()
    }
}

/// The groupoid picture with counting Haar weights.
pub struct Oracle<'a> {
    pub g: &'a Groupoid,
    pub n: usize,
    /// `(x, z)` with `s(x) = r(z)`.
    pub dom: Tuples,
    /// `(x, y)` with `r(x) = r(y)`.
    pub cod: Tuples,
}

impl<'a> Oracle<'a> {
    pub fn new(g: &'a Groupoid) -> Oracle<'a> {
        let n = g.n_arrows();
        let mut dom = Vec::new();
        let mut cod = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if g.src(x) == g.rng(y) {
                    dom.push(vec![x, y]);
                }
                if g.rng(x) == g.rng(y) {
                    cod.push(vec![x, y]);
                }
            }
        }
        Oracle { g, n, dom: Tuples::new(dom), cod: Tuples::new(cod) }
    }

    /// `V e_(x,z) = e_(x,xz)`.
    pub fn v(&self) -> R {
        let mut v = R::zeros(self.cod.len(), self.dom.len());
        for (j, t) in self.dom.list.iter().enumerate() {
            let xz = self.g.compose(t[0], t[1]).expect("composable");
            v[(self.cod.at(&[t[0], xz]).expect("same range"), j)] = 1.0;
        }
        v
    }

    /// `|δ_w⟩` inserted at `pos` of a pair space.
    fn ket(&self, pairs: &Tuples, pos: usize, w: usize) -> R {
        let mut k = R::zeros(pairs.len(), self.n);
        for x in 0..self.n {
            let t = if pos == 0 { [w, x] } else { [x, w] };
            if let Some(i) = pairs.at(&t) {
                k[(i, x)] = 1.0;
            }
        }
        k
    }

    /// `[⟨β|₂V|α⟩₂]` from its definition.
    pub fn hat_leg(&self) -> Vec<R> {
        let v = self.v();
        let mut out = Vec::new();
        for y in 0..self.n {
            for z in 0..self.n {
                out.push(self.ket(&self.cod, 1, y).transpose() * &v * self.ket(&self.dom, 1, z));
            }
        }
        out
    }

    /// `[⟨α|₁V|β̂⟩₁]` from its definition.
    pub fn plain_leg(&self) -> Vec<R> {
        let v = self.v();
        let mut out = Vec::new();
        for y in 0..self.n {
            for z in 0..self.n {
                out.push(self.ket(&self.cod, 0, y).transpose() * &v * self.ket(&self.dom, 0, z));
            }
        }
        out
    }

    /// `c ⊗ 1` on the domain pairs, `c` acting on the first coordinate.
    fn first(&self, c: &R) -> R {
        let mut out = R::zeros(self.dom.len(), self.dom.len());
        for (j, t) in self.dom.list.iter().enumerate() {
            for w in 0..self.n {
                if c[(w, t[0])] != 0.0 {
                    let i = self.dom.at(&[w, t[1]]).expect("c keeps the source");
                    out[(i, j)] = c[(w, t[0])];
                }
            }
        }
        out
    }

    /// `1 ⊗ d` on the target pairs, `d` acting on the second coordinate.
    fn second(&self, d: &R) -> R {
        let mut out = R::zeros(self.cod.len(), self.cod.len());
        for (j, t) in self.cod.list.iter().enumerate() {
            for w in 0..self.n {
                if d[(w, t[1])] != 0.0 {
                    let i = self.cod.at(&[t[0], w]).expect("d keeps the range");
                    out[(i, j)] = d[(w, t[1])];
                }
            }
        }
        out
    }

    /// `dim [δ(A)(1⊗Â)]` for `δ(c) = V(c⊗1)V*`.
    pub fn crossed_product_dim(&self) -> usize {
        let v = self.v();
        let mut gens = Vec::new();
        for c in self.plain_leg() {
            let dc = &v * self.first(&c) * v.transpose();
            for d in self.hat_leg() {
                gens.push(&dc * self.second(&d));
            }
        }
        rank(&gens)
    }

    /// `dim [|β⟩₂A⟨β|₂]` on the target pairs.
    pub fn compact_dim(&self) -> usize {
        let mut gens = Vec::new();
        let kets: Vec<R> = (0..self.n).map(|w| self.ket(&self.cod, 1, w)).collect();
        for c in self.plain_leg() {
            for k1 in &kets {
                for k2 in &kets {
                    gens.push(k1 * &c * k2.transpose());
                }
            }
        }
        rank(&gens)
    }
}
