//! Coordinate models of tensor, symmetric and exterior powers, and the
//! co-wedge and coboundary operators on `T^pV ⊗ U ⊗ Λ^qW` with `U = V ⊕ W`.
//!
//! Every operator is materialized as an explicit matrix acting on column
//! vectors: column `j` is the image of the `j`-th domain basis vector. Basis
//! orders are fixed:
//!
//! * `T^p F^n`: index tuples in lexicographic order (mixed radix `n`),
//! * `S^p F^n`: nondecreasing tuples, lexicographic,
//! * `Λ^q F^n`: strictly increasing tuples, lexicographic,
//! * `T^pV ⊗ U ⊗ Λ^qW`: `(tensor, u, subset)` with the subset varying fastest,
//!   and `U` coordinates split as `[V-block | W-block]`,
//! * graded sums `⊕_{p+q=s}` concatenate their levels in order of increasing `p`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::field::{Field, Symbol};
use crate::matrix::Matrix;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All `p`-tuples over `[0, n)` in lexicographic order.
pub fn tensor_basis(n: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..p {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

/// Nondecreasing `p`-tuples over `[0, n)`; `C(n+p-1, p)` of them.
pub fn sym_basis(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, p: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, p, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, p, 0, &mut Vec::new(), &mut out);
    out
}

/// Strictly increasing `q`-tuples over `[0, n)`; empty when `q > n`.
pub fn ext_basis(n: usize, q: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, q: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == q {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, q, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, q, 0, &mut Vec::new(), &mut out);
    out
}

/// An enumerated basis with reverse lookup.
#[derive(Debug, Clone)]
pub struct BasisTable {
    items: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl BasisTable {
    pub fn new(items: Vec<Vec<usize>>) -> Self {
        let index = items.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        BasisTable { items, index }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Vec<usize>] {
        &self.items
    }

    pub fn get(&self, i: usize) -> &[usize] {
        &self.items[i]
    }

    pub fn position(&self, item: &[usize]) -> Option<usize> {
        self.index.get(item).copied()
    }
}

/// `ω ∧ e_j` for a sorted basis subset `ω`: `None` when `j ∈ ω`, otherwise the
/// sorted subset and whether the reordering sign is negative.
pub fn wedge_basis(omega: &[usize], j: usize) -> Option<(bool, Vec<usize>)> {
    if omega.contains(&j) {
        return None;
    }
    let after = omega.iter().filter(|&&x| x > j).count();
    let mut out = omega.to_vec();
    let pos = out.len() - after;
    out.insert(pos, j);
    Some((after % 2 == 1, out))
}

/// Matrix of the projection `T^p F^n -> S^p F^n` sending each index tuple to
/// its sorted copy.
pub fn symmetrize(field: Field, n: usize, p: usize) -> Matrix {
    let tensors = tensor_basis(n, p);
    let sym = BasisTable::new(sym_basis(n, p));
    let mut m = Matrix::zeros(field, sym.len(), tensors.len());
    for (c, t) in tensors.iter().enumerate() {
        let mut sorted = t.clone();
        sorted.sort_unstable();
        m.add_to(sym.position(&sorted).expect("sorted tuple is a multiset"), c, 1);
    }
    m
}

/// Dimensions of `V = F^(d-k)` and `W = F^k`; `U = V ⊕ W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub dim_v: usize,
    pub dim_w: usize,
}

impl SpaceSpec {
    pub fn new(dim_v: usize, dim_w: usize) -> Self {
        SpaceSpec { dim_v, dim_w }
    }

    pub fn dim_u(&self) -> usize {
        self.dim_v + self.dim_w
    }
}

/// `T^pV ⊗ Λ^qW`, with no `U` factor.
#[derive(Debug, Clone)]
pub struct PlainSpace {
    pub p: usize,
    pub q: usize,
    pub tensors: Vec<Vec<usize>>,
    pub subsets: BasisTable,
}

impl PlainSpace {
    pub fn new(spec: SpaceSpec, p: usize, q: usize) -> Self {
        PlainSpace {
            p,
            q,
            tensors: tensor_basis(spec.dim_v, p),
            subsets: BasisTable::new(ext_basis(spec.dim_w, q)),
        }
    }

    pub fn dim(&self) -> usize {
        self.tensors.len() * self.subsets.len()
    }

    pub fn index(&self, tensor: usize, subset: usize) -> usize {
        tensor * self.subsets.len() + subset
    }

    /// `(tensor tuple, subset)` for every basis vector, in coordinate order.
    pub fn elements(&self) -> impl Iterator<Item = (&[usize], &[usize])> {
        self.tensors
            .iter()
            .flat_map(move |t| self.subsets.items().iter().map(move |s| (t.as_slice(), s.as_slice())))
    }
}

/// One level `T^pV ⊗ U ⊗ Λ^qW` of the complex.
#[derive(Debug, Clone)]
pub struct Level {
    pub spec: SpaceSpec,
    pub p: usize,
    pub q: usize,
    pub tensors: Vec<Vec<usize>>,
    pub subsets: BasisTable,
}

impl Level {
    pub fn new(spec: SpaceSpec, p: usize, q: usize) -> Self {
        Level {
            spec,
            p,
            q,
            tensors: tensor_basis(spec.dim_v, p),
            subsets: BasisTable::new(ext_basis(spec.dim_w, q)),
        }
    }

    pub fn dim(&self) -> usize {
        self.tensors.len() * self.spec.dim_u() * self.subsets.len()
    }

    pub fn index(&self, tensor: usize, u: usize, subset: usize) -> usize {
        (tensor * self.spec.dim_u() + u) * self.subsets.len() + subset
    }

    /// Mixed-radix position of a `V`-index tuple.
    pub fn tensor_index(&self, t: &[usize]) -> usize {
        t.iter().fold(0, |acc, &i| acc * self.spec.dim_v + i)
    }

    /// Decomposes a coordinate into `(tensor, u, subset)` positions.
    pub fn split(&self, idx: usize) -> (usize, usize, usize) {
        let ns = self.subsets.len();
        let s = idx % ns;
        let rest = idx / ns;
        (rest / self.spec.dim_u(), rest % self.spec.dim_u(), s)
    }
}

/// `⊕_{p+q=degree} T^pV ⊗ U ⊗ Λ^qW`, levels concatenated by increasing `p`.
#[derive(Debug, Clone)]
pub struct GradedSpace {
    pub spec: SpaceSpec,
    pub degree: usize,
    pub levels: Vec<Level>,
    offsets: Vec<usize>,
}

impl GradedSpace {
    pub fn new(spec: SpaceSpec, degree: usize) -> Self {
        let levels: Vec<Level> = (0..=degree).map(|p| Level::new(spec, p, degree - p)).collect();
        let mut offsets = Vec::with_capacity(levels.len());
        let mut acc = 0;
        for l in &levels {
            offsets.push(acc);
            acc += l.dim();
        }
        GradedSpace { spec, degree, levels, offsets }
    }

    pub fn dim(&self) -> usize {
        self.levels.iter().map(Level::dim).sum()
    }

    pub fn level(&self, p: usize) -> &Level {
        &self.levels[p]
    }

    pub fn offset(&self, p: usize) -> usize {
        self.offsets[p]
    }

    /// Global coordinate of `(tensor tuple, u, subset)` at level `p`.
    pub fn coord(&self, p: usize, tensor: &[usize], u: usize, subset: &[usize]) -> usize {
        let level = &self.levels[p];
        let s = level.subsets.position(subset).expect("subset belongs to the level");
        self.offsets[p] + level.index(level.tensor_index(tensor), u, s)
    }
}

/// Sparse image of a basis vector: `(coefficient, tensor tuple, u, subset)`.
type Terms = Vec<(Symbol, Vec<usize>, usize, Vec<usize>)>;

/// Co-wedge on a basis subset, by the recursion
/// `∇(ω ∧ w1) = ∇(ω) ∧ w1 + (-1)^q w1 ⊗ ω` with `∇(w1) = w1`.
/// Returns `(sign negative, w index, remaining subset)` terms.
pub fn cowedge_terms(subset: &[usize]) -> Vec<(bool, usize, Vec<usize>)> {
    match subset.len() {
        0 => Vec::new(),
        1 => vec![(false, subset[0], Vec::new())],
        len => {
            let q = len - 1;
            let (omega, w1) = (&subset[..q], subset[q]);
            let mut out = Vec::new();
            for (neg, w, rest) in cowedge_terms(omega) {
                if let Some((flip, wedged)) = wedge_basis(&rest, w1) {
                    out.push((neg ^ flip, w, wedged));
                }
            }
            out.push((q % 2 == 1, w1, omega.to_vec()));
            out
        }
    }
}

/// Matrix of `∇ : T^pV ⊗ Λ^{q+1}W -> T^pV ⊗ U ⊗ Λ^qW`; the image lies in the
/// W-block of the middle factor.
pub fn cowedge(field: Field, p: usize, q: usize, spec: SpaceSpec) -> Matrix {
    let domain = PlainSpace::new(spec, p, q + 1);
    let target = Level::new(spec, p, q);
    let mut m = Matrix::zeros(field, target.dim(), domain.dim());
    for (col, (t, s)) in domain.elements().enumerate() {
        let ti = target.tensor_index(t);
        for (neg, w, rest) in cowedge_terms(s) {
            let si = target.subsets.position(&rest).expect("subset of the right size");
            let row = target.index(ti, spec.dim_v + w, si);
            m.add_to(row, col, field.signed(1, neg));
        }
    }
    m
}

fn assemble(field: Field, rows: usize, cols: usize, images: impl Iterator<Item = (usize, Vec<(usize, Symbol)>)>) -> Matrix {
    let mut m = Matrix::zeros(field, rows, cols);
    for (col, entries) in images {
        for (row, v) in entries {
            m.add_to(row, col, v);
        }
    }
    m
}

fn v_terms(field: Field, v: &[Symbol], tensor: &[usize], u: usize, subset: &[usize]) -> Terms {
    let p = tensor.len();
    let mut out = Terms::new();
    for pos in 0..=p {
        let neg = pos % 2 == 1;
        for (a, &coef) in v.iter().enumerate() {
            if coef == 0 {
                continue;
            }
            let mut t = tensor.to_vec();
            t.insert(pos, a);
            out.push((field.signed(coef, neg), t, u, subset.to_vec()));
        }
    }
    out
}

fn w_terms(field: Field, w: &[Symbol], tensor: &[usize], u: usize, subset: &[usize]) -> Terms {
    let sign = (tensor.len() + subset.len()) % 2 == 1;
    let mut out = Terms::new();
    for (b, &coef) in w.iter().enumerate() {
        if coef == 0 {
            continue;
        }
        if let Some((flip, wedged)) = wedge_basis(subset, b) {
            out.push((field.signed(coef, sign ^ flip), tensor.to_vec(), u, wedged));
        }
    }
    out
}

fn level_map(field: Field, from: &Level, to: &Level, f: impl Fn(&[usize], usize, &[usize]) -> Terms) -> Matrix {
    let images = (0..from.dim()).map(|col| {
        let (t, u, s) = from.split(col);
        let terms = f(&from.tensors[t], u, from.subsets.get(s));
        let entries = terms
            .into_iter()
            .map(|(c, tt, uu, ss)| {
                let si = to.subsets.position(&ss).expect("target subset");
                (to.index(to.tensor_index(&tt), uu, si), c)
            })
            .collect();
        (col, entries)
    });
    assemble(field, to.dim(), from.dim(), images)
}

/// `∂^V_v : T^pV ⊗ U ⊗ Λ^qW -> T^{p+1}V ⊗ U ⊗ Λ^qW`, unrolled from
/// `ν ⊗ u ⊗ ω ↦ ∂(ν) ⊗ u ⊗ ω + (-1)^p ν ⊗ v ⊗ u ⊗ ω`: `v` is inserted before
/// every factor of `ν ⊗ u` with alternating signs.
pub fn coboundary_v(field: Field, spec: SpaceSpec, v: &[Symbol], p: usize, q: usize) -> Matrix {
    assert_eq!(v.len(), spec.dim_v, "v must live in V");
    let from = Level::new(spec, p, q);
    let to = Level::new(spec, p + 1, q);
    level_map(field, &from, &to, |t, u, s| v_terms(field, v, t, u, s))
}

/// `∂^V_v` on the bare `Λ^qW` term of the complex, which is identically zero.
pub fn coboundary_v_bare(field: Field, spec: SpaceSpec, q: usize) -> Matrix {
    Matrix::zeros(field, Level::new(spec, 0, q).dim(), binomial(spec.dim_w, q))
}

/// `∂^W_w : T^pV ⊗ U ⊗ Λ^qW -> T^pV ⊗ U ⊗ Λ^{q+1}W`,
/// `ν ⊗ u ⊗ ω ↦ (-1)^{p+q} ν ⊗ u ⊗ ω ∧ w`.
pub fn coboundary_w(field: Field, spec: SpaceSpec, w: &[Symbol], p: usize, q: usize) -> Matrix {
    assert_eq!(w.len(), spec.dim_w, "w must live in W");
    let from = Level::new(spec, p, q);
    let to = Level::new(spec, p, q + 1);
    level_map(field, &from, &to, |t, u, s| w_terms(field, w, t, u, s))
}

/// `∂^U_u = ∂^V_v + ∂^W_w` from level `(p, q)` into the graded space of
/// degree `p + q + 1`.
pub fn coboundary_u(field: Field, spec: SpaceSpec, u: &[Symbol], p: usize, q: usize) -> Matrix {
    let from = Level::new(spec, p, q);
    let target = GradedSpace::new(spec, p + q + 1);
    let images = (0..from.dim()).map(|col| {
        let (t, uu, s) = from.split(col);
        let entries = coboundary_u_terms(field, spec, u, &from.tensors[t], uu, from.subsets.get(s))
            .into_iter()
            .map(|(c, tt, ui, ss)| (target.coord(tt.len(), &tt, ui, &ss), c))
            .collect();
        (col, entries)
    });
    assemble(field, target.dim(), from.dim(), images)
}

/// `∂^U_u` on the whole graded space of the given degree.
pub fn coboundary_u_graded(field: Field, spec: SpaceSpec, u: &[Symbol], degree: usize) -> Matrix {
    let blocks: Vec<Matrix> = (0..=degree).map(|p| coboundary_u(field, spec, u, p, degree - p)).collect();
    Matrix::hstack(field, &blocks).expect("all blocks share the target space")
}

/// Sparse image of one basis vector under `∂^U_u`.
pub fn coboundary_u_terms(
    field: Field,
    spec: SpaceSpec,
    u: &[Symbol],
    tensor: &[usize],
    u_index: usize,
    subset: &[usize],
) -> Terms {
    assert_eq!(u.len(), spec.dim_u(), "u must live in U");
    let (v, w) = u.split_at(spec.dim_v);
    let mut terms = v_terms(field, v, tensor, u_index, subset);
    terms.extend(w_terms(field, w, tensor, u_index, subset));
    terms
}
