//! Interior-point Moulin codes.
//!
//! With `V = F^(d-k)`, `W = F^k` and `U = V ⊕ W`, a file is a functional `φ`
//! on the graded space `⊕_{p+q=s-1} T^pV ⊗ U ⊗ Λ^qW` that satisfies the
//! parity checks below. Node `i` owns a vector `u_i ∈ U` and stores `φ` on
//! `⊕ T^pV ⊗ u_i ⊗ Λ^qW`, coordinates ordered by level, then tensor, then
//! subset.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{Field, Symbol};
use crate::matrix::Matrix;
use crate::multilinear::{binomial, coboundary_u_terms, cowedge_terms, ext_basis, tensor_basis, BasisTable, GradedSpace, SpaceSpec};

use super::{check_helpers, check_len, helper_pos, subsets, CodeParams, Codeword, Family, RegeneratingCode, RepairSession};

const SETUP_ATTEMPTS: usize = 16;

/// `⊕_{p+q=degree} T^pV ⊗ Λ^qW`: the per-node coordinate layout.
#[derive(Debug, Clone)]
struct PlainGraded {
    tensors: Vec<Vec<Vec<usize>>>,
    subsets: Vec<BasisTable>,
    offsets: Vec<usize>,
    dim: usize,
}

impl PlainGraded {
    fn new(spec: SpaceSpec, degree: usize) -> Self {
        let mut tensors = Vec::new();
        let mut subsets = Vec::new();
        let mut offsets = Vec::new();
        let mut dim = 0;
        for p in 0..=degree {
            let t = tensor_basis(spec.dim_v, p);
            let s = BasisTable::new(ext_basis(spec.dim_w, degree - p));
            offsets.push(dim);
            dim += t.len() * s.len();
            tensors.push(t);
            subsets.push(s);
        }
        PlainGraded { tensors, subsets, offsets, dim }
    }

    fn index(&self, tensor: &[usize], subset: &[usize], dim_v: usize) -> usize {
        let p = tensor.len();
        let ti = tensor.iter().fold(0, |acc, &i| acc * dim_v + i);
        let si = self.subsets[p].position(subset).expect("subset of the level");
        self.offsets[p] + ti * self.subsets[p].len() + si
    }

    /// `(tensor, subset)` pairs in coordinate order.
    fn elements(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let mut out = Vec::with_capacity(self.dim);
        for (p, ts) in self.tensors.iter().enumerate() {
            for t in ts {
                for s in self.subsets[p].items() {
                    out.push((t.clone(), s.clone()));
                }
            }
        }
        out
    }
}

/// `(l, β, M)` for a Moulin code.
pub fn moulin_params(k: usize, d: usize, s: usize) -> (usize, usize, usize) {
    let dv = d - k;
    let sum = |deg: usize, wdim: usize, scale: usize| -> usize {
        (0..=deg).map(|p| scale * dv.pow(p as u32) * binomial(wdim, deg - p)).sum()
    };
    let l = sum(s - 1, k, 1);
    let beta = if s >= 2 { sum(s - 2, k - 1, 1) } else { 0 };
    let m = sum(s - 1, k, d) - sum(s, k, 1);
    (l, beta, m)
}

#[derive(Debug, Clone)]
pub struct MoulinCode {
    field: Field,
    params: CodeParams,
    spec: SpaceSpec,
    us: Vec<Vec<Symbol>>,
    top: GradedSpace,
    node_layout: PlainGraded,
    low_layout: PlainGraded,
    parity: Matrix,
    /// Columns span the file space inside the functional space.
    basis: Matrix,
    generators: Vec<Matrix>,
}

impl MoulinCode {
    pub fn new(field: Field, n: usize, k: usize, d: usize, s: usize, seed: u64) -> Result<Self> {
        if !(s >= 2 && k + 1 >= s && d >= k && n > d) {
            return Err(Error::InvalidParameters(format!("need n-1 >= d >= k >= s-1 >= 1, got n={n} k={k} d={d} s={s}")));
        }
        let spec = SpaceSpec::new(d - k, k);
        let (l, beta, file_size) = moulin_params(k, d, s);
        let mut params = CodeParams::new(Family::Moulin, n, k, d, l, beta, file_size);
        params.s = Some(s);
        let top = GradedSpace::new(spec, s - 1);
        let parity = parity_matrix(field, spec, &top, s);
        let basis = parity.nullspace();
        if basis.cols() != file_size {
            return Err(Error::SetupFailed(format!("file space has dimension {}, expected {file_size}", basis.cols())));
        }
        let node_layout = PlainGraded::new(spec, s - 1);
        let low_layout = PlainGraded::new(spec, s - 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..SETUP_ATTEMPTS {
            let us: Vec<Vec<Symbol>> =
                (0..n).map(|_| (0..d).map(|_| rng.gen_range(1..field.modulus())).collect()).collect();
            let mut code = MoulinCode {
                field,
                params,
                spec,
                us,
                top: top.clone(),
                node_layout: node_layout.clone(),
                low_layout: low_layout.clone(),
                parity: parity.clone(),
                basis: basis.clone(),
                generators: Vec::new(),
            };
            code.generators = (0..n).map(|i| code.build_generator(i)).collect::<Result<_>>()?;
            if code.verify().is_ok() {
                return Ok(code);
            }
        }
        Err(Error::SetupFailed("no node vectors satisfied the spanning conditions".into()))
    }

    pub fn u(&self, i: usize) -> &[Symbol] {
        &self.us[i]
    }

    pub fn parity_matrix(&self) -> &Matrix {
        &self.parity
    }

    /// Dimension of the space of functionals satisfying every parity check.
    pub fn file_space_dim(&self) -> usize {
        self.basis.cols()
    }

    /// Any `d` node vectors span `U`, any `k` span `U/V`, and any `k` nodes
    /// determine the file.
    pub fn verify(&self) -> Result<()> {
        let CodeParams { n, k, d, .. } = self.params;
        let dv = self.spec.dim_v;
        for set in subsets(n, d) {
            let rows: Vec<Vec<Symbol>> = set.iter().map(|&i| self.us[i].clone()).collect();
            if Matrix::from_rows(self.field, &rows)?.rank() < d {
                return Err(Error::SetupFailed(format!("u vectors of {set:?} do not span U")));
            }
        }
        for set in subsets(n, k) {
            let rows: Vec<Vec<Symbol>> = set.iter().map(|&i| self.us[i][dv..].to_vec()).collect();
            if Matrix::from_rows(self.field, &rows)?.rank() < k {
                return Err(Error::SetupFailed(format!("u vectors of {set:?} do not span U/V")));
            }
            let parts: Vec<Matrix> = set.iter().map(|&i| self.generators[i].clone()).collect();
            if Matrix::vstack(self.field, &parts)?.rank() < self.params.file_size {
                return Err(Error::SetupFailed(format!("nodes {set:?} do not determine the file")));
            }
        }
        Ok(())
    }

    /// The functional `φ` for a file given in file-space coordinates.
    pub fn functional(&self, file: &[Symbol]) -> Result<Vec<Symbol>> {
        check_len("file", file.len(), self.params.file_size)?;
        self.basis.mul_vec(file)
    }

    /// Node columns for an explicit functional, rejecting parity violations.
    pub fn encode_functional(&self, phi: &[Symbol]) -> Result<Codeword> {
        check_len("functional", phi.len(), self.top.dim())?;
        if self.parity.mul_vec(phi)?.iter().any(|&v| v != 0) {
            return Err(Error::ParityViolation);
        }
        let columns = (0..self.params.n).map(|i| self.restriction(i, phi)).collect();
        Ok(Codeword { columns })
    }

    fn restriction(&self, i: usize, phi: &[Symbol]) -> Vec<Symbol> {
        let f = self.field;
        let u = &self.us[i];
        self.node_layout
            .elements()
            .iter()
            .map(|(t, w)| {
                let p = t.len();
                (0..self.spec.dim_u()).fold(0, |acc, c| f.mul_add(u[c], phi[self.top.coord(p, t, c, w)], acc))
            })
            .collect()
    }

    fn build_generator(&self, i: usize) -> Result<Matrix> {
        let mut restrict = Matrix::zeros(self.field, self.params.l, self.top.dim());
        for (row, (t, w)) in self.node_layout.elements().iter().enumerate() {
            for c in 0..self.spec.dim_u() {
                restrict.set(row, self.top.coord(t.len(), t, c, w), self.us[i][c]);
            }
        }
        restrict.mul(&self.basis)
    }

    /// `φ(∂_u(ν ⊗ u_h ⊗ ω))` as a linear map of node `h`'s stored values, over
    /// the degree `s-2` layout. Independent of `h`, since `∂_u` never touches
    /// the middle factor.
    fn share_map(&self, u: &[Symbol]) -> Matrix {
        let mut e = Matrix::zeros(self.field, self.low_layout.dim, self.params.l);
        for (row, (t, w)) in self.low_layout.elements().iter().enumerate() {
            for (coef, tt, _, ww) in coboundary_u_terms(self.field, self.spec, u, t, 0, w) {
                let col = self.node_layout.index(&tt, &ww, self.spec.dim_v);
                e.add_to(row, col, coef);
            }
        }
        e
    }

    /// The degree `s-2` element `∇(ν ⊗ ω) - ν ⊗ ω` paired with stored
    /// coordinate `(ν, ω)`: sparse `(tensor, U coordinate, subset, coefficient)`.
    fn repair_element(&self, tensor: &[usize], subset: &[usize]) -> Vec<(Vec<usize>, usize, Vec<usize>, Symbol)> {
        let f = self.field;
        let dv = self.spec.dim_v;
        let mut out = Vec::new();
        for (neg, w, rest) in cowedge_terms(subset) {
            out.push((tensor.to_vec(), dv + w, rest, f.signed(1, neg)));
        }
        if let Some((&last, head)) = tensor.split_last() {
            out.push((head.to_vec(), last, subset.to_vec(), f.neg(1)));
        }
        out
    }

    /// Evaluates both sides of the repair identity
    /// `φ(∂_{u_f}(∇(ν⊗ω))) - φ(∂_{u_f}(ν⊗ω)) = (-1)^p φ(ν ⊗ u_f ⊗ ω)`
    /// for every stored coordinate of `failed`, directly on `φ`.
    pub fn repair_identity_sides(&self, failed: usize, phi: &[Symbol]) -> Result<Vec<(Symbol, Symbol)>> {
        check_len("functional", phi.len(), self.top.dim())?;
        let f = self.field;
        let uf = &self.us[failed];
        let stored = self.restriction(failed, phi);
        let mut out = Vec::with_capacity(self.params.l);
        for (idx, (t, w)) in self.node_layout.elements().iter().enumerate() {
            let mut lhs = 0;
            for (tt, c, ww, coef) in self.repair_element(t, w) {
                for (c2, t2, u2, w2) in coboundary_u_terms(f, self.spec, uf, &tt, c, &ww) {
                    let v = phi[self.top.coord(t2.len(), &t2, u2, &w2)];
                    lhs = f.mul_add(f.mul(coef, c2), v, lhs);
                }
            }
            out.push((lhs, f.signed(stored[idx], t.len() % 2 == 1)));
        }
        Ok(out)
    }
}

/// Rows of the parity checks on `⊕_{p+q=s-1} T^pV ⊗ U ⊗ Λ^qW`:
///
/// * for `x ∈ T^pV ⊗ Λ^(q+1)W`, `p ≥ 1`: `φ(x)` with the last `V` factor read
///   as the `U` factor equals `φ(∇x)`,
/// * for `ω ∈ Λ^sW`: `φ(∇ω) = 0`,
/// * for `ν ∈ T^sV`: `φ(ν) = 0`, again with the last factor in `U`.
fn parity_matrix(field: Field, spec: SpaceSpec, top: &GradedSpace, s: usize) -> Matrix {
    let mut rows: Vec<Vec<Symbol>> = Vec::new();
    let dv = spec.dim_v;
    for p in 0..=s {
        let q1 = s - p;
        for nu in tensor_basis(dv, p) {
            for omega in ext_basis(spec.dim_w, q1) {
                let mut row = vec![0; top.dim()];
                if let Some((&last, head)) = nu.split_last() {
                    row[top.coord(p - 1, head, last, &omega)] = 1;
                }
                if q1 > 0 {
                    for (neg, w, rest) in cowedge_terms(&omega) {
                        let c = top.coord(p, &nu, dv + w, &rest);
                        row[c] = field.sub(row[c], field.signed(1, neg));
                    }
                }
                rows.push(row);
            }
        }
    }
    let mut m = Matrix::zeros(field, rows.len(), top.dim());
    for (r, row) in rows.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            m.set(r, c, v);
        }
    }
    m
}

impl RegeneratingCode for MoulinCode {
    fn params(&self) -> CodeParams {
        self.params
    }

    fn field(&self) -> Field {
        self.field
    }

    fn encode(&self, file: &[Symbol]) -> Result<Codeword> {
        check_len("file", file.len(), self.params.file_size)?;
        let columns = self.generators.iter().map(|g| g.mul_vec(file)).collect::<Result<Vec<_>>>()?;
        Ok(Codeword { columns })
    }

    fn node_generator(&self, i: usize) -> Result<Matrix> {
        Ok(self.generators[i].clone())
    }

    fn repair_session(&self, failed: usize, helpers: &[usize]) -> Result<Box<dyn RepairSession + '_>> {
        check_helpers(self.params.n, self.params.d, failed, helpers)?;
        let f = self.field;
        let e = self.share_map(&self.us[failed]);
        let (expand, compress) = e.rank_factorize();
        let u_rows: Vec<Vec<Symbol>> = helpers.iter().map(|&h| self.us[h].clone()).collect();
        // column h of the transpose is u_h, so its inverse expresses U in the helper vectors
        let u_inv = Matrix::from_rows(f, &u_rows)?
            .transpose()
            .inverse()
            .map_err(|_| Error::RepairFailed("helper vectors do not span U".into()))?;
        let low_dim = self.low_layout.dim;
        let mut expansion = vec![Matrix::zeros(f, self.params.l, low_dim); helpers.len()];
        for (target, (t, w)) in self.node_layout.elements().iter().enumerate() {
            let negate = t.len() % 2 == 1;
            for (tt, c, ww, coef) in self.repair_element(t, w) {
                let col = self.low_layout.index(&tt, &ww, self.spec.dim_v);
                for (hi, m) in expansion.iter_mut().enumerate() {
                    let a = f.mul(coef, u_inv.get(hi, c));
                    m.add_to(target, col, f.signed(a, negate));
                }
            }
        }
        let lifts = expansion.iter().map(|m| m.mul(&expand)).collect::<Result<Vec<_>>>()?;
        Ok(Box::new(MoulinSession { code: self, failed, helpers: helpers.to_vec(), compress, lifts }))
    }
}

struct MoulinSession<'a> {
    code: &'a MoulinCode,
    failed: usize,
    helpers: Vec<usize>,
    /// `β × l`: stored values to share.
    compress: Matrix,
    /// Per helper, `l × β`: share to contribution.
    lifts: Vec<Matrix>,
}

impl MoulinSession<'_> {
    pub fn share_len(&self) -> usize {
        self.compress.rows()
    }
}

impl RepairSession for MoulinSession<'_> {
    fn failed(&self) -> usize {
        self.failed
    }

    fn helpers(&self) -> &[usize] {
        &self.helpers
    }

    fn helper_share(&self, h: usize, content: &[Symbol]) -> Result<Vec<Symbol>> {
        helper_pos(&self.helpers, h)?;
        check_len("content", content.len(), self.code.params.l)?;
        self.compress.mul_vec(content)
    }

    fn lift(&self, h: usize, share: &[Symbol]) -> Result<Vec<Symbol>> {
        let pos = helper_pos(&self.helpers, h)?;
        check_len("share", share.len(), self.share_len())?;
        self.lifts[pos].mul_vec(share)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> MoulinCode {
        MoulinCode::new(Field::default(), 7, 5, 6, 4, 1).unwrap()
    }

    #[test]
    fn parameter_formulas() {
        assert_eq!(moulin_params(5, 6, 4), (26, 11, 125));
        // s = 2 is the minimum-bandwidth point, s = k + 1 the minimum-storage one
        assert_eq!(moulin_params(4, 6, 2), (6, 1, 4 * 6 - 6));
        assert_eq!(moulin_params(3, 4, 4), (8, 4, 24));
    }

    #[test]
    fn example_instance_dimensions() {
        let code = example();
        assert_eq!(code.file_space_dim(), 125);
        let p = code.params();
        assert_eq!((p.l, p.beta, p.file_size), (26, 11, 125));
        assert_eq!(code.node_layout.dim, 26);
        assert_eq!(code.low_layout.dim, 16);
    }

    #[test]
    fn file_space_dimension_matches_formula() {
        for k in 1..=5 {
            for d in k..=6 {
                for s in 2..=(k + 1).min(4) {
                    let spec = SpaceSpec::new(d - k, k);
                    let top = GradedSpace::new(spec, s - 1);
                    let dim = parity_matrix(Field::default(), spec, &top, s).nullspace().cols();
                    assert_eq!(dim, moulin_params(k, d, s).2, "k={k} d={d} s={s}");
                }
            }
        }
    }

    #[test]
    fn repair_identity_holds() {
        let code = example();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for failed in 0..7 {
            let phi = code.functional(&code.random_file(&mut rng)).unwrap();
            for (lhs, rhs) in code.repair_identity_sides(failed, &phi).unwrap() {
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn share_rank_is_beta_and_repair_is_exact() {
        let code = example();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for trial in 0..10 {
            let file = code.random_file(&mut rng);
            let cw = code.encode(&file).unwrap();
            let failed = trial % 7;
            let helpers: Vec<usize> = (0..7).filter(|&i| i != failed).collect();
            let session = code.repair_session(failed, &helpers).unwrap();
            let mut acc = vec![0; 26];
            for &h in &helpers {
                let share = session.helper_share(h, cw.column(h)).unwrap();
                assert_eq!(share.len(), 11);
                acc = code.field().add_vec(&acc, &session.lift(h, &share).unwrap());
            }
            assert_eq!(acc, cw.column(failed));
        }
    }

    #[test]
    fn encode_rejects_parity_violations() {
        let code = example();
        let mut phi = vec![0; code.top.dim()];
        assert!(code.encode_functional(&phi).unwrap().columns.iter().flatten().all(|&v| v == 0));
        phi[0] = 1;
        // this coordinate appears in a check with no other term to cancel it
        assert!(matches!(code.encode_functional(&phi), Err(Error::ParityViolation)));
    }
}
