//! Generalized product-matrix MSR codes.
//!
//! With `X = F^t` and `Y = F^(k-t+1)`, the file is a linear functional `φ` on
//! `X ⊗ S^tY`, given by its values on the monomial basis `e_a ⊗ y^m` (`a`
//! outer, multisets `m` in lexicographic order). Node `i` stores `φ` on
//! `x_i ⊗ y_i ⊙ S^(t-1)Y`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{Field, Symbol};
use crate::matrix::Matrix;
use crate::multilinear::{binomial, sym_basis, BasisTable};

use super::{check_helpers, check_len, default_points, helper_pos, subsets, CodeParams, Codeword, Family, RegeneratingCode, RepairSession};

/// How the node vectors were chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorFamily {
    /// `x_i = (1, a^(k-t+1), a^(2(k-t+1)), ...)`, `y_i = (1, a, ..., a^(k-t))`;
    /// at `t = 2` this is exactly the product-matrix MSR layout.
    Stride,
    /// `x_i = (1, a, ..., a^(t-1))` with the same `y_i`.
    Vandermonde,
    /// Seeded uniform vectors, after the structured choices failed.
    Random,
}

#[derive(Debug, Clone)]
pub struct GpmCode {
    field: Field,
    params: CodeParams,
    family: VectorFamily,
    xs: Vec<Vec<Symbol>>,
    ys: Vec<Vec<Symbol>>,
    /// Bases of `S^(t-2)Y`, `S^(t-1)Y`, `S^tY`.
    sym_lo: BasisTable,
    sym_mid: BasisTable,
    sym_top: BasisTable,
}

const RANDOM_ATTEMPTS: usize = 32;

impl GpmCode {
    pub fn new(field: Field, n: usize, k: usize, t: usize, seed: u64) -> Result<Self> {
        if t < 2 || t > k || k + 1 > n {
            return Err(Error::InvalidParameters(format!("need 2 <= t <= k <= n-1, got n={n} k={k} t={t}")));
        }
        if (k - 1) * t % (t - 1) != 0 {
            return Err(Error::InvalidParameters(format!("(k-1)t = {} is not divisible by t-1 = {}", (k - 1) * t, t - 1)));
        }
        let d = (k - 1) * t / (t - 1);
        if d + 1 > n {
            return Err(Error::InvalidParameters(format!("n = {n} is too small for d = {d}")));
        }
        let dim_y = k - t + 1;
        let mut params = CodeParams::new(
            Family::Gpm,
            n,
            k,
            d,
            binomial(k - 1, t - 1),
            binomial(k - 2, t - 2),
            t * binomial(k, t),
        );
        params.t = Some(t);
        let points = default_points(field, n)?;
        let ys: Vec<Vec<Symbol>> = points.iter().map(|&a| powers(field, a, 1, dim_y)).collect();
        let stride = points.iter().map(|&a| powers(field, a, dim_y as u64, t)).collect();
        let vander = points.iter().map(|&a| powers(field, a, 1, t)).collect();
        let build = |family, xs, ys| GpmCode {
            field,
            params,
            family,
            xs,
            ys,
            sym_lo: BasisTable::new(sym_basis(dim_y, t - 2)),
            sym_mid: BasisTable::new(sym_basis(dim_y, t - 1)),
            sym_top: BasisTable::new(sym_basis(dim_y, t)),
        };
        let structured = [build(VectorFamily::Stride, stride, ys.clone()), build(VectorFamily::Vandermonde, vander, ys)];
        for code in structured {
            if code.verify().is_ok() {
                return Ok(code);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = field.modulus();
        for _ in 0..RANDOM_ATTEMPTS {
            let mut draw = |len| (0..n).map(|_| (0..len).map(|_| rng.gen_range(0..p)).collect()).collect::<Vec<Vec<Symbol>>>();
            let xs = draw(t);
            let ys = draw(dim_y);
            let code = build(VectorFamily::Random, xs, ys);
            if code.verify().is_ok() {
                return Ok(code);
            }
        }
        Err(Error::SetupFailed("no vector family satisfied the spanning conditions".into()))
    }

    pub fn vector_family(&self) -> VectorFamily {
        self.family
    }

    pub fn x(&self, i: usize) -> &[Symbol] {
        &self.xs[i]
    }

    pub fn y(&self, i: usize) -> &[Symbol] {
        &self.ys[i]
    }

    fn t(&self) -> usize {
        self.params.t.expect("gpm codes carry t")
    }

    /// Checks, over all subsets: every `t` of the `x_i` span `X`, every
    /// `k-t+1` of the `y_i` span `Y`, every `d` of the spaces
    /// `x_i ⊗ y_i ⊙ S^(t-2)Y` span `X ⊗ S^(t-1)Y`, and every `k` nodes
    /// determine the file.
    pub fn verify(&self) -> Result<()> {
        let CodeParams { n, k, d, .. } = self.params;
        let t = self.t();
        let dim_y = k - t + 1;
        let fail = |what: &str, set: &[usize]| Err(Error::SetupFailed(format!("{what} fails for nodes {set:?}")));
        for set in subsets(n, t) {
            let rows: Vec<Vec<Symbol>> = set.iter().map(|&i| self.xs[i].clone()).collect();
            if Matrix::from_rows(self.field, &rows)?.rank() < t {
                return fail("x spanning", &set);
            }
        }
        for set in subsets(n, dim_y) {
            let rows: Vec<Vec<Symbol>> = set.iter().map(|&i| self.ys[i].clone()).collect();
            if Matrix::from_rows(self.field, &rows)?.rank() < dim_y {
                return fail("y spanning", &set);
            }
        }
        for set in subsets(n, d) {
            if self.span_matrix(&set).rank() < t * self.sym_mid.len() {
                return fail("repair spanning", &set);
            }
        }
        let gens: Vec<Matrix> = (0..n).map(|i| self.generator(i)).collect();
        for set in subsets(n, k) {
            let parts: Vec<Matrix> = set.iter().map(|&i| gens[i].clone()).collect();
            if Matrix::vstack(self.field, &parts)?.rank() < self.params.file_size {
                return fail("data retrieval", &set);
            }
        }
        Ok(())
    }

    /// Coordinates in `X ⊗ S^(deg+1)Y` of `x ⊗ (y ⊙ y^m)`, for a multiset `m`
    /// of size `deg`, accumulated into `out` with weight `scale`.
    fn push_product(&self, out: &mut [Symbol], table: &BasisTable, x: &[Symbol], y: &[Symbol], m: &[usize], scale: Symbol) {
        let f = self.field;
        for (c, &yc) in y.iter().enumerate() {
            if yc == 0 {
                continue;
            }
            let mut merged = m.to_vec();
            merged.push(c);
            merged.sort_unstable();
            let pos = table.position(&merged).expect("multiset of the right size");
            let w = f.mul(scale, yc);
            for (a, &xa) in x.iter().enumerate() {
                let idx = a * table.len() + pos;
                out[idx] = f.mul_add(w, xa, out[idx]);
            }
        }
    }

    /// `l × M` map from `φ` to node `i`'s stored values.
    fn generator(&self, i: usize) -> Matrix {
        let mut g = Matrix::zeros(self.field, self.params.l, self.params.file_size);
        for (row, m) in self.sym_mid.items().iter().enumerate() {
            let mut coords = vec![0; self.params.file_size];
            self.push_product(&mut coords, &self.sym_top, &self.xs[i], &self.ys[i], m, 1);
            for (c, v) in coords.into_iter().enumerate() {
                g.set(row, c, v);
            }
        }
        g
    }

    /// Columns `x_h ⊗ y_h ⊙ y^j` in `X ⊗ S^(t-1)Y`, helper-major, `j` over `S^(t-2)Y`.
    fn span_matrix(&self, helpers: &[usize]) -> Matrix {
        let rows = self.t() * self.sym_mid.len();
        let cols = helpers.len() * self.sym_lo.len();
        let mut m = Matrix::zeros(self.field, rows, cols);
        for (hi, &h) in helpers.iter().enumerate() {
            for (ji, j) in self.sym_lo.items().iter().enumerate() {
                let mut coords = vec![0; rows];
                self.push_product(&mut coords, &self.sym_mid, &self.xs[h], &self.ys[h], j, 1);
                for (r, v) in coords.into_iter().enumerate() {
                    m.set(r, hi * self.sym_lo.len() + ji, v);
                }
            }
        }
        m
    }
}

fn powers(field: Field, a: Symbol, step: u64, count: usize) -> Vec<Symbol> {
    let base = field.pow(a, step);
    let mut out = Vec::with_capacity(count);
    let mut x = 1;
    for _ in 0..count {
        out.push(x);
        x = field.mul(x, base);
    }
    out
}

impl RegeneratingCode for GpmCode {
    fn params(&self) -> CodeParams {
        self.params
    }

    fn field(&self) -> Field {
        self.field
    }

    fn encode(&self, file: &[Symbol]) -> Result<Codeword> {
        check_len("file", file.len(), self.params.file_size)?;
        let columns = (0..self.params.n)
            .map(|i| self.generator(i).mul_vec(file))
            .collect::<Result<Vec<_>>>()?;
        Ok(Codeword { columns })
    }

    fn node_generator(&self, i: usize) -> Result<Matrix> {
        Ok(self.generator(i))
    }

    fn repair_session(&self, failed: usize, helpers: &[usize]) -> Result<Box<dyn RepairSession + '_>> {
        check_helpers(self.params.n, self.params.d, failed, helpers)?;
        let rows = self.t() * self.sym_mid.len();
        // x_f ⊗ y^m for every target multiset m, expanded over the helper spaces
        let mut targets = Matrix::zeros(self.field, rows, self.sym_mid.len());
        for (mi, _) in self.sym_mid.items().iter().enumerate() {
            for (a, &xa) in self.xs[failed].iter().enumerate() {
                targets.set(a * self.sym_mid.len() + mi, mi, xa);
            }
        }
        let coeffs = self
            .span_matrix(helpers)
            .solve(&targets)
            .map_err(|_| Error::RepairFailed("helper spaces do not span".into()))?;
        Ok(Box::new(GpmSession { code: self, failed, helpers: helpers.to_vec(), coeffs }))
    }
}

struct GpmSession<'a> {
    code: &'a GpmCode,
    failed: usize,
    helpers: Vec<usize>,
    /// `(d·β) × l`: row `(h, j)`, column `m` holds `a_{h,j}` for target `m`.
    coeffs: Matrix,
}

impl RepairSession for GpmSession<'_> {
    fn failed(&self) -> usize {
        self.failed
    }

    fn helpers(&self) -> &[usize] {
        &self.helpers
    }

    /// `φ(x_h ⊗ y_h ⊙ y^j ⊙ y_f) = Σ_c y_f[c] φ(x_h ⊗ y_h ⊙ y^(j+c))`.
    fn helper_share(&self, h: usize, content: &[Symbol]) -> Result<Vec<Symbol>> {
        helper_pos(&self.helpers, h)?;
        let code = self.code;
        check_len("content", content.len(), code.params.l)?;
        let yf = &code.ys[self.failed];
        Ok(code
            .sym_lo
            .items()
            .iter()
            .map(|j| {
                yf.iter().enumerate().fold(0, |acc, (c, &w)| {
                    let mut merged = j.clone();
                    merged.push(c);
                    merged.sort_unstable();
                    let pos = code.sym_mid.position(&merged).expect("multiset");
                    code.field.mul_add(w, content[pos], acc)
                })
            })
            .collect())
    }

    fn lift(&self, h: usize, share: &[Symbol]) -> Result<Vec<Symbol>> {
        let pos = helper_pos(&self.helpers, h)?;
        let beta = self.code.sym_lo.len();
        check_len("share", share.len(), beta)?;
        let f = self.code.field;
        Ok((0..self.code.params.l)
            .map(|m| (0..beta).fold(0, |acc, j| f.mul_add(self.coeffs.get(pos * beta + j, m), share[j], acc)))
            .collect())
    }
}
