//! Determinant codes (`d = k`) of mode `m`, and cascade-code parameters.
//!
//! The file fills a data matrix `D` whose rows are the `m`-subsets `A` of
//! `[d]` (lexicographic) and whose columns are `[d]`; node `i` stores column
//! `i` of `C = DΦ` with `Φ[r][i] = x_i^r`. Every `d` columns of `Φ` are
//! nonsingular since the `x_i` are distinct.

use crate::error::{Error, Result};
use crate::field::{Field, Symbol};
use crate::matrix::Matrix;
use crate::multilinear::{binomial, ext_basis, BasisTable};

use super::{check_helpers, check_len, default_points, helper_pos, CodeParams, Codeword, Family, RegeneratingCode, RepairSession};

/// 1-based rank of `j` inside the sorted set `a`.
pub fn tau(a: &[usize], j: usize) -> usize {
    a.iter().filter(|&&i| i <= j).count()
}

fn without(a: &[usize], j: usize) -> Vec<usize> {
    a.iter().copied().filter(|&i| i != j).collect()
}

#[cfg(test)]
fn with(a: &[usize], j: usize) -> Vec<usize> {
    let mut out = a.to_vec();
    out.push(j);
    out.sort_unstable();
    out
}

/// `(l, β, M)` of a cascade code with parameter `μ`.
pub fn cascade_params(k: usize, d: usize, mu: usize) -> Result<(usize, usize, usize)> {
    if !(1 <= mu && mu <= k && k <= d) {
        return Err(Error::InvalidParameters(format!("need 1 <= mu <= k <= d, got k={k} d={d} mu={mu}")));
    }
    let pw = |m: usize| (d - k).pow((mu - m) as u32);
    let l = (0..=mu).map(|m| pw(m) * binomial(k, m)).sum();
    let beta = (1..=mu).map(|m| pw(m) * binomial(k - 1, m - 1)).sum();
    let total: usize = (0..=mu).map(|m| k * pw(m) * binomial(k, m)).sum();
    Ok((l, beta, total - binomial(k, mu + 1)))
}

#[derive(Debug, Clone)]
pub struct DetCode {
    field: Field,
    params: CodeParams,
    phi: Matrix,
    rows: BasisTable,
    sub_rows: BasisTable,
}

impl DetCode {
    pub fn new(field: Field, n: usize, k: usize, m: usize) -> Result<Self> {
        let d = k;
        if !(1 <= m && m <= k && d < n) {
            return Err(Error::InvalidParameters(format!("need 1 <= m <= k = d <= n-1, got n={n} k={k} m={m}")));
        }
        let mut params = CodeParams::new(
            Family::Det,
            n,
            k,
            d,
            binomial(d, m),
            binomial(d - 1, m - 1),
            m * binomial(d + 1, m + 1),
        );
        params.m = Some(m);
        let points = default_points(field, n)?;
        let phi = Matrix::vandermonde(field, &points, d)?.transpose();
        Ok(DetCode {
            field,
            params,
            phi,
            rows: BasisTable::new(ext_basis(d, m)),
            sub_rows: BasisTable::new(ext_basis(d, m - 1)),
        })
    }

    pub fn mode(&self) -> usize {
        self.params.m.expect("determinant codes carry m")
    }

    pub fn encoder_matrix(&self) -> &Matrix {
        &self.phi
    }

    /// Lays the file out as `D`, filling in the parity symbols.
    pub fn data_matrix(&self, file: &[Symbol]) -> Result<Matrix> {
        check_len("file", file.len(), self.params.file_size)?;
        let f = self.field;
        let (d, m) = (self.params.d, self.mode());
        let mut data = Matrix::zeros(f, self.rows.len(), d);
        let mut next = file.iter().copied();
        for (ai, a) in self.rows.items().iter().enumerate() {
            for &j in a {
                data.set(ai, j, next.next().expect("length checked"));
            }
        }
        for s in ext_basis(d, m + 1) {
            let (&last, head) = s.split_last().expect("nonempty");
            // Σ_{j∈S} (-1)^τ w_{S,j} = 0 fixes the symbol at the largest index
            let mut acc = 0;
            for &j in head {
                let w = next.next().expect("length checked");
                data.set(self.rows.position(&without(&s, j)).expect("m-subset"), j, w);
                acc = f.add(acc, f.signed(w, tau(&s, j) % 2 == 1));
            }
            let w_last = f.signed(f.neg(acc), (m + 1) % 2 == 1);
            data.set(self.rows.position(head).expect("m-subset"), last, w_last);
        }
        Ok(data)
    }

    /// `R` for failed node `f`: `R[B][A] = (-1)^τ_A(j) Φ[j][f]` when `A = B ∪ {j}`.
    pub fn repair_matrix(&self, failed: usize) -> Matrix {
        let f = self.field;
        let mut r = Matrix::zeros(f, self.sub_rows.len(), self.rows.len());
        for (ai, a) in self.rows.items().iter().enumerate() {
            for &j in a {
                let bi = self.sub_rows.position(&without(a, j)).expect("(m-1)-subset");
                r.set(bi, ai, f.signed(self.phi.get(j, failed), tau(a, j) % 2 == 1));
            }
        }
        r
    }

    /// `Φ_{:,H}^{-1}`.
    fn helper_inverse(&self, helpers: &[usize]) -> Result<Matrix> {
        self.phi.select_cols(helpers).inverse()
    }

    /// Rebuilds the failed column from the full vectors `R C_{:,h}` of every
    /// helper: `RD = T Φ_H^{-1}`, then
    /// `C_{A,f} = Σ_{i∈A} (-1)^τ_A(i) (RD)[A∖i][i]`.
    pub fn classic_repair(&self, helpers: &[usize], rc: &[Vec<Symbol>]) -> Result<Vec<Symbol>> {
        check_len("helper vectors", rc.len(), helpers.len())?;
        let f = self.field;
        let t = Matrix::from_rows(f, rc)?.transpose();
        let rd = t.mul(&self.helper_inverse(helpers)?)?;
        Ok(self
            .rows
            .items()
            .iter()
            .map(|a| {
                a.iter().fold(0, |acc, &i| {
                    let b = self.sub_rows.position(&without(a, i)).expect("(m-1)-subset");
                    f.add(acc, f.signed(rd.get(b, i), tau(a, i) % 2 == 1))
                })
            })
            .collect())
    }

    /// The `l × l` matrices `U^(h)` with `Σ_h U^(h) C_{:,h} = C_{:,f}`.
    pub fn pipeline_matrices(&self, failed: usize, helpers: &[usize]) -> Result<Vec<Matrix>> {
        let f = self.field;
        let r = self.repair_matrix(failed);
        let inv = self.helper_inverse(helpers)?;
        let l = self.rows.len();
        let mut out = Vec::with_capacity(helpers.len());
        for hp in 0..helpers.len() {
            let mut u = Matrix::zeros(f, l, l);
            for (ai, a) in self.rows.items().iter().enumerate() {
                for &j in a {
                    let coef = f.signed(inv.get(hp, j), tau(a, j) % 2 == 1);
                    let b = self.sub_rows.position(&without(a, j)).expect("(m-1)-subset");
                    for c in 0..l {
                        u.add_to(ai, c, f.mul(coef, r.get(b, c)));
                    }
                }
            }
            out.push(u);
        }
        Ok(out)
    }

    /// Helper share for repairing `failed`; identical to the share in a repair session.
    pub fn helper_share(&self, failed: usize, content: &[Symbol]) -> Result<Vec<Symbol>> {
        let (_, compress) = self.repair_matrix(failed).rank_factorize();
        compress.mul_vec(content)
    }

    /// Expands a share back to `R C_{:,h}`.
    pub fn expand_share(&self, failed: usize, share: &[Symbol]) -> Result<Vec<Symbol>> {
        let (expand, _) = self.repair_matrix(failed).rank_factorize();
        expand.mul_vec(share)
    }
}

impl RegeneratingCode for DetCode {
    fn params(&self) -> CodeParams {
        self.params
    }

    fn field(&self) -> Field {
        self.field
    }

    fn encode(&self, file: &[Symbol]) -> Result<Codeword> {
        let c = self.data_matrix(file)?.mul(&self.phi)?;
        Ok(Codeword { columns: (0..self.params.n).map(|i| c.col(i)).collect() })
    }

    fn repair_session(&self, failed: usize, helpers: &[usize]) -> Result<Box<dyn RepairSession + '_>> {
        check_helpers(self.params.n, self.params.d, failed, helpers)?;
        let (expand, compress) = self.repair_matrix(failed).rank_factorize();
        let inv = self
            .helper_inverse(helpers)
            .map_err(|_| Error::RepairFailed("encoder columns of the helpers are singular".into()))?;
        Ok(Box::new(DetSession { code: self, failed, helpers: helpers.to_vec(), compress, expand, inv }))
    }
}

struct DetSession<'a> {
    code: &'a DetCode,
    failed: usize,
    helpers: Vec<usize>,
    compress: Matrix,
    expand: Matrix,
    inv: Matrix,
}

impl RepairSession for DetSession<'_> {
    fn failed(&self) -> usize {
        self.failed
    }

    fn helpers(&self) -> &[usize] {
        &self.helpers
    }

    fn helper_share(&self, h: usize, content: &[Symbol]) -> Result<Vec<Symbol>> {
        helper_pos(&self.helpers, h)?;
        self.compress.mul_vec(content)
    }

    /// `U^(h) C_{:,h}`, computed from `R C_{:,h}` alone.
    fn lift(&self, h: usize, share: &[Symbol]) -> Result<Vec<Symbol>> {
        let hp = helper_pos(&self.helpers, h)?;
        let code = self.code;
        let f = code.field;
        let rc = self.expand.mul_vec(share)?;
        Ok(code
            .rows
            .items()
            .iter()
            .map(|a| {
                a.iter().fold(0, |acc, &j| {
                    let b = code.sub_rows.position(&without(a, j)).expect("(m-1)-subset");
                    let coef = f.signed(self.inv.get(hp, j), tau(a, j) % 2 == 1);
                    f.mul_add(coef, rc[b], acc)
                })
            })
            .collect())
    }
}
