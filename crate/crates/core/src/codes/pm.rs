//! Product-matrix codes at the two corner points, in evaluation form.

use crate::error::{Error, Result};
use crate::field::{Field, Symbol};
use crate::matrix::Matrix;

use super::{check_helpers, check_len, default_points, helper_pos, CodeParams, Codeword, Family, RegeneratingCode, RepairSession};

/// Coefficients (constant term first) of the Lagrange basis polynomial that
/// is 1 at `points[index]` and 0 at every other point.
pub fn lagrange_coeffs(field: Field, points: &[Symbol], index: usize) -> Result<Vec<Symbol>> {
    for (i, &a) in points.iter().enumerate() {
        if points[..i].contains(&a) {
            return Err(Error::BadEvaluationPoints);
        }
    }
    let mut poly = vec![1];
    let mut denom = 1;
    for (j, &x) in points.iter().enumerate() {
        if j == index {
            continue;
        }
        // poly *= (z - x)
        let mut next = vec![0; poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i + 1] = field.add(next[i + 1], c);
            next[i] = field.sub(next[i], field.mul(c, x));
        }
        poly = next;
        denom = field.mul(denom, field.sub(points[index], x));
    }
    let scale = field.inv(denom)?;
    Ok(poly.into_iter().map(|c| field.mul(c, scale)).collect())
}

/// Index of `(r, c)`, `r ≤ c`, in the row-major upper triangle of a `size × size` matrix.
fn tri_index(size: usize, r: usize, c: usize) -> usize {
    let (r, c) = if r <= c { (r, c) } else { (c, r) };
    r * size - r * (r + 1) / 2 + c
}

fn powers(field: Field, a: Symbol, count: usize) -> Vec<Symbol> {
    let mut out = Vec::with_capacity(count);
    let mut x = 1;
    for _ in 0..count {
        out.push(x);
        x = field.mul(x, a);
    }
    out
}

/// Minimum-storage product-matrix code: `d = 2(k-1)`, `l = k-1`, `β = 1`.
///
/// The file is the pair of symmetric `(k-1) × (k-1)` coefficient matrices of
/// `s1(y, z)` and `s2(y, z)`, each stored as its row-major upper triangle.
/// Node `i` holds the coefficients of `s1(a_i, z) + a_i^(k-1) s2(a_i, z)`.
#[derive(Debug, Clone)]
pub struct PmMsrCode {
    field: Field,
    params: CodeParams,
    points: Vec<Symbol>,
}

impl PmMsrCode {
    pub fn new(field: Field, n: usize, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameters("k must be at least 2".into()));
        }
        let d = 2 * (k - 1);
        if n < d + 1 {
            return Err(Error::InvalidParameters(format!("n = {n} is too small for d = {d}")));
        }
        let l = k - 1;
        let params = CodeParams::new(Family::PmMsr, n, k, d, l, 1, k * (k - 1));
        Ok(PmMsrCode { field, params, points: default_points(field, n)? })
    }

    pub fn points(&self) -> &[Symbol] {
        &self.points
    }

    /// Unpacks the file into the two symmetric coefficient matrices.
    pub fn file_matrices(&self, file: &[Symbol]) -> Result<(Matrix, Matrix)> {
        check_len("file", file.len(), self.params.file_size)?;
        let size = self.params.l;
        let half = file.len() / 2;
        let build = |part: &[Symbol]| {
            let mut m = Matrix::zeros(self.field, size, size);
            for r in 0..size {
                for c in 0..size {
                    m.set(r, c, part[tri_index(size, r, c)]);
                }
            }
            m
        };
        Ok((build(&file[..half]), build(&file[half..])))
    }

    /// Sum of the lifted shares of `shares` (pairs of helper and share): the
    /// intermediate message a subset of the helpers forwards.
    pub fn ip_message(&self, session: &dyn RepairSession, shares: &[(usize, Vec<Symbol>)]) -> Result<Vec<Symbol>> {
        let mut acc = vec![0; self.params.l];
        for (h, share) in shares {
            let lifted = session.lift(*h, share)?;
            acc = self.field.add_vec(&acc, &lifted);
        }
        Ok(acc)
    }
}

impl RegeneratingCode for PmMsrCode {
    fn params(&self) -> CodeParams {
        self.params
    }

    fn field(&self) -> Field {
        self.field
    }

    fn encode(&self, file: &[Symbol]) -> Result<Codeword> {
        let (s1, s2) = self.file_matrices(file)?;
        let f = self.field;
        let l = self.params.l;
        let columns = self
            .points
            .iter()
            .map(|&a| {
                let pw = powers(f, a, l + 1);
                let shift = pw[l];
                (0..l)
                    .map(|c| {
                        let mut g = 0;
                        for r in 0..l {
                            g = f.mul_add(pw[r], f.mul_add(shift, s2.get(r, c), s1.get(r, c)), g);
                        }
                        g
                    })
                    .collect()
            })
            .collect();
        Ok(Codeword { columns })
    }

    fn repair_session(&self, failed: usize, helpers: &[usize]) -> Result<Box<dyn RepairSession + '_>> {
        check_helpers(self.params.n, self.params.d, failed, helpers)?;
        let f = self.field;
        let l = self.params.l;
        let a_f = self.points[failed];
        let helper_points: Vec<Symbol> = helpers.iter().map(|&h| self.points[h]).collect();
        let shift = f.pow(a_f, l as u64);
        let mut weights = Vec::with_capacity(helpers.len());
        for idx in 0..helpers.len() {
            let lag = lagrange_coeffs(f, &helper_points, idx)?;
            weights.push((0..l).map(|j| f.mul_add(shift, lag[l + j], lag[j])).collect());
        }
        Ok(Box::new(EvalSession {
            field: f,
            failed,
            helpers: helpers.to_vec(),
            eval_at: a_f,
            weights,
        }))
    }
}

/// Repair for both product-matrix codes: each helper evaluates its stored
/// polynomial at the failed node's point (one symbol), and the failed node
/// recombines with per-helper weight vectors.
struct EvalSession {
    field: Field,
    failed: usize,
    helpers: Vec<usize>,
    eval_at: Symbol,
    weights: Vec<Vec<Symbol>>,
}

impl RepairSession for EvalSession {
    fn failed(&self) -> usize {
        self.failed
    }

    fn helpers(&self) -> &[usize] {
        &self.helpers
    }

    fn helper_share(&self, h: usize, content: &[Symbol]) -> Result<Vec<Symbol>> {
        helper_pos(&self.helpers, h)?;
        Ok(vec![self.field.eval_poly(content, self.eval_at)])
    }

    fn lift(&self, h: usize, share: &[Symbol]) -> Result<Vec<Symbol>> {
        let pos = helper_pos(&self.helpers, h)?;
        check_len("share", share.len(), 1)?;
        Ok(self.weights[pos].iter().map(|&w| self.field.mul(w, share[0])).collect())
    }
}

/// Minimum-bandwidth product-matrix code: `l = d`, `β = 1`.
///
/// The file fills `B = [[S, T], [Tᵀ, 0]]` with `S` symmetric `k × k` (row-major
/// upper triangle first) and `T` of size `k × (d-k)` (row-major). Node `i`
/// stores the coefficients of `g_i(z) = s(x_i, z)`, i.e. row `i` of `ΨB`.
#[derive(Debug, Clone)]
pub struct PmMbrCode {
    field: Field,
    params: CodeParams,
    points: Vec<Symbol>,
}

impl PmMbrCode {
    pub fn new(field: Field, n: usize, k: usize, d: usize) -> Result<Self> {
        if k == 0 || k > d || d >= n {
            return Err(Error::InvalidParameters(format!("need 1 <= k <= d <= n-1, got n={n} k={k} d={d}")));
        }
        let file_size = k * d - k * (k - 1) / 2;
        let params = CodeParams::new(Family::PmMbr, n, k, d, d, 1, file_size);
        Ok(PmMbrCode { field, params, points: default_points(field, n)? })
    }

    pub fn points(&self) -> &[Symbol] {
        &self.points
    }

    pub fn coefficient_matrix(&self, file: &[Symbol]) -> Result<Matrix> {
        check_len("file", file.len(), self.params.file_size)?;
        let (k, d) = (self.params.k, self.params.d);
        let tri = k * (k + 1) / 2;
        let mut b = Matrix::zeros(self.field, d, d);
        for r in 0..k {
            for c in 0..k {
                b.set(r, c, file[tri_index(k, r, c)]);
            }
            for c in k..d {
                let v = file[tri + r * (d - k) + (c - k)];
                b.set(r, c, v);
                b.set(c, r, v);
            }
        }
        Ok(b)
    }

    fn file_from_blocks(&self, s: &Matrix, t: &Matrix) -> Vec<Symbol> {
        let k = self.params.k;
        let mut file = Vec::with_capacity(self.params.file_size);
        for r in 0..k {
            for c in r..k {
                file.push(s.get(r, c));
            }
        }
        file.extend_from_slice(t.data());
        file
    }

    /// Recovers the file from the full columns of `k` distinct nodes.
    pub fn decode(&self, nodes: &[usize], columns: &[Vec<Symbol>]) -> Result<Vec<Symbol>> {
        let (k, d) = (self.params.k, self.params.d);
        check_len("node set", nodes.len(), k)?;
        let f = self.field;
        let pts: Vec<Symbol> = nodes.iter().map(|&i| self.points[i]).collect();
        let psi = Matrix::vandermonde(f, &pts, d)?;
        let c = Matrix::from_rows(f, columns)?;
        let head: Vec<usize> = (0..k).collect();
        let tail: Vec<usize> = (k..d).collect();
        let psi1_inv = psi.select_cols(&head).inverse()?;
        let psi2 = psi.select_cols(&tail);
        let t = psi1_inv.mul(&c.select_cols(&tail))?;
        let rest = c.select_cols(&head).add(&psi2.mul(&t.transpose())?.scale(f.neg(1)))?;
        let s = psi1_inv.mul(&rest)?;
        Ok(self.file_from_blocks(&s, &t))
    }

    /// Evaluation points for triangular retrieval from `ordered`: the nodes'
    /// own points in rank order, then points of the lowest-index nodes outside
    /// the set, up to `d` points in total.
    pub fn triangular_points(&self, ordered: &[usize]) -> Result<Vec<Symbol>> {
        let (k, d, n) = (self.params.k, self.params.d, self.params.n);
        check_len("retrieval set", ordered.len(), k)?;
        let mut seen = vec![false; n];
        for &v in ordered {
            if v >= n || seen[v] {
                return Err(Error::InvalidParameters(format!("bad retrieval node {v}")));
            }
            seen[v] = true;
        }
        let mut pts: Vec<Symbol> = ordered.iter().map(|&v| self.points[v]).collect();
        pts.extend((0..n).filter(|&v| !seen[v]).take(d - k).map(|v| self.points[v]));
        Ok(pts)
    }

    /// The node at rank `i` sends `g(P_j)` for `j = i..d`, i.e. `d - i`
    /// symbols (0-based rank); symmetry supplies the rest.
    pub fn triangular_shares(&self, ordered: &[usize], codeword: &Codeword) -> Result<Vec<Vec<Symbol>>> {
        let pts = self.triangular_points(ordered)?;
        Ok(ordered
            .iter()
            .enumerate()
            .map(|(rank, &v)| pts[rank..].iter().map(|&x| self.field.eval_poly(codeword.column(v), x)).collect())
            .collect())
    }

    /// Rebuilds every full column by interpolation, then decodes.
    pub fn triangular_decode(&self, ordered: &[usize], shares: &[Vec<Symbol>]) -> Result<Vec<Symbol>> {
        let f = self.field;
        let (k, d) = (self.params.k, self.params.d);
        let pts = self.triangular_points(ordered)?;
        check_len("share lists", shares.len(), k)?;
        for (rank, s) in shares.iter().enumerate() {
            check_len("triangular share", s.len(), d - rank)?;
        }
        let vinv = Matrix::vandermonde(f, &pts, d)?.inverse()?;
        let mut columns = Vec::with_capacity(k);
        for i in 0..k {
            // g_i(P_j) for j < i equals g_j(P_i), sent by the node of rank j
            let values: Vec<Symbol> = (0..d)
                .map(|j| if j >= i { shares[i][j - i] } else { shares[j][i - j] })
                .collect();
            columns.push(vinv.mul_vec(&values)?);
        }
        self.decode(ordered, &columns)
    }
}

impl RegeneratingCode for PmMbrCode {
    fn params(&self) -> CodeParams {
        self.params
    }

    fn field(&self) -> Field {
        self.field
    }

    fn encode(&self, file: &[Symbol]) -> Result<Codeword> {
        let b = self.coefficient_matrix(file)?;
        let psi = Matrix::vandermonde(self.field, &self.points, self.params.d)?;
        let c = psi.mul(&b)?;
        Ok(Codeword { columns: (0..self.params.n).map(|i| c.row(i).to_vec()).collect() })
    }

    fn repair_session(&self, failed: usize, helpers: &[usize]) -> Result<Box<dyn RepairSession + '_>> {
        check_helpers(self.params.n, self.params.d, failed, helpers)?;
        let helper_points: Vec<Symbol> = helpers.iter().map(|&h| self.points[h]).collect();
        let weights = (0..helpers.len())
            .map(|idx| lagrange_coeffs(self.field, &helper_points, idx))
            .collect::<Result<Vec<_>>>()?;
        Ok(Box::new(EvalSession {
            field: self.field,
            failed,
            helpers: helpers.to_vec(),
            eval_at: self.points[failed],
            weights,
        }))
    }
}
