//! Dense matrices over GF(p).
//!
//! Everything here is exact; Gaussian elimination pivots on the first nonzero
//! entry of each column so results are deterministic for a given input.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Field, Symbol};

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Symbol>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over GF({})", self.rows, self.cols, self.field.modulus())?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Reduced row echelon form together with the pivot column of each nonzero row.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub reduced: Matrix,
    pub pivots: Vec<usize>,
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        Matrix { field, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from row-major data; entries are reduced mod p.
    pub fn from_vec(field: Field, rows: usize, cols: usize, data: Vec<Symbol>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let data = data.into_iter().map(|v| field.elem(v)).collect();
        Ok(Matrix { field, rows, cols, data })
    }

    pub fn from_rows(field: Field, rows: &[Vec<Symbol>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Matrix::from_vec(field, rows.len(), cols, rows.concat())
    }

    /// A single column vector.
    pub fn column(field: Field, v: &[Symbol]) -> Self {
        Matrix::from_vec(field, v.len(), 1, v.to_vec()).expect("length matches")
    }

    /// Rows `(1, x, x^2, ..., x^(cols-1))` for each point; points must be
    /// distinct and nonzero.
    pub fn vandermonde(field: Field, points: &[Symbol], cols: usize) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &x in points {
            if field.elem(x) == 0 || !seen.insert(field.elem(x)) {
                return Err(Error::BadEvaluationPoints);
            }
        }
        let mut m = Matrix::zeros(field, points.len(), cols);
        for (r, &x) in points.iter().enumerate() {
            let mut acc = 1;
            for c in 0..cols {
                m.set(r, c, acc);
                acc = field.mul(acc, x);
            }
        }
        Ok(m)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Symbol] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Symbol {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Symbol) {
        self.data[r * self.cols + c] = self.field.elem(v);
    }

    /// `self[r][c] += v`.
    #[inline]
    pub fn add_to(&mut self, r: usize, c: usize, v: Symbol) {
        let i = r * self.cols + c;
        self.data[i] = self.field.add(self.data[i], self.field.elem(v));
    }

    pub fn row(&self, r: usize) -> &[Symbol] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<Symbol> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            let acc = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for (k, &a) in self.row(r).iter().enumerate() {
                f.axpy(acc, a, other.row(k));
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Symbol]) -> Result<Vec<Symbol>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|r| self.field.dot(self.row(r), v)).collect())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch("matrix sum".into()));
        }
        let data = self.field.add_vec(&self.data, &other.data);
        Ok(Matrix { data, ..self.clone() })
    }

    pub fn scale(&self, s: Symbol) -> Matrix {
        let f = self.field;
        Matrix { data: self.data.iter().map(|&v| f.mul(v, s)).collect(), ..self.clone() }
    }

    pub fn select_cols(&self, cols: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.field, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                m.set(r, j, self.get(r, c));
            }
        }
        m
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let data = rows.iter().flat_map(|&r| self.row(r).iter().copied()).collect();
        Matrix { field: self.field, rows: rows.len(), cols: self.cols, data }
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(field: Field, parts: &[Matrix]) -> Result<Matrix> {
        let cols = parts.first().map_or(0, |m| m.cols);
        if parts.iter().any(|m| m.cols != cols) {
            return Err(Error::DimensionMismatch("vstack".into()));
        }
        let rows = parts.iter().map(|m| m.rows).sum();
        let data = parts.iter().flat_map(|m| m.data.iter().copied()).collect();
        Ok(Matrix { field, rows, cols, data })
    }

    /// Places matrices with equal row counts side by side.
    pub fn hstack(field: Field, parts: &[Matrix]) -> Result<Matrix> {
        let t: Vec<Matrix> = parts.iter().map(Matrix::transpose).collect();
        Ok(Matrix::vstack(field, &t)?.transpose())
    }

    /// Reduced row echelon form with first-nonzero pivoting.
    pub fn echelon(&self) -> Echelon {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = f.inv(m.get(row, col)).expect("pivot is nonzero");
            for c in col..m.cols {
                let v = f.mul(m.get(row, c), inv);
                m.set(row, c, v);
            }
            let pivot_row = m.row(row)[col..].to_vec();
            for r in 0..m.rows {
                let factor = m.get(r, col);
                if r == row || factor == 0 {
                    continue;
                }
                let neg = f.neg(factor);
                let start = r * m.cols + col;
                f.axpy(&mut m.data[start..start + pivot_row.len()], neg, &pivot_row);
            }
            pivots.push(col);
            row += 1;
        }
        Echelon { reduced: m, pivots }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        self.echelon().pivots.len()
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let aug = Matrix::hstack(self.field, &[self.clone(), Matrix::identity(self.field, n)])?;
        let ech = aug.echelon();
        if ech.pivots.len() < n || ech.pivots[n - 1] >= n {
            return Err(Error::Singular);
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        Ok(ech.reduced.select_cols(&cols))
    }

    /// Basis of the right kernel as columns, one per free column in ascending
    /// order.
    pub fn nullspace(&self) -> Matrix {
        let f = self.field;
        let ech = self.echelon();
        let free: Vec<usize> = (0..self.cols).filter(|c| !ech.pivots.contains(c)).collect();
        let mut basis = Matrix::zeros(f, self.cols, free.len());
        for (j, &fc) in free.iter().enumerate() {
            basis.set(fc, j, 1);
            for (i, &pc) in ech.pivots.iter().enumerate() {
                basis.set(pc, j, f.neg(ech.reduced.get(i, fc)));
            }
        }
        basis
    }

    /// Solves `self * X = rhs` when the solution exists and is unique.
    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        if rhs.rows != self.rows {
            return Err(Error::DimensionMismatch("solve: row counts differ".into()));
        }
        let n = self.cols;
        let aug = Matrix::hstack(self.field, &[self.clone(), rhs.clone()])?;
        let ech = aug.echelon();
        let lhs_pivots = ech.pivots.iter().filter(|&&c| c < n).count();
        if lhs_pivots < n || ech.pivots.len() > n {
            return Err(Error::Unsolvable);
        }
        let cols: Vec<usize> = (n..n + rhs.cols).collect();
        let rows: Vec<usize> = (0..n).collect();
        Ok(ech.reduced.select_cols(&cols).select_rows(&rows))
    }

    pub fn solve_vec(&self, rhs: &[Symbol]) -> Result<Vec<Symbol>> {
        Ok(self.solve(&Matrix::column(self.field, rhs))?.col(0))
    }

    /// Returns `(L, S)` with `self = L * S` and inner dimension `rank(self)`:
    /// `L` holds the pivot columns, `S` the nonzero rows of the reduced form.
    pub fn rank_factorize(&self) -> (Matrix, Matrix) {
        let ech = self.echelon();
        let r = ech.pivots.len();
        let left = self.select_cols(&ech.pivots);
        let rows: Vec<usize> = (0..r).collect();
        (left, ech.reduced.select_rows(&rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf7() -> Field {
        Field::new(7).unwrap()
    }

    fn random(f: Field, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let data = (0..rows * cols).map(|_| rng.gen_range(0..f.modulus())).collect();
        Matrix::from_vec(f, rows, cols, data).unwrap()
    }

    #[test]
    fn product_examples() {
        let f = gf7();
        let a = Matrix::from_rows(f, &[vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(a.mul(&Matrix::identity(f, 2)).unwrap(), a);
        let b = Matrix::from_rows(f, &[vec![2], vec![5]]).unwrap();
        assert_eq!(a.mul(&b).unwrap().col(0), vec![5, 5]);
        assert!(b.mul(&b).is_err());
    }

    #[test]
    fn inverse_examples() {
        let f = gf7();
        let i3 = Matrix::identity(f, 3);
        assert_eq!(i3.inverse().unwrap(), i3);
        let d = Matrix::from_rows(f, &[vec![2, 0], vec![0, 4]]).unwrap();
        assert_eq!(d.inverse().unwrap(), Matrix::from_rows(f, &[vec![4, 0], vec![0, 2]]).unwrap());
        let s = Matrix::from_rows(f, &[vec![1, 2], vec![2, 4]]).unwrap();
        assert!(matches!(s.inverse(), Err(Error::Singular)));
    }

    #[test]
    fn random_inverse_round_trip() {
        let f = Field::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random(f, 6, 6, &mut rng);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), Matrix::identity(f, 6));
    }

    #[test]
    fn rank_and_nullspace_edge_cases() {
        let f = gf7();
        assert_eq!(Matrix::zeros(f, 3, 4).rank(), 0);
        assert_eq!(Matrix::identity(f, 5).rank(), 5);
        assert_eq!(Matrix::identity(f, 4).nullspace().cols(), 0);
        let z = Matrix::zeros(f, 2, 3).nullspace();
        assert_eq!((z.rows(), z.cols()), (3, 3));
    }

    #[test]
    fn vandermonde_examples() {
        let f = gf7();
        assert_eq!(Matrix::vandermonde(f, &[1], 3).unwrap().row(0), &[1, 1, 1]);
        let v = Matrix::vandermonde(f, &[2, 3], 2).unwrap();
        assert_eq!(v, Matrix::from_rows(f, &[vec![1, 2], vec![1, 3]]).unwrap());
        assert!(Matrix::vandermonde(f, &[2, 2], 2).is_err());
        assert!(Matrix::vandermonde(f, &[0, 2], 2).is_err());
        let sq = Matrix::vandermonde(Field::default(), &[1, 2, 3, 4, 5, 6], 6).unwrap();
        assert!(sq.inverse().is_ok());
    }

    #[test]
    fn rank_factorization_examples() {
        let f = Field::default();
        let i = Matrix::identity(f, 4);
        let (l, s) = i.rank_factorize();
        assert_eq!(l.mul(&s).unwrap(), i);
        let u = Matrix::column(f, &[1, 2, 3]);
        let v = Matrix::from_rows(f, &[vec![4, 5, 6, 7]]).unwrap();
        let outer = u.mul(&v).unwrap();
        let (l, s) = outer.rank_factorize();
        assert_eq!(l.cols(), 1);
        assert_eq!(l.mul(&s).unwrap(), outer);
    }

    #[test]
    fn solve_rejects_inconsistent_systems() {
        let f = gf7();
        let a = Matrix::from_rows(f, &[vec![1, 1], vec![2, 2]]).unwrap();
        assert!(a.solve_vec(&[1, 3]).is_err());
        let b = Matrix::from_rows(f, &[vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap();
        assert_eq!(b.solve_vec(&[2, 3, 5]).unwrap(), vec![2, 3]);
        assert!(b.solve_vec(&[2, 3, 6]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn multiplication_is_associative(seed in any::<u64>(), a in 1usize..5, b in 1usize..5, c in 1usize..5, d in 1usize..5) {
                let f = Field::new(13).unwrap();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let x = random(f, a, b, &mut rng);
                let y = random(f, b, c, &mut rng);
                let z = random(f, c, d, &mut rng);
                prop_assert_eq!(x.mul(&y).unwrap().mul(&z).unwrap(), x.mul(&y.mul(&z).unwrap()).unwrap());
            }

            #[test]
            fn rank_is_transpose_invariant_and_factorization_reconstructs(seed in any::<u64>(), r in 1usize..7, c in 1usize..7, inner in 1usize..4) {
                // low-rank products exercise the non-full-rank paths
                let f = Field::new(5).unwrap();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let m = random(f, r, inner, &mut rng).mul(&random(f, inner, c, &mut rng)).unwrap();
                prop_assert_eq!(m.rank(), m.transpose().rank());
                let (l, s) = m.rank_factorize();
                prop_assert_eq!(l.cols(), m.rank());
                prop_assert_eq!(l.mul(&s).unwrap(), m.clone());
                let ns = m.nullspace();
                prop_assert_eq!(ns.cols(), c - m.rank());
                prop_assert!(m.mul(&ns).unwrap().is_zero());
            }

            #[test]
            fn square_vandermonde_is_invertible(start in 1u64..60_000, n in 1usize..8) {
                let f = Field::default();
                let pts: Vec<u64> = (0..n as u64).map(|i| start + 7 * i).collect();
                prop_assert!(Matrix::vandermonde(f, &pts, n).unwrap().inverse().is_ok());
            }
        }
    }
}
