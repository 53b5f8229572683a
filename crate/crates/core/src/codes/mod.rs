//! Linear regenerating-code families and the repair interface they share.

pub mod det;
pub mod gpm;
pub mod moulin;
pub mod pm;

use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Symbol};
use crate::matrix::Matrix;

pub use det::{cascade_params, DetCode};
pub use gpm::GpmCode;
pub use moulin::MoulinCode;
pub use pm::{lagrange_coeffs, PmMbrCode, PmMsrCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    PmMsr,
    PmMbr,
    Gpm,
    Moulin,
    Det,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::PmMsr => "pm-msr",
            Family::PmMbr => "pm-mbr",
            Family::Gpm => "gpm",
            Family::Moulin => "moulin",
            Family::Det => "det",
        })
    }
}

/// `[n, k, d, l, β, M]` plus the family-specific index, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub family: Family,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub l: usize,
    pub beta: usize,
    pub file_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

impl CodeParams {
    pub(crate) fn new(family: Family, n: usize, k: usize, d: usize, l: usize, beta: usize, file_size: usize) -> Self {
        CodeParams { family, n, k, d, l, beta, file_size, t: None, s: None, m: None }
    }
}

/// `n` node columns of `l` symbols each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codeword {
    pub columns: Vec<Vec<Symbol>>,
}

impl Codeword {
    pub fn column(&self, i: usize) -> &[Symbol] {
        &self.columns[i]
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// Helper-side and failed-node-side maps for repairing one node from a fixed
/// helper set.
///
/// Contributions are additive: summing `lift(h, helper_share(h, c_h))` over
/// every helper and finalizing yields the erased column. Any partial sum is a
/// valid intermediate message, which is what lets relays aggregate.
pub trait RepairSession {
    fn failed(&self) -> usize;

    fn helpers(&self) -> &[usize];

    /// What helper `h` sends, computed from its own column only.
    fn helper_share(&self, h: usize, content: &[Symbol]) -> Result<Vec<Symbol>>;

    /// Maps a raw share to its length-`l` contribution.
    fn lift(&self, h: usize, share: &[Symbol]) -> Result<Vec<Symbol>>;

    fn finalize(&self, aggregate: Vec<Symbol>) -> Result<Vec<Symbol>> {
        Ok(aggregate)
    }
}

pub trait RegeneratingCode: Send + Sync {
    fn params(&self) -> CodeParams;

    fn field(&self) -> Field;

    fn encode(&self, file: &[Symbol]) -> Result<Codeword>;

    fn repair_session(&self, failed: usize, helpers: &[usize]) -> Result<Box<dyn RepairSession + '_>>;

    fn random_file(&self, rng: &mut dyn RngCore) -> Vec<Symbol> {
        let p = self.field().modulus();
        (0..self.params().file_size).map(|_| rng.gen_range(0..p)).collect()
    }

    /// The `l × M` matrix taking a file to node `i`'s column.
    fn node_generator(&self, i: usize) -> Result<Matrix> {
        let params = self.params();
        let field = self.field();
        let mut g = Matrix::zeros(field, params.l, params.file_size);
        let mut unit = vec![0; params.file_size];
        for c in 0..params.file_size {
            unit[c] = 1;
            let col = self.encode(&unit)?;
            for (r, &v) in col.column(i).iter().enumerate() {
                g.set(r, c, v);
            }
            unit[c] = 0;
        }
        Ok(g)
    }
}

pub(crate) fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::DimensionMismatch(format!("{what}: expected {want} symbols, got {got}")));
    }
    Ok(())
}

pub(crate) fn check_helpers(n: usize, d: usize, failed: usize, helpers: &[usize]) -> Result<()> {
    if failed >= n {
        return Err(Error::InvalidParameters(format!("failed node {failed} out of range")));
    }
    if helpers.len() != d {
        return Err(Error::InvalidParameters(format!("expected {d} helpers, got {}", helpers.len())));
    }
    let mut seen = vec![false; n];
    for &h in helpers {
        if h >= n || h == failed || seen[h] {
            return Err(Error::InvalidParameters(format!("bad helper {h}")));
        }
        seen[h] = true;
    }
    Ok(())
}

/// Position of `h` in the helper list.
pub(crate) fn helper_pos(helpers: &[usize], h: usize) -> Result<usize> {
    helpers
        .iter()
        .position(|&x| x == h)
        .ok_or_else(|| Error::InvalidParameters(format!("node {h} is not a helper")))
}

/// Evaluation points `1, 2, ..., n`.
pub(crate) fn default_points(field: Field, n: usize) -> Result<Vec<Symbol>> {
    if (n as u64) >= field.modulus() {
        return Err(Error::InvalidParameters(format!("field too small for {n} distinct nonzero points")));
    }
    Ok((1..=n as u64).collect())
}

/// Every `r`-subset of `0..n` in lexicographic order.
pub(crate) fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    crate::multilinear::ext_basis(n, r)
}
