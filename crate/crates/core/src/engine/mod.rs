//! Repair simulation over a repair tree, bandwidth accounting and generic
//! data retrieval.

pub mod bounds;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::codes::{Codeword, RegeneratingCode, RepairSession};
use crate::error::{Error, Result};
use crate::field::{Field, Symbol};
use crate::matrix::Matrix;
use crate::topology::RepairTree;

pub use bounds::{
    cutset_bound, edge_lower_bound, parse_rational, partial_coordinates, partial_cutset_bound, repair_lower_bound, retrieval_lower_bound,
    Rational,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Accumulate and forward: relays pass every share upward untouched.
    Af,
    /// Intermediate processing: relays replace shares by their combined
    /// contribution once that is shorter.
    Ip,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Af => "af",
            Strategy::Ip => "ip",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "af" => Ok(Strategy::Af),
            "ip" => Ok(Strategy::Ip),
            other => Err(Error::InvalidParameters(format!("unknown strategy {other:?}"))),
        }
    }
}

/// What travels over one tree edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IpMessage {
    Raw(Vec<(usize, Vec<Symbol>)>),
    Aggregated(Vec<Symbol>),
}

impl IpMessage {
    pub fn symbol_count(&self) -> usize {
        match self {
            IpMessage::Raw(shares) => shares.iter().map(|(_, s)| s.len()).sum(),
            IpMessage::Aggregated(v) => v.len(),
        }
    }

    /// The message's total contribution, restricted to the first `width` coordinates.
    pub(crate) fn contribution(&self, session: &dyn RepairSession, field: Field, width: usize) -> Result<Vec<Symbol>> {
        match self {
            IpMessage::Raw(shares) => {
                let mut acc = vec![0; width];
                for (h, s) in shares {
                    let lifted = session.lift(*h, s)?;
                    acc = field.add_vec(&acc, &lifted[..width]);
                }
                Ok(acc)
            }
            IpMessage::Aggregated(v) => Ok(v.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeLoad {
    pub from: usize,
    pub to: usize,
    pub symbols: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandwidthReport {
    pub strategy: String,
    pub total_symbols: usize,
    pub per_edge: Vec<EdgeLoad>,
    /// Exact value, written as an integer or a reduced fraction `a/b`.
    pub lower_bound: Option<String>,
    pub verified: bool,
}

impl BandwidthReport {
    pub fn new(strategy: impl Into<String>, per_edge: Vec<EdgeLoad>, lower_bound: Option<Rational>, verified: bool) -> Self {
        BandwidthReport {
            strategy: strategy.into(),
            total_symbols: per_edge.iter().map(|e| e.symbols).sum(),
            per_edge,
            lower_bound: lower_bound.map(|r| r.to_string()),
            verified,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn edge(&self, from: usize, to: usize) -> Option<usize> {
        self.per_edge.iter().find(|e| e.from == from && e.to == to).map(|e| e.symbols)
    }
}

#[derive(Debug, Clone)]
pub struct RepairOutcome {
    pub report: BandwidthReport,
    /// The restored column (only the restored coordinates for partial repair).
    pub repaired: Vec<Symbol>,
}

/// Runs one repair of `tree.root()` over the tree, moving real symbols.
pub fn simulate_repair(
    code: &dyn RegeneratingCode,
    tree: &RepairTree,
    codeword: &Codeword,
    strategy: Strategy,
) -> Result<RepairOutcome> {
    let params = code.params();
    let session = code.repair_session(tree.root(), tree.helpers())?;
    let width = params.l;
    let aggregate_above = match strategy {
        Strategy::Af => usize::MAX,
        Strategy::Ip => params.l,
    };
    let (repaired, per_edge) = run_tree(code, session.as_ref(), tree, codeword, width, aggregate_above)?;
    let repaired = session.finalize(repaired)?;
    let verified = repaired == codeword.column(tree.root());
    let lb = repair_lower_bound(tree, params.k, params.d, params.l, params.beta);
    Ok(RepairOutcome { report: BandwidthReport::new(strategy.to_string(), per_edge, Some(lb), verified), repaired })
}

/// Restores only the first `⌈γl⌉` coordinates of the failed node; relays
/// aggregate once their raw shares would exceed that many symbols.
pub fn partial_repair(
    code: &dyn RegeneratingCode,
    tree: &RepairTree,
    codeword: &Codeword,
    gamma: Rational,
) -> Result<RepairOutcome> {
    if gamma > Rational::from_integer(1) || gamma == Rational::from_integer(0) {
        return Err(Error::InvalidParameters(format!("gamma = {gamma} must lie in (0, 1]")));
    }
    let params = code.params();
    let g = partial_coordinates(params.l, gamma);
    let session = code.repair_session(tree.root(), tree.helpers())?;
    let (repaired, per_edge) = run_tree(code, session.as_ref(), tree, codeword, g, g)?;
    let verified = repaired == codeword.column(tree.root())[..g];
    Ok(RepairOutcome { report: BandwidthReport::new("ip-partial", per_edge, None, verified), repaired })
}

/// Walks the tree bottom-up. Each node forwards raw shares while their total
/// stays within `aggregate_above`, and otherwise the sum of contributions on
/// the first `width` coordinates. Returns the sum arriving at the root.
fn run_tree(
    code: &dyn RegeneratingCode,
    session: &dyn RepairSession,
    tree: &RepairTree,
    codeword: &Codeword,
    width: usize,
    aggregate_above: usize,
) -> Result<(Vec<Symbol>, Vec<EdgeLoad>)> {
    let field = code.field();
    let mut inbox: BTreeMap<usize, Vec<IpMessage>> = BTreeMap::new();
    let mut per_edge = Vec::new();
    for v in tree.bottom_up() {
        let own = (v, session.helper_share(v, codeword.column(v))?);
        let incoming = inbox.remove(&v).unwrap_or_default();
        let message = combine(session, field, width, aggregate_above, own, incoming)?;
        let parent = tree.parent(v).ok_or(Error::Unreachable(v))?;
        per_edge.push(EdgeLoad { from: v, to: parent, symbols: message.symbol_count() });
        inbox.entry(parent).or_default().push(message);
    }
    let mut total = vec![0; width];
    for m in inbox.remove(&tree.root()).unwrap_or_default() {
        total = field.add_vec(&total, &m.contribution(session, field, width)?);
    }
    Ok((total, per_edge))
}

fn combine(
    session: &dyn RepairSession,
    field: Field,
    width: usize,
    aggregate_above: usize,
    own: (usize, Vec<Symbol>),
    incoming: Vec<IpMessage>,
) -> Result<IpMessage> {
    let mut raw = vec![own];
    let mut aggregated = Vec::new();
    for m in incoming {
        match m {
            IpMessage::Raw(shares) => raw.extend(shares),
            agg @ IpMessage::Aggregated(_) => aggregated.push(agg),
        }
    }
    let raw_size: usize = raw.iter().map(|(_, s)| s.len()).sum();
    if aggregated.is_empty() && raw_size <= aggregate_above {
        return Ok(IpMessage::Raw(raw));
    }
    let mut acc = IpMessage::Raw(raw).contribution(session, field, width)?;
    for m in aggregated {
        acc = field.add_vec(&acc, &m.contribution(session, field, width)?);
    }
    Ok(IpMessage::Aggregated(acc))
}

/// Accumulate-and-forward cost: `Σ_v |D*(v)|β`.
pub fn cost_af(tree: &RepairTree, beta: usize) -> usize {
    tree.helpers().iter().map(|&v| tree.subtree_size(v) * beta).sum()
}

/// Intermediate-processing cost: `Σ_v min(|D*(v)|β, l)`.
pub fn cost_ip(tree: &RepairTree, l: usize, beta: usize) -> usize {
    tree.helpers().iter().map(|&v| (tree.subtree_size(v) * beta).min(l)).sum()
}

/// Partial-repair cost: `Σ_v min(|D*(v)|β, ⌈γl⌉)`.
pub fn cost_partial(tree: &RepairTree, l: usize, beta: usize, gamma: Rational) -> usize {
    cost_ip(tree, partial_coordinates(l, gamma), beta)
}

/// Recovers the file from the full columns of `nodes` by solving the stacked
/// linear system.
pub fn generic_retrieve(code: &dyn RegeneratingCode, nodes: &[usize], columns: &[Vec<Symbol>]) -> Result<Vec<Symbol>> {
    if nodes.len() != columns.len() {
        return Err(Error::DimensionMismatch("one column per node".into()));
    }
    let field = code.field();
    let gens = nodes.iter().map(|&i| code.node_generator(i)).collect::<Result<Vec<_>>>()?;
    let system = Matrix::vstack(field, &gens)?;
    let rhs: Vec<Symbol> = columns.iter().flatten().copied().collect();
    system
        .solve_vec(&rhs)
        .map_err(|_| Error::DecodeFailed(format!("nodes {nodes:?} do not determine the file")))
}
