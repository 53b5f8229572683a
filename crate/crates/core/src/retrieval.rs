//! Data retrieval when the data collector reaches only some nodes directly.
//!
//! The collector is modelled as an extra vertex, numbered `n`, joined to every
//! node of the attachment set. All traffic runs over the subgraph induced by the
//! retrieval set plus that vertex, along a BFS tree rooted at the collector.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::codes::{Codeword, PmMbrCode, RegeneratingCode};
use crate::engine::{generic_retrieve, retrieval_lower_bound, BandwidthReport, EdgeLoad, Rational};
use crate::error::{Error, Result};
use crate::field::Symbol;
use crate::topology::{build_repair_tree, Graph, RepairTree};

#[derive(Debug, Clone)]
pub struct RetrievalPlan {
    dc: usize,
    attach: Vec<usize>,
    ranked: Vec<usize>,
    quotas: Vec<usize>,
    tree: RepairTree,
}

#[derive(Serialize)]
struct PlanDoc<'a> {
    dc: usize,
    attach: &'a [usize],
    rank_order: &'a [usize],
    quotas: &'a [usize],
    parents: Vec<[usize; 2]>,
}

impl RetrievalPlan {
    /// Index of the virtual collector vertex.
    pub fn dc(&self) -> usize {
        self.dc
    }

    pub fn attach(&self) -> &[usize] {
        &self.attach
    }

    /// Retrieval set sorted by depth below the collector, ties by index.
    pub fn rank_order(&self) -> &[usize] {
        &self.ranked
    }

    /// Symbols each ranked node sends in the optimal scheme, aligned with
    /// [`Self::rank_order`]: `d, d-1, …, d-k+1`.
    pub fn quotas(&self) -> &[usize] {
        &self.quotas
    }

    pub fn tree(&self) -> &RepairTree {
        &self.tree
    }

    /// Hops from `v` to the collector.
    pub fn depth(&self, v: usize) -> Option<usize> {
        self.tree.depth(v)
    }

    pub fn to_json(&self) -> String {
        let doc = PlanDoc {
            dc: self.dc,
            attach: &self.attach,
            rank_order: &self.ranked,
            quotas: &self.quotas,
            parents: self.ranked.iter().map(|&v| [v, self.tree.parent(v).unwrap_or(self.dc)]).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("plan serializes")
    }

    /// Pushes per-node messages of the given sizes up the tree and returns the
    /// load on every edge, children before parents.
    fn edge_loads(&self, size: impl Fn(usize) -> usize) -> Vec<EdgeLoad> {
        let mut carried: BTreeMap<usize, usize> = BTreeMap::new();
        let mut loads = Vec::new();
        for v in self.tree.bottom_up() {
            let total = size(v) + carried.remove(&v).unwrap_or(0);
            let parent = self.tree.parent(v).expect("retrieval node has a parent");
            loads.push(EdgeLoad { from: v, to: parent, symbols: total });
            *carried.entry(parent).or_default() += total;
        }
        loads
    }

    /// Sum over edges of the least traffic any scheme must put on that edge.
    pub fn lower_bound(&self, k: usize, d: usize, l: usize, beta: usize) -> Result<Rational> {
        let mut total = 0;
        for &v in &self.ranked {
            total += retrieval_lower_bound(self.tree.subtree_size(v), k, d, l, beta)?;
        }
        Ok(Rational::from_integer(total as u64))
    }
}

/// The `k` nodes closest to the attachment set, ties by index.
pub fn select_retrieval_set(g: &Graph, attach: &[usize], k: usize) -> Result<Vec<usize>> {
    let aug = with_collector(g, attach)?;
    let dc = g.node_count();
    let dist = aug.distances(dc);
    let mut order: Vec<(usize, usize)> = (0..dc).filter_map(|v| dist[v].map(|d| (d, v))).collect();
    order.sort_unstable();
    if order.len() < k {
        return Err(Error::InvalidParameters(format!("only {} nodes reachable, need {k}", order.len())));
    }
    let mut set: Vec<usize> = order[..k].iter().map(|&(_, v)| v).collect();
    set.sort_unstable();
    Ok(set)
}

fn with_collector(g: &Graph, attach: &[usize]) -> Result<Graph> {
    let dc = g.node_count();
    if attach.is_empty() {
        return Err(Error::InvalidParameters("attachment set is empty".into()));
    }
    if let Some(&v) = attach.iter().find(|&&v| v >= dc) {
        return Err(Error::InvalidParameters(format!("attachment node {v} out of range")));
    }
    let edges = g.edges().iter().copied().chain(attach.iter().map(|&v| (v, dc)));
    Graph::new(dc + 1, edges)
}

/// Builds the retrieval tree for the retrieval set `nodes` with the collector
/// joined to `attach ⊆ nodes`; `d` fixes the optimal-scheme quotas.
pub fn plan_retrieval(g: &Graph, nodes: &[usize], attach: &[usize], d: usize) -> Result<RetrievalPlan> {
    if let Some(&v) = attach.iter().find(|v| !nodes.contains(v)) {
        return Err(Error::InvalidParameters(format!("attachment node {v} is not in the retrieval set")));
    }
    if nodes.len() > d {
        return Err(Error::InvalidParameters(format!("retrieval set of {} nodes exceeds d = {d}", nodes.len())));
    }
    let aug = with_collector(g, attach)?;
    let dc = g.node_count();
    let tree = build_repair_tree(&aug, dc, nodes).map_err(|e| match e {
        Error::Unreachable(v) => Error::InvalidGraph(format!("node {v} cannot reach the collector inside the retrieval set")),
        other => other,
    })?;
    let mut ranked = tree.helpers().to_vec();
    ranked.sort_by_key(|&v| (tree.depth(v), v));
    let quotas = (0..ranked.len()).map(|i| d - i).collect();
    let mut attach = attach.to_vec();
    attach.sort_unstable();
    attach.dedup();
    Ok(RetrievalPlan { dc, attach, ranked, quotas, tree })
}

/// Baseline: every node sends its whole column, relays forward untouched.
pub fn retrieve_relay(
    code: &dyn RegeneratingCode,
    plan: &RetrievalPlan,
    codeword: &Codeword,
) -> Result<(Vec<Symbol>, BandwidthReport)> {
    let p = code.params();
    let per_edge = plan.edge_loads(|_| p.l);
    let columns: Vec<Vec<Symbol>> = plan.ranked.iter().map(|&v| codeword.column(v).to_vec()).collect();
    let file = generic_retrieve(code, &plan.ranked, &columns)?;
    let verified = code.encode(&file)? == *codeword;
    let lb = plan.lower_bound(p.k, p.d, p.l, p.beta)?;
    Ok((file, BandwidthReport::new("relay", per_edge, Some(lb), verified)))
}

/// Triangular scheme for product-matrix MBR codes: the node of rank `i` sends
/// `d - i` evaluations and the collector fills in the rest by symmetry.
pub fn retrieve_mbr_optimal(
    code: &PmMbrCode,
    plan: &RetrievalPlan,
    codeword: &Codeword,
) -> Result<(Vec<Symbol>, BandwidthReport)> {
    let p = code.params();
    check_set_size(plan, p.k)?;
    let shares = code.triangular_shares(&plan.ranked, codeword)?;
    let sizes: BTreeMap<usize, usize> = plan.ranked.iter().zip(&shares).map(|(&v, s)| (v, s.len())).collect();
    let per_edge = plan.edge_loads(|v| sizes[&v]);
    let file = code.triangular_decode(&plan.ranked, &shares)?;
    let verified = code.encode(&file)? == *codeword;
    let lb = plan.lower_bound(p.k, p.d, p.l, p.beta)?;
    Ok((file, BandwidthReport::new("optimal", per_edge, Some(lb), verified)))
}

fn check_set_size(plan: &RetrievalPlan, k: usize) -> Result<()> {
    if plan.ranked.len() != k {
        return Err(Error::InvalidParameters(format!("retrieval set has {} nodes, code needs k = {k}", plan.ranked.len())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_attachment_plan() -> RetrievalPlan {
        let g = Graph::running_example();
        let set = select_retrieval_set(&g, &[0], 5).unwrap();
        assert_eq!(set, vec![0, 1, 2, 3, 4]);
        plan_retrieval(&g, &set, &[0], 6).unwrap()
    }

    #[test]
    fn plan_ranks_by_depth() {
        let plan = single_attachment_plan();
        assert_eq!(plan.dc(), 7);
        assert_eq!(plan.rank_order(), &[0, 1, 2, 3, 4]);
        assert_eq!(plan.quotas(), &[6, 5, 4, 3, 2]);
        assert_eq!(plan.depth(0), Some(1));
        assert_eq!(plan.depth(4), Some(3));
        let v: serde_json::Value = serde_json::from_str(&plan.to_json()).unwrap();
        assert_eq!(v["quotas"].as_array().unwrap().len(), 5);
    }

    #[test]
    fn full_attachment_is_a_star() {
        let g = Graph::running_example();
        let plan = plan_retrieval(&g, &[6, 2, 4, 1, 0], &[0, 1, 2, 4, 6], 6).unwrap();
        assert_eq!(plan.rank_order(), &[0, 1, 2, 4, 6]);
        assert!(plan.rank_order().iter().all(|&v| plan.depth(v) == Some(1)));
    }

    #[test]
    fn single_attachment_totals() {
        let code = PmMbrCode::new(Field::default(), 7, 5, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let file = code.random_file(&mut rng);
        let cw = code.encode(&file).unwrap();
        let plan = single_attachment_plan();
        let (f1, relay) = retrieve_relay(&code, &plan, &cw).unwrap();
        let (f2, opt) = retrieve_mbr_optimal(&code, &plan, &cw).unwrap();
        assert_eq!((f1.clone(), f2), (file.clone(), file));
        assert!(relay.verified && opt.verified);
        assert_eq!(relay.total_symbols, 66);
        assert_eq!(relay.edge(1, 0), Some(18));
        assert_eq!(relay.edge(0, 7), Some(30));
        assert_eq!(opt.total_symbols, 39);
        assert_eq!(opt.edge(0, 7), Some(20));
        assert_eq!(relay.total_symbols - opt.total_symbols, 27);
        // Σ quota · depth
        let weighted: usize =
            plan.rank_order().iter().zip(plan.quotas()).map(|(&v, q)| q * plan.depth(v).unwrap()).sum();
        assert_eq!(weighted, 39);
    }

    #[test]
    fn deepest_nodes_meet_the_bound() {
        let plan = single_attachment_plan();
        let (k, d) = (5, 6);
        for a in 1..=k {
            let deepest: usize = plan.quotas()[k - a..].iter().sum();
            assert_eq!(deepest, retrieval_lower_bound(a, k, d, d, 1).unwrap());
        }
    }

    #[test]
    fn single_node_sends_d() {
        let code = PmMbrCode::new(Field::default(), 4, 1, 3).unwrap();
        let cw = code.encode(&[4, 5, 6]).unwrap();
        let g = Graph::path(4);
        let plan = plan_retrieval(&g, &[2], &[2], 3).unwrap();
        let (file, rep) = retrieve_mbr_optimal(&code, &plan, &cw).unwrap();
        assert_eq!(file, vec![4, 5, 6]);
        assert_eq!(rep.total_symbols, 3);
        let (_, relay) = retrieve_relay(&code, &plan, &cw).unwrap();
        assert_eq!(relay.total_symbols, 3);
    }

    #[test]
    fn disconnected_retrieval_graph_is_rejected() {
        let g = Graph::running_example();
        // 3 and 5 only connect through nodes outside the set
        assert!(matches!(plan_retrieval(&g, &[0, 3, 5], &[0], 6), Err(Error::InvalidGraph(_))));
        assert!(plan_retrieval(&g, &[0, 1], &[2], 6).is_err());
    }
}
