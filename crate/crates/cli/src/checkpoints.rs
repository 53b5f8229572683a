//! Reference checkpoints for `regen reproduce`. Tree-based checks use the
//! supplied graph with node 0 failed; the rest are graph independent.

use anyhow::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use regen_core::codes::{DetCode, GpmCode, MoulinCode, PmMbrCode, PmMsrCode};
use regen_core::engine::{cost_af, cost_ip, cutset_bound, partial_repair, repair_lower_bound, retrieval_lower_bound};
use regen_core::retrieval::{retrieve_mbr_optimal, retrieve_relay};
use regen_core::{
    build_repair_tree, plan_retrieval, select_helpers, select_retrieval_set, simulate_repair, Field, Graph, Rational,
    RegeneratingCode, RepairTree, Strategy,
};

const SEED: u64 = 2024;

#[derive(Debug, Serialize)]
pub struct Checkpoint {
    pub name: &'static str,
    pub expected: String,
    pub measured: String,
    pub pass: bool,
}

fn tree(g: &Graph, d: usize) -> Result<RepairTree> {
    let helpers = select_helpers(g, 0, d)?;
    Ok(build_repair_tree(g, 0, &helpers)?)
}

fn af_ip(code: &dyn RegeneratingCode, g: &Graph) -> Result<String> {
    let t = tree(g, code.params().d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let cw = code.encode(&code.random_file(&mut rng))?;
    let af = simulate_repair(code, &t, &cw, Strategy::Af)?;
    let ip = simulate_repair(code, &t, &cw, Strategy::Ip)?;
    let ok = af.report.verified && ip.report.verified && af.repaired == ip.repaired;
    Ok(format!("af={} ip={} verified={ok}", af.report.total_symbols, ip.report.total_symbols))
}

fn tree_accounting(g: &Graph) -> Result<String> {
    let t = tree(g, 6)?;
    Ok(format!("af={} ip={}", cost_af(&t, 1), cost_ip(&t, 2, 1)))
}

fn gpm_repair(g: &Graph) -> Result<String> {
    af_ip(&GpmCode::new(Field::default(), 7, 5, 3, SEED)?, g)
}

fn moulin_repair(g: &Graph) -> Result<String> {
    af_ip(&MoulinCode::new(Field::default(), 7, 5, 6, 4, SEED)?, g)
}

fn moulin_bound(g: &Graph) -> Result<String> {
    Ok(repair_lower_bound(&tree(g, 6)?, 5, 6, 26, 11).to_string())
}

fn moulin_dimension(_: &Graph) -> Result<String> {
    Ok(MoulinCode::new(Field::default(), 7, 5, 6, 4, SEED)?.file_space_dim().to_string())
}

fn det_repair(g: &Graph) -> Result<String> {
    af_ip(&DetCode::new(Field::default(), 7, 6, 3)?, g)
}

fn single_attachment_retrieval(g: &Graph) -> Result<String> {
    let code = PmMbrCode::new(Field::default(), 7, 5, 6)?;
    let nodes = select_retrieval_set(g, &[0], 5)?;
    let plan = plan_retrieval(g, &nodes, &[0], 6)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let file = code.random_file(&mut rng);
    let cw = code.encode(&file)?;
    let (f1, relay) = retrieve_relay(&code, &plan, &cw)?;
    let (f2, opt) = retrieve_mbr_optimal(&code, &plan, &cw)?;
    let dc_edge = opt.per_edge.iter().filter(|e| e.to == plan.dc()).map(|e| e.symbols).sum::<usize>();
    let ok = f1 == file && f2 == file;
    Ok(format!(
        "relay={} optimal={} saving={} dc-edge={dc_edge} verified={ok}",
        relay.total_symbols,
        opt.total_symbols,
        relay.total_symbols as i64 - opt.total_symbols as i64
    ))
}

fn retrieval_bounds(_: &Graph) -> Result<String> {
    Ok(format!("a=1:{} a=2:{}", retrieval_lower_bound(1, 5, 6, 6, 1)?, retrieval_lower_bound(2, 5, 6, 6, 1)?))
}

fn partial(g: &Graph) -> Result<String> {
    let code = PmMsrCode::new(Field::default(), 7, 4)?;
    let t = tree(g, 6)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let cw = code.encode(&code.random_file(&mut rng))?;
    let part = partial_repair(&code, &t, &cw, Rational::new(1, 3))?;
    let full = simulate_repair(&code, &t, &cw, Strategy::Ip)?;
    let ok = part.report.verified && full.report.verified;
    Ok(format!("partial={} full={} verified={ok}", part.report.total_symbols, full.report.total_symbols))
}

fn cutset_corners(_: &Graph) -> Result<String> {
    Ok(format!("msr={} mbr={}", cutset_bound(7, 4, 6, 3, 1)?, cutset_bound(7, 5, 6, 6, 1)?))
}

type Check = fn(&Graph) -> Result<String>;

const CHECKS: [(&str, &str, Check); 10] = [
    ("tree accounting l=2 beta=1", "af=10 ip=8", tree_accounting),
    ("gpm k=5 t=3 repair", "af=30 ip=24 verified=true", gpm_repair),
    ("moulin k=5 d=6 s=4 repair", "af=110 ip=96 verified=true", moulin_repair),
    ("moulin repair lower bound", "88", moulin_bound),
    ("moulin file-space dimension", "125", moulin_dimension),
    ("determinant m=3 repair", "af=100 ip=80 verified=true", det_repair),
    ("single-attachment retrieval", "relay=66 optimal=39 saving=27 dc-edge=20 verified=true", single_attachment_retrieval),
    ("retrieval bounds", "a=1:2 a=2:5", retrieval_bounds),
    ("partial repair gamma=1/3", "partial=6 full=10 verified=true", partial),
    ("cutset corner points", "msr=12 mbr=20", cutset_corners),
];

pub fn run_all(g: &Graph) -> Vec<Checkpoint> {
    CHECKS
        .iter()
        .map(|&(name, expected, check)| {
            let measured = check(g).unwrap_or_else(|e| format!("error: {e}"));
            Checkpoint { name, expected: expected.to_string(), pass: measured == expected, measured }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_passes_every_checkpoint() {
        let g = Graph::from_json(crate::RUNNING_EXAMPLE).unwrap();
        assert_eq!(g.edges(), Graph::running_example().edges());
        let results = run_all(&g);
        assert!(results.iter().all(|c| c.pass), "{results:?}");
    }

    #[test]
    fn star_graph_breaks_tree_checkpoints() {
        let results = run_all(&Graph::star(6));
        let failed: Vec<&str> = results.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        assert!(failed.contains(&"tree accounting l=2 beta=1"));
        assert!(failed.contains(&"moulin repair lower bound"));
        assert!(!failed.contains(&"cutset corner points"));
    }
}
