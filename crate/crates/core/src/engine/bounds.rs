//! Closed-form bandwidth and file-size bounds, in exact arithmetic.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::topology::RepairTree;

pub type Rational = Ratio<u64>;

/// Largest file size `Σ_{i=1}^{k} min(l, (d-i+1)β)` that `n` nodes storing `l`
/// symbols can support with repair bandwidth `β` per helper.
pub fn cutset_bound(n: usize, k: usize, d: usize, l: usize, beta: usize) -> Result<usize> {
    if k == 0 || k > d || d >= n {
        return Err(Error::InvalidParameters(format!("need 1 <= k <= d <= n-1, got n={n} k={k} d={d}")));
    }
    Ok((1..=k).map(|i| l.min((d - i + 1) * beta)).sum())
}

/// Symbols that must cross the edge above a helper subtree of size `e`.
pub fn edge_lower_bound(e: usize, k: usize, d: usize, l: usize, beta: usize) -> Rational {
    if e + k >= d + 1 {
        let flat = Rational::from_integer(((d - k + 1) * beta) as u64);
        let share = Rational::new((e * l) as u64, d as u64);
        flat.max(share)
    } else {
        Rational::from_integer((e * beta) as u64)
    }
}

/// Sum of [`edge_lower_bound`] over every edge of the repair tree.
pub fn repair_lower_bound(tree: &RepairTree, k: usize, d: usize, l: usize, beta: usize) -> Rational {
    tree.helpers()
        .iter()
        .map(|&v| edge_lower_bound(tree.subtree_size(v), k, d, l, beta))
        .sum()
}

/// Minimum data a set of `a` nodes must supply for retrieval:
/// `Σ_{i=k-a}^{k-1} min(l, (d-i)β)`.
pub fn retrieval_lower_bound(a: usize, k: usize, d: usize, l: usize, beta: usize) -> Result<usize> {
    if a > k || k > d {
        return Err(Error::InvalidParameters(format!("need a <= k <= d, got a={a} k={k} d={d}")));
    }
    Ok((k - a..k).map(|i| l.min((d - i) * beta)).sum())
}

/// File-size bound when repair restores only a `γ` fraction of a node:
/// `Σ_{i=0}^{k-1} min(l, (d-i)β + l(1-γ))`.
pub fn partial_cutset_bound(k: usize, d: usize, l: usize, beta: usize, gamma: Rational) -> Result<Rational> {
    if gamma > Rational::from_integer(1) || gamma == Rational::from_integer(0) {
        return Err(Error::InvalidParameters(format!("gamma = {gamma} must lie in (0, 1]")));
    }
    if k > d {
        return Err(Error::InvalidParameters(format!("need k <= d, got k={k} d={d}")));
    }
    let lr = Rational::from_integer(l as u64);
    let slack = lr * (Rational::from_integer(1) - gamma);
    Ok((0..k)
        .map(|i| lr.min(Rational::from_integer(((d - i) * beta) as u64) + slack))
        .sum())
}

/// Parses `"0.1"`, `"1/3"` or `"2"` into an exact non-negative fraction.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::InvalidParameters(format!("cannot parse {text:?} as a fraction"));
    if let Some((num, den)) = t.split_once('/') {
        let num: u64 = num.trim().parse().map_err(|_| bad())?;
        let den: u64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    let (int, frac) = t.split_once('.').unwrap_or((t, ""));
    if (int.is_empty() && frac.is_empty()) || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let scale = 10u64.pow(frac.len() as u32);
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let num = int.checked_mul(scale).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?;
    Ok(Rational::new(num, scale))
}

/// `⌈γl⌉`, the number of coordinates partial repair restores.
pub fn partial_coordinates(l: usize, gamma: Rational) -> usize {
    (gamma * Rational::from_integer(l as u64)).ceil().to_integer() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_repair_tree, Graph};

    #[test]
    fn corner_points_meet_the_cutset_bound() {
        // minimum storage: l = M/k, β = l/(d-k+1)
        let (k, d) = (4, 6);
        let beta = 2;
        let l = beta * (d - k + 1);
        assert_eq!(cutset_bound(7, k, d, l, beta).unwrap(), k * l);
        // minimum bandwidth: β = 1, l = d
        assert_eq!(cutset_bound(7, 5, 6, 6, 1).unwrap(), 5 * 6 - 10);
        assert_eq!(cutset_bound(7, 5, 6, 0, 1).unwrap(), 0);
        assert!(cutset_bound(5, 5, 6, 6, 1).is_err());
    }

    #[test]
    fn running_example_lower_bound() {
        let tree = build_repair_tree(&Graph::running_example(), 0, &[1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(repair_lower_bound(&tree, 5, 6, 26, 11), Rational::from_integer(88));
        // on a star every edge carries a single helper
        let star = build_repair_tree(&Graph::star(6), 0, &[1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(repair_lower_bound(&star, 5, 6, 26, 11), Rational::from_integer(66));
    }

    #[test]
    fn msr_internal_edges_need_l() {
        // k = 4, d = 6, l = 3, β = 1: a subtree of 3 helpers must pass l symbols
        assert_eq!(edge_lower_bound(3, 4, 6, 3, 1), Rational::from_integer(3));
        assert_eq!(edge_lower_bound(6, 4, 6, 3, 1), Rational::from_integer(3));
        assert_eq!(edge_lower_bound(4, 3, 6, 7, 1), Rational::new(28, 6));
    }

    #[test]
    fn retrieval_bound_examples() {
        assert_eq!(retrieval_lower_bound(1, 5, 6, 6, 1).unwrap(), 2);
        assert_eq!(retrieval_lower_bound(2, 5, 6, 6, 1).unwrap(), 5);
        assert_eq!(retrieval_lower_bound(0, 5, 6, 6, 1).unwrap(), 0);
        assert_eq!(retrieval_lower_bound(5, 5, 6, 6, 1).unwrap(), 20);
        // minimum storage instance: a = k gives k·l
        assert_eq!(retrieval_lower_bound(4, 4, 6, 3, 1).unwrap(), 12);
    }

    #[test]
    fn partial_bound_reduces_to_cutset_at_full_gamma() {
        let one = Rational::from_integer(1);
        for (k, d, l, beta) in [(4, 6, 3, 1), (5, 6, 26, 11), (5, 6, 6, 1)] {
            let full = partial_cutset_bound(k, d, l, beta, one).unwrap();
            assert_eq!(full, Rational::from_integer(cutset_bound(d + 1, k, d, l, beta).unwrap() as u64));
        }
        assert_eq!(partial_coordinates(3, Rational::new(1, 3)), 1);
        assert_eq!(partial_coordinates(3, Rational::new(34, 100)), 2);
        assert!(partial_cutset_bound(4, 6, 3, 1, Rational::from_integer(0)).is_err());
    }

    #[test]
    fn parses_fractions() {
        assert_eq!(parse_rational("0.1").unwrap(), Rational::new(1, 10));
        assert_eq!(parse_rational("1/3").unwrap(), Rational::new(1, 3));
        assert_eq!(parse_rational("2").unwrap(), Rational::from_integer(2));
        assert_eq!(parse_rational(".25").unwrap(), Rational::new(1, 4));
        for bad in ["", "x", "1/0", "-0.1", "0.1.2", "."] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }
}
