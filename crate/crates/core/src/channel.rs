//! Repair over noisy edges: every tree-edge message is protected by its own
//! Reed–Solomon block and decoded at the receiving node before processing.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codes::{Codeword, RegeneratingCode, RepairSession};
use crate::engine::{BandwidthReport, EdgeLoad, IpMessage, Rational};
use crate::error::{Error, Result};
use crate::field::{Field, Symbol};
use crate::matrix::Matrix;
use crate::topology::RepairTree;

fn check_rho(rho: Rational) -> Result<()> {
    if rho * 2 >= Rational::from_integer(1) {
        return Err(Error::InvalidParameters(format!("error fraction {rho} must be below 1/2")));
    }
    Ok(())
}

/// Reed–Solomon code of dimension `K` evaluated at `1, 2, …, N`, where `N` is
/// the shortest length whose unique-decoding radius covers `⌈ρN⌉` errors.
#[derive(Debug, Clone)]
pub struct RsCodec {
    field: Field,
    k: usize,
    points: Vec<Symbol>,
    generator: Matrix,
}

impl RsCodec {
    pub fn new(field: Field, k: usize, rho: Rational) -> Result<Self> {
        check_rho(rho)?;
        let n = block_length(k, rho);
        Self::with_length(field, k, n)
    }

    pub fn with_length(field: Field, k: usize, n: usize) -> Result<Self> {
        if n < k || n as u64 >= field.modulus() {
            return Err(Error::InvalidParameters(format!("block length {n} invalid for K = {k}")));
        }
        let points: Vec<Symbol> = (1..=n as u64).collect();
        let generator = Matrix::vandermonde(field, &points, k)?;
        Ok(RsCodec { field, k, points, generator })
    }

    pub fn message_len(&self) -> usize {
        self.k
    }

    pub fn block_len(&self) -> usize {
        self.points.len()
    }

    /// Number of symbol errors the decoder always corrects.
    pub fn radius(&self) -> usize {
        (self.block_len() - self.k) / 2
    }

    pub fn encode(&self, message: &[Symbol]) -> Result<Vec<Symbol>> {
        if message.len() != self.k {
            return Err(Error::DimensionMismatch(format!("message has {} symbols, codec takes {}", message.len(), self.k)));
        }
        self.generator.mul_vec(message)
    }

    /// Berlekamp–Welch decoding. Fails explicitly when no codeword lies within
    /// the radius of `received`.
    pub fn decode(&self, received: &[Symbol]) -> Result<Vec<Symbol>> {
        let f = self.field;
        let (n, k, e) = (self.block_len(), self.k, self.radius());
        if received.len() != n {
            return Err(Error::DimensionMismatch(format!("block has {} symbols, expected {n}", received.len())));
        }
        if k == 0 {
            return Ok(Vec::new());
        }
        // unknowns: Q (degree < k + e), then E (degree <= e); Q(x) = y·E(x)
        let width = k + 2 * e + 1;
        let mut sys = Matrix::zeros(f, n, width);
        for (i, (&x, &y)) in self.points.iter().zip(received).enumerate() {
            let mut pw = 1;
            for j in 0..=k + e {
                if j < k + e {
                    sys.set(i, j, pw);
                }
                if j <= e {
                    sys.set(i, k + e + j, f.neg(f.mul(y, pw)));
                }
                pw = f.mul(pw, x);
            }
        }
        let kernel = sys.nullspace();
        if kernel.cols() == 0 {
            return Err(Error::DecodeFailed("no error locator exists".into()));
        }
        let sol = kernel.col(0);
        let (q, loc) = sol.split_at(k + e);
        let (quot, rem) = poly_divmod(f, q, loc)?;
        if rem.iter().any(|&r| r != 0) || quot.iter().skip(k).any(|&c| c != 0) {
            return Err(Error::DecodeFailed("received block is beyond the decoding radius".into()));
        }
        let mut message = quot;
        message.resize(k, 0);
        let distance = self.encode(&message)?.iter().zip(received).filter(|(a, b)| a != b).count();
        if distance > e {
            return Err(Error::DecodeFailed(format!("nearest codeword is {distance} symbols away, radius is {e}")));
        }
        Ok(message)
    }
}

/// Smallest `N` with `K <= N - 2⌈ρN⌉`.
pub fn block_length(k: usize, rho: Rational) -> usize {
    (k..)
        .find(|&n| {
            let budget = (rho * Rational::from_integer(n as u64)).ceil().to_integer() as usize;
            n >= k + 2 * budget
        })
        .expect("rho below 1/2 admits a block length")
}

/// Quotient and remainder of `num / den` (coefficients lowest degree first).
fn poly_divmod(f: Field, num: &[Symbol], den: &[Symbol]) -> Result<(Vec<Symbol>, Vec<Symbol>)> {
    let dd = den.iter().rposition(|&c| c != 0).ok_or(Error::DivisionByZero)?;
    let lead_inv = f.inv(den[dd])?;
    let mut rem = num.to_vec();
    if rem.len() <= dd {
        return Ok((Vec::new(), rem));
    }
    let mut quot = vec![0; rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = f.mul(rem[i + dd], lead_inv);
        quot[i] = c;
        if c != 0 {
            for (j, &dj) in den[..=dd].iter().enumerate() {
                rem[i + j] = f.sub(rem[i + j], f.mul(c, dj));
            }
        }
    }
    rem.truncate(dd);
    Ok((quot, rem))
}

/// Adversarial edge: corrupts `⌊ρN⌋` positions of every block of length `N`
/// (or `⌈ρN⌉` in worst-case mode), chosen by a seeded generator.
#[derive(Debug, Clone)]
pub struct EdgeChannel {
    field: Field,
    rho: Rational,
    round_up: bool,
    extra: usize,
    rng: ChaCha8Rng,
    injected: usize,
}

impl EdgeChannel {
    pub fn new(field: Field, rho: Rational, seed: u64) -> Result<Self> {
        check_rho(rho)?;
        Ok(EdgeChannel { field, rho, round_up: false, extra: 0, rng: ChaCha8Rng::seed_from_u64(seed), injected: 0 })
    }

    /// Corrupts `⌈ρN⌉` positions per block, the full radius the codec is
    /// sized for. Short blocks otherwise often see no errors at all.
    pub fn worst_case(mut self) -> Self {
        self.round_up = true;
        self
    }

    /// Corrupts `extra` positions beyond the nominal budget on every block.
    pub fn overloaded(mut self, extra: usize) -> Self {
        self.extra = extra;
        self
    }

    pub fn rho(&self) -> Rational {
        self.rho
    }

    pub fn errors_for(&self, block_len: usize) -> usize {
        let exact = self.rho * Rational::from_integer(block_len as u64);
        let nominal = if self.round_up { exact.ceil() } else { exact.floor() }.to_integer() as usize;
        (nominal + self.extra).min(block_len)
    }

    /// Total symbols corrupted so far.
    pub fn injected(&self) -> usize {
        self.injected
    }

    pub fn transmit(&mut self, block: &[Symbol]) -> Vec<Symbol> {
        let count = self.errors_for(block.len());
        let mut out = block.to_vec();
        let p = self.field.modulus();
        for pos in sample(&mut self.rng, block.len(), count) {
            let delta = self.rng.gen_range(1..p);
            out[pos] = self.field.add(out[pos], delta);
        }
        self.injected += count;
        out
    }
}

#[derive(Debug, Clone)]
pub struct ResilientOutcome {
    pub report: BandwidthReport,
    pub repaired: Vec<Symbol>,
    /// Symbols the same repair moves over noiseless edges.
    pub noiseless_total: usize,
    pub errors_injected: usize,
}

impl ResilientOutcome {
    /// Largest total the scheme may use: `noiseless/(1-2ρ)` plus, per edge,
    /// the rounding of the block length, `2/(1-2ρ) + 1`.
    pub fn allowed_total(&self, rho: Rational) -> Rational {
        let inv = (Rational::from_integer(1) - rho * 2).recip();
        let edges = self.report.per_edge.len() as u64;
        inv * self.noiseless_total as u64 + (inv * 2 + 1) * edges
    }
}

struct Sent {
    template: IpMessage,
    block: Vec<Symbol>,
}

fn flatten(msg: &IpMessage) -> Vec<Symbol> {
    match msg {
        IpMessage::Raw(shares) => shares.iter().flat_map(|(_, s)| s.iter().copied()).collect(),
        IpMessage::Aggregated(v) => v.clone(),
    }
}

fn refill(template: &IpMessage, data: Vec<Symbol>) -> IpMessage {
    match template {
        IpMessage::Raw(shares) => {
            let mut at = 0;
            IpMessage::Raw(
                shares
                    .iter()
                    .map(|(h, s)| {
                        let part = data[at..at + s.len()].to_vec();
                        at += s.len();
                        (*h, part)
                    })
                    .collect(),
            )
        }
        IpMessage::Aggregated(_) => IpMessage::Aggregated(data),
    }
}

/// IP repair in which each edge carries the RS encoding of its message. A
/// node decodes what it receives; when it aggregates, its outgoing block is
/// the sum of the encoded contributions of its children and itself.
pub fn resilient_ip_transmit(
    code: &dyn RegeneratingCode,
    tree: &RepairTree,
    codeword: &Codeword,
    channel: &mut EdgeChannel,
) -> Result<ResilientOutcome> {
    let field = code.field();
    let params = code.params();
    let l = params.l;
    let rho = channel.rho();
    let session = code.repair_session(tree.root(), tree.helpers())?;
    let mut codecs: BTreeMap<usize, RsCodec> = BTreeMap::new();
    let mut codec = |k: usize| -> Result<RsCodec> {
        if let Some(c) = codecs.get(&k) {
            return Ok(c.clone());
        }
        let c = RsCodec::new(field, k, rho)?;
        codecs.insert(k, c.clone());
        Ok(c)
    };
    let mut inbox: BTreeMap<usize, Vec<(usize, Sent)>> = BTreeMap::new();
    let mut per_edge = Vec::new();
    let mut noiseless_total = 0;
    let injected_before = channel.injected();

    for v in tree.bottom_up() {
        let own = (v, session.helper_share(v, codeword.column(v))?);
        let mut received = Vec::new();
        for (child, sent) in inbox.remove(&v).unwrap_or_default() {
            let rs = codec(sent.template.symbol_count())?;
            let data = rs
                .decode(&sent.block)
                .map_err(|e| Error::RepairFailed(format!("edge {child}->{v}: {e}")))?;
            received.push(refill(&sent.template, data));
        }
        let raw_size = own.1.len() + received.iter().map(IpMessage::symbol_count).sum::<usize>();
        let all_raw = received.iter().all(|m| matches!(m, IpMessage::Raw(_)));
        let (template, block) = if all_raw && raw_size <= l {
            let mut shares = vec![own];
            for m in received {
                if let IpMessage::Raw(s) = m {
                    shares.extend(s);
                }
            }
            let msg = IpMessage::Raw(shares);
            let block = codec(raw_size)?.encode(&flatten(&msg))?;
            (msg, block)
        } else {
            let rs = codec(l)?;
            let own_part = IpMessage::Raw(vec![own]).contribution(session.as_ref(), field, l)?;
            let mut block = rs.encode(&own_part)?;
            for m in &received {
                let part = m.contribution(session.as_ref(), field, l)?;
                block = field.add_vec(&block, &rs.encode(&part)?);
            }
            (IpMessage::Aggregated(vec![0; l]), block)
        };
        let parent = tree.parent(v).ok_or(Error::Unreachable(v))?;
        noiseless_total += template.symbol_count();
        per_edge.push(EdgeLoad { from: v, to: parent, symbols: block.len() });
        let block = channel.transmit(&block);
        inbox.entry(parent).or_default().push((v, Sent { template, block }));
    }

    let root = tree.root();
    let mut total = vec![0; l];
    for (child, sent) in inbox.remove(&root).unwrap_or_default() {
        let rs = codec(sent.template.symbol_count())?;
        let data = rs
            .decode(&sent.block)
            .map_err(|e| Error::RepairFailed(format!("edge {child}->{root}: {e}")))?;
        let msg = refill(&sent.template, data);
        total = field.add_vec(&total, &msg.contribution(session.as_ref(), field, l)?);
    }
    let repaired = session.finalize(total)?;
    let verified = repaired == codeword.column(root);
    Ok(ResilientOutcome {
        report: BandwidthReport::new("ip-rs", per_edge, None, verified),
        repaired,
        noiseless_total,
        errors_injected: channel.injected() - injected_before,
    })
}

/// RS encoding of a single helper's lifted contribution.
pub fn encoded_contribution(
    rs: &RsCodec,
    session: &dyn RepairSession,
    field: Field,
    helper: usize,
    share: Vec<Symbol>,
) -> Result<Vec<Symbol>> {
    let part = IpMessage::Raw(vec![(helper, share)]).contribution(session, field, rs.message_len())?;
    rs.encode(&part)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::PmMsrCode;
    use crate::engine::{simulate_repair, Strategy};
    use crate::topology::{build_repair_tree, select_helpers, Graph};

    fn tenth() -> Rational {
        Rational::new(1, 10)
    }

    #[test]
    fn block_lengths() {
        assert_eq!(block_length(22, tenth()), 28);
        assert_eq!(block_length(22, Rational::from_integer(0)), 22);
        assert_eq!(block_length(0, tenth()), 0);
        let rs = RsCodec::new(Field::default(), 22, tenth()).unwrap();
        assert!(rs.radius() >= 3);
        assert!(RsCodec::new(Field::default(), 4, Rational::new(1, 2)).is_err());
    }

    #[test]
    fn zero_message_and_round_trip() {
        let f = Field::default();
        let rs = RsCodec::new(f, 5, tenth()).unwrap();
        assert!(rs.encode(&[0; 5]).unwrap().iter().all(|&s| s == 0));
        let msg = vec![3, 1, 4, 1, 5];
        assert_eq!(rs.decode(&rs.encode(&msg).unwrap()).unwrap(), msg);
    }

    /// Every error pattern up to the radius with every position set and a
    /// fixed nonzero error value per position, for all lengths up to 12.
    #[test]
    fn exhaustive_small_blocks() {
        let f = Field::new(13).unwrap();
        for n in 1..=12usize {
            for k in 1..=n {
                let rs = RsCodec::with_length(f, k, n).unwrap();
                let msg: Vec<Symbol> = (0..k as u64).map(|i| (3 * i + 1) % 13).collect();
                let cw = rs.encode(&msg).unwrap();
                let e = rs.radius();
                for mask in 0u32..(1 << n) {
                    if mask.count_ones() as usize > e {
                        continue;
                    }
                    let mut rx = cw.clone();
                    for (i, s) in rx.iter_mut().enumerate() {
                        if mask >> i & 1 == 1 {
                            *s = f.add(*s, 1 + (i as u64 * 5) % 12);
                        }
                    }
                    assert_eq!(rs.decode(&rx).unwrap(), msg, "n={n} k={k} mask={mask:b}");
                }
            }
        }
    }

    #[test]
    fn beyond_radius_never_returns_a_far_codeword() {
        let f = Field::default();
        let rs = RsCodec::new(f, 6, Rational::new(1, 5)).unwrap();
        let msg = vec![9, 8, 7, 6, 5, 4];
        let cw = rs.encode(&msg).unwrap();
        let mut ch = EdgeChannel::new(f, Rational::from_integer(0), 1).unwrap().overloaded(rs.radius() + 1);
        for _ in 0..50 {
            let rx = ch.transmit(&cw);
            match rs.decode(&rx) {
                Ok(m) => {
                    let d = rs.encode(&m).unwrap().iter().zip(&rx).filter(|(a, b)| a != b).count();
                    assert!(m != msg && d <= rs.radius());
                }
                Err(Error::DecodeFailed(_)) => {}
                Err(other) => panic!("unexpected {other}"),
            }
        }
    }

    #[test]
    fn channel_respects_budget() {
        let mut ch = EdgeChannel::new(Field::default(), tenth(), 4).unwrap();
        let block = vec![0; 28];
        let rx = ch.transmit(&block);
        assert_eq!(rx.iter().filter(|&&s| s != 0).count(), 2);
        assert_eq!(ch.injected(), 2);
        let mut ch = EdgeChannel::new(Field::default(), tenth(), 4).unwrap().worst_case();
        ch.transmit(&block);
        assert_eq!(ch.injected(), 3);
    }

    fn setup() -> (PmMsrCode, RepairTree) {
        let g = Graph::running_example();
        let tree = build_repair_tree(&g, 0, &select_helpers(&g, 0, 6).unwrap()).unwrap();
        (PmMsrCode::new(Field::default(), 7, 4).unwrap(), tree)
    }

    #[test]
    fn noiseless_channel_matches_plain_ip() {
        let (code, tree) = setup();
        let cw = code.encode(&(1..=12).collect::<Vec<_>>()).unwrap();
        let mut ch = EdgeChannel::new(code.field(), Rational::from_integer(0), 0).unwrap();
        let out = resilient_ip_transmit(&code, &tree, &cw, &mut ch).unwrap();
        let plain = simulate_repair(&code, &tree, &cw, Strategy::Ip).unwrap();
        assert!(out.report.verified);
        assert_eq!(out.report.per_edge, plain.report.per_edge);
        assert_eq!(out.repaired, plain.repaired);
    }

    #[test]
    fn noisy_repair_is_exact_within_overhead() {
        let (code, tree) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for seed in 0..20 {
            let cw = code.encode(&code.random_file(&mut rng)).unwrap();
            let mut ch = EdgeChannel::new(code.field(), tenth(), seed).unwrap();
            let out = resilient_ip_transmit(&code, &tree, &cw, &mut ch).unwrap();
            assert!(out.report.verified);
            assert_eq!(out.noiseless_total, 10);
            assert!(Rational::from_integer(out.report.total_symbols as u64) <= out.allowed_total(tenth()));
            let mut ch = EdgeChannel::new(code.field(), tenth(), seed).unwrap().worst_case();
            let out = resilient_ip_transmit(&code, &tree, &cw, &mut ch).unwrap();
            assert!(out.report.verified);
            assert_eq!(out.errors_injected, 6);
            assert!(Rational::from_integer(out.report.total_symbols as u64) <= out.allowed_total(tenth()));
        }
    }

    #[test]
    fn overloaded_edges_report_failure() {
        let (code, tree) = setup();
        let cw = code.encode(&(1..=12).collect::<Vec<_>>()).unwrap();
        let mut ch = EdgeChannel::new(code.field(), Rational::new(1, 4), 2).unwrap().overloaded(3);
        match resilient_ip_transmit(&code, &tree, &cw, &mut ch) {
            Err(Error::RepairFailed(_)) => {}
            Ok(out) => assert!(!out.report.verified),
            Err(other) => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn distributed_encoding_identity() {
        let (code, tree) = setup();
        let f = code.field();
        let cw = code.encode(&(5..17).collect::<Vec<_>>()).unwrap();
        let session = code.repair_session(0, tree.helpers()).unwrap();
        let rs = RsCodec::new(f, 3, tenth()).unwrap();
        let set = [1usize, 3, 4];
        let enc_of = |hs: &[usize]| -> Vec<Symbol> {
            let shares = hs.iter().map(|&h| (h, session.helper_share(h, cw.column(h)).unwrap())).collect();
            let xi = IpMessage::Raw(shares).contribution(session.as_ref(), f, 3).unwrap();
            rs.encode(&xi).unwrap()
        };
        for (i, &h) in set.iter().enumerate() {
            let rest: Vec<usize> = set.iter().copied().filter(|&x| x != h).collect();
            let share = session.helper_share(h, cw.column(h)).unwrap();
            let lhs = enc_of(&set);
            let rhs = f.add_vec(&encoded_contribution(&rs, session.as_ref(), f, h, share).unwrap(), &enc_of(&rest));
            assert_eq!(lhs, rhs, "helper {i}");
        }
    }
}
