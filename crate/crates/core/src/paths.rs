//! Delay taps, residual relay power and amplification feasibility.
//!
//! Every relay forwards only the part of its input that it has not forwarded
//! before, so signals travel along simple paths: no node is visited twice. A
//! path through `d` relays delays its signal by `d` channel uses and scales it
//! by the product of its link gains and of the `β` of every relay it crosses.
//!
//! Two engines compute the same quantities:
//!
//! * a depth-first walk over simple paths, valid for any topology and
//!   exponential in the worst case;
//! * closed recurrences for networks whose relay-relay links only join
//!   consecutive relays (Type A and Type B), linear in `M` for aggregates and
//!   residual power.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::network::{NodeId, RelayNetwork, Topology};

/// Relative slack allowed when checking a power constraint.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Per-relay amplification factors `β_1..β_M`.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplificationVector(Vec<f64>);

impl AmplificationVector {
    pub fn new(beta: Vec<f64>) -> Self {
        AmplificationVector(beta)
    }

    pub fn zeros(m: usize) -> Self {
        AmplificationVector(vec![0.0; m])
    }

    pub fn constant(m: usize, beta: f64) -> Self {
        AmplificationVector(vec![beta; m])
    }

    /// Checks the length against the network.
    pub fn for_network(net: &RelayNetwork, beta: Vec<f64>) -> Result<Self> {
        if beta.len() != net.relays() {
            return Err(Error::BetaLength {
                expected: net.relays(),
                got: beta.len(),
            });
        }
        Ok(AmplificationVector(beta))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    /// `β_i` for 1-based relay `i`.
    pub fn get(&self, i: usize) -> f64 {
        self.0[i - 1]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        AmplificationVector(self.0.iter().map(|b| b * factor).collect())
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Modified channel gains of one origin, indexed by delay.
#[derive(Clone, Debug, PartialEq)]
pub struct DelayTaps {
    pub origin: NodeId,
    pub taps: Vec<f64>,
}

impl DelayTaps {
    /// Longest delay with a path behind it.
    pub fn max_delay(&self) -> usize {
        self.taps.len().saturating_sub(1)
    }

    /// `Σ_d h_d`, the transfer function at zero frequency.
    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// `Σ_d h_d²`.
    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|h| h * h).sum()
    }
}

/// Zero-frequency gains: `Σ_d h_d` for the source and `Σ_d h_{m,d}` per relay.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregates {
    pub signal: f64,
    pub noise: Vec<f64>,
}

impl Aggregates {
    /// `(Σ_d h_d)² / (1 + Σ_m (Σ_d h_{m,d})²)`.
    pub fn snr_ratio(&self) -> f64 {
        let noise: f64 = 1.0 + self.noise.iter().map(|g| g * g).sum::<f64>();
        self.signal * self.signal / noise
    }
}

/// Feasibility of an amplification vector with per-relay slack
/// `P_i − β_i² P'_{R,i}(β)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub slack: Vec<f64>,
}

fn accumulate(out: &mut Vec<f64>, delay: usize, value: f64) {
    if out.len() <= delay {
        out.resize(delay + 1, 0.0);
    }
    out[delay] += value;
}

fn check_beta(net: &RelayNetwork, beta: &AmplificationVector) {
    assert_eq!(
        beta.len(),
        net.relays(),
        "amplification vector length must equal the relay count"
    );
}

fn check_relay(net: &RelayNetwork, i: usize) -> Result<()> {
    if i == 0 || i > net.relays() {
        return Err(Error::RelayIndex {
            index: i,
            relays: net.relays(),
        });
    }
    Ok(())
}

/// Iterative depth-first enumeration of simple relay paths.
///
/// Buffers are reused across walks so that visiting every relay of a large
/// sparse network stays linear.
struct PathWalker {
    on_path: Vec<bool>,
    stack: Vec<(usize, f64, usize, usize)>,
}

impl PathWalker {
    fn new(m: usize) -> Self {
        PathWalker {
            on_path: vec![false; m],
            stack: Vec::new(),
        }
    }

    /// Calls `visit(node, amplitude, depth)` for every simple path that starts
    /// at `start` and avoids `blocked`. Stepping onto a relay multiplies the
    /// amplitude by the link gain and that relay's `β`.
    fn walk(
        &mut self,
        net: &RelayNetwork,
        beta: &[f64],
        start: usize,
        start_amp: f64,
        start_depth: usize,
        blocked: Option<usize>,
        mut visit: impl FnMut(usize, f64, usize),
    ) {
        let adj = net.adjacency();
        self.on_path[start] = true;
        visit(start, start_amp, start_depth);
        self.stack.push((start, start_amp, start_depth, 0));
        while let Some(top) = self.stack.last_mut() {
            let (node, amp, depth, next_idx) = *top;
            if next_idx < adj[node].len() {
                top.3 += 1;
                let (next, h) = adj[node][next_idx];
                if self.on_path[next] || Some(next) == blocked {
                    continue;
                }
                let a = amp * h * beta[next];
                self.on_path[next] = true;
                visit(next, a, depth + 1);
                self.stack.push((next, a, depth + 1, 0));
            } else {
                self.on_path[node] = false;
                self.stack.pop();
            }
        }
    }
}

/// Source taps `h_0..h_{D^s}`: `h_0 = h_st`, and `h_d` sums, over every simple
/// path `s → i_1 → … → i_d → t`, the product of link gains and relay `β`s.
pub fn source_taps(net: &RelayNetwork, beta: &AmplificationVector) -> DelayTaps {
    check_beta(net, beta);
    let b = beta.as_slice();
    let dest = net.dest_links();
    let mut taps = vec![net.direct_gain()];
    let mut walker = PathWalker::new(net.relays());
    for (k, g) in net.source_links().iter().enumerate() {
        let Some(g) = *g else { continue };
        walker.walk(net, b, k, g * b[k], 1, None, |node, amp, depth| {
            if let Some(h) = dest[node] {
                accumulate(&mut taps, depth, amp * h);
            }
        });
    }
    DelayTaps {
        origin: NodeId::Source,
        taps,
    }
}

/// Taps `h_{m,0..D^m}` carrying relay `m`'s receiver noise to the destination.
/// `h_{m,0} = 0`; `h_{m,d}` sums over simple paths `m → … → t` through `d`
/// relays counting `m`.
pub fn relay_noise_taps(net: &RelayNetwork, beta: &AmplificationVector, m: usize) -> Result<DelayTaps> {
    check_beta(net, beta);
    check_relay(net, m)?;
    let mut walker = PathWalker::new(net.relays());
    Ok(noise_taps_with(&mut walker, net, beta.as_slice(), m - 1))
}

/// Noise taps for every relay, in relay order.
pub fn all_noise_taps(net: &RelayNetwork, beta: &AmplificationVector) -> Vec<DelayTaps> {
    check_beta(net, beta);
    let mut walker = PathWalker::new(net.relays());
    (0..net.relays())
        .map(|m0| noise_taps_with(&mut walker, net, beta.as_slice(), m0))
        .collect()
}

fn noise_taps_with(walker: &mut PathWalker, net: &RelayNetwork, b: &[f64], m0: usize) -> DelayTaps {
    let dest = net.dest_links();
    let mut taps = vec![0.0];
    walker.walk(net, b, m0, b[m0], 1, None, |node, amp, depth| {
        if let Some(h) = dest[node] {
            accumulate(&mut taps, depth, amp * h);
        }
    });
    DelayTaps {
        origin: NodeId::Relay(m0 + 1),
        taps,
    }
}

/// Contributions reaching relay `i` from `origin` before echo subtraction
/// leaves only new information: simple paths `origin → … → i` that do not
/// cross `i` earlier, with `β` applied at every relay except `i`.
///
/// For the source, `d = 0` is the direct link `s → i`.
pub fn incoming_taps(
    net: &RelayNetwork,
    beta: &AmplificationVector,
    i: usize,
    origin: NodeId,
) -> Result<DelayTaps> {
    check_beta(net, beta);
    check_relay(net, i)?;
    let b = beta.as_slice();
    let target = i - 1;
    let mut taps = Vec::new();
    let mut walker = PathWalker::new(net.relays());
    let exit = |taps: &mut Vec<f64>, node: usize, amp: f64, depth: usize| {
        if let Some(h) = net.relay_link(node, target) {
            accumulate(taps, depth, amp * h);
        }
    };
    match origin {
        NodeId::Destination => {
            return Err(Error::Unsupported(
                "the destination does not transmit; it is never an origin".into(),
            ))
        }
        NodeId::Relay(m) if m == i => return Err(Error::OwnEcho(i)),
        NodeId::Relay(m) => {
            check_relay(net, m)?;
            taps.push(0.0);
            walker.walk(net, b, m - 1, b[m - 1], 1, Some(target), |node, amp, depth| {
                exit(&mut taps, node, amp, depth)
            });
        }
        NodeId::Source => {
            taps.push(net.source_links()[target].unwrap_or(0.0));
            for (k, g) in net.source_links().iter().enumerate() {
                let Some(g) = *g else { continue };
                if k == target {
                    continue;
                }
                walker.walk(net, b, k, g * b[k], 1, Some(target), |node, amp, depth| {
                    exit(&mut taps, node, amp, depth)
                });
            }
        }
    }
    Ok(DelayTaps { origin, taps })
}

/// Power `P'_{R,i}` of relay `i`'s residual signal:
/// `P_s Σ_d g_{s,d}² + σ² Σ_{m≠i} Σ_d g_{m,d}² + σ²`, where `g` are the
/// incoming taps. Depends on `β_{−i}` only.
///
/// # Panics
///
/// If `i` is not a relay index.
pub fn residual_power(net: &RelayNetwork, beta: &AmplificationVector, i: usize) -> f64 {
    check_beta(net, beta);
    assert!(i >= 1 && i <= net.relays(), "relay index {i} out of range");
    match net.topology() {
        Topology::Parallel | Topology::Chain => chain_residual(net, beta.as_slice(), i - 1),
        Topology::General => {
            let mut walker = PathWalker::new(net.relays());
            general_residual(&mut walker, net, beta.as_slice(), i - 1)
        }
    }
}

/// Walks backwards from the receiving relay; every prefix is a distinct
/// `(origin, delay)` path into it.
fn general_residual(walker: &mut PathWalker, net: &RelayNetwork, b: &[f64], target: usize) -> f64 {
    let src_links = net.source_links();
    let mut source = Vec::new();
    let mut relay: HashMap<(usize, usize), f64> = HashMap::new();
    walker.walk(net, b, target, 1.0, 0, None, |node, amp, depth| {
        if let Some(g) = src_links[node] {
            accumulate(&mut source, depth, amp * g);
        }
        if depth > 0 {
            *relay.entry((node, depth)).or_insert(0.0) += amp;
        }
    });
    let sq = |v: &f64| v * v;
    net.source_power() * source.iter().map(sq).sum::<f64>()
        + net.noise_variance() * (relay.values().map(sq).sum::<f64>() + 1.0)
}

fn chain_residual(net: &RelayNetwork, b: &[f64], i: usize) -> f64 {
    let m = net.relays();
    let chain = net.chain_links();
    let src = net.source_links();
    let s = |j: usize| src[j].unwrap_or(0.0);

    let mut source_energy = s(i).powi(2);
    let mut noise_energy = 0.0;
    let (mut left, mut right) = (Some(1.0), Some(1.0));
    let mut d = 0;
    while left.is_some() || right.is_some() {
        d += 1;
        let mut at_delay = 0.0;
        if let Some(amp) = left {
            left = if d <= i {
                let j = i - d;
                chain[j].map(|c| amp * c * b[j])
            } else {
                None
            };
            if let Some(a) = left {
                noise_energy += a * a;
                at_delay += a * s(i - d);
            }
        }
        if let Some(amp) = right {
            right = if i + d < m {
                let j = i + d;
                chain[j - 1].map(|c| amp * c * b[j])
            } else {
                None
            };
            if let Some(a) = right {
                noise_energy += a * a;
                at_delay += a * s(i + d);
            }
        }
        source_energy += at_delay * at_delay;
    }
    net.source_power() * source_energy + net.noise_variance() * (noise_energy + 1.0)
}

/// `β_{i,max} = √(P_i / P'_{R,i})`.
pub fn beta_max(net: &RelayNetwork, beta: &AmplificationVector, i: usize) -> f64 {
    (net.relay_power(i) / residual_power(net, beta, i)).sqrt()
}

/// Checks `β_i² P'_{R,i}(β) ≤ P_i` for every relay.
pub fn is_feasible(net: &RelayNetwork, beta: &AmplificationVector) -> Feasibility {
    check_beta(net, beta);
    let b = beta.as_slice();
    let mut walker = PathWalker::new(net.relays());
    let slack: Vec<f64> = (0..net.relays())
        .map(|i| {
            let residual = match net.topology() {
                Topology::General => general_residual(&mut walker, net, b, i),
                _ => chain_residual(net, b, i),
            };
            net.relay_powers()[i] - b[i] * b[i] * residual
        })
        .collect();
    let feasible = slack
        .iter()
        .zip(net.relay_powers())
        .all(|(s, p)| *s >= -FEASIBILITY_TOL * (1.0 + p));
    Feasibility { feasible, slack }
}

/// Largest `β ≥ 0` for which the constant vector `(β, …, β)` is feasible,
/// by bisection. The constraint set in the common `β` is an interval when
/// all gains are non-negative; otherwise the result is the first feasibility
/// boundary above zero.
pub fn max_equal_beta(net: &RelayNetwork) -> f64 {
    let m = net.relays();
    if m == 0 {
        return 0.0;
    }
    // P'_{R,i} ≥ σ², so β² ≤ P_i/σ² is necessary for every relay.
    let mut hi = net
        .relay_powers()
        .iter()
        .map(|p| (p / net.noise_variance()).sqrt())
        .fold(f64::INFINITY, f64::min);
    if hi == 0.0 {
        return 0.0;
    }
    let feasible = |b: f64| {
        is_feasible(net, &AmplificationVector::constant(m, b))
            .slack
            .iter()
            .all(|s| *s >= 0.0)
    };
    if feasible(hi) {
        return hi;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `Σ_d h_d` and `Σ_d h_{m,d}` for every relay.
///
/// Linear in `M` for Type A / Type B style networks, which keeps million-relay
/// instantaneous rates cheap.
pub fn aggregate_gains(net: &RelayNetwork, beta: &AmplificationVector) -> Aggregates {
    check_beta(net, beta);
    match net.topology() {
        Topology::Parallel | Topology::Chain => chain_aggregates(net, beta.as_slice()),
        Topology::General => Aggregates {
            signal: source_taps(net, beta).sum(),
            noise: all_noise_taps(net, beta).iter().map(DelayTaps::sum).collect(),
        },
    }
}

fn chain_aggregates(net: &RelayNetwork, b: &[f64]) -> Aggregates {
    let m = net.relays();
    let c = |j: usize| net.chain_links()[j].unwrap_or(0.0);
    let s: Vec<f64> = net.source_links().iter().map(|g| g.unwrap_or(0.0)).collect();
    let t: Vec<f64> = net.dest_links().iter().map(|g| g.unwrap_or(0.0)).collect();

    // Paths entering at some relay and running right (or left) to relay j.
    let mut enter_right = vec![0.0; m];
    let mut enter_left = vec![0.0; m];
    // Paths leaving relay j and running right (or left) before exiting to t.
    let mut exit_right = vec![0.0; m];
    let mut exit_left = vec![0.0; m];
    for j in 0..m {
        let carried = if j > 0 { c(j - 1) * enter_right[j - 1] } else { 0.0 };
        enter_right[j] = b[j] * (s[j] + carried);
        let carried = if j > 0 { c(j - 1) * exit_left[j - 1] } else { 0.0 };
        exit_left[j] = b[j] * (t[j] + carried);
    }
    for j in (0..m).rev() {
        let carried = if j + 1 < m { c(j) * enter_left[j + 1] } else { 0.0 };
        enter_left[j] = b[j] * (s[j] + carried);
        let carried = if j + 1 < m { c(j) * exit_right[j + 1] } else { 0.0 };
        exit_right[j] = b[j] * (t[j] + carried);
    }

    let signal = net.direct_gain()
        + (0..m)
            .map(|j| t[j] * (enter_right[j] + enter_left[j] - b[j] * s[j]))
            .sum::<f64>();
    let noise = (0..m)
        .map(|j| exit_right[j] + exit_left[j] - b[j] * t[j])
        .collect();
    Aggregates { signal, noise }
}

/// `(Σ_d h_d)² / (1 + Σ_m (Σ_d h_{m,d})²)` without materializing per-relay
/// aggregates; `beta(j)` gives the 0-based relay's amplification.
pub(crate) fn snr_ratio_with(net: &RelayNetwork, beta: impl Fn(usize) -> f64) -> f64 {
    if net.topology() == Topology::General {
        let b = AmplificationVector::new((0..net.relays()).map(&beta).collect());
        return aggregate_gains(net, &b).snr_ratio();
    }
    let m = net.relays();
    let s = |j: usize| net.source_links()[j].unwrap_or(0.0);
    let t = |j: usize| net.dest_links()[j].unwrap_or(0.0);
    if net.topology() == Topology::Parallel {
        let (mut signal, mut noise) = (net.direct_gain(), 1.0);
        for j in 0..m {
            let g = beta(j) * t(j);
            signal += s(j) * g;
            noise += g * g;
        }
        return signal * signal / noise;
    }
    let chain = net.chain_links();
    let c = |j: usize| chain.get(j).copied().flatten().unwrap_or(0.0);

    let mut enter_right = vec![0.0; m];
    let mut exit_left = vec![0.0; m];
    for j in 0..m {
        let bj = beta(j);
        let (er, el) = if j > 0 { (c(j - 1) * enter_right[j - 1], c(j - 1) * exit_left[j - 1]) } else { (0.0, 0.0) };
        enter_right[j] = bj * (s(j) + er);
        exit_left[j] = bj * (t(j) + el);
    }
    let (mut signal, mut noise) = (net.direct_gain(), 1.0);
    let (mut enter_left, mut exit_right) = (0.0, 0.0);
    for j in (0..m).rev() {
        let bj = beta(j);
        let link = if j + 1 < m { c(j) } else { 0.0 };
        enter_left = bj * (s(j) + link * enter_left);
        exit_right = bj * (t(j) + link * exit_right);
        signal += t(j) * (enter_right[j] + enter_left - bj * s(j));
        let g = exit_right + exit_left[j] - bj * t(j);
        noise += g * g;
    }
    signal * signal / noise
}
