//! Test oracles shared by the integration targets.
#![allow(dead_code)]

use afrelay::network::Edge;
use afrelay::{AmplificationVector, NodeId, PowerBudget, RelayNetwork};
use rand::Rng;

/// Random graph on `m` relays: each possible link is present with
/// probability `density`, gains uniform in `[lo, hi]`.
pub fn random_network<R: Rng>(rng: &mut R, m: usize, density: f64, lo: f64, hi: f64) -> RelayNetwork {
    let mut nodes = vec![NodeId::Source, NodeId::Destination];
    nodes.extend((1..=m).map(NodeId::Relay));
    let mut edges = Vec::new();
    for (k, &a) in nodes.iter().enumerate() {
        for &b in &nodes[k + 1..] {
            if rng.gen_bool(density) {
                edges.push(Edge { a, b, gain: rng.gen_range(lo..=hi) });
            }
        }
    }
    let powers = PowerBudget::per_relay(
        rng.gen_range(0.5..5.0),
        (0..m).map(|_| rng.gen_range(0.1..5.0)).collect(),
        rng.gen_range(0.1..2.0),
    );
    RelayNetwork::from_edges(m, edges, &powers).expect("valid random network")
}

fn extend(net: &RelayNetwork, beta: &[f64], at: usize, amp: f64, depth: usize, used: &mut Vec<bool>, taps: &mut Vec<f64>) {
    if let Some(g) = net.link(NodeId::Relay(at), NodeId::Destination) {
        if taps.len() <= depth {
            taps.resize(depth + 1, 0.0);
        }
        taps[depth] += amp * g;
    }
    for next in 1..=net.relays() {
        if used[next] {
            continue;
        }
        if let Some(g) = net.link(NodeId::Relay(at), NodeId::Relay(next)) {
            used[next] = true;
            extend(net, beta, next, amp * g * beta[next - 1], depth + 1, used, taps);
            used[next] = false;
        }
    }
}

/// Source taps by explicit enumeration of every simple `s → t` path.
pub fn brute_source_taps(net: &RelayNetwork, beta: &AmplificationVector) -> Vec<f64> {
    let b = beta.as_slice();
    let mut taps = vec![net.link(NodeId::Source, NodeId::Destination).unwrap_or(0.0)];
    let mut used = vec![false; net.relays() + 1];
    for first in 1..=net.relays() {
        if let Some(g) = net.link(NodeId::Source, NodeId::Relay(first)) {
            used[first] = true;
            extend(net, b, first, g * b[first - 1], 1, &mut used, &mut taps);
            used[first] = false;
        }
    }
    taps
}

/// Noise taps of relay `m` by explicit enumeration of every simple `m → t` path.
pub fn brute_noise_taps(net: &RelayNetwork, beta: &AmplificationVector, m: usize) -> Vec<f64> {
    let b = beta.as_slice();
    let mut taps = vec![0.0];
    let mut used = vec![false; net.relays() + 1];
    used[m] = true;
    extend(net, b, m, b[m - 1], 1, &mut used, &mut taps);
    taps
}

pub fn max_rel_diff(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let at = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
    (0..a.len().max(b.len()))
        .map(|k| {
            let (x, y) = (at(a, k), at(b, k));
            (x - y).abs() / x.abs().max(y.abs()).max(floor)
        })
        .fold(0.0, f64::max)
}

/// Residual received power `P'_{R,i}` from explicit enumeration of every
/// simple path ending at relay `i` (β applied at every relay except `i`).
pub fn brute_residual_power(net: &RelayNetwork, beta: &AmplificationVector, i: usize) -> f64 {
    fn walk(net: &RelayNetwork, b: &[f64], target: usize, at: usize, amp: f64, depth: usize, used: &mut Vec<bool>, taps: &mut Vec<f64>) {
        if let Some(g) = net.link(NodeId::Relay(at), NodeId::Relay(target)) {
            if taps.len() <= depth {
                taps.resize(depth + 1, 0.0);
            }
            taps[depth] += amp * g;
        }
        for next in 1..=net.relays() {
            if used[next] || next == target {
                continue;
            }
            if let Some(g) = net.link(NodeId::Relay(at), NodeId::Relay(next)) {
                used[next] = true;
                walk(net, b, target, next, amp * g * b[next - 1], depth + 1, used, taps);
                used[next] = false;
            }
        }
    }
    let b = beta.as_slice();
    let m = net.relays();
    let mut used = vec![false; m + 1];
    let mut source = vec![net.link(NodeId::Source, NodeId::Relay(i)).unwrap_or(0.0)];
    for first in (1..=m).filter(|&j| j != i) {
        if let Some(g) = net.link(NodeId::Source, NodeId::Relay(first)) {
            used[first] = true;
            walk(net, b, i, first, g * b[first - 1], 1, &mut used, &mut source);
            used[first] = false;
        }
    }
    let mut noise_energy = 0.0;
    for origin in (1..=m).filter(|&j| j != i) {
        let mut taps = vec![0.0];
        used[origin] = true;
        walk(net, b, i, origin, b[origin - 1], 1, &mut used, &mut taps);
        used[origin] = false;
        noise_energy += taps.iter().map(|h| h * h).sum::<f64>();
    }
    let source_energy: f64 = source.iter().map(|h| h * h).sum();
    net.source_power() * source_energy + net.noise_variance() * (noise_energy + 1.0)
}
