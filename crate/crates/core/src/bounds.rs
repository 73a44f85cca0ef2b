//! Broadcast and multiple-access cut-set bounds, gap diagnostics and the
//! asymptotic sweep.
//!
//! Both bounds use `log₂(1 + ·)` without the factor ½ carried by the
//! achievable rates, so `C_BC − 2·I_AF` is the natural gap.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{NodeId, RelayNetwork};
use crate::optimize::optimize_equal_beta;
use crate::scenario::{scenario_rate, BoundedGainSummary, Scenario, ScenarioParams};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutSetBounds {
    pub c_bc: f64,
    pub c_mac: f64,
    pub upper: f64,
}

/// `log₂[1 + (P_s/σ²)(h_st² + Σ_{i∈S_s} h_si²)]`
pub fn broadcast_bound(net: &RelayNetwork) -> f64 {
    let h = net.direct_gain();
    let spread: f64 = net
        .source_neighbors()
        .into_iter()
        .map(|i| net.gain(NodeId::Source, NodeId::Relay(i)).powi(2))
        .sum();
    (net.snr() * (h * h + spread)).ln_1p() / std::f64::consts::LN_2
}

/// `log₂[1 + ((P_s + Σ_{i∈S_t} P_i)/σ²)(h_st² + Σ_{i∈S_t} h_it²)]`
pub fn mac_bound(net: &RelayNetwork) -> f64 {
    let h = net.direct_gain();
    let mut power = net.source_power();
    let mut collect = h * h;
    for i in net.dest_neighbors() {
        power += net.relay_power(i);
        collect += net.gain(NodeId::Relay(i), NodeId::Destination).powi(2);
    }
    (power / net.noise_variance() * collect).ln_1p() / std::f64::consts::LN_2
}

pub fn cutset_upper(net: &RelayNetwork) -> CutSetBounds {
    let c_bc = broadcast_bound(net);
    let c_mac = mac_bound(net);
    CutSetBounds { c_bc, c_mac, upper: c_bc.min(c_mac) }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapReport {
    /// `C_BC − 2·I_AF`
    pub gap_bc: f64,
    /// Large-`M` limit of `gap_bc` for the scenario, where one is known.
    pub gap_limit: Option<f64>,
    /// `2^{C_MAC − C_BC}`
    pub mac_minus_bc: f64,
}

/// Limit of `C_BC − 2·I_AF` as `M → ∞`.
///
/// With a fixed total relay power the limit obtained by substituting the
/// asymptotic rate into `C_BC` is `log₂(1 + 1/Q)`; that is the value reported.
/// Bounded gains give an upper limit `½ log₂(h_max/h_min²)` rather than a limit.
pub fn gap_limit(net: &RelayNetwork, scenario: Scenario, params: &ScenarioParams) -> Option<f64> {
    match scenario {
        Scenario::TypeAUnityGrowing => (scenario.beta_max(net.relays(), params) >= 1.0).then_some(0.0),
        Scenario::TypeAUnityConstPower | Scenario::TypeBUnityConstPower => Some((1.0 / params.q).ln_1p() / std::f64::consts::LN_2),
        Scenario::TypeABounded => {
            let g = BoundedGainSummary::from_network(net).ok()?;
            Some(0.5 * (g.h_max / (g.h_min * g.h_min)).log2())
        }
    }
}

pub fn gap_report(net: &RelayNetwork, i_af: f64, scenario: Option<Scenario>, params: &ScenarioParams) -> GapReport {
    let b = cutset_upper(net);
    GapReport {
        gap_bc: b.c_bc - 2.0 * i_af,
        gap_limit: scenario.and_then(|s| gap_limit(net, s, params)),
        mac_minus_bc: (b.c_mac - b.c_bc).exp2(),
    }
}

/// One line of an asymptotic sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub m: usize,
    /// Common amplification that maximizes the instantaneous rate.
    pub beta: f64,
    pub rate_bits: f64,
    pub c_bc: f64,
    pub c_mac: f64,
    pub gap_bc: f64,
    /// The scenario's asymptotic expression at this `M`.
    pub formula: f64,
}

pub const SWEEP_HEADER: &str = "M,beta,rate_bits,c_bc,c_mac,gap_bc,formula";

/// Scenario networks are stored in `O(M)` and evaluated by the linear-time
/// chain recurrences; this caps memory.
pub const MAX_SWEEP_RELAYS: usize = 10_000_000;

pub fn sweep_row(scenario: Scenario, m: usize, params: &ScenarioParams, source_power: f64, noise_variance: f64) -> Result<SweepRow> {
    if m > MAX_SWEEP_RELAYS {
        return Err(Error::Unsupported(format!(
            "M = {m} exceeds the sweep limit of {MAX_SWEEP_RELAYS} relays"
        )));
    }
    let net = scenario.network(m, params, source_power, noise_variance)?;
    let opt = optimize_equal_beta(&net, scenario.beta_max(m, params));
    let b = cutset_upper(&net);
    Ok(SweepRow {
        m,
        beta: opt.beta_star.get(1),
        rate_bits: opt.rate,
        c_bc: b.c_bc,
        c_mac: b.c_mac,
        gap_bc: b.c_bc - 2.0 * opt.rate,
        formula: scenario_rate(scenario, m, params, source_power, noise_variance)?,
    })
}

/// Rows for a strictly increasing list of relay counts, computed in parallel
/// and returned in input order.
pub fn asymptotic_sweep(
    scenario: Scenario,
    m_list: &[usize],
    params: &ScenarioParams,
    source_power: f64,
    noise_variance: f64,
) -> Result<Vec<SweepRow>> {
    if m_list.is_empty() {
        return Err(Error::List("empty relay-count list".into()));
    }
    if m_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::List("relay counts must be strictly increasing".into()));
    }
    m_list
        .par_iter()
        .map(|&m| sweep_row(scenario, m, params, source_power, noise_variance))
        .collect()
}

/// Writes rows as CSV; floats use the shortest representation that parses
/// back to the same value.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.m, r.beta, r.rate_bits, r.c_bc, r.c_mac, r.gap_bc, r.formula
        )?;
    }
    out.flush()
}
