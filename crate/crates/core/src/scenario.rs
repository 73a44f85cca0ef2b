//! Large-network scenarios with all-equal amplification and their asymptotic
//! rate expressions.
//!
//! In every scenario the ceiling `β_max` is set directly from the total relay
//! power (`β_max² = M^u Q` when the total grows as `M^{u+1} Q`, `β_max² = Q/M`
//! when it is fixed at `Q`) instead of being derived from per-relay budgets.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::{build_type_a, build_type_b, NodeId, PowerBudget, RelayNetwork, TopologyGains};
use crate::optimize::type_a_beta_opt;
use crate::spectral::awgn_rate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Type A, unity gains, total relay power `M^{u+1} Q`.
    TypeAUnityGrowing,
    /// Type A, unity gains, total relay power `Q`.
    TypeAUnityConstPower,
    /// Type A, gains drawn from a bounded interval, total relay power `M^{u+1} Q`.
    TypeABounded,
    /// Type B, unity gains, total relay power `Q`.
    TypeBUnityConstPower,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::TypeAUnityGrowing,
        Scenario::TypeAUnityConstPower,
        Scenario::TypeABounded,
        Scenario::TypeBUnityConstPower,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Scenario::TypeAUnityGrowing => "typeA_unity_growing",
            Scenario::TypeAUnityConstPower => "typeA_unity_const_power",
            Scenario::TypeABounded => "typeA_bounded",
            Scenario::TypeBUnityConstPower => "typeB_unity_const_power",
        }
    }

    /// Short command-line spelling.
    pub fn alias(self) -> &'static str {
        match self {
            Scenario::TypeAUnityGrowing => "typeA-growing",
            Scenario::TypeAUnityConstPower => "typeA-const-power",
            Scenario::TypeABounded => "typeA-bounded",
            Scenario::TypeBUnityConstPower => "typeB-const-power",
        }
    }

    fn growing(self) -> bool {
        matches!(self, Scenario::TypeAUnityGrowing | Scenario::TypeABounded)
    }

    pub fn beta_max(self, m: usize, params: &ScenarioParams) -> f64 {
        let m = m as f64;
        if self.growing() {
            (m.powf(params.u) * params.q).sqrt()
        } else {
            (params.q / m).sqrt()
        }
    }

    /// Per-relay power: the total divided evenly.
    pub fn relay_power(self, m: usize, params: &ScenarioParams) -> f64 {
        let m = m as f64;
        if self.growing() {
            m.powf(params.u) * params.q
        } else {
            params.q / m
        }
    }

    pub fn network(self, m: usize, params: &ScenarioParams, source_power: f64, noise_variance: f64) -> Result<RelayNetwork> {
        params.check(self)?;
        let powers = PowerBudget::shared(source_power, self.relay_power(m, params), noise_variance);
        match self {
            Scenario::TypeAUnityGrowing | Scenario::TypeAUnityConstPower => {
                build_type_a(m, &TopologyGains::unity(m), &powers)
            }
            Scenario::TypeABounded => {
                let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
                let (lo, hi) = params.gain_range;
                build_type_a(m, &TopologyGains::sampled(m, lo, hi, &mut rng), &powers)
            }
            Scenario::TypeBUnityConstPower => build_type_b(m, &TopologyGains::unity(m), &powers),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.tag() == s || sc.alias() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioParams {
    /// Power constant `Q`.
    pub q: f64,
    /// Growth exponent `u` of the total relay power.
    pub u: f64,
    /// Sampling interval for [`Scenario::TypeABounded`].
    pub gain_range: (f64, f64),
    pub seed: u64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            q: 1.0,
            u: 1.0,
            gain_range: (1.0, 2.0),
            seed: 0,
        }
    }
}

impl ScenarioParams {
    fn check(&self, scenario: Scenario) -> Result<()> {
        if !(self.q.is_finite() && self.q > 0.0) {
            return Err(Error::validation("Q", "must be positive"));
        }
        if scenario.growing() && !(self.u.is_finite() && self.u > 0.0) {
            return Err(Error::validation("u", "must be positive"));
        }
        if scenario == Scenario::TypeABounded {
            let (lo, hi) = self.gain_range;
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return Err(Error::validation("gain_range", "must satisfy 0 < lo <= hi"));
            }
        }
        Ok(())
    }
}

/// Gain extrema of a Type A network.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundedGainSummary {
    /// `max{h_st, h_s1, …, h_sM}`
    pub h_s_max: f64,
    /// `min_i h_it`
    pub h_min: f64,
    /// `max_i h_it`
    pub h_max: f64,
    /// Unconstrained common-β optimum.
    pub beta_opt: f64,
}

impl BoundedGainSummary {
    pub fn from_network(net: &RelayNetwork) -> Result<Self> {
        let beta_opt = type_a_beta_opt(net)?;
        let mut h_s_max = net.direct_gain();
        let (mut h_min, mut h_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 1..=net.relays() {
            h_s_max = h_s_max.max(net.gain(NodeId::Source, NodeId::Relay(i)));
            let h = net.gain(NodeId::Relay(i), NodeId::Destination);
            h_min = h_min.min(h);
            h_max = h_max.max(h);
        }
        Ok(BoundedGainSummary { h_s_max, h_min, h_max, beta_opt })
    }
}

/// Type A, unity gains, ceiling `β_max`.
pub fn growing_unity_rate(m: usize, snr: f64, beta_max: f64) -> f64 {
    let m = m as f64;
    if beta_max >= 1.0 {
        awgn_rate(snr * (1.0 + m))
    } else {
        awgn_rate(snr * (m + 2.0 / beta_max))
    }
}

/// Type A, unity gains, fixed total relay power `Q`.
pub fn const_power_type_a_rate(m: usize, snr: f64, q: f64) -> f64 {
    awgn_rate(snr * q * m as f64 / (1.0 + q))
}

/// Lower bound for Type A with bounded gains.
pub fn bounded_gain_lower_bound(m: usize, snr: f64, beta_max: f64, g: &BoundedGainSummary) -> f64 {
    let lead = if beta_max >= g.beta_opt { 1.0 } else { 1.0 / beta_max };
    awgn_rate(snr * (m as f64 * g.h_min + lead) * g.h_s_max * g.h_s_max * g.h_min / g.h_max)
}

/// SNR argument of the Type B constant-power expression; needs `M > Q`.
pub fn const_power_type_b_argument(m: usize, q: f64) -> Result<f64> {
    let m = m as f64;
    let r = (q / m).sqrt();
    if r >= 1.0 {
        return Err(Error::Unsupported(format!(
            "Type B constant-power expression needs M > Q (M = {m}, Q = {q})"
        )));
    }
    Ok(q * m / (1.0 + q) * (1.0 + r) / (1.0 - r))
}

/// The scenario's asymptotic rate expression (a lower bound for
/// [`Scenario::TypeABounded`]), in bits per channel use.
pub fn scenario_rate(
    scenario: Scenario,
    m: usize,
    params: &ScenarioParams,
    source_power: f64,
    noise_variance: f64,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::NoRelays);
    }
    params.check(scenario)?;
    let snr = source_power / noise_variance;
    match scenario {
        Scenario::TypeAUnityGrowing => Ok(growing_unity_rate(m, snr, scenario.beta_max(m, params))),
        Scenario::TypeAUnityConstPower => Ok(const_power_type_a_rate(m, snr, params.q)),
        Scenario::TypeABounded => {
            let net = scenario.network(m, params, source_power, noise_variance)?;
            let g = BoundedGainSummary::from_network(&net)?;
            Ok(bounded_gain_lower_bound(m, snr, scenario.beta_max(m, params), &g))
        }
        Scenario::TypeBUnityConstPower => Ok(awgn_rate(snr * const_power_type_b_argument(m, params.q)?)),
    }
}
