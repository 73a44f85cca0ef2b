//! From delay taps to achievable rates.
//!
//! The source sees an ISI channel with colored noise. For i.i.d. Gaussian
//! input of power `P_s` its rate, in bits per channel use, is
//!
//! ```text
//! I = (1/2π) ∫_0^π log2[1 + (P_s/σ²) |H(λ)|² / (1 + Σ_m |H_m(λ)|²)] dλ
//! ```
//!
//! with `H` and `H_m` the transfer functions of the source and relay-noise
//! taps. Relays that forward without delay collapse the integrand to its
//! `λ = 0` value; a length-`N` circular channel gives the DFT-domain sum.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::network::RelayNetwork;
use crate::paths::{all_noise_taps, source_taps, AmplificationVector, DelayTaps};
use crate::quadrature::{integrate_adaptive, GaussLegendre};

/// Cosine-series coefficients of the signal (`a`) and total noise (`b`)
/// spectral densities: `|H(λ)|² = Σ a_k cos kλ`, `1 + Σ_m |H_m(λ)|² = Σ b_k cos kλ`.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicCoeffs {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// The same densities as polynomials in `x = cos λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerBasisCoeffs {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateMode {
    Integral,
    Instantaneous,
    FiniteN(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateResult {
    /// Bits per channel use.
    pub rate: f64,
    pub beta: AmplificationVector,
    pub mode: RateMode,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadConfig {
    /// Absolute tolerance on the rate, in bits.
    pub tol: f64,
    /// Gauss–Legendre points per panel.
    pub order: usize,
    pub max_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            tol: 1e-9,
            order: 16,
            max_panels: 1 << 20,
        }
    }
}

/// `c_0 = Σ h_j²`, `c_k = 2 Σ_j h_j h_{j+k}` for `k ≥ 1`.
pub fn autocorrelation_coeffs(taps: &[f64]) -> Vec<f64> {
    (0..taps.len().max(1))
        .map(|k| {
            let s: f64 = taps.iter().zip(taps.iter().skip(k)).map(|(x, y)| x * y).sum();
            if k == 0 {
                s
            } else {
                2.0 * s
            }
        })
        .collect()
}

pub fn harmonic_coeffs(signal: &DelayTaps, noise: &[DelayTaps]) -> HarmonicCoeffs {
    let a = autocorrelation_coeffs(&signal.taps);
    let mut b = vec![1.0];
    for n in noise {
        for (k, c) in autocorrelation_coeffs(&n.taps).into_iter().enumerate() {
            if b.len() <= k {
                b.resize(k + 1, 0.0);
            }
            b[k] += c;
        }
    }
    HarmonicCoeffs { a, b }
}

/// `Σ c_k cos kλ`.
pub fn cosine_series(coeffs: &[f64], lambda: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c * (k as f64 * lambda).cos())
        .sum()
}

/// `Σ c_k x^k` by Horner's rule.
pub fn power_series(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// `|Σ_j h_j e^{−ijλ}|²`, evaluated directly from the taps.
pub fn transfer_mag_sq(taps: &DelayTaps, lambda: f64) -> f64 {
    mag_sq(&taps.taps, lambda)
}

fn mag_sq(taps: &[f64], lambda: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (j, h) in taps.iter().enumerate() {
        if *h == 0.0 {
            continue;
        }
        let (s, c) = (j as f64 * lambda).sin_cos();
        re += h * c;
        im -= h * s;
    }
    re * re + im * im
}

/// Monomial coefficients of `Σ c_k T_k(x)`.
fn chebyshev_to_monomial(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    let mut out = vec![0.0; n.max(1)];
    // T_{k-1} and T_k as monomial coefficient vectors.
    let mut prev = vec![1.0];
    let mut cur = vec![0.0, 1.0];
    for (k, c) in coeffs.iter().enumerate() {
        let t = match k {
            0 => &prev,
            1 => &cur,
            _ => {
                let mut next = vec![0.0; k + 1];
                for (i, v) in cur.iter().enumerate() {
                    next[i + 1] += 2.0 * v;
                }
                for (i, v) in prev.iter().enumerate() {
                    next[i] -= v;
                }
                prev = std::mem::replace(&mut cur, next);
                &cur
            }
        };
        for (i, v) in t.iter().enumerate() {
            out[i] += c * v;
        }
    }
    out
}

pub fn chebyshev_power_basis(h: &HarmonicCoeffs) -> PowerBasisCoeffs {
    PowerBasisCoeffs {
        a: chebyshev_to_monomial(&h.a),
        b: chebyshev_to_monomial(&h.b),
    }
}

/// Taps of one amplification setting, ready for spectral evaluation.
#[derive(Clone, Debug)]
pub struct ChannelSpectrum {
    pub signal: DelayTaps,
    pub noise: Vec<DelayTaps>,
    pub snr: f64,
}

impl ChannelSpectrum {
    pub fn new(net: &RelayNetwork, beta: &AmplificationVector) -> Self {
        ChannelSpectrum {
            signal: source_taps(net, beta),
            noise: all_noise_taps(net, beta),
            snr: net.snr(),
        }
    }

    /// `log2[1 + snr |H(λ)|² / (1 + Σ_m |H_m(λ)|²)]`.
    pub fn log_term(&self, lambda: f64) -> f64 {
        let noise = 1.0 + self.noise.iter().map(|n| mag_sq(&n.taps, lambda)).sum::<f64>();
        (self.snr * mag_sq(&self.signal.taps, lambda) / noise).ln_1p() / std::f64::consts::LN_2
    }

    pub fn coeffs(&self) -> HarmonicCoeffs {
        harmonic_coeffs(&self.signal, &self.noise)
    }
}

/// Rate with unit-delay relays, by adaptive quadrature of the spectral
/// integrand over `[0, π]`.
pub fn rate_integral(net: &RelayNetwork, beta: &AmplificationVector, quad: &QuadConfig) -> Result<RateResult> {
    let spectrum = ChannelSpectrum::new(net, beta);
    let rate = integral_of(&spectrum, quad)?;
    Ok(RateResult {
        rate,
        beta: beta.clone(),
        mode: RateMode::Integral,
    })
}

pub(crate) fn integral_of(spectrum: &ChannelSpectrum, quad: &QuadConfig) -> Result<f64> {
    // Memoryless channels have a flat integrand.
    if spectrum.signal.taps.len() <= 1 && spectrum.noise.iter().all(|n| n.taps.len() <= 1) {
        return Ok(0.5 * spectrum.log_term(0.0));
    }
    let rule = GaussLegendre::new(quad.order);
    // The 1/2π prefactor is folded into the tolerance.
    let est = integrate_adaptive(&rule, 0.0, PI, quad.tol * 2.0 * PI, quad.max_panels, |l| {
        spectrum.log_term(l)
    });
    let rate = est.value / (2.0 * PI);
    if !rate.is_finite() {
        return Err(Error::NonFinite(f64::NAN));
    }
    Ok(rate.max(0.0))
}

/// Rate with instantaneous relays: `½ log2[1 + snr (Σ_d h_d)² / (1 + Σ_m (Σ_d h_{m,d})²)]`.
pub fn rate_instantaneous(net: &RelayNetwork, beta: &AmplificationVector) -> RateResult {
    RateResult {
        rate: instantaneous_rate_value(net, beta),
        beta: beta.clone(),
        mode: RateMode::Instantaneous,
    }
}

pub(crate) fn instantaneous_rate_value(net: &RelayNetwork, beta: &AmplificationVector) -> f64 {
    let b = beta.as_slice();
    awgn_rate(net.snr() * crate::paths::snr_ratio_with(net, |j| b[j]))
}

/// `½ log2(1 + x)`.
pub fn awgn_rate(snr: f64) -> f64 {
    0.5 * snr.ln_1p() / std::f64::consts::LN_2
}

/// Rate of the length-`n` circular channel: `(1/2n) Σ_k log2[1 + snr |H̃_k|² / (1 + Σ_m |H̃_{m,k}|²)]`.
pub fn rate_finite_n(net: &RelayNetwork, beta: &AmplificationVector, n: usize) -> Result<RateResult> {
    let spectrum = ChannelSpectrum::new(net, beta);
    let spread = spectrum.signal.max_delay();
    if n <= spread {
        return Err(Error::BlockLength { n, spread });
    }
    // Zero-padded DFT bins sit at λ_k = 2πk/n.
    let sum: f64 = (0..n)
        .map(|k| spectrum.log_term(2.0 * PI * k as f64 / n as f64))
        .sum();
    Ok(RateResult {
        rate: sum / (2.0 * n as f64),
        beta: beta.clone(),
        mode: RateMode::FiniteN(n),
    })
}
