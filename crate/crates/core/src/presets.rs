//! Canned reproductions run by `afrelay reproduce`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{broadcast_bound, sweep_row};
use crate::error::{Error, Result};
use crate::network::{build_diamond, build_type_a, build_type_b, PowerBudget, RelayNetwork, TopologyGains};
use crate::optimize::{grid_oracle, optimize_full, Objective, OptConfig};
use crate::paths::{aggregate_gains, all_noise_taps, beta_max, source_taps, AmplificationVector};
use crate::scenario::{const_power_type_b_argument, BoundedGainSummary, Scenario, ScenarioParams};
use crate::spectral::{harmonic_coeffs, HarmonicCoeffs};

pub const PRESETS: [&str; 6] = [
    "example1",
    "typeA-scen1a",
    "typeA-scen1b",
    "typeA-scen2",
    "typeB-const-power",
    "m2-oracles",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub obtained: String,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, expected: impl Into<String>, obtained: impl Into<String>, pass: bool) -> Self {
        Check { name: name.into(), expected: expected.into(), obtained: obtained.into(), pass }
    }

    fn close(name: impl Into<String>, expected: f64, obtained: f64, tol: f64) -> Self {
        Check::new(
            name,
            format!("{} ± {tol:e}", sig9(expected)),
            sig9(obtained),
            (obtained - expected).abs() <= tol,
        )
    }
}

/// Nine significant digits, fixed notation for moderate magnitudes.
pub fn sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..9).contains(&exp) {
        format!("{:.*}", (8 - exp).max(0) as usize, v)
    } else {
        format!("{v:.8e}")
    }
}

pub fn run_preset(name: &str) -> Result<Vec<Check>> {
    match name {
        "example1" => example1(),
        "typeA-scen1a" => type_a_scen1a(),
        "typeA-scen1b" => type_a_scen1b(),
        "typeA-scen2" => type_a_scen2(),
        "typeB-const-power" => type_b_const_power(),
        "m2-oracles" => m2_oracles(),
        other => Err(Error::Unsupported(format!(
            "unknown preset `{other}` (expected one of {})",
            PRESETS.join(", ")
        ))),
    }
}

/// The two-relay diamond with a weak second source link.
pub fn example1_network() -> RelayNetwork {
    build_diamond(1.0, 0.1, 1.0, 1.0, 10.0, 10.0, 10.0, 0.1).expect("valid constants")
}

fn example1() -> Result<Vec<Check>> {
    let net = example1_network();
    let zero = AmplificationVector::zeros(2);
    let b1 = beta_max(&net, &zero, 1);
    let b2 = beta_max(&net, &zero, 2);
    let opt = optimize_full(&net, Objective::Instantaneous, &OptConfig::default());
    let grid = grid_oracle(&net, Objective::Instantaneous, 400)?;
    Ok(vec![
        Check::close("beta_1max^2", 0.99, b1 * b1, 1e-12),
        Check::close("beta_2max^2", 50.0, b2 * b2, 1e-12),
        Check::close("beta_1*", 0.995, opt.beta_star.get(1), 0.01),
        Check::close("beta_2*", 0.225, opt.beta_star.get(2), 0.01),
        Check::close("rate vs grid oracle", grid.rate, opt.rate, 1e-6),
        Check::new(
            "beta_2* below beta_2max",
            format!("< {}", sig9(b2)),
            sig9(opt.beta_star.get(2)),
            opt.beta_star.get(2) < b2,
        ),
    ])
}

fn type_a_scen1a() -> Result<Vec<Check>> {
    let params = ScenarioParams { q: 1.0, u: 1.0, ..Default::default() };
    let mut out = Vec::new();
    for m in [1, 2, 4, 8, 16, 32, 64] {
        let row = sweep_row(Scenario::TypeAUnityGrowing, m, &params, 1.0, 1.0)?;
        out.push(Check::close(format!("M={m} beta*"), 1.0, row.beta, 1e-6));
        out.push(Check::close(format!("M={m} C_BC - 2 I_AF"), 0.0, row.gap_bc, 1e-9));
    }
    Ok(out)
}

fn type_a_scen1b() -> Result<Vec<Check>> {
    let params = ScenarioParams { q: 10.0, ..Default::default() };
    let row = sweep_row(Scenario::TypeAUnityConstPower, 1_000_000, &params, 1.0, 1.0)?;
    let limit = (1.0 + 1.0 / params.q).log2();
    Ok(vec![Check::new(
        "M=1e6 gap vs log2(1+1/Q)",
        format!("{} within 2%", sig9(limit)),
        sig9(row.gap_bc),
        ((row.gap_bc - limit) / limit).abs() <= 0.02,
    )])
}

fn type_a_scen2() -> Result<Vec<Check>> {
    let params = ScenarioParams { q: 1.0, u: 1.0, gain_range: (1.0, 2.0), seed: 2024 };
    let m = 10_000;
    let net = Scenario::TypeABounded.network(m, &params, 1.0, 1.0)?;
    let row = sweep_row(Scenario::TypeABounded, m, &params, 1.0, 1.0)?;
    let g = BoundedGainSummary::from_network(&net)?;
    let allowance = 0.5 * (g.h_max / (g.h_min * g.h_min)).log2() + 0.1;
    let gap = broadcast_bound(&net) - 2.0 * row.formula;
    Ok(vec![
        Check::new("optimized rate >= lower bound", format!(">= {}", sig9(row.formula)), sig9(row.rate_bits), row.rate_bits >= row.formula),
        Check::new("C_BC - 2 bound", format!("<= {}", sig9(allowance)), sig9(gap), gap <= allowance),
    ])
}

fn type_b_const_power() -> Result<Vec<Check>> {
    let (m, q) = (10_000, 10.0);
    let net = build_type_b(m, &TopologyGains::unity(m), &PowerBudget::shared(1.0, q / m as f64, 1.0))?;
    let beta = AmplificationVector::constant(m, (q / m as f64).sqrt());
    let measured = aggregate_gains(&net, &beta).snr_ratio();
    let formula = const_power_type_b_argument(m, q)?;
    Ok(vec![Check::new(
        "M=1e4 SNR argument vs formula",
        format!("{} within 1%", sig9(formula)),
        sig9(measured),
        ((measured - formula) / formula).abs() <= 0.01,
    )])
}

struct M2Draw {
    h_st: f64,
    h_s: [f64; 2],
    h_t: [f64; 2],
    h_12: f64,
    beta: [f64; 2],
}

impl M2Draw {
    fn sample(rng: &mut ChaCha8Rng) -> Self {
        let mut g = || rng.gen_range(0.1..2.0);
        M2Draw { h_st: g(), h_s: [g(), g()], h_t: [g(), g()], h_12: g(), beta: [g(), g()] }
    }

    fn gains(&self) -> TopologyGains {
        TopologyGains { direct: self.h_st, source: self.h_s.to_vec(), dest: self.h_t.to_vec(), chain: vec![self.h_12] }
    }
}

/// Largest relative difference, the shorter slice padded with zeros.
fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let at = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
    (0..a.len().max(b.len()))
        .map(|k| {
            let (x, y) = (at(a, k), at(b, k));
            if x == y { 0.0 } else { (x - y).abs() / x.abs().max(y.abs()) }
        })
        .fold(0.0, f64::max)
}

fn m2_oracles() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let powers = PowerBudget::per_relay(2.0, vec![3.0, 1.5], 0.5);
    let (mut err_a, mut err_b, mut err_max) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let d = M2Draw::sample(&mut rng);
        let [b1, b2] = d.beta;
        let beta = AmplificationVector::new(d.beta.to_vec());

        let net = build_type_a(2, &d.gains(), &powers)?;
        let h0 = d.h_st;
        let h1 = d.h_s[0] * b1 * d.h_t[0] + d.h_s[1] * b2 * d.h_t[1];
        let (n1, n2) = (b1 * d.h_t[0], b2 * d.h_t[1]);
        let want = HarmonicCoeffs { a: vec![h0 * h0 + h1 * h1, 2.0 * h0 * h1], b: vec![1.0 + n1 * n1 + n2 * n2] };
        let got = harmonic_coeffs(&source_taps(&net, &beta), &all_noise_taps(&net, &beta));
        err_a = err_a.max(rel_err(&source_taps(&net, &beta).taps, &[h0, h1]));
        err_a = err_a.max(rel_err(&got.a, &want.a)).max(rel_err(&got.b, &want.b));

        let net = build_type_b(2, &d.gains(), &powers)?;
        let h2 = d.h_s[0] * b1 * d.h_12 * b2 * d.h_t[1] + d.h_s[1] * b2 * d.h_12 * b1 * d.h_t[0];
        let (n12, n22) = (b1 * d.h_12 * b2 * d.h_t[1], b2 * d.h_12 * b1 * d.h_t[0]);
        let want = HarmonicCoeffs {
            a: vec![h0 * h0 + h1 * h1 + h2 * h2, 2.0 * (h0 + h2) * h1, 2.0 * h0 * h2],
            b: vec![1.0 + n1 * n1 + n12 * n12 + n2 * n2 + n22 * n22, 2.0 * n1 * n12 + 2.0 * n2 * n22],
        };
        let noise = all_noise_taps(&net, &beta);
        let got = harmonic_coeffs(&source_taps(&net, &beta), &noise);
        err_b = err_b
            .max(rel_err(&source_taps(&net, &beta).taps, &[h0, h1, h2]))
            .max(rel_err(&noise[0].taps, &[0.0, n1, n12]))
            .max(rel_err(&noise[1].taps, &[0.0, n2, n22]))
            .max(rel_err(&got.a, &want.a))
            .max(rel_err(&got.b, &want.b));

        let (ps, s2) = (2.0, 0.5);
        let c = d.h_12 * d.h_12;
        let m1 = 3.0 / ((d.h_s[1].powi(2) * b2 * b2 * c + d.h_s[0].powi(2)) * ps + (b2 * b2 * c + 1.0) * s2);
        let m2 = 1.5 / ((d.h_s[0].powi(2) * b1 * b1 * c + d.h_s[1].powi(2)) * ps + (b1 * b1 * c + 1.0) * s2);
        err_max = err_max.max(rel_err(
            &[beta_max(&net, &beta, 1).powi(2), beta_max(&net, &beta, 2).powi(2)],
            &[m1, m2],
        ));
    }
    let check = |name: &str, e: f64| Check::new(name, "<= 1e-12 relative", format!("{e:.3e}"), e <= 1e-12);
    Ok(vec![
        check("Type A M=2 taps and coefficients", err_a),
        check("Type B M=2 taps and coefficients", err_b),
        check("Type B M=2 coupled beta_max", err_max),
    ])
}
