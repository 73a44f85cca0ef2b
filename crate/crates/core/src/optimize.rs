//! Choosing the amplification vector.
//!
//! The rate is a sum of ratios in `β` and the feasible set is coupled (each
//! relay's ceiling depends on the others), so the general problem is solved
//! heuristically: multi-start projected gradient ascent, checked against an
//! exhaustive grid for small `M`. With a common `β` the instantaneous objective
//! is one-dimensional and quasiconcave on Type A / Type B networks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{NodeId, RelayNetwork, Topology};
use crate::paths::{beta_max, is_feasible, max_equal_beta, snr_ratio_with, AmplificationVector};
use crate::spectral::{awgn_rate, instantaneous_rate_value, integral_of, ChannelSpectrum, QuadConfig};

/// Which rate the optimizer maximizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// Relays delay by one channel use: the spectral integral.
    Integral,
    /// Relays forward without delay.
    Instantaneous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptMode {
    Integral,
    Instantaneous,
    EqualBeta,
    ClosedForm,
}

impl From<Objective> for OptMode {
    fn from(o: Objective) -> Self {
        match o {
            Objective::Integral => OptMode::Integral,
            Objective::Instantaneous => OptMode::Instantaneous,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptConfig {
    pub starts: usize,
    pub step_tol: f64,
    pub rate_tol: f64,
    pub max_iters: usize,
    /// Points per axis for [`grid_oracle`].
    pub grid_resolution: usize,
    pub seed: u64,
    pub quad: QuadConfig,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            starts: 32,
            step_tol: 1e-12,
            rate_tol: 1e-9,
            max_iters: 2000,
            grid_resolution: 400,
            seed: 0,
            quad: QuadConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptResult {
    pub beta_star: AmplificationVector,
    /// Bits per channel use.
    pub rate: f64,
    pub mode: OptMode,
    pub starts_used: usize,
    pub converged: bool,
}

/// Rate of `beta` under `objective`.
pub fn objective_value(net: &RelayNetwork, beta: &AmplificationVector, objective: Objective, quad: &QuadConfig) -> f64 {
    match objective {
        Objective::Instantaneous => instantaneous_rate_value(net, beta),
        Objective::Integral => integral_of(&ChannelSpectrum::new(net, beta), quad)
            .expect("finite taps and positive noise give a finite integrand"),
    }
}

/// Pulls a trial point back into the feasible set: sweep
/// `β_i = min(trial_i, β_{i,max}(β_{−i}))` until it settles, then shrink the
/// whole vector until every constraint holds.
pub fn project_feasible(net: &RelayNetwork, trial: &[f64]) -> AmplificationVector {
    let clipped: Vec<f64> = trial.iter().map(|b| b.max(0.0)).collect();
    repair(net, cap_sweeps(net, &clipped))
}

/// Gauss–Seidel capping of magnitudes; signs of `trial` are kept.
fn cap_sweeps(net: &RelayNetwork, trial: &[f64]) -> AmplificationVector {
    let mut beta = AmplificationVector::new(trial.to_vec());
    for _ in 0..200 {
        let mut change = 0.0f64;
        for i in 1..=net.relays() {
            let cap = beta_max(net, &beta, i);
            let want = trial[i - 1].clamp(-cap, cap);
            let b = &mut beta.as_mut_slice()[i - 1];
            change = change.max((want - *b).abs());
            *b = want;
        }
        if change <= 1e-15 {
            break;
        }
    }
    beta
}

/// Uniform down-scaling by 0.99 until feasible, then bisection on the scale
/// between the last infeasible and the first feasible factor.
fn repair(net: &RelayNetwork, beta: AmplificationVector) -> AmplificationVector {
    if is_feasible(net, &beta).feasible {
        return beta;
    }
    let mut hi = 1.0;
    let mut lo = 0.99;
    while !is_feasible(net, &beta.scaled(lo)).feasible {
        hi = lo;
        lo *= 0.99;
        if lo < 1e-300 {
            return AmplificationVector::zeros(beta.len());
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if is_feasible(net, &beta.scaled(mid)).feasible {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    beta.scaled(lo)
}

struct Ascent<'a> {
    net: &'a RelayNetwork,
    objective: Objective,
    cfg: &'a OptConfig,
}

impl Ascent<'_> {
    fn value(&self, beta: &AmplificationVector) -> f64 {
        objective_value(self.net, beta, self.objective, &self.cfg.quad)
    }

    fn gradient(&self, beta: &AmplificationVector) -> Vec<f64> {
        (0..beta.len())
            .map(|i| {
                let h = 1e-6 * (1.0 + beta.as_slice()[i].abs());
                let mut up = beta.clone();
                up.as_mut_slice()[i] += h;
                let mut down = beta.clone();
                down.as_mut_slice()[i] -= h;
                (self.value(&up) - self.value(&down)) / (2.0 * h)
            })
            .collect()
    }

    /// Projected gradient ascent with backtracking from a feasible start.
    fn run(&self, start: AmplificationVector) -> (AmplificationVector, f64) {
        let mut beta = start;
        let mut value = self.value(&beta);
        let mut step: f64 = 1.0;
        for _ in 0..self.cfg.max_iters {
            let grad = self.gradient(&beta);
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                break;
            }
            let mut accepted = None;
            let mut t = (step * 2.0).min(1e6);
            for _ in 0..80 {
                let trial: Vec<f64> = beta
                    .as_slice()
                    .iter()
                    .zip(&grad)
                    .map(|(b, g)| b + t * g / norm)
                    .collect();
                let cand = project_feasible(self.net, &trial);
                let moved: f64 = cand
                    .as_slice()
                    .iter()
                    .zip(beta.as_slice())
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if moved < self.cfg.step_tol {
                    break;
                }
                let v = self.value(&cand);
                if v > value {
                    accepted = Some((cand, v, moved));
                    break;
                }
                t *= 0.5;
            }
            let Some((cand, v, moved)) = accepted else { break };
            let gain = v - value;
            beta = cand;
            value = v;
            step = t;
            if gain < 1e-3 * self.cfg.rate_tol && moved < 1e3 * self.cfg.step_tol {
                break;
            }
        }
        (beta, value)
    }
}

fn stream(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64))
}

/// Maximizes the rate over all feasible `β ≥ 0` by multi-start projected
/// gradient ascent.
///
/// Start 0 is the best common `β`, start 1 the per-relay ceilings at
/// `β = 0`; the remaining starts are random feasible points drawn from a
/// stream seeded by `cfg.seed + start index`, so the result does not depend on
/// thread scheduling.
pub fn optimize_full(net: &RelayNetwork, objective: Objective, cfg: &OptConfig) -> OptResult {
    let m = net.relays();
    let zero = AmplificationVector::zeros(m);
    if m == 0 || net.relay_powers().iter().all(|p| *p == 0.0) {
        return OptResult {
            rate: objective_value(net, &zero, objective, &cfg.quad),
            beta_star: zero,
            mode: objective.into(),
            starts_used: 0,
            converged: true,
        };
    }
    let ceilings: Vec<f64> = (1..=m).map(|i| beta_max(net, &zero, i)).collect();
    let starts = cfg.starts.max(1);
    let ascent = Ascent { net, objective, cfg };

    let results: Vec<(AmplificationVector, f64)> = (0..starts)
        .into_par_iter()
        .map(|k| {
            let start = match k {
                0 => {
                    let b = max_equal_beta(net);
                    optimize_equal_beta(net, b).beta_star
                }
                1 => project_feasible(net, &ceilings),
                _ => {
                    let mut rng = stream(cfg.seed, k);
                    let trial: Vec<f64> = ceilings.iter().map(|c| c * rng.gen::<f64>()).collect();
                    project_feasible(net, &trial)
                }
            };
            ascent.run(start)
        })
        .collect();

    let (best_idx, best) = results
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, (_, v))| if *v > bv { (i, *v) } else { (bi, bv) });
    let agreeing = results.iter().filter(|(_, v)| best - v <= cfg.rate_tol).count();
    let scale = ceilings.iter().cloned().fold(0.0, f64::max);
    let (beta_star, rate) = pattern_refine(
        results[best_idx].0.clone(),
        best,
        1e-3 * scale,
        &|t| Some(project_feasible(net, t)),
        &|b| ascent.value(b),
    );
    OptResult {
        rate,
        beta_star,
        mode: objective.into(),
        starts_used: starts,
        converged: agreeing >= 2 || starts == 1,
    }
}

/// Largest number of relays the grid oracle accepts.
pub const GRID_MAX_RELAYS: usize = 3;

/// Exhaustive search over `[−c_i, c_i]` per relay, where `c_i` is relay `i`'s
/// ceiling with all other relays silent (no feasible `β_i` exceeds it), with
/// infeasible points rejected. The best grid point is then refined by a
/// derivative-free projected pattern search.
pub fn grid_oracle(net: &RelayNetwork, objective: Objective, resolution: usize) -> Result<OptResult> {
    let m = net.relays();
    if m > GRID_MAX_RELAYS {
        return Err(Error::Unsupported(format!(
            "grid oracle is limited to {GRID_MAX_RELAYS} relays, network has {m}"
        )));
    }
    let quad = QuadConfig::default();
    let zero = AmplificationVector::zeros(m);
    let value = |b: &AmplificationVector| objective_value(net, b, objective, &quad);
    let ceilings: Vec<f64> = (1..=m).map(|i| beta_max(net, &zero, i)).collect();
    let res = resolution.max(2);
    let axis = |c: f64, k: usize| -c + 2.0 * c * k as f64 / (res - 1) as f64;

    let total = res.pow(m as u32);
    let (mut best, mut best_val) = (zero.clone(), value(&zero));
    let points: Vec<(AmplificationVector, f64)> = (0..total)
        .into_par_iter()
        .filter_map(|mut idx| {
            let mut b = Vec::with_capacity(m);
            for c in &ceilings {
                b.push(axis(*c, idx % res));
                idx /= res;
            }
            let b = AmplificationVector::new(b);
            is_feasible(net, &b).feasible.then(|| {
                let v = value(&b);
                (b, v)
            })
        })
        .collect();
    for (b, v) in points {
        if v > best_val {
            best = b;
            best_val = v;
        }
    }

    let spacing = ceilings.iter().cloned().fold(0.0, f64::max) * 2.0 / (res - 1) as f64;
    let (beta_star, rate) = pattern_refine(best, best_val, spacing, &|t| signed_clip(net, t), &value);
    Ok(OptResult {
        beta_star,
        rate,
        mode: objective.into(),
        starts_used: 1,
        converged: true,
    })
}

/// Pulls a point into the feasible set while keeping signs.
fn signed_clip(net: &RelayNetwork, trial: &[f64]) -> Option<AmplificationVector> {
    Some(repair(net, cap_sweeps(net, trial)))
}

/// Compass search over coordinate and pairwise-diagonal directions plus a
/// batch of seeded random directions per step size; `clip`
/// maps each trial point into the feasible set.
fn pattern_refine(
    mut x: AmplificationVector,
    mut fx: f64,
    initial_step: f64,
    clip: &impl Fn(&[f64]) -> Option<AmplificationVector>,
    value: &impl Fn(&AmplificationVector) -> f64,
) -> (AmplificationVector, f64) {
    let m = x.len();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..m {
        for s in [1.0, -1.0] {
            let mut d = vec![0.0; m];
            d[i] = s;
            dirs.push(d);
        }
        for j in i + 1..m {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut d = vec![0.0; m];
                d[i] = si * std::f64::consts::FRAC_1_SQRT_2;
                d[j] = sj * std::f64::consts::FRAC_1_SQRT_2;
                dirs.push(d);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut step = initial_step.max(1e-6);
    while step > 1e-13 {
        let mut improved = false;
        let random = (0..8 * m).map(|_| {
            let d: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = d.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            d.into_iter().map(|v| v / n).collect::<Vec<f64>>()
        });
        for d in dirs.iter().cloned().chain(random) {
            let trial: Vec<f64> = x.as_slice().iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let Some(cand) = clip(&trial) else { continue };
            let v = value(&cand);
            if v > fx {
                x = cand;
                fx = v;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

/// Best common amplification `β ∈ [0, beta_max]` for the instantaneous rate:
/// a coarse scan picks the bracket, golden-section search refines it.
pub fn optimize_equal_beta(net: &RelayNetwork, beta_max: f64) -> OptResult {
    let m = net.relays();
    let ratio = |b: f64| snr_ratio_with(net, |_| b);
    let finish = |b: f64| {
        let beta_star = AmplificationVector::constant(m, b);
        OptResult {
            rate: instantaneous_rate_value(net, &beta_star),
            beta_star,
            mode: OptMode::EqualBeta,
            starts_used: 1,
            converged: true,
        }
    };
    if !(beta_max > 0.0) || m == 0 {
        return finish(0.0);
    }

    const SCAN: usize = 64;
    let grid: Vec<f64> = (0..=SCAN).map(|k| beta_max * k as f64 / SCAN as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|b| ratio(*b)).collect();
    let k = vals
        .iter()
        .enumerate()
        .fold(0, |bi, (i, v)| if *v > vals[bi] { i } else { bi });
    let (mut a, mut b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(SCAN)]);

    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (ratio(c), ratio(d));
    while b - a > 1e-14 * (1.0 + beta_max) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = ratio(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = ratio(d);
        }
    }
    let mid = 0.5 * (a + b);
    let best = [mid, grid[k], 0.0, beta_max]
        .into_iter()
        .map(|x| (x, ratio(x)))
        .fold((mid, f64::NEG_INFINITY), |acc, (x, v)| if v > acc.1 { (x, v) } else { acc });
    finish(best.0)
}

/// Unconstrained maximizer of the common-`β` rate on a network without
/// relay-relay links: `Σ h_si h_it / (h_st Σ h_it²)`.
pub fn type_a_beta_opt(net: &RelayNetwork) -> Result<f64> {
    if net.topology() != Topology::Parallel {
        return Err(Error::ClosedForm("network has relay-relay links".into()));
    }
    let h_st = net.direct_gain();
    if h_st == 0.0 {
        return Err(Error::ClosedForm(
            "direct gain h_st is zero; use optimize_equal_beta".into(),
        ));
    }
    let (mut cross, mut dest_energy) = (0.0, 0.0);
    for i in 1..=net.relays() {
        let hs = net.gain(NodeId::Source, NodeId::Relay(i));
        let ht = net.gain(NodeId::Relay(i), NodeId::Destination);
        cross += hs * ht;
        dest_energy += ht * ht;
    }
    if dest_energy == 0.0 {
        return Err(Error::ClosedForm("no relay reaches the destination".into()));
    }
    Ok(cross / (h_st * dest_energy))
}

/// The closed-form common-`β` rate of a unity-gain relay chain in which each
/// relay forwards only towards higher indices: source aggregate
/// `1 + Σ_i (M−i+1) β^i`, relay `m` aggregate `Σ_{i=1}^{M−m+1} β^i`.
///
/// Geometric sums are used away from `β = 1` and direct sums near it.
pub fn type_b_equal_beta_rate(m: usize, source_power: f64, noise_variance: f64, beta: f64) -> f64 {
    let snr = source_power / noise_variance;
    let ratio = if (beta - 1.0).abs() < 1e-2 {
        None
    } else {
        let mf = m as f64;
        let b = beta;
        let bm = b.powi(m as i32);
        let signal = 1.0 + b * mf * (bm - 1.0) / (b - 1.0) - mf * b.powi(m as i32 + 1) / (b - 1.0)
            + b * b * (bm - 1.0) / (b - 1.0).powi(2);
        let noise = 1.0
            + b * b / (b - 1.0).powi(2)
                * (b * b * (b.powi(2 * m as i32) - 1.0) / (b * b - 1.0) - 2.0 * b * (bm - 1.0) / (b - 1.0) + mf);
        let r = signal * signal / noise;
        r.is_finite().then_some(r)
    };
    awgn_rate(snr * ratio.unwrap_or_else(|| one_way_chain_ratio(m, beta)))
}

/// Direct sums behind [`type_b_equal_beta_rate`].
pub(crate) fn one_way_chain_ratio(m: usize, beta: f64) -> f64 {
    let mut signal = 1.0;
    let mut power = 1.0;
    for i in 1..=m {
        power *= beta;
        signal += (m - i + 1) as f64 * power;
    }
    // Relay m reaches t through M−m+1 relays; running geometric sums.
    let mut noise = 1.0;
    let (mut partial, mut power) = (0.0, 1.0);
    for _ in 0..m {
        power *= beta;
        partial += power;
        noise += partial * partial;
    }
    signal * signal / noise
}
