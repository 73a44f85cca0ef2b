//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use std::process::{Command, ExitCode};
use std::time::Instant;

use afrelay::bounds::{broadcast_bound, cutset_upper, sweep_row};
use afrelay::network::{build_diamond, build_type_a, build_type_b};
use afrelay::optimize::{grid_oracle, optimize_equal_beta, optimize_full, type_a_beta_opt, Objective, OptConfig};
use afrelay::paths::{aggregate_gains, all_noise_taps, beta_max, is_feasible, max_equal_beta, source_taps};
use afrelay::scenario::{Scenario, ScenarioParams};
use afrelay::spectral::{
    autocorrelation_coeffs, harmonic_coeffs, rate_finite_n, rate_instantaneous, rate_integral, QuadConfig,
};
use afrelay::{AmplificationVector, NodeId, PowerBudget, TopologyGains};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{brute_noise_taps, brute_source_taps, max_rel_diff, random_network};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

fn example1() -> Outcome {
    let net = build_diamond(1.0, 0.1, 1.0, 1.0, 10.0, 10.0, 10.0, 0.1).unwrap();
    let zero = AmplificationVector::zeros(2);
    let b1sq = beta_max(&net, &zero, 1).powi(2);
    let b2sq = beta_max(&net, &zero, 2).powi(2);
    let opt = optimize_full(&net, Objective::Instantaneous, &OptConfig::default());
    let grid = grid_oracle(&net, Objective::Instantaneous, 400).unwrap();
    let (s1, s2) = (opt.beta_star.get(1), opt.beta_star.get(2));
    let parts = [
        ((s1 - 0.995).abs() <= 0.01, format!("beta_1*={s1:.6}")),
        ((s2 - 0.225).abs() <= 0.01, format!("beta_2*={s2:.6} (want 0.225)")),
        ((opt.rate - grid.rate).abs() <= 1e-6, format!("|rate-grid|={:.1e}", (opt.rate - grid.rate).abs())),
        ((b1sq - 0.99).abs() <= 1e-12, format!("beta_1max^2={b1sq:.12} (want 0.99)")),
        ((b2sq - 50.0).abs() <= 1e-12, format!("beta_2max^2={b2sq:.12}")),
    ];
    let failed: Vec<&str> = parts.iter().filter(|p| !p.0).map(|p| p.1.as_str()).collect();
    let all: Vec<&str> = parts.iter().map(|p| p.1.as_str()).collect();
    outcome(
        failed.is_empty(),
        if failed.is_empty() { all.join(", ") } else { format!("failed: {}; all: {}", failed.join(", "), all.join(", ")) },
    )
}

fn type_a_unity_gap() -> Outcome {
    let mut worst_beta = 0.0f64;
    let mut worst_gap = 0.0f64;
    for m in [1, 2, 4, 8, 16, 32, 64] {
        let (ps, s2) = (1.0, 1.0);
        let net = build_type_a(m, &TopologyGains::unity(m), &PowerBudget::shared(ps, 4.0, s2)).unwrap();
        let bm = max_equal_beta(&net);
        assert!(bm >= 1.0);
        let opt = optimize_equal_beta(&net, bm);
        let c_bc = log2_1p(ps / s2 * (1.0 + m as f64));
        worst_beta = worst_beta.max((opt.beta_star.get(1) - 1.0).abs());
        worst_gap = worst_gap.max((c_bc - 2.0 * opt.rate).abs());
    }
    outcome(
        worst_beta <= 1e-6 && worst_gap <= 1e-9,
        format!("max |beta*-1|={worst_beta:.1e}, max |C_BC-2I|={worst_gap:.1e}"),
    )
}

fn lemma3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let m = rng.gen_range(1..=12);
        let gains = TopologyGains::sampled(m, 0.5, 2.0, &mut rng);
        let powers = PowerBudget::per_relay(rng.gen_range(0.5..4.0), (0..m).map(|_| rng.gen_range(0.05..4.0)).collect(), rng.gen_range(0.2..2.0));
        let net = build_type_a(m, &gains, &powers).unwrap();
        // Relays hear only the source, so each ceiling is P_i/(h_si² P_s + σ²).
        let ceiling = (0..m)
            .map(|i| (net.relay_powers()[i] / (gains.source[i].powi(2) * net.source_power() + net.noise_variance())).sqrt())
            .fold(f64::INFINITY, f64::min);
        let cross: f64 = (0..m).map(|i| gains.source[i] * gains.dest[i]).sum();
        let dest: f64 = gains.dest.iter().map(|h| h * h).sum();
        let oracle = cross / (gains.direct * dest);
        let lib = type_a_beta_opt(&net).unwrap();
        assert!((lib - oracle).abs() <= 1e-12 * oracle.abs().max(1.0));
        let clipped = lib.min(ceiling);
        let opt = optimize_equal_beta(&net, max_equal_beta(&net));
        worst = worst.max((clipped - opt.beta_star.get(1)).abs());
    }
    outcome(worst <= 1e-5, format!("max |clip(beta_opt)-beta*|={worst:.1e} over 100 instances"))
}

fn m2_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (ps, p1, p2, s2) = (2.5, 1.7, 3.1, 0.4);
    let powers = PowerBudget::per_relay(ps, vec![p1, p2], s2);
    let (mut worst, mut worst_max) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let mut g = || rng.gen_range(0.1..2.0);
        let (hst, hs1, hs2, h1t, h2t, h12, b1, b2) = (g(), g(), g(), g(), g(), g(), g(), g());
        let gains = TopologyGains { direct: hst, source: vec![hs1, hs2], dest: vec![h1t, h2t], chain: vec![h12] };
        let beta = AmplificationVector::new(vec![b1, b2]);

        let a_net = build_type_a(2, &gains, &powers).unwrap();
        let h0 = hst;
        let h1 = hs1 * b1 * h1t + hs2 * b2 * h2t;
        let (n11, n21) = (b1 * h1t, b2 * h2t);
        let taps = source_taps(&a_net, &beta);
        let noise = all_noise_taps(&a_net, &beta);
        let c = harmonic_coeffs(&taps, &noise);
        worst = worst
            .max(max_rel_diff(&taps.taps, &[h0, h1], 1e-300))
            .max(max_rel_diff(&noise[0].taps, &[0.0, n11], 1e-300))
            .max(max_rel_diff(&noise[1].taps, &[0.0, n21], 1e-300))
            .max(max_rel_diff(&c.a, &[h0 * h0 + h1 * h1, 2.0 * h0 * h1], 1e-300))
            .max(max_rel_diff(&c.b, &[1.0 + n11 * n11 + n21 * n21], 1e-300));

        let b_net = build_type_b(2, &gains, &powers).unwrap();
        let h2 = hs1 * b1 * h12 * b2 * h2t + hs2 * b2 * h12 * b1 * h1t;
        let (n12, n22) = (b1 * h12 * b2 * h2t, b2 * h12 * b1 * h1t);
        let taps = source_taps(&b_net, &beta);
        let noise = all_noise_taps(&b_net, &beta);
        let c = harmonic_coeffs(&taps, &noise);
        worst = worst
            .max(max_rel_diff(&taps.taps, &[h0, h1, h2], 1e-300))
            .max(max_rel_diff(&noise[0].taps, &[0.0, n11, n12], 1e-300))
            .max(max_rel_diff(&noise[1].taps, &[0.0, n21, n22], 1e-300))
            .max(max_rel_diff(
                &c.a,
                &[h0 * h0 + h1 * h1 + h2 * h2, 2.0 * (h0 + h2) * h1, 2.0 * h0 * h2],
                1e-300,
            ))
            .max(max_rel_diff(
                &c.b,
                &[1.0 + n11 * n11 + n12 * n12 + n21 * n21 + n22 * n22, 2.0 * n11 * n12 + 2.0 * n21 * n22],
                1e-300,
            ));

        let q = h12 * h12;
        let m1 = p1 / ((hs2 * hs2 * b2 * b2 * q + hs1 * hs1) * ps + (b2 * b2 * q + 1.0) * s2);
        let m2 = p2 / ((hs1 * hs1 * b1 * b1 * q + hs2 * hs2) * ps + (b1 * b1 * q + 1.0) * s2);
        let lib = [beta_max(&b_net, &beta, 1).powi(2), beta_max(&b_net, &beta, 2).powi(2)];
        worst_max = worst_max.max(max_rel_diff(&lib, &[m1, m2], 1e-300));
    }
    outcome(
        worst <= 1e-12 && worst_max <= 1e-12,
        format!("taps/coefficients rel err {worst:.1e}, coupled beta_max rel err {worst_max:.1e}"),
    )
}

fn spectral_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_s, mut worst_n, mut worst_path) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..200 {
        let m = rng.gen_range(1..=4);
        let net = random_network(&mut rng, m, 0.7, -1.5, 1.5);
        let beta = AmplificationVector::new((0..m).map(|_| rng.gen_range(-1.5..1.5)).collect());
        let taps = source_taps(&net, &beta);
        let brute = brute_source_taps(&net, &beta);
        worst_path = worst_path.max(max_rel_diff(&taps.taps, &brute, 1e-12));
        let total: f64 = brute.iter().sum();
        let a_sum: f64 = harmonic_coeffs(&taps, &[]).a.iter().sum();
        worst_s = worst_s.max((a_sum - total * total).abs() / (total * total).max(1.0));
        for (k, noise) in all_noise_taps(&net, &beta).iter().enumerate() {
            let brute = brute_noise_taps(&net, &beta, k + 1);
            worst_path = worst_path.max(max_rel_diff(&noise.taps, &brute, 1e-12));
            let total: f64 = brute.iter().sum();
            let a_sum: f64 = autocorrelation_coeffs(&noise.taps).iter().sum();
            worst_n = worst_n.max((a_sum - total * total).abs() / (total * total).max(1.0));
        }
    }
    outcome(
        worst_s <= 1e-12 && worst_n <= 1e-12 && worst_path <= 1e-12,
        format!("signal {worst_s:.1e}, noise {worst_n:.1e}, taps vs path enumeration {worst_path:.1e}"),
    )
}

fn finite_n() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let gains = TopologyGains::sampled(3, 0.3, 1.5, &mut rng);
    let net = build_type_b(3, &gains, &PowerBudget::shared(2.0, 1.5, 0.5)).unwrap();
    let beta = AmplificationVector::new((0..3).map(|_| rng.gen_range(0.2..1.0) * max_equal_beta(&net)).collect());
    let quad = QuadConfig { tol: 1e-13, ..Default::default() };
    let exact = rate_integral(&net, &beta, &quad).unwrap().rate;
    let errs: Vec<f64> = [1 << 8, 1 << 10, 1 << 12, 1 << 14]
        .iter()
        .map(|&n| (rate_finite_n(&net, &beta, n).unwrap().rate - exact).abs())
        .collect();
    // Errors below 1e-12 are round-off and carry no ordering.
    let monotone = errs.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    outcome(
        monotone && errs[3] <= 1e-4,
        format!("errors {:?}", errs.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>()),
    )
}

fn const_power_gap() -> Outcome {
    let (m, q) = (1_000_000usize, 10.0);
    let params = ScenarioParams { q, ..Default::default() };
    let row = sweep_row(Scenario::TypeAUnityConstPower, m, &params, 1.0, 1.0).unwrap();
    let limit = log2_1p(1.0 / q);
    // Independent value at β = √(Q/M): (1 + Mβ)² / (1 + Mβ²) with C_BC = log₂(2 + M).
    let b = (q / m as f64).sqrt();
    let mf = m as f64;
    let oracle = (2.0 + mf).log2() - log2_1p((1.0 + mf * b).powi(2) / (1.0 + mf * b * b));
    let rel = (row.gap_bc - limit).abs() / limit;
    outcome(
        rel <= 0.02 && (row.gap_bc - oracle).abs() <= 1e-9,
        format!("gap {:.6} vs log2(1+1/Q) {limit:.6} (rel {rel:.2e}); direct evaluation {oracle:.6}", row.gap_bc),
    )
}

fn type_b_const_power() -> Outcome {
    let (m, q) = (10_000usize, 10.0);
    let net = build_type_b(m, &TopologyGains::unity(m), &PowerBudget::shared(1.0, q / m as f64, 1.0)).unwrap();
    let b = (q / m as f64).sqrt();
    let measured = aggregate_gains(&net, &AmplificationVector::constant(m, b)).snr_ratio();
    let r = (q / m as f64).sqrt();
    let formula = q * m as f64 / (1.0 + q) * (1.0 + r) / (1.0 - r);
    let rel = (measured - formula) / formula;
    outcome(rel.abs() <= 0.01, format!("pipeline SNR argument {measured:.4} vs formula {formula:.4} (rel {rel:+.3e})"))
}

fn bounded_gains() -> Outcome {
    let m = 10_000usize;
    let params = ScenarioParams { q: 1.0, u: 1.0, gain_range: (1.0, 2.0), seed: 9 };
    let net = Scenario::TypeABounded.network(m, &params, 1.0, 1.0).unwrap();
    let bmax = Scenario::TypeABounded.beta_max(m, &params);
    let src: Vec<f64> = (1..=m).map(|i| net.gain(NodeId::Source, NodeId::Relay(i))).collect();
    let dst: Vec<f64> = (1..=m).map(|i| net.gain(NodeId::Relay(i), NodeId::Destination)).collect();
    let hst = net.direct_gain();
    let h_s_max = src.iter().cloned().fold(hst, f64::max);
    let h_min = dst.iter().cloned().fold(f64::INFINITY, f64::min);
    let h_max = dst.iter().cloned().fold(0.0, f64::max);
    let beta_opt = src.iter().zip(&dst).map(|(a, b)| a * b).sum::<f64>() / (hst * dst.iter().map(|h| h * h).sum::<f64>());
    let lead = if bmax >= beta_opt { 1.0 } else { 1.0 / bmax };
    let lower = 0.5 * log2_1p((m as f64 * h_min + lead) * h_s_max * h_s_max * h_min / h_max);
    let c_bc = log2_1p(hst * hst + src.iter().map(|h| h * h).sum::<f64>());
    let rate = optimize_equal_beta(&net, bmax).rate;
    let gap = c_bc - 2.0 * lower;
    let allowance = 0.5 * (h_max / (h_min * h_min)).log2() + 0.1;
    let lib_row = sweep_row(Scenario::TypeABounded, m, &params, 1.0, 1.0).unwrap();
    outcome(
        rate >= lower && gap <= allowance && (lib_row.formula - lower).abs() <= 1e-12 && (broadcast_bound(&net) - c_bc).abs() <= 1e-12,
        format!("rate {rate:.6} >= bound {lower:.6}; C_BC-2*bound {gap:.4} <= {allowance:.4}"),
    )
}

fn dominance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let cfg = OptConfig { starts: 16, ..Default::default() };
    let (mut restr, mut bound) = (f64::INFINITY, f64::INFINITY);
    let mut infeasible = 0;
    for _ in 0..50 {
        let m = rng.gen_range(1..=3);
        let net = random_network(&mut rng, m, 0.7, 0.05, 2.0);
        let full = optimize_full(&net, Objective::Instantaneous, &cfg);
        let equal = optimize_equal_beta(&net, max_equal_beta(&net));
        restr = restr.min(full.rate - equal.rate);
        infeasible += usize::from(!is_feasible(&net, &full.beta_star).feasible);
        let upper = cutset_upper(&net).upper;
        let integral = rate_integral(&net, &full.beta_star, &QuadConfig::default()).unwrap().rate;
        let inst = rate_instantaneous(&net, &full.beta_star).rate;
        for r in [full.rate, equal.rate, integral, inst] {
            bound = bound.min(upper - r);
        }
    }
    outcome(
        restr >= -1e-9 && bound >= -1e-9 && infeasible == 0,
        format!("min(full-equal)={restr:.2e}, min(upper-rate)={bound:.3}, infeasible returns {infeasible}"),
    )
}

fn interior_minima(values: &[f64]) -> usize {
    let mut count = 0;
    let mut falling = false;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        let scale = w[0].abs().max(w[1].abs()) * 1e-14;
        if d < -scale {
            falling = true;
        } else if d > scale {
            if falling {
                count += 1;
            }
            falling = false;
        }
    }
    count
}

fn unimodality() -> Outcome {
    let m = 5;
    let powers = PowerBudget::shared(1.0, 100.0, 1.0);
    let a = build_type_a(m, &TopologyGains::unity(m), &powers).unwrap();
    let b = build_type_b(m, &TopologyGains::unity(m), &powers).unwrap();
    let grid: Vec<f64> = (0..10_000).map(|k| 3.0 * k as f64 / 9_999.0).collect();
    let curve = |net| -> Vec<f64> {
        grid.iter().map(|&x| aggregate_gains(net, &AmplificationVector::constant(m, x)).snr_ratio()).collect()
    };
    let one_way: Vec<f64> = grid
        .iter()
        .map(|&x| afrelay::optimize::type_b_equal_beta_rate(m, 1.0, 1.0, x))
        .collect();
    let (ma, mb, mc) = (interior_minima(&curve(&a)), interior_minima(&curve(&b)), interior_minima(&one_way));
    outcome(
        ma == 0 && mb == 0 && mc == 0,
        format!("interior minima: Type A {ma}, Type B {mb}, Type B closed form {mc}"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| -> Vec<u8> {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_afrelay"))
            .args(["sweep", "--scenario", "typeA-bounded", "--M", "10,100,1000", "--seed", "17", "--out"])
            .arg(&path)
            .status()
            .expect("binary runs");
        assert!(status.success());
        std::fs::read(path).unwrap()
    };
    let (first, second) = (run("a.csv"), run("b.csv"));
    let rows = String::from_utf8_lossy(&first).lines().count();
    outcome(first == second && rows == 4, format!("{} bytes, {rows} lines, identical: {}", first.len(), first == second))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("Example 1 reproduction", example1),
        ("Type A unity gains: beta*=1 and zero broadcast gap", type_a_unity_gap),
        ("Type A closed-form common optimum", lemma3),
        ("M=2 Type A / Type B hand-coded oracles", m2_oracles),
        ("Spectral sum identities", spectral_identities),
        ("Finite-N convergence", finite_n),
        ("Constant total power gap (Type A)", const_power_gap),
        ("Type B constant power argument", type_b_const_power),
        ("Bounded-gains lower bound", bounded_gains),
        ("Restriction and bound dominance", dominance),
        ("Unimodality of common-beta objectives", unimodality),
        ("Sweep CSV determinism", determinism),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        failures += usize::from(!o.pass);
        println!(
            "{} {:>2} {name}: {} [{:.2}s]",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
