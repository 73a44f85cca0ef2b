use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use afrelay::bounds::{asymptotic_sweep, cutset_upper, gap_report, write_sweep_csv};
use afrelay::format::{load_network, parse_beta_list, parse_m_list};
use afrelay::optimize::{optimize_equal_beta, optimize_full, Objective, OptConfig};
use afrelay::paths::{beta_max, is_feasible, max_equal_beta, AmplificationVector};
use afrelay::presets::{run_preset, sig9, PRESETS};
use afrelay::scenario::{Scenario, ScenarioParams};
use afrelay::spectral::{rate_finite_n, rate_instantaneous, rate_integral, QuadConfig};
use afrelay::{Error, RelayNetwork};

const EXIT_CHECK: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(name = "afrelay", version, about = "Amplify-and-forward relay network rates and bounds")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Achievable rate of a network for a given amplification vector.
    Rate(RateArgs),
    /// Maximize the rate over amplification vectors.
    Optimize(OptimizeArgs),
    /// Broadcast and multiple-access cut-set bounds.
    Bounds(BoundsArgs),
    /// Equal-amplification rates and bounds over a list of relay counts, as CSV.
    Sweep(SweepArgs),
    /// Run a reproduction preset and report PASS/FAIL per check.
    Reproduce(ReproduceArgs),
    /// Parse and validate a network file.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum RateModeArg {
    Integral,
    #[value(alias = "instantaneous")]
    Instant,
    #[value(name = "finiteN", alias = "finite_N")]
    FiniteN,
}

#[derive(Clone, Copy, ValueEnum)]
enum OptModeArg {
    Integral,
    #[value(alias = "instantaneous")]
    Instant,
    /// One common amplification for all relays.
    Equal,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct BetaSource {
    /// Comma-separated amplification factors, one per relay.
    #[arg(long)]
    beta: Option<String>,
    /// File holding the amplification factors.
    #[arg(long = "beta-file")]
    beta_file: Option<PathBuf>,
}

#[derive(Args)]
struct RateArgs {
    #[arg(long)]
    network: PathBuf,
    #[command(flatten)]
    beta: BetaSource,
    #[arg(long, value_enum, default_value = "integral")]
    mode: RateModeArg,
    /// Block length for `--mode finiteN`.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Absolute quadrature tolerance in bits.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long, value_enum, default_value = "instant")]
    mode: OptModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    starts: usize,
    /// Rate tolerance in bits.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
    network: Option<PathBuf>,
    #[arg(long, requires = "m")]
    scenario: Option<String>,
    /// Relay count for `--scenario`.
    #[arg(long = "M")]
    m: Option<String>,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long = "Q", default_value_t = 1.0)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    u: f64,
    #[arg(long = "Ps", default_value_t = 1.0)]
    ps: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gain interval `lo,hi` for the bounded-gain scenario.
    #[arg(long, default_value = "1,2")]
    gains: String,
}

impl ParamArgs {
    fn scenario_params(&self) -> Result<ScenarioParams, Failure> {
        let g = parse_beta_list(&self.gains)?;
        if g.len() != 2 {
            return Err(Failure::usage("--gains expects two numbers `lo,hi`"));
        }
        Ok(ScenarioParams { q: self.q, u: self.u, gain_range: (g[0], g[1]), seed: self.seed })
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    scenario: String,
    /// Comma-separated, strictly increasing relay counts.
    #[arg(long = "M")]
    m: String,
    #[command(flatten)]
    params: ParamArgs,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// One of the presets, or `all`.
    preset: String,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    network: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    fn io(path: &Path, err: io::Error) -> Self {
        Failure { code: EXIT_IO, message: format!("{}: {err}", path.display()) }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = if matches!(err, Error::Io(_)) { EXIT_IO } else { EXIT_USAGE };
        Failure { code, message: err.to_string() }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn network(path: &Path) -> Result<RelayNetwork, Failure> {
    load_network(&read(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn beta_vector(net: &RelayNetwork, src: &BetaSource) -> Result<AmplificationVector, Failure> {
    let values = match (&src.beta, &src.beta_file) {
        (Some(list), _) => parse_beta_list(list)?,
        (None, Some(path)) => parse_beta_list(&read(path)?)?,
        (None, None) => return Err(Failure::usage("one of --beta or --beta-file is required")),
    };
    Ok(AmplificationVector::for_network(net, values)?)
}

fn row(label: &str, value: impl std::fmt::Display) {
    println!("{label:<14}{value}");
}

fn beta_string(beta: &AmplificationVector) -> String {
    beta.as_slice().iter().map(|b| sig9(*b)).collect::<Vec<_>>().join(",")
}

fn cmd_rate(args: &RateArgs) -> Result<u8, Failure> {
    let net = network(&args.network)?;
    let beta = beta_vector(&net, &args.beta)?;
    let mut quad = QuadConfig::default();
    if let Some(tol) = args.tol {
        quad.tol = tol;
    }
    let (label, result) = match args.mode {
        RateModeArg::Integral => ("integral", rate_integral(&net, &beta, &quad)?),
        RateModeArg::Instant => ("instantaneous", rate_instantaneous(&net, &beta)),
        RateModeArg::FiniteN => {
            let n = args.n.ok_or_else(|| Failure::usage("--mode finiteN needs --N"))?;
            ("finiteN", rate_finite_n(&net, &beta, n)?)
        }
    };
    row("mode", label);
    row("beta", beta_string(&beta));
    row("rate_bits", sig9(result.rate));
    let feas = is_feasible(&net, &beta);
    if feas.feasible {
        return Ok(0);
    }
    println!("INFEASIBLE");
    for (i, s) in feas.slack.iter().enumerate() {
        let mark = if *s < 0.0 { "  violated" } else { "" };
        println!("  relay {:<4} slack {}{mark}", i + 1, sig9(*s));
    }
    Ok(EXIT_INFEASIBLE)
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<u8, Failure> {
    let net = network(&args.network)?;
    let mut cfg = OptConfig { seed: args.seed, starts: args.starts, ..Default::default() };
    if let Some(tol) = args.tol {
        cfg.rate_tol = tol;
    }
    let result = match args.mode {
        OptModeArg::Integral => optimize_full(&net, Objective::Integral, &cfg),
        OptModeArg::Instant => optimize_full(&net, Objective::Instantaneous, &cfg),
        OptModeArg::Equal => optimize_equal_beta(&net, max_equal_beta(&net)),
    };
    row("mode", format!("{:?}", result.mode));
    row("beta", beta_string(&result.beta_star));
    row("rate_bits", sig9(result.rate));
    row("starts", result.starts_used);
    row("converged", result.converged);
    Ok(0)
}

fn cmd_bounds(args: &BoundsArgs) -> Result<u8, Failure> {
    let (net, scenario, params, i_af) = match (&args.network, &args.scenario) {
        (Some(path), _) => {
            let net = network(path)?;
            let rate = optimize_equal_beta(&net, max_equal_beta(&net)).rate;
            (net, None, ScenarioParams::default(), rate)
        }
        (None, Some(tag)) => {
            let scenario: Scenario = tag.parse()?;
            let params = args.params.scenario_params()?;
            let m = match parse_m_list(args.m.as_deref().unwrap_or_default())?.as_slice() {
                [m] => *m,
                _ => return Err(Failure::usage("--M takes a single relay count here")),
            };
            let net = scenario.network(m, &params, args.params.ps, args.params.sigma2)?;
            let rate = optimize_equal_beta(&net, scenario.beta_max(m, &params)).rate;
            (net, Some(scenario), params, rate)
        }
        (None, None) => return Err(Failure::usage("either --network or --scenario is required")),
    };
    let b = cutset_upper(&net);
    let gap = gap_report(&net, i_af, scenario, &params);
    row("c_bc", sig9(b.c_bc));
    row("c_mac", sig9(b.c_mac));
    row("upper", sig9(b.upper));
    row("equal_beta", sig9(i_af));
    row("gap_bc", sig9(gap.gap_bc));
    row("gap_limit", gap.gap_limit.map_or("-".to_string(), sig9));
    row("2^(mac-bc)", sig9(gap.mac_minus_bc));
    Ok(0)
}

fn cmd_sweep(args: &SweepArgs) -> Result<u8, Failure> {
    let scenario: Scenario = args.scenario.parse()?;
    let params = args.params.scenario_params()?;
    let ms = parse_m_list(&args.m)?;
    let rows = asymptotic_sweep(scenario, &ms, &params, args.params.ps, args.params.sigma2)?;
    match &args.out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| Failure::io(path, e))?;
            write_sweep_csv(&rows, io::BufWriter::new(file)).map_err(|e| Failure::io(path, e))?;
        }
        None => write_sweep_csv(&rows, io::stdout().lock()).map_err(|e| Failure::io(Path::new("<stdout>"), e))?,
    }
    Ok(0)
}

fn cmd_reproduce(args: &ReproduceArgs) -> Result<u8, Failure> {
    let names: Vec<&str> = if args.preset == "all" { PRESETS.to_vec() } else { vec![args.preset.as_str()] };
    let mut failed = 0;
    let mut out = io::stdout().lock();
    for name in names {
        let checks = run_preset(name)?;
        for c in checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            failed += usize::from(!c.pass);
            let _ = writeln!(out, "{verdict}  {name}: {}  expected {}  obtained {}", c.name, c.expected, c.obtained);
        }
    }
    Ok(if failed == 0 { 0 } else { EXIT_CHECK })
}

fn cmd_validate(args: &ValidateArgs) -> Result<u8, Failure> {
    let net = network(&args.network)?;
    let zero = AmplificationVector::zeros(net.relays());
    row("relays", net.relays());
    row("edges", net.edge_count());
    row("topology", format!("{:?}", net.topology()));
    row("|S_s|", net.source_neighbors().len());
    row("|S_t|", net.dest_neighbors().len());
    for i in 1..=net.relays() {
        row(&format!("beta_max[{i}]"), sig9(beta_max(&net, &zero, i)));
    }
    row("equal_beta_max", sig9(max_equal_beta(&net)));
    println!("OK");
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let outcome = match &cli.verb {
        Verb::Rate(a) => cmd_rate(a),
        Verb::Optimize(a) => cmd_optimize(a),
        Verb::Bounds(a) => cmd_bounds(a),
        Verb::Sweep(a) => cmd_sweep(a),
        Verb::Reproduce(a) => cmd_reproduce(a),
        Verb::Validate(a) => cmd_validate(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("afrelay: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
