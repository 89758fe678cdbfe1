use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use krylov_lowrank::harness::{self, ExperimentConfig, Preset, Scale};
use krylov_lowrank::linalg::OrthonormalBasis;
use krylov_lowrank::metrics::{self, Norm};
use krylov_lowrank::mtx::read_matrix_market;
use krylov_lowrank::operator::{recommended_delta, recommended_delta_gram, PerturbationRoute};
use krylov_lowrank::rng::{self, Purpose};
use krylov_lowrank::solvers::{
    block_krylov, build_simulated_block, simultaneous_iteration, single_vector_simultaneous, OrthoPolicy,
    SolverConfig,
};
use krylov_lowrank::spectra::{InputMatrix, SpectrumSpec};
use krylov_lowrank::{Error, Result};

/// Krylov low-rank approximation: single solves, experiment presets and diagnostics.
#[derive(Parser, Debug)]
#[command(name = "krylov-lra", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one solve and print the excess error and matvec count.
    Lowrank(LowrankArgs),
    /// Run an experiment preset and write its CSVs.
    Experiment(ExperimentArgs),
    /// Print a synthetic spectrum.
    Spectrum(SpectrumArgs),
    /// Print gap statistics and the goodness of a simulated start block.
    Diagnose(DiagnoseArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dimension of synthetic inputs (default 1000).
    #[arg(long)]
    n: Option<usize>,
    /// Target rank (default 10).
    #[arg(long)]
    k: Option<usize>,
    /// Number of trials, where applicable.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Exponential,
    Polynomial,
    PairedGap,
    RepeatedPairs,
    WishartLb,
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    #[arg(long, value_enum, default_value = "exponential")]
    kind: Kind,
    /// Decay base for exponential, paired-gap and repeated-pairs spectra.
    #[arg(long, default_value_t = 1.1)]
    alpha: f64,
    /// Polynomial decay exponent.
    #[arg(long, default_value_t = 1.5)]
    beta: f64,
    /// Relative pair gap for paired-gap spectra.
    #[arg(long, default_value_t = 1e-2)]
    gap: f64,
    /// Read a Matrix Market file instead of generating a spectrum.
    #[arg(long)]
    mtx: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    Krylov,
    Simultaneous,
    SingleSimultaneous,
}

#[derive(Args, Debug)]
struct LowrankArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    input: InputArgs,
    /// Iterations (default 3k).
    #[arg(long)]
    t: Option<usize>,
    /// Block size.
    #[arg(long, default_value_t = 1)]
    b: usize,
    #[arg(long, default_value = "full")]
    policy: String,
    #[arg(long, value_enum, default_value = "krylov")]
    method: Method,
    /// Memory budget for single-vector simultaneous iteration (default k).
    #[arg(long)]
    ell: Option<usize>,
    /// Diagonal perturbation magnitude.
    #[arg(long, conflicts_with = "perturb_eps")]
    delta: Option<f64>,
    /// Choose the perturbation from a target accuracy, estimating σ_{k+1} when it is unknown.
    #[arg(long)]
    perturb_eps: Option<f64>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    preset: String,
    #[arg(long, default_value = "paper")]
    scale: String,
    #[arg(long, env = "KRYLOV_LRA_OUT", default_value = "results")]
    out: PathBuf,
    /// Matrix Market files added to the grid preset.
    #[arg(long)]
    mtx: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 4)]
    digits: usize,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    input: InputArgs,
    /// Widths ℓ for g_{k→ℓ}.
    #[arg(long, value_delimiter = ',')]
    ell: Vec<usize>,
    /// Block sizes for g_{min,b}.
    #[arg(long, value_delimiter = ',')]
    b: Vec<usize>,
}

fn spectrum_spec(input: &InputArgs, n: usize, k: usize) -> SpectrumSpec {
    match input.kind {
        Kind::Exponential => SpectrumSpec::Exponential { alpha: input.alpha, n },
        Kind::Polynomial => SpectrumSpec::Polynomial { beta: input.beta, n },
        Kind::PairedGap => SpectrumSpec::PairedGap { alpha: input.alpha, gap: input.gap, n },
        Kind::RepeatedPairs => SpectrumSpec::RepeatedPairs { alpha: input.alpha, k, n },
        Kind::WishartLb => SpectrumSpec::WishartLb { n },
    }
}

fn load_input(input: &InputArgs, common: &Common) -> Result<InputMatrix> {
    match &input.mtx {
        Some(path) => {
            let m = read_matrix_market(path).map_err(|e| match e {
                Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
                other => other,
            })?;
            InputMatrix::dense(m)
        }
        None => InputMatrix::from_spec(&spectrum_spec(input, common.n.unwrap_or(1000), common.k.unwrap_or(10))),
    }
}

fn lowrank(args: &LowrankArgs) -> Result<()> {
    let a = load_input(&args.input, &args.common)?;
    let k = args.common.k.unwrap_or(10);
    if k == 0 || k > a.rows().min(a.cols()) {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must lie in 1..={} for a {}x{} input",
            a.rows().min(a.cols()),
            a.rows(),
            a.cols()
        )));
    }
    let policy: OrthoPolicy = args.policy.parse()?;
    let t = args.t.unwrap_or(3 * k);
    let seed = args.common.seed;
    let mut op = a.as_operator();
    let symmetric = matches!(&a, InputMatrix::Diagonal(_))
        || matches!(&a, InputMatrix::Dense { a, .. } if a.nrows() == a.ncols() && a == &a.transpose());
    let route = if symmetric { PerturbationRoute::Matrix } else { PerturbationRoute::Gram };
    let delta = match (args.delta, args.perturb_eps) {
        (Some(d), _) => Some(d),
        (None, Some(eps)) => {
            let sigma = match &a {
                InputMatrix::Diagonal(s) => s.get(k).copied().unwrap_or(0.0),
                InputMatrix::Dense { .. } => {
                    let before = op.apply_count();
                    let s = harness::pilot_sigma(&mut op, k, seed)?;
                    println!("pilot_matvecs\t{}", op.apply_count() - before);
                    op.reset_count();
                    s
                }
            };
            let n = a.rows();
            Some(match route {
                PerturbationRoute::Matrix => recommended_delta(sigma, n, eps)?,
                PerturbationRoute::Gram => recommended_delta_gram(sigma, n, eps)?,
            })
        }
        (None, None) => None,
    };
    if let Some(d) = delta {
        op = op.perturb_diagonal(d, seed, route)?;
        println!("delta\t{}", harness::format_float(d));
    }
    let cfg = SolverConfig::new(k, args.b, t).with_seed(seed).with_policy(policy);
    let res = match args.method {
        Method::Krylov => block_krylov(&mut op, &cfg)?,
        Method::Simultaneous => simultaneous_iteration(&mut op, &cfg)?,
        Method::SingleSimultaneous => single_vector_simultaneous(&mut op, &cfg, args.ell.unwrap_or(k))?,
    };
    let eps = metrics::epsilon_empirical(&a, &res.q, k, Norm::Frobenius)?;
    println!("eps_empirical\t{}", harness::format_float(eps));
    println!("matvecs\t{}", res.matvecs);
    println!("subspace_dim\t{}", res.subspace_dim);
    println!("drop_count\t{}", res.drop_count);
    if res.rank_deficient {
        println!("rank_deficient\ttrue");
    }
    let ritz: Vec<String> = res.ritz_values.iter().map(|v| harness::format_float(*v)).collect();
    println!("ritz_values\t{}", ritz.join(","));
    Ok(())
}

fn experiment(args: &ExperimentArgs) -> Result<()> {
    let preset: Preset = args.preset.parse()?;
    let scale: Scale = args.scale.parse()?;
    let mut cfg = ExperimentConfig::for_scale(preset, scale);
    cfg.base_seed = args.common.seed;
    if let Some(n) = args.common.n {
        cfg.n = n;
    }
    if let Some(k) = args.common.k {
        cfg.k = k;
    }
    if let Some(trials) = args.common.trials {
        cfg.trials = trials;
    }
    cfg.matrices = args.mtx.clone();
    let out = harness::run_preset(&cfg)?;
    let files = harness::write_outputs(&args.out, preset, &out)?;
    println!("records\t{}\t{}", out.records.len(), files.records.display());
    println!("summary\t{}", files.summary.display());
    if let Some(path) = files.failures {
        eprintln!("{} cells failed; see {}", out.failures.len(), path.display());
    }
    Ok(())
}

fn spectrum(args: &SpectrumArgs) -> Result<()> {
    let a = load_input(&args.input, &args.common)?;
    for s in a.sigma() {
        println!("{s:.*}", args.digits);
    }
    Ok(())
}

fn fmt_gap(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.6e}")
    }
}

fn diagnose(args: &DiagnoseArgs) -> Result<()> {
    let a = load_input(&args.input, &args.common)?;
    let k = args.common.k.unwrap_or(10);
    let ells = if args.ell.is_empty() { vec![k] } else { args.ell.clone() };
    let blocks = if args.b.is_empty() { vec![1, 2, k] } else { args.b.clone() };
    let report = metrics::gap_report(a.sigma(), k, &ells, &blocks)?;
    println!("g_min_over_next\t{}", fmt_gap(report.g_min_over_next));
    println!("g_min_over_self\t{}", fmt_gap(report.g_min_over_self));
    for (ell, g) in &report.g_k_to_ell {
        println!("g_k_to_ell[{ell}]\t{}", fmt_gap(*g));
    }
    for (b, g) in &report.g_min_b {
        println!("g_min_b[{b}]\t{}", fmt_gap(*g));
    }
    let u_k: OrthonormalBasis = match &a {
        InputMatrix::Diagonal(_) => metrics::coordinate_basis(a.rows(), k),
        InputMatrix::Dense { a, .. } => metrics::top_left_singular_vectors(a, k)?,
    };
    let trials = args.common.trials.unwrap_or(1);
    for trial in 0..trials {
        let seed = rng::cell_seed(args.common.seed, &format!("diagnose/{trial}"));
        let x = rng::gaussian_vector(&mut rng::stream(seed, 0, Purpose::Start), a.rows());
        let mut op = a.as_operator();
        let s_k = build_simulated_block(&mut op, &x, k)?;
        let good = match metrics::kl_goodness(&u_k, &s_k, k) {
            Err(Error::InsufficientSubspace { .. }) => metrics::GoodnessReport { l: f64::INFINITY, smallest_singular_value: 0.0 },
            other => other?,
        };
        println!(
            "goodness[{trial}]\tL={}\tsigma_min={:.6e}",
            fmt_gap(good.l),
            good.smallest_singular_value
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Lowrank(a) => lowrank(a),
        Command::Experiment(a) => experiment(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Diagnose(a) => diagnose(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
