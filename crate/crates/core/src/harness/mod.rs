//! Seeded multi-trial experiment presets and their CSV output.

mod record;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{singular_values, OrthonormalBasis, DEFAULT_DROP_TOL};
use crate::metrics::{epsilon_empirical, optimal_error, residual_matrix, schatten_norm, Norm};
use crate::mtx::read_matrix_market;
use crate::operator::{GramOperator, PerturbationRoute};
use crate::rng::cell_seed;
use crate::solvers::{
    simultaneous_iteration, single_vector_krylov, single_vector_simultaneous, KrylovSpace, OrthoPolicy,
    SolverConfig,
};
use crate::spectra::{InputMatrix, SpectrumSpec};

pub use record::{
    aggregate_quantiles, format_float, median, quartiles, read_csv, read_records, write_csv, write_records,
    write_summary, ExperimentRecord, GroupKey, QuantileRow, RECORD_HEADER,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    GapSweep,
    BlockSize,
    PerturbSweep,
    Grid,
    OrthoStability,
    Schatten,
    Simultaneous,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::GapSweep,
        Preset::BlockSize,
        Preset::PerturbSweep,
        Preset::Grid,
        Preset::OrthoStability,
        Preset::Schatten,
        Preset::Simultaneous,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::GapSweep => "gap_sweep",
            Preset::BlockSize => "block_size",
            Preset::PerturbSweep => "perturb_sweep",
            Preset::Grid => "grid",
            Preset::OrthoStability => "ortho_stability",
            Preset::Schatten => "schatten",
            Preset::Simultaneous => "simultaneous",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::param(format!("unknown preset `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Paper,
    Fast,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Scale::Paper),
            "fast" => Ok(Scale::Fast),
            other => Err(Error::param(format!("unknown scale `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub base_seed: u64,
    /// Strictly increasing matvec budgets at which every run is evaluated.
    pub budgets: Vec<u64>,
    /// Relative pair gaps for `gap_sweep`.
    pub gaps: Vec<f64>,
    /// Block sizes; for `perturb_sweep` these are the unperturbed reference runs.
    pub blocks: Vec<usize>,
    /// Perturbation magnitudes for the single-vector runs of `perturb_sweep`.
    pub deltas: Vec<f64>,
    pub policies: Vec<OrthoPolicy>,
    pub p_values: Vec<f64>,
    /// Memory budget of single-vector simultaneous iteration; defaults to `k`.
    pub ell: Option<usize>,
    /// Extra Matrix Market inputs for `grid`.
    pub matrices: Vec<PathBuf>,
}

fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..count).map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64)).collect()
}

fn steps(from: u64, to: u64, step: u64) -> Vec<u64> {
    (from..=to).step_by(step as usize).collect()
}

impl ExperimentConfig {
    fn base(preset: Preset, n: usize, k: usize, trials: usize) -> Self {
        Self {
            preset,
            n,
            k,
            trials,
            base_seed: 0,
            budgets: Vec::new(),
            gaps: Vec::new(),
            blocks: vec![1],
            deltas: vec![0.0],
            policies: vec![OrthoPolicy::FullReorth],
            p_values: Vec::new(),
            ell: None,
            matrices: Vec::new(),
        }
    }

    /// Parameters of the published figures: `n = 1000`.
    pub fn paper(preset: Preset) -> Self {
        let mut c = match preset {
            Preset::GapSweep => Self::base(preset, 1000, 10, 500),
            Preset::BlockSize | Preset::PerturbSweep | Preset::Grid => Self::base(preset, 1000, 50, 10),
            Preset::OrthoStability => Self::base(preset, 1000, 50, 100),
            Preset::Schatten => Self::base(preset, 500, 10, 10),
            Preset::Simultaneous => Self::base(preset, 1000, 10, 10),
        };
        match preset {
            Preset::GapSweep => {
                c.gaps = log_spaced(1e-10, 1.0, 8);
                c.budgets = steps(26, 35, 1);
            }
            Preset::BlockSize => {
                c.blocks = vec![1, 2, 3, 50];
                c.budgets = steps(50, 600, 25);
            }
            Preset::PerturbSweep => {
                c.deltas = vec![1e-6, 1e-10, 1e-14, 0.0];
                c.blocks = vec![2];
                c.budgets = steps(50, 800, 25);
            }
            Preset::Grid => {
                c.blocks = vec![1, 2, 3, 50, 54];
                c.budgets = steps(50, 600, 50);
            }
            Preset::OrthoStability => {
                c.blocks = vec![1, 2, 50, 54];
                c.policies = vec![OrthoPolicy::FullReorth, OrthoPolicy::LanczosLocal];
                c.budgets = steps(60, 400, 20);
            }
            Preset::Schatten => {
                c.p_values = vec![1.0, 2.0, 4.0, f64::INFINITY];
                c.budgets = vec![20, 40, 60, 80, 100];
            }
            Preset::Simultaneous => {
                c.budgets = steps(20, 200, 20);
            }
        }
        c
    }

    /// Developer-loop sizes: `n = 200`, `k = 10`, 5 trials.
    pub fn fast(preset: Preset) -> Self {
        let mut c = Self::paper(preset);
        c.n = 200;
        c.k = 10;
        c.trials = 5;
        match preset {
            Preset::GapSweep | Preset::Schatten | Preset::Simultaneous => {}
            Preset::BlockSize => {
                c.blocks = vec![1, 2, 3, 10];
                c.budgets = steps(20, 200, 10);
            }
            Preset::PerturbSweep => c.budgets = steps(20, 200, 10),
            Preset::Grid => {
                c.blocks = vec![1, 2, 3, 10, 14];
                c.budgets = steps(20, 200, 20);
            }
            Preset::OrthoStability => {
                c.blocks = vec![1, 2, 10, 14];
                c.budgets = steps(20, 200, 20);
            }
        }
        if preset == Preset::Schatten {
            c.budgets = vec![15, 25, 40, 60];
        }
        if preset == Preset::Simultaneous {
            c.budgets = steps(20, 120, 20);
        }
        c
    }

    pub fn for_scale(preset: Preset, scale: Scale) -> Self {
        match scale {
            Scale::Paper => Self::paper(preset),
            Scale::Fast => Self::fast(preset),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials must be at least 1"));
        }
        if self.k == 0 || self.k >= self.n {
            return Err(Error::param(format!("need 0 < k < n, got k = {}, n = {}", self.k, self.n)));
        }
        if self.budgets.is_empty() || self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("budgets must be non-empty and strictly increasing"));
        }
        if self.blocks.contains(&0) {
            return Err(Error::param("block sizes must be positive"));
        }
        if self.deltas.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::param("perturbation magnitudes must be finite and >= 0"));
        }
        match self.preset {
            Preset::GapSweep if self.gaps.is_empty() => Err(Error::param("gap_sweep needs at least one gap")),
            Preset::Schatten if self.p_values.is_empty() => Err(Error::param("schatten needs at least one p")),
            Preset::OrthoStability if self.policies.is_empty() => {
                Err(Error::param("ortho_stability needs at least one policy"))
            }
            _ => Ok(()),
        }
    }

    fn inputs(&self) -> Result<Vec<Arc<Input>>> {
        let (n, k) = (self.n, self.k);
        let specs: Vec<SpectrumSpec> = match self.preset {
            Preset::GapSweep => {
                self.gaps.iter().map(|&gap| SpectrumSpec::PairedGap { alpha: 1.1, gap, n }).collect()
            }
            Preset::BlockSize | Preset::PerturbSweep => vec![SpectrumSpec::RepeatedPairs { alpha: 1.005, k, n }],
            Preset::Grid => vec![
                SpectrumSpec::Exponential { alpha: 1.001, n },
                SpectrumSpec::Exponential { alpha: 1.01, n },
                SpectrumSpec::Exponential { alpha: 1.1, n },
                SpectrumSpec::Polynomial { beta: 0.1, n },
                SpectrumSpec::Polynomial { beta: 0.5, n },
                SpectrumSpec::Polynomial { beta: 1.5, n },
                SpectrumSpec::RepeatedPairs { alpha: 1.005, k: k + k % 2, n },
                SpectrumSpec::WishartLb { n },
            ],
            Preset::OrthoStability | Preset::Simultaneous => vec![SpectrumSpec::Exponential { alpha: 1.1, n }],
            Preset::Schatten => vec![SpectrumSpec::Polynomial { beta: 1.5, n }],
        };
        let mut inputs: Vec<Arc<Input>> = specs
            .iter()
            .map(|s| Ok(Arc::new(Input { id: s.id(), matrix: InputMatrix::from_spec(s)? })))
            .collect::<Result<_>>()?;
        if self.preset == Preset::Grid {
            for path in &self.matrices {
                let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let a = read_matrix_market(path)?;
                inputs.push(Arc::new(Input { id: format!("mtx:{name}"), matrix: InputMatrix::dense(a)? }));
            }
        }
        Ok(inputs)
    }

    fn cells(&self) -> Result<Vec<Cell>> {
        let inputs = self.inputs()?;
        let mut methods: Vec<(Method, f64)> = Vec::new();
        match self.preset {
            Preset::GapSweep => methods.push((Method::Krylov { block: 1, policy: OrthoPolicy::FullReorth }, 0.0)),
            Preset::BlockSize | Preset::Grid => {
                for &b in &self.blocks {
                    methods.push((Method::Krylov { block: b, policy: OrthoPolicy::FullReorth }, 0.0));
                }
            }
            Preset::PerturbSweep => {
                for &d in &self.deltas {
                    methods.push((Method::Krylov { block: 1, policy: OrthoPolicy::FullReorth }, d));
                }
                for &b in &self.blocks {
                    methods.push((Method::Krylov { block: b, policy: OrthoPolicy::FullReorth }, 0.0));
                }
            }
            Preset::OrthoStability => {
                for &b in &self.blocks {
                    for &policy in &self.policies {
                        methods.push((Method::Krylov { block: b, policy }, 0.0));
                    }
                }
            }
            Preset::Schatten => methods.push((Method::Schatten, 0.0)),
            Preset::Simultaneous => {
                methods.push((Method::Krylov { block: 1, policy: OrthoPolicy::FullReorth }, 0.0));
                methods.push((Method::SingleSimultaneous { ell: self.ell.unwrap_or(self.k) }, 0.0));
                methods.push((Method::BlockSimultaneous { block: self.k }, 0.0));
            }
        }
        let mut cells = Vec::new();
        for input in &inputs {
            for (method, delta) in &methods {
                for trial in 0..self.trials {
                    cells.push(Cell { input: Arc::clone(input), method: method.clone(), delta: *delta, trial });
                }
            }
        }
        Ok(cells)
    }

    /// Seed shared by every method and perturbation level of one trial on one input.
    pub fn trial_seed(&self, input_id: &str, trial: usize) -> u64 {
        cell_seed(self.base_seed, &format!("{}/{}/{}", self.preset, input_id, trial))
    }
}

#[derive(Debug)]
struct Input {
    id: String,
    matrix: InputMatrix,
}

#[derive(Debug, Clone, PartialEq)]
enum Method {
    Krylov { block: usize, policy: OrthoPolicy },
    SingleSimultaneous { ell: usize },
    BlockSimultaneous { block: usize },
    Schatten,
}

#[derive(Debug, Clone)]
struct Cell {
    input: Arc<Input>,
    method: Method,
    delta: f64,
    trial: usize,
}

impl Cell {
    fn describe(&self) -> String {
        format!("{}/{:?}/delta={:e}/trial={}", self.input.id, self.method, self.delta, self.trial)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub cell: String,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub records: Vec<ExperimentRecord>,
    pub failures: Vec<CellFailure>,
}

/// Runs every cell of the preset, in parallel, returning records in a fixed
/// order (input, method, trial, budget) regardless of scheduling.
pub fn run_preset(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let cells = cfg.cells()?;
    let results: Vec<Result<Vec<ExperimentRecord>>> = cells.par_iter().map(|c| run_cell(cfg, c)).collect();
    let mut out = RunOutput::default();
    for (cell, res) in cells.iter().zip(results) {
        match res {
            Ok(mut r) => out.records.append(&mut r),
            Err(e) => out.failures.push(CellFailure { cell: cell.describe(), message: e.to_string() }),
        }
    }
    Ok(out)
}

fn perturbed_operator(input: &InputMatrix, delta: f64, seed: u64) -> Result<GramOperator> {
    let op = input.as_operator();
    if delta == 0.0 {
        return Ok(op);
    }
    let route = match input {
        InputMatrix::Diagonal(_) => PerturbationRoute::Matrix,
        InputMatrix::Dense { a, .. } if a.nrows() == a.ncols() && a == &a.transpose() => PerturbationRoute::Matrix,
        InputMatrix::Dense { .. } => PerturbationRoute::Gram,
    };
    op.perturb_diagonal(delta, seed, route)
}

fn run_cell(cfg: &ExperimentConfig, cell: &Cell) -> Result<Vec<ExperimentRecord>> {
    let input = &cell.input;
    let seed = cfg.trial_seed(&input.id, cell.trial);
    let k = cfg.k;
    let preset = cfg.preset.name();
    let mut out = Vec::new();
    match &cell.method {
        &Method::Krylov { block, policy } => {
            let max = *cfg.budgets.last().expect("validated");
            if (max as usize) < block {
                return Err(Error::param(format!("largest budget {max} is below block size {block}")));
            }
            let mut op = perturbed_operator(&input.matrix, cell.delta, seed)?;
            let scfg = SolverConfig::new(k, block, max as usize / block - 1).with_seed(seed).with_policy(policy);
            let space = KrylovSpace::build(&mut op, &scfg)?;
            let projected = space.projected_matrix();
            for &budget in &cfg.budgets {
                // Skip budgets whose nominal subspace cannot hold k vectors.
                if (budget as usize / block) * block < k {
                    continue;
                }
                let Some(m) = space.prefix_for_budget(budget) else { continue };
                let res = space.extract(k, m, &projected)?;
                let eps = epsilon_empirical(&input.matrix, &res.q, k, Norm::Frobenius)?;
                out.push(ExperimentRecord::new(preset, &input.id, block, cell.delta, policy.name(), cell.trial, budget, eps));
            }
        }
        &Method::SingleSimultaneous { ell } => {
            let id = format!("{}#method=single_simultaneous:ell={ell}", input.id);
            for &budget in &cfg.budgets {
                if (budget as usize) < ell {
                    continue;
                }
                let mut op = input.matrix.as_operator();
                let scfg = SolverConfig::single_vector(k, budget as usize - 1).with_seed(seed);
                let res = single_vector_simultaneous(&mut op, &scfg, ell)?;
                let eps = epsilon_empirical(&input.matrix, &res.q, k, Norm::Frobenius)?;
                out.push(ExperimentRecord::new(preset, &id, 1, 0.0, "full", cell.trial, budget, eps));
            }
        }
        &Method::BlockSimultaneous { block } => {
            let id = format!("{}#method=block_simultaneous", input.id);
            for &budget in &cfg.budgets {
                if (budget as usize) < block {
                    continue;
                }
                let mut op = input.matrix.as_operator();
                let scfg = SolverConfig::new(k, block, budget as usize / block - 1).with_seed(seed);
                let res = simultaneous_iteration(&mut op, &scfg)?;
                let eps = epsilon_empirical(&input.matrix, &res.q, k, Norm::Frobenius)?;
                out.push(ExperimentRecord::new(preset, &id, block, 0.0, "full", cell.trial, budget, eps));
            }
        }
        Method::Schatten => out = run_schatten_cell(cfg, cell, seed)?,
    }
    Ok(out)
}

// One Krylov run on Aᵀ, evaluated at every budget for both the two-step
// basis orth(AQ) and Q itself.
fn run_schatten_cell(cfg: &ExperimentConfig, cell: &Cell, seed: u64) -> Result<Vec<ExperimentRecord>> {
    let a = &cell.input.matrix;
    let k = cfg.k;
    let max = *cfg.budgets.last().expect("validated") as usize;
    let mut op = a.transpose().as_operator();
    let space = KrylovSpace::build(&mut op, &SolverConfig::single_vector(k, max - 1).with_seed(seed))?;
    let projected = space.projected_matrix();
    let dense = a.to_dense();
    let mut out = Vec::new();
    for &budget in &cfg.budgets {
        if (budget as usize) < k {
            continue;
        }
        let Some(m) = space.prefix_for_budget(budget) else { continue };
        let res = space.extract(k, m, &projected)?;
        let z = OrthonormalBasis::from_columns(&(&dense * res.q.view()), DEFAULT_DROP_TOL)?;
        let forms: Vec<(&str, Vec<f64>)> = if a.rows() == a.cols() && dense == dense.transpose() {
            vec![
                ("two_step", singular_values(&residual_matrix(a, &z)?).iter().copied().collect()),
                ("one_step", singular_values(&residual_matrix(a, &res.q)?).iter().copied().collect()),
            ]
        } else {
            vec![("two_step", singular_values(&residual_matrix(a, &z)?).iter().copied().collect())]
        };
        for &p in &cfg.p_values {
            let opt = optimal_error(a.sigma(), k, Norm::Schatten(p))?;
            if opt == 0.0 {
                return Err(Error::ZeroReference);
            }
            for (form, sv) in &forms {
                let eps = (schatten_norm(sv, p) - opt) / opt;
                let id = format!("{}#schatten_p={p}#{form}", cell.input.id);
                out.push(ExperimentRecord::new(cfg.preset.name(), &id, 1, 0.0, "full", cell.trial, budget, eps));
            }
        }
    }
    Ok(out)
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone)]
pub struct OutputFiles {
    pub records: PathBuf,
    pub summary: PathBuf,
    pub failures: Option<PathBuf>,
}

/// Writes `<preset>.csv`, `<preset>_summary.csv` and, when any cell failed, `<preset>_failures.csv`.
pub fn write_outputs(dir: &Path, preset: Preset, output: &RunOutput) -> Result<OutputFiles> {
    std::fs::create_dir_all(dir)?;
    let records = dir.join(format!("{preset}.csv"));
    write_csv(&output.records, &records)?;
    let summary = dir.join(format!("{preset}_summary.csv"));
    let rows = aggregate_quantiles(&output.records, &GroupKey::ALL)?;
    write_summary(&rows, &GroupKey::ALL, std::fs::File::create(&summary)?)?;
    let failures = if output.failures.is_empty() {
        None
    } else {
        let path = dir.join(format!("{preset}_failures.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["cell", "message"])?;
        for f in &output.failures {
            w.write_record([&f.cell, &f.message])?;
        }
        w.flush()?;
        Some(path)
    };
    Ok(OutputFiles { records, summary, failures })
}

/// Estimates `σ_{k+1}` with a short single-vector run (`t = k + 10`, target `k + 1`).
pub fn pilot_sigma(op: &mut GramOperator, k: usize, seed: u64) -> Result<f64> {
    let cfg = SolverConfig::single_vector(k + 1, k + 10).with_seed(seed);
    let res = single_vector_krylov(op, &cfg)?;
    res.ritz_values.get(k).map(|v| v.max(0.0).sqrt()).ok_or(Error::InsufficientSubspace { available: res.ritz_values.len(), k: k + 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(preset: Preset) -> ExperimentConfig {
        let mut c = ExperimentConfig::fast(preset);
        c.n = 60;
        c.k = 4;
        c.trials = 2;
        c
    }

    #[test]
    fn gap_sweep_record_count() {
        let mut c = tiny(Preset::GapSweep);
        c.gaps = vec![1e-2, 1e-4];
        let out = run_preset(&c).unwrap();
        assert!(out.failures.is_empty(), "{:?}", out.failures);
        assert_eq!(out.records.len(), 2 * 10 * 2);
        assert!(out.records.iter().all(|r| r.eps_empirical_raw >= -1e-10));
    }

    #[test]
    fn runs_are_deterministic() {
        let mut c = tiny(Preset::BlockSize);
        c.blocks = vec![1, 2];
        c.budgets = vec![8, 16, 24];
        let a = run_preset(&c).unwrap();
        let b = run_preset(&c).unwrap();
        let (mut x, mut y) = (Vec::new(), Vec::new());
        write_records(&a.records, &mut x).unwrap();
        write_records(&b.records, &mut y).unwrap();
        assert_eq!(x, y);
        assert_eq!(a.records.len(), 2 * 2 * 3);
    }

    #[test]
    fn every_preset_runs_small() {
        for preset in Preset::ALL {
            let mut c = tiny(preset);
            c.trials = 1;
            c.budgets = c.budgets.iter().copied().filter(|b| *b <= 60).collect();
            if c.budgets.is_empty() {
                c.budgets = vec![20, 40];
            }
            if preset == Preset::GapSweep {
                c.gaps = vec![1e-2];
            }
            if matches!(preset, Preset::Grid | Preset::OrthoStability) {
                c.blocks = vec![1, 2, 4];
            }
            let out = run_preset(&c).unwrap();
            assert!(out.failures.is_empty(), "{preset}: {:?}", out.failures);
            assert!(!out.records.is_empty(), "{preset}");
        }
    }

    #[test]
    fn failures_do_not_abort_the_sweep() {
        let mut c = tiny(Preset::BlockSize);
        c.blocks = vec![1, 100];
        c.budgets = vec![8, 16];
        let out = run_preset(&c).unwrap();
        assert_eq!(out.failures.len(), 2);
        assert!(!out.records.is_empty());
    }

    #[test]
    fn invalid_configs() {
        let mut c = tiny(Preset::GapSweep);
        c.budgets = vec![10, 10];
        assert!(run_preset(&c).unwrap_err().is_config());
        let mut c = tiny(Preset::GapSweep);
        c.trials = 0;
        assert!(c.validate().is_err());
        assert!("nope".parse::<Preset>().is_err());
        assert_eq!("grid".parse::<Preset>().unwrap(), Preset::Grid);
    }

    #[test]
    fn pilot_estimate_is_close() {
        let s: Vec<f64> = (1..=100).map(|i| 1.2f64.powi(-i)).collect();
        let mut op = GramOperator::from_spectrum(&s);
        let est = pilot_sigma(&mut op, 5, 3).unwrap();
        assert!((est - s[5]).abs() / s[5] < 1e-3);
    }

    #[test]
    fn outputs_written() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = tiny(Preset::GapSweep);
        c.gaps = vec![1e-2];
        let out = run_preset(&c).unwrap();
        let files = write_outputs(dir.path(), Preset::GapSweep, &out).unwrap();
        assert_eq!(read_csv(&files.records).unwrap(), out.records);
        assert!(files.summary.exists());
        assert!(files.failures.is_none());
    }
}
