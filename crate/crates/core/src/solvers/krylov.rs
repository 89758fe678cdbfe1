use nalgebra::{DMatrix, DMatrixView, DVector};

use super::{OrthoPolicy, SolverConfig, SolverResult, StartBlock};
use crate::error::{Error, Result};
use crate::linalg::{self, eigh_small, mgs_sweep, norm, OrthonormalBasis};
use crate::operator::GramOperator;
use crate::rng::{self, Purpose};

/// Basis of `[B, GB, …, G^t B]` together with its cached image under `G`.
///
/// Every stored column has had `G` applied exactly once, so the number of
/// columns equals the matvecs spent on the space (plus any spent building a
/// simulated start block). Any prefix ending on a block boundary is itself a
/// valid Krylov basis, which lets one run be evaluated at many budgets.
///
/// Under `LanczosLocal` the columns drift away from orthogonality, so
/// Rayleigh-Ritz runs on their numerical span, found from `ZᵀZ`.
#[derive(Debug, Clone)]
pub struct KrylovSpace {
    n: usize,
    z: Vec<f64>,
    gz: Vec<f64>,
    /// `ZᵀZ`, kept when `Z` is not orthonormal by construction.
    gram: Option<DMatrix<f64>>,
    block_ends: Vec<usize>,
    drops: usize,
    policy: OrthoPolicy,
    drop_tol: f64,
    matvecs: u64,
}

impl KrylovSpace {
    /// Runs `cfg.iterations` block iterations from the configured start.
    pub fn build(op: &mut GramOperator, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let before = op.apply_count();
        let start = start_block(op, cfg)?;
        let mut space = Self::from_start(op, &start, cfg.iterations, cfg.ortho_policy, cfg.drop_tol)?;
        space.matvecs = op.apply_count() - before;
        Ok(space)
    }

    fn from_start(
        op: &mut GramOperator,
        start: &DMatrix<f64>,
        iterations: usize,
        policy: OrthoPolicy,
        drop_tol: f64,
    ) -> Result<Self> {
        let n = op.rows();
        if start.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, got: start.nrows() });
        }
        if start.iter().all(|v| *v == 0.0) {
            return Err(Error::DegenerateStart);
        }
        let mut space = Self {
            n,
            z: Vec::new(),
            gz: Vec::new(),
            gram: None,
            block_ends: Vec::new(),
            drops: 0,
            policy,
            drop_tol,
            matvecs: 0,
        };
        let columns: Vec<Vec<f64>> = (0..start.ncols()).map(|j| start.column(j).as_slice().to_vec()).collect();
        space.push_block(columns);
        if space.z.is_empty() {
            return Err(Error::DegenerateStart);
        }
        let mut image = vec![0.0; n];
        for it in 0..=iterations {
            let lo = space.block_start(space.block_ends.len() - 1);
            let hi = space.ncols();
            let mut next = Vec::with_capacity(hi - lo);
            for j in lo..hi {
                op.apply_into(&space.z[j * n..(j + 1) * n], &mut image)?;
                space.gz.extend_from_slice(&image);
                next.push(image.clone());
            }
            if it == iterations {
                break;
            }
            let before = space.ncols();
            space.push_block(next);
            if space.ncols() == before {
                // invariant subspace; nothing left to generate
                space.block_ends.pop();
                break;
            }
        }
        space.prepare_extraction();
        Ok(space)
    }

    fn prepare_extraction(&mut self) {
        if self.policy == OrthoPolicy::LanczosLocal {
            let z = self.basis();
            self.gram = Some(z.tr_mul(&z));
        }
    }

    fn block_start(&self, b: usize) -> usize {
        if b == 0 {
            0
        } else {
            self.block_ends[b - 1]
        }
    }

    /// Orthonormalizes `candidates` into a new block under the space's policy.
    fn push_block(&mut self, candidates: Vec<Vec<f64>>) {
        let n = self.n;
        let nb = self.block_ends.len();
        // LanczosLocal: only the current block and the one before it.
        let window_lo = match self.policy {
            OrthoPolicy::FullReorth => 0,
            OrthoPolicy::LanczosLocal => self.block_start(nb.saturating_sub(2)),
        };
        for mut w in candidates {
            let original = norm(&w);
            let hi = self.ncols();
            mgs_sweep(&self.z, n, window_lo..hi, &mut w);
            mgs_sweep(&self.z, n, window_lo..hi, &mut w);
            let r = norm(&w);
            if original == 0.0 || !r.is_finite() || r < self.drop_tol * original {
                self.drops += 1;
                continue;
            }
            w.iter_mut().for_each(|x| *x /= r);
            self.z.extend_from_slice(&w);
        }
        self.block_ends.push(self.ncols());
    }

    pub fn ncols(&self) -> usize {
        self.z.len() / self.n
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    /// Cumulative column counts at the end of each block.
    pub fn block_ends(&self) -> &[usize] {
        &self.block_ends
    }

    pub fn drop_count(&self) -> usize {
        self.drops
    }

    pub fn policy(&self) -> OrthoPolicy {
        self.policy
    }

    /// Matvecs spent building the space, including any simulated start block.
    pub fn matvecs(&self) -> u64 {
        self.matvecs
    }

    /// Matvecs spent on the space truncated to its first `m` columns.
    pub fn matvecs_at(&self, m: usize) -> u64 {
        self.matvecs - (self.ncols() - m) as u64
    }

    /// Largest block boundary whose matvec cost fits in `budget`.
    pub fn prefix_for_budget(&self, budget: u64) -> Option<usize> {
        self.block_ends.iter().rev().copied().find(|&m| self.matvecs_at(m) <= budget)
    }

    pub fn basis(&self) -> DMatrixView<'_, f64> {
        DMatrixView::from_slice(&self.z, self.n, self.ncols())
    }

    pub fn image(&self) -> DMatrixView<'_, f64> {
        DMatrixView::from_slice(&self.gz, self.n, self.ncols())
    }

    /// `ZᵀGZ` over all columns, symmetrized. Leading principal submatrices
    /// give the projected matrix of every prefix.
    pub fn projected_matrix(&self) -> DMatrix<f64> {
        let m = self.basis().tr_mul(&self.image());
        (&m + m.transpose()) * 0.5
    }

    /// `‖ZᵀZ − I‖_max`.
    pub fn orthogonality_loss(&self) -> f64 {
        let z = self.basis();
        let g = z.tr_mul(&z);
        (g - DMatrix::identity(self.ncols(), self.ncols())).amax()
    }

    /// Rayleigh-Ritz on the first `m` columns.
    pub fn extract(&self, k: usize, m: usize, projected: &DMatrix<f64>) -> Result<SolverResult> {
        if m == 0 || m > self.ncols() || projected.nrows() < m {
            return Err(Error::DimensionMismatch { expected: self.ncols(), got: m });
        }
        let n = self.n;
        let zm = DMatrixView::from_slice(&self.z[..m * n], n, m);
        let pm = projected.view((0, 0), (m, m)).into_owned();
        // Coefficients W with ZW orthonormal; the identity when Z already is.
        let w = match &self.gram {
            None => None,
            Some(gram) => Some(numerical_span(&gram.view((0, 0), (m, m)).into_owned())?),
        };
        let reduced = match &w {
            None => pm,
            Some(w) => {
                let r = w.transpose() * pm * w;
                (&r + r.transpose()) * 0.5
            }
        };
        let eig = eigh_small(&reduced)?;
        let p = k.min(reduced.nrows());
        let y = eig.vectors.columns(0, p);
        let coeffs = match &w {
            None => y.into_owned(),
            Some(w) => w * y,
        };
        let q_raw = zm * coeffs;
        let q = match self.policy {
            OrthoPolicy::FullReorth => OrthonormalBasis::from_raw(n, q_raw.as_slice().to_vec()),
            // Remove the small residual non-orthogonality left by the projection.
            OrthoPolicy::LanczosLocal => OrthonormalBasis::from_columns(&q_raw, self.drop_tol)?,
        };
        let ritz: Vec<f64> = eig.values.iter().take(q.ncols()).map(|v| v.max(0.0)).collect();
        let rank_deficient = q.ncols() < k;
        Ok(SolverResult {
            q,
            ritz_values: ritz,
            matvecs: self.matvecs_at(m),
            subspace_dim: m,
            drop_count: self.drops,
            rank_deficient,
        })
    }
}

// Relative cutoff on the eigenvalues of `ZᵀZ`, near the square root of
// machine precision. Errors in the cached `ZᵀGZ` are amplified by the
// inverse of the kept eigenvalues.
const SPAN_CUTOFF: f64 = 1e-8;

/// `W = V Λ^{-1/2}` over the eigenpairs of `gram` above the cutoff.
fn numerical_span(gram: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = eigh_small(gram)?;
    let top = eig.values[0];
    let keep = eig.values.iter().take_while(|&&v| v > SPAN_CUTOFF * top).count();
    Ok(DMatrix::from_fn(gram.nrows(), keep, |i, j| eig.vectors[(i, j)] / eig.values[j].sqrt()))
}

fn start_block(op: &mut GramOperator, cfg: &SolverConfig) -> Result<DMatrix<f64>> {
    let n = op.rows();
    match &cfg.start {
        StartBlock::Gaussian => {
            let mut rng = rng::stream(cfg.seed, 0, Purpose::Start);
            Ok(rng::gaussian_matrix(&mut rng, n, cfg.block_size))
        }
        StartBlock::Explicit(b) => {
            if b.nrows() != n {
                return Err(Error::DimensionMismatch { expected: n, got: b.nrows() });
            }
            Ok(b.clone())
        }
        StartBlock::Simulated { ell } => {
            let mut rng = rng::stream(cfg.seed, 0, Purpose::Start);
            let x = rng::gaussian_vector(&mut rng, n);
            build_simulated_block(op, &x, *ell)
        }
    }
}

fn check_subspace(cfg: &SolverConfig) -> Result<()> {
    let available = (cfg.iterations + 1).saturating_mul(cfg.effective_width());
    if available < cfg.target_rank {
        return Err(Error::InsufficientSubspace { available, k: cfg.target_rank });
    }
    Ok(())
}

/// Block Krylov iteration with Rayleigh-Ritz extraction.
pub fn block_krylov(op: &mut GramOperator, cfg: &SolverConfig) -> Result<SolverResult> {
    cfg.validate()?;
    check_subspace(cfg)?;
    let space = KrylovSpace::build(op, cfg)?;
    let projected = space.projected_matrix();
    space.extract(cfg.target_rank, space.ncols(), &projected)
}

/// Block Krylov with a single Gaussian start vector.
pub fn single_vector_krylov(op: &mut GramOperator, cfg: &SolverConfig) -> Result<SolverResult> {
    if cfg.block_size != 1 {
        return Err(Error::param(format!("single-vector Krylov needs block size 1, got {}", cfg.block_size)));
    }
    block_krylov(op, cfg)
}

/// Orthonormal basis of `span[x, Gx, …, G^{ℓ−1}x]`, column `j` spanning the
/// first `j+1` powers. Costs `ℓ − 1` matvecs. Stops early, returning fewer
/// columns, if the sequence becomes numerically dependent.
pub fn build_simulated_block(op: &mut GramOperator, x: &DVector<f64>, ell: usize) -> Result<DMatrix<f64>> {
    let n = op.rows();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    if ell == 0 {
        return Err(Error::param("simulated block needs at least one column"));
    }
    let mut basis = OrthonormalBasis::empty(n);
    if !basis.extend(x.as_slice(), linalg::DEFAULT_DROP_TOL)? {
        return Err(Error::DegenerateStart);
    }
    let mut image = vec![0.0; n];
    for j in 1..ell {
        op.apply_into(basis.column(j - 1), &mut image)?;
        if !basis.extend(&image, linalg::DEFAULT_DROP_TOL)? {
            break;
        }
    }
    Ok(basis.to_matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::principal_angle_distance;

    fn diag_op(s: &[f64]) -> GramOperator {
        GramOperator::from_spectrum(s)
    }

    #[test]
    fn full_space_recovers_exact_ritz_values() {
        let mut op = diag_op(&[3.0, 2.0, 1.0]);
        let cfg = SolverConfig::new(3, 3, 0).with_start(StartBlock::Explicit(DMatrix::identity(3, 3)));
        let res = block_krylov(&mut op, &cfg).unwrap();
        assert_eq!(res.matvecs, 3);
        assert_eq!(res.subspace_dim, 3);
        for (got, want) in res.ritz_values.iter().zip([9.0, 4.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn dominant_vector_of_diagonal() {
        let mut op = diag_op(&[3.0, 2.0, 1.0]);
        let res = single_vector_krylov(&mut op, &SolverConfig::single_vector(1, 2).with_seed(5)).unwrap();
        assert!((res.ritz_values[0] - 9.0).abs() < 1e-6);
        assert!((res.q.column(0)[0].abs() - 1.0).abs() < 1e-6);
        assert_eq!(res.matvecs, 3);
    }

    #[test]
    fn rank_deficient_identity() {
        // A = [I_4 | 0] so G = I_4 and the Krylov space of any x is span{x}.
        let mut a = DMatrix::zeros(4, 7);
        a.view_mut((0, 0), (4, 4)).fill_with_identity();
        let mut op = GramOperator::from_dense(a);
        let res = single_vector_krylov(&mut op, &SolverConfig::single_vector(4, 6).with_seed(1)).unwrap();
        assert_eq!(res.subspace_dim, 1);
        assert!(res.rank_deficient);
        assert_eq!(res.q.ncols(), 1);
        assert_eq!(res.matvecs, 1);
        assert_eq!(res.drop_count, 1);
    }

    #[test]
    fn errors() {
        let mut op = diag_op(&[1.0, 0.5, 0.25]);
        assert!(matches!(
            block_krylov(&mut op, &SolverConfig::new(3, 1, 1)),
            Err(Error::InsufficientSubspace { available: 2, k: 3 })
        ));
        let zero = SolverConfig::new(1, 1, 2).with_start(StartBlock::Explicit(DMatrix::zeros(3, 1)));
        assert!(matches!(block_krylov(&mut op, &zero), Err(Error::DegenerateStart)));
        assert!(single_vector_krylov(&mut op, &SolverConfig::new(1, 2, 3)).is_err());
        let sim = SolverConfig::new(2, 1, 3).with_start(StartBlock::Simulated { ell: 1 });
        assert!(block_krylov(&mut op, &sim).is_err());
    }

    #[test]
    fn simulated_block_examples() {
        let mut op = diag_op(&[2.0, 1.0]);
        let x = DVector::from_vec(vec![1.0, 1.0]);
        let one = build_simulated_block(&mut op, &x, 1).unwrap();
        assert_eq!(op.apply_count(), 0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((one[(0, 0)] - h).abs() < 1e-15 && (one[(1, 0)] - h).abs() < 1e-15);

        let s = build_simulated_block(&mut op, &x, 2).unwrap();
        assert_eq!(op.apply_count(), 1);
        let sb = OrthonormalBasis::from_orthonormal(&s).unwrap();
        let hand = OrthonormalBasis::from_columns(&DMatrix::from_column_slice(2, 2, &[1.0, 1.0, 4.0, 1.0]), 1e-12).unwrap();
        assert!(principal_angle_distance(&sb, &hand).unwrap() < 1e-15);
    }

    #[test]
    fn matvecs_follow_iteration_count() {
        let s: Vec<f64> = (1..=40).map(|i| 1.1f64.powi(-i)).collect();
        for (b, t) in [(1usize, 12usize), (2, 7), (5, 3)] {
            let mut op = diag_op(&s);
            let res = block_krylov(&mut op, &SolverConfig::new(4, b, t).with_seed(3)).unwrap();
            assert_eq!(res.matvecs, ((t + 1) * b) as u64);
            assert_eq!(op.apply_count(), res.matvecs);
            assert_eq!(res.drop_count, 0);
        }
    }

    #[test]
    fn lanczos_matches_full_on_first_two_columns() {
        let s: Vec<f64> = (1..=30).map(|i| 1.2f64.powi(-i)).collect();
        let mut op1 = diag_op(&s);
        let mut op2 = diag_op(&s);
        let cfg = SolverConfig::single_vector(1, 1).with_seed(9);
        let full = KrylovSpace::build(&mut op1, &cfg).unwrap();
        let lan = KrylovSpace::build(&mut op2, &cfg.clone().with_policy(OrthoPolicy::LanczosLocal)).unwrap();
        assert_eq!(full.basis(), lan.basis());
    }

    #[test]
    fn budget_prefixes() {
        let s: Vec<f64> = (1..=50).map(|i| 1.1f64.powi(-i)).collect();
        let mut op = diag_op(&s);
        let space = KrylovSpace::build(&mut op, &SolverConfig::new(5, 3, 9).with_seed(2)).unwrap();
        assert_eq!(space.ncols(), 30);
        assert_eq!(space.prefix_for_budget(20), Some(18));
        assert_eq!(space.prefix_for_budget(2), None);
        assert_eq!(space.matvecs_at(18), 18);
    }

    #[test]
    fn lanczos_loses_orthogonality_but_extracts_orthonormal_ritz_vectors() {
        let s: Vec<f64> = (0..300).map(|i| 1.1f64.powi(-i)).collect();
        let mut op = diag_op(&s);
        let cfg = SolverConfig::single_vector(10, 200).with_seed(4).with_policy(OrthoPolicy::LanczosLocal);
        let space = KrylovSpace::build(&mut op, &cfg).unwrap();
        assert!(space.orthogonality_loss() > 1e-6);
        let projected = space.projected_matrix();
        let res = space.extract(10, space.ncols(), &projected).unwrap();
        assert!(res.q.orthogonality_error() < 1e-12);
        assert_eq!(res.matvecs, 201);
        for (j, v) in res.ritz_values.iter().enumerate() {
            assert!((v - s[j] * s[j]).abs() < 1e-10);
        }
    }
}
