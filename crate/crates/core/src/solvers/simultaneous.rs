use nalgebra::DMatrix;

use super::{SolverConfig, SolverResult, StartBlock};
use crate::error::{Error, Result};
use crate::linalg::{eigh_small, OrthonormalBasis};
use crate::operator::GramOperator;
use crate::rng::{self, Purpose};

fn rayleigh_ritz(
    z: &OrthonormalBasis,
    gz: &DMatrix<f64>,
    k: usize,
    matvecs: u64,
    drops: usize,
) -> Result<SolverResult> {
    let m = z.ncols();
    if m == 0 {
        return Err(Error::DegenerateStart);
    }
    let proj = z.view().tr_mul(gz);
    let eig = eigh_small(&proj)?;
    let p = k.min(m);
    let q = z.view() * eig.vectors.columns(0, p);
    Ok(SolverResult {
        q: OrthonormalBasis::from_raw(z.nrows(), q.as_slice().to_vec()),
        ritz_values: eig.values.iter().take(p).map(|v| v.max(0.0)).collect(),
        matvecs,
        subspace_dim: m,
        drop_count: drops,
        rank_deficient: p < k,
    })
}

/// Block power method: `Z ← orth(G Z)` for `t` rounds, then Rayleigh-Ritz.
///
/// Spends `(t + 1)·b` matvecs; the final `b` form `G Z` for the projected matrix.
pub fn simultaneous_iteration(op: &mut GramOperator, cfg: &SolverConfig) -> Result<SolverResult> {
    cfg.validate()?;
    let n = op.rows();
    let b = cfg.block_size;
    if b < cfg.target_rank {
        return Err(Error::param(format!("simultaneous iteration needs b >= k, got b={b}, k={}", cfg.target_rank)));
    }
    let start = match &cfg.start {
        StartBlock::Gaussian => rng::gaussian_matrix(&mut rng::stream(cfg.seed, 0, Purpose::Start), n, b),
        StartBlock::Explicit(m) => {
            if m.nrows() != n {
                return Err(Error::DimensionMismatch { expected: n, got: m.nrows() });
            }
            m.clone()
        }
        StartBlock::Simulated { .. } => {
            return Err(Error::param("simultaneous iteration takes a Gaussian or explicit start"));
        }
    };
    let before = op.apply_count();
    let mut z = OrthonormalBasis::from_columns(&start, cfg.drop_tol)?;
    if z.ncols() == 0 {
        return Err(Error::DegenerateStart);
    }
    let mut drops = z.drop_log().len();
    let mut gz = op.apply_block(&z.to_matrix())?;
    for _ in 0..cfg.iterations {
        z = OrthonormalBasis::from_columns(&gz, cfg.drop_tol)?;
        drops += z.drop_log().len();
        if z.ncols() == 0 {
            return Err(Error::DegenerateStart);
        }
        gz = op.apply_block(&z.to_matrix())?;
    }
    rayleigh_ritz(&z, &gz, cfg.target_rank, op.apply_count() - before, drops)
}

/// Single-vector simultaneous iteration with memory `ell`.
///
/// The window `[G^{t−ℓ+1}x, …, G^t x]` spans the Krylov space of dimension
/// `ℓ` started from `G^{t−ℓ+1}x`. The leading power is reached with
/// normalized power steps, and the window is then grown as an orthonormal
/// Krylov basis, so no more than `ℓ + 1` vectors are held at once.
/// Spends `t + 1` matvecs.
pub fn single_vector_simultaneous(op: &mut GramOperator, cfg: &SolverConfig, ell: usize) -> Result<SolverResult> {
    cfg.validate()?;
    if cfg.block_size != 1 {
        return Err(Error::param("single-vector simultaneous iteration needs block size 1"));
    }
    if ell < cfg.target_rank {
        return Err(Error::param(format!("memory budget {ell} is below the target rank {}", cfg.target_rank)));
    }
    let t = cfg.iterations;
    if t + 1 < ell {
        return Err(Error::InsufficientSubspace { available: t + 1, k: ell });
    }
    let n = op.rows();
    let before = op.apply_count();
    let mut x = match &cfg.start {
        StartBlock::Gaussian => rng::gaussian_vector(&mut rng::stream(cfg.seed, 0, Purpose::Start), n),
        StartBlock::Explicit(m) if m.ncols() == 1 && m.nrows() == n => m.column(0).into_owned(),
        _ => return Err(Error::param("single-vector simultaneous iteration takes a single start vector")),
    };
    let nx = x.norm();
    if nx == 0.0 {
        return Err(Error::DegenerateStart);
    }
    x /= nx;
    let mut image = vec![0.0; n];
    for _ in 0..(t + 1 - ell) {
        op.apply_into(x.as_slice(), &mut image)?;
        x.as_mut_slice().copy_from_slice(&image);
        let nx = x.norm();
        if nx == 0.0 {
            return Err(Error::DegenerateStart);
        }
        x /= nx;
    }
    let mut z = OrthonormalBasis::empty(n);
    z.extend(x.as_slice(), cfg.drop_tol)?;
    let mut images: Vec<f64> = Vec::with_capacity(ell * n);
    loop {
        let j = z.ncols() - 1;
        op.apply_into(z.column(j), &mut image)?;
        images.extend_from_slice(&image);
        if z.ncols() == ell || !z.extend(&image, cfg.drop_tol)? {
            break;
        }
    }
    let gz = DMatrix::from_column_slice(n, z.ncols(), &images);
    let drops = z.drop_log().len();
    rayleigh_ritz(&z, &gz, cfg.target_rank, op.apply_count() - before, drops)
}
