//! Krylov and simultaneous-iteration low-rank solvers.

mod krylov;
pub mod schedule;
mod simultaneous;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{OrthonormalBasis, DEFAULT_DROP_TOL};

pub use krylov::{block_krylov, build_simulated_block, single_vector_krylov, KrylovSpace};
pub use simultaneous::{simultaneous_iteration, single_vector_simultaneous};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrthoPolicy {
    /// Two MGS passes against every earlier column.
    FullReorth,
    /// Projects only against the previous two blocks (the current block
    /// and the one before it), as a Lanczos recurrence would.
    LanczosLocal,
}

impl OrthoPolicy {
    pub fn name(self) -> &'static str {
        match self {
            OrthoPolicy::FullReorth => "full",
            OrthoPolicy::LanczosLocal => "lanczos",
        }
    }
}

impl std::str::FromStr for OrthoPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" | "full_reorth" | "FullReorth" => Ok(OrthoPolicy::FullReorth),
            "lanczos" | "lanczos_local" | "LanczosLocal" => Ok(OrthoPolicy::LanczosLocal),
            other => Err(Error::param(format!("unknown orthogonalization policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StartBlock {
    /// i.i.d. standard normal `n × b`, drawn from the config seed.
    Gaussian,
    Explicit(DMatrix<f64>),
    /// Orthonormal basis of `[x, Gx, …, G^{ℓ−1}x]` for Gaussian `x`; needs `b = 1`.
    Simulated { ell: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub target_rank: usize,
    pub block_size: usize,
    pub iterations: usize,
    pub ortho_policy: OrthoPolicy,
    pub seed: u64,
    pub start: StartBlock,
    pub drop_tol: f64,
}

impl SolverConfig {
    pub fn new(target_rank: usize, block_size: usize, iterations: usize) -> Self {
        Self {
            target_rank,
            block_size,
            iterations,
            ortho_policy: OrthoPolicy::FullReorth,
            seed: 0,
            start: StartBlock::Gaussian,
            drop_tol: DEFAULT_DROP_TOL,
        }
    }

    pub fn single_vector(target_rank: usize, iterations: usize) -> Self {
        Self::new(target_rank, 1, iterations)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_policy(mut self, policy: OrthoPolicy) -> Self {
        self.ortho_policy = policy;
        self
    }

    pub fn with_start(mut self, start: StartBlock) -> Self {
        self.start = start;
        self
    }

    /// Width of the block that is actually iterated.
    pub fn effective_width(&self) -> usize {
        match &self.start {
            StartBlock::Explicit(b) => b.ncols(),
            StartBlock::Simulated { ell } => *ell,
            StartBlock::Gaussian => self.block_size,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.target_rank == 0 {
            return Err(Error::param("target rank must be positive"));
        }
        if self.block_size == 0 {
            return Err(Error::param("block size must be positive"));
        }
        if !(self.drop_tol > 0.0) {
            return Err(Error::param("drop tolerance must be positive"));
        }
        match &self.start {
            StartBlock::Simulated { ell } => {
                if self.block_size != 1 {
                    return Err(Error::param("a simulated start block requires block size 1"));
                }
                if *ell < self.target_rank {
                    return Err(Error::param(format!(
                        "simulated block width {ell} is below the target rank {}",
                        self.target_rank
                    )));
                }
            }
            StartBlock::Explicit(b) if b.ncols() != self.block_size => {
                return Err(Error::DimensionMismatch { expected: self.block_size, got: b.ncols() });
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    /// `n × min(k, subspace_dim)` Ritz vectors.
    pub q: OrthonormalBasis,
    /// Descending estimates of `σ_i²`.
    pub ritz_values: Vec<f64>,
    pub matvecs: u64,
    pub subspace_dim: usize,
    pub drop_count: usize,
    /// Set when fewer than `k` Ritz vectors were available.
    pub rank_deficient: bool,
}
