//! Synthetic singular value profiles and the matrices they induce.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::singular_values;
use crate::operator::GramOperator;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumSpec {
    /// `σ_i = α^{-i}`, `i = 1..n`.
    Exponential { alpha: f64, n: usize },
    /// `σ_i = i^{-β}`.
    Polynomial { beta: f64, n: usize },
    /// Pairs `α^{-j}, α^{-j}/(1+g)` for `j = 0..n/2`, sorted descending.
    PairedGap { alpha: f64, gap: f64, n: usize },
    /// `α^{-j}` twice for `j < k/2`, then `α^{-j}` once for `j = k/2, …` up to `n` values.
    RepeatedPairs { alpha: f64, k: usize, n: usize },
    /// `σ_i = √(1 − (i/n)²)`.
    WishartLb { n: usize },
    Explicit(Vec<f64>),
}

impl SpectrumSpec {
    pub fn n(&self) -> usize {
        match self {
            SpectrumSpec::Exponential { n, .. }
            | SpectrumSpec::Polynomial { n, .. }
            | SpectrumSpec::PairedGap { n, .. }
            | SpectrumSpec::RepeatedPairs { n, .. }
            | SpectrumSpec::WishartLb { n } => *n,
            SpectrumSpec::Explicit(v) => v.len(),
        }
    }

    pub fn generate(&self) -> Result<Vec<f64>> {
        let n = self.n();
        if n == 0 {
            return Err(Error::param("spectrum dimension must be positive"));
        }
        let sigma = match *self {
            SpectrumSpec::Exponential { alpha, n } => {
                check_alpha(alpha)?;
                (1..=n).map(|i| alpha.powf(-(i as f64))).collect()
            }
            SpectrumSpec::Polynomial { beta, n } => {
                if !(beta > 0.0) || !beta.is_finite() {
                    return Err(Error::param(format!("beta must be positive, got {beta}")));
                }
                (1..=n).map(|i| (i as f64).powf(-beta)).collect()
            }
            SpectrumSpec::PairedGap { alpha, gap, n } => {
                check_alpha(alpha)?;
                if !(gap >= 0.0) || !gap.is_finite() {
                    return Err(Error::param(format!("gap must be finite and >= 0, got {gap}")));
                }
                check_even(n, "paired-gap")?;
                let mut s: Vec<f64> = (0..n / 2)
                    .flat_map(|j| {
                        let top = alpha.powf(-(j as f64));
                        [top, top / (1.0 + gap)]
                    })
                    .collect();
                // For gap ≥ α − 1 the interleaved layout is no longer ordered.
                s.sort_by(|a, b| b.total_cmp(a));
                s
            }
            SpectrumSpec::RepeatedPairs { alpha, k, n } => {
                check_alpha(alpha)?;
                check_even(k, "repeated-pairs rank")?;
                if k > n {
                    return Err(Error::param(format!("repeated-pairs rank {k} exceeds n = {n}")));
                }
                let pairs = k / 2;
                let mut s = Vec::with_capacity(n);
                for j in 0..pairs {
                    let v = alpha.powf(-(j as f64));
                    s.push(v);
                    s.push(v);
                }
                let mut j = pairs;
                while s.len() < n {
                    s.push(alpha.powf(-(j as f64)));
                    j += 1;
                }
                s
            }
            SpectrumSpec::WishartLb { n } => (1..=n)
                .map(|i| {
                    let r = i as f64 / n as f64;
                    (1.0 - r * r).max(0.0).sqrt()
                })
                .collect(),
            SpectrumSpec::Explicit(ref v) => {
                check_descending(v)?;
                v.clone()
            }
        };
        Ok(sigma)
    }

    /// Stable identifier used in CSV output; parses back with [`FromStr`].
    pub fn id(&self) -> String {
        self.to_string()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::param(format!("alpha must exceed 1, got {alpha}")));
    }
    Ok(())
}

fn check_even(n: usize, what: &str) -> Result<()> {
    if !n.is_multiple_of(2) {
        return Err(Error::param(format!("{what} dimension must be even, got {n}")));
    }
    Ok(())
}

/// Non-negative, finite and non-increasing.
pub fn check_descending(sigma: &[f64]) -> Result<()> {
    for (i, s) in sigma.iter().enumerate() {
        if !s.is_finite() {
            return Err(Error::NonFinite);
        }
        if *s < 0.0 {
            return Err(Error::param(format!("singular value {i} is negative")));
        }
        if i > 0 && *s > sigma[i - 1] {
            return Err(Error::Unsorted(i));
        }
    }
    Ok(())
}

impl fmt::Display for SpectrumSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumSpec::Exponential { alpha, n } => write!(f, "exponential:alpha={alpha}:n={n}"),
            SpectrumSpec::Polynomial { beta, n } => write!(f, "polynomial:beta={beta}:n={n}"),
            SpectrumSpec::PairedGap { alpha, gap, n } => write!(f, "paired_gap:alpha={alpha}:gap={gap:e}:n={n}"),
            SpectrumSpec::RepeatedPairs { alpha, k, n } => write!(f, "repeated_pairs:alpha={alpha}:k={k}:n={n}"),
            SpectrumSpec::WishartLb { n } => write!(f, "wishart_lb:n={n}"),
            SpectrumSpec::Explicit(v) => write!(f, "explicit:n={}", v.len()),
        }
    }
}

impl FromStr for SpectrumSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default();
        let mut fields = std::collections::HashMap::new();
        for p in parts {
            let (key, value) = p
                .split_once('=')
                .ok_or_else(|| Error::param(format!("malformed spectrum field `{p}`")))?;
            fields.insert(key, value);
        }
        let get = |key: &str| -> Result<&str> {
            fields.get(key).copied().ok_or_else(|| Error::param(format!("spectrum `{s}` lacks `{key}`")))
        };
        let float = |key: &str| -> Result<f64> {
            get(key)?.parse().map_err(|_| Error::param(format!("bad number for `{key}` in `{s}`")))
        };
        let int = |key: &str| -> Result<usize> {
            get(key)?.parse().map_err(|_| Error::param(format!("bad integer for `{key}` in `{s}`")))
        };
        match kind {
            "exponential" => Ok(SpectrumSpec::Exponential { alpha: float("alpha")?, n: int("n")? }),
            "polynomial" => Ok(SpectrumSpec::Polynomial { beta: float("beta")?, n: int("n")? }),
            "paired_gap" => Ok(SpectrumSpec::PairedGap { alpha: float("alpha")?, gap: float("gap")?, n: int("n")? }),
            "repeated_pairs" => Ok(SpectrumSpec::RepeatedPairs { alpha: float("alpha")?, k: int("k")?, n: int("n")? }),
            "wishart_lb" => Ok(SpectrumSpec::WishartLb { n: int("n")? }),
            other => Err(Error::param(format!("unknown spectrum kind `{other}`"))),
        }
    }
}

/// An input matrix with its exact singular values.
#[derive(Debug, Clone)]
pub enum InputMatrix {
    /// `diag(σ)`, σ descending.
    Diagonal(Vec<f64>),
    Dense { a: DMatrix<f64>, sigma: Vec<f64> },
}

impl InputMatrix {
    pub fn diagonal(sigma: Vec<f64>) -> Result<Self> {
        check_descending(&sigma)?;
        Ok(InputMatrix::Diagonal(sigma))
    }

    pub fn from_spec(spec: &SpectrumSpec) -> Result<Self> {
        Ok(InputMatrix::Diagonal(spec.generate()?))
    }

    /// Computes the singular values with a dense SVD.
    pub fn dense(a: DMatrix<f64>) -> Result<Self> {
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let sigma = singular_values(&a).iter().copied().collect();
        Ok(InputMatrix::Dense { a, sigma })
    }

    pub fn rows(&self) -> usize {
        match self {
            InputMatrix::Diagonal(s) => s.len(),
            InputMatrix::Dense { a, .. } => a.nrows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            InputMatrix::Diagonal(s) => s.len(),
            InputMatrix::Dense { a, .. } => a.ncols(),
        }
    }

    /// Singular values, descending.
    pub fn sigma(&self) -> &[f64] {
        match self {
            InputMatrix::Diagonal(s) => s,
            InputMatrix::Dense { sigma, .. } => sigma,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            InputMatrix::Diagonal(s) => DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(s)),
            InputMatrix::Dense { a, .. } => a.clone(),
        }
    }

    pub fn transpose(&self) -> Self {
        match self {
            InputMatrix::Diagonal(s) => InputMatrix::Diagonal(s.clone()),
            InputMatrix::Dense { a, sigma } => InputMatrix::Dense { a: a.transpose(), sigma: sigma.clone() },
        }
    }

    /// Gram operator of this matrix: `diag(σ²)` or the two-product `A Aᵀ`.
    pub fn as_operator(&self) -> GramOperator {
        match self {
            InputMatrix::Diagonal(s) => GramOperator::from_spectrum(s),
            InputMatrix::Dense { a, .. } => GramOperator::from_dense(a.clone()),
        }
    }
}
