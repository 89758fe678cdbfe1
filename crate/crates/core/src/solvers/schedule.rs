//! Iteration counts for single-vector Krylov targeting a given accuracy.
//!
//! The bounds are asymptotic; these schedules take every hidden constant
//! to be 1. They only pick `t`; the run itself is an ordinary
//! [`single_vector_krylov`](super::single_vector_krylov) call.

use crate::error::{Error, Result};

fn check(k: usize, n: usize, eps: f64, delta: f64, g_min: f64) -> Result<()> {
    if k == 0 || n == 0 {
        return Err(Error::param("k and n must be positive"));
    }
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("eps and delta must lie in (0, 1)"));
    }
    if !(g_min > 0.0) {
        return Err(Error::param("the minimum gap must be positive for a gap-dependent schedule"));
    }
    Ok(())
}

fn ceil(x: f64) -> usize {
    x.ceil().max(1.0) as usize
}

/// `t = (k/√ε) ln(1/g_min) + (1/√ε) ln(n/(εδ))`.
pub fn gap_dependent(k: usize, n: usize, eps: f64, delta: f64, g_min: f64) -> Result<usize> {
    check(k, n, eps, delta, g_min)?;
    let s = eps.sqrt();
    let g = (1.0 / g_min).ln().max(0.0);
    Ok(ceil(k as f64 / s * g + (n as f64 / (eps * delta)).ln() / s))
}

/// Frobenius schedule simulating block size `k/ε^{1/3}`:
/// `t = (k/ε^{1/3}) ln(1/g_min) + (1/ε^{1/3}) ln(n/(δε))`.
pub fn fast_frobenius(k: usize, n: usize, eps: f64, delta: f64, g_min: f64) -> Result<usize> {
    check(k, n, eps, delta, g_min)?;
    let c = eps.cbrt();
    let g = (1.0 / g_min).ln().max(0.0);
    Ok(ceil(k as f64 / c * g + (n as f64 / (delta * eps)).ln() / c))
}

/// Simulated block width `k/ε^{1/3}` over which `g_min` is measured for [`fast_frobenius`].
pub fn fast_frobenius_width(k: usize, eps: f64) -> usize {
    ceil(k as f64 / eps.cbrt())
}

/// Schatten-p schedule:
/// `t = (k p^{1/6}/ε^{1/3}) ln(1/g_min) + (√p + p^{1/6}/ε^{1/3}) ln(np/(δε))`.
pub fn schatten(k: usize, n: usize, p: f64, eps: f64, delta: f64, g_min: f64) -> Result<usize> {
    check(k, n, eps, delta, g_min)?;
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::param(format!("Schatten schedule needs finite p >= 1, got {p}")));
    }
    let c = eps.cbrt();
    let p6 = p.powf(1.0 / 6.0);
    let g = (1.0 / g_min).ln().max(0.0);
    Ok(ceil(k as f64 * p6 / c * g + (p.sqrt() + p6 / c) * (n as f64 * p / (delta * eps)).ln()))
}

/// Simulated block width `k/(εp)^{1/3}` for [`schatten`].
pub fn schatten_width(k: usize, p: f64, eps: f64) -> usize {
    ceil(k as f64 / (eps * p).cbrt())
}
