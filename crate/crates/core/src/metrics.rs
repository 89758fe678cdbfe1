//! Error metrics against exact references and the gap and goodness diagnostics.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{singular_values, OrthonormalBasis, DEFAULT_DROP_TOL};
use crate::operator::GramOperator;
use crate::rng::{self, Purpose};
use crate::solvers::{block_krylov, SolverConfig};
use crate::spectra::{check_descending, InputMatrix};

/// Values below this are reported at the floor.
pub const REPORT_FLOOR: f64 = 1e-15;

pub fn floor_for_report(eps: f64) -> f64 {
    eps.max(REPORT_FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    Frobenius,
    Spectral,
    /// `p ≥ 1`; infinite `p` is the spectral norm.
    Schatten(f64),
}

impl Norm {
    fn exponent(self) -> Result<f64> {
        match self {
            Norm::Frobenius => Ok(2.0),
            Norm::Spectral => Ok(f64::INFINITY),
            Norm::Schatten(p) if p >= 1.0 => Ok(p),
            Norm::Schatten(p) => Err(Error::param(format!("Schatten exponent must be >= 1, got {p}"))),
        }
    }
}

/// `(Σ vᵢᵖ)^{1/p}`, or `max vᵢ` for infinite `p`.
pub fn schatten_norm(values: &[f64], p: f64) -> f64 {
    let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if top == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return top;
    }
    let s: f64 = values.iter().map(|v| (v.abs() / top).powf(p)).sum();
    top * s.powf(1.0 / p)
}

/// `‖A − A_k‖` in the given norm from the exact singular values.
pub fn optimal_error(sigma: &[f64], k: usize, norm: Norm) -> Result<f64> {
    let tail = if k < sigma.len() { &sigma[k..] } else { &[][..] };
    Ok(schatten_norm(tail, norm.exponent()?))
}

fn check_rows(a: &InputMatrix, q: &OrthonormalBasis) -> Result<()> {
    if q.nrows() != a.rows() {
        return Err(Error::DimensionMismatch { expected: a.rows(), got: q.nrows() });
    }
    Ok(())
}

/// `A − QQᵀA` as a dense matrix.
pub fn residual_matrix(a: &InputMatrix, q: &OrthonormalBasis) -> Result<DMatrix<f64>> {
    check_rows(a, q)?;
    let mut r = a.to_dense();
    if q.ncols() > 0 {
        let qm = q.view();
        let qta = qm.tr_mul(&r);
        r -= qm * qta;
    }
    Ok(r)
}

/// Relative excess error `(‖A − QQᵀA‖ − ‖A − A_k‖) / ‖A − A_k‖`.
///
/// Diagonal inputs in the Frobenius norm use the closed form
/// `‖A − QQᵀA‖² − ‖A − A_k‖² = Σ_{j≤k} σⱼ² ‖(I − QQᵀ)eⱼ‖² − Σ_{j>k} σⱼ² ‖Qᵀeⱼ‖²`,
/// which keeps full relative accuracy when the excess is far below roundoff of the norms.
pub fn epsilon_empirical(a: &InputMatrix, q: &OrthonormalBasis, k: usize, norm: Norm) -> Result<f64> {
    check_rows(a, q)?;
    let opt = optimal_error(a.sigma(), k, norm)?;
    if opt == 0.0 {
        return Err(Error::ZeroReference);
    }
    match (a, norm) {
        (InputMatrix::Diagonal(sigma), Norm::Frobenius) => Ok(diagonal_frobenius_excess(sigma, q, k, opt)),
        _ => {
            let r = residual_matrix(a, q)?;
            let value = if norm == Norm::Frobenius {
                r.norm()
            } else {
                schatten_norm(singular_values(&r).as_slice(), norm.exponent()?)
            };
            Ok((value - opt) / opt)
        }
    }
}

fn diagonal_frobenius_excess(sigma: &[f64], q: &OrthonormalBasis, k: usize, opt: f64) -> f64 {
    let n = q.nrows();
    let m = q.ncols();
    let data = q.as_slice();
    let row = |j: usize| -> Vec<f64> { (0..m).map(|c| data[c * n + j]).collect() };
    // Work relative to σ₁ so that squares stay in range.
    let scale = sigma.first().copied().unwrap_or(1.0);
    let mut excess = 0.0;
    let mut w = vec![0.0; n];
    for (j, s) in sigma.iter().enumerate() {
        let s2 = (s / scale).powi(2);
        if s2 == 0.0 {
            continue;
        }
        let qj = row(j);
        if j < k {
            w.iter_mut().for_each(|x| *x = 0.0);
            for (c, coef) in qj.iter().enumerate() {
                for (wi, qi) in w.iter_mut().zip(&data[c * n..(c + 1) * n]) {
                    *wi += coef * qi;
                }
            }
            w[j] -= 1.0;
            excess += s2 * w.iter().map(|x| x * x).sum::<f64>();
        } else {
            excess -= s2 * qj.iter().map(|x| x * x).sum::<f64>();
        }
    }
    let x = excess / (opt / scale).powi(2);
    if x <= -1.0 {
        return -1.0;
    }
    x / ((1.0 + x).sqrt() + 1.0)
}

/// `‖A − ZZᵀA‖_p` from the singular values of the residual.
pub fn schatten_residual(a: &InputMatrix, z: &OrthonormalBasis, p: f64) -> Result<f64> {
    let p = Norm::Schatten(p).exponent()?;
    let r = residual_matrix(a, z)?;
    Ok(schatten_norm(singular_values(&r).as_slice(), p))
}

#[derive(Debug, Clone)]
pub struct SchattenPipeline {
    /// `d × k` basis from the run on `Aᵀ`.
    pub q: OrthonormalBasis,
    /// Orthonormal basis of `AQ`.
    pub z: OrthonormalBasis,
    pub p_values: Vec<f64>,
    /// `‖A − ZZᵀA‖_p` per entry of `p_values`.
    pub two_step: Vec<f64>,
    /// `‖A − Q'Q'ᵀA‖_p` for `Q'` from the same configuration run directly on `A`.
    pub one_step: Vec<f64>,
    /// `‖A − A_k‖_p`.
    pub optimum: Vec<f64>,
    pub matvecs: u64,
}

impl SchattenPipeline {
    /// Largest `two_step / optimum − 1` over the p list.
    pub fn worst_ratio(&self) -> f64 {
        self.two_step
            .iter()
            .zip(&self.optimum)
            .map(|(r, o)| r / o - 1.0)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Runs the solver on the Gram operator of `Aᵀ`, forms `Z = orth(AQ)` and
/// evaluates both residual forms at every `p`.
pub fn schatten_pipeline(a: &InputMatrix, cfg: &SolverConfig, p_values: &[f64]) -> Result<SchattenPipeline> {
    for p in p_values {
        Norm::Schatten(*p).exponent()?;
    }
    let at = a.transpose();
    let mut op = at.as_operator();
    let res = block_krylov(&mut op, cfg)?;
    let aq = match a {
        InputMatrix::Diagonal(s) => {
            let mut m = res.q.to_matrix();
            for (i, mut row) in m.row_iter_mut().enumerate() {
                row *= s[i];
            }
            m
        }
        InputMatrix::Dense { a, .. } => a * res.q.view(),
    };
    let z = OrthonormalBasis::from_columns(&aq, DEFAULT_DROP_TOL)?;
    let mut direct_op = a.as_operator();
    let direct = block_krylov(&mut direct_op, cfg)?;

    let sv_two = singular_values(&residual_matrix(a, &z)?);
    let sv_one = singular_values(&residual_matrix(a, &direct.q)?);
    let k = cfg.target_rank;
    let mut out = SchattenPipeline {
        q: res.q,
        z,
        p_values: p_values.to_vec(),
        two_step: Vec::new(),
        one_step: Vec::new(),
        optimum: Vec::new(),
        matvecs: res.matvecs,
    };
    for &p in p_values {
        out.two_step.push(schatten_norm(sv_two.as_slice(), p));
        out.one_step.push(schatten_norm(sv_one.as_slice(), p));
        out.optimum.push(optimal_error(a.sigma(), k, Norm::Schatten(p))?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularValueErrors {
    /// `|qᵢᵀGqᵢ − σᵢ²| / σ²_{k+1}`, or the absolute error when `absolute` is set.
    pub errors: Vec<f64>,
    /// Set when `σ_{k+1} = 0` and no normalization was possible.
    pub absolute: bool,
}

impl SingularValueErrors {
    pub fn max(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }
}

/// Per-vector error of the Rayleigh quotients against `σᵢ²`. Costs one matvec per column used.
pub fn singular_value_errors(
    op: &mut GramOperator,
    q: &OrthonormalBasis,
    sigma: &[f64],
    k: usize,
) -> Result<SingularValueErrors> {
    if q.nrows() != op.rows() {
        return Err(Error::DimensionMismatch { expected: op.rows(), got: q.nrows() });
    }
    let used = k.min(q.ncols()).min(sigma.len());
    let next = sigma.get(k).copied().unwrap_or(0.0);
    let denom = next * next;
    let absolute = denom == 0.0;
    let mut image = vec![0.0; op.rows()];
    let mut errors = Vec::with_capacity(used);
    for (i, s) in sigma.iter().enumerate().take(used) {
        let col = q.column(i);
        op.apply_into(col, &mut image)?;
        let rq: f64 = col.iter().zip(&image).map(|(a, b)| a * b).sum();
        let err = (rq - s * s).abs();
        errors.push(if absolute { err } else { err / denom });
    }
    Ok(SingularValueErrors { errors, absolute })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    /// `min_{i<k} (σᵢ − σᵢ₊₁)/σᵢ₊₁`; infinite for `k = 1`.
    pub g_min_over_next: f64,
    /// `min_{i<k} (σᵢ − σᵢ₊₁)/σᵢ`.
    pub g_min_over_self: f64,
    /// `(σ_k − σ_{ℓ+1})/σ_k` per ℓ; values past the end of σ count as zero.
    pub g_k_to_ell: BTreeMap<usize, f64>,
    pub g_min_b: BTreeMap<usize, f64>,
}

fn relative(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / b
    }
}

pub fn gap_report(sigma: &[f64], k: usize, ells: &[usize], blocks: &[usize]) -> Result<GapReport> {
    check_descending(sigma)?;
    if k == 0 || k > sigma.len() {
        return Err(Error::param(format!("k = {k} must lie in 1..={}", sigma.len())));
    }
    if sigma[k - 1] <= 0.0 {
        return Err(Error::param(format!("σ_k must be positive for gap statistics, k = {k}")));
    }
    let mut over_next = f64::INFINITY;
    let mut over_self = f64::INFINITY;
    for i in 0..k - 1 {
        over_next = over_next.min(relative(sigma[i], sigma[i + 1]));
        over_self = over_self.min((sigma[i] - sigma[i + 1]) / sigma[i]);
    }
    let mut g_k_to_ell = BTreeMap::new();
    for &ell in ells {
        if ell < k {
            return Err(Error::param(format!("ℓ = {ell} is below k = {k}")));
        }
        let next = sigma.get(ell).copied().unwrap_or(0.0);
        g_k_to_ell.insert(ell, (sigma[k - 1] - next) / sigma[k - 1]);
    }
    let mut g_min_b = BTreeMap::new();
    for &b in blocks {
        g_min_b.insert(b, bth_order_gap(&sigma[..k], b)?);
    }
    Ok(GapReport { g_min_over_next: over_next, g_min_over_self: over_self, g_k_to_ell, g_min_b })
}

/// `g_{min,b}` over the top values `top`, with `k = top.len()`.
pub fn bth_order_gap(top: &[f64], b: usize) -> Result<f64> {
    let k = top.len();
    if b == 0 {
        return Err(Error::param("block size must be positive"));
    }
    if b >= k {
        return Ok(1.0);
    }
    let mut best = f64::INFINITY;
    let mut gaps: Vec<(f64, usize)> = Vec::with_capacity(k);
    for i in 0..k {
        gaps.clear();
        gaps.extend((0..k).filter(|&j| j != i).map(|j| (relative(top[i], top[j]), j)));
        gaps.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        // The first b − 1 entries are the neighbor set.
        best = best.min(gaps[b - 1].0);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodnessReport {
    /// `1/σ_k(U_kᵀQ)²`, infinite when that singular value vanishes.
    pub l: f64,
    pub smallest_singular_value: f64,
}

/// `(k, L)`-goodness of `span(B)` for the top-`k` subspace `U_k`.
pub fn kl_goodness(u_k: &OrthonormalBasis, b: &DMatrix<f64>, k: usize) -> Result<GoodnessReport> {
    if b.ncols() < k {
        return Err(Error::InsufficientSubspace { available: b.ncols(), k });
    }
    if u_k.ncols() != k {
        return Err(Error::DimensionMismatch { expected: k, got: u_k.ncols() });
    }
    if b.nrows() != u_k.nrows() {
        return Err(Error::DimensionMismatch { expected: u_k.nrows(), got: b.nrows() });
    }
    let q = OrthonormalBasis::from_columns(b, DEFAULT_DROP_TOL)?;
    let s = if q.ncols() < k {
        0.0
    } else {
        let m = u_k.view().tr_mul(&q.view());
        singular_values(&m)[k - 1]
    };
    let l = if s > 0.0 { 1.0 / (s * s) } else { f64::INFINITY };
    Ok(GoodnessReport { l, smallest_singular_value: s })
}

/// The chi-square threshold `2δ²/(πk²)`.
pub fn chi_square_threshold(k: usize, delta: f64) -> f64 {
    2.0 * delta * delta / (std::f64::consts::PI * (k * k) as f64)
}

/// Fraction of trials in which the smallest of `k` squared standard normals
/// reaches `2δ²/(πk²)`.
pub fn chi_square_min_check(k: usize, delta: f64, trials: usize, seed: u64) -> Result<f64> {
    if k == 0 || trials == 0 {
        return Err(Error::param("k and trials must be positive"));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::param(format!("delta must lie in [0, 1), got {delta}")));
    }
    let threshold = chi_square_threshold(k, delta);
    let mut rng = rng::stream(seed, 0, Purpose::Sampling);
    let mut hits = 0usize;
    for _ in 0..trials {
        let mut min = f64::INFINITY;
        for _ in 0..k {
            let g: f64 = StandardNormal.sample(&mut rng);
            min = min.min(g * g);
        }
        if min >= threshold {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}

/// `hypothesis ⇒ conclusion`, with both sides recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Implication {
    pub hypothesis: bool,
    pub conclusion: bool,
}

impl Implication {
    pub fn holds(self) -> bool {
        !self.hypothesis || self.conclusion
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferReport {
    /// Set when `‖D‖₂` exceeds `εσ_{k+1}(A)/(3n)`; no implication is evaluated then.
    pub skipped: bool,
    pub per_index: Vec<Implication>,
    pub spectral: Option<Implication>,
    pub frobenius: Option<Implication>,
}

impl TransferReport {
    pub fn all_hold(&self) -> bool {
        self.per_index.iter().all(|i| i.holds())
            && self.spectral.is_none_or(|i| i.holds())
            && self.frobenius.is_none_or(|i| i.holds())
    }
}

// Slack for comparisons of quantities computed with roundoff.
const CHECK_SLACK: f64 = 1e-12;

/// Evaluates the three perturbation transfer implications for symmetric
/// `A`, diagonal `D` and `Q` with `k` columns.
pub fn perturbation_transfer_check(a: &DMatrix<f64>, d: &[f64], q: &OrthonormalBasis, eps: f64) -> Result<TransferReport> {
    let n = a.nrows();
    if a.ncols() != n || d.len() != n || q.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, got: if d.len() != n { d.len() } else { q.nrows() } });
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(format!("eps must lie in (0, 1), got {eps}")));
    }
    let k = q.ncols();
    let sig_a = singular_values(a);
    let sk1 = sig_a.get(k).copied().unwrap_or(0.0);
    let dnorm = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if dnorm > eps * sk1 / (3.0 * n as f64) {
        return Ok(TransferReport { skipped: true, per_index: Vec::new(), spectral: None, frobenius: None });
    }
    let mut at = a.clone();
    for (i, di) in d.iter().enumerate() {
        at[(i, i)] += di;
    }
    let sig_t = singular_values(&at);
    let tk1 = sig_t.get(k).copied().unwrap_or(0.0);
    let qm = q.view();

    let rq_a = (a.transpose() * qm).column_iter().map(|c| c.norm_squared()).collect::<Vec<_>>();
    let rq_t = (at.transpose() * qm).column_iter().map(|c| c.norm_squared()).collect::<Vec<_>>();
    let scale = sig_a[0] * sig_a[0] * CHECK_SLACK;
    let per_index = (0..k)
        .map(|i| Implication {
            hypothesis: (rq_t[i] - sig_t[i] * sig_t[i]).abs() <= eps * tk1 * tk1,
            conclusion: (rq_a[i] - sig_a[i] * sig_a[i]).abs() <= 8.0 * eps * sig_a[i] * sig_a[i] + scale,
        })
        .collect();

    let ia = InputMatrix::Dense { a: a.clone(), sigma: sig_a.iter().copied().collect() };
    let it = InputMatrix::Dense { a: at, sigma: sig_t.iter().copied().collect() };
    let res_a = singular_values(&residual_matrix(&ia, q)?);
    let res_t = singular_values(&residual_matrix(&it, q)?);
    let spectral = Implication {
        hypothesis: res_t[0] <= (1.0 + eps) * tk1,
        conclusion: res_a[0] <= (1.0 + 2.0 * eps) * sk1 * (1.0 + CHECK_SLACK),
    };
    let opt_a = optimal_error(ia.sigma(), k, Norm::Frobenius)?;
    let opt_t = optimal_error(it.sigma(), k, Norm::Frobenius)?;
    let frobenius = Implication {
        hypothesis: schatten_norm(res_t.as_slice(), 2.0) <= (1.0 + eps) * opt_t,
        conclusion: schatten_norm(res_a.as_slice(), 2.0) <= (1.0 + 4.0 * eps) * opt_a * (1.0 + CHECK_SLACK),
    };
    Ok(TransferReport { skipped: false, per_index, spectral: Some(spectral), frobenius: Some(frobenius) })
}

/// If `‖(I − QQᵀ)AAᵀ‖₂ ≤ (1+ε)σ²_{k+1}` then `‖(I − QQᵀ)A‖₂ ≤ (1+ε)σ_{k+1}`, with `k = Q.ncols()`.
pub fn spectral_square_check(a: &InputMatrix, q: &OrthonormalBasis, eps: f64) -> Result<Implication> {
    check_rows(a, q)?;
    let k = q.ncols();
    let sk1 = a.sigma().get(k).copied().unwrap_or(0.0);
    let dense = a.to_dense();
    let gram = &dense * dense.transpose();
    let g = InputMatrix::Dense { a: gram, sigma: a.sigma().iter().map(|s| s * s).collect() };
    let hyp = singular_values(&residual_matrix(&g, q)?)[0];
    let con = singular_values(&residual_matrix(a, q)?)[0];
    Ok(Implication {
        hypothesis: hyp <= (1.0 + eps) * sk1 * sk1,
        conclusion: con <= (1.0 + eps) * sk1 * (1.0 + CHECK_SLACK),
    })
}

/// `min_i |λᵢ − λᵢ₊₁| / |λᵢ₊₁|` over the eigenvalues sorted descending.
pub fn min_relative_eigengap(eigenvalues: &[f64]) -> f64 {
    let mut l = eigenvalues.to_vec();
    l.sort_by(|a, b| b.total_cmp(a));
    l.windows(2)
        .map(|w| {
            let d = (w[0] - w[1]).abs();
            if d == 0.0 {
                0.0
            } else {
                d / w[1].abs()
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Orthonormal basis of the first `k` coordinate axes.
pub fn coordinate_basis(n: usize, k: usize) -> OrthonormalBasis {
    let mut m = DMatrix::zeros(n, k);
    for i in 0..k.min(n) {
        m[(i, i)] = 1.0;
    }
    OrthonormalBasis::from_orthonormal(&m).expect("identity columns are orthonormal")
}

/// Top-`k` left singular vectors of a dense matrix.
pub fn top_left_singular_vectors(a: &DMatrix<f64>, k: usize) -> Result<OrthonormalBasis> {
    let svd = a.clone().svd(true, false);
    let u = svd.u.ok_or(Error::NonFinite)?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]).then(i.cmp(&j)));
    if k > order.len() {
        return Err(Error::InsufficientSubspace { available: order.len(), k });
    }
    let cols: Vec<DVector<f64>> = order[..k].iter().map(|&i| u.column(i).into_owned()).collect();
    let m = if cols.is_empty() { DMatrix::zeros(a.nrows(), 0) } else { DMatrix::from_columns(&cols) };
    OrthonormalBasis::from_orthonormal(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::gaussian_matrix;
    use crate::solvers::single_vector_krylov;

    fn diag(s: &[f64]) -> InputMatrix {
        InputMatrix::diagonal(s.to_vec()).unwrap()
    }

    #[test]
    fn exact_top_k_has_zero_error() {
        let a = diag(&[5.0, 3.0, 2.0, 1.0]);
        let q = coordinate_basis(4, 2);
        assert_eq!(epsilon_empirical(&a, &q, 2, Norm::Frobenius).unwrap(), 0.0);
        assert_eq!(epsilon_empirical(&a, &q, 2, Norm::Spectral).unwrap(), 0.0);
    }

    #[test]
    fn wrong_axis() {
        let a = diag(&[2.0, 1.0]);
        let q = OrthonormalBasis::from_orthonormal(&DMatrix::from_column_slice(2, 1, &[0.0, 1.0])).unwrap();
        assert!((epsilon_empirical(&a, &q, 1, Norm::Frobenius).unwrap() - 1.0).abs() < 1e-15);
        let dense = InputMatrix::dense(a.to_dense()).unwrap();
        assert!((epsilon_empirical(&dense, &q, 1, Norm::Frobenius).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_reference_is_an_error() {
        let a = diag(&[2.0, 1.0, 0.0]);
        let q = coordinate_basis(3, 2);
        assert!(matches!(epsilon_empirical(&a, &q, 2, Norm::Frobenius), Err(Error::ZeroReference)));
    }

    #[test]
    fn closed_form_matches_dense_residual() {
        let mut rng = rng::stream(3, 0, Purpose::Matrix);
        let s: Vec<f64> = (1..=12).map(|i| 1.3f64.powi(-i)).collect();
        let a = diag(&s);
        let q = OrthonormalBasis::from_columns(&gaussian_matrix(&mut rng, 12, 4), 1e-12).unwrap();
        let closed = epsilon_empirical(&a, &q, 4, Norm::Frobenius).unwrap();
        let r = residual_matrix(&a, &q).unwrap().norm();
        let opt = optimal_error(&s, 4, Norm::Frobenius).unwrap();
        assert!((closed - (r - opt) / opt).abs() < 1e-12 * (1.0 + closed));
    }

    #[test]
    fn converged_dense_run() {
        let mut rng = rng::stream(11, 0, Purpose::Matrix);
        let a = InputMatrix::dense(gaussian_matrix(&mut rng, 25, 25)).unwrap();
        let mut op = a.as_operator();
        let res = single_vector_krylov(&mut op, &SolverConfig::single_vector(5, 24).with_seed(2)).unwrap();
        let eps = epsilon_empirical(&a, &res.q, 5, Norm::Frobenius).unwrap();
        assert!((-1e-10..=1e-8).contains(&eps), "{eps}");
    }

    #[test]
    fn schatten_examples() {
        let a = diag(&[4.0, 3.0]);
        assert!((schatten_residual(&a, &OrthonormalBasis::empty(2), 2.0).unwrap() - 5.0).abs() < 1e-14);
        let a = diag(&[3.0, 2.0, 1.0]);
        let z = coordinate_basis(3, 1);
        assert!((schatten_residual(&a, &z, 1.0).unwrap() - 3.0).abs() < 1e-14);
        assert!((schatten_residual(&a, &z, f64::INFINITY).unwrap() - 2.0).abs() < 1e-14);
        assert!(schatten_residual(&a, &z, 0.5).is_err());
    }

    #[test]
    fn schatten_large_p_approaches_spectral() {
        let v = [2.0, 1.9, 1.0, 0.5];
        let p = (4f64).ln() / 1e-3;
        assert!((schatten_norm(&v, p) - 2.0).abs() < 1e-2);
        assert!((schatten_norm(&v, 2.0) - v.iter().map(|x| x * x).sum::<f64>().sqrt()).abs() < 1e-15);
    }

    #[test]
    fn singular_value_error_examples() {
        let mut op = GramOperator::from_spectrum(&[2.0, 1.0, 0.5]);
        let q = OrthonormalBasis::from_orthonormal(&DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 0.0])).unwrap();
        let e = singular_value_errors(&mut op, &q, &[2.0, 1.0, 0.5], 1).unwrap();
        assert_eq!(e.errors, vec![3.0]);
        let e = singular_value_errors(&mut op, &coordinate_basis(3, 1), &[2.0, 1.0, 0.5], 1).unwrap();
        assert_eq!(e.errors, vec![0.0]);
        let mut op = GramOperator::from_spectrum(&[2.0, 0.0]);
        let e = singular_value_errors(&mut op, &coordinate_basis(2, 1), &[2.0, 0.0], 1).unwrap();
        assert!(e.absolute);
    }

    #[test]
    fn gap_examples() {
        let g = gap_report(&[4.0, 2.0, 1.0], 3, &[3], &[1, 3]).unwrap();
        assert_eq!(g.g_min_over_next, 1.0);
        assert_eq!(g.g_min_over_self, 0.5);
        assert_eq!(g.g_min_b[&3], 1.0);
        assert_eq!(g.g_min_b[&1], 0.5);
        assert_eq!(g.g_k_to_ell[&3], 1.0);
        assert!(matches!(gap_report(&[1.0, 2.0], 2, &[], &[]), Err(Error::Unsorted(1))));
    }

    #[test]
    fn second_order_gap_on_twins() {
        let s = [1.0, 1.0, 0.5, 0.5, 0.25];
        let g = gap_report(&s, 4, &[4], &[1, 2]).unwrap();
        assert_eq!(g.g_min_over_next, 0.0);
        assert_eq!(g.g_min_b[&1], 0.0);
        // Brute force: the b-th smallest relative gap from each i.
        let mut brute = f64::INFINITY;
        for i in 0..4 {
            let mut r: Vec<f64> = (0..4).filter(|&j| j != i).map(|j| ((s[i] - s[j]) / s[j]).abs()).collect();
            r.sort_by(f64::total_cmp);
            brute = brute.min(r[1]);
        }
        assert_eq!(g.g_min_b[&2], brute);
        assert_eq!(brute, 0.5);
        assert_eq!(g.g_k_to_ell[&4], 0.5);
    }

    #[test]
    fn goodness_examples() {
        let u = coordinate_basis(4, 2);
        assert!((kl_goodness(&u, &u.to_matrix(), 2).unwrap().l - 1.0).abs() < 1e-14);
        let perp = DMatrix::from_column_slice(4, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(kl_goodness(&u, &perp, 2).unwrap().l.is_infinite());
        assert!(kl_goodness(&u, &DMatrix::zeros(4, 1), 2).is_err());
    }

    #[test]
    fn chi_square_examples() {
        assert_eq!(chi_square_min_check(3, 0.0, 1000, 1).unwrap(), 1.0);
        let f = chi_square_min_check(1, 0.5, 20_000, 1).unwrap();
        assert!(f >= 0.5 - 3.0 * (0.25f64 / 20_000.0).sqrt());
    }

    #[test]
    fn transfer_with_zero_perturbation() {
        let mut rng = rng::stream(5, 0, Purpose::Matrix);
        let c = gaussian_matrix(&mut rng, 8, 8);
        let a = &c * c.transpose();
        let q = top_left_singular_vectors(&a, 3).unwrap();
        let r = perturbation_transfer_check(&a, &[0.0; 8], &q, 0.1).unwrap();
        assert!(!r.skipped && r.all_hold());
        assert!(r.per_index.iter().all(|i| i.hypothesis));
        let r = perturbation_transfer_check(&a, &[1.0; 8], &q, 0.1).unwrap();
        assert!(r.skipped);
    }

    #[test]
    fn transfer_on_bottom_vectors_is_vacuous() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 3.0, 2.0, 1.0]));
        let q = OrthonormalBasis::from_orthonormal(&DMatrix::from_column_slice(
            4,
            1,
            &[0.0, 0.0, 0.0, 1.0],
        ))
        .unwrap();
        let r = perturbation_transfer_check(&a, &[0.0; 4], &q, 0.1).unwrap();
        assert!(!r.per_index[0].hypothesis && !r.spectral.unwrap().hypothesis);
        assert!(r.all_hold());
    }

    #[test]
    fn spectral_square_on_exact_basis() {
        let a = diag(&[3.0, 2.0, 1.0]);
        let i = spectral_square_check(&a, &coordinate_basis(3, 1), 0.01).unwrap();
        assert!(i.hypothesis && i.conclusion);
    }

    #[test]
    fn eigengap() {
        assert_eq!(min_relative_eigengap(&[1.0, 3.0, 2.0]), 0.5);
        assert_eq!(min_relative_eigengap(&[1.0, 1.0]), 0.0);
    }
}
