//! Matrix-free operators.
//!
//! Solvers only ever see a [`GramOperator`], which applies `G = M Mᵀ` for
//! some [`LinearMap`] `M` and counts one application per input vector.

use nalgebra::{DMatrix, DVector, DVectorView, DVectorViewMut};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

/// Random diagonal `D` with i.i.d. entries uniform on `[-Δ, Δ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalPerturbation {
    delta: f64,
    entries: Vec<f64>,
    seed: u64,
}

impl DiagonalPerturbation {
    pub fn new(n: usize, delta: f64, seed: u64) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::param(format!("perturbation size must be finite and >= 0, got {delta}")));
        }
        let mut rng = rng::stream(seed, 0, Purpose::Perturbation);
        let entries = (0..n).map(|_| delta * rng.random_range(-1.0..=1.0)).collect();
        Ok(Self { delta, entries, seed })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Spectral norm of `D`, i.e. `max |d_i|`.
    pub fn norm(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    fn add_scaled(&self, x: &[f64], y: &mut [f64]) {
        // Δ = 0 leaves y untouched so the wrapper is bit-identical to its input.
        if self.delta == 0.0 {
            return;
        }
        for ((yi, xi), di) in y.iter_mut().zip(x).zip(&self.entries) {
            *yi += di * xi;
        }
    }
}

/// The matrix whose Gram matrix the operator applies.
#[derive(Debug, Clone)]
pub enum LinearMap {
    Dense(DMatrix<f64>),
    /// Square diagonal matrix with the given diagonal.
    Diagonal(DVector<f64>),
    /// `inner + D` for a square symmetric `inner`.
    Shifted { inner: Box<LinearMap>, shift: DiagonalPerturbation },
    /// `inner innerᵀ + D`.
    GramShifted { inner: Box<LinearMap>, shift: DiagonalPerturbation },
}

impl LinearMap {
    pub fn rows(&self) -> usize {
        match self {
            LinearMap::Dense(a) => a.nrows(),
            LinearMap::Diagonal(s) => s.len(),
            LinearMap::Shifted { inner, .. } | LinearMap::GramShifted { inner, .. } => inner.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            LinearMap::Dense(a) => a.ncols(),
            LinearMap::Diagonal(s) => s.len(),
            LinearMap::Shifted { inner, .. } => inner.cols(),
            LinearMap::GramShifted { inner, .. } => inner.rows(),
        }
    }

    /// `y = M x`
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            LinearMap::Dense(a) => {
                let xv = DVectorView::from_slice(x, a.ncols());
                let mut yv = DVectorViewMut::from_slice(y, a.nrows());
                yv.gemv(1.0, a, &xv, 0.0);
            }
            LinearMap::Diagonal(s) => {
                for ((yi, xi), si) in y.iter_mut().zip(x).zip(s.iter()) {
                    *yi = si * xi;
                }
            }
            LinearMap::Shifted { inner, shift } => {
                inner.apply(x, y);
                shift.add_scaled(x, y);
            }
            LinearMap::GramShifted { inner, shift } => {
                let mut tmp = vec![0.0; inner.cols()];
                inner.apply_transpose(x, &mut tmp);
                inner.apply(&tmp, y);
                shift.add_scaled(x, y);
            }
        }
    }

    /// `y = Mᵀ x`
    pub fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        match self {
            LinearMap::Dense(a) => {
                let xv = DVectorView::from_slice(x, a.nrows());
                let mut yv = DVectorViewMut::from_slice(y, a.ncols());
                yv.gemv_tr(1.0, a, &xv, 0.0);
            }
            LinearMap::Diagonal(_) => self.apply(x, y),
            LinearMap::Shifted { inner, shift } => {
                inner.apply_transpose(x, y);
                shift.add_scaled(x, y);
            }
            // symmetric
            LinearMap::GramShifted { .. } => self.apply(x, y),
        }
    }

    /// Diagonal of `M` when `M` is diagonal.
    pub fn diagonal(&self) -> Option<Vec<f64>> {
        match self {
            LinearMap::Dense(_) => None,
            LinearMap::Diagonal(s) => Some(s.iter().copied().collect()),
            LinearMap::Shifted { inner, shift } => {
                let mut d = inner.diagonal()?;
                if shift.delta > 0.0 {
                    d.iter_mut().zip(&shift.entries).for_each(|(a, b)| *a += b);
                }
                Some(d)
            }
            LinearMap::GramShifted { inner, shift } => {
                let mut d: Vec<f64> = inner.diagonal()?.iter().map(|s| s * s).collect();
                if shift.delta > 0.0 {
                    d.iter_mut().zip(&shift.entries).for_each(|(a, b)| *a += b);
                }
                Some(d)
            }
        }
    }

    /// Dense copy of `M`.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let (m, n) = (self.rows(), self.cols());
        let mut out = DMatrix::zeros(m, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; m];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            out.column_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        out
    }

    fn is_symmetric(&self) -> bool {
        match self {
            LinearMap::Dense(a) => {
                if a.nrows() != a.ncols() {
                    return false;
                }
                let scale = a.amax().max(f64::MIN_POSITIVE);
                (a - a.transpose()).amax() <= 1e-12 * scale
            }
            LinearMap::Diagonal(_) | LinearMap::GramShifted { .. } => true,
            LinearMap::Shifted { inner, .. } => inner.is_symmetric(),
        }
    }
}

/// Which matrix the diagonal perturbation is added to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationRoute {
    /// `Ã = A + D` for symmetric PSD `A`; the operator applies `Ã Ãᵀ`.
    Matrix,
    /// `Ã = A Aᵀ + D`; the operator applies `Ã Ãᵀ = Ã²`.
    Gram,
}

/// Applies `G = M Mᵀ` and counts applications, one per vector.
#[derive(Debug, Clone)]
pub struct GramOperator {
    map: LinearMap,
    gram_diagonal: Option<Vec<f64>>,
    apply_count: u64,
}

impl GramOperator {
    pub fn new(map: LinearMap) -> Self {
        let gram_diagonal = map.diagonal().map(|d| d.iter().map(|s| s * s).collect());
        Self { map, gram_diagonal, apply_count: 0 }
    }

    /// Diagonal `A = diag(σ)`, so `G = diag(σ²)`.
    pub fn from_spectrum(sigma: &[f64]) -> Self {
        Self::new(LinearMap::Diagonal(DVector::from_column_slice(sigma)))
    }

    pub fn from_dense(a: DMatrix<f64>) -> Self {
        Self::new(LinearMap::Dense(a))
    }

    pub fn rows(&self) -> usize {
        self.map.rows()
    }

    pub fn apply_count(&self) -> u64 {
        self.apply_count
    }

    pub fn reset_count(&mut self) {
        self.apply_count = 0;
    }

    pub fn map(&self) -> &LinearMap {
        &self.map
    }

    /// Diagonal of `G` when `G` is diagonal.
    pub fn gram_diagonal(&self) -> Option<&[f64]> {
        self.gram_diagonal.as_deref()
    }

    pub fn apply(&mut self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let mut y = DVector::zeros(self.rows());
        self.apply_into(x.as_slice(), y.as_mut_slice())?;
        Ok(y)
    }

    /// `y = G x` on raw slices; counts one application.
    pub fn apply_into(&mut self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let n = self.rows();
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: y.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        match &self.gram_diagonal {
            Some(g) => {
                for ((yi, xi), gi) in y.iter_mut().zip(x).zip(g) {
                    *yi = gi * xi;
                }
            }
            None => {
                let mut tmp = vec![0.0; self.map.cols()];
                self.map.apply_transpose(x, &mut tmp);
                self.map.apply(&tmp, y);
            }
        }
        self.apply_count += 1;
        Ok(())
    }

    pub fn apply_block(&mut self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.rows();
        if x.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.nrows() });
        }
        let mut out = DMatrix::zeros(n, x.ncols());
        for j in 0..x.ncols() {
            let src = x.column(j);
            let mut col = vec![0.0; n];
            self.apply_into(src.as_slice(), &mut col)?;
            out.column_mut(j).copy_from_slice(&col);
        }
        Ok(out)
    }

    /// Wraps the operator's matrix in a diagonal perturbation drawn from `seed`.
    pub fn perturb_diagonal(self, delta: f64, seed: u64, route: PerturbationRoute) -> Result<Self> {
        let n = self.rows();
        let shift = DiagonalPerturbation::new(n, delta, seed)?;
        let inner = Box::new(self.map);
        let map = match route {
            PerturbationRoute::Matrix => {
                if !inner.is_symmetric() {
                    return Err(Error::param("matrix-route perturbation needs a square symmetric input"));
                }
                LinearMap::Shifted { inner, shift }
            }
            PerturbationRoute::Gram => LinearMap::GramShifted { inner, shift },
        };
        Ok(Self::new(map))
    }
}

/// `Δ = ε σ_{k+1} / (3n)` for perturbing a PSD matrix directly.
pub fn recommended_delta(sigma_kplus1: f64, n: usize, eps: f64) -> Result<f64> {
    check_delta_args(sigma_kplus1, n, eps)?;
    Ok(eps * sigma_kplus1 / (3.0 * n as f64))
}

/// `Δ = ε σ_{k+1}² / (3n)` for perturbing `A Aᵀ`.
pub fn recommended_delta_gram(sigma_kplus1: f64, n: usize, eps: f64) -> Result<f64> {
    check_delta_args(sigma_kplus1, n, eps)?;
    Ok(eps * sigma_kplus1 * sigma_kplus1 / (3.0 * n as f64))
}

fn check_delta_args(sigma: f64, n: usize, eps: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!("sigma_(k+1) must be positive, got {sigma}")));
    }
    if n == 0 {
        return Err(Error::param("n must be positive"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_matrix, stream};

    #[test]
    fn diagonal_action() {
        let mut op = GramOperator::from_spectrum(&[3.0, 2.0, 1.0]);
        let y = op.apply(&DVector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
        assert_eq!(y.as_slice(), &[9.0, 0.0, 0.0]);
        assert_eq!(op.apply_count(), 1);
    }

    #[test]
    fn dense_identity_and_hand_product() {
        let mut id = GramOperator::from_dense(DMatrix::identity(2, 2));
        assert_eq!(id.apply(&DVector::from_vec(vec![1.0, 1.0])).unwrap().as_slice(), &[1.0, 1.0]);

        // AAᵀ = [[5,2],[2,1]]
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        let mut op = GramOperator::from_dense(a);
        let y = op.apply(&DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert_eq!(y.as_slice(), &[5.0, 2.0]);
    }

    #[test]
    fn block_counts_columns() {
        let mut op = GramOperator::from_spectrum(&[3.0, 2.0]);
        let y = op.apply_block(&DMatrix::identity(2, 2)).unwrap();
        assert_eq!(y, DMatrix::from_row_slice(2, 2, &[9.0, 0.0, 0.0, 4.0]));
        assert_eq!(op.apply_count(), 2);

        let empty = op.apply_block(&DMatrix::zeros(2, 0)).unwrap();
        assert_eq!(empty.ncols(), 0);
        assert_eq!(op.apply_count(), 2);

        let mut ident = GramOperator::from_spectrum(&[1.0; 4]);
        let x = gaussian_matrix(&mut stream(3, 0, Purpose::Start), 4, 3);
        assert_eq!(ident.apply_block(&x).unwrap(), x);
    }

    #[test]
    fn rejects_bad_input() {
        let mut op = GramOperator::from_spectrum(&[1.0, 2.0]);
        assert!(matches!(
            op.apply(&DVector::from_vec(vec![1.0])),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(matches!(op.apply(&DVector::from_vec(vec![1.0, f64::NAN])), Err(Error::NonFinite)));
        assert_eq!(op.apply_count(), 0);
        op.apply(&DVector::from_vec(vec![1.0, 1.0])).unwrap();
        op.reset_count();
        assert_eq!(op.apply_count(), 0);
    }

    fn bits(v: &DVector<f64>) -> Vec<u64> {
        v.iter().map(|x| x.to_bits()).collect()
    }

    #[test]
    fn zero_delta_is_bit_identical() {
        let a = gaussian_matrix(&mut stream(5, 0, Purpose::Matrix), 6, 6);
        let sym = &a + a.transpose();
        let x = gaussian_matrix(&mut stream(5, 1, Purpose::Start), 6, 1).column(0).into_owned();

        let mut plain = GramOperator::from_dense(sym.clone());
        let mut pert = GramOperator::from_dense(sym.clone())
            .perturb_diagonal(0.0, 9, PerturbationRoute::Matrix)
            .unwrap();
        assert_eq!(bits(&plain.apply(&x).unwrap()), bits(&pert.apply(&x).unwrap()));

        let mut d0 = GramOperator::from_spectrum(&[2.0, 1.5, 0.25]);
        let mut d1 = GramOperator::from_spectrum(&[2.0, 1.5, 0.25])
            .perturb_diagonal(0.0, 3, PerturbationRoute::Matrix)
            .unwrap();
        let x3 = DVector::from_vec(vec![0.3, -1.0, 7.0]);
        assert_eq!(bits(&d0.apply(&x3).unwrap()), bits(&d1.apply(&x3).unwrap()));

        // Gram route with Δ = 0 applies (AAᵀ)² regardless of the seed.
        let mut g1 = GramOperator::from_dense(sym.clone()).perturb_diagonal(0.0, 1, PerturbationRoute::Gram).unwrap();
        let mut g2 = GramOperator::from_dense(sym.clone()).perturb_diagonal(0.0, 2, PerturbationRoute::Gram).unwrap();
        assert_eq!(bits(&g1.apply(&x).unwrap()), bits(&g2.apply(&x).unwrap()));
    }

    #[test]
    fn perturbation_bounds_and_reproducibility() {
        let p = DiagonalPerturbation::new(100, 1e-6, 42).unwrap();
        assert!(p.norm() <= 1e-6);
        assert_eq!(p, DiagonalPerturbation::new(100, 1e-6, 42).unwrap());
        assert!(DiagonalPerturbation::new(3, -1.0, 0).is_err());
    }

    #[test]
    fn sample_max_reaches_near_delta() {
        // P(max of 100 uniforms on [-Δ,Δ] in magnitude < 0.9Δ) = 0.9^100 ≈ 2.7e-5 per seed.
        let mut best: f64 = 0.0;
        for seed in 0..10_000u64 {
            let p = DiagonalPerturbation::new(100, 1e-6, seed).unwrap();
            assert!(p.norm() <= 1e-6);
            best = best.max(p.norm());
        }
        assert!(best >= 0.9e-6);
    }

    #[test]
    fn perturbed_identity_has_distinct_eigenvalues() {
        let op = GramOperator::from_spectrum(&[1.0, 1.0])
            .perturb_diagonal(0.1, 11, PerturbationRoute::Matrix)
            .unwrap();
        let d = op.map().diagonal().unwrap();
        assert_ne!(d[0], d[1]);
        assert!(d.iter().all(|v| (v - 1.0).abs() <= 0.1));
        assert_eq!(op.gram_diagonal().unwrap(), &[d[0] * d[0], d[1] * d[1]]);
    }

    #[test]
    fn rectangular_matrix_route_rejected() {
        let op = GramOperator::from_dense(DMatrix::zeros(3, 5));
        assert!(op.perturb_diagonal(0.1, 0, PerturbationRoute::Matrix).is_err());
        let op = GramOperator::from_dense(DMatrix::zeros(3, 5));
        assert_eq!(op.perturb_diagonal(0.1, 0, PerturbationRoute::Gram).unwrap().rows(), 3);
    }

    #[test]
    fn gram_route_matches_dense_square() {
        let a = gaussian_matrix(&mut stream(8, 0, Purpose::Matrix), 4, 7);
        let mut op = GramOperator::from_dense(a.clone())
            .perturb_diagonal(0.05, 2, PerturbationRoute::Gram)
            .unwrap();
        let d = DiagonalPerturbation::new(4, 0.05, 2).unwrap();
        let shifted = &a * a.transpose() + DMatrix::from_diagonal(&DVector::from_column_slice(d.entries()));
        let expect = &shifted * &shifted;
        let got = op.apply_block(&DMatrix::identity(4, 4)).unwrap();
        assert!((got - expect).amax() < 1e-12);
    }

    #[test]
    fn delta_formulas() {
        assert!((recommended_delta(3.0, 100, 0.1).unwrap() - 1e-3).abs() < 1e-18);
        assert!((recommended_delta(1.0, 1, 0.3).unwrap() - 0.1).abs() < 1e-16);
        assert!((recommended_delta_gram(2.0, 4, 0.3).unwrap() - 0.1).abs() < 1e-16);
        assert!(recommended_delta(0.0, 10, 0.1).is_err());
        assert!(recommended_delta(1.0, 10, 1.0).is_err());
    }
}
