//! Dense kernels for the small projected problems: Gram-Schmidt with
//! reorthogonalization, symmetric eigendecomposition, principal angles.

use std::ops::Range;

use nalgebra::{DMatrix, DMatrixView, DVector};

use crate::error::{Error, Result};

pub const DEFAULT_DROP_TOL: f64 = 1e-12;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Modified Gram-Schmidt sweep of `v` against columns `range` of a flat
/// column-major store with column length `n`.
pub(crate) fn mgs_sweep(store: &[f64], n: usize, range: Range<usize>, v: &mut [f64]) {
    for j in range {
        let c = &store[j * n..(j + 1) * n];
        let h = dot(c, v);
        axpy(-h, c, v);
    }
}

/// Column-orthonormal `n × m` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    n: usize,
    data: Vec<f64>,
    drop_log: Vec<usize>,
    candidates: usize,
}

impl OrthonormalBasis {
    pub fn empty(n: usize) -> Self {
        Self { n, data: Vec::new(), drop_log: Vec::new(), candidates: 0 }
    }

    /// Orthonormalizes the columns of `m` left to right, dropping dependent ones.
    pub fn from_columns(m: &DMatrix<f64>, drop_tol: f64) -> Result<Self> {
        let mut basis = Self::empty(m.nrows());
        for j in 0..m.ncols() {
            basis.extend(m.column(j).as_slice(), drop_tol)?;
        }
        Ok(basis)
    }

    /// Wraps columns that are already orthonormal to 1e-10.
    pub fn from_orthonormal(m: &DMatrix<f64>) -> Result<Self> {
        let basis = Self::from_raw(m.nrows(), m.as_slice().to_vec());
        let err = basis.orthogonality_error();
        if err > 1e-10 {
            return Err(Error::param(format!("columns are not orthonormal (max deviation {err:.3e})")));
        }
        Ok(basis)
    }

    pub(crate) fn from_raw(n: usize, data: Vec<f64>) -> Self {
        debug_assert!(n == 0 || data.len().is_multiple_of(n));
        let m = data.len().checked_div(n).unwrap_or(0);
        Self { n, data, drop_log: Vec::new(), candidates: m }
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.data.len().checked_div(self.n).unwrap_or(0)
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn view(&self) -> DMatrixView<'_, f64> {
        DMatrixView::from_slice(&self.data, self.n, self.ncols())
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.n, self.ncols(), &self.data)
    }

    /// Candidate indices (in submission order) rejected as numerically dependent.
    pub fn drop_log(&self) -> &[usize] {
        &self.drop_log
    }

    /// Two MGS passes against every column, then normalize and append.
    /// Returns `false` and logs the candidate when the residual falls below
    /// `drop_tol · ‖v‖`.
    pub fn extend(&mut self, v: &[f64], drop_tol: f64) -> Result<bool> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: v.len() });
        }
        if !(drop_tol > 0.0) {
            return Err(Error::param(format!("drop tolerance must be positive, got {drop_tol}")));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let index = self.candidates;
        self.candidates += 1;
        let mut w = v.to_vec();
        let original = norm(&w);
        let m = self.ncols();
        mgs_sweep(&self.data, self.n, 0..m, &mut w);
        mgs_sweep(&self.data, self.n, 0..m, &mut w);
        let r = norm(&w);
        if original == 0.0 || r < drop_tol * original {
            self.drop_log.push(index);
            return Ok(false);
        }
        w.iter_mut().for_each(|x| *x /= r);
        self.data.extend_from_slice(&w);
        Ok(true)
    }

    /// `max |QᵀQ − I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let m = self.ncols();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..=i {
                let g = dot(self.column(i), self.column(j));
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    /// First `m` columns.
    pub fn truncated(&self, m: usize) -> Self {
        let m = m.min(self.ncols());
        Self::from_raw(self.n, self.data[..m * self.n].to_vec())
    }
}

/// Functional form of [`OrthonormalBasis::extend`].
pub fn mgs_extend(mut basis: OrthonormalBasis, v: &DVector<f64>, drop_tol: f64) -> Result<OrthonormalBasis> {
    basis.extend(v.as_slice(), drop_tol)?;
    Ok(basis)
}

#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Descending.
    pub values: DVector<f64>,
    /// Column `i` pairs with `values[i]`.
    pub vectors: DMatrix<f64>,
}

/// Eigendecomposition of the symmetric part of `m`, eigenvalues descending.
/// Equal eigenvalues keep the solver's original order.
pub fn eigh_small(m: &DMatrix<f64>) -> Result<SymmetricEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let k = m.nrows();
    if k == 0 {
        return Ok(SymmetricEigen { values: DVector::zeros(0), vectors: DMatrix::zeros(0, 0) });
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::param("symmetric eigensolver did not converge"))?;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(k, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(k, k, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SymmetricEigen { values, vectors })
}

/// Singular values, descending.
pub fn singular_values(m: &DMatrix<f64>) -> DVector<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DVector::zeros(0);
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    DVector::from_vec(s)
}

/// `√(m − ‖UᵀV‖_F²)` for two orthonormal bases of equal width.
///
/// Evaluated as `‖V − U(UᵀV)‖_F`, which is algebraically identical for
/// orthonormal inputs but keeps full relative accuracy for nearly equal spans.
pub fn principal_angle_distance(u: &OrthonormalBasis, v: &OrthonormalBasis) -> Result<f64> {
    if u.ncols() != v.ncols() {
        return Err(Error::DimensionMismatch { expected: u.ncols(), got: v.ncols() });
    }
    if u.nrows() != v.nrows() {
        return Err(Error::DimensionMismatch { expected: u.nrows(), got: v.nrows() });
    }
    let n = u.nrows();
    let mut total = 0.0;
    for j in 0..v.ncols() {
        let mut w = v.column(j).to_vec();
        mgs_sweep(u.as_slice(), n, 0..u.ncols(), &mut w);
        total += dot(&w, &w);
    }
    Ok(total.sqrt().min((u.ncols() as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_matrix, stream, Purpose};

    fn e(n: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    }

    #[test]
    fn extend_examples() {
        let b = mgs_extend(OrthonormalBasis::empty(2), &e(2, 0), 1e-12).unwrap();
        let b = mgs_extend(b, &DVector::from_vec(vec![1.0, 1.0]), 1e-12).unwrap();
        assert_eq!(b.to_matrix(), DMatrix::identity(2, 2));

        let b = mgs_extend(OrthonormalBasis::empty(2), &e(2, 0), 1e-12).unwrap();
        let b = mgs_extend(b, &e(2, 0), 1e-12).unwrap();
        assert_eq!(b.ncols(), 1);
        assert_eq!(b.drop_log(), &[1]);

        let b = mgs_extend(OrthonormalBasis::empty(2), &DVector::from_vec(vec![3.0, 4.0]), 1e-12).unwrap();
        assert!((b.column(0)[0] - 0.6).abs() < 1e-15 && (b.column(0)[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn extend_errors() {
        let mut b = OrthonormalBasis::empty(3);
        assert!(matches!(b.extend(&[1.0, 2.0], 1e-12), Err(Error::DimensionMismatch { .. })));
        assert!(b.extend(&[1.0, 2.0, 3.0], 0.0).is_err());
        assert!(!b.extend(&[0.0; 3], 1e-12).unwrap());
        assert_eq!(b.drop_log(), &[0]);
    }

    #[test]
    fn orthonormal_on_ill_conditioned_input() {
        // Powers of a diagonal matrix: a textbook ill-conditioned Krylov sequence.
        let n = 60;
        let d: Vec<f64> = (0..n).map(|i| 1.1f64.powi(-(i as i32))).collect();
        let mut v = gaussian_matrix(&mut stream(2, 0, Purpose::Start), n, 1).column(0).into_owned();
        let mut basis = OrthonormalBasis::empty(n);
        for _ in 0..30 {
            basis.extend(v.as_slice(), DEFAULT_DROP_TOL).unwrap();
            v.iter_mut().zip(&d).for_each(|(x, s)| *x *= s * s);
            let nv = v.norm();
            v /= nv;
        }
        assert!(basis.orthogonality_error() <= 1e-10);
        for j in 0..basis.ncols() {
            assert!((norm(basis.column(j)) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn eigh_examples() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0, 2.0]));
        let eig = eigh_small(&m).unwrap();
        assert_eq!(eig.values.as_slice(), &[4.0, 2.0, 1.0]);
        for (col, row) in [(0usize, 1usize), (1, 2), (2, 0)] {
            assert!((eig.vectors[(row, col)].abs() - 1.0).abs() < 1e-15);
        }

        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let eig = eigh_small(&m).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-15 && (eig.values[1] + 1.0).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((eig.vectors[(0, 0)].abs() - h).abs() < 1e-15);
        assert!((eig.vectors[(0, 0)] - eig.vectors[(1, 0)]).abs() < 1e-15);
        assert!((eig.vectors[(0, 1)] + eig.vectors[(1, 1)]).abs() < 1e-15);
    }

    #[test]
    fn eigh_residual_oracle() {
        let g = gaussian_matrix(&mut stream(6, 0, Purpose::Matrix), 6, 6);
        let m = &g + g.transpose();
        let eig = eigh_small(&m).unwrap();
        let resid = &m * &eig.vectors - &eig.vectors * DMatrix::from_diagonal(&eig.values);
        let scale = singular_values(&m)[0];
        assert!(resid.amax() <= 1e-8 * scale);
        assert!((eig.vectors.transpose() * &eig.vectors - DMatrix::identity(6, 6)).amax() < 1e-12);
        assert!(eig.values.as_slice().windows(2).all(|w| w[0] >= w[1]));
        assert!(eigh_small(&DMatrix::from_element(2, 2, f64::INFINITY)).is_err());
    }

    #[test]
    fn ties_keep_solver_order() {
        let eig = eigh_small(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(eig.values.as_slice(), &[1.0, 1.0, 1.0]);
        assert_eq!(eig.vectors, DMatrix::identity(3, 3));
    }

    #[test]
    fn principal_angle_examples() {
        let u = OrthonormalBasis::from_orthonormal(&DMatrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        let v = OrthonormalBasis::from_orthonormal(&DMatrix::from_column_slice(2, 1, &[0.0, 1.0])).unwrap();
        assert_eq!(principal_angle_distance(&u, &u).unwrap(), 0.0);
        assert_eq!(principal_angle_distance(&u, &v).unwrap(), 1.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let w = OrthonormalBasis::from_orthonormal(&DMatrix::from_column_slice(2, 1, &[h, h])).unwrap();
        assert!((principal_angle_distance(&u, &w).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let two = OrthonormalBasis::from_orthonormal(&DMatrix::identity(2, 2)).unwrap();
        assert!(principal_angle_distance(&u, &two).is_err());
    }

    #[test]
    fn from_orthonormal_rejects_skewed_columns() {
        let m = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        assert!(OrthonormalBasis::from_orthonormal(&m).is_err());
    }
}
