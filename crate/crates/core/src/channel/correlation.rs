use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalues in `[-PSD_TOL, 0)` are treated as rounding noise and clamped.
pub const PSD_TOL: f64 = 1e-10;

/// Receive-side correlation structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationModel {
    /// `R_ij = r^{|i-j|²}`.
    #[default]
    SquaredExponential,
    /// `R_ij = r^{|i-j|}`.
    Exponential,
    Identity,
}

impl CorrelationModel {
    pub fn name(self) -> &'static str {
        match self {
            Self::SquaredExponential => "squared_exponential",
            Self::Exponential => "exponential",
            Self::Identity => "identity",
        }
    }
}

/// Symmetric eigendecomposition with eigenvalues sorted ascending and
/// clamped at zero. Fails if any eigenvalue is below `-PSD_TOL`.
pub fn symmetric_eigen_clamped(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let smallest = order.first().map(|&i| eig.eigenvalues[i]).unwrap_or(0.0);
    if smallest < -PSD_TOL {
        return Err(Error::NotPsd(smallest));
    }
    let values = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// `U diag(f(values)) Uᵀ`.
pub fn reconstruct(vectors: &DMatrix<f64>, values: &[f64]) -> DMatrix<f64> {
    let scaled = vectors * DMatrix::from_diagonal(&DVector::from_column_slice(values));
    let mut out = scaled * vectors.transpose();
    symmetrize(&mut out);
    out
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Builds the `m × m` correlation matrix of the given model.
pub fn build_correlation(model: CorrelationModel, m: usize, r: f64) -> Result<DMatrix<f64>> {
    if !(r.is_finite() && (0.0..1.0).contains(&r)) {
        return Err(Error::Domain(format!("r = {r} must lie in [0, 1)")));
    }
    if m == 0 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    let corr = match model {
        CorrelationModel::Identity => DMatrix::identity(m, m),
        CorrelationModel::SquaredExponential => DMatrix::from_fn(m, m, |i, j| {
            let d = i.abs_diff(j) as f64;
            if d == 0.0 {
                1.0
            } else {
                r.powf(d * d)
            }
        }),
        CorrelationModel::Exponential => DMatrix::from_fn(m, m, |i, j| {
            let d = i.abs_diff(j);
            if d == 0 {
                1.0
            } else {
                r.powi(d as i32)
            }
        }),
    };
    if model == CorrelationModel::Identity || r == 0.0 {
        return Ok(corr);
    }
    let raw_min = corr.clone().symmetric_eigenvalues().min();
    if raw_min < -PSD_TOL {
        return Err(Error::NotPsd(raw_min));
    }
    if raw_min < 0.0 {
        let (values, vectors) = symmetric_eigen_clamped(&corr)?;
        return Ok(reconstruct(&vectors, &values));
    }
    Ok(corr)
}

/// Principal square root of a symmetric PSD matrix.
pub fn matrix_sqrt_psd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::Domain(format!("matrix is {}x{}, expected square", m.nrows(), m.ncols())));
    }
    let (values, vectors) = symmetric_eigen_clamped(m)?;
    let roots: Vec<f64> = values.iter().map(|v| v.sqrt()).collect();
    Ok(reconstruct(&vectors, &roots))
}
