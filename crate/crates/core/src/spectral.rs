//! Symmetric eigendecomposition by cyclic Jacobi rotations, and reshaping of
//! successor-matrix eigenvectors into grid-shaped maps.

use crate::env::StateSpace;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::sr::SuccessorMatrix;

pub const DEFAULT_JACOBI_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;
const SYMMETRY_BOUND: f64 = 1e-9;

/// Eigenpairs of a symmetric matrix, eigenvalues sorted descending (ties by
/// original position), eigenvectors as orthonormal columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Mat,
    symmetrization_residual: f64,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column k is the eigenvector for `eigenvalues()[k]`.
    pub fn eigenvectors(&self) -> &Mat {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        (0..self.eigenvectors.rows())
            .map(|i| self.eigenvectors[(i, k)])
            .collect()
    }

    /// Frobenius norm of the skew part `(A - A^T)/2` of whatever matrix the
    /// decomposition was derived from. Zero for an exactly symmetric input.
    pub fn symmetrization_residual(&self) -> f64 {
        self.symmetrization_residual
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Split a square matrix into its symmetric part and the Frobenius norm of
/// the discarded skew part.
pub fn symmetrize(a: &Mat) -> Result<(Mat, f64)> {
    if !a.is_square() {
        return Err(Error::Shape("symmetrize needs a square matrix".into()));
    }
    let n = a.rows();
    let mut sym = Mat::zeros(n, n);
    let mut skew_sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s = 0.5 * (a[(i, j)] + a[(j, i)]);
            let k = 0.5 * (a[(i, j)] - a[(j, i)]);
            sym[(i, j)] = s;
            skew_sq += k * k;
        }
    }
    Ok((sym, skew_sq.sqrt()))
}

/// Cyclic Jacobi eigensolver for (near-)symmetric matrices. Sweeps the upper
/// triangle in a fixed order, rotating away each off-diagonal entry, until
/// every off-diagonal magnitude is below `tol`. Deterministic for a fixed
/// input.
pub fn jacobi_eigen(a: &Mat, tol: f64) -> Result<SpectralDecomposition> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let asym = a.max_asymmetry();
    if asym >= SYMMETRY_BOUND {
        return Err(Error::Asymmetric(asym));
    }
    let n = a.rows();
    let (mut m, residual) = symmetrize(a)?;
    let mut v = Mat::identity(n);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off_max = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off_max = off_max.max(m[(p, q)].abs());
            }
        }
        if off_max < tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() < tol {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = 0.5 * (aqq - app) / apq;
                // smaller root of t^2 + 2*theta*t - 1 = 0, for stability
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // column rotation: A <- A G
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                // row rotation: A <- G^T A
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
                // accumulate the eigenvector basis: V <- V G
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    // sort descending by eigenvalue, stable so that ties keep their
    // pre-sort column order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut eigenvectors = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            eigenvectors[(k, dst)] = v[(k, src)];
        }
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        symmetrization_residual: residual,
    })
}

/// An eigenvector scattered back into the 2D shape of its environment, with
/// wall cells zeroed.
#[derive(Debug, Clone)]
pub struct EigenMap {
    field: Mat,
    eigenvalue: f64,
    rank: usize,
}

impl EigenMap {
    pub fn field(&self) -> &Mat {
        &self.field
    }

    pub fn eigenvalue(&self) -> f64 {
        self.eigenvalue
    }

    pub fn rank(&self) -> usize {
        self.rank
    }
}

/// Decompose the symmetric part of the SR restricted to valid states. The
/// recorded residual measures how far the input was from symmetric.
pub fn sr_spectrum(sr: &SuccessorMatrix, space: &StateSpace) -> Result<SpectralDecomposition> {
    if space.grid_shape().is_none() {
        return Err(Error::Shape(
            "eigenmaps need a grid-shaped state space".into(),
        ));
    }
    if sr.n_states() != space.n_states() {
        return Err(Error::Shape(format!(
            "SR has {} states, space has {}",
            sr.n_states(),
            space.n_states()
        )));
    }
    let valid: Vec<usize> = space.valid_states().collect();
    let nv = valid.len();
    let mut restricted = Mat::zeros(nv, nv);
    for (i, &s) in valid.iter().enumerate() {
        let row = sr.row(s);
        for (j, &t) in valid.iter().enumerate() {
            restricted[(i, j)] = row[t];
        }
    }
    let (sym, residual) = symmetrize(&restricted)?;
    let mut dec = jacobi_eigen(&sym, DEFAULT_JACOBI_TOL)?;
    dec.symmetrization_residual = residual;
    Ok(dec)
}

/// Scatter the first `k` eigenvectors of an already-computed decomposition
/// into grid-shaped maps.
pub fn eigenmaps_from(
    dec: &SpectralDecomposition,
    space: &StateSpace,
    k: usize,
) -> Result<Vec<EigenMap>> {
    let valid: Vec<usize> = space.valid_states().collect();
    if dec.dim() != valid.len() {
        return Err(Error::Shape(format!(
            "decomposition over {} states, space has {} valid",
            dec.dim(),
            valid.len()
        )));
    }
    if k > valid.len() {
        return Err(Error::Input(format!(
            "requested {k} eigenmaps from {} valid states",
            valid.len()
        )));
    }
    let mut maps = Vec::with_capacity(k);
    for rank in 0..k {
        let vec = dec.eigenvector(rank);
        let mut per_state = vec![0.0; space.n_states()];
        for (i, &s) in valid.iter().enumerate() {
            per_state[s] = vec[i];
        }
        let field = space.scatter(&per_state, 0.0)?;
        maps.push(EigenMap {
            field,
            eigenvalue: dec.eigenvalues()[rank],
            rank,
        });
    }
    Ok(maps)
}

/// Symmetrize, decompose, and reshape the top `k` eigenvectors of an SR
/// matrix over a spatial environment.
pub fn sr_eigenmaps(sr: &SuccessorMatrix, space: &StateSpace, k: usize) -> Result<Vec<EigenMap>> {
    let dec = sr_spectrum(sr, space)?;
    eigenmaps_from(&dec, space, k)
}
