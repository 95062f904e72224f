//! Dense complex linear algebra.
//!
//! Matrices are row-major `d x d` arrays of [`C64`]. The wrapper types
//! [`HermitianMatrix`] and [`UnitaryMatrix`] carry their defining invariant;
//! both are immutable once built.

mod eigen;
mod qr;

use core::ops::{Index, IndexMut};

use crate::error::{check_dims, Error, Result};
use crate::prelude::*;

pub use eigen::{eig_hermitian, eigvals_hermitian, unitary_eigenphases};
pub use qr::qr_phase_fixed;

pub type C64 = num_complex::Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Unitarity tolerance per unit of dimension, in max-entry norm.
pub const UNITARY_TOL_PER_DIM: f64 = 1e-10;
/// Relative operator-norm tolerance for `V diag(lambda) V^dag` reconstruction.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;
/// Normalization tolerance for pure states.
pub const STATE_NORM_TOL: f64 = 1e-12;

/// `e^{i theta}`.
#[inline]
pub fn cis(theta: f64) -> C64 {
    C64::new(theta.cos(), theta.sin())
}

/// `theta` reduced to `[0, 2 pi)`.
#[inline]
pub fn wrap_phase(theta: f64) -> f64 {
    let r = theta % core::f64::consts::TAU;
    if r < 0.0 {
        r + core::f64::consts::TAU
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major entries, rejecting NaN/Inf.
    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        check_dims(dim * dim, data.len())?;
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, data })
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            let out_row = &mut out.data[i * d..(i + 1) * d];
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == ZERO {
                    continue;
                }
                let other_row = &other.data[k * d..(k + 1) * d];
                for (o, &b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self^dag * other`.
    pub fn adjoint_mul(&self, other: &Self) -> Result<Self> {
        self.adjoint().matmul(other)
    }

    pub fn matvec(&self, v: &[C64]) -> Result<Vec<C64>> {
        check_dims(self.dim, v.len())?;
        Ok((0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value, via the spectrum of `A^dag A`.
    pub fn operator_norm(&self) -> Result<f64> {
        let gram = HermitianMatrix::new(self.adjoint_mul(self)?);
        let top = eigvals_hermitian(&gram)?.last().copied().unwrap_or(0.0);
        Ok(top.max(0.0).sqrt())
    }

    /// Max-entry deviation of `A A^dag` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let z: C64 = self
                    .row(i)
                    .iter()
                    .zip(self.row(j))
                    .map(|(a, b)| a * b.conj())
                    .sum();
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((z - target).norm());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

/// A Hermitian matrix. Construction symmetrizes, so `H == H^dag` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Self {
        let d = m.dim();
        let mut out = ComplexMatrix::zeros(d);
        for i in 0..d {
            out[(i, i)] = C64::new(m[(i, i)].re, 0.0);
            for j in i + 1..d {
                let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        Self(out)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self(ComplexMatrix::from_diagonal(&d))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(ComplexMatrix::zeros(dim))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// Returns `Some(diag)` when every off-diagonal entry is exactly zero.
    pub fn real_diagonal(&self) -> Option<Vec<f64>> {
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                if i != j && self.0[(i, j)] != ZERO {
                    return None;
                }
            }
        }
        Some((0..d).map(|i| self.0[(i, i)].re).collect())
    }

    /// Conjugation `W H W^dag`.
    pub fn conjugate_by(&self, w: &UnitaryMatrix) -> Result<Self> {
        let m = w.matrix().matmul(&self.0)?.matmul(&w.matrix().adjoint())?;
        Ok(Self::new(m))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(ComplexMatrix);

impl UnitaryMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let tolerance = UNITARY_TOL_PER_DIM * m.dim().max(1) as f64;
        let deviation = m.unitarity_defect();
        if deviation > tolerance {
            return Err(Error::NotUnitary {
                deviation,
                tolerance,
            });
        }
        Ok(Self(m))
    }

    /// Wraps a matrix known to be unitary by construction.
    pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
        debug_assert!(m.unitarity_defect() <= 1e-8 * m.dim().max(1) as f64);
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn diagonal_phases(phases: &[f64]) -> Self {
        let d: Vec<C64> = phases.iter().map(|&p| cis(p)).collect();
        Self(ComplexMatrix::from_diagonal(&d))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.matmul(&other.0)?))
    }

    pub fn scale_phase(&self, phi: f64) -> Self {
        Self(self.0.scale(cis(phi)))
    }

    /// `self G self^dag`.
    pub fn conjugate(&self, g: &UnitaryMatrix) -> Result<Self> {
        Ok(Self(self.0.matmul(&g.0)?.matmul(&self.0.adjoint())?))
    }

    /// Eigenphases in `(-pi, pi]`, unsorted.
    pub fn eigenphases(&self) -> Result<Vec<f64>> {
        unitary_eigenphases(self)
    }
}

/// Eigendecomposition `H = V diag(lambda) V^dag`, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: UnitaryMatrix,
}

impl Spectrum {
    pub(crate) fn from_parts(eigenvalues: Vec<f64>, eigenvectors: UnitaryMatrix) -> Self {
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    /// Spectrum of a real diagonal matrix with the given entries.
    pub fn of_diagonal(diag: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..diag.len()).collect();
        order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
        let d = diag.len();
        let vecs = ComplexMatrix::from_fn(d, |i, j| if order[j] == i { ONE } else { ZERO });
        Self {
            eigenvalues: order.iter().map(|&i| diag[i]).collect(),
            eigenvectors: UnitaryMatrix(vecs),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &UnitaryMatrix {
        &self.eigenvectors
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        let v = self.eigenvectors.matrix();
        let d = self.dim();
        let m = ComplexMatrix::from_fn(d, |i, j| {
            (0..d)
                .map(|k| v[(i, k)] * self.eigenvalues[k] * v[(j, k)].conj())
                .sum()
        });
        HermitianMatrix::new(m)
    }
}

/// `U_t = V diag(e^{-i lambda_k t}) V^dag`.
pub fn evolve(spectrum: &Spectrum, t: f64) -> UnitaryMatrix {
    let v = spectrum.eigenvectors.matrix();
    let d = spectrum.dim();
    let phases: Vec<C64> = spectrum.eigenvalues.iter().map(|&l| cis(-l * t)).collect();
    // Scale columns of V once, then one product with V^dag.
    let mut scaled = v.clone();
    for i in 0..d {
        for k in 0..d {
            scaled[(i, k)] *= phases[k];
        }
    }
    let out = ComplexMatrix::from_fn(d, |i, j| {
        scaled
            .row(i)
            .iter()
            .zip(v.row(j))
            .map(|(a, b)| a * b.conj())
            .sum()
    });
    UnitaryMatrix(out)
}

/// Unit vector in `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState(Vec<C64>);

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let deviation = (norm(&amplitudes) - 1.0).abs();
        if deviation > STATE_NORM_TOL {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(Self(amplitudes))
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidArgument(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        for z in &mut amplitudes {
            *z /= n;
        }
        Ok(Self(amplitudes))
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = vec![ZERO; dim];
        v[k] = ONE;
        Self(v)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.0
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum())
    }

    pub(crate) fn new_unchecked(amplitudes: Vec<C64>) -> Self {
        Self(amplitudes)
    }
}

pub fn apply_state(u: &UnitaryMatrix, psi: &PureState) -> Result<PureState> {
    Ok(PureState(u.matrix().matvec(psi.amplitudes())?))
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
