//! Seedable samplers for the random Hamiltonian models and for Haar
//! unitaries/states.
//!
//! Every sampler is a pure function of its generator, so fixing a
//! [`SeedStream`] fixes the sample bit for bit.

use core::fmt;
use core::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    eigvals_hermitian, qr_phase_fixed, ComplexMatrix, HermitianMatrix, PureState, UnitaryMatrix,
};
use crate::prelude::*;
use crate::rng::SeedStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnsembleKind {
    /// GUE(d, sigma^2).
    Gue,
    /// Diagonal with i.i.d. N(0, 1) entries.
    DiagGaussian,
    /// `U D U^dag` with `D` i.i.d. N(0, 1) and `U` Haar.
    RandomBasisGaussian,
}

impl EnsembleKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gue => "gue",
            Self::DiagGaussian => "diag-gaussian",
            Self::RandomBasisGaussian => "random-basis-gaussian",
        }
    }

    /// Whether the law is invariant under unitary conjugation.
    pub fn is_unitarily_invariant(self) -> bool {
        !matches!(self, Self::DiagGaussian)
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gue" => Ok(Self::Gue),
            "diag" | "diag-gaussian" | "diagonal" => Ok(Self::DiagGaussian),
            "random-basis" | "random-basis-gaussian" | "rbg" => Ok(Self::RandomBasisGaussian),
            other => Err(Error::InvalidArgument(alloc::format!(
                "unknown ensemble kind `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub dim: usize,
    /// Entry variance. GUE defaults to `1/d`; the Gaussian models are fixed at 1.
    pub variance: f64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, dim: usize, variance: Option<f64>) -> Result<Self> {
        let variance = match (kind, variance) {
            (EnsembleKind::Gue, Some(v)) => v,
            (EnsembleKind::Gue, None) => 1.0 / dim.max(1) as f64,
            (_, None) => 1.0,
            (_, Some(1.0)) => 1.0,
            (k, Some(v)) => {
                return Err(Error::InvalidArgument(alloc::format!(
                    "{k} has unit variance by definition, got sigma2 = {v}"
                )))
            }
        };
        let spec = Self {
            kind,
            dim,
            variance,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// GUE(d) with the standard `sigma^2 = 1/d` scaling.
    pub fn gue(dim: usize) -> Self {
        Self {
            kind: EnsembleKind::Gue,
            dim,
            variance: 1.0 / dim.max(1) as f64,
        }
    }

    pub fn diag_gaussian(dim: usize) -> Self {
        Self {
            kind: EnsembleKind::DiagGaussian,
            dim,
            variance: 1.0,
        }
    }

    pub fn random_basis_gaussian(dim: usize) -> Self {
        Self {
            kind: EnsembleKind::RandomBasisGaussian,
            dim,
            variance: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::InvalidArgument(
                "ensemble dimension must be >= 1".into(),
            ));
        }
        if !(self.variance > 0.0) || !self.variance.is_finite() {
            return Err(Error::InvalidArgument(
                "ensemble variance must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<HermitianMatrix> {
        self.validate()?;
        Ok(match self.kind {
            EnsembleKind::Gue => sample_gue(self.dim, self.variance, rng),
            EnsembleKind::DiagGaussian => sample_diag_gaussian(self.dim, rng),
            EnsembleKind::RandomBasisGaussian => sample_random_basis_gaussian(self.dim, rng),
        })
    }

    pub fn sample_stream(&self, stream: SeedStream) -> Result<HermitianMatrix> {
        self.sample(&mut stream.rng())
    }

    /// Eigenvalues of a draw, ascending for GUE and in draw order for the
    /// Gaussian models. Consumes the generator exactly as [`Self::sample`]
    /// does up to the point where the spectrum is fixed, so the multiset
    /// equals the spectrum of the matrix [`Self::sample`] would return.
    pub fn sample_eigenvalues<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        self.validate()?;
        match self.kind {
            EnsembleKind::Gue => eigvals_hermitian(&sample_gue(self.dim, self.variance, rng)),
            EnsembleKind::DiagGaussian | EnsembleKind::RandomBasisGaussian => {
                Ok(standard_normals(self.dim, rng))
            }
        }
    }

    /// Radius of the limiting spectral support for GUE: `2 sqrt(d sigma^2)`.
    pub fn semicircle_radius(&self) -> f64 {
        2.0 * (self.dim as f64 * self.variance).sqrt()
    }
}

#[inline]
pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Standard complex Gaussian: independent real and imaginary parts of variance 1/2.
#[inline]
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let re = normal(rng);
    let im = normal(rng);
    C64::new(re * s, im * s)
}

fn standard_normals<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| normal(rng)).collect()
}

/// GUE(d, sigma^2): `H_ii = X_ii`, `H_ij = (X_ij + i Y_ij) / sqrt 2` for
/// `i < j`, with `X, Y ~ N(0, sigma^2)`.
pub fn sample_gue<R: Rng + ?Sized>(d: usize, variance: f64, rng: &mut R) -> HermitianMatrix {
    let sigma = variance.sqrt();
    let s = sigma * core::f64::consts::FRAC_1_SQRT_2;
    let mut m = ComplexMatrix::zeros(d);
    for i in 0..d {
        m[(i, i)] = C64::new(sigma * normal(rng), 0.0);
        for j in i + 1..d {
            let re = normal(rng);
            let im = normal(rng);
            let z = C64::new(s * re, s * im);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianMatrix::new(m)
}

pub fn sample_diag_gaussian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianMatrix {
    HermitianMatrix::from_real_diagonal(&standard_normals(d, rng))
}

/// Haar unitary from the phase-corrected QR of a complex Ginibre matrix.
pub fn sample_haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> UnitaryMatrix {
    let g = ComplexMatrix::from_fn(d, |_, _| complex_normal(rng));
    qr_phase_fixed(&g)
}

/// First `k` columns of a Haar unitary (Gram-Schmidt on `k` Ginibre columns,
/// which is the same map as phase-corrected QR restricted to those columns).
pub fn sample_haar_columns<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Vec<Vec<C64>> {
    assert!(
        k <= d,
        "cannot draw {k} orthonormal columns in dimension {d}"
    );
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut v: Vec<C64> = (0..d).map(|_| complex_normal(rng)).collect();
        // Two passes of modified Gram-Schmidt keep orthogonality at 1e-15.
        for _ in 0..2 {
            for c in &cols {
                let proj: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= proj * y;
                }
            }
        }
        let n = crate::linalg::norm(&v);
        for x in &mut v {
            *x /= n;
        }
        cols.push(v);
    }
    cols
}

/// `U D U^dag` with `D` drawn first, then `U`.
pub fn sample_random_basis_gaussian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianMatrix {
    let diag = standard_normals(d, rng);
    let u = sample_haar_unitary(d, rng);
    let um = u.matrix();
    let m = ComplexMatrix::from_fn(d, |i, j| {
        (0..d)
            .map(|k| um[(i, k)] * diag[k] * um[(j, k)].conj())
            .sum()
    });
    HermitianMatrix::new(m)
}

/// Uniform unit vector in `C^d`.
pub fn sample_haar_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PureState {
    let mut v: Vec<C64> = (0..d).map(|_| complex_normal(rng)).collect();
    let n = crate::linalg::norm(&v);
    if n == 0.0 {
        v[0] = C64::new(1.0, 0.0);
        return PureState::new_unchecked(v);
    }
    for x in &mut v {
        *x /= n;
    }
    PureState::new_unchecked(v)
}

/// Random diagonal unitary with i.i.d. uniform phases.
pub fn sample_diagonal_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> UnitaryMatrix {
    let phases: Vec<f64> = (0..d)
        .map(|_| rng.random_range(-core::f64::consts::PI..core::f64::consts::PI))
        .collect();
    UnitaryMatrix::diagonal_phases(&phases)
}
