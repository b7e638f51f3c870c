//! Skew-normal distributions in the direct `(location, scale, shape)`
//! parameterization.
//!
//! Both samplers use the hidden-truncation representation: with
//! `δ = a / √(1 + a²)` and independent standard normals `U₀, U₁`,
//!
//! ```text
//! Z = δ·|U₀| + √(1 − δ²)·U₁ ~ SN(0, 1, a),      X = ξ + s·Z.
//! ```
//!
//! The multivariate version with unit-diagonal scale matrix `Ω` uses
//! `δ = Ωa / √(1 + aᵀΩa)` and `Z = δ·|U₀| + W` with `W ~ N(0, Ω − δδᵀ)`.
//! Moments follow from `E|U₀| = √(2/π)`.

use std::f64::consts::FRAC_2_PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::distributions::{sample_standard_normal, HALF_NORMAL_MEAN};
use crate::error::{domain, Error, Result};

/// Univariate skew-normal `SN(location, scale, shape)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkewNormal {
    location: f64,
    scale: f64,
    shape: f64,
    delta: f64,
}

impl SkewNormal {
    pub fn new(location: f64, scale: f64, shape: f64) -> Result<Self> {
        if !location.is_finite() || !shape.is_finite() || !(scale > 0.0) || !scale.is_finite() {
            return domain(format!(
                "skew-normal needs finite location/shape and scale > 0, got ({location}, {scale}, {shape})"
            ));
        }
        Ok(Self { location, scale, shape, delta: shape / (1.0 + shape * shape).sqrt() })
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u0 = sample_standard_normal(rng).abs();
        let u1 = sample_standard_normal(rng);
        let z = self.delta * u0 + (1.0 - self.delta * self.delta).sqrt() * u1;
        self.location + self.scale * z
    }

    pub fn mean(&self) -> f64 {
        self.location + self.scale * HALF_NORMAL_MEAN * self.delta
    }

    pub fn sd(&self) -> f64 {
        self.scale * (1.0 - FRAC_2_PI * self.delta * self.delta).sqrt()
    }

    /// `(mean, standard deviation)`.
    pub fn moments(&self) -> (f64, f64) {
        (self.mean(), self.sd())
    }
}

/// Multivariate skew-normal `SN_d(Ω, a)` with zero location.
#[derive(Clone, Debug)]
pub struct MultivariateSkewNormal {
    omega: DMatrix<f64>,
    shape: DVector<f64>,
    delta: DVector<f64>,
    /// Lower Cholesky factor of `Ω − δδᵀ`.
    residual_factor: DMatrix<f64>,
}

impl MultivariateSkewNormal {
    /// `omega` must be symmetric positive definite with unit diagonal.
    pub fn new(omega: DMatrix<f64>, shape: DVector<f64>) -> Result<Self> {
        let d = omega.nrows();
        if omega.ncols() != d {
            return Err(Error::Shape { expected: d, found: omega.ncols() });
        }
        if shape.len() != d {
            return Err(Error::Shape { expected: d, found: shape.len() });
        }
        for i in 0..d {
            if (omega[(i, i)] - 1.0).abs() > 1e-12 {
                return domain(format!("scale matrix diagonal entry {i} is {}, expected 1", omega[(i, i)]));
            }
            for j in 0..i {
                if (omega[(i, j)] - omega[(j, i)]).abs() > 1e-12 {
                    return domain(format!("scale matrix is not symmetric at ({i}, {j})"));
                }
            }
        }
        if omega.clone().cholesky().is_none() {
            return domain("scale matrix is not positive definite");
        }
        let omega_a = &omega * &shape;
        let quad = shape.dot(&omega_a);
        let delta = omega_a / (1.0 + quad).sqrt();
        let residual = &omega - &delta * delta.transpose();
        let residual_factor =
            residual.cholesky().ok_or_else(|| Error::Numerical("Ω − δδᵀ is not positive definite".into()))?.l();
        Ok(Self { omega, shape, delta, residual_factor })
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn shape(&self) -> &DVector<f64> {
        &self.shape
    }

    pub fn delta(&self) -> &DVector<f64> {
        &self.delta
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let u0 = sample_standard_normal(rng).abs();
        let u = DVector::from_fn(self.dim(), |_, _| sample_standard_normal(rng));
        &self.delta * u0 + &self.residual_factor * u
    }

    pub fn mean(&self) -> DVector<f64> {
        &self.delta * HALF_NORMAL_MEAN
    }

    /// Per-coordinate standard deviation `√(Ω_jj − (2/π)δ_j²)`.
    pub fn sd(&self) -> DVector<f64> {
        DVector::from_fn(self.dim(), |j, _| (self.omega[(j, j)] - FRAC_2_PI * self.delta[j] * self.delta[j]).sqrt())
    }

    pub fn moments(&self) -> (DVector<f64>, DVector<f64>) {
        (self.mean(), self.sd())
    }

    /// A draw centered and scaled to zero mean and unit variance per coordinate.
    pub fn sample_standardized<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let (mean, sd) = self.moments();
        (self.sample(rng) - mean).component_div(&sd)
    }
}
