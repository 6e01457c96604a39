//! Two-component Gaussian mixture noise: background Gaussian with variance
//! `sigma_n_sq`, plus an impulsive component of variance `strength * sigma_n_sq`
//! selected with probability `phi` on every draw.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmmParams {
    phi: f64,
    sigma_n_sq: f64,
    strength: f64,
}

impl GmmParams {
    pub fn new(phi: f64, sigma_n_sq: f64, strength: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&phi) {
            return Err(Error::param(
                "phi",
                format!("must lie in [0, 1], got {phi}"),
            ));
        }
        if !(sigma_n_sq.is_finite() && sigma_n_sq > 0.0) {
            return Err(Error::param(
                "sigma_n_sq",
                format!("must be positive, got {sigma_n_sq}"),
            ));
        }
        if !(strength.is_finite() && strength >= 1.0) {
            return Err(Error::param(
                "T",
                format!("impulsive strength must be >= 1, got {strength}"),
            ));
        }
        Ok(Self {
            phi,
            sigma_n_sq,
            strength,
        })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn sigma_n_sq(&self) -> f64 {
        self.sigma_n_sq
    }

    /// Impulsive strength multiplier `T`.
    pub fn strength(&self) -> f64 {
        self.strength
    }

    /// `(1 - phi) sigma_n^2 + phi T sigma_n^2`.
    pub fn analytic_variance(&self) -> f64 {
        (1.0 - self.phi) * self.sigma_n_sq + self.phi * self.strength * self.sigma_n_sq
    }

    pub fn sampler(&self) -> GmmSampler {
        GmmSampler::new(*self)
    }
}

pub fn analytic_variance(params: &GmmParams) -> f64 {
    params.analytic_variance()
}

/// Base noise variance for a given SNR in dB, with unit training power.
pub fn sigma_from_snr(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Draws from a fixed [`GmmParams`] law with the standard deviations
/// precomputed.
///
/// Every draw consumes exactly one uniform followed by one standard normal
/// from the stream, whatever `phi` is.
#[derive(Debug, Clone, Copy)]
pub struct GmmSampler {
    params: GmmParams,
    background_std: f64,
    impulsive_std: f64,
}

impl GmmSampler {
    pub fn new(params: GmmParams) -> Self {
        Self {
            params,
            background_std: params.sigma_n_sq.sqrt(),
            impulsive_std: (params.strength * params.sigma_n_sq).sqrt(),
        }
    }

    pub fn params(&self) -> &GmmParams {
        &self.params
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_labeled(rng).0
    }

    /// Returns the draw and whether it came from the impulsive component.
    pub fn sample_labeled<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, bool) {
        let u: f64 = rng.random();
        let impulsive = u < self.params.phi;
        let g: f64 = rng.sample(StandardNormal);
        let std = if impulsive {
            self.impulsive_std
        } else {
            self.background_std
        };
        (g * std, impulsive)
    }
}

pub fn sample<R: Rng + ?Sized>(params: &GmmParams, rng: &mut R) -> f64 {
    GmmSampler::new(*params).sample(rng)
}
