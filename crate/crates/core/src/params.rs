//! Squeezing and loss parameters.

use core::f64::consts::LN_10;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Squeezing of the two-mode squeezed vacuum source.
///
/// Decibels follow the quadrature-variance convention
/// `dB = 10 log10(e^{2r})`, i.e. `r = dB ln(10) / 20`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParam {
    r: f64,
    lambda: f64,
    db: f64,
}

impl SqueezeParam {
    pub fn from_rate(r: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::Domain {
                name: "r",
                value: r,
                domain: "0 <= r < inf",
            });
        }
        let lambda = r.tanh();
        if lambda >= 1.0 {
            return Err(Error::Domain {
                name: "r",
                value: r,
                domain: "tanh(r) < 1",
            });
        }
        Ok(Self {
            r,
            lambda,
            db: rate_to_db(r),
        })
    }

    pub fn from_db(db: f64) -> Result<Self> {
        if !db.is_finite() || db < 0.0 {
            return Err(Error::Domain {
                name: "db",
                value: db,
                domain: "0 <= dB < inf",
            });
        }
        let mut s = Self::from_rate(db * LN_10 / 20.0)?;
        // keep the caller's value so grid points print exactly
        s.db = db;
        Ok(s)
    }

    /// Build from `λ²`, the quantity that enters every formula.
    pub fn from_lambda_squared(lambda2: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda2) {
            return Err(Error::Domain {
                name: "lambda2",
                value: lambda2,
                domain: "0 <= lambda^2 < 1",
            });
        }
        let lambda = lambda2.sqrt();
        let r = lambda.atanh();
        Ok(Self {
            r,
            lambda,
            db: rate_to_db(r),
        })
    }

    pub fn rate(&self) -> f64 {
        self.r
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lambda_squared(&self) -> f64 {
        self.lambda * self.lambda
    }

    pub fn db(&self) -> f64 {
        self.db
    }
}

pub fn db_to_rate(db: f64) -> Result<SqueezeParam> {
    SqueezeParam::from_db(db)
}

pub fn rate_to_db(r: f64) -> f64 {
    r * 20.0 / LN_10
}

/// One experimental configuration: source squeezing, the transmittance of
/// the heralding mode (`zeta1`) and of the signal mode (`zeta2`), and the
/// heralded photon count `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentParams {
    pub squeeze: SqueezeParam,
    pub zeta1: f64,
    pub zeta2: f64,
    pub m: u32,
}

impl ExperimentParams {
    pub fn new(squeeze: SqueezeParam, zeta1: f64, zeta2: f64, m: u32) -> Result<Self> {
        let p = Self {
            squeeze,
            zeta1,
            zeta2,
            m,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.zeta1) {
            return Err(Error::Domain {
                name: "zeta1",
                value: self.zeta1,
                domain: "[0, 1]",
            });
        }
        if !(0.0..=1.0).contains(&self.zeta2) {
            return Err(Error::Domain {
                name: "zeta2",
                value: self.zeta2,
                domain: "[0, 1]",
            });
        }
        let l2 = self.squeeze.lambda_squared();
        if !(0.0..1.0).contains(&l2) {
            return Err(Error::Domain {
                name: "lambda2",
                value: l2,
                domain: "0 <= lambda^2 < 1",
            });
        }
        Ok(())
    }

    pub fn lambda_squared(&self) -> f64 {
        self.squeeze.lambda_squared()
    }

    /// Series argument `λ²(1 − ζ₁)(1 − ζ₂)`.
    pub fn series_arg(&self) -> f64 {
        self.lambda_squared() * (1.0 - self.zeta1) * (1.0 - self.zeta2)
    }

    pub fn with_m(&self, m: u32) -> Self {
        Self { m, ..*self }
    }
}
