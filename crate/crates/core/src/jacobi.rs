//! Mass-weighted Jacobi coordinates for the collinear triatomic A + BC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiSetup {
    pub masses: [f64; 3],
    pub a_hat: f64,
    pub b_hat: f64,
    pub beta: f64,
}

impl JacobiSetup {
    /// Derives the skew angle and scale factors from `(M_A, M_B, M_C)`.
    pub fn new(ma: f64, mb: f64, mc: f64) -> Result<Self> {
        if !(ma > 0.0 && mb > 0.0 && mc > 0.0) || !(ma + mb + mc).is_finite() {
            return Err(Error::domain(
                "atomic masses must be finite and strictly positive",
            ));
        }
        let total = ma + mb + mc;
        let a_hat = (ma * (mb + mc) / total).sqrt();
        let b_hat = (mc * (mb + ma) / total).sqrt();
        let beta = (ma * mc / ((ma + mb) * (mb + mc))).sqrt().acos();
        Ok(Self {
            masses: [ma, mb, mc],
            a_hat,
            b_hat,
            beta,
        })
    }

    /// `(r1, r2) -> (q1, q2)`.
    pub fn transform(&self, r1: f64, r2: f64) -> (f64, f64) {
        let (s, c) = self.beta.sin_cos();
        (self.a_hat * r1 + self.b_hat * r2 * c, self.b_hat * r2 * s)
    }
}

/// Convenience wrapper over [`JacobiSetup::transform`].
pub fn jacobi_transform(r1: f64, r2: f64, setup: &JacobiSetup) -> Result<(f64, f64)> {
    if !r1.is_finite() || !r2.is_finite() {
        return Err(Error::domain("bond coordinates must be finite"));
    }
    Ok(setup.transform(r1, r2))
}
