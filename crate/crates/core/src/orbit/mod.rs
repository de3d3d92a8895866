//! Symmetric period-2 orbits of the impact and smooth flows, their
//! monodromy matrices and stability, and sampled return maps.

mod analytic;
mod impact;
mod sample;
mod smooth;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use analytic::{leg_factors, linearized_return_map_impact, LegFactors};
pub use impact::{
    find_period2_impact, find_period2_impact_with, impact_monodromy_fd, impact_return_map,
    ShootingSettings,
};
pub use sample::{sample_return_map, seed_on_section, PointCloud, ReturnPoint};
pub(crate) use smooth::smooth_orbit_near;
pub use smooth::{
    find_period2_smooth, smooth_monodromy, smooth_monodromy_fd, smooth_return_map, solve_orbit,
    SmoothSolveSettings,
};

pub type Mat2 = [[f64; 2]; 2];

pub(crate) fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn det2(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn trace2(a: &Mat2) -> f64 {
    a[0][0] + a[1][1]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Elliptic,
    Hyperbolic,
    Parabolic,
}

impl Stability {
    pub fn name(self) -> &'static str {
        match self {
            Stability::Elliptic => "elliptic",
            Stability::Hyperbolic => "hyperbolic",
            Stability::Parabolic => "parabolic",
        }
    }
}

/// Width of the parabolic band around `|trace| = 2`.
pub const PARABOLIC_BAND: f64 = 1e-9;

/// Stability tag and multipliers `(tr +- sqrt(tr^2 - 4))/2` of a 2x2
/// symplectic matrix.
pub fn classify_stability(m: &Mat2) -> Result<(Stability, [Complex64; 2])> {
    let det = det2(m);
    if !((det - 1.0).abs() < 1e-6) {
        return Err(Error::NotSymplectic { det });
    }
    let tr = trace2(m);
    let disc = tr * tr - 4.0;
    let mult = if disc >= 0.0 {
        let r = disc.sqrt();
        [
            Complex64::new(0.5 * (tr + r), 0.0),
            Complex64::new(0.5 * (tr - r), 0.0),
        ]
    } else {
        let r = (-disc).sqrt();
        [
            Complex64::new(0.5 * tr, 0.5 * r),
            Complex64::new(0.5 * tr, -0.5 * r),
        ]
    };
    let tag = if (tr.abs() - 2.0).abs() <= PARABOLIC_BAND {
        Stability::Parabolic
    } else if tr.abs() < 2.0 {
        Stability::Elliptic
    } else {
        Stability::Hyperbolic
    };
    Ok((tag, mult))
}

/// Which quantity closes the orbit equations besides periodicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    FixU10,
    FixEnergy,
    FixMultiplierRealPart(f64),
}

/// A symmetric period-2 orbit through `(u10, 0, 0, v20)` on the section
/// `u2 = 0`, hitting each wall once per period at a right angle.
///
/// `t_c` is the time from the section to the upper wall; the period is
/// `4 t_c`. For the smooth flow `t_c` is a quarter of the period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub epsilon: f64,
    pub u10: f64,
    pub v20: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub t_c: f64,
    pub monodromy: Mat2,
    /// `[re, im]` of `Lambda` and `1/Lambda`.
    pub multipliers: [[f64; 2]; 2],
    pub stability: Stability,
}

impl PeriodicOrbit {
    pub(crate) fn assemble(
        epsilon: f64,
        u10: f64,
        v20: f64,
        h: f64,
        t_c: f64,
        monodromy: Mat2,
    ) -> Result<Self> {
        let (stability, mult) = classify_stability(&monodromy)?;
        Ok(PeriodicOrbit {
            epsilon,
            u10,
            v20,
            h,
            t_c,
            monodromy,
            multipliers: [[mult[0].re, mult[0].im], [mult[1].re, mult[1].im]],
            stability,
        })
    }

    pub fn multipliers_complex(&self) -> [Complex64; 2] {
        [
            Complex64::new(self.multipliers[0][0], self.multipliers[0][1]),
            Complex64::new(self.multipliers[1][0], self.multipliers[1][1]),
        ]
    }

    pub fn trace(&self) -> f64 {
        trace2(&self.monodromy)
    }

    pub fn period(&self) -> f64 {
        4.0 * self.t_c
    }

    /// Real part of the leading multiplier.
    pub fn multiplier_real_part(&self) -> f64 {
        self.multipliers[0][0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_examples() {
        let (s, m) = classify_stability(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap();
        assert_eq!(s, Stability::Elliptic);
        assert!((m[0].norm() - 1.0).abs() < 1e-15 && m[0].im > 0.0);

        let (s, m) = classify_stability(&[[2.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_eq!(s, Stability::Hyperbolic);
        assert!(((m[0] * m[1]).re - 1.0).abs() < 1e-12);

        let (s, _) = classify_stability(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert_eq!(s, Stability::Parabolic);

        assert!(matches!(
            classify_stability(&[[2.0, 0.0], [0.0, 2.0]]),
            Err(Error::NotSymplectic { .. })
        ));
    }

    #[test]
    fn negative_trace_band() {
        let (s, _) = classify_stability(&[[-1.0, 0.3], [0.0, -1.0]]).unwrap();
        assert_eq!(s, Stability::Parabolic);
        let (s, _) = classify_stability(&[[-3.0, 1.0], [-10.0, 3.0]]).unwrap();
        assert_eq!(s, Stability::Elliptic);
    }
}
