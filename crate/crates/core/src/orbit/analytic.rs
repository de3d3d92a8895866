//! Closed-form linearization of the impact return map at a symmetric
//! period-2 orbit, assembled from the five legs
//! section -> upper wall -> reflection -> lower wall -> reflection -> section.

use serde::{Deserialize, Serialize};

use super::{mat_mul, Mat2, PeriodicOrbit};
use crate::error::{Error, Result};
use crate::model::WedgeModel;

/// The five factors of `D = Dh Dr_low Dg Dr_up Df`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegFactors {
    pub df: Mat2,
    pub dr_up: Mat2,
    pub dg: Mat2,
    pub dr_low: Mat2,
    pub dh: Mat2,
}

impl LegFactors {
    pub fn product(&self) -> Mat2 {
        let m = mat_mul(&self.dr_up, &self.df);
        let m = mat_mul(&self.dg, &m);
        let m = mat_mul(&self.dr_low, &m);
        mat_mul(&self.dh, &m)
    }
}

const SINGULAR: f64 = 1e-12;

fn guard(x: f64, what: &str) -> Result<f64> {
    if !(x.abs() >= SINGULAR) {
        return Err(Error::SingularLinearization(format!("{what} = {x:e}")));
    }
    Ok(x)
}

struct Legs<'a> {
    m: &'a WedgeModel,
    h: f64,
    t2: f64,
}

impl Legs<'_> {
    /// Flow matrix of the centre mode over time `t`.
    fn rot(&self, t: f64) -> Mat2 {
        let w = self.m.omega;
        let (s, c) = (w * t).sin_cos();
        [[c, s / w], [-w * s, c]]
    }

    /// Time derivative of `(u1, v1)` after time `t` from `(u, v)`.
    fn rate(&self, u: f64, v: f64, t: f64) -> [f64; 2] {
        let w = self.m.omega;
        let x = u - self.m.u1s;
        let (s, c) = (w * t).sin_cos();
        [-w * x * s + v * c, -w * w * x * c - w * v * s]
    }

    fn advance(&self, u: f64, v: f64, t: f64) -> (f64, f64) {
        let w = self.m.omega;
        let x = u - self.m.u1s;
        let (s, c) = (w * t).sin_cos();
        (self.m.u1s + x * c + v / w * s, -w * x * s + v * c)
    }

    /// Normal speed `v2` on a wall point `(u, +-T u)` at the orbit energy.
    fn wall_speed(&self, u: f64, v: f64) -> Result<f64> {
        let w = self.m.omega;
        let l = self.m.lambda;
        let r = 2.0 * self.h - v * v - w * w * (u - self.m.u1s).powi(2) + l * l * self.t2 * u * u;
        guard(r, "wall speed radicand")?;
        if r < 0.0 {
            return Err(Error::SingularLinearization(format!(
                "negative wall speed radicand {r:e}"
            )));
        }
        Ok(r.sqrt())
    }

    fn leg(&self, u: f64, v: f64, t: f64, grad_t: [f64; 2]) -> Mat2 {
        let r = self.rot(t);
        let d = self.rate(u, v, t);
        [
            [r[0][0] + d[0] * grad_t[0], r[0][1] + d[0] * grad_t[1]],
            [r[1][0] + d[1] * grad_t[0], r[1][1] + d[1] * grad_t[1]],
        ]
    }

    fn reflection(&self, u: f64, v: f64, q: f64) -> Mat2 {
        let m = self.m;
        let (sb, cb) = m.beta.sin_cos();
        let w = m.omega;
        let l = m.lambda;
        [
            [1.0, 0.0],
            [
                -sb * (w * w * (u - m.u1s) - u * l * l * self.t2) / q,
                cb - v * sb / q,
            ],
        ]
    }
}

/// Factors at section point `(u10, v10)` with leg times `tf`, `tg`, `th`.
fn factors(
    m: &WedgeModel,
    u10: f64,
    v10: f64,
    h: f64,
    tf: f64,
    tg: f64,
    th: f64,
) -> Result<LegFactors> {
    let w = m.omega;
    let l = m.lambda;
    let tt = m.half_tan();
    let legs = Legs { m, h, t2: tt * tt };
    let (sb, cb) = m.beta.sin_cos();

    // section -> upper wall
    let r0 = 2.0 * h - v10 * v10 - w * w * (u10 - m.u1s).powi(2);
    if !(r0 > 0.0) {
        return Err(Error::SingularLinearization(format!(
            "section speed radicand {r0:e}"
        )));
    }
    let sq0 = r0.sqrt();
    let (s, c) = (w * tf).sin_cos();
    let (sh, ch) = ((l * tf).sinh(), (l * tf).cosh());
    let den = guard(
        tt * (-(u10 - m.u1s) * w * s + v10 * c) - ch * sq0,
        "section-to-wall denominator",
    )?;
    let dtu = (-w * w * sh * (u10 - m.u1s) / (l * sq0) - tt * c) / den;
    let dtv = (-v10 * sh / (l * sq0) - tt * s / w) / den;
    let df = legs.leg(u10, v10, tf, [dtu, dtv]);

    // reflection at the upper wall
    let (fu, fv) = legs.advance(u10, v10, tf);
    let q = legs.wall_speed(fu, fv)?;
    let dr_up = legs.reflection(fu, fv, q);
    let (fhu, fhv) = (fu, fv * cb + sb * q);

    // upper wall -> lower wall
    let (s, c) = (w * tg).sin_cos();
    let (sh, ch) = ((l * tg).sinh(), (l * tg).cosh());
    let q = legs.wall_speed(fhu, fhv)?;
    let dd = guard(
        -tt * (fhv * c - w * (fhu - m.u1s) * s) - fhu * l * tt * sh + ch * q,
        "wall-to-wall denominator",
    )?;
    let dtu =
        (tt * ch + sh * (w * w * (fhu - m.u1s) - fhu * l * l * tt * tt) / (l * q) + tt * c) / dd;
    let dtv = (fhv * sh / (l * q) + tt * s / w) / dd;
    let dg = legs.leg(fhu, fhv, tg, [dtu, dtv]);

    // reflection at the lower wall
    let (gu, gv) = legs.advance(fhu, fhv, tg);
    let q = legs.wall_speed(gu, gv)?;
    let dr_low = legs.reflection(gu, gv, q);
    let (ghu, ghv) = (gu, gv * cb + sb * q);

    // lower wall -> section
    let (sh, ch) = ((l * th).sinh(), (l * th).cosh());
    let q = legs.wall_speed(ghu, ghv)?;
    let dd = guard(ch * q - ghu * l * tt * sh, "wall-to-section denominator")?;
    let dtu = (tt * ch + sh * (w * w * (ghu - m.u1s) - ghu * l * l * tt * tt) / (l * q)) / dd;
    let dtv = (ghv * sh / (l * q)) / dd;
    let dh = legs.leg(ghu, ghv, th, [dtu, dtv]);

    Ok(LegFactors {
        df,
        dr_up,
        dg,
        dr_low,
        dh,
    })
}

/// Factors at the orbit point. The wall-to-wall leg of the symmetric orbit
/// lasts `2 t_c`: back to the section in `t_c`, then `t_c` to the lower wall.
pub(crate) fn orbit_factors(
    m: &WedgeModel,
    u10: f64,
    v10: f64,
    h: f64,
    t_c: f64,
) -> Result<LegFactors> {
    super::impact::require_symmetric_hard(m)?;
    factors(m, u10, v10, h, t_c, 2.0 * t_c, t_c)
}

pub(crate) fn linearized_map(m: &WedgeModel, u10: f64, v10: f64, h: f64, t_c: f64) -> Result<Mat2> {
    Ok(orbit_factors(m, u10, v10, h, t_c)?.product())
}

pub fn leg_factors(model: &WedgeModel, orbit: &PeriodicOrbit) -> Result<LegFactors> {
    if orbit.epsilon != 0.0 {
        return Err(Error::domain(
            "the analytic map applies to impact orbits (epsilon = 0)",
        ));
    }
    orbit_factors(&model.with_epsilon(0.0), orbit.u10, 0.0, orbit.h, orbit.t_c)
}

/// Analytic monodromy of the impact return map at `orbit`.
pub fn linearized_return_map_impact(model: &WedgeModel, orbit: &PeriodicOrbit) -> Result<Mat2> {
    Ok(leg_factors(model, orbit)?.product())
}
