//! Period-2 orbits of the hard-wall flow by right-angle shooting, and the
//! numerically iterated impact return map on the section `u2 = 0`.

use serde::{Deserialize, Serialize};

use super::{analytic, PeriodicOrbit};
use crate::error::{Error, Result};
use crate::impact::{collide, flow4, next_hit, ImpactSettings, Reflection, Z4};
use crate::model::{Wall, WedgeModel};
use crate::roots::illinois;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShootingSettings {
    /// Energy bound fixing the `v20` scan range `(0, sqrt(2 h_max)]`.
    pub h_max: f64,
    pub scan_points: usize,
    /// Required tangential momentum at the hit.
    pub tol: f64,
    /// Maximum closure error after one period.
    pub closure_tol: f64,
}

impl Default for ShootingSettings {
    fn default() -> Self {
        ShootingSettings {
            h_max: 200.0,
            scan_points: 200,
            tol: 1e-11,
            closure_tol: 1e-8,
        }
    }
}

const HORIZON: f64 = 50.0;

pub(crate) fn require_symmetric_hard(m: &WedgeModel) -> Result<()> {
    if m.dim() != 2 || m.u2s != 0.0 {
        return Err(Error::domain(
            "period-2 shooting needs the symmetric planar model (u2s = 0)",
        ));
    }
    Ok(())
}

/// Tangential momentum at the first collision and its time, if the first
/// wall hit is the upper wall.
fn right_angle_residual(m: &WedgeModel, u10: f64, v20: f64) -> Option<(f64, f64)> {
    let z = [u10, 0.0, 0.0, v20];
    let (t, wall) = next_hit(m, z, HORIZON, None, &ImpactSettings::default())?;
    if wall != Wall::Upper {
        return None;
    }
    let zc = flow4(m, z, t);
    let d = m.wall_direction(Wall::Upper);
    Some((zc[2] * d[0] + zc[3] * d[1], t))
}

pub fn find_period2_impact(model: &WedgeModel, u10: f64) -> Result<PeriodicOrbit> {
    find_period2_impact_with(model, u10, &ShootingSettings::default())
}

/// Shoots for `v20` so that the orbit from `(u10, 0, 0, v20)` hits the
/// upper wall at a right angle. Among several roots the one with the
/// smallest collision time is returned.
pub fn find_period2_impact_with(
    model: &WedgeModel,
    u10: f64,
    s: &ShootingSettings,
) -> Result<PeriodicOrbit> {
    let m = model.with_epsilon(0.0);
    require_symmetric_hard(&m)?;
    if !(u10 > m.u1s) || !u10.is_finite() {
        return Err(Error::domain(format!(
            "u10 = {u10} must exceed u1s = {}",
            m.u1s
        )));
    }
    if s.scan_points < 2 || !(s.h_max > 0.0) {
        return Err(Error::domain("invalid shooting settings"));
    }
    let vmax = (2.0 * s.h_max).sqrt();
    let grid: Vec<(f64, Option<(f64, f64)>)> = (1..=s.scan_points)
        .map(|k| {
            let v = vmax * k as f64 / s.scan_points as f64;
            (v, right_angle_residual(&m, u10, v))
        })
        .collect();

    let mut best: Option<(f64, f64)> = None;
    for w in grid.windows(2) {
        let ((va, Some((fa, _))), (vb, Some((fb, _)))) = (w[0], w[1]) else {
            continue;
        };
        if (fa > 0.0) == (fb > 0.0) && fa != 0.0 {
            continue;
        }
        let root = illinois(
            |v| {
                right_angle_residual(&m, u10, v)
                    .map(|r| r.0)
                    .ok_or_else(|| Error::NoRoot("lost upper-wall hit".into()))
            },
            va,
            vb,
            fa,
            fb,
            1e-15,
            s.tol,
        );
        let Ok((v, fv)) = root else { continue };
        if fv.abs() > s.tol {
            continue;
        }
        if let Some((_, tc)) = right_angle_residual(&m, u10, v) {
            if best.is_none_or(|(_, tb)| tc < tb) {
                best = Some((v, tc));
            }
        }
    }
    let Some((v20, t_c)) = best else {
        return Err(Error::NoRoot(format!(
            "no right-angle period-2 orbit for u10 = {u10} with v20 up to {vmax}"
        )));
    };

    let h = 0.5 * v20 * v20 + m.background_value(&[u10, 0.0]);
    let (u1r, v1r, _) = impact_return_map(&m, u10, 0.0, h)?;
    let closure = (u1r - u10).hypot(v1r);
    if !(closure <= s.closure_tol) {
        return Err(Error::NoRoot(format!(
            "orbit at u10 = {u10} does not close (error {closure:e})"
        )));
    }
    let mono = analytic::linearized_map(&m, u10, 0.0, h, t_c)?;
    PeriodicOrbit::assemble(0.0, u10, v20, h, t_c, mono)
}

/// First time in `(t_min, t_max)` at which the closed-form flow from `z`
/// crosses `u2 = 0` upwards.
fn section_time(m: &WedgeModel, z: Z4, t_min: f64, t_max: f64) -> Option<f64> {
    let l = m.lambda;
    let y0 = z[1] - m.u2s;
    let a = 0.5 * (y0 + z[3] / l);
    let b = 0.5 * (y0 - z[3] / l);
    // u2s + a x + b / x = 0 with x = exp(l t)
    let c = m.u2s;
    let mut xs = Vec::with_capacity(2);
    if a.abs() < 1e-300 {
        if c != 0.0 {
            xs.push(-b / c);
        }
    } else {
        let disc = c * c - 4.0 * a * b;
        if disc >= 0.0 {
            let sgn = if c >= 0.0 { 1.0 } else { -1.0 };
            let qq = -0.5 * (c + sgn * disc.sqrt());
            if qq != 0.0 {
                xs.push(qq / a);
                xs.push(b / qq);
            }
        }
    }
    let mut best: Option<f64> = None;
    for x in xs {
        if !(x > 0.0) {
            continue;
        }
        let mut t = x.ln() / l;
        // Newton polish on u2(t)
        for _ in 0..2 {
            let zt = flow4(m, z, t);
            if zt[3] == 0.0 {
                break;
            }
            t -= zt[1] / zt[3];
        }
        if !(t > t_min && t < t_max) {
            continue;
        }
        if flow4(m, z, t)[3] <= 0.0 {
            continue;
        }
        if best.is_none_or(|tb| t < tb) {
            best = Some(t);
        }
    }
    best
}

/// One iterate of the impact return map on `u2 = 0, v2 > 0` at energy `h`:
/// `(u1, v1) -> (u1', v1')` together with the return time.
pub fn impact_return_map(model: &WedgeModel, u1: f64, v1: f64, h: f64) -> Result<(f64, f64, f64)> {
    let m = model.with_epsilon(0.0);
    require_symmetric_hard(&m)?;
    let v2 = m.v20_from_energy(h, u1, v1, 0.0)?;
    let settings = ImpactSettings::default();
    let mut z: Z4 = [u1, 0.0, v1, v2];
    let mut t = 0.0;
    let mut from = None;
    let mut t_min = 1e-9;
    for _ in 0..1000 {
        let hit = next_hit(&m, z, HORIZON, from, &settings);
        let seg_end = hit.map_or(HORIZON, |(dt, _)| dt);
        if let Some(ts) = section_time(&m, z, t_min, seg_end) {
            let zs = flow4(&m, z, ts);
            return Ok((zs[0], zs[2], t + ts));
        }
        let Some((dt, wall)) = hit else {
            return Err(Error::Timeout {
                found: 0,
                wanted: 1,
                t_max: t + HORIZON,
            });
        };
        let (ev, post) = collide(&m, z, t, dt, wall, &settings)?;
        if ev.classification == Reflection::Degenerate {
            return Err(Error::DegenerateCollision {
                t: ev.t_c,
                reason: "degenerate tangency".into(),
            });
        }
        z = post;
        t += dt;
        from = Some(wall);
        t_min = 0.0;
    }
    Err(Error::EventOverflow { limit: 1000 })
}

/// Central finite-difference Jacobian of [`impact_return_map`] at
/// `(u1, v1)`, step `1e-6` scaled by coordinate magnitude.
pub fn impact_monodromy_fd(model: &WedgeModel, u1: f64, v1: f64, h: f64) -> Result<super::Mat2> {
    let mut j = [[0.0; 2]; 2];
    let x = [u1, v1];
    for k in 0..2 {
        let step = 1e-6 * x[k].abs().max(1.0);
        let mut xp = x;
        let mut xm = x;
        xp[k] += step;
        xm[k] -= step;
        let (a0, a1, _) = impact_return_map(model, xp[0], xp[1], h)?;
        let (b0, b1, _) = impact_return_map(model, xm[0], xm[1], h)?;
        j[0][k] = (a0 - b0) / (2.0 * step);
        j[1][k] = (a1 - b1) / (2.0 * step);
    }
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::{det2, Stability};

    #[test]
    fn reference_orbit() {
        let m = WedgeModel::reference();
        let o = find_period2_impact(&m, 9.23).unwrap();
        assert!((o.v20 - 4.914266865887791).abs() < 1e-9, "{}", o.v20);
        assert!((o.t_c - 0.7376192996).abs() < 1e-9, "{}", o.t_c);
        assert!((det2(&o.monodromy) - 1.0).abs() < 1e-9);
        assert_eq!(o.stability, Stability::Elliptic);
    }

    #[test]
    fn return_map_fixed_point_and_period() {
        let m = WedgeModel::reference();
        let o = find_period2_impact(&m, 9.23).unwrap();
        let (u, v, t) = impact_return_map(&m, o.u10, 0.0, o.h).unwrap();
        assert!((u - o.u10).abs() < 1e-10 && v.abs() < 1e-10);
        assert!((t - 4.0 * o.t_c).abs() < 1e-10);
    }

    #[test]
    fn no_orbit_close_to_saddle() {
        let m = WedgeModel::reference();
        assert!(matches!(
            find_period2_impact(&m, 2.6),
            Err(Error::NoRoot(_))
        ));
        assert!(matches!(
            find_period2_impact(&m, 2.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn section_time_matches_flow() {
        let m = WedgeModel::reference();
        let z = [6.0, -0.5, 0.2, 1.0];
        let t = section_time(&m, z, 0.0, 10.0).unwrap();
        let zt = flow4(&m, z, t);
        assert!(zt[1].abs() < 1e-14 && zt[3] > 0.0);
        assert!(section_time(&m, [6.0, 0.5, 0.0, 1.0], 0.0, 10.0).is_none());
    }
}
