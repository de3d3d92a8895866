//! Hard-wall impact flow: closed-form saddle-center motion between
//! collisions, event location, elastic reflection and reflection taxonomy.
//!
//! Only the two degree-of-freedom model is supported; with the third
//! oscillator the interior flow is no longer linear.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PhaseState, Wall, WedgeModel};

/// Planar state `[u1, u2, v1, v2]`.
pub type Z4 = [f64; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reflection {
    Regular,
    #[serde(rename = "tangent")]
    NonDegenerateTangent,
    Degenerate,
}

impl Reflection {
    pub fn name(self) -> &'static str {
        match self {
            Reflection::Regular => "regular",
            Reflection::NonDegenerateTangent => "tangent",
            Reflection::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub t_c: f64,
    pub wall: Wall,
    pub state_pre: PhaseState,
    pub state_post: PhaseState,
    pub classification: Reflection,
}

/// Knobs of the event finder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactSettings {
    /// Bracketing grid; `None` picks `min(0.05, 0.1/lambda, 0.1/omega)`.
    pub scan_dt: Option<f64>,
    /// Tangency threshold relative to `|p|`.
    pub tol_tang: f64,
    /// Collisions closer than this to the vertex abort.
    pub vertex_guard: f64,
    pub max_events: usize,
}

impl Default for ImpactSettings {
    fn default() -> Self {
        ImpactSettings {
            scan_dt: None,
            tol_tang: 1e-8,
            vertex_guard: 1e-6,
            max_events: 1_000_000,
        }
    }
}

impl ImpactSettings {
    pub(crate) fn dt(&self, m: &WedgeModel) -> f64 {
        self.scan_dt
            .unwrap_or_else(|| 0.05f64.min(0.1 / m.lambda).min(0.1 / m.omega))
    }
}

fn require_planar(m: &WedgeModel, s: &PhaseState) -> Result<()> {
    if m.dim() != 2 || s.dim() != 2 {
        return Err(Error::domain(
            "the impact flow is implemented for two degrees of freedom only",
        ));
    }
    Ok(())
}

pub(crate) fn z4(s: &PhaseState) -> Z4 {
    [s.q[0], s.q[1], s.p[0], s.p[1]]
}

pub(crate) fn state(z: Z4, t: f64) -> PhaseState {
    PhaseState {
        q: vec![z[0], z[1]],
        p: vec![z[2], z[3]],
        t,
    }
}

/// Closed-form interior flow of the quadratic saddle-center for time `t`.
pub(crate) fn flow4(m: &WedgeModel, z: Z4, t: f64) -> Z4 {
    let (w, l) = (m.omega, m.lambda);
    let x0 = z[0] - m.u1s;
    let y0 = z[1] - m.u2s;
    let (sn, cs) = (w * t).sin_cos();
    let (sh, ch) = ((l * t).sinh(), (l * t).cosh());
    [
        m.u1s + x0 * cs + z[2] / w * sn,
        m.u2s + y0 * ch + z[3] / l * sh,
        -w * x0 * sn + z[2] * cs,
        l * y0 * sh + z[3] * ch,
    ]
}

pub fn linear_flow(model: &WedgeModel, s0: &PhaseState, t: f64) -> Result<PhaseState> {
    require_planar(model, s0)?;
    Ok(state(flow4(model, z4(s0), t), s0.t + t))
}

#[cfg(test)]
pub(crate) fn energy4(m: &WedgeModel, z: Z4) -> f64 {
    0.5 * (z[2] * z[2] + z[3] * z[3]) + m.background_value(&z[..2])
}

/// Pattern of `wall` along the flow and its time derivative.
fn pattern_rate(m: &WedgeModel, z: Z4, wall: Wall) -> (f64, f64) {
    let n = m.inward_normal(wall);
    (m.pattern(&z[..2], wall), n[0] * z[2] + n[1] * z[3])
}

pub(crate) fn reflect4(m: &WedgeModel, z: Z4, wall: Wall) -> Z4 {
    let (sb, cb) = m.beta.sin_cos();
    let (v1, v2) = (z[2], z[3]);
    let (w1, w2) = match wall {
        Wall::Upper => (v1 * cb + v2 * sb, v1 * sb - v2 * cb),
        Wall::Lower => (v1 * cb - v2 * sb, -v1 * sb - v2 * cb),
    };
    [z[0], z[1], w1, w2]
}

/// Elastic reflection of the planar momentum at `wall`.
pub fn reflect(model: &WedgeModel, s: &PhaseState, wall: Wall) -> Result<PhaseState> {
    let offset = model.pattern(&s.q, wall);
    let scale = 1.0 + s.q[0].abs() + s.q[1].abs();
    if offset.abs() > 1e-8 * scale {
        return Err(Error::NotOnWall { wall, offset });
    }
    let r = reflect4(model, [s.q[0], s.q[1], s.p[0], s.p[1]], wall);
    let mut out = s.clone();
    out.p[0] = r[2];
    out.p[1] = r[3];
    Ok(out)
}

pub(crate) fn classify4(m: &WedgeModel, z: Z4, wall: Wall, tol_tang: f64) -> Reflection {
    let n = m.inward_normal(wall);
    let tg = m.wall_direction(wall);
    let py = n[0] * z[2] + n[1] * z[3];
    let px = tg[0] * z[2] + tg[1] * z[3];
    let speed = z[2].hypot(z[3]);
    if py.abs() > tol_tang * speed {
        return Reflection::Regular;
    }
    let mut g = [0.0; 2];
    m.background_into(&z[..2], &mut g);
    let uy = g[0] * n[0] + g[1] * n[1];
    // straight walls: the curvature term p_x^T Q_xx p_x vanishes
    if px.abs() > 0.0 && 0.0 > uy {
        Reflection::NonDegenerateTangent
    } else {
        Reflection::Degenerate
    }
}

pub fn classify_reflection(model: &WedgeModel, s: &PhaseState, wall: Wall) -> Reflection {
    classify4(
        model,
        [s.q[0], s.q[1], s.p[0], s.p[1]],
        wall,
        ImpactSettings::default().tol_tang,
    )
}

/// Root of the pattern in `[a, b]` given `Q(a) > 0 >= Q(b)`.
fn refine_root(m: &WedgeModel, z: Z4, wall: Wall, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if m.pattern(&flow4(m, z, mid)[..2], wall) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut t = 0.5 * (a + b);
    for _ in 0..3 {
        let (q, dq) = pattern_rate(m, flow4(m, z, t), wall);
        if dq == 0.0 {
            break;
        }
        let next = t - q / dq;
        if !(next >= a - 1e-12 && next <= b + 1e-12) {
            break;
        }
        t = next;
    }
    t
}

/// Location of the minimum of the pattern in `[a, b]` when its rate goes
/// from negative to non-negative.
fn refine_minimum(m: &WedgeModel, z: Z4, wall: Wall, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if pattern_rate(m, flow4(m, z, mid), wall).1 < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Earliest zero of `wall`'s pattern in `(0, t_max]`.
///
/// `on_wall` names the wall the state currently sits on, so its zero at
/// `t = 0` is skipped.
fn first_zero(
    m: &WedgeModel,
    z: Z4,
    wall: Wall,
    t_max: f64,
    dt: f64,
    on_wall: bool,
) -> Option<f64> {
    let n = (t_max / dt).ceil().max(1.0) as usize;
    let h = t_max / n as f64;
    let mut ra = pattern_rate(m, z, wall).1;
    let mut ta = 0.0;
    for k in 1..=n {
        let tb = if k == n { t_max } else { k as f64 * h };
        let (qb, rb) = pattern_rate(m, flow4(m, z, tb), wall);
        if qb <= 0.0 {
            let mut a = ta;
            if on_wall && k == 1 {
                // first bracket starts on the wall; move past the local maximum
                let mut lo = 0.0;
                let mut hi = tb;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if pattern_rate(m, flow4(m, z, mid), wall).1 > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                a = lo;
                if m.pattern(&flow4(m, z, a)[..2], wall) <= 0.0 {
                    return None;
                }
            }
            return Some(refine_root(m, z, wall, a, tb));
        }
        if ra < 0.0 && rb >= 0.0 {
            // a dip between samples may cross and recross the wall
            let tm = refine_minimum(m, z, wall, ta, tb);
            if m.pattern(&flow4(m, z, tm)[..2], wall) <= 0.0 {
                return Some(refine_root(m, z, wall, ta, tm));
            }
        }
        ta = tb;
        ra = rb;
    }
    None
}

/// Earliest wall hit of the planar state within `(0, t_max]`.
pub(crate) fn next_hit(
    m: &WedgeModel,
    z: Z4,
    t_max: f64,
    from_wall: Option<Wall>,
    settings: &ImpactSettings,
) -> Option<(f64, Wall)> {
    let dt = settings.dt(m);
    let mut best: Option<(f64, Wall)> = None;
    for wall in Wall::BOTH {
        if let Some(t) = first_zero(m, z, wall, t_max, dt, from_wall == Some(wall)) {
            if best.is_none_or(|(tb, _)| t < tb) {
                best = Some((t, wall));
            }
        }
    }
    best
}

/// Builds the collision record at `t` after the flow from `z`, snapping the
/// position onto the wall line.
pub(crate) fn collide(
    m: &WedgeModel,
    z: Z4,
    t0: f64,
    t: f64,
    wall: Wall,
    settings: &ImpactSettings,
) -> Result<(CollisionEvent, Z4)> {
    let mut pre = flow4(m, z, t);
    let n = m.inward_normal(wall);
    let off = m.pattern(&pre[..2], wall);
    pre[0] -= off * n[0];
    pre[1] -= off * n[1];
    if pre[0].hypot(pre[1]) < settings.vertex_guard {
        return Err(Error::DegenerateCollision {
            t: t0 + t,
            reason: "trajectory reaches the wedge vertex".into(),
        });
    }
    let class = classify4(m, pre, wall, settings.tol_tang);
    let post = reflect4(m, pre, wall);
    let ev = CollisionEvent {
        t_c: t0 + t,
        wall,
        state_pre: state(pre, t0 + t),
        state_post: state(post, t0 + t),
        classification: class,
    };
    Ok((ev, post))
}

/// First collision of an interior state within `(0, t_max]`, or `None`.
pub fn next_collision(
    model: &WedgeModel,
    s0: &PhaseState,
    t_max: f64,
) -> Result<Option<CollisionEvent>> {
    next_collision_with(model, s0, t_max, &ImpactSettings::default())
}

pub fn next_collision_with(
    model: &WedgeModel,
    s0: &PhaseState,
    t_max: f64,
    settings: &ImpactSettings,
) -> Result<Option<CollisionEvent>> {
    require_planar(model, s0)?;
    let (qu, ql) = model.patterns(&s0.q);
    if !(qu > 0.0 && ql > 0.0) {
        return Err(Error::StartOnWall);
    }
    if !(t_max > 0.0) {
        return Err(Error::domain("t_max must be positive"));
    }
    let z = z4(s0);
    match next_hit(model, z, t_max, None, settings) {
        None => Ok(None),
        Some((t, wall)) => Ok(Some(collide(model, z, s0.t, t, wall, settings)?.0)),
    }
}

/// Straight piece of an impact trajectory between two events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: PhaseState,
    pub end: PhaseState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactTrajectory {
    pub segments: Vec<Segment>,
    pub events: Vec<CollisionEvent>,
    pub samples: Option<Vec<PhaseState>>,
}

impl ImpactTrajectory {
    /// State at time `t` within the propagated interval.
    pub fn state_at(&self, model: &WedgeModel, t: f64) -> PhaseState {
        let i = self
            .segments
            .partition_point(|s| s.end.t < t)
            .min(self.segments.len() - 1);
        let seg = &self.segments[i];
        state(flow4(model, z4(&seg.start), t - seg.start.t), t)
    }

    pub fn final_state(&self) -> &PhaseState {
        &self
            .segments
            .last()
            .expect("trajectory has at least one segment")
            .end
    }
}

/// Event loop of the impact flow up to time `t_end` (absolute time
/// `s0.t + t_end`), with optional uniform samples.
pub fn propagate_impact(
    model: &WedgeModel,
    s0: &PhaseState,
    t_end: f64,
    sample_dt: f64,
) -> Result<ImpactTrajectory> {
    propagate_impact_with(model, s0, t_end, sample_dt, &ImpactSettings::default())
}

pub fn propagate_impact_with(
    model: &WedgeModel,
    s0: &PhaseState,
    t_end: f64,
    sample_dt: f64,
    settings: &ImpactSettings,
) -> Result<ImpactTrajectory> {
    require_planar(model, s0)?;
    let (qu, ql) = model.patterns(&s0.q);
    if !(qu > 0.0 && ql > 0.0) {
        return Err(Error::StartOnWall);
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::domain(
            "propagation time must be positive and finite",
        ));
    }
    let mut segments = Vec::new();
    let mut events: Vec<CollisionEvent> = Vec::new();
    let mut z = z4(s0);
    let mut t = 0.0;
    let mut from = None;
    loop {
        let remaining = t_end - t;
        match next_hit(model, z, remaining, from, settings) {
            Some((dt, wall)) if dt < remaining => {
                if events.len() >= settings.max_events {
                    return Err(Error::EventOverflow {
                        limit: settings.max_events,
                    });
                }
                let (ev, post) = collide(model, z, s0.t + t, dt, wall, settings)?;
                if ev.classification == Reflection::Degenerate {
                    return Err(Error::DegenerateCollision {
                        t: ev.t_c,
                        reason: format!("degenerate tangency at the {} wall", wall.name()),
                    });
                }
                segments.push(Segment {
                    start: state(z, s0.t + t),
                    end: ev.state_pre.clone(),
                });
                z = post;
                t += dt;
                from = Some(wall);
                events.push(ev);
            }
            _ => {
                let end = flow4(model, z, remaining);
                segments.push(Segment {
                    start: state(z, s0.t + t),
                    end: state(end, s0.t + t_end),
                });
                break;
            }
        }
    }
    let mut traj = ImpactTrajectory {
        segments,
        events,
        samples: None,
    };
    if sample_dt > 0.0 {
        let n = (t_end / sample_dt + 1e-9).floor() as usize;
        let samples = (0..=n)
            .map(|k| traj.state_at(model, s0.t + k as f64 * sample_dt))
            .collect();
        traj.samples = Some(samples);
    }
    Ok(traj)
}
