use serde::Serialize;

use super::{CharState, CharTrajectory};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldPoint {
    pub r: f64,
    pub rho: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSlice {
    pub t: f64,
    pub points: Vec<FieldPoint>,
    /// `∫ ρ r^(n-1) dr` over `[0, r_last]` from the reconstructed points.
    pub mass: f64,
    /// `m0` of the outermost launch radius.
    pub expected_mass: f64,
}

impl FieldSlice {
    pub fn mass_relative_error(&self) -> f64 {
        let d = (self.mass - self.expected_mass).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.expected_mass.abs().max(f64::MIN_POSITIVE)
        }
    }
}

/// State at time `t`, from an exact sample or cubic Hermite interpolation
/// between the neighbouring samples.
pub fn state_at(traj: &CharTrajectory, t: f64) -> Option<CharState> {
    if let Some(s) = traj.at(t) {
        return Some(*s);
    }
    let i = traj.samples.partition_point(|s| s.t < t);
    if i == 0 || i >= traj.samples.len() {
        return None;
    }
    let (a, b) = (traj.samples[i - 1], traj.samples[i]);
    let h = b.t - a.t;
    let s = (t - a.t) / h;
    let herm = |p0: f64, m0: f64, p1: f64, m1: f64| {
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * p0 + (s3 - 2.0 * s2 + s) * h * m0 + (-2.0 * s3 + 3.0 * s2) * p1 + (s3 - s2) * h * m1
    };
    let l = &traj.launch;
    let (xa, ga) = l.accel(a.x, a.gamma);
    let (xb, gb) = l.accel(b.x, b.gamma);
    Some(CharState {
        t,
        x: herm(a.x, a.xp, b.x, b.xp),
        xp: herm(a.xp, xa, b.xp, xb),
        gamma: herm(a.gamma, a.gammap, b.gamma, b.gammap),
        gammap: herm(a.gammap, ga, b.gammap, gb),
    })
}

/// Density and velocity at time `t` at the positions of a fan of
/// characteristics.
pub fn reconstruct(fan: &[CharTrajectory], t: f64) -> Result<FieldSlice> {
    let mut fan: Vec<&CharTrajectory> = fan.iter().collect();
    if fan.is_empty() {
        return Err(Error::Domain("empty fan".into()));
    }
    fan.sort_by(|a, b| a.r().total_cmp(&b.r()));
    let n = fan[0].launch.n;
    let mut points = Vec::with_capacity(fan.len());
    for tr in &fan {
        if let Some(e) = tr.event {
            if e.t_c <= t {
                return Err(Error::FanBroken { r: tr.r(), t_c: e.t_c });
            }
        }
        let s = state_at(tr, t).ok_or_else(|| Error::Domain(format!("trajectory from R = {} does not reach t = {t}", tr.r())))?;
        let l = &tr.launch;
        let rho = if l.rho0 == 0.0 {
            0.0
        } else {
            l.rho0 * (l.r / s.x).powi(n as i32 - 1) / s.gamma
        };
        points.push(FieldPoint { r: s.x, rho, v: s.xp });
    }
    if let Some(w) = points.windows(2).find(|w| !(w[0].r < w[1].r)) {
        return Err(Error::Domain(format!("characteristics crossed before t = {t} near r = {}", w[0].r)));
    }
    let mass = slice_mass(&points, n);
    Ok(FieldSlice {
        t,
        points,
        mass,
        expected_mass: fan[fan.len() - 1].launch.m0,
    })
}

fn slice_mass(points: &[FieldPoint], n: u32) -> f64 {
    let f: Vec<f64> = points.iter().map(|p| p.rho * p.r.powi(n as i32 - 1)).collect();
    let x: Vec<f64> = points.iter().map(|p| p.r).collect();
    // Inner core [0, x0] with the density frozen at its first value.
    let mut total = points[0].rho * x[0].powi(n as i32) / n as f64;
    let mut i = 0;
    while i + 2 < x.len() {
        // Simpson's rule on uneven spacing.
        let (h0, h1) = (x[i + 1] - x[i], x[i + 2] - x[i + 1]);
        let hs = h0 + h1;
        total += hs / 6.0 * ((2.0 - h1 / h0) * f[i] + hs * hs / (h0 * h1) * f[i + 1] + (2.0 - h0 / h1) * f[i + 2]);
        i += 2;
    }
    if i + 1 < x.len() {
        let h1 = x[i + 1] - x[i];
        if i == 0 {
            total += 0.5 * h1 * (f[0] + f[1]);
        } else {
            // Quadratic through the last three points, over the last interval.
            let h0 = x[i] - x[i - 1];
            let w_prev = -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
            let w_mid = h1 * h1 / (6.0 * h0) + 0.5 * h1;
            let w_last = (h1 * h1 / 3.0 + 0.5 * h0 * h1) / (h0 + h1);
            total += w_prev * f[i - 1] + w_mid * f[i] + w_last * f[i + 1];
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_quadratics() {
        let pts: Vec<FieldPoint> = [0.0f64, 0.1, 0.35, 0.4, 0.9, 1.0, 1.6]
            .iter()
            .map(|&r| FieldPoint { r, rho: 1.0, v: 0.0 })
            .collect();
        // n = 3, ρ = 1: ∫_0^x r^2 dr = x^3/3, with and without a leftover interval.
        for k in [6, 7] {
            let m = slice_mass(&pts[..k], 3);
            let x = pts[k - 1].r;
            assert!((m - x.powi(3) / 3.0).abs() < 1e-14, "{k}");
        }
    }
}
