//! Dormand–Prince 5(4) with first-same-as-last stages and event location.

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth minus fourth order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub y: [f64; N],
    pub k_last: [f64; N],
    pub err: [f64; N],
}

/// One step of size `h` from `(t, y)` with `k1 = f(t, y)`. `None` if any stage
/// is not finite.
pub fn step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> Option<Step<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut k = [[0.0; N]; 7];
    k[0] = *k1;
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        if s == 6 {
            // Stage 7 is evaluated at the fifth-order solution.
            if !ys.iter().all(|v| v.is_finite()) {
                return None;
            }
            let k7 = f(t + h, &ys);
            if !k7.iter().all(|v| v.is_finite()) {
                return None;
            }
            let mut err = [0.0; N];
            for (j, e) in E.iter().enumerate() {
                let kj = if j == 6 { &k7 } else { &k[j] };
                for i in 0..N {
                    err[i] += h * e * kj[i];
                }
            }
            return Some(Step { y: ys, k_last: k7, err });
        }
        k[s] = f(t + C[s] * h, &ys);
        if !k[s].iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    unreachable!()
}

fn error_norm<const N: usize>(y0: &[f64; N], y1: &[f64; N], err: &[f64; N], o: &Options) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        let sc = o.atol + o.rtol * y0[i].abs().max(y1[i].abs());
        s += (err[i] / sc).powi(2);
    }
    (s / N as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop<const N: usize> {
    End,
    Event {
        index: usize,
        t: f64,
        bracket: (f64, f64),
        y: [f64; N],
    },
    Underflow {
        t: f64,
        h: f64,
    },
    MaxSteps {
        t: f64,
    },
}

/// Integrate from `t0` to `t_end`, calling `record` on every accepted state
/// (including the initial one) and stopping at the first downward zero of any
/// component of `events`. Steps are shortened to land exactly on `stops`.
#[allow(clippy::too_many_arguments)]
pub fn solve<const N: usize, const M: usize, F, G, R>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    stops: &[f64],
    o: &Options,
    events: G,
    mut record: R,
) -> Stop<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: Fn(&[f64; N]) -> [f64; M],
    R: FnMut(f64, &[f64; N]),
{
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut g = events(&y);
    record(t, &y);
    let mut h = initial_step(&y, &k1, o).min(t_end - t0);
    let mut stops: Vec<f64> = stops.iter().copied().filter(|&s| s > t0 && s < t_end).collect();
    stops.sort_by(f64::total_cmp);
    let mut next_stop = 0;
    let mut rejected = false;
    for _ in 0..o.max_steps {
        if t >= t_end {
            return Stop::End;
        }
        let target = stops.get(next_stop).copied().unwrap_or(t_end);
        let mut h_try = h;
        let lands = t + h_try >= target;
        if lands {
            h_try = target - t;
        }
        if h_try <= 1e-15 * (1.0 + t.abs()) && !lands {
            return Stop::Underflow { t, h: h_try };
        }
        let accepted = step(&f, t, &y, &k1, h_try).and_then(|s| {
            let e = error_norm(&y, &s.y, &s.err, o);
            (e <= 1.0).then_some((s, e))
        });
        match accepted {
            None => {
                let shrink = step(&f, t, &y, &k1, h_try).map_or(0.25, |s| {
                    let e = error_norm(&y, &s.y, &s.err, o);
                    (0.9 * e.powf(-0.2)).clamp(0.1, 0.9)
                });
                h = h_try * shrink;
                rejected = true;
                if h <= 1e-15 * (1.0 + t.abs()) {
                    return Stop::Underflow { t, h };
                }
            }
            Some((s, e)) => {
                let t_new = if lands { target } else { t + h_try };
                let g_new = events(&s.y);
                let mut first: Option<(usize, f64, f64, f64)> = None;
                for i in 0..M {
                    if g[i] > 0.0 && !(g_new[i] > 0.0) {
                        let (lo, hi, tc) = locate(&f, t, &y, &k1, h_try, |yy| events(yy)[i]);
                        if first.is_none_or(|(_, _, _, best)| tc < best) {
                            first = Some((i, lo, hi, tc));
                        }
                    }
                }
                if let Some((index, lo, hi, tc)) = first {
                    let yc = step(&f, t, &y, &k1, tc - t).map_or(s.y, |s| s.y);
                    if tc > t {
                        record(tc, &yc);
                    }
                    return Stop::Event {
                        index,
                        t: tc,
                        bracket: (lo, hi),
                        y: yc,
                    };
                }
                t = t_new;
                y = s.y;
                k1 = s.k_last;
                g = g_new;
                record(t, &y);
                if lands && next_stop < stops.len() {
                    next_stop += 1;
                }
                let grow = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
                let grow = if rejected { grow.min(1.0) } else { grow };
                rejected = false;
                if !lands {
                    h = h_try * grow;
                }
            }
        }
    }
    Stop::MaxSteps { t }
}

fn initial_step<const N: usize>(y: &[f64; N], dy: &[f64; N], o: &Options) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for i in 0..N {
        let sc = o.atol + o.rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (dy[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.clamp(1e-10, 1.0)
}

/// Bracket the first zero of `g(y(t + s))` for `s ∈ (0, h]` by re-stepping from
/// `(t, y)`. Returns `(t_lo, t_hi, t_c)`.
fn locate<const N: usize, F, G>(f: &F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64, g: G) -> (f64, f64, f64)
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: Fn(&[f64; N]) -> f64,
{
    let eval = |s: f64| -> f64 {
        match step(f, t, y, k1, s) {
            Some(st) => {
                let v = g(&st.y);
                if v.is_nan() {
                    -1.0
                } else {
                    v
                }
            }
            None => -1.0,
        }
    };
    let (mut lo, mut hi) = (0.0, h);
    let (mut glo, mut ghi) = (g(y), eval(h));
    let mut side = 0i8;
    for it in 0..200 {
        let width = hi - lo;
        if width <= 1e-12 * (1.0 + t + hi) || width <= 4.0 * f64::EPSILON * (t + hi).abs() {
            break;
        }
        let mut s = if it % 3 == 2 || !(glo - ghi).is_finite() || glo == ghi {
            0.5 * (lo + hi)
        } else {
            lo + width * glo / (glo - ghi)
        };
        if !(s > lo && s < hi) {
            s = 0.5 * (lo + hi);
        }
        let gs = eval(s);
        if gs > 0.0 {
            lo = s;
            glo = gs;
            if side == 1 {
                ghi *= 0.5;
            }
            side = 1;
        } else {
            hi = s;
            ghi = gs;
            if side == -1 {
                glo *= 0.5;
            }
            side = -1;
        }
    }
    (t + lo, t + hi, t + 0.5 * (lo + hi))
}
