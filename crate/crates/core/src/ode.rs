//! Dormand-Prince 5(4) integrator with dense output and predicate events,
//! plus a quintic Hermite table for scalar interpolants.

#[derive(Clone, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

/// Accepted step end: time, state and right-hand side.
#[derive(Clone, Debug)]
pub struct Node {
    pub t: f64,
    pub y: Vec<f64>,
    pub f: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stop {
    Reached,
    Event(usize),
    Underflow,
    NonFinite,
    MaxSteps,
}

#[derive(Clone, Debug)]
pub struct OdeResult {
    pub nodes: Vec<Node>,
    pub stop: Stop,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Continuous extension over one accepted step.
#[derive(Clone, Debug)]
pub struct DenseStep {
    pub t: f64,
    pub h: f64,
    r: [Vec<f64>; 5],
}

impl DenseStep {
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let th = (t - self.t) / self.h;
        let th1 = 1.0 - th;
        (0..self.r[0].len())
            .map(|i| {
                let r = &self.r;
                r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])))
            })
            .collect()
    }
}

fn norm(err: &[f64], y: &[f64], y1: &[f64], o: &OdeOptions) -> f64 {
    let n = err.len() as f64;
    let s: f64 = err
        .iter()
        .zip(y.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sk = o.atol + o.rtol * a.abs().max(b.abs());
            (e / sk).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

fn initial_step<F>(f: &mut F, t: f64, y: &[f64], f0: &[f64], dir: f64, o: &OdeOptions) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let sk: Vec<f64> = y.iter().map(|v| o.atol + o.rtol * v.abs()).collect();
    let d0 = (y.iter().zip(&sk).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n as f64).sqrt();
    let d1 = (f0
        .iter()
        .zip(&sk)
        .map(|(v, s)| (v / s).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    let mut h = if d0 < 1e-10 || d1 < 1e-10 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h = h.min(o.h_max);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(v, d)| v + dir * h * d).collect();
    let mut f1 = vec![0.0; n];
    f(t + dir * h, &y1, &mut f1);
    let d2 = (f1
        .iter()
        .zip(f0)
        .zip(&sk)
        .map(|((a, b), s)| ((a - b) / s).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt()
        / h;
    let h1 = if d1.max(d2) <= 1e-15 {
        (1e-6f64).max(h * 1e-3)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h).min(h1).min(o.h_max)
}

/// Integrate `y' = f(t, y)` from `t0` to `t_end` (forward or backward).
///
/// `event` is evaluated at every accepted step end; when it returns
/// `Some(id)` the crossing is localised by bisection on the dense output and
/// integration stops there.
pub fn dopri5<F, E>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    o: &OdeOptions,
    mut event: E,
) -> OdeResult
where
    F: FnMut(f64, &[f64], &mut [f64]),
    E: FnMut(f64, &[f64]) -> Option<usize>,
{
    let mut dense = |_: &DenseStep| {};
    dopri5_dense(&mut f, t0, y0, t_end, o, &mut event, &mut dense)
}

pub fn dopri5_dense<F, E, D>(
    f: &mut F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    o: &OdeOptions,
    event: &mut E,
    on_step: &mut D,
) -> OdeResult
where
    F: FnMut(f64, &[f64], &mut [f64]),
    E: FnMut(f64, &[f64]) -> Option<usize>,
    D: FnMut(&DenseStep),
{
    let n = y0.len();
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    f(t, &y, &mut k1);
    let mut nodes = vec![Node {
        t,
        y: y.clone(),
        f: k1.clone(),
    }];
    if !k1.iter().chain(&y).all(|v| v.is_finite()) {
        return OdeResult {
            nodes,
            stop: Stop::NonFinite,
        };
    }
    if let Some(id) = event(t, &y) {
        return OdeResult {
            nodes,
            stop: Stop::Event(id),
        };
    }
    if t == t_end {
        return OdeResult {
            nodes,
            stop: Stop::Reached,
        };
    }
    let mut h = initial_step(f, t, &y, &k1, dir, o);
    let mut facold: f64 = 1e-4;
    let beta = 0.04;
    let expo1 = 0.2 - beta * 0.75;
    let safe = 0.9;
    let mut reject = false;
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    );
    let mut yt = vec![0.0; n];
    let mut y1 = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut steps = 0usize;
    loop {
        if steps >= o.max_steps {
            return OdeResult {
                nodes,
                stop: Stop::MaxSteps,
            };
        }
        let last = (t + dir * h - t_end) * dir >= 0.0;
        if last {
            h = (t_end - t).abs();
        }
        if h < 1e-14 * t.abs().max(1e-300) {
            return OdeResult {
                nodes,
                stop: Stop::Underflow,
            };
        }
        let hs = dir * h;
        for i in 0..n {
            yt[i] = y[i] + hs * A21 * k1[i];
        }
        f(t + C2 * hs, &yt, &mut k2);
        for i in 0..n {
            yt[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * hs, &yt, &mut k3);
        for i in 0..n {
            yt[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * hs, &yt, &mut k4);
        for i in 0..n {
            yt[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * hs, &yt, &mut k5);
        for i in 0..n {
            yt[i] =
                y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let tph = if last { t_end } else { t + hs };
        f(tph, &yt, &mut k6);
        for i in 0..n {
            y1[i] =
                y[i] + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(tph, &y1, &mut k7);
        steps += 1;
        for i in 0..n {
            err[i] =
                hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let e = norm(&err, &y, &y1, o);
        if !e.is_finite() {
            // Non-finite trial values: shrink hard and retry.
            h *= 0.1;
            reject = true;
            continue;
        }
        let fac11 = e.powf(expo1);
        let fac = (fac11 / facold.powf(beta)).clamp(0.2, 10.0) / safe;
        let fac = fac.clamp(0.2, 10.0);
        if e <= 1.0 {
            facold = e.max(1e-4);
            let ydiff: Vec<f64> = (0..n).map(|i| y1[i] - y[i]).collect();
            let bspl: Vec<f64> = (0..n).map(|i| hs * k1[i] - ydiff[i]).collect();
            let r4: Vec<f64> = (0..n).map(|i| ydiff[i] - hs * k7[i] - bspl[i]).collect();
            let r5: Vec<f64> = (0..n)
                .map(|i| {
                    hs * (D1 * k1[i]
                        + D3 * k3[i]
                        + D4 * k4[i]
                        + D5 * k5[i]
                        + D6 * k6[i]
                        + D7 * k7[i])
                })
                .collect();
            let ds = DenseStep {
                t,
                h: hs,
                r: [y.clone(), ydiff, bspl, r4, r5],
            };
            if !y1.iter().chain(&k7).all(|v| v.is_finite()) {
                return OdeResult {
                    nodes,
                    stop: Stop::NonFinite,
                };
            }
            if let Some(id) = event(tph, &y1) {
                let (te, ye) = localise(&ds, t, tph, id, event);
                let mut fe = vec![0.0; n];
                f(te, &ye, &mut fe);
                on_step(&ds);
                nodes.push(Node {
                    t: te,
                    y: ye,
                    f: fe,
                });
                return OdeResult {
                    nodes,
                    stop: Stop::Event(id),
                };
            }
            on_step(&ds);
            t = tph;
            y.copy_from_slice(&y1);
            k1.copy_from_slice(&k7);
            nodes.push(Node {
                t,
                y: y.clone(),
                f: k1.clone(),
            });
            if last {
                return OdeResult {
                    nodes,
                    stop: Stop::Reached,
                };
            }
            let mut hnew = h / fac;
            if reject {
                hnew = hnew.min(h);
            }
            reject = false;
            h = hnew.min(o.h_max);
        } else {
            h /= (fac11 / safe).min(5.0);
            reject = true;
        }
    }
}

/// Earliest time in `(ta, tb]` at which the event predicate fires.
fn localise<E>(ds: &DenseStep, ta: f64, tb: f64, id: usize, event: &mut E) -> (f64, Vec<f64>)
where
    E: FnMut(f64, &[f64]) -> Option<usize>,
{
    let (mut lo, mut hi) = (ta, tb);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if event(mid, &ds.eval(mid)) == Some(id) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (hi, ds.eval(hi))
}

/// Quintic Hermite interpolant through `(t, y, y', y'')` nodes.
#[derive(Clone, Debug, Default)]
pub struct HermiteTable {
    t: Vec<f64>,
    y: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl HermiteTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: f64, y: f64, d1: f64, d2: f64) {
        if let Some(&last) = self.t.last() {
            if t <= last {
                return;
            }
        }
        self.t.push(t);
        self.y.push(y);
        self.d1.push(d1);
        self.d2.push(d2);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t_min(&self) -> f64 {
        self.t[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.t.last().expect("empty table")
    }

    pub fn last(&self) -> (f64, f64, f64, f64) {
        let i = self.t.len() - 1;
        (self.t[i], self.y[i], self.d1[i], self.d2[i])
    }

    /// Value and first derivative; `None` outside the tabulated range.
    pub fn eval(&self, t: f64) -> Option<(f64, f64)> {
        let n = self.t.len();
        if n < 2 || t < self.t[0] || t > self.t[n - 1] {
            return None;
        }
        let j = self.t.partition_point(|&x| x <= t).clamp(1, n - 1);
        let i = j - 1;
        let h = self.t[j] - self.t[i];
        let u = (t - self.t[i]) / h;
        let c0 = self.y[i];
        let c1 = h * self.d1[i];
        let c2 = 0.5 * h * h * self.d2[i];
        let a = self.y[j] - (c0 + c1 + c2);
        let b = h * self.d1[j] - (c1 + 2.0 * c2);
        let c = h * h * self.d2[j] - 2.0 * c2;
        let c3 = 10.0 * a - 4.0 * b + 0.5 * c;
        let c4 = -15.0 * a + 7.0 * b - c;
        let c5 = 6.0 * a - 3.0 * b + 0.5 * c;
        let v = c0 + u * (c1 + u * (c2 + u * (c3 + u * (c4 + u * c5))));
        let dv = c1 + u * (2.0 * c2 + u * (3.0 * c3 + u * (4.0 * c4 + u * 5.0 * c5)));
        Some((v, dv / h))
    }
}

/// Classical fixed-step fourth-order Runge-Kutta step.
pub fn rk4_step<F>(f: &mut F, t: f64, y: &mut [f64], h: f64)
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    f(t, y, &mut k1);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    f(t + 0.5 * h, &tmp, &mut k2);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    f(t + 0.5 * h, &tmp, &mut k3);
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    f(t + h, &tmp, &mut k4);
    for i in 0..n {
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}
