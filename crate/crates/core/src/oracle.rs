//! Independent low-tech cross-checks: fixed-step RK4 with the background
//! integrated alongside the connection, plain power-series arithmetic for
//! the Stenzel closed forms, and coarse grid verdicts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connections::{BundleExtension, ConnectionState};
use crate::error::{domain, Error, Result};
use crate::flows::Model;
use crate::geometry::{GeoVals, GeometryKind, GeometrySpec};
use crate::local_families::{Launcher, LocalFamily};

/// Step used on `[t0, 10]`.
pub const FINE_STEP: f64 = 1e-5;
/// Step used beyond `t = 10`.
pub const COARSE_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleMethod {
    FixedStepRK,
    SeriesExpansion,
    GridBisect,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub name: String,
    pub value: f64,
    pub method: OracleMethod,
    /// Step size or series order.
    pub resolution: f64,
    /// Difference from the main pipeline.
    pub discrepancy: f64,
}

/// Fixture record consumed by the test suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub value: f64,
    pub method: OracleMethod,
    pub tolerance: f64,
}

pub fn load_fixtures(path: &std::path::Path) -> Result<Vec<Fixture>> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

pub fn fixture<'a>(fixtures: &'a [Fixture], name: &str) -> Result<&'a Fixture> {
    fixtures
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| Error::Unknown {
            kind: "fixture",
            name: name.into(),
        })
}

// ---------------------------------------------------------------------------
// Background written from the closed forms

/// Background state carried by the oracle: `w` (type I) or `s` (Stenzel).
#[derive(Clone, Debug)]
pub struct OracleGeometry {
    kind: GeometryKind,
    u0: f64,
    u1: f64,
    scale: f64,
    swap: bool,
}

fn stenzel_dtilde(s: f64) -> f64 {
    // (sinh 6s − 6s) / (2 s³) summed termwise for small s.
    if s > 0.5 {
        return ((6.0 * s).sinh() - 6.0 * s) / (2.0 * s * s * s);
    }
    let mut term = 18.0;
    let mut sum = 0.0;
    for n in 1..60 {
        sum += term;
        let k = (2 * n + 2) as f64;
        term *= 36.0 * s * s / (k * (k + 1.0));
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

fn sinhc3(s: f64) -> f64 {
    if s == 0.0 {
        3.0
    } else {
        (3.0 * s).sinh() / s
    }
}

impl OracleGeometry {
    pub fn new(spec: &GeometrySpec) -> Result<Self> {
        spec.validate()?;
        let (u0, u1) = match spec.kind {
            GeometryKind::SmallResolution => (-1.0, 1.0),
            GeometryKind::CanonicalBundle => spec.cone_params.unwrap_or((0.0, 1.0)),
            _ => (0.0, 0.0),
        };
        Ok(OracleGeometry {
            kind: spec.kind,
            u0,
            u1,
            scale: spec.scale,
            swap: spec.swap_factors,
        })
    }

    fn g_of(&self, u1: f64) -> f64 {
        let (a, b) = (self.u0, self.u1);
        if (b - a.abs()).abs() == 0.0 {
            (u1 + 2.0 * b) / (u1 + b)
        } else {
            (u1 * u1 + b * u1 + b * b - 3.0 * a * a) / ((u1 - a) * (u1 + a))
        }
    }

    /// Derivative of the background scalar in unscaled time.
    fn scalar_rate(&self, z: f64) -> f64 {
        match self.kind {
            GeometryKind::Cone => 1.0,
            GeometryKind::Smoothing => {
                let k1 = (2.0f64 / 3.0).cbrt();
                1.0 / (k1 * sinhc3(z) / stenzel_dtilde(z).cbrt())
            }
            _ => self.g_of(self.u1 + z * z).sqrt(),
        }
    }

    fn vals_unscaled(&self, t: f64, z: f64) -> GeoVals<f64> {
        let k1 = (2.0f64 / 3.0).cbrt();
        let k2 = k1 * k1;
        match self.kind {
            GeometryKind::Cone => GeoVals {
                lambda: t,
                mu: t * t,
                u0: 0.0,
                u1: t * t,
                v0: 0.0,
                v3: t * t,
            },
            GeometryKind::Smoothing => {
                let d13 = stenzel_dtilde(z).cbrt();
                let mu = k2 * z * d13;
                let sh = sinhc3(z);
                GeoVals {
                    lambda: k1 * sh / d13,
                    mu,
                    u0: 0.0,
                    u1: mu,
                    v0: -k2 * d13 / sh,
                    v3: k2 * d13 * (3.0 * z).cosh() / sh,
                }
            }
            _ => {
                let u1 = self.u1 + z * z;
                let lambda = z * self.g_of(u1).sqrt();
                let mu = ((u1 - self.u0) * (u1 + self.u0)).sqrt();
                GeoVals {
                    lambda,
                    mu,
                    u0: self.u0,
                    u1,
                    v0: 0.0,
                    v3: mu,
                }
            }
        }
    }

    /// Structure functions at time `t` given the scalar `z` at `t/scale`.
    pub fn vals(&self, t: f64, z: f64) -> GeoVals<f64> {
        let c = self.scale;
        let g = self.vals_unscaled(t / c, z);
        GeoVals {
            lambda: c * g.lambda,
            mu: c * c * g.mu,
            u0: c * c * if self.swap { -g.u0 } else { g.u0 },
            u1: c * c * g.u1,
            v0: c * c * g.v0,
            v3: c * c * g.v3,
        }
    }

    /// Rate of the scalar with respect to scaled time.
    fn rate(&self, z: f64) -> f64 {
        self.scalar_rate(z) / self.scale
    }
}

// ---------------------------------------------------------------------------
// Fixed-step integration

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRun {
    pub t: f64,
    pub x: Vec<f64>,
    /// Time at which a component left `[-1e6, 1e6]` or became non-finite.
    pub escaped: Option<f64>,
    /// The stopping predicate fired.
    pub stopped: bool,
}

fn rk4_step(f: &impl Fn(f64, &[f64]) -> Vec<f64>, t: f64, y: &[f64], h: f64) -> Vec<f64> {
    let add = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(a, b)| a + s * b).collect()
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &add(y, &k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, &add(y, &k2, 0.5 * h));
    let k4 = f(t + h, &add(y, &k3, h));
    y.iter()
        .enumerate()
        .map(|(i, y)| y + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Background scalar at `t`, integrated from the singular orbit with `step`.
fn scalar_at(geo: &OracleGeometry, t: f64, step: f64) -> f64 {
    if geo.kind == GeometryKind::Cone || t <= 0.0 {
        return 0.0;
    }
    let f = |_: f64, z: &[f64]| vec![geo.scalar_rate(z[0])];
    let n = (t / step).ceil().max(1.0) as usize;
    let h = t / n as f64;
    let mut z = vec![0.0];
    for i in 0..n {
        z = rk4_step(&f, i as f64 * h, &z, h);
    }
    z[0]
}

/// Classical RK4 with `step` on `[t0, min(10, t_end)]` and `coarse` beyond,
/// carrying the background scalar in the state. `stop` is checked after
/// every step.
pub fn oracle_integrate_until(
    model: &dyn Model,
    spec: &GeometrySpec,
    t0: f64,
    x0: &[f64],
    step: f64,
    coarse: f64,
    t_end: f64,
    stop: impl Fn(f64, &[f64]) -> bool,
) -> Result<OracleRun> {
    if !(t0 > 0.0 && t_end > t0) {
        return domain("oracle needs 0 < t0 < t_end");
    }
    if !(step > 0.0 && step <= 1e-4 * (t_end - t0) && coarse >= step) {
        return domain(format!(
            "oracle step {step} must be at most 1e-4 of the interval and below the coarse step {coarse}"
        ));
    }
    if x0.len() != model.dim() {
        return domain(format!(
            "{} expects {} components",
            model.name(),
            model.dim()
        ));
    }
    let geo = OracleGeometry::new(spec)?;
    let n = model.dim();
    let z0 = scalar_at(&geo, t0 / spec.scale, step.min(t0) / spec.scale);
    let rhs = |t: f64, y: &[f64]| -> Vec<f64> {
        let g = geo.vals(t, y[n]);
        let mut d = model.eval(t, &y[..n], &g);
        d.push(if geo.kind == GeometryKind::Cone {
            0.0
        } else {
            geo.rate(y[n])
        });
        d
    };
    let mut y: Vec<f64> = x0.iter().copied().chain([z0]).collect();
    let mut t = t0;
    let fine_end = 10f64.min(t_end).max(t0);
    while t < t_end {
        let h0 = if t < fine_end { step } else { coarse };
        let target = if t < fine_end { fine_end } else { t_end };
        let h = h0.min(target - t);
        y = rk4_step(&rhs, t, &y, h);
        // Snap to segment ends to avoid a trailing sliver step.
        t = if target - (t + h) < 1e-12 * target {
            target
        } else {
            t + h
        };
        if y[..n].iter().any(|v| !(v.abs() < 1e6)) {
            return Ok(OracleRun {
                t,
                x: y[..n].to_vec(),
                escaped: Some(t),
                stopped: false,
            });
        }
        if stop(t, &y[..n]) {
            return Ok(OracleRun {
                t,
                x: y[..n].to_vec(),
                escaped: None,
                stopped: true,
            });
        }
    }
    Ok(OracleRun {
        t,
        x: y[..n].to_vec(),
        escaped: None,
        stopped: false,
    })
}

/// Final state of a fixed-step integration.
pub fn oracle_integrate(
    model: &dyn Model,
    spec: &GeometrySpec,
    t0: f64,
    x0: &[f64],
    step: f64,
    t_end: f64,
) -> Result<OracleRun> {
    oracle_integrate_until(
        model,
        spec,
        t0,
        x0,
        step,
        COARSE_STEP.max(step),
        t_end,
        |_, _| false,
    )
}

/// Launch a family member with the main Taylor data and integrate it with
/// the oracle; the state is returned in the physical frame.
pub fn oracle_family(
    family: &LocalFamily,
    spec: &GeometrySpec,
    t0: f64,
    order: usize,
    step: f64,
    t_end: f64,
    stop: impl Fn(&ConnectionState) -> bool,
) -> Result<(OracleRun, ConnectionState)> {
    let launcher = Launcher::for_family(family, spec)?;
    let launch = launcher.launch(family, t0, order)?;
    let model = launcher.model(family);
    let frame = launcher.geometry.spec().clone();
    let flip = launcher.flip;
    let phys = |t: f64, x: &[f64]| {
        let s = model.to_state(t, x);
        if flip {
            s.metric_flip()
        } else {
            s
        }
    };
    let run = oracle_integrate_until(
        model.as_ref(),
        &frame,
        launch.t0,
        &launch.x0,
        step,
        COARSE_STEP.max(step),
        t_end,
        |t, x| stop(&phys(t, x)),
    )?;
    let s = phys(run.t, &run.x);
    Ok((run, s))
}

// ---------------------------------------------------------------------------
// Grid verdicts

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleVerdict {
    Canonical,
    Flat1,
    Flat2,
    Unbounded,
    Undetermined,
}

/// Coarse tolerance on the terminal distance at `t_end`.
pub const GRID_TOL: f64 = 1e-2;

fn terminal_verdict(run: &OracleRun, s: &ConnectionState) -> OracleVerdict {
    if run.escaped.is_some() {
        return OracleVerdict::Unbounded;
    }
    let m1 = s.a1.abs();
    let m2 = s.a2.abs();
    let d = [
        s.a0.abs().max(m1).max(m2),
        (s.a0 - 1.0).abs().max((m1 - 1.0).abs()).max(m2),
        (s.a0 + 1.0).abs().max(m1).max((m2 - 1.0).abs()),
    ];
    match d.iter().position(|&d| d < GRID_TOL) {
        Some(0) => OracleVerdict::Canonical,
        Some(1) => OracleVerdict::Flat1,
        Some(_) => OracleVerdict::Flat2,
        None => OracleVerdict::Undetermined,
    }
}

/// Instanton verdicts on a parameter grid from terminal states at `t_end`.
pub fn oracle_grid_verdicts(
    extension: BundleExtension,
    spec: &GeometrySpec,
    grid: &[f64],
    step: f64,
    t_end: f64,
) -> Result<Vec<(f64, OracleVerdict)>> {
    grid.par_iter()
        .map(|&p| {
            let f = LocalFamily::instanton(extension, p);
            let (run, s) = oracle_family(
                &f,
                spec,
                crate::local_families::DEFAULT_T0,
                4,
                step,
                t_end,
                |_| false,
            )?;
            Ok((p, terminal_verdict(&run, &s)))
        })
        .collect()
}

/// Bisection on the decisive-region dichotomy with oracle integrations:
/// `(a0, a2)` entering `{−1<a0<1, 0<a2<1}` counts as canonical, entering
/// `{a0<−1, a2>1}` or escaping as unbounded.
pub fn oracle_bisect(
    extension: BundleExtension,
    spec: &GeometrySpec,
    bracket: (f64, f64),
    tol: f64,
    step: f64,
    t_end: f64,
) -> Result<(f64, f64)> {
    let side = |p: f64| -> Result<bool> {
        let f = LocalFamily::instanton(extension, p);
        let plane = |s: &ConnectionState| {
            if s.a1.abs() > s.a2.abs() {
                (-s.a0, s.a1.abs())
            } else {
                (s.a0, s.a2.abs())
            }
        };
        let (run, s) = oracle_family(
            &f,
            spec,
            crate::local_families::DEFAULT_T0,
            crate::local_families::DEFAULT_ORDER,
            step,
            t_end,
            |s| {
                let (a0, a2) = plane(s);
                (-1.0 < a0 && a0 < 1.0 && 0.0 < a2 && a2 < 1.0) || (a0 < -1.0 && a2 > 1.0)
            },
        )?;
        if run.escaped.is_some() {
            return Ok(false);
        }
        if !run.stopped {
            return Err(Error::InsufficientData(format!(
                "{extension} at {p}: no decisive region by {t_end}"
            )));
        }
        Ok(plane(&s).0 > -1.0)
    };
    let (mut lo, mut hi) = bracket;
    if !side(lo)? || side(hi)? {
        return Err(Error::Bracket(format!(
            "{extension}: {bracket:?} does not straddle the critical value"
        )));
    }
    while hi - lo >= tol {
        let mid = 0.5 * (lo + hi);
        if side(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

// ---------------------------------------------------------------------------
// Power series

/// Truncated power series as a plain coefficient vector.
pub type Coeffs = Vec<f64>;

fn mul(a: &[f64], b: &[f64], n: usize) -> Coeffs {
    (0..n)
        .map(|k| {
            (0..=k)
                .map(|i| a.get(i).unwrap_or(&0.0) * b.get(k - i).unwrap_or(&0.0))
                .sum()
        })
        .collect()
}

/// `a^p` for `a[0] > 0`.
fn powf(a: &[f64], p: f64, n: usize) -> Coeffs {
    let mut b = vec![0.0; n];
    b[0] = a[0].powf(p);
    for k in 1..n {
        let mut s = 0.0;
        for j in 1..=k {
            s += (p * j as f64 - (k - j) as f64) * a.get(j).unwrap_or(&0.0) * b[k - j];
        }
        b[k] = s / (k as f64 * a[0]);
    }
    b
}

fn scale(a: &[f64], c: f64) -> Coeffs {
    a.iter().map(|x| x * c).collect()
}

/// `f(g)` for `g[0] = 0`.
fn compose(f: &[f64], g: &[f64], n: usize) -> Coeffs {
    let mut out = vec![0.0; n];
    for c in f.iter().rev() {
        out = mul(&out, g, n);
        out[0] += c;
    }
    out
}

/// Inverse series of `f` with `f[0] = 0`, `f[1] != 0`.
fn revert(f: &[f64], n: usize) -> Coeffs {
    let mut g = vec![0.0; n];
    g[1] = 1.0 / f[1];
    for k in 2..n {
        let c = compose(f, &g, k + 1)[k];
        g[k] = -c / f[1];
    }
    g
}

/// `sinh(3s)/s` and `(sinh 6s − 6s)/(2s³)` in `s`.
fn stenzel_parts(n: usize) -> (Coeffs, Coeffs) {
    let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    let mut sh = vec![0.0; n];
    let mut dt = vec![0.0; n];
    for k in (0..n).step_by(2) {
        sh[k] = 3f64.powi(k as i32 + 1) / fact(k + 1);
        dt[k] = 6f64.powi(k as i32 + 3) / (2.0 * fact(k + 3));
    }
    (sh, dt)
}

/// Named closed-form expansions at the singular orbit:
/// `lambda_stenzel_s`, `lambda_v0_s`, `v3_stenzel_s` (in the Stenzel
/// parameter), `lambda_stenzel_t`, `mu_stenzel_t` (in time) and `lambda_cone`.
pub fn oracle_series(id: &str, order: usize) -> Result<Coeffs> {
    let n = order + 1;
    let k1 = (2.0f64 / 3.0).cbrt();
    let k2 = k1 * k1;
    let (sh, dt) = stenzel_parts(n + 2);
    let lam_s = scale(&mul(&sh, &powf(&dt, -1.0 / 3.0, n + 2), n + 2), k1);
    // v0 = −k2 D̃^(1/3) / (sinh 3s / s)
    let v0 = scale(
        &mul(&powf(&dt, 1.0 / 3.0, n + 2), &powf(&sh, -1.0, n + 2), n + 2),
        -k2,
    );
    let shift = |a: &[f64]| -> Coeffs {
        std::iter::once(0.0)
            .chain(a.iter().copied())
            .take(n)
            .collect()
    };
    let t_of_s = || -> Coeffs {
        // t(s) = ∫ λ ds
        let mut t = vec![0.0; n + 1];
        for (k, c) in lam_s.iter().enumerate().take(n) {
            t[k + 1] = c / (k + 1) as f64;
        }
        t
    };
    let out = match id {
        "lambda_stenzel_s" => lam_s[..n].to_vec(),
        "lambda_v0_s" => mul(&lam_s, &v0, n),
        "v3_stenzel_s" => {
            let mut ch = vec![0.0; n];
            let mut f = 1.0;
            for k in (0..n).step_by(2) {
                ch[k] = 3f64.powi(k as i32) / f;
                f *= ((k + 1) * (k + 2)) as f64;
            }
            scale(&mul(&v0, &ch, n), -1.0)
        }
        "lambda_stenzel_t" | "mu_stenzel_t" => {
            let s_of_t = revert(&t_of_s(), n);
            if id == "lambda_stenzel_t" {
                compose(&lam_s[..n], &s_of_t, n)
            } else {
                let mu_s: Coeffs = shift(&scale(&powf(&dt, 1.0 / 3.0, n), k2));
                compose(&mu_s, &s_of_t, n)
            }
        }
        "lambda_cone" => {
            let mut c = vec![0.0; n];
            if n > 1 {
                c[1] = 1.0;
            }
            c
        }
        _ => {
            return Err(Error::Unknown {
                kind: "series",
                name: id.into(),
            })
        }
    };
    Ok(out)
}
