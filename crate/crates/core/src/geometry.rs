//! SU(2)²-invariant Calabi-Yau backgrounds: the cone, the Stenzel smoothing,
//! the small resolution and the canonical bundle over P¹×P¹.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::ode::{dopri5, HermiteTable, OdeOptions};
use crate::series::{exp_like, Scalar, Series};

/// `(2/3)^(1/3)`.
pub fn k1() -> f64 {
    (2.0f64 / 3.0).cbrt()
}

/// `(2/3)^(2/3)`.
pub fn k2() -> f64 {
    k1() * k1()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    Cone,
    Smoothing,
    SmallResolution,
    CanonicalBundle,
}

impl std::str::FromStr for GeometryKind {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "cone" => Ok(GeometryKind::Cone),
            "smoothing" | "stenzel" => Ok(GeometryKind::Smoothing),
            "small_resolution" | "resolution" => Ok(GeometryKind::SmallResolution),
            "canonical_bundle" | "canonical" => Ok(GeometryKind::CanonicalBundle),
            _ => Err(crate::error::Error::Unknown {
                kind: "geometry",
                name: s.into(),
            }),
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub kind: GeometryKind,
    /// `(U0, U1)` for the canonical bundle.
    #[serde(default)]
    pub cone_params: Option<(f64, f64)>,
    #[serde(default = "one")]
    pub scale: f64,
    /// Exchange the two SU(2) factors (`u0 -> -u0`).
    #[serde(default)]
    pub swap_factors: bool,
}

impl GeometrySpec {
    fn of(kind: GeometryKind) -> Self {
        GeometrySpec {
            kind,
            cone_params: None,
            scale: 1.0,
            swap_factors: false,
        }
    }

    pub fn cone() -> Self {
        Self::of(GeometryKind::Cone)
    }

    pub fn smoothing() -> Self {
        Self::of(GeometryKind::Smoothing)
    }

    pub fn small_resolution() -> Self {
        Self::of(GeometryKind::SmallResolution)
    }

    pub fn canonical_bundle(u0: f64, u1: f64) -> Self {
        GeometrySpec {
            cone_params: Some((u0, u1)),
            ..Self::of(GeometryKind::CanonicalBundle)
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn swapped(mut self) -> Self {
        self.swap_factors = !self.swap_factors;
        self
    }

    pub fn is_type_one(&self) -> bool {
        self.kind != GeometryKind::Smoothing
    }

    pub fn is_type_two(&self) -> bool {
        matches!(self.kind, GeometryKind::Smoothing | GeometryKind::Cone)
    }

    /// Internal `(U0, U1)` before the factor swap.
    fn raw_params(&self) -> (f64, f64) {
        match self.kind {
            GeometryKind::SmallResolution => (-1.0, 1.0),
            GeometryKind::CanonicalBundle => self.cone_params.unwrap_or((0.0, 1.0)),
            _ => (0.0, 0.0),
        }
    }

    /// `(u0, U1)` as seen by the connection equations.
    pub fn params(&self) -> (f64, f64) {
        let (a, b) = self.raw_params();
        (if self.swap_factors { -a } else { a }, b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return domain(format!("scale must be positive, got {}", self.scale));
        }
        match self.kind {
            GeometryKind::CanonicalBundle => {
                let Some((u0, u1)) = self.cone_params else {
                    return domain("canonical bundle needs cone parameters (U0, U1)");
                };
                if !(u0.is_finite() && u1.is_finite() && u1 > u0.abs()) {
                    return domain(format!(
                        "cone parameters must satisfy U1 > |U0|, got ({u0}, {u1})"
                    ));
                }
            }
            GeometryKind::Smoothing if self.swap_factors => {
                return domain("factor swap is only defined on type I backgrounds");
            }
            _ => {
                if self.cone_params.is_some() {
                    return domain("cone parameters are only used by the canonical bundle");
                }
            }
        }
        Ok(())
    }
}

/// The six structure functions (generic over the number type).
#[derive(Clone, Debug, PartialEq)]
pub struct GeoVals<T> {
    pub lambda: T,
    pub mu: T,
    pub u0: T,
    pub u1: T,
    pub v0: T,
    pub v3: T,
}

impl<T> GeoVals<T> {
    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> GeoVals<U> {
        GeoVals {
            lambda: f(&self.lambda),
            mu: f(&self.mu),
            u0: f(&self.u0),
            u1: f(&self.u1),
            v0: f(&self.v0),
            v3: f(&self.v3),
        }
    }

    pub fn named(&self) -> [(&'static str, &T); 6] {
        [
            ("lambda", &self.lambda),
            ("mu", &self.mu),
            ("u0", &self.u0),
            ("u1", &self.u1),
            ("v0", &self.v0),
            ("v3", &self.v3),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypoSample {
    pub t: f64,
    pub lambda: f64,
    pub mu: f64,
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v3: f64,
    pub d_lambda: f64,
    pub d_mu: f64,
    pub d_u1: f64,
    pub d_v0: f64,
    pub d_v3: f64,
}

impl HypoSample {
    pub fn vals(&self) -> GeoVals<f64> {
        GeoVals {
            lambda: self.lambda,
            mu: self.mu,
            u0: self.u0,
            u1: self.u1,
            v0: self.v0,
            v3: self.v3,
        }
    }

    fn scaled(mut self, c: f64) -> Self {
        self.t *= c;
        self.lambda *= c;
        for v in [
            &mut self.mu,
            &mut self.u0,
            &mut self.u1,
            &mut self.v0,
            &mut self.v3,
        ] {
            *v *= c * c;
        }
        for v in [
            &mut self.d_mu,
            &mut self.d_u1,
            &mut self.d_v0,
            &mut self.d_v3,
        ] {
            *v *= c;
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesData {
    pub order: usize,
    pub coefficients: BTreeMap<String, Vec<f64>>,
}

impl SeriesData {
    pub fn eval(&self, name: &str, t: f64) -> Option<f64> {
        let c = self.coefficients.get(name)?;
        Some(c.iter().rev().fold(0.0, |acc, a| acc * t + a))
    }
}

/// Internal number of series terms kept per structure function.
pub const SERIES_TERMS: i32 = 40;
const HORIZON: f64 = 1e8;

/// `G(u1) = λ² / (u1 − U1)` on a type I background.
fn g_fn<T: Scalar>(u1: T, a: f64, b: f64, degenerate: bool) -> T {
    if degenerate {
        (u1.clone() + 2.0 * b) / (u1 + b)
    } else {
        let q = u1.clone() * u1.clone() + u1.clone() * b + (b * b - 3.0 * a * a);
        q / ((u1.clone() - a) * (u1 + a))
    }
}

fn g_prime(u1: f64, a: f64, b: f64, degenerate: bool) -> f64 {
    if degenerate {
        -b / (u1 + b).powi(2)
    } else {
        let q = u1 * u1 + u1 * b + b * b - 3.0 * a * a;
        let d = (u1 - a) * (u1 + a);
        ((2.0 * u1 + b) * d - q * 2.0 * u1) / (d * d)
    }
}

/// `D(s)/s³` with `D = sinh 3s cosh 3s − 3s`.
fn d_tilde(s: f64) -> f64 {
    if s < 0.3 {
        let mut sum = 0.0;
        let mut term = 6.0f64.powi(3) / 6.0; // n = 1: 6³/3!
        let mut n = 1;
        while n < 40 {
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            let k = (2 * n + 2) as f64;
            term *= 36.0 * s * s / (k * (k + 1.0));
            n += 1;
        }
        0.5 * sum
    } else {
        ((6.0 * s).sinh() - 6.0 * s) / (2.0 * s.powi(3))
    }
}

/// Stenzel structure functions and their `s`-derivatives.
#[derive(Clone, Copy, Debug)]
pub struct StenzelPoint {
    pub lambda: f64,
    pub mu: f64,
    pub v0: f64,
    pub v3: f64,
    pub ds_lambda: f64,
    pub ds_mu: f64,
    pub ds_v0: f64,
    pub ds_v3: f64,
}

pub fn stenzel_at(s: f64) -> StenzelPoint {
    let (k1, k2) = (k1(), k2());
    if s == 0.0 {
        let d13 = 18f64.cbrt();
        return StenzelPoint {
            lambda: 1.0,
            mu: 0.0,
            v0: -k2 * d13 / 3.0,
            v3: k2 * d13 / 3.0,
            ds_lambda: 0.0,
            ds_mu: 2.0,
            ds_v0: 0.0,
            ds_v3: 0.0,
        };
    }
    let sh = (3.0 * s).sinh();
    let ch = (3.0 * s).cosh();
    let dt = d_tilde(s);
    let d13 = dt.cbrt();
    let d = s.powi(3) * dt;
    let lambda = k1 * sh / (s * d13);
    let mu = k2 * s * d13;
    let v0 = -k2 * s * d13 / sh;
    let v3 = k2 * s * d13 * ch / sh;
    let ds_lambda = k1 * (3.0 * ch - 2.0 * sh.powi(3) / d) / (s * d13);
    let ds_mu = 2.0 * k2 * sh * sh / (s * s * d13 * d13);
    let ds_v0 = -k2 * (2.0 * sh / (s * s * d13 * d13) - 3.0 * ch * s * d13 / (sh * sh));
    let ds_v3 = k2 * (2.0 * sh * ch / (s * s * d13 * d13) - 3.0 * s * d13 / (sh * sh));
    StenzelPoint {
        lambda,
        mu,
        v0,
        v3,
        ds_lambda,
        ds_mu,
        ds_v0,
        ds_v3,
    }
}

#[derive(Clone, Debug)]
enum Inner {
    Cone,
    TypeOne {
        a: f64,
        b: f64,
        degenerate: bool,
        table: HermiteTable,
    },
    Stenzel {
        table: HermiteTable,
    },
}

/// An evaluable background. Immutable after construction.
#[derive(Clone, Debug)]
pub struct Geometry {
    spec: GeometrySpec,
    inner: Inner,
    /// Series of the unscaled, unswapped structure functions.
    base: GeoVals<Series>,
    t_series: f64,
}

impl Geometry {
    pub fn build(spec: &GeometrySpec) -> Result<Self> {
        Self::build_with(spec, 1e-2)
    }

    pub fn build_with(spec: &GeometrySpec, t_series: f64) -> Result<Self> {
        spec.validate()?;
        if !(t_series > 0.0) {
            return domain("t_series must be positive");
        }
        let (inner, base) = match spec.kind {
            GeometryKind::Cone => (Inner::Cone, cone_series()),
            GeometryKind::Smoothing => (
                Inner::Stenzel {
                    table: stenzel_table(),
                },
                stenzel_series(),
            ),
            GeometryKind::SmallResolution | GeometryKind::CanonicalBundle => {
                let (a, b) = spec.raw_params();
                let degenerate = (b - a.abs()).abs() == 0.0;
                let table = type_one_table(a, b, degenerate);
                (
                    Inner::TypeOne {
                        a,
                        b,
                        degenerate,
                        table,
                    },
                    type_one_series(a, b, degenerate),
                )
            }
        };
        let radius = convergence_radius(&base);
        let t_series = t_series.min(0.1 * radius) * spec.scale;
        Ok(Geometry {
            spec: spec.clone(),
            inner,
            base,
            t_series,
        })
    }

    pub fn spec(&self) -> &GeometrySpec {
        &self.spec
    }

    /// Below this time samples come from the series at `t = 0`.
    pub fn t_series(&self) -> f64 {
        self.t_series
    }

    pub fn is_type_one(&self) -> bool {
        self.spec.is_type_one()
    }

    pub fn is_type_two(&self) -> bool {
        self.spec.is_type_two()
    }

    pub fn sample(&self, t: f64) -> HypoSample {
        let c = self.spec.scale;
        let tu = t / c;
        let raw = if tu < self.t_series / c || matches!(self.inner, Inner::Cone) {
            self.sample_series(tu)
        } else {
            self.sample_closed(tu)
        };
        let mut s = raw.scaled(c);
        s.t = t;
        if self.spec.swap_factors {
            s.u0 = -s.u0;
        }
        s
    }

    fn sample_series(&self, t: f64) -> HypoSample {
        let b = &self.base;
        let e = |s: &Series| s.eval(t);
        let d = |s: &Series| s.derivative().eval(t);
        HypoSample {
            t,
            lambda: e(&b.lambda),
            mu: e(&b.mu),
            u0: e(&b.u0),
            u1: e(&b.u1),
            v0: e(&b.v0),
            v3: e(&b.v3),
            d_lambda: d(&b.lambda),
            d_mu: d(&b.mu),
            d_u1: d(&b.u1),
            d_v0: d(&b.v0),
            d_v3: d(&b.v3),
        }
    }

    /// Interpolated scalar (`w` or `s`) and its derivative from the defining
    /// ODE, extending past the cached horizon by direct integration.
    fn scalar(&self, table: &HermiteTable, t: f64, rhs: impl Fn(f64) -> f64) -> (f64, f64) {
        if let Some((v, _)) = table.eval(t) {
            return (v, rhs(v));
        }
        let (t0, y0, _, _) = table.last();
        let o = OdeOptions {
            rtol: 1e-13,
            atol: 1e-14,
            ..Default::default()
        };
        let r = dopri5(|_, y, d| d[0] = rhs(y[0]), t0, &[y0], t, &o, |_, _| None);
        let n = r.nodes.last().expect("integration produced no nodes");
        (n.y[0], n.f[0])
    }

    fn sample_closed(&self, t: f64) -> HypoSample {
        match &self.inner {
            Inner::Cone => self.sample_series(t),
            Inner::TypeOne {
                a,
                b,
                degenerate,
                table,
            } => {
                let (a, b, dg) = (*a, *b, *degenerate);
                let (w, dw) = self.scalar(table, t, |w| g_fn(b + w * w, a, b, dg).sqrt());
                let u1 = b + w * w;
                let d_u1 = 2.0 * w * dw;
                let g = g_fn(u1, a, b, dg);
                let sg = g.sqrt();
                let lambda = w * sg;
                let d_lambda = dw * (g + w * w * g_prime(u1, a, b, dg)) / sg;
                let (mu, d_mu) = if dg {
                    // One factor of μ² is w² itself.
                    let other = u1 + b;
                    let r = other.sqrt();
                    (w * r, dw * r + w * d_u1 / (2.0 * r))
                } else {
                    let mu = ((u1 - a) * (u1 + a)).sqrt();
                    (mu, u1 * d_u1 / mu)
                };
                HypoSample {
                    t,
                    lambda,
                    mu,
                    u0: a,
                    u1,
                    v0: 0.0,
                    v3: mu,
                    d_lambda,
                    d_mu,
                    d_u1,
                    d_v0: 0.0,
                    d_v3: d_mu,
                }
            }
            Inner::Stenzel { table } => {
                let (s, ds) = self.scalar(table, t, |s| 1.0 / stenzel_at(s).lambda);
                let p = stenzel_at(s);
                HypoSample {
                    t,
                    lambda: p.lambda,
                    mu: p.mu,
                    u0: 0.0,
                    u1: p.mu,
                    v0: p.v0,
                    v3: p.v3,
                    d_lambda: p.ds_lambda * ds,
                    d_mu: p.ds_mu * ds,
                    d_u1: p.ds_mu * ds,
                    d_v0: p.ds_v0 * ds,
                    d_v3: p.ds_v3 * ds,
                }
            }
        }
    }

    /// Structure functions as series in `t` with error term `O(t^prec)`.
    pub fn series(&self, prec: i32) -> Result<GeoVals<Series>> {
        if prec > SERIES_TERMS {
            return Err(crate::error::Error::Series(format!(
                "requested geometry series to t^{prec}, only t^{SERIES_TERMS} available"
            )));
        }
        let c = self.spec.scale;
        let swap = self.spec.swap_factors;
        let r = |s: &Series, p: i32| -> Series {
            // f_c(t) = c^p f(t/c)
            s.truncate(prec).rescale_arg(1.0 / c) * c.powi(p)
        };
        let b = &self.base;
        let mut u0 = r(&b.u0, 2);
        if swap {
            u0 = -u0;
        }
        Ok(GeoVals {
            lambda: r(&b.lambda, 1),
            mu: r(&b.mu, 2),
            u0,
            u1: r(&b.u1, 2),
            v0: r(&b.v0, 2),
            v3: r(&b.v3, 2),
        })
    }

    pub fn series_data(&self, order: usize) -> Result<SeriesData> {
        let g = self.series(order as i32 + 1)?;
        let coefficients = g
            .named()
            .iter()
            .map(|(n, s)| (n.to_string(), s.taylor_coeffs(order + 1)))
            .collect();
        Ok(SeriesData {
            order,
            coefficients,
        })
    }

    /// Structure functions at Stenzel parameter `s` (smoothing only), with
    /// the homothety applied.
    pub fn stenzel_vals(&self, s: f64) -> GeoVals<f64> {
        let c = self.spec.scale;
        let p = stenzel_at(s);
        GeoVals {
            lambda: c * p.lambda,
            mu: c * c * p.mu,
            u0: 0.0,
            u1: c * c * p.mu,
            v0: c * c * p.v0,
            v3: c * c * p.v3,
        }
    }

    /// Stenzel parameter at time `t` (smoothing only).
    pub fn stenzel_s(&self, t: f64) -> Option<f64> {
        match &self.inner {
            Inner::Stenzel { table } => {
                let tu = t / self.spec.scale;
                Some(self.scalar(table, tu, |s| 1.0 / stenzel_at(s).lambda).0)
            }
            _ => None,
        }
    }

    /// Max absolute residual of the evolution equations at `t`.
    pub fn hypo_residual(&self, t: f64) -> f64 {
        let h = self.sample(t);
        let mut r: f64 = 0.0;
        if self.is_type_one() {
            r = r.max((h.d_u1 - 2.0 * h.lambda).abs());
            r = r.max((h.d_lambda * h.mu + h.lambda * h.d_mu - 3.0 * h.mu).abs());
            r = r.max((h.mu * h.mu - (h.u1 * h.u1 - h.u0 * h.u0)).abs() / h.mu.max(1.0));
        }
        if self.is_type_two() {
            r = r.max((h.d_mu - 2.0 * h.lambda).abs());
            r = r.max((h.d_mu * h.lambda + h.mu * h.d_lambda - 3.0 * h.v3).abs());
            r = r.max((h.d_lambda * h.v3 + h.lambda * h.d_v3 - 3.0 * h.mu).abs());
            r = r.max((h.d_lambda * h.v0 + h.lambda * h.d_v0).abs());
        }
        r
    }

    /// Max over metric coefficients of `|coefficient / cone coefficient − 1|`.
    pub fn cone_deviation(&self, t: f64) -> f64 {
        let h = self.sample(t);
        let t2 = t * t;
        let ratios = if self.is_type_one() {
            [
                h.lambda * h.lambda / t2,
                (h.u1 - h.u0) / t2,
                (h.u1 + h.u0) / t2,
            ]
        } else {
            [
                h.lambda * h.lambda / t2,
                (h.v3 - h.v0) / t2,
                (h.v3 + h.v0) / t2,
            ]
        };
        ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn horizon(&self) -> f64 {
        HORIZON * self.spec.scale
    }
}

fn cone_series() -> GeoVals<Series> {
    let p = SERIES_TERMS;
    let t = Series::var(p);
    let t2 = Series::monomial(1.0, 2, p);
    let z = Series::constant(0.0, p);
    GeoVals {
        lambda: t,
        mu: t2.clone(),
        u0: z.clone(),
        u1: t2.clone(),
        v0: z,
        v3: t2,
    }
}

fn stenzel_series() -> GeoVals<Series> {
    let p = SERIES_TERMS;
    let n = p as usize;
    let even = |v: Vec<f64>| {
        let mut c = vec![0.0; n];
        for (i, a) in v.into_iter().enumerate() {
            if 2 * i < n {
                c[2 * i] = a;
            }
        }
        Series::taylor(c)
    };
    let s_tilde = even(exp_like(3.0, n / 2 + 1, true));
    let cosh = even(exp_like(3.0, n / 2 + 1, false));
    let sixes = exp_like(6.0, n / 2 + 2, true);
    let d_tilde = even(sixes[1..].iter().map(|a| 0.5 * a).collect());
    let (k1, k2) = (k1(), k2());
    let lam_s = s_tilde.clone() * d_tilde.powf(-1.0 / 3.0) * k1;
    let t_of_s = lam_s.clone().integral().truncate(p);
    let s_of_t = t_of_s.revert();
    let mu_s = (d_tilde.powf(1.0 / 3.0) * k2).shift(1).truncate(p);
    let base = d_tilde.powf(1.0 / 3.0) * s_tilde.recip() * k2;
    let v0_s = -base.clone();
    let v3_s = base * cosh;
    let lambda = lam_s.compose(&s_of_t);
    let mu = mu_s.compose(&s_of_t);
    let v0 = v0_s.compose(&s_of_t);
    let v3 = v3_s.compose(&s_of_t);
    GeoVals {
        lambda,
        mu: mu.clone(),
        u0: Series::constant(0.0, p),
        u1: mu,
        v0,
        v3,
    }
}

fn type_one_series(a: f64, b: f64, degenerate: bool) -> GeoVals<Series> {
    let p = SERIES_TERMS;
    let g0 = g_fn(b, a, b, degenerate);
    let mut w = Series::new(1, vec![g0.sqrt()]);
    for _ in 0..p {
        let u1 = w.clone() * w.clone() + b;
        w = g_fn(u1, a, b, degenerate).sqrt().integral().truncate(p);
    }
    let w2 = w.clone() * w.clone();
    let u1 = w2.clone() + b;
    let lambda = (w.clone() * g_fn(u1.clone(), a, b, degenerate).sqrt()).truncate(p);
    let mu = if degenerate {
        // Exactly one of u1 ∓ U0 equals w².
        let other = if a < 0.0 {
            u1.clone() - a
        } else {
            u1.clone() + a
        };
        (w2.clone() * other).sqrt()
    } else {
        ((u1.clone() - a) * (u1.clone() + a)).sqrt()
    };
    let u1 = u1.truncate(p);
    let mu = mu.truncate(p);
    GeoVals {
        lambda,
        mu: mu.clone(),
        u0: Series::constant(a, p),
        u1,
        v0: Series::constant(0.0, p),
        v3: mu,
    }
}

/// Root-test estimate of the radius of convergence of the λ series.
fn convergence_radius(g: &GeoVals<Series>) -> f64 {
    let s = &g.lambda;
    let lead = s.coeff(0).abs().max(s.coeff(1).abs());
    let hi = s.prec();
    let mut r = f64::INFINITY;
    for k in (hi / 2).max(3)..hi {
        let a = s.coeff(k).abs();
        if a > 0.0 {
            r = r.min((lead / a).powf(1.0 / k as f64));
        }
    }
    r
}

fn type_one_table(a: f64, b: f64, degenerate: bool) -> HermiteTable {
    let o = OdeOptions {
        rtol: 1e-13,
        atol: 1e-14,
        ..Default::default()
    };
    let rhs = |w: f64| g_fn(b + w * w, a, b, degenerate).sqrt();
    let r = dopri5(
        |_, y, d| d[0] = rhs(y[0]),
        0.0,
        &[0.0],
        HORIZON,
        &o,
        |_, _| None,
    );
    let mut table = HermiteTable::new();
    for n in &r.nodes {
        let w = n.y[0];
        let gp = g_prime(b + w * w, a, b, degenerate);
        table.push(n.t, w, n.f[0], gp * w);
    }
    table
}

fn stenzel_table() -> HermiteTable {
    let o = OdeOptions {
        rtol: 1e-13,
        atol: 1e-14,
        ..Default::default()
    };
    let r = dopri5(
        |_, y, d| d[0] = 1.0 / stenzel_at(y[0]).lambda,
        0.0,
        &[0.0],
        HORIZON,
        &o,
        |_, _| None,
    );
    let mut table = HermiteTable::new();
    for n in &r.nodes {
        let p = stenzel_at(n.y[0]);
        table.push(n.t, n.y[0], n.f[0], -p.ds_lambda / p.lambda.powi(3));
    }
    table
}
