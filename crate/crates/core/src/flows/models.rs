//! Transcriptions of the ODE systems. Each system is written once over
//! [`Scalar`] so the integrator and the singular-IVP series solver share it.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Background, Model};
use crate::bubbling::EhProfile;
use crate::connections::ConnectionState;
use crate::error::{Error, Result};
use crate::geometry::{GeoVals, Geometry};
use crate::series::{Scalar, Series};

macro_rules! scalar_model {
    () => {
        fn eval(&self, t: f64, x: &[f64], g: &GeoVals<f64>) -> Vec<f64> {
            self.f(&t, x, g)
        }
        fn eval_series(
            &self,
            t: &Series,
            x: &[Series],
            g: &GeoVals<Series>,
        ) -> Result<Vec<Series>> {
            Ok(self.f(t, x, g))
        }
    };
}

fn sq<T: Scalar>(x: &T) -> T {
    x.clone() * x.clone()
}

/// `(a0, a1, a2, φ)` on any background.
pub struct FullMonopole;

impl FullMonopole {
    fn f<T: Scalar>(&self, _t: &T, x: &[T], g: &GeoVals<T>) -> Vec<T> {
        let (a0, a1, a2, phi) = (&x[0], &x[1], &x[2], &x[3]);
        let GeoVals {
            lambda,
            mu,
            u0,
            u1,
            v0,
            v3,
        } = g;
        let mu2 = sq(mu);
        let s = sq(a1) + sq(a2);
        let c = (lambda.clone() * mu.clone()).recip() * 1.5;
        let da0 = lambda.clone() * 4.0 / mu2.clone()
            * ((s.clone() - 1.0) * u0.clone() - (a0.clone() - sq(a1) + sq(a2)) * u1.clone());
        let da1 = c.clone()
            * ((a0.clone() - 1.0) * a1.clone() * v3.clone()
                - (a0.clone() + 1.0) * a2.clone() * v0.clone())
            - (u1.clone() - u0.clone()) / mu.clone() * a2.clone() * phi.clone() * 2.0;
        let da2 = c
            * ((a0.clone() - 1.0) * a1.clone() * v0.clone()
                - (a0.clone() + 1.0) * a2.clone() * v3.clone())
            - (u1.clone() + u0.clone()) / mu.clone() * a1.clone() * phi.clone() * 2.0;
        let dphi = mu2.recip()
            * 3.0
            * ((s - 1.0) * v0.clone() - a1.clone() * a2.clone() * v3.clone() * 2.0);
        vec![da0, da1, da2, dphi]
    }
}

impl Model for FullMonopole {
    fn name(&self) -> &'static str {
        "full_monopole"
    }
    fn labels(&self) -> &'static [&'static str] {
        &["a0", "a1", "a2", "phi"]
    }
    fn background(&self) -> Background {
        Background::Any
    }
    fn to_state(&self, t: f64, x: &[f64]) -> ConnectionState {
        ConnectionState::gauge_fixed(t, x[0], x[1], x[2], x[3])
    }
    fn from_state(&self, s: &ConnectionState) -> Vec<f64> {
        vec![s.a0, s.a1, s.a2, s.phi]
    }
    scalar_model!();
}

/// `(a0, a1, a2, b1, b2, φ)` before fixing the residual gauge.
pub struct FullMonopolePreGauge;

impl FullMonopolePreGauge {
    fn f<T: Scalar>(&self, _t: &T, x: &[T], g: &GeoVals<T>) -> Vec<T> {
        let (a0, a1, a2, b1, b2, phi) = (&x[0], &x[1], &x[2], &x[3], &x[4], &x[5]);
        let GeoVals {
            lambda,
            mu,
            u0,
            u1,
            v0,
            v3,
        } = g;
        let mu2 = sq(mu);
        let s = sq(a1) + sq(b1) + sq(a2) + sq(b2);
        let c = (lambda.clone() * mu.clone()).recip() * 1.5;
        let m = (u1.clone() - u0.clone()) / mu.clone() * 2.0;
        let p = (u1.clone() + u0.clone()) / mu.clone() * 2.0;
        let da0 = lambda.clone() * 4.0 / mu2.clone()
            * ((s.clone() - 1.0) * u0.clone()
                - (a0.clone() - sq(a1) - sq(b1) + sq(a2) + sq(b2)) * u1.clone());
        let first = |x1: &T, x2: &T| {
            c.clone()
                * ((a0.clone() - 1.0) * x1.clone() * v3.clone()
                    - (a0.clone() + 1.0) * x2.clone() * v0.clone())
                - m.clone() * x2.clone() * phi.clone()
        };
        let second = |x1: &T, x2: &T| {
            c.clone()
                * ((a0.clone() - 1.0) * x1.clone() * v0.clone()
                    - (a0.clone() + 1.0) * x2.clone() * v3.clone())
                - p.clone() * x1.clone() * phi.clone()
        };
        let dphi = mu2.recip()
            * 3.0
            * ((s - 1.0) * v0.clone()
                - (a1.clone() * a2.clone() + b1.clone() * b2.clone()) * v3.clone() * 2.0);
        vec![
            da0,
            first(a1, a2),
            second(a1, a2),
            first(b1, b2),
            second(b1, b2),
            dphi,
        ]
    }
}

impl Model for FullMonopolePreGauge {
    fn name(&self) -> &'static str {
        "full_monopole_pregauge"
    }
    fn labels(&self) -> &'static [&'static str] {
        &["a0", "a1", "a2", "b1", "b2", "phi"]
    }
    fn background(&self) -> Background {
        Background::Any
    }
    fn to_state(&self, t: f64, x: &[f64]) -> ConnectionState {
        ConnectionState {
            t,
            a0: x[0],
            a1: x[1],
            a2: x[2],
            b1: x[3],
            b2: x[4],
            phi: x[5],
        }
    }
    fn from_state(&self, s: &ConnectionState) -> Vec<f64> {
        vec![s.a0, s.a1, s.a2, s.b1, s.b2, s.phi]
    }
    scalar_model!();
}

/// The system on the conifold, written with explicit powers of `t`.
pub struct ConeSystem;

impl ConeSystem {
    fn f<T: Scalar>(&self, t: &T, x: &[T], _g: &GeoVals<T>) -> Vec<T> {
        let (a0, a1, a2, phi) = (&x[0], &x[1], &x[2], &x[3]);
        let it = t.recip();
        let da0 = -(it.clone() * 4.0 * (a0.clone() - sq(a1) + sq(a2)));
        let da1 =
            it.clone() * 1.5 * (a0.clone() - 1.0) * a1.clone() - a2.clone() * phi.clone() * 2.0;
        let da2 =
            -(it.clone() * 1.5 * (a0.clone() + 1.0) * a2.clone()) - a1.clone() * phi.clone() * 2.0;
        let dphi = -(sq(&it) * 6.0 * a1.clone() * a2.clone());
        vec![da0, da1, da2, dphi]
    }
}

impl Model for ConeSystem {
    fn name(&self) -> &'static str {
        "cone_system"
    }
    fn labels(&self) -> &'static [&'static str] {
        &["a0", "a1", "a2", "phi"]
    }
    fn background(&self) -> Background {
        Background::None
    }
    fn to_state(&self, t: f64, x: &[f64]) -> ConnectionState {
        ConnectionState::gauge_fixed(t, x[0], x[1], x[2], x[3])
    }
    fn from_state(&self, s: &ConnectionState) -> Vec<f64> {
        vec![s.a0, s.a1, s.a2, s.phi]
    }
    scalar_model!();
}

fn smoothing_coeffs<T: Scalar>(g: &GeoVals<T>) -> (T, T, T) {
    let GeoVals {
        lambda, mu, v0, v3, ..
    } = g;
    let lm = (lambda.clone() * mu.clone()).recip() * 1.5;
    let f0 = lambda.clone() * 4.0 / mu.clone();
    let fp = lm.clone() * (v3.clone() + v0.clone());
    let fm = lm * (v3.clone() - v0.clone());
    (f0, fp, fm)
}

fn plus_minus_state(t: f64, a0: f64, ap: f64, am: f64, phi: f64) -> ConnectionState {
    ConnectionState::gauge_fixed(t, a0, 0.5 * (ap + am), 0.5 * (ap - am), phi)
}

/// `(a0, a₊, a₋)` on the smoothing, `a± = a1 ± a2`.
pub struct SmoothingInstanton;

impl SmoothingInstanton {
    fn f<T: Scalar>(&self, _t: &T, x: &[T], g: &GeoVals<T>) -> Vec<T> {
        let (a0, ap, am) = (&x[0], &x[1], &x[2]);
        let (f0, fp, fm) = smoothing_coeffs(g);
        vec![
            f0 * (ap.clone() * am.clone() - a0.clone()),
            fp * (a0.clone() * am.clone() - ap.clone()),
            fm * (a0.clone() * ap.clone() - am.clone()),
        ]
    }
}

impl Model for SmoothingInstanton {
    fn name(&self) -> &'static str {
        "smoothing_instanton"
    }
    fn labels(&self) -> &'static [&'static str] {
        &["a0", "ap", "am"]
    }
    fn background(&self) -> Background {
        Background::TypeTwo
    }
    fn to_state(&self, t: f64, x: &[f64]) -> ConnectionState {
        plus_minus_state(t, x[0], x[1], x[2], 0.0)
    }
    fn from_state(&self, s: &ConnectionState) -> Vec<f64> {
        vec![s.a0, s.a1 + s.a2, s.a1 - s.a2]
    }
    scalar_model!();
}

/// The smoothing instanton system with the Stenzel parameter `s` as the
/// independent variable (`d/ds = λ d/dt`).
pub struct SmoothingInstantonS;

impl SmoothingInstantonS {
    fn f<T: Scalar>(&self, t: &T, x: &[T], g: &GeoVals<T>) -> Vec<T> {
        SmoothingInstanton
            .f(t, x, g)
            .into_iter()
            .map(|d| d * g.lambda.clone())
            .collect()
    }
}

impl Model for SmoothingInstantonS {
    fn name(&self) -> &'static str {
        "smoothing_instanton_s"
    }
    fn labels(&self) -> &'static [&'static str] {
        &["a0", "ap", "am"]
    }
    fn background(&self) -> Background {
        Background::Smoothing
    }
    fn geo_vals(&self, geo: &Geometry, s: f64) -> GeoVals<f64> {
        geo.stenzel_vals(s)
    }
    fn geo_series(&self, _geo: &Geometry, _prec: i32) -> Result<GeoVals<Series>> {
        Err(Error::Series(
            "the s-parametrised system has no series launch".into(),
        ))
    }
    fn to_state(&self, s: f64, x: &[f64]) -> ConnectionState {
        plus_minus_state(s, x[0], x[1], x[2], 0.0)
    }
    fn from_state(&self, s: &ConnectionState) -> Vec<f64> {
        vec![s.a0, s.a1 + s.a2, s.a1 - s.a2]
    }
    scalar_model!();
}

/// `(a0, a2)` on type I backgrounds.
pub struct TypeIInstanton;

impl TypeIInstanton {
    fn f<T: Scalar>(&self, _t: &T, x: &[T], g: &GeoVals<T>) -> Vec<T> {
        let (a0, a2) = (&x[0], &x[1]);
        let GeoVals {
            lambda, mu, u0, u1, ..
        } = g;
        // Factored so that the flat point (−1, 1) is exactly stationary.
        let da0 = -(lambda.clone() * 4.0 / sq(mu)
            * ((sq(a2) - 1.0) * (u1.clone() - u0.clone()) + (a0.clone() + 1.0) * u1.clone()));
        let da2 = -(lambda.recip() * 1.5 * a2.clone() * (a0.clone() + 1.0));
        vec![da0, da2]
    }
}

impl Model for TypeIInstanton {
    fn name(&self) -> &'static str {
        "type1_instanton"
    }
    fn labels(&self) -> &'static [&'static str] {
        &["a0", "a2"]
    }
    fn background(&self) -> Background {
        Background::TypeOne
    }
    fn to_state(&self, t: f64, x: &[f64]) -> ConnectionState {
        ConnectionState::gauge_fixed(t, x[0], 0.0, x[1], 0.0)
    }
    fn from_state(&self, s: &ConnectionState) -> Vec<f64> {
        vec![s.a0, s.a2]
    }
    scalar_model!();
}

/// `(a0, a1, a2, φ)` on type I backgrounds.
pub struct TypeIMonopole;

impl TypeIMonopole {
    fn f<T: Scalar>(&self, _t: &T, x: &[T], g: &GeoVals<T>) -> Vec<T> {
        let (a0, a1, a2, phi) = (&x[0], &x[1], &x[2], &x[3]);
        let GeoVals {
            lambda, mu, u0, u1, ..
        } = g;
        let il = lambda.recip() * 1.5;
        let da0 = lambda.clone() * 4.0 / sq(mu)
            * ((sq(a1) + sq(a2) - 1.0) * u0.clone() - (a0.clone() - sq(a1) + sq(a2)) * u1.clone());
        let da1 = il.clone() * (a0.clone() - 1.0) * a1.clone()
            - (u1.clone() - u0.clone()) / mu.clone() * a2.clone() * phi.clone() * 2.0;
        let da2 = -(il * (a0.clone() + 1.0) * a2.clone())
            - (u1.clone() + u0.clone()) / mu.clone() * a1.clone() * phi.clone() * 2.0;
        let dphi = -(mu.recip() * 6.0 * a1.clone() * a2.clone());
        vec![da0, da1, da2, dphi]
    }
}

impl Model for TypeIMonopole {
    fn name(&self) -> &'static str {
        "type1_monopole"
    }
    fn labels(&self) -> &'static [&'static str] {
        &["a0", "a1", "a2", "phi"]
    }
    fn background(&self) -> Background {
        Background::TypeOne
    }
    fn to_state(&self, t: f64, x: &[f64]) -> ConnectionState {
        ConnectionState::gauge_fixed(t, x[0], x[1], x[2], x[3])
    }
    fn from_state(&self, s: &ConnectionState) -> Vec<f64> {
        vec![s.a0, s.a1, s.a2, s.phi]
    }
    scalar_model!();
}

/// `(a0, a₊, a₋, φ)` on the smoothing.
pub struct SmoothingMonopole;

impl SmoothingMonopole {
    fn f<T: Scalar>(&self, _t: &T, x: &[T], g: &GeoVals<T>) -> Vec<T> {
        let (a0, ap, am, phi) = (&x[0], &x[1], &x[2], &x[3]);
        let (f0, fp, fm) = smoothing_coeffs(g);
        let GeoVals { mu, v0, v3, .. } = g;
        let da0 = f0 * (ap.clone() * am.clone() - a0.clone());
        let dap = fp * (a0.clone() * am.clone() - ap.clone()) - ap.clone() * phi.clone() * 2.0;
        let dam = fm * (a0.clone() * ap.clone() - am.clone()) + am.clone() * phi.clone() * 2.0;
        let dphi = sq(mu).recip()
            * 3.0
            * (((sq(ap) + sq(am)) * 0.5 - 1.0) * v0.clone() - (sq(ap) - sq(am)) * 0.5 * v3.clone());
        vec![da0, dap, dam, dphi]
    }
}

impl Model for SmoothingMonopole {
    fn name(&self) -> &'static str {
        "smoothing_monopole"
    }
    fn labels(&self) -> &'static [&'static str] {
        &["a0", "ap", "am", "phi"]
    }
    fn background(&self) -> Background {
        Background::TypeTwo
    }
    fn to_state(&self, t: f64, x: &[f64]) -> ConnectionState {
        plus_minus_state(t, x[0], x[1], x[2], x[3])
    }
    fn from_state(&self, s: &ConnectionState) -> Vec<f64> {
        vec![s.a0, s.a1 + s.a2, s.a1 - s.a2, s.phi]
    }
    scalar_model!();
}

/// `(a₊, φ)` on the invariant plane `a0 = a₋ = 0`.
pub struct SmoothingMonopoleReduced;

impl SmoothingMonopoleReduced {
    fn f<T: Scalar>(&self, _t: &T, x: &[T], g: &GeoVals<T>) -> Vec<T> {
        let (ap, phi) = (&x[0], &x[1]);
        let (_, fp, _) = smoothing_coeffs(g);
        let GeoVals { mu, v0, v3, .. } = g;
        let dap = -(ap.clone() * (fp + phi.clone() * 2.0));
        let dphi =
            -(sq(mu).recip() * 3.0 * (sq(ap) * 0.5 * (v3.clone() - v0.clone()) + v0.clone()));
        vec![dap, dphi]
    }
}

impl Model for SmoothingMonopoleReduced {
    fn name(&self) -> &'static str {
        "smoothing_monopole_reduced"
    }
    fn labels(&self) -> &'static [&'static str] {
        &["ap", "phi"]
    }
    fn background(&self) -> Background {
        Background::TypeTwo
    }
    fn to_state(&self, t: f64, x: &[f64]) -> ConnectionState {
        plus_minus_state(t, 0.0, x[0], 0.0, x[1])
    }
    fn from_state(&self, s: &ConnectionState) -> Vec<f64> {
        vec![s.a1 + s.a2, s.phi]
    }
    scalar_model!();
}

/// Geometry at `δt` with `λ` replaced by `λ(δt)/δ`; other fields unscaled.
fn fibre_vals(geo: &Geometry, delta: f64, t: f64) -> GeoVals<f64> {
    let mut g = geo.sample(delta * t).vals();
    g.lambda /= delta;
    g
}

fn fibre_series(geo: &Geometry, delta: f64, prec: i32) -> Result<GeoVals<Series>> {
    let g = geo.series(prec)?;
    let mut r = g.map(|s| s.rescale_arg(delta));
    r.lambda = r.lambda / delta;
    Ok(r)
}

/// Type I instanton system after `t ↦ δt` on the fibre.
pub struct FibreRescaled {
    pub delta: f64,
}

impl FibreRescaled {
    fn f<T: Scalar>(&self, _t: &T, x: &[T], g: &GeoVals<T>) -> Vec<T> {
        let (a0, a2) = (&x[0], &x[1]);
        let d2 = self.delta * self.delta;
        let GeoVals { lambda, u0, u1, .. } = g;
        let den = sq(u1) - sq(u0);
        let da0 = -(lambda.clone() * (4.0 * d2) / den
            * (sq(a2) * (u1.clone() - u0.clone()) + a0.clone() * u1.clone() + u0.clone()));
        let da2 = -(lambda.recip() * 1.5 * a2.clone() * (a0.clone() + 1.0));
        vec![da0, da2]
    }
}

impl Model for FibreRescaled {
    fn name(&self) -> &'static str {
        "fibre_rescaled"
    }
    fn labels(&self) -> &'static [&'static str] {
        &["a0", "a2"]
    }
    fn background(&self) -> Background {
        Background::TypeOne
    }
    fn params(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([("delta".into(), self.delta)])
    }
    fn geo_vals(&self, geo: &Geometry, t: f64) -> GeoVals<f64> {
        fibre_vals(geo, self.delta, t)
    }
    fn geo_series(&self, geo: &Geometry, prec: i32) -> Result<GeoVals<Series>> {
        fibre_series(geo, self.delta, prec)
    }
    fn to_state(&self, t: f64, x: &[f64]) -> ConnectionState {
        ConnectionState::gauge_fixed(t, x[0], 0.0, x[1], 0.0)
    }
    fn from_state(&self, s: &ConnectionState) -> Vec<f64> {
        vec![s.a0, s.a2]
    }
    scalar_model!();
}

/// Adiabatically rescaled type I instanton system in
/// `(a0δ, a2δ) = ((1 − a0)/2, a2)(δt)`.
pub struct AdiabaticRescaled {
    pub delta: f64,
}

impl AdiabaticRescaled {
    fn f<T: Scalar>(&self, _t: &T, x: &[T], g: &GeoVals<T>) -> Vec<T> {
        let (b0, b2) = (&x[0], &x[1]);
        let d2 = self.delta * self.delta;
        let GeoVals { lambda, u0, u1, .. } = g;
        // (u1 + u0)_δ = (u1 + u0)(δt)/δ², (u1 − u0)_δ = (u1 − u0)(δt).
        let plus = (u1.clone() + u0.clone()) / d2;
        let minus = u1.clone() - u0.clone();
        let one_minus = -(b0.clone() - 1.0);
        let da0 = lambda.clone() * 2.0 / plus * (sq(b2) - b0.clone())
            + lambda.clone() * (2.0 * d2) / minus * one_minus.clone();
        let da2 = -(lambda.recip() * 3.0 * one_minus * b2.clone());
        vec![da0, da2]
    }
}

impl Model for AdiabaticRescaled {
    fn name(&self) -> &'static str {
        "adiabatic_rescaled"
    }
    fn labels(&self) -> &'static [&'static str] {
        &["a0d", "a2d"]
    }
    fn background(&self) -> Background {
        Background::TypeOne
    }
    fn params(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([("delta".into(), self.delta)])
    }
    fn geo_vals(&self, geo: &Geometry, t: f64) -> GeoVals<f64> {
        fibre_vals(geo, self.delta, t)
    }
    fn geo_series(&self, geo: &Geometry, prec: i32) -> Result<GeoVals<Series>> {
        fibre_series(geo, self.delta, prec)
    }
    fn to_state(&self, t: f64, x: &[f64]) -> ConnectionState {
        ConnectionState::gauge_fixed(t, 1.0 - 2.0 * x[0], 0.0, x[1], 0.0)
    }
    fn from_state(&self, s: &ConnectionState) -> Vec<f64> {
        vec![0.5 * (1.0 - s.a0), s.a2]
    }
    scalar_model!();
}

/// `t α̇ = −2α + 2α²` on flat ℂ².
pub struct FlatAsd;

impl FlatAsd {
    fn f<T: Scalar>(&self, t: &T, x: &[T], _g: &GeoVals<T>) -> Vec<T> {
        let a = &x[0];
        vec![t.recip() * ((sq(a) - a.clone()) * 2.0)]
    }
}

impl Model for FlatAsd {
    fn name(&self) -> &'static str {
        "flat_asd"
    }
    fn labels(&self) -> &'static [&'static str] {
        &["alpha"]
    }
    fn background(&self) -> Background {
        Background::None
    }
    fn to_state(&self, t: f64, x: &[f64]) -> ConnectionState {
        ConnectionState::gauge_fixed(t, x[0], 0.0, 0.0, 0.0)
    }
    fn from_state(&self, s: &ConnectionState) -> Vec<f64> {
        vec![s.a0]
    }
    scalar_model!();
}

/// Invariant ASD equations on the Eguchi-Hanson space in `(α0, α2)`.
pub struct EguchiHansonAsd {
    pub l: i32,
    pub profile: Arc<EhProfile>,
}

impl Model for EguchiHansonAsd {
    fn name(&self) -> &'static str {
        "eguchi_hanson_asd"
    }
    fn labels(&self) -> &'static [&'static str] {
        &["alpha0", "alpha2"]
    }
    fn background(&self) -> Background {
        Background::None
    }
    fn params(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([("l".into(), self.l as f64)])
    }
    fn eval(&self, t: f64, x: &[f64], _g: &GeoVals<f64>) -> Vec<f64> {
        let sigma = self.profile.sigma(t);
        let (f, phi2) = EhProfile::f_and_phi2(sigma);
        vec![
            2.0 * f * (x[1] * x[1] - x[0]) / phi2,
            2.0 * x[1] * (x[0] - 1.0) / f,
        ]
    }
    fn eval_series(&self, _t: &Series, _x: &[Series], _g: &GeoVals<Series>) -> Result<Vec<Series>> {
        Err(Error::Series(
            "Eguchi-Hanson system has no series form".into(),
        ))
    }
    fn to_state(&self, t: f64, x: &[f64]) -> ConnectionState {
        ConnectionState::gauge_fixed(t, x[0], 0.0, x[1], 0.0)
    }
    fn from_state(&self, s: &ConnectionState) -> Vec<f64> {
        vec![s.a0, s.a2]
    }
}
