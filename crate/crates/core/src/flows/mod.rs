//! Selectable right-hand sides and adaptive integration of trajectories.

mod models;

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

pub use models::*;

use crate::bubbling::EhProfile;
use crate::connections::ConnectionState;
use crate::error::{domain, Error, Result};
use crate::geometry::{GeoVals, Geometry, GeometryKind};
use crate::ode::{dopri5_dense, DenseStep, OdeOptions, Stop};
use crate::series::Series;

/// Backgrounds a model may be evaluated on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Background {
    Any,
    TypeOne,
    TypeTwo,
    Smoothing,
    /// The model ignores the geometry argument.
    None,
}

pub trait Model: Send + Sync {
    fn name(&self) -> &'static str;
    fn labels(&self) -> &'static [&'static str];
    fn dim(&self) -> usize {
        self.labels().len()
    }
    fn background(&self) -> Background;
    fn params(&self) -> BTreeMap<String, f64> {
        BTreeMap::new()
    }
    /// Structure functions as seen by this model at its time `t`.
    fn geo_vals(&self, geo: &Geometry, t: f64) -> GeoVals<f64> {
        geo.sample(t).vals()
    }
    fn geo_series(&self, geo: &Geometry, prec: i32) -> Result<GeoVals<Series>> {
        geo.series(prec)
    }
    fn eval(&self, t: f64, x: &[f64], g: &GeoVals<f64>) -> Vec<f64>;
    fn eval_series(&self, t: &Series, x: &[Series], g: &GeoVals<Series>) -> Result<Vec<Series>>;
    fn to_state(&self, t: f64, x: &[f64]) -> ConnectionState;
    fn from_state(&self, s: &ConnectionState) -> Vec<f64>;

    /// Linear part of `to_state`, used to map derivatives.
    fn to_state_deriv(&self, t: f64, dx: &[f64]) -> ConnectionState {
        let a = self.to_state(t, dx).as_array();
        let b = self.to_state(t, &vec![0.0; dx.len()]).as_array();
        ConnectionState::from_array(t, std::array::from_fn(|i| a[i] - b[i]))
    }

    fn check_background(&self, geo: &Geometry) -> Result<()> {
        let ok = match self.background() {
            Background::Any | Background::None => true,
            Background::TypeOne => geo.is_type_one(),
            Background::TypeTwo => geo.is_type_two(),
            Background::Smoothing => geo.spec().kind == GeometryKind::Smoothing,
        };
        if ok {
            Ok(())
        } else {
            domain(format!(
                "model {} is not valid on {:?}",
                self.name(),
                geo.spec().kind
            ))
        }
    }

    fn selector(&self) -> ModelSelector {
        ModelSelector {
            name: self.name().to_string(),
            params: self.params(),
        }
    }
}

/// Serializable model choice: a registry name plus numeric parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSelector {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl ModelSelector {
    pub fn new(name: &str) -> Self {
        ModelSelector {
            name: name.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

pub type ModelCtor = fn(&BTreeMap<String, f64>) -> Result<Box<dyn Model>>;

/// Name-keyed table of model constructors.
pub struct Registry {
    entries: BTreeMap<&'static str, ModelCtor>,
}

fn param(p: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    p.get(key)
        .copied()
        .ok_or_else(|| Error::Domain(format!("missing model parameter `{key}`")))
}

fn positive(p: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    let v = param(p, key)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        domain(format!("model parameter `{key}` must be positive, got {v}"))
    }
}

/// Shared Eguchi-Hanson radial profile.
pub fn eh_profile() -> Arc<EhProfile> {
    static PROFILE: OnceLock<Arc<EhProfile>> = OnceLock::new();
    PROFILE.get_or_init(|| Arc::new(EhProfile::new())).clone()
}

impl Registry {
    pub fn empty() -> Self {
        Registry {
            entries: BTreeMap::new(),
        }
    }

    pub fn standard() -> Self {
        let mut r = Registry::empty();
        r.register("full_monopole", |_| Ok(Box::new(FullMonopole)));
        r.register("full_monopole_pregauge", |_| {
            Ok(Box::new(FullMonopolePreGauge))
        });
        r.register("cone_system", |_| Ok(Box::new(ConeSystem)));
        r.register("smoothing_instanton", |_| Ok(Box::new(SmoothingInstanton)));
        r.register("smoothing_instanton_s", |_| {
            Ok(Box::new(SmoothingInstantonS))
        });
        r.register("type1_instanton", |_| Ok(Box::new(TypeIInstanton)));
        r.register("type1_monopole", |_| Ok(Box::new(TypeIMonopole)));
        r.register("smoothing_monopole", |_| Ok(Box::new(SmoothingMonopole)));
        r.register("smoothing_monopole_reduced", |_| {
            Ok(Box::new(SmoothingMonopoleReduced))
        });
        r.register("fibre_rescaled", |p| {
            Ok(Box::new(FibreRescaled {
                delta: positive(p, "delta")?,
            }))
        });
        r.register("adiabatic_rescaled", |p| {
            Ok(Box::new(AdiabaticRescaled {
                delta: positive(p, "delta")?,
            }))
        });
        r.register("flat_asd", |_| Ok(Box::new(FlatAsd)));
        r.register("eguchi_hanson_asd", |p| {
            let l = positive(p, "l")?;
            if l.fract() != 0.0 {
                return domain("Eguchi-Hanson `l` must be a positive integer");
            }
            Ok(Box::new(EguchiHansonAsd {
                l: l as i32,
                profile: eh_profile(),
            }))
        });
        r
    }

    pub fn register(&mut self, name: &'static str, ctor: ModelCtor) {
        self.entries.insert(name, ctor);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn build(&self, sel: &ModelSelector) -> Result<Box<dyn Model>> {
        let ctor = self
            .entries
            .get(sel.name.as_str())
            .ok_or_else(|| Error::Unknown {
                kind: "model",
                name: sel.name.clone(),
            })?;
        ctor(&sel.params)
    }
}

/// Build a model from the standard registry.
pub fn build_model(sel: &ModelSelector) -> Result<Box<dyn Model>> {
    Registry::standard().build(sel)
}

/// Right-hand side of `model` at `(t, x)`, checking background and dimension.
pub fn rhs(model: &dyn Model, x: &[f64], geo: &Geometry, t: f64) -> Result<Vec<f64>> {
    model.check_background(geo)?;
    if x.len() != model.dim() {
        return domain(format!(
            "{} expects {} components, got {}",
            model.name(),
            model.dim(),
            x.len()
        ));
    }
    if t <= 0.0 {
        return domain("rhs requires t > 0");
    }
    Ok(model.eval(t, x, &model.geo_vals(geo, t)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub t_max: f64,
    pub blowup_threshold: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-10,
            atol: 1e-12,
            t_max: 1e3,
            blowup_threshold: 1e6,
            max_steps: 2_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol >= 1e-14 && self.atol > 0.0) {
            return domain("integrator requires rtol >= 1e-14 and atol > 0");
        }
        if !(self.t_max > 0.0 && self.blowup_threshold > 0.0) {
            return domain("integrator requires positive t_max and blow-up threshold");
        }
        Ok(())
    }
}

pub type Predicate = dyn Fn(f64, &[f64]) -> bool + Send + Sync;

/// A named stopping predicate on `(t, x)`.
#[derive(Clone)]
pub struct Event {
    pub id: String,
    pub predicate: Arc<Predicate>,
}

impl Event {
    pub fn new(id: &str, predicate: impl Fn(f64, &[f64]) -> bool + Send + Sync + 'static) -> Self {
        Event {
            id: id.to_string(),
            predicate: Arc::new(predicate),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Terminal {
    ReachedTmax,
    BlowUp {
        t_escape: f64,
    },
    EventStop {
        id: String,
    },
    /// The step budget ran out before `t_max`.
    StepLimit {
        t: f64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    pub dx: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub model: ModelSelector,
    pub labels: Vec<String>,
    pub samples: Vec<Sample>,
    pub terminal: Terminal,
    #[serde(skip)]
    states: Vec<(ConnectionState, ConnectionState)>,
    /// Continuous extension of each accepted step, aligned with `samples[1..]`.
    #[serde(skip)]
    steps: Vec<Step>,
}

#[derive(Clone, Debug)]
struct Step {
    dense: DenseStep,
    reparam: Option<Arc<[Reparam]>>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("trajectory has at least one sample")
    }

    pub fn t_end(&self) -> f64 {
        self.last().t
    }

    pub fn t_start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn states(&self) -> Vec<ConnectionState> {
        self.states.iter().map(|s| s.0).collect()
    }

    pub fn state_derivs(&self) -> Vec<ConnectionState> {
        self.states.iter().map(|s| s.1).collect()
    }

    pub fn blew_up(&self) -> bool {
        matches!(self.terminal, Terminal::BlowUp { .. })
    }

    pub fn t_escape(&self) -> Option<f64> {
        match self.terminal {
            Terminal::BlowUp { t_escape } => Some(t_escape),
            _ => None,
        }
    }

    /// Index of the first sample at or after `t`.
    fn locate(&self, t: f64) -> usize {
        self.samples.partition_point(|s| s.t < t)
    }

    /// State between samples from the integrator's continuous extension,
    /// or cubic Hermite data when that is unavailable; `None` outside the range.
    pub fn interp(&self, t: f64) -> Option<Vec<f64>> {
        if !(t >= self.t_start() && t <= self.t_end()) {
            return None;
        }
        let i = self.locate(t);
        let b = &self.samples[i];
        if b.t == t || i == 0 {
            return Some(b.x.clone());
        }
        if self.steps.len() + 1 == self.samples.len() {
            let step = &self.steps[i - 1];
            let y = step.dense.eval(t);
            return Some(match &step.reparam {
                Some(r) => to_x(r, t, &y),
                None => y,
            });
        }
        let a = &self.samples[i - 1];
        let h = b.t - a.t;
        let s = (t - a.t) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        Some(
            (0..a.x.len())
                .map(|k| h00 * a.x[k] + h10 * h * a.dx[k] + h01 * b.x[k] + h11 * h * b.dx[k])
                .collect(),
        )
    }

    /// Samples with `lo <= t <= hi`.
    pub fn window(&self, lo: f64, hi: f64) -> &[Sample] {
        let a = self.locate(lo);
        let b = self.samples.partition_point(|s| s.t <= hi);
        &self.samples[a..b.max(a)]
    }
}

fn record(model: &dyn Model, samples: &[Sample]) -> Vec<(ConnectionState, ConnectionState)> {
    samples
        .iter()
        .map(|s| (model.to_state(s.t, &s.x), model.to_state_deriv(s.t, &s.dx)))
        .collect()
}

/// Integrate forward from `(t0, x0)` to `cfg.t_max`.
pub fn integrate(
    model: &dyn Model,
    geo: &Geometry,
    t0: f64,
    x0: &[f64],
    cfg: &IntegratorConfig,
    events: &[Event],
) -> Result<Trajectory> {
    integrate_with(model, geo, t0, x0, cfg, events, None)
}

/// Continue a trajectory that reached its previous `t_max` up to `t_max`.
pub fn extend(
    traj: &mut Trajectory,
    model: &dyn Model,
    geo: &Geometry,
    t_max: f64,
    cfg: &IntegratorConfig,
    events: &[Event],
) -> Result<()> {
    if traj.terminal != Terminal::ReachedTmax || t_max <= traj.t_end() {
        return Ok(());
    }
    let last = traj.samples.pop().expect("non-empty trajectory");
    traj.states.pop();
    let cfg = IntegratorConfig {
        t_max,
        ..cfg.clone()
    };
    run_segment(model, geo, last.t, &last.x, &cfg, events, traj, None);
    Ok(())
}

/// Componentwise change of variables `x = c + t^m y` near the singular orbit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reparam {
    pub c: f64,
    pub m: i32,
}

fn to_x(r: &[Reparam], t: f64, y: &[f64]) -> Vec<f64> {
    r.iter()
        .zip(y)
        .map(|(r, y)| r.c + t.powi(r.m) * y)
        .collect()
}

/// Integrate in the variables `y` of `reparam` up to `t_switch` and in the
/// model variables afterwards. Near the singular orbit the free parameters
/// sit in the `t^m` terms, so error control on `x` alone would let the
/// step error drift along the family.
pub fn integrate_reparametrised(
    model: &dyn Model,
    geo: &Geometry,
    t0: f64,
    x0: &[f64],
    reparam: &[Reparam],
    t_switch: f64,
    cfg: &IntegratorConfig,
    events: &[Event],
) -> Result<Trajectory> {
    if reparam.len() != model.dim() {
        return domain(format!(
            "{} expects {} reparametrised components",
            model.name(),
            model.dim()
        ));
    }
    if t_switch <= t0 {
        return integrate(model, geo, t0, x0, cfg, events);
    }
    let first = IntegratorConfig {
        t_max: t_switch.min(cfg.t_max),
        ..cfg.clone()
    };
    let mut traj = integrate_with(model, geo, t0, x0, &first, events, Some(reparam))?;
    extend(&mut traj, model, geo, cfg.t_max, cfg, events)?;
    Ok(traj)
}

fn integrate_with(
    model: &dyn Model,
    geo: &Geometry,
    t0: f64,
    x0: &[f64],
    cfg: &IntegratorConfig,
    events: &[Event],
    reparam: Option<&[Reparam]>,
) -> Result<Trajectory> {
    cfg.validate()?;
    model.check_background(geo)?;
    if x0.len() != model.dim() {
        return domain(format!(
            "{} expects {} components, got {}",
            model.name(),
            model.dim(),
            x0.len()
        ));
    }
    if !(t0 > 0.0) || t0 >= cfg.t_max {
        return domain(format!(
            "integration needs 0 < t0 < t_max, got t0={t0}, t_max={}",
            cfg.t_max
        ));
    }
    let mut traj = Trajectory {
        model: model.selector(),
        labels: model.labels().iter().map(|s| s.to_string()).collect(),
        samples: Vec::new(),
        terminal: Terminal::ReachedTmax,
        states: Vec::new(),
        steps: Vec::new(),
    };
    run_segment(model, geo, t0, x0, cfg, events, &mut traj, reparam);
    Ok(traj)
}

#[allow(clippy::too_many_arguments)]
fn run_segment(
    model: &dyn Model,
    geo: &Geometry,
    t0: f64,
    x0: &[f64],
    cfg: &IntegratorConfig,
    events: &[Event],
    traj: &mut Trajectory,
    reparam: Option<&[Reparam]>,
) {
    let opts = OdeOptions {
        rtol: cfg.rtol,
        atol: cfg.atol,
        max_steps: cfg.max_steps,
        ..OdeOptions::default()
    };
    let threshold = cfg.blowup_threshold;
    let blow = events.len();
    let ident: Vec<Reparam> = vec![Reparam { c: 0.0, m: 0 }; x0.len()];
    let r = reparam.unwrap_or(&ident);
    let y0: Vec<f64> = r
        .iter()
        .zip(x0)
        .map(|(r, x)| (x - r.c) / t0.powi(r.m))
        .collect();
    let shared: Option<Arc<[Reparam]>> = reparam.map(Arc::from);
    let mut steps = Vec::new();
    let res = dopri5_dense(
        &mut |t, y, dy| {
            let x = to_x(r, t, y);
            let f = model.eval(t, &x, &model.geo_vals(geo, t));
            for (i, r) in r.iter().enumerate() {
                dy[i] = if r.m == 0 {
                    f[i]
                } else {
                    (f[i] - r.m as f64 * t.powi(r.m - 1) * y[i]) / t.powi(r.m)
                };
            }
        },
        t0,
        &y0,
        cfg.t_max,
        &opts,
        &mut |t, y| {
            let x = to_x(r, t, y);
            if x.iter().any(|v| v.abs() > threshold) {
                return Some(blow);
            }
            events.iter().position(|e| (e.predicate)(t, &x))
        },
        &mut |d: &DenseStep| {
            steps.push(Step {
                dense: d.clone(),
                reparam: shared.clone(),
            })
        },
    );
    let samples: Vec<Sample> = res
        .nodes
        .into_iter()
        .map(|n| {
            let x = to_x(r, n.t, &n.y);
            let dx = r
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let d = n.t.powi(r.m) * n.f[i];
                    if r.m == 0 {
                        d
                    } else {
                        d + r.m as f64 * n.t.powi(r.m - 1) * n.y[i]
                    }
                })
                .collect();
            Sample { t: n.t, x, dx }
        })
        .collect();
    let t_last = samples.last().map_or(t0, |s| s.t);
    traj.terminal = match res.stop {
        Stop::Reached => Terminal::ReachedTmax,
        Stop::Event(i) if i == blow => Terminal::BlowUp { t_escape: t_last },
        Stop::Event(i) => Terminal::EventStop {
            id: events[i].id.clone(),
        },
        Stop::Underflow | Stop::NonFinite => Terminal::BlowUp { t_escape: t_last },
        Stop::MaxSteps => Terminal::StepLimit { t: t_last },
    };
    traj.states.extend(record(model, &samples));
    traj.samples.extend(samples);
    traj.steps.extend(steps);
}

/// Largest drift of the static constraint `a1 b2 − b1 a2` along a trajectory.
pub fn conserved_static(traj: &Trajectory) -> f64 {
    traj.states
        .iter()
        .map(|(s, _)| s.static_constraint().abs())
        .fold(0.0, f64::max)
}

/// Residual of `model` along an externally supplied sequence of states,
/// comparing each stored derivative with the right-hand side.
pub fn rhs_residual(model: &dyn Model, geo: &Geometry, samples: &[Sample]) -> f64 {
    samples
        .iter()
        .map(|s| {
            let f = model.eval(s.t, &s.x, &model.geo_vals(geo, s.t));
            f.iter()
                .zip(&s.dx)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}
