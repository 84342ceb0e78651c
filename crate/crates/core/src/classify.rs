//! Asymptotic classification of trajectories, numerical forward-invariance
//! and comparison checks, and critical-parameter search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connections::{decay_report, BundleExtension, ConnectionState};
use crate::error::{domain, Error, Result};
use crate::flows::{
    extend, integrate, Event, IntegratorConfig, Model, SmoothingInstanton, SmoothingMonopole,
    Terminal, Trajectory, TypeIInstanton, TypeIMonopole,
};
use crate::geometry::{Geometry, GeometryKind, GeometrySpec};
use crate::local_families::{FamilyRun, Launcher, LocalFamily};

pub const TOL_CONV: f64 = 1e-4;
pub const T_MAX_CAP: f64 = 1e6;
pub const FLUX_MARGIN: f64 = 1e-3;

/// Slack allowed when checking that a tail distance is non-increasing.
const TAIL_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub tol_conv: f64,
    pub t_max_cap: f64,
    /// Threshold handed to `decay_report`.
    pub decay_threshold: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            tol_conv: TOL_CONV,
            t_max_cap: T_MAX_CAP,
            decay_threshold: 1e3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Outcome {
    Canonical { mass: f64 },
    Flat1,
    Flat2,
    Unbounded { t_escape: f64 },
    Undetermined,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Canonical { .. } => "Canonical",
            Outcome::Flat1 => "Flat1",
            Outcome::Flat2 => "Flat2",
            Outcome::Unbounded { .. } => "Unbounded",
            Outcome::Undetermined => "Undetermined",
        }
    }

    pub fn is_canonical(&self) -> bool {
        matches!(self, Outcome::Canonical { .. })
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, Outcome::Flat1 | Outcome::Flat2)
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, Outcome::Unbounded { .. })
    }

    pub fn mass(&self) -> Option<f64> {
        match self {
            Outcome::Canonical { mass } => Some(*mass),
            _ => None,
        }
    }

    pub fn t_escape(&self) -> Option<f64> {
        match self {
            Outcome::Unbounded { t_escape } => Some(*t_escape),
            _ => None,
        }
    }
}

/// Distances of a gauge-normalised state to the candidate limits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distances {
    pub canonical: f64,
    pub flat1: f64,
    pub flat2: f64,
}

impl Distances {
    pub fn of(s: &ConnectionState) -> Self {
        let s = normalise_gauge(s);
        let m1 = s.a1.hypot(s.b1);
        let m2 = s.a2.hypot(s.b2);
        Distances {
            canonical: s.a0.abs().max(m1).max(m2),
            flat1: (s.a0 - 1.0).abs().max((m1 - 1.0).abs()).max(m2),
            flat2: (s.a0 + 1.0).abs().max(m1).max((m2 - 1.0).abs()),
        }
    }

    fn get(&self, k: usize) -> f64 {
        [self.canonical, self.flat1, self.flat2][k]
    }

    fn nearest(&self) -> usize {
        (0..3)
            .min_by(|&a, &b| self.get(a).total_cmp(&self.get(b)))
            .expect("three candidates")
    }
}

/// Gauge image with `a1 >= 0` under `(a0, a1, a2) ↦ (a0, −a1, −a2)`.
pub fn normalise_gauge(s: &ConnectionState) -> ConnectionState {
    if s.a1 < 0.0 || (s.a1 == 0.0 && s.a2 < 0.0) {
        ConnectionState {
            a1: -s.a1,
            a2: -s.a2,
            b1: -s.b1,
            b2: -s.b2,
            ..*s
        }
    } else {
        *s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub t_end: f64,
    pub distances: Distances,
    /// Distance to the nearest candidate is non-increasing over `[t_end/10, t_end]`.
    pub tail_monotone: bool,
    pub phi_end: f64,
    pub terminal: Terminal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryVerdict {
    pub outcome: Outcome,
    pub evidence: Evidence,
    pub decay: bool,
}

fn lerp_phi(states: &[ConnectionState], t: f64) -> f64 {
    let i = states.partition_point(|s| s.t < t);
    if i == 0 {
        return states[0].phi;
    }
    if i >= states.len() {
        return states[states.len() - 1].phi;
    }
    let (a, b) = (&states[i - 1], &states[i]);
    let w = (t - a.t) / (b.t - a.t);
    a.phi + w * (b.phi - a.phi)
}

/// Verdict for sampled physical states ending in `terminal`.
pub fn classify_states(
    states: &[ConnectionState],
    terminal: &Terminal,
    cfg: &ClassifyConfig,
) -> TrajectoryVerdict {
    let last = states.last().copied().unwrap_or_default();
    let decay = decay_report(states, cfg.decay_threshold)
        .map(|r| r.bounded)
        .unwrap_or(false);
    let distances = Distances::of(&last);
    let t_end = last.t;
    let mut tail_monotone = false;
    let outcome = match terminal {
        Terminal::BlowUp { t_escape } => Outcome::Unbounded {
            t_escape: *t_escape,
        },
        Terminal::EventStop { .. } | Terminal::StepLimit { .. } => Outcome::Undetermined,
        Terminal::ReachedTmax => {
            let k = distances.nearest();
            let tail: Vec<f64> = states
                .iter()
                .filter(|s| s.t >= t_end / 10.0)
                .map(|s| Distances::of(s).get(k))
                .collect();
            tail_monotone = tail.windows(2).all(|w| w[1] <= w[0] + TAIL_SLACK);
            if distances.get(k) < cfg.tol_conv && tail_monotone {
                match k {
                    0 => Outcome::Canonical {
                        mass: 2.0 * last.phi - lerp_phi(states, t_end / 2.0),
                    },
                    1 => Outcome::Flat1,
                    _ => Outcome::Flat2,
                }
            } else {
                Outcome::Undetermined
            }
        }
    };
    TrajectoryVerdict {
        outcome,
        evidence: Evidence {
            t_end,
            distances,
            tail_monotone,
            phi_end: last.phi,
            terminal: terminal.clone(),
        },
        decay,
    }
}

/// Verdict for a trajectory whose model coordinates are the physical frame.
pub fn classify_trajectory(traj: &Trajectory, cfg: &ClassifyConfig) -> TrajectoryVerdict {
    classify_states(&traj.states(), &traj.terminal, cfg)
}

/// Classify, extending the horizon tenfold while the verdict is
/// undetermined and the trajectory is still alive, up to `t_max_cap`.
pub fn classify_with_horizon(
    traj: &mut Trajectory,
    model: &dyn Model,
    geo: &Geometry,
    icfg: &IntegratorConfig,
    cfg: &ClassifyConfig,
    states: impl Fn(&Trajectory) -> Vec<ConnectionState>,
) -> Result<TrajectoryVerdict> {
    loop {
        let v = classify_states(&states(traj), &traj.terminal, cfg);
        if v.outcome != Outcome::Undetermined
            || traj.terminal != Terminal::ReachedTmax
            || traj.t_end() >= cfg.t_max_cap
        {
            return Ok(v);
        }
        let next = (traj.t_end() * 10.0).min(cfg.t_max_cap);
        extend(traj, model, geo, next, icfg, &[])?;
    }
}

/// Launch a family member and classify it.
pub fn classify_family(
    family: &LocalFamily,
    spec: &GeometrySpec,
    t0: f64,
    order: usize,
    icfg: &IntegratorConfig,
    cfg: &ClassifyConfig,
) -> Result<(FamilyRun, TrajectoryVerdict)> {
    let launcher = Launcher::for_family(family, spec)?;
    let mut run = launcher.run(family, t0, order, icfg, &[])?;
    let model = launcher.model(family);
    let flip = run.flip;
    let v = classify_with_horizon(
        &mut run.traj,
        model.as_ref(),
        &launcher.geometry,
        icfg,
        cfg,
        |tr| {
            let s = tr.states();
            if flip {
                s.iter().map(|s| s.metric_flip()).collect()
            } else {
                s
            }
        },
    )?;
    Ok((run, v))
}

/// One line of a verdict JSONL file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub family: String,
    pub params: [f64; 2],
    pub outcome: String,
    pub mass: Option<f64>,
    pub t_escape: Option<f64>,
    pub evidence: Evidence,
    pub decay: bool,
}

impl VerdictRecord {
    pub fn new(family: &LocalFamily, v: &TrajectoryVerdict) -> Self {
        VerdictRecord {
            family: family.extension.to_string(),
            params: family.params,
            outcome: v.outcome.label().to_string(),
            mass: v.outcome.mass(),
            t_escape: v.outcome.t_escape(),
            evidence: v.evidence.clone(),
            decay: v.decay,
        }
    }
}

// ---------------------------------------------------------------------------
// Regions

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    S0,
    Sinf,
    Cube01,
    Cube1inf,
    R0,
    R1,
    Rinf,
    RplusInf,
    /// `S^±∞`, sign of `φ` given by `positive`.
    SpmInf {
        positive: bool,
    },
}

impl Region {
    pub const ALL: [Region; 10] = [
        Region::S0,
        Region::Sinf,
        Region::Cube01,
        Region::Cube1inf,
        Region::R0,
        Region::R1,
        Region::Rinf,
        Region::RplusInf,
        Region::SpmInf { positive: true },
        Region::SpmInf { positive: false },
    ];

    pub fn name(&self) -> String {
        match self {
            Region::SpmInf { positive: true } => "SplusInf".into(),
            Region::SpmInf { positive: false } => "SminusInf".into(),
            r => format!("{r:?}"),
        }
    }

    /// Coordinates of the model the region lives in.
    pub fn labels(&self) -> &'static [&'static str] {
        match self {
            Region::S0 | Region::Sinf | Region::Cube01 | Region::Cube1inf => &["a0", "ap", "am"],
            Region::R0 | Region::R1 | Region::Rinf => &["a0", "a2"],
            Region::RplusInf => &["a0", "a1", "a2", "phi"],
            Region::SpmInf { .. } => &["a0", "ap", "am", "phi"],
        }
    }

    /// Membership of a physical state; `S^±∞` omits its `φ̇` condition.
    pub fn contains(&self, s: &ConnectionState) -> bool {
        let (a0, ap, am) = (s.a0, s.a1 + s.a2, s.a1 - s.a2);
        match self {
            Region::S0 => {
                0.0 < ap * am
                    && ap * am < a0
                    && a0 < 1.0
                    && 0.0 < a0 * am
                    && a0 * am < ap
                    && ap < 1.0
                    && 0.0 < a0 * ap
                    && a0 * ap < am
                    && am < 1.0
            }
            Region::Sinf => {
                ap * am > a0 && a0 > 1.0 && a0 * am > ap && ap > 1.0 && a0 * ap > am && am > 1.0
            }
            Region::Cube01 => [a0, ap, am].iter().all(|&x| 0.0 < x && x < 1.0),
            Region::Cube1inf => [a0, ap, am].iter().all(|&x| x > 1.0),
            Region::R0 => -1.0 < a0 && a0 < 1.0 && 0.0 < s.a2 && s.a2 < 1.0,
            Region::R1 => 0.0 < s.a2 && s.a2 < 1.0 && a0 < -1.0,
            Region::Rinf => a0 < -1.0 && s.a2 > 1.0,
            Region::RplusInf => s.a1 > 0.0 && 0.0 > s.a2 && s.phi > 0.0,
            Region::SpmInf { positive } => {
                a0 > 0.0
                    && ap > 0.0
                    && am > 0.0
                    && if *positive { s.phi > 0.0 } else { s.phi < 0.0 }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxOptions {
    pub n_samples: usize,
    pub margin: f64,
    /// Offset into the low-discrepancy sequence.
    pub seed: u64,
    pub t_range: (f64, f64),
    /// Upper extent of unbounded face coordinates.
    pub extent: f64,
}

impl Default for FluxOptions {
    fn default() -> Self {
        FluxOptions {
            n_samples: 1000,
            margin: FLUX_MARGIN,
            seed: 0,
            t_range: (1e-2, 1e2),
            extent: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxPoint {
    pub face: String,
    pub t: f64,
    pub x: Vec<f64>,
    /// Required-positive flux functional (or minus the normal speed on a tangent face).
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    pub region: String,
    pub model: String,
    pub n_checked: usize,
    pub pass: bool,
    /// First failing sample, or the smallest value on a strict face.
    pub worst: Option<FluxPoint>,
}

/// Radical inverse of `i` in base `b`.
pub fn halton(mut i: u64, b: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

const PRIMES: [u64; 5] = [2, 3, 5, 7, 11];

type PointFn = Box<dyn Fn(&[f64], f64, &Geometry) -> Vec<f64> + Send + Sync>;
type ValueFn = Box<dyn Fn(&dyn Model, &Geometry, f64, &[f64]) -> Result<f64> + Send + Sync>;

struct Face {
    name: String,
    point: PointFn,
    value: ValueFn,
    /// Invariant face: the normal speed must vanish rather than point inward.
    tangent: bool,
}

fn lerp(lo: f64, hi: f64, u: f64) -> f64 {
    lo + (hi - lo) * u
}

fn eval(model: &dyn Model, geo: &Geometry, t: f64, x: &[f64]) -> Vec<f64> {
    model.eval(t, x, &model.geo_vals(geo, t))
}

/// `∇h · F` for `h = x_j x_k − x_i`.
fn paraboloid_flux(x: &[f64], f: &[f64], i: usize) -> f64 {
    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
    x[k] * f[j] + x[j] * f[k] - f[i]
}

fn component(k: usize, sign: f64) -> ValueFn {
    Box::new(move |m, g, t, x| Ok(sign * eval(m, g, t, x)[k]))
}

fn faces(region: Region, m: f64, e: f64) -> Vec<Face> {
    let face = |name: String, point: PointFn, value: ValueFn| Face {
        name,
        point,
        value,
        tangent: false,
    };
    let mut out = Vec::new();
    match region {
        Region::S0 | Region::Sinf => {
            let (lo, hi, sign) = if region == Region::S0 {
                (m, 1.0 - m, -1.0)
            } else {
                (1.0 + m, e, 1.0)
            };
            for i in 0..3 {
                out.push(face(
                    format!("x{i} = x{}x{}", (i + 1) % 3, (i + 2) % 3),
                    Box::new(move |u, _, _| {
                        let mut x = [0.0; 3];
                        x[(i + 1) % 3] = lerp(lo, hi, u[0]);
                        x[(i + 2) % 3] = lerp(lo, hi, u[1]);
                        x[i] = x[(i + 1) % 3] * x[(i + 2) % 3];
                        x.to_vec()
                    }),
                    Box::new(move |md, g, t, x| {
                        Ok(sign * paraboloid_flux(x, &eval(md, g, t, x), i))
                    }),
                ));
            }
        }
        Region::Cube01 | Region::Cube1inf => {
            let (lo, hi) = if region == Region::Cube01 {
                (m, 1.0 - m)
            } else {
                (1.0 + m, e)
            };
            let walls: &[(f64, f64)] = if region == Region::Cube01 {
                &[(0.0, 1.0), (1.0, -1.0)]
            } else {
                &[(1.0, 1.0)]
            };
            for i in 0..3 {
                for &(c, sign) in walls {
                    out.push(face(
                        format!("x{i} = {c}"),
                        Box::new(move |u, _, _| {
                            let mut x = [c; 3];
                            x[(i + 1) % 3] = lerp(lo, hi, u[0]);
                            x[(i + 2) % 3] = lerp(lo, hi, u[1]);
                            x.to_vec()
                        }),
                        component(i, sign),
                    ));
                }
            }
        }
        Region::R0 | Region::R1 | Region::Rinf => {
            // (name, a0 range or fixed, a2 range or fixed, component, sign)
            let rows: Vec<(&str, (f64, f64), (f64, f64), usize, f64)> = match region {
                Region::R0 => vec![
                    ("a0 = 1", (1.0, 1.0), (m, 1.0 - m), 0, -1.0),
                    ("a0 = -1", (-1.0, -1.0), (m, 1.0 - m), 0, 1.0),
                    ("a2 = 1", (-1.0 + m, 1.0 - m), (1.0, 1.0), 1, -1.0),
                ],
                // R1 is left only through a2 = 1 (into R∞) or a0 = −1 (into R0).
                Region::R1 => vec![
                    ("a2 = 1", (-e, -1.0 - m), (1.0, 1.0), 1, 1.0),
                    ("a0 = -1", (-1.0, -1.0), (m, 1.0 - m), 0, 1.0),
                ],
                _ => vec![
                    ("a0 = -1", (-1.0, -1.0), (1.0 + m, e), 0, -1.0),
                    ("a2 = 1", (-e, -1.0 - m), (1.0, 1.0), 1, 1.0),
                ],
            };
            for (name, r0, r2, k, sign) in rows {
                out.push(face(
                    name.to_string(),
                    Box::new(move |u, _, _| vec![lerp(r0.0, r0.1, u[0]), lerp(r2.0, r2.1, u[1])]),
                    component(k, sign),
                ));
            }
            if region != Region::Rinf {
                let r0 = if region == Region::R0 {
                    (-1.0 + m, 1.0 - m)
                } else {
                    (-e, -1.0 - m)
                };
                out.push(Face {
                    name: "a2 = 0".into(),
                    point: Box::new(move |u, _, _| vec![lerp(r0.0, r0.1, u[0]), 0.0]),
                    value: Box::new(|md, g, t, x| Ok(-eval(md, g, t, x)[1].abs())),
                    tangent: true,
                });
            }
        }
        Region::RplusInf => {
            out.push(face(
                "a1 = 0".into(),
                Box::new(move |u, _, _| {
                    vec![lerp(-e, e, u[0]), 0.0, lerp(-e, -m, u[1]), lerp(m, e, u[2])]
                }),
                component(1, 1.0),
            ));
            out.push(face(
                "a2 = 0".into(),
                Box::new(move |u, _, _| {
                    vec![lerp(-e, e, u[0]), lerp(m, e, u[1]), 0.0, lerp(m, e, u[2])]
                }),
                component(2, -1.0),
            ));
            out.push(face(
                "phi = 0".into(),
                Box::new(move |u, _, _| {
                    vec![lerp(-e, e, u[0]), lerp(m, e, u[1]), lerp(-e, -m, u[2]), 0.0]
                }),
                component(3, 1.0),
            ));
        }
        Region::SpmInf { positive } => {
            let s = if positive { 1.0 } else { -1.0 };
            for i in 0..3 {
                out.push(face(
                    format!("x{i} = 0"),
                    Box::new(move |u, _, _| {
                        let mut x = vec![lerp(m, e, u[0]), lerp(m, e, u[1]), lerp(m, e, u[2]), 0.0];
                        x[3] = s * lerp(m, e, u[0] * u[1]);
                        x[i] = 0.0;
                        x
                    }),
                    component(i, 1.0),
                ));
            }
            // On {φ̇ = 0}, φ̈ must have the sign of φ.
            out.push(face(
                "phidot = 0".into(),
                Box::new(move |u, t, g| {
                    let v = g.sample(t).vals();
                    let p2 = ((m * m * (v.v0 + v.v3) - 2.0 * v.v0) / (v.v3 - v.v0)).max(0.0);
                    let ap = p2.sqrt() + lerp(m, e, u[0]);
                    let am = ((2.0 * v.v0 + ap * ap * (v.v3 - v.v0)) / (v.v0 + v.v3)).sqrt();
                    vec![lerp(m, e, u[1]), ap, am, s * lerp(m, e, u[2])]
                }),
                Box::new(move |md, g, t, x| {
                    let f = eval(md, g, t, x);
                    let h = 1e-6 * t;
                    let shifted = |d: f64| -> f64 {
                        let y: Vec<f64> = x.iter().zip(&f).map(|(x, f)| x + d * f).collect();
                        eval(md, g, t + d, &y)[3]
                    };
                    Ok(s * (shifted(h) - shifted(-h)) / (2.0 * h))
                }),
            ));
        }
    }
    out
}

/// Sample the boundary of `region` and check the sign of the flux the
/// forward-invariance argument needs at every sample.
pub fn region_flux_test(
    region: Region,
    model: &dyn Model,
    geo: &Geometry,
    opts: &FluxOptions,
) -> Result<FluxReport> {
    if model.labels() != region.labels() {
        return domain(format!(
            "region {} needs coordinates {:?}, model {} has {:?}",
            region.name(),
            region.labels(),
            model.name(),
            model.labels()
        ));
    }
    model.check_background(geo)?;
    if !(opts.margin > 0.0 && opts.extent > 1.0 + opts.margin && opts.t_range.0 > 0.0) {
        return domain("flux test needs margin > 0, extent > 1 + margin and positive times");
    }
    let fs = faces(region, opts.margin, opts.extent);
    let (tl, th) = (opts.t_range.0.ln(), opts.t_range.1.ln());
    let pts: Vec<(FluxPoint, bool)> = (0..opts.n_samples)
        .into_par_iter()
        .map(|i| -> Result<(FluxPoint, bool)> {
            let face = &fs[i % fs.len()];
            let idx = opts.seed + i as u64 + 1;
            let t = lerp(tl, th, halton(idx, PRIMES[0])).exp();
            let u: Vec<f64> = PRIMES[1..].iter().map(|&b| halton(idx, b)).collect();
            let x = (face.point)(&u, t, geo);
            let value = (face.value)(model, geo, t, &x)?;
            let ok = if face.tangent {
                value == 0.0
            } else {
                value > 0.0
            };
            Ok((
                FluxPoint {
                    face: face.name.clone(),
                    t,
                    x,
                    value,
                },
                ok,
            ))
        })
        .collect::<Result<_>>()?;
    let pass = pts.iter().all(|p| p.1);
    let worst = match pts.iter().find(|p| !p.1) {
        Some(p) => Some(p.0.clone()),
        None => pts
            .iter()
            .filter(|p| !fs.iter().any(|f| f.tangent && f.name == p.0.face))
            .min_by(|a, b| a.0.value.total_cmp(&b.0.value))
            .map(|p| p.0.clone()),
    };
    Ok(FluxReport {
        region: region.name(),
        model: model.name().to_string(),
        n_checked: pts.len(),
        pass,
        worst,
    })
}

/// Region, model and background of every forward-invariance check.
pub fn flux_suite() -> Vec<(Region, Box<dyn Model>, GeometrySpec)> {
    let mut out: Vec<(Region, Box<dyn Model>, GeometrySpec)> = Vec::new();
    for r in [Region::S0, Region::Sinf, Region::Cube01, Region::Cube1inf] {
        out.push((r, Box::new(SmoothingInstanton), GeometrySpec::smoothing()));
    }
    for spec in [
        GeometrySpec::small_resolution(),
        GeometrySpec::canonical_bundle(0.0, 1.0),
    ] {
        for r in [Region::R0, Region::R1, Region::Rinf] {
            out.push((r, Box::new(TypeIInstanton), spec.clone()));
        }
    }
    out.push((
        Region::RplusInf,
        Box::new(TypeIMonopole),
        GeometrySpec::small_resolution(),
    ));
    for positive in [true, false] {
        out.push((
            Region::SpmInf { positive },
            Box::new(SmoothingMonopole),
            GeometrySpec::smoothing(),
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Comparison

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub t_start: f64,
    pub t_end: f64,
    pub n_samples: usize,
    /// `a0 < â0` and `a2 > â2 >= 0` at every shared sample.
    pub order_ok: bool,
    /// `a2 − â2` strictly increasing across samples where the first solution is in R1.
    pub improved_ok: bool,
    pub first_violation: Option<f64>,
    /// A blow-up shortened the window.
    pub truncated: bool,
}

impl ComparisonReport {
    pub fn pass(&self) -> bool {
        self.order_ok && self.improved_ok
    }
}

/// Integrate two ordered `TypeIInstanton` states from `t_range.0` and check
/// that the order persists up to `t_range.1` or the first blow-up.
pub fn comparison_test(
    geo: &Geometry,
    first: [f64; 2],
    second: [f64; 2],
    t_range: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<ComparisonReport> {
    if !(first[0] < second[0] && first[1] > second[1] && second[1] >= 0.0) {
        return domain(format!(
            "comparison needs a0 < â0 and a2 > â2 >= 0, got {first:?} and {second:?}"
        ));
    }
    if !(t_range.0 > 0.0 && t_range.1 > t_range.0) {
        return domain("comparison window must satisfy 0 < t_start < t_end");
    }
    let model = TypeIInstanton;
    model.check_background(geo)?;
    let cfg = IntegratorConfig {
        t_max: t_range.1,
        ..cfg.clone()
    };
    let a = integrate(&model, geo, t_range.0, &first, &cfg, &[])?;
    let b = integrate(&model, geo, t_range.0, &second, &cfg, &[])?;
    let t_end = a.t_end().min(b.t_end());
    let truncated = a.blew_up() || b.blew_up();
    let mut pts: Vec<(f64, [f64; 2], [f64; 2])> = Vec::new();
    for (p, q, swap) in [(&a, &b, false), (&b, &a, true)] {
        for s in p.window(t_range.0, t_end) {
            if let Some(y) = q.interp(s.t) {
                let (u, v) = ([s.x[0], s.x[1]], [y[0], y[1]]);
                pts.push(if swap { (s.t, v, u) } else { (s.t, u, v) });
            }
        }
    }
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    pts.dedup_by(|x, y| x.0 == y.0);
    let mut first_violation = None;
    let order_ok = pts.iter().all(|(t, u, v)| {
        let ok = u[0] < v[0] && u[1] > v[1] && v[1] >= 0.0;
        if !ok && first_violation.is_none() {
            first_violation = Some(*t);
        }
        ok
    });
    let in_r1 = |u: &[f64; 2]| {
        Region::R1.contains(&ConnectionState::gauge_fixed(0.0, u[0], 0.0, u[1], 0.0))
    };
    let improved_ok = pts.windows(2).all(|w| {
        let (p, q) = (&w[0], &w[1]);
        !(in_r1(&p.1) && in_r1(&q.1)) || q.1[1] - q.2[1] > p.1[1] - p.2[1]
    });
    Ok(ComparisonReport {
        t_start: t_range.0,
        t_end,
        n_samples: pts.len(),
        order_ok,
        improved_ok,
        first_violation,
        truncated,
    })
}

/// Comparison test on `n` ordered pairs drawn from a Halton sequence,
/// alternating between the small resolution and the canonical bundle.
pub fn comparison_suite(n: usize, cfg: &IntegratorConfig) -> Result<Vec<ComparisonReport>> {
    let geos = [
        Geometry::build(&GeometrySpec::small_resolution())?,
        Geometry::build(&GeometrySpec::canonical_bundle(0.0, 1.0))?,
    ];
    (0..n)
        .into_par_iter()
        .map(|i| {
            let idx = i as u64 + 1;
            let u: Vec<f64> = PRIMES.iter().map(|&b| halton(idx, b)).collect();
            let a0 = lerp(-3.0, 1.0, u[0]);
            let b2 = lerp(0.0, 1.5, u[1]);
            let first = [a0, b2 + lerp(0.01, 1.0, u[2])];
            let second = [a0 + lerp(0.01, 1.0, u[3]), b2];
            let t = lerp(0.05f64.ln(), 5f64.ln(), u[4]).exp();
            comparison_test(&geos[i % 2], first, second, (t, 50.0 * t), cfg)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Critical parameters

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Canonical,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalOptions {
    pub t0: f64,
    pub order: usize,
    pub integrator: IntegratorConfig,
    pub classify: ClassifyConfig,
    pub max_doublings: usize,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        CriticalOptions {
            t0: crate::local_families::DEFAULT_T0,
            order: crate::local_families::DEFAULT_ORDER,
            integrator: IntegratorConfig::default(),
            classify: ClassifyConfig::default(),
            max_doublings: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalResult {
    pub extension: BundleExtension,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub lo_verdict: TrajectoryVerdict,
    pub hi_verdict: TrajectoryVerdict,
    pub bisections: usize,
}

/// Projection of an instanton state onto the `(a0, a2)` plane of the type I
/// system; members living in the `a1` plane are mapped by the metric flip.
fn instanton_plane(s: &ConnectionState) -> ConnectionState {
    if s.a1.abs() > s.a2.abs() {
        ConnectionState::gauge_fixed(s.t, -s.a0, 0.0, s.a1.abs(), 0.0)
    } else {
        ConnectionState::gauge_fixed(s.t, s.a0, 0.0, s.a2.abs(), 0.0)
    }
}

type StatePredicate = Box<dyn Fn(&ConnectionState) -> bool + Send + Sync>;

/// Decisive regions in the integration frame: entering the first implies a
/// canonical limit, entering the second (or blowing up) unboundedness.
fn decisive(kind: GeometryKind) -> (StatePredicate, StatePredicate) {
    if kind == GeometryKind::Smoothing {
        (
            Box::new(|s| Region::S0.contains(&normalise_gauge(s))),
            Box::new(|s| Region::Sinf.contains(&normalise_gauge(s))),
        )
    } else {
        // The abelian line a2 = 0 is invariant and tends to the canonical limit.
        (
            Box::new(|s| {
                let p = instanton_plane(s);
                Region::R0.contains(&p) || (p.a2 == 0.0 && -1.0 < p.a0 && p.a0 < 1.0)
            }),
            Box::new(|s| Region::Rinf.contains(&instanton_plane(s))),
        )
    }
}

/// Integrate an instanton member until it enters a decisive region.
pub fn decide_side(
    extension: BundleExtension,
    spec: &GeometrySpec,
    param: f64,
    opts: &CriticalOptions,
) -> Result<Option<Side>> {
    let family = LocalFamily::instanton(extension, param);
    let launcher = Launcher::for_family(&family, spec)?;
    let mut events = Vec::new();
    for (id, pred) in ["canonical", "unbounded"].into_iter().zip({
        let (c, u) = decisive(launcher.geometry.spec().kind);
        [c, u]
    }) {
        let model = launcher.model(&family);
        events.push(Event::new(id, move |t, x| pred(&model.to_state(t, x))));
    }
    let icfg = IntegratorConfig {
        t_max: opts.classify.t_max_cap,
        ..opts.integrator.clone()
    };
    let run = launcher.run(&family, opts.t0, opts.order, &icfg, &events)?;
    Ok(match &run.traj.terminal {
        Terminal::EventStop { id } if id == "canonical" => Some(Side::Canonical),
        Terminal::EventStop { .. } | Terminal::BlowUp { .. } => Some(Side::Unbounded),
        _ => None,
    })
}

fn side_or_err(
    extension: BundleExtension,
    spec: &GeometrySpec,
    p: f64,
    opts: &CriticalOptions,
) -> Result<Side> {
    decide_side(extension, spec, p, opts)?.ok_or_else(|| {
        Error::InsufficientData(format!(
            "{extension} at {p} entered no decisive region by t = {:e}",
            opts.classify.t_max_cap
        ))
    })
}

/// Bisect the canonical/unbounded dichotomy of an instanton family to
/// `hi − lo < tol`, doubling `hi` until it is on the unbounded side.
pub fn find_critical(
    extension: BundleExtension,
    spec: &GeometrySpec,
    bracket: (f64, f64),
    tol: f64,
    opts: &CriticalOptions,
) -> Result<CriticalResult> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi && tol > 0.0 && lo.is_finite() && hi.is_finite()) {
        return domain(format!("invalid bracket {bracket:?} or tolerance {tol}"));
    }
    if side_or_err(extension, spec, lo, opts)? != Side::Canonical {
        return Err(Error::Bracket(format!(
            "{extension}: lower end {lo} is not on the canonical side"
        )));
    }
    let mut doublings = 0;
    while side_or_err(extension, spec, hi, opts)? != Side::Unbounded {
        if doublings == opts.max_doublings || hi <= 0.0 {
            return Err(Error::Bracket(format!(
                "{extension}: both ends of [{lo}, {hi}] are on the canonical side"
            )));
        }
        lo = hi;
        hi *= 2.0;
        doublings += 1;
    }
    let mut bisections = 0;
    while hi - lo >= tol {
        let mid = 0.5 * (lo + hi);
        match side_or_err(extension, spec, mid, opts)? {
            Side::Canonical => lo = mid,
            Side::Unbounded => hi = mid,
        }
        bisections += 1;
    }
    let verdict = |p: f64| {
        let f = LocalFamily::instanton(extension, p);
        classify_family(
            &f,
            spec,
            opts.t0,
            opts.order,
            &opts.integrator,
            &opts.classify,
        )
        .map(|r| r.1)
    };
    Ok(CriticalResult {
        extension,
        value: 0.5 * (lo + hi),
        lo,
        hi,
        lo_verdict: verdict(lo)?,
        hi_verdict: verdict(hi)?,
        bisections,
    })
}
