//! Adiabatic rescalings and comparison with model anti-self-dual connections.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connections::{abelian_solution, BundleExtension, ConnectionState};
use crate::error::{domain, Error, Result};
use crate::flows::{eh_profile, IntegratorConfig, Model};
use crate::geometry::{Geometry, GeometrySpec};
use crate::local_families::{FamilyRun, Launcher, LocalFamily, DEFAULT_ORDER, DEFAULT_T0};
use crate::ode::{dopri5, dopri5_dense, HermiteTable, OdeOptions};

/// Radial profile of the Eguchi-Hanson metric in the variable `σ` with
/// `varphi² = cosh 2σ`, so that `dσ/dt = 1/√cosh 2σ` is regular at `t = 0`.
pub struct EhProfile {
    table: HermiteTable,
}

const EH_T_MAX: f64 = 1e6;

fn sigma_rhs(sigma: f64) -> f64 {
    1.0 / (2.0 * sigma).cosh().sqrt()
}

impl EhProfile {
    pub fn new() -> Self {
        let mut table = HermiteTable::new();
        let opts = OdeOptions {
            rtol: 1e-13,
            atol: 1e-15,
            ..OdeOptions::default()
        };
        let push = |table: &mut HermiteTable, t: f64, s: f64| {
            let d1 = sigma_rhs(s);
            let c = (2.0 * s).cosh();
            let d2 = -(2.0 * s).sinh() / (c * c);
            table.push(t, s, d1, d2);
        };
        push(&mut table, 0.0, 0.0);
        let mut on_step = |d: &crate::ode::DenseStep| {
            let t = d.t + d.h;
            push(&mut table, t, d.eval(t)[0]);
        };
        dopri5_dense(
            &mut |_, y: &[f64], dy: &mut [f64]| dy[0] = sigma_rhs(y[0]),
            0.0,
            &[0.0],
            EH_T_MAX,
            &opts,
            &mut |_, _| None,
            &mut on_step,
        );
        EhProfile { table }
    }

    /// `σ(t)`; beyond the table the asymptotic `σ ≈ ln(√2 t)` correction is
    /// continued from the last node.
    pub fn sigma(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.table.eval(t) {
            Some((s, _)) => s,
            None => {
                let (t1, s1, _, _) = self.table.last();
                s1 + (t / t1).ln()
            }
        }
    }

    /// `varphi` as a function of `σ`.
    pub fn varphi(sigma: f64) -> f64 {
        (2.0 * sigma).cosh().sqrt()
    }

    /// `σ` as a function of `varphi ≥ 1`.
    pub fn sigma_of_varphi(varphi: f64) -> f64 {
        0.5 * (varphi * varphi).acosh()
    }

    /// `(f, varphi²)` with `f = √(varphi² − varphi⁻²)`.
    pub fn f_and_phi2(sigma: f64) -> (f64, f64) {
        let c = (2.0 * sigma).cosh();
        ((2.0 * sigma).sinh() / c.sqrt(), c)
    }
}

impl Default for EhProfile {
    fn default() -> Self {
        Self::new()
    }
}

/// Model anti-self-dual connection on the fibre.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AsdModel {
    /// `α = 1/(1 + κt²)` on flat ℂ².
    FlatC2 { kappa: f64 },
    /// `(α0, α2)` on the Eguchi-Hanson space.
    EguchiHanson { l: i32, kappa: f64 },
}

impl AsdModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AsdModel::FlatC2 { kappa } if kappa.is_finite() => Ok(()),
            AsdModel::EguchiHanson { l, kappa } if l > 0 && (0.0..=1.0).contains(&kappa) => Ok(()),
            _ => domain(format!("invalid model {self:?}")),
        }
    }

    /// `(α0, α2)` at `t`; `None` past a finite-time blow-up.
    pub fn profile(&self, eh: &EhProfile, t: f64) -> Option<(f64, f64)> {
        match *self {
            AsdModel::FlatC2 { kappa } => {
                let d = 1.0 + kappa * t * t;
                (d > 0.0).then(|| (1.0 / d, 1.0 / d))
            }
            AsdModel::EguchiHanson { l, kappa } => Some(eh_state(l, kappa, eh.sigma(t))),
        }
    }
}

/// Eguchi-Hanson family in `σ`: with `x = tanh^{2l} σ`,
/// `α0 = l sech 2σ (1 + κx)/(1 − κx)`, `α2 = 2l √κ tanh^l σ / ((1 − κx) sinh 2σ)`.
pub fn eh_state(l: i32, kappa: f64, sigma: f64) -> (f64, f64) {
    let lf = l as f64;
    let x = sigma.tanh().powi(2 * l);
    let a0 = lf / (2.0 * sigma).cosh() * (1.0 + kappa * x) / (1.0 - kappa * x);
    let a2 = if sigma < 1e-6 {
        // tanh^l σ / sinh 2σ → σ^{l−1}/2.
        lf * kappa.sqrt() * sigma.powi(l - 1) / (1.0 - kappa * x)
    } else {
        2.0 * lf * kappa.sqrt() * sigma.tanh().powi(l) / ((1.0 - kappa * x) * (2.0 * sigma).sinh())
    };
    (a0, a2)
}

/// `d(α0, α2)/dσ` of [`eh_state`].
pub fn eh_state_deriv(l: i32, kappa: f64, sigma: f64) -> (f64, f64) {
    let (a0, a2) = eh_state(l, kappa, sigma);
    let lf = l as f64;
    let x = sigma.tanh().powi(2 * l);
    let sh = (2.0 * sigma).sinh();
    let dx = 4.0 * lf * x / sh;
    let d0 = a0 * (-2.0 * (2.0 * sigma).tanh() + 2.0 * kappa * dx / (1.0 - kappa * kappa * x * x));
    let dlog2 =
        (2.0 * (lf - 1.0) - 4.0 * sigma.sinh().powi(2)) / sh + kappa * dx / (1.0 - kappa * x);
    (d0, a2 * dlog2)
}

/// Rescaling of a family member towards the fibre.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RescaleMode {
    /// `(a0, a2)(δt)`.
    FibreOnly,
    /// `((1 − a0)/2, a2)(δt)`.
    Adiabatic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaleSpec {
    pub delta: f64,
    pub mode: RescaleMode,
}

impl RescaleSpec {
    pub fn adiabatic(delta: f64) -> Self {
        RescaleSpec {
            delta,
            mode: RescaleMode::Adiabatic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta > 0.0 && self.delta.is_finite() {
            Ok(())
        } else {
            domain("rescaling needs delta > 0")
        }
    }
}

/// `(t, a0δ, a2δ)` on a grid of rescaled times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaledPoint {
    pub t: f64,
    pub a0: f64,
    pub a2: f64,
}

/// Rescale a family member given by `state_at` (physical states) on `ts`.
pub fn rescaled_state(
    state_at: impl Fn(f64) -> Option<ConnectionState>,
    spec: RescaleSpec,
    ts: &[f64],
) -> Result<Vec<RescaledPoint>> {
    spec.validate()?;
    ts.iter()
        .map(|&t| {
            let s = state_at(spec.delta * t).ok_or_else(|| {
                Error::Range(format!("trajectory does not cover δt = {}", spec.delta * t))
            })?;
            let a0 = match spec.mode {
                RescaleMode::FibreOnly => s.a0,
                RescaleMode::Adiabatic => 0.5 * (1.0 - s.a0),
            };
            Ok(RescaledPoint { t, a0, a2: s.a2 })
        })
        .collect()
}

/// Rescaled-profile distance for one parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BubbleRow {
    pub param: f64,
    pub delta: f64,
    pub sup_distance: f64,
    pub window_lo: f64,
    pub window_hi: f64,
}

/// Evenly spaced grid on `[lo, hi]`.
pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1).max(1) as f64)
        .collect()
}

pub const WINDOW_POINTS: usize = 501;

/// A one-parameter instanton family that concentrates on the fibre.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BubbleFamily {
    /// `R_ε` on the small resolution with `δ = √(2/ε)`, compared with flat ℂ².
    SmallResolution,
    /// `Q^l` with `α_l = l √κ δ^{1−l}` on the canonical bundle with
    /// `U1 − U0 = 1`, `U1 + U0 = (3/2)δ²`, compared with Eguchi-Hanson.
    CanonicalBundle { l: i32, kappa: f64 },
}

impl BubbleFamily {
    /// Geometry, family member and rescaling for a sequence parameter
    /// (`ε` for the small resolution, `δ` for the canonical bundle).
    pub fn member(&self, param: f64) -> Result<(GeometrySpec, LocalFamily, f64)> {
        match *self {
            BubbleFamily::SmallResolution => {
                if !(param > 0.0) {
                    return domain("bubbling on the small resolution needs eps > 0");
                }
                let f = LocalFamily::instanton(BundleExtension::P0Id, param);
                Ok((GeometrySpec::small_resolution(), f, (2.0 / param).sqrt()))
            }
            BubbleFamily::CanonicalBundle { l, kappa } => {
                if !(param > 0.0) || l <= 0 {
                    return domain("bubbling on the canonical bundle needs delta > 0 and l > 0");
                }
                let s = 1.5 * param * param;
                let spec = GeometrySpec::canonical_bundle(0.5 * (s - 1.0), 0.5 * (s + 1.0));
                let alpha = l as f64 * kappa.sqrt() * param.powi(1 - l);
                Ok((
                    spec,
                    LocalFamily::instanton(BundleExtension::P1MinusLL(l), alpha),
                    param,
                ))
            }
        }
    }

    pub fn model(&self) -> AsdModel {
        match *self {
            BubbleFamily::SmallResolution => AsdModel::FlatC2 { kappa: 1.0 },
            BubbleFamily::CanonicalBundle { l, kappa } => AsdModel::EguchiHanson { l, kappa },
        }
    }
}

/// Sup over `window` of `max(|a0δ − α0|, |a2δ − α2|)` for each parameter;
/// a blow-up inside the window records `∞`.
pub fn bubble_metric(
    family: BubbleFamily,
    model: AsdModel,
    window: (f64, f64),
    params: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<BubbleRow>> {
    model.validate()?;
    let eh = eh_profile();
    let ts = grid(window.0, window.1, WINDOW_POINTS);
    params
        .par_iter()
        .map(|&p| {
            let (spec, fam, delta) = family.member(p)?;
            let launcher = Launcher::for_family(&fam, &spec)?;
            let cfg = IntegratorConfig {
                t_max: delta * window.1 * 1.01,
                ..cfg.clone()
            };
            let t0 = DEFAULT_T0 * delta.min(1.0);
            let run = launcher.run(&fam, t0, DEFAULT_ORDER, &cfg, &[])?;
            let m = launcher.model(&fam);
            let pts = rescaled_state(
                |t| run.state_at(m.as_ref(), t),
                RescaleSpec::adiabatic(delta),
                &ts,
            );
            let sup_distance = match pts {
                Err(_) if run.traj.blew_up() => f64::INFINITY,
                Err(e) => return Err(e),
                Ok(pts) => pts
                    .iter()
                    .try_fold(0.0f64, |d, q| {
                        model
                            .profile(&eh, q.t)
                            .map(|(b0, b2)| d.max((q.a0 - b0).abs()).max((q.a2 - b2).abs()))
                    })
                    .unwrap_or(f64::INFINITY),
            };
            Ok(BubbleRow {
                param: p,
                delta,
                sup_distance,
                window_lo: window.0,
                window_hi: window.1,
            })
        })
        .collect()
}

/// Body-limit distance on a compact window for `R_ε` against the abelian
/// member `C = −2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodyRow {
    pub eps: f64,
    pub sup_distance: f64,
    /// Largest gap between `a0 − a0'` read off the trajectory and the
    /// value reconstructed from `d(a0μ²)/dt = −4λ(a2²(u1 − u0) + u0)`.
    pub reconstruction_gap: f64,
    pub window_lo: f64,
    pub window_hi: f64,
}

pub fn body_limit_check(
    eps: &[f64],
    window: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Vec<BodyRow>> {
    if !(window.0 > 0.0 && window.1 > window.0) {
        return domain("body window needs 0 < lo < hi");
    }
    let spec = GeometrySpec::small_resolution();
    let launcher = Launcher::new(BundleExtension::P0Id, &spec)?;
    let geo = &launcher.geometry;
    let ts = grid(window.0, window.1, WINDOW_POINTS);
    eps.par_iter()
        .map(|&e| {
            let fam = LocalFamily::instanton(BundleExtension::P0Id, e);
            let cfg = IntegratorConfig {
                t_max: window.1,
                ..cfg.clone()
            };
            let run = launcher.run(&fam, DEFAULT_T0, DEFAULT_ORDER, &cfg, &[])?;
            if run.traj.t_end() < window.1 {
                return Ok(BodyRow {
                    eps: e,
                    sup_distance: f64::INFINITY,
                    reconstruction_gap: f64::NAN,
                    window_lo: window.0,
                    window_hi: window.1,
                });
            }
            let m = launcher.model(&fam);
            let mut sup = 0.0f64;
            for &t in &ts {
                let s = run.state_at(m.as_ref(), t).expect("window covered");
                let r = abelian_solution(geo, -2.0, 0.0, t);
                sup = sup.max((s.a0 - r.a0).abs()).max(s.a2.abs()).max(s.a1.abs());
            }
            let gap = a0_reconstruction_gap(geo, &run, m.as_ref(), window.1)?;
            Ok(BodyRow {
                eps: e,
                sup_distance: sup,
                reconstruction_gap: gap,
                window_lo: window.0,
                window_hi: window.1,
            })
        })
        .collect()
}

/// Integrate `q̇ = 4λ a2²(u1 − u0)` along the trajectory from the launch
/// time and compare `−q/μ²` (plus the launch offset) with `a0 − a0'`.
fn a0_reconstruction_gap(
    geo: &Geometry,
    run: &FamilyRun,
    model: &dyn Model,
    t_end: f64,
) -> Result<f64> {
    let t0 = run.launch.t0;
    let h0 = geo.sample(t0);
    let diff = |t: f64| -> Option<f64> {
        let s = run.state_at(model, t)?;
        Some(s.a0 - abelian_solution(geo, -2.0, 0.0, t).a0)
    };
    let q0 =
        diff(t0).ok_or_else(|| Error::Range("launch time not covered".into()))? * h0.mu * h0.mu;
    let opts = OdeOptions {
        rtol: 1e-12,
        atol: 1e-14,
        ..OdeOptions::default()
    };
    let mut gap = 0.0f64;
    let mut check = |t: f64, q: f64| {
        let h = geo.sample(t);
        if let Some(d) = diff(t) {
            gap = gap.max((q / (h.mu * h.mu) - d).abs());
        }
    };
    let res = dopri5(
        |t, _y: &[f64], dy: &mut [f64]| {
            let h = geo.sample(t);
            let a2 = run.state_at(model, t).map_or(0.0, |s| s.a2);
            dy[0] = -4.0 * h.lambda * a2 * a2 * (h.u1 - h.u0);
        },
        t0,
        &[q0],
        t_end,
        &opts,
        |_, _| None,
    );
    for n in &res.nodes {
        check(n.t, n.y[0]);
    }
    Ok(gap)
}
