//! Launch data at the singular orbit: boundary-value reparametrisations,
//! order-by-order series solutions of the singular IVPs and validated
//! initial states at small `t0`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::connections::{BundleExtension, ConnectionState, TaylorArrays};
use crate::error::{domain, Error, Result};
use crate::flows::{
    integrate_reparametrised, Event, IntegratorConfig, Model, Reparam, SmoothingInstanton,
    SmoothingMonopole, Trajectory, TypeIInstanton, TypeIMonopole,
};
use crate::geometry::{GeoVals, Geometry, GeometryKind, GeometrySpec};
use crate::series::Series;

pub const DEFAULT_T0: f64 = 1e-3;
pub const DEFAULT_ORDER: usize = 8;
/// Time at which launched trajectories leave the reparametrised variables.
pub const REPARAM_SWITCH: f64 = 1.0;

/// A bundle extension with its two free parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalFamily {
    pub extension: BundleExtension,
    pub params: [f64; 2],
    /// Instanton families force the second parameter to zero.
    pub instanton: bool,
}

impl LocalFamily {
    pub fn monopole(extension: BundleExtension, p: f64, q: f64) -> Self {
        LocalFamily {
            extension,
            params: [p, q],
            instanton: false,
        }
    }

    pub fn instanton(extension: BundleExtension, p: f64) -> Self {
        LocalFamily {
            extension,
            params: [p, 0.0],
            instanton: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let BundleExtension::P1MinusLL(l) = self.extension {
            if l.abs() > 40 {
                return domain(format!("|l| = {} is beyond the supported range", l.abs()));
            }
        }
        if self.params.iter().any(|p| !p.is_finite()) {
            return domain("family parameters must be finite");
        }
        if self.instanton && self.params[1] != 0.0 {
            return domain("instanton families have a vanishing second parameter");
        }
        Ok(())
    }

    pub fn param_names(&self) -> [&'static str; 2] {
        self.extension.param_names()
    }

    /// Background the extension lives on.
    pub fn default_geometry(&self) -> GeometrySpec {
        match self.extension {
            BundleExtension::PId => GeometrySpec::smoothing(),
            BundleExtension::P0Id | BundleExtension::P1Bold0 => GeometrySpec::small_resolution(),
            BundleExtension::P1MinusLL(_) => GeometrySpec::canonical_bundle(0.0, 1.0),
        }
    }

    pub fn check_geometry(&self, spec: &GeometrySpec) -> Result<()> {
        let want = self.default_geometry().kind;
        if spec.kind != want {
            return domain(format!(
                "{} lives on {:?}, not {:?}",
                self.extension, want, spec.kind
            ));
        }
        if spec.swap_factors {
            return domain("families are launched on the unswapped background");
        }
        Ok(())
    }
}

const fn rp(c: f64, m: i32) -> Reparam {
    Reparam { c, m }
}

/// Singular initial value problem `t ẏ = M₋₁(y) + M(t, y)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SingularIvp {
    pub extension: BundleExtension,
    pub params: [f64; 2],
    /// Unknowns in the order of `y0`.
    pub y_labels: Vec<String>,
    /// Model component each unknown reparametrises, with `(c, m)`.
    pub reparam: Vec<(String, Reparam)>,
    pub y0: Vec<f64>,
    /// Row/column labels of the printed linearisation.
    pub matrix_labels: Vec<String>,
    /// Linearisation `d_{y0} M₋₁` as printed in the source.
    pub linearization: Vec<Vec<f64>>,
    /// Linearisation computed from the transcribed system, in `matrix_labels` order.
    pub computed_linearization: Vec<Vec<f64>>,
    /// Coefficients of `det(k Id − d_{y0}M₋₁)`, highest power first, from the printed matrix.
    pub char_poly: Vec<f64>,
    /// Same polynomial from the computed linearisation.
    pub computed_char_poly: Vec<f64>,
    /// The printed closed form, expanded.
    pub printed_char_poly: Vec<f64>,
    pub printed_char_poly_text: String,
    /// True iff no positive integer is an eigenvalue.
    pub eigen_ok: bool,
}

/// Integration frame for a family: families with `l ≤ 0` are computed as
/// `l' = 1 − l` on the background with swapped factors and mapped back by
/// the metric symmetry.
pub struct Launcher {
    pub spec: GeometrySpec,
    pub geometry: Geometry,
    pub extension: BundleExtension,
    pub flip: bool,
    /// Extension actually solved in the integration frame.
    pub frame_extension: BundleExtension,
}

impl Launcher {
    pub fn new(extension: BundleExtension, spec: &GeometrySpec) -> Result<Self> {
        LocalFamily::monopole(extension, 0.0, 0.0).check_geometry(spec)?;
        let (flip, frame_extension, frame_spec) = match extension {
            BundleExtension::P1MinusLL(l) if l <= 0 => (
                true,
                BundleExtension::P1MinusLL(1 - l),
                spec.clone().swapped(),
            ),
            e => (false, e, spec.clone()),
        };
        let geometry = Geometry::build(&frame_spec)?;
        Ok(Launcher {
            spec: spec.clone(),
            geometry,
            extension,
            flip,
            frame_extension,
        })
    }

    pub fn for_family(family: &LocalFamily, spec: &GeometrySpec) -> Result<Self> {
        family.validate()?;
        Self::new(family.extension, spec)
    }

    fn ratio(&self) -> f64 {
        let (u0, u1) = self.geometry.spec().params();
        ((u1 - u0) / (u1 + u0)).sqrt()
    }

    /// Model, reparametrisation and `y0` of the monopole IVP in the frame.
    fn setup(&self, params: [f64; 2]) -> (Box<dyn Model>, Vec<Reparam>, Vec<f64>) {
        let [p, q] = params;
        match self.frame_extension {
            BundleExtension::PId => (
                Box::new(SmoothingMonopole),
                vec![rp(0.0, 0), rp(1.0, 2), rp(0.0, 0), rp(0.0, 1)],
                vec![p, 9.0 / 8.0 * (p * p - 1.0) - q, p, q],
            ),
            BundleExtension::P0Id => (
                Box::new(TypeIMonopole),
                vec![rp(-1.0, 2), rp(0.0, 2), rp(1.0, 2), rp(0.0, 2)],
                vec![p, -q / 3f64.sqrt(), -0.5 * p, q],
            ),
            BundleExtension::P1Bold0 => (
                Box::new(TypeIMonopole),
                vec![rp(0.0, 0); 4],
                vec![1.0, p, 0.0, q],
            ),
            BundleExtension::P1MinusLL(l) => {
                let lf = l as f64;
                (
                    Box::new(TypeIMonopole),
                    vec![rp(0.0, 0), rp(0.0, l), rp(0.0, l - 1), rp(0.0, 0)],
                    vec![1.0 - 2.0 * lf, -p * q * self.ratio() / lf, p, q],
                )
            }
        }
    }

    /// Model used to integrate the family in the frame.
    pub fn model(&self, family: &LocalFamily) -> Box<dyn Model> {
        match (self.frame_extension, family.instanton) {
            (BundleExtension::PId, true) => Box::new(SmoothingInstanton),
            (BundleExtension::PId, false) => Box::new(SmoothingMonopole),
            (BundleExtension::P1Bold0, true) => Box::new(TypeIMonopole),
            (_, true) => Box::new(TypeIInstanton),
            (_, false) => Box::new(TypeIMonopole),
        }
    }

    pub fn build_ivp(&self, family: &LocalFamily) -> Result<SingularIvp> {
        family.validate()?;
        let (model, reparam, y0) = self.setup(family.params);
        let a = linearization(&self.geometry, model.as_ref(), &reparam, &y0)?;
        let (y_labels, matrix_labels, printed, poly, text) =
            printed_data(self.frame_extension, &y0, self.ratio());
        // Printed matrices list the Higgs unknown second.
        let perm = [0usize, 3, 1, 2];
        let computed: Vec<Vec<f64>> = perm
            .iter()
            .map(|&i| perm.iter().map(|&j| a[(i, j)]).collect())
            .collect();
        let pm = DMatrix::from_fn(4, 4, |i, j| printed[i][j]);
        let eigen_ok = no_positive_integer_eigenvalue(&pm);
        Ok(SingularIvp {
            extension: family.extension,
            params: family.params,
            y_labels,
            reparam: model
                .labels()
                .iter()
                .map(|s| s.to_string())
                .zip(reparam.iter().copied())
                .collect(),
            y0,
            matrix_labels,
            char_poly: char_poly(&pm),
            computed_char_poly: char_poly(&a),
            linearization: printed,
            computed_linearization: computed,
            printed_char_poly: poly,
            printed_char_poly_text: text,
            eigen_ok,
        })
    }

    /// Taylor data of the family to `order`, plus the next two orders for
    /// error estimates.
    pub fn taylor(&self, family: &LocalFamily, order: usize) -> Result<TaylorData> {
        family.validate()?;
        let (model, reparam, y0) = self.setup(family.params);
        let pa = DMatrix::from_fn(4, 4, |i, j| self.printed_matrix(family)[i][j]);
        if !no_positive_integer_eigenvalue(&pa) {
            return Err(Error::Launch(format!(
                "{}: linearisation has a positive integer eigenvalue",
                family.extension
            )));
        }
        let ys = solve_singular(&self.geometry, model.as_ref(), &reparam, &y0, order + 2)?;
        // Model-variable coefficients x_i = c_i + t^{m_i} y_i.
        let n = order + 3;
        let xs: Vec<Vec<f64>> = (0..4)
            .map(|i| {
                let mut c = vec![0.0; n];
                c[0] += reparam[i].c;
                for (k, yk) in ys.iter().enumerate() {
                    let p = k + reparam[i].m as usize;
                    if p < n {
                        c[p] += yk[i];
                    }
                }
                c
            })
            .collect();
        let mut frame: TaylorArrays = Default::default();
        for f in frame.iter_mut() {
            *f = vec![0.0; n];
        }
        for k in 0..n {
            let xk: Vec<f64> = xs.iter().map(|c| c[k]).collect();
            let s = if k == 0 {
                model.to_state(0.0, &xk)
            } else {
                model.to_state_deriv(0.0, &xk)
            };
            for (f, v) in frame.iter_mut().zip(s.as_array()) {
                f[k] = v;
            }
        }
        if family.instanton {
            // The Higgs component vanishes identically; drop rounding residue.
            let tiny = frame[5].iter().all(|v| v.abs() < 1e-10);
            if !tiny {
                return Err(Error::Series(format!(
                    "{}: instanton data has a nonzero Higgs series",
                    family.extension
                )));
            }
            frame[5].iter_mut().for_each(|v| *v = 0.0);
        }
        let physical = if self.flip {
            flip_arrays(&frame)
        } else {
            frame.clone()
        };
        let split = |a: &TaylorArrays, lo: usize, hi: usize| -> TaylorArrays {
            std::array::from_fn(|i| a[i][lo..hi].to_vec())
        };
        Ok(TaylorData {
            extension: family.extension,
            params: family.params,
            order,
            flip: self.flip,
            coefficients: split(&physical, 0, order + 1),
            dropped: split(&physical, order + 1, n),
            frame_coefficients: split(&frame, 0, order + 1),
            frame_dropped: split(&frame, order + 1, n),
        })
    }

    fn printed_matrix(&self, family: &LocalFamily) -> Vec<Vec<f64>> {
        let (_, _, y0) = self.setup(family.params);
        printed_data(self.frame_extension, &y0, self.ratio()).2
    }

    /// Launch state at `t0` from Taylor data of the given order.
    pub fn launch(&self, family: &LocalFamily, t0: f64, order: usize) -> Result<Launch> {
        if !(t0 > 0.0) {
            return domain("launch time must be positive");
        }
        let t0 = self.effective_t0(t0);
        if t0 > self.geometry.t_series() * 1.0000001 {
            return domain(format!(
                "t0 = {t0} exceeds the series range {}",
                self.geometry.t_series()
            ));
        }
        let data = self.taylor(family, order)?;
        let eval =
            |c: &TaylorArrays, dropped: &TaylorArrays| -> (ConnectionState, ConnectionState, f64) {
                let v: [f64; 6] = std::array::from_fn(|i| horner(&c[i], t0));
                let d: [f64; 6] = std::array::from_fn(|i| horner_deriv(&c[i], t0));
                let err = (0..6)
                    .map(|i| {
                        dropped[i]
                            .iter()
                            .enumerate()
                            .map(|(j, a)| a.abs() * t0.powi((order + 1 + j) as i32))
                            .sum::<f64>()
                    })
                    .fold(0.0, f64::max);
                (
                    ConnectionState::from_array(t0, v),
                    ConnectionState::from_array(t0, d),
                    err,
                )
            };
        let (state, deriv, error) = eval(&data.coefficients, &data.dropped);
        let (frame_state, _, _) = eval(&data.frame_coefficients, &data.frame_dropped);
        let model = self.model(family);
        let x0 = model.from_state(&frame_state);
        Ok(Launch {
            t0,
            state,
            deriv,
            error,
            x0,
            model: model.name().to_string(),
            coefficients: data.coefficients,
        })
    }

    /// Raise `t0` for large `l` so the leading power stays representable.
    pub fn effective_t0(&self, t0: f64) -> f64 {
        match self.frame_extension {
            BundleExtension::P1MinusLL(l) if l > 1 => {
                let floor = 10f64.powf(-200.0 / (l - 1) as f64);
                t0.max(floor)
            }
            _ => t0,
        }
    }

    /// Launch and integrate a family; states are reported in the physical frame.
    pub fn run(
        &self,
        family: &LocalFamily,
        t0: f64,
        order: usize,
        cfg: &IntegratorConfig,
        events: &[Event],
    ) -> Result<FamilyRun> {
        let launch = self.launch(family, t0, order)?;
        let model = self.model(family);
        let (mono, reparam, _) = self.setup(family.params);
        // Reparametrisation of the integration model, matched by component label.
        let r: Vec<Reparam> = model
            .labels()
            .iter()
            .map(|l| {
                mono.labels()
                    .iter()
                    .position(|m| m == l)
                    .map(|i| reparam[i])
                    .expect("shared labels")
            })
            .collect();
        let traj = integrate_reparametrised(
            model.as_ref(),
            &self.geometry,
            launch.t0,
            &launch.x0,
            &r,
            REPARAM_SWITCH,
            cfg,
            events,
        )?;
        Ok(FamilyRun {
            family: *family,
            launch,
            traj,
            flip: self.flip,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TaylorData {
    pub extension: BundleExtension,
    pub params: [f64; 2],
    pub order: usize,
    pub flip: bool,
    /// Coefficients of `t^0..t^order` per field `(a0, a1, a2, b1, b2, φ)`.
    pub coefficients: TaylorArrays,
    /// Coefficients of `t^(order+1)` and `t^(order+2)`.
    pub dropped: TaylorArrays,
    /// Same data in the integration frame.
    pub frame_coefficients: TaylorArrays,
    pub frame_dropped: TaylorArrays,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Launch {
    pub t0: f64,
    pub state: ConnectionState,
    pub deriv: ConnectionState,
    /// Size of the first dropped terms at `t0`.
    pub error: f64,
    /// Initial vector for the integration model.
    pub x0: Vec<f64>,
    pub model: String,
    /// Physical Taylor coefficients used for the launch.
    pub coefficients: TaylorArrays,
}

impl Launch {
    /// Physical state from the Taylor data at `0 <= t`.
    pub fn series_state(&self, t: f64) -> ConnectionState {
        ConnectionState::from_array(t, std::array::from_fn(|i| horner(&self.coefficients[i], t)))
    }
}

/// A launched and integrated family member.
#[derive(Clone, Debug)]
pub struct FamilyRun {
    pub family: LocalFamily,
    pub launch: Launch,
    pub traj: Trajectory,
    pub flip: bool,
}

impl FamilyRun {
    pub fn states(&self) -> Vec<ConnectionState> {
        let s = self.traj.states();
        if self.flip {
            s.iter().map(|s| s.metric_flip()).collect()
        } else {
            s
        }
    }

    pub fn state_derivs(&self) -> Vec<ConnectionState> {
        let s = self.traj.state_derivs();
        if self.flip {
            s.iter().map(|s| s.metric_flip()).collect()
        } else {
            s
        }
    }

    /// Physical state at `t`: Taylor data below the launch time, Hermite
    /// interpolation of the trajectory above it.
    pub fn state_at(&self, model: &dyn Model, t: f64) -> Option<ConnectionState> {
        if (0.0..self.launch.t0).contains(&t) {
            return Some(self.launch.series_state(t));
        }
        let x = self.traj.interp(t)?;
        let s = model.to_state(t, &x);
        Some(if self.flip { s.metric_flip() } else { s })
    }
}

fn flip_arrays(a: &TaylorArrays) -> TaylorArrays {
    let n = a[0].len();
    let mut out: TaylorArrays = Default::default();
    for o in out.iter_mut() {
        *o = vec![0.0; n];
    }
    for k in 0..n {
        let s = ConnectionState::from_array(0.0, std::array::from_fn(|i| a[i][k])).metric_flip();
        for (o, v) in out.iter_mut().zip(s.as_array()) {
            o[k] = v;
        }
    }
    out
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * t + a)
}

fn horner_deriv(c: &[f64], t: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, a)| acc * t + k as f64 * a)
}

/// `R(t, y) = t^{1−m} F(t, c + t^m y) − m y`, so that `t ẏ = R`.
fn residual_series(
    model: &dyn Model,
    g: &GeoVals<Series>,
    reparam: &[Reparam],
    y: &[Vec<f64>],
    prec: i32,
) -> Result<Vec<Series>> {
    let t = Series::var(prec);
    let ys: Vec<Series> = y.iter().map(|c| Series::taylor(c.clone())).collect();
    let xs: Vec<Series> = ys
        .iter()
        .zip(reparam)
        .map(|(y, r)| y.shift(r.m) + r.c)
        .collect();
    let f = model.eval_series(&t, &xs, g)?;
    Ok(f.into_iter()
        .zip(ys)
        .zip(reparam)
        .map(|((fi, yi), r)| fi.shift(1 - r.m) - yi * r.m as f64)
        .collect())
}

fn coeff_checked(s: &Series, k: i32) -> Result<f64> {
    if k < s.prec() {
        Ok(s.coeff(k))
    } else {
        Err(Error::Series(format!(
            "series precision t^{} insufficient for order {k}",
            s.prec()
        )))
    }
}

/// Picks a geometry precision that resolves order `k` of `R`.
fn residual_at(
    geo: &Geometry,
    model: &dyn Model,
    reparam: &[Reparam],
    y: &[Vec<f64>],
    k: usize,
) -> Result<Vec<f64>> {
    let mut prec = k as i32 + 6;
    loop {
        let g = model.geo_series(geo, prec)?;
        let ypad: Vec<Vec<f64>> = y
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.resize(prec as usize, 0.0);
                c
            })
            .collect();
        let r = residual_series(model, &g, reparam, &ypad, prec)?;
        if r.iter().all(|s| (k as i32) < s.prec()) {
            return r.iter().map(|s| coeff_checked(s, k as i32)).collect();
        }
        prec += 4;
        if prec > crate::geometry::SERIES_TERMS {
            return Err(Error::Series(format!(
                "order {k} needs more than {} geometry terms",
                crate::geometry::SERIES_TERMS
            )));
        }
    }
}

/// `d_{y0} M₋₁`, read off at order 1 by probing unit vectors.
fn linearization(
    geo: &Geometry,
    model: &dyn Model,
    reparam: &[Reparam],
    y0: &[f64],
) -> Result<DMatrix<f64>> {
    let n = y0.len();
    let base: Vec<Vec<f64>> = y0.iter().map(|&v| vec![v, 0.0]).collect();
    let b = residual_at(geo, model, reparam, &base, 1)?;
    let mut a = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut y = base.clone();
        y[j][1] = 1.0;
        let r = residual_at(geo, model, reparam, &y, 1)?;
        for i in 0..n {
            a[(i, j)] = r[i] - b[i];
        }
    }
    Ok(a)
}

/// Coefficients `y_0..y_order` of the solution of `t ẏ = R(t, y)`, `y(0) = y0`.
fn solve_singular(
    geo: &Geometry,
    model: &dyn Model,
    reparam: &[Reparam],
    y0: &[f64],
    order: usize,
) -> Result<Vec<Vec<f64>>> {
    let n = y0.len();
    let mut y: Vec<Vec<f64>> = y0.iter().map(|&v| vec![v]).collect();
    let m0 = residual_at(geo, model, reparam, &y, 0)?;
    let scale = 1.0 + y0.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m0.iter().any(|v| v.abs() > 1e-9 * scale * scale) {
        return Err(Error::Launch(format!(
            "initial value is not a zero of the singular part: {m0:?}"
        )));
    }
    let mut out = vec![y0.to_vec()];
    for k in 1..=order {
        for c in y.iter_mut() {
            c.push(0.0);
        }
        let b = residual_at(geo, model, reparam, &y, k)?;
        let mut a = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut yp = y.clone();
            yp[j][k] = 1.0;
            let r = residual_at(geo, model, reparam, &yp, k)?;
            for i in 0..n {
                a[(i, j)] = r[i] - b[i];
            }
        }
        let lhs = DMatrix::identity(n, n) * k as f64 - a;
        let sol = lhs
            .lu()
            .solve(&DVector::from_vec(b))
            .ok_or_else(|| Error::Launch(format!("order {k}: k Id − d_y0 M₋₁ is singular")))?;
        for i in 0..n {
            y[i][k] = sol[i];
        }
        out.push(sol.iter().copied().collect());
    }
    Ok(out)
}

/// Characteristic polynomial `det(k Id − A)` by Faddeev-LeVerrier, highest power first.
pub fn char_poly(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut c = vec![1.0];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        m = a * &m + DMatrix::identity(n, n) * c[k - 1];
        let ck = -(a * &m).trace() / k as f64;
        c.push(ck);
    }
    c
}

fn no_positive_integer_eigenvalue(a: &DMatrix<f64>) -> bool {
    a.complex_eigenvalues().iter().all(|z| {
        let near_int = (z.re - z.re.round()).abs() < 1e-9 && z.im.abs() < 1e-9;
        !(near_int && z.re.round() >= 1.0)
    })
}

/// Expand `(k + a)^p k^q` with highest power first.
fn expand(a: f64, p: usize, q: usize) -> Vec<f64> {
    let mut c = vec![1.0];
    for _ in 0..p {
        let mut next = vec![0.0; c.len() + 1];
        for (i, v) in c.iter().enumerate() {
            next[i] += v;
            next[i + 1] += v * a;
        }
        c = next;
    }
    c.resize(c.len() + q, 0.0);
    c
}

type Printed = (Vec<String>, Vec<String>, Vec<Vec<f64>>, Vec<f64>, String);

fn labels(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// The printed linearisations, initial values and determinants.
fn printed_data(ext: BundleExtension, y0: &[f64], ratio: f64) -> Printed {
    let r3 = 3f64.sqrt();
    match ext {
        BundleExtension::PId => {
            let xi = y0[0];
            (
                labels(&["a0", "A_plus", "a_minus", "psi"]),
                labels(&["a0", "psi", "A_plus", "a_minus"]),
                vec![
                    vec![-1.0, 0.0, 0.0, 1.0],
                    vec![0.0, -1.0, -1.0, 2.25 * xi],
                    vec![2.25 * xi, -2.0, -2.0, 2.25 * xi],
                    vec![2.0, 0.0, 0.0, -2.0],
                ],
                expand(3.0, 2, 2),
                "(k+3)^2 k^2".into(),
            )
        }
        BundleExtension::P0Id => (
            labels(&["X0", "X1", "X2", "psi"]),
            labels(&["X0", "psi", "X1", "X2"]),
            vec![
                vec![-4.0, 0.0, 0.0, -8.0],
                vec![0.0, -2.0, -2.0 * r3, 0.0],
                vec![0.0, -4.0 / r3, -4.0, 0.0],
                vec![-1.0, 0.0, 0.0, -2.0],
            ],
            expand(6.0, 2, 2),
            "(k+6)^2 k^2".into(),
        ),
        BundleExtension::P1Bold0 => {
            let (e, d) = (y0[1], y0[3]);
            (
                labels(&["a0", "a1", "a2", "phi"]),
                labels(&["a0", "phi", "a1", "a2"]),
                vec![
                    vec![-2.0, 0.0, 0.0, 0.0],
                    vec![0.0, 0.0, 0.0, -2.0 * r3 * e],
                    vec![e, 0.0, 0.0, -4.0 / r3 * d],
                    vec![0.0, 0.0, 0.0, -2.0],
                ],
                expand(2.0, 2, 2),
                "(k+2)^2 k^2".into(),
            )
        }
        BundleExtension::P1MinusLL(l) => {
            let (x1, alpha, beta) = (y0[1], y0[2], y0[3]);
            let lf = l as f64;
            (
                labels(&["a0", "X1", "X2", "phi"]),
                labels(&["a0", "phi", "X1", "X2"]),
                vec![
                    vec![0.0; 4],
                    vec![0.0; 4],
                    vec![
                        0.5 * x1,
                        -2.0 * ratio * alpha,
                        -2.0 * lf,
                        -2.0 * ratio * beta,
                    ],
                    vec![-0.5 * alpha, 0.0, 0.0, 0.0],
                ],
                expand(2.0 * lf, 1, 3),
                format!("(k+{})k^3", 2 * l),
            )
        }
    }
}

/// One catalogue entry per extension.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogueEntry {
    pub extension: BundleExtension,
    pub geometry: GeometryKind,
    pub param_names: [String; 2],
    pub y0_formula: Vec<String>,
    pub ivp: SingularIvp,
}

/// Catalogue of all extensions at the given parameters (with `l` values for
/// the canonical bundle).
pub fn catalogue(params: [f64; 2], ls: &[i32]) -> Result<Vec<CatalogueEntry>> {
    let mut exts = vec![
        BundleExtension::PId,
        BundleExtension::P0Id,
        BundleExtension::P1Bold0,
    ];
    exts.extend(ls.iter().map(|&l| BundleExtension::P1MinusLL(l)));
    exts.into_iter()
        .map(|e| {
            let fam = LocalFamily::monopole(e, params[0], params[1]);
            let spec = fam.default_geometry();
            let ivp = Launcher::new(e, &spec)?.build_ivp(&fam)?;
            let y0_formula = match e {
                BundleExtension::PId => vec!["xi", "9/8 (xi^2 - 1) - chi", "xi", "chi"],
                BundleExtension::P0Id => vec!["eps", "-delta/sqrt(3)", "-eps/2", "delta"],
                BundleExtension::P1Bold0 => vec!["1", "eps_prime", "0", "delta_prime"],
                BundleExtension::P1MinusLL(l) if l > 0 => {
                    vec![
                        "1 - 2l",
                        "-(1/l) alpha beta sqrt((U1-U0)/(U1+U0))",
                        "alpha",
                        "beta",
                    ]
                }
                BundleExtension::P1MinusLL(_) => vec![
                    "1 - 2l' (l' = 1 - l, swapped factors)",
                    "-(1/l') alpha beta sqrt((U1+U0)/(U1-U0))",
                    "alpha",
                    "beta",
                ],
            };
            let n = e.param_names();
            Ok(CatalogueEntry {
                extension: e,
                geometry: spec.kind,
                param_names: [n[0].to_string(), n[1].to_string()],
                y0_formula: y0_formula.into_iter().map(String::from).collect(),
                ivp,
            })
        })
        .collect()
}
