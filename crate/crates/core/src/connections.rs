//! Invariant connections and Higgs fields on P₁: curvature, gauge action,
//! reducible solutions and the quadratic-decay test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::ode::{dopri5, OdeOptions};

/// Field order used by every per-coefficient array.
pub const FIELDS: [&str; 6] = ["a0", "a1", "a2", "b1", "b2", "phi"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConnectionState {
    pub t: f64,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub phi: f64,
}

impl ConnectionState {
    pub fn gauge_fixed(t: f64, a0: f64, a1: f64, a2: f64, phi: f64) -> Self {
        ConnectionState {
            t,
            a0,
            a1,
            a2,
            b1: 0.0,
            b2: 0.0,
            phi,
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.a0, self.a1, self.a2, self.b1, self.b2, self.phi]
    }

    pub fn from_array(t: f64, x: [f64; 6]) -> Self {
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

    /// `a1 b2 − b1 a2`, zero for monopole data.
    pub fn static_constraint(&self) -> f64 {
        self.a1 * self.b2 - self.b1 * self.a2
    }

    /// Image under `(a0, a1, a2, φ) ↦ (a0, −a1, −a2, φ)`.
    pub fn gauge_flip(&self) -> Self {
        gauge_rotate(self, std::f64::consts::PI)
    }

    /// Image under `(a0, a1, a2, φ) ↦ (−a0, a2, a1, φ)` (with `u0 ↦ −u0`).
    pub fn metric_flip(&self) -> Self {
        ConnectionState {
            t: self.t,
            a0: -self.a0,
            a1: self.a2,
            a2: self.a1,
            b1: self.b2,
            b2: self.b1,
            phi: self.phi,
        }
    }
}

/// Rotate `(a1 + i b1, a2 + i b2)` by the common phase `e^{iθ}`.
pub fn gauge_rotate(s: &ConnectionState, theta: f64) -> ConnectionState {
    let (c, sn) = (theta.cos(), theta.sin());
    let rot = |a: f64, b: f64| (c * a - sn * b, sn * a + c * b);
    let (a1, b1) = rot(s.a1, s.b1);
    let (a2, b2) = rot(s.a2, s.b2);
    // Snap rounding residue so that θ = π maps exact states to exact states.
    let snap = |x: f64, scale: f64| if x.abs() < 1e-15 * scale { 0.0 } else { x };
    let sc = s.a1.abs().max(s.b1.abs()).max(s.a2.abs()).max(s.b2.abs());
    ConnectionState {
        a1: snap(a1, sc),
        b1: snap(b1, sc),
        a2: snap(a2, sc),
        b2: snap(b2, sc),
        ..*s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BundleExtension {
    /// Over the S³ of the smoothing.
    #[serde(rename = "P_Id")]
    PId,
    /// Over the S² of the small resolution.
    #[serde(rename = "P_0Id")]
    P0Id,
    /// Over the S² of the small resolution.
    #[serde(rename = "P_1bold0")]
    P1Bold0,
    /// Over the S²×S² of the canonical bundle.
    #[serde(rename = "P_1minusL_L")]
    P1MinusLL(i32),
}

impl std::fmt::Display for BundleExtension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BundleExtension::PId => write!(f, "P_Id"),
            BundleExtension::P0Id => write!(f, "P_0Id"),
            BundleExtension::P1Bold0 => write!(f, "P_1bold0"),
            BundleExtension::P1MinusLL(l) => write!(f, "P_1minusL_L(l={l})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

/// Parity and minimal vanishing order of one coefficient at `t = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldRule {
    pub field: String,
    pub parity: Parity,
    pub order: usize,
}

/// `Σ coef · c_k(field) = rhs` on Taylor coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearRule {
    pub terms: Vec<(String, usize, f64)>,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTable {
    pub fields: Vec<FieldRule>,
    pub linear: Vec<LinearRule>,
}

/// Taylor coefficients of `(a0, a1, a2, b1, b2, φ)` at `t = 0`.
pub type TaylorArrays = [Vec<f64>; 6];

impl BoundaryTable {
    /// First violated rule, if any.
    pub fn check(&self, c: &TaylorArrays, tol: f64) -> std::result::Result<(), String> {
        let idx = |f: &str| FIELDS.iter().position(|x| *x == f).expect("unknown field");
        for r in &self.fields {
            let arr = &c[idx(&r.field)];
            let scale = arr.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            for (k, v) in arr.iter().enumerate() {
                let bad_parity = match r.parity {
                    Parity::Even => k % 2 == 1,
                    Parity::Odd => k % 2 == 0,
                };
                if (k < r.order || bad_parity) && v.abs() > tol * scale {
                    return Err(format!("{}: coefficient of t^{k} is {v:e}", r.field));
                }
            }
        }
        for l in &self.linear {
            let s: f64 = l
                .terms
                .iter()
                .map(|(f, k, a)| a * c[idx(f)].get(*k).copied().unwrap_or(0.0))
                .sum();
            if (s - l.rhs).abs() > tol * (1.0 + l.rhs.abs()) {
                return Err(format!(
                    "linear rule {:?} = {} violated ({s:e})",
                    l.terms, l.rhs
                ));
            }
        }
        Ok(())
    }
}

fn rule(field: &str, parity: Parity, order: usize) -> FieldRule {
    FieldRule {
        field: field.into(),
        parity,
        order,
    }
}

fn lin(terms: &[(&str, usize, f64)], rhs: f64) -> LinearRule {
    LinearRule {
        terms: terms
            .iter()
            .map(|(f, k, a)| (f.to_string(), *k, *a))
            .collect(),
        rhs,
    }
}

fn parity_of(n: i32) -> Parity {
    if n.rem_euclid(2) == 0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

impl BundleExtension {
    /// Parse a family name; `P_1minusL_L` takes its index from `l`.
    pub fn parse(name: &str, l: Option<i32>) -> crate::Result<Self> {
        let ext = match name {
            "P_Id" => BundleExtension::PId,
            "P_0Id" => BundleExtension::P0Id,
            "P_1bold0" => BundleExtension::P1Bold0,
            "P_1minusL_L" => match l {
                Some(l) => return Ok(BundleExtension::P1MinusLL(l)),
                None => return crate::error::domain("P_1minusL_L needs an index l"),
            },
            _ => {
                return Err(crate::Error::Unknown {
                    kind: "family",
                    name: name.into(),
                })
            }
        };
        if l.is_some() {
            return crate::error::domain(format!("{name} takes no index l"));
        }
        Ok(ext)
    }

    pub fn param_names(&self) -> [&'static str; 2] {
        match self {
            BundleExtension::PId => ["xi", "chi"],
            BundleExtension::P0Id => ["eps", "delta"],
            BundleExtension::P1Bold0 => ["eps_prime", "delta_prime"],
            BundleExtension::P1MinusLL(_) => ["alpha", "beta"],
        }
    }

    /// Smoothness conditions at the singular orbit.
    pub fn boundary_conditions(&self) -> BoundaryTable {
        use Parity::*;
        match *self {
            BundleExtension::PId => BoundaryTable {
                fields: vec![
                    rule("a0", Even, 0),
                    rule("a1", Even, 0),
                    rule("a2", Even, 0),
                    rule("b1", Odd, 1),
                    rule("b2", Odd, 1),
                    rule("phi", Odd, 1),
                ],
                linear: vec![
                    lin(&[("b1", 1, 1.0), ("b2", 1, 1.0)], 0.0),
                    lin(&[("a1", 0, 1.0), ("a2", 0, -1.0), ("a0", 0, -1.0)], 0.0),
                    lin(&[("a1", 0, 1.0), ("a2", 0, 1.0)], 1.0),
                ],
            },
            BundleExtension::P0Id => BoundaryTable {
                fields: vec![
                    rule("a0", Even, 0),
                    rule("a1", Even, 2),
                    rule("a2", Even, 0),
                    rule("b1", Even, 2),
                    rule("b2", Even, 4),
                    rule("phi", Even, 2),
                ],
                linear: vec![
                    lin(&[("a2", 0, 1.0)], 1.0),
                    lin(&[("a0", 0, 1.0)], -1.0),
                    lin(&[("a0", 2, 1.0), ("a2", 2, 2.0)], 0.0),
                ],
            },
            BundleExtension::P1Bold0 => BoundaryTable {
                fields: vec![
                    rule("a0", Even, 0),
                    rule("a1", Even, 0),
                    rule("a2", Even, 2),
                    rule("b1", Even, 0),
                    rule("b2", Even, 2),
                    rule("phi", Even, 0),
                ],
                linear: vec![lin(&[("a0", 0, 1.0)], 1.0)],
            },
            BundleExtension::P1MinusLL(l) => {
                // P_{L,m} with L = 1 − l, m = l.
                let (o1, o2) = if l >= 1 { (l, l - 1) } else { (-l, 1 - l) };
                BoundaryTable {
                    fields: vec![
                        rule("a0", Even, 0),
                        rule("a1", parity_of(o1), o1 as usize),
                        rule("a2", parity_of(o2), o2 as usize),
                        rule("b1", parity_of(o1), o1 as usize),
                        rule("b2", parity_of(o2), o2 as usize),
                        rule("phi", Even, 0),
                    ],
                    linear: vec![lin(&[("a0", 0, 1.0)], (1 - 2 * l) as f64)],
                }
            }
        }
    }
}

/// Coefficients of the curvature two-form in the standard Sasaki-Einstein
/// frame, plus the `dt ∧` terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub omega3: f64,
    pub omega2: f64,
    pub omega0: f64,
    pub omega1: f64,
    /// `(3/2)(a0 − 1)(a1, b1)`, coefficient of the `η`-wedge terms in the first factor.
    pub eta1: [f64; 2],
    /// `(3/2)(a0 + 1)(a2, b2)`.
    pub eta2: [f64; 2],
    /// `(ȧ0, ȧ1, ḃ1, ȧ2, ḃ2)`.
    pub dt: [f64; 5],
    /// `t²|F|` in the cone metric.
    pub sup_t2f: f64,
}

impl CurvatureReport {
    pub fn link_norm(&self) -> f64 {
        let v = [
            self.omega3,
            self.omega2,
            self.omega0,
            self.omega1,
            self.eta1[0],
            self.eta1[1],
            self.eta2[0],
            self.eta2[1],
        ];
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dt_norm(&self) -> f64 {
        self.dt.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_flat(&self, tol: f64) -> bool {
        self.link_norm() <= tol && self.dt_norm() <= tol
    }
}

/// Curvature of the connection with `n = 1`. `derivs` are the
/// `t`-derivatives of the state. Lie-algebra norm `−tr(XY)/2`, link forms of
/// unit norm; link two-forms scale as `t⁻²` and `dt ∧` one-forms as `t⁻¹` in
/// the cone metric.
pub fn curvature(s: &ConnectionState, derivs: &ConnectionState, t: f64) -> CurvatureReport {
    let (a0, a1, a2, b1, b2) = (s.a0, s.a1, s.a2, s.b1, s.b2);
    let mut r = CurvatureReport {
        omega3: 3.0 * (a1 * a2 + b1 * b2),
        omega2: 3.0 * (a1 * b2 - b1 * a2),
        omega0: 1.5 * (a1 * a1 + b1 * b1 + a2 * a2 + b2 * b2 - 1.0),
        omega1: 1.5 * (-a1 * a1 - b1 * b1 + a2 * a2 + b2 * b2 + a0),
        eta1: [1.5 * (a0 - 1.0) * a1, 1.5 * (a0 - 1.0) * b1],
        eta2: [1.5 * (a0 + 1.0) * a2, 1.5 * (a0 + 1.0) * b2],
        dt: [derivs.a0, derivs.a1, derivs.b1, derivs.a2, derivs.b2],
        sup_t2f: 0.0,
    };
    let link = r.link_norm();
    let mixed = t * r.dt_norm();
    r.sup_t2f = (link * link + mixed * mixed).sqrt();
    r
}

/// Reducible solution `a1 = a2 = b1 = b2 = 0`, `a0 = (C − 2u0u1)/μ²`,
/// `φ = φ0 − 3I` with `İ = v0/μ²`. On type II backgrounds `I` is the odd
/// finite-part primitive (the `t⁻²` pole of `v0/μ²` is removed analytically).
pub fn abelian_solution(geo: &Geometry, c: f64, phi0: f64, t: f64) -> ConnectionState {
    let h = geo.sample(t);
    let a0 = (c - 2.0 * h.u0 * h.u1) / (h.mu * h.mu);
    let i = if geo.spec().kind == crate::geometry::GeometryKind::Smoothing {
        abelian_i(geo, t)
    } else {
        0.0
    };
    ConnectionState::gauge_fixed(t, a0, 0.0, 0.0, phi0 - 3.0 * i)
}

/// The closed-form instanton on the smoothing: `a0 = φ = 0`,
/// `a1 = a2 = ½ √(4 / (3λ(v3 − v0)))`.
pub fn explicit_instanton(geo: &Geometry, t: f64) -> ConnectionState {
    let h = geo.sample(t);
    let a = 0.5 * (4.0 / (3.0 * h.lambda * (h.v3 - h.v0))).sqrt();
    ConnectionState::gauge_fixed(t, 0.0, a, a, 0.0)
}

fn abelian_i(geo: &Geometry, t: f64) -> f64 {
    let g = geo.series(24).expect("geometry series");
    let f = g.v0.clone() / (g.mu.clone() * g.mu.clone());
    // f = L t^-2 + regular; I = −L/t + ∫_0^t (f − L s^-2) ds.
    let lead = f.coeff(-2);
    assert!(f.coeff(-1).abs() < 1e-12, "unexpected t^-1 term in v0/μ²");
    let reg = crate::series::Series::new(0, (0..20).map(|k| f.coeff(k)).collect());
    let prim = reg.integral();
    let ta = t.min(geo.t_series());
    let mut i = prim.eval(ta) - lead / ta;
    if t > ta {
        let o = OdeOptions {
            rtol: 1e-12,
            atol: 1e-14,
            ..Default::default()
        };
        let r = dopri5(
            |s, _, d| {
                let h = geo.sample(s);
                d[0] = h.v0 / (h.mu * h.mu);
            },
            ta,
            &[i],
            t,
            &o,
            |_, _| None,
        );
        i = r.nodes.last().expect("nodes").y[0];
    }
    i
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayWitness {
    pub quantity: String,
    pub t: f64,
    pub value: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub bounded: bool,
    pub max_abs: [f64; 5],
    pub slopes: [f64; 5],
    pub witness: Option<DecayWitness>,
}

pub const DECAY_NAMES: [&str; 5] = ["a0", "a1", "a2", "t*a1*phi", "t*a2*phi"];

/// Boundedness of `a0, a1, a2, t a1 φ, t a2 φ` along a sampled trajectory:
/// all below `threshold` and no last-quartile log-log slope above `0.05`.
pub fn decay_report(samples: &[ConnectionState], threshold: f64) -> Result<DecayReport> {
    if samples.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "{} samples, need at least 10",
            samples.len()
        )));
    }
    let q = |s: &ConnectionState| -> [f64; 5] {
        let m1 = s.a1.hypot(s.b1);
        let m2 = s.a2.hypot(s.b2);
        [
            s.a0.abs(),
            m1,
            m2,
            (s.t * m1 * s.phi).abs(),
            (s.t * m2 * s.phi).abs(),
        ]
    };
    let mut max_abs = [0.0f64; 5];
    let mut witness = None;
    for s in samples {
        let v = q(s);
        for k in 0..5 {
            if !(v[k] < threshold) && witness.is_none() {
                witness = Some(DecayWitness {
                    quantity: DECAY_NAMES[k].into(),
                    t: s.t,
                    value: v[k],
                    reason: format!("exceeds threshold {threshold:e}"),
                });
            }
            max_abs[k] = max_abs[k].max(v[k]);
        }
    }
    let tail = &samples[samples.len() - samples.len() / 4..];
    let mut slopes = [0.0f64; 5];
    for k in 0..5 {
        let pts: Vec<(f64, f64)> = tail
            .iter()
            .filter(|s| s.t > 0.0)
            .map(|s| (s.t.ln(), q(s)[k].max(1e-300).ln()))
            .collect();
        slopes[k] = fit_slope(&pts);
        let last = q(tail.last().expect("tail"))[k];
        // Growth only matters for quantities that are not already negligible.
        if slopes[k] >= 0.05 && last > 1e-8 && witness.is_none() {
            witness = Some(DecayWitness {
                quantity: DECAY_NAMES[k].into(),
                t: tail.last().expect("tail").t,
                value: last,
                reason: format!("last-quartile log-slope {:.3}", slopes[k]),
            });
        }
    }
    Ok(DecayReport {
        bounded: witness.is_none(),
        max_abs,
        slopes,
        witness,
    })
}

fn fit_slope(p: &[(f64, f64)]) -> f64 {
    if p.len() < 2 {
        return 0.0;
    }
    let n = p.len() as f64;
    let mx = p.iter().map(|x| x.0).sum::<f64>() / n;
    let my = p.iter().map(|x| x.1).sum::<f64>() / n;
    let sxx: f64 = p.iter().map(|x| (x.0 - mx).powi(2)).sum();
    let sxy: f64 = p.iter().map(|x| (x.0 - mx) * (x.1 - my)).sum();
    if sxx <= 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
