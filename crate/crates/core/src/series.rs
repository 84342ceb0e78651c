//! Truncated Laurent series in one variable.
//!
//! A [`Series`] stores `sum_i c[i] t^(val + i)` together with the implicit
//! error term `O(t^(val + len))`. Arithmetic propagates the error order, so
//! the result of any chain of operations reports how many coefficients are
//! actually known.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    val: i32,
    c: Vec<f64>,
}

impl Series {
    pub fn new(val: i32, c: Vec<f64>) -> Self {
        Series { val, c }
    }

    /// Exact constant, stored up to (but excluding) `t^prec`.
    pub fn constant(x: f64, prec: i32) -> Self {
        let n = prec.max(0) as usize;
        let mut c = vec![0.0; n];
        if n > 0 {
            c[0] = x;
        }
        Series { val: 0, c }
    }

    pub fn monomial(coef: f64, power: i32, prec: i32) -> Self {
        let n = (prec - power).max(0) as usize;
        let mut c = vec![0.0; n];
        if n > 0 {
            c[0] = coef;
        }
        Series { val: power, c }
    }

    /// The series of `t` itself.
    pub fn var(prec: i32) -> Self {
        Self::monomial(1.0, 1, prec)
    }

    /// Taylor series with coefficients of `t^0, t^1, ...`.
    pub fn taylor(c: Vec<f64>) -> Self {
        Series { val: 0, c }
    }

    pub fn val(&self) -> i32 {
        self.val
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// Exponent of the error term.
    pub fn prec(&self) -> i32 {
        self.val + self.c.len() as i32
    }

    /// Coefficient of `t^k`. Panics if `k` lies beyond the known precision.
    pub fn coeff(&self, k: i32) -> f64 {
        assert!(
            k < self.prec(),
            "coefficient t^{k} unknown (precision t^{})",
            self.prec()
        );
        if k < self.val {
            0.0
        } else {
            self.c[(k - self.val) as usize]
        }
    }

    pub fn truncate(&self, prec: i32) -> Self {
        if prec >= self.prec() {
            return self.clone();
        }
        let n = (prec - self.val).max(0) as usize;
        Series {
            val: self.val,
            c: self.c[..n].to_vec(),
        }
    }

    /// Taylor coefficients `t^0..t^(n-1)`; requires `val >= 0` and enough precision.
    pub fn taylor_coeffs(&self, n: usize) -> Vec<f64> {
        (0..n as i32).map(|k| self.coeff(k)).collect()
    }

    /// Multiply by `t^k`.
    pub fn shift(&self, k: i32) -> Self {
        Series {
            val: self.val + k,
            c: self.c.clone(),
        }
    }

    /// `f(k t)` from `f(t)`.
    pub fn rescale_arg(&self, k: f64) -> Self {
        let c = self
            .c
            .iter()
            .enumerate()
            .map(|(i, a)| a * k.powi(self.val + i as i32))
            .collect();
        Series { val: self.val, c }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for a in self.c.iter().rev() {
            acc = acc * t + a;
        }
        acc * t.powi(self.val)
    }

    pub fn recip(&self) -> Self {
        assert!(
            !self.c.is_empty() && self.c[0] != 0.0,
            "reciprocal of a series with vanishing leading term"
        );
        let n = self.c.len();
        let a = &self.c;
        let mut b = vec![0.0; n];
        b[0] = 1.0 / a[0];
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| a[j] * b[k - j]).sum();
            b[k] = -s * b[0];
        }
        Series {
            val: -self.val,
            c: b,
        }
    }

    /// Real power. The leading coefficient must be positive and `p * val`
    /// must be an integer.
    pub fn powf(&self, p: f64) -> Self {
        assert!(
            !self.c.is_empty() && self.c[0] > 0.0,
            "power of a series needs a positive leading term"
        );
        let pv = p * self.val as f64;
        assert!(
            (pv - pv.round()).abs() < 1e-12,
            "non-integral valuation in series power"
        );
        let n = self.c.len();
        let a = &self.c;
        let mut b = vec![0.0; n];
        b[0] = a[0].powf(p);
        for k in 1..n {
            let s: f64 = (1..=k)
                .map(|j| (p * j as f64 - (k - j) as f64) * a[j] * b[k - j])
                .sum();
            b[k] = s / (k as f64 * a[0]);
        }
        Series {
            val: pv.round() as i32,
            c: b,
        }
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn derivative(&self) -> Self {
        let c = self
            .c
            .iter()
            .enumerate()
            .map(|(i, a)| a * (self.val + i as i32) as f64)
            .collect();
        Series {
            val: self.val - 1,
            c,
        }
    }

    /// Antiderivative with vanishing constant term. The `t^-1` coefficient
    /// must be zero.
    pub fn integral(&self) -> Self {
        let c = self
            .c
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let e = self.val + i as i32 + 1;
                if e == 0 {
                    assert!(a.abs() < 1e-12, "logarithmic term in series integral");
                    0.0
                } else {
                    a / e as f64
                }
            })
            .collect();
        Series {
            val: self.val + 1,
            c,
        }
    }

    /// `self(inner(t))` for `self` regular at zero and `inner` vanishing at zero.
    pub fn compose(&self, inner: &Series) -> Self {
        assert!(self.val >= 0, "outer series must be regular");
        assert!(inner.val >= 1, "inner series must vanish at zero");
        let n = self.c.len();
        let limit = (self.prec()) * inner.val;
        let big = limit + inner.prec() + 1;
        if n == 0 {
            return Series {
                val: limit,
                c: vec![],
            };
        }
        let mut acc = Series::constant(self.c[n - 1], big);
        for i in (0..n - 1).rev() {
            acc = acc * inner.clone() + self.c[i];
        }
        for _ in 0..self.val {
            acc = acc * inner.clone();
        }
        acc.truncate(limit)
    }

    /// Compositional inverse of a series `b1 t + b2 t^2 + ...` with `b1 != 0`.
    pub fn revert(&self) -> Self {
        assert!(
            self.val == 1 && !self.c.is_empty() && self.c[0] != 0.0,
            "reversion needs a simple zero"
        );
        let p = self.prec();
        let b1 = self.c[0];
        let var = Series::var(p);
        let mut g = var.clone() * (1.0 / b1);
        for _ in 0..p {
            let h = self.compose(&g) - g.clone() * b1;
            g = (var.clone() - h) * (1.0 / b1);
        }
        g
    }

    /// Largest absolute coefficient among exponents below `k`.
    pub fn max_abs_below(&self, k: i32) -> f64 {
        self.c
            .iter()
            .enumerate()
            .filter(|(i, _)| self.val + (*i as i32) < k)
            .map(|(_, a)| a.abs())
            .fold(0.0, f64::max)
    }
}

impl Add for Series {
    type Output = Series;
    fn add(self, rhs: Series) -> Series {
        let val = self.val.min(rhs.val);
        let prec = self.prec().min(rhs.prec());
        let n = (prec - val).max(0) as usize;
        let mut c = vec![0.0; n];
        for (i, a) in self.c.iter().enumerate() {
            let k = (self.val + i as i32 - val) as usize;
            if k < n {
                c[k] += a;
            }
        }
        for (i, a) in rhs.c.iter().enumerate() {
            let k = (rhs.val + i as i32 - val) as usize;
            if k < n {
                c[k] += a;
            }
        }
        Series { val, c }
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(self) -> Series {
        Series {
            val: self.val,
            c: self.c.into_iter().map(|a| -a).collect(),
        }
    }
}

impl Sub for Series {
    type Output = Series;
    fn sub(self, rhs: Series) -> Series {
        self + (-rhs)
    }
}

impl Mul for Series {
    type Output = Series;
    fn mul(self, rhs: Series) -> Series {
        let n = self.c.len().min(rhs.c.len());
        let mut c = vec![0.0; n];
        for (i, a) in self.c.iter().take(n).enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in rhs.c.iter().take(n - i).enumerate() {
                c[i + j] += a * b;
            }
        }
        Series {
            val: self.val + rhs.val,
            c,
        }
    }
}

impl Div for Series {
    type Output = Series;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Series) -> Series {
        self * rhs.recip()
    }
}

impl Add<f64> for Series {
    type Output = Series;
    fn add(mut self, x: f64) -> Series {
        if x == 0.0 || self.prec() <= 0 {
            return self;
        }
        if self.val > 0 {
            let mut c = vec![0.0; self.val as usize];
            c.extend_from_slice(&self.c);
            self = Series { val: 0, c };
        }
        let k = (-self.val) as usize;
        self.c[k] += x;
        self
    }
}

impl Sub<f64> for Series {
    type Output = Series;
    fn sub(self, x: f64) -> Series {
        self + (-x)
    }
}

impl Mul<f64> for Series {
    type Output = Series;
    fn mul(self, x: f64) -> Series {
        Series {
            val: self.val,
            c: self.c.into_iter().map(|a| a * x).collect(),
        }
    }
}

impl Div<f64> for Series {
    type Output = Series;
    fn div(self, x: f64) -> Series {
        self * (1.0 / x)
    }
}

/// Number-like values the ODE right-hand sides are written over, so the same
/// transcription serves pointwise evaluation (`f64`) and order-by-order
/// series matching ([`Series`]).
pub trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn recip(&self) -> Self;
}

impl Scalar for f64 {
    fn recip(&self) -> Self {
        1.0 / self
    }
}

impl Scalar for Series {
    fn recip(&self) -> Self {
        Series::recip(self)
    }
}

/// Taylor series of `sinh(k s)/s`, `cosh(k s)` and friends are built from
/// these factorial tables.
pub fn exp_like(k: f64, n: usize, odd: bool) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let mut fact = 1.0;
    for m in 0..(2 * n + 2) {
        if m > 0 {
            fact *= m as f64;
        }
        let want_odd = m % 2 == 1;
        if want_odd == odd {
            let idx = if odd { (m - 1) / 2 } else { m / 2 };
            if idx < n {
                out[idx] = k.powi(m as i32) / fact;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn geometric(n: usize) -> Series {
        // 1/(1-t)
        Series::taylor(vec![1.0; n])
    }

    #[test]
    fn reciprocal_of_one_minus_t() {
        let s = Series::taylor(vec![1.0, -1.0, 0.0, 0.0, 0.0]);
        let r = s.recip();
        for k in 0..5 {
            assert_abs_diff_eq!(r.coeff(k), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn laurent_precision_tracking() {
        let t = Series::var(6);
        let inv = t.recip();
        assert_eq!(inv.val(), -1);
        assert_eq!(inv.prec(), 4);
        let prod = inv * geometric(6);
        assert_eq!(prod.val(), -1);
        assert_eq!(prod.prec(), 4);
        assert_abs_diff_eq!(prod.coeff(-1), 1.0);
        assert_abs_diff_eq!(prod.coeff(3), 1.0);
    }

    #[test]
    fn sqrt_of_square() {
        let a = Series::taylor(vec![2.0, 0.3, -0.7, 0.1, 0.05, 0.0, 0.2]);
        let b = (a.clone() * a.clone()).sqrt();
        for k in 0..7 {
            assert_abs_diff_eq!(b.coeff(k), a.coeff(k), epsilon = 1e-13);
        }
    }

    #[test]
    fn sinh_table() {
        // sinh(3s) = 3 s + 27/6 s^3 + ...
        let c = exp_like(3.0, 3, true);
        assert_abs_diff_eq!(c[0], 3.0);
        assert_abs_diff_eq!(c[1], 4.5);
        assert_abs_diff_eq!(c[2], 243.0 / 120.0);
        let ch = exp_like(3.0, 2, false);
        assert_abs_diff_eq!(ch[0], 1.0);
        assert_abs_diff_eq!(ch[1], 4.5);
    }

    #[test]
    fn reversion_of_sine_gives_arcsine() {
        let n = 9;
        let sin: Vec<f64> = (0..n)
            .map(|i| {
                let k = i + 1;
                if k % 2 == 0 {
                    0.0
                } else {
                    let f: f64 = (1..=k).map(|j| j as f64).product();
                    (if (k / 2) % 2 == 0 { 1.0 } else { -1.0 }) / f
                }
            })
            .collect();
        let s = Series::new(1, sin);
        let asin = s.revert();
        assert_abs_diff_eq!(asin.coeff(1), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(asin.coeff(3), 1.0 / 6.0, epsilon = 1e-14);
        assert_abs_diff_eq!(asin.coeff(5), 3.0 / 40.0, epsilon = 1e-14);
        assert_abs_diff_eq!(asin.coeff(7), 5.0 / 112.0, epsilon = 1e-13);
    }

    #[test]
    fn add_constant_to_positive_valuation() {
        let s = Series::var(4) + 2.0;
        assert_eq!(s.val(), 0);
        assert_abs_diff_eq!(s.coeff(0), 2.0);
        assert_abs_diff_eq!(s.coeff(1), 1.0);
        assert_eq!(s.prec(), 4);
    }

    #[test]
    fn integral_inverts_derivative() {
        let a = Series::taylor(vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        let b = a.derivative().integral();
        for k in 0..5 {
            assert_abs_diff_eq!(a.coeff(k), b.coeff(k), epsilon = 1e-15);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn coeffs() -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(-2.0f64..2.0, 8)
        }

        proptest! {
            #[test]
            fn product_then_quotient(a in coeffs(), mut b in coeffs()) {
                b[0] = 1.0 + b[0].abs();
                let sa = Series::taylor(a.clone());
                let sb = Series::taylor(b);
                let q = (sa.clone() * sb.clone()) / sb;
                for k in 0..8 {
                    prop_assert!((q.coeff(k) - a[k as usize]).abs() < 1e-9 * (1.0 + a[k as usize].abs()));
                }
            }

            #[test]
            fn compose_with_reversion_is_identity(mut a in coeffs()) {
                a[0] = 1.0 + a[0].abs();
                let f = Series::new(1, a);
                let g = f.revert();
                let id = f.compose(&g);
                prop_assert!((id.coeff(1) - 1.0).abs() < 1e-9);
                for k in 2..id.prec() {
                    prop_assert!(id.coeff(k).abs() < 1e-7);
                }
            }

            #[test]
            fn evaluation_matches_power_law(mut a in coeffs(), p in -1.5f64..1.5, t in 0.0f64..0.01) {
                a[0] = 1.0 + a[0].abs();
                let s = Series::taylor(a);
                let lhs = s.powf(p).eval(t);
                let rhs = s.eval(t).powf(p);
                prop_assert!((lhs - rhs).abs() < 1e-8 * rhs.abs().max(1.0));
            }
        }
    }
}
