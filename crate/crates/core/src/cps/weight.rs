use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::Serialize;

use crate::comb::Interval;
use crate::error::{Error, Result};
use crate::exactnum::QuadValue;
use crate::linalg::{gram_report, GramReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Indicator,
    Tent,
    /// `g * g~` for `g = 1[-a/2, a/2] + 1[-a/4, a/4]`, rescaled to peak `height`
    AutoconvStep,
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightKind::Indicator => "indicator",
            WeightKind::Tent => "tent",
            WeightKind::AutoconvStep => "autoconv_step",
        })
    }
}

impl FromStr for WeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "indicator" => Ok(WeightKind::Indicator),
            "tent" => Ok(WeightKind::Tent),
            "autoconv_step" => Ok(WeightKind::AutoconvStep),
            other => Err(Error::parse(format!("unknown weight kind {other:?} (indicator, tent, autoconv_step)"))),
        }
    }
}

/// Compactly supported weight function on internal space.
///
/// Tent and autoconv_step are centred at 0 and positive definite; the
/// indicator may sit on any closed interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightFn {
    kind: WeightKind,
    lo: f64,
    hi: f64,
    height: f64,
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Length of `[-l1/2, l1/2] ∩ [t - l2/2, t + l2/2]`.
fn overlap(l1: f64, l2: f64, t: f64) -> f64 {
    ((l1 / 2.0).min(t + l2 / 2.0) - (-l1 / 2.0).max(t - l2 / 2.0)).max(0.0)
}

impl WeightFn {
    pub fn indicator(lo: f64, hi: f64, height: f64) -> Result<Self> {
        Self::checked(WeightKind::Indicator, lo, hi, height)
    }

    pub fn tent(halfwidth: f64, height: f64) -> Result<Self> {
        Self::checked(WeightKind::Tent, -halfwidth, halfwidth, height)
    }

    pub fn autoconv_step(halfwidth: f64, height: f64) -> Result<Self> {
        Self::checked(WeightKind::AutoconvStep, -halfwidth, halfwidth, height)
    }

    pub fn new(kind: WeightKind, halfwidth: f64, height: f64) -> Result<Self> {
        Self::checked(kind, -halfwidth, halfwidth, height)
    }

    fn checked(kind: WeightKind, lo: f64, hi: f64, height: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Validation(format!("weight support [{lo}, {hi}] must be a proper interval")));
        }
        if !(height.is_finite() && height >= 0.0) {
            return Err(Error::Validation(format!("weight height must be finite and >= 0, got {height}")));
        }
        Ok(WeightFn { kind, lo, hi, height })
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn support(&self) -> Interval {
        Interval { lo: self.lo, hi: self.hi }
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    /// Positive definiteness is known by construction (autoconvolutions).
    pub fn pd_certified(&self) -> bool {
        self.kind != WeightKind::Indicator
    }

    /// `h(t)`, zero outside the closed support.
    pub fn eval(&self, t: f64) -> f64 {
        if t < self.lo || t > self.hi {
            return 0.0;
        }
        match self.kind {
            WeightKind::Indicator => self.height,
            WeightKind::Tent => (self.height * (1.0 - t.abs() / self.hi)).max(0.0),
            WeightKind::AutoconvStep => {
                let a = self.hi;
                let t = t.abs();
                let s = overlap(a, a, t) + 2.0 * overlap(a, a / 2.0, t) + overlap(a / 2.0, a / 2.0, t);
                self.height * s / (2.5 * a)
            }
        }
    }

    /// `h(x)` with support membership decided exactly.
    pub fn eval_exact(&self, x: &QuadValue) -> f64 {
        let pos = x.to_f64();
        if !self.support().contains(x, pos) {
            return 0.0;
        }
        self.eval(pos.clamp(self.lo, self.hi))
    }

    /// `∫ h(t) e^{-2πikt} dt` in closed form.
    pub fn fourier(&self, k: f64) -> Complex<f64> {
        match self.kind {
            WeightKind::Indicator => {
                let len = self.hi - self.lo;
                let mid = (self.hi + self.lo) / 2.0;
                Complex::from_polar(self.height * len * sinc(len * k), -2.0 * PI * k * mid)
            }
            WeightKind::Tent => {
                let w = self.hi;
                Complex::new(self.height * w * sinc(w * k).powi(2), 0.0)
            }
            WeightKind::AutoconvStep => {
                let a = self.hi;
                let g = a * sinc(a * k) + a / 2.0 * sinc(a * k / 2.0);
                Complex::new(self.height * g * g / (2.5 * a), 0.0)
            }
        }
    }
}

/// Free-function form of [`WeightFn::eval`].
pub fn weight_eval(h: &WeightFn, t: f64) -> f64 {
    h.eval(t)
}

/// Free-function form of [`WeightFn::fourier`].
pub fn weight_ft(h: &WeightFn, k: f64) -> Complex<f64> {
    h.fourier(k)
}

/// Gram test of `[h(t_i - t_j)]` on `samples` equispaced points spanning
/// twice the support, at tolerance `1e-8 * trace`.
pub fn check_pd_weight(h: &WeightFn, samples: usize) -> Result<GramReport> {
    if samples < 2 {
        return Err(Error::domain("check_pd_weight needs at least 2 samples"));
    }
    let len = h.hi - h.lo;
    let start = (h.hi + h.lo) / 2.0 - len;
    let t: Vec<f64> = (0..samples).map(|i| start + 2.0 * len * i as f64 / (samples - 1) as f64).collect();
    let m: Vec<Vec<Complex<f64>>> = t.iter().map(|&ti| t.iter().map(|&tj| Complex::new(h.eval(ti - tj), 0.0)).collect()).collect();
    gram_report(&m, 1e-8, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad_ft(h: &WeightFn, k: f64) -> Complex<f64> {
        // composite Simpson; h is piecewise linear with few kinks
        let n = 200_000;
        let (a, b) = (h.lo, h.hi);
        let step = (b - a) / n as f64;
        let f = |t: f64| Complex::from_polar(h.eval(t), -2.0 * PI * k * t);
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * step) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * step / 3.0
    }

    #[test]
    fn tent_values() {
        let h = WeightFn::tent(1.0, 1.0).unwrap();
        assert_eq!(h.eval(0.0), 1.0);
        assert_eq!(h.eval(1.0), 0.0);
        assert_eq!(h.eval(-1.0), 0.0);
        assert_eq!(h.eval(0.5), 0.5);
        assert_eq!(h.eval(3.0), 0.0);
        assert_eq!(h.fourier(0.0).re, 1.0);
        assert!(h.fourier(1.0).norm() < 1e-15);
        assert!(quad_ft(&h, 1.0).norm() <= 1e-10);
    }

    #[test]
    fn indicator_zero_at_one() {
        let h = WeightFn::indicator(-0.5, 0.5, 1.0).unwrap();
        assert!(h.fourier(1.0).norm() < 1e-15);
        assert_eq!(h.eval(0.5), 1.0);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let cases =
            [WeightFn::tent(0.8, 2.0).unwrap(), WeightFn::autoconv_step(1.3, 1.0).unwrap(), WeightFn::indicator(0.1, 0.9, 1.5).unwrap()];
        for h in cases {
            for k in [0.0, 0.37, 1.0, 2.6] {
                let d = (h.fourier(k) - quad_ft(&h, k)).norm();
                assert!(d < 1e-8, "{:?} k={k}: {d}", h.kind());
            }
        }
    }

    #[test]
    fn autoconv_step_shape() {
        let h = WeightFn::autoconv_step(2.0, 1.0).unwrap();
        assert!((h.eval(0.0) - 1.0).abs() < 1e-15);
        assert_eq!(h.eval(2.0), 0.0);
        assert!(h.eval(1.0) > 0.0 && h.eval(1.0) < h.eval(0.5));
        assert!(h.pd_certified());
    }

    #[test]
    fn exact_support_edges() {
        let h = WeightFn::indicator(0.0, 1.0, 1.0).unwrap();
        assert_eq!(h.eval_exact(&QuadValue::one()), 1.0);
        let just_out = "1+1/1000000000000*sqrt(2)".parse::<QuadValue>().unwrap();
        assert_eq!(h.eval_exact(&just_out), 0.0);
    }

    #[test]
    fn pd_checks() {
        assert!(check_pd_weight(&WeightFn::tent(1.0, 1.0).unwrap(), 16).unwrap().pass);
        assert!(check_pd_weight(&WeightFn::autoconv_step(1.0, 1.0).unwrap(), 24).unwrap().pass);
        assert!(!check_pd_weight(&WeightFn::indicator(-0.5, 0.5, 1.0).unwrap(), 8).unwrap().pass);
        assert!(check_pd_weight(&WeightFn::tent(1.0, 0.0).unwrap(), 8).unwrap().pass);
        assert!(check_pd_weight(&WeightFn::tent(1.0, 1.0).unwrap(), 1).is_err());
    }

    #[test]
    fn indicator_gram_matches_eigen_oracle() {
        // 8 samples on [-1, 1]: step 2/7, so h(t_i - t_j) = 1 iff |i - j| <= 1
        let r = check_pd_weight(&WeightFn::indicator(-0.5, 0.5, 1.0).unwrap(), 8).unwrap();
        let expected = 1.0 + 2.0 * (8.0 * PI / 9.0).cos();
        assert!((r.min_eigenvalue - expected).abs() < 1e-10);
    }
}
