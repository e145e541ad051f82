//! Cut-and-project schemes over `Q(sqrt(m))` and their weighted model combs.
//!
//! A planar scheme is the lattice `{a v1 + b v2}` in `R x R` where every
//! generator has the form `(x, x*)` with `x*` the Galois conjugate of `x`.
//! A point `x` of a model comb carries the weight `h(x*)`. Periodic
//! schemes are the degenerate case with a trivial internal space.

mod weight;

use num_complex::Complex;
use serde::Serialize;

pub use weight::{check_pd_weight, weight_eval, weight_ft, WeightFn, WeightKind};

use crate::comb::{Interval, WeightedComb};
use crate::config::KvConfig;
use crate::error::{Error, Result};
use crate::exactnum::QuadValue;
use crate::scalar::Scalar;

/// Lattice generator `(x, x*)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeVector {
    pub physical: QuadValue,
    pub internal: QuadValue,
}

impl LatticeVector {
    /// `(x, star(x))`.
    pub fn from_physical(x: QuadValue) -> Self {
        let internal = x.star();
        LatticeVector { physical: x, internal }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
enum Lattice {
    Planar([LatticeVector; 2]),
    Periodic(QuadValue),
}

/// Validated cut-and-project scheme with an internal-space window.
#[derive(Debug, Clone, PartialEq)]
pub struct CPScheme {
    name: String,
    m: u32,
    lattice: Lattice,
    window: Interval,
}

/// Named presets accepted by [`CPScheme::preset`].
pub const PRESETS: [&str; 3] = ["zroot2", "fibonacci", "integer"];

fn q(s: &str) -> QuadValue {
    s.parse().expect("preset literal")
}

impl CPScheme {
    /// Planar scheme from two physical generators; internals are their stars.
    pub fn planar(name: impl Into<String>, m: u32, v1: QuadValue, v2: QuadValue, window: Interval) -> Result<Self> {
        Self::from_vectors(name, m, LatticeVector::from_physical(v1), LatticeVector::from_physical(v2), window)
    }

    /// Planar scheme from explicit `(physical, internal)` pairs.
    pub fn from_vectors(name: impl Into<String>, m: u32, v1: LatticeVector, v2: LatticeVector, window: Interval) -> Result<Self> {
        if m < 2 || !crate::exactnum::is_square_free(m as u64) {
            return Err(Error::Validation(format!("radicand {m} must be square-free and > 1")));
        }
        for v in [&v1, &v2] {
            for c in [&v.physical, &v.internal] {
                if c.radicand() != 0 && c.radicand() != m {
                    return Err(Error::MixedRadicand(m, c.radicand()));
                }
            }
            if v.internal != v.physical.star() {
                return Err(Error::Validation(format!("internal part {} is not star({})", v.internal, v.physical)));
            }
        }
        let det = v1.physical.checked_mul(&v2.internal)?.checked_sub(&v1.internal.checked_mul(&v2.physical)?)?;
        if det.is_zero() {
            return Err(Error::Validation("singular basis: determinant is zero".into()));
        }
        check_window(&window)?;
        Ok(CPScheme { name: name.into(), m, lattice: Lattice::Planar([v1, v2]), window })
    }

    /// Degenerate scheme `spacing * Z` with trivial internal space.
    pub fn periodic(spacing: QuadValue) -> Result<Self> {
        if spacing.signum() != std::cmp::Ordering::Greater {
            return Err(Error::Validation("periodic spacing must be > 0".into()));
        }
        let name = if spacing == QuadValue::one() { "integer".to_string() } else { format!("periodic({spacing})") };
        Ok(CPScheme { name, m: spacing.radicand(), lattice: Lattice::Periodic(spacing), window: Interval::centered(0.5) })
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "zroot2" => Self::planar("zroot2", 2, QuadValue::one(), q("sqrt(2)"), Interval::centered(1.0)),
            "fibonacci" => {
                let tau = q("1/2+1/2*sqrt(5)");
                Self::planar("fibonacci", 5, QuadValue::one(), tau.clone(), Interval::centered(tau.to_f64() / 2.0))
            }
            "integer" => Self::periodic(QuadValue::one()),
            other => Err(Error::Validation(format!("unknown preset {other:?}; expected one of {PRESETS:?}"))),
        }
    }

    /// Default weight of the preset family: indicator for periodic schemes,
    /// a tent filling the window otherwise.
    pub fn default_weight(&self) -> WeightFn {
        match self.lattice {
            Lattice::Periodic(_) => WeightFn::indicator(self.window.lo, self.window.hi, 1.0),
            Lattice::Planar(_) => WeightFn::tent(self.window.length() / 2.0, 1.0),
        }
        .expect("window validated")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn radicand(&self) -> u32 {
        self.m
    }

    pub fn window(&self) -> Interval {
        self.window
    }

    pub fn with_window(mut self, window: Interval) -> Result<Self> {
        check_window(&window)?;
        self.window = window;
        Ok(self)
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.lattice, Lattice::Periodic(_))
    }

    pub fn basis(&self) -> Option<&[LatticeVector; 2]> {
        match &self.lattice {
            Lattice::Planar(b) => Some(b),
            Lattice::Periodic(_) => None,
        }
    }

    /// Exact determinant of `[[x1, x1*], [x2, x2*]]`; for periodic schemes
    /// the spacing.
    pub fn determinant(&self) -> QuadValue {
        match &self.lattice {
            Lattice::Planar([v1, v2]) => &(&v1.physical * &v2.internal) - &(&v1.internal * &v2.physical),
            Lattice::Periodic(s) => s.clone(),
        }
    }

    /// Expected points per unit length: `|W| / |det|`.
    pub fn density(&self) -> f64 {
        match self.lattice {
            Lattice::Planar(_) => self.window.length() / self.determinant().to_f64().abs(),
            Lattice::Periodic(_) => 1.0 / self.determinant().to_f64(),
        }
    }

    /// Internal coordinate of a lattice point with physical part `x`.
    pub fn internal_of(&self, x: &QuadValue) -> QuadValue {
        match self.lattice {
            Lattice::Planar(_) => x.star(),
            Lattice::Periodic(_) => QuadValue::zero(),
        }
    }

    /// Dual basis `(w1, w2)` with `<v_i, w_j> = δ_ij`: rows of `G^{-T}`.
    pub fn dual_basis(&self) -> Result<[LatticeVector; 2]> {
        let [v1, v2] = self.basis().ok_or_else(|| Error::domain("degenerate scheme has no planar dual basis"))?;
        let det = self.determinant();
        let w1 = LatticeVector { physical: v2.internal.checked_div(&det)?, internal: (-&v2.physical).checked_div(&det)? };
        let w2 = LatticeVector { physical: (-&v1.internal).checked_div(&det)?, internal: v1.physical.checked_div(&det)? };
        Ok([w1, w2])
    }

    /// Physical projections of dual lattice points with coefficients
    /// bounded by `bound`, sorted and deduplicated.
    pub fn dual_candidates(&self, bound: u32) -> Result<Vec<QuadValue>> {
        if bound == 0 {
            return Err(Error::domain("coefficient bound must be >= 1"));
        }
        let b = bound as i64;
        let mut out = match &self.lattice {
            Lattice::Periodic(s) => {
                let inv = s.recip()?;
                (-b..=b).map(|j| &QuadValue::from_int(j) * &inv).collect::<Vec<_>>()
            }
            Lattice::Planar(_) => {
                let [w1, w2] = self.dual_basis()?;
                let mut v = Vec::with_capacity(((2 * b + 1) * (2 * b + 1)) as usize);
                for i in -b..=b {
                    let a = &QuadValue::from_int(i) * &w1.physical;
                    for j in -b..=b {
                        v.push(a.checked_add(&(&QuadValue::from_int(j) * &w2.physical))?);
                    }
                }
                v
            }
        };
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Lattice points `(x, x*)` with `x` in `interval` and `x*` in `internal`,
    /// sorted by `x`. Enumeration is exhaustive over the coefficient box
    /// obtained from the inverse basis.
    pub fn lattice_points(&self, interval: Interval, internal: Interval) -> Result<Vec<(QuadValue, QuadValue)>> {
        if interval.is_empty() {
            return Ok(Vec::new());
        }
        let mut pts = Vec::new();
        match &self.lattice {
            Lattice::Periodic(s) => {
                if !internal.contains(&QuadValue::zero(), 0.0) {
                    return Ok(pts);
                }
                let sf = s.to_f64();
                let (lo, hi) = (coeff(interval.lo / sf - 1.0)?, coeff(interval.hi / sf + 1.0)?);
                for j in lo..=hi {
                    let x = &QuadValue::from_int(j) * s;
                    if interval.contains(&x, x.to_f64()) {
                        pts.push((x, QuadValue::zero()));
                    }
                }
            }
            Lattice::Planar([v1, v2]) => {
                if internal.is_empty() {
                    return Ok(pts);
                }
                let (p1, i1, p2, i2) = (v1.physical.to_f64(), v1.internal.to_f64(), v2.physical.to_f64(), v2.internal.to_f64());
                let det = p1 * i2 - i1 * p2;
                // b = (p1 x* - i1 x) / det over the corners of the box
                let corners =
                    [(interval.lo, internal.lo), (interval.lo, internal.hi), (interval.hi, internal.lo), (interval.hi, internal.hi)];
                let bs: Vec<f64> = corners.iter().map(|(x, xs)| (p1 * xs - i1 * x) / det).collect();
                let b_lo = coeff(bs.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0)?;
                let b_hi = coeff(bs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0)?;
                for b in b_lo..=b_hi {
                    let bq = QuadValue::from_int(b);
                    let (bx, bxs) = (&bq * &v2.physical, &bq * &v2.internal);
                    // a i1 ∈ internal - b i2
                    let ends = [(internal.lo - b as f64 * i2) / i1, (internal.hi - b as f64 * i2) / i1];
                    let a_lo = coeff(ends[0].min(ends[1]) - 1.0)?;
                    let a_hi = coeff(ends[0].max(ends[1]) + 1.0)?;
                    for a in a_lo..=a_hi {
                        let aq = QuadValue::from_int(a);
                        let xs = (&aq * &v1.internal).checked_add(&bxs)?;
                        if !internal.contains(&xs, xs.to_f64()) {
                            continue;
                        }
                        let x = (&aq * &v1.physical).checked_add(&bx)?;
                        if interval.contains(&x, x.to_f64()) {
                            pts.push((x, xs));
                        }
                    }
                }
                pts.sort_by(|a, b| a.0.cmp(&b.0));
            }
        }
        Ok(pts)
    }
}

fn check_window(w: &Interval) -> Result<()> {
    if !(w.lo < w.hi) || !w.lo.is_finite() || !w.hi.is_finite() {
        return Err(Error::Validation(format!("window [{}, {}] must satisfy lo < hi", w.lo, w.hi)));
    }
    Ok(())
}

fn coeff(v: f64) -> Result<i64> {
    const LIMIT: f64 = (1u64 << 52) as f64;
    if !v.is_finite() || v.abs() > LIMIT {
        return Err(Error::Capacity(format!("lattice coefficient bound {v} out of range")));
    }
    Ok(if v < 0.0 { v.floor() } else { v.ceil() } as i64)
}

/// Model comb `Σ h(x*) δ_x` over lattice points with `x` in `interval` and
/// `x*` in the scheme window.
pub fn generate_model_comb<T: Scalar>(s: &CPScheme, h: &WeightFn, interval: Interval) -> Result<WeightedComb<T>> {
    let pts = s.lattice_points(interval, s.window())?;
    let atoms = pts.into_iter().map(|(x, xs)| (x, Complex::new(T::of(h.eval_exact(&xs)), T::zero()))).collect();
    WeightedComb::new(atoms, interval, format!("{}/{}", s.name(), h.kind()))
}

/// Free-function form of [`CPScheme::dual_candidates`].
pub fn dual_candidates(s: &CPScheme, bound: u32) -> Result<Vec<QuadValue>> {
    s.dual_candidates(bound)
}

/// Scheme and weight as described by the `preset | m | basis.* | window.* |
/// weight.*` keys of a config section.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeSpec {
    pub preset: Option<String>,
    pub m: Option<u32>,
    pub v1: Option<String>,
    pub v2: Option<String>,
    pub window_lo: Option<String>,
    pub window_hi: Option<String>,
    pub weight_kind: Option<WeightKind>,
    pub weight_halfwidth: Option<f64>,
    pub weight_height: Option<f64>,
}

impl SchemeSpec {
    pub fn preset(name: &str) -> Self {
        SchemeSpec {
            preset: Some(name.to_string()),
            m: None,
            v1: None,
            v2: None,
            window_lo: None,
            window_hi: None,
            weight_kind: None,
            weight_halfwidth: None,
            weight_height: None,
        }
    }

    pub fn from_kv(cfg: &KvConfig) -> Result<Self> {
        Ok(SchemeSpec {
            preset: cfg.get("preset").map(str::to_string),
            m: cfg.parse("m")?,
            v1: cfg.get("basis.v1").map(str::to_string),
            v2: cfg.get("basis.v2").map(str::to_string),
            window_lo: cfg.get("window.lo").map(str::to_string),
            window_hi: cfg.get("window.hi").map(str::to_string),
            weight_kind: cfg.parse("weight.kind")?,
            weight_halfwidth: cfg.parse("weight.halfwidth")?,
            weight_height: cfg.parse("weight.height")?,
        })
    }

    pub fn build(&self) -> Result<(CPScheme, WeightFn)> {
        let scheme = build_scheme(self)?;
        let base = scheme.default_weight();
        let kind = self.weight_kind.unwrap_or(base.kind());
        let height = self.weight_height.unwrap_or(base.height());
        let weight = match (kind, self.weight_halfwidth) {
            (WeightKind::Indicator, None) => WeightFn::indicator(scheme.window().lo, scheme.window().hi, height)?,
            (kind, hw) => WeightFn::new(kind, hw.unwrap_or(scheme.window().length() / 2.0), height)?,
        };
        Ok((scheme, weight))
    }
}

fn parse_quad_expr(key: &str, s: &str) -> Result<QuadValue> {
    s.trim().parse().map_err(|e: Error| Error::parse(format!("{key}: {e}")))
}

fn parse_vector(key: &str, s: &str, m: u32) -> Result<LatticeVector> {
    let s = s.trim();
    let s = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(s);
    let parts: Vec<&str> = s.split(',').collect();
    let physical = parse_quad_expr(key, parts[0])?;
    let v = match parts.len() {
        1 => LatticeVector::from_physical(physical),
        2 => LatticeVector { physical, internal: parse_quad_expr(key, parts[1])? },
        _ => return Err(Error::parse(format!("{key}: expected `x` or `x, x*`"))),
    };
    for c in [&v.physical, &v.internal] {
        if c.radicand() != 0 && c.radicand() != m {
            return Err(Error::MixedRadicand(m, c.radicand()));
        }
    }
    Ok(v)
}

/// Validated scheme from a [`SchemeSpec`]; explicit keys override the preset.
pub fn build_scheme(spec: &SchemeSpec) -> Result<CPScheme> {
    let mut scheme = match (&spec.preset, spec.m, &spec.v1, &spec.v2) {
        (Some(p), None, None, None) => CPScheme::preset(p)?,
        (_, Some(m), Some(v1), Some(v2)) => {
            if m < 2 || !crate::exactnum::is_square_free(m as u64) {
                return Err(Error::Validation(format!("radicand {m} must be square-free and > 1")));
            }
            let name = spec.preset.clone().unwrap_or_else(|| format!("custom(m={m})"));
            let provisional = Interval::centered(1.0);
            CPScheme::from_vectors(name, m, parse_vector("basis.v1", v1, m)?, parse_vector("basis.v2", v2, m)?, provisional)?
        }
        (None, None, None, None) => return Err(Error::Validation("scheme needs a preset or m, basis.v1, basis.v2".into())),
        _ => return Err(Error::Validation("custom scheme needs all of m, basis.v1, basis.v2".into())),
    };
    let lo = spec.window_lo.as_deref().map(|s| parse_quad_expr("window.lo", s)).transpose()?;
    let hi = spec.window_hi.as_deref().map(|s| parse_quad_expr("window.hi", s)).transpose()?;
    if lo.is_some() || hi.is_some() {
        let w = scheme.window();
        let window = Interval::new(lo.map_or(w.lo, |v| v.to_f64()), hi.map_or(w.hi, |v| v.to_f64()))?;
        scheme = scheme.with_window(window)?;
    }
    Ok(scheme)
}
