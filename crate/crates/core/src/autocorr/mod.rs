//! Finite-patch autocorrelations `γ_n = ω|A_n * (ω|A_n)~ / Vol(A_n)`.
//!
//! Tables are keyed by exact differences. Every per-`z` sum runs over
//! pairs in sorted `(x, y)` order, so for real weights `γ_n(-z)` and
//! `γ_n(z)` are bitwise equal.

use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex;
use num_traits::Zero;
use serde::Serialize;

use crate::comb::{frame, PointSet, VanHoveSpec, WeightedComb};
use crate::error::{Error, Result};
use crate::exactnum::QuadValue;
use crate::scalar::Scalar;

/// Absolute slack for measure inequalities.
pub const MEASURE_TOL: f64 = 1e-9;

/// Discrete measure table `{(z, γ({z}))}` sorted by `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct Autocorrelation<T> {
    entries: Vec<(QuadValue, Complex<T>)>,
    n: u32,
    volume: f64,
    radius: f64,
    tag: String,
}

impl<T: Scalar> Autocorrelation<T> {
    /// Table from entries in any order; duplicate `z` are summed.
    pub fn from_entries(mut entries: Vec<(QuadValue, Complex<T>)>, n: u32, volume: f64, radius: f64, tag: impl Into<String>) -> Self {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        entries.dedup_by(|later, kept| {
            if later.0 == kept.0 {
                kept.1 += later.1;
                true
            } else {
                false
            }
        });
        Autocorrelation { entries, n, volume, radius, tag: tag.into() }
    }

    pub fn entries(&self) -> &[(QuadValue, Complex<T>)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    /// Entry at `z`, if `z` is in the support.
    pub fn get(&self, z: &QuadValue) -> Option<Complex<T>> {
        self.entries.binary_search_by(|e| e.0.cmp(z)).ok().map(|i| self.entries[i].1)
    }

    /// `γ({z})`, zero off the support.
    pub fn value(&self, z: &QuadValue) -> Complex<T> {
        self.get(z).unwrap_or_else(Complex::zero)
    }

    pub fn support(&self) -> PointSet {
        PointSet::from_unsorted(self.entries.iter().map(|e| e.0.clone()).collect(), crate::comb::Interval::centered(self.radius))
    }

    /// Entries with `|z| <= r`.
    pub fn truncate(&self, r: f64) -> Self {
        let entries = self.entries.iter().filter(|(z, _)| z.to_f64().abs() <= r).cloned().collect();
        Autocorrelation { entries, n: self.n, volume: self.volume, radius: r.min(self.radius), tag: self.tag.clone() }
    }

    /// Largest `|γ(z) - conj γ(-z)|` over the table.
    pub fn hermitian_defect(&self) -> f64 {
        self.entries.iter().map(|(z, v)| (*v - self.value(&-z).conj()).norm().as_f64()).fold(0.0, f64::max)
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "z_exact,z_float,value_real,value_imag,n,volume")?;
        for (z, v) in &self.entries {
            writeln!(out, "{},{:e},{:e},{:e},{},{}", z, z.to_f64(), v.re.as_f64(), v.im.as_f64(), self.n, self.volume)?;
        }
        Ok(())
    }
}

/// Default table radius `20 L0`.
pub fn default_radius(spec: &VanHoveSpec) -> f64 {
    20.0 * spec.base()
}

/// `γ_n` of `c` on `A_n` for all exact differences with `|z| <= radius`.
pub fn autocorrelation<T: Scalar>(c: &WeightedComb<T>, spec: &VanHoveSpec, n: u32, radius: f64) -> Result<Autocorrelation<T>> {
    if !(radius > 0.0) {
        return Err(Error::domain(format!("autocorrelation radius must be > 0, got {radius}")));
    }
    let patch = c.restrict(spec.region(n))?;
    let volume = spec.volume(n);
    let coords: Vec<&QuadValue> = patch.points().iter().map(|p| &p.coord).collect();
    let pos: Vec<f64> = patch.points().iter().map(|p| p.pos).collect();
    let w: Vec<Complex<T>> = patch.points().iter().map(|p| p.weight).collect();
    let sums = frame::accumulate_pairs(&coords, &pos, radius, |i, j| w[i] * w[j].conj())?;
    let inv = T::of(volume).recip();
    let entries = sums.into_iter().map(|(z, s)| (z, s * inv)).collect();
    Ok(Autocorrelation { entries, n, volume, radius, tag: c.tag().to_string() })
}

/// `γ_n(z)` across the van Hove sizes plus consecutive Cauchy statistics.
#[derive(Debug, Clone)]
pub struct ConvergenceSeries<T> {
    pub sizes: Vec<u32>,
    pub z: Vec<QuadValue>,
    /// `values[i][j] = γ_{sizes[j]}(z[i])`
    pub values: Vec<Vec<Complex<T>>>,
    /// `steps[j] = max_z |γ_{sizes[j+1]}(z) - γ_{sizes[j]}(z)|`
    pub steps: Vec<f64>,
}

impl<T> ConvergenceSeries<T> {
    /// `max_z |γ_last(z) - γ_prev(z)|`; zero for a single size.
    pub fn cauchy(&self) -> f64 {
        self.steps.last().copied().unwrap_or(0.0)
    }
}

pub fn convergence_series<T: Scalar>(c: &WeightedComb<T>, spec: &VanHoveSpec, radius: f64) -> Result<ConvergenceSeries<T>> {
    let tables = spec.sizes().iter().map(|&n| autocorrelation(c, spec, n, radius)).collect::<Result<Vec<_>>>()?;
    let mut all: Vec<QuadValue> = tables.iter().flat_map(|t| t.entries.iter().map(|e| e.0.clone())).collect();
    all.sort();
    all.dedup();
    let values: Vec<Vec<Complex<T>>> = all.iter().map(|z| tables.iter().map(|t| t.value(z)).collect()).collect();
    let steps = (1..tables.len()).map(|j| values.iter().map(|row| (row[j] - row[j - 1]).norm().as_f64()).fold(0.0, f64::max)).collect();
    Ok(ConvergenceSeries { sizes: spec.sizes().to_vec(), z: all, values, steps })
}

/// `a * δ_F * (δ_F)~` for the finite weighted set `f`.
///
/// The result is kept on `|z| <= a.radius - diam(F)`, where every term of
/// the expansion is available from `a`.
pub fn convolve_finite<T: Scalar>(a: &Autocorrelation<T>, f: &[(QuadValue, Complex<T>)]) -> Result<Autocorrelation<T>> {
    if f.is_empty() {
        return Ok(Autocorrelation { entries: Vec::new(), n: a.n, volume: a.volume, radius: a.radius, tag: a.tag.clone() });
    }
    let mut kernel: HashMap<QuadValue, Complex<T>> = HashMap::new();
    for (u, wu) in f {
        for (v, wv) in f {
            *kernel.entry(u.checked_sub(v)?).or_insert_with(Complex::zero) += *wu * wv.conj();
        }
    }
    let mut kernel: Vec<(QuadValue, Complex<T>)> = kernel.into_iter().collect();
    kernel.sort_by(|x, y| x.0.cmp(&y.0));
    let diam = kernel.last().expect("nonempty").0.to_f64();
    let radius = a.radius - diam;
    let mut acc: HashMap<QuadValue, Complex<T>> = HashMap::new();
    for (z, val) in &a.entries {
        for (d, kd) in &kernel {
            let t = z.checked_add(d)?;
            if t.to_f64().abs() <= radius + 1e-9 {
                *acc.entry(t).or_insert_with(Complex::zero) += *val * *kd;
            }
        }
    }
    let entries = acc.into_iter().filter(|(_, v)| !v.is_zero()).collect();
    Ok(Autocorrelation::from_entries(entries, a.n, a.volume, radius.max(0.0), format!("{}*F", a.tag)))
}

/// `F = {x - g(x)}` with `g(x)` the nearest point of `gamma` (ties to the
/// smaller coordinate), so that `lambda ⊆ gamma + F`.
pub fn covering_set(lambda: &PointSet, gamma: &PointSet) -> Result<PointSet> {
    if gamma.is_empty() {
        return Err(Error::domain("covering set needs a nonempty gamma"));
    }
    if !gamma.is_subset_of(lambda) {
        return Err(Error::domain("gamma must be a subset of lambda"));
    }
    let g = gamma.coords();
    let gpos = gamma.positions();
    let mut offsets = Vec::with_capacity(lambda.len());
    for (x, &xp) in lambda.coords().iter().zip(lambda.positions()) {
        let idx = gpos.partition_point(|&p| p < xp);
        let mut best: Option<usize> = None;
        for cand in [idx.checked_sub(2), idx.checked_sub(1), Some(idx), Some(idx + 1)].into_iter().flatten() {
            if cand >= g.len() {
                continue;
            }
            best = Some(match best {
                None => cand,
                Some(b) => {
                    let db = x.checked_sub(&g[b])?.abs();
                    let dc = x.checked_sub(&g[cand])?.abs();
                    match dc.cmp(&db) {
                        std::cmp::Ordering::Less => cand,
                        std::cmp::Ordering::Equal if g[cand] < g[b] => cand,
                        _ => b,
                    }
                }
            });
        }
        offsets.push(x.checked_sub(&g[best.expect("gamma nonempty")])?);
    }
    let span = offsets.iter().map(|o| o.to_f64().abs()).fold(0.0, f64::max);
    let f = PointSet::from_unsorted(offsets, crate::comb::Interval::centered(span));
    if !covers(lambda, gamma, &f)? {
        return Err(Error::domain("covering postcondition failed"));
    }
    Ok(f)
}

/// Exact check that every point of `lambda` lies in `gamma + f`.
pub fn covers(lambda: &PointSet, gamma: &PointSet, f: &PointSet) -> Result<bool> {
    for x in lambda.coords() {
        let mut hit = false;
        for off in f.coords() {
            if gamma.contains(&x.checked_sub(off)?) {
                hit = true;
                break;
            }
        }
        if !hit {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Result of [`order_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderVerdict {
    pub pass: bool,
    /// `max_z (a1(z) - scale a2(z))`, clamped at 0
    pub max_violation: f64,
    pub worst_z: Option<String>,
}

/// `a1(z) <= scale * a2(z) + 1e-9` on the union of supports (real parts).
pub fn order_check<T: Scalar>(a1: &Autocorrelation<T>, a2: &Autocorrelation<T>, scale: f64) -> Result<OrderVerdict> {
    if a1.n != a2.n || a1.volume != a2.volume {
        return Err(Error::domain(format!("order_check needs matching patches (n = {} vs {})", a1.n, a2.n)));
    }
    if a1.radius != a2.radius {
        return Err(Error::domain("order_check needs matching radii"));
    }
    let mut worst = (0.0, None);
    let mut check = |z: &QuadValue| {
        let d = a1.value(z).re.as_f64() - scale * a2.value(z).re.as_f64();
        if d > worst.0 {
            worst = (d, Some(z.to_string()));
        }
    };
    a1.entries.iter().for_each(|(z, _)| check(z));
    a2.entries.iter().for_each(|(z, _)| check(z));
    Ok(OrderVerdict { pass: worst.0 <= MEASURE_TOL, max_violation: worst.0, worst_z: worst.1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::Interval;

    fn lattice(step: i64, half: i64) -> WeightedComb<f64> {
        let atoms = (-half..=half).filter(|k| k % step == 0).map(|k| (QuadValue::from_int(k), 1.0)).collect();
        WeightedComb::from_real(atoms, Interval::centered(half as f64), "lattice").unwrap()
    }

    fn re(a: &Autocorrelation<f64>, z: i64) -> f64 {
        a.value(&QuadValue::from_int(z)).re
    }

    #[test]
    fn integer_lattice_values() {
        let n = 50;
        let spec = VanHoveSpec::new(1.0, vec![n]).unwrap();
        let a = autocorrelation(&lattice(1, 60), &spec, n, 5.0).unwrap();
        assert_eq!(re(&a, 0), (2.0 * n as f64 + 1.0) / (2.0 * n as f64));
        assert_eq!(re(&a, 1), 1.0);
        assert_eq!(re(&a, -1), 1.0);
        assert_eq!(a.len(), 11);
        assert_eq!(a.hermitian_defect(), 0.0);
    }

    #[test]
    fn empty_comb_gives_empty_table() {
        let spec = VanHoveSpec::new(1.0, vec![5]).unwrap();
        let c = WeightedComb::<f64>::empty(Interval::centered(10.0), "e");
        assert!(autocorrelation(&c, &spec, 5, 3.0).unwrap().is_empty());
    }

    #[test]
    fn window_must_cover_patch() {
        let spec = VanHoveSpec::new(1.0, vec![100]).unwrap();
        assert!(matches!(autocorrelation(&lattice(1, 50), &spec, 100, 3.0), Err(Error::IncompleteData(_))));
    }

    #[test]
    fn cauchy_statistic_integer() {
        let spec = VanHoveSpec::new(1.0, vec![50, 100, 200]).unwrap();
        let s = convergence_series(&lattice(1, 200), &spec, 3.0).unwrap();
        // γ_n(k) = 1 + (1 - |k|) / 2n, largest change at |k| = 3
        let expected = 2.0 * (1.0 / 200.0 - 1.0 / 400.0);
        assert!((s.cauchy() - expected).abs() < 1e-15);
        assert!(s.cauchy() <= 0.01);
        assert_eq!(s.steps.len(), 2);
    }

    #[test]
    fn single_point_decays() {
        let c = WeightedComb::from_real(vec![(QuadValue::zero(), 2.0)], Interval::centered(400.0), "pt").unwrap();
        let spec = VanHoveSpec::default();
        let s = convergence_series(&c, &spec, 3.0).unwrap();
        assert_eq!(s.z, vec![QuadValue::zero()]);
        for (j, &n) in spec.sizes().iter().enumerate() {
            assert_eq!(s.values[0][j].re, 4.0 / (2.0 * n as f64));
        }
    }

    #[test]
    fn convolution_identity_and_empty() {
        let spec = VanHoveSpec::new(1.0, vec![20]).unwrap();
        let a = autocorrelation(&lattice(1, 20), &spec, 20, 5.0).unwrap();
        let id = convolve_finite(&a, &[(QuadValue::zero(), Complex::new(1.0, 0.0))]).unwrap();
        assert_eq!(id.entries(), a.entries());
        assert!(convolve_finite(&a, &[]).unwrap().is_empty());
    }

    #[test]
    fn smeared_even_lattice_dominates() {
        let spec = VanHoveSpec::new(1.0, vec![100]).unwrap();
        let a2 = autocorrelation(&lattice(2, 120), &spec, 100, 14.0).unwrap();
        let a1 = autocorrelation(&lattice(1, 120), &spec, 100, 14.0).unwrap();
        let f = [(QuadValue::zero(), Complex::new(1.0, 0.0)), (QuadValue::one(), Complex::new(1.0, 0.0))];
        let smeared = convolve_finite(&a2, &f).unwrap();
        assert!(smeared.radius() >= 10.0);
        for z in -10..=10 {
            assert!(re(&a1, z) <= re(&smeared, z) + 1e-9, "z = {z}");
        }
    }

    #[test]
    fn covering_examples() {
        let w = Interval::centered(10.0);
        let z = PointSet::new((-10..=10).map(QuadValue::from_int).collect(), w).unwrap();
        let even = PointSet::new((-10..=10).filter(|k| k % 2 == 0).map(QuadValue::from_int).collect(), w).unwrap();
        let f = covering_set(&z, &even).unwrap();
        let fs: Vec<f64> = f.positions().to_vec();
        assert!(fs == vec![0.0, 1.0] || fs == vec![-1.0, 0.0], "{fs:?}");
        assert_eq!(covering_set(&z, &z).unwrap().positions(), &[0.0]);
        let empty = PointSet::new(vec![], w).unwrap();
        assert!(covering_set(&z, &empty).is_err());
    }

    #[test]
    fn order_examples() {
        let spec = VanHoveSpec::new(1.0, vec![50]).unwrap();
        let a1 = autocorrelation(&lattice(1, 50), &spec, 50, 6.0).unwrap();
        let a2 = autocorrelation(&lattice(2, 50), &spec, 50, 6.0).unwrap();
        assert!(order_check(&a2, &a1, 1.0).unwrap().pass);
        let same = order_check(&a1, &a1, 1.0).unwrap();
        assert!(same.pass && same.max_violation == 0.0);
        let bad = order_check(&a1, &a2, 1.0).unwrap();
        assert!(!bad.pass);
        assert!(re(&a1, 0) > re(&a2, 0) + 0.4);
        let other_n = autocorrelation(&lattice(1, 50), &VanHoveSpec::new(1.0, vec![40]).unwrap(), 40, 6.0).unwrap();
        assert!(order_check(&a1, &other_n, 1.0).is_err());
    }

    #[test]
    fn csv_columns() {
        let spec = VanHoveSpec::new(1.0, vec![2]).unwrap();
        let a = autocorrelation(&lattice(1, 2), &spec, 2, 0.5).unwrap();
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "z_exact,z_float,value_real,value_imag,n,volume\n0,0e0,1.25e0,0e0,2,4\n");
    }
}
