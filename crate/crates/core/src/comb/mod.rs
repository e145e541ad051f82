//! Finite patches of weighted Dirac combs and the point-set statistics the
//! diffraction theorems are phrased in: restriction, difference sets,
//! weight ordering, threshold subsets and gap (relative density) bounds.

pub(crate) mod frame;
pub mod io;

use std::cmp::Ordering;

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exactnum::QuadValue;
use crate::scalar::Scalar;

/// Closed real interval `[lo, hi]`; `lo > hi` denotes the empty interval.
///
/// Endpoints are doubles, which are exact dyadic rationals, so membership of
/// an exact coordinate is decided without rounding.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::domain(format!("non-finite interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    /// Centered interval `[-h, h]`.
    pub fn centered(half: f64) -> Self {
        Interval { lo: -half, hi: half }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn length(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.is_empty() || (self.lo <= other.lo && other.hi <= self.hi)
    }

    /// Exact membership test; `pos` is the cached double of `x`.
    pub fn contains(&self, x: &QuadValue, pos: f64) -> bool {
        if self.is_empty() {
            return false;
        }
        let tol = 1e-9 * (1.0 + pos.abs());
        if pos > self.lo + tol && pos < self.hi - tol {
            return true;
        }
        if pos < self.lo - tol || pos > self.hi + tol {
            return false;
        }
        let lo = QuadValue::from_f64_exact(self.lo).expect("finite");
        let hi = QuadValue::from_f64_exact(self.hi).expect("finite");
        &lo <= x && x <= &hi
    }
}

/// One atom `weight * delta_coord`; `pos` caches the coordinate as a double.
#[derive(Debug, Clone, PartialEq)]
pub struct CombPoint<T> {
    pub coord: QuadValue,
    pub pos: f64,
    pub weight: Complex<T>,
}

/// Finite patch of a weighted Dirac comb.
///
/// The window certifies completeness: every atom of the underlying infinite
/// comb that lies in the window is present. Zero weights are dropped at
/// construction, so the point list is exactly the support.
#[derive(Debug, Clone)]
pub struct WeightedComb<T> {
    points: Vec<CombPoint<T>>,
    window: Interval,
    radicand: u32,
    tag: String,
    translation_bound: T,
}

/// Outcome of [`compare_combs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CombOrder {
    /// `0 <= w' <= C w` pointwise
    Below,
    /// `|w'| <= C w` with `w >= 0`
    Sandwich,
    Neither,
}

/// Sorted exact point set with the window it was observed in.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    coords: Vec<QuadValue>,
    pos: Vec<f64>,
    window: Interval,
}

/// Centered van Hove sequence `A_n = [-n L0, n L0]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct VanHoveSpec {
    base: f64,
    sizes: Vec<u32>,
}

impl VanHoveSpec {
    pub fn new(base: f64, sizes: Vec<u32>) -> Result<Self> {
        if !(base > 0.0) || !base.is_finite() {
            return Err(Error::Validation(format!("van Hove base length must be > 0, got {base}")));
        }
        if sizes.is_empty() || sizes[0] == 0 || sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(format!("van Hove sizes must be positive and strictly increasing: {sizes:?}")));
        }
        Ok(VanHoveSpec { base, sizes })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn largest(&self) -> u32 {
        *self.sizes.last().expect("nonempty")
    }

    pub fn region(&self, n: u32) -> Interval {
        Interval::centered(n as f64 * self.base)
    }

    pub fn volume(&self, n: u32) -> f64 {
        2.0 * n as f64 * self.base
    }
}

impl Default for VanHoveSpec {
    fn default() -> Self {
        VanHoveSpec { base: 1.0, sizes: vec![50, 100, 200, 400] }
    }
}

impl<T: Scalar> WeightedComb<T> {
    /// Builds a comb from `(coordinate, weight)` atoms in any order.
    ///
    /// Fails on duplicate coordinates, atoms outside the window, or
    /// coordinates from different quadratic fields.
    pub fn new(atoms: Vec<(QuadValue, Complex<T>)>, window: Interval, tag: impl Into<String>) -> Result<Self> {
        let mut points: Vec<CombPoint<T>> = atoms
            .into_iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|(coord, weight)| {
                let pos = coord.to_f64();
                CombPoint { coord, pos, weight }
            })
            .collect();
        points.sort_by(|a, b| a.coord.cmp(&b.coord));
        let mut radicand = 0;
        for (i, p) in points.iter().enumerate() {
            if i > 0 && points[i - 1].coord == p.coord {
                return Err(Error::domain(format!("duplicate comb coordinate {}", p.coord)));
            }
            if !window.contains(&p.coord, p.pos) {
                return Err(Error::domain(format!("coordinate {} outside window [{}, {}]", p.coord, window.lo, window.hi)));
            }
            match (radicand, p.coord.radicand()) {
                (_, 0) => {}
                (0, m) => radicand = m,
                (a, b) if a != b => return Err(Error::MixedRadicand(a, b)),
                _ => {}
            }
        }
        let translation_bound = unit_window_mass(&points);
        Ok(WeightedComb { points, window, radicand, tag: tag.into(), translation_bound })
    }

    /// Real-weighted convenience constructor.
    pub fn from_real(atoms: Vec<(QuadValue, T)>, window: Interval, tag: impl Into<String>) -> Result<Self> {
        Self::new(atoms.into_iter().map(|(c, w)| (c, Complex::new(w, T::zero()))).collect(), window, tag)
    }

    pub fn empty(window: Interval, tag: impl Into<String>) -> Self {
        WeightedComb { points: Vec::new(), window, radicand: 0, tag: tag.into(), translation_bound: T::zero() }
    }

    pub fn points(&self) -> &[CombPoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn window(&self) -> Interval {
        self.window
    }

    pub fn radicand(&self) -> u32 {
        self.radicand
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    /// Largest total `|weight|` over closed unit-length subintervals.
    pub fn translation_bound(&self) -> T {
        self.translation_bound
    }

    pub fn is_real(&self) -> bool {
        self.points.iter().all(|p| p.weight.im.is_zero())
    }

    pub fn max_abs_weight(&self) -> T {
        self.points.iter().map(|p| p.weight.norm()).fold(T::zero(), T::max)
    }

    /// Weight at an exact coordinate, if it is an atom.
    pub fn weight_at(&self, x: &QuadValue) -> Option<Complex<T>> {
        self.points.binary_search_by(|p| p.coord.cmp(x)).ok().map(|i| self.points[i].weight)
    }

    pub fn support(&self) -> PointSet {
        PointSet {
            coords: self.points.iter().map(|p| p.coord.clone()).collect(),
            pos: self.points.iter().map(|p| p.pos).collect(),
            window: self.window,
        }
    }

    /// Same support, weights replaced by `f(point)`; zero results are dropped.
    pub fn map_weights(&self, mut f: impl FnMut(&CombPoint<T>) -> Complex<T>) -> Self {
        let points: Vec<CombPoint<T>> = self
            .points
            .iter()
            .filter_map(|p| {
                let w = f(p);
                (!w.is_zero()).then(|| CombPoint { coord: p.coord.clone(), pos: p.pos, weight: w })
            })
            .collect();
        let translation_bound = unit_window_mass(&points);
        WeightedComb { points, window: self.window, radicand: self.radicand, tag: self.tag.clone(), translation_bound }
    }

    /// Pointwise sum of two combs on the same window.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.window != other.window {
            return Err(Error::domain("comb sum needs identical windows"));
        }
        let mut atoms: Vec<(QuadValue, Complex<T>)> = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.len() || j < other.len() {
            let ord = match (self.points.get(i), other.points.get(j)) {
                (Some(a), Some(b)) => a.coord.cmp(&b.coord),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    atoms.push((self.points[i].coord.clone(), self.points[i].weight));
                    i += 1;
                }
                Ordering::Greater => {
                    atoms.push((other.points[j].coord.clone(), other.points[j].weight));
                    j += 1;
                }
                Ordering::Equal => {
                    atoms.push((self.points[i].coord.clone(), self.points[i].weight + other.points[j].weight));
                    i += 1;
                    j += 1;
                }
            }
        }
        Self::new(atoms, self.window, format!("{}+{}", self.tag, other.tag))
    }

    /// Restriction to a closed subinterval of the certified window.
    pub fn restrict(&self, interval: Interval) -> Result<Self> {
        if interval.is_empty() {
            return Ok(WeightedComb::empty(interval, self.tag.clone()));
        }
        if !self.window.contains_interval(&interval) {
            return Err(Error::IncompleteData(format!(
                "[{}, {}] exceeds certified window [{}, {}]",
                interval.lo, interval.hi, self.window.lo, self.window.hi
            )));
        }
        let points: Vec<CombPoint<T>> = self.points.iter().filter(|p| interval.contains(&p.coord, p.pos)).cloned().collect();
        let translation_bound = unit_window_mass(&points);
        Ok(WeightedComb { points, window: interval, radicand: self.radicand, tag: self.tag.clone(), translation_bound })
    }

    /// Exact difference set `{x - y : |x - y| <= radius}` of the support.
    pub fn difference_set(&self, radius: f64) -> Result<PointSet> {
        if !(radius > 0.0) {
            return Err(Error::domain(format!("difference radius must be > 0, got {radius}")));
        }
        if self.is_empty() {
            return Err(Error::domain("difference set of an empty comb"));
        }
        let coords: Vec<&QuadValue> = self.points.iter().map(|p| &p.coord).collect();
        let pos: Vec<f64> = self.points.iter().map(|p| p.pos).collect();
        let diffs = frame::accumulate_pairs(&coords, &pos, radius, |_, _| 0u8)?;
        let coords: Vec<QuadValue> = diffs.into_iter().map(|(z, _)| z).collect();
        let pos = coords.iter().map(QuadValue::to_f64).collect();
        Ok(PointSet { coords, pos, window: Interval::centered(radius) })
    }
}

fn unit_window_mass<T: Scalar>(points: &[CombPoint<T>]) -> T {
    let mut best = T::zero();
    let mut acc = T::zero();
    let mut hi = 0;
    for lo in 0..points.len() {
        while hi < points.len() && points[hi].pos <= points[lo].pos + 1.0 {
            acc += points[hi].weight.norm();
            hi += 1;
        }
        best = best.max(acc);
        acc -= points[lo].weight.norm();
    }
    best
}

fn real_weight<T: Scalar>(w: Complex<T>) -> Option<T> {
    w.im.is_zero().then_some(w.re)
}

/// Relative slack for weight inequalities: weights are doubles.
const WEIGHT_RTOL: f64 = 1e-12;

fn leq<T: Scalar>(a: T, b: T) -> bool {
    a <= b + T::of(WEIGHT_RTOL) * a.abs().max(b.abs())
}

/// Classifies `c1` against `C * c2`, matching atoms by exact coordinate.
pub fn compare_combs<T: Scalar>(c1: &WeightedComb<T>, c2: &WeightedComb<T>, scale: T) -> Result<CombOrder> {
    if c1.window != c2.window {
        return Err(Error::domain("compare_combs needs identical windows"));
    }
    if scale < T::zero() {
        return Err(Error::domain("comparison constant must be >= 0"));
    }
    let mut c2_nonneg = true;
    for p in &c2.points {
        match real_weight(p.weight) {
            Some(w) if w >= T::zero() => {}
            _ => c2_nonneg = false,
        }
    }
    let mut below = c2_nonneg;
    let mut sandwich = c2_nonneg;
    for p in &c1.points {
        let upper = match c2.weight_at(&p.coord).map(real_weight) {
            None => T::zero(),
            Some(Some(w)) => scale * w,
            Some(None) => return Ok(CombOrder::Neither),
        };
        match real_weight(p.weight) {
            Some(w) => {
                below &= w >= T::zero() && leq(w, upper);
                sandwich &= leq(w.abs(), upper);
            }
            None => {
                below = false;
                sandwich &= leq(p.weight.norm(), upper);
            }
        }
    }
    Ok(if below {
        CombOrder::Below
    } else if sandwich {
        CombOrder::Sandwich
    } else {
        CombOrder::Neither
    })
}

/// `{x : w_x >= C1}` for a real comb.
pub fn threshold_subset<T: Scalar>(c: &WeightedComb<T>, threshold: T) -> Result<PointSet> {
    if !(threshold > T::zero()) {
        return Err(Error::domain("threshold must be > 0"));
    }
    if !c.is_real() {
        return Err(Error::domain("threshold_subset needs real weights"));
    }
    let keep: Vec<&CombPoint<T>> = c.points.iter().filter(|p| p.weight.re >= threshold).collect();
    Ok(PointSet { coords: keep.iter().map(|p| p.coord.clone()).collect(), pos: keep.iter().map(|p| p.pos).collect(), window: c.window })
}

impl PointSet {
    /// Sorts and validates; duplicates and out-of-window points are errors.
    pub fn new(mut coords: Vec<QuadValue>, window: Interval) -> Result<Self> {
        coords.sort();
        if coords.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("point set has duplicate coordinates"));
        }
        let pos: Vec<f64> = coords.iter().map(QuadValue::to_f64).collect();
        if let Some(bad) = coords.iter().zip(&pos).find(|(c, p)| !window.contains(c, **p)) {
            return Err(Error::domain(format!("point {} outside window", bad.0)));
        }
        Ok(PointSet { coords, pos, window })
    }

    /// Sorts and deduplicates without validating the window.
    pub(crate) fn from_unsorted(mut coords: Vec<QuadValue>, window: Interval) -> Self {
        coords.sort();
        coords.dedup();
        let pos = coords.iter().map(QuadValue::to_f64).collect();
        PointSet { coords, pos, window }
    }

    pub fn coords(&self) -> &[QuadValue] {
        &self.coords
    }

    pub fn positions(&self) -> &[f64] {
        &self.pos
    }

    pub fn window(&self) -> Interval {
        self.window
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn contains(&self, x: &QuadValue) -> bool {
        self.coords.binary_search(x).is_ok()
    }

    pub fn is_subset_of(&self, other: &PointSet) -> bool {
        self.coords.iter().all(|c| other.contains(c))
    }

    /// Largest gap between consecutive points, including the gaps to the
    /// window ends.
    pub fn max_gap(&self) -> Result<f64> {
        max_gap_sorted(&self.pos, self.window)
    }
}

/// Free-function form of [`PointSet::max_gap`].
pub fn max_gap(s: &PointSet) -> Result<f64> {
    s.max_gap()
}

/// [`max_gap`] on sorted doubles.
pub fn max_gap_sorted(pos: &[f64], window: Interval) -> Result<f64> {
    if pos.len() < 2 {
        return Err(Error::UndefinedStatistic(format!("max gap needs >= 2 points, got {}", pos.len())));
    }
    let inner = pos.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let left = (pos[0] - window.lo).max(0.0);
    let right = (window.hi - pos[pos.len() - 1]).max(0.0);
    Ok(inner.max(left).max(right))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(step: i64, lo: i64, hi: i64, window: f64) -> WeightedComb<f64> {
        let atoms = (lo..=hi).filter(|k| k % step == 0).map(|k| (QuadValue::from_int(k), 1.0)).collect();
        WeightedComb::from_real(atoms, Interval::centered(window), "lattice").unwrap()
    }

    fn ints(s: &PointSet) -> Vec<f64> {
        s.positions().to_vec()
    }

    #[test]
    fn restrict_integer_comb() {
        let c = lattice(1, -10, 10, 10.0);
        let r = c.restrict(Interval::centered(2.0)).unwrap();
        assert_eq!(ints(&r.support()), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert!(c.restrict(Interval { lo: 1.0, hi: 0.0 }).unwrap().is_empty());
        assert!(matches!(c.restrict(Interval::centered(11.0)), Err(Error::IncompleteData(_))));
    }

    #[test]
    fn restrict_resolves_boundary_exactly() {
        // sqrt(2) just below 1.4142135623730951 (the nearest double above)
        let x = QuadValue::sqrt(2).unwrap();
        let c = WeightedComb::from_real(vec![(x, 1.0)], Interval::centered(2.0), "t").unwrap();
        let edge = 2f64.sqrt();
        let exact_inside = QuadValue::from_f64_exact(edge).unwrap() >= QuadValue::sqrt(2).unwrap();
        let r = c.restrict(Interval::new(0.0, edge).unwrap()).unwrap();
        assert_eq!(r.len() == 1, exact_inside);
    }

    #[test]
    fn difference_set_examples() {
        let c = lattice(1, -10, 10, 10.0);
        assert_eq!(ints(&c.difference_set(2.5).unwrap()), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        let single = lattice(1, 3, 3, 10.0);
        assert_eq!(ints(&single.difference_set(7.0).unwrap()), vec![0.0]);
        assert!(WeightedComb::<f64>::empty(Interval::centered(1.0), "e").difference_set(1.0).is_err());
    }

    #[test]
    fn compare_examples() {
        let z = lattice(1, -10, 10, 10.0);
        let z2 = lattice(2, -10, 10, 10.0);
        assert_eq!(compare_combs(&z2, &z, 1.0).unwrap(), CombOrder::Below);
        assert_eq!(compare_combs(&z, &z2, 5.0).unwrap(), CombOrder::Neither);
        let signed = z.map_weights(|p| Complex::new(if p.pos as i64 % 2 == 0 { 1.0 } else { -1.0 }, 0.0));
        assert_eq!(compare_combs(&signed, &z, 1.0).unwrap(), CombOrder::Sandwich);
        let short = lattice(1, -5, 5, 5.0);
        assert!(compare_combs(&short, &z, 1.0).is_err());
    }

    #[test]
    fn threshold_examples() {
        let z = lattice(1, -10, 10, 10.0);
        assert_eq!(threshold_subset(&z, 1.0).unwrap().len(), 21);
        assert!(threshold_subset(&z, 1.5).unwrap().is_empty());
        assert!(threshold_subset(&z, 0.0).is_err());
        let cplx = z.map_weights(|_| Complex::new(1.0, 1.0));
        assert!(threshold_subset(&cplx, 1.0).is_err());
    }

    #[test]
    fn max_gap_examples() {
        let z = lattice(1, -10, 10, 10.0);
        assert_eq!(z.support().max_gap().unwrap(), 1.0);
        let sparse = PointSet::new(vec![(-10).into(), 0.into(), 10.into()], Interval::centered(10.0)).unwrap();
        assert_eq!(sparse.max_gap().unwrap(), 10.0);
        let one = PointSet::new(vec![0.into()], Interval::centered(10.0)).unwrap();
        assert!(matches!(one.max_gap(), Err(Error::UndefinedStatistic(_))));
    }

    #[test]
    fn zero_weights_dropped_and_duplicates_rejected() {
        let c = WeightedComb::from_real(vec![(1.into(), 0.0), (2.into(), 1.0)], Interval::centered(3.0), "t").unwrap();
        assert_eq!(c.len(), 1);
        let dup = WeightedComb::from_real(vec![(1.into(), 1.0), (1.into(), 2.0)], Interval::centered(3.0), "t");
        assert!(dup.is_err());
        let outside = WeightedComb::from_real(vec![(5.into(), 1.0)], Interval::centered(3.0), "t");
        assert!(outside.is_err());
    }

    #[test]
    fn translation_bound_counts_closed_unit_windows() {
        let z = lattice(1, -10, 10, 10.0);
        assert_eq!(z.translation_bound(), 2.0);
    }

    #[test]
    fn van_hove_validation() {
        assert!(VanHoveSpec::new(1.0, vec![1, 1]).is_err());
        assert!(VanHoveSpec::new(0.0, vec![1]).is_err());
        let s = VanHoveSpec::new(0.5, vec![2, 4]).unwrap();
        assert_eq!(s.volume(4), 4.0);
        assert_eq!(s.region(2), Interval::centered(1.0));
    }

    #[test]
    fn sum_merges_atoms() {
        let a = lattice(2, -4, 4, 4.0);
        let b = lattice(1, -4, 4, 4.0);
        let s = a.sum(&b).unwrap();
        assert_eq!(s.len(), 9);
        assert_eq!(s.weight_at(&QuadValue::from_int(2)).unwrap().re, 2.0);
    }
}
