//! Fourier–Bohr intensities, Bragg peak classification and the
//! decomposition of an autocorrelation into its strongly almost periodic
//! and null parts.
//!
//! Conventions: `c_n(k) = Vol(A_n)^{-1} Σ_{x ∈ A_n} ω_x e^{-2πikx}` and
//! `I_n(k) = |c_n(k)|²`. Phases are reduced modulo one before the factor
//! `2π` is applied, so large `k·x` keeps full relative accuracy.

mod decompose;
mod output;

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

pub use decompose::{almost_periods, decompose, decompose_with_periods, gram_psd, sap_resum, DecomposeParams, Decomposition};
pub use output::{read_spectrum_csv, spectrum_json, stick_plot_svg, write_spectrum_csv, PlotEntry};

use crate::comb::{max_gap_sorted, CombPoint, Interval, VanHoveSpec, WeightedComb};
use crate::error::{Error, Result};
use crate::exactnum::QuadValue;
use crate::scalar::Scalar;

pub use crate::linalg::GramReport;

/// Bragg threshold relative to the strongest intensity (including `k = 0`).
pub const DEFAULT_EPSILON_FACTOR: f64 = 1e-3;
pub const DEFAULT_DELTA_REL: f64 = 0.05;
/// Per-doubling decay ratio that marks a continuous candidate.
pub const CONTINUOUS_RATIO: f64 = 0.6;

/// A frequency with its exact value when known.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frequency {
    #[serde(serialize_with = "output::ser_opt_quad")]
    pub exact: Option<QuadValue>,
    pub value: f64,
}

impl Frequency {
    pub fn exact(k: QuadValue) -> Self {
        let value = k.to_f64();
        Frequency { exact: Some(k), value }
    }

    pub fn float(value: f64) -> Self {
        Frequency { exact: None, value }
    }
}

impl From<QuadValue> for Frequency {
    fn from(k: QuadValue) -> Self {
        Frequency::exact(k)
    }
}

impl From<f64> for Frequency {
    fn from(k: f64) -> Self {
        Frequency::float(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum PeakClass {
    Bragg { i_inf: f64 },
    Continuous,
    Undecided,
}

impl PeakClass {
    pub fn name(&self) -> &'static str {
        match self {
            PeakClass::Bragg { .. } => "bragg",
            PeakClass::Continuous => "continuous",
            PeakClass::Undecided => "undecided",
        }
    }

    pub fn bragg_intensity(&self) -> Option<f64> {
        match self {
            PeakClass::Bragg { i_inf } => Some(*i_inf),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    DualLattice,
    Grid,
    Refined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEntry<T> {
    pub k: Frequency,
    /// `I_n(k)` for each van Hove size
    pub intensities: Vec<T>,
    pub class: PeakClass,
}

/// Classified intensity sequences over a candidate set.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumEstimate<T> {
    pub entries: Vec<SpectrumEntry<T>>,
    pub source: CandidateSource,
    pub vanhove: VanHoveSpec,
    pub epsilon: f64,
    pub delta_rel: f64,
    pub freq_window: Interval,
    /// Largest gap of the Bragg frequencies inside `freq_window`; `None`
    /// with fewer than two Bragg entries there.
    pub bragg_max_gap: Option<f64>,
    pub tag: String,
}

impl<T: Scalar> SpectrumEstimate<T> {
    pub fn bragg(&self) -> impl Iterator<Item = (&Frequency, f64)> {
        self.entries.iter().filter_map(|e| e.class.bragg_intensity().map(|i| (&e.k, i)))
    }

    pub fn bragg_count(&self) -> usize {
        self.bragg().count()
    }

    /// `Σ I∞` over Bragg entries with `k` in `window`.
    pub fn bragg_mass(&self, window: Interval) -> f64 {
        self.bragg().filter(|(k, _)| k.value >= window.lo && k.value <= window.hi).map(|(_, i)| i).sum()
    }

    pub fn count(&self, class: &str) -> usize {
        self.entries.iter().filter(|e| e.class.name() == class).count()
    }
}

/// Bragg/continuous decision parameters for [`bragg_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanParams {
    pub epsilon_factor: f64,
    pub delta_rel: f64,
    /// Frequency window for the max-gap statistic; defaults to the
    /// candidate range.
    pub freq_window: Option<Interval>,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams { epsilon_factor: DEFAULT_EPSILON_FACTOR, delta_rel: DEFAULT_DELTA_REL, freq_window: None }
    }
}

/// `c_n(k)`.
pub fn fb_coefficient<T: Scalar>(c: &WeightedComb<T>, k: impl Into<Frequency>, spec: &VanHoveSpec, n: u32) -> Result<Complex<T>> {
    let patch = c.restrict(spec.region(n))?;
    Ok(coefficient(patch.points(), k.into().value, spec.volume(n)))
}

fn coefficient<T: Scalar>(points: &[CombPoint<T>], k: f64, volume: f64) -> Complex<T> {
    let mut acc = Complex::<T>::zero();
    for p in points {
        let t = k * p.pos;
        let phase = -2.0 * PI * (t - t.round());
        let e = Complex::new(T::of(phase.cos()), T::of(phase.sin()));
        acc += p.weight * e;
    }
    acc / T::of(volume)
}

/// Points of each `A_n`, checked against the comb window once.
/// Patch points with the patch volume.
type Patch<'a, T> = (&'a [CombPoint<T>], f64);

fn patches<'a, T: Scalar>(c: &'a WeightedComb<T>, spec: &VanHoveSpec) -> Result<Vec<Patch<'a, T>>> {
    let outer = spec.region(spec.largest());
    if !c.window().contains_interval(&outer) {
        return Err(Error::IncompleteData(format!(
            "van Hove region [{}, {}] exceeds comb window [{}, {}]",
            outer.lo,
            outer.hi,
            c.window().lo,
            c.window().hi
        )));
    }
    let pts = c.points();
    spec.sizes()
        .iter()
        .map(|&n| {
            let r = spec.region(n);
            let lo = pts.partition_point(|p| p.pos < r.lo - 1e-9 * (1.0 + r.lo.abs()));
            let hi = pts.partition_point(|p| p.pos <= r.hi + 1e-9 * (1.0 + r.hi.abs()));
            let mut lo_i = lo;
            let mut hi_i = hi;
            while lo_i < hi_i && !r.contains(&pts[lo_i].coord, pts[lo_i].pos) {
                lo_i += 1;
            }
            while hi_i > lo_i && !r.contains(&pts[hi_i - 1].coord, pts[hi_i - 1].pos) {
                hi_i -= 1;
            }
            Ok((&pts[lo_i..hi_i], spec.volume(n)))
        })
        .collect()
}

/// `[I_n(k)]` over the van Hove sizes.
pub fn intensity_profile<T: Scalar>(c: &WeightedComb<T>, k: impl Into<Frequency>, spec: &VanHoveSpec) -> Result<Vec<T>> {
    let k = k.into().value;
    Ok(patches(c, spec)?.iter().map(|(pts, vol)| coefficient(pts, k, *vol).norm_sqr()).collect())
}

/// Bragg if the last value is at least `epsilon` and within `delta_rel`
/// of the previous one; continuous if it decays by 0.6 per step over the
/// last two steps; undecided otherwise.
pub fn classify_peak<T: Scalar>(profile: &[T], epsilon: f64, delta_rel: f64) -> Result<PeakClass> {
    if profile.len() < 3 {
        return Err(Error::domain(format!("classification needs >= 3 sizes, got {}", profile.len())));
    }
    let [pp, prev, last] = [profile.len() - 3, profile.len() - 2, profile.len() - 1].map(|i| profile[i].as_f64());
    if last >= epsilon && last > 0.0 && (last - prev).abs() <= delta_rel * last {
        return Ok(PeakClass::Bragg { i_inf: last });
    }
    if last <= CONTINUOUS_RATIO * prev && CONTINUOUS_RATIO * prev <= CONTINUOUS_RATIO * CONTINUOUS_RATIO * pp {
        return Ok(PeakClass::Continuous);
    }
    Ok(PeakClass::Undecided)
}

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let n = std::env::var("BRAGG_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
        rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool")
    })
}

/// Intensity profiles and classification for every candidate, sorted by `k`.
pub fn bragg_scan<T: Scalar>(
    c: &WeightedComb<T>,
    candidates: Vec<Frequency>,
    spec: &VanHoveSpec,
    source: CandidateSource,
    params: ScanParams,
) -> Result<SpectrumEstimate<T>> {
    if candidates.is_empty() {
        return Err(Error::domain("bragg_scan needs at least one candidate"));
    }
    if spec.sizes().len() < 3 {
        return Err(Error::domain("bragg_scan needs at least three van Hove sizes"));
    }
    let mut candidates = candidates;
    candidates.sort_by(|a, b| match (&a.exact, &b.exact) {
        (Some(x), Some(y)) => x.cmp(y),
        _ => a.value.total_cmp(&b.value),
    });
    let patches = patches(c, spec)?;
    let profiles: Vec<Vec<T>> = pool().install(|| {
        candidates.par_iter().map(|k| patches.iter().map(|(pts, vol)| coefficient(pts, k.value, *vol).norm_sqr()).collect()).collect()
    });
    let origin = patches.last().map(|(pts, vol)| coefficient(pts, 0.0, *vol).norm_sqr().as_f64()).unwrap_or(0.0);
    let strongest = profiles.iter().map(|p| p.last().expect("sizes").as_f64()).fold(origin, f64::max);
    let epsilon = params.epsilon_factor * strongest;
    let entries = candidates
        .into_iter()
        .zip(profiles)
        .map(|(k, intensities)| {
            let class = classify_peak(&intensities, epsilon, params.delta_rel)?;
            Ok(SpectrumEntry { k, intensities, class })
        })
        .collect::<Result<Vec<_>>>()?;
    let freq_window = params
        .freq_window
        .unwrap_or(Interval { lo: entries.first().expect("nonempty").k.value, hi: entries.last().expect("nonempty").k.value });
    let bragg_pos: Vec<f64> = entries
        .iter()
        .filter(|e| e.class.bragg_intensity().is_some() && e.k.value >= freq_window.lo && e.k.value <= freq_window.hi)
        .map(|e| e.k.value)
        .collect();
    let bragg_max_gap = max_gap_sorted(&bragg_pos, freq_window).ok();
    Ok(SpectrumEstimate {
        entries,
        source,
        vanhove: spec.clone(),
        epsilon,
        delta_rel: params.delta_rel,
        freq_window,
        bragg_max_gap,
        tag: c.tag().to_string(),
    })
}

/// Exact candidates restricted to a frequency window.
pub fn candidates_in(ks: &[QuadValue], window: Interval) -> Vec<Frequency> {
    ks.iter().filter(|k| window.contains(k, k.to_f64())).cloned().map(Frequency::exact).collect()
}

/// Uniform grid `lo, lo + step, …` up to `hi`, with exact dyadic values.
pub fn grid_candidates(window: Interval, step: f64) -> Result<Vec<Frequency>> {
    if !(step > 0.0) || window.is_empty() {
        return Err(Error::domain("grid needs a positive step and a nonempty window"));
    }
    let count = ((window.hi - window.lo) / step + 1e-9).floor() as usize;
    if count > 10_000_000 {
        return Err(Error::Capacity(format!("{count} grid candidates")));
    }
    (0..=count)
        .map(|i| {
            let k = window.lo + i as f64 * step;
            QuadValue::from_f64_exact(k).map(|q| Frequency { exact: Some(q), value: k })
        })
        .collect()
}

/// Grid step `1 / (8 ρ)` for a comb of point density `ρ`.
pub fn default_grid_step(density: f64) -> f64 {
    1.0 / (8.0 * density)
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Local maximiser of `I_{n_last}` on `[k0 - radius, k0 + radius]`.
///
/// A grid of step at most `1 / (4 Vol)` brackets the main lobe (Dirichlet
/// sidelobes make the profile multimodal); golden-section search then
/// narrows the bracket to width `1e-9`. Returns `k0` when nothing beats it.
pub fn refine_peak<T: Scalar>(c: &WeightedComb<T>, k0: f64, radius: f64, spec: &VanHoveSpec) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::domain("refine radius must be > 0"));
    }
    let patches = patches(c, spec)?;
    let (pts, vol) = *patches.last().expect("sizes");
    let f = |k: f64| coefficient(pts, k, vol).norm_sqr().as_f64();
    let steps = ((2.0 * radius * 4.0 * vol).ceil() as usize).max(2);
    if steps > 50_000_000 {
        return Err(Error::Capacity(format!("refinement grid of {steps} points")));
    }
    let h = 2.0 * radius / steps as f64;
    let (mut best_k, mut best) = (k0, f(k0));
    for i in 0..=steps {
        let k = k0 - radius + i as f64 * h;
        let v = f(k);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    if best_k == k0 {
        return Ok(k0);
    }
    let (mut a, mut b) = ((best_k - h).max(k0 - radius), (best_k + h).min(k0 + radius));
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-9 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1);
        }
    }
    let mid = (a + b) / 2.0;
    Ok(if f(mid) >= best { mid } else { best_k })
}

#[cfg(test)]
mod tests;
