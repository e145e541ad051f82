use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex;
use num_traits::Zero;
use serde::Serialize;

use super::SpectrumEstimate;
use crate::autocorr::Autocorrelation;
use crate::error::{Error, Result};
use crate::exactnum::QuadValue;
use crate::linalg::{gram_report, GramReport};
use crate::scalar::Scalar;

/// `Σ_{Bragg k} I∞(k) e^{2πikz}`.
pub fn sap_resum<T: Scalar>(se: &SpectrumEstimate<T>, z: &QuadValue) -> Result<Complex<f64>> {
    if se.bragg_count() == 0 {
        return Err(Error::EmptySpectrum);
    }
    let zf = z.to_f64();
    Ok(se
        .bragg()
        .map(|(k, i)| {
            let t = k.value * zf;
            Complex::from_polar(i, 2.0 * PI * (t - t.round()))
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecomposeParams {
    /// `t` is an almost period when `Re R(t) >= (1 - theta) R(0)`
    pub theta: f64,
    /// Search range `[0, r0]` for almost periods; `None` means `40 L0`.
    pub r0: Option<f64>,
}

impl Default for DecomposeParams {
    fn default() -> Self {
        DecomposeParams { theta: 0.02, r0: None }
    }
}

/// `γ = γ_S + γ_0` on the interior of the autocorrelation table.
#[derive(Debug, Clone)]
pub struct Decomposition<T> {
    pub gamma_s: Autocorrelation<T>,
    pub gamma_0: Autocorrelation<T>,
    /// Almost periods used for the average, ascending; always contains 0.
    pub periods: Vec<QuadValue>,
}

impl<T: Scalar> Decomposition<T> {
    /// `max_z |γ_0(z)|`.
    pub fn residual(&self) -> f64 {
        self.gamma_0.entries().iter().map(|(_, v)| v.norm().as_f64()).fold(0.0, f64::max)
    }
}

/// Support points `t` of `a` in `[0, r0]` at which the resummed Bragg
/// series `R(t) = Σ I∞ e^{2πikt}` stays within `theta` of `R(0)`.
pub fn almost_periods<T: Scalar>(a: &Autocorrelation<T>, se: &SpectrumEstimate<T>, params: DecomposeParams) -> Result<Vec<QuadValue>> {
    if !(params.theta > 0.0 && params.theta < 1.0) {
        return Err(Error::domain(format!("theta must lie in (0, 1), got {}", params.theta)));
    }
    let r0 = params.r0.unwrap_or(40.0 * se.vanhove.base());
    let origin = sap_resum(se, &QuadValue::zero())?.re;
    let mut out = Vec::new();
    for (t, _) in a.entries() {
        let tf = t.to_f64();
        if tf < 0.0 || tf > r0 {
            continue;
        }
        if sap_resum(se, t)?.re >= (1.0 - params.theta) * origin {
            out.push(t.clone());
        }
    }
    if out.first() != Some(&QuadValue::zero()) {
        out.insert(0, QuadValue::zero());
    }
    Ok(out)
}

/// Splits `a` into a strongly almost periodic part and a null remainder.
///
/// `γ_S(z) = |T|^{-2} Σ_{t, t' ∈ T} a(z + t - t')` is the Fejér mean of
/// `a` over the almost periods `T` from [`almost_periods`]. The map is
/// linear, positive and preserves positive definiteness. Output covers
/// `z ∈ supp(a)` with `|z| + max T <= a.radius`, where every term is known.
pub fn decompose<T: Scalar>(a: &Autocorrelation<T>, se: &SpectrumEstimate<T>, params: DecomposeParams) -> Result<Decomposition<T>> {
    let periods = almost_periods(a, se, params)?;
    decompose_with_periods(a, &periods)
}

/// [`decompose`] with a given set of almost periods (nonnegative, sorted,
/// containing 0), so that several tables can share one averaging.
pub fn decompose_with_periods<T: Scalar>(a: &Autocorrelation<T>, periods: &[QuadValue]) -> Result<Decomposition<T>> {
    if periods.first() != Some(&QuadValue::zero()) || periods.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("almost periods must be sorted, distinct and start at 0"));
    }
    let reach = periods.last().expect("contains 0").to_f64();
    let interior = a.radius() - reach;
    if interior < 0.0 {
        return Err(Error::domain(format!("autocorrelation radius {} is below the almost-period range {reach}", a.radius())));
    }
    let mut shifts: HashMap<QuadValue, u64> = HashMap::new();
    for t in periods {
        for u in periods {
            *shifts.entry(t.checked_sub(u)?).or_default() += 1;
        }
    }
    let mut shifts: Vec<(QuadValue, u64)> = shifts.into_iter().collect();
    shifts.sort_by(|x, y| x.0.cmp(&y.0));
    let norm = T::of((periods.len() * periods.len()) as f64);
    let mut s_entries = Vec::new();
    let mut o_entries = Vec::new();
    for (z, v) in a.entries() {
        if z.to_f64().abs() > interior + 1e-9 {
            continue;
        }
        let mut acc = Complex::<T>::zero();
        for (d, count) in &shifts {
            acc += a.value(&z.checked_add(d)?) * T::of(*count as f64);
        }
        let s = acc / norm;
        s_entries.push((z.clone(), s));
        o_entries.push((z.clone(), *v - s));
    }
    let tag = a.tag();
    Ok(Decomposition {
        gamma_s: Autocorrelation::from_entries(s_entries, a.n(), a.volume(), interior, format!("{tag}/S")),
        gamma_0: Autocorrelation::from_entries(o_entries, a.n(), a.volume(), interior, format!("{tag}/0")),
        periods: periods.to_vec(),
    })
}

/// PSD test of `[v(z_i - z_j)]`; differences absent from the table count
/// as zero and set `missing_entries`.
pub fn gram_psd<T: Scalar>(values: &Autocorrelation<T>, samples: &[QuadValue], tolerance: f64) -> Result<GramReport> {
    let mut missing = false;
    let mut m = Vec::with_capacity(samples.len());
    for zi in samples {
        let mut row = Vec::with_capacity(samples.len());
        for zj in samples {
            let v = values.get(&zi.checked_sub(zj)?).unwrap_or_else(|| {
                missing = true;
                Complex::zero()
            });
            row.push(v);
        }
        m.push(row);
    }
    gram_report(&m, tolerance, missing)
}
