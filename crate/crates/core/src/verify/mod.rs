//! Theorem-level experiments on generated combs, each producing a
//! [`VerifyReport`] of named numeric checks.

mod suite;

use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use suite::{run_suite, SuiteConfig, Theorem};

use crate::autocorr::{autocorrelation, covering_set, covers, order_check, Autocorrelation, MEASURE_TOL};
use crate::comb::{compare_combs, threshold_subset, CombOrder, Interval, PointSet, VanHoveSpec, WeightedComb};
use crate::cps::{generate_model_comb, CPScheme, WeightFn};
use crate::error::{Error, Result};
use crate::exactnum::QuadValue;
use crate::spectrum::{
    bragg_scan, candidates_in, decompose, gram_psd, CandidateSource, DecomposeParams, Decomposition, Frequency, ScanParams,
    SpectrumEstimate,
};

/// Tolerance of the decomposition checks (nonnegativity, domination).
pub const DECOMPOSITION_TOL: f64 = 1e-6;
/// Gram PSD tolerance, relative to the trace.
pub const GRAM_TOL: f64 = 1e-8;
/// Largest Gram sample drawn from a support.
pub const GRAM_SAMPLES: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub witness: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub theorem: String,
    pub scenario: String,
    pub seed: Option<u64>,
    pub checks: Vec<Check>,
    pub pass: bool,
    /// Wall time; `None` unless timing was requested, so that reports
    /// stay byte-identical across runs.
    pub runtime_ms: Option<u64>,
}

impl VerifyReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

struct Recorder {
    theorem: String,
    scenario: String,
    seed: Option<u64>,
    checks: Vec<Check>,
    start: Instant,
}

impl Recorder {
    fn new(theorem: &str, scenario: impl Into<String>, seed: Option<u64>) -> Self {
        Recorder { theorem: theorem.into(), scenario: scenario.into(), seed, checks: Vec::new(), start: Instant::now() }
    }

    fn check(&mut self, name: impl Into<String>, pass: bool, witness: f64, tol: f64) {
        self.checks.push(Check { name: name.into(), pass, witness, tol });
    }

    /// Records `witness <= tol`.
    fn at_most(&mut self, name: impl Into<String>, witness: f64, tol: f64) {
        self.check(name, witness <= tol, witness, tol);
    }

    fn finish(self, timed: bool) -> VerifyReport {
        let pass = self.checks.iter().all(|c| c.pass);
        VerifyReport {
            theorem: self.theorem,
            scenario: self.scenario,
            seed: self.seed,
            checks: self.checks,
            pass,
            runtime_ms: timed.then(|| self.start.elapsed().as_millis() as u64),
        }
    }
}

/// Numeric knobs shared by the scenarios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioParams {
    pub vanhove: VanHoveSpec,
    /// Autocorrelation radius for ordering checks.
    pub radius: f64,
    /// Autocorrelation radius for decompositions; must exceed the
    /// almost-period range.
    pub decompose_radius: f64,
    pub coeff_bound: u32,
    pub freq_window: Interval,
    pub decompose: DecomposeParams,
    pub scan: ScanParams,
    pub timed: bool,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        let vanhove = VanHoveSpec::default();
        ScenarioParams {
            radius: crate::autocorr::default_radius(&vanhove),
            decompose_radius: 100.0 * vanhove.base(),
            vanhove,
            coeff_bound: 8,
            freq_window: Interval { lo: 0.0, hi: 10.0 },
            decompose: DecomposeParams::default(),
            scan: ScanParams::default(),
            timed: false,
        }
    }
}

/// How a sub-comb `ω'` is selected from a model comb `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubcombRule {
    Identity,
    /// keep points with internal coordinate in the left half of the window
    InternalLeftHalf,
    /// keep points with internal coordinate in the middle third of the
    /// window, with unit weight
    InternalMiddleThird,
    /// keep each point independently with probability `p`
    Bernoulli {
        p: f64,
        seed: u64,
    },
}

impl SubcombRule {
    pub fn label(&self) -> String {
        match self {
            SubcombRule::Identity => "identity".into(),
            SubcombRule::InternalLeftHalf => "internal-left-half".into(),
            SubcombRule::InternalMiddleThird => "internal-middle-third".into(),
            SubcombRule::Bernoulli { p, .. } => format!("bernoulli({p})"),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            SubcombRule::Bernoulli { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    pub fn apply(&self, scheme: &CPScheme, omega: &WeightedComb<f64>) -> WeightedComb<f64> {
        let w = scheme.window();
        let inside = |p: &crate::comb::CombPoint<f64>, lo: f64, hi: f64| {
            let xs = scheme.internal_of(&p.coord);
            Interval { lo, hi }.contains(&xs, xs.to_f64())
        };
        let c = match *self {
            SubcombRule::Identity => omega.clone(),
            SubcombRule::InternalLeftHalf => {
                let mid = (w.lo + w.hi) / 2.0;
                omega.map_weights(|p| if inside(p, w.lo, mid) { p.weight } else { Complex::new(0.0, 0.0) })
            }
            SubcombRule::InternalMiddleThird => {
                let third = w.length() / 3.0;
                omega.map_weights(|p| Complex::new(if inside(p, w.lo + third, w.hi - third) { 1.0 } else { 0.0 }, 0.0))
            }
            SubcombRule::Bernoulli { p, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                omega.map_weights(|pt| if rng.random_bool(p) { pt.weight } else { Complex::new(0.0, 0.0) })
            }
        };
        c.with_tag(format!("{}[{}]", omega.tag(), self.label()))
    }
}

/// Random sub-comb keeping each point with probability `keep`.
pub fn random_subcomb(omega: &WeightedComb<f64>, keep: f64, rng: &mut impl Rng) -> WeightedComb<f64> {
    omega.map_weights(|p| if rng.random_bool(keep) { p.weight } else { Complex::new(0.0, 0.0) })
}

/// Model comb of `scheme` covering the largest van Hove region.
pub fn model_comb(scheme: &CPScheme, weight: &WeightFn, spec: &VanHoveSpec) -> Result<WeightedComb<f64>> {
    generate_model_comb(scheme, weight, spec.region(spec.largest()))
}

/// Ordering at every `n`: `γ'_n <= C² γ_n` when `0 <= ω' <= C ω`.
pub fn verify_ordering(
    omega_prime: &WeightedComb<f64>,
    omega: &WeightedComb<f64>,
    c: f64,
    params: &ScenarioParams,
) -> Result<VerifyReport> {
    let order = compare_combs(omega_prime, omega, c)?;
    if order != CombOrder::Below {
        return Err(Error::Scenario(format!("ordering needs 0 <= ω' <= {c} ω, got {order:?}")));
    }
    let mut rec = Recorder::new("L4", format!("{} <= {c} * {}", omega_prime.tag(), omega.tag()), None);
    for &n in params.vanhove.sizes() {
        let g1 = autocorrelation(omega_prime, &params.vanhove, n, params.radius)?;
        let g2 = autocorrelation(omega, &params.vanhove, n, params.radius)?;
        let v = order_check(&g1, &g2, c * c)?;
        rec.at_most(format!("order[n={n}]"), v.max_violation, MEASURE_TOL);
    }
    Ok(rec.finish(params.timed))
}

fn negated(a: &Autocorrelation<f64>) -> Autocorrelation<f64> {
    let entries = a.entries().iter().map(|(z, v)| (z.clone(), -v)).collect();
    Autocorrelation::from_entries(entries, a.n(), a.volume(), a.radius(), a.tag())
}

/// `-C² γ_n <= γ'_n <= C² γ_n` at every `n` when `|ω'| <= C ω`.
pub fn verify_sandwich(
    omega_prime: &WeightedComb<f64>,
    omega: &WeightedComb<f64>,
    c: f64,
    params: &ScenarioParams,
) -> Result<VerifyReport> {
    let order = compare_combs(omega_prime, omega, c)?;
    if order == CombOrder::Neither || !omega_prime.is_real() {
        return Err(Error::Scenario(format!("sandwich needs real |ω'| <= {c} ω, got {order:?}")));
    }
    let mut rec = Recorder::new("sandwich", format!("|{}| <= {c} * {}", omega_prime.tag(), omega.tag()), None);
    for &n in params.vanhove.sizes() {
        let g1 = autocorrelation(omega_prime, &params.vanhove, n, params.radius)?;
        let g2 = autocorrelation(omega, &params.vanhove, n, params.radius)?;
        let upper = order_check(&g1, &g2, c * c)?;
        let lower = order_check(&negated(&g1), &g2, c * c)?;
        rec.at_most(format!("upper[n={n}]"), upper.max_violation, MEASURE_TOL);
        rec.at_most(format!("lower[n={n}]"), lower.max_violation, MEASURE_TOL);
    }
    Ok(rec.finish(params.timed))
}

fn scan_dual(scheme: &CPScheme, comb: &WeightedComb<f64>, params: &ScenarioParams) -> Result<SpectrumEstimate<f64>> {
    let ks = candidates_in(&scheme.dual_candidates(params.coeff_bound)?, params.freq_window);
    let scan = ScanParams { freq_window: Some(params.freq_window), ..params.scan };
    bragg_scan(comb, ks, &params.vanhove, CandidateSource::DualLattice, scan)
}

/// Up to [`GRAM_SAMPLES`] support points nearest 0 within `[-r/2, r/2]`.
fn gram_samples(c: &WeightedComb<f64>, r: f64) -> Vec<QuadValue> {
    let mut pts: Vec<(f64, QuadValue)> =
        c.points().iter().filter(|p| p.pos.abs() <= r / 2.0).map(|p| (p.pos.abs(), p.coord.clone())).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<QuadValue> = pts.into_iter().take(GRAM_SAMPLES).map(|p| p.1).collect();
    out.sort();
    out
}

/// Largest shortfall of `supp(table) ⊆ Δ` (0 when contained).
fn support_escapes(table: &Autocorrelation<f64>, diff: &PointSet) -> f64 {
    table.entries().iter().filter(|(z, _)| !diff.contains(z)).count() as f64
}

/// Decomposition of `a` with the almost periods taken from `reference`
/// (the same averaging for every comb compared against it).
fn decompose_against(a: &Autocorrelation<f64>, reference: &Decomposition<f64>) -> Result<Decomposition<f64>> {
    crate::spectrum::decompose_with_periods(a, &reference.periods)
}

/// Strongly almost periodic part of `ω' = rule(ω)`, with `ω` the model comb:
/// nonnegative, dominated by `C²` times that of `ω`, positive definite, and
/// supported in the difference set.
pub fn verify_theorem_l1(scheme: &CPScheme, weight: &WeightFn, rule: SubcombRule, c: f64, params: &ScenarioParams) -> Result<VerifyReport> {
    let omega = model_comb(scheme, weight, &params.vanhove)?;
    let omega_prime = rule.apply(scheme, &omega);
    let order = compare_combs(&omega_prime, &omega, c)?;
    if order != CombOrder::Below {
        return Err(Error::Scenario(format!("rule {} does not give 0 <= ω' <= {c} ω", rule.label())));
    }
    let mut rec = Recorder::new("L1", format!("{} / {}", scheme.name(), rule.label()), rule.seed());
    let n = params.vanhove.largest();
    let spectrum = scan_dual(scheme, &omega, params)?;
    let gamma = autocorrelation(&omega, &params.vanhove, n, params.decompose_radius)?;
    let gamma_p = autocorrelation(&omega_prime, &params.vanhove, n, params.decompose_radius)?;
    let reference = decompose(&gamma, &spectrum, params.decompose)?;
    let dec = decompose_against(&gamma_p, &reference)?;
    let s = &dec.gamma_s;

    let min = s.entries().iter().map(|(_, v)| v.re).fold(f64::INFINITY, f64::min);
    let min = if min.is_finite() { min } else { 0.0 };
    rec.check("nonnegative", min >= -DECOMPOSITION_TOL, min, DECOMPOSITION_TOL);

    let scale = c * c;
    let excess = s.entries().iter().filter_map(|(z, v)| reference.gamma_s.get(z).map(|r| v.re - scale * r.re)).fold(0.0, f64::max);
    rec.at_most("dominated", excess, DECOMPOSITION_TOL);

    let samples = gram_samples(&omega_prime, s.radius());
    let gram = gram_psd(s, &samples, GRAM_TOL)?;
    rec.check("gram_psd", gram.pass && !gram.missing_entries, gram.min_eigenvalue, -GRAM_TOL * gram.trace);

    let diff = omega.difference_set(params.decompose_radius)?;
    rec.at_most("support", support_escapes(s, &diff), 0.0);
    Ok(rec.finish(params.timed))
}

/// How `ω'` is built for [`verify_t1`].
#[derive(Debug, Clone, PartialEq)]
pub enum PrimeComb {
    Rule(SubcombRule),
    /// unit mass at one exact point of `ω`
    SinglePoint(QuadValue),
}

impl PrimeComb {
    fn label(&self) -> String {
        match self {
            PrimeComb::Rule(r) => r.label(),
            PrimeComb::SinglePoint(x) => format!("single-point({x})"),
        }
    }
}

/// Relative density of the Bragg peaks of `ω'` when `0 <= ω' <= C ω`.
pub fn verify_t1(scheme: &CPScheme, weight: &WeightFn, prime: &PrimeComb, c1: f64, params: &ScenarioParams) -> Result<VerifyReport> {
    let omega = model_comb(scheme, weight, &params.vanhove)?;
    let omega_prime = match prime {
        PrimeComb::Rule(r) => r.apply(scheme, &omega),
        PrimeComb::SinglePoint(x) => {
            if omega.weight_at(x).is_none() {
                return Err(Error::Scenario(format!("{x} is not a point of the model comb")));
            }
            WeightedComb::from_real(vec![(x.clone(), 1.0)], omega.window(), "single")?
        }
    };
    let c2 = omega.max_abs_weight();
    let c = omega_prime.points().iter().filter_map(|p| omega.weight_at(&p.coord).map(|w| p.weight.re / w.re)).fold(0.0, f64::max).max(1.0);
    if compare_combs(&omega_prime, &omega, c)? != CombOrder::Below {
        return Err(Error::Scenario("ω' must satisfy 0 <= ω' <= C ω".into()));
    }
    let mut rec = Recorder::new("T1", format!("{} / {}", scheme.name(), prime.label()), None);
    let n = params.vanhove.largest();
    let se = scan_dual(scheme, &omega, params)?;
    let se_p = scan_dual(scheme, &omega_prime, params)?;
    let gap_bound = se.bragg_max_gap.map(|g| 2.0 * g);

    let diff = omega.difference_set(params.decompose_radius)?;
    let gamma_p = autocorrelation(&omega_prime, &params.vanhove, n, params.decompose_radius)?;
    let escapes = match decompose(&gamma_p, &se_p, params.decompose) {
        Ok(d) => support_escapes(&d.gamma_s, &diff) + support_escapes(&d.gamma_0, &diff),
        Err(Error::EmptySpectrum) => support_escapes(&gamma_p, &diff),
        Err(e) => return Err(e),
    };
    rec.at_most("support", escapes, 0.0);

    let bragg = se_p.bragg_count();
    let gap_ok = |g: Option<f64>| matches!((g, gap_bound), (Some(g), Some(b)) if g <= b);
    let bound = gap_bound.unwrap_or(f64::INFINITY);
    let gap = se_p.bragg_max_gap.unwrap_or(f64::INFINITY);
    rec.check("bragg_empty_or_dense", bragg == 0 || gap_ok(se_p.bragg_max_gap), if bragg == 0 { 0.0 } else { gap }, bound);

    let gamma_set = threshold_subset(&omega_prime, c1)?;
    if gamma_set.max_gap().is_ok() {
        rec.check("bragg_nonempty", bragg > 0, bragg as f64, 1.0);
        rec.check("bragg_relatively_dense", gap_ok(se_p.bragg_max_gap), gap, bound);
        let lambda = omega.support();
        let f = covering_set(&lambda, &gamma_set)?;
        rec.check("covering", covers(&lambda, &gamma_set, &f)?, f.len() as f64, 0.0);
        let mut worst: f64 = 0.0;
        for p in omega.points() {
            let mut rhs = 0.0;
            for off in f.coords() {
                if let Some(w) = omega_prime.weight_at(&p.coord.checked_sub(off)?) {
                    rhs += w.re;
                }
            }
            worst = worst.max(p.weight.re - c2 / c1 * rhs);
        }
        rec.at_most("comparison_chain", worst, MEASURE_TOL);
    }
    Ok(rec.finish(params.timed))
}

/// Bragg mass under domination: `ω <= ω'` keeps at least 95% of the Bragg
/// mass over the frequency window.
pub fn verify_p1(
    omega: &WeightedComb<f64>,
    omega_prime: &WeightedComb<f64>,
    candidates: Vec<Frequency>,
    source: CandidateSource,
    params: &ScenarioParams,
) -> Result<VerifyReport> {
    if compare_combs(omega, omega_prime, 1.0)? != CombOrder::Below {
        return Err(Error::Scenario("P1 needs 0 <= ω <= ω'".into()));
    }
    let mut rec = Recorder::new("P1", format!("{} <= {}", omega.tag(), omega_prime.tag()), None);
    let scan = ScanParams { freq_window: Some(params.freq_window), ..params.scan };
    let se = bragg_scan(omega, candidates.clone(), &params.vanhove, source, scan)?;
    let se_p = bragg_scan(omega_prime, candidates, &params.vanhove, source, scan)?;
    let (m, mp) = (se.bragg_mass(params.freq_window), se_p.bragg_mass(params.freq_window));
    rec.check("reference_has_bragg", m > 0.0, m, 0.0);
    rec.check("bragg_mass", mp >= 0.95 * m, mp, 0.95 * m);
    Ok(rec.finish(params.timed))
}
