use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    model_comb, random_subcomb, verify_ordering, verify_p1, verify_sandwich, verify_t1, verify_theorem_l1, PrimeComb, ScenarioParams,
    SubcombRule, VerifyReport,
};
use crate::comb::WeightedComb;
use crate::cps::{CPScheme, WeightFn};
use crate::error::{Error, Result};
use crate::exactnum::QuadValue;
use crate::spectrum::{candidates_in, CandidateSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    L1,
    L4,
    T1,
    P1,
    Sandwich,
    All,
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Theorem::L1),
            "l4" => Ok(Theorem::L4),
            "t1" => Ok(Theorem::T1),
            "p1" => Ok(Theorem::P1),
            "sandwich" => Ok(Theorem::Sandwich),
            "all" => Ok(Theorem::All),
            _ => Err(Error::parse(format!("unknown theorem {s:?} (L1, L4, T1, P1, sandwich, all)"))),
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theorem::L1 => "L1",
            Theorem::L4 => "L4",
            Theorem::T1 => "T1",
            Theorem::P1 => "P1",
            Theorem::Sandwich => "sandwich",
            Theorem::All => "all",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub params: ScenarioParams,
    /// Random sub-combs per randomized ordering/sandwich scenario.
    pub trials: usize,
}

impl SuiteConfig {
    pub fn new(seed: u64) -> Self {
        SuiteConfig { seed, params: ScenarioParams::default(), trials: 3 }
    }
}

fn zero() -> Complex<f64> {
    Complex::new(0.0, 0.0)
}

/// Runs the scenarios of `theorem` for one scheme, in a fixed order.
pub fn run_suite(theorem: Theorem, scheme: &CPScheme, weight: &WeightFn, cfg: &SuiteConfig) -> Result<Vec<VerifyReport>> {
    let p = &cfg.params;
    let omega = model_comb(scheme, weight, &p.vanhove)?;
    let wants = |t: Theorem| theorem == t || theorem == Theorem::All;
    let mut out = Vec::new();

    if wants(Theorem::L4) {
        out.push(verify_ordering(&omega, &omega, 1.0, p)?);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for trial in 0..cfg.trials {
            let thin = random_subcomb(&omega, 0.7, &mut rng).with_tag(format!("{}[thin0.3#{trial}]", omega.tag()));
            let mut r = verify_ordering(&thin, &omega, 1.0, p)?;
            r.seed = Some(cfg.seed);
            out.push(r);
        }
    }
    if wants(Theorem::Sandwich) {
        out.push(verify_sandwich(&omega, &omega, 1.0, p)?);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for trial in 0..cfg.trials {
            let signed =
                omega.map_weights(|pt| pt.weight * rng.random_range(-1.0..=1.0)).with_tag(format!("{}[signed#{trial}]", omega.tag()));
            let mut r = verify_sandwich(&signed, &omega, 1.0, p)?;
            r.seed = Some(cfg.seed);
            out.push(r);
        }
    }
    if wants(Theorem::L1) {
        for rule in [SubcombRule::Identity, SubcombRule::InternalLeftHalf, SubcombRule::Bernoulli { p: 0.5, seed: cfg.seed }] {
            out.push(verify_theorem_l1(scheme, weight, rule, 1.0, p)?);
        }
    }
    if wants(Theorem::T1) {
        let nearest = omega
            .points()
            .iter()
            .min_by(|a, b| a.pos.abs().total_cmp(&b.pos.abs()))
            .map(|pt| pt.coord.clone())
            .ok_or_else(|| Error::Scenario("model comb is empty".into()))?;
        let half_max = omega.max_abs_weight() / 2.0;
        out.push(verify_t1(scheme, weight, &PrimeComb::Rule(SubcombRule::InternalMiddleThird), 1.0, p)?);
        out.push(verify_t1(scheme, weight, &PrimeComb::Rule(SubcombRule::Identity), half_max, p)?);
        out.push(verify_t1(scheme, weight, &PrimeComb::SinglePoint(nearest), 1.0, p)?);
    }
    if wants(Theorem::P1) {
        let ks = candidates_in(&scheme.dual_candidates(p.coeff_bound)?, p.freq_window);
        out.push(verify_p1(&omega, &omega, ks.clone(), CandidateSource::DualLattice, p)?);
        let r = omega.window();
        let half = QuadValue::from_ratio(1, 2)?;
        let lo = (r.lo - 0.5).ceil() as i64;
        let hi = (r.hi - 0.5).floor() as i64;
        let shifted: Vec<(QuadValue, f64)> = (lo..=hi).map(|j| (&QuadValue::from_int(j) + &half, 1.0)).collect();
        let extra = WeightedComb::from_real(shifted, r, "Z+1/2")?;
        let bigger = omega.sum(&extra)?;
        debug_assert!(bigger.points().iter().all(|pt| pt.weight != zero()));
        out.push(verify_p1(&omega, &bigger, ks, CandidateSource::DualLattice, p)?);
    }
    Ok(out)
}
