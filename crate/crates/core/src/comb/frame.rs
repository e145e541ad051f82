//! Exact pair-difference enumeration.
//!
//! Comb coordinates usually share a small common denominator, so every
//! point can be written as `(P + Q sqrt(m)) / D` with machine-sized `P`,
//! `Q`. Differences then reduce to checked `i128` subtraction, and the
//! `(P, Q)` pair is an exact hash key. When the frame does not fit, the
//! enumeration falls back to full [`QuadValue`] arithmetic.

use std::collections::HashMap;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::exactnum::QuadValue;

/// Exact difference keys for a fixed list of coordinates.
pub(crate) trait DiffSpace {
    type Key: Hash + Eq + Clone;

    fn diff(&self, i: usize, j: usize) -> Result<Self::Key>;

    fn to_quad(&self, key: &Self::Key) -> QuadValue;
}

pub(crate) struct Framed {
    den: BigInt,
    m: u32,
    keys: Vec<(i128, i128)>,
}

impl Framed {
    pub(crate) fn build(coords: &[&QuadValue]) -> Option<Self> {
        let mut den = BigInt::one();
        let mut m = 0;
        for c in coords {
            den = den.lcm(c.d());
            if c.radicand() != 0 {
                m = c.radicand();
            }
        }
        let keys = coords
            .iter()
            .map(|c| {
                let scale = &den / c.d();
                Some(((c.p() * &scale).to_i128()?, (c.q() * &scale).to_i128()?))
            })
            .collect::<Option<Vec<_>>>()?;
        // leave headroom so differences of differences stay representable
        let limit = i128::MAX / 8;
        if keys.iter().any(|(p, q)| p.abs() > limit || q.abs() > limit) {
            return None;
        }
        Some(Framed { den, m, keys })
    }
}

impl DiffSpace for Framed {
    type Key = (i128, i128);

    fn diff(&self, i: usize, j: usize) -> Result<(i128, i128)> {
        let (a, b) = (self.keys[i], self.keys[j]);
        match (a.0.checked_sub(b.0), a.1.checked_sub(b.1)) {
            (Some(p), Some(q)) => Ok((p, q)),
            _ => Err(Error::Capacity("coordinate difference overflows i128 frame".into())),
        }
    }

    fn to_quad(&self, key: &(i128, i128)) -> QuadValue {
        QuadValue::canonical(BigInt::from(key.0), BigInt::from(key.1), self.den.clone(), self.m)
    }
}

pub(crate) struct Exact<'a> {
    coords: Vec<&'a QuadValue>,
}

impl DiffSpace for Exact<'_> {
    type Key = QuadValue;

    fn diff(&self, i: usize, j: usize) -> Result<QuadValue> {
        self.coords[i].checked_sub(self.coords[j])
    }

    fn to_quad(&self, key: &QuadValue) -> QuadValue {
        key.clone()
    }
}

/// Visits every ordered pair `(i, j)` of sorted positions with
/// `|x_i - x_j| <= radius` (decided exactly), in lexicographic `(i, j)`
/// order.
pub(crate) fn for_each_pair_within<S: DiffSpace>(
    space: &S,
    coords: &[&QuadValue],
    pos: &[f64],
    radius: f64,
    mut visit: impl FnMut(usize, usize, S::Key),
) -> Result<()> {
    let radius_exact = QuadValue::from_f64_exact(radius)?;
    let n = pos.len();
    let mut lo = 0;
    for i in 0..n {
        let tol = 1e-9 * (1.0 + pos[i].abs());
        while lo < n && pos[lo] < pos[i] - radius - tol {
            lo += 1;
        }
        let mut j = lo;
        while j < n && pos[j] <= pos[i] + radius + tol {
            let gap = (pos[i] - pos[j]).abs();
            let inside = if gap < radius - tol {
                true
            } else if gap > radius + tol {
                false
            } else {
                coords[i].checked_sub(coords[j])?.abs() <= radius_exact
            };
            if inside {
                visit(i, j, space.diff(i, j)?);
            }
            j += 1;
        }
    }
    Ok(())
}

/// Accumulates `value(i, j)` per exact difference, returning entries sorted
/// by difference. Each per-key sum runs in `(i, j)` order.
pub(crate) fn accumulate_pairs<V: Copy + std::ops::AddAssign>(
    coords: &[&QuadValue],
    pos: &[f64],
    radius: f64,
    value: impl Fn(usize, usize) -> V,
) -> Result<Vec<(QuadValue, V)>> {
    fn run<S: DiffSpace, V: Copy + std::ops::AddAssign>(
        space: &S,
        coords: &[&QuadValue],
        pos: &[f64],
        radius: f64,
        value: &impl Fn(usize, usize) -> V,
    ) -> Result<Vec<(QuadValue, V)>> {
        let mut acc: HashMap<S::Key, V> = HashMap::new();
        for_each_pair_within(space, coords, pos, radius, |i, j, key| {
            let v = value(i, j);
            acc.entry(key).and_modify(|s| *s += v).or_insert(v);
        })?;
        let mut out: Vec<(QuadValue, V)> = acc.into_iter().map(|(k, v)| (space.to_quad(&k), v)).collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }
    match Framed::build(coords) {
        Some(space) => run(&space, coords, pos, radius, &value),
        None => run(&Exact { coords: coords.to_vec() }, coords, pos, radius, &value),
    }
}
