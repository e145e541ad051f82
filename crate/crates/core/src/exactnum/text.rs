//! Textual form `p/d+q/d*sqrt(m)`.
//!
//! Output prints each part as a reduced fraction and drops zero terms
//! (`3`, `sqrt(2)`, `1/2+1/2*sqrt(5)`, `-1/3*sqrt(7)`). The parser accepts
//! that form plus decimals (`0.25`), `sqrt(m)/k`, any number of summed
//! terms, and radicands with square factors (`sqrt(8)` reads as
//! `2*sqrt(2)`).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::QuadValue;
use crate::error::{Error, Result};

fn fmt_ratio(num: &BigInt, den: &BigInt) -> String {
    let g = num.gcd(den);
    let (n, d) = if g.is_zero() { (num.clone(), den.clone()) } else { (num / &g, den / &g) };
    if d.is_one() {
        n.to_string()
    } else {
        format!("{n}/{d}")
    }
}

fn fmt_sqrt_term(num: &BigInt, den: &BigInt, m: u32) -> String {
    let g = num.gcd(den);
    let (n, d) = (num / &g, den / &g);
    let root = format!("sqrt({m})");
    match (d.is_one(), n.to_string().as_str()) {
        (true, "1") => root,
        (true, "-1") => format!("-{root}"),
        (true, s) => format!("{s}*{root}"),
        (false, s) => format!("{s}/{d}*{root}"),
    }
}

impl fmt::Display for QuadValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_zero() {
            return f.write_str(&fmt_ratio(&self.p, &self.d));
        }
        let irr = fmt_sqrt_term(&self.q, &self.d, self.m);
        if self.p.is_zero() {
            return f.write_str(&irr);
        }
        let rat = fmt_ratio(&self.p, &self.d);
        if self.q.is_negative() {
            write!(f, "{rat}{irr}")
        } else {
            write!(f, "{rat}+{irr}")
        }
    }
}

fn parse_int(s: &str) -> Result<BigInt> {
    s.parse::<BigInt>().map_err(|_| Error::parse(format!("bad integer `{s}`")))
}

/// Parses `12`, `-3/4`, `0.125` or `1e-3` into an exact rational.
fn parse_rational(s: &str) -> Result<QuadValue> {
    if s.is_empty() {
        return Err(Error::parse("empty number"));
    }
    if let Some((n, d)) = s.split_once('/') {
        return QuadValue::new(parse_int(n)?, 0, parse_int(d)?, 0);
    }
    if s.contains(['e', 'E']) {
        let x: f64 = s.parse().map_err(|_| Error::parse(format!("bad number `{s}`")))?;
        return QuadValue::from_f64_exact(x);
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int = int.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if int.is_empty() { "0" } else { int }, frac);
        let mut num = parse_int(&digits)?;
        if neg {
            num = -num;
        }
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        return QuadValue::new(num, 0, den, 0);
    }
    QuadValue::new(parse_int(s)?, 0, 1, 0)
}

/// `sqrt(n)` with square factors pulled out.
fn parse_root(n: &str) -> Result<QuadValue> {
    let n: u64 = n.trim().parse().map_err(|_| Error::parse(format!("bad radicand `{n}`")))?;
    if n == 0 {
        return Ok(QuadValue::zero());
    }
    let mut outside = 1u64;
    let mut inside = n;
    let mut f = 2u64;
    while f * f <= inside {
        while inside.is_multiple_of(f * f) {
            inside /= f * f;
            outside *= f;
        }
        f += 1;
    }
    let m = u32::try_from(inside).map_err(|_| Error::Capacity(format!("radicand {n} too large")))?;
    if m == 1 {
        return QuadValue::new(BigInt::from(outside), 0, 1, 0);
    }
    QuadValue::new(0, BigInt::from(outside), 1, m)
}

fn parse_term(term: &str) -> Result<QuadValue> {
    let (neg, body) = match term.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, term.strip_prefix('+').unwrap_or(term)),
    };
    let value = match body.split_once("sqrt(") {
        None => parse_rational(body)?,
        Some((coef, rest)) => {
            let (rad, tail) = rest.split_once(')').ok_or_else(|| Error::parse(format!("unclosed sqrt in `{term}`")))?;
            let root = parse_root(rad)?;
            let coef = match coef {
                "" => QuadValue::one(),
                c => parse_rational(c.strip_suffix('*').ok_or_else(|| Error::parse(format!("expected `*` before sqrt in `{term}`")))?)?,
            };
            let mut v = coef.checked_mul(&root)?;
            if let Some(den) = tail.strip_prefix('/') {
                v = v.checked_div(&parse_rational(den)?)?;
            } else if !tail.is_empty() {
                return Err(Error::parse(format!("trailing `{tail}` in `{term}`")));
            }
            v
        }
    };
    Ok(if neg { -value } else { value })
}

impl FromStr for QuadValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::parse("empty value"));
        }
        let bytes = s.as_bytes();
        let mut terms = Vec::new();
        let mut start = 0;
        let mut depth = 0;
        for (i, &b) in bytes.iter().enumerate() {
            match b {
                b'(' => depth += 1,
                b')' => depth -= 1,
                b'+' | b'-' if i > start && depth == 0 && !matches!(bytes[i - 1], b'e' | b'E' | b'*' | b'/') => {
                    terms.push(&s[start..i]);
                    start = i;
                }
                _ => {}
            }
        }
        terms.push(&s[start..]);
        let mut acc = QuadValue::zero();
        for t in terms {
            acc = acc.checked_add(&parse_term(t)?)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_forms() {
        assert_eq!("3".parse::<QuadValue>().unwrap(), QuadValue::from_int(3));
        assert_eq!("sqrt(2)".parse::<QuadValue>().unwrap(), QuadValue::new(0, 1, 1, 2).unwrap());
        assert_eq!("1/2+1/2*sqrt(5)".parse::<QuadValue>().unwrap(), QuadValue::new(1, 1, 2, 5).unwrap());
        assert_eq!("sqrt(8)".parse::<QuadValue>().unwrap(), QuadValue::new(0, 2, 1, 2).unwrap());
        assert_eq!("sqrt(5)/2".parse::<QuadValue>().unwrap(), QuadValue::new(0, 1, 2, 5).unwrap());
        assert_eq!("0.25".parse::<QuadValue>().unwrap(), QuadValue::from_ratio(1, 4).unwrap());
        assert_eq!("-1.5".parse::<QuadValue>().unwrap(), QuadValue::from_ratio(-3, 2).unwrap());
        assert_eq!(" 1 - sqrt( 2 ) ".parse::<QuadValue>().unwrap(), QuadValue::new(1, -1, 1, 2).unwrap());
    }

    #[test]
    fn prints_canonical_form() {
        assert_eq!(QuadValue::new(1, 1, 2, 5).unwrap().to_string(), "1/2+1/2*sqrt(5)");
        assert_eq!(QuadValue::new(2, 1, 2, 5).unwrap().to_string(), "1+1/2*sqrt(5)");
        assert_eq!(QuadValue::new(0, -1, 3, 7).unwrap().to_string(), "-1/3*sqrt(7)");
        assert_eq!(QuadValue::new(3, -2, 1, 2).unwrap().to_string(), "3-2*sqrt(2)");
        assert_eq!(QuadValue::new(0, 1, 1, 2).unwrap().to_string(), "sqrt(2)");
        assert_eq!(QuadValue::from_ratio(-6, 4).unwrap().to_string(), "-3/2");
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "abc", "sqrt(2", "1/0", "2**sqrt(3)", "sqrt(2)x"] {
            assert!(bad.parse::<QuadValue>().is_err(), "{bad}");
        }
    }
}
