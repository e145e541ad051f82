//! Comb text files and CSV export.
//!
//! ```text
//! # window -10 10
//! # m 5
//! # tag fibonacci/tent
//! 0	1
//! 1/2+1/2*sqrt(5)	0.38196601125010515
//! ```
//!
//! A weight column holding two numbers separated by a tab is read as
//! `re<TAB>im`. Unknown `#` lines are kept as free-form metadata.

#![allow(clippy::tabs_in_doc_comments)]

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex;

use super::{Interval, WeightedComb};
use crate::error::{Error, Result};
use crate::exactnum::QuadValue;
use crate::scalar::Scalar;

/// A comb read from disk together with its header metadata.
#[derive(Debug, Clone)]
pub struct CombFile<T> {
    pub comb: WeightedComb<T>,
    /// `# key value` lines other than window, m and tag, in file order
    pub extra: Vec<(String, String)>,
}

pub fn write_comb<T: Scalar>(comb: &WeightedComb<T>, extra: &[(String, String)], mut out: impl Write) -> Result<()> {
    let w = comb.window();
    writeln!(out, "# window {} {}", w.lo, w.hi)?;
    writeln!(out, "# m {}", comb.radicand())?;
    if !comb.tag().is_empty() {
        writeln!(out, "# tag {}", comb.tag())?;
    }
    for (k, v) in extra {
        writeln!(out, "# {k} {v}")?;
    }
    let mut line = String::new();
    for p in comb.points() {
        line.clear();
        write!(line, "{}\t{}", p.coord, p.weight.re).expect("string write");
        if !p.weight.im.is_zero() {
            write!(line, "\t{}", p.weight.im).expect("string write");
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn comb_to_string<T: Scalar>(comb: &WeightedComb<T>) -> String {
    let mut buf = Vec::new();
    write_comb(comb, &[], &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("utf8")
}

pub fn read_comb<T: Scalar>(input: impl BufRead) -> Result<CombFile<T>> {
    let mut window = None;
    let mut m: Option<u32> = None;
    let mut tag = String::new();
    let mut extra = Vec::new();
    let mut atoms = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let at = |msg: String| Error::parse(format!("line {}: {msg}", lineno + 1));
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(header) = trimmed.strip_prefix('#') {
            let header = header.trim();
            let (key, rest) = header.split_once(char::is_whitespace).unwrap_or((header, ""));
            let rest = rest.trim();
            match key {
                "window" => {
                    let nums: Vec<f64> = rest
                        .split_whitespace()
                        .map(|s| s.parse::<f64>().map_err(|e| at(format!("bad window bound {s:?}: {e}"))))
                        .collect::<Result<_>>()?;
                    if nums.len() != 2 {
                        return Err(at("window needs two bounds".into()));
                    }
                    window = Some(Interval::new(nums[0], nums[1])?);
                }
                "m" => m = Some(rest.parse().map_err(|e| at(format!("bad radicand {rest:?}: {e}")))?),
                "tag" => tag = rest.to_string(),
                _ => extra.push((key.to_string(), rest.to_string())),
            }
            continue;
        }
        let mut cols = trimmed.split('\t').map(str::trim);
        let coord: QuadValue = cols.next().unwrap_or("").parse().map_err(|e: Error| at(e.to_string()))?;
        let num = |s: Option<&str>| -> Result<Option<T>> {
            s.map(|s| s.parse::<f64>().map(T::of).map_err(|e| at(format!("bad weight {s:?}: {e}")))).transpose()
        };
        let re = num(cols.next())?.ok_or_else(|| at("missing weight column".into()))?;
        let im = num(cols.next())?.unwrap_or_else(T::zero);
        if cols.next().is_some() {
            return Err(at("too many columns".into()));
        }
        if let Some(m) = m {
            if coord.radicand() != 0 && coord.radicand() != m {
                return Err(Error::MixedRadicand(m, coord.radicand()));
            }
        }
        atoms.push((coord, Complex::new(re, im)));
    }
    let window = window.ok_or_else(|| Error::parse("missing '# window a b' header"))?;
    let comb = WeightedComb::new(atoms, window, tag)?;
    Ok(CombFile { comb, extra })
}

pub fn parse_comb<T: Scalar>(text: &str) -> Result<WeightedComb<T>> {
    read_comb(text.as_bytes()).map(|f| f.comb)
}

/// CSV with columns `coordinate,coordinate_float,weight_re,weight_im`.
pub fn write_comb_csv<T: Scalar>(comb: &WeightedComb<T>, mut out: impl Write) -> Result<()> {
    writeln!(out, "coordinate,coordinate_float,weight_re,weight_im")?;
    for p in comb.points() {
        writeln!(out, "{},{:e},{},{}", p.coord, p.pos, p.weight.re, p.weight.im)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let atoms = vec![
            (QuadValue::zero(), Complex::new(1.0, 0.0)),
            ("1/2+1/2*sqrt(5)".parse().unwrap(), Complex::new(0.25, -0.5)),
            ("-3".parse().unwrap(), Complex::new(2.0, 0.0)),
        ];
        let c = WeightedComb::<f64>::new(atoms, Interval::centered(4.0), "demo").unwrap();
        let text = comb_to_string(&c);
        assert!(text.starts_with("# window -4 4\n# m 5\n# tag demo\n-3\t2\n"));
        let back: WeightedComb<f64> = parse_comb(&text).unwrap();
        assert_eq!(back.points(), c.points());
        assert_eq!(back.window(), c.window());
        assert_eq!(back.tag(), "demo");
    }

    #[test]
    fn rejects_bad_files() {
        assert!(parse_comb::<f64>("0\t1\n").is_err());
        assert!(parse_comb::<f64>("# window 0 1\n0\n").is_err());
        assert!(parse_comb::<f64>("# window 0 1\n5\t1\n").is_err());
        assert!(parse_comb::<f64>("# window 0 3\n# m 2\nsqrt(5)\t1\n").is_err());
        assert!(parse_comb::<f64>("# window 0 1\n0\t1\t2\t3\n").is_err());
    }

    #[test]
    fn extra_headers_preserved() {
        let f = read_comb::<f64>("# window 0 1\n# config abc123\n0\t1\n".as_bytes()).unwrap();
        assert_eq!(f.extra, vec![("config".to_string(), "abc123".to_string())]);
    }

    #[test]
    fn csv_export() {
        let c = WeightedComb::<f64>::from_real(vec![(1.into(), 0.5)], Interval::centered(1.0), "t").unwrap();
        let mut buf = Vec::new();
        write_comb_csv(&c, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "coordinate,coordinate_float,weight_re,weight_im\n1,1e0,0.5,0\n");
    }
}
