//! Spectrum CSV/JSON and the SVG stick plot.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::Serializer;
use serde_json::{json, Value};

use super::SpectrumEstimate;
use crate::error::{Error, Result};
use crate::exactnum::QuadValue;
use crate::scalar::Scalar;

pub(super) fn ser_opt_quad<S: Serializer>(v: &Option<QuadValue>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(q) => s.serialize_str(&q.to_string()),
        None => s.serialize_none(),
    }
}

/// `k_exact,k_float,I_n<size>…,class,I_inf`.
pub fn write_spectrum_csv<T: Scalar>(se: &SpectrumEstimate<T>, mut out: impl Write) -> Result<()> {
    let mut header = String::from("k_exact,k_float");
    for n in se.vanhove.sizes() {
        write!(header, ",I_n{n}").expect("string write");
    }
    header.push_str(",class,I_inf");
    writeln!(out, "{header}")?;
    let mut line = String::new();
    for e in &se.entries {
        line.clear();
        let exact = e.k.exact.as_ref().map(ToString::to_string).unwrap_or_default();
        write!(line, "{exact},{:e}", e.k.value).expect("string write");
        for i in &e.intensities {
            write!(line, ",{:e}", i.as_f64()).expect("string write");
        }
        let inf = e.class.bragg_intensity().map(|v| format!("{v:e}")).unwrap_or_default();
        write!(line, ",{},{inf}", e.class.name()).expect("string write");
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Report with thresholds, gap statistic and the Bragg list.
pub fn spectrum_json<T: Scalar>(se: &SpectrumEstimate<T>) -> Value {
    let bragg: Vec<Value> =
        se.bragg().map(|(k, i)| json!({"k_exact": k.exact.as_ref().map(ToString::to_string), "k": k.value, "intensity": i})).collect();
    json!({
        "source": se.tag,
        "candidates": se.source,
        "vanhove": se.vanhove,
        "epsilon": se.epsilon,
        "delta_rel": se.delta_rel,
        "continuous_ratio": super::CONTINUOUS_RATIO,
        "freq_window": [se.freq_window.lo, se.freq_window.hi],
        "counts": {
            "bragg": se.count("bragg"),
            "continuous": se.count("continuous"),
            "undecided": se.count("undecided"),
        },
        "bragg_max_gap": se.bragg_max_gap,
        "bragg": bragg,
    })
}

/// One row of a spectrum CSV as needed for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotEntry {
    pub k: f64,
    pub class: String,
    /// `I∞` for Bragg rows, the last `I_n` otherwise
    pub intensity: f64,
}

pub fn read_spectrum_csv(input: impl BufRead) -> Result<Vec<PlotEntry>> {
    let mut lines = input.lines().filter(|l| !matches!(l, Ok(s) if s.starts_with('#') || s.trim().is_empty()));
    let header = lines.next().ok_or_else(|| Error::parse("empty spectrum csv"))??;
    let cols: Vec<&str> = header.split(',').collect();
    let find = |name: &str| cols.iter().position(|c| *c == name).ok_or_else(|| Error::parse(format!("spectrum csv lacks column {name}")));
    let (ik, iclass, iinf) = (find("k_float")?, find("class")?, find("I_inf")?);
    let ilast = iclass.checked_sub(1).filter(|&i| cols[i].starts_with("I_n")).ok_or_else(|| Error::parse("no intensity columns"))?;
    let mut out = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line?;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != cols.len() {
            return Err(Error::parse(format!("row {}: expected {} fields", row + 1, cols.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::parse(format!("row {}: {s:?}: {e}", row + 1)));
        let class = f[iclass].to_string();
        let intensity = if class == "bragg" { num(f[iinf])? } else { num(f[ilast])? };
        out.push(PlotEntry { k: num(f[ik])?, class, intensity });
    }
    Ok(out)
}

/// Stick plot: Bragg sticks in black, other candidates in grey, the
/// largest gap between Bragg frequencies marked in red below the axis.
pub fn stick_plot_svg(entries: &[PlotEntry], title: &str) -> String {
    const W: f64 = 800.0;
    const H: f64 = 400.0;
    const M: f64 = 40.0;
    let (lo, hi) = entries.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), e| (a.min(e.k), b.max(e.k)));
    let (lo, hi) = if lo.is_finite() && hi > lo { (lo, hi) } else { (lo.min(0.0) - 0.5, hi.max(0.0) + 0.5) };
    let top = entries.iter().map(|e| e.intensity).fold(0.0, f64::max);
    let x = |k: f64| M + (k - lo) / (hi - lo) * (W - 2.0 * M);
    let y = |i: f64| H - M - if top > 0.0 { i / top * (H - 2.0 * M) } else { 0.0 };
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{M}" y="24" font-family="sans-serif" font-size="14">{}</text>"#, escape(title)).unwrap();
    writeln!(s, r#"<line x1="{M}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#, H - M, W - M).unwrap();
    for e in entries.iter().filter(|e| e.class != "bragg") {
        writeln!(s, r##"<line x1="{0:.2}" y1="{1}" x2="{0:.2}" y2="{2:.2}" stroke="#bbbbbb"/>"##, x(e.k), H - M, y(e.intensity)).unwrap();
    }
    let mut bragg: Vec<f64> = Vec::new();
    for e in entries.iter().filter(|e| e.class == "bragg") {
        bragg.push(e.k);
        writeln!(
            s,
            r#"<line x1="{0:.2}" y1="{1}" x2="{0:.2}" y2="{2:.2}" stroke="black" stroke-width="1.5"/>"#,
            x(e.k),
            H - M,
            y(e.intensity)
        )
        .unwrap();
    }
    bragg.sort_by(f64::total_cmp);
    if let Some(w) = bragg.windows(2).max_by(|a, b| (a[1] - a[0]).total_cmp(&(b[1] - b[0]))) {
        writeln!(s, r#"<line x1="{:.2}" y1="{2}" x2="{:.2}" y2="{2}" stroke="red" stroke-width="3"/>"#, x(w[0]), x(w[1]), H - M + 10.0)
            .unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="11" fill="red">max gap {:.4}</text>"#,
            x(w[0]),
            H - 8.0,
            w[1] - w[0]
        )
        .unwrap();
    }
    writeln!(s, r#"<text x="{M}" y="{}" font-family="sans-serif" font-size="11">{lo:.3}</text>"#, H - M + 24.0).unwrap();
    writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{hi:.3}</text>"#, W - M, H - M + 24.0)
        .unwrap();
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
