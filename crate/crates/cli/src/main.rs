//! `bragg`: generate model combs, tabulate autocorrelations, estimate
//! diffraction spectra, split them into strongly almost periodic and null
//! weakly almost periodic parts, and run the verification suites.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 config, domain
//! or usage error, 3 arithmetic capacity exceeded.

mod run_config;

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bragg_core::autocorr::autocorrelation;
use bragg_core::comb::io::{read_comb, write_comb};
use bragg_core::comb::WeightedComb;
use bragg_core::config::KvConfig;
use bragg_core::cps::{generate_model_comb, SchemeSpec, WeightKind, PRESETS};
use bragg_core::spectrum::{
    bragg_scan, candidates_in, decompose, default_grid_step, grid_candidates, read_spectrum_csv, refine_peak, spectrum_json,
    stick_plot_svg, write_spectrum_csv, CandidateSource, Frequency, SpectrumEstimate,
};
use bragg_core::verify::{run_suite, SuiteConfig, Theorem};
use bragg_core::{Error, Result};
use clap::{Args, Parser, Subcommand};

use run_config::{RunConfig, Source};

#[derive(Parser, Debug)]
#[command(name = "bragg", version, about = "Diffraction of weighted Dirac combs from cut-and-project schemes")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Flat `section.key = value` config file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one config key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Seed for randomized scenarios (`run.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the model comb of a scheme on an interval.
    Generate {
        #[arg(long)]
        preset: Option<String>,
        /// indicator, tent or autoconv_step
        #[arg(long)]
        weight: Option<WeightKind>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        interval: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the finite autocorrelation of a comb file as CSV.
    Autocorr {
        comb: PathBuf,
        /// van Hove size; defaults to the largest
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify candidate frequencies; writes spectrum CSV and JSON.
    Diffract {
        comb: PathBuf,
        /// dual or grid
        #[arg(long)]
        source: Option<Source>,
        #[arg(long)]
        preset: Option<String>,
        /// Refine grid Bragg peaks by local maximisation before the final scan.
        #[arg(long)]
        refine: bool,
        /// Spectrum CSV path; the JSON goes next to it unless `--json` is given.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Split the autocorrelation into strongly almost periodic and null parts.
    Decompose {
        comb: PathBuf,
        #[arg(long)]
        source: Option<Source>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and emit JSON reports.
    Verify {
        /// L1, L4, T1, P1, sandwich or all
        #[arg(long, default_value = "all")]
        theorem: Theorem,
        /// Scheme preset; every preset runs when no scheme is configured.
        #[arg(long)]
        preset: Option<String>,
        /// Record wall time per report (makes output non-reproducible).
        #[arg(long)]
        timings: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stick-spectrum SVG from a spectrum CSV.
    Plot {
        spectrum: PathBuf,
        #[arg(long)]
        title: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Generate { .. } => "generate",
            Command::Autocorr { .. } => "autocorr",
            Command::Diffract { .. } => "diffract",
            Command::Decompose { .. } => "decompose",
            Command::Verify { .. } => "verify",
            Command::Plot { .. } => "plot",
        }
    }

    /// Flag values that shadow config keys.
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut kv = Vec::new();
        match self {
            Command::Generate { preset, weight, interval, .. } => {
                if let Some(p) = preset {
                    kv.push(("scheme.preset", p.clone()));
                }
                if let Some(w) = weight {
                    kv.push(("scheme.weight.kind", w.to_string()));
                }
                if let Some(iv) = interval {
                    kv.push(("generate.lo", iv[0].to_string()));
                    kv.push(("generate.hi", iv[1].to_string()));
                }
            }
            Command::Autocorr { n, radius, .. } => {
                if let Some(n) = n {
                    kv.push(("autocorr.n", n.to_string()));
                }
                if let Some(r) = radius {
                    kv.push(("autocorr.radius", r.to_string()));
                }
            }
            Command::Diffract { source, preset, .. } | Command::Decompose { source, preset, .. } => {
                if let Some(s) = source {
                    kv.push(("spectrum.source", source_name(*s).to_string()));
                }
                if let Some(p) = preset {
                    kv.push(("scheme.preset", p.clone()));
                }
                if let Command::Decompose { radius: Some(r), .. } = self {
                    kv.push(("decompose.radius", r.to_string()));
                }
            }
            Command::Verify { preset: Some(p), .. } => kv.push(("scheme.preset", p.clone())),
            Command::Verify { .. } | Command::Plot { .. } => {}
        }
        kv
    }
}

fn source_name(s: Source) -> &'static str {
    match s {
        Source::Dual => "dual",
        Source::Grid => "grid",
    }
}

fn load_config(common: &Common, command: &Command) -> Result<RunConfig> {
    let mut kv = match &common.config {
        Some(path) => fs::read_to_string(path)?.parse::<KvConfig>()?,
        None => KvConfig::default(),
    };
    for item in &common.set {
        let (k, v) = item.split_once('=').ok_or_else(|| Error::Parse(format!("--set expects KEY=VALUE, got {item:?}")))?;
        kv.set(k.trim(), v.trim());
    }
    for (k, v) in command.overrides() {
        kv.set(k, v);
    }
    if let Some(seed) = common.seed {
        kv.set("run.seed", seed.to_string());
    }
    RunConfig::from_kv(&kv, command.name())
}

/// Output sink: a file under `run.out_dir`, or stdout.
fn sink(rc: &RunConfig, path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let p = rc.output_path(p);
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            Ok(Box::new(BufWriter::new(File::create(p)?)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

/// Header lines the comb reader did not interpret.
type Extra = Vec<(String, String)>;

fn load_comb(path: &Path) -> Result<(WeightedComb<f64>, Extra)> {
    let file = read_comb::<f64>(BufReader::new(File::open(path)?))?;
    if file.comb.is_empty() {
        return Err(Error::Domain(format!("{} contains no points", path.display())));
    }
    Ok((file.comb, file.extra))
}

/// Scheme from the config, else from the `# scheme.*` header lines that
/// `generate` writes.
fn scheme_for(rc: &RunConfig, extra: &[(String, String)]) -> Result<Option<SchemeSpec>> {
    if let Some(s) = &rc.scheme {
        return Ok(Some(s.clone()));
    }
    let mut kv = KvConfig::default();
    for (k, v) in extra {
        if let Some(key) = k.strip_prefix("scheme.") {
            kv.set(key, v.as_str());
        }
    }
    if kv.iter().next().is_none() {
        return Ok(None);
    }
    SchemeSpec::from_kv(&kv).map(Some)
}

fn scheme_keys(spec: &SchemeSpec) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut push = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            out.push((format!("scheme.{k}"), v));
        }
    };
    push("preset", spec.preset.clone());
    push("m", spec.m.map(|m| m.to_string()));
    push("basis.v1", spec.v1.clone());
    push("basis.v2", spec.v2.clone());
    push("window.lo", spec.window_lo.clone());
    push("window.hi", spec.window_hi.clone());
    push("weight.kind", spec.weight_kind.map(|k| k.to_string()));
    push("weight.halfwidth", spec.weight_halfwidth.map(|v| v.to_string()));
    push("weight.height", spec.weight_height.map(|v| v.to_string()));
    out
}

fn spectrum(rc: &RunConfig, comb: &WeightedComb<f64>, extra: &[(String, String)], refine: bool) -> Result<SpectrumEstimate<f64>> {
    match rc.source {
        Source::Dual => {
            let spec = scheme_for(rc, extra)?
                .ok_or_else(|| Error::Validation("dual candidates need a scheme: pass --preset or use --source grid".into()))?;
            let (scheme, _) = spec.build()?;
            let ks = candidates_in(&scheme.dual_candidates(rc.coeff_bound)?, rc.freq_window);
            bragg_scan(comb, ks, &rc.vanhove, CandidateSource::DualLattice, rc.scan)
        }
        Source::Grid => {
            let density = comb.len() as f64 / comb.window().length();
            let step = rc.grid_step.unwrap_or_else(|| default_grid_step(density));
            let coarse = bragg_scan(comb, grid_candidates(rc.freq_window, step)?, &rc.vanhove, CandidateSource::Grid, rc.scan)?;
            if !refine {
                return Ok(coarse);
            }
            // Grid points rarely sit on a peak; refine every local maximum of
            // the largest-size intensity over two grid steps either side, so
            // a peak between a sampled maximum and its neighbour is reached.
            let last: Vec<f64> = coarse.entries.iter().map(|e| *e.intensities.last().expect("sizes")).collect();
            let mut ks: Vec<f64> = (0..last.len())
                .filter(|&i| (i == 0 || last[i] >= last[i - 1]) && (i + 1 == last.len() || last[i] > last[i + 1]))
                .map(|i| refine_peak(comb, coarse.entries[i].k.value, 2.0 * step, &rc.vanhove))
                .collect::<Result<_>>()?;
            ks.retain(|k| k.is_finite() && *k >= rc.freq_window.lo && *k <= rc.freq_window.hi);
            ks.sort_by(f64::total_cmp);
            ks.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
            if ks.is_empty() {
                return Ok(coarse);
            }
            let ks = ks.into_iter().map(Frequency::float).collect();
            bragg_scan(comb, ks, &rc.vanhove, CandidateSource::Refined, rc.scan)
        }
    }
}

fn header(out: &mut dyn Write, rc: &RunConfig) -> Result<()> {
    writeln!(out, "# config_hash {}", rc.hash)?;
    Ok(())
}

/// Ok(true) when every verification report passed.
fn run(cli: Cli) -> Result<bool> {
    let rc = load_config(&cli.common, &cli.command)?;
    match &cli.command {
        Command::Generate { out, .. } => {
            let spec =
                rc.scheme.clone().ok_or_else(|| Error::Validation("generate needs a scheme: pass --preset or set scheme.* keys".into()))?;
            let (scheme, weight) = spec.build()?;
            let interval = rc.generate_interval.unwrap_or_else(|| rc.vanhove.region(rc.vanhove.largest()));
            let comb = generate_model_comb::<f64>(&scheme, &weight, interval)?;
            let mut extra = vec![("config_hash".to_string(), rc.hash.clone())];
            extra.extend(scheme_keys(&spec));
            let mut w = sink(&rc, out.as_deref())?;
            write_comb(&comb, &extra, &mut w)?;
            w.flush()?;
            eprintln!("generate: {} points on [{}, {}] from {}", comb.len(), interval.lo, interval.hi, scheme.name());
        }
        Command::Autocorr { comb, out, .. } => {
            let (c, _) = load_comb(comb)?;
            let n = rc.autocorr_n.unwrap_or_else(|| rc.vanhove.largest());
            let radius = rc.autocorr_radius.unwrap_or_else(|| bragg_core::autocorr::default_radius(&rc.vanhove));
            let a = autocorrelation(&c, &rc.vanhove, n, radius)?;
            let mut w = sink(&rc, out.as_deref())?;
            header(&mut w, &rc)?;
            a.write_csv(&mut w)?;
            w.flush()?;
        }
        Command::Diffract { comb, refine, out, json, .. } => {
            let (c, extra) = load_comb(comb)?;
            let se = spectrum(&rc, &c, &extra, *refine)?;
            let mut w = sink(&rc, Some(out))?;
            header(&mut w, &rc)?;
            write_spectrum_csv(&se, &mut w)?;
            w.flush()?;
            let json_path = json.clone().unwrap_or_else(|| out.with_extension("json"));
            let mut doc = spectrum_json(&se);
            doc["config_hash"] = serde_json::Value::String(rc.hash.clone());
            let mut w = sink(&rc, Some(&json_path))?;
            serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| Error::Io(e.into()))?;
            writeln!(w)?;
            w.flush()?;
            eprintln!(
                "diffract: {} candidates, {} bragg, {} continuous, {} undecided",
                se.entries.len(),
                se.count("bragg"),
                se.count("continuous"),
                se.count("undecided")
            );
        }
        Command::Decompose { comb, out, .. } => {
            let (c, extra) = load_comb(comb)?;
            let se = spectrum(&rc, &c, &extra, false)?;
            let a = autocorrelation(&c, &rc.vanhove, rc.vanhove.largest(), rc.decompose_radius)?;
            let d = decompose(&a, &se, rc.decompose)?;
            let mut w = sink(&rc, out.as_deref())?;
            header(&mut w, &rc)?;
            writeln!(w, "# almost_periods {}", d.periods.len())?;
            writeln!(w, "# residual {:e}", d.residual())?;
            writeln!(w, "z_exact,z_float,gamma_real,gamma_imag,gamma_s_real,gamma_s_imag,gamma_0_real,gamma_0_imag")?;
            for ((z, s), (_, o)) in d.gamma_s.entries().iter().zip(d.gamma_0.entries()) {
                let g = a.value(z);
                writeln!(w, "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e}", z, z.to_f64(), g.re, g.im, s.re, s.im, o.re, o.im)?;
            }
            w.flush()?;
        }
        Command::Verify { theorem, timings, out, .. } => {
            let cfg = SuiteConfig { seed: rc.seed, params: rc.scenario_params(*timings), trials: rc.trials };
            let specs = match &rc.scheme {
                Some(s) => vec![s.clone()],
                None => PRESETS.iter().map(|p| SchemeSpec::preset(p)).collect(),
            };
            let mut reports = Vec::new();
            for spec in &specs {
                let (scheme, weight) = spec.build()?;
                reports.extend(run_suite(*theorem, &scheme, &weight, &cfg)?);
            }
            let all_pass = reports.iter().all(|r| r.pass);
            let doc = serde_json::json!({ "config_hash": rc.hash, "reports": reports });
            let mut w = sink(&rc, out.as_deref())?;
            serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| Error::Io(e.into()))?;
            writeln!(w)?;
            w.flush()?;
            for r in reports.iter().filter(|r| !r.pass) {
                let failed: Vec<&str> = r.failed_checks().map(|c| c.name.as_str()).collect();
                eprintln!("FAIL {} {}: {}", r.theorem, r.scenario, failed.join(", "));
            }
            eprintln!("verify: {}/{} reports pass", reports.iter().filter(|r| r.pass).count(), reports.len());
            return Ok(all_pass);
        }
        Command::Plot { spectrum, title, out } => {
            let entries = read_spectrum_csv(BufReader::new(File::open(spectrum)?))?;
            if entries.is_empty() {
                return Err(Error::Domain(format!("{} has no spectrum rows", spectrum.display())));
            }
            let title = title.clone().unwrap_or_else(|| spectrum.display().to_string());
            let svg = stick_plot_svg(&entries, &title);
            let mut w = sink(&rc, out.as_deref())?;
            writeln!(w, "<!-- config_hash {} -->", rc.hash)?;
            w.write_all(svg.as_bytes())?;
            w.flush()?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("bragg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bragg_core::comb::Interval;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_set_and_file() {
        let cli = Cli::try_parse_from(["bragg", "--set", "scheme.preset=integer", "generate", "--preset", "fibonacci"]).unwrap();
        let rc = load_config(&cli.common, &cli.command).unwrap();
        assert_eq!(rc.scheme.unwrap().preset.as_deref(), Some("fibonacci"));
    }

    #[test]
    fn interval_accepts_negative_bounds() {
        let cli = Cli::try_parse_from(["bragg", "generate", "--preset", "zroot2", "--interval", "-10", "10"]).unwrap();
        let rc = load_config(&cli.common, &cli.command).unwrap();
        assert_eq!(rc.generate_interval, Some(Interval { lo: -10.0, hi: 10.0 }));
    }
}
