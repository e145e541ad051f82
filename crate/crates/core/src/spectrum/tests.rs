use super::*;
use crate::autocorr::autocorrelation;
use crate::cps::{generate_model_comb, CPScheme};

fn lattice(step: i64, half: i64) -> WeightedComb<f64> {
    let atoms = (-half..=half).filter(|k| k % step == 0).map(|k| (QuadValue::from_int(k), 1.0)).collect();
    WeightedComb::from_real(atoms, Interval::centered(half as f64), "lattice").unwrap()
}

fn sizes(v: &[u32]) -> VanHoveSpec {
    VanHoveSpec::new(1.0, v.to_vec()).unwrap()
}

fn quarter_grid() -> Vec<Frequency> {
    (-40..=40).map(|p| Frequency::exact(QuadValue::from_ratio(p, 4).unwrap())).collect()
}

fn fibonacci(half: f64) -> WeightedComb<f64> {
    let s = CPScheme::preset("fibonacci").unwrap();
    generate_model_comb(&s, &s.default_weight(), Interval::centered(half)).unwrap()
}

#[test]
fn fb_integer_lattice() {
    let n = 100;
    let spec = sizes(&[n]);
    let c = lattice(1, n as i64);
    let c0 = fb_coefficient(&c, 0.0, &spec, n).unwrap();
    assert!((c0.re - 201.0 / 200.0).abs() < 1e-15 && c0.im.abs() < 1e-15);
    let half = fb_coefficient(&c, 0.5, &spec, n).unwrap();
    assert!((half.norm() - 1.0 / 200.0).abs() < 1e-14);
    let one = fb_coefficient(&c, 1.0, &spec, n).unwrap();
    assert!((one - c0).norm() < 1e-14);
}

#[test]
fn intensity_profiles() {
    let spec = VanHoveSpec::default();
    let c = lattice(1, 400);
    for k in [0.0, 1.0, 3.0] {
        for (i, n) in intensity_profile(&c, k, &spec).unwrap().iter().zip(spec.sizes()) {
            assert!((i - 1.0).abs() <= 3.0 / *n as f64);
        }
    }
    let k = 2f64.sqrt() / 4.0;
    for (i, &n) in intensity_profile(&c, k, &spec).unwrap().iter().zip(spec.sizes()) {
        // |Σ e^{-2πikx}| <= 1/|sin πk|
        let bound = 1.0 / ((PI * k).sin().powi(2) * spec.volume(n).powi(2));
        assert!(*i <= bound * (1.0 + 1e-9), "n = {n}");
    }
    let zero = WeightedComb::<f64>::empty(Interval::centered(400.0), "zero");
    assert!(intensity_profile(&zero, 0.3, &spec).unwrap().iter().all(|&v| v == 0.0));
}

#[test]
fn classification_examples() {
    assert_eq!(classify_peak(&[0.98, 0.99, 1.00], 1e-3, 0.05).unwrap(), PeakClass::Bragg { i_inf: 1.0 });
    assert_eq!(classify_peak(&[0.4, 0.2, 0.1], 1e-3, 0.05).unwrap(), PeakClass::Continuous);
    assert_eq!(classify_peak(&[0.1, 0.5, 0.2], 1e-3, 0.05).unwrap(), PeakClass::Undecided);
    assert_eq!(classify_peak(&[0.0, 0.0, 0.0], 1e-3, 0.05).unwrap(), PeakClass::Continuous);
    assert!(classify_peak(&[1.0, 1.0], 1e-3, 0.05).is_err());
}

#[test]
fn integer_lattice_scan() {
    let spec = VanHoveSpec::default();
    let se = bragg_scan(&lattice(1, 400), quarter_grid(), &spec, CandidateSource::Grid, ScanParams::default()).unwrap();
    for e in &se.entries {
        let integral = e.k.exact.as_ref().unwrap().d() == &1.into();
        match e.class {
            PeakClass::Bragg { i_inf } => {
                assert!(integral, "k = {}", e.k.value);
                assert!((0.98..=1.02).contains(&i_inf));
            }
            PeakClass::Continuous => assert!(!integral),
            PeakClass::Undecided => panic!("undecided at {}", e.k.value),
        }
    }
    assert_eq!(se.bragg_count(), 21);
    assert_eq!(se.bragg_max_gap, Some(1.0));
}

#[test]
fn zero_weight_comb_is_continuous() {
    let spec = VanHoveSpec::default();
    let zero = WeightedComb::<f64>::empty(Interval::centered(400.0), "zero");
    let se = bragg_scan(&zero, quarter_grid(), &spec, CandidateSource::Grid, ScanParams::default()).unwrap();
    assert_eq!(se.count("continuous"), se.entries.len());
    assert_eq!(se.bragg_max_gap, None);
}

#[test]
fn fibonacci_dual_scan_origin_intensity() {
    let spec = sizes(&[100, 200, 400]);
    let c = fibonacci(400.0);
    let s = CPScheme::preset("fibonacci").unwrap();
    let ks = candidates_in(&s.dual_candidates(8).unwrap(), Interval::centered(10.0));
    let se = bragg_scan(&c, ks, &spec, CandidateSource::DualLattice, ScanParams::default()).unwrap();
    assert!(se.bragg_count() > 0);
    let patch = c.restrict(spec.region(400)).unwrap();
    let mean = patch.points().iter().map(|p| p.weight.re).sum::<f64>() / patch.len() as f64;
    let density = patch.len() as f64 / spec.volume(400);
    let expected = (mean * density).powi(2);
    let at0 = se.entries.iter().find(|e| e.k.value == 0.0).unwrap();
    let i0 = at0.class.bragg_intensity().expect("origin is a Bragg peak");
    assert!((i0 / expected - 1.0).abs() <= 0.02, "{i0} vs {expected}");
}

#[test]
fn refine_examples() {
    let spec = VanHoveSpec::default();
    let c = lattice(1, 400);
    let k = refine_peak(&c, 0.99, 0.05, &spec).unwrap();
    assert!((k - 1.0).abs() <= 1e-6, "{k}");
    let zero = WeightedComb::<f64>::empty(Interval::centered(400.0), "zero");
    assert_eq!(refine_peak(&zero, 0.37, 0.05, &spec).unwrap(), 0.37);
}

#[test]
fn refine_fibonacci_to_dual_value() {
    let spec = sizes(&[250, 500, 1000]);
    let c = fibonacci(1000.0);
    // (1 + τ)/√5 = τ²/√5, a strong peak
    let exact: QuadValue = "1/2+3/10*sqrt(5)".parse().unwrap();
    let k = refine_peak(&c, exact.to_f64() + 3e-4, 1e-3, &spec).unwrap();
    assert!((k - exact.to_f64()).abs() <= 1e-6, "{k} vs {}", exact.to_f64());
}

#[test]
fn resum_examples() {
    let spec = VanHoveSpec::default();
    let ks: Vec<Frequency> = (-3..=3).map(|j| Frequency::exact(QuadValue::from_int(j))).collect();
    let se = bragg_scan(&lattice(1, 400), ks, &spec, CandidateSource::DualLattice, ScanParams::default()).unwrap();
    let at0 = sap_resum(&se, &QuadValue::zero()).unwrap();
    let i_inf = (801.0f64 / 800.0).powi(2);
    assert!((at0.re - 7.0 * i_inf).abs() < 1e-12);
    let z: QuadValue = "1/3+sqrt(2)".parse().unwrap();
    let (a, b) = (sap_resum(&se, &z).unwrap(), sap_resum(&se, &-&z).unwrap());
    assert!((a - b.conj()).norm() < 1e-12);

    let single =
        bragg_scan(&lattice(2, 400), vec![Frequency::exact(QuadValue::zero())], &spec, CandidateSource::Grid, ScanParams::default())
            .unwrap();
    let d2 = (401.0f64 / 800.0).powi(2);
    assert!((sap_resum(&single, &z).unwrap().re - d2).abs() < 1e-12);

    let empty = bragg_scan(&lattice(1, 400), vec![Frequency::float(0.5)], &spec, CandidateSource::Grid, ScanParams::default()).unwrap();
    assert!(matches!(sap_resum(&empty, &z), Err(Error::EmptySpectrum)));
}

#[test]
fn decompose_periodic_comb_is_pure_point() {
    let spec = VanHoveSpec::default();
    let c = lattice(1, 400);
    let ks: Vec<Frequency> = (-10..=10).map(|j| Frequency::exact(QuadValue::from_int(j))).collect();
    let se = bragg_scan(&c, ks, &spec, CandidateSource::DualLattice, ScanParams::default()).unwrap();
    let a = autocorrelation(&c, &spec, 400, 100.0).unwrap();
    let d = decompose(&a, &se, DecomposeParams::default()).unwrap();
    let g0 = a.value(&QuadValue::zero()).re;
    assert!(d.residual() <= 0.05 * g0, "{}", d.residual());
    assert_eq!(d.periods.len(), 41);
    assert!(d.gamma_s.radius() >= 60.0);
}

#[test]
fn decompose_fibonacci_residual() {
    let spec = sizes(&[250, 500, 1000]);
    let c = fibonacci(1000.0);
    let s = CPScheme::preset("fibonacci").unwrap();
    let ks = candidates_in(&s.dual_candidates(8).unwrap(), Interval::centered(10.0));
    let se = bragg_scan(&c, ks, &spec, CandidateSource::DualLattice, ScanParams::default()).unwrap();
    let a = autocorrelation(&c, &spec, 1000, 100.0).unwrap();
    let d = decompose(&a, &se, DecomposeParams::default()).unwrap();
    let g0 = a.value(&QuadValue::zero()).re;
    assert!(d.residual() <= 0.05 * g0, "{} of {g0}", d.residual());
    for (z, _) in d.gamma_s.entries() {
        assert!(a.get(z).is_some());
    }
}

#[test]
fn gram_examples() {
    let spec = sizes(&[50]);
    let a = autocorrelation(&lattice(1, 60), &spec, 50, 12.0).unwrap();
    let pts: Vec<QuadValue> = (0..10).map(QuadValue::from_int).collect();
    let r = gram_psd(&a, &pts, 1e-8).unwrap();
    assert!(r.pass && !r.missing_entries && r.size == 10);

    let z = QuadValue::zero();
    let one = QuadValue::one();
    let table = crate::autocorr::Autocorrelation::from_entries(
        vec![(z.clone(), Complex::new(0.0, 0.0)), (one.clone(), Complex::new(1.0, 0.0)), (-&one, Complex::new(1.0, 0.0))],
        1,
        1.0,
        1.0,
        "t",
    );
    let r = gram_psd(&table, &[z.clone(), one.clone()], 1e-8).unwrap();
    assert!(!r.pass);
    assert!((r.min_eigenvalue + 1.0).abs() < 1e-12);

    let zeros = crate::autocorr::Autocorrelation::<f64>::from_entries(vec![], 1, 1.0, 1.0, "z");
    let r = gram_psd(&zeros, &[z, one], 1e-8).unwrap();
    assert!(r.pass && r.missing_entries);
}

#[test]
fn outputs_round_trip() {
    let spec = VanHoveSpec::default();
    let se = bragg_scan(&lattice(1, 400), quarter_grid(), &spec, CandidateSource::Grid, ScanParams::default()).unwrap();
    let mut buf = Vec::new();
    write_spectrum_csv(&se, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("k_exact,k_float,I_n50,I_n100,I_n200,I_n400,class,I_inf\n"));
    let rows = read_spectrum_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 81);
    assert_eq!(rows.iter().filter(|r| r.class == "bragg").count(), 21);
    let svg = stick_plot_svg(&rows, "integer <lattice>");
    assert!(svg.starts_with("<svg") && svg.contains("max gap 1.0000") && svg.contains("&lt;lattice&gt;"));
    let json = spectrum_json(&se);
    assert_eq!(json["counts"]["bragg"], 21);
    assert_eq!(json["bragg_max_gap"], 1.0);
}

#[test]
fn f32_scan_agrees() {
    let spec = VanHoveSpec::default();
    let atoms = (-400..=400).map(|k| (QuadValue::from_int(k), 1.0f32)).collect();
    let c = WeightedComb::<f32>::from_real(atoms, Interval::centered(400.0), "f32").unwrap();
    let se = bragg_scan(&c, quarter_grid(), &spec, CandidateSource::Grid, ScanParams::default()).unwrap();
    assert_eq!(se.bragg_count(), 21);
}
