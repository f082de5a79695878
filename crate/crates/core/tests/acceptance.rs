//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). The exit status is 0 unless
//! `ACCEPTANCE_STRICT=1` is set, in which case any FAIL exits with 1.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use holomimo::channel3gpp::{default_variants, run_scenario, RunSettings, ScenarioConfig};
use holomimo::clarke::isotropic_correlation_closed_form;
use holomimo::io::touchstone::{format_touchstone, parse_touchstone_str, DataFormat};
use holomimo::linalg::{hermitian_defect, hermitian_eigenvalues, CMatrix};
use holomimo::metrics::{to_db, GainPattern};
use holomimo::pipeline::{evaluate_covariance, kronecker_covariance, local_patterns, ElementModel};
use holomimo::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// e^{0.1} E1(0.1) / ln 2, from an arbitrary-precision integral of
/// log2(1 + 10x) e^{-x} over [0, ∞).
const ONE_BY_ONE_10DB: f64 = 2.906514808414805;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    o.detail = format!("{} [{:.2} s]", o.detail, took.as_secs_f64());
    if took > limit {
        o.pass = false;
        o.detail
            .push_str(&format!(" exceeded {:.0} s budget", limit.as_secs_f64()));
    }
    o
}

fn pair(d: f64) -> ArrayGeometry {
    ArrayGeometry::new(vec![[0.0; 3], [d, 0.0, 0.0]], LayoutTag::Custom).unwrap()
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    for d in [0.1, 0.25, 0.5, 1.0] {
        let r = clarke_correlation(
            &pair(d),
            &AngularSpectrum::full_sphere(),
            &QuadratureSpec::default(),
        )
        .unwrap();
        let err = (r.get(0, 1) - Complex64::new(isotropic_correlation_closed_form(d), 0.0)).norm();
        worst = worst.max(err);
    }
    outcome(
        worst < 1e-3,
        format!("max |rho - sinc| = {worst:.2e} (tol 1e-3)"),
    )
}

fn clarke_diversity(n: usize, spacing: f64, h: f64, spread_deg: f64) -> f64 {
    let g = ArrayGeometry::linear_3d(n, spacing, h).unwrap();
    let r = clarke_correlation(
        &g,
        &AngularSpectrum::broadside_deg(spread_deg).unwrap(),
        &QuadratureSpec::default(),
    )
    .unwrap();
    diversity(&r).unwrap()
}

fn criterion_2() -> Outcome {
    let half = clarke_diversity(11, 0.5, 0.0, 90.0);
    let quarter = clarke_diversity(21, 0.25, 0.0, 90.0);
    let raised = clarke_diversity(21, 0.25, 0.5, 90.0);
    let sat = 100.0 * (quarter / half - 1.0);
    let gain3d = 100.0 * (raised / quarter - 1.0);
    outcome(
        sat < 5.0 && gain3d > 15.0,
        format!("h=0: 0.25 vs 0.5 spacing {sat:+.2}% (< 5%); h=0.5 vs h=0 at 0.25 spacing {gain3d:+.2}% (> 15%)"),
    )
}

/// Percent increases (diversity, capacity at 10 dB, capacity at 20 dB) of the
/// 5λ0, 25-element 3-D row over the 2-D row under the Kronecker pipeline.
fn theoretical_increments(spread_deg: f64) -> [f64; 3] {
    let model = ElementModel::default();
    let spacing = 5.0 / 24.0;
    let metrics: Vec<_> = [0.0, 0.5]
        .iter()
        .map(|h| {
            let g = ArrayGeometry::linear_3d(25, spacing, *h).unwrap();
            let r = kronecker_covariance(&g, &model, spread_deg.to_radians(), None).unwrap();
            evaluate_covariance(&r, &g, &[10.0, 20.0], 2000, 2024).unwrap()
        })
        .collect();
    let pct = |a: f64, b: f64| 100.0 * (b / a - 1.0);
    [
        pct(metrics[0].diversity, metrics[1].diversity),
        pct(
            metrics[0].capacities[0].mean_bits_per_s_per_hz,
            metrics[1].capacities[0].mean_bits_per_s_per_hz,
        ),
        pct(
            metrics[0].capacities[1].mean_bits_per_s_per_hz,
            metrics[1].capacities[1].mean_bits_per_s_per_hz,
        ),
    ]
}

fn criterion_3(inc90: &[f64; 3]) -> Outcome {
    let targets = [(27.0, 8.0), (9.0, 4.0), (22.5, 6.0)];
    let ok = inc90
        .iter()
        .zip(targets)
        .all(|(v, (t, tol))| (v - t).abs() <= tol);
    outcome(
        ok,
        format!(
            "diversity {:+.1}% (27 ± 8), capacity@10dB {:+.1}% (9 ± 4), capacity@20dB {:+.1}% (22.5 ± 6)",
            inc90[0], inc90[1], inc90[2]
        ),
    )
}

fn criterion_4(inc60: &[f64; 3], inc90: &[f64; 3]) -> Outcome {
    let targets = [12.0, 4.0, 15.5];
    let signs = inc60.iter().all(|v| *v > 0.0);
    let ordering = inc60.iter().zip(inc90).all(|(a, b)| a < b);
    let magnitudes = inc60.iter().zip(targets).all(|(v, t)| (v - t).abs() <= 8.0);
    outcome(
        signs && ordering && magnitudes,
        format!(
            "diversity {:+.1}% (12), capacity@10dB {:+.1}% (4), capacity@20dB {:+.1}% (15.5), tol ± 8; signs {} ordering {} magnitudes {}",
            inc60[0],
            inc60[1],
            inc60[2],
            ok_word(signs),
            ok_word(ordering),
            ok_word(magnitudes)
        ),
    )
}

fn ok_word(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "violated"
    }
}

fn criterion_5() -> Outcome {
    let params = CapacityParams::new(10.0, 1, 5, GeometryContext::uncapped()).with_trials(20_000);
    let c = ergodic_capacity(&CorrelationMatrix::identity(1), &params).unwrap();
    let dev = (c.mean_bits_per_s_per_hz - ONE_BY_ONE_10DB).abs();
    outcome(
        dev <= c.half_width_95,
        format!(
            "MC {:.4} ± {:.4} vs oracle {ONE_BY_ONE_10DB:.4} (|dev| {dev:.4})",
            c.mean_bits_per_s_per_hz, c.half_width_95
        ),
    )
}

fn criterion_6() -> Outcome {
    let model = ElementModel::default();
    let counts = [5usize, 6, 7, 9, 11, 17];
    let mut caps = Vec::new();
    for n in counts {
        let g = ArrayGeometry::linear_2d(n, 2.0 / (n - 1) as f64).unwrap();
        let r = kronecker_covariance(&g, &model, PI / 2.0, None).unwrap();
        let m = evaluate_covariance(&r, &g, &[20.0], 2000, 77).unwrap();
        caps.push(m.capacities[0].mean_bits_per_s_per_hz);
    }
    // pairs whose smaller count already has spacing below 0.5λ0
    let slopes: Vec<f64> = (1..counts.len() - 1)
        .map(|i| 100.0 * (caps[i + 1] / caps[i] - 1.0) / (counts[i + 1] - counts[i]) as f64)
        .collect();
    let worst = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let listing: Vec<String> = counts
        .iter()
        .zip(&caps)
        .map(|(n, c)| format!("N={n}:{c:.2}"))
        .collect();

    // Same sweep with the transmit side held at the half-wave count.
    let fixed: Vec<f64> = counts[1..]
        .iter()
        .map(|&n| {
            let g = ArrayGeometry::linear_2d(n, 2.0 / (n - 1) as f64).unwrap();
            let r = kronecker_covariance(&g, &model, PI / 2.0, None).unwrap();
            let mut p = CapacityParams::new(20.0, n, 77, GeometryContext::from_geometry(&g));
            p.n_t = g.n_halfwave();
            ergodic_capacity(&r, &p).unwrap().mean_bits_per_s_per_hz
        })
        .collect();
    let fixed_worst = fixed
        .windows(2)
        .zip(counts[1..].windows(2))
        .map(|(c, n)| 100.0 * (c[1] / c[0] - 1.0) / (n[1] - n[0]) as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    outcome(
        worst < 2.0,
        format!(
            "N_t = N_r: {} bit/s/Hz @20dB, max slope {worst:.2}%/antenna (< 2%); info: N_t = 5 max slope {fixed_worst:.2}%/antenna",
            listing.join(" ")
        ),
    )
}

fn gain_in_db(pattern: &GainPattern) -> f64 {
    to_db(pattern.gain_at_scan)
}

fn criterion_7() -> Outcome {
    let model = ElementModel::default();
    let spacing = 5.0 / 24.0;
    let flat = ArrayGeometry::linear_2d(25, spacing).unwrap();
    let raised = ArrayGeometry::linear_3d(25, spacing, 0.5).unwrap();
    let p_flat = local_patterns(&flat, &model).unwrap();
    let p_raised = local_patterns(&raised, &model).unwrap();
    let area = flat.aperture_length() * 0.5;
    let mut excess_2d = Vec::new();
    let mut margin_3d = 0.0;
    for deg in [0.0f64, 35.0, 70.0] {
        let scan = deg.to_radians();
        let limit = to_db(gain_limit_2d(area, scan).unwrap());
        excess_2d.push(gain_in_db(&beamforming_gain(&flat, &p_flat, scan).unwrap()) - limit);
        if deg == 70.0 {
            margin_3d = gain_in_db(&beamforming_gain(&raised, &p_raised, scan).unwrap()) - limit;
        }
    }
    let worst = excess_2d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    outcome(
        worst <= 0.2 && margin_3d > 0.0,
        format!(
            "2-D minus limit at 0/35/70 deg: {:+.2}/{:+.2}/{:+.2} dB (<= 0.2); 3-D minus limit at 70 deg: {margin_3d:+.2} dB (> 0)",
            excess_2d[0], excess_2d[1], excess_2d[2]
        ),
    )
}

fn criterion_8() -> Outcome {
    let a = 0.1f64.sqrt();
    let s = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(a, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, a),
            Complex64::new(0.0, 0.0),
        ],
    );
    let s = ScatteringMatrix::new(vec![2.45e9], vec![s], 50.0).unwrap();
    let e = embedded_efficiency(&s, 2.45e9).unwrap();
    let e1_ok = (e.values()[0] - 0.8).abs() <= 1e-15;

    let bad = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.6f64.sqrt(), 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.6f64.sqrt(), 0.0),
            Complex64::new(0.0, 0.0),
        ],
    );
    let bad = ScatteringMatrix::new(vec![2.45e9], vec![bad], 50.0).unwrap();
    let eb = embedded_efficiency(&bad, 2.45e9).unwrap();
    let clamp_ok = eb.values()[0] == 0.0 && eb.clamped_ports() == [0] && !bad.is_passive_at(0);
    outcome(
        e1_ok && clamp_ok,
        format!(
            "e1 = {:.17} (0.8); non-passive port clamped to {} with warning flag {:?}",
            e.values()[0],
            eb.values()[0],
            eb.clamped_ports()
        ),
    )
}

fn random_passive(rng: &mut ChaCha8Rng, ports: usize, freqs: usize) -> ScatteringMatrix {
    let mut f = 1e8 * rng.random_range(1.0..10.0);
    let mut frequencies = Vec::new();
    let mut data = Vec::new();
    for _ in 0..freqs {
        frequencies.push(f);
        f += 1e7 * rng.random_range(0.1..5.0);
        let m = CMatrix::from_fn(ports, ports, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let sigma = m.clone().svd(false, false).singular_values.max();
        data.push(m * Complex64::new(rng.random_range(0.1..0.99) / sigma, 0.0));
    }
    ScatteringMatrix::new(frequencies, data, 50.0).unwrap()
}

fn mutation_fixtures() -> Vec<(&'static str, String, usize)> {
    let good2 = "# GHZ S RI R 50\n1.0 0.1 0.0 0.2 0.0 0.2 0.0 0.1 0.0\n2.0 0.1 0.0 0.2 0.0 0.2 0.0 0.1 0.0\n";
    vec![
        (
            "option line removed",
            good2.replacen("# GHZ S RI R 50\n", "", 1),
            2,
        ),
        (
            "truncated block",
            "# GHZ S RI R 50\n1.0 0.1 0.0 0.2 0.0 0.2\n".into(),
            2,
        ),
        (
            "non-numeric token",
            good2.replace("0.2 0.0 0.2", "0.2 abc 0.2"),
            2,
        ),
        (
            "descending frequency",
            "# HZ S RI R 50\n2 0.1 0.2\n1 0.1 0.2\n".into(),
            1,
        ),
        ("non-finite value", "# HZ S RI R 50\n1 nan 0.2\n".into(), 1),
        ("version 2 keyword", format!("[Version] 2.0\n{good2}"), 2),
        (
            "duplicate option line",
            format!("# GHZ S RI R 50\n{good2}"),
            2,
        ),
        (
            "truncated 3-port block",
            "# HZ S RI R 50\n1 0 0 0 0 0 0\n0 0 0 0 0 0\n".into(),
            3,
        ),
        (
            "bad reference impedance",
            "# HZ S RI R fifty\n1 0.1 0.2\n".into(),
            1,
        ),
        (
            "unknown option token",
            "# HZ S XY R 50\n1 0.1 0.2\n".into(),
            1,
        ),
    ]
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut identical = 0;
    for i in 0..20 {
        let ports = 1 + i % 5;
        let freqs = rng.random_range(1..=11);
        let s = random_passive(&mut rng, ports, freqs);
        let text = format_touchstone(&s, DataFormat::Ri).unwrap();
        let back = parse_touchstone_str(&text, ports)
            .unwrap()
            .to_scattering()
            .unwrap();
        if back == s {
            identical += 1;
        }
    }
    let mut rejected = 0;
    let mut failures = Vec::new();
    for (name, text, ports) in mutation_fixtures() {
        match parse_touchstone_str(&text, ports) {
            Err(e) if e.line().is_some() => rejected += 1,
            other => failures.push(format!("{name}: {other:?}")),
        }
    }
    outcome(
        identical == 20 && rejected == 10,
        format!(
            "{identical}/20 RI round trips bit-identical; {rejected}/10 mutations rejected with line-numbered errors{}",
            if failures.is_empty() { String::new() } else { format!(" ({})", failures.join("; ")) }
        ),
    )
}

fn criterion_10() -> Outcome {
    let variants = default_variants().unwrap();
    let model = ElementModel::default();
    let settings = RunSettings::default();
    let mut parts = Vec::new();
    let mut inc = Vec::new();
    for config in [ScenarioConfig::uma2d(), ScenarioConfig::uma3d()] {
        let config = ScenarioConfig {
            seed: 38901,
            ..config
        };
        let summary = run_scenario(&config, &variants, &model, &settings).unwrap();
        let row = &summary.rows[1];
        parts.push(format!(
            "{}: diversity {:+.1}%, capacity {:+.1}%",
            summary.scenario, row.diversity_increase_pct, row.capacity_increase_pct
        ));
        inc.push((row.diversity_increase_pct, row.capacity_increase_pct));
    }
    let positive = inc.iter().all(|(d, c)| *d > 0.0 && *c > 0.0);
    let ordered = inc[0].0 >= inc[1].0 && inc[0].1 >= inc[1].1;
    outcome(
        positive && ordered,
        format!(
            "{}; all positive {}; uma2d >= uma3d {}",
            parts.join("; "),
            ok_word(positive),
            ok_word(ordered)
        ),
    )
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let rank = rng.random_range(1..=n);
    let a = CMatrix::from_fn(n, rank, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    &a * a.adjoint()
}

fn structurally_valid(m: &CMatrix, unit_diagonal: bool) -> bool {
    let n = m.nrows();
    let eig = hermitian_eigenvalues(m);
    let top = eig.iter().copied().fold(0.0, f64::max);
    let diag_ok = (0..n).all(|i| {
        let d = m[(i, i)];
        d.im.abs() <= 1e-10
            && if unit_diagonal {
                (d.re - 1.0).abs() <= 1e-10
            } else {
                (0.0..=1.0).contains(&d.re)
            }
    });
    hermitian_defect(m) <= 1e-10 && eig.iter().all(|v| *v >= -1e-8 * top) && diag_ok
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut bounds_ok = 0;
    let mut scale_ok = 0;
    for _ in 0..100 {
        let n = rng.random_range(1..=16);
        let raw = random_psd(&mut rng, n);
        // unit diagonal via D^{-1/2} A D^{-1/2}
        let d: Vec<f64> = (0..n).map(|i| raw[(i, i)].re.sqrt()).collect();
        let phi = CMatrix::from_fn(n, n, |i, j| raw[(i, j)] / (d[i] * d[j]));
        let phi = CorrelationMatrix::new(phi).unwrap();
        let psi = diversity(&phi).unwrap();
        if psi >= 1.0 - 1e-12 && psi <= n as f64 + 1e-12 {
            bounds_ok += 1;
        }
        let c = rng.random_range(0.01..1.0);
        let scaled = CovarianceMatrix::new(phi.entries() * Complex64::new(c, 0.0)).unwrap();
        if (diversity(&scaled).unwrap() - psi).abs() <= 1e-12 * psi {
            scale_ok += 1;
        }
    }

    // Matrices produced by each generator.
    let mut generated: Vec<(CMatrix, bool)> = Vec::new();
    let model = ElementModel::default().with_resolution(91, 180);
    for (spacing, h) in [(0.5, 0.0), (0.25, 0.5), (0.2, 0.5)] {
        let g = ArrayGeometry::linear_3d(11, spacing, h).unwrap();
        for spread in [30.0, 60.0, 90.0] {
            let s = AngularSpectrum::broadside_deg(spread).unwrap();
            generated.push((
                clarke_correlation(&g, &s, &QuadratureSpec::default())
                    .unwrap()
                    .into_inner(),
                true,
            ));
            let r = kronecker_covariance(&g, &model, f64::to_radians(spread), None).unwrap();
            generated.push((r.into_inner(), true));
        }
    }
    let variants = default_variants().unwrap();
    for config in [ScenarioConfig::uma2d(), ScenarioConfig::uma3d()] {
        let drop = holomimo::channel3gpp::generate_drop(&config, 1, 0).unwrap();
        for v in &variants {
            let p = local_patterns(&v.geometry, &model).unwrap();
            let r =
                holomimo::channel3gpp::scenario_covariance(&drop, &v.geometry, &p, None).unwrap();
            generated.push((r.into_inner(), false));
        }
    }
    let valid = generated
        .iter()
        .filter(|(m, unit)| structurally_valid(m, *unit))
        .count();
    outcome(
        bounds_ok == 100 && scale_ok == 100 && valid == generated.len(),
        format!(
            "bounds {bounds_ok}/100, scale invariance {scale_ok}/100, generated matrices valid {valid}/{}",
            generated.len()
        ),
    )
}

fn main() {
    let secs = Duration::from_secs;
    let mut results: Vec<(usize, Outcome)> = Vec::new();
    results.push((1, timed(secs(1), criterion_1)));
    results.push((2, timed(secs(30), criterion_2)));

    let start = Instant::now();
    let inc90 = theoretical_increments(90.0);
    let inc60 = theoretical_increments(60.0);
    let took = start.elapsed();
    let mut c3 = criterion_3(&inc90);
    c3.detail = format!(
        "{} [{:.2} s for 90 and 60 deg]",
        c3.detail,
        took.as_secs_f64()
    );
    if took > secs(300) {
        c3.pass = false;
    }
    results.push((3, c3));
    results.push((4, criterion_4(&inc60, &inc90)));

    results.push((5, timed(secs(60), criterion_5)));
    results.push((6, timed(secs(300), criterion_6)));
    results.push((7, timed(secs(300), criterion_7)));
    results.push((8, timed(secs(10), criterion_8)));
    results.push((9, timed(secs(60), criterion_9)));
    results.push((10, timed(secs(600), criterion_10)));
    results.push((11, timed(secs(300), criterion_11)));

    let mut failed = 0;
    for (n, o) in &results {
        let word = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("criterion {n:>2}: {word}  {}", o.detail);
    }
    println!(
        "acceptance: {}/{} criteria pass",
        results.len() - failed,
        results.len()
    );
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
