//! Acceptance criteria 1-11. Each test prints one `PASS`/`FAIL` line (run
//! with `--nocapture` to see them) and then asserts the criterion.

use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use spinflow::blowup::{
    blowup_set, decay_profile, extract_bubbles, ledger_assemble, rescale, sphere_transfer, to_cylinder, CylinderGrid,
    ExtractOptions, SphereDirection,
};
use spinflow::chart::{GridChart, SpinStructure};
use spinflow::clifford::{chirality_project, clifford_multiply, Chirality, CliffordRep, Direction};
use spinflow::dirac::{
    dirac_apply, estimate_ratio, green_convolve, green_convolve_direct, weitzenboeck_residual, DiracMode, RatioOptions,
};
use spinflow::fields::{decay_spike, manufactured_torus, smooth_disk_field, two_point_design};
use spinflow::formats::{plane_fit_residual, read_obj_vertices, write_obj};
use spinflow::nonlinear::{
    newton_refine, picard_solve, residual_forced, rhs_eval, ChiralPreset, NewtonOptions, PicardOptions, ReactionSpec,
    Tensor4,
};
use spinflow::rng::Rng;
use spinflow::spinor::{SpinorField, C64, ONE, ZERO};
use spinflow::weierstrass::{
    enneper_data, integrate_surface, mean_curvature, mesh_area, plane_data, weierstrass_form,
};

fn report(criterion: u32, passed: bool, detail: String) {
    let status = if passed { "PASS" } else { "FAIL" };
    println!("{status} criterion {criterion}: {detail}");
}

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn factors(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| w[0] / w[1]).collect()
}

fn torus(n: usize, spin: SpinStructure) -> Arc<GridChart> {
    Arc::new(GridChart::unit_torus(n, spin).unwrap())
}

fn disk(radius: f64, n: usize) -> Arc<GridChart> {
    Arc::new(GridChart::disk(radius, n).unwrap())
}

fn random_field(chart: Arc<GridChart>, n: usize, seed: u64) -> SpinorField {
    let mut rng = Rng::new(seed);
    let values = (0..chart.len() * 2 * n).map(|_| rng.complex_unit()).collect();
    SpinorField::from_values(chart, n, values).unwrap()
}

fn bump(chart: Arc<GridChart>, c: [f64; 2], rho: f64) -> SpinorField {
    SpinorField::from_fn(chart, 1, move |[x, y]| {
        let r2 = ((x - c[0]).powi(2) + (y - c[1]).powi(2)) / (rho * rho);
        if r2 >= 1.0 {
            return vec![ZERO, ZERO];
        }
        let b = (1.0 - r2).powi(4);
        vec![C64::new(b * (1.0 + x), 0.5 * b * y), C64::new(b * x * y, -b)]
    })
}

type M = [[C64; 2]; 2];

fn mul(a: &M, b: &M) -> M {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn dist(a: &M, b: &M) -> f64 {
    (0..4).map(|k| (a[k / 2][k % 2] - b[k / 2][k % 2]).norm()).fold(0.0, f64::max)
}

#[test]
fn criterion_01_algebra() {
    let start = Instant::now();
    let i = C64::new(0.0, 1.0);
    // the representation written out by hand
    let e1: M = [[ZERO, ONE], [-ONE, ZERO]];
    let e2: M = [[ZERO, i], [i, ZERO]];
    let neg2: M = [[-2.0 * ONE, ZERO], [ZERO, -2.0 * ONE]];
    let zero: M = [[ZERO; 2]; 2];
    let rep = CliffordRep::standard();
    let mut defect = dist(&rep.sigma1, &e1).max(dist(&rep.sigma2, &e2));
    for (a, b, want) in [(&e1, &e1, &neg2), (&e2, &e2, &neg2), (&e1, &e2, &zero)] {
        let anti = mul(a, b);
        let anti2 = mul(b, a);
        let sum = [[anti[0][0] + anti2[0][0], anti[0][1] + anti2[0][1]], [anti[1][0] + anti2[1][0], anti[1][1] + anti2[1][1]]];
        defect = defect.max(dist(&sum, want));
    }
    defect = defect.max(rep.relation_defect());

    // field-level identities on random data
    let psi = random_field(torus(16, SpinStructure::AntiAnti), 2, 11);
    let twice = clifford_multiply(Direction::E1, &clifford_multiply(Direction::E1, &psi));
    defect = defect.max(twice.add(&psi).max_abs_diff(&SpinorField::zeros(psi.chart_arc().clone(), 2)));
    let mixed = clifford_multiply(Direction::E1, &clifford_multiply(Direction::E2, &psi))
        .add(&clifford_multiply(Direction::E2, &clifford_multiply(Direction::E1, &psi)));
    defect = defect.max(mixed.values().iter().map(|v| v.norm()).fold(0.0, f64::max));
    let plus = chirality_project(Chirality::Plus, &psi);
    let minus = chirality_project(Chirality::Minus, &psi);
    defect = defect.max(plus.add(&minus).max_abs_diff(&psi));
    defect = defect.max(chirality_project(Chirality::Plus, &plus).max_abs_diff(&plus));
    defect = defect.max(chirality_project(Chirality::Minus, &plus).values().iter().map(|v| v.norm()).fold(0.0, f64::max));

    // null identity, with phi computed independently from psi
    let psi = random_field(torus(16, SpinStructure::AntiAnti), 1, 12);
    let forms = weierstrass_form(&psi).unwrap();
    let mut null: f64 = 0.0;
    for (k, [p1, p2, p3]) in forms.iter().enumerate() {
        let [a, b] = psi.block(k, 0);
        let bb = b.conj() * b.conj();
        let want = [i * (a * a + bb), bb - a * a, 2.0 * a * b.conj()];
        let scale = psi.norm_sqr_at(k).powi(2);
        null = null.max((p1 * p1 + p2 * p2 + p3 * p3).norm() / scale);
        null = null.max((want[0] - p1).norm().max((want[1] - p2).norm()).max((want[2] - p3).norm()) / scale.sqrt());
    }
    let elapsed = start.elapsed();
    let passed = defect <= 1e-12 && null <= 1e-12 && elapsed < Duration::from_secs(1);
    report(1, passed, format!("clifford/chirality defect {defect:.2e}, null identity {null:.2e}, {elapsed:.2?}"));
    assert!(passed);
}

#[test]
fn criterion_02_weitzenboeck() {
    let start = Instant::now();
    let field = |n| manufactured_torus(torus(n, SpinStructure::AntiAnti), 1, 1.0);
    let spectral = weitzenboeck_residual(&field(64), DiracMode::Spectral).unwrap();
    let fd: Vec<f64> = [64, 128, 256].iter().map(|&n| weitzenboeck_residual(&field(n), DiracMode::Fd).unwrap()).collect();
    let f = factors(&fd);
    let elapsed = start.elapsed();
    let passed = spectral <= 1e-10 && f.iter().all(|v| (3.0..=5.0).contains(v)) && elapsed < Duration::from_secs(10);
    report(2, passed, format!("spectral {spectral:.2e}, fd {}, factors {f:.3?}, {elapsed:.2?}", sci(&fd)));
    assert!(passed);
}

#[test]
fn criterion_03_green_round_trip() {
    let start = Instant::now();
    let mut errors = Vec::new();
    for n in [64, 128, 256] {
        let psi = bump(disk(1.0, n), [0.05, -0.1], 0.6);
        let w = green_convolve(&dirac_apply(&psi, DiracMode::Fd).unwrap()).unwrap();
        errors.push(w.sub(&psi).l2_norm() / psi.l2_norm());
    }
    let f = factors(&errors);
    // the direct sum is quartic in n; compare at sizes where it is cheap
    let mut accel: f64 = 0.0;
    for n in [16, 33, 48] {
        let src = dirac_apply(&bump(disk(1.0, n), [0.1, 0.0], 0.5), DiracMode::Fd).unwrap();
        let direct = green_convolve_direct(&src).unwrap();
        let scale = direct.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        accel = accel.max(green_convolve(&src).unwrap().max_abs_diff(&direct) / scale);
    }
    let elapsed = start.elapsed();
    let passed =
        f.iter().all(|v| (3.0..=5.0).contains(v)) && accel <= 1e-10 && elapsed < Duration::from_secs(60);
    report(3, passed, format!("errors {}, factors {f:.3?}, fft vs direct {accel:.2e}, {elapsed:.2?}", sci(&errors)));
    assert!(passed);
}

fn nonlinear_case(name: &str, spec_for: impl Fn(&GridChart) -> ReactionSpec, n_blocks: usize) -> (bool, String) {
    let start = Instant::now();
    let mut errors = Vec::new();
    let mut last_residual = f64::NAN;
    for n in [32, 64, 128] {
        let chart = torus(n, SpinStructure::AntiAnti);
        let spec = spec_for(&chart);
        let truth = manufactured_torus(chart.clone(), n_blocks, 0.5);
        let forcing = dirac_apply(&truth, DiracMode::Spectral).unwrap().sub(&rhs_eval(&spec, &truth).unwrap());
        let seed = SpinorField::zeros(chart, n_blocks);
        let opts = PicardOptions { tol: 1e-8, ..Default::default() };
        let (psi, _) = picard_solve(&spec, &seed, Some(&forcing), opts).unwrap();
        let (psi, _) = newton_refine(&spec, &psi, Some(&forcing), NewtonOptions::default()).unwrap();
        last_residual = residual_forced(&spec, &psi, Some(&forcing), DiracMode::Spectral).unwrap().1;
        errors.push(psi.sub(&truth).l2_norm() / truth.l2_norm());
    }
    let elapsed = start.elapsed();
    let h = 1.0 / 128.0;
    // the spectral scheme is exact on trigonometric data, so the error sits
    // at rounding level, well inside any C h^2 envelope
    let passed = last_residual <= 1e-9 && errors[2] <= h * h && elapsed < Duration::from_secs(120);
    (passed, format!("{name}: residual {last_residual:.2e}, errors {}, {elapsed:.2?}", sci(&errors)))
}

#[test]
fn criterion_04_manufactured_solves() {
    let general = |c: &GridChart| {
        ReactionSpec::general_cubic(c, vec![Tensor4::from_fn(2, |i, j, k, l| if i == l && j == k { 1.0 } else { 0.0 })])
            .unwrap()
    };
    let cases: Vec<(bool, String)> = vec![
        nonlinear_case("scalar_h", |c| ReactionSpec::scalar_h(c, vec![1.0]).unwrap(), 1),
        nonlinear_case("general_cubic n=2", general, 2),
        nonlinear_case("curvature n=2", |_| ReactionSpec::curvature_cubic(Tensor4::constant_curvature(2, 1.0)).unwrap(), 2),
        nonlinear_case("chiral su2", |c| ReactionSpec::chiral_preset(c, ChiralPreset::Su2, vec![1.0]).unwrap(), 1),
        nonlinear_case("chiral nil", |c| ReactionSpec::chiral_preset(c, ChiralPreset::Nil, vec![1.0]).unwrap(), 1),
        nonlinear_case("chiral sl2", |c| ReactionSpec::chiral_preset(c, ChiralPreset::Sl2, vec![1.0]).unwrap(), 1),
    ];
    let passed = cases.iter().all(|c| c.0);
    let detail: Vec<&str> = cases.iter().map(|c| c.1.as_str()).collect();
    report(4, passed, detail.join("; "));
    assert!(passed);
}

#[test]
fn criterion_05_conformal_invariance() {
    let gap = |a: &SpinorField, b: &SpinorField| ((a.total_energy() - b.total_energy()) / a.total_energy()).abs();
    let (mut resc, mut sph, mut cyl) = (Vec::new(), Vec::new(), Vec::new());
    for n in [64, 128, 256] {
        let src = bump(torus(n, SpinStructure::PeriodicPeriodic), [0.5, 0.5], 0.3);
        resc.push(gap(&src, &rescale(&src, [0.5, 0.5], 0.4, disk(1.0, n + 1)).unwrap()));

        let plane = bump(disk(3.0, 3 * n / 2 + 1), [0.2, 0.1], 1.5);
        let up = sphere_transfer(&plane, SphereDirection::ToSphere, Arc::new(GridChart::sphere(n).unwrap())).unwrap();
        sph.push(gap(&plane, &up));

        let ring = SpinorField::from_fn(disk(1.0, n + 1), 1, |[x, y]| {
            let s = (x.hypot(y) - 0.55) / 0.3;
            if s.abs() >= 1.0 {
                return vec![ZERO, ZERO];
            }
            let b = (1.0 - s * s).powi(4);
            vec![C64::new(b * (1.0 + x), 0.0), C64::new(0.0, b * y)]
        });
        let grid = CylinderGrid { t_min: 0.1, t_max: 1.7, n_theta: 2 * n, n_t: n / 2 };
        cyl.push(gap(&ring, &to_cylinder(&ring, [0.0, 0.0], grid).unwrap()));
    }
    // at least second order: every doubling gains a factor of 3 or more
    let ok = |e: &[f64]| e[1] <= 5e-4 && factors(e).iter().all(|f| *f >= 3.0);
    let passed = ok(&resc) && ok(&sph) && ok(&cyl);
    report(
        5,
        passed,
        format!(
            "rescale {} factors {:.2?}; sphere {} factors {:.2?}; cylinder {} factors {:.2?}",
            sci(&resc),
            factors(&resc),
            sci(&sph),
            factors(&sph),
            sci(&cyl),
            factors(&cyl)
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_06_weierstrass_plane() {
    let start = Instant::now();
    let mut worst_fit: f64 = 0.0;
    let mut worst_h: f64 = 0.0;
    let mut worst_area: f64 = 0.0;
    let dir = tempfile::tempdir().unwrap();
    for chart in [torus(64, SpinStructure::AntiAnti), disk(1.0, 65)] {
        let psi = plane_data(chart.clone());
        let base = if chart.is_torus() { 0 } else { chart.index(32, 32) };
        let mesh = integrate_surface(&psi, base).unwrap();
        let path = dir.path().join("plane.obj");
        write_obj(&path, &mesh).unwrap();
        let vertices = read_obj_vertices(&std::fs::read_to_string(&path).unwrap()).unwrap();
        worst_fit = worst_fit.max(plane_fit_residual(&vertices));
        worst_h = worst_h.max(mean_curvature(&mesh).max_abs());
        worst_area = worst_area.max((mesh_area(&mesh) - psi.total_energy()).abs());
        if chart.is_torus() {
            worst_area = worst_area.max((psi.total_energy() - 1.0).abs());
        }
    }
    let elapsed = start.elapsed();
    let passed = worst_fit <= 1e-8 && worst_h <= 1e-8 && worst_area <= 1e-12 && elapsed < Duration::from_secs(5);
    report(6, passed, format!("plane fit {worst_fit:.2e}, |H| {worst_h:.2e}, |area - E| {worst_area:.2e}, {elapsed:.2?}"));
    assert!(passed);
}

/// `psi = (conj(e^{z/2}), 1)`: harmonic, with a non-polynomial form, so the
/// trapezoid rule leaves a genuine closure error.
fn exponential_harmonic(chart: Arc<GridChart>) -> SpinorField {
    SpinorField::from_fn(chart, 1, |[x, y]| vec![(C64::new(x, y) * 0.5).exp().conj(), ONE])
}

#[test]
fn criterion_07_enneper() {
    let mut loops = Vec::new();
    let mut curvature = Vec::new();
    let mut area_gap = Vec::new();
    let mut enneper_loops: f64 = 0.0;
    for n in [65, 129, 257] {
        let chart = disk(1.0, n);
        let centre = chart.index(n / 2, n / 2);
        let psi = enneper_data(chart.clone());
        let mesh = integrate_surface(&psi, centre).unwrap();
        enneper_loops = enneper_loops.max(mesh.loop_residual);
        curvature.push(mean_curvature(&mesh).max_abs_within(&mesh, 2));
        area_gap.push((mesh_area(&mesh) - psi.total_energy()).abs() / psi.total_energy());
        let other = integrate_surface(&exponential_harmonic(chart.clone()), centre).unwrap();
        loops.push(other.loop_residual);
    }
    let h_ok = curvature[1] <= 0.05 && curvature.windows(2).all(|w| w[1] <= w[0] || w[1] <= 1e-10);
    let loop_ok = factors(&loops).iter().all(|f| *f >= 3.0) && enneper_loops <= 1e-10;
    let passed = h_ok && loop_ok && area_gap[1] <= 1e-3;
    report(
        7,
        passed,
        format!(
            "max interior |H| {}; area gap {}; loop residual Enneper {enneper_loops:.1e}, exp data {} factors {:.2?}",
            sci(&curvature),
            sci(&area_gap),
            sci(&loops),
            factors(&loops)
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_08_energy_identity() {
    let start = Instant::now();
    let design = two_point_design(512, 6).unwrap();
    let eps = 0.6;
    let points = blowup_set(&design.sequence, eps, &[0.08, 0.06, 0.04]).unwrap();
    let mut bubbles = Vec::new();
    for p in &points {
        bubbles.extend(extract_bubbles(&design.sequence, p.location, eps, ExtractOptions::default()).unwrap());
    }
    let ledger = ledger_assemble(&design.sequence, &design.background, &bubbles, 1.0).unwrap();

    // compare each recovered bubble with the nearest planted one of the
    // same element
    let last = design.sequence.len() - 1;
    let planted = design.element(last);
    let chart = design.sequence[0].chart();
    let mut worst_ratio: f64 = 1.0;
    for b in &bubbles {
        let centre = *b.centers.last().unwrap();
        let nearest = planted
            .iter()
            .min_by(|x, y| chart.distance(x.center, centre).total_cmp(&chart.distance(y.center, centre)))
            .unwrap();
        let ratio = b.scales.last().unwrap() / nearest.scale;
        worst_ratio = worst_ratio.max(ratio.max(1.0 / ratio));
    }
    let elapsed = start.elapsed();
    let passed = points.len() == 2
        && ledger.relative_defect() <= 0.01
        && bubbles.len() == 3
        && worst_ratio <= 2.0
        && elapsed < Duration::from_secs(120);
    report(
        8,
        passed,
        format!(
            "{} points, {} bubbles, defect {:.3}%, worst scale ratio {worst_ratio:.2}, {elapsed:.2?}",
            points.len(),
            bubbles.len(),
            100.0 * ledger.relative_defect()
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_09_neck_decay() {
    let chart = disk(1.0, 129);
    let radii = [0.5, 0.35, 0.25, 0.18, 0.125, 0.09, 0.0625];
    let smooth = decay_profile(&smooth_disk_field(chart.clone()), [0.0, 0.0], &radii).unwrap();
    let spike = decay_profile(&decay_spike(chart, [0.0, 0.0], 1.0), [0.0, 0.0], &radii).unwrap();
    let passed = smooth.exponent >= 0.1 && !smooth.flagged && spike.flagged && spike.exponent <= 0.02;
    report(9, passed, format!("smooth exponent {:.3}, spike exponent {:.4} (flagged {})", smooth.exponent, spike.exponent, spike.flagged));
    assert!(passed);
}

/// Largest ratio per level at p = 4/3, 50 trials, seed 0, measured when the
/// suite was written. A regression baseline only.
const RATIO_BASELINE: [f64; 3] = [1.2623563166944605, 1.2777532269949783, 1.2819835020134307];

#[test]
fn criterion_10_estimate_ratio() {
    let rep = estimate_ratio(&RatioOptions { p: 4.0 / 3.0, trials: 50, levels: vec![64, 128, 256], seed: 0 }).unwrap();
    let maxima: Vec<f64> = rep.levels.iter().map(|l| l.max_ratio).collect();
    let baseline_gap =
        maxima.iter().zip(RATIO_BASELINE).map(|(m, b)| ((m - b) / b).abs()).fold(0.0, f64::max);
    let passed = rep.max_drift < 0.2 && rep.levels.iter().all(|l| l.trials_used == 50) && baseline_gap <= 1e-6;
    report(10, passed, format!("max ratios {maxima:?}, drift {:.2?}, baseline gap {baseline_gap:.1e}", rep.drift));
    assert!(passed);
}

#[test]
fn criterion_11_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("verify.cfg");
    std::fs::write(&cfg, "run.seed = 42\n").unwrap();
    let run = |threads: &str, out: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_spinflow"))
            .env("SPINFLOW_THREADS", threads)
            .args(["verify", "--config", cfg.to_str().unwrap(), "--out", dir.path().join(out).to_str().unwrap()])
            .output()
            .unwrap();
        let report = std::fs::read(dir.path().join(out).join("verify_report.json")).unwrap();
        (o.status.code(), o.stdout, report)
    };
    let a = run("1", "a");
    let b = run("4", "b");
    let c = run("4", "c");
    let passed = a.0 == Some(0) && a == b && b == c;
    report(11, passed, format!("verify stdout and report identical across runs and SPINFLOW_THREADS=1/4: {passed}"));
    assert!(passed);
}
