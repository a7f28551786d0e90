//! Acceptance gate: every criterion at its stated tolerance, one PASS/FAIL
//! line each. Runs without the libtest harness so the lines always print.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use biphoton::config::RunConfig;
use biphoton::report::state_report;
use biphoton::sweep::{analytic_map, numeric_map, pool, pump_responses};
use biphoton::tomo::{self, GenerationPath, Target};
use biphoton_core::analytic::{linspace, solve_waveguide};
use biphoton_core::density::pure_density_matrix;
use biphoton_core::filter::{filtered_correlations, reduced_density_matrix};
use biphoton_core::metrics::{concurrence, concurrence_pure, fidelity, state_fidelity};
use biphoton_core::propagation::{integrate, DEFAULT_STEPS};
use biphoton_core::tomography::{linear_inversion, mle_reconstruct, simulate_counts, MleOptions};
use biphoton_core::{
    BiphotonState, CouplerConfig, DensityMatrix, DispersionModel, Error, FilterSpec, InhomogeneityProfile, MapPoint,
    MeasurementSet, Noise, SweepGrid, C64,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

/// Dominance ratio at the steering points on an ideal coupler, recorded from
/// an independent RK4 run before the assertion was written.
const STEERING_DOMINANCE_ORACLE: f64 = 0.998405617282;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ideal() -> CouplerConfig {
    CouplerConfig::normalized(CouplerConfig::DEVICE_COUPLING, FRAC_PI_2)
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// `b` rotated by the phase that best aligns it with `a`.
fn aligned_error(a: &BiphotonState, b: &BiphotonState) -> f64 {
    let (va, vb) = (a.as_vector(), b.as_vector());
    let overlap: C64 = va.iter().zip(&vb).map(|(x, y)| x * y.conj()).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    va.iter()
        .zip(&vb)
        .map(|(x, y)| (x - y * phase).norm())
        .fold(0.0, f64::max)
}

fn numeric_state(cfg: &CouplerConfig, omega0: f64) -> Result<BiphotonState, Error> {
    let raw = integrate(
        cfg,
        &DispersionModel::none(omega0),
        &InhomogeneityProfile::homogeneous(),
        omega0,
        DEFAULT_STEPS,
    )?;
    cfg.normalize_output(&raw)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let omega0 = FilterSpec::default().center();
    let grid = SweepGrid::uniform((-PI, PI, 21), (-8.0, 8.0, 21)).map_err(e2s)?;
    let mut worst = 0.0f64;
    let mut degenerate = 0;
    for base in [CouplerConfig::device(), ideal()] {
        for (p, b) in grid.points() {
            let cfg = base.with_pump_phase(p).with_mismatch_over_c(b);
            match (solve_waveguide(&cfg), numeric_state(&cfg, omega0)) {
                (Ok(a), Ok(n)) => worst = worst.max(aligned_error(&a, &n)),
                (Err(Error::Degenerate(_)), Err(Error::Degenerate(_))) => degenerate += 1,
                (a, n) => return Err(format!("solvers disagree at ({p}, {b}): {a:?} vs {n:?}")),
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst < 1e-6, format!("max component error {worst:e}"))?;
    check(secs < 30.0, format!("took {secs:.1} s"))?;
    Ok(format!(
        "2 x 441 points, max component error {worst:.2e}, {degenerate} no-generation points in both, {secs:.1} s"
    ))
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for base in [CouplerConfig::device(), ideal()] {
        for p in linspace(-PI, PI, 50) {
            let state = solve_waveguide(&base.with_pump_phase(p)).map_err(e2s)?;
            let closed = concurrence_pure(&state).map_err(e2s)?;
            let wootters = concurrence(&pure_density_matrix(&state).map_err(e2s)?).map_err(e2s)?;
            worst = worst.max((closed - 1.0).abs()).max((wootters - 1.0).abs());
        }
    }
    check(worst < 1e-9, format!("max |C - 1| = {worst:e}"))?;
    Ok(format!(
        "50 phases x 2 couplers, closed form and Wootters, max |C - 1| = {worst:.2e}"
    ))
}

fn random_profile(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let degree = Uniform::new_inclusive(1usize, 6).unwrap().sample(rng);
    let coef = Uniform::new(-10.0, 10.0).unwrap();
    (0..=degree).map(|_| coef.sample(rng)).collect()
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let betas: Vec<f64> = (-8..=8).map(f64::from).collect();
    let threads = pool(std::thread::available_parallelism().map_or(1, |n| n.get())).map_err(e2s)?;
    let (mut g12, mut g_diff, mut amp_diff) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..5 {
        let mut cfg = RunConfig::default();
        cfg.profile.coefficients_over_c = Some(random_profile(&mut rng));
        cfg.spectrum.points = 31;
        let model = cfg.resolve().map_err(e2s)?;
        let coupler = model.coupler.with_pump_phase(PI);
        if coupler.pump1 != coupler.pump2 {
            return Err("pumps are not balanced".into());
        }
        for resp in pump_responses(&model, &betas, &threads).map_err(e2s)? {
            let spectral = resp.combine(&coupler);
            let g = filtered_correlations(&spectral, &model.filter).map_err(e2s)?;
            g12 = g12.max(g.normalized[0][1]).max(g.normalized[1][0]);
            g_diff = g_diff.max((g.normalized[0][0] - g.normalized[1][1]).abs());
            let scale = spectral.states().iter().map(|s| s.norm()).fold(0.0, f64::max);
            for s in spectral.states() {
                amp_diff = amp_diff.max((s.amp(1, 1).norm() - s.amp(2, 2).norm()).abs() / scale);
            }
        }
    }
    check(g12 < 1e-9, format!("normalized G12 = {g12:e}"))?;
    check(g_diff < 1e-9, format!("|G11 - G22| = {g_diff:e}"))?;
    check(amp_diff < 1e-9, format!("||psi11| - |psi22|| = {amp_diff:e}"))?;
    Ok(format!(
        "17 mismatches x 5 random profiles through the filter: G12 <= {g12:.2e}, |G11 - G22| <= {g_diff:.2e}, \
         ||psi11| - |psi22|| <= {amp_diff:.2e}"
    ))
}

fn criterion_4() -> Outcome {
    let mut worst_c = 0.0f64;
    let mut worst_p = 0.0f64;
    for b in [-2.0, 2.0] {
        let state = solve_waveguide(&ideal().with_mismatch_over_c(b)).map_err(e2s)?;
        let closed = concurrence_pure(&state).map_err(e2s)?;
        let wootters = concurrence(&pure_density_matrix(&state).map_err(e2s)?).map_err(e2s)?;
        worst_c = worst_c.max(closed).max(wootters);
        for p in state.probabilities().iter().flatten() {
            worst_p = worst_p.max((p - 0.25).abs());
        }
    }
    check(worst_c < 1e-9, format!("concurrence {worst_c:e}"))?;
    check(worst_p < 1e-9, format!("max |p - 1/4| = {worst_p:e}"))?;
    Ok(format!(
        "delta_beta/c = +-2: concurrence <= {worst_c:.2e}, max |p - 1/4| = {worst_p:.2e}"
    ))
}

fn criterion_5() -> Outcome {
    let omega0 = FilterSpec::default().center();
    let mut values = Vec::new();
    for (p, b) in [
        (0.53 * PI, 5.0),
        (-0.53 * PI, -5.0),
        (0.53 * PI, -5.0),
        (-0.53 * PI, 5.0),
    ] {
        let reported = state_report(&ideal(), p, b).map_err(e2s)?.dominance_ratio;
        let cfg = ideal().with_pump_phase(p).with_mismatch_over_c(b);
        let numeric = MapPoint::from_state(&numeric_state(&cfg, omega0).map_err(e2s)?)
            .map_err(e2s)?
            .dominance_ratio();
        check(reported > 0.9, format!("dominance {reported} at ({p}, {b})"))?;
        check(
            (reported - STEERING_DOMINANCE_ORACLE).abs() < 1e-11,
            format!("dominance {reported} differs from the recorded {STEERING_DOMINANCE_ORACLE}"),
        )?;
        check(
            (numeric - reported).abs() < 1e-6,
            format!("integrated dominance {numeric} vs reported {reported}"),
        )?;
        values.push(reported);
    }
    Ok(format!(
        "dominance ratio {:.12} at all four sign combinations (recorded {STEERING_DOMINANCE_ORACLE}), RK4 agrees",
        values[0]
    ))
}

fn criterion_6() -> Outcome {
    let threads = pool(std::thread::available_parallelism().map_or(1, |n| n.get())).map_err(e2s)?;
    let run = |coefficients: Option<Vec<f64>>, curvature: Option<f64>| -> Result<(f64, f64), String> {
        let mut cfg = RunConfig::default();
        cfg.profile.coefficients_over_c = coefficients;
        cfg.dispersion.curvature_s2_per_m = curvature;
        let model = cfg.resolve().map_err(e2s)?;
        let resp = pump_responses(&model, &[0.0], &threads).map_err(e2s)?;
        let spectral = resp[0].combine(&model.coupler.with_pump_phase(0.0));
        let g = filtered_correlations(&spectral, &model.filter).map_err(e2s)?;
        let rho = reduced_density_matrix(&spectral, &model.filter).map_err(e2s)?;
        Ok((g.normalized[0][0], concurrence(&rho).map_err(e2s)?))
    };
    let (g11, c) = run(None, None)?;
    let (g11_flat, c_flat) = run(Some(vec![]), None)?;
    let (g11_profile, c_profile) = run(None, Some(0.0))?;
    check(g11 > 0.02, format!("G11 = {g11}"))?;
    check(c < 1.0 - 1e-3, format!("concurrence = {c}"))?;
    Ok(format!(
        "bundled profile: G11 = {g11:.4}, C = {c:.4} (homogeneous sample: G11 = {g11_flat:.4}, C = {c_flat:.4}; \
         profile without dispersion: G11 = {g11_profile:.4}, C = {c_profile:.4})"
    ))
}

fn random_density(rng: &mut ChaCha8Rng, rank: usize) -> DensityMatrix {
    let g: Vec<[C64; 4]> = (0..rank)
        .map(|_| {
            std::array::from_fn(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                C64::new(re, im)
            })
        })
        .collect();
    let rows = std::array::from_fn(|i| std::array::from_fn(|j| g.iter().map(|v| v[i] * v[j].conj()).sum()));
    DensityMatrix::from_rows(rows).trace_normalized().unwrap()
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let set = MeasurementSet::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst_f, mut worst_res, mut worst_li) = (1.0f64, 0.0f64, 0.0f64);
    for k in 0..100 {
        let rho = random_density(&mut rng, 1 + k % 4);
        let rec = simulate_counts(&rho, &set, 1e6, Noise::None, 0).map_err(e2s)?;
        let li = linear_inversion(&rec, &set).map_err(e2s)?;
        let mle = mle_reconstruct(&rec, &set, &MleOptions::default()).map_err(e2s)?;
        worst_res = worst_res.max(li.residual);
        worst_li = worst_li.max(li.rho.max_abs_diff(&rho));
        worst_f = worst_f.min(state_fidelity(&mle.rho, &rho).map_err(e2s)?);
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst_f > 0.999, format!("min MLE fidelity {worst_f}"))?;
    check(
        worst_res < 1e-10,
        format!("max linear-inversion residual {worst_res:e}"),
    )?;
    check(
        worst_li < 1e-10,
        format!("linear inversion misses the input by {worst_li:e}"),
    )?;
    check(secs < 60.0, format!("took {secs:.1} s"))?;
    Ok(format!(
        "100 states (ranks 1-4): min MLE fidelity {worst_f:.8}, max residual {worst_res:.1e}, \
         max |rho_LI - rho| {worst_li:.1e}, {secs:.1} s"
    ))
}

fn criterion_8() -> Outcome {
    let model = RunConfig::default().resolve().map_err(e2s)?;
    let target = Target::Noon.ideal_state(model.coupler.coupling).map_err(e2s)?;
    let rho = tomo::generate(&model, Target::Noon, GenerationPath::Analytic).map_err(e2s)?;
    let set = MeasurementSet::standard();
    let mut fids = Vec::with_capacity(100);
    for seed in 0..100 {
        let rec = simulate_counts(&rho, &set, 5000.0, Noise::Poisson, seed).map_err(e2s)?;
        let mle = mle_reconstruct(&rec, &set, &MleOptions::default()).map_err(e2s)?;
        fids.push(fidelity(&mle.rho, &target).map_err(e2s)?);
    }
    let good = fids.iter().filter(|&&f| f > 0.9).count();
    let min = fids.iter().copied().fold(1.0, f64::min);
    let mean = fids.iter().sum::<f64>() / fids.len() as f64;
    check(good >= 95, format!("only {good}/100 seeds above 0.9"))?;
    Ok(format!(
        "{good}/100 seeds with fidelity > 0.9 (mean {mean:.4}, min {min:.4})"
    ))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut round_trip = 0.0f64;
    for _ in 0..1000 {
        let v: [C64; 4] = std::array::from_fn(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im)
        });
        let s = BiphotonState::from_vector(v).normalize().map_err(e2s)?;
        let back = s.to_eigenmode().and_then(|e| e.to_waveguide()).map_err(e2s)?;
        let e = BiphotonState::eigenmode(v[0], v[1], v[2], v[3])
            .normalize()
            .map_err(e2s)?;
        let e_back = e.to_waveguide().and_then(|w| w.to_eigenmode()).map_err(e2s)?;
        for (x, y) in back.as_vector().iter().zip(s.as_vector()) {
            round_trip = round_trip.max((x - y).norm());
        }
        for (x, y) in e_back.as_vector().iter().zip(e.as_vector()) {
            round_trip = round_trip.max((x - y).norm());
        }
    }
    let threads = pool(std::thread::available_parallelism().map_or(1, |n| n.get())).map_err(e2s)?;
    let mut total_err = 0.0f64;
    let mut points = 0;
    let model = RunConfig::default().resolve().map_err(e2s)?;
    for base in [model.coupler, ideal()] {
        let map = analytic_map(&base, &model.grid, &threads).map_err(e2s)?;
        for p in map.points().iter().flatten() {
            total_err = total_err.max((p.total_probability() - 1.0).abs());
            points += 1;
        }
    }
    let mut cfg = RunConfig::default();
    cfg.sweep.delta_phi_points = 5;
    cfg.sweep.delta_beta_over_c_points = 5;
    cfg.spectrum.points = 31;
    let numeric = numeric_map(&cfg.resolve().map_err(e2s)?, &threads).map_err(e2s)?;
    let mut min_eig = f64::INFINITY;
    for (p, rho) in numeric.map.points().iter().zip(&numeric.densities) {
        if let (Some(p), Some(rho)) = (p, rho) {
            total_err = total_err.max((p.total_probability() - 1.0).abs());
            min_eig = min_eig.min(rho.min_eigenvalue());
            points += 1;
        }
    }
    check(round_trip < 1e-14, format!("basis round trip error {round_trip:e}"))?;
    check(total_err < 1e-12, format!("|p11 + 2 p12 + p22 - 1| = {total_err:e}"))?;
    check(
        min_eig >= -1e-10,
        format!("reduced density matrix eigenvalue {min_eig:e}"),
    )?;
    Ok(format!(
        "round trip {round_trip:.1e}, {points} sweep points with |sum - 1| <= {total_err:.1e}, \
         min reduced-rho eigenvalue {min_eig:.1e}"
    ))
}

fn read_dir_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect()
}

/// The manifest minus timing and the output directory, which the two runs
/// are given differently on purpose.
fn comparable_manifest(bytes: &[u8]) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
    let obj = v.as_object_mut().unwrap();
    obj.remove("run_info");
    obj["config"]["output"].as_object_mut().unwrap().remove("directory");
    v
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_biphoton"))
        .args(args)
        .output()
        .map_err(e2s)?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("biphoton {args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn same_outputs(a: &Path, b: &Path) -> Result<usize, String> {
    let (fa, fb) = (read_dir_files(a), read_dir_files(b));
    check(
        fa.keys().eq(fb.keys()),
        format!("file sets differ: {:?} vs {:?}", fa.keys(), fb.keys()),
    )?;
    for (name, bytes) in &fa {
        if name == "manifest.json" {
            check(
                comparable_manifest(bytes) == comparable_manifest(&fb[name]),
                format!("{name} differs outside run_info and the output directory"),
            )?;
        } else {
            check(bytes == &fb[name], format!("{name} differs between runs"))?;
        }
    }
    Ok(fa.len() - 1)
}

fn criterion_10() -> Outcome {
    let tmp = tempfile::tempdir().map_err(e2s)?;
    let root = tmp.path();
    let small = root.join("small.json");
    std::fs::write(
        &small,
        r#"{"sweep": {"delta_phi_points": 4, "delta_beta_over_c_points": 3}, "spectrum": {"points": 21}}"#,
    )
    .map_err(e2s)?;
    let small = small.to_str().unwrap();
    let dir = |name: &str| root.join(name).to_string_lossy().into_owned();
    let mut compared = 0;

    run_cli(&["sweep", "--threads", "1", "--out", &dir("a1")])?;
    run_cli(&["sweep", "--threads", "3", "--out", &dir("a2")])?;
    compared += same_outputs(&root.join("a1"), &root.join("a2"))?;

    run_cli(&[
        "sweep",
        "--mode",
        "numeric",
        "--config",
        small,
        "--threads",
        "1",
        "--out",
        &dir("n1"),
    ])?;
    run_cli(&[
        "sweep",
        "--mode",
        "numeric",
        "--config",
        small,
        "--threads",
        "2",
        "--out",
        &dir("n2"),
    ])?;
    compared += same_outputs(&root.join("n1"), &root.join("n2"))?;

    // the config echoed in a manifest reproduces the run
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(root.join("n1/manifest.json")).map_err(e2s)?).map_err(e2s)?;
    let echo = root.join("echo.json");
    std::fs::write(&echo, manifest["config"].to_string()).map_err(e2s)?;
    run_cli(&[
        "sweep",
        "--mode",
        "numeric",
        "--config",
        echo.to_str().unwrap(),
        "--out",
        &dir("n3"),
    ])?;
    compared += same_outputs(&root.join("n1"), &root.join("n3"))?;

    for d in ["t1", "t2"] {
        run_cli(&[
            "tomography",
            "--target",
            "noon",
            "--noise",
            "poisson",
            "--counts",
            "5000",
            "--seed",
            "42",
            "--bootstrap",
            "4",
            "--out",
            &dir(d),
        ])?;
    }
    compared += same_outputs(&root.join("t1"), &root.join("t2"))?;
    Ok(format!(
        "{compared} data files byte-identical across repeated sweep and tomography runs"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("analytic-numeric equivalence", criterion_1),
        ("Bell line", criterion_2),
        ("N00N robustness", criterion_3),
        ("factorizable point", criterion_4),
        ("steering point", criterion_5),
        ("inhomogeneity reproduction", criterion_6),
        ("tomography round trip", criterion_7),
        ("noisy N00N reconstruction", criterion_8),
        ("unitarity and normalization", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
