//! Acceptance suite: one test per criterion, each printing a pass line
//! with the measured quantities. Tolerances are pinned in the assertions.

use std::time::Instant;

use ndarray::Array1;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use pointerlab::density::{hs_distance, DensityMatrix};
use pointerlab::gaussian::{
    equilibrium_width, fiducial_alpha, fit_gaussian, make_pointer_state, sieve_alpha, AlphaParam,
    PhasePoint,
};
use pointerlab::master::{self, entropy_rate_initial, evolve_master, ModelParams};
use pointerlab::phasespace::{
    covariance_moment_ode, diffusion_matrix, evolve_weight, langevin_step, reconstruct_rho,
    reconstruct_rho_with_nodes, GaussianWeight,
};
use pointerlab::qsd::{
    derive_seed, ensemble_average, median, qsd_dt_max, run_ensemble, run_trajectory, sample_dz,
    NoiseSpec,
};
use pointerlab::robustness::{
    det_condition, drift_rhs, evolve_drift, proportionality_check, sieve_optimize,
};
use pointerlab::sym2::SymMatrix2;
use pointerlab::{Grid, WaveFunction};
use pointerlab_cli::units::convert_units;

const SIGMA0: f64 = 0.8408964152537146; // (2 D m)^(-1/4) at D = m = 1

fn desk_grid() -> Grid {
    Grid::new(256, 20.0 * SIGMA0).unwrap()
}

fn fiducial_state(grid: &Grid) -> WaveFunction {
    make_pointer_state(
        grid.clone(),
        fiducial_alpha(1.0, 1.0).unwrap(),
        PhasePoint::new(0.0, 0.0),
    )
    .unwrap()
}

fn random_admissible_alpha(rng: &mut ChaCha12Rng, d: f64, m: f64) -> AlphaParam {
    loop {
        let phi = rng.gen_range(-1.55f64..-0.02);
        let s = rng.gen_range(0.05f64..1.0);
        let r = s * (-8.0 * (2.0 * phi).sin()).max(0.0).sqrt();
        if r < 1e-2 {
            continue;
        }
        let scale = (d * m).sqrt();
        let re = scale * r * phi.cos();
        if re > 1e-4 {
            return AlphaParam::new(re, scale * r * phi.sin()).unwrap();
        }
    }
}

#[test]
fn criterion_01_sieve_optimum_matches_closed_form() {
    let mut rng = ChaCha12Rng::seed_from_u64(101);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let d = rng.gen_range(0.2f64..5.0);
        let m = rng.gen_range(0.2f64..5.0);
        let params = ModelParams::new(m, d).unwrap();
        let found = sieve_optimize(&params, 20_000).unwrap();
        let expect = sieve_alpha(d, m).unwrap();
        let rel = ((found.re - expect.re).powi(2) + (found.im - expect.im).powi(2)).sqrt()
            / (expect.re * expect.re + expect.im * expect.im).sqrt();
        worst = worst.max(rel);
        assert!(
            rel <= 1e-6,
            "sieve optimum off by {rel:.3e} at D = {d}, m = {m}"
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "sieve runtime {elapsed:.3} s exceeds 1 s");
    println!(
        "criterion 01 PASS: sieve optimum within {worst:.3e} relative over 5 random (D, m); runtime {elapsed:.3} s"
    );
}

#[test]
fn criterion_02_determinant_boundary_and_quartic_identity() {
    let mut rng = ChaCha12Rng::seed_from_u64(202);
    // degenerate diffusion matrix at the sieve optimum
    let mut worst_det = 0.0f64;
    for _ in 0..5 {
        let d = rng.gen_range(0.2f64..4.0);
        let m = rng.gen_range(0.2f64..4.0);
        let params = ModelParams::new(m, d).unwrap();
        let alpha_s = sieve_alpha(d, m).unwrap();
        let det = diffusion_matrix(alpha_s, &params).det();
        worst_det = worst_det.max(det.abs());
        assert!(det.abs() <= 1e-9, "det D(alpha_s) = {det:.3e}");
    }
    // q(alpha) = -16 m^2 alpha_R^2 det D(alpha) over random admissible alpha
    let mut worst_rel = 0.0f64;
    for _ in 0..100 {
        let d = rng.gen_range(0.2f64..4.0);
        let m = rng.gen_range(0.2f64..4.0);
        let params = ModelParams::new(m, d).unwrap();
        let alpha = random_admissible_alpha(&mut rng, d, m);
        let q = det_condition(alpha, &params);
        let identity = -16.0 * m * m * alpha.re * alpha.re * diffusion_matrix(alpha, &params).det();
        let scale = q.abs().max(identity.abs()).max(1e-30);
        let rel = (q - identity).abs() / scale;
        worst_rel = worst_rel.max(rel);
        assert!(rel <= 1e-9, "identity violated by {rel:.3e}");
    }
    println!(
        "criterion 02 PASS: |det D(alpha_s)| <= {worst_det:.3e}; quartic identity within {worst_rel:.3e} over 100 alphas"
    );
}

#[test]
fn criterion_03_fiducial_state_is_stationary_under_the_drift() {
    let grid = desk_grid();
    let params = ModelParams::new(1.0, 1.0).unwrap();
    let psi = fiducial_state(&grid);
    let rhs = drift_rhs(&psi, &params).unwrap();

    // projector-level derivative
    let n = grid.n();
    let dx = grid.spacing();
    let a = psi.amplitudes();
    let d = rhs.amplitudes();
    let mut sum = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            let dp = d[j] * a[k].conj() + a[j] * d[k].conj();
            sum += dp.norm_sqr();
        }
    }
    let dp_norm = (sum * dx * dx).sqrt();
    assert!(dp_norm <= 1e-6, "projector derivative norm {dp_norm:.3e}");

    // state-level derivative is the pure phase rotation -i sqrt(D/8m) psi
    let expect = C64::new(0.0, -(1.0f64 / 8.0).sqrt());
    let dev = d
        .iter()
        .zip(a)
        .map(|(di, ai)| (di - expect * ai).norm_sqr())
        .sum::<f64>()
        .sqrt()
        * dx.sqrt();
    assert!(dev <= 1e-6, "state-level deviation {dev:.3e}");
    println!(
        "criterion 03 PASS: |dP/dt| = {dp_norm:.3e}, state derivative within {dev:.3e} of -i sqrt(D/8m) psi"
    );
}

#[test]
fn criterion_04_drift_flow_converges_from_doubled_width_parameter() {
    let grid = desk_grid();
    let params = ModelParams::new(1.0, 1.0).unwrap();
    let target = fiducial_alpha(1.0, 1.0).unwrap();
    let start = AlphaParam::new(2.0 * target.re, 0.0).unwrap();
    let psi = make_pointer_state(grid.clone(), start, PhasePoint::new(0.0, 0.0)).unwrap();
    let dt = 0.9 * master::dt_max(&grid, &params);
    let t_final = 10.0 * params.decoherence_time();
    let run = evolve_drift(&psi, &params, t_final, dt, 100_000).unwrap();
    let fit = run.fits.last().unwrap();
    let rel = ((fit.alpha.re - target.re).powi(2) + (fit.alpha.im - target.im).powi(2)).sqrt()
        / (target.re * target.re + target.im * target.im).sqrt();
    assert!(rel <= 0.01, "alpha relative distance {rel:.3e}");
    println!(
        "criterion 04 PASS: alpha converged to within {rel:.3e} of the stationary value by t = {t_final}"
    );
}

#[test]
fn criterion_05_uncertainty_proportional_to_diffusion() {
    let params = ModelParams::new(1.0, 1.0).unwrap();
    let alpha = fiducial_alpha(1.0, 1.0).unwrap();
    let prop = proportionality_check(alpha, &params);
    assert!(
        prop.is_proportional && prop.residual <= 1e-9,
        "ratio spread {:.3e}",
        prop.residual
    );
    let derived = (params.m / (2.0 * params.d)).sqrt();
    let quoted = params.m / (2.0 * params.d);
    let dev_derived = (prop.constant - derived).abs() / derived;
    let dev_quoted = (prop.constant - quoted).abs() / quoted;
    println!(
        "criterion 05 PASS: C = c D with c = {:.7}, spread {:.3e}; c vs sqrt(m/2D) = {:.3e}, c vs m/2D = {:.3e} (proportionality asserted, constant reported)",
        prop.constant, prop.residual, dev_derived, dev_quoted
    );
}

#[test]
fn criterion_06_entropy_rate_against_finite_difference() {
    // Finite-difference dS/dt at t = 0 against the analytic rate for
    // three widths. The measured rate is 2 D sigma^2; the coefficient-1
    // form D sigma^2 is reported for comparison.
    let params = ModelParams::new(1.0, 1.0).unwrap();
    let grid = Grid::new(512, 25.6).unwrap();
    let mut report = Vec::new();
    for scale in [0.5, 1.0, 2.0] {
        let sigma = scale * SIGMA0;
        let alpha = AlphaParam::new(1.0 / (sigma * sigma), 0.0).unwrap();
        let psi = make_pointer_state(grid.clone(), alpha, PhasePoint::new(0.0, 0.0)).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let var = pointerlab::wavefunction::variance_x(&psi).unwrap();
        let analytic = entropy_rate_initial(&psi, &params).unwrap();
        let delta = 1e-3 / (params.d * var);
        let dt = (0.9 * master::dt_max(&grid, &params)).min(delta / 8.0);
        let run = evolve_master(&rho, &params, delta, dt, usize::MAX).unwrap();
        let s0 = 1.0 - rho.purity();
        let s1 = 1.0 - run.final_state.purity();
        let fd = (s1 - s0) / delta;
        let rel = (fd - analytic).abs() / analytic;
        assert!(
            rel <= 0.01,
            "width {sigma}: finite difference {fd:.6} vs analytic {analytic:.6} (rel {rel:.3e})"
        );
        report.push(format!(
            "sigma = {:.3}: fd/(D sigma^2) = {:.4}",
            sigma,
            fd / (params.d * var)
        ));
    }
    println!(
        "criterion 06 PASS: finite-difference rate matches 2 D sigma^2 within 1% for 3 widths; {} (the coefficient is 2, not 1)",
        report.join("; ")
    );
}

#[test]
fn criterion_07_fokker_planck_two_routes_and_langevin_moments() {
    let mut rng = ChaCha12Rng::seed_from_u64(707);
    // closed form vs moment equation across admissible alphas and t in [0, 10]
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let d = rng.gen_range(0.3f64..3.0);
        let m = rng.gen_range(0.3f64..3.0);
        let params = ModelParams::new(m, d).unwrap();
        let alpha = random_admissible_alpha(&mut rng, d, m);
        let dmat = diffusion_matrix(alpha, &params);
        let w0 = GaussianWeight::new(
            PhasePoint::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            SymMatrix2::new(0.7, 0.1, 0.5),
        )
        .unwrap();
        for i in 0..=10 {
            let t = i as f64;
            let closed = evolve_weight(&w0, &dmat, params.m, t);
            let ode = covariance_moment_ode(&w0.cov, &dmat, params.m, t, 64);
            let scale = closed
                .cov
                .xx
                .abs()
                .max(closed.cov.pp.abs())
                .max(1.0);
            let dev = closed.cov.max_abs_diff(&ode) / scale;
            worst = worst.max(dev);
            assert!(dev <= 1e-9, "route deviation {dev:.3e} at t = {t}");
        }
    }

    // Langevin increments: sample covariance of 1e5 steps vs D dt
    let params = ModelParams::new(1.0, 1.0).unwrap();
    let dmat = diffusion_matrix(fiducial_alpha(1.0, 1.0).unwrap(), &params);
    let d = dmat.matrix();
    let dt = 1e-3;
    let n = 100_000usize;
    let mut cov = [0.0f64; 3];
    for _ in 0..n {
        let g = langevin_step(PhasePoint::new(0.0, 0.0), &dmat, params.m, dt, &mut rng).unwrap();
        cov[0] += g.x * g.x;
        cov[1] += g.x * g.p;
        cov[2] += g.p * g.p;
    }
    let nf = n as f64;
    let se_diag = |v: f64| 3.0 * v * (2.0 / nf).sqrt();
    assert!((cov[0] / nf - d.xx * dt).abs() <= se_diag(d.xx * dt));
    assert!((cov[2] / nf - d.pp * dt).abs() <= se_diag(d.pp * dt));
    let se_xp = 3.0 * dt * ((d.xx * d.pp + d.xp * d.xp) / nf).sqrt();
    assert!((cov[1] / nf - d.xp * dt).abs() <= se_xp);
    println!(
        "criterion 07 PASS: closed form vs moment equation within {worst:.3e} for t in [0, 10]; Langevin covariance within 3 se at n = 1e5"
    );
}

#[test]
fn criterion_08_reconstruction_commutes_with_master_evolution() {
    let start = Instant::now();
    let params = ModelParams::new(1.0, 1.0).unwrap();
    let alpha = fiducial_alpha(1.0, 1.0).unwrap();
    let grid = Grid::new(320, 32.0).unwrap();
    let t = 2.0 * params.decoherence_time();
    let dmat = diffusion_matrix(alpha, &params);
    let w0 = GaussianWeight::point_mass(PhasePoint::new(0.0, 0.0));

    // evolve the weight, then reconstruct
    let wt = evolve_weight(&w0, &dmat, params.m, t);
    let rho_a = reconstruct_rho(&wt, alpha, &grid).unwrap();

    // reconstruct (a point mass gives the pure projector), then evolve
    let rho0 = reconstruct_rho(&w0, alpha, &grid).unwrap();
    let steps = 5200usize;
    let dt = t / steps as f64;
    assert!(dt <= master::dt_max(&grid, &params));
    let run = evolve_master(&rho0, &params, t, dt, usize::MAX).unwrap();
    let mut rho_b = run.final_state;
    rho_b.normalize();

    let dist = hs_distance(&rho_a, &rho_b).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    assert!(dist <= 1e-3, "loop distance {dist:.3e}");
    assert!(elapsed < 120.0, "runtime {elapsed:.1} s exceeds 2 min");
    println!(
        "criterion 08 PASS: evolve-reconstruct loop HS distance {dist:.3e} at t = {t}; runtime {elapsed:.1} s"
    );
}

#[test]
fn criterion_09_ensemble_mean_projector_reproduces_the_master_state() {
    let params = ModelParams::new(1.0, 1.0).unwrap();
    let alpha = fiducial_alpha(1.0, 1.0).unwrap();
    let grid = Grid::new(256, 24.0).unwrap();
    let psi = fiducial_state_on(&grid);
    let t = params.decoherence_time();
    let n_traj = 1000usize;

    // master reference
    let dt_m = 0.9 * master::dt_max(&grid, &params);
    let run = evolve_master(&DensityMatrix::from_pure(&psi), &params, t, dt_m, usize::MAX).unwrap();
    let mut rho_master = run.final_state;
    rho_master.normalize();

    let dt_q = 0.9 * qsd_dt_max(&grid, &params);
    let mut rng = ChaCha12Rng::seed_from_u64(909);
    for (label, spec) in [
        ("standard", NoiseSpec::standard(params.d, 11).unwrap()),
        (
            "alpha_general",
            NoiseSpec::alpha_general(alpha, &params, 13).unwrap(),
        ),
    ] {
        let recs =
            run_ensemble(&psi, &params, &spec, n_traj, t, dt_q, usize::MAX, None).unwrap();
        let states: Vec<&WaveFunction> = recs.iter().map(|r| r.final_state()).collect();
        let rho_qsd = ensemble_average(&states).unwrap();
        let dist = hs_distance(&rho_qsd, &rho_master).unwrap();
        let gram = gram_sq(&states, &grid);
        let boot = bootstrap_hs(&gram, n_traj, 60, &mut rng);
        assert!(
            dist <= 3.0 * boot,
            "{label}: distance {dist:.3e} vs bootstrap bound {boot:.3e}"
        );
        println!(
            "criterion 09 PASS ({label}): HS distance {dist:.3e} <= 3 x bootstrap {boot:.3e} with {n_traj} trajectories"
        );
    }
}

fn fiducial_state_on(grid: &Grid) -> WaveFunction {
    make_pointer_state(
        grid.clone(),
        fiducial_alpha(1.0, 1.0).unwrap(),
        PhasePoint::new(0.0, 0.0),
    )
    .unwrap()
}

#[test]
fn criterion_10_cat_state_localizes_onto_a_random_branch() {
    let params = ModelParams::new(1.0, 1.0).unwrap();
    let alpha = fiducial_alpha(1.0, 1.0).unwrap();
    let grid = Grid::new(1024, 96.0).unwrap();
    let half = 5.0 * SIGMA0;
    let plus = make_pointer_state(grid.clone(), alpha, PhasePoint::new(half, 0.0)).unwrap();
    let minus = make_pointer_state(grid.clone(), alpha, PhasePoint::new(-half, 0.0)).unwrap();
    let amps: Array1<C64> = (plus.amplitudes() + minus.amplitudes()).to_owned();
    let cat = WaveFunction::new(grid.clone(), amps).unwrap().normalized();

    let t = 10.0 * params.decoherence_time();
    let dt = 0.9 * qsd_dt_max(&grid, &params);
    let n_traj = 64usize;
    let base = NoiseSpec::standard(params.d, 1010).unwrap();

    use rayon::prelude::*;
    let results: Vec<_> = (0..n_traj)
        .into_par_iter()
        .map(|i| {
            let spec = base.with_seed(derive_seed(base.seed, i as u64));
            run_trajectory(&cat, &params, &spec, t, dt, 2000, None)
        })
        .collect();
    let ok: Vec<_> = results.into_iter().filter_map(|r| r.ok()).collect();
    assert!(
        ok.len() * 10 >= n_traj * 9,
        "too many trajectories left the grid: {}/{n_traj}",
        ok.len()
    );

    let fidelities: Vec<f64> = ok
        .iter()
        .map(|r| *r.gaussian_fidelity.last().unwrap())
        .collect();
    let variances: Vec<f64> = ok.iter().map(|r| *r.variances.last().unwrap()).collect();
    let med_fid = median(&fidelities);
    let med_var = median(&variances);
    assert!(med_fid >= 0.99, "median fidelity {med_fid}");
    let stationary = 1.0 / (2.0f64).sqrt();
    assert!(
        (med_var - stationary).abs() / stationary <= 0.10,
        "median var {med_var} vs {stationary}"
    );

    // branch statistics: sign of the final center
    let positive = ok
        .iter()
        .filter(|r| r.centers.last().unwrap().x > 0.0)
        .count();
    let n = ok.len() as f64;
    let dev = (positive as f64 / n - 0.5).abs();
    let band = 3.0 * (0.25 / n).sqrt();
    assert!(
        dev <= band,
        "branch frequencies {positive}/{} outside 3 sigma binomial band",
        ok.len()
    );
    println!(
        "criterion 10 PASS: median fidelity {med_fid:.4}, median var_x {med_var:.4} (target {stationary:.4}), branches {positive}/{} within +-{band:.3}",
        ok.len()
    );
}

#[test]
fn criterion_11_noise_moments_in_both_modes() {
    let params = ModelParams::new(1.0, 1.0).unwrap();
    let alpha = fiducial_alpha(1.0, 1.0).unwrap();
    let dt = 1e-3;
    let n = 1_000_000usize;
    for (label, spec) in [
        ("standard", NoiseSpec::standard(params.d, 23).unwrap()),
        (
            "alpha_general",
            NoiseSpec::alpha_general(alpha, &params, 29).unwrap(),
        ),
    ] {
        let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
        let mut mean = C64::new(0.0, 0.0);
        let mut sq = C64::new(0.0, 0.0);
        let mut herm = 0.0f64;
        for _ in 0..n {
            let dz = sample_dz(&spec, dt, &mut rng);
            mean += dz;
            sq += dz * dz;
            herm += dz.norm_sqr();
        }
        let nf = n as f64;
        let d_dt = params.d * dt;
        assert!(
            (mean / nf).norm() <= 3.0 * (d_dt / nf).sqrt(),
            "{label}: mean {mean}"
        );
        assert!(
            (herm / nf - d_dt).abs() <= 3.0 * d_dt / nf.sqrt(),
            "{label}: E[dz dz*] = {}",
            herm / nf
        );
        assert!(
            (sq / nf).norm() <= 3.0 * d_dt / nf.sqrt(),
            "{label}: E[dz dz] = {}",
            sq / nf
        );
        println!(
            "criterion 11 PASS ({label}): E[dz dz*] = {:.6e} (target {d_dt:.3e}), |E[dz dz]| = {:.3e}",
            herm / nf,
            (sq / nf).norm()
        );
    }
}

#[test]
fn criterion_12_unit_conversion_reproduces_laboratory_magnitudes() {
    let est = convert_units(&pointerlab_cli::config::UnitsSection::default());
    let width_ratio = est.sigma0_cm / 1e-11;
    let time_ratio = est.t_d_s / 1e-10;
    assert!(
        width_ratio > 0.1 && width_ratio < 10.0,
        "sigma0 = {:.3e} cm",
        est.sigma0_cm
    );
    assert!(
        time_ratio > 0.1 && time_ratio < 10.0,
        "t_D = {:.3e} s",
        est.t_d_s
    );
    println!(
        "criterion 12 PASS: sigma0 = {:.3e} cm (x{width_ratio:.2} of 1e-11), t_D = {:.3e} s (x{time_ratio:.2} of 1e-10)",
        est.sigma0_cm, est.t_d_s
    );
}

#[test]
fn criterion_13_manifest_reruns_are_byte_identical() {
    use std::fs;
    use std::process::Command;

    let bin = env!("CARGO_BIN_EXE_pointerlab");
    let base = std::env::temp_dir().join("pointerlab_acceptance_determinism");
    let _ = fs::remove_dir_all(&base);
    fs::create_dir_all(&base).unwrap();
    let config_path = base.join("config.json");
    fs::write(
        &config_path,
        r#"{
            "grid": {"n_points": 128, "length": 13.0},
            "time": {"t_final": 0.1, "record_stride": 20},
            "ensemble": {"n_traj": 3, "master_seed": 5}
        }"#,
    )
    .unwrap();

    for experiment in ["sieve", "fokker-planck", "qsd"] {
        let mut digests = Vec::new();
        for run in 0..2 {
            let out = base.join(format!("{experiment}_{run}"));
            let status = Command::new(bin)
                .args([
                    experiment,
                    "--config",
                    config_path.to_str().unwrap(),
                    "--out",
                    out.to_str().unwrap(),
                ])
                .output()
                .unwrap();
            assert!(
                status.status.success(),
                "{experiment} run {run} failed: {}",
                String::from_utf8_lossy(&status.stderr)
            );
            let mut names: Vec<_> = fs::read_dir(&out)
                .unwrap()
                .map(|e| e.unwrap().file_name().into_string().unwrap())
                .collect();
            names.sort();
            let digest: Vec<(String, Vec<u8>)> = names
                .into_iter()
                .map(|n| {
                    let bytes = fs::read(out.join(&n)).unwrap();
                    (n, bytes)
                })
                .collect();
            digests.push(digest);
        }
        assert_eq!(
            digests[0].len(),
            digests[1].len(),
            "{experiment}: artifact sets differ"
        );
        for (a, b) in digests[0].iter().zip(&digests[1]) {
            assert_eq!(a.0, b.0, "{experiment}: artifact names differ");
            assert_eq!(a.1, b.1, "{experiment}: artifact {} differs between runs", a.0);
        }
        // re-running from the manifest's embedded config is also identical
        let manifest: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(base.join(format!("{experiment}_0/manifest.json"))).unwrap(),
        )
        .unwrap();
        let embedded = serde_json::to_string(&manifest["config"]).unwrap();
        let embedded_path = base.join(format!("{experiment}_embedded.json"));
        fs::write(&embedded_path, &embedded).unwrap();
        let out = base.join(format!("{experiment}_from_manifest"));
        let status = Command::new(bin)
            .args([
                experiment,
                "--config",
                embedded_path.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(status.status.success());
        for (name, bytes) in &digests[0] {
            let rerun = fs::read(out.join(name)).unwrap();
            assert_eq!(
                &rerun, bytes,
                "{experiment}: manifest re-run changed artifact {name}"
            );
        }
        println!("criterion 13 PASS ({experiment}): re-runs byte-identical, manifest re-run byte-identical");
    }

    // invalid ensemble size exits with the config code and a field message
    let bad = base.join("bad.json");
    fs::write(&bad, r#"{"ensemble": {"n_traj": 0}}"#).unwrap();
    let out = Command::new(bin)
        .args(["qsd", "--config", bad.to_str().unwrap(), "--out"])
        .arg(base.join("bad_out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("n_traj must be >= 1"), "stderr: {msg}");

    // a state running off the grid exits with the numerical-guard code
    let runaway = base.join("runaway.json");
    fs::write(
        &runaway,
        r#"{
            "grid": {"n_points": 128, "length": 13.0},
            "time": {"t_final": 2.0},
            "initial": {"kind": "pointer", "x": 0.0, "p": 5.0}
        }"#,
    )
    .unwrap();
    let out = Command::new(bin)
        .args(["evolve-master", "--config", runaway.to_str().unwrap(), "--out"])
        .arg(base.join("runaway_out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("boundary"), "stderr: {msg}");
}

/// |<psi_i|psi_j>|^2 matrix for O(M^2) bootstrap evaluation of mean
/// projector fluctuations.
fn gram_sq(states: &[&WaveFunction], g: &Grid) -> Vec<Vec<f64>> {
    let m = states.len();
    let dx = g.spacing();
    let mut out = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i..m {
            let ov: C64 = states[i]
                .amplitudes()
                .iter()
                .zip(states[j].amplitudes())
                .map(|(a, b)| a.conj() * b)
                .sum();
            let v = (ov * dx).norm_sqr();
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

/// RMS HS deviation of multinomial-resampled mean projectors from the
/// full mean.
fn bootstrap_hs(gram: &[Vec<f64>], m: usize, reps: usize, rng: &mut ChaCha12Rng) -> f64 {
    let mut acc = 0.0f64;
    for _ in 0..reps {
        let mut w = vec![-1.0f64; m];
        for _ in 0..m {
            w[rng.gen_range(0..m)] += 1.0;
        }
        let mut sq = 0.0f64;
        for i in 0..m {
            if w[i] == 0.0 {
                continue;
            }
            for j in 0..m {
                sq += w[i] * w[j] * gram[i][j];
            }
        }
        acc += sq.max(0.0) / (m * m) as f64;
    }
    (acc / reps as f64).sqrt()
}

// quadrature-resolution guard is part of the reconstruction contract
#[test]
fn reconstruction_rejects_underresolved_quadrature() {
    let params = ModelParams::new(1.0, 1.0).unwrap();
    let alpha = fiducial_alpha(1.0, 1.0).unwrap();
    let grid = Grid::new(256, 24.0).unwrap();
    let dmat = diffusion_matrix(alpha, &params);
    let w = evolve_weight(
        &GaussianWeight::point_mass(PhasePoint::new(0.0, 0.0)),
        &dmat,
        params.m,
        4.0,
    );
    // 8 nodes per axis cannot resolve the oscillatory momentum structure
    // of a weight this broad
    match reconstruct_rho_with_nodes(&w, alpha, &grid, 8) {
        Err(pointerlab::CoreError::QuadratureUnderResolved { .. }) => {}
        Ok(rho) => {
            // if the trace guard passes, the result must still be close
            // to the reference; otherwise the guard failed its job
            let reference = reconstruct_rho_with_nodes(&w, alpha, &grid, 96).unwrap();
            let d = hs_distance(&rho, &reference).unwrap();
            assert!(d < 1e-3, "under-resolved quadrature slipped through: {d}");
        }
        Err(e) => panic!("unexpected error {e:?}"),
    }
}

// the drift fit degrades gracefully: a displaced start stays on the
// free-motion line while converging (moment-tracking spot check kept
// at acceptance scale)
#[test]
fn displaced_drift_follows_free_motion() {
    let grid = Grid::new(512, 44.0 * SIGMA0).unwrap();
    let params = ModelParams::new(1.0, 1.0).unwrap();
    let start = AlphaParam::new(2.0 * (2.0f64).sqrt(), 0.0).unwrap();
    let psi = make_pointer_state(grid.clone(), start, PhasePoint::new(3.0, 1.0)).unwrap();
    let dt = 0.9 * master::dt_max(&grid, &params);
    let t = 4.0;
    let run = evolve_drift(&psi, &params, t, dt, 100_000).unwrap();
    let fit = fit_gaussian(&run.final_state).unwrap();
    assert!((fit.center.x - (3.0 + t)).abs() < 5e-3);
    assert!((fit.center.p - 1.0).abs() < 5e-3);
    let target = fiducial_alpha(1.0, 1.0).unwrap();
    assert!((fit.alpha.re - target.re).abs() / target.re < 0.01);
    let _ = equilibrium_width(target);
}
