//! Quantum-state-diffusion trajectories: the Ito-Schrodinger equation
//! with complex white noise, localization diagnostics, and ensemble
//! averaging back to the master equation.
//!
//! The stochastic update treats the two deterministic factors exactly
//! (unitary kinetic propagator in momentum space, exponential quadratic
//! decay with the noise term in position space) and discretizes the noise
//! at the left point; renormalization follows every step. Strong
//! convergence is at the Euler-Maruyama rate.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::density::DensityMatrix;
use crate::error::CoreError;
use crate::gaussian::{self, AlphaParam, PhasePoint};
use crate::grid::Grid;
use crate::master::ModelParams;
use crate::phasespace::diffusion_matrix;
use crate::wavefunction::WaveFunction;
use crate::Result;

/// Which complex-noise statistics drive the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    /// `E[dz dz*] = D dt`, `E[dz dz] = 0`.
    Standard,
    /// `dz = (alpha/2) dxi + i dpi` with `(dxi, dpi)` Gaussian of
    /// covariance `D(alpha) dt`; the Hermitian correlation is still
    /// `D dt`, but `E[dz dz]` depends on alpha.
    AlphaGeneral,
}

/// Noise generator for one trajectory; carries the mode, the width
/// parameter used in the alpha-general mode, the decoherence strength and
/// the seed of the trajectory stream.
#[derive(Debug, Clone)]
pub struct NoiseSpec {
    pub mode: NoiseMode,
    pub alpha: Option<AlphaParam>,
    pub d: f64,
    pub seed: u64,
    /// Square root of the phase-space diffusion matrix (alpha-general).
    root: Option<[[f64; 2]; 2]>,
}

impl NoiseSpec {
    pub fn standard(d: f64, seed: u64) -> Result<NoiseSpec> {
        if !(d >= 0.0) || !d.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "noise strength D must be >= 0, got {d}"
            )));
        }
        Ok(NoiseSpec {
            mode: NoiseMode::Standard,
            alpha: None,
            d,
            seed,
            root: None,
        })
    }

    pub fn alpha_general(alpha: AlphaParam, params: &ModelParams, seed: u64) -> Result<NoiseSpec> {
        let dmat = diffusion_matrix(alpha, params);
        if !dmat.is_admissible() {
            return Err(CoreError::InadmissibleAlpha(format!(
                "diffusion matrix of alpha = {} + {}i has det {:.3e} < 0",
                alpha.re,
                alpha.im,
                dmat.det()
            )));
        }
        let root = dmat.increment_root(1.0)?;
        Ok(NoiseSpec {
            mode: NoiseMode::AlphaGeneral,
            alpha: Some(alpha),
            d: params.d,
            seed,
            root: Some(root),
        })
    }

    pub fn with_seed(&self, seed: u64) -> NoiseSpec {
        let mut s = self.clone();
        s.seed = seed;
        s
    }
}

/// Draw one complex noise increment for a step of length `dt`.
pub fn sample_dz<R: rand::Rng + ?Sized>(spec: &NoiseSpec, dt: f64, rng: &mut R) -> C64 {
    let g1: f64 = StandardNormal.sample(rng);
    let g2: f64 = StandardNormal.sample(rng);
    match spec.mode {
        NoiseMode::Standard => {
            let s = (spec.d * dt / 2.0).sqrt();
            C64::new(s * g1, s * g2)
        }
        NoiseMode::AlphaGeneral => {
            let b = spec.root.expect("alpha_general carries its root");
            let sq = dt.sqrt();
            let dxi = sq * (b[0][0] * g1 + b[0][1] * g2);
            let dpi = sq * (b[1][0] * g1 + b[1][1] * g2);
            let alpha = spec.alpha.expect("alpha_general carries alpha");
            0.5 * alpha.as_complex() * dxi + C64::new(0.0, dpi)
        }
    }
}

/// Step-size guard for the stochastic stepper. The two deterministic
/// factors are applied as exact exponentials, so only the kinetic phase
/// per step must stay resolved: `dt <= 0.1 m dx^2`.
pub fn qsd_dt_max(grid: &Grid, params: &ModelParams) -> f64 {
    let dx = grid.spacing();
    0.1 * params.m * dx * dx
}

/// In-place trajectory stepper with cached kinetic propagator.
pub struct QsdPropagator {
    psi: WaveFunction,
    params: ModelParams,
    spec: NoiseSpec,
    dt: f64,
    time: f64,
    rng: ChaCha12Rng,
    kinetic: Vec<C64>,
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    /// Squared norm after the raw stochastic update, before
    /// renormalization.
    pub norm_sq_before: f64,
}

impl QsdPropagator {
    pub fn new(
        psi0: &WaveFunction,
        params: &ModelParams,
        spec: &NoiseSpec,
        dt: f64,
    ) -> Result<QsdPropagator> {
        let grid = psi0.grid();
        let max = qsd_dt_max(grid, params);
        if !(dt > 0.0) || dt > max {
            return Err(CoreError::DtTooLarge { dt, max });
        }
        psi0.check_normalized()?;
        psi0.check_boundary()?;
        let kinetic = kinetic_factor(grid, params, dt);
        Ok(QsdPropagator {
            psi: psi0.clone(),
            params: *params,
            spec: spec.clone(),
            dt,
            time: 0.0,
            rng: ChaCha12Rng::seed_from_u64(spec.seed),
            kinetic,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn state(&self) -> &WaveFunction {
        &self.psi
    }

    pub fn step(&mut self) -> Result<StepInfo> {
        let dz = sample_dz(&self.spec, self.dt, &mut self.rng);
        self.step_with_dz(dz)
    }

    /// Advance by `dt` with a caller-supplied noise increment (used by
    /// convergence tests that couple paths through a common noise).
    pub fn step_with_dz(&mut self, dz: C64) -> Result<StepInfo> {
        let dt = self.dt;
        let mean_x = raw_mean_x(&self.psi);
        let grid = self.psi.grid().clone();
        {
            let amps = self.psi.amplitudes_mut();
            let slice = amps.as_slice_mut().expect("contiguous");
            grid.fft_forward(slice);
            for (a, k) in slice.iter_mut().zip(&self.kinetic) {
                *a *= *k;
            }
            grid.fft_inverse(slice);
            let half_d_dt = 0.5 * self.params.d * dt;
            for (a, x) in slice.iter_mut().zip(grid.xs()) {
                let u = x - mean_x;
                let re = -half_d_dt * u * u + u * dz.re;
                let im = u * dz.im;
                let (s, c) = im.sin_cos();
                *a *= re.exp() * C64::new(c, s);
            }
        }
        let norm_sq_before = self.psi.norm_sq();
        if norm_sq_before < 1e-12 {
            return Err(CoreError::NumericalBlowup(format!(
                "norm collapsed to {:.3e}",
                norm_sq_before.sqrt()
            )));
        }
        self.psi.normalize();
        self.time += dt;
        self.psi.check_boundary()?;
        Ok(StepInfo { norm_sq_before })
    }
}

fn kinetic_factor(grid: &Grid, params: &ModelParams, dt: f64) -> Vec<C64> {
    grid.ks()
        .iter()
        .map(|k| {
            let phase = -k * k * dt / (2.0 * params.m);
            let (s, c) = phase.sin_cos();
            C64::new(c, s)
        })
        .collect()
}

fn raw_mean_x(psi: &WaveFunction) -> f64 {
    let dx = psi.grid().spacing();
    let mut m = 0.0;
    let mut n = 0.0;
    for (a, x) in psi.amplitudes().iter().zip(psi.grid().xs()) {
        let w = a.norm_sqr();
        m += w * x;
        n += w;
    }
    m * dx / (n * dx)
}

/// One stochastic step as a pure function; see [`QsdPropagator`] for the
/// scheme. The rng state advances by one noise increment.
pub fn qsd_step<R: rand::Rng + ?Sized>(
    psi: &WaveFunction,
    params: &ModelParams,
    spec: &NoiseSpec,
    dt: f64,
    rng: &mut R,
) -> Result<WaveFunction> {
    let max = qsd_dt_max(psi.grid(), params);
    if !(dt > 0.0) || dt > max {
        return Err(CoreError::DtTooLarge { dt, max });
    }
    psi.check_normalized()?;
    psi.check_boundary()?;
    let dz = sample_dz(spec, dt, rng);
    qsd_step_with_dz(psi, params, dt, dz)
}

/// Deterministic-noise variant of [`qsd_step`].
pub fn qsd_step_with_dz(
    psi: &WaveFunction,
    params: &ModelParams,
    dt: f64,
    dz: C64,
) -> Result<WaveFunction> {
    let grid = psi.grid().clone();
    let mean_x = raw_mean_x(psi);
    let kin = kinetic_factor(&grid, params, dt);
    let mut amps = psi.amplitudes().to_vec();
    grid.fft_forward(&mut amps);
    for (a, k) in amps.iter_mut().zip(&kin) {
        *a *= *k;
    }
    grid.fft_inverse(&mut amps);
    let half_d_dt = 0.5 * params.d * dt;
    for (a, x) in amps.iter_mut().zip(grid.xs()) {
        let u = x - mean_x;
        let re = -half_d_dt * u * u + u * dz.re;
        let im = u * dz.im;
        let (s, c) = im.sin_cos();
        *a *= re.exp() * C64::new(c, s);
    }
    let mut out = WaveFunction::new(grid, ndarray::Array1::from(amps))?;
    let norm = out.norm_sq().sqrt();
    if norm < 1e-6 {
        return Err(CoreError::NumericalBlowup(format!(
            "norm collapsed to {norm:.3e}"
        )));
    }
    out.normalize();
    out.check_boundary()?;
    Ok(out)
}

/// Time series of one trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub centers: Vec<PhasePoint>,
    pub variances: Vec<f64>,
    pub gaussian_fidelity: Vec<f64>,
    /// Sparse state snapshots `(t, psi)`; always contains the final state.
    pub snapshots: Vec<(f64, WaveFunction)>,
    pub seed: u64,
}

impl TrajectoryRecord {
    pub fn final_state(&self) -> &WaveFunction {
        &self.snapshots.last().expect("final snapshot always kept").1
    }
}

/// Integrate one trajectory, recording centers, position variance and the
/// Gaussian-fit fidelity every `record_stride` steps; states are
/// snapshotted every `snapshot_stride` steps when given, and the final
/// state is always kept. Bit-exact reproducible for fixed
/// `(seed, dt, grid)`.
pub fn run_trajectory(
    psi0: &WaveFunction,
    params: &ModelParams,
    spec: &NoiseSpec,
    t_final: f64,
    dt: f64,
    record_stride: usize,
    snapshot_stride: Option<usize>,
) -> Result<TrajectoryRecord> {
    if !(t_final > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "t_final must be > 0, got {t_final}"
        )));
    }
    let mut prop = QsdPropagator::new(psi0, params, spec, dt)?;
    let stride = record_stride.max(1);
    let n_steps = (t_final / dt).round().max(1.0) as usize;

    let mut rec = TrajectoryRecord {
        times: Vec::new(),
        centers: Vec::new(),
        variances: Vec::new(),
        gaussian_fidelity: Vec::new(),
        snapshots: Vec::new(),
        seed: spec.seed,
    };
    let record = |prop: &QsdPropagator, rec: &mut TrajectoryRecord| -> Result<()> {
        let fit = gaussian::fit_gaussian(prop.state())?;
        rec.times.push(prop.time());
        rec.centers.push(fit.center);
        rec.variances.push(1.0 / fit.alpha.re);
        rec.gaussian_fidelity.push(fit.fidelity);
        Ok(())
    };

    record(&prop, &mut rec)?;
    for s in 0..n_steps {
        prop.step()?;
        if (s + 1) % stride == 0 || s + 1 == n_steps {
            record(&prop, &mut rec)?;
        }
        if let Some(ss) = snapshot_stride {
            if (s + 1) % ss.max(1) == 0 && s + 1 != n_steps {
                rec.snapshots.push((prop.time(), prop.state().clone()));
            }
        }
    }
    rec.snapshots.push((prop.time(), prop.state().clone()));
    Ok(rec)
}

/// SplitMix-style derivation of per-trajectory seeds from a master seed;
/// the derived seed is stored in the trajectory record.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Run `n_traj` independent trajectories with per-index derived seeds.
/// Trajectories run in parallel; results are returned in index order so
/// reductions are reproducible.
#[allow(clippy::too_many_arguments)]
pub fn run_ensemble(
    psi0: &WaveFunction,
    params: &ModelParams,
    base: &NoiseSpec,
    n_traj: usize,
    t_final: f64,
    dt: f64,
    record_stride: usize,
    snapshot_stride: Option<usize>,
) -> Result<Vec<TrajectoryRecord>> {
    if n_traj == 0 {
        return Err(CoreError::InvalidParameter(
            "ensemble.n_traj must be >= 1".into(),
        ));
    }
    (0..n_traj)
        .into_par_iter()
        .map(|i| {
            let spec = base.with_seed(derive_seed(base.seed, i as u64));
            run_trajectory(psi0, params, &spec, t_final, dt, record_stride, snapshot_stride)
        })
        .collect()
}

/// Mean projector `(1/M) sum |psi_i><psi_i|`, trace-normalized.
/// Accumulation runs in a fixed order so the result is reproducible.
pub fn ensemble_average(states: &[&WaveFunction]) -> Result<DensityMatrix> {
    if states.len() < 2 {
        return Err(CoreError::InsufficientStates(states.len()));
    }
    let grid = states[0].grid().clone();
    let n = grid.n();
    let mut mat = Array2::<C64>::zeros((n, n));
    for psi in states {
        if !psi.grid().same_grid(&grid) {
            return Err(CoreError::GridMismatch);
        }
        let a = psi.amplitudes();
        for j in 0..n {
            let aj = a[j];
            let row = mat.row_mut(j);
            let row = row.into_slice().expect("contiguous");
            for (k, slot) in row.iter_mut().enumerate() {
                *slot += aj * a[k].conj();
            }
        }
    }
    let scale = C64::new(1.0 / states.len() as f64, 0.0);
    mat.mapv_inplace(|v| v * scale);
    let mut rho = DensityMatrix::from_matrix_unchecked(grid, mat);
    rho.normalize();
    Ok(rho)
}

/// Median of a slice (empty slices yield NaN).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in medians"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
