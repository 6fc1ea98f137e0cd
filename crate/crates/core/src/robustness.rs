//! The three robustness criteria for pointer states: Hilbert-Schmidt
//! optimal drift, predictability-sieve optimization on the
//! diffusion-matrix boundary, and proportionality of quantum and
//! classical uncertainties.

use num_complex::Complex64 as C64;

use crate::density::DensityMatrix;
use crate::error::CoreError;
use crate::gaussian::{self, AlphaParam, GaussianFit};
use crate::master::{self, ModelParams};
use crate::phasespace::diffusion_matrix;
use crate::wavefunction::{expectation, Observable, WaveFunction};
use crate::Result;

/// Hilbert-Schmidt speed of a candidate pure-state evolution:
/// `v = sqrt(tr[(dP/dt - L P)^2])` with `dP/dt = dpsi psi† + psi dpsi†`.
///
/// Dense-matrix evaluation; meant for coarse grids.
pub fn hs_speed(
    psi: &WaveFunction,
    dpsi_dt: &WaveFunction,
    params: &ModelParams,
) -> Result<f64> {
    if !psi.grid().same_grid(dpsi_dt.grid()) {
        return Err(CoreError::GridMismatch);
    }
    psi.check_normalized()?;
    let p = DensityMatrix::from_pure(psi);
    let lp = master::liouvillian(&p, params)?;
    let n = psi.grid().n();
    let a = psi.amplitudes();
    let d = dpsi_dt.amplitudes();
    let dx = psi.grid().spacing();
    let mut sum = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            let dp = d[j] * a[k].conj() + a[j] * d[k].conj();
            sum += (dp - lp.matrix()[(j, k)]).norm_sqr();
        }
    }
    Ok((sum * dx * dx).sqrt())
}

/// Right-hand side of the nonlinear optimal-drift wave equation,
/// `dpsi/dt = -(i/2m) p^2 psi - (D/2) [(x - <x>)^2 - sigma^2] psi`.
///
/// Agrees with the general minimizing drift `(L P) psi - <L P> psi` up to
/// a global phase rate `i <p^2>/(2m)`, so the two coincide at projector
/// level.
pub fn drift_rhs(psi: &WaveFunction, params: &ModelParams) -> Result<WaveFunction> {
    psi.check_normalized()?;
    psi.check_boundary()?;
    let mean_x = expectation(psi, Observable::X)?;
    let var = expectation(psi, Observable::X2)? - mean_x * mean_x;
    Ok(drift_rhs_unchecked(psi, params, mean_x, var))
}

fn drift_rhs_unchecked(
    psi: &WaveFunction,
    params: &ModelParams,
    mean_x: f64,
    var: f64,
) -> WaveFunction {
    let kin = psi.apply_p2();
    let xs = psi.grid().xs();
    let kin_pref = C64::new(0.0, -0.5 / params.m);
    let amps = ndarray::Array1::from_iter(psi.amplitudes().iter().zip(kin.amplitudes()).zip(xs).map(
        |((a, k), x)| {
            let u = x - mean_x;
            kin_pref * k - 0.5 * params.d * (u * u - var) * a
        },
    ));
    WaveFunction::new(psi.grid().clone(), amps).expect("same grid")
}

/// The general minimizing drift `(L P) psi - <psi|(L P) psi> psi`
/// evaluated with dense matrices. Test oracle for [`drift_rhs`].
pub fn drift_rhs_dense(psi: &WaveFunction, params: &ModelParams) -> Result<WaveFunction> {
    psi.check_normalized()?;
    let p = DensityMatrix::from_pure(psi);
    let lp = master::liouvillian(&p, params)?;
    let n = psi.grid().n();
    let dx = psi.grid().spacing();
    let a = psi.amplitudes();
    let mut m_psi = ndarray::Array1::<C64>::zeros(n);
    for j in 0..n {
        let mut s = C64::new(0.0, 0.0);
        for k in 0..n {
            s += lp.matrix()[(j, k)] * a[k];
        }
        m_psi[j] = s * dx;
    }
    let mean: C64 = a
        .iter()
        .zip(m_psi.iter())
        .map(|(x, y)| x.conj() * y)
        .sum::<C64>()
        * dx;
    let amps = ndarray::Array1::from_iter(
        m_psi.iter().zip(a.iter()).map(|(m, x)| m - mean * x),
    );
    WaveFunction::new(psi.grid().clone(), amps)
}

/// Observable series recorded along an optimal-drift integration.
#[derive(Debug, Clone)]
pub struct DriftEvolution {
    pub times: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub mean_p: Vec<f64>,
    pub var_x: Vec<f64>,
    pub fits: Vec<GaussianFit>,
    pub final_state: WaveFunction,
}

/// Integrate the optimal-drift equation by RK4 with renormalization each
/// step, recording moments and a Gaussian fit every `record_stride` steps.
pub fn evolve_drift(
    psi0: &WaveFunction,
    params: &ModelParams,
    t_final: f64,
    dt: f64,
    record_stride: usize,
) -> Result<DriftEvolution> {
    let grid = psi0.grid().clone();
    let max = master::dt_max(&grid, params);
    if !(dt > 0.0) || dt > max {
        return Err(CoreError::DtTooLarge { dt, max });
    }
    psi0.check_normalized()?;
    psi0.check_boundary()?;

    let rhs = |state: &WaveFunction| -> WaveFunction {
        let dx = state.grid().spacing();
        let xs = state.grid().xs();
        // raw moments of the (not exactly normalized) stage states
        let nrm: f64 = state.amplitudes().iter().map(|a| a.norm_sqr()).sum::<f64>() * dx;
        let m1: f64 = state
            .amplitudes()
            .iter()
            .zip(xs)
            .map(|(a, x)| a.norm_sqr() * x)
            .sum::<f64>()
            * dx
            / nrm;
        let m2: f64 = state
            .amplitudes()
            .iter()
            .zip(xs)
            .map(|(a, x)| a.norm_sqr() * x * x)
            .sum::<f64>()
            * dx
            / nrm;
        drift_rhs_unchecked(state, params, m1, m2 - m1 * m1)
    };

    let mut psi = psi0.clone();
    let stride = record_stride.max(1);
    let n_full = (t_final / dt).floor() as usize;
    let remainder = t_final - n_full as f64 * dt;
    let total_steps = n_full + usize::from(remainder > 1e-12 * dt);

    let mut out = DriftEvolution {
        times: Vec::new(),
        mean_x: Vec::new(),
        mean_p: Vec::new(),
        var_x: Vec::new(),
        fits: Vec::new(),
        final_state: psi0.clone(),
    };
    let record = |t: f64, psi: &WaveFunction, out: &mut DriftEvolution| -> Result<()> {
        psi.check_boundary()?;
        let fit = gaussian::fit_gaussian(psi)?;
        out.times.push(t);
        out.mean_x.push(fit.center.x);
        out.mean_p.push(fit.center.p);
        out.var_x.push(1.0 / fit.alpha.re);
        out.fits.push(fit);
        Ok(())
    };

    record(0.0, &psi, &mut out)?;
    let mut t = 0.0;
    for s in 0..total_steps {
        let h = if s < n_full { dt } else { remainder };
        let k1 = rhs(&psi);
        let s1 = add_scaled(&psi, &k1, 0.5 * h);
        let k2 = rhs(&s1);
        let s2 = add_scaled(&psi, &k2, 0.5 * h);
        let k3 = rhs(&s2);
        let s3 = add_scaled(&psi, &k3, h);
        let k4 = rhs(&s3);
        let w = h / 6.0;
        let amps = ndarray::Array1::from_iter(
            psi.amplitudes()
                .iter()
                .zip(k1.amplitudes())
                .zip(k2.amplitudes())
                .zip(k3.amplitudes())
                .zip(k4.amplitudes())
                .map(|((((p, a), b), c), d)| p + w * (a + 2.0 * (b + c) + d)),
        );
        psi = WaveFunction::new(grid.clone(), amps)?.normalized();
        t += h;
        if (s + 1) % stride == 0 || s + 1 == total_steps {
            record(t, &psi, &mut out)?;
        }
    }
    out.final_state = psi;
    Ok(out)
}

fn add_scaled(base: &WaveFunction, k: &WaveFunction, w: f64) -> WaveFunction {
    let amps = ndarray::Array1::from_iter(
        base.amplitudes()
            .iter()
            .zip(k.amplitudes())
            .map(|(b, kk)| b + w * kk),
    );
    WaveFunction::new(base.grid().clone(), amps).expect("same grid")
}

/// Quartic admissibility form
/// `q(alpha) = alpha_R^4 + 2 alpha_R^2 alpha_I^2 + 16 D m alpha_R alpha_I + alpha_I^4`;
/// non-positive exactly when the diffusion matrix has non-negative
/// determinant, through `q = -16 m^2 alpha_R^2 det D(alpha)`.
pub fn det_condition(alpha: AlphaParam, params: &ModelParams) -> f64 {
    let ar = alpha.re;
    let ai = alpha.im;
    ar.powi(4) + 2.0 * ar * ar * ai * ai + 16.0 * params.d * params.m * ar * ai + ai.powi(4)
}

/// Predictability-sieve optimum found numerically: maximize
/// `alpha_R = sqrt(D m) R cos(phi)` on the constraint curve
/// `R^2 = -8 sin(2 phi)`, scanning `phi` in `(-pi/2, 0)` and refining the
/// best bracket by golden-section search.
pub fn sieve_optimize(params: &ModelParams, resolution: usize) -> Result<AlphaParam> {
    if resolution < 10_000 {
        return Err(CoreError::InvalidParameter(format!(
            "sieve scan resolution must be >= 1e4, got {resolution}"
        )));
    }
    if !(params.d > 0.0) {
        return Err(CoreError::InvalidParameter(
            "sieve optimization requires D > 0".into(),
        ));
    }
    let scale = (params.d * params.m).sqrt();
    // alpha_R / sqrt(Dm) on the active constraint
    let objective = |phi: f64| -> f64 {
        let r2 = -8.0 * (2.0 * phi).sin();
        if r2 <= 0.0 {
            return f64::NEG_INFINITY;
        }
        r2.sqrt() * phi.cos()
    };

    let lo = -std::f64::consts::FRAC_PI_2;
    let hi = 0.0;
    let h = (hi - lo) / resolution as f64;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..resolution {
        let phi = lo + (i as f64 + 0.5) * h;
        let v = objective(phi);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    // golden-section refinement on the bracketing interval
    let mut a = lo + (best_i as f64 - 0.5) * h;
    let mut b = lo + (best_i as f64 + 1.5) * h;
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = objective(c);
    let mut fd = objective(d);
    while (b - a).abs() > 1e-12 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    let phi = 0.5 * (a + b);
    let r = (-8.0 * (2.0 * phi).sin()).sqrt();
    AlphaParam::new(scale * r * phi.cos(), scale * r * phi.sin())
}

/// Result of the uncertainty-proportionality check `C = c D`.
#[derive(Debug, Clone, Copy)]
pub struct Proportionality {
    pub is_proportional: bool,
    /// Common ratio (least-squares when some entries vanish).
    pub constant: f64,
    /// Max relative deviation among the entry ratios.
    pub residual: f64,
}

/// Compare the quantum correlation matrix `C(alpha)` with the diffusion
/// matrix `D(alpha)` entry by entry.
pub fn proportionality_check(alpha: AlphaParam, params: &ModelParams) -> Proportionality {
    let c = gaussian::correlation_matrix(alpha);
    let d = diffusion_matrix(alpha, params).matrix();
    let ce = [c.xx, c.xp, c.pp];
    let de = [d.xx, d.xp, d.pp];
    let all_nonzero = de.iter().all(|v| v.abs() > 1e-300);
    if all_nonzero {
        let ratios = [ce[0] / de[0], ce[1] / de[1], ce[2] / de[2]];
        let mean = (ratios[0] + ratios[1] + ratios[2]) / 3.0;
        let residual = ratios
            .iter()
            .map(|r| (r - mean).abs() / mean.abs().max(f64::MIN_POSITIVE))
            .fold(0.0f64, f64::max);
        Proportionality {
            is_proportional: residual <= 1e-9,
            constant: mean,
            residual,
        }
    } else {
        // total least squares through the origin
        let num: f64 = ce.iter().zip(&de).map(|(a, b)| a * b).sum();
        let den: f64 = de.iter().map(|b| b * b).sum();
        let cst = num / den.max(f64::MIN_POSITIVE);
        let resid = ce
            .iter()
            .zip(&de)
            .map(|(a, b)| (a - cst * b).abs())
            .fold(0.0f64, f64::max)
            / ce.iter().map(|a| a.abs()).fold(0.0f64, f64::max);
        Proportionality {
            is_proportional: resid <= 1e-9,
            constant: cst,
            residual: resid,
        }
    }
}
