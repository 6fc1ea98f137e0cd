//! The Gaussian pointer-state family: fiducial and sieve width parameters,
//! the displaced ansatz, its correlation matrix, and moment-based fitting.

use num_complex::Complex64 as C64;

use crate::error::CoreError;
use crate::grid::Grid;
use crate::sym2::SymMatrix2;
use crate::wavefunction::{expectation, Observable, WaveFunction};
use crate::Result;

/// Complex Gaussian width parameter alpha = alpha_R + i alpha_I
/// (units 1/length^2); alpha_R > 0 for normalizability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaParam {
    pub re: f64,
    pub im: f64,
}

impl AlphaParam {
    pub fn new(re: f64, im: f64) -> Result<AlphaParam> {
        if !(re > 0.0) || !re.is_finite() || !im.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "alpha_R must be positive and finite, got alpha = {re} + {im}i"
            )));
        }
        Ok(AlphaParam { re, im })
    }

    pub fn as_complex(&self) -> C64 {
        C64::new(self.re, self.im)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

/// Phase-space point Gamma = (x_bar, p_bar).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(x: f64, p: f64) -> PhasePoint {
        PhasePoint { x, p }
    }
}

fn check_model(d: f64, m: f64) -> Result<()> {
    if !(d > 0.0) || !(m > 0.0) || !d.is_finite() || !m.is_finite() {
        return Err(CoreError::InvalidParameter(format!(
            "D and m must be positive, got D = {d}, m = {m}"
        )));
    }
    Ok(())
}

/// Width parameter of the stationary state of the optimal-drift flow:
/// `alpha = (1 - i) sqrt(2 D m)`.
pub fn fiducial_alpha(d: f64, m: f64) -> Result<AlphaParam> {
    check_model(d, m)?;
    let s = (2.0 * d * m).sqrt();
    AlphaParam::new(s, -s)
}

/// Width parameter singled out by the predictability sieve:
/// `alpha_s = 3^(1/4) (sqrt(3) - i) sqrt(D m)`.
pub fn sieve_alpha(d: f64, m: f64) -> Result<AlphaParam> {
    check_model(d, m)?;
    let s = (d * m).sqrt() * 3.0_f64.powf(0.25);
    AlphaParam::new(s * 3.0_f64.sqrt(), -s)
}

/// Exact width sigma = 1 / sqrt(alpha_R) of the Gaussian family; for the
/// fiducial alpha this equals (2 D m)^(-1/4).
pub fn equilibrium_width(alpha: AlphaParam) -> f64 {
    1.0 / alpha.re.sqrt()
}

/// Normalized pointer state
/// `psi(x) = (alpha_R / 2 pi)^(1/4) exp(-alpha (x - x_bar)^2 / 4 + i p_bar (x - x_bar))`.
///
/// Requires the width to be resolved by at least 8 grid points and the
/// center to sit at least 5 sigma away from the boundary.
pub fn make_pointer_state(grid: Grid, alpha: AlphaParam, gamma: PhasePoint) -> Result<WaveFunction> {
    let sigma = equilibrium_width(alpha);
    if sigma < 8.0 * grid.spacing() {
        return Err(CoreError::UnresolvedWidth {
            sigma,
            spacing: grid.spacing(),
            required: 8,
        });
    }
    let half = grid.length() / 2.0;
    if gamma.x.abs() + 5.0 * sigma > half {
        return Err(CoreError::OffGridCenter { center: gamma.x });
    }
    Ok(pointer_state_unchecked(grid, alpha, gamma))
}

/// Pointer-state construction without the resolution and placement
/// guards. Used internally where the caller controls the error budget
/// (fits, phase-space quadrature).
pub(crate) fn pointer_state_unchecked(
    grid: Grid,
    alpha: AlphaParam,
    gamma: PhasePoint,
) -> WaveFunction {
    let a = alpha.as_complex();
    let pref = (alpha.re / (2.0 * std::f64::consts::PI)).powf(0.25);
    let mut psi = WaveFunction::from_fn(grid, |x| {
        let u = x - gamma.x;
        (-a * (u * u) / 4.0 + C64::new(0.0, gamma.p * u)).exp() * pref
    });
    // analytic prefactor is exact on the line; renormalize to absorb the
    // periodic-grid truncation at the 1e-15 level
    psi.normalize();
    psi
}

/// Quantum correlation matrix of the pointer state,
/// `C = (1/alpha_R) [[1, -alpha_I/2], [-alpha_I/2, |alpha|^2/4]]`.
pub fn correlation_matrix(alpha: AlphaParam) -> SymMatrix2 {
    let ar = alpha.re;
    SymMatrix2::new(
        1.0 / ar,
        -alpha.im / (2.0 * ar),
        alpha.norm_sqr() / (4.0 * ar),
    )
}

/// Result of a moment-based Gaussian fit.
#[derive(Debug, Clone, Copy)]
pub struct GaussianFit {
    pub alpha: AlphaParam,
    pub center: PhasePoint,
    /// Squared overlap of the fitted pointer state with the input.
    pub fidelity: f64,
}

/// Fit the pointer ansatz to a normalized state by inverting the moment
/// map: `alpha_R = 1/C_xx`, `alpha_I = -2 C_xp / C_xx` with central
/// moments, then score the fit by the squared overlap.
pub fn fit_gaussian(state: &WaveFunction) -> Result<GaussianFit> {
    state.check_normalized()?;
    let mean_x = expectation(state, Observable::X)?;
    let mean_p = expectation(state, Observable::P)?;
    let c_xx = expectation(state, Observable::X2)? - mean_x * mean_x;
    let c_xp = expectation(state, Observable::SymXP)? - mean_x * mean_p;
    if !(c_xx > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "nonpositive position variance {c_xx} in Gaussian fit"
        )));
    }
    let alpha = AlphaParam::new(1.0 / c_xx, -2.0 * c_xp / c_xx)?;
    let center = PhasePoint::new(mean_x, mean_p);
    let fitted = pointer_state_unchecked(state.grid().clone(), alpha, center);
    let fidelity = fitted.inner(state)?.norm_sqr();
    Ok(GaussianFit {
        alpha,
        center,
        fidelity,
    })
}
