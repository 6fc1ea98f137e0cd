use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::error::CoreError;
use crate::grid::Grid;
use crate::spectral;
use crate::Result;

/// Relative norm deviation tolerated by operations requiring a normalized
/// state. States produced by the evolution routines are renormalized every
/// step and sit far inside this bound.
pub const NORM_TOL: f64 = 1e-6;

/// Mass allowed in the outer 5% of the grid (each side) before an
/// operation refuses to trust its spectral accuracy.
pub const BOUNDARY_MASS_TOL: f64 = 1e-6;

/// Mass allowed in the top 10% momentum band.
pub const NYQUIST_MASS_TOL: f64 = 1e-10;

/// Observables with spectrally exact grid implementations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    X,
    P,
    X2,
    P2,
    /// Symmetrized product (x p + p x) / 2.
    SymXP,
}

/// Pure state: complex amplitudes on a uniform 1D grid, continuum
/// normalization `sum |psi_j|^2 dx = 1`.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    grid: Grid,
    amps: Array1<C64>,
}

impl WaveFunction {
    pub fn new(grid: Grid, amps: Array1<C64>) -> Result<WaveFunction> {
        if amps.len() != grid.n() {
            return Err(CoreError::InvalidParameter(format!(
                "amplitude vector of length {} does not match grid with {} points",
                amps.len(),
                grid.n()
            )));
        }
        Ok(WaveFunction { grid, amps })
    }

    /// Build from a closure evaluated on the grid coordinates (not
    /// normalized).
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64) -> C64) -> WaveFunction {
        let amps = grid.xs().iter().map(|&x| f(x)).collect();
        WaveFunction { grid, amps }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut Array1<C64> {
        &mut self.amps
    }

    /// Squared norm `sum |psi_j|^2 dx`.
    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sq().sqrt();
        if n > 0.0 {
            let s = 1.0 / n;
            for a in self.amps.iter_mut() {
                *a *= s;
            }
        }
    }

    pub fn normalized(mut self) -> WaveFunction {
        self.normalize();
        self
    }

    pub fn check_normalized(&self) -> Result<()> {
        let dev = (self.norm_sq().sqrt() - 1.0).abs();
        if dev > NORM_TOL {
            return Err(CoreError::Unnormalized { deviation: dev });
        }
        Ok(())
    }

    /// Inner product `<self|other>` with the grid quadrature weight.
    pub fn inner(&self, other: &WaveFunction) -> Result<C64> {
        if !self.grid.same_grid(&other.grid) {
            return Err(CoreError::GridMismatch);
        }
        let s: C64 = self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.spacing())
    }

    /// Relative mass within 5% of either grid edge.
    pub fn boundary_mass(&self) -> f64 {
        let n = self.grid.n();
        let edge = (n as f64 * 0.05).ceil() as usize;
        let dx = self.grid.spacing();
        let total = self.norm_sq();
        let mut m = 0.0;
        for j in 0..edge {
            m += self.amps[j].norm_sqr();
            m += self.amps[n - 1 - j].norm_sqr();
        }
        m * dx / total.max(f64::MIN_POSITIVE)
    }

    pub fn check_boundary(&self) -> Result<()> {
        let mass = self.boundary_mass();
        if mass > BOUNDARY_MASS_TOL {
            return Err(CoreError::BoundaryContamination { mass });
        }
        Ok(())
    }

    /// Momentum-space probability weights `|psi~_q|^2 dx / n`, in FFT
    /// index order; sums to `norm_sq` by Parseval.
    pub fn momentum_weights(&self) -> Vec<f64> {
        let mut buf: Vec<C64> = self.amps.to_vec();
        self.grid.fft_forward(&mut buf);
        let w = self.grid.spacing() / self.grid.n() as f64;
        buf.iter().map(|c| c.norm_sqr() * w).collect()
    }

    /// Relative mass in the top 10% momentum band.
    pub fn nyquist_mass(&self) -> f64 {
        let weights = self.momentum_weights();
        let ks = self.grid.ks();
        let kmax = ks.iter().fold(0.0f64, |m, k| m.max(k.abs()));
        let cut = 0.9 * kmax;
        let total: f64 = weights.iter().sum();
        let tail: f64 = weights
            .iter()
            .zip(ks)
            .filter(|(_, k)| k.abs() >= cut)
            .map(|(w, _)| *w)
            .sum();
        tail / total.max(f64::MIN_POSITIVE)
    }

    pub fn check_nyquist(&self) -> Result<()> {
        let mass = self.nyquist_mass();
        if mass > NYQUIST_MASS_TOL {
            return Err(CoreError::NyquistContamination { mass });
        }
        Ok(())
    }

    /// Apply the momentum operator `p = -i d/dx` spectrally.
    pub fn apply_p(&self) -> WaveFunction {
        let mut buf = self.amps.to_vec();
        spectral::apply_k_multiplier(&self.grid, &mut buf, self.grid.ks());
        WaveFunction {
            grid: self.grid.clone(),
            amps: Array1::from(buf),
        }
    }

    /// Apply `p^2` spectrally.
    pub fn apply_p2(&self) -> WaveFunction {
        let mult: Vec<f64> = self.grid.ks().iter().map(|k| k * k).collect();
        let mut buf = self.amps.to_vec();
        spectral::apply_k_multiplier(&self.grid, &mut buf, &mult);
        WaveFunction {
            grid: self.grid.clone(),
            amps: Array1::from(buf),
        }
    }

    pub fn scaled(&self, c: C64) -> WaveFunction {
        WaveFunction {
            grid: self.grid.clone(),
            amps: self.amps.mapv(|a| a * c),
        }
    }
}

/// Expectation value of `obs` in a normalized pure state. Position
/// observables use grid quadrature, momentum observables the spectral
/// representation.
pub fn expectation(state: &WaveFunction, obs: Observable) -> Result<f64> {
    state.check_normalized()?;
    state.check_boundary()?;
    let dx = state.grid.spacing();
    let xs = state.grid.xs();
    match obs {
        Observable::X => Ok(state
            .amps
            .iter()
            .zip(xs)
            .map(|(a, x)| a.norm_sqr() * x)
            .sum::<f64>()
            * dx),
        Observable::X2 => Ok(state
            .amps
            .iter()
            .zip(xs)
            .map(|(a, x)| a.norm_sqr() * x * x)
            .sum::<f64>()
            * dx),
        Observable::P | Observable::P2 => {
            state.check_nyquist()?;
            let weights = state.momentum_weights();
            let ks = state.grid.ks();
            let s = weights
                .iter()
                .zip(ks)
                .map(|(w, k)| match obs {
                    Observable::P => w * k,
                    _ => w * k * k,
                })
                .sum::<f64>();
            Ok(s)
        }
        Observable::SymXP => {
            state.check_nyquist()?;
            // <(xp + px)/2> = Re <psi| x (p psi)>
            let p_psi = state.apply_p();
            let s: C64 = state
                .amps
                .iter()
                .zip(p_psi.amps.iter())
                .zip(xs)
                .map(|((a, b), x)| a.conj() * b * x)
                .sum();
            Ok(s.re * dx)
        }
    }
}

/// Position variance of a normalized state.
pub fn variance_x(state: &WaveFunction) -> Result<f64> {
    let m1 = expectation(state, Observable::X)?;
    let m2 = expectation(state, Observable::X2)?;
    Ok(m2 - m1 * m1)
}

/// Kinetic action `(p^2 / 2m) psi`, computed spectrally.
pub fn apply_kinetic(state: &WaveFunction, m: f64) -> Result<WaveFunction> {
    if !(m > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "mass must be > 0, got {m}"
        )));
    }
    state.check_normalized()?;
    state.check_nyquist()?;
    let mult: Vec<f64> = state.grid.ks().iter().map(|k| k * k / (2.0 * m)).collect();
    let mut buf = state.amps.to_vec();
    spectral::apply_k_multiplier(&state.grid, &mut buf, &mult);
    Ok(WaveFunction {
        grid: state.grid.clone(),
        amps: Array1::from(buf),
    })
}
