use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::CoreError;
use crate::Result;

struct GridInner {
    n: usize,
    length: f64,
    spacing: f64,
    periodic: bool,
    xs: Vec<f64>,
    /// Momentum values in FFT index order (0, dk, ..., -dk).
    ks: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

/// Uniform 1D spatial grid with cached FFT plans and momentum values.
///
/// Coordinates are symmetric about zero, `x_j = (j - n/2) * spacing`, and
/// the grid is periodic. Cloning is cheap (shared interior).
#[derive(Clone)]
pub struct Grid(Arc<GridInner>);

impl Grid {
    /// Create a grid with `n` points (even, >= 16; powers of two are
    /// fastest) spanning `length` in dimensionless units (hbar = 1).
    pub fn new(n: usize, length: f64) -> Result<Grid> {
        if n < 16 || n % 2 != 0 {
            return Err(CoreError::InvalidParameter(format!(
                "grid.n_points must be even and >= 16, got {n}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "grid.length must be a positive finite number, got {length}"
            )));
        }
        let spacing = length / n as f64;
        let dk = TAU / length;
        let xs = (0..n)
            .map(|j| (j as f64 - n as f64 / 2.0) * spacing)
            .collect();
        let ks = (0..n)
            .map(|q| {
                let q = q as i64;
                let half = n as i64 / 2;
                if q < half { q as f64 * dk } else { (q - n as i64) as f64 * dk }
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Grid(Arc::new(GridInner {
            n,
            length,
            spacing,
            periodic: true,
            xs,
            ks,
            fwd,
            inv,
        })))
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn length(&self) -> f64 {
        self.0.length
    }

    pub fn spacing(&self) -> f64 {
        self.0.spacing
    }

    pub fn periodic(&self) -> bool {
        self.0.periodic
    }

    /// Momentum-grid spacing 2 pi / length.
    pub fn momentum_spacing(&self) -> f64 {
        TAU / self.0.length
    }

    /// Spatial coordinates, `x_j = (j - n/2) * spacing`.
    pub fn xs(&self) -> &[f64] {
        &self.0.xs
    }

    /// Momentum values in FFT index order.
    pub fn ks(&self) -> &[f64] {
        &self.0.ks
    }

    /// Unnormalized forward FFT, in place.
    pub(crate) fn fft_forward(&self, buf: &mut [C64]) {
        self.0.fwd.process(buf);
    }

    /// Inverse FFT, in place, including the 1/n normalization so that
    /// `fft_inverse(fft_forward(x)) == x`.
    pub(crate) fn fft_inverse(&self, buf: &mut [C64]) {
        self.0.inv.process(buf);
        let scale = 1.0 / self.0.n as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    pub fn same_grid(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.n == other.0.n
                && self.0.length == other.0.length
                && self.0.periodic == other.0.periodic)
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.0.n)
            .field("length", &self.0.length)
            .field("spacing", &self.0.spacing)
            .field("periodic", &self.0.periodic)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.same_grid(other)
    }
}
