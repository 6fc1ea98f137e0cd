use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::CoreError;
use crate::grid::Grid;
use crate::wavefunction::{WaveFunction, BOUNDARY_MASS_TOL};
use crate::Result;

/// Trace deviation tolerated by operations requiring a normalized density
/// matrix.
pub const TRACE_TOL: f64 = 1e-6;

/// Mixed state on the grid: complex matrix rho(x_j, x_k) with continuum
/// conventions, `tr rho = sum_j rho_jj dx`.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    grid: Grid,
    mat: Array2<C64>,
}

impl DensityMatrix {
    /// Wrap a matrix, checking shape and Hermiticity (max elementwise
    /// deviation 1e-12 relative to the largest entry).
    pub fn new(grid: Grid, mat: Array2<C64>) -> Result<DensityMatrix> {
        let n = grid.n();
        if mat.dim() != (n, n) {
            return Err(CoreError::InvalidParameter(format!(
                "density matrix of shape {:?} does not match grid with {} points",
                mat.dim(),
                n
            )));
        }
        let rho = DensityMatrix { grid, mat };
        let scale = rho.max_abs().max(f64::MIN_POSITIVE);
        let herm = rho.hermiticity_error();
        if herm > 1e-12 * scale {
            return Err(CoreError::InvalidParameter(format!(
                "matrix is not Hermitian: max deviation {herm:.3e} (scale {scale:.3e})"
            )));
        }
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(grid: Grid, mat: Array2<C64>) -> DensityMatrix {
        DensityMatrix { grid, mat }
    }

    /// Projector |psi><psi| of a pure state.
    pub fn from_pure(psi: &WaveFunction) -> DensityMatrix {
        let n = psi.grid().n();
        let a = psi.amplitudes();
        let mut mat = Array2::<C64>::zeros((n, n));
        for j in 0..n {
            let aj = a[j];
            for k in 0..n {
                mat[(j, k)] = aj * a[k].conj();
            }
        }
        DensityMatrix {
            grid: psi.grid().clone(),
            mat,
        }
    }

    /// Statistical mixture `sum_i w_i |psi_i><psi_i|`; weights are taken
    /// as given (normalize afterwards if they do not sum to one).
    pub fn mixture(states: &[(f64, &WaveFunction)]) -> Result<DensityMatrix> {
        let (_, first) = states
            .first()
            .ok_or(CoreError::InsufficientStates(0))?;
        let grid = first.grid().clone();
        let n = grid.n();
        let mut mat = Array2::<C64>::zeros((n, n));
        for (w, psi) in states {
            if !psi.grid().same_grid(&grid) {
                return Err(CoreError::GridMismatch);
            }
            let a = psi.amplitudes();
            for j in 0..n {
                let waj = *w * a[j];
                for k in 0..n {
                    mat[(j, k)] += waj * a[k].conj();
                }
            }
        }
        Ok(DensityMatrix { grid, mat })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn trace(&self) -> C64 {
        let s: C64 = self.mat.diag().iter().sum();
        s * self.grid.spacing()
    }

    pub fn normalize(&mut self) {
        let t = self.trace().re;
        if t != 0.0 {
            let s = C64::new(1.0 / t, 0.0);
            self.mat.mapv_inplace(|v| v * s);
        }
    }

    pub fn check_normalized(&self) -> Result<()> {
        let dev = (self.trace().re - 1.0).abs();
        if dev > TRACE_TOL {
            return Err(CoreError::Unnormalized { deviation: dev });
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max elementwise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.grid.n();
        let mut max = 0.0f64;
        for j in 0..n {
            for k in j..n {
                let d = (self.mat[(j, k)] - self.mat[(k, j)].conj()).norm();
                if d > max {
                    max = d;
                }
            }
        }
        max
    }

    /// `tr rho^2` under the grid quadrature.
    pub fn purity(&self) -> f64 {
        let dx = self.grid.spacing();
        let s: f64 = self.mat.iter().map(|v| v.norm_sqr()).sum();
        s * dx * dx
    }

    /// Diagonal (position) distribution, `rho_jj dx` per cell.
    pub fn position_weights(&self) -> Vec<f64> {
        let dx = self.grid.spacing();
        self.mat.diag().iter().map(|v| v.re * dx).collect()
    }

    /// Relative diagonal mass within 5% of either grid edge.
    pub fn boundary_mass(&self) -> f64 {
        let w = self.position_weights();
        let n = w.len();
        let edge = (n as f64 * 0.05).ceil() as usize;
        let total: f64 = w.iter().sum();
        let mut m = 0.0;
        for j in 0..edge {
            m += w[j] + w[n - 1 - j];
        }
        m / total.abs().max(f64::MIN_POSITIVE)
    }

    pub fn check_boundary(&self) -> Result<()> {
        let mass = self.boundary_mass();
        if mass > BOUNDARY_MASS_TOL {
            return Err(CoreError::BoundaryContamination { mass });
        }
        Ok(())
    }

    pub fn mean_x(&self) -> f64 {
        let dx = self.grid.spacing();
        self.mat
            .diag()
            .iter()
            .zip(self.grid.xs())
            .map(|(v, x)| v.re * x)
            .sum::<f64>()
            * dx
    }

    pub fn mean_x2(&self) -> f64 {
        let dx = self.grid.spacing();
        self.mat
            .diag()
            .iter()
            .zip(self.grid.xs())
            .map(|(v, x)| v.re * x * x)
            .sum::<f64>()
            * dx
    }

    pub fn var_x(&self) -> f64 {
        let m = self.mean_x();
        self.mean_x2() - m * m
    }

    /// `tr(p rho)` and `tr(p^2 rho)` from the double Fourier transform
    /// diagonal.
    pub fn momentum_moments(&self) -> (f64, f64) {
        // tr(p^s rho) = sum_q k_q^s rho~(q, q) dx / n with
        // rho~(q, q') = sum_{jk} e^{-i k_q x_j} rho_jk e^{+i k_q' x_k} / sqrt-free
        // convention; only the diagonal is needed, so transform columns of
        // the j index against each k and contract. Cheaper: apply p^s to
        // the first index spectrally and take the trace.
        let n = self.grid.n();
        let dx = self.grid.spacing();
        let ks = self.grid.ks();
        // Work column by column: (p^s rho)_jj = ifft(k^s fft(col_j))_j.
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        let mut buf = vec![C64::new(0.0, 0.0); n];
        let mut buf2 = vec![C64::new(0.0, 0.0); n];
        for col in 0..n {
            for j in 0..n {
                buf[j] = self.mat[(j, col)];
            }
            self.grid.fft_forward(&mut buf);
            for q in 0..n {
                buf2[q] = buf[q] * ks[q] * ks[q];
                buf[q] *= ks[q];
            }
            self.grid.fft_inverse(&mut buf);
            self.grid.fft_inverse(&mut buf2);
            m1 += buf[col].re;
            m2 += buf2[col].re;
        }
        (m1 * dx, m2 * dx)
    }

    pub fn mean_p(&self) -> f64 {
        self.momentum_moments().0
    }

    pub fn var_p(&self) -> f64 {
        let (m1, m2) = self.momentum_moments();
        m2 - m1 * m1
    }

    /// Expectation value of `obs` in a normalized mixed state; position
    /// observables from the diagonal, momentum observables through the
    /// spectral action on the first index.
    pub fn expectation(&self, obs: crate::wavefunction::Observable) -> Result<f64> {
        use crate::wavefunction::Observable;
        self.check_normalized()?;
        self.check_boundary()?;
        match obs {
            Observable::X => Ok(self.mean_x()),
            Observable::X2 => Ok(self.mean_x2()),
            Observable::P => Ok(self.momentum_moments().0),
            Observable::P2 => Ok(self.momentum_moments().1),
            Observable::SymXP => {
                // Re tr(x p rho) with p applied spectrally to the first index
                let n = self.grid.n();
                let dx = self.grid.spacing();
                let ks = self.grid.ks();
                let xs = self.grid.xs();
                let mut buf = vec![C64::new(0.0, 0.0); n];
                let mut acc = C64::new(0.0, 0.0);
                for col in 0..n {
                    for j in 0..n {
                        buf[j] = self.mat[(j, col)];
                    }
                    self.grid.fft_forward(&mut buf);
                    for q in 0..n {
                        buf[q] *= ks[q];
                    }
                    self.grid.fft_inverse(&mut buf);
                    acc += xs[col] * buf[col];
                }
                Ok((acc * dx).re)
            }
        }
    }

    /// Largest and smallest eigenvalues by (shifted) power iteration.
    /// Adequate for positivity monitoring on desk-scale grids.
    pub fn eig_extremes(&self, iters: usize) -> (f64, f64) {
        let lmax = self.power_iteration(None, iters);
        let lmin_shifted = self.power_iteration(Some(lmax), iters);
        (lmax, lmax - lmin_shifted)
    }

    fn power_iteration(&self, shift: Option<f64>, iters: usize) -> f64 {
        let n = self.grid.n();
        let dx = self.grid.spacing();
        let mut v: Vec<C64> = (0..n)
            .map(|j| C64::new(1.0 + (j as f64 * 0.7).sin(), (j as f64 * 0.3).cos()))
            .collect();
        let mut lambda = 0.0f64;
        let mut w = vec![C64::new(0.0, 0.0); n];
        for _ in 0..iters {
            // w = A v (with A = shift*I - rho when shifted, A = rho otherwise)
            for j in 0..n {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..n {
                    s += self.mat[(j, k)] * v[k];
                }
                s *= dx;
                w[j] = match shift {
                    Some(c) => C64::new(c, 0.0) * v[j] - s,
                    None => s,
                };
            }
            let nrm = (w.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt();
            if nrm == 0.0 {
                return 0.0;
            }
            let vs: C64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            lambda = vs.re / v.iter().map(|c| c.norm_sqr()).sum::<f64>();
            for (a, b) in v.iter_mut().zip(&w) {
                *a = b / nrm;
            }
        }
        lambda
    }
}

/// Linear entropy S = 1 - tr rho^2 of a normalized density matrix.
pub fn linear_entropy(rho: &DensityMatrix) -> Result<f64> {
    rho.check_normalized()?;
    Ok(1.0 - rho.purity())
}

/// Hilbert-Schmidt distance `sqrt(tr (a - b)^2)` between two Hermitian
/// matrices on the same grid.
pub fn hs_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if !a.grid().same_grid(b.grid()) {
        return Err(CoreError::GridMismatch);
    }
    let dx = a.grid().spacing();
    let s: f64 = a
        .matrix()
        .iter()
        .zip(b.matrix().iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    Ok((s * dx * dx).sqrt())
}

/// Hilbert-Schmidt norm `sqrt(tr m^2)` of a Hermitian matrix in grid
/// conventions.
pub fn hs_norm(m: &DensityMatrix) -> f64 {
    let dx = m.grid().spacing();
    let s: f64 = m.matrix().iter().map(|v| v.norm_sqr()).sum();
    (s * dx * dx).sqrt()
}
