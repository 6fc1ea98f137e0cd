//! Internal spectral helpers: momentum-space multipliers for vectors and
//! the row-wise action on matrices used by the master-equation stepper.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::grid::Grid;

/// Apply a real momentum-space multiplier to a state vector:
/// `v <- ifft(mult .* fft(v))`.
pub(crate) fn apply_k_multiplier(grid: &Grid, v: &mut [C64], mult: &[f64]) {
    grid.fft_forward(v);
    for (a, m) in v.iter_mut().zip(mult) {
        *a *= *m;
    }
    grid.fft_inverse(v);
}

/// Apply a real momentum-space multiplier to every row of a matrix,
/// i.e. act on the second index: `M <- M . Op` for the symmetric spectral
/// operator kernel defined by `mult`.
///
/// The spectral kernel of an even function of k on the symmetric momentum
/// grid is a real symmetric matrix, so the same routine provides the
/// left action on Hermitian matrices through `(Op . M) = (M . Op)†`.
pub(crate) fn apply_k_multiplier_rows(grid: &Grid, mat: &mut Array2<C64>, mult: &[f64]) {
    let rows: Vec<&mut [C64]> = mat
        .rows_mut()
        .into_iter()
        .map(|r| r.into_slice().expect("matrix rows must be contiguous"))
        .collect();
    rows.into_par_iter().for_each(|row| {
        apply_k_multiplier(grid, row, mult);
    });
}
