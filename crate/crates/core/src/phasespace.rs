//! Classical phase-space layer: diffusion matrix of the pointer family,
//! Gaussian-closed Fokker-Planck evolution of the pointer weight,
//! Ito-Langevin center diffusion, and density-matrix reconstruction from
//! the weight.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::density::DensityMatrix;
use crate::error::CoreError;
use crate::gaussian::{self, AlphaParam, PhasePoint};
use crate::grid::Grid;
use crate::master::ModelParams;
use crate::sym2::SymMatrix2;
use crate::Result;

/// Diffusion matrix of the pointer-center random walk,
/// `D_xx = -alpha_I/(m alpha_R)`, `D_xp = |alpha|^2/(4 m alpha_R)`,
/// `D_pp = D`. Admissibility (positive semidefiniteness) is reported, not
/// enforced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionMatrix(SymMatrix2);

impl DiffusionMatrix {
    pub fn matrix(&self) -> SymMatrix2 {
        self.0
    }

    pub fn det(&self) -> f64 {
        self.0.det()
    }

    pub fn is_admissible(&self) -> bool {
        self.0.det() >= -1e-12 && self.0.xx >= -1e-12 && self.0.pp >= -1e-12
    }

    /// Square root scaled for a time step: returns B with
    /// `B Bᵀ = D dt`, handling the rank-1 boundary case.
    pub fn increment_root(&self, dt: f64) -> Result<[[f64; 2]; 2]> {
        self.0
            .scale(dt)
            .sqrt_psd(1e-12)
            .ok_or_else(|| CoreError::InadmissibleAlpha("diffusion matrix is indefinite".into()))
    }
}

/// Diffusion matrix for a pointer family of width parameter `alpha`.
pub fn diffusion_matrix(alpha: AlphaParam, params: &ModelParams) -> DiffusionMatrix {
    let mar = params.m * alpha.re;
    DiffusionMatrix(SymMatrix2::new(
        -alpha.im / mar,
        alpha.norm_sqr() / (4.0 * mar),
        params.d,
    ))
}

/// Time-dependent coefficient matrix of the Fourier-space solution of the
/// pointer-weight equation:
/// `G(t) = [[D_pp, -D_xp + D_pp t/2m], [., D_xx - D_xp t/m + D_pp t^2/3m^2]]`.
///
/// In the solution formula the quadratic form of `G` acts on the sheared
/// Fourier variables `(x~ - p~ t/m, p~)`; see [`evolve_weight`].
pub fn gmatrix(t: f64, dmat: &DiffusionMatrix, m: f64) -> SymMatrix2 {
    let d = dmat.matrix();
    SymMatrix2::new(
        d.pp,
        -d.xp + d.pp * t / (2.0 * m),
        d.xx - d.xp * t / m + d.pp * t * t / (3.0 * m * m),
    )
}

/// Gaussian weight over pointer centers: mean and covariance of
/// `f(Gamma; t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianWeight {
    pub mean: PhasePoint,
    pub cov: SymMatrix2,
}

impl GaussianWeight {
    pub fn new(mean: PhasePoint, cov: SymMatrix2) -> Result<GaussianWeight> {
        if cov.det() < -1e-12 || cov.xx < -1e-12 || cov.pp < -1e-12 {
            return Err(CoreError::InvalidParameter(
                "weight covariance must be positive semidefinite".into(),
            ));
        }
        Ok(GaussianWeight { mean, cov })
    }

    pub fn point_mass(mean: PhasePoint) -> GaussianWeight {
        GaussianWeight {
            mean,
            cov: SymMatrix2::ZERO,
        }
    }
}

/// Exact Gaussian-closure evolution of the pointer weight: the mean
/// follows free flow and the covariance the closed-form Fourier solution,
/// with the `G(t)` form conjugated by the free-flow shear.
pub fn evolve_weight(
    w0: &GaussianWeight,
    dmat: &DiffusionMatrix,
    m: f64,
    t: f64,
) -> GaussianWeight {
    let mean = PhasePoint::new(w0.mean.x + w0.mean.p * t / m, w0.mean.p);
    // Fourier-space quadratic forms: Sigma~ = J Sigma Jᵀ swaps the roles
    // of x and p and flips the cross sign
    let s0 = w0.cov;
    let tilde0 = SymMatrix2::new(s0.pp, -s0.xp, s0.xx);
    let g = gmatrix(t, dmat, m).scale(t);
    let msum = g.add(&tilde0);
    // conjugate by the shear S = [[1, -t/m], [0, 1]]
    let tm = t / m;
    let out_11 = msum.xx;
    let out_12 = msum.xp - msum.xx * tm;
    let out_22 = msum.pp - 2.0 * msum.xp * tm + msum.xx * tm * tm;
    // map back: Sigma = Jᵀ Sigma~ J
    let cov = SymMatrix2::new(out_22, -out_12, out_11);
    GaussianWeight { mean, cov }
}

/// Independent route for the weight covariance: RK4 integration of the
/// moment equation `dSigma/dt = A Sigma + Sigma Aᵀ + D` with
/// `A = [[0, 1/m], [0, 0]]`. Used to cross-check [`evolve_weight`].
pub fn covariance_moment_ode(
    cov0: &SymMatrix2,
    dmat: &DiffusionMatrix,
    m: f64,
    t: f64,
    steps: usize,
) -> SymMatrix2 {
    let d = dmat.matrix();
    let rhs = |s: &SymMatrix2| -> SymMatrix2 {
        SymMatrix2::new(
            2.0 * s.xp / m + d.xx,
            s.pp / m + d.xp,
            d.pp,
        )
    };
    let h = t / steps.max(1) as f64;
    let mut s = *cov0;
    for _ in 0..steps.max(1) {
        let k1 = rhs(&s);
        let k2 = rhs(&s.add(&k1.scale(h / 2.0)));
        let k3 = rhs(&s.add(&k2.scale(h / 2.0)));
        let k4 = rhs(&s.add(&k3.scale(h)));
        let incr = k1
            .add(&k2.scale(2.0))
            .add(&k3.scale(2.0))
            .add(&k4)
            .scale(h / 6.0);
        s = s.add(&incr);
    }
    s
}

/// One Ito-Langevin step of the pointer center,
/// `Gamma -> Gamma + (p/m, 0) dt + dX`, with `dX` zero-mean Gaussian of
/// covariance `D dt` sampled through the symmetric matrix square root.
pub fn langevin_step<R: Rng + ?Sized>(
    gamma: PhasePoint,
    dmat: &DiffusionMatrix,
    m: f64,
    dt: f64,
    rng: &mut R,
) -> Result<PhasePoint> {
    use rand_distr::{Distribution, StandardNormal};
    let b = dmat.increment_root(dt)?;
    let g1: f64 = StandardNormal.sample(rng);
    let g2: f64 = StandardNormal.sample(rng);
    let dx = b[0][0] * g1 + b[0][1] * g2;
    let dp = b[1][0] * g1 + b[1][1] * g2;
    Ok(PhasePoint::new(gamma.x + gamma.p * dt / m + dx, gamma.p + dp))
}

/// Default number of quadrature nodes per phase-space axis used by
/// [`reconstruct_rho`].
pub const RECONSTRUCT_NODES: usize = 96;

/// Reconstruct the density matrix from a Gaussian pointer weight,
/// `rho = integral f(Gamma) |psi_Gamma><psi_Gamma| dGamma` with
/// `dGamma = dx dp / 2 pi`, by tensor quadrature over the principal axes
/// of the weight covariance (box radius 6 standard deviations).
pub fn reconstruct_rho(
    weight: &GaussianWeight,
    alpha: AlphaParam,
    grid: &Grid,
) -> Result<DensityMatrix> {
    reconstruct_rho_with_nodes(weight, alpha, grid, RECONSTRUCT_NODES)
}

/// [`reconstruct_rho`] with an explicit per-axis node count (>= 8).
pub fn reconstruct_rho_with_nodes(
    weight: &GaussianWeight,
    alpha: AlphaParam,
    grid: &Grid,
    nodes: usize,
) -> Result<DensityMatrix> {
    if nodes < 8 {
        return Err(CoreError::InvalidParameter(format!(
            "quadrature needs >= 8 nodes per axis, got {nodes}"
        )));
    }
    let sigma = gaussian::equilibrium_width(alpha);
    if sigma < 8.0 * grid.spacing() {
        return Err(CoreError::UnresolvedWidth {
            sigma,
            spacing: grid.spacing(),
            required: 8,
        });
    }
    let n = grid.n();
    let mut mat = Array2::<C64>::zeros((n, n));

    // principal axes of the covariance; a point mass collapses the
    // quadrature to a single node, a rank-1 covariance to a line. The
    // analytic Gaussian weights are kept unnormalized so the trace of the
    // assembled matrix measures the quadrature error.
    let [(l1, v1), (l2, v2)] = weight.cov.eigensystem();
    let s1 = l1.max(0.0).sqrt();
    let s2 = l2.max(0.0).sqrt();
    const RADIUS: f64 = 6.0;
    const DEGENERATE: f64 = 1e-14;

    let mut points: Vec<(f64, PhasePoint)> = Vec::new();
    if s1 < DEGENERATE && s2 < DEGENERATE {
        points.push((1.0, weight.mean));
    } else if s2 < DEGENERATE {
        let h = 2.0 * RADIUS / nodes as f64;
        let norm = h / (2.0 * std::f64::consts::PI).sqrt();
        for i in 0..nodes {
            let u = -RADIUS + (i as f64 + 0.5) * h;
            let w = (-0.5 * u * u).exp() * norm;
            let x = weight.mean.x + u * s1 * v1[0];
            let p = weight.mean.p + u * s1 * v1[1];
            points.push((w, PhasePoint::new(x, p)));
        }
    } else {
        let h = 2.0 * RADIUS / nodes as f64;
        let norm = h * h / (2.0 * std::f64::consts::PI);
        for i in 0..nodes {
            let u = -RADIUS + (i as f64 + 0.5) * h;
            for j in 0..nodes {
                let v = -RADIUS + (j as f64 + 0.5) * h;
                if u * u + v * v > RADIUS * RADIUS {
                    continue;
                }
                let w = (-0.5 * (u * u + v * v)).exp() * norm;
                let x = weight.mean.x + u * s1 * v1[0] + v * s2 * v2[0];
                let p = weight.mean.p + u * s1 * v1[1] + v * s2 * v2[1];
                points.push((w, PhasePoint::new(x, p)));
            }
        }
    }

    for (w, gamma) in &points {
        let psi = gaussian::pointer_state_unchecked(grid.clone(), alpha, *gamma);
        let a = psi.amplitudes();
        let wc = C64::new(*w, 0.0);
        for j in 0..n {
            let aj = wc * a[j];
            let row = mat.row_mut(j);
            let row = row.into_slice().expect("contiguous");
            for (k, slot) in row.iter_mut().enumerate() {
                *slot += aj * a[k].conj();
            }
        }
    }

    let rho = DensityMatrix::from_matrix_unchecked(grid.clone(), mat);
    let trace_error = (rho.trace().re - 1.0).abs();
    if trace_error > 1e-6 {
        return Err(CoreError::QuadratureUnderResolved { trace_error });
    }
    let mut rho = rho;
    rho.normalize();
    Ok(rho)
}
