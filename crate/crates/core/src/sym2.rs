/// Real symmetric 2x2 matrix over the phase-space coordinates (x, p).
///
/// Houses quantum correlation matrices, diffusion matrices and the
/// time-dependent Fokker-Planck coefficient matrix. Symmetry is built in
/// through the single off-diagonal field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMatrix2 {
    pub xx: f64,
    pub xp: f64,
    pub pp: f64,
}

impl SymMatrix2 {
    pub const ZERO: SymMatrix2 = SymMatrix2 {
        xx: 0.0,
        xp: 0.0,
        pp: 0.0,
    };

    pub fn new(xx: f64, xp: f64, pp: f64) -> Self {
        SymMatrix2 { xx, xp, pp }
    }

    pub fn det(&self) -> f64 {
        self.xx * self.pp - self.xp * self.xp
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.pp
    }

    /// Eigenvalues sorted descending, with their (unit) eigenvectors.
    pub fn eigensystem(&self) -> [(f64, [f64; 2]); 2] {
        let half_tr = 0.5 * self.trace();
        let half_diff = 0.5 * (self.xx - self.pp);
        let disc = (half_diff * half_diff + self.xp * self.xp).sqrt();
        let l1 = half_tr + disc;
        let l2 = half_tr - disc;
        let v1 = if self.xp.abs() > 1e-300 {
            normalize([l1 - self.pp, self.xp])
        } else if self.xx >= self.pp {
            [1.0, 0.0]
        } else {
            [0.0, 1.0]
        };
        // second eigenvector is the orthogonal complement
        let v2 = [-v1[1], v1[0]];
        [(l1, v1), (l2, v2)]
    }

    /// Symmetric square root B with B Bᵀ = self, valid for positive
    /// semidefinite matrices. Eigenvalues within `neg_tol` below zero are
    /// clamped, which covers the rank-1 boundary case exactly.
    pub fn sqrt_psd(&self, neg_tol: f64) -> Option<[[f64; 2]; 2]> {
        let [(l1, v1), (l2, v2)] = self.eigensystem();
        let scale = l1.abs().max(1.0);
        if l2 < -neg_tol * scale {
            return None;
        }
        let s1 = l1.max(0.0).sqrt();
        let s2 = l2.max(0.0).sqrt();
        // B = V diag(s) Vᵀ
        Some([
            [
                s1 * v1[0] * v1[0] + s2 * v2[0] * v2[0],
                s1 * v1[0] * v1[1] + s2 * v2[0] * v2[1],
            ],
            [
                s1 * v1[1] * v1[0] + s2 * v2[1] * v2[0],
                s1 * v1[1] * v1[1] + s2 * v2[1] * v2[1],
            ],
        ])
    }

    pub fn scale(&self, c: f64) -> SymMatrix2 {
        SymMatrix2::new(self.xx * c, self.xp * c, self.pp * c)
    }

    pub fn add(&self, other: &SymMatrix2) -> SymMatrix2 {
        SymMatrix2::new(self.xx + other.xx, self.xp + other.xp, self.pp + other.pp)
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &SymMatrix2) -> f64 {
        (self.xx - other.xx)
            .abs()
            .max((self.xp - other.xp).abs())
            .max((self.pp - other.pp).abs())
    }
}

fn normalize(v: [f64; 2]) -> [f64; 2] {
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    [v[0] / n, v[1] / n]
}
