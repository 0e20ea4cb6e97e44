//! Small dense complex linear algebra: 2x2 matrices and LU determinants.

use num_complex::Complex64;

/// Dense 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        Mat2([[m11, m12], [m21, m22]])
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Mat2([[one, zero], [zero, one]])
    }

    pub fn diag(d1: Complex64, d2: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Mat2([[d1, zero], [zero, d2]])
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &other.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scaled(&self, c: Complex64) -> Mat2 {
        let a = &self.0;
        Mat2([
            [a[0][0] * c, a[0][1] * c],
            [a[1][0] * c, a[1][1] * c],
        ])
    }

    pub fn sub(&self, other: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &other.0;
        Mat2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }

    /// Largest entry magnitude; used for relative comparisons.
    pub fn max_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Spectral norm (largest singular value) of a 2x2 complex matrix.
    pub fn spectral_norm(&self) -> f64 {
        // Singular values from the eigenvalues of M^H M.
        let a = &self.0;
        let g11 = a[0][0].norm_sqr() + a[1][0].norm_sqr();
        let g22 = a[0][1].norm_sqr() + a[1][1].norm_sqr();
        let g12 = a[0][0].conj() * a[0][1] + a[1][0].conj() * a[1][1];
        let tr = g11 + g22;
        let disc = ((g11 - g22) * (g11 - g22) + 4.0 * g12.norm_sqr()).sqrt();
        (0.5 * (tr + disc)).max(0.0).sqrt()
    }
}

/// Determinant of an n x n complex matrix by partially pivoted LU.
/// `a` is row-major and is destroyed.
pub fn det_in_place(a: &mut [Complex64], n: usize) -> Complex64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k * n + k].norm_sqr();
        for r in (k + 1)..n {
            let m = a[r * n + k].norm_sqr();
            if m > best {
                best = m;
                piv = r;
            }
        }
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            det = -det;
        }
        let d = a[k * n + k];
        det *= d;
        for r in (k + 1)..n {
            let f = a[r * n + k] / d;
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for c in (k + 1)..n {
                let v = a[k * n + c];
                a[r * n + c] -= f * v;
            }
        }
    }
    det
}
