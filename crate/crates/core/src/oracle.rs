//! Independent reference engine: exact propagation of piecewise-constant
//! potentials by closed-form matrix exponentials, and a log-log
//! convergence-order fit. Shares nothing with the discretization code
//! beyond complex arithmetic.

use crate::error::{Result, ZsError};
use crate::linalg::Mat2;
use crate::{Kappa, C64};

/// Constant q values on consecutive pieces tiling [T1, T2].
#[derive(Debug, Clone)]
pub struct PiecewiseConstantOracle {
    /// Piece boundaries, length pieces + 1, strictly increasing.
    pub breakpoints: Vec<f64>,
    /// Constant q on each piece.
    pub values: Vec<C64>,
    pub kappa: Kappa,
}

impl PiecewiseConstantOracle {
    pub fn new(breakpoints: Vec<f64>, values: Vec<C64>, kappa: Kappa) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return Err(ZsError::Domain(
                "need one more breakpoint than piece values".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ZsError::Domain("breakpoints must increase".into()));
        }
        Ok(PiecewiseConstantOracle { breakpoints, values, kappa })
    }

    /// Midpoint-sampled piecewise-constant approximation of f on [t1, t2];
    /// the fine-grid reference for smooth signals.
    pub fn from_fn(
        f: impl Fn(f64) -> C64,
        t1: f64,
        t2: f64,
        pieces: usize,
        kappa: Kappa,
    ) -> Result<Self> {
        if pieces == 0 || t2 <= t1 {
            return Err(ZsError::Domain("need pieces >= 1 and t2 > t1".into()));
        }
        let dt = (t2 - t1) / pieces as f64;
        let breakpoints = (0..=pieces).map(|j| t1 + j as f64 * dt).collect();
        let values = (0..pieces)
            .map(|j| f(t1 + (j as f64 + 0.5) * dt))
            .collect();
        Self::new(breakpoints, values, kappa)
    }

    pub fn t1(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn t2(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Propagator over the whole domain at spectral point zeta.
    pub fn propagator(&self, zeta: C64) -> Mat2 {
        let mut acc = Mat2::identity();
        for (j, &q) in self.values.iter().enumerate() {
            let dt = self.breakpoints[j + 1] - self.breakpoints[j];
            acc = exact_tm_constant(q, self.kappa, zeta, dt).mul(&acc);
        }
        acc
    }

    /// Scattering coefficients (a, b): exact for piecewise-constant
    /// potentials up to rounding, a fine-step reference otherwise.
    pub fn scattering(&self, zeta: C64) -> (C64, C64) {
        let m = self.propagator(zeta);
        // v(T2) = M v(T1) with v(T1) = (1, 0)^T e^{-i zeta T1} dropped as a
        // common factor; a and b then pick up the plane-wave phases.
        let i = C64::i();
        let a = m.0[0][0] * (i * zeta * (self.t2() - self.t1())).exp();
        let b = m.0[1][0] * (-i * zeta * (self.t2() + self.t1())).exp();
        (a, b)
    }
}

/// Closed-form propagator of the constant-coefficient system over a piece of
/// length dt: exp(dt (-i zeta sigma3 + U)) with U = [[0, q], [r, 0]],
/// r = kappa conj(q). With G the generator, G^2 = (q r - zeta^2) I, so the
/// exponential is cosh(Gamma dt) I + sinh(Gamma dt)/Gamma * G, branch-free
/// because both factors are even in Gamma.
pub fn exact_tm_constant(q: C64, kappa: Kappa, zeta: C64, dt: f64) -> Mat2 {
    let r = kappa.r_of_q(q);
    let gamma2 = q * r - zeta * zeta;
    let gamma = gamma2.sqrt();
    let x = gamma * dt;
    let cosh = x.cosh();
    // sinh(x)/x by series inside the cancellation radius.
    let sinhc = if x.norm() < 1e-4 {
        let x2 = x * x;
        C64::new(1.0, 0.0) + x2 / 6.0 * (C64::new(1.0, 0.0) + x2 / 20.0)
    } else {
        x.sinh() / x
    };
    let s = sinhc * dt;
    let mi = -C64::i() * zeta;
    Mat2::new(cosh + s * mi, s * q, s * r, cosh - s * mi)
}

/// Least-squares slope of log(err) against log(h).
pub fn fit_convergence_order(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(ZsError::Fit(format!(
            "need at least 3 (h, err) samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|(h, e)| *h <= 0.0 || *e <= 0.0) {
        return Err(ZsError::Fit("h and err must be positive".into()));
    }
    let n = samples.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (h, e) in samples {
        let (x, y) = (h.ln(), e.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(ZsError::Fit("degenerate h set".into()));
    }
    Ok((n * sxy - sx * sy) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn free_piece_is_plane_wave() {
        let zeta = c(0.7, 0.3);
        let m = exact_tm_constant(c(0.0, 0.0), Kappa::Focusing, zeta, 0.9);
        let want = Mat2::diag(
            (-C64::i() * zeta * 0.9).exp(),
            (C64::i() * zeta * 0.9).exp(),
        );
        assert!(m.sub(&want).max_norm() < 1e-13);
    }

    #[test]
    fn zero_spectral_point_gives_rotation() {
        // kappa = -1, real q = A at zeta = 0: plane rotation by A dt.
        let a = 0.8;
        let dt = 1.3;
        let m = exact_tm_constant(c(a, 0.0), Kappa::Focusing, c(0.0, 0.0), dt);
        let (s, co) = (a * dt).sin_cos();
        let want = Mat2::new(c(co, 0.0), c(s, 0.0), c(-s, 0.0), c(co, 0.0));
        assert!(m.sub(&want).max_norm() < 1e-13);
    }

    #[test]
    fn determinant_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let q = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let zeta = c(rng.gen_range(-3.0..3.0), rng.gen_range(-1.0..1.0));
            let kappa = if rng.gen_bool(0.5) { Kappa::Focusing } else { Kappa::Defocusing };
            let m = exact_tm_constant(q, kappa, zeta, rng.gen_range(0.1..2.0));
            assert!((m.det() - c(1.0, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn sinhc_series_consistent_with_semigroup() {
        // zeta near i|q| (focusing) drives Gamma toward 0; the halving
        // identity exp(G dt) = exp(G dt/2)^2 must hold across the series
        // switch radius.
        let q = c(1.0, 0.5);
        for (bump, dt) in [(0.0, 1e-3), (0.0, 0.5), (1e-8, 1.0), (1e-8, 0.5)] {
            let zeta = C64::i() * (q.norm() + bump);
            let whole = exact_tm_constant(q, Kappa::Focusing, zeta, dt);
            let half = exact_tm_constant(q, Kappa::Focusing, zeta, dt / 2.0);
            assert!(whole.sub(&half.mul(&half)).max_norm() < 1e-13);
        }
    }

    #[test]
    fn zero_potential_scattering() {
        let orc = PiecewiseConstantOracle::new(
            vec![-1.0, 0.0, 1.0],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
            Kappa::Focusing,
        )
        .unwrap();
        let (a, b) = orc.scattering(c(0.4, 0.2));
        assert!((a - c(1.0, 0.0)).norm() < 1e-13);
        assert!(b.norm() < 1e-13);
    }

    #[test]
    fn rectangle_scattering_consistent_at_zero() {
        // Single piece q = A on [0, 1]: at zeta = 0 the rotation form gives
        // a = cos(A) e^{i 0} directly.
        let a_amp = 1.1;
        let orc = PiecewiseConstantOracle::new(
            vec![0.0, 1.0],
            vec![c(a_amp, 0.0)],
            Kappa::Focusing,
        )
        .unwrap();
        let (a, b) = orc.scattering(c(0.0, 0.0));
        assert!((a - c(a_amp.cos(), 0.0)).norm() < 1e-13);
        assert!((b - c(-a_amp.sin(), 0.0)).norm() < 1e-13);
    }

    #[test]
    fn piece_split_is_semigroup() {
        // Two pieces with equal q match one merged piece exactly.
        let q = c(0.9, -0.4);
        let one = PiecewiseConstantOracle::new(vec![0.0, 2.0], vec![q], Kappa::Defocusing).unwrap();
        let two = PiecewiseConstantOracle::new(vec![0.0, 0.7, 2.0], vec![q, q], Kappa::Defocusing)
            .unwrap();
        for t in 0..5 {
            let zeta = c(0.3 * t as f64 - 0.6, 0.1);
            let (a1, b1) = one.scattering(zeta);
            let (a2, b2) = two.scattering(zeta);
            assert!((a1 - a2).norm() < 1e-13 * a1.norm().max(1.0));
            assert!((b1 - b2).norm() < 1e-13 * b1.norm().max(1.0));
        }
    }

    #[test]
    fn fit_order_examples() {
        // err = C h^2 exactly.
        let samples: Vec<(f64, f64)> = (0..5)
            .map(|j| {
                let h = 0.5f64.powi(j);
                (h, 3.0 * h * h)
            })
            .collect();
        assert!((fit_convergence_order(&samples).unwrap() - 2.0).abs() < 1e-12);

        // err = C h^4 with 1% multiplicative noise stays within the band.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let samples: Vec<(f64, f64)> = (0..6)
            .map(|j| {
                let h = 0.5f64.powi(j);
                (h, h.powi(4) * (1.0 + 0.01 * rng.gen_range(-1.0..1.0)))
            })
            .collect();
        let p = fit_convergence_order(&samples).unwrap();
        assert!((3.7..=4.3).contains(&p), "p = {p}");

        // Constant error fits slope ~ 0.
        let samples: Vec<(f64, f64)> = (0..4).map(|j| (0.5f64.powi(j), 0.37)).collect();
        assert!(fit_convergence_order(&samples).unwrap().abs() < 1e-12);

        // Non-positive error is rejected.
        assert!(fit_convergence_order(&[(0.5, 1.0), (0.25, 0.0), (0.125, 0.1)]).is_err());
    }
}
