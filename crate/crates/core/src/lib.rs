//! Direct Zakharov-Shabat scattering (the forward nonlinear Fourier
//! transform) for sampled signals.
//!
//! One-step transfer matrices for a catalog of exponential Runge-Kutta and
//! linear multistep discretizations are assembled into the discrete
//! scattering coefficients a_N(z^2), b_N(z^2) by balanced FFT product trees
//! in O(N log^2 N); the continuous spectrum, discrete eigenvalues, norming
//! constants and periodic main spectrum are read off from the resulting
//! polynomials.

pub mod error;
pub mod fft;
pub mod linalg;
pub mod oracle;
pub mod periodic;
pub mod polyalg;
pub mod roots;
pub mod scattering;
pub mod schemes;
pub mod signal;
pub mod spectrum;

pub use error::{Result, ZsError};
pub use num_complex::Complex64;

/// Shorthand used throughout the crate.
pub type C64 = Complex64;

/// Sign of the symmetry reduction r = kappa * conj(q).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kappa {
    /// kappa = -1 (focusing).
    Focusing,
    /// kappa = +1 (defocusing).
    Defocusing,
}

impl Kappa {
    pub fn sign(self) -> f64 {
        match self {
            Kappa::Focusing => -1.0,
            Kappa::Defocusing => 1.0,
        }
    }

    pub fn from_i64(v: i64) -> Result<Self> {
        match v {
            -1 => Ok(Kappa::Focusing),
            1 => Ok(Kappa::Defocusing),
            _ => Err(ZsError::Domain(format!("kappa must be +1 or -1, got {v}"))),
        }
    }

    /// r = kappa * conj(q), applied to the h-scaled samples as well.
    pub fn r_of_q(self, q: C64) -> C64 {
        q.conj() * self.sign()
    }
}

/// Configure the global rayon pool size once, before any parallel work.
/// Returns false when the pool was already initialized.
pub fn set_thread_count(n: usize) -> bool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .is_ok()
}
