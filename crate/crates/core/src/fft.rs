//! FFT plumbing: thin wrapper over rustfft plus a chirp transform for
//! evaluation on geometric node sequences that are not plain roots of unity.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::f64::consts::PI;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place DFT with the engineering sign convention:
/// forward X_k = sum_j x_j e^{-2 pi i jk/N}. Unscaled.
pub fn fft_forward(buf: &mut [Complex64]) {
    PLANNER.with(|p| {
        let plan = p.borrow_mut().plan_fft_forward(buf.len());
        plan.process(buf);
    });
}

/// In-place inverse DFT, scaled by 1/N: x_j = (1/N) sum_k X_k e^{+2 pi i jk/N}.
pub fn fft_inverse(buf: &mut [Complex64]) {
    let n = buf.len();
    PLANNER.with(|p| {
        let plan = p.borrow_mut().plan_fft_inverse(buf.len());
        plan.process(buf);
    });
    let s = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= s;
    }
}

/// Unscaled inverse-sign DFT: X_k = sum_j x_j e^{+2 pi i jk/N}.
/// This is polynomial evaluation at the ascending N-th roots of unity.
pub fn dft_eval(buf: &mut [Complex64]) {
    PLANNER.with(|p| {
        let plan = p.borrow_mut().plan_fft_inverse(buf.len());
        plan.process(buf);
    });
}

/// e^{i pi k^2 / m} with the quadratic phase reduced exactly mod 2 pi.
fn quad_phase(k: i64, m: i64) -> Complex64 {
    let r = ((k as i128) * (k as i128)).rem_euclid(2 * m as i128) as f64;
    Complex64::from_polar(1.0, PI * r / m as f64)
}

/// Evaluate p(t_k) for t_k = a * e^{2 pi i k / m}, k = 0..k_out, where
/// `coeffs` are ascending power coefficients of p. Bluestein's chirp method;
/// m need not be a power of two.
pub fn eval_geometric(coeffs: &[Complex64], a: Complex64, m: u64, k_out: usize) -> Vec<Complex64> {
    let l = coeffs.len();
    if l == 0 {
        return vec![Complex64::new(0.0, 0.0); k_out];
    }
    let m = m as i64;
    // p(t_k) = sum_j c_j a^j w^{jk}, w = e^{2 pi i/m};
    // jk = (j^2 + k^2 - (k-j)^2)/2 splits the kernel into a convolution.
    let size = (l + k_out).next_power_of_two() * 2;
    let mut v = vec![Complex64::new(0.0, 0.0); size];
    let mut g = vec![Complex64::new(0.0, 0.0); size];
    let mut apow = Complex64::new(1.0, 0.0);
    for j in 0..l {
        v[j] = coeffs[j] * apow * quad_phase(j as i64, m);
        apow *= a;
    }
    // g_d = e^{-i pi d^2/m} for d = -(l-1)..k_out, stored at index d + (l-1).
    for d in -(l as i64 - 1)..(k_out as i64) {
        g[(d + l as i64 - 1) as usize] = quad_phase(d, m).conj();
    }
    fft_forward(&mut v);
    fft_forward(&mut g);
    for (x, y) in v.iter_mut().zip(g.iter()) {
        *x *= *y;
    }
    fft_inverse(&mut v);
    (0..k_out)
        .map(|k| quad_phase(k as i64, m) * v[k + l - 1])
        .collect()
}
