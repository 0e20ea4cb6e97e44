//! Polynomial root finding: Aberth-Ehrlich simultaneous iteration with
//! Newton-polygon initial radii. Works at the degrees produced by the
//! scattering pipeline (10^4 and above), where dense companion-matrix QR is
//! no longer desk-scale.

use crate::error::{Result, ZsError};
use num_complex::Complex64;
use rayon::prelude::*;

/// Degrees at or below this run the iteration serially.
const PAR_DEGREE: usize = 256;

#[derive(Debug, Clone, Copy)]
pub struct RootFindOptions {
    pub max_iter: usize,
    /// Relative step tolerance that freezes a root.
    pub tol: f64,
}

impl Default for RootFindOptions {
    fn default() -> Self {
        RootFindOptions { max_iter: 160, tol: 1e-13 }
    }
}

/// All complex roots of sum_j coeffs[j] x^j. Exact zero leading/trailing
/// coefficients are stripped (trailing zeros contribute roots at the origin).
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    poly_roots_with(coeffs, RootFindOptions::default())
}

pub fn poly_roots_with(coeffs: &[Complex64], opts: RootFindOptions) -> Result<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let lead = coeffs.iter().rposition(|c| *c != zero);
    let lead = match lead {
        None => return Err(ZsError::Domain("root search on the zero polynomial".into())),
        Some(l) => l,
    };
    let tail = coeffs.iter().position(|c| *c != zero).unwrap();
    let mut roots = vec![zero; tail];
    let c = &coeffs[tail..=lead];
    let deg = c.len() - 1;
    match deg {
        0 => {}
        1 => roots.push(-c[0] / c[1]),
        2 => roots.extend(quadratic_roots(c[0], c[1], c[2])),
        _ => roots.extend(aberth(c, opts)),
    }
    Ok(roots)
}

fn quadratic_roots(c0: Complex64, c1: Complex64, c2: Complex64) -> [Complex64; 2] {
    let disc = (c1 * c1 - 4.0 * c2 * c0).sqrt();
    // Pick the sign that avoids cancellation in -b +- disc.
    let q = if (c1 + disc).norm() >= (c1 - disc).norm() {
        -0.5 * (c1 + disc)
    } else {
        -0.5 * (c1 - disc)
    };
    if q.norm() == 0.0 {
        [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]
    } else {
        [q / c2, c0 / q]
    }
}

/// Initial guesses on circles whose radii come from the upper convex hull of
/// (j, ln|c_j|); the radii then follow the coefficient profile instead of a
/// single mean radius.
fn initial_guesses(c: &[Complex64]) -> Vec<Complex64> {
    let deg = c.len() - 1;
    let logs: Vec<f64> = c
        .iter()
        .map(|x| if x.norm() > 0.0 { x.norm().ln() } else { f64::NEG_INFINITY })
        .collect();
    // Upper convex hull of (j, logs[j]), left to right.
    let mut hull: Vec<usize> = Vec::new();
    for j in 0..=deg {
        if logs[j] == f64::NEG_INFINITY {
            continue;
        }
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Remove b if it lies below segment a-j.
            let lhs = (logs[j] - logs[a]) * (b - a) as f64;
            let rhs = (logs[b] - logs[a]) * (j - a) as f64;
            if rhs <= lhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(j);
    }
    let mut guesses = Vec::with_capacity(deg);
    let two_pi = std::f64::consts::TAU;
    let mut placed = 0usize;
    for seg in hull.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let k = b - a;
        let r = ((logs[a] - logs[b]) / k as f64).exp();
        for i in 0..k {
            // Golden-angle style offset decorrelates the start angles from
            // any root symmetry of the input.
            let theta = two_pi * (i as f64 / k as f64) + 0.79 * (placed + 1) as f64;
            guesses.push(Complex64::from_polar(r, theta));
            placed += 1;
        }
    }
    debug_assert_eq!(guesses.len(), deg);
    guesses
}

/// Newton ratio p(x)/p'(x), evaluated through the reversed polynomial for
/// |x| > 1 so that high degrees cannot overflow.
fn newton_ratio(c: &[Complex64], crev: &[Complex64], x: Complex64) -> Complex64 {
    let deg = (c.len() - 1) as f64;
    if x.norm_sqr() <= 1.0 {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &ck in c.iter().rev() {
            dp = dp * x + p;
            p = p * x + ck;
        }
        if dp.norm() == 0.0 {
            return Complex64::new(f64::EPSILON, 0.0);
        }
        p / dp
    } else {
        // p(x) = x^deg q(u), u = 1/x; p/p' = x q / (deg q - u q').
        let u = x.inv();
        let mut q = Complex64::new(0.0, 0.0);
        let mut dq = Complex64::new(0.0, 0.0);
        for &ck in crev.iter().rev() {
            dq = dq * u + q;
            q = q * u + ck;
        }
        let denom = deg * q - u * dq;
        if denom.norm() == 0.0 {
            return Complex64::new(f64::EPSILON, 0.0);
        }
        x * q / denom
    }
}

fn aberth(c: &[Complex64], opts: RootFindOptions) -> Vec<Complex64> {
    let deg = c.len() - 1;
    let crev: Vec<Complex64> = c.iter().rev().cloned().collect();
    let mut xs = initial_guesses(c);
    let mut frozen = vec![false; deg];

    for _ in 0..opts.max_iter {
        let prev = xs.clone();
        let step = |i: usize| -> (Complex64, bool) {
            if frozen[i] {
                return (prev[i], true);
            }
            let xi = prev[i];
            let n = newton_ratio(c, &crev, xi);
            let mut s = Complex64::new(0.0, 0.0);
            for (j, &xj) in prev.iter().enumerate() {
                if j != i {
                    let d = xi - xj;
                    if d.norm_sqr() > 0.0 {
                        s += d.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - n * s;
            let corr = if denom.norm() > 1e-300 { n / denom } else { n };
            let done = corr.norm() <= opts.tol * (1.0 + xi.norm());
            (xi - corr, done)
        };
        let updates: Vec<(Complex64, bool)> = if deg > PAR_DEGREE {
            (0..deg).into_par_iter().map(step).collect()
        } else {
            (0..deg).map(step).collect()
        };
        let mut all_done = true;
        for (i, (x, done)) in updates.into_iter().enumerate() {
            xs[i] = x;
            frozen[i] = done;
            all_done &= done;
        }
        if all_done {
            break;
        }
    }
    xs
}

/// A few Newton steps on the original polynomial; returns the polished root
/// and the total distance moved.
pub fn newton_polish(c: &[Complex64], x0: Complex64, steps: usize) -> (Complex64, f64) {
    let crev: Vec<Complex64> = c.iter().rev().cloned().collect();
    let mut x = x0;
    for _ in 0..steps {
        let n = newton_ratio(c, &crev, x);
        let xn = x - n;
        let stalled = n.norm() <= 1e-16 * (1.0 + x.norm());
        x = xn;
        if stalled {
            break;
        }
    }
    (x, (x - x0).norm())
}

/// Scale-free residual |p(x)| / max|c_j|.
pub fn scaled_residual(c: &[Complex64], x: Complex64) -> f64 {
    let scale = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    if x.norm_sqr() <= 1.0 {
        let mut p = Complex64::new(0.0, 0.0);
        for &ck in c.iter().rev() {
            p = p * x + ck;
        }
        p.norm() / scale
    } else {
        // |p(x)| = |x|^deg |q(1/x)|; report the reversed-side residual, which
        // is the meaningful backward error for outside roots.
        let u = x.inv();
        let mut q = Complex64::new(0.0, 0.0);
        for &ck in c.iter() {
            q = q * u + ck;
        }
        q.norm() / scale
    }
}

/// Merge roots closer than `radius` into (centroid, multiplicity) clusters.
pub fn cluster_roots(roots: &[Complex64], radius: f64) -> Vec<(Complex64, usize)> {
    let mut idx: Vec<usize> = (0..roots.len()).collect();
    idx.sort_by(|&a, &b| {
        roots[a]
            .re
            .partial_cmp(&roots[b].re)
            .unwrap()
            .then(roots[a].im.partial_cmp(&roots[b].im).unwrap())
    });
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for (pos, &i) in idx.iter().enumerate() {
        if used[i] {
            continue;
        }
        let mut sum = roots[i];
        let mut count = 1usize;
        used[i] = true;
        for &j in idx[pos + 1..].iter() {
            if roots[j].re - roots[i].re > radius {
                break;
            }
            if !used[j] && (roots[j] - roots[i]).norm() <= radius {
                sum += roots[j];
                count += 1;
                used[j] = true;
            }
        }
        out.push((sum / count as f64, count));
    }
    out
}
