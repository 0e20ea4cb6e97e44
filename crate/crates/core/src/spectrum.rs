//! Discrete spectrum: eigenvalues as upper-half-plane zeros of a_N, norming
//! constants by direct propagation, and spectral amplitudes from the exact
//! polynomial derivative.

use crate::error::{Result, ZsError};
use crate::roots::{cluster_roots, newton_polish, poly_roots_with, scaled_residual, RootFindOptions};
use crate::scattering::{sequential_from_chain, ScatteringPoly, StepChain};
use crate::schemes::SchemeId;
use crate::signal::SignalGrid;
use crate::C64;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy)]
pub struct EigenvalueOptions {
    /// Hard cap on the polynomial degree handed to the root finder.
    pub degree_cap: usize,
    /// Scale-free residual accepted for a reported root.
    pub residual_tol: f64,
    /// Roots whose polish step moves them farther than this fraction of the
    /// strip width are discarded as padding artifacts.
    pub spurious_move_frac: f64,
    /// Roots of |w| below this are outside the model and dropped.
    pub min_w_norm: f64,
}

impl Default for EigenvalueOptions {
    fn default() -> Self {
        EigenvalueOptions {
            degree_cap: 1 << 15,
            residual_tol: 1e-8,
            spurious_move_frac: 1e-2,
            min_w_norm: 1e-12,
        }
    }
}

/// One eigenvalue with its attached data.
#[derive(Debug, Clone, Copy)]
pub struct DiscretePair {
    pub zeta: C64,
    pub b: C64,
    /// Spectral amplitude b / da/dzeta; None when the derivative vanished
    /// (multiple root).
    pub rho: Option<C64>,
    /// |a_N(zeta)| relative to the coefficient scale.
    pub residual: f64,
}

#[derive(Debug, Clone, Default)]
pub struct DiscreteSpectrum {
    pub pairs: Vec<DiscretePair>,
}

/// All upper-half-plane eigenvalues of the discrete scattering problem:
/// roots of P1 in the w-plane mapped through w = exp(2 i zeta h / z_den) on
/// the principal branch, restricted to the validity strip.
pub fn find_eigenvalues(sp: &ScatteringPoly) -> Result<Vec<C64>> {
    find_eigenvalues_with(sp, EigenvalueOptions::default())
}

pub fn find_eigenvalues_with(
    sp: &ScatteringPoly,
    opts: EigenvalueOptions,
) -> Result<Vec<C64>> {
    let coeffs = sp.p1.coeffs();
    if coeffs.len() <= 1 {
        return Ok(Vec::new());
    }
    if coeffs.len() - 1 > opts.degree_cap {
        return Err(ZsError::Size(format!(
            "a-polynomial degree {} exceeds the rootfinding cap {}",
            coeffs.len() - 1,
            opts.degree_cap
        )));
    }
    let roots = poly_roots_with(coeffs, RootFindOptions::default())?;
    let h = sp.h;
    let z_den = sp.z_den as f64;
    let strip = std::f64::consts::PI / h;
    let arg_max = std::f64::consts::PI / z_den + 1e-12;
    let mut kept: Vec<C64> = Vec::new();
    for w0 in roots {
        if w0.norm() < opts.min_w_norm || w0.norm() >= 1.0 {
            continue;
        }
        // Principal-branch inverse of the spectral map.
        let zeta_of = |w: C64| -> C64 {
            let ln = C64::new(w.norm().ln(), w.arg());
            z_den * ln / (C64::i() * 2.0 * h)
        };
        if w0.arg().abs() > arg_max {
            continue;
        }
        let (w1, _) = newton_polish(coeffs, w0, 3);
        let zeta0 = zeta_of(w0);
        let zeta1 = zeta_of(w1);
        if (zeta1 - zeta0).norm() > opts.spurious_move_frac * strip {
            continue;
        }
        if zeta1.im <= 1e-12 || zeta1.re.abs() > strip / 2.0 + 1e-12 {
            continue;
        }
        if scaled_residual(coeffs, w1) > opts.residual_tol {
            continue;
        }
        kept.push(zeta1);
    }
    // Collapse duplicates (clustered roots polish to the same point).
    let strip_scale = strip.max(1.0);
    let clustered = cluster_roots(&kept, 1e-9 * strip_scale);
    let mut out: Vec<C64> = clustered.into_iter().map(|(z, _)| z).collect();
    out.sort_by(|a, b| {
        a.im.partial_cmp(&b.im)
            .unwrap()
            .then(a.re.partial_cmp(&b.re).unwrap())
    });
    Ok(out)
}

/// Norming constants b_k = b(zeta_k) by per-eigenvalue propagation and
/// spectral amplitudes rho_k = b_k / (da/dzeta)(zeta_k).
pub fn norming_constants(
    grid: &SignalGrid,
    scheme: SchemeId,
    sp: &ScatteringPoly,
    zetas: &[C64],
) -> Result<DiscreteSpectrum> {
    let strip = std::f64::consts::PI / (2.0 * sp.h);
    for z in zetas {
        if z.im <= 0.0 || z.re.abs() > strip {
            return Err(ZsError::Domain(format!(
                "eigenvalue {z} outside the upper-half validity strip"
            )));
        }
    }
    if zetas.is_empty() {
        return Ok(DiscreteSpectrum::default());
    }
    let chain = StepChain::build(grid, scheme)?;
    let scale = sp.coeff_scale().max(1e-300);
    let mut pairs = zetas
        .par_iter()
        .map(|&zeta| {
            let jp = sequential_from_chain(&chain, grid, zeta)?;
            let da = sp.eval_a_deriv(zeta)?;
            let rho = if da.norm() < 1e-12 * scale {
                None
            } else {
                Some(jp.b / da)
            };
            Ok(DiscretePair {
                zeta,
                b: jp.b,
                rho,
                residual: sp.eval_a(zeta)?.norm() / scale,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    pairs.sort_by(|x, y| {
        x.zeta
            .im
            .partial_cmp(&y.zeta.im)
            .unwrap()
            .then(x.zeta.re.partial_cmp(&y.zeta.re).unwrap())
    });
    Ok(DiscreteSpectrum { pairs })
}
