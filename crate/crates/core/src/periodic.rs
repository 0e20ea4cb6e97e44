//! Periodic boundary conditions: the monodromy matrix over one period in
//! polynomial form, the trace function, and the main spectrum (spectral
//! points with Bloch multiplier +1 or -1).

use crate::error::{Result, ZsError};
use crate::polyalg::{powi, tree_product, tree_product_scalar, LaurentPoly, PolyMat};
use crate::roots::{cluster_roots, poly_roots};
use crate::scattering::StepChain;
use crate::schemes::SchemeId;
use crate::signal::{Boundary, SignalGrid};
use crate::C64;

/// Monodromy over one period in the spectral variable:
/// Phi(zeta) = z^{-z_den N_seg} Num(w) / D(w), w = z^2.
#[derive(Debug, Clone)]
pub struct Monodromy {
    pub num: PolyMat,
    pub denom: LaurentPoly,
    pub z_den: u32,
    pub n_seg: usize,
    pub h: f64,
    half_shift: bool,
}

impl Monodromy {
    fn z_of(&self, zeta: C64) -> C64 {
        (C64::i() * zeta * self.h / self.z_den as f64).exp()
    }

    /// Full monodromy value at zeta (physical coordinates).
    pub fn eval(&self, zeta: C64) -> Result<[C64; 4]> {
        let z = self.z_of(zeta);
        let w = z * z;
        let d = self.denom.eval(w)?;
        let pre = powi(z, -(self.z_den as i64) * self.n_seg as i64) / d;
        let vals = self.num.eval(w)?;
        let mut out = [vals[0] * pre, vals[1] * pre, vals[2] * pre, vals[3] * pre];
        if self.half_shift {
            let e = (C64::i() * zeta * self.h).exp();
            out[1] /= e;
            out[2] *= e;
        }
        Ok(out)
    }

    /// trace Phi(zeta); invariant under the half-step rotation.
    pub fn trace(&self, zeta: C64) -> Result<C64> {
        let v = self.eval(zeta)?;
        Ok(v[0] + v[3])
    }

    pub fn det(&self, zeta: C64) -> Result<C64> {
        let v = self.eval(zeta)?;
        Ok(v[0] * v[3] - v[1] * v[2])
    }
}

/// Cumulative transfer factors over one period of a periodic grid, without
/// the vanishing-boundary prefactors. Runge-Kutta schemes only.
pub fn monodromy_poly(grid: &SignalGrid, scheme: SchemeId) -> Result<Monodromy> {
    if grid.boundary() != Boundary::Periodic {
        return Err(ZsError::Grid("monodromy needs a periodic grid".into()));
    }
    if scheme.is_lmm() {
        return Err(ZsError::Unsupported(format!(
            "{scheme}: multistep methods are not supported with periodic boundary \
             conditions (they would need a starting procedure)"
        )));
    }
    let chain = StepChain::build(grid, scheme)?;
    let StepChain::Rk { tms } = chain else { unreachable!() };
    let z_den = tms[0].z_den;
    let half_shift = tms[0].half_shift;
    let factors: Vec<PolyMat> = tms.iter().map(|t| t.m.clone()).collect();
    let num = tree_product(&factors)?;
    let deltas: Vec<LaurentPoly> = tms.iter().map(|t| t.delta.clone()).collect();
    let denom = tree_product_scalar(&deltas)?;
    Ok(Monodromy {
        num,
        denom,
        z_den,
        n_seg: grid.n_seg(),
        h: grid.h(),
        half_shift,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlochLabel {
    /// trace Phi = +2 (Bloch multiplier +1).
    Periodic,
    /// trace Phi = -2 (Bloch multiplier -1).
    Antiperiodic,
}

#[derive(Debug, Clone, Copy)]
pub struct MainSpectrumPoint {
    pub zeta: C64,
    pub label: BlochLabel,
    /// |trace Phi -+ 2| at the reported point.
    pub residual: f64,
    /// Set when the point sits at the edge of the validity strip, where the
    /// strip copy is ambiguous.
    pub boundary: bool,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Default)]
pub struct MainSpectrum {
    pub points: Vec<MainSpectrumPoint>,
}

/// Main spectrum from the monodromy polynomials: roots of
/// (Num11 + Num22)(w) -+ 2 w^{z_den N/2} D(w), clustered, polished with the
/// cluster multiplicity and mapped to the validity strip. Rational
/// denominators are opt-in through `main_spectrum_with`.
pub fn main_spectrum(mono: &Monodromy) -> Result<MainSpectrum> {
    main_spectrum_with(mono, false)
}

pub fn main_spectrum_with(mono: &Monodromy, allow_rational_denominator: bool) -> Result<MainSpectrum> {
    if mono.denom.len() > 1 && !allow_rational_denominator {
        return Err(ZsError::Unsupported(
            "main spectrum with a non-constant denominator is opt-in; enable \
             allow_rational_denominator"
                .into(),
        ));
    }
    let total = mono.z_den as i64 * mono.n_seg as i64;
    if total % 2 != 0 {
        return Err(ZsError::Grid(format!(
            "z_den * N_seg = {total} must be even to clear the trace prefactor"
        )));
    }
    let trace_num = mono.num.get(0, 0).add(mono.num.get(1, 1));
    let mut points = Vec::new();
    for (label, sign) in [(BlochLabel::Periodic, 1.0), (BlochLabel::Antiperiodic, -1.0)] {
        let shifted_d = mono
            .denom
            .shifted(total / 2)
            .scaled(C64::new(2.0 * sign, 0.0));
        let g = trace_num.sub(&shifted_d);
        // Common w^lo factors only move roots at the origin, which are
        // outside the model anyway.
        let coeffs = g.coeffs();
        if coeffs.len() <= 1 {
            continue;
        }
        let roots = poly_roots(coeffs)?;
        let kept: Vec<C64> = roots
            .into_iter()
            .filter(|w| w.norm() > 1e-12)
            .collect();
        // Band edges are generically tangencies: cluster first (the centroid
        // cancels the leading splitting error), then polish with the cluster
        // multiplicity.
        let clusters = cluster_roots(&kept, 1e-5);
        let dg = poly_derivative(coeffs);
        for (w0, mult) in clusters {
            let mut w = w0;
            for _ in 0..3 {
                let g_v = eval(coeffs, w);
                let dg_v = eval(&dg, w);
                if dg_v.norm() < 1e-300 {
                    break;
                }
                let step = g_v / dg_v * mult as f64;
                if step.norm() > 0.1 * (1.0 + w.norm()) {
                    break;
                }
                w -= step;
            }
            let arg_max = std::f64::consts::PI / mono.z_den as f64;
            let boundary = (w.arg().abs() - arg_max).abs() < 1e-6;
            if w.arg().abs() > arg_max + 1e-6 {
                continue;
            }
            let ln = C64::new(w.norm().ln(), w.arg());
            let zeta = mono.z_den as f64 * ln / (C64::i() * 2.0 * mono.h);
            let residual = (mono.trace(zeta)? - C64::new(2.0 * sign, 0.0)).norm();
            points.push(MainSpectrumPoint { zeta, label, residual, boundary, multiplicity: mult });
        }
    }
    points.sort_by(|a, b| {
        a.zeta
            .re
            .partial_cmp(&b.zeta.re)
            .unwrap()
            .then(a.zeta.im.partial_cmp(&b.zeta.im).unwrap())
    });
    Ok(MainSpectrum { points })
}

fn eval(coeffs: &[C64], x: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn poly_derivative(coeffs: &[C64]) -> Vec<C64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, c)| c * j as f64)
        .collect()
}
