//! Assembly of the discrete scattering coefficients: per-step transfer
//! factors accumulated by balanced product trees, extraction of a_N and b_N
//! with their exponent prefactors, continuous-spectrum evaluation, and the
//! O(N)-per-point sequential propagation used for norming constants and as
//! the slow cross-check.

use crate::error::{Result, ZsError};
use crate::polyalg::{powi, tree_product, tree_product_scalar, LaurentPoly, PolyMat};
use crate::schemes::{build_step_tm, lmm_block_tm, lmm_coefficients, LmmCoefficients, SchemeId, StepTM};
use crate::signal::{Boundary, SignalGrid};
use crate::{Kappa, C64};
use rayon::prelude::*;

/// Per-step factors of one grid/scheme combination, built once and shared by
/// the fast (polynomial) and slow (per-point) pipelines.
pub enum StepChain {
    Rk { tms: Vec<StepTM> },
    Lmm {
        blocks: Vec<(PolyMat, C64)>,
        coeff: LmmCoefficients,
    },
}

impl StepChain {
    pub fn build(grid: &SignalGrid, scheme: SchemeId) -> Result<StepChain> {
        if grid.nu() != scheme.grid_nu() {
            return Err(ZsError::Grid(format!(
                "{scheme} runs on a nu = {} grid, got nu = {}",
                scheme.grid_nu(),
                grid.nu()
            )));
        }
        let h = grid.h();
        let kappa = grid.kappa();
        if scheme.is_rk() {
            let tms = (0..grid.n_seg())
                .into_par_iter()
                .map(|n| {
                    let scaled: Vec<C64> =
                        grid.step_samples(n).iter().map(|q| q * h).collect();
                    build_step_tm(scheme, &scaled, kappa)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(StepChain::Rk { tms })
        } else {
            let coeff = lmm_coefficients(scheme)?;
            let m = coeff.m();
            // The multistep start condition needs m vanishing samples to the
            // left; prepend them inside the computational window (shifting
            // the left endpoint bookkeeping by m steps).
            let mut padded = vec![C64::new(0.0, 0.0); m];
            padded.extend_from_slice(grid.samples());
            let blocks = (0..=grid.n_seg())
                .into_par_iter()
                .map(|n| {
                    let scaled: Vec<C64> =
                        padded[n..=n + m].iter().map(|q| q * h).collect();
                    lmm_block_tm(&coeff, &scaled, kappa)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(StepChain::Lmm { blocks, coeff })
        }
    }
}

/// Discrete scattering coefficients in polynomial form:
/// a(zeta) = P1(w) / D(w) and b(zeta) = z^{b_zpow} P2(w) / D(w) with
/// w = z^2, z = exp(i zeta h / z_den), valid for Re zeta in
/// [-pi/(2h), pi/(2h)].
#[derive(Debug, Clone)]
pub struct ScatteringPoly {
    pub p1: LaurentPoly,
    pub p2: LaurentPoly,
    pub denom: LaurentPoly,
    pub b_zpow: i64,
    pub h: f64,
    pub z_den: u32,
    pub nu: u32,
    pub n_seg: usize,
    pub kappa: Kappa,
    pub scheme: SchemeId,
}

impl ScatteringPoly {
    pub fn z_of(&self, zeta: C64) -> C64 {
        (C64::i() * zeta * self.h / self.z_den as f64).exp()
    }

    pub fn w_of(&self, zeta: C64) -> C64 {
        let z = self.z_of(zeta);
        z * z
    }

    /// Half-width of the spectral validity strip: Re zeta in [-xi_max, xi_max].
    pub fn xi_max(&self) -> f64 {
        std::f64::consts::PI / (2.0 * self.h)
    }

    /// Magnitude scale of the a-numerator coefficients.
    pub fn coeff_scale(&self) -> f64 {
        self.p1.max_coeff_norm()
    }

    pub fn eval_a(&self, zeta: C64) -> Result<C64> {
        let w = self.w_of(zeta);
        Ok(self.p1.eval(w)? / self.denom.eval(w)?)
    }

    pub fn eval_b(&self, zeta: C64) -> Result<C64> {
        let w = self.w_of(zeta);
        let z = self.z_of(zeta);
        Ok(powi(z, self.b_zpow) * self.p2.eval(w)? / self.denom.eval(w)?)
    }

    /// d a / d zeta through the chain rule in w.
    pub fn eval_a_deriv(&self, zeta: C64) -> Result<C64> {
        let w = self.w_of(zeta);
        let d = self.denom.eval(w)?;
        let dp = self.p1.derivative().eval(w)?;
        let dd = self.denom.derivative().eval(w)?;
        let da_dw = (dp * d - self.p1.eval(w)? * dd) / (d * d);
        let dw_dzeta = C64::i() * 2.0 * self.h / self.z_den as f64 * w;
        Ok(da_dw * dw_dzeta)
    }
}

/// Build the full scattering polynomials over a vanishing-boundary grid.
pub fn compute_scattering(grid: &SignalGrid, scheme: SchemeId) -> Result<ScatteringPoly> {
    if grid.boundary() != Boundary::Vanishing {
        return Err(ZsError::Unsupported(
            "scattering extraction needs a vanishing-boundary grid (periodic grids \
             go through the monodromy path)"
                .into(),
        ));
    }
    let chain = StepChain::build(grid, scheme)?;
    scattering_from_chain(&chain, grid, scheme)
}

pub fn scattering_from_chain(
    chain: &StepChain,
    grid: &SignalGrid,
    scheme: SchemeId,
) -> Result<ScatteringPoly> {
    match chain {
        StepChain::Rk { tms } => {
            let z_den = tms[0].z_den;
            let half_shift = tms[0].half_shift;
            let factors: Vec<PolyMat> = tms.iter().map(|t| t.m.clone()).collect();
            let prod = tree_product(&factors)?;
            let deltas: Vec<LaurentPoly> = tms.iter().map(|t| t.delta.clone()).collect();
            let denom = tree_product_scalar(&deltas)?;
            // Jost asymptotics: the per-step z^{-z_den} prefactors cancel the
            // plane-wave phases in a exactly; b keeps e^{-2 i zeta T2}, plus
            // one z^{+z_den} when the factors carry the half-step rotation.
            let b_zpow = -2 * z_den as i64 * grid.ell_plus()
                + if half_shift { z_den as i64 } else { 0 };
            Ok(ScatteringPoly {
                p1: prod.get(0, 0).clone(),
                p2: prod.get(1, 0).clone(),
                denom,
                b_zpow,
                h: grid.h(),
                z_den,
                nu: grid.nu(),
                n_seg: grid.n_seg(),
                kappa: grid.kappa(),
                scheme,
            })
        }
        StepChain::Lmm { blocks, coeff } => {
            let m = coeff.m();
            let factors: Vec<PolyMat> = blocks.iter().map(|(b, _)| b.clone()).collect();
            let prod = tree_product(&factors)?;
            let theta_prod = blocks
                .iter()
                .fold(C64::new(1.0, 0.0), |acc, (_, t)| acc * t);
            // Initial stacked history: plane-wave polynomials (1,0) repeated.
            let mut init = Vec::with_capacity(2 * m);
            for _ in 0..m {
                init.push(LaurentPoly::one());
                init.push(LaurentPoly::zero());
            }
            let out = prod.apply(&init);
            Ok(ScatteringPoly {
                p1: out[0].clone(),
                p2: out[1].clone(),
                denom: LaurentPoly::constant(theta_prod),
                b_zpow: -2 * grid.ell_plus(),
                h: grid.h(),
                z_den: 1,
                nu: grid.nu(),
                n_seg: grid.n_seg(),
                kappa: grid.kappa(),
                scheme,
            })
        }
    }
}

/// Continuous spectrum samples on the uniform strip grid
/// xi_k = (pi/h)(k/n_prime - 1/2).
#[derive(Debug, Clone)]
pub struct ContinuousSpectrum {
    pub xi: Vec<f64>,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    /// rho = b/a; NaN components mark nodes where |a| fell below 1e-12.
    pub rho: Vec<C64>,
}

/// Evaluate a, b, rho on the uniform xi grid by one FFT (or a chirp
/// transform when z_den * n_prime is not a power of two).
pub fn continuous_spectrum(sp: &ScatteringPoly, n_prime: usize) -> Result<ContinuousSpectrum> {
    if !n_prime.is_power_of_two() {
        return Err(ZsError::Size(format!("Nprime = {n_prime} must be a power of two")));
    }
    let m = n_prime * sp.z_den as usize;
    let needed = sp.p1.len().max(sp.p2.len()).max(sp.denom.len());
    if m < needed {
        return Err(ZsError::Size(format!(
            "Nprime = {n_prime} gives {m} circle nodes but the polynomials carry \
             {needed} coefficients"
        )));
    }
    // xi_k maps to w_k = exp(2 pi i (k - n_prime/2) / m): a contiguous arc of
    // the m-th roots of unity.
    let eval_all = |p: &LaurentPoly| -> Result<Vec<C64>> {
        if m.is_power_of_two() {
            let vals = p.eval_unit_circle(m)?;
            Ok((0..n_prime)
                .map(|k| vals[(k as i64 - n_prime as i64 / 2).rem_euclid(m as i64) as usize])
                .collect())
        } else {
            let a0 = C64::from_polar(1.0, -std::f64::consts::PI * n_prime as f64 / m as f64);
            let vals = crate::fft::eval_geometric(p.coeffs(), a0, m as u64, n_prime);
            // Reattach the base-exponent factor w_k^{lo}.
            Ok(vals
                .into_iter()
                .enumerate()
                .map(|(k, v)| {
                    let theta = std::f64::consts::TAU * (k as f64 - n_prime as f64 / 2.0)
                        / m as f64;
                    v * C64::from_polar(1.0, theta * p.lo() as f64)
                })
                .collect())
        }
    };
    let p1v = eval_all(&sp.p1)?;
    let p2v = eval_all(&sp.p2)?;
    let dv = eval_all(&sp.denom)?;
    let mut xi = Vec::with_capacity(n_prime);
    let mut av = Vec::with_capacity(n_prime);
    let mut bv = Vec::with_capacity(n_prime);
    let mut rv = Vec::with_capacity(n_prime);
    for k in 0..n_prime {
        let xi_k = std::f64::consts::PI / sp.h * (k as f64 / n_prime as f64 - 0.5);
        // z^{b_zpow} at real xi: a unit phase.
        let phase = C64::from_polar(1.0, sp.b_zpow as f64 * xi_k * sp.h / sp.z_den as f64);
        let a = p1v[k] / dv[k];
        let b = phase * p2v[k] / dv[k];
        let rho = if a.norm() < 1e-12 {
            C64::new(f64::NAN, f64::NAN)
        } else {
            b / a
        };
        xi.push(xi_k);
        av.push(a);
        bv.push(b);
        rv.push(rho);
    }
    Ok(ContinuousSpectrum { xi, a: av, b: bv, rho: rv })
}

/// Jost solution at T2 together with the scattering values at one spectral
/// point.
#[derive(Debug, Clone, Copy)]
pub struct JostPoint {
    /// phi(T2; zeta).
    pub phi: [C64; 2],
    pub a: C64,
    pub b: C64,
}

/// Propagate the left Jost solution step by step at fixed zeta; O(N) per
/// point. This is the norming-constant engine and the slow cross-check of
/// the polynomial pipeline.
pub fn sequential_jost(grid: &SignalGrid, scheme: SchemeId, zeta: C64) -> Result<JostPoint> {
    let chain = StepChain::build(grid, scheme)?;
    sequential_from_chain(&chain, grid, zeta)
}

pub fn sequential_from_chain(
    chain: &StepChain,
    grid: &SignalGrid,
    zeta: C64,
) -> Result<JostPoint> {
    let h = grid.h();
    let (a, b) = match chain {
        StepChain::Rk { tms } => {
            let z_den = tms[0].z_den;
            let half_shift = tms[0].half_shift;
            let z = (C64::i() * zeta * h / z_den as f64).exp();
            let w = z * z;
            let mut u = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
            for tm in tms {
                let vals = tm.m.eval(w)?;
                let d = tm.delta.eval(w)?;
                if d.norm() < 1e-13 {
                    return Err(ZsError::StepSize(format!(
                        "denominator vanished at zeta = {zeta}"
                    )));
                }
                u = [
                    (vals[0] * u[0] + vals[1] * u[1]) / d,
                    (vals[2] * u[0] + vals[3] * u[1]) / d,
                ];
            }
            let b_zpow = -2 * z_den as i64 * grid.ell_plus()
                + if half_shift { z_den as i64 } else { 0 };
            (u[0], u[1] * powi(z, b_zpow))
        }
        StepChain::Lmm { blocks, coeff } => {
            let m = coeff.m();
            let z = (C64::i() * zeta * h).exp();
            let w = z * z;
            let mut u = vec![C64::new(0.0, 0.0); 2 * m];
            for i in 0..m {
                u[2 * i] = C64::new(1.0, 0.0);
            }
            for (block, theta) in blocks {
                let vals = block.eval(w)?;
                let dim = 2 * m;
                let mut next = vec![C64::new(0.0, 0.0); dim];
                for i in 0..dim {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..dim {
                        acc += vals[i * dim + k] * u[k];
                    }
                    next[i] = acc / theta;
                }
                u = next;
            }
            (u[0], u[1] * powi(z, -2 * grid.ell_plus()))
        }
    };
    let i = C64::i();
    let phi = [
        a * (-i * zeta * grid.t2()).exp(),
        b * (i * zeta * grid.t2()).exp(),
    ];
    Ok(JostPoint { phi, a, b })
}
