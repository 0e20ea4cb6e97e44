//! One-step transfer factors for the Runge-Kutta family. Hand-coded closed
//! forms for the catalog methods, plus a determinant-based builder that
//! turns any tableau with equispaced nodes into a transfer factor by
//! evaluation-interpolation.

use super::tableau::{rat_to_f64, ButcherTableau};
use super::SchemeId;
use crate::error::{Result, ZsError};
use crate::linalg::{det_in_place, Mat2};
use crate::polyalg::{powi, LaurentPoly, PolyMat};
use crate::{Kappa, C64};

/// Relative size below which an out-of-window interpolation coefficient is
/// treated as rounding noise; anything larger trips a hard error.
const WINDOW_NOISE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoStageVariant {
    IiiA,
    IiiB,
}

/// One-step transfer factor: v_{n+1} = z^{zpow} M(w) / delta(w) v_n with
/// w = z^2 and z = exp(i zeta h / z_den). `half_shift` marks factors written
/// in half-step-rotated coordinates w_n = exp(i zeta sigma3 h/2) v_n (the
/// implicit midpoint form); the rotation is undone when a physical
/// propagator value is requested.
#[derive(Debug, Clone)]
pub struct StepTM {
    pub m: PolyMat,
    pub delta: LaurentPoly,
    pub zpow: i64,
    pub z_den: u32,
    pub half_shift: bool,
    pub scheme: SchemeId,
}

impl StepTM {
    /// Free propagation diag(1, w^{z_den}) with the method's prefactor.
    pub fn free(scheme: SchemeId, z_den: u32, half_shift: bool) -> StepTM {
        let one = C64::new(1.0, 0.0);
        StepTM {
            m: PolyMat::from_rows2(
                LaurentPoly::one(),
                LaurentPoly::zero(),
                LaurentPoly::zero(),
                LaurentPoly::monomial(one, z_den as i64),
            ),
            delta: LaurentPoly::one(),
            zpow: -(z_den as i64),
            z_den,
            half_shift,
            scheme,
        }
    }

    pub fn z(&self, zeta: C64, h: f64) -> C64 {
        (C64::i() * zeta * h / self.z_den as f64).exp()
    }

    /// Numerator matrix and denominator value at the spectral point zeta.
    pub fn eval_parts(&self, zeta: C64, h: f64) -> Result<(Mat2, C64)> {
        let w = self.z(zeta, h).powi(2);
        let vals = self.m.eval(w)?;
        let delta = self.delta.eval(w)?;
        Ok((Mat2::new(vals[0], vals[1], vals[2], vals[3]), delta))
    }

    /// Full one-step propagator value in the physical coordinates,
    /// prefactor and denominator included.
    pub fn propagator(&self, zeta: C64, h: f64) -> Result<Mat2> {
        let (m, delta) = self.eval_parts(zeta, h)?;
        if delta.norm() < 1e-300 {
            return Err(ZsError::StepSize(format!(
                "one-step denominator vanished at zeta = {zeta}"
            )));
        }
        let z = self.z(zeta, h);
        let mut t = m.scaled(powi(z, self.zpow) / delta);
        if self.half_shift {
            // Undo w = e^{i zeta sigma3 h/2} v: the 12 entry gains
            // e^{-i zeta h}, the 21 entry e^{+i zeta h}.
            let e = (C64::i() * zeta * h).exp();
            t.0[0][1] /= e;
            t.0[1][0] *= e;
        }
        Ok(t)
    }
}

/// Implicit midpoint factor from the h-scaled midpoint sample.
pub fn step_tm_im(q_half: C64, kappa: Kappa) -> Result<StepTM> {
    let r_half = kappa.r_of_q(q_half);
    let theta = C64::new(1.0, 0.0) - 0.25 * q_half * r_half;
    if theta.norm() < 1e-12 {
        return Err(ZsError::StepSize(format!(
            "midpoint denominator Theta = {theta} vanished"
        )));
    }
    let two_minus = C64::new(2.0, 0.0) - theta;
    let m = PolyMat::from_rows2(
        LaurentPoly::constant(two_minus),
        LaurentPoly::monomial(q_half, 1),
        LaurentPoly::constant(r_half),
        LaurentPoly::monomial(two_minus, 1),
    );
    Ok(StepTM {
        m,
        delta: LaurentPoly::constant(theta),
        zpow: -1,
        z_den: 1,
        half_shift: true,
        scheme: SchemeId::Im,
    })
}

/// Inverse of the implicit-midpoint potential map H = R / (2 - Theta):
/// recovers the h-scaled sample R from the layer-peeling coefficient H.
pub fn recover_potential_im(h_coeff: C64, kappa: Kappa) -> Result<C64> {
    let k = kappa.sign();
    let disc = 1.0 - k * h_coeff.norm_sqr();
    if kappa == Kappa::Defocusing && disc <= 0.0 {
        return Err(ZsError::Domain(format!(
            "|H| = {} must be below 1 for kappa = +1",
            h_coeff.norm()
        )));
    }
    Ok(2.0 * h_coeff / (1.0 + disc.sqrt()))
}

/// Two-stage Lobatto factor; the numerator is shared, only the denominator
/// distinguishes IIIA from IIIB.
pub fn step_tm_two_stage(
    q_n: C64,
    q_np1: C64,
    variant: TwoStageVariant,
    kappa: Kappa,
) -> Result<StepTM> {
    let r_n = kappa.r_of_q(q_n);
    let r_np1 = kappa.r_of_q(q_np1);
    let one = C64::new(1.0, 0.0);
    let m = PolyMat::from_rows2(
        LaurentPoly::new(0, vec![one, 0.25 * q_np1 * r_n]),
        LaurentPoly::new(0, vec![0.5 * q_n, 0.5 * q_np1]),
        LaurentPoly::new(0, vec![0.5 * r_np1, 0.5 * r_n]),
        LaurentPoly::new(0, vec![0.25 * q_n * r_np1, one]),
    );
    let delta = match variant {
        TwoStageVariant::IiiA => one - 0.25 * q_np1 * r_np1,
        TwoStageVariant::IiiB => one - 0.25 * q_n * r_n,
    };
    if delta.norm() < 1e-12 {
        return Err(ZsError::StepSize(format!(
            "two-stage denominator Delta = {delta} vanished"
        )));
    }
    let scheme = match variant {
        TwoStageVariant::IiiA => SchemeId::LobattoIiia2,
        TwoStageVariant::IiiB => SchemeId::LobattoIiib2,
    };
    Ok(StepTM {
        m,
        delta: LaurentPoly::constant(delta),
        zpow: -1,
        z_den: 1,
        half_shift: false,
        scheme,
    })
}

/// Third-order Kutta factor (explicit; denominator 1, half-step nodes).
pub fn step_tm_rk3(q_n: C64, q_half: C64, q_np1: C64, kappa: Kappa) -> Result<StepTM> {
    let (r_n, r_half, r_np1) = (
        kappa.r_of_q(q_n),
        kappa.r_of_q(q_half),
        kappa.r_of_q(q_np1),
    );
    let one = C64::new(1.0, 0.0);
    let third = 1.0 / 3.0;
    let sixth = 1.0 / 6.0;
    let m11 = LaurentPoly::new(
        0,
        vec![
            one,
            third * (q_half * r_n + q_np1 * r_half),
            -sixth * q_np1 * r_n,
        ],
    );
    let m22 = LaurentPoly::new(
        0,
        vec![
            -sixth * q_n * r_np1,
            third * (q_n * r_half + q_half * r_np1),
            one,
        ],
    );
    let m12 = LaurentPoly::new(
        0,
        vec![
            sixth * q_n,
            2.0 * third * q_half + sixth * q_n * q_np1 * r_half,
            sixth * q_np1,
        ],
    );
    let m21 = LaurentPoly::new(
        0,
        vec![
            sixth * r_np1,
            2.0 * third * r_half + sixth * q_half * r_n * r_np1,
            sixth * r_n,
        ],
    );
    Ok(StepTM {
        m: PolyMat::from_rows2(m11, m12, m21, m22),
        delta: LaurentPoly::one(),
        zpow: -2,
        z_den: 2,
        half_shift: false,
        scheme: SchemeId::Rk3,
    })
}

/// Classical fourth-order factor (explicit; denominator 1, half-step nodes).
pub fn step_tm_rk4(q_n: C64, q_half: C64, q_np1: C64, kappa: Kappa) -> Result<StepTM> {
    let (r_n, r_half, r_np1) = (
        kappa.r_of_q(q_n),
        kappa.r_of_q(q_half),
        kappa.r_of_q(q_np1),
    );
    let one = C64::new(1.0, 0.0);
    let sixth = 1.0 / 6.0;
    let xi = one + 0.5 * q_half * r_half;
    let m11 = LaurentPoly::new(
        0,
        vec![
            one + sixth * q_half * r_half,
            sixth * (q_half * r_n + q_np1 * r_half),
            q_half * q_np1 * r_n * r_half / 24.0,
        ],
    );
    let m22 = LaurentPoly::new(
        0,
        vec![
            q_n * q_half * r_half * r_np1 / 24.0,
            sixth * (q_n * r_half + q_half * r_np1),
            one + sixth * q_half * r_half,
        ],
    );
    let m12 = LaurentPoly::new(
        0,
        vec![sixth * q_n * xi, 2.0 * q_half / 3.0, sixth * q_np1 * xi],
    );
    let m21 = LaurentPoly::new(
        0,
        vec![sixth * r_np1 * xi, 2.0 * r_half / 3.0, sixth * r_n * xi],
    );
    Ok(StepTM {
        m: PolyMat::from_rows2(m11, m12, m21, m22),
        delta: LaurentPoly::one(),
        zpow: -2,
        z_den: 2,
        half_shift: false,
        scheme: SchemeId::Rk4,
    })
}

/// Fourth-order Lobatto factor: numerator is a product of two printed
/// half-step matrices, the denominator a genuine Laurent polynomial in w
/// (stored with base exponent -1).
pub fn step_tm_lobatto4(
    q_n: C64,
    q_half: C64,
    q_np1: C64,
    variant: TwoStageVariant,
    kappa: Kappa,
) -> Result<StepTM> {
    let (r_n, r_half, r_np1) = (
        kappa.r_of_q(q_n),
        kappa.r_of_q(q_half),
        kappa.r_of_q(q_np1),
    );
    let one = C64::new(1.0, 0.0);
    let c12 = 1.0 / 12.0;
    let sixth = 1.0 / 6.0;
    let third = 1.0 / 3.0;
    let left = PolyMat::from_rows2(
        LaurentPoly::new(0, vec![one, c12 * q_np1 * r_half]),
        LaurentPoly::new(0, vec![third * q_half, sixth * q_np1]),
        LaurentPoly::new(0, vec![sixth * r_np1, third * r_half]),
        LaurentPoly::new(0, vec![c12 * r_np1 * q_half, one]),
    );
    let right = PolyMat::from_rows2(
        LaurentPoly::new(0, vec![one, c12 * r_n * q_half]),
        LaurentPoly::new(0, vec![sixth * q_n, third * q_half]),
        LaurentPoly::new(0, vec![third * r_half, sixth * r_n]),
        LaurentPoly::new(0, vec![c12 * q_n * r_half, one]),
    );
    let m = left.mul(&right);
    // Denominator: product of the two printed binomials minus the printed
    // cross term, expanded over w^{-1}, w^0, w^1.
    let delta = match variant {
        TwoStageVariant::IiiA => {
            let p1 = LaurentPoly::new(-1, vec![c12 * r_np1 * q_half, one]);
            let p2 = LaurentPoly::new(0, vec![one, c12 * q_np1 * r_half]);
            let q1 = LaurentPoly::new(-1, vec![2.0 * q_half, q_np1]);
            let q2 = LaurentPoly::new(0, vec![r_np1, 2.0 * r_half]);
            p1.mul(&p2).sub(&q1.mul(&q2).scaled(C64::new(1.0 / 36.0, 0.0)))
        }
        TwoStageVariant::IiiB => {
            let p1 = LaurentPoly::new(-1, vec![c12 * q_n * r_half, one]);
            let p2 = LaurentPoly::new(0, vec![one, c12 * q_half * r_n]);
            let q1 = LaurentPoly::new(0, vec![q_n, 2.0 * q_half]);
            let q2 = LaurentPoly::new(-1, vec![2.0 * r_half, r_n]);
            p1.mul(&p2).sub(&q1.mul(&q2).scaled(C64::new(1.0 / 36.0, 0.0)))
        }
    };
    let scheme = match variant {
        TwoStageVariant::IiiA => SchemeId::LobattoIiia4,
        TwoStageVariant::IiiB => SchemeId::LobattoIiib4,
    };
    Ok(StepTM {
        m,
        delta,
        zpow: -2,
        z_den: 2,
        half_shift: false,
        scheme,
    })
}

/// Six-stage fifth-order Kutta factor, produced by the generic builder
/// (stage values ordered as the tableau nodes 0, 1/4, 1/4, 1/2, 3/4, 1).
pub fn step_tm_rk6(q_stages: [C64; 6], kappa: Kappa) -> Result<StepTM> {
    let tab = super::tableau::tableau(SchemeId::Rk6)?;
    let mut tm = step_tm_generic_rk(&tab, &q_stages, kappa)?;
    tm.scheme = SchemeId::Rk6;
    Ok(tm)
}

/// Generic transfer-factor builder: the stage system is solved by Cramer's
/// rule, each determinant evaluated numerically at roots of unity and
/// interpolated back to Laurent coefficients by an inverse FFT. Entry
/// windows are pinned to the structural degree bound nu and anything
/// outside is checked to be rounding noise.
pub fn step_tm_generic_rk(tab: &ButcherTableau, qs: &[C64], kappa: Kappa) -> Result<StepTM> {
    let rs: Vec<C64> = qs.iter().map(|&q| kappa.r_of_q(q)).collect();
    generic_tm_from_qr(tab, qs, &rs)
}

/// Generic builder over independent stage data (q_k, r_k); the symmetry
/// reduction r = kappa conj(q) is applied by the public wrapper.
pub fn generic_tm_from_qr(tab: &ButcherTableau, qs: &[C64], rs: &[C64]) -> Result<StepTM> {
    let s = tab.stages();
    if qs.len() != s || rs.len() != s {
        return Err(ZsError::Catalog(format!(
            "expected {s} stage samples, got {} and {}",
            qs.len(),
            rs.len()
        )));
    }
    let nu = tab.nodes_denominator as i64;
    let z_den = tab.nodes_denominator;
    let scheme = SchemeId::Collocation(s as u32);
    if qs.iter().all(|q| q.norm_sqr() == 0.0) && rs.iter().all(|r| r.norm_sqr() == 0.0) {
        return Ok(StepTM::free(scheme, z_den, false));
    }
    let nodes = tab.node_indices();
    let a = tab.a_f64();
    let b = tab.b_f64();
    let dim = 2 * s;

    // Every determinant term pairs equally many stage q and r entries, so
    // its w-exponent is a signed sum of distinct node indices: the support
    // is contained in [-span, span]. The catalog methods stay within
    // [-nu, nu], but dense tableaux genuinely exceed it, so the honest
    // container is used and edge noise is trimmed afterwards.
    let span = nodes.iter().map(|&n| n as i64).sum::<i64>().max(nu);
    let k_fft = (2 * span as usize + 1).next_power_of_two();
    let mut v_delta = Vec::with_capacity(k_fft);
    let mut v_gamma = Vec::with_capacity(k_fft);
    let mut v_m11 = Vec::with_capacity(k_fft);
    let mut v_m22 = Vec::with_capacity(k_fft);
    let mut v_m12 = Vec::with_capacity(k_fft);
    let mut v_m21 = Vec::with_capacity(k_fft);

    let mut scratch = vec![C64::new(0.0, 0.0); dim * dim];
    for j in 0..k_fft {
        let w = C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / k_fft as f64);
        // Per-stage scattering entries at this node.
        let qw: Vec<C64> = (0..s).map(|k| qs[k] * powi(w, nodes[k] as i64)).collect();
        let rw: Vec<C64> = (0..s).map(|k| rs[k] * powi(w, -(nodes[k] as i64))).collect();

        // weight(i, k) fills the 2x2 block (i, k) of I - P D for the matrix
        // P = X tensor sigma0 plus an optional rank-structure correction.
        let mut fill = |f: &dyn Fn(usize, usize) -> (f64, f64, f64, f64)| -> C64 {
            scratch.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
            for i in 0..dim {
                scratch[i * dim + i] = C64::new(1.0, 0.0);
            }
            for i in 0..s {
                for k in 0..s {
                    // Block (i,k) of the subtracted matrix: coefficients of
                    // (Q_k-entry at (0,1), R_k-entry at (1,0), and the
                    // E-projected variants landing on rows 0/1.
                    let (c_q_row0, c_r_row1, c_q_row1, c_r_row0) = f(i, k);
                    // (row 2i, col 2k+1): coefficient times Q_k w^{n_k}
                    scratch[(2 * i) * dim + 2 * k + 1] -= c_q_row0 * qw[k];
                    // (row 2i+1, col 2k): coefficient times R_k w^{-n_k}
                    scratch[(2 * i + 1) * dim + 2 * k] -= c_r_row1 * rw[k];
                    // E21/E12 projections move the stage entries across rows.
                    scratch[(2 * i + 1) * dim + 2 * k + 1] -= c_q_row1 * qw[k];
                    scratch[(2 * i) * dim + 2 * k] -= c_r_row0 * rw[k];
                }
            }
            det_in_place(&mut scratch, dim)
        };

        // Delta = det(I - (A x sigma0) D).
        v_delta.push(fill(&|i, k| (a[i][k], a[i][k], 0.0, 0.0)));
        // Gamma = I - ((A - 1 b^T) x sigma0) D.
        let g = |i: usize, k: usize| a[i][k] - b[k];
        v_gamma.push(fill(&|i, k| (g(i, k), g(i, k), 0.0, 0.0)));
        // M11: Gamma minus (1 b^T x E22) D; E22 U_k keeps only the R row.
        v_m11.push(fill(&|i, k| (g(i, k), g(i, k) + b[k], 0.0, 0.0)));
        // M22 (before the w^nu shift): E11 U_k keeps only the Q row.
        v_m22.push(fill(&|i, k| (g(i, k) + b[k], g(i, k), 0.0, 0.0)));
        // M12 subtraction term: E21 U_k moves the Q entry to the odd row.
        v_m12.push(fill(&|i, k| (g(i, k), g(i, k), b[k], 0.0)));
        // M21 subtraction term: E12 U_k moves the R entry to the even row.
        v_m21.push(fill(&|i, k| (g(i, k), g(i, k), 0.0, b[k])));
    }

    let delta = if tab.is_explicit() {
        LaurentPoly::one()
    } else if let Some(diag) = tab.lower_triangular_diag() {
        // Block-lower-triangular stage matrix: the determinant is the
        // product of the 2x2 diagonal blocks, det(I - a_kk U_k) =
        // 1 - a_kk^2 Q_k R_k, independent of w.
        let mut prod = C64::new(1.0, 0.0);
        for (k, akk) in diag.iter().enumerate() {
            let av = rat_to_f64(akk);
            prod *= C64::new(1.0, 0.0) - av * av * qs[k] * rs[k];
        }
        LaurentPoly::constant(prod)
    } else {
        interpolate_window(&v_delta, -nu, nu, "Delta")?
    };

    let gamma = interpolate_window(&v_gamma, -nu, nu, "det Gamma")?;
    let m11 = interpolate_window(&v_m11, 0, nu, "M11")?;
    let m22 = interpolate_window(&v_m22, -nu, 0, "M22")?.shifted(nu);
    let m12 = {
        let sub = interpolate_window(&v_m12, -nu, nu, "M12 minor")?;
        window_check(&gamma.sub(&sub), 0, nu, "M12")?
    };
    let m21 = {
        let sub = interpolate_window(&v_m21, -nu, nu, "M21 minor")?;
        window_check(&gamma.sub(&sub), -nu, 0, "M21")?.shifted(nu)
    };

    Ok(StepTM {
        m: PolyMat::from_rows2(m11, m12, m21, m22),
        delta,
        zpow: -nu,
        z_den,
        half_shift: false,
        scheme,
    })
}

/// Inverse FFT of unit-circle samples, unwrapped into the Laurent window
/// [lo, hi]; off-window content must be rounding noise.
fn interpolate_window(values: &[C64], lo: i64, hi: i64, what: &str) -> Result<LaurentPoly> {
    let k = values.len() as i64;
    debug_assert!(hi - lo + 1 <= k);
    let mut buf = values.to_vec();
    crate::fft::fft_forward(&mut buf);
    let scale = 1.0 / k as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
    // Coefficient of w^e sits at index e mod K. The sampling width leaves at
    // least a band of width 2*hi-lo... beyond the window; inspect all slots.
    let max_mag = buf.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-30);
    let mut coeffs = vec![C64::new(0.0, 0.0); (hi - lo + 1) as usize];
    for e in lo..=hi {
        coeffs[(e - lo) as usize] = buf[e.rem_euclid(k) as usize];
    }
    // Everything not claimed by the window must be noise.
    let claimed: std::collections::HashSet<i64> = (lo..=hi).map(|e| e.rem_euclid(k)).collect();
    for (idx, v) in buf.iter().enumerate() {
        if !claimed.contains(&(idx as i64)) && v.norm() > WINDOW_NOISE_TOL * max_mag {
            return Err(ZsError::Eval(format!(
                "{what}: coefficient outside the structural window [{lo}, {hi}] \
                 (slot {idx}, magnitude {})",
                v.norm()
            )));
        }
    }
    Ok(LaurentPoly::new(lo, coeffs))
}

/// Assert a polynomial fits the window [lo, hi] up to rounding noise and
/// clip it to that window.
fn window_check(p: &LaurentPoly, lo: i64, hi: i64, what: &str) -> Result<LaurentPoly> {
    let scale = p.max_coeff_norm().max(1e-30);
    let mut coeffs = vec![C64::new(0.0, 0.0); (hi - lo + 1) as usize];
    for e in p.lo()..=p.hi() {
        let c = p.coeff(e);
        if e < lo || e > hi {
            if c.norm() > WINDOW_NOISE_TOL * scale {
                return Err(ZsError::Eval(format!(
                    "{what}: coefficient of w^{e} outside the structural window [{lo}, {hi}] \
                     (magnitude {})",
                    c.norm()
                )));
            }
        } else {
            coeffs[(e - lo) as usize] = c;
        }
    }
    Ok(LaurentPoly::new(lo, coeffs))
}
