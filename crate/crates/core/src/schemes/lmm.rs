//! Linear multistep discretizations: coefficient tables (explicit/implicit
//! Adams and BDF), zero-stability validation, and the one-block companion
//! transfer factor.

use super::tableau::{rat_to_f64, Rat};
use super::SchemeId;
use crate::error::{Result, ZsError};
use crate::polyalg::{LaurentPoly, PolyMat};
use crate::roots::poly_roots;
use crate::{Kappa, C64};
use num_bigint::BigInt;
use num_traits::{One, Zero};

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LmmFamily {
    ExplicitAdams,
    ImplicitAdams,
    Bdf,
}

/// m-step method sum_s alpha_s v_{n+s} = h sum_s beta_s f_{n+s} with
/// alpha_m = 1. The generating polynomial of alpha must satisfy the root
/// condition; checked numerically at construction.
#[derive(Debug, Clone)]
pub struct LmmCoefficients {
    pub alpha: Vec<Rat>,
    pub beta: Vec<Rat>,
    pub order: u32,
    pub family: LmmFamily,
}

impl LmmCoefficients {
    fn new(alpha: Vec<Rat>, beta: Vec<Rat>, order: u32, family: LmmFamily) -> Result<Self> {
        if alpha.len() != beta.len() || alpha.len() < 2 {
            return Err(ZsError::Catalog("ragged multistep table".into()));
        }
        if !alpha.last().unwrap().is_one() {
            return Err(ZsError::Catalog("multistep tables are normalized to alpha_m = 1".into()));
        }
        let c = LmmCoefficients { alpha, beta, order, family };
        c.check_root_condition()?;
        Ok(c)
    }

    pub fn m(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn alpha_f64(&self) -> Vec<f64> {
        self.alpha.iter().map(rat_to_f64).collect()
    }

    pub fn beta_f64(&self) -> Vec<f64> {
        self.beta.iter().map(rat_to_f64).collect()
    }

    /// Zero stability: roots of the generating polynomial lie in the closed
    /// unit disk and the ones on the circle are simple.
    fn check_root_condition(&self) -> Result<()> {
        let coeffs: Vec<C64> = self
            .alpha
            .iter()
            .map(|a| C64::new(rat_to_f64(a), 0.0))
            .collect();
        let roots = poly_roots(&coeffs)?;
        for r in &roots {
            if r.norm() > 1.0 + 1e-10 {
                return Err(ZsError::Catalog(format!(
                    "zero-stability violated: generating-polynomial root {r} outside the unit disk"
                )));
            }
        }
        let on_circle: Vec<&C64> = roots.iter().filter(|r| r.norm() > 1.0 - 1e-6).collect();
        for (i, a) in on_circle.iter().enumerate() {
            for b in &on_circle[i + 1..] {
                if (*a - *b).norm() < 1e-6 {
                    return Err(ZsError::Catalog(format!(
                        "zero-stability violated: repeated unit-circle root near {a}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Adams left-hand side: v_{n+m} - v_{n+m-1}.
fn adams_alpha(m: usize) -> Vec<Rat> {
    let mut alpha = vec![Rat::zero(); m + 1];
    alpha[m] = Rat::one();
    alpha[m - 1] = -Rat::one();
    alpha
}

/// Catalog of multistep coefficient tables.
pub fn lmm_coefficients(scheme: SchemeId) -> Result<LmmCoefficients> {
    match scheme {
        SchemeId::ExplicitAdams(m) => {
            let beta: Vec<Rat> = match m {
                1 => vec![rat(1, 1), rat(0, 1)],
                2 => vec![rat(-1, 2), rat(3, 2), rat(0, 1)],
                3 => vec![rat(5, 12), rat(-16, 12), rat(23, 12), rat(0, 1)],
                4 => vec![
                    rat(-9, 24),
                    rat(37, 24),
                    rat(-59, 24),
                    rat(55, 24),
                    rat(0, 1),
                ],
                5 => vec![
                    rat(251, 720),
                    rat(-1274, 720),
                    rat(2616, 720),
                    rat(-2774, 720),
                    rat(1901, 720),
                    rat(0, 1),
                ],
                _ => return Err(ZsError::Catalog("explicit Adams catalog covers ea1..ea5".into())),
            };
            LmmCoefficients::new(adams_alpha(m as usize), beta, m, LmmFamily::ExplicitAdams)
        }
        SchemeId::ImplicitAdams(m) => {
            let beta: Vec<Rat> = match m {
                1 => vec![rat(1, 2), rat(1, 2)],
                2 => vec![rat(-1, 12), rat(8, 12), rat(5, 12)],
                3 => vec![rat(1, 24), rat(-5, 24), rat(19, 24), rat(9, 24)],
                4 => vec![
                    rat(-19, 720),
                    rat(106, 720),
                    rat(-264, 720),
                    rat(646, 720),
                    rat(251, 720),
                ],
                _ => return Err(ZsError::Catalog("implicit Adams catalog covers ia1..ia4".into())),
            };
            LmmCoefficients::new(adams_alpha(m as usize), beta, m + 1, LmmFamily::ImplicitAdams)
        }
        SchemeId::Bdf(m) => {
            let (alpha, b): (Vec<Rat>, Rat) = match m {
                1 => (vec![rat(-1, 1), rat(1, 1)], rat(1, 1)),
                2 => (vec![rat(1, 3), rat(-4, 3), rat(1, 1)], rat(2, 3)),
                3 => (
                    vec![rat(-2, 11), rat(9, 11), rat(-18, 11), rat(1, 1)],
                    rat(6, 11),
                ),
                4 => (
                    vec![
                        rat(3, 25),
                        rat(-16, 25),
                        rat(36, 25),
                        rat(-48, 25),
                        rat(1, 1),
                    ],
                    rat(12, 25),
                ),
                5 => (
                    vec![
                        rat(-12, 137),
                        rat(75, 137),
                        rat(-200, 137),
                        rat(300, 137),
                        rat(-300, 137),
                        rat(1, 1),
                    ],
                    rat(60, 137),
                ),
                6 => (
                    vec![
                        rat(10, 147),
                        rat(-72, 147),
                        rat(225, 147),
                        rat(-400, 147),
                        rat(450, 147),
                        rat(-360, 147),
                        rat(1, 1),
                    ],
                    rat(60, 147),
                ),
                _ => return Err(ZsError::Catalog("BDF catalog covers bdf1..bdf6".into())),
            };
            let mut beta = vec![Rat::zero(); m as usize + 1];
            beta[m as usize] = b;
            LmmCoefficients::new(alpha, beta, m, LmmFamily::Bdf)
        }
        _ => Err(ZsError::Catalog(format!("{scheme} is not a multistep method"))),
    }
}

/// One-block companion transfer factor: a 2m x 2m polynomial matrix whose
/// first block row holds -M^(1) .. -M^(m) and whose subdiagonal carries
/// Theta * I; the step recursion is W_{n+m} = (1/Theta) Block W_{n+m-1}.
/// `q_window` holds the m+1 h-scaled samples Q_n .. Q_{n+m}.
pub fn lmm_block_tm(
    coeff: &LmmCoefficients,
    q_window: &[C64],
    kappa: Kappa,
) -> Result<(PolyMat, C64)> {
    let m = coeff.m();
    if q_window.len() != m + 1 {
        return Err(ZsError::Catalog(format!(
            "block window needs {} samples, got {}",
            m + 1,
            q_window.len()
        )));
    }
    let alpha = coeff.alpha_f64();
    let beta = coeff.beta_f64();
    let rs: Vec<C64> = q_window.iter().map(|&q| kappa.r_of_q(q)).collect();
    let q_m = q_window[m];
    let r_m = rs[m];
    let theta = C64::new(1.0, 0.0) - beta[m] * beta[m] * q_m * r_m;
    if theta.norm() < 1e-12 {
        return Err(ZsError::StepSize(format!(
            "block denominator Theta = {theta} vanished"
        )));
    }
    let mut block = PolyMat::zeros(2 * m);
    for s in 0..m {
        let j = (m - s) as i64;
        let (q_s, r_s) = (q_window[s], rs[s]);
        // Entries of M^(m-s); the block matrix stores their negation.
        let m11 = LaurentPoly::constant(C64::new(alpha[s], 0.0))
            .add(&LaurentPoly::monomial(-beta[m] * beta[s] * q_m * r_s, j));
        let m12 = LaurentPoly::constant(-beta[s] * q_s)
            .add(&LaurentPoly::monomial(beta[m] * alpha[s] * q_m, j));
        let m21 = LaurentPoly::constant(beta[m] * alpha[s] * r_m)
            .add(&LaurentPoly::monomial(-beta[s] * r_s, j));
        let m22 = LaurentPoly::constant(-beta[m] * beta[s] * q_s * r_m)
            .add(&LaurentPoly::monomial(C64::new(alpha[s], 0.0), j));
        let col = 2 * (j as usize - 1);
        let neg = C64::new(-1.0, 0.0);
        *block.get_mut(0, col) = m11.scaled(neg);
        *block.get_mut(0, col + 1) = m12.scaled(neg);
        *block.get_mut(1, col) = m21.scaled(neg);
        *block.get_mut(1, col + 1) = m22.scaled(neg);
    }
    for i in 1..m {
        *block.get_mut(2 * i, 2 * (i - 1)) = LaurentPoly::constant(theta);
        *block.get_mut(2 * i + 1, 2 * (i - 1) + 1) = LaurentPoly::constant(theta);
    }
    Ok((block, theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn bdf2_table_values() {
        let coeff = lmm_coefficients(SchemeId::Bdf(2)).unwrap();
        assert_eq!(coeff.alpha, vec![rat(1, 3), rat(-4, 3), rat(1, 1)]);
        assert_eq!(coeff.beta, vec![rat(0, 1), rat(0, 1), rat(2, 3)]);
        assert_eq!(coeff.order, 2);
    }

    /// sum_s alpha_s s^j = j sum_s beta_s s^{j-1} for j = 0..=order, checked
    /// in exact rational arithmetic. This pins every table entry.
    #[test]
    fn order_conditions_hold_for_whole_catalog() {
        let mut schemes: Vec<SchemeId> = Vec::new();
        schemes.extend((1..=5).map(SchemeId::ExplicitAdams));
        schemes.extend((1..=4).map(SchemeId::ImplicitAdams));
        schemes.extend((1..=6).map(SchemeId::Bdf));
        for id in schemes {
            let cf = lmm_coefficients(id).unwrap();
            for j in 0..=cf.order as usize {
                let mut lhs = Rat::zero();
                let mut rhs = Rat::zero();
                for s in 0..cf.alpha.len() {
                    let sp = |p: usize| -> Rat {
                        // s^p with 0^0 = 1.
                        if p == 0 {
                            Rat::one()
                        } else {
                            rat((s as i64).pow(p as u32), 1)
                        }
                    };
                    lhs += &cf.alpha[s] * sp(j);
                    if j >= 1 {
                        rhs += &cf.beta[s] * sp(j - 1) * rat(j as i64, 1);
                    }
                }
                assert_eq!(lhs, rhs, "{id} order condition j = {j}");
            }
        }
    }

    #[test]
    fn root_condition_rejects_unstable_table() {
        // alpha roots at 2 and 1: outside the disk.
        let alpha = vec![rat(2, 1), rat(-3, 1), rat(1, 1)];
        let beta = vec![rat(0, 1), rat(0, 1), rat(1, 1)];
        assert!(LmmCoefficients::new(alpha, beta, 1, LmmFamily::Bdf).is_err());
        // Double root at 1: on the circle but not simple.
        let alpha = vec![rat(1, 1), rat(-2, 1), rat(1, 1)];
        let beta = vec![rat(0, 1), rat(0, 1), rat(1, 1)];
        assert!(LmmCoefficients::new(alpha, beta, 1, LmmFamily::Bdf).is_err());
    }

    #[test]
    fn ea1_free_block_is_free_propagation() {
        let coeff = lmm_coefficients(SchemeId::ExplicitAdams(1)).unwrap();
        let (block, theta) = lmm_block_tm(&coeff, &[c(0.0, 0.0), c(0.0, 0.0)], Kappa::Focusing)
            .unwrap();
        assert_eq!(theta, c(1.0, 0.0));
        assert_eq!(block.dim(), 2);
        // First block row [[1, 0], [0, w]].
        assert_eq!(block.get(0, 0), &LaurentPoly::one());
        assert!(block.get(0, 1).is_zero());
        assert!(block.get(1, 0).is_zero());
        assert_eq!(block.get(1, 1), &LaurentPoly::monomial(c(1.0, 0.0), 1));
    }

    #[test]
    fn ia1_trapezoidal_block_matches_direct_inverse() {
        // One-step implicit Adams: Theta = 1 - Q_{n+1} R_{n+1} / 4 and the
        // block equals the directly inverted update matrix.
        let coeff = lmm_coefficients(SchemeId::ImplicitAdams(1)).unwrap();
        let q0 = c(0.31, -0.12);
        let q1 = c(-0.22, 0.4);
        let kappa = Kappa::Focusing;
        let (block, theta) = lmm_block_tm(&coeff, &[q0, q1], kappa).unwrap();
        let r0 = kappa.r_of_q(q0);
        let r1 = kappa.r_of_q(q1);
        assert!((theta - (c(1.0, 0.0) - 0.25 * q1 * r1)).norm() < 1e-15);
        // -M^(1) with alpha = (-1, 1), beta = (1/2, 1/2):
        // m11 = -(1 + (1/4) Q_{n+1} R_n w), m12 = -((1/2)Q_n + (1/2)Q_{n+1} w),
        // m21 = -((1/2)R_{n+1} + (1/2)R_n w), m22 = -((1/4)Q_n R_{n+1} + w).
        let want11 = LaurentPoly::new(0, vec![c(1.0, 0.0), 0.25 * q1 * r0]);
        let want12 = LaurentPoly::new(0, vec![0.5 * q0, 0.5 * q1]);
        let want21 = LaurentPoly::new(0, vec![0.5 * r1, 0.5 * r0]);
        let want22 = LaurentPoly::new(0, vec![0.25 * q0 * r1, c(1.0, 0.0)]);
        for (got, want) in [
            (block.get(0, 0), want11),
            (block.get(0, 1), want12),
            (block.get(1, 0), want21),
            (block.get(1, 1), want22),
        ] {
            assert!(crate::polyalg::rel_coeff_distance(got, &want) < 1e-14);
        }
    }

    /// Every family form is a specialization of the same one-step inverse;
    /// check the assembled blocks against a direct numeric evaluation of
    /// (I - beta_m h U_{n+m})^{-1} e^{-i sigma3 zeta h (m-s)}
    /// (alpha_s I - beta_s h U_{n+s}) at random points on the unit circle.
    #[test]
    fn blocks_match_direct_inverse_at_unit_circle_points() {
        use crate::linalg::Mat2;
        let kappa = Kappa::Focusing;
        let qs: Vec<C64> = vec![
            c(0.21, 0.11),
            c(-0.05, 0.17),
            c(0.14, -0.23),
            c(0.02, 0.08),
        ];
        for id in [
            SchemeId::ExplicitAdams(3),
            SchemeId::ImplicitAdams(3),
            SchemeId::Bdf(3),
        ] {
            let coeff = lmm_coefficients(id).unwrap();
            let m = coeff.m();
            let (block, theta) = lmm_block_tm(&coeff, &qs[..=m], kappa).unwrap();
            let alpha = coeff.alpha_f64();
            let beta = coeff.beta_f64();
            let r_m = kappa.r_of_q(qs[m]);
            for t in 0..8 {
                let z = C64::from_polar(1.0, 0.39 * (t as f64 + 1.0));
                let w = z * z;
                let inv = Mat2::new(c(1.0, 0.0), beta[m] * qs[m], beta[m] * r_m, c(1.0, 0.0))
                    .scaled(theta.inv());
                for s in 0..m {
                    let j = m - s;
                    let r_s = kappa.r_of_q(qs[s]);
                    let diag = Mat2::diag(
                        crate::polyalg::powi(z, -(j as i64)),
                        crate::polyalg::powi(z, j as i64),
                    );
                    let upd = Mat2::new(
                        c(alpha[s], 0.0),
                        -beta[s] * qs[s],
                        -beta[s] * r_s,
                        c(alpha[s], 0.0),
                    );
                    let want = inv.mul(&diag).mul(&upd);
                    // Block stores -M^(j) and the relation carries
                    // z^{-j}/Theta: want = z^{-j}/Theta * M^(j).
                    let col = 2 * (j - 1);
                    let got = Mat2::new(
                        block.get(0, col).eval(w).unwrap(),
                        block.get(0, col + 1).eval(w).unwrap(),
                        block.get(1, col).eval(w).unwrap(),
                        block.get(1, col + 1).eval(w).unwrap(),
                    )
                    .scaled(-crate::polyalg::powi(z, -(j as i64)) / theta);
                    assert!(
                        want.sub(&got).max_norm() < 1e-13,
                        "{id} block {j} mismatch at t={t}"
                    );
                }
            }
        }
    }

    #[test]
    fn catalog_rational_sums() {
        // Adams tables integrate to one step: sum beta = 1.
        for id in (1..=5).map(SchemeId::ExplicitAdams).chain((1..=4).map(SchemeId::ImplicitAdams)) {
            let cf = lmm_coefficients(id).unwrap();
            let sum: Rat = cf.beta.iter().cloned().sum();
            assert!(sum.is_one(), "{id}");
        }
        let cf = lmm_coefficients(SchemeId::Bdf(3)).unwrap();
        assert_eq!(cf.beta.last().unwrap().to_f64().unwrap(), 6.0 / 11.0);
    }
}
