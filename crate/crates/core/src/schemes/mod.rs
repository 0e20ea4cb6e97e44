//! Discretization catalog: one-step Runge-Kutta transfer matrices (hand-coded
//! closed forms plus a generic determinant-based builder) and linear
//! multistep one-block transfer factors, with exact-rational coefficient
//! tables.

mod lmm;
mod rk;
mod tableau;

pub use lmm::{lmm_block_tm, lmm_coefficients, LmmCoefficients, LmmFamily};
pub use rk::{
    generic_tm_from_qr, recover_potential_im, step_tm_generic_rk, step_tm_im, step_tm_lobatto4,
    step_tm_rk3, step_tm_rk4, step_tm_rk6, step_tm_two_stage, StepTM, TwoStageVariant,
};
pub use tableau::{collocation_tableau, tableau, ButcherTableau};

use crate::error::{Result, ZsError};
use crate::{Kappa, C64};

/// Discretization identifiers accepted throughout the crate and by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeId {
    Im,
    LobattoIiia2,
    LobattoIiib2,
    Rk3,
    LobattoIiia4,
    LobattoIiib4,
    Rk4,
    Rk6,
    /// Collocation at s equispaced nodes, s >= 2.
    Collocation(u32),
    /// m-step explicit Adams, 1 <= m <= 5.
    ExplicitAdams(u32),
    /// m-step implicit Adams, 1 <= m <= 4.
    ImplicitAdams(u32),
    /// m-step backward differentiation, 1 <= m <= 6.
    Bdf(u32),
}

impl SchemeId {
    pub fn name(&self) -> String {
        match self {
            SchemeId::Im => "im".into(),
            SchemeId::LobattoIiia2 => "lobatto-iiia2".into(),
            SchemeId::LobattoIiib2 => "lobatto-iiib2".into(),
            SchemeId::Rk3 => "rk3".into(),
            SchemeId::LobattoIiia4 => "lobatto-iiia4".into(),
            SchemeId::LobattoIiib4 => "lobatto-iiib4".into(),
            SchemeId::Rk4 => "rk4".into(),
            SchemeId::Rk6 => "rk6".into(),
            SchemeId::Collocation(s) => format!("coll{s}"),
            SchemeId::ExplicitAdams(m) => format!("ea{m}"),
            SchemeId::ImplicitAdams(m) => format!("ia{m}"),
            SchemeId::Bdf(m) => format!("bdf{m}"),
        }
    }

    pub fn parse(name: &str) -> Result<SchemeId> {
        let n = name.trim().to_ascii_lowercase();
        let id = match n.as_str() {
            "im" => SchemeId::Im,
            "lobatto-iiia2" | "liiia2" => SchemeId::LobattoIiia2,
            "lobatto-iiib2" | "liiib2" => SchemeId::LobattoIiib2,
            "rk3" => SchemeId::Rk3,
            "lobatto-iiia4" | "liiia4" => SchemeId::LobattoIiia4,
            "lobatto-iiib4" | "liiib4" => SchemeId::LobattoIiib4,
            "rk4" => SchemeId::Rk4,
            "rk6" => SchemeId::Rk6,
            _ => {
                let parse_idx = |prefix: &str| -> Option<u32> {
                    n.strip_prefix(prefix).and_then(|s| s.parse().ok())
                };
                if let Some(s) = parse_idx("coll") {
                    SchemeId::Collocation(s)
                } else if let Some(m) = parse_idx("ea") {
                    SchemeId::ExplicitAdams(m)
                } else if let Some(m) = parse_idx("ia") {
                    SchemeId::ImplicitAdams(m)
                } else if let Some(m) = parse_idx("bdf") {
                    SchemeId::Bdf(m)
                } else {
                    return Err(ZsError::Catalog(format!(
                        "unknown scheme `{name}`; available: {}",
                        Self::catalog_summary()
                    )));
                }
            }
        };
        id.validate()?;
        Ok(id)
    }

    fn validate(&self) -> Result<()> {
        match self {
            SchemeId::Collocation(s) if *s < 2 => Err(ZsError::Catalog(
                "collocation needs at least 2 stages".into(),
            )),
            SchemeId::ExplicitAdams(m) if !(1..=5).contains(m) => Err(ZsError::Catalog(
                "explicit Adams catalog covers ea1..ea5".into(),
            )),
            SchemeId::ImplicitAdams(m) if !(1..=4).contains(m) => Err(ZsError::Catalog(
                "implicit Adams catalog covers ia1..ia4".into(),
            )),
            SchemeId::Bdf(m) if !(1..=6).contains(m) => {
                Err(ZsError::Catalog("BDF catalog covers bdf1..bdf6".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn catalog_summary() -> String {
        "im, lobatto-iiia2, lobatto-iiib2, rk3, lobatto-iiia4, lobatto-iiib4, rk4, rk6, \
         coll<s>, ea<1-5>, ia<1-4>, bdf<1-6>"
            .into()
    }

    pub fn is_lmm(&self) -> bool {
        matches!(
            self,
            SchemeId::ExplicitAdams(_) | SchemeId::ImplicitAdams(_) | SchemeId::Bdf(_)
        )
    }

    pub fn is_rk(&self) -> bool {
        !self.is_lmm()
    }

    /// Substep count of the sampling grid this scheme runs on (the node
    /// denominator of its stage abscissae).
    pub fn grid_nu(&self) -> u32 {
        match self {
            SchemeId::Im => 2,
            SchemeId::LobattoIiia2 | SchemeId::LobattoIiib2 => 1,
            SchemeId::Rk3 | SchemeId::Rk4 | SchemeId::LobattoIiia4 | SchemeId::LobattoIiib4 => 2,
            SchemeId::Rk6 => 4,
            SchemeId::Collocation(s) => s - 1,
            _ => 1,
        }
    }

    /// Denominator of the spectral variable: the transfer factor is rational
    /// in w = z^2 with z = exp(i zeta h / z_den). The implicit midpoint
    /// factor is written in half-step-rotated coordinates and keeps z_den 1
    /// while sampling at midpoints.
    pub fn z_den(&self) -> u32 {
        match self {
            SchemeId::Im => 1,
            _ => self.grid_nu(),
        }
    }

    /// Nominal convergence order used by the benchmarking harness.
    pub fn nominal_order(&self) -> u32 {
        match self {
            SchemeId::Im | SchemeId::LobattoIiia2 | SchemeId::LobattoIiib2 => 2,
            SchemeId::Rk3 => 3,
            SchemeId::LobattoIiia4 | SchemeId::LobattoIiib4 | SchemeId::Rk4 => 4,
            // The 6-stage Kutta method converges at order 5.
            SchemeId::Rk6 => 5,
            SchemeId::Collocation(s) => {
                if s % 2 == 0 {
                    *s
                } else {
                    *s + 1
                }
            }
            SchemeId::ExplicitAdams(m) => *m,
            SchemeId::ImplicitAdams(m) => *m + 1,
            SchemeId::Bdf(m) => *m,
        }
    }
}

impl std::fmt::Display for SchemeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// One-step transfer factor for an RK-family scheme from the h-scaled
/// samples of one step (length grid_nu + 1, shared endpoints).
pub fn build_step_tm(scheme: SchemeId, q_step: &[C64], kappa: Kappa) -> Result<StepTM> {
    debug_assert_eq!(q_step.len() as u32, scheme.grid_nu() + 1);
    match scheme {
        SchemeId::Im => step_tm_im(q_step[1], kappa),
        SchemeId::LobattoIiia2 => {
            step_tm_two_stage(q_step[0], q_step[1], TwoStageVariant::IiiA, kappa)
        }
        SchemeId::LobattoIiib2 => {
            step_tm_two_stage(q_step[0], q_step[1], TwoStageVariant::IiiB, kappa)
        }
        SchemeId::Rk3 => step_tm_rk3(q_step[0], q_step[1], q_step[2], kappa),
        SchemeId::Rk4 => step_tm_rk4(q_step[0], q_step[1], q_step[2], kappa),
        SchemeId::LobattoIiia4 => {
            step_tm_lobatto4(q_step[0], q_step[1], q_step[2], TwoStageVariant::IiiA, kappa)
        }
        SchemeId::LobattoIiib4 => {
            step_tm_lobatto4(q_step[0], q_step[1], q_step[2], TwoStageVariant::IiiB, kappa)
        }
        SchemeId::Rk6 => step_tm_rk6(
            [
                q_step[0], q_step[1], q_step[1], q_step[2], q_step[3], q_step[4],
            ],
            kappa,
        ),
        SchemeId::Collocation(s) => {
            let tab = collocation_tableau(s as usize)?;
            let qs: Vec<C64> = tab
                .node_indices()
                .iter()
                .map(|&k| q_step[k as usize])
                .collect();
            step_tm_generic_rk(&tab, &qs, kappa)
        }
        _ => Err(ZsError::Unsupported(format!(
            "{scheme} is a multistep method; it has no one-step transfer factor"
        ))),
    }
}
