//! Butcher tableaux with exact rational entries, including collocation
//! tableaux integrated symbolically over the Lagrange basis.

use super::SchemeId;
use crate::error::{Result, ZsError};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// s-stage Runge-Kutta coefficient table. Entries are exact rationals and
/// are converted to floating point only at use sites.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    pub a: Vec<Vec<Rat>>,
    pub b: Vec<Rat>,
    pub c: Vec<Rat>,
    /// Nominal convergence order.
    pub order: u32,
    /// Denominator nu with every c_k = n_k / nu for integer n_k.
    pub nodes_denominator: u32,
}

impl ButcherTableau {
    fn new(a: Vec<Vec<Rat>>, b: Vec<Rat>, c: Vec<Rat>, order: u32) -> Result<Self> {
        let nodes_denominator = nodes_denominator(&c)?;
        let t = ButcherTableau { a, b, c, order, nodes_denominator };
        t.validate()?;
        Ok(t)
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    fn validate(&self) -> Result<()> {
        let s = self.stages();
        if self.a.len() != s || self.c.len() != s || self.a.iter().any(|row| row.len() != s) {
            return Err(ZsError::Catalog("ragged tableau".into()));
        }
        let sum: Rat = self.b.iter().cloned().sum();
        if !sum.is_one() {
            return Err(ZsError::Catalog(format!(
                "tableau weights must sum to 1, got {sum}"
            )));
        }
        for ck in &self.c {
            if ck.is_negative() || ck > &Rat::one() {
                return Err(ZsError::Catalog(format!("node {ck} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Integer stage-node numerators n_k = c_k * nu.
    pub fn node_indices(&self) -> Vec<u32> {
        let nu = BigInt::from(self.nodes_denominator);
        self.c
            .iter()
            .map(|ck| {
                let v = ck * Rat::from_integer(nu.clone());
                debug_assert!(v.is_integer());
                let (num, den) = (v.numer().clone(), v.denom().clone());
                let q = num / den;
                u32::try_from(q).expect("node index fits u32")
            })
            .collect()
    }

    pub fn a_f64(&self) -> Vec<Vec<f64>> {
        self.a
            .iter()
            .map(|row| row.iter().map(rat_to_f64).collect())
            .collect()
    }

    pub fn b_f64(&self) -> Vec<f64> {
        self.b.iter().map(rat_to_f64).collect()
    }

    pub fn c_f64(&self) -> Vec<f64> {
        self.c.iter().map(rat_to_f64).collect()
    }

    /// True when A is (strictly) lower triangular, i.e. the stage system is
    /// explicit and the one-step denominator is identically 1.
    pub fn is_explicit(&self) -> bool {
        self.a
            .iter()
            .enumerate()
            .all(|(j, row)| row.iter().skip(j).all(|x| x.is_zero()))
    }

    /// Diagonal of A when A is lower triangular (diagonally implicit);
    /// the one-step denominator is then a constant product over stages.
    pub fn lower_triangular_diag(&self) -> Option<Vec<Rat>> {
        let lower = self
            .a
            .iter()
            .enumerate()
            .all(|(j, row)| row.iter().skip(j + 1).all(|x| x.is_zero()));
        if lower {
            Some((0..self.stages()).map(|j| self.a[j][j].clone()).collect())
        } else {
            None
        }
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    // Catalog denominators are tiny; the ratio of the f64-converted parts is
    // exact to one rounding.
    let n = r.numer().to_string().parse::<f64>().unwrap();
    let d = r.denom().to_string().parse::<f64>().unwrap();
    n / d
}

fn nodes_denominator(c: &[Rat]) -> Result<u32> {
    let mut nu: BigInt = BigInt::one();
    for ck in c {
        nu = num_integer::lcm(nu, ck.denom().clone());
    }
    u32::try_from(nu).map_err(|_| ZsError::Catalog("node denominator overflow".into()))
}

/// Exact coefficients of the named method.
pub fn tableau(method: SchemeId) -> Result<ButcherTableau> {
    match method {
        SchemeId::Im => ButcherTableau::new(
            vec![vec![rat(1, 2)]],
            vec![rat(1, 1)],
            vec![rat(1, 2)],
            2,
        ),
        SchemeId::LobattoIiia2 => ButcherTableau::new(
            vec![vec![rat(0, 1), rat(0, 1)], vec![rat(1, 2), rat(1, 2)]],
            vec![rat(1, 2), rat(1, 2)],
            vec![rat(0, 1), rat(1, 1)],
            2,
        ),
        SchemeId::LobattoIiib2 => ButcherTableau::new(
            vec![vec![rat(1, 2), rat(0, 1)], vec![rat(1, 2), rat(0, 1)]],
            vec![rat(1, 2), rat(1, 2)],
            vec![rat(0, 1), rat(1, 1)],
            2,
        ),
        SchemeId::Rk3 => ButcherTableau::new(
            vec![
                vec![rat(0, 1), rat(0, 1), rat(0, 1)],
                vec![rat(1, 2), rat(0, 1), rat(0, 1)],
                vec![rat(-1, 1), rat(2, 1), rat(0, 1)],
            ],
            vec![rat(1, 6), rat(2, 3), rat(1, 6)],
            vec![rat(0, 1), rat(1, 2), rat(1, 1)],
            3,
        ),
        SchemeId::LobattoIiia4 => ButcherTableau::new(
            vec![
                vec![rat(0, 1), rat(0, 1), rat(0, 1)],
                vec![rat(5, 24), rat(1, 3), rat(-1, 24)],
                vec![rat(1, 6), rat(2, 3), rat(1, 6)],
            ],
            vec![rat(1, 6), rat(2, 3), rat(1, 6)],
            vec![rat(0, 1), rat(1, 2), rat(1, 1)],
            4,
        ),
        SchemeId::LobattoIiib4 => ButcherTableau::new(
            vec![
                vec![rat(1, 6), rat(-1, 6), rat(0, 1)],
                vec![rat(1, 6), rat(1, 3), rat(0, 1)],
                vec![rat(1, 6), rat(5, 6), rat(0, 1)],
            ],
            vec![rat(1, 6), rat(2, 3), rat(1, 6)],
            vec![rat(0, 1), rat(1, 2), rat(1, 1)],
            4,
        ),
        SchemeId::Rk4 => ButcherTableau::new(
            vec![
                vec![rat(0, 1), rat(0, 1), rat(0, 1), rat(0, 1)],
                vec![rat(1, 2), rat(0, 1), rat(0, 1), rat(0, 1)],
                vec![rat(0, 1), rat(1, 2), rat(0, 1), rat(0, 1)],
                vec![rat(0, 1), rat(0, 1), rat(1, 1), rat(0, 1)],
            ],
            vec![rat(1, 6), rat(1, 3), rat(1, 3), rat(1, 6)],
            vec![rat(0, 1), rat(1, 2), rat(1, 2), rat(1, 1)],
            4,
        ),
        // 6-stage explicit Kutta method; converges at order 5.
        SchemeId::Rk6 => ButcherTableau::new(
            vec![
                vec![rat(0, 1); 6],
                vec![rat(1, 4), rat(0, 1), rat(0, 1), rat(0, 1), rat(0, 1), rat(0, 1)],
                vec![rat(1, 8), rat(1, 8), rat(0, 1), rat(0, 1), rat(0, 1), rat(0, 1)],
                vec![rat(0, 1), rat(0, 1), rat(1, 2), rat(0, 1), rat(0, 1), rat(0, 1)],
                vec![
                    rat(3, 16),
                    rat(-3, 8),
                    rat(3, 8),
                    rat(9, 16),
                    rat(0, 1),
                    rat(0, 1),
                ],
                vec![
                    rat(-3, 7),
                    rat(8, 7),
                    rat(6, 7),
                    rat(-12, 7),
                    rat(8, 7),
                    rat(0, 1),
                ],
            ],
            vec![
                rat(7, 90),
                rat(0, 1),
                rat(16, 45),
                rat(2, 15),
                rat(16, 45),
                rat(7, 90),
            ],
            vec![
                rat(0, 1),
                rat(1, 4),
                rat(1, 4),
                rat(1, 2),
                rat(3, 4),
                rat(1, 1),
            ],
            5,
        ),
        SchemeId::Collocation(s) => collocation_tableau(s as usize),
        _ => Err(ZsError::Catalog(format!(
            "{method} is not a Runge-Kutta method"
        ))),
    }
}

/// Collocation tableau on the equispaced nodes c_k = (k-1)/(s-1):
/// a_jk = integral of the k-th Lagrange basis polynomial from 0 to c_j,
/// b_k = a_sk. Integrated exactly in rational arithmetic.
pub fn collocation_tableau(s: usize) -> Result<ButcherTableau> {
    if s < 2 {
        return Err(ZsError::Catalog(
            "collocation needs at least 2 stages".into(),
        ));
    }
    let c: Vec<Rat> = (0..s)
        .map(|k| Rat::new(BigInt::from(k), BigInt::from(s - 1)))
        .collect();
    // Antiderivatives of the Lagrange basis polynomials.
    let antiderivs: Vec<Vec<Rat>> = (0..s)
        .map(|k| {
            // Numerator prod_{n != k} (x - c_n), expanded; then divided by
            // prod_{n != k} (c_k - c_n) and integrated term by term.
            let mut num = vec![Rat::one()];
            let mut den = Rat::one();
            for n in 0..s {
                if n == k {
                    continue;
                }
                let mut next = vec![Rat::zero(); num.len() + 1];
                for (i, a) in num.iter().enumerate() {
                    next[i + 1] += a;
                    next[i] -= a * &c[n];
                }
                num = next;
                den *= &c[k] - &c[n];
            }
            let mut anti = vec![Rat::zero(); num.len() + 1];
            for (i, a) in num.iter().enumerate() {
                anti[i + 1] = a / (&den * Rat::from_integer(BigInt::from(i as i64 + 1)));
            }
            anti
        })
        .collect();
    let eval = |poly: &[Rat], x: &Rat| -> Rat {
        let mut acc = Rat::zero();
        for coef in poly.iter().rev() {
            acc = acc * x + coef;
        }
        acc
    };
    let a: Vec<Vec<Rat>> = (0..s)
        .map(|j| (0..s).map(|k| eval(&antiderivs[k], &c[j])).collect())
        .collect();
    let b: Vec<Rat> = a[s - 1].clone();
    let order = if s % 2 == 0 { s as u32 } else { s as u32 + 1 };
    ButcherTableau::new(a, b, c, order)
}
