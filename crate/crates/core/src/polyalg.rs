//! Polynomial arithmetic in the spectral variable w = z^2: Laurent
//! polynomials with complex coefficients, FFT multiplication, square
//! polynomial matrices, and balanced product trees.

use crate::error::{Result, ZsError};
use crate::fft;
use num_complex::Complex64;

/// Products whose output is shorter than this use schoolbook convolution;
/// FFT overhead dominates for tiny polynomials.
const FFT_CROSSOVER: usize = 32;

/// Subtrees with at least this many factors are multiplied on both rayon
/// branches. The combination tree is fixed by the factor count alone, so the
/// result does not depend on the thread count.
const PAR_CUTOFF: usize = 64;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Laurent polynomial sum_j coeffs[j] * w^{base+j}. The zero polynomial is
/// stored with an empty coefficient vector and base 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly {
    base: i64,
    coeffs: Vec<Complex64>,
}

impl LaurentPoly {
    pub fn new(base: i64, coeffs: Vec<Complex64>) -> Self {
        LaurentPoly { base, coeffs }.trimmed()
    }

    pub fn zero() -> Self {
        LaurentPoly { base: 0, coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(0, vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    /// c * w^k.
    pub fn monomial(c: Complex64, k: i64) -> Self {
        Self::new(k, vec![c])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn base(&self) -> i64 {
        self.base
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Number of stored coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent with a stored coefficient (base); 0 for the zero polynomial.
    pub fn lo(&self) -> i64 {
        self.base
    }

    /// Highest exponent with a stored coefficient; lo()-1... is avoided: 0 for zero.
    pub fn hi(&self) -> i64 {
        if self.coeffs.is_empty() {
            0
        } else {
            self.base + self.coeffs.len() as i64 - 1
        }
    }

    /// Coefficient of w^k (zero outside the stored window).
    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k - self.base;
        if idx < 0 || idx >= self.coeffs.len() as i64 {
            czero()
        } else {
            self.coeffs[idx as usize]
        }
    }

    /// Drop exact zeros at both ends of the window.
    fn trimmed(mut self) -> Self {
        let nz_lo = self.coeffs.iter().position(|c| *c != czero());
        match nz_lo {
            None => LaurentPoly::zero(),
            Some(lo) => {
                let hi = self.coeffs.iter().rposition(|c| *c != czero()).unwrap();
                self.coeffs.drain(hi + 1..);
                self.coeffs.drain(..lo);
                self.base += lo as i64;
                self
            }
        }
    }

    pub fn shifted(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        LaurentPoly { base: self.base + k, coeffs: self.coeffs.clone() }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        LaurentPoly {
            base: self.base,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
        .trimmed()
    }

    pub fn add(&self, other: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let lo = self.lo().min(other.lo());
        let hi = self.hi().max(other.hi());
        let mut coeffs = vec![czero(); (hi - lo + 1) as usize];
        for (j, c) in self.coeffs.iter().enumerate() {
            coeffs[(self.base - lo) as usize + j] += c;
        }
        for (j, c) in other.coeffs.iter().enumerate() {
            coeffs[(other.base - lo) as usize + j] += c;
        }
        LaurentPoly { base: lo, coeffs }.trimmed()
    }

    pub fn sub(&self, other: &LaurentPoly) -> LaurentPoly {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// Product, exact up to floating rounding. FFT of power-of-two size for
    /// long operands, schoolbook below the crossover. The result is truncated
    /// to its exact support (len_a + len_b - 1 coefficients).
    pub fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || other.is_zero() {
            return LaurentPoly::zero();
        }
        let la = self.coeffs.len();
        let lb = other.coeffs.len();
        let out_len = la + lb - 1;
        let base = self.base + other.base;
        let coeffs = if out_len < FFT_CROSSOVER || la.min(lb) <= 4 {
            let mut out = vec![czero(); out_len];
            for (i, a) in self.coeffs.iter().enumerate() {
                for (j, b) in other.coeffs.iter().enumerate() {
                    out[i + j] += a * b;
                }
            }
            out
        } else {
            let n = out_len.next_power_of_two();
            let mut fa = vec![czero(); n];
            let mut fb = vec![czero(); n];
            fa[..la].copy_from_slice(&self.coeffs);
            fb[..lb].copy_from_slice(&other.coeffs);
            fft::fft_forward(&mut fa);
            fft::fft_forward(&mut fb);
            for (x, y) in fa.iter_mut().zip(fb.iter()) {
                *x *= *y;
            }
            fft::fft_inverse(&mut fa);
            fa.truncate(out_len);
            fa
        };
        LaurentPoly { base, coeffs }.trimmed()
    }

    /// Horner evaluation including the base-exponent factor w^base.
    pub fn eval(&self, w: Complex64) -> Result<Complex64> {
        if self.is_zero() {
            return Ok(czero());
        }
        if w == czero() && self.base < 0 {
            return Err(ZsError::Eval(
                "zero argument with negative base exponent".into(),
            ));
        }
        let mut acc = czero();
        for c in self.coeffs.iter().rev() {
            acc = acc * w + c;
        }
        Ok(acc * powi(w, self.base))
    }

    /// Derivative with respect to w.
    pub fn derivative(&self) -> LaurentPoly {
        if self.is_zero() {
            return LaurentPoly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * Complex64::new((self.base + j as i64) as f64, 0.0))
            .collect();
        LaurentPoly { base: self.base - 1, coeffs }.trimmed()
    }

    /// Values at w = exp(2 pi i k/n), k ascending 0..n, via one FFT.
    /// The base exponent wraps exactly because w^n = 1 at every node.
    pub fn eval_unit_circle(&self, n: usize) -> Result<Vec<Complex64>> {
        if !n.is_power_of_two() {
            return Err(ZsError::Size(format!("evaluation size {n} is not a power of two")));
        }
        if n < self.coeffs.len() {
            return Err(ZsError::Size(format!(
                "evaluation size {n} is smaller than the coefficient count {}",
                self.coeffs.len()
            )));
        }
        let mut buf = vec![czero(); n];
        for (j, c) in self.coeffs.iter().enumerate() {
            let k = (self.base + j as i64).rem_euclid(n as i64) as usize;
            buf[k] += c;
        }
        fft::dft_eval(&mut buf);
        Ok(buf)
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sum of coefficient magnitudes.
    pub fn coeff_norm_l1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }
}

/// w^k for integer k. Exponents in this crate stay far below i32 range.
pub fn powi(w: Complex64, k: i64) -> Complex64 {
    debug_assert!(k.unsigned_abs() <= i32::MAX as u64);
    w.powi(k as i32)
}

/// Square matrix of Laurent polynomials, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMat {
    dim: usize,
    entries: Vec<LaurentPoly>,
}

impl PolyMat {
    pub fn zeros(dim: usize) -> Self {
        PolyMat {
            dim,
            entries: vec![LaurentPoly::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            *m.get_mut(i, i) = LaurentPoly::one();
        }
        m
    }

    /// 2x2 constructor in reading order.
    pub fn from_rows2(
        m11: LaurentPoly,
        m12: LaurentPoly,
        m21: LaurentPoly,
        m22: LaurentPoly,
    ) -> Self {
        PolyMat { dim: 2, entries: vec![m11, m12, m21, m22] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &LaurentPoly {
        &self.entries[i * self.dim + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut LaurentPoly {
        &mut self.entries[i * self.dim + j]
    }

    /// Matrix product self * other with poly_mul / poly-add on entries.
    pub fn mul(&self, other: &PolyMat) -> PolyMat {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = PolyMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = LaurentPoly::zero();
                for k in 0..n {
                    let p = self.get(i, k).mul(other.get(k, j));
                    acc = acc.add(&p);
                }
                *out.get_mut(i, j) = acc;
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[LaurentPoly]) -> Vec<LaurentPoly> {
        assert_eq!(self.dim, v.len());
        (0..self.dim)
            .map(|i| {
                let mut acc = LaurentPoly::zero();
                for k in 0..self.dim {
                    acc = acc.add(&self.get(i, k).mul(&v[k]));
                }
                acc
            })
            .collect()
    }

    pub fn scaled(&self, c: Complex64) -> PolyMat {
        PolyMat {
            dim: self.dim,
            entries: self.entries.iter().map(|p| p.scaled(c)).collect(),
        }
    }

    /// Multiply every entry by w^k.
    pub fn shifted(&self, k: i64) -> PolyMat {
        PolyMat {
            dim: self.dim,
            entries: self.entries.iter().map(|p| p.shifted(k)).collect(),
        }
    }

    /// Numeric evaluation of every entry at w.
    pub fn eval(&self, w: Complex64) -> Result<Vec<Complex64>> {
        self.entries.iter().map(|p| p.eval(w)).collect()
    }

    /// Smallest base exponent over the nonzero entries; all entries can be
    /// re-expressed over this shared base.
    pub fn shared_base(&self) -> i64 {
        self.entries
            .iter()
            .filter(|p| !p.is_zero())
            .map(|p| p.lo())
            .min()
            .unwrap_or(0)
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|p| p.max_coeff_norm())
            .fold(0.0, f64::max)
    }
}

/// Product of a factor chain in application order: the first slice element is
/// applied first, i.e. the result is factors[n-1] * ... * factors[0].
/// Balanced binary splitting; the combination tree depends only on the factor
/// count, so the output is identical for any thread count. Factor counts that
/// are not powers of two need no identity padding (an uneven split is the
/// same product).
pub fn tree_product(factors: &[PolyMat]) -> Result<PolyMat> {
    if factors.is_empty() {
        return Err(ZsError::Size("tree_product of an empty factor list".into()));
    }
    Ok(tree_product_rec(factors))
}

fn tree_product_rec(factors: &[PolyMat]) -> PolyMat {
    match factors.len() {
        1 => factors[0].clone(),
        2 => factors[1].mul(&factors[0]),
        n => {
            let (lo, hi) = factors.split_at(n / 2);
            let (pl, ph) = if n >= PAR_CUTOFF {
                rayon::join(|| tree_product_rec(lo), || tree_product_rec(hi))
            } else {
                (tree_product_rec(lo), tree_product_rec(hi))
            };
            ph.mul(&pl)
        }
    }
}

/// Product of scalar polynomials with the same balanced tree.
pub fn tree_product_scalar(factors: &[LaurentPoly]) -> Result<LaurentPoly> {
    if factors.is_empty() {
        return Err(ZsError::Size("tree_product of an empty factor list".into()));
    }
    Ok(tree_product_scalar_rec(factors))
}

fn tree_product_scalar_rec(factors: &[LaurentPoly]) -> LaurentPoly {
    match factors.len() {
        1 => factors[0].clone(),
        2 => factors[1].mul(&factors[0]),
        n => {
            let (lo, hi) = factors.split_at(n / 2);
            let (pl, ph) = if n >= PAR_CUTOFF {
                rayon::join(
                    || tree_product_scalar_rec(lo),
                    || tree_product_scalar_rec(hi),
                )
            } else {
                (tree_product_scalar_rec(lo), tree_product_scalar_rec(hi))
            };
            ph.mul(&pl)
        }
    }
}

/// Max coefficient difference relative to the larger coefficient scale;
/// test and diagnostics helper.
pub fn rel_coeff_distance(a: &LaurentPoly, b: &LaurentPoly) -> f64 {
    let scale = a.max_coeff_norm().max(b.max_coeff_norm());
    if scale == 0.0 {
        return 0.0;
    }
    let lo = a.lo().min(b.lo());
    let hi = a.hi().max(b.hi());
    let mut worst: f64 = 0.0;
    for k in lo..=hi {
        worst = worst.max((a.coeff(k) - b.coeff(k)).norm());
    }
    worst / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_poly(rng: &mut ChaCha8Rng, deg: usize, base: i64) -> LaurentPoly {
        let coeffs = (0..=deg)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        LaurentPoly::new(base, coeffs)
    }

    fn schoolbook(a: &LaurentPoly, b: &LaurentPoly) -> LaurentPoly {
        if a.is_zero() || b.is_zero() {
            return LaurentPoly::zero();
        }
        let mut out = vec![czero(); a.len() + b.len() - 1];
        for (i, x) in a.coeffs().iter().enumerate() {
            for (j, y) in b.coeffs().iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        LaurentPoly::new(a.lo() + b.lo(), out)
    }

    #[test]
    fn one_plus_w_times_one_minus_w() {
        let a = LaurentPoly::new(0, vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let b = LaurentPoly::new(0, vec![c(1.0, 0.0), c(-1.0, 0.0)]);
        let p = a.mul(&b);
        // (1+w)(1-w) = 1 - w^2, i.e. 1 - z^4 in the z variable.
        assert_eq!(p.coeff(0), c(1.0, 0.0));
        assert_eq!(p.coeff(1), c(0.0, 0.0));
        assert_eq!(p.coeff(2), c(-1.0, 0.0));
    }

    #[test]
    fn multiplicative_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_poly(&mut rng, 37, 0);
        let p = a.mul(&LaurentPoly::one());
        assert!(rel_coeff_distance(&a, &p) == 0.0);
    }

    #[test]
    fn fft_product_matches_schoolbook_deg100() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_poly(&mut rng, 100, -3);
        let b = random_poly(&mut rng, 100, 5);
        let fast = a.mul(&b);
        let slow = schoolbook(&a, &b);
        assert!(rel_coeff_distance(&fast, &slow) < 1e-12);
    }

    #[test]
    fn eval_examples() {
        // p = 1 - w^2 at w = 1 -> 0.
        let p = LaurentPoly::new(0, vec![c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        assert!(p.eval(c(1.0, 0.0)).unwrap().norm() < 1e-15);
        // p = w^{-1} (1 + w) at w = 2 -> 1.5.
        let p = LaurentPoly::new(-1, vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!((p.eval(c(2.0, 0.0)).unwrap() - c(1.5, 0.0)).norm() < 1e-15);
        // Negative base exponent at w = 0 is rejected.
        assert!(p.eval(czero()).is_err());
    }

    #[test]
    fn eval_random_matches_power_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let base = rng.gen_range(-5..5);
            let p = random_poly(&mut rng, 40, base);
            let w = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if w.norm() < 1e-3 {
                continue;
            }
            let naive: Complex64 = (p.lo()..=p.hi())
                .map(|k| p.coeff(k) * powi(w, k))
                .sum();
            let got = p.eval(w).unwrap();
            assert!((got - naive).norm() <= 1e-12 * naive.norm().max(1.0));
        }
    }

    #[test]
    fn unit_circle_constant_and_monomial() {
        let p = LaurentPoly::constant(c(2.5, -1.0));
        for v in p.eval_unit_circle(8).unwrap() {
            assert!((v - c(2.5, -1.0)).norm() < 1e-14);
        }
        // p = w with 4 nodes -> (1, i, -1, -i).
        let p = LaurentPoly::monomial(c(1.0, 0.0), 1);
        let vals = p.eval_unit_circle(4).unwrap();
        let want = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (v, w) in vals.iter().zip(want.iter()) {
            assert!((v - w).norm() < 1e-14);
        }
    }

    #[test]
    fn unit_circle_matches_horner_deg63() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let p = random_poly(&mut rng, 63, 0);
        let vals = p.eval_unit_circle(128).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 128.0);
            let want = p.eval(w).unwrap();
            assert!((v - want).norm() < 1e-12 * want.norm().max(1.0));
        }
    }

    #[test]
    fn unit_circle_size_checks() {
        let p = LaurentPoly::new(0, vec![c(1.0, 0.0); 10]);
        assert!(p.eval_unit_circle(8).is_err());
        assert!(p.eval_unit_circle(12).is_err());
        assert!(p.eval_unit_circle(16).is_ok());
    }

    #[test]
    fn matrix_identity_and_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = PolyMat::from_rows2(
            random_poly(&mut rng, 3, 0),
            random_poly(&mut rng, 3, 0),
            random_poly(&mut rng, 3, 0),
            random_poly(&mut rng, 3, 0),
        );
        let id = PolyMat::identity(2);
        let prod = a.mul(&id);
        for i in 0..2 {
            for j in 0..2 {
                assert!(rel_coeff_distance(prod.get(i, j), a.get(i, j)) < 1e-15);
            }
        }
        // Swap matrix squares to the identity.
        let swap = PolyMat::from_rows2(
            LaurentPoly::zero(),
            LaurentPoly::one(),
            LaurentPoly::one(),
            LaurentPoly::zero(),
        );
        let sq = swap.mul(&swap);
        for i in 0..2 {
            for j in 0..2 {
                assert!(rel_coeff_distance(sq.get(i, j), id.get(i, j)) < 1e-15);
            }
        }
    }

    #[test]
    fn matrix_product_matches_entrywise_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = PolyMat::from_rows2(
            random_poly(&mut rng, 8, 0),
            random_poly(&mut rng, 8, 0),
            random_poly(&mut rng, 8, 0),
            random_poly(&mut rng, 8, 0),
        );
        let b = PolyMat::from_rows2(
            random_poly(&mut rng, 8, 0),
            random_poly(&mut rng, 8, 0),
            random_poly(&mut rng, 8, 0),
            random_poly(&mut rng, 8, 0),
        );
        let prod = a.mul(&b);
        for i in 0..2 {
            for j in 0..2 {
                let want = schoolbook(a.get(i, 0), b.get(0, j))
                    .add(&schoolbook(a.get(i, 1), b.get(1, j)));
                assert!(rel_coeff_distance(prod.get(i, j), &want) < 1e-12);
            }
        }
    }

    #[test]
    fn tree_single_factor_is_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = PolyMat::from_rows2(
            random_poly(&mut rng, 2, 0),
            random_poly(&mut rng, 2, 0),
            random_poly(&mut rng, 2, 0),
            random_poly(&mut rng, 2, 0),
        );
        let p = tree_product(std::slice::from_ref(&a)).unwrap();
        assert_eq!(p, a);
    }

    #[test]
    fn tree_matches_sequential_constant_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let factors: Vec<PolyMat> = (0..4)
            .map(|_| {
                PolyMat::from_rows2(
                    random_poly(&mut rng, 0, 0),
                    random_poly(&mut rng, 0, 0),
                    random_poly(&mut rng, 0, 0),
                    random_poly(&mut rng, 0, 0),
                )
            })
            .collect();
        let tree = tree_product(&factors).unwrap();
        let mut seq = factors[0].clone();
        for f in &factors[1..] {
            seq = f.mul(&seq);
        }
        for i in 0..2 {
            for j in 0..2 {
                assert!(rel_coeff_distance(tree.get(i, j), seq.get(i, j)) < 1e-13);
            }
        }
    }

    #[test]
    fn tree_matches_sequential_256_deg1_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let factors: Vec<PolyMat> = (0..256)
            .map(|_| {
                PolyMat::from_rows2(
                    random_poly(&mut rng, 1, 0).scaled(c(0.5, 0.0)),
                    random_poly(&mut rng, 1, 0).scaled(c(0.5, 0.0)),
                    random_poly(&mut rng, 1, 0).scaled(c(0.5, 0.0)),
                    random_poly(&mut rng, 1, 0).scaled(c(0.5, 0.0)),
                )
            })
            .collect();
        let tree = tree_product(&factors).unwrap();
        let mut seq = factors[0].clone();
        for f in &factors[1..] {
            seq = f.mul(&seq);
        }
        for i in 0..2 {
            for j in 0..2 {
                assert!(rel_coeff_distance(tree.get(i, j), seq.get(i, j)) < 1e-10);
            }
        }
    }

    #[test]
    fn tree_invariant_under_identity_padding() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let factors: Vec<PolyMat> = (0..11)
            .map(|_| {
                PolyMat::from_rows2(
                    random_poly(&mut rng, 1, 0),
                    random_poly(&mut rng, 1, 0),
                    random_poly(&mut rng, 1, 0),
                    random_poly(&mut rng, 1, 0),
                )
            })
            .collect();
        let plain = tree_product(&factors).unwrap();
        // Right-padding with identities to the next power of two.
        let mut padded = factors.clone();
        while !padded.len().is_power_of_two() {
            padded.push(PolyMat::identity(2));
        }
        let with_pad = tree_product(&padded).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(rel_coeff_distance(plain.get(i, j), with_pad.get(i, j)) < 1e-12);
            }
        }
    }

    #[test]
    fn tree_degree_and_base_bookkeeping() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let factors: Vec<PolyMat> = (0..9)
            .map(|_| {
                let base = rng.gen_range(-2..3);
                PolyMat::from_rows2(
                    random_poly(&mut rng, 2, base),
                    LaurentPoly::zero(),
                    LaurentPoly::zero(),
                    random_poly(&mut rng, 1, base),
                )
            })
            .collect();
        let tree = tree_product(&factors).unwrap();
        let deg_sum: i64 = factors.iter().map(|f| f.get(0, 0).hi()).sum();
        let base_sum: i64 = factors.iter().map(|f| f.get(0, 0).lo()).sum();
        assert_eq!(tree.get(0, 0).hi(), deg_sum);
        assert_eq!(tree.get(0, 0).lo(), base_sum);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn mul_commutes(seed in 0u64..1u64 << 48, da in 0usize..256, db in 0usize..256) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (ba, bb) = (rng.gen_range(-4..4), rng.gen_range(-4..4));
            let a = random_poly(&mut rng, da, ba);
            let b = random_poly(&mut rng, db, bb);
            let ab = a.mul(&b);
            let ba = b.mul(&a);
            prop_assert!(rel_coeff_distance(&ab, &ba) < 1e-12);
        }

        #[test]
        fn mul_associates(seed in 0u64..1u64 << 48) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (da, db, dd) = (rng.gen_range(0..96), rng.gen_range(0..96), rng.gen_range(0..96));
            let a = random_poly(&mut rng, da, 0);
            let b = random_poly(&mut rng, db, -2);
            let d = random_poly(&mut rng, dd, 1);
            let left = a.mul(&b).mul(&d);
            let right = a.mul(&b.mul(&d));
            prop_assert!(rel_coeff_distance(&left, &right) < 1e-12);
        }

        #[test]
        fn add_then_eval_consistent(seed in 0u64..1u64 << 48) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (da, ba) = (rng.gen_range(0..40), rng.gen_range(-3..3));
            let (db, bb) = (rng.gen_range(0..40), rng.gen_range(-3..3));
            let a = random_poly(&mut rng, da, ba);
            let b = random_poly(&mut rng, db, bb);
            let w = Complex64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(-3.0..3.0));
            let lhs = a.add(&b).eval(w).unwrap();
            let rhs = a.eval(w).unwrap() + b.eval(w).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
        }
    }
}
