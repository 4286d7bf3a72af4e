//! Integer polynomials and the fast signature algorithm: `V_{q/p}` is
//! isomorphic to `Q[x]/P` with `x <-> e_1`, where `P` is the characteristic
//! polynomial of a tridiagonal sign matrix, and `Omega` is `-iota P'` there.
//! Signatures become traces of multiplication operators.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Error, Result};
use crate::numtheory::{check_odd_pair, eps_raw, SignSequence};

/// Dense polynomial with arbitrary-precision integer coefficients; index is
/// degree, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64s(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zero() -> Self {
        IntPolynomial { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    pub fn x() -> Self {
        Self::from_i64s(&[0, 1])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(One::is_one)
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// `x * self`.
    pub fn shift(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(BigInt::zero());
        c.extend(self.coeffs.iter().cloned());
        IntPolynomial { coeffs: c }
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// Largest absolute coefficient bit length; 0 for the zero polynomial.
    pub fn max_coeff_bits(&self) -> u64 {
        self.coeffs.iter().map(|c| c.bits()).max().unwrap_or(0)
    }

    /// Remainder modulo a monic polynomial.
    pub fn rem_monic(&self, m: &IntPolynomial) -> Result<IntPolynomial> {
        if !m.is_monic() {
            return Err(Error::NotMonic);
        }
        let d = m.degree().expect("monic is nonzero");
        let mut r = self.coeffs.clone();
        while r.len() > d {
            let top = r.len() - 1;
            let lead = std::mem::take(&mut r[top]);
            if !lead.is_zero() {
                let off = top - d;
                for (i, c) in m.coeffs[..d].iter().enumerate() {
                    if !c.is_zero() {
                        r[off + i] -= &lead * c;
                    }
                }
            }
            r.pop();
        }
        Ok(IntPolynomial::new(r))
    }

    /// `(self * other) mod m` for monic `m`.
    pub fn mul_mod(&self, other: &IntPolynomial, m: &IntPolynomial) -> Result<IntPolynomial> {
        (self * other).rem_monic(m)
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let show_mag = !mag.is_one() || i == 0;
            if show_mag {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => f.write_str("x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Add for &IntPolynomial {
    type Output = IntPolynomial;
    fn add(self, o: &IntPolynomial) -> IntPolynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        IntPolynomial::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &IntPolynomial {
    type Output = IntPolynomial;
    fn sub(self, o: &IntPolynomial) -> IntPolynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        IntPolynomial::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &IntPolynomial {
    type Output = IntPolynomial;
    fn mul(self, o: &IntPolynomial) -> IntPolynomial {
        if self.is_zero() || o.is_zero() {
            return IntPolynomial::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        IntPolynomial::new(out)
    }
}

impl Neg for &IntPolynomial {
    type Output = IntPolynomial;
    fn neg(self) -> IntPolynomial {
        IntPolynomial { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

/// The `(p-1) x (p-1)` matrix with ones below the diagonal and
/// `c_i = (-1)^(1 + floor((i+1)q/p) + floor((i+2)q/p))` above it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedTridiagonal {
    p: i64,
    q: i64,
    c: Vec<i8>,
}

impl SignedTridiagonal {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        check_odd_pair(q, p)?;
        let c = (0..p - 2).map(|i| -eps_raw(i + 1, q, p) * eps_raw(i + 2, q, p)).collect();
        Ok(SignedTridiagonal { p, q, c })
    }

    pub fn size(&self) -> usize {
        (self.p - 1) as usize
    }

    /// Super-diagonal `c_0 .. c_{p-3}`.
    pub fn super_diagonal(&self) -> &[i8] {
        &self.c
    }

    pub fn entry(&self, i: usize, j: usize) -> i8 {
        if j == i + 1 {
            self.c[i]
        } else if i == j + 1 {
            1
        } else {
            0
        }
    }

    /// `E_0 = 1, E_1 = x, E_{i+1} = x E_i - c_{i-1} E_{i-1}` for
    /// `i + 1 <= p - 1`. `E_k` is also the characteristic polynomial of the
    /// leading `k x k` block, so `E_{p-1} = P` and `E_{p-2} = iota`.
    pub fn recurrence_polys(&self) -> Vec<IntPolynomial> {
        let n = self.size();
        let mut out = Vec::with_capacity(n + 1);
        out.push(IntPolynomial::one());
        out.push(IntPolynomial::x());
        for i in 1..n {
            let next = &out[i].shift() - &out[i - 1].scale(&BigInt::from(self.c[i - 1]));
            out.push(next);
        }
        out
    }
}

/// `(P, iota)`: characteristic polynomials of the sign matrix and of its
/// leading `(p-2) x (p-2)` block.
pub fn charpoly_pair(p: i64, q: i64) -> Result<(IntPolynomial, IntPolynomial)> {
    let m = SignedTridiagonal::new(p, q)?;
    let mut e = m.recurrence_polys();
    let big_p = e.pop().expect("p - 1 >= 2");
    let iota = e.pop().expect("p - 2 >= 1");
    Ok((big_p, iota))
}

/// Power sums `s_k = sum of r^k` over the roots of a monic `m`, for
/// `k = 0 .. deg m - 1`, by Newton's identities.
fn power_sums(m: &IntPolynomial) -> Vec<BigInt> {
    let d = m.degree().expect("nonzero");
    // m = x^d + a_{d-1} x^{d-1} + ... ; write b_i = a_{d-i}
    let b: Vec<BigInt> = (0..=d).map(|i| m.coeff(d - i)).collect();
    let mut s = Vec::with_capacity(d);
    s.push(BigInt::from(d));
    for k in 1..d {
        let mut acc = -BigInt::from(k) * &b[k];
        for i in 1..k {
            acc -= &b[i] * &s[k - i];
        }
        s.push(acc);
    }
    s
}

/// Trace of `v -> A v` on `Q[x]/Q`. `Q` must be monic; the trace is then an
/// integer.
pub fn poly_mod_trace(a: &IntPolynomial, q: &IntPolynomial) -> Result<BigInt> {
    if !q.is_monic() {
        return Err(Error::NotMonic);
    }
    if q.degree() == Some(0) {
        return Err(invalid("modulus must have degree >= 1"));
    }
    let r = a.rem_monic(q)?;
    let s = power_sums(q);
    Ok(r.coeffs.iter().zip(&s).map(|(c, s)| c * s).sum())
}

/// Maximum genus accepted by the polynomial algorithm.
pub const MAX_GENUS: u32 = 10;

/// `-iota P' mod P`, the image of `Omega` in `Q[x]/P`.
pub fn omega_poly(p: i64, q: i64) -> Result<(IntPolynomial, IntPolynomial)> {
    let (big_p, iota) = charpoly_pair(p, q)?;
    let om = (&-&iota * &big_p.derivative()).rem_monic(&big_p)?;
    Ok((big_p, om))
}

fn check_genus(g: u32) -> Result<()> {
    if !(1..=MAX_GENUS).contains(&g) {
        return Err(invalid(format!("genus must be in 1..={MAX_GENUS}, got {g}")));
    }
    Ok(())
}

/// `sigma_g(q/p) = Tr(Omega^(g-1))` on `Q[x]/P`.
pub fn sigma_g_fast(p: i64, q: i64, g: u32) -> Result<BigInt> {
    sigma_gn_fast(p, q, g, &[])
}

/// `E_j`, the polynomial representing the basis vector `e_j`.
pub fn basis_poly(j: usize, p: i64, q: i64) -> Result<IntPolynomial> {
    let m = SignedTridiagonal::new(p, q)?;
    if j > m.size() - 1 {
        return Err(invalid(format!("color {j} outside 0..={}", m.size() - 1)));
    }
    Ok(m.recurrence_polys().swap_remove(j))
}

/// Coordinates of `r` (degree < p - 1) in the basis `E_0 .. E_{p-2}`.
pub fn to_e_basis(r: &IntPolynomial, basis: &[IntPolynomial]) -> Vec<BigInt> {
    let mut rest = r.clone();
    let mut out = vec![BigInt::zero(); basis.len()];
    while let Some(d) = rest.degree() {
        // E_d is monic of degree d
        let c = rest.coeff(d);
        rest = &rest - &basis[d].scale(&c);
        out[d] = c;
    }
    out
}

/// `sigma_{g,n}(q/p; lambdas)`: the trace of `Omega^(g-1) E_{l1} ... E_{ln}`
/// on `Q[x]/P`, with the color sign of
/// [`crate::verlinde::FrobeniusAlgebra::color_sign`].
pub fn sigma_gn_fast(p: i64, q: i64, g: u32, lambdas: &[usize]) -> Result<BigInt> {
    check_genus(g)?;
    let m = SignedTridiagonal::new(p, q)?;
    let polys = m.recurrence_polys();
    let n = m.size();
    if let Some(l) = lambdas.iter().find(|&&l| l >= n) {
        return Err(invalid(format!("color {l} outside 0..={}", n - 1)));
    }
    let big_p = &polys[n];
    let iota = &polys[n - 1];
    let om = (&-iota * &big_p.derivative()).rem_monic(big_p)?;
    let mut acc = IntPolynomial::one();
    for &l in lambdas {
        if l > 0 {
            acc = acc.mul_mod(&polys[l], big_p)?;
        }
    }
    for _ in 1..g {
        acc = acc.mul_mod(&om, big_p)?;
    }
    let t = poly_mod_trace(&acc, big_p)?;
    let s = SignSequence::new(q, p)?;
    let fs = s.factorial_signs();
    let total: usize = lambdas.iter().sum();
    let mut sign = if total % 4 == 2 { -1 } else { 1 };
    for &l in lambdas {
        sign *= fs[l] as i32;
    }
    Ok(t * sign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verlinde::FrobeniusAlgebra;
    use num_integer::Integer;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn odd_pairs(pmax: i64) -> impl Iterator<Item = (i64, i64)> {
        (3..=pmax)
            .step_by(2)
            .flat_map(|p| (1..p).step_by(2).filter(move |q| q.gcd(&p) == 1).map(move |q| (q, p)))
    }

    // Faddeev-LeVerrier over the rationals on the dense matrix.
    fn dense_charpoly(m: &SignedTridiagonal, n: usize) -> IntPolynomial {
        let a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| (0..n).map(|j| BigRational::from(BigInt::from(m.entry(i, j)))).collect())
            .collect();
        let matmul = |x: &Vec<Vec<BigRational>>, y: &Vec<Vec<BigRational>>| -> Vec<Vec<BigRational>> {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (0..n).fold(BigRational::zero(), |acc, k| acc + &x[i][k] * &y[k][j]))
                        .collect()
                })
                .collect()
        };
        let mut coeffs = vec![BigRational::zero(); n + 1];
        coeffs[n] = BigRational::one();
        let mut mk = vec![vec![BigRational::zero(); n]; n];
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{n-k+1} I
            let mut next = matmul(&a, &mk);
            for (i, row) in next.iter_mut().enumerate() {
                row[i] += &coeffs[n - k + 1];
            }
            mk = next;
            let am = matmul(&a, &mk);
            let tr = (0..n).fold(BigRational::zero(), |acc, i| acc + &am[i][i]);
            coeffs[n - k] = -tr / BigRational::from(BigInt::from(k));
        }
        IntPolynomial::new(coeffs.into_iter().map(|c| c.to_integer()).collect())
    }

    // The defining trace: sum_k [x^k](x^k A mod Q).
    fn literal_trace(a: &IntPolynomial, q: &IntPolynomial) -> BigInt {
        let d = q.degree().unwrap();
        let mut r = a.rem_monic(q).unwrap();
        let mut t = BigInt::zero();
        for k in 0..d {
            t += r.coeff(k);
            r = r.shift().rem_monic(q).unwrap();
        }
        t
    }

    #[test]
    fn charpoly_examples() {
        let (p, i) = charpoly_pair(3, 1).unwrap();
        assert_eq!((p.to_string(), i.to_string()), ("x^2 + 1".into(), "x".into()));
        let (p, i) = charpoly_pair(5, 1).unwrap();
        assert_eq!((p.to_string(), i.to_string()), ("x^4 + 3x^2 + 1".into(), "x^3 + 2x".into()));
        assert!(charpoly_pair(4, 1).is_err());
        assert!(charpoly_pair(9, 3).is_err());
    }

    #[test]
    fn charpoly_matches_dense_determinant() {
        for (q, p) in odd_pairs(15) {
            let m = SignedTridiagonal::new(p, q).unwrap();
            let (big_p, iota) = charpoly_pair(p, q).unwrap();
            assert!(big_p.is_monic() && big_p.degree() == Some((p - 1) as usize));
            assert_eq!(big_p, dense_charpoly(&m, (p - 1) as usize), "P for {q}/{p}");
            assert_eq!(iota, dense_charpoly(&m, (p - 2) as usize), "iota for {q}/{p}");
        }
    }

    #[test]
    fn trace_examples() {
        let q = IntPolynomial::from_i64s(&[1, 0, 1]);
        assert_eq!(poly_mod_trace(&IntPolynomial::one(), &q).unwrap(), BigInt::from(2));
        assert_eq!(poly_mod_trace(&IntPolynomial::from_i64s(&[2]), &q).unwrap(), BigInt::from(4));
        assert_eq!(poly_mod_trace(&IntPolynomial::x(), &q).unwrap(), BigInt::zero());
        let cubic = IntPolynomial::from_i64s(&[5, -2, 0, 1]);
        assert_eq!(poly_mod_trace(&IntPolynomial::one(), &cubic).unwrap(), BigInt::from(3));
        let not_monic = IntPolynomial::from_i64s(&[1, 2]);
        assert!(matches!(poly_mod_trace(&IntPolynomial::one(), &not_monic), Err(Error::NotMonic)));
    }

    #[test]
    fn sigma_g_examples() {
        assert_eq!(sigma_g_fast(3, 1, 2).unwrap(), BigInt::from(4));
        assert_eq!(sigma_g_fast(5, 1, 2).unwrap(), BigInt::from(20));
        assert_eq!(sigma_g_fast(5, 3, 2).unwrap(), BigInt::from(12));
        assert_eq!(sigma_g_fast(11, 3, 2).unwrap(), BigInt::from(84));
        assert!(sigma_g_fast(5, 3, 0).is_err());
        assert!(sigma_g_fast(5, 3, 11).is_err());
    }

    #[test]
    fn basis_poly_examples() {
        assert_eq!(basis_poly(0, 5, 3).unwrap(), IntPolynomial::one());
        assert_eq!(basis_poly(1, 5, 3).unwrap(), IntPolynomial::x());
        assert_eq!(basis_poly(2, 5, 3).unwrap().to_string(), "x^2 - 1");
        assert!(basis_poly(4, 5, 3).is_err());
    }

    #[test]
    fn omega_poly_matches_algebra_omega() {
        for (q, p) in odd_pairs(15) {
            let m = SignedTridiagonal::new(p, q).unwrap();
            let polys = m.recurrence_polys();
            let (_, om) = omega_poly(p, q).unwrap();
            let coords = to_e_basis(&om, &polys[..m.size()]);
            let alg = FrobeniusAlgebra::new(q, p).unwrap();
            assert_eq!(coords, alg.omega_element().coords, "{q}/{p}");
        }
    }

    #[test]
    fn e_basis_multiplication_matches_algebra() {
        for (q, p) in odd_pairs(13) {
            let m = SignedTridiagonal::new(p, q).unwrap();
            let polys = m.recurrence_polys();
            let n = m.size();
            let alg = FrobeniusAlgebra::new(q, p).unwrap();
            for j in 0..n {
                for k in 0..n {
                    let prod = polys[j].mul_mod(&polys[k], &polys[n]).unwrap();
                    let want = alg.multiply(&alg.basis(j), &alg.basis(k)).coords;
                    assert_eq!(to_e_basis(&prod, &polys[..n]), want, "{q}/{p} e{j} e{k}");
                }
            }
        }
    }

    #[test]
    fn fast_matches_oracle_low_genus() {
        for (q, p) in odd_pairs(31) {
            let alg = FrobeniusAlgebra::new(q, p).unwrap();
            for g in 1..=4 {
                assert_eq!(sigma_g_fast(p, q, g).unwrap(), alg.signature_oracle(g, &[]).unwrap(), "{q}/{p} g={g}");
            }
        }
    }

    #[test]
    fn fast_with_colors_matches_oracle() {
        assert_eq!(sigma_gn_fast(5, 3, 1, &[2]).unwrap(), BigInt::from(-2));
        for (q, p) in odd_pairs(15) {
            let alg = FrobeniusAlgebra::new(q, p).unwrap();
            let n = alg.dim();
            for lams in [vec![1, 1], vec![2], vec![1, 2, 3], vec![n - 1, n - 1], vec![0, 2, 2, 2]] {
                if lams.iter().any(|&l| l >= n) {
                    continue;
                }
                for g in 1..=2 {
                    let fast = sigma_gn_fast(p, q, g, &lams).unwrap();
                    assert_eq!(fast, alg.signature_oracle(g, &lams).unwrap(), "{q}/{p} g={g} {lams:?}");
                    let mut without_zero = lams.clone();
                    without_zero.retain(|&l| l != 0);
                    assert_eq!(fast, sigma_gn_fast(p, q, g, &without_zero).unwrap());
                }
            }
        }
    }

    #[test]
    fn dimension_formula() {
        for p in (3..=99i64).step_by(2) {
            let want = BigInt::from((p + 1) * p * (p - 1) / 6);
            assert_eq!(sigma_g_fast(p, 1, 2).unwrap(), want);
        }
    }

    fn poly_strategy() -> impl Strategy<Value = IntPolynomial> {
        prop::collection::vec(-50i64..50, 0..9).prop_map(|c| IntPolynomial::from_i64s(&c))
    }

    fn monic_strategy() -> impl Strategy<Value = IntPolynomial> {
        prop::collection::vec(-9i64..9, 1..6).prop_map(|mut c| {
            c.push(1);
            IntPolynomial::from_i64s(&c)
        })
    }

    proptest! {
        #[test]
        fn trace_is_linear(a in poly_strategy(), b in poly_strategy(), q in monic_strategy()) {
            let t = |x: &IntPolynomial| poly_mod_trace(x, &q).unwrap();
            prop_assert_eq!(t(&(&a + &b)), t(&a) + t(&b));
        }

        #[test]
        fn newton_trace_matches_definition(a in poly_strategy(), q in monic_strategy()) {
            prop_assert_eq!(poly_mod_trace(&a, &q).unwrap(), literal_trace(&a, &q));
        }

        #[test]
        fn rem_is_congruent(a in poly_strategy(), q in monic_strategy()) {
            let r = a.rem_monic(&q).unwrap();
            prop_assert!(r.degree().map_or(true, |d| d < q.degree().unwrap()));
            // a - r is a multiple of q: reducing it gives zero
            prop_assert!((&a - &r).rem_monic(&q).unwrap().is_zero());
        }
    }
}
