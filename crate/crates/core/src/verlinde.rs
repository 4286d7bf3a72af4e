//! The signed Verlinde algebra `V_{q/p}`: basis `e_0 .. e_{p-2}`, diagonal
//! form `eta`, trilinear form `omega` with values in {-1, 0, 1}, handle
//! element `Omega` and counit. Signatures are counits of
//! `Omega^g e_{l1} ... e_{ln}`, up to a sign fixed by the colors.
//!
//! The same signed fusion rules, with the level cap removed and colors
//! truncated at the total input color, give the genus-0 algebra `V_theta`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{invalid, Result};
use crate::numtheory::{check_odd_pair, theta_signs, SignSequence, ThetaSpec};

/// Sign tables shared by `V_{q/p}` and truncations of `V_theta`.
#[derive(Debug, Clone)]
struct FusionSigns {
    // fs[n] = sign of [n]!
    fs: Vec<i8>,
    // eta[j] = (-1)^j eps_{j+1}
    eta: Vec<i8>,
    max_color: usize,
    // bound on j + k + l; 2p - 4 for V_{q/p}
    sum_cap: Option<usize>,
}

impl FusionSigns {
    /// `eps[m]` for `m = 0..=max_color + 1` (entry 0 unused).
    fn from_eps(eps: &[i8], max_color: usize, sum_cap: Option<usize>) -> Self {
        assert!(eps.len() >= max_color + 2);
        let mut fs = Vec::with_capacity(eps.len());
        let mut acc = 1i8;
        fs.push(1);
        for &e in &eps[1..] {
            acc *= e;
            fs.push(acc);
        }
        let eta = (0..=max_color)
            .map(|j| if j % 2 == 0 { eps[j + 1] } else { -eps[j + 1] })
            .collect();
        FusionSigns { fs, eta, max_color, sum_cap }
    }

    #[inline]
    fn admissible(&self, j: usize, k: usize, l: usize) -> bool {
        let s = j + k + l;
        s % 2 == 0
            && l <= j + k
            && j <= k + l
            && k <= j + l
            && self.sum_cap.map_or(true, |c| s <= c)
    }

    #[inline]
    fn omega(&self, j: usize, k: usize, l: usize) -> i8 {
        if !self.admissible(j, k, l) {
            return 0;
        }
        let h = (j + k + l) / 2;
        let f = &self.fs;
        let sign = if h % 2 == 0 { 1 } else { -1 };
        sign * f[h + 1] * f[h - l] * f[h - k] * f[h - j] * f[j] * f[k] * f[l]
    }

    fn multiply(&self, u: &[BigInt], v: &[BigInt]) -> Vec<BigInt> {
        let n = self.max_color + 1;
        let mut out = vec![BigInt::zero(); n];
        for (j, uj) in u.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (k, vk) in v.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                let lo = j.abs_diff(k);
                let mut hi = (j + k).min(self.max_color);
                if let Some(c) = self.sum_cap {
                    if j + k > c {
                        continue;
                    }
                    hi = hi.min(c - j - k);
                }
                if lo > hi {
                    continue;
                }
                let prod = uj * vk;
                for l in (lo..=hi).step_by(2) {
                    let w = self.omega(j, k, l) * self.eta[l];
                    match w {
                        1 => out[l] += &prod,
                        -1 => out[l] -= &prod,
                        _ => {}
                    }
                }
            }
        }
        out
    }
}

/// An element of `V_{q/p}` in the basis `e_0 .. e_{p-2}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraVector {
    pub coords: Vec<BigInt>,
}

impl AlgebraVector {
    pub fn zero(dim: usize) -> Self {
        AlgebraVector { coords: vec![BigInt::zero(); dim] }
    }

    pub fn basis(dim: usize, j: usize) -> Self {
        let mut v = Self::zero(dim);
        v.coords[j] = BigInt::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        AlgebraVector { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        AlgebraVector { coords: self.coords.iter().map(|a| a * k).collect() }
    }
}

/// `V_{q/p}` for odd coprime `0 < q < p`.
#[derive(Debug, Clone)]
pub struct FrobeniusAlgebra {
    p: i64,
    q: i64,
    signs: SignSequence,
    core: FusionSigns,
}

impl FrobeniusAlgebra {
    pub fn new(q: i64, p: i64) -> Result<Self> {
        check_odd_pair(q, p)?;
        let signs = SignSequence::new(q, p)?;
        let n = (p - 2) as usize;
        let mut eps: Vec<i8> = (0..p as usize).map(|j| signs.get(j)).collect();
        // eps[p-1] is the last entry needed (eta_{p-2} uses eps_{p-1})
        eps.truncate(n + 2);
        let core = FusionSigns::from_eps(&eps, n, Some(2 * n));
        Ok(FrobeniusAlgebra { p, q, signs, core })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn dim(&self) -> usize {
        (self.p - 1) as usize
    }

    pub fn sign_sequence(&self) -> &SignSequence {
        &self.signs
    }

    /// `eta(e_j, e_j) = (-1)^j eps_{j+1}`.
    pub fn eta(&self, j: usize) -> i8 {
        self.core.eta[j]
    }

    pub fn eta_diag(&self) -> &[i8] {
        &self.core.eta
    }

    pub fn basis(&self, j: usize) -> AlgebraVector {
        AlgebraVector::basis(self.dim(), j)
    }

    /// `omega(e_j, e_k, e_l)`; zero off the admissible set `T_p`.
    pub fn omega(&self, j: usize, k: usize, l: usize) -> Result<i8> {
        let n = self.dim();
        if j >= n || k >= n || l >= n {
            return Err(invalid(format!("colors must lie in 0..={}", n - 1)));
        }
        Ok(self.core.omega(j, k, l))
    }

    /// Whether `(j, k, l)` lies in `T_p`.
    pub fn admissible(&self, j: usize, k: usize, l: usize) -> bool {
        let n = self.dim();
        j < n && k < n && l < n && self.core.admissible(j, k, l)
    }

    pub fn multiply(&self, u: &AlgebraVector, v: &AlgebraVector) -> AlgebraVector {
        assert_eq!(u.dim(), self.dim());
        assert_eq!(v.dim(), self.dim());
        AlgebraVector { coords: self.core.multiply(&u.coords, &v.coords) }
    }

    /// `Omega = sum_j eta_jj e_j e_j`.
    pub fn omega_element(&self) -> AlgebraVector {
        let n = self.dim();
        let mut out = vec![BigInt::zero(); n];
        for j in 0..n {
            let ej = self.core.eta[j];
            let hi = (2 * j).min(2 * (n - 1) - 2 * j);
            for l in (0..=hi).step_by(2) {
                out[l] += BigInt::from(ej * self.core.omega(j, j, l) * self.core.eta[l]);
            }
        }
        AlgebraVector { coords: out }
    }

    pub fn counit(&self, v: &AlgebraVector) -> BigInt {
        v.coords[0].clone()
    }

    /// `counit(Omega^g e_{l1} ... e_{ln})`, by repeated multiplication.
    pub fn counit_product(&self, g: u32, lambdas: &[usize]) -> Result<BigInt> {
        let n = self.dim();
        if let Some(l) = lambdas.iter().find(|&&l| l >= n) {
            return Err(invalid(format!("color {l} outside 0..={}", n - 1)));
        }
        let mut acc = self.basis(0);
        for &l in lambdas {
            acc = self.multiply(&acc, &self.basis(l));
        }
        if g > 0 {
            let omega = self.omega_element();
            for _ in 0..g {
                acc = self.multiply(&acc, &omega);
            }
        }
        Ok(self.counit(&acc))
    }

    /// The signature `sigma_{g,n}(q/p; l1, ..., ln)`: `counit_product`
    /// times [`FrobeniusAlgebra::color_sign`].
    pub fn signature_oracle(&self, g: u32, lambdas: &[usize]) -> Result<BigInt> {
        let c = self.counit_product(g, lambdas)?;
        Ok(c * self.color_sign(lambdas))
    }

    /// `(-1)^(sum l / 2) prod Sign([l_i]!)` for an even color sum, `1`
    /// otherwise (the counit vanishes for odd sums).
    ///
    /// The colored vectors of the TQFT correspond to `i^l Sign([l]!) e_l`
    /// rather than `e_l`: with this factor `q = 1` reproduces the positive
    /// Verlinde fusion rules, and one colored point on a torus gives the
    /// closed formula of [`sigma1_punctured`].
    pub fn color_sign(&self, lambdas: &[usize]) -> i32 {
        color_sign(&self.core.fs, lambdas)
    }
}

fn color_sign(fs: &[i8], lambdas: &[usize]) -> i32 {
    let s: usize = lambdas.iter().sum();
    let base = if s % 4 == 2 { -1 } else { 1 };
    lambdas.iter().fold(base, |acc, &l| acc * fs[l] as i32)
}

/// `sigma_1(q/p; 2k) = sum_{n=k+1}^{p-1-k} prod_{l=1}^k eps_{n+l} eps_{n-l}`.
pub fn sigma1_punctured(q: i64, p: i64, k: usize) -> Result<i64> {
    check_odd_pair(q, p)?;
    let s = SignSequence::new(q, p)?;
    let p = p as usize;
    if 2 * k + 2 > p {
        return Ok(0);
    }
    Ok((k + 1..=p - 1 - k)
        .map(|n| (1..=k).map(|l| (s.get(n + l) * s.get(n - l)) as i64).product::<i64>())
        .sum())
}

/// `counit(e_{l1} ... e_{ln})` in the genus-0 algebra `V_theta`, computed in
/// the truncation to colors `0 ..= sum(l_i)`.
pub fn counit_theta(theta: &ThetaSpec, lambdas: &[usize]) -> Result<BigInt> {
    Ok(theta_product(theta, lambdas)?.0)
}

/// The limit of `sigma_{0,n}(q/p; l)` as `q/p -> theta`: [`counit_theta`]
/// with the same color sign as [`FrobeniusAlgebra::signature_oracle`].
pub fn sigma0_theta(theta: &ThetaSpec, lambdas: &[usize]) -> Result<BigInt> {
    let (c, sign) = theta_product(theta, lambdas)?;
    Ok(c * sign)
}

fn theta_product(theta: &ThetaSpec, lambdas: &[usize]) -> Result<(BigInt, i32)> {
    let total: usize = lambdas.iter().sum();
    let eps = theta_signs(theta, total + 1)?;
    let core = FusionSigns::from_eps(&eps, total, None);
    let mut acc = vec![BigInt::zero(); total + 1];
    acc[0] = BigInt::one();
    for &l in lambdas {
        let mut e = vec![BigInt::zero(); total + 1];
        e[l] = BigInt::one();
        acc = core.multiply(&acc, &e);
    }
    Ok((acc[0].clone(), color_sign(&core.fs, lambdas)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::{rat, CfExpansion};
    use num_integer::Integer;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn odd_pairs(pmax: i64) -> impl Iterator<Item = (i64, i64)> {
        (3..=pmax)
            .step_by(2)
            .flat_map(|p| (1..p).step_by(2).filter(move |q| q.gcd(&p) == 1).map(move |q| (q, p)))
    }

    #[test]
    fn omega_examples() {
        let a = FrobeniusAlgebra::new(1, 3).unwrap();
        assert_eq!(a.omega(1, 1, 0).unwrap(), -1);
        assert_eq!(a.omega(1, 1, 1).unwrap(), 0);
        for (q, p) in odd_pairs(15) {
            assert_eq!(FrobeniusAlgebra::new(q, p).unwrap().omega(0, 0, 0).unwrap(), 1);
        }
        assert!(a.omega(2, 0, 0).is_err());
    }

    #[test]
    fn omega_symmetric() {
        for (q, p) in odd_pairs(15) {
            let a = FrobeniusAlgebra::new(q, p).unwrap();
            let n = a.dim();
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let w = a.omega(j, k, l).unwrap();
                        for (x, y, z) in [(j, l, k), (k, j, l), (k, l, j), (l, j, k), (l, k, j)] {
                            assert_eq!(a.omega(x, y, z).unwrap(), w);
                        }
                        assert_eq!(w != 0, a.admissible(j, k, l));
                    }
                }
            }
        }
    }

    #[test]
    fn multiply_examples() {
        let a = FrobeniusAlgebra::new(1, 3).unwrap();
        let e1 = a.basis(1);
        let sq = a.multiply(&e1, &e1);
        assert_eq!(sq.coords, vec![BigInt::from(-1), BigInt::zero()]);
        assert_eq!(a.omega_element().coords, vec![BigInt::from(2), BigInt::zero()]);
        let b = FrobeniusAlgebra::new(3, 11).unwrap();
        for j in 0..b.dim() {
            let v = b.basis(j);
            assert_eq!(b.multiply(&b.basis(0), &v), v);
            assert_eq!(b.multiply(&v, &b.basis(0)), v);
            let w = b.multiply(&b.basis(1), &v);
            for (l, c) in w.coords.iter().enumerate() {
                if !c.is_zero() {
                    assert!(l + 1 == j || l == j + 1);
                }
            }
        }
    }

    #[test]
    fn associative_and_commutative() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (q, p) in odd_pairs(31) {
            let a = FrobeniusAlgebra::new(q, p).unwrap();
            let n = a.dim();
            for _ in 0..200 {
                let (x, y, z) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                let (ex, ey, ez) = (a.basis(x), a.basis(y), a.basis(z));
                let xy = a.multiply(&ex, &ey);
                assert_eq!(xy, a.multiply(&ey, &ex));
                let l = a.multiply(&xy, &ez);
                let r = a.multiply(&ex, &a.multiply(&ey, &ez));
                assert_eq!(l, r, "q={q} p={p} ({x},{y},{z})");
            }
        }
    }

    #[test]
    fn omega_is_compatible_with_eta() {
        // omega(x, y, z) = eta(x y, z)
        for (q, p) in odd_pairs(13) {
            let a = FrobeniusAlgebra::new(q, p).unwrap();
            let n = a.dim();
            for j in 0..n {
                for k in 0..n {
                    let prod = a.multiply(&a.basis(j), &a.basis(k));
                    for l in 0..n {
                        let eta_val = &prod.coords[l] * BigInt::from(a.eta(l));
                        assert_eq!(eta_val, BigInt::from(a.omega(j, k, l).unwrap()));
                    }
                }
            }
        }
    }

    #[test]
    fn low_genus_signatures() {
        for (q, p) in odd_pairs(31) {
            let a = FrobeniusAlgebra::new(q, p).unwrap();
            assert_eq!(a.signature_oracle(0, &[]).unwrap(), BigInt::one());
            assert_eq!(a.signature_oracle(1, &[]).unwrap(), BigInt::from(p - 1));
        }
        let a = FrobeniusAlgebra::new(1, 5).unwrap();
        assert_eq!(a.signature_oracle(2, &[]).unwrap(), BigInt::from(20));
        let b = FrobeniusAlgebra::new(3, 5).unwrap();
        assert_eq!(b.signature_oracle(2, &[]).unwrap(), BigInt::from(12));
        assert!(b.signature_oracle(1, &[4]).is_err());
    }

    #[test]
    fn sigma1_punctured_matches_oracle() {
        assert_eq!(sigma1_punctured(3, 5, 1).unwrap(), -2);
        assert_eq!(sigma1_punctured(1, 9, 0).unwrap(), 8);
        assert_eq!(sigma1_punctured(1, 9, 3).unwrap(), 2);
        for (q, p) in odd_pairs(31) {
            let a = FrobeniusAlgebra::new(q, p).unwrap();
            for k in 0..=((p - 2) / 2) as usize {
                let want = a.signature_oracle(1, &[2 * k]).unwrap();
                assert_eq!(BigInt::from(sigma1_punctured(q, p, k).unwrap()), want, "q={q} p={p} k={k}");
            }
        }
    }

    #[test]
    fn counit_theta_basics() {
        let th = ThetaSpec::Rational(rat(3, 8));
        assert_eq!(counit_theta(&th, &[]).unwrap(), BigInt::one());
        assert_eq!(counit_theta(&th, &[0, 0]).unwrap(), BigInt::one());
        // e_1^2 has e_0-coefficient omega(1,1,0) eta_00 = -eps_2 = -1
        assert_eq!(counit_theta(&th, &[1, 1]).unwrap(), BigInt::from(-1));
        let golden = ThetaSpec::Cf(CfExpansion::all_ones());
        assert_eq!(counit_theta(&golden, &[1, 1]).unwrap(), BigInt::from(1));
    }

    #[test]
    fn counit_theta_agrees_with_finite_algebra() {
        // below the level cap the truncated V_theta at theta = q/p is V_{q/p}
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (q, p) in odd_pairs(23) {
            let a = FrobeniusAlgebra::new(q, p).unwrap();
            let th = ThetaSpec::Rational(rat(q, p));
            for _ in 0..20 {
                let n = rng.gen_range(0..5);
                let lams: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
                if lams.iter().sum::<usize>() + 2 > p as usize {
                    continue;
                }
                assert_eq!(counit_theta(&th, &lams).unwrap(), a.counit_product(0, &lams).unwrap());
            }
        }
        // golden ratio against its odd convergent 55/89
        let a = FrobeniusAlgebra::new(55, 89).unwrap();
        let golden = ThetaSpec::Cf(CfExpansion::all_ones());
        for lams in [vec![2, 3, 3], vec![1, 1, 2, 2], vec![4, 4, 4, 2], vec![5, 5, 6, 6, 2]] {
            assert_eq!(counit_theta(&golden, &lams).unwrap(), a.counit_product(0, &lams).unwrap());
        }
    }

    #[test]
    fn q_one_gives_dimensions() {
        // Verlinde dimension of a torus with one point colored 2k is p - 1 - 2k;
        // two points colored (a, b) on a sphere give delta_{ab}
        for p in (5..=15).step_by(2) {
            let a = FrobeniusAlgebra::new(1, p).unwrap();
            for k in 0..=((p - 3) / 2) as usize {
                assert_eq!(a.signature_oracle(1, &[2 * k]).unwrap(), BigInt::from(p - 1 - 2 * k as i64));
            }
            for x in 0..a.dim() {
                for y in 0..a.dim() {
                    let want = if x == y { BigInt::one() } else { BigInt::zero() };
                    assert_eq!(a.signature_oracle(0, &[x, y]).unwrap(), want);
                }
            }
            // three points: dimension 1 exactly on admissible triples
            for x in 0..a.dim() {
                for y in 0..a.dim() {
                    for z in 0..a.dim() {
                        let v = a.signature_oracle(0, &[x, y, z]).unwrap();
                        assert_eq!(v, BigInt::from(a.admissible(x, y, z) as i32));
                    }
                }
            }
        }
    }

    #[test]
    fn sigma0_theta_limits() {
        let a = FrobeniusAlgebra::new(55, 89).unwrap();
        let golden = ThetaSpec::Cf(CfExpansion::all_ones());
        for lams in [vec![2, 2], vec![1, 3, 2], vec![3, 3, 3, 3]] {
            assert_eq!(sigma0_theta(&golden, &lams).unwrap(), a.signature_oracle(0, &lams).unwrap());
        }
    }

    #[test]
    fn counit_theta_vanishing_quantum_integer() {
        let th = ThetaSpec::Rational(rat(1, 2));
        assert!(counit_theta(&th, &[1, 1]).is_err());
    }
}
