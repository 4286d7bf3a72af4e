//! Dedekind sums `s(q, p)`, the 2-smoothed sum `S(q/p)` and the identities
//! relating them.
//!
//! `S(q/p)` is a signature only for positive `q`; negative `q` values are
//! formal (`S(-q/p) = -S(q/p)`).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{invalid, Result};
use crate::hp::HpReal;
use crate::numtheory::{check_coprime, eps_raw, rat, Rational};

/// A value in `(1/2) Z`, stored as twice the value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInteger {
    pub twice: BigInt,
}

impl HalfInteger {
    pub fn from_twice(twice: impl Into<BigInt>) -> Self {
        HalfInteger { twice: twice.into() }
    }

    pub fn is_integer(&self) -> bool {
        self.twice.is_even()
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(self.twice.clone(), BigInt::from(2))
    }

    pub fn to_f64(&self) -> f64 {
        crate::numtheory::rational_to_f64(&self.to_rational())
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", &self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// `s(q, p) = sum_{n=1}^{p-1} ((n/p)) ((nq/p))` with the sawtooth
/// `((x)) = x - floor(x) - 1/2` (0 at integers). Exact.
pub fn dedekind_s(q: i64, p: i64) -> Result<Rational> {
    check_coprime(q, p)?;
    let (p128, q128) = (p as i128, q as i128);
    // ((a/p)) = (2 (a mod p) - p) / 2p for a not divisible by p
    let mut num = BigInt::zero();
    let mut chunk: i128 = 0;
    for n in 1..p128 {
        let r = (n * q128).rem_euclid(p128);
        if r != 0 {
            chunk += (2 * n - p128) * (2 * r - p128);
        }
        if n % 4096 == 0 {
            num += chunk;
            chunk = 0;
        }
    }
    num += chunk;
    Ok(Rational::new(num, BigInt::from(4 * p128 * p128)))
}

/// `s(q, p)` in `O(log p)` steps from periodicity `s(q + p, p) = s(q, p)`
/// and reciprocity
/// `s(q, p) + s(p, q) = (q/p + p/q + 1/(pq))/12 - 1/4`.
pub fn dedekind_s_reciprocity(q: i64, p: i64) -> Result<Rational> {
    check_coprime(q, p)?;
    if p < 1 {
        return Err(invalid(format!("need p > 0, got {p}")));
    }
    // s(q, p) = sum_i sign_i * (bracket(q_i, p_i)), unrolled
    let mut acc = Rational::zero();
    let mut sign = 1i64;
    let (mut q, mut p) = (BigInt::from(q).mod_floor(&BigInt::from(p)), BigInt::from(p));
    while !p.is_one() && !q.is_zero() {
        let bracket = (Rational::new(q.clone(), p.clone())
            + Rational::new(p.clone(), q.clone())
            + Rational::new(BigInt::one(), &p * &q))
            / BigInt::from(12)
            - rat(1, 4);
        acc += bracket * BigInt::from(sign);
        sign = -sign;
        let r = p.mod_floor(&q);
        p = q;
        q = r;
    }
    Ok(acc)
}

/// `(1/4p) sum_{n=1}^{p-1} cot(pi n/p) cot(pi n q/p)` at `bits` bits.
pub fn dedekind_s_cot(q: i64, p: i64, bits: usize) -> Result<HpReal> {
    check_coprime(q, p)?;
    let work = bits + 32;
    let step = HpReal::pi(work).div_i64(p);
    let cot = |m: i64| {
        let a = step.mul_i64(m.rem_euclid(p));
        a.cos() / a.sin()
    };
    let mut sum = HpReal::zero(work);
    for n in 1..p {
        sum = sum + cot(n) * cot((n as i128 * q as i128).rem_euclid(p as i128) as i64);
    }
    Ok(sum.div_i64(4 * p).with_bits(bits))
}

fn check_s_input(q: i64, p: i64) -> Result<()> {
    check_coprime(q, p)?;
    if p < 1 {
        return Err(invalid(format!("need p > 0, got {p}")));
    }
    if q % 2 == 0 {
        return Err(invalid(format!("S(q/p) needs q odd, got q={q}")));
    }
    Ok(())
}

/// `S(q/p) = (1/2) sum_{n=1}^{p-1} eps_n`, for odd `q` and any `p > 0`.
pub fn smoothed_s(q: i64, p: i64) -> Result<HalfInteger> {
    check_s_input(q, p)?;
    let twice: i64 = (1..p).map(|n| eps_raw(n, q, p) as i64).sum();
    Ok(HalfInteger::from_twice(twice))
}

/// `sum_{n odd, 1 <= n <= p-1} eps_n`; equals [`smoothed_s`] when `p` is odd.
pub fn smoothed_s_odd_sum(q: i64, p: i64) -> Result<BigInt> {
    check_s_input(q, p)?;
    Ok(BigInt::from((1..p).step_by(2).map(|n| eps_raw(n, q, p) as i64).sum::<i64>()))
}

/// `S(q/p) - 4 s(q, 2p) + 2 s(q, p)`; zero.
pub fn check_smoothing(q: i64, p: i64) -> Result<Rational> {
    let s = smoothed_s(q, p)?.to_rational();
    Ok(s - dedekind_s(q, 2 * p)? * BigInt::from(4) + dedekind_s(q, p)? * BigInt::from(2))
}

/// `s(q, p) + s(p, q) - [(q/p + p/q + 1/(pq))/12 - 1/4]`, using the sawtooth
/// sum on both sides; zero.
pub fn check_reciprocity(q: i64, p: i64) -> Result<Rational> {
    if q < 1 || p < 1 {
        return Err(invalid(format!("need p, q > 0, got q={q}, p={p}")));
    }
    let lhs = dedekind_s(q, p)? + dedekind_s(p, q)?;
    let rhs = (rat(q, p) + rat(p, q) + rat(1, p * q)) / BigInt::from(12) - rat(1, 4);
    Ok(lhs - rhs)
}

/// `S(q/(q+p)) - S(q/p) - 1/2`; zero.
pub fn check_s_transform(q: i64, p: i64) -> Result<Rational> {
    if q < 1 || p < 1 {
        return Err(invalid(format!("need p, q > 0, got q={q}, p={p}")));
    }
    let a = smoothed_s(q, q + p)?.to_rational();
    let b = smoothed_s(q, p)?.to_rational();
    Ok(a - b - rat(1, 2))
}
