//! Genus-two signatures: the lattice sum over `Delta_p` and the
//! trigonometric formula with certified rounding to an integer.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::hp::HpReal;
use crate::numtheory::{check_coprime, eps_raw};
use crate::polytrace::sigma_g_fast;
use crate::verlinde::FrobeniusAlgebra;

/// Precision settings for the trigonometric formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrigEvalConfig {
    pub mantissa_bits: usize,
    pub max_retries: usize,
}

impl Default for TrigEvalConfig {
    fn default() -> Self {
        TrigEvalConfig { mantissa_bits: 128, max_retries: 3 }
    }
}

impl TrigEvalConfig {
    /// `max(mantissa_bits, ceil(6 log2 p) + 64)`.
    pub fn bits_for(&self, p: i64) -> usize {
        let need = (6.0 * (p as f64).log2()).ceil() as usize + 64;
        self.mantissa_bits.max(need)
    }
}

/// An integer obtained by rounding a floating evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedInteger {
    pub value: BigInt,
    /// Distance of the floating value from `value`.
    pub residual: f64,
    pub bits_used: usize,
}

/// Rounding is accepted when the residual is below this.
pub const CERTIFY_THRESHOLD: f64 = 0.25;

fn check_lattice_input(p: i64, q: i64) -> Result<()> {
    check_coprime(q, p)
}

/// `sum over Delta_p of eps_j eps_k eps_l`, where `Delta_p` is the set of
/// `0 < j, k, l < p` with strict triangle inequalities, `j + k + l < 2p` and
/// `j + k + l` odd.
///
/// Any coprime pair is accepted. The signs used are `Sign([j])`, which agree
/// with `eps_j` for `0 < q < p` and make the sum depend only on `q` mod `2p`
/// up to `q -> -q`. It is a TQFT signature for odd `q, p`.
///
/// Triples are visited in sorted order with multiplicity 1, 3 or 6, and for
/// fixed `j <= k` the run of admissible `l` (all of one parity) is summed
/// from parity prefix sums.
pub fn sigma2_lattice(p: i64, q: i64) -> Result<BigInt> {
    check_lattice_input(p, q)?;
    let n = p as usize;
    // Sign([j]) = eps_j eps_1; equal to eps_j for 0 < q < p
    let e1 = eps_raw(1, q, p) as i64;
    let e: Vec<i64> = (0..n).map(|j| if j == 0 { 0 } else { e1 * eps_raw(j as i64, q, p) as i64 }).collect();
    // pre[m] = e[m] + e[m-2] + ... (same parity, down to 1 or 2)
    let mut pre = vec![0i64; n];
    for m in 1..n {
        pre[m] = e[m] + if m >= 2 { pre[m - 2] } else { 0 };
    }
    let range_sum = |a: usize, b: usize| -> i64 {
        // a <= b, same parity
        pre[b] - if a >= 2 { pre[a - 2] } else { 0 }
    };
    let total: i64 = (1..n)
        .into_par_iter()
        .map(|j| {
            let mut acc = 0i64;
            for k in j..n {
                let ejk = e[j] * e[k];
                // l in [k, hi], parity of j + k + 1
                let hi = (n - 1).min(j + k - 1).min(2 * n - 1 - j - k);
                if hi < k {
                    continue;
                }
                let par = (j + k + 1) % 2;
                if k % 2 == par {
                    acc += ejk * e[k] * if j == k { 1 } else { 3 };
                }
                let mut lo = k + 1;
                if lo % 2 != par {
                    lo += 1;
                }
                let mut top = hi;
                if top % 2 != par {
                    top -= 1;
                }
                if lo <= top {
                    acc += ejk * range_sum(lo, top) * if j == k { 3 } else { 6 };
                }
            }
            acc
        })
        .sum();
    Ok(BigInt::from(total))
}

fn check_trig_input(p: i64, q: i64) -> Result<()> {
    check_coprime(q, p)?;
    if p < 3 || q <= 0 || q >= p {
        return Err(invalid(format!("need p >= 3 and 0 < q < p, got q={q}, p={p}")));
    }
    Ok(())
}

/// `sin(m pi / 2p)` for any integer `m`, from a table over a quarter period.
struct SineTable {
    p: i64,
    quarter: Vec<HpReal>,
}

impl SineTable {
    fn new(p: i64, bits: usize) -> Self {
        let step = HpReal::pi(bits + 16).div_i64(2 * p);
        let quarter = (0..=p).map(|k| step.mul_i64(k).sin().with_bits(bits)).collect();
        SineTable { p, quarter }
    }

    fn get(&self, m: i64) -> HpReal {
        let p = self.p;
        let r = m.rem_euclid(4 * p);
        if r <= p {
            self.quarter[r as usize].clone()
        } else if r <= 2 * p {
            self.quarter[(2 * p - r) as usize].clone()
        } else {
            -self.get(r - 2 * p)
        }
    }
}

fn f_from_table(t: &SineTable, n: i64, p: i64, q: i64) -> HpReal {
    t.get((2 * q - 1) * n).mul_i64(3 * p - 3)
        + t.get((2 * q - 3) * n).mul_i64(p + 1)
        + t.get((2 * q + 3) * n).mul_i64(p - 1)
        + t.get((2 * q + 1) * n).mul_i64(3 * p + 3)
}

/// `f(n, p, q) = (3p-3) s((2q-1)n) + (p+1) s((2q-3)n) + (p-1) s((2q+3)n) +
/// (3p+3) s((2q+1)n)` with `s(m) = sin(m pi / 2p)`, each sine evaluated
/// directly.
pub fn f_term(n: i64, p: i64, q: i64, cfg: &TrigEvalConfig) -> Result<HpReal> {
    check_trig_input(p, q)?;
    if n < 1 || n > p - 2 || n % 2 == 0 {
        return Err(invalid(format!("n must be odd in 1..={}, got {n}", p - 2)));
    }
    let bits = cfg.bits_for(p);
    let base = HpReal::pi(bits + 16).div_i64(2 * p);
    let s = |m: i64| base.mul_i64(m).sin().with_bits(bits);
    Ok(s((2 * q - 1) * n).mul_i64(3 * p - 3)
        + s((2 * q - 3) * n).mul_i64(p + 1)
        + s((2 * q + 3) * n).mul_i64(p - 1)
        + s((2 * q + 1) * n).mul_i64(3 * p + 3))
}

/// The trigonometric expression evaluated at `bits` bits, without rounding:
/// `(1 - p^2)/(6p^2) + (1/4p^2) sum_{n odd <= p-2} f / (sin^3(n pi/2p) sin^2(q n pi/p))`.
pub fn sigma2_trig_value(p: i64, q: i64, bits: usize) -> Result<HpReal> {
    check_trig_input(p, q)?;
    let work = bits + 32;
    let t = SineTable::new(p, work);
    let terms: Vec<HpReal> = (1..=p - 2)
        .step_by(2)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|n| {
            let s1 = t.get(n);
            let s2 = t.get(2 * q * n);
            f_from_table(&t, n, p, q) / (s1.powi(3) * s2.sqr())
        })
        .collect();
    let sum = terms.into_iter().fold(HpReal::zero(work), |a, b| a + b);
    let p2 = HpReal::from_i64(p * p, work);
    let head = HpReal::from_i64(1 - p * p, work) / p2.mul_i64(6);
    let v = head + sum / p2.mul_i64(4);
    Ok(v.with_bits(bits))
}

/// The trigonometric formula rounded to the nearest integer, retrying with
/// doubled precision until the residual is below [`CERTIFY_THRESHOLD`].
///
/// Only odd coprime pairs are accepted: for even `p` or `q` the expression
/// is not an integer in general.
pub fn sigma2_trig(p: i64, q: i64, cfg: &TrigEvalConfig) -> Result<CertifiedInteger> {
    check_trig_input(p, q)?;
    if p % 2 == 0 || q % 2 == 0 {
        return Err(invalid(format!(
            "the trigonometric formula is integral only for odd q, p (got q={q}, p={p}); use the lattice sum"
        )));
    }
    let mut bits = cfg.bits_for(p);
    let mut best = f64::INFINITY;
    for _ in 0..=cfg.max_retries {
        let v = sigma2_trig_value(p, q, bits)?;
        let value = v.round_to_bigint();
        let residual = (&v - &HpReal::from_bigint(&value, bits)).abs().to_f64();
        if residual < CERTIFY_THRESHOLD {
            return Ok(CertifiedInteger { value, residual, bits_used: bits });
        }
        best = best.min(residual);
        bits *= 2;
    }
    Err(Error::CertificationFailed { attempts: cfg.max_retries + 1, best_residual: best, bits: bits / 2 })
}

/// Largest odd `p` routed to the polynomial algorithm by [`sigma2_auto`].
pub const AUTO_CHARPOLY_MAX_P: i64 = 2000;

/// How [`sigma2_auto`] evaluates a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sigma2Method {
    Lattice,
    Trig,
    Charpoly,
    Oracle,
}

impl Sigma2Method {
    pub const ALL: [Sigma2Method; 4] =
        [Sigma2Method::Lattice, Sigma2Method::Trig, Sigma2Method::Charpoly, Sigma2Method::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Sigma2Method::Lattice => "lattice",
            Sigma2Method::Trig => "trig",
            Sigma2Method::Charpoly => "charpoly",
            Sigma2Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Sigma2Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sigma2Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Sigma2Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| invalid(format!("unknown method `{s}`")))
    }
}

/// The method [`sigma2_auto`] uses for `(p, q)`.
pub fn auto_method(p: i64, q: i64) -> Sigma2Method {
    if p % 2 != 0 && q % 2 != 0 && p >= 3 {
        if p <= AUTO_CHARPOLY_MAX_P {
            Sigma2Method::Charpoly
        } else {
            Sigma2Method::Trig
        }
    } else {
        Sigma2Method::Lattice
    }
}

/// `sigma_2(q/p)` by an explicit method.
pub fn sigma2_by(method: Sigma2Method, p: i64, q: i64, cfg: &TrigEvalConfig) -> Result<BigInt> {
    match method {
        Sigma2Method::Lattice => sigma2_lattice(p, q),
        Sigma2Method::Trig => sigma2_trig(p, q, cfg).map(|c| c.value),
        Sigma2Method::Charpoly => sigma_g_fast(p, q, 2),
        Sigma2Method::Oracle => FrobeniusAlgebra::new(q, p)?.signature_oracle(2, &[]),
    }
}

/// `sigma_2(q/p)`: the polynomial algorithm for odd pairs with
/// `p <= 2000`, the trigonometric formula for larger odd pairs, and the
/// lattice sum when `p` or `q` is even.
pub fn sigma2_auto(p: i64, q: i64) -> Result<BigInt> {
    check_coprime(q, p)?;
    if q <= 0 || q >= p.max(2) {
        return Err(invalid(format!("need 0 < q < p, got q={q}, p={p}")));
    }
    sigma2_by(auto_method(p, q), p, q, &TrigEvalConfig::default())
}
