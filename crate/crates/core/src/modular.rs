//! Modular objects on the upper half-plane: Dedekind `eta`, Jacobi `theta`,
//! `g = eta(tau)^2 / eta(2 tau)`, the Eichler integral `G` and the boundary
//! function `Lambda`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::hp::{HpComplex, HpReal};
use crate::numtheory::{check_coprime, mobius, CfExpansion, CfTerms, Rational, ThetaSpec};

/// Default mantissa width for this module.
pub const DEFAULT_BITS: usize = 128;

/// Hard cap on product/series lengths.
const MAX_TERMS: usize = 50_000_000;

/// A point `tau` with `Im tau > 0`.
#[derive(Debug, Clone)]
pub struct UpperHalfPoint {
    tau: HpComplex,
}

impl UpperHalfPoint {
    pub fn new(tau: HpComplex) -> Result<Self> {
        if tau.im.is_negative() || tau.im.is_zero() {
            return Err(invalid(format!("Im tau must be positive, got {}", tau.im.to_f64())));
        }
        Ok(UpperHalfPoint { tau })
    }

    pub fn from_f64(re: f64, im: f64, bits: usize) -> Result<Self> {
        UpperHalfPoint::new(HpComplex::from_f64(re, im, bits))
    }

    /// `re + i im` with an exact rational real part.
    pub fn from_rational_re(re: &Rational, im: f64, bits: usize) -> Result<Self> {
        UpperHalfPoint::new(HpComplex::new(HpReal::from_rational(re, bits), HpReal::from_f64(im, bits)))
    }

    pub fn tau(&self) -> &HpComplex {
        &self.tau
    }

    pub fn re(&self) -> &HpReal {
        &self.tau.re
    }

    pub fn im(&self) -> &HpReal {
        &self.tau.im
    }

    pub fn bits(&self) -> usize {
        self.tau.bits()
    }

    /// `(a tau + b) / (c tau + d)`.
    pub fn mobius(&self, a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let bits = self.bits();
        let lin = |x: i64, y: i64| {
            HpComplex::new(self.tau.re.mul_i64(x) + HpReal::from_i64(y, bits), self.tau.im.mul_i64(x))
        };
        UpperHalfPoint::new(lin(a, b) / lin(c, d))
    }
}

/// A certified bound on what a truncated sum leaves out.
#[derive(Debug, Clone)]
pub struct TailBound {
    pub value: HpReal,
    /// Largest index kept in the sum.
    pub n_truncated: usize,
}

/// `sigma_k(n) = sum_{d | n} d^k`, exact (negative `k` allowed).
pub fn divisor_sigma(k: i32, n: u64) -> Result<Rational> {
    if n == 0 {
        return Err(invalid("divisor_sigma needs n >= 1"));
    }
    let mut s = Rational::zero();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            for e in if d * d == n { vec![d] } else { vec![d, n / d] } {
                let pw = BigInt::from(e).pow(k.unsigned_abs());
                s += if k >= 0 { Rational::from(pw) } else { Rational::new(BigInt::one(), pw) };
            }
        }
        d += 1;
    }
    Ok(s)
}

fn ln2_over(den: &HpReal) -> f64 {
    std::f64::consts::LN_2 / den.to_f64()
}

/// Number of factors so that `|e^(2 pi i N tau)| < 2^(-bits-32)`.
fn eta_terms(t: &HpReal, bits: usize) -> Result<usize> {
    let n = ((bits + 32) as f64 * ln2_over(&t.mul_i64(2)) / std::f64::consts::PI).ceil();
    if !(n.is_finite()) || n > MAX_TERMS as f64 {
        return Err(invalid(format!("Im tau = {:e} too small for the eta product", t.to_f64())));
    }
    Ok((n as usize).max(1))
}

/// `e^(2 pi i x)` for complex `x`.
fn e2pi(x: &HpComplex) -> HpComplex {
    let bits = x.bits();
    let two_pi = HpReal::pi(bits).mul_i64(2);
    x.scale(&two_pi).mul_i().exp()
}

/// `e^(pi i x)`.
fn epi(x: &HpComplex) -> HpComplex {
    x.scale(&HpReal::pi(x.bits())).mul_i().exp()
}

/// `eta(tau) = e^(pi i tau/12) prod_{n >= 1} (1 - e^(2 pi i n tau))`.
pub fn dedekind_eta(tau: &UpperHalfPoint, bits: usize) -> Result<HpComplex> {
    let n = eta_terms(tau.im(), bits)?;
    Ok(dedekind_eta_truncated(tau, n, bits))
}

/// The eta product cut after `n` factors.
pub fn dedekind_eta_truncated(tau: &UpperHalfPoint, n: usize, bits: usize) -> HpComplex {
    let work = bits + 24 + (usize::BITS - n.leading_zeros()) as usize;
    let t = tau.tau().with_bits(work);
    let q = e2pi(&t);
    let one = HpComplex::one(work);
    let mut qn = q.clone();
    let mut prod = HpComplex::one(work);
    for _ in 0..n {
        prod = &prod * &(&one - &qn);
        qn = &qn * &q;
    }
    let pre = epi(&HpComplex::new(t.re.div_i64(12), t.im.div_i64(12)));
    (pre * prod).with_bits(bits)
}

/// `theta(tau) = sum_{n in Z} e^(pi i n^2 tau)`, truncated symmetrically with
/// tail below `2^(-bits-32)`.
pub fn jacobi_theta(tau: &UpperHalfPoint, bits: usize) -> Result<HpComplex> {
    let t = tau.im().to_f64();
    let n2 = (bits + 32) as f64 * std::f64::consts::LN_2 / (std::f64::consts::PI * t);
    if !n2.is_finite() || n2.sqrt() > MAX_TERMS as f64 {
        return Err(invalid(format!("Im tau = {t:e} too small for the theta series")));
    }
    let nmax = n2.sqrt().ceil() as usize + 1;
    let work = bits + 24;
    let w = epi(&tau.tau().with_bits(work));
    let w2 = &w * &w;
    // w^(n^2) via w^((n+1)^2) = w^(n^2) w^(2n+1)
    let mut odd = w.clone();
    let mut pw = HpComplex::one(work);
    let mut sum = HpComplex::zero(work);
    for _ in 1..=nmax {
        pw = &pw * &odd;
        sum = &sum + &pw;
        odd = &odd * &w2;
    }
    let two = HpReal::from_i64(2, work);
    Ok((HpComplex::one(work) + sum.scale(&two)).with_bits(bits))
}

/// `g(tau) = eta(tau)^2 / eta(2 tau)`.
pub fn g_function(tau: &UpperHalfPoint, bits: usize) -> Result<HpComplex> {
    let work = bits + 16;
    let e1 = dedekind_eta(tau, work)?;
    let e2 = dedekind_eta(&tau.mobius(2, 0, 0, 1)?, work)?;
    Ok((&e1 * &e1 / e2).with_bits(bits))
}

/// Anchor height for argument tracking.
pub const ARG_T0: f64 = 10.0;

/// One point of a tracked argument of `g` on `Re tau = q/2p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArgSample {
    pub t: f64,
    /// Continuous `arg g(q/2p + i t)`.
    pub arg: f64,
    /// `-(2/pi) arg`.
    pub boundary_value: f64,
}

fn wrap_pi(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut y = x.rem_euclid(tau);
    if y > std::f64::consts::PI {
        y -= tau;
    }
    y
}

/// Tracks the continuous argument of `g(q/2p + i t)` from `t = ARG_T0` down
/// to each height in `checkpoints` (decreasing), stepping geometrically with
/// a principal-argument change below `pi/4` per step. The step in `ln t`
/// starts at `ln 2`, is halved on a rejected step and grows back after an
/// accepted one.
pub fn arg_g_track(q: i64, p: i64, checkpoints: &[f64], bits: usize) -> Result<Vec<ArgSample>> {
    check_coprime(q, p)?;
    if p < 1 || q % 2 == 0 {
        return Err(invalid(format!("need p > 0 and q odd, got q={q}, p={p}")));
    }
    if checkpoints.iter().any(|&t| !(t > 0.0 && t < ARG_T0)) || checkpoints.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("checkpoints must be decreasing and in (0, 10)"));
    }
    let x = Rational::new(BigInt::from(q), BigInt::from(2 * p));
    let principal = |t: f64| -> Result<f64> {
        let tau = UpperHalfPoint::from_rational_re(&x, t, bits)?;
        Ok(g_function(&tau, bits)?.arg().to_f64())
    };
    let max_h = std::f64::consts::LN_2;
    let min_h = 1e-9;
    let mut t = ARG_T0;
    let mut prev = principal(t)?;
    let mut cont = prev;
    let mut h = max_h;
    let mut out = Vec::with_capacity(checkpoints.len());
    for &target in checkpoints {
        while t > target {
            let next = (t * (-h).exp()).max(target);
            let a = principal(next)?;
            let d = wrap_pi(a - prev);
            if d.abs() >= std::f64::consts::FRAC_PI_4 {
                h /= 2.0;
                if h < min_h {
                    return Err(Error::ArgTrackingUnstable { t });
                }
                continue;
            }
            cont += d;
            prev = a;
            t = next;
            h = (h * 2.0).min(max_h);
        }
        out.push(ArgSample { t, arg: cont, boundary_value: -2.0 / std::f64::consts::PI * cont });
    }
    Ok(out)
}

/// `-(2/pi) arg g(q/2p + i t_min)` with the argument continued from
/// `t = ARG_T0`; tends to `S(q/p)` as `t_min -> 0`.
pub fn arg_g_boundary(q: i64, p: i64, t_min: f64, bits: usize) -> Result<HpReal> {
    let s = arg_g_track(q, p, &[t_min], bits)?;
    Ok(HpReal::from_f64(s[0].boundary_value, bits))
}

/// `G(tau) = (i pi)^(-3) sum_{n odd <= n_max} sigma_{-3}(n) e^(i pi n tau)`
/// with a bound on the omitted terms (`sigma_{-3} <= zeta(3) < 1.2021`).
pub fn eichler_g(tau: &UpperHalfPoint, n_max: usize, bits: usize) -> Result<(HpComplex, TailBound)> {
    if n_max < 1 || n_max > MAX_TERMS {
        return Err(invalid(format!("n_max must be in 1..={MAX_TERMS}")));
    }
    let work = bits + 24;
    let sig = odd_sigma_minus3(n_max, work);
    let w = epi(&tau.tau().with_bits(work));
    let w2 = &w * &w;
    let mut pw = w.clone();
    let mut sum = HpComplex::zero(work);
    for n in (1..=n_max).step_by(2) {
        sum = &sum + &pw.scale(&sig[n]);
        pw = &pw * &w2;
    }
    // (i pi)^3 = -i pi^3, so 1/(i pi)^3 = i/pi^3
    let pi3 = HpReal::pi(work).powi(3);
    let g = sum.mul_i().scale(&pi3.recip());
    // sum_{n odd > n_max} r^n = r^m / (1 - r^2), m the next odd index
    let r = (-(&HpReal::pi(work) * tau.im().with_bits(work))).exp();
    let m = if n_max % 2 == 0 { n_max + 1 } else { n_max + 2 };
    let tail = HpReal::from_f64(1.2021, work) * r.powi(m) / (HpReal::one(work) - r.sqr()) / pi3;
    Ok((g.with_bits(bits), TailBound { value: tail.with_bits(bits), n_truncated: n_max }))
}

/// `sigma_{-3}(n)` for odd `n <= n_max` (even slots unused).
fn odd_sigma_minus3(n_max: usize, bits: usize) -> Vec<HpReal> {
    let mut s = vec![HpReal::zero(bits); n_max + 1];
    for d in (1..=n_max).step_by(2) {
        let inv = HpReal::from_i64(d as i64, bits).powi(3).recip();
        for m in (d..=n_max).step_by(2 * d) {
            s[m] = &s[m] + &inv;
        }
    }
    s
}

/// `Lambda(theta) = (16/pi^3) sum_{n odd} 1/(n^3 sin(n pi theta))`, to within
/// `eps_target`.
pub fn lambda_eval(theta: &ThetaSpec, eps_target: f64) -> Result<(HpReal, TailBound)> {
    lambda_eval_bits(theta, eps_target, DEFAULT_BITS)
}

/// Smallest odd `n` whose tail bound is at most `eps`.
fn lambda_terms_for(theta: &ThetaSpec, eps: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(invalid("eps_target must be positive"));
    }
    let c = 16.0 / std::f64::consts::PI.powi(3);
    let n = match theta {
        ThetaSpec::Rational(r) => {
            let b = rational_even_denominator(r)?;
            let s = (std::f64::consts::PI / b).sin();
            (c / (4.0 * s * eps)).sqrt()
        }
        ThetaSpec::Cf(cf) => {
            let a = cf_bound(cf)?;
            c * (a + 2.0) / (4.0 * eps)
        }
    };
    if !n.is_finite() || n > MAX_TERMS as f64 {
        return Err(invalid(format!("eps_target {eps:e} needs too many terms")));
    }
    let n = (n.ceil() as usize).max(1);
    Ok(if n % 2 == 0 { n + 1 } else { n })
}

pub fn lambda_eval_bits(theta: &ThetaSpec, eps_target: f64, bits: usize) -> Result<(HpReal, TailBound)> {
    let n = lambda_terms_for(theta, eps_target)?;
    lambda_partial(theta, n, bits)
}

fn rational_even_denominator(r: &Rational) -> Result<f64> {
    if r.denom().is_odd() {
        return Err(invalid(format!("Lambda at a rational needs an even denominator, got {r}")));
    }
    r.denom().to_f64().ok_or_else(|| invalid("denominator too large"))
}

fn cf_bound(cf: &CfExpansion) -> Result<f64> {
    let a = cf.partial_quotient_bound().ok_or_else(|| {
        Error::InsufficientDepth("Lambda of a generated expansion needs a partial-quotient bound".into())
    })?;
    a.to_f64().ok_or_else(|| invalid("partial-quotient bound too large"))
}

/// The Lambda series over odd `n <= n_max` with its certified tail bound.
///
/// `Lambda(theta + 1) = -Lambda(theta)` is applied exactly: the series is
/// always summed at the fractional part.
pub fn lambda_partial(theta: &ThetaSpec, n_max: usize, bits: usize) -> Result<(HpReal, TailBound)> {
    let n_max = if n_max % 2 == 0 { n_max.saturating_sub(1) } else { n_max };
    if n_max < 1 {
        return Err(invalid("n_max must be at least 1"));
    }
    let work = bits + 24 + 2 * (usize::BITS - n_max.leading_zeros()) as usize;
    let c = HpReal::pi(work).powi(3).recip().mul_i64(16);
    // 1/(n^3 sin) summed in place; `sines(n)` yields sin(n pi frac) for odd n
    let (shift, tail_const, sum) = match theta {
        ThetaSpec::Rational(r) => {
            let b = rational_even_denominator(r)?;
            let fl = r.floor().to_integer();
            let frac = r - Rational::from(fl.clone());
            let bb = frac.denom().to_usize().ok_or_else(|| invalid("denominator too large"))?;
            let a = frac.numer().to_usize().expect("0 <= frac < 1");
            // sin(n pi a/b) depends on n a mod 2b
            let step = HpReal::pi(work).div_i64(bb as i64);
            let period = 2 * bb;
            let len = period.min(n_max + 1);
            let table: Vec<HpReal> = (0..len)
                .map(|n| {
                    if n % 2 == 1 {
                        step.mul_i64(((n * a) % period) as i64).sin()
                    } else {
                        HpReal::zero(work)
                    }
                })
                .collect();
            let mut sum = HpReal::zero(work);
            for n in (1..=n_max).step_by(2) {
                let n3 = HpReal::from_i64(n as i64, work).powi(3);
                sum = sum + (n3 * &table[n % period]).recip();
            }
            // |sin| >= sin(pi/b) for odd n, and sum_{n odd > N} n^-3 <= 1/(4 N^2)
            let sb = HpReal::pi(work).div_i64(b as i64).sin();
            let nn = HpReal::from_i64(n_max as i64, work);
            let tail = (sb * nn.sqr().mul_i64(4)).recip();
            (fl, tail, sum)
        }
        ThetaSpec::Cf(cf) => {
            let a = cf.partial_quotient_bound().ok_or_else(|| {
                Error::InsufficientDepth("Lambda of a generated expansion needs a partial-quotient bound".into())
            })?;
            let frac = cf_fraction(cf, n_max, &a, work)?;
            // z_n = e^(i pi n frac), advanced by e^(2 pi i frac)
            let z1 = HpComplex::cis(&(&HpReal::pi(work) * &frac));
            let w = &z1 * &z1;
            let mut z = z1.clone();
            let mut sum = HpReal::zero(work);
            for n in (1..=n_max).step_by(2) {
                if n % 4097 == 1 && n > 1 {
                    // re-anchor to keep rounding drift out of tiny sines
                    z = HpComplex::cis(&(&HpReal::pi(work) * &frac.mul_i64(n as i64)));
                }
                let n3 = HpReal::from_i64(n as i64, work).powi(3);
                sum = sum + (n3 * &z.im).recip();
                z = &z * &w;
            }
            // |sin(n pi theta)| >= 2 dist(n theta, Z) >= 2/((A+2) n), and
            // sum_{n odd > N} n^-2 <= 1/(2N)
            let ap2 = HpReal::from_bigint(&(a + 2u32), work);
            let tail = ap2.div_i64(4 * n_max as i64);
            (cf.a0().clone(), tail, sum)
        }
    };
    let mut value = &c * &sum;
    if shift.is_odd() {
        value = -value;
    }
    let tail = &c * &tail_const;
    Ok((value.with_bits(bits), TailBound { value: tail.with_bits(bits), n_truncated: n_max }))
}

/// The fractional part of a CF-backed `theta`, accurate enough that
/// `sin(n pi theta)` is good to `work` bits for `n <= n_max`.
fn cf_fraction(cf: &CfExpansion, n_max: usize, a_bound: &BigInt, work: usize) -> Result<HpReal> {
    // need p_k^2 > n_max^2 (A + 2) 2^work
    let need = (BigInt::from(n_max).pow(2) * (a_bound + 2u32)) << work;
    let mut last = None;
    for c in cf.convergent_iter() {
        let ok = &c.p * &c.p > need;
        last = Some(c);
        if ok {
            let c = last.unwrap();
            let fr = Rational::new(c.q - cf.a0() * &c.p, c.p);
            return Ok(HpReal::from_rational(&fr, work));
        }
    }
    let depth = last.map(|c| c.k).unwrap_or(0);
    Err(Error::InsufficientDepth(format!("expansion exhausted at depth {depth} before reaching the precision needed for Lambda")))
}

/// `G(tau) - G(tau/(2 tau + 1)) (2 tau + 1)^2 - (2 tau^2 + 2 tau + 1)/32`,
/// with the combined tail bound of the two truncated series.
pub fn period_residual(tau: &UpperHalfPoint, n_max: usize, bits: usize) -> Result<(HpComplex, HpReal)> {
    let work = bits + 16;
    let t = tau.tau().with_bits(work);
    let image = tau.mobius(1, 0, 2, 1)?;
    let (g0, tb0) = eichler_g(tau, n_max, work)?;
    let (g1, tb1) = eichler_g(&image, n_max, work)?;
    let one = HpComplex::one(work);
    let two = HpReal::from_i64(2, work);
    let c = t.scale(&two) + &one;
    let c2 = &c * &c;
    let poly = (&(&t * &t).scale(&two) + &t.scale(&two) + one).scale(&HpReal::from_i64(32, work).recip());
    let r = g0 - &g1 * &c2 - poly;
    let tail = tb0.value + tb1.value * c2.abs();
    Ok((r.with_bits(bits), tail.with_bits(bits)))
}

/// `Lambda(theta/(2 theta + 1)) (2 theta + 1)^2 - Lambda(theta) - (2 theta^2 + 2 theta + 1)`
/// with the combined tail bound. CF inputs must be finite or eventually
/// periodic so the image can be expanded exactly.
pub fn lambda_transform_residual(theta: &ThetaSpec, eps: f64) -> Result<(HpReal, HpReal)> {
    let bits = DEFAULT_BITS;
    let (image, value) = match theta {
        ThetaSpec::Rational(r) => {
            let two = Rational::from(BigInt::from(2));
            let den = &two * r + Rational::one();
            if den.is_zero() {
                return Err(invalid("theta = -1/2 has no image"));
            }
            (ThetaSpec::Rational(r / den), HpReal::from_rational(r, bits + 32))
        }
        ThetaSpec::Cf(cf) => {
            if matches!(cf.terms(), CfTerms::Generated(_)) {
                return Err(Error::Unsupported(
                    "transform residual needs a periodic expansion".into(),
                ));
            }
            let img = ThetaSpec::from_cf(mobius(cf, [1, 0, 2, 1])?);
            let v = cf_value(cf, bits + 32)?;
            (img, v)
        }
    };
    let work = bits + 32;
    let one = HpReal::one(work);
    let m = value.mul_i64(2) + &one;
    let m2 = m.sqr();
    let scale = m2.to_f64().abs() * 1.01 + 1e-300;
    let (l0, t0) = lambda_eval_bits(theta, eps / 2.0, work)?;
    let (l1, t1) = lambda_eval_bits(&image, eps / (2.0 * scale), work)?;
    let poly = value.sqr().mul_i64(2) + value.mul_i64(2) + one;
    let r = l1 * &m2 - l0 - poly;
    let tail = t0.value + t1.value * m2;
    Ok((r.with_bits(bits), tail.with_bits(bits)))
}

/// `theta` from a deep convergent (error below `2^-bits`).
fn cf_value(cf: &CfExpansion, bits: usize) -> Result<HpReal> {
    let need = BigInt::one() << (bits / 2 + 8);
    for c in cf.convergent_iter() {
        if c.p > need {
            return Ok(HpReal::from_rational(&c.value(), bits));
        }
    }
    match cf.to_rational() {
        Some(r) => Ok(HpReal::from_rational(&r, bits)),
        None => Err(Error::InsufficientDepth("expansion too short to evaluate theta".into())),
    }
}
