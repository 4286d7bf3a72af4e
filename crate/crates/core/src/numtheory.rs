//! Exact rationals, regular continued fractions, convergents and the sign
//! sequence `eps_j = (-1)^floor(j q / p)`.
//!
//! Numerators are written `q` and denominators `p` throughout, so the k-th
//! convergent of an expansion is `q_k / p_k`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};

pub type Rational = BigRational;

/// `n/d` as an exact rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

/// Validates `p > 0` and `gcd(q, p) = 1`.
pub fn check_coprime(q: i64, p: i64) -> Result<()> {
    if p <= 0 {
        return Err(invalid(format!("denominator must be positive, got {p}")));
    }
    if q.gcd(&p) != 1 {
        return Err(Error::NotCoprime { q, p });
    }
    Ok(())
}

/// Validates an odd coprime pair with `0 < q < p`, the domain of the
/// Frobenius algebra and of the polynomial algorithm.
pub fn check_odd_pair(q: i64, p: i64) -> Result<()> {
    check_coprime(q, p)?;
    if p < 3 || p % 2 == 0 || q % 2 == 0 {
        return Err(invalid(format!("need odd p >= 3 and odd q, got q={q}, p={p}")));
    }
    if q <= 0 || q >= p {
        return Err(invalid(format!("need 0 < q < p, got q={q}, p={p}")));
    }
    Ok(())
}

/// `(-1)^floor(j q / p)` without validation. Requires `p > 0`.
#[inline]
pub(crate) fn eps_raw(j: i64, q: i64, p: i64) -> i8 {
    let f = (j as i128 * q as i128).div_euclid(p as i128);
    if f & 1 == 0 {
        1
    } else {
        -1
    }
}

/// The sign of the quantum integer `[j]` at `zeta = exp(i pi q / p)`.
pub fn eps_sign(j: i64, q: i64, p: i64) -> Result<i8> {
    check_coprime(q, p)?;
    if (j as i128 * q as i128) % p as i128 == 0 {
        return Err(Error::QuantumIntegerVanishes { j, q: q.to_string(), p: p.to_string() });
    }
    Ok(eps_raw(j, q, p))
}

/// `eps_1 .. eps_{p-1}` for a coprime pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignSequence {
    p: i64,
    q: i64,
    // index 0 holds +1 so that `eps[j]` is `eps_j`
    eps: Vec<i8>,
}

impl SignSequence {
    pub fn new(q: i64, p: i64) -> Result<Self> {
        check_coprime(q, p)?;
        let eps = (0..p).map(|j| if j == 0 { 1 } else { eps_raw(j, q, p) }).collect();
        Ok(SignSequence { p, q, eps })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    /// `eps_j` for `1 <= j <= p-1`; `j = 0` returns +1.
    #[inline]
    pub fn get(&self, j: usize) -> i8 {
        self.eps[j]
    }

    /// `eps_1 .. eps_{p-1}`.
    pub fn signs(&self) -> &[i8] {
        &self.eps[1..]
    }

    /// Prefix products `fs[n] = eps_1 ... eps_n`, `fs[0] = 1`. These are the
    /// signs of the quantum factorials `[n]!`.
    pub fn factorial_signs(&self) -> Vec<i8> {
        let mut out = Vec::with_capacity(self.eps.len());
        let mut acc = 1i8;
        out.push(1);
        for &e in &self.eps[1..] {
            acc *= e;
            out.push(acc);
        }
        out
    }
}

/// A user-supplied partial-quotient generator for an infinite expansion.
#[derive(Clone)]
pub struct TermGenerator {
    f: Arc<dyn Fn(usize) -> BigInt + Send + Sync>,
    bound: Option<BigInt>,
    max_depth: Option<usize>,
    label: String,
}

impl fmt::Debug for TermGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TermGenerator")
            .field("label", &self.label)
            .field("bound", &self.bound)
            .field("max_depth", &self.max_depth)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum CfTerms {
    Finite(Vec<BigInt>),
    Periodic { prefix: Vec<BigInt>, period: Vec<BigInt> },
    Generated(TermGenerator),
}

/// A regular continued fraction `[a0; a1, a2, ...]`.
#[derive(Debug, Clone)]
pub struct CfExpansion {
    a0: BigInt,
    terms: CfTerms,
}

fn check_positive(terms: &[BigInt]) -> Result<()> {
    if let Some(t) = terms.iter().find(|t| !t.is_positive()) {
        return Err(invalid(format!("partial quotients must be >= 1, got {t}")));
    }
    Ok(())
}

impl CfExpansion {
    /// Finite expansion, brought into canonical form (last term >= 2).
    pub fn finite(a0: BigInt, mut terms: Vec<BigInt>) -> Result<Self> {
        check_positive(&terms)?;
        let mut a0 = a0;
        if terms.last().is_some_and(|t| t.is_one()) {
            terms.pop();
            match terms.last_mut() {
                Some(t) => *t += 1,
                None => a0 += 1,
            }
        }
        Ok(CfExpansion { a0, terms: CfTerms::Finite(terms) })
    }

    /// Eventually periodic expansion `[a0; prefix, (period)]`.
    pub fn periodic(a0: BigInt, prefix: Vec<BigInt>, period: Vec<BigInt>) -> Result<Self> {
        if period.is_empty() {
            return Err(invalid("empty period"));
        }
        check_positive(&prefix)?;
        check_positive(&period)?;
        Ok(CfExpansion { a0, terms: CfTerms::Periodic { prefix, period } })
    }

    /// Infinite expansion whose `i`-th partial quotient (`i >= 1`) is `f(i)`.
    ///
    /// `bound`, if given, must dominate every partial quotient; it is what
    /// makes tail estimates for `Lambda` computable. `max_depth` caps how many
    /// terms may be requested.
    ///
    /// # Panics
    ///
    /// Term access panics if `f` returns a value below 1.
    pub fn generated<F>(
        a0: BigInt,
        f: F,
        bound: Option<BigInt>,
        max_depth: Option<usize>,
        label: impl Into<String>,
    ) -> Self
    where
        F: Fn(usize) -> BigInt + Send + Sync + 'static,
    {
        CfExpansion {
            a0,
            terms: CfTerms::Generated(TermGenerator {
                f: Arc::new(f),
                bound,
                max_depth,
                label: label.into(),
            }),
        }
    }

    /// `[0; 1, 1, 1, ...]`, the expansion of `(sqrt 5 - 1)/2`.
    pub fn all_ones() -> Self {
        CfExpansion::periodic(BigInt::zero(), vec![], vec![BigInt::one()]).unwrap()
    }

    pub fn a0(&self) -> &BigInt {
        &self.a0
    }

    pub fn terms(&self) -> &CfTerms {
        &self.terms
    }

    /// Partial quotient `a_i`; `i = 0` gives `a0`. `None` past the end.
    pub fn term(&self, i: usize) -> Option<BigInt> {
        if i == 0 {
            return Some(self.a0.clone());
        }
        match &self.terms {
            CfTerms::Finite(t) => t.get(i - 1).cloned(),
            CfTerms::Periodic { prefix, period } => {
                let k = i - 1;
                if k < prefix.len() {
                    Some(prefix[k].clone())
                } else {
                    Some(period[(k - prefix.len()) % period.len()].clone())
                }
            }
            CfTerms::Generated(g) => {
                if g.max_depth.is_some_and(|m| i > m) {
                    return None;
                }
                let v = (g.f)(i);
                assert!(v.is_positive(), "generator `{}` returned a_{i} = {v}", g.label);
                Some(v)
            }
        }
    }

    /// Number of partial quotients after `a0`, or `None` if unbounded.
    pub fn available_terms(&self) -> Option<usize> {
        match &self.terms {
            CfTerms::Finite(t) => Some(t.len()),
            CfTerms::Periodic { .. } => None,
            CfTerms::Generated(g) => g.max_depth,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.terms, CfTerms::Finite(_))
    }

    /// An upper bound on `a_i` for `i >= 1`, when one is known.
    pub fn partial_quotient_bound(&self) -> Option<BigInt> {
        match &self.terms {
            CfTerms::Finite(t) => Some(t.iter().max().cloned().unwrap_or_else(BigInt::one)),
            CfTerms::Periodic { prefix, period } => prefix.iter().chain(period).max().cloned(),
            CfTerms::Generated(g) => g.bound.clone(),
        }
    }

    /// Exact value of a finite expansion.
    pub fn to_rational(&self) -> Option<Rational> {
        let CfTerms::Finite(t) = &self.terms else { return None };
        let c = convergents(self, t.len()).ok()?;
        c.last().map(Convergent::value)
    }

    /// Lazily evaluated convergents `k = 0, 1, 2, ...`.
    pub fn convergent_iter(&self) -> ConvergentIter<'_> {
        ConvergentIter {
            cf: self,
            k: 0,
            prev: (BigInt::one(), BigInt::zero()),
            prev2: (BigInt::zero(), BigInt::one()),
        }
    }

    /// Parses `"a0;a1,a2,..."`. A parenthesised tail marks the period, as in
    /// `"0;(1)"` or `"1;2,(3,4)"`. Without `;` the list is `a1, a2, ...` and
    /// `a0 = 0`. Surrounding brackets are ignored, and `ones` or `golden`
    /// stand for `[0; 1, 1, ...]`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('[').trim_end_matches(']').trim();
        if s.eq_ignore_ascii_case("ones") || s.eq_ignore_ascii_case("golden") {
            return Ok(CfExpansion::all_ones());
        }
        let num = |t: &str| -> Result<BigInt> {
            t.trim().parse::<BigInt>().map_err(|_| invalid(format!("bad partial quotient `{}`", t.trim())))
        };
        let (a0, rest) = match s.split_once(';') {
            Some((a, r)) => (num(a)?, r.trim()),
            None => (BigInt::zero(), s),
        };
        let (head, period) = match rest.find('(') {
            Some(i) => {
                let tail = &rest[i + 1..];
                let Some(close) = tail.find(')') else {
                    return Err(invalid("unbalanced parenthesis in expansion"));
                };
                if !tail[close + 1..].trim().is_empty() {
                    return Err(invalid("period must come last"));
                }
                (&rest[..i], Some(&tail[..close]))
            }
            None => (rest, None),
        };
        let list = |t: &str| -> Result<Vec<BigInt>> {
            t.split(',').map(str::trim).filter(|x| !x.is_empty()).map(num).collect()
        };
        let prefix = list(head)?;
        match period {
            Some(per) => CfExpansion::periodic(a0, prefix, list(per)?),
            None => CfExpansion::finite(a0, prefix),
        }
    }
}

impl fmt::Display for CfExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[BigInt]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match &self.terms {
            CfTerms::Finite(t) if t.is_empty() => write!(f, "[{}]", self.a0),
            CfTerms::Finite(t) => write!(f, "[{};{}]", self.a0, join(t)),
            CfTerms::Periodic { prefix, period } => {
                write!(f, "[{};", self.a0)?;
                if !prefix.is_empty() {
                    write!(f, "{},", join(prefix))?;
                }
                write!(f, "({})]", join(period))
            }
            CfTerms::Generated(g) => write!(f, "[{};<{}>]", self.a0, g.label),
        }
    }
}

impl PartialEq for CfExpansion {
    fn eq(&self, other: &Self) -> bool {
        match (&self.terms, &other.terms) {
            (CfTerms::Finite(a), CfTerms::Finite(b)) => self.a0 == other.a0 && a == b,
            (
                CfTerms::Periodic { prefix: p1, period: q1 },
                CfTerms::Periodic { prefix: p2, period: q2 },
            ) => self.a0 == other.a0 && p1 == p2 && q1 == q2,
            _ => false,
        }
    }
}

/// The canonical regular continued fraction of a rational.
pub fn cf_expand(r: &Rational) -> CfExpansion {
    let mut num = r.numer().clone();
    let mut den = r.denom().clone();
    let a0 = num.div_floor(&den);
    let mut terms = Vec::new();
    let mut rem = &num - &a0 * &den;
    while !rem.is_zero() {
        num = std::mem::replace(&mut den, rem);
        let (a, r) = num.div_mod_floor(&den);
        terms.push(a);
        rem = r;
    }
    CfExpansion::finite(a0, terms).expect("Euclid produces positive quotients")
}

/// The `k`-th convergent `q_k / p_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergent {
    pub k: usize,
    pub q: BigInt,
    pub p: BigInt,
}

impl Convergent {
    pub fn value(&self) -> Rational {
        Rational::new(self.q.clone(), self.p.clone())
    }
}

pub struct ConvergentIter<'a> {
    cf: &'a CfExpansion,
    k: usize,
    prev: (BigInt, BigInt),
    prev2: (BigInt, BigInt),
}

impl Iterator for ConvergentIter<'_> {
    type Item = Convergent;

    fn next(&mut self) -> Option<Convergent> {
        let a = self.cf.term(self.k)?;
        let q = &a * &self.prev.0 + &self.prev2.0;
        let p = &a * &self.prev.1 + &self.prev2.1;
        self.prev2 = std::mem::replace(&mut self.prev, (q.clone(), p.clone()));
        let c = Convergent { k: self.k, q, p };
        self.k += 1;
        Some(c)
    }
}

/// Convergents `k = 0..=depth` from `q_k = a_k q_{k-1} + q_{k-2}` and
/// `p_k = a_k p_{k-1} + p_{k-2}` with `q_{-1} = 1, p_{-1} = 0`.
pub fn convergents(cf: &CfExpansion, depth: usize) -> Result<Vec<Convergent>> {
    let out: Vec<_> = cf.convergent_iter().take(depth + 1).collect();
    if out.len() < depth + 1 {
        return Err(Error::ExpansionExhausted {
            requested: depth,
            available: out.len().saturating_sub(1),
        });
    }
    Ok(out)
}

/// `(1/(p_k (p_k + p_{k+1})), 1/(p_k p_{k+1}))`, which bracket
/// `|theta - q_k/p_k|`.
pub fn convergent_gap_bounds(theta: &CfExpansion, k: usize) -> Result<(Rational, Rational)> {
    if k < 1 {
        return Err(invalid("convergent_gap_bounds needs k >= 1"));
    }
    let c = convergents(theta, k + 1)?;
    let (pk, pk1) = (&c[k].p, &c[k + 1].p);
    let lower = Rational::new(BigInt::one(), pk * (pk + pk1));
    let upper = Rational::new(BigInt::one(), pk * pk1);
    Ok((lower, upper))
}

/// Lower bound `4 / (p_k^2 (a_{i+1} + 2)^2)` for
/// `sin^2(pi n / 2 p_k) sin^2(pi q_k n / p_k)`, where `i < k` is the largest
/// index with `p_i <= n`.
pub fn zaremba_denominator_bound(theta: &CfExpansion, k: usize, n: &BigInt) -> Result<Rational> {
    if k < 2 {
        return Err(invalid("zaremba_denominator_bound needs k >= 2"));
    }
    let c = convergents(theta, k)?;
    let pk = &c[k].p;
    if !n.is_positive() || n >= pk {
        return Err(invalid(format!("need 1 <= n < p_k = {pk}, got {n}")));
    }
    let i = (0..k).rev().find(|&i| &c[i].p <= n).expect("p_0 = 1 <= n");
    let a = theta.term(i + 1).expect("i + 1 <= k");
    let d = pk * (a + 2u32);
    Ok(Rational::new(BigInt::from(4), &d * &d))
}

/// A real argument given either exactly or by its continued fraction.
#[derive(Debug, Clone)]
pub enum ThetaSpec {
    Rational(Rational),
    Cf(CfExpansion),
}

impl ThetaSpec {
    /// Finite expansions are normalised to their rational value.
    pub fn from_cf(cf: CfExpansion) -> Self {
        match cf.to_rational() {
            Some(r) => ThetaSpec::Rational(r),
            None => ThetaSpec::Cf(cf),
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            ThetaSpec::Rational(r) => Some(r),
            ThetaSpec::Cf(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ThetaSpec::Rational(r) => r.to_string(),
            ThetaSpec::Cf(cf) => cf.to_string(),
        }
    }
}

/// Upper limit on how many convergents are generated when deciding a floor.
const MAX_DECISION_DEPTH: usize = 100_000;

/// `floor(m theta)` for `m = 0..=m_max`.
///
/// For rational theta this is exact. For an infinite expansion each floor is
/// decided by consecutive convergents `lo < theta < hi`; if the expansion ends
/// (or `MAX_DECISION_DEPTH` is hit) before the bracket is narrow enough, the
/// result is [`Error::InsufficientDepth`].
pub fn floor_multiples(theta: &ThetaSpec, m_max: usize) -> Result<Vec<BigInt>> {
    match theta {
        ThetaSpec::Rational(r) => Ok((0..=m_max)
            .map(|m| (r * BigInt::from(m)).floor().to_integer())
            .collect()),
        ThetaSpec::Cf(cf) => {
            if let Some(r) = cf.to_rational() {
                return floor_multiples(&ThetaSpec::Rational(r), m_max);
            }
            let mut it = cf.convergent_iter();
            let mut a = it.next().expect("a0 always present");
            let mut b = it
                .next()
                .ok_or_else(|| Error::InsufficientDepth("expansion has no partial quotients".into()))?;
            let mut out = vec![BigInt::zero()];
            for m in 1..=m_max {
                let mb = BigInt::from(m);
                loop {
                    // even-index convergents lie below theta, odd ones above
                    let (lo, hi) = if a.k % 2 == 0 { (&a, &b) } else { (&b, &a) };
                    let fl = (&mb * &lo.q).div_floor(&lo.p);
                    // decided iff m*hi <= fl + 1, i.e. m*hi.q <= (fl+1)*hi.p
                    if &mb * &hi.q <= (&fl + 1) * &hi.p {
                        out.push(fl);
                        break;
                    }
                    if b.k >= MAX_DECISION_DEPTH {
                        return Err(Error::InsufficientDepth(format!(
                            "floor({m} theta) undecided after {} convergents",
                            b.k
                        )));
                    }
                    match it.next() {
                        Some(c) => {
                            a = std::mem::replace(&mut b, c);
                        }
                        None => {
                            return Err(Error::InsufficientDepth(format!(
                                "floor({m} theta) undecided at depth {}",
                                b.k
                            )))
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Signs `(-1)^floor(m theta)` for `m = 0..=m_max`, failing if some `m theta`
/// with `m >= 1` is an integer (the quantum integer `[m]` vanishes).
pub fn theta_signs(theta: &ThetaSpec, m_max: usize) -> Result<Vec<i8>> {
    if let ThetaSpec::Rational(r) = theta {
        for m in 1..=m_max {
            if (r * BigInt::from(m)).is_integer() {
                return Err(Error::QuantumIntegerVanishes {
                    j: m as i64,
                    q: r.numer().to_string(),
                    p: r.denom().to_string(),
                });
            }
        }
    }
    let fl = floor_multiples(theta, m_max)?;
    Ok(fl.iter().map(|f| if f.is_even() { 1 } else { -1 }).collect())
}

// A real quadratic irrational (P + sqrt D) / Q with Q | D - P^2.
struct Surd {
    p: BigInt,
    q: BigInt,
    d: BigInt,
}

impl Surd {
    fn floor(&self, root: &BigInt) -> BigInt {
        if self.q.is_positive() {
            (&self.p + root).div_floor(&self.q)
        } else {
            (-&self.p - root - 1i32).div_floor(&(-&self.q))
        }
    }
}

fn mat_mul(x: [BigInt; 4], y: &[BigInt; 4]) -> [BigInt; 4] {
    [
        &x[0] * &y[0] + &x[1] * &y[2],
        &x[0] * &y[1] + &x[1] * &y[3],
        &x[2] * &y[0] + &x[3] * &y[2],
        &x[2] * &y[1] + &x[3] * &y[3],
    ]
}

fn cf_matrix(a: &BigInt) -> [BigInt; 4] {
    [a.clone(), BigInt::one(), BigInt::one(), BigInt::zero()]
}

/// The expansion of `(a theta + b) / (c theta + d)`.
///
/// Supported for rational and eventually periodic `theta`; the image of a
/// quadratic irrational is again eventually periodic and is computed exactly.
pub fn mobius(theta: &CfExpansion, m: [i64; 4]) -> Result<CfExpansion> {
    let [a, b, c, d] = m.map(BigInt::from);
    if &a * &d == &b * &c {
        return Err(invalid("degenerate Moebius transformation"));
    }
    match &theta.terms {
        CfTerms::Finite(_) => {
            let r = theta.to_rational().expect("finite");
            let den = Rational::from(c) * &r + Rational::from(d);
            if den.is_zero() {
                return Err(invalid("Moebius image is infinite"));
            }
            Ok(cf_expand(&((Rational::from(a) * &r + Rational::from(b)) / den)))
        }
        CfTerms::Generated(_) => Err(Error::Unsupported(
            "Moebius transform of a generator-backed expansion".into(),
        )),
        CfTerms::Periodic { prefix, period } => {
            // y = [b1; b2, ..., bm, y] solves C y^2 + (D - A) y - B = 0
            let pm = period
                .iter()
                .fold([BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one()], |acc, t| {
                    mat_mul(acc, &cf_matrix(t))
                });
            let [pa, pb, pc, pd] = pm;
            let u = &pa - &pd;
            let disc = &u * &u + BigInt::from(4) * &pb * &pc;
            let v = BigInt::from(2) * &pc;
            // theta = [a0; prefix, y]
            let mut h = cf_matrix(&theta.a0);
            for t in prefix {
                h = mat_mul(h, &cf_matrix(t));
            }
            let [al, be, ga, de] = mat_mul([a, b, c, d], &h);
            let x = &al * &u + &be * &v;
            let y = &ga * &u + &de * &v;
            let r = &x * &y - &al * &ga * &disc;
            let s = &al * &y - &ga * &x;
            let t = &y * &y - &ga * &ga * &disc;
            if t.is_zero() {
                return Err(invalid("Moebius image is infinite"));
            }
            if s.is_zero() {
                return Ok(cf_expand(&Rational::new(r, t)));
            }
            let (mut p, mut q, s) = if s.is_negative() { (-r, -t, -s) } else { (r, t, s) };
            let mut dd = &s * &s * disc;
            if !(&dd - &p * &p).is_multiple_of(&q) {
                let aq = q.abs();
                p *= &aq;
                dd *= &aq * &aq;
                q *= aq;
            }
            expand_surd(Surd { p, q, d: dd })
        }
    }
}

fn expand_surd(mut s: Surd) -> Result<CfExpansion> {
    let root = s.d.sqrt();
    if &root * &root == s.d {
        return Err(invalid("surd with square discriminant"));
    }
    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut terms: Vec<BigInt> = Vec::new();
    loop {
        if let Some(&j) = seen.get(&(s.p.clone(), s.q.clone())) {
            let len = terms.len() - j;
            let at = |i: usize| terms[if i < terms.len() { i } else { j + (i - j) % len }].clone();
            let start = j.max(1);
            let prefix = (1..start).map(at).collect();
            let period = (start..start + len).map(at).collect();
            return CfExpansion::periodic(terms[0].clone(), prefix, period);
        }
        if terms.len() > 1_000_000 {
            return Err(Error::Unsupported("period too long".into()));
        }
        seen.insert((s.p.clone(), s.q.clone()), terms.len());
        let a = s.floor(&root);
        let p1 = &a * &s.q - &s.p;
        let q1 = (&s.d - &p1 * &p1) / &s.q;
        terms.push(a);
        s.p = p1;
        s.q = q1;
    }
}

/// Best-effort `f64` of a rational, for reporting only.
pub fn rational_to_f64(r: &Rational) -> f64 {
    let (n, d) = (r.numer(), r.denom());
    match (n.to_f64(), d.to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() && b != 0.0 => a / b,
        _ => {
            let shift = (d.bits().max(n.bits()) as i64 - 60).max(0) as usize;
            let a = (n >> shift).to_f64().unwrap_or(f64::NAN);
            let b = (d >> shift).to_f64().unwrap_or(f64::NAN);
            a / b
        }
    }
}
