//! Batch sweeps, experiments and figure data built on the other modules.
//!
//! Every sweep returns a [`SweepReport`]; items are evaluated on a rayon pool
//! and merged in input order, so reports are identical across thread counts
//! apart from the timing fields.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use indexmap::IndexMap;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dedekind::{check_reciprocity, check_s_transform, check_smoothing};
use crate::error::{invalid, Error, Result};
use crate::genus2::{sigma2_auto, sigma2_by, sigma2_lattice, Sigma2Method, TrigEvalConfig};
use crate::hp::HpReal;
use crate::modular::lambda_eval;
use crate::numtheory::{rat, rational_to_f64, CfExpansion, Rational, ThetaSpec};
use crate::polytrace::{charpoly_pair, sigma_g_fast, sigma_gn_fast};

/// Outcome of one sweep item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepItem {
    pub inputs: IndexMap<String, String>,
    pub values: IndexMap<String, String>,
    /// Exact rational or decimal text; empty when not applicable.
    pub residual: String,
    pub status: Status,
    pub wall_time_us: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub name: String,
    /// Whether a failing item violates a contract (as opposed to being
    /// reported for information).
    pub hard_contract: bool,
    pub summary: SweepSummary,
    pub notes: Vec<String>,
    pub items: Vec<SweepItem>,
}

impl SweepReport {
    pub fn new(name: impl Into<String>, hard_contract: bool, items: Vec<SweepItem>, notes: Vec<String>) -> Self {
        let mut summary = SweepSummary { total: items.len(), ..Default::default() };
        for it in &items {
            match it.status {
                Status::Pass => summary.pass += 1,
                Status::Fail => summary.fail += 1,
                Status::Skipped => summary.skipped += 1,
            }
        }
        SweepReport { name: name.into(), hard_contract, summary, notes, items }
    }

    /// False only when a hard contract has failing items.
    pub fn contract_ok(&self) -> bool {
        !self.hard_contract || self.summary.fail == 0
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// One row per item: `status, residual`, then every input and value
    /// column in order of first appearance. Timing is left out so identical
    /// runs give identical bytes.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut inputs: Vec<&str> = Vec::new();
        let mut values: Vec<&str> = Vec::new();
        for it in &self.items {
            for k in it.inputs.keys() {
                if !inputs.contains(&k.as_str()) {
                    inputs.push(k);
                }
            }
            for k in it.values.keys() {
                if !values.contains(&k.as_str()) {
                    values.push(k);
                }
            }
        }
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["status", "residual"];
        header.extend(&inputs);
        header.extend(&values);
        wr.write_record(&header)?;
        for it in &self.items {
            let mut row: Vec<&str> = vec![it.status.as_str(), &it.residual];
            row.extend(inputs.iter().map(|k| it.inputs.get(*k).map(String::as_str).unwrap_or("")));
            row.extend(values.iter().map(|k| it.values.get(*k).map(String::as_str).unwrap_or("")));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    /// `name: pass/total (fail F, skipped S)`.
    pub fn summary_line(&self) -> String {
        let s = &self.summary;
        format!("{}: {}/{} pass (fail {}, skipped {})", self.name, s.pass, s.total, s.fail, s.skipped)
    }
}

fn map(pairs: &[(&str, String)]) -> IndexMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Runs `f` on a pool with `threads` workers (`None`: rayon's default).
pub fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(invalid("thread count must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_micros() as u64)
}

fn odd_coprime_pairs(p_lo: i64, p_hi: i64) -> Vec<(i64, i64)> {
    let mut v = Vec::new();
    for p in (p_lo..=p_hi).filter(|p| p % 2 == 1) {
        for q in (1..p).step_by(2).filter(|q| q.gcd(&p) == 1) {
            v.push((q, p));
        }
    }
    v
}

/// Largest `p_max` for which the conjecture sweep is a hard contract.
pub const CONJECTURE_VERIFIED_PMAX: i64 = 100;
/// Fraction of conjecture pairs re-checked with the lattice sum.
pub const CONJECTURE_LATTICE_FRACTION: f64 = 0.05;
const CONJECTURE_SEED: u64 = 0x5eed_0068;

/// `r = sigma_2(q/(2q+p)) - sigma_2(q/p) - (2q^2 + 2pq + p^2 - 1)` for every
/// odd coprime `0 < q < p < p_max`. A deterministic 5% subsample also
/// recomputes both signatures by the lattice sum.
pub fn conjecture_sweep(p_max: i64, threads: Option<usize>) -> Result<SweepReport> {
    if p_max < 3 {
        return Err(invalid(format!("p_max must be at least 3, got {p_max}")));
    }
    let pairs = odd_coprime_pairs(3, p_max - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(CONJECTURE_SEED);
    let sampled: Vec<bool> = pairs.iter().map(|_| rng.gen_bool(CONJECTURE_LATTICE_FRACTION)).collect();
    let items = in_pool(threads, || {
        pairs
            .par_iter()
            .zip(sampled.par_iter())
            .map(|(&(q, p), &lattice)| -> Result<SweepItem> {
                let (res, us) = timed(|| -> Result<_> {
                    let big = sigma2_auto(2 * q + p, q)?;
                    let small = sigma2_auto(p, q)?;
                    let poly = BigInt::from(2 * q * q + 2 * p * q + p * p - 1);
                    let r = &big - &small - poly;
                    let check = if lattice {
                        let ok = sigma2_lattice(2 * q + p, q)? == big && sigma2_lattice(p, q)? == small;
                        Some(ok)
                    } else {
                        None
                    };
                    Ok((big, small, r, check))
                });
                let (big, small, r, check) = res?;
                let ok = r.is_zero() && check != Some(false);
                let lattice_txt = match check {
                    None => "",
                    Some(true) => "agree",
                    Some(false) => "disagree",
                };
                Ok(SweepItem {
                    inputs: map(&[("q", q.to_string()), ("p", p.to_string())]),
                    values: map(&[
                        ("sigma2_image", big.to_string()),
                        ("sigma2", small.to_string()),
                        ("lattice_check", lattice_txt.to_string()),
                    ]),
                    residual: r.to_string(),
                    status: if ok { Status::Pass } else { Status::Fail },
                    wall_time_us: us,
                })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let hard = p_max <= CONJECTURE_VERIFIED_PMAX;
    let mut notes = vec![format!(
        "pairs: odd coprime 0 < q < p < {p_max}; image q/(2q+p); lattice recheck on a seeded {:.0}% subsample",
        CONJECTURE_LATTICE_FRACTION * 100.0
    )];
    if !hard {
        notes.push(format!("p_max > {CONJECTURE_VERIFIED_PMAX}: reported without a hard contract"));
    }
    Ok(SweepReport::new("conjecture", hard, items, notes))
}

/// One convergent of an asymptotics run.
#[derive(Debug, Clone)]
pub struct AsymptoticsRow {
    pub k: usize,
    pub a_k: BigInt,
    pub q_k: BigInt,
    pub p_k: BigInt,
    pub sigma2: BigInt,
    /// `sigma2 / p_k^2`, exact.
    pub ratio: Rational,
    pub lambda: HpReal,
    pub abs_diff: f64,
    pub rel_diff: f64,
}

impl AsymptoticsRow {
    pub const COLUMNS: [&'static str; 9] = ["k", "a_k", "q_k", "p_k", "sigma2", "ratio", "lambda", "abs_diff", "rel_diff"];

    pub fn record(&self) -> Vec<String> {
        vec![
            self.k.to_string(),
            self.a_k.to_string(),
            self.q_k.to_string(),
            self.p_k.to_string(),
            self.sigma2.to_string(),
            format!("{}", rational_to_f64(&self.ratio)),
            self.lambda.to_decimal(20),
            format!("{:e}", self.abs_diff),
            format!("{:e}", self.rel_diff),
        ]
    }
}

/// Tolerance for the `Lambda` reference in [`asymptotics_run`].
pub const ASYMPTOTICS_LAMBDA_EPS: f64 = 1e-6;
/// Convergents with larger denominators are skipped (`sigma_2` cost).
pub const ASYMPTOTICS_MAX_P: i64 = 20_000;

/// `sigma_2(q_k/p_k)/p_k^2` against `Lambda(theta)` for `k = 2 ..= depth`.
/// `theta` must lie in `(0, 1)` and have an infinite expansion.
pub fn asymptotics_run(theta: &CfExpansion, depth: usize, threads: Option<usize>) -> Result<Vec<AsymptoticsRow>> {
    if depth < 2 {
        return Err(invalid("depth must be at least 2"));
    }
    if theta.is_finite() {
        return Err(Error::RationalEndpoint { terms: theta.available_terms().unwrap_or(0) });
    }
    if !theta.a0().is_zero() {
        return Err(invalid("asymptotics expects 0 < theta < 1 (a0 = 0)"));
    }
    let convs: Vec<_> = theta.convergent_iter().take(depth + 1).collect();
    if convs.len() < depth + 1 {
        return Err(Error::ExpansionExhausted { requested: depth, available: convs.len().saturating_sub(1) });
    }
    let (lambda, _) = lambda_eval(&ThetaSpec::Cf(theta.clone()), ASYMPTOTICS_LAMBDA_EPS)?;
    let lf = lambda.to_f64();
    let rows = in_pool(threads, || {
        convs[2..]
            .par_iter()
            .map(|c| -> Result<AsymptoticsRow> {
                let (q, p) = match (c.q.to_i64(), c.p.to_i64()) {
                    (Some(q), Some(p)) if p <= ASYMPTOTICS_MAX_P => (q, p),
                    _ => return Err(invalid(format!("convergent {}/{} beyond p = {ASYMPTOTICS_MAX_P}", c.q, c.p))),
                };
                let sigma2 = sigma2_auto(p, q)?;
                let ratio = Rational::new(sigma2.clone(), BigInt::from(p * p));
                let rf = rational_to_f64(&ratio);
                let abs_diff = (rf - lf).abs();
                Ok(AsymptoticsRow {
                    k: c.k,
                    a_k: theta.term(c.k).expect("term exists"),
                    q_k: c.q.clone(),
                    p_k: c.p.clone(),
                    sigma2,
                    ratio,
                    lambda: lambda.clone(),
                    abs_diff,
                    rel_diff: abs_diff / lf.abs(),
                })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(rows)
}

pub fn asymptotics_csv<W: Write>(rows: &[AsymptoticsRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(AsymptoticsRow::COLUMNS)?;
    for r in rows {
        wr.write_record(r.record())?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureKind {
    Fig1,
    Fig2,
    Fig3,
}

impl std::str::FromStr for FigureKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(FigureKind::Fig1),
            "fig2" => Ok(FigureKind::Fig2),
            "fig3" => Ok(FigureKind::Fig3),
            _ => Err(invalid(format!("unknown figure `{s}`"))),
        }
    }
}

/// A figure point or a `Lambda` sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureRow {
    pub kind: &'static str,
    pub q: i64,
    pub p: i64,
    /// Exact integer signature, or `Lambda` as a decimal.
    pub value: String,
    pub normalized: f64,
}

impl FigureRow {
    pub fn x(&self) -> f64 {
        self.q as f64 / self.p as f64
    }
}

#[derive(Debug, Clone)]
pub struct FigureData {
    pub which: FigureKind,
    pub k: Option<usize>,
    pub p_max: i64,
    pub rows: Vec<FigureRow>,
}

/// Largest even denominator on the `Lambda` grid of fig1.
pub const FIG1_LAMBDA_MAX_DEN: i64 = 64;
const FIG1_LAMBDA_EPS: f64 = 1e-6;

/// Data behind the three figures.
///
/// * `fig1`: `sigma_2(q/p)/p^2` for odd coprime `0 < q < p < p_max`, plus
///   `Lambda(a/b)` for `0 < a < b`, `b` even, `b <= 64`.
/// * `fig2`: `sigma_3(q/p)/p^4` for odd coprime pairs with `p <= p_max`.
/// * `fig3`: `sigma_1(q/p; 2k)/p` for odd coprime pairs with
///   `2k + 3 <= p <= p_max`, `k` in `1..=3`.
pub fn figure_data(which: FigureKind, p_max: i64, k: Option<usize>, threads: Option<usize>) -> Result<FigureData> {
    let rows = match which {
        FigureKind::Fig1 | FigureKind::Fig2 => {
            if p_max < 5 {
                return Err(invalid(format!("p_max must be at least 5, got {p_max}")));
            }
            if k.is_some() {
                return Err(invalid("--k only applies to fig3"));
            }
            if which == FigureKind::Fig1 {
                fig1_rows(p_max, threads)?
            } else {
                let pairs = odd_coprime_pairs(3, p_max);
                in_pool(threads, || {
                    pairs
                        .par_iter()
                        .map(|&(q, p)| {
                            let s = sigma_g_fast(p, q, 3)?;
                            let n = rational_to_f64(&Rational::new(s.clone(), BigInt::from(p).pow(4)));
                            Ok(FigureRow { kind: "dot", q, p, value: s.to_string(), normalized: n })
                        })
                        .collect::<Result<Vec<_>>>()
                })??
            }
        }
        FigureKind::Fig3 => {
            let k = k.ok_or_else(|| invalid("fig3 needs k in 1..=3"))?;
            if !(1..=3).contains(&k) {
                return Err(invalid(format!("fig3 needs k in 1..=3, got {k}")));
            }
            if p_max < 2 * k as i64 + 3 {
                return Err(invalid(format!("fig3 with k={k} needs p_max >= {}", 2 * k + 3)));
            }
            let pairs = odd_coprime_pairs(2 * k as i64 + 3, p_max);
            in_pool(threads, || {
                pairs
                    .par_iter()
                    .map(|&(q, p)| {
                        let s = sigma_gn_fast(p, q, 1, &[2 * k])?;
                        let n = rational_to_f64(&Rational::new(s.clone(), BigInt::from(p)));
                        Ok(FigureRow { kind: "dot", q, p, value: s.to_string(), normalized: n })
                    })
                    .collect::<Result<Vec<_>>>()
            })??
        }
    };
    Ok(FigureData { which, k, p_max, rows })
}

fn fig1_rows(p_max: i64, threads: Option<usize>) -> Result<Vec<FigureRow>> {
    let pairs = odd_coprime_pairs(3, p_max - 1);
    let mut grid = Vec::new();
    for b in (2..=FIG1_LAMBDA_MAX_DEN).step_by(2) {
        for a in (1..b).filter(|a| a.gcd(&b) == 1) {
            grid.push((a, b));
        }
    }
    in_pool(threads, || -> Result<Vec<FigureRow>> {
        let mut rows: Vec<FigureRow> = pairs
            .par_iter()
            .map(|&(q, p)| {
                let s = sigma2_auto(p, q)?;
                let n = rational_to_f64(&Rational::new(s.clone(), BigInt::from(p * p)));
                Ok(FigureRow { kind: "dot", q, p, value: s.to_string(), normalized: n })
            })
            .collect::<Result<Vec<_>>>()?;
        let lam: Vec<FigureRow> = grid
            .par_iter()
            .map(|&(a, b)| {
                let (l, _) = lambda_eval(&ThetaSpec::Rational(rat(a, b)), FIG1_LAMBDA_EPS)?;
                Ok(FigureRow { kind: "lambda", q: a, p: b, value: l.to_decimal(12), normalized: l.to_f64() })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.extend(lam);
        Ok(rows)
    })?
}

impl FigureData {
    pub const COLUMNS: [&'static str; 6] = ["kind", "x", "q", "p", "value", "normalized"];

    pub fn dots(&self) -> impl Iterator<Item = &FigureRow> {
        self.rows.iter().filter(|r| r.kind == "dot")
    }

    pub fn lambda_samples(&self) -> impl Iterator<Item = &FigureRow> {
        self.rows.iter().filter(|r| r.kind == "lambda")
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(Self::COLUMNS)?;
        for r in &self.rows {
            wr.write_record([
                r.kind.to_string(),
                format!("{}", r.x()),
                r.q.to_string(),
                r.p.to_string(),
                r.value.clone(),
                format!("{}", r.normalized),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    /// A standalone SVG scatter plot: dots in red, `Lambda` samples joined
    /// in green.
    pub fn to_svg(&self) -> String {
        let (w, h, m) = (720.0, 440.0, 50.0);
        let ys: Vec<f64> = self.rows.iter().map(|r| r.normalized).collect();
        let mut lo = ys.iter().cloned().fold(f64::INFINITY, f64::min).min(0.0);
        let mut hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max).max(0.0);
        if !(hi > lo) {
            lo -= 1.0;
            hi += 1.0;
        }
        let pad = 0.05 * (hi - lo);
        let (lo, hi) = (lo - pad, hi + pad);
        let sx = |x: f64| m + x * (w - 2.0 * m);
        let sy = |y: f64| h - m - (y - lo) / (hi - lo) * (h - 2.0 * m);
        let title = match (self.which, self.k) {
            (FigureKind::Fig1, _) => "sigma_2(q/p)/p^2 and Lambda".to_string(),
            (FigureKind::Fig2, _) => "sigma_3(q/p)/p^4".to_string(),
            (FigureKind::Fig3, k) => format!("sigma_1(q/p; {})/p", 2 * k.unwrap_or(0)),
        };
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{title}</text>"#, w / 2.0);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
            sx(0.0),
            sy(0.0),
            sx(1.0),
            sy(0.0)
        );
        let _ = writeln!(s, r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, sx(0.0), sy(lo), sx(0.0), sy(hi));
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{t}</text>"#,
                sx(t),
                h - m + 16.0
            );
        }
        for y in [lo, 0.0, hi] {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{y:.3}</text>"#,
                m - 6.0,
                sy(y) + 4.0
            );
        }
        let mut lam: Vec<&FigureRow> = self.lambda_samples().collect();
        if !lam.is_empty() {
            lam.sort_by(|a, b| a.x().total_cmp(&b.x()));
            let pts: Vec<String> = lam.iter().map(|r| format!("{:.2},{:.2}", sx(r.x()), sy(r.normalized))).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="green" stroke-width="1" points="{}"/>"#, pts.join(" "));
        }
        for r in self.dots() {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="red"/>"#, sx(r.x()), sy(r.normalized));
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Extra amount added to `s(q, p)` wherever it enters an identity; used to
/// check that the sweep notices a wrong Dedekind sum.
pub type DedekindPerturbation = dyn Fn(i64, i64) -> Rational + Sync;

/// The smoothing, reciprocity and `S`-transform identities over all valid
/// pairs with `p <= p_max`: odd `q` with `0 < q < p` for the identities
/// involving `S`, and any coprime `0 < q < p` for reciprocity.
pub fn identity_sweeps(p_max: i64, threads: Option<usize>) -> Result<SweepReport> {
    identity_sweeps_with(p_max, threads, None)
}

pub fn identity_sweeps_with(
    p_max: i64,
    threads: Option<usize>,
    perturb: Option<&DedekindPerturbation>,
) -> Result<SweepReport> {
    #[derive(Clone, Copy)]
    enum Check {
        Smoothing,
        Reciprocity,
        Transform,
    }
    let mut jobs = Vec::new();
    for p in 2..=p_max {
        for q in (1..p).filter(|q| q.gcd(&p) == 1) {
            if q % 2 == 1 {
                jobs.push((Check::Smoothing, q, p));
            }
            jobs.push((Check::Reciprocity, q, p));
            if q % 2 == 1 {
                jobs.push((Check::Transform, q, p));
            }
        }
    }
    let delta = |q: i64, p: i64| perturb.map(|f| f(q, p)).unwrap_or_else(Rational::zero);
    let items = in_pool(threads, || {
        jobs.par_iter()
            .map(|&(check, q, p)| -> Result<SweepItem> {
                let (res, us) = timed(|| -> Result<(&str, Rational)> {
                    Ok(match check {
                        Check::Smoothing => (
                            "smoothing",
                            check_smoothing(q, p)? - delta(q, 2 * p) * BigInt::from(4) + delta(q, p) * BigInt::from(2),
                        ),
                        Check::Reciprocity => ("reciprocity", check_reciprocity(q, p)? + delta(q, p) + delta(p, q)),
                        Check::Transform => ("s_transform", check_s_transform(q, p)?),
                    })
                });
                let (name, r) = res?;
                Ok(SweepItem {
                    inputs: map(&[("check", name.to_string()), ("q", q.to_string()), ("p", p.to_string())]),
                    values: IndexMap::new(),
                    residual: r.to_string(),
                    status: if r.is_zero() { Status::Pass } else { Status::Fail },
                    wall_time_us: us,
                })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut notes = vec![format!("all coprime 0 < q < p <= {p_max}; S-identities use odd q")];
    if perturb.is_some() {
        notes.push("Dedekind sums perturbed by a test hook".into());
    }
    Ok(SweepReport::new("identities", true, items, notes))
}

/// Per-method size limits for [`method_bench`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchBudget {
    pub lattice_max_p: i64,
    pub trig_max_p: i64,
    pub charpoly_max_p: i64,
    pub oracle_max_p: i64,
}

impl Default for BenchBudget {
    fn default() -> Self {
        BenchBudget { lattice_max_p: 5000, trig_max_p: 50_000, charpoly_max_p: 2000, oracle_max_p: 101 }
    }
}

impl BenchBudget {
    pub fn allows(&self, m: Sigma2Method, p: i64) -> bool {
        p <= match m {
            Sigma2Method::Lattice => self.lattice_max_p,
            Sigma2Method::Trig => self.trig_max_p,
            Sigma2Method::Charpoly => self.charpoly_max_p,
            Sigma2Method::Oracle => self.oracle_max_p,
        }
    }
}

/// Times each method on each `(q, p)` and fails with
/// [`Error::MethodDisagreement`] if two methods return different values.
/// Methods over budget for a given `p` are recorded as skipped.
pub fn method_bench(pairs: &[(i64, i64)], methods: &[Sigma2Method], budget: &BenchBudget) -> Result<SweepReport> {
    if methods.is_empty() {
        return Err(invalid("no methods given"));
    }
    let cfg = TrigEvalConfig::default();
    let mut items = Vec::new();
    for &(q, p) in pairs {
        let mut agreed: Option<(Sigma2Method, BigInt)> = None;
        for &m in methods {
            let inputs = map(&[("q", q.to_string()), ("p", p.to_string()), ("method", m.to_string())]);
            if !budget.allows(m, p) {
                items.push(SweepItem {
                    inputs,
                    values: map(&[("sigma2", String::new()), ("size_metric", "over budget".into())]),
                    residual: String::new(),
                    status: Status::Skipped,
                    wall_time_us: 0,
                });
                continue;
            }
            let (v, us) = timed(|| sigma2_by(m, p, q, &cfg));
            let v = v?;
            let metric = match m {
                Sigma2Method::Charpoly => format!("charpoly_bits={}", charpoly_pair(p, q)?.0.max_coeff_bits()),
                Sigma2Method::Trig => format!("mantissa_bits={}", cfg.bits_for(p)),
                Sigma2Method::Lattice => format!("triples~{}", p * p * p / 6),
                Sigma2Method::Oracle => format!("dim={}", p - 1),
            };
            if let Some((m0, v0)) = &agreed {
                if *v0 != v {
                    return Err(Error::MethodDisagreement {
                        q,
                        p,
                        detail: format!("{m0} gives {v0}, {m} gives {v}"),
                    });
                }
            } else {
                agreed = Some((m, v.clone()));
            }
            items.push(SweepItem {
                inputs,
                values: map(&[("sigma2", v.to_string()), ("size_metric", metric)]),
                residual: "0".into(),
                status: Status::Pass,
                wall_time_us: us,
            });
        }
    }
    Ok(SweepReport::new("bench", true, items, vec!["timings in wall_time_us (JSON output)".into()]))
}

/// `sigma_2(1/p)/p^3` against `1/6` for odd `11 <= p <= p_max`; contract:
/// deviation below `1/p`.
pub fn witten_check(p_max: i64, threads: Option<usize>) -> Result<SweepReport> {
    if p_max < 11 {
        return Err(invalid(format!("p_max must be at least 11, got {p_max}")));
    }
    let ps: Vec<i64> = (11..=p_max).step_by(2).collect();
    let items = in_pool(threads, || {
        ps.par_iter()
            .map(|&p| -> Result<SweepItem> {
                let (s, us) = timed(|| sigma2_auto(p, 1));
                let s = s?;
                let ratio = Rational::new(s.clone(), BigInt::from(p).pow(3));
                let dev = (&ratio - rat(1, 6)).abs();
                let ok = dev < rat(1, p);
                Ok(SweepItem {
                    inputs: map(&[("p", p.to_string())]),
                    values: map(&[("sigma2", s.to_string()), ("ratio", format!("{}", rational_to_f64(&ratio)))]),
                    residual: dev.to_string(),
                    status: if ok { Status::Pass } else { Status::Fail },
                    wall_time_us: us,
                })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(SweepReport::new("witten", true, items, vec!["residual = |sigma2/p^3 - 1/6|, contract < 1/p".into()]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verlinde::sigma1_punctured;

    #[test]
    fn conjecture_small() {
        let r = conjecture_sweep(12, Some(2)).unwrap();
        assert!(r.hard_contract && r.contract_ok());
        assert_eq!(r.summary.total, odd_coprime_pairs(3, 11).len());
        let first = &r.items[0];
        assert_eq!(first.inputs["q"], "1");
        assert_eq!(first.values["sigma2_image"], "20");
        assert_eq!(first.values["sigma2"], "4");
        let i35 = r.items.iter().find(|i| i.inputs["q"] == "3" && i.inputs["p"] == "5").unwrap();
        assert_eq!(i35.values["sigma2_image"], "84");
        assert!(conjecture_sweep(2, None).is_err());
        assert!(!conjecture_sweep(103, None).unwrap().hard_contract);
    }

    #[test]
    fn sweeps_are_deterministic_across_threads() {
        let a = conjecture_sweep(40, Some(1)).unwrap();
        let b = conjecture_sweep(40, Some(4)).unwrap();
        assert_eq!(a.to_csv_string().unwrap(), b.to_csv_string().unwrap());
        let a = identity_sweeps(30, Some(1)).unwrap();
        let b = identity_sweeps(30, Some(3)).unwrap();
        assert_eq!(a.to_csv_string().unwrap(), b.to_csv_string().unwrap());
    }

    #[test]
    fn report_json_roundtrip() {
        let r = identity_sweeps(12, None).unwrap();
        let back = SweepReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        let csv = r.to_csv_string().unwrap();
        assert!(csv.starts_with("status,residual,check,q,p\n"));
        assert_eq!(csv.lines().count(), r.items.len() + 1);
    }

    #[test]
    fn identity_counts_and_perturbation() {
        let r = identity_sweeps(20, None).unwrap();
        assert!(r.contract_ok());
        let count = |name: &str| r.items.iter().filter(|i| i.inputs["check"] == name).count();
        let coprime: usize = (2..=20i64).map(|p| (1..p).filter(|q| q.gcd(&p) == 1).count()).sum();
        let odd: usize = (2..=20i64).map(|p| (1..p).filter(|q| q % 2 == 1 && q.gcd(&p) == 1).count()).sum();
        assert_eq!(count("reciprocity"), coprime);
        assert_eq!(count("smoothing"), odd);
        assert_eq!(count("s_transform"), odd);

        let hook = |_q: i64, _p: i64| rat(1, 60);
        let bad = identity_sweeps_with(20, None, Some(&hook)).unwrap();
        assert!(!bad.contract_ok());
        assert!(bad.summary.fail > 0);
    }

    #[test]
    fn asymptotics_golden() {
        let rows = asymptotics_run(&CfExpansion::all_ones(), 12, None).unwrap();
        assert_eq!(rows.len(), 11);
        for r in &rows {
            assert_eq!(&r.ratio * Rational::from(&r.p_k * &r.p_k), Rational::from(r.sigma2.clone()));
        }
        assert_eq!(rows[0].p_k, BigInt::from(2));
        let first50 = rows.iter().find(|r| r.p_k >= BigInt::from(50)).unwrap();
        assert!(rows.last().unwrap().rel_diff < first50.rel_diff);
        let rational = CfExpansion::parse("0;2,3").unwrap();
        assert!(matches!(asymptotics_run(&rational, 4, None), Err(Error::RationalEndpoint { .. })));
        assert!(asymptotics_run(&CfExpansion::all_ones(), 1, None).is_err());
    }

    #[test]
    fn figure_rows() {
        let f = figure_data(FigureKind::Fig1, 11, None, None).unwrap();
        let d15 = f.dots().find(|r| r.q == 1 && r.p == 5).unwrap();
        assert_eq!(d15.normalized, 0.8);
        assert!(f.dots().all(|r| r.p < 11));
        assert!(f.lambda_samples().any(|r| r.q == 1 && r.p == 2 && (r.normalized - 0.5).abs() < 1e-6));
        let csv = f.to_csv_string().unwrap();
        assert!(csv.starts_with("kind,x,q,p,value,normalized\n"));
        assert!(csv.contains("dot,0.2,1,5,20,0.8\n"));
        let svg = f.to_svg();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>") && svg.contains("polyline"));

        let f2 = figure_data(FigureKind::Fig2, 7, None, None).unwrap();
        let d = f2.dots().find(|r| r.q == 1 && r.p == 5).unwrap();
        assert_eq!(d.value, sigma_g_fast(5, 1, 3).unwrap().to_string());

        let f3 = figure_data(FigureKind::Fig3, 21, Some(2), None).unwrap();
        for r in f3.dots() {
            assert_eq!(r.value, sigma1_punctured(r.q, r.p, 2).unwrap().to_string());
        }
        assert!(figure_data(FigureKind::Fig3, 21, Some(0), None).is_err());
        assert!(figure_data(FigureKind::Fig3, 6, Some(2), None).is_err());
        assert!(figure_data(FigureKind::Fig1, 4, None, None).is_err());
    }

    #[test]
    fn bench_agrees_and_skips() {
        let budget = BenchBudget { lattice_max_p: 40, ..Default::default() };
        let r = method_bench(&[(3, 31), (7, 61)], &Sigma2Method::ALL, &budget).unwrap();
        assert_eq!(r.summary.total, 8);
        assert_eq!(r.summary.skipped, 1);
        let vals: Vec<&str> = r
            .items
            .iter()
            .filter(|i| i.inputs["p"] == "61" && i.status == Status::Pass)
            .map(|i| i.values["sigma2"].as_str())
            .collect();
        assert!(vals.len() == 3 && vals.iter().all(|v| *v == vals[0]));
        assert!(method_bench(&[(1, 5)], &[], &budget).is_err());
    }

    #[test]
    fn witten_rows() {
        let r = witten_check(99, None).unwrap();
        assert!(r.contract_ok());
        let last = r.items.last().unwrap();
        assert_eq!(last.values["sigma2"], "161700");
        let devs: Vec<f64> = r.items.iter().map(|i| i.residual.parse::<Rational>().map(|x| rational_to_f64(&x)).unwrap()).collect();
        assert!(devs.windows(2).all(|w| w[1] < w[0]));
        assert!(witten_check(9, None).is_err());
    }
}
