//! Closed-form and enumerative bounds on the noise robustness.
//!
//! Upper bounds come from the dual ansatz via lambda = max_j ||S_j||_inf
//! (exhaustive tuple scan), from the simple sqrt(d) estimate, and for k = 4
//! from the characteristic-polynomial argument that needs no explicit bases.
//! The lower bound is the recursive parent-POVM value with stage-wise
//! optimized alpha parameters.

use serde::Serialize;

use crate::linalg::{eigh_mat, CMat, C64};
use crate::mub::MeasurementSet;
use crate::{Error, Result};

pub const DEFAULT_TIE_TOL: f64 = 1e-8;
pub const DEFAULT_TUPLE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone)]
pub struct LambdaOptions {
    pub tie_tol: f64,
    pub budget: u64,
    /// Fix one covariant axis's outcome and reconstruct the orbit afterwards.
    /// Only taken when the covariance metadata validates numerically.
    pub use_symmetry: bool,
    /// Scan the first `budget` tuples instead of erroring when over budget;
    /// the result is then only a lower bound on lambda.
    pub allow_truncation: bool,
}

impl Default for LambdaOptions {
    fn default() -> Self {
        LambdaOptions {
            tie_tol: DEFAULT_TIE_TOL,
            budget: DEFAULT_TUPLE_BUDGET,
            use_symmetry: true,
            allow_truncation: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaMethod {
    Exhaustive,
    SymmetryReduced,
    BudgetTruncated,
}

#[derive(Debug, Clone)]
pub struct LambdaResult {
    pub lambda: f64,
    /// All tuples attaining lambda within tie_tol (full orbit, deduplicated).
    pub argmax_tuples: Vec<Vec<usize>>,
    pub tuples_scanned: u64,
    pub method: LambdaMethod,
    pub tie_tol: f64,
}

impl LambdaResult {
    /// Budget-truncated scans only lower-bound lambda, so bounds built on
    /// them do not certify.
    pub fn certifying(&self) -> bool {
        self.method != LambdaMethod::BudgetTruncated
    }
}

/// Top eigenvalue of a PSD matrix: deterministic power iteration with an
/// eigh fallback when the iteration stalls.
fn top_eigenvalue_psd(m: &CMat) -> Result<f64> {
    let n = m.dim;
    if n == 1 {
        return Ok(m[(0, 0)].re);
    }
    let mut v = vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let mut prev = f64::NEG_INFINITY;
    for _ in 0..200 {
        let w = m.matvec(&v);
        let norm: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Ok(0.0); // zero matrix
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        // Rayleigh quotient of the normalized iterate
        let mv = m.matvec(&v);
        let rq: f64 = v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum();
        if (rq - prev).abs() <= 1e-13 * rq.abs().max(1.0) {
            // residual check to guard against stagnation away from the top
            let res: f64 = mv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b * rq).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if res <= 1e-9 * rq.abs().max(1.0) {
                return Ok(rq);
            }
        }
        prev = rq;
    }
    Ok(eigh_mat(m)?.max_eigenvalue())
}

/// ||S_j||_inf for one tuple. Rank-one sets go through the k x k Gram matrix
/// of the selected vectors (same nonzero spectrum as S_j); general sets build
/// S_j explicitly.
fn tuple_norm(m: &MeasurementSet, j: &[usize]) -> Result<f64> {
    if let Some(vectors) = &m.vectors {
        let k = j.len();
        let gram = CMat::from_fn(k, |x, y| {
            let vx = &vectors[x][j[x]];
            let vy = &vectors[y][j[y]];
            (0..m.dim).map(|l| vx[l].conj() * vy[l]).sum()
        });
        top_eigenvalue_psd(&gram)
    } else {
        let mut s = CMat::zeros(m.dim);
        for (x, &a) in j.iter().enumerate() {
            s = s.add(m.operators[x][a].matrix());
        }
        top_eigenvalue_psd(&s)
    }
}

/// Lexicographic tuple iterator over mixed radices, with an optional pinned
/// coordinate.
pub(crate) struct Tuples {
    radices: Vec<usize>,
    pinned: Option<usize>,
    current: Option<Vec<usize>>,
}

impl Tuples {
    pub(crate) fn new(radices: Vec<usize>, pinned: Option<usize>) -> Self {
        let current = if radices.iter().any(|&r| r == 0) {
            None
        } else {
            Some(vec![0; radices.len()])
        };
        Tuples { radices, pinned, current }
    }
}

impl Iterator for Tuples {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if Some(i) == self.pinned {
                continue;
            }
            cur[i] += 1;
            if cur[i] < self.radices[i] {
                break;
            }
            cur[i] = 0;
        }
        Some(out)
    }
}

pub fn compute_lambda(m: &MeasurementSet, tie_tol: f64) -> Result<LambdaResult> {
    compute_lambda_opts(m, &LambdaOptions { tie_tol, ..Default::default() })
}

pub fn compute_lambda_opts(m: &MeasurementSet, opts: &LambdaOptions) -> Result<LambdaResult> {
    let radices: Vec<usize> = (0..m.k()).map(|x| m.outcomes(x)).collect();
    let total = m
        .tuple_count()
        .ok_or_else(|| Error::BudgetExceeded("tuple count overflows u64".into()))?;

    // symmetry reduction: pin an axis on which the covariance group acts
    // transitively, after validating the metadata numerically
    let mut pinned = None;
    if opts.use_symmetry && total > 1 {
        if let Some(cov) = &m.covariance {
            if m.covariance_deviation() <= 1e-8 {
                pinned = (0..m.k()).find(|&x| {
                    let orbit: std::collections::HashSet<usize> =
                        cov.shifts.iter().map(|s| s.perms[x][0]).collect();
                    orbit.len() == radices[x]
                });
            }
        }
    }

    let effective = match pinned {
        Some(x) => total / radices[x] as u64,
        None => total,
    };
    let mut truncated = false;
    if effective > opts.budget {
        if opts.allow_truncation {
            truncated = true;
        } else {
            return Err(Error::BudgetExceeded(format!(
                "{effective} tuples exceed budget {}",
                opts.budget
            )));
        }
    }

    let mut lambda = f64::NEG_INFINITY;
    let mut argmax: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut scanned = 0u64;
    for j in Tuples::new(radices, pinned) {
        if scanned >= opts.budget && truncated {
            break;
        }
        scanned += 1;
        let norm = tuple_norm(m, &j)?;
        if norm > lambda + opts.tie_tol {
            lambda = norm;
            argmax.retain(|(_, v)| *v >= lambda - opts.tie_tol);
            argmax.push((j, norm));
        } else if norm >= lambda - opts.tie_tol {
            lambda = lambda.max(norm);
            argmax.push((j, norm));
        }
    }
    argmax.retain(|(_, v)| *v >= lambda - opts.tie_tol);
    let mut tuples: Vec<Vec<usize>> = argmax.into_iter().map(|(j, _)| j).collect();

    // expand representatives to their full orbit under the covariance group
    if let Some(_) = pinned {
        let cov = m.covariance.as_ref().unwrap();
        let mut orbit = Vec::with_capacity(tuples.len() * cov.shifts.len());
        for j in &tuples {
            for shift in &cov.shifts {
                orbit.push(
                    j.iter().enumerate().map(|(x, &a)| shift.perms[x][a]).collect::<Vec<_>>(),
                );
            }
        }
        orbit.sort();
        orbit.dedup();
        tuples = orbit;
    } else {
        tuples.sort();
        tuples.dedup();
    }

    let method = if truncated {
        LambdaMethod::BudgetTruncated
    } else if pinned.is_some() {
        LambdaMethod::SymmetryReduced
    } else {
        LambdaMethod::Exhaustive
    };
    Ok(LambdaResult { lambda, argmax_tuples: tuples, tuples_scanned: scanned, method, tie_tol: opts.tie_tol })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    UpperGeneral,
    UpperRank1,
    UpperSimple,
    UpperCharpolyK4,
    LowerRecursive,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub value: f64,
    pub d: usize,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// optimized alpha_2..alpha_k for the recursive lower bound
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tuples_scanned: Option<u64>,
    pub certifying: bool,
}

fn trace_sums(m: &MeasurementSet) -> (f64, f64) {
    // (sum of (trA/d)^2, sum of [trA^2/d - (trA/d)^2]) over all (a,x)
    let d = m.dim as f64;
    let mut sq = 0.0;
    let mut var = 0.0;
    for ops in &m.operators {
        for op in ops {
            let t = op.trace_re();
            let t2 = op.matrix().trace_prod(op.matrix()).re;
            sq += (t / d) * (t / d);
            var += t2 / d - (t / d) * (t / d);
        }
    }
    (sq, var)
}

/// eta_up = (lambda - sum (trA/d)^2) / sum [trA^2/d - (trA/d)^2].
pub fn eta_up_general(m: &MeasurementSet) -> Result<BoundReport> {
    let (sq, var) = trace_sums(m);
    if var <= 1e-12 {
        return Err(Error::TrivialMeasurements);
    }
    let lam = compute_lambda(m, DEFAULT_TIE_TOL)?;
    Ok(BoundReport {
        kind: BoundKind::UpperGeneral,
        value: (lam.lambda - sq) / var,
        d: m.dim,
        k: m.k(),
        lambda: Some(lam.lambda),
        alphas: None,
        tuples_scanned: Some(lam.tuples_scanned),
        certifying: lam.certifying(),
    })
}

/// Rank-one projective specialization: eta_up = (lambda - k/d)/(k - k/d).
pub fn eta_up_rank1(m: &MeasurementSet) -> Result<BoundReport> {
    if !m.rank_one_projective {
        return Err(Error::NotRankOneProjective);
    }
    let lam = compute_lambda(m, DEFAULT_TIE_TOL)?;
    Ok(eta_up_rank1_from_lambda(m, &lam))
}

pub fn eta_up_rank1_from_lambda(m: &MeasurementSet, lam: &LambdaResult) -> BoundReport {
    let (d, k) = (m.dim as f64, m.k() as f64);
    BoundReport {
        kind: BoundKind::UpperRank1,
        value: (lam.lambda - k / d) / (k - k / d),
        d: m.dim,
        k: m.k(),
        lambda: Some(lam.lambda),
        alphas: None,
        tuples_scanned: Some(lam.tuples_scanned),
        certifying: lam.certifying(),
    }
}

/// eta_up <= (sqrt(d)/k + 1)/(sqrt(d) + 1), no measurement data needed.
pub fn eta_up_simple(k: usize, d: usize) -> BoundReport {
    let (kf, sd) = (k as f64, (d as f64).sqrt());
    BoundReport {
        kind: BoundKind::UpperSimple,
        value: (sd / kf + 1.0) / (sd + 1.0),
        d,
        k,
        lambda: None,
        alphas: None,
        tuples_scanned: None,
        certifying: true,
    }
}

/// Quartic factor of the characteristic polynomial of S_j for k MUB when
/// rank(S_j) = 4, coefficients in ascending order. The constant term follows
/// the factored k=4 form 1/4[(2X^2-4X+1)^2 - s4] - s3/3 (X-1) generalized in
/// k; note the -s4/4 sign (the expanded display elsewhere has the opposite
/// sign, inconsistent with the factored form and its numeric roots).
fn charpoly_quartic(k: f64, d: f64, sigma3: f64, sigma4: f64) -> [f64; 5] {
    [
        k * (k - 1.0) * (k - 2.0) * (k - 3.0) / 24.0 * (1.0 - 6.0 / d)
            + k * (k - 1.0) * (k - 1.0) * (k - 2.0) / (8.0 * d * d)
            + (k - 3.0) * sigma3 / 3.0
            - sigma4 / 4.0,
        -(k * (k - 1.0) * (k - 2.0) / 6.0 * (1.0 - 3.0 / d) + sigma3 / 3.0),
        k * (k - 1.0) / 2.0 * (1.0 - 1.0 / d),
        -k,
        1.0,
    ]
}

/// Upper bound on eta_up for hypothetical quadruplets of MUB: the quartic's
/// largest real root at the extremal sigma values bounds lambda, mapped
/// through the rank-one formula.
pub fn eta_up_charpoly_k4(d: usize) -> Result<BoundReport> {
    if d < 5 {
        return Err(Error::InvalidInput("charpoly bound needs d >= 5 (rank-4 regime)".into()));
    }
    let df = d as f64;
    let sigma3 = 24.0 / (df * df.sqrt());
    let sigma4 = 24.0 / (df * df);
    let coeffs = charpoly_quartic(4.0, df, sigma3, sigma4);
    let roots = crate::linalg::real_poly_roots(&coeffs)?;
    let lambda = roots
        .last()
        .copied()
        .ok_or_else(|| Error::Numerical("quartic has no real roots".into()))?;
    Ok(BoundReport {
        kind: BoundKind::UpperCharpolyK4,
        value: (lambda - 4.0 / df) / (4.0 - 4.0 / df),
        d,
        k: 4,
        lambda: Some(lambda),
        alphas: None,
        tuples_scanned: None,
        certifying: true,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonTraces {
    pub tr_s: f64,
    pub tr_s2: f64,
    pub tr_s3: f64,
    pub tr_s4: f64,
    pub sigma3: f64,
    pub sigma4: f64,
}

/// Direct power traces of S_j and the pairwise-distinct overlap sums
/// sigma^(3), sigma^(4) for a rank-one projective set.
pub fn newton_traces(m: &MeasurementSet, j: &[usize]) -> Result<NewtonTraces> {
    let vectors = m.vectors.as_ref().ok_or(Error::NotRankOneProjective)?;
    let k = j.len();
    let d = m.dim;
    let g = CMat::from_fn(k, |x, y| {
        (0..d).map(|l| vectors[x][j[x]][l].conj() * vectors[y][j[y]][l]).sum()
    });
    let mut s = CMat::zeros(d);
    for (x, &a) in j.iter().enumerate() {
        s = s.add(m.operators[x][a].matrix());
    }
    let s2 = s.matmul(&s);
    let s4 = s2.matmul(&s2);
    let mut sigma3 = C64::new(0.0, 0.0);
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                if a != b && b != c && a != c {
                    sigma3 += g[(a, b)] * g[(b, c)] * g[(c, a)];
                }
            }
        }
    }
    let mut sigma4 = C64::new(0.0, 0.0);
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                for e in 0..k {
                    if a != b && a != c && a != e && b != c && b != e && c != e {
                        sigma4 += g[(a, b)] * g[(b, c)] * g[(c, e)] * g[(e, a)];
                    }
                }
            }
        }
    }
    if sigma3.im.abs() > 1e-10 || sigma4.im.abs() > 1e-10 {
        return Err(Error::Numerical("sigma sums not real".into()));
    }
    Ok(NewtonTraces {
        tr_s: s.trace().re,
        tr_s2: s2.trace().re,
        tr_s3: s.matmul(&s2).trace().re,
        tr_s4: s4.trace().re,
        sigma3: sigma3.re,
        sigma4: sigma4.re,
    })
}

/// One stage of the recursive lower bound.
fn eta_stage(k: f64, d: f64, eta_prev: f64, alpha: f64) -> f64 {
    let sd = d.sqrt();
    ((2.0 * alpha * sd + d) * (k - 1.0) * eta_prev + (2.0 * alpha * sd + alpha * alpha * d))
        / (k * (2.0 * alpha * sd + (alpha * alpha + 1.0) * d))
}

/// d/dalpha of eta_stage, up to the positive factor k*D^2 (numerator of the
/// quotient-rule derivative). Exact, so the optimizer can be bisected to
/// machine precision where golden section alone stalls at sqrt(eps).
fn eta_stage_dalpha(k: f64, d: f64, eta_prev: f64, alpha: f64) -> f64 {
    let sd = d.sqrt();
    let n = (2.0 * alpha * sd + d) * (k - 1.0) * eta_prev + 2.0 * alpha * sd + alpha * alpha * d;
    let dd = k * (2.0 * alpha * sd + (alpha * alpha + 1.0) * d);
    let np = 2.0 * sd * (k - 1.0) * eta_prev + 2.0 * sd + 2.0 * alpha * d;
    let dp = k * (2.0 * sd + 2.0 * alpha * d);
    np * dd - n * dp
}

/// Golden-section maximization on (lo, hi], deterministic, to `tol` on x.
fn golden_max(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Evaluate the lower-bound recursion at explicit parameters
/// (alphas[i] is alpha_{i+2}), so constructions can be cross-checked
/// against the formula they are supposed to realize.
pub fn eta_recursion(d: usize, alphas: &[f64]) -> f64 {
    let df = d as f64;
    let mut eta = 1.0;
    for (i, &a) in alphas.iter().enumerate() {
        eta = eta_stage((i + 2) as f64, df, eta, a);
    }
    eta
}

pub const ALPHA_BRACKET: (f64, f64) = (0.0, 10.0);

/// Closed form for the second-stage optimizer, used as a cross-check.
pub fn alpha3_closed_form(d: usize) -> f64 {
    let sd = (d as f64).sqrt();
    ((5.0 * d as f64 + 12.0 * sd + 8.0).sqrt() - sd) / (2.0 * (sd + 2.0))
}

/// Recursive lower bound eta_low(k, d) with greedy stage-wise alpha
/// optimization (valid since each stage is increasing in eta_{k-1}).
pub fn eta_low_recursive(k: usize, d: usize) -> Result<BoundReport> {
    if d < 2 {
        return Err(Error::InvalidInput("d must be >= 2".into()));
    }
    if k < 1 || k > d + 1 {
        return Err(Error::InvalidInput(format!("k={k} out of range for d={d}")));
    }
    let df = d as f64;
    let mut eta = 1.0;
    let mut alphas = Vec::with_capacity(k.saturating_sub(1));
    for stage in 2..=k {
        let prev = eta;
        let (mut alpha, _) = golden_max(ALPHA_BRACKET.0 + 1e-12, ALPHA_BRACKET.1, 1e-6, |a| {
            eta_stage(stage as f64, df, prev, a)
        });
        // polish: bisect the exact derivative around the golden-section
        // estimate (golden section alone is limited to ~sqrt(eps) accuracy)
        let g = |a: f64| eta_stage_dalpha(stage as f64, df, prev, a);
        let (mut lo, mut hi) = ((alpha - 1e-3).max(1e-12), (alpha + 1e-3).min(ALPHA_BRACKET.1));
        if g(lo) > 0.0 && g(hi) < 0.0 {
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if g(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            alpha = 0.5 * (lo + hi);
        }
        alphas.push(alpha);
        eta = eta_stage(stage as f64, df, prev, alpha);
    }
    Ok(BoundReport {
        kind: BoundKind::LowerRecursive,
        value: eta,
        d,
        k,
        lambda: None,
        alphas: Some(alphas),
        tuples_scanned: None,
        certifying: true,
    })
}
