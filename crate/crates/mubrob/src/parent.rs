//! Parent-POVM machinery: the dual-variable ansatz certificate, the educated
//! guess built from maximal eigenspaces of the tuple sums S_j, the convergent
//! sequence G_j^(n) = (S_j/lambda)^n, and the chi-vector construction behind
//! the recursive lower bound.

use crate::bounds::{compute_lambda, LambdaResult, Tuples, DEFAULT_TIE_TOL};
use crate::linalg::{
    eigh_mat, max_eigenspace_projector, CMat, HermitianOperator, C64,
};
use crate::mub::MeasurementSet;
use crate::{Error, Result};

/// Elements indexed by outcome tuples; only nonzero elements are stored.
#[derive(Debug, Clone)]
pub struct ParentPOVM {
    pub dim: usize,
    pub radices: Vec<usize>,
    pub elements: Vec<(Vec<usize>, CMat)>,
    /// factor the raw construction was divided by to reach sum = identity
    pub normalization: f64,
}

impl ParentPOVM {
    pub fn sum(&self) -> CMat {
        let mut s = CMat::zeros(self.dim);
        for (_, g) in &self.elements {
            s.add_assign_scaled(g, 1.0);
        }
        s
    }

    /// max-entry deviation of the element sum from the identity
    pub fn normalization_deviation(&self) -> f64 {
        self.sum().sub(&CMat::identity(self.dim)).max_abs()
    }

    /// marginal sum over tuples with j_x = a
    pub fn marginal(&self, x: usize, a: usize) -> CMat {
        let mut m = CMat::zeros(self.dim);
        for (j, g) in &self.elements {
            if j[x] == a {
                m.add_assign_scaled(g, 1.0);
            }
        }
        m
    }
}

/// Feasible point of the dual program certifying an upper bound on eta*.
#[derive(Debug, Clone)]
pub struct DualCertificate {
    pub xs: Vec<Vec<CMat>>,
    /// certified upper bound 1 + tr sum X_{a|x} A_{a|x}
    pub value: f64,
    pub lambda: f64,
    /// slack of the scalar trace constraint (saturated by construction)
    pub scalar_residual: f64,
    /// min over tuples of the smallest eigenvalue of sum_x X_{j_x|x}
    pub min_tuple_eigenvalue: f64,
}

impl DualCertificate {
    pub fn feasible(&self) -> bool {
        self.scalar_residual >= -1e-9 && self.min_tuple_eigenvalue >= -1e-9
    }
}

const CERT_TUPLE_BUDGET: u64 = 1_000_000;

/// The ansatz X_{a|x} = (lambda/k 1 - A_{a|x}) / sum[tr A^2 - (tr A)^2/d],
/// which saturates the scalar constraint and whose tuple sums are
/// (lambda 1 - S_j)/denominator >= 0 by the definition of lambda. Its
/// certified value is exactly eta_up_general.
pub fn dual_ansatz(m: &MeasurementSet) -> Result<DualCertificate> {
    let d = m.dim;
    let k = m.k();
    let lam = compute_lambda(m, DEFAULT_TIE_TOL)?;
    let mut den = 0.0;
    for ops in &m.operators {
        for op in ops {
            let t = op.trace_re();
            den += op.matrix().trace_prod(op.matrix()).re - t * t / d as f64;
        }
    }
    if den.abs() <= 1e-12 {
        return Err(Error::TrivialMeasurements);
    }
    let scale = lam.lambda / k as f64;
    let xs: Vec<Vec<CMat>> = m
        .operators
        .iter()
        .map(|ops| {
            ops.iter()
                .map(|op| {
                    CMat::identity(d)
                        .scale_re(scale)
                        .sub(op.matrix())
                        .scale_re(1.0 / den)
                })
                .collect()
        })
        .collect();

    // certified value and scalar-constraint slack
    let mut tr_xa = 0.0;
    let mut tr_x_tr_a = 0.0;
    for (x, ops) in m.operators.iter().enumerate() {
        for (a, op) in ops.iter().enumerate() {
            tr_xa += xs[x][a].trace_prod(op.matrix()).re;
            tr_x_tr_a += xs[x][a].trace().re * op.trace_re();
        }
    }
    let value = 1.0 + tr_xa;
    let scalar_residual = value - tr_x_tr_a / d as f64;

    // PSD check of the tuple sums. Positivity holds for every tuple by the
    // definition of lambda (the sum is (lambda 1 - S_j)/den and lambda already
    // dominates every tuple's top eigenvalue), so beyond the scan budget we
    // verify numerically only on the binding (lambda-attaining) tuples, where
    // the minimum eigenvalue is exactly zero.
    let radices: Vec<usize> = (0..k).map(|x| m.outcomes(x)).collect();
    let count = m
        .tuple_count()
        .ok_or_else(|| Error::BudgetExceeded("tuple count overflows u64".into()))?;
    let mut min_eig = f64::INFINITY;
    let scan_tuple = |j: &[usize], min_eig: &mut f64| -> Result<()> {
        let mut s = CMat::zeros(d);
        for (x, &a) in j.iter().enumerate() {
            s.add_assign_scaled(&xs[x][a], 1.0);
        }
        *min_eig = min_eig.min(eigh_mat(&s)?.min_eigenvalue());
        Ok(())
    };
    if count > CERT_TUPLE_BUDGET {
        for j in &lam.argmax_tuples {
            scan_tuple(j, &mut min_eig)?;
        }
    } else {
        for j in Tuples::new(radices, None) {
            scan_tuple(&j, &mut min_eig)?;
        }
    }

    Ok(DualCertificate {
        xs,
        value,
        lambda: lam.lambda,
        scalar_residual,
        min_tuple_eigenvalue: min_eig,
    })
}

fn tuple_operator(m: &MeasurementSet, j: &[usize]) -> CMat {
    let mut s = CMat::zeros(m.dim);
    for (x, &a) in j.iter().enumerate() {
        s.add_assign_scaled(m.operators[x][a].matrix(), 1.0);
    }
    s
}

fn normalize_elements(
    dim: usize,
    radices: Vec<usize>,
    elements: Vec<(Vec<usize>, CMat)>,
    prop_tol: f64,
) -> Result<ParentPOVM> {
    let mut sum = CMat::zeros(dim);
    for (_, g) in &elements {
        sum.add_assign_scaled(g, 1.0);
    }
    let c = sum.trace().re / dim as f64;
    if c <= 0.0 {
        return Err(Error::ParentGuessInvalid("element sum has nonpositive trace".into()));
    }
    let dev = sum.sub(&CMat::identity(dim).scale_re(c)).max_abs();
    if dev > prop_tol * c.max(1.0) {
        return Err(Error::ParentGuessInvalid(format!(
            "element sum not proportional to identity (deviation {dev:.3e})"
        )));
    }
    let elements = elements
        .into_iter()
        .map(|(j, g)| (j, g.scale_re(1.0 / c)))
        .collect();
    Ok(ParentPOVM { dim, radices, elements, normalization: c })
}

/// The educated guess: G_j = Pi_j (projector onto the top eigenspace of S_j)
/// on tuples where ||S_j||_inf attains lambda, zero elsewhere, normalized so
/// the elements sum to the identity. Fails when that sum is not proportional
/// to the identity (expected for some non-tight cases).
pub fn parent_guess(m: &MeasurementSet, tie_tol: f64) -> Result<ParentPOVM> {
    let lam = compute_lambda(m, tie_tol)?;
    parent_guess_from_lambda(m, &lam, tie_tol)
}

pub fn parent_guess_from_lambda(
    m: &MeasurementSet,
    lam: &LambdaResult,
    tie_tol: f64,
) -> Result<ParentPOVM> {
    let radices: Vec<usize> = (0..m.k()).map(|x| m.outcomes(x)).collect();
    let mut elements = Vec::with_capacity(lam.argmax_tuples.len());
    for j in &lam.argmax_tuples {
        let s = HermitianOperator::from_symmetric_parts(tuple_operator(m, j));
        let pi = max_eigenspace_projector(&s, tie_tol)?;
        elements.push((j.clone(), pi.into_matrix()));
    }
    normalize_elements(m.dim, radices, elements, 1e-6)
}

/// Marginal-consistency check: find the single eta with
/// marginal(x, a) = eta A + (1 - eta) tr(A) 1/d for all (a, x), by projecting
/// onto the span {A - tr(A) 1/d}; succeeds iff every per-entry residual is
/// within `tol` and eta lies in [0, 1].
pub fn check_parent_tol(g: &ParentPOVM, m: &MeasurementSet, tol: f64) -> Result<f64> {
    let d = m.dim;
    let norm_dev = g.normalization_deviation();
    if norm_dev > 1e-6 {
        return Err(Error::ParentCheckFailed(format!(
            "parent not normalized (deviation {norm_dev:.3e})"
        )));
    }
    // accumulate all marginals in a single pass over the elements
    let mut marginals: Vec<Vec<CMat>> = (0..m.k())
        .map(|x| vec![CMat::zeros(d); m.outcomes(x)])
        .collect();
    for (j, op) in &g.elements {
        for (x, &a) in j.iter().enumerate() {
            marginals[x][a].add_assign_scaled(op, 1.0);
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, ops) in m.operators.iter().enumerate() {
        for (a, op) in ops.iter().enumerate() {
            let e = CMat::identity(d).scale_re(op.trace_re() / d as f64);
            let dir = op.matrix().sub(&e);
            let rhs = marginals[x][a].sub(&e);
            num += dir.trace_prod(&rhs).re;
            den += dir.trace_prod(&dir).re;
        }
    }
    if den <= 1e-14 {
        return Err(Error::TrivialMeasurements);
    }
    let eta = num / den;
    let mut residual = 0.0f64;
    for (x, ops) in m.operators.iter().enumerate() {
        for (a, op) in ops.iter().enumerate() {
            let mut model = op.matrix().scale_re(eta);
            model.add_assign_scaled(
                &CMat::identity(d),
                (1.0 - eta) * op.trace_re() / d as f64,
            );
            residual = residual.max(marginals[x][a].sub(&model).max_abs());
        }
    }
    if residual > tol {
        return Err(Error::ParentCheckFailed(format!(
            "marginal residual {residual:.3e} exceeds {tol:.1e} (eta estimate {eta:.12})"
        )));
    }
    if !(-1e-9..=1.0 + 1e-9).contains(&eta) {
        return Err(Error::ParentCheckFailed(format!("eta {eta} outside [0, 1]")));
    }
    Ok(eta.clamp(0.0, 1.0))
}

pub const PARENT_RESIDUAL_TOL: f64 = 1e-7;

pub fn check_parent(g: &ParentPOVM, m: &MeasurementSet) -> Result<f64> {
    check_parent_tol(g, m, PARENT_RESIDUAL_TOL)
}

/// G_j^(n) = (S_j/lambda)^n for every tuple, normalized; converges to the
/// educated guess as n grows. Powers use repeated squaring.
pub fn parent_sequence(m: &MeasurementSet, n: u32) -> Result<ParentPOVM> {
    if n == 0 {
        return Err(Error::InvalidInput("sequence order n must be >= 1".into()));
    }
    let d = m.dim;
    let lam = compute_lambda(m, DEFAULT_TIE_TOL)?;
    let radices: Vec<usize> = (0..m.k()).map(|x| m.outcomes(x)).collect();
    let count = m
        .tuple_count()
        .ok_or_else(|| Error::BudgetExceeded("tuple count overflows u64".into()))?;
    if count.saturating_mul((d * d) as u64) > 64_000_000 {
        return Err(Error::BudgetExceeded(format!(
            "{count} dense tuple operators of size {d} exceed the sequence budget"
        )));
    }
    let mut elements = Vec::with_capacity(count as usize);
    for j in Tuples::new(radices.clone(), None) {
        let base = tuple_operator(m, &j).scale_re(1.0 / lam.lambda);
        // binary exponentiation
        let mut acc = CMat::identity(d);
        let mut sq = base;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.matmul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.matmul(&sq);
            }
        }
        let acc = acc.add(&acc.adjoint()).scale_re(0.5);
        elements.push((j, acc));
    }
    normalize_elements(d, radices, elements, 1e-8)
}

/// Closed forms eta^(n) certified by G^(n) for n <= 4 (any MUB subset).
pub fn eta_sequence_closed_form(n: u32, k: usize, d: usize) -> Option<f64> {
    let (k, d) = (k as f64, d as f64);
    match n {
        1 => Some(1.0 / k),
        2 => Some((d + 2.0 * (k - 1.0)) / (k * (d + k - 1.0))),
        3 => Some(
            (d * d + 5.0 * (k - 1.0) * d + 3.0 * (k - 1.0) * (k - 2.0))
                / (k * (d * d + 3.0 * (k - 1.0) * d + (k - 1.0) * (k - 2.0))),
        ),
        4 => Some(
            (d * d * d
                + 9.0 * (k - 1.0) * d * d
                + 2.0 * (k - 1.0) * (7.0 * k - 13.0) * d
                + 4.0 * (k - 1.0) * (k - 2.0) * (k - 3.0))
                / (k * (d * d * d
                    + 6.0 * (k - 1.0) * d * d
                    + (k - 1.0) * (6.0 * k - 11.0) * d
                    + (k - 1.0) * (k - 2.0) * (k - 3.0))),
        ),
        _ => None,
    }
}

/// Chi-vector construction behind the recursive lower bound:
/// |chi^y_{j[1]}> is the j-th vector of basis y and each later stage applies
/// (1 + alpha_s sqrt(d) A_{j_b|b}) with the basis index circularly shifted by
/// y; G_j sums the k resulting rank-one operators, normalized.
pub fn lower_bound_parent(m: &MeasurementSet, alphas: &[f64]) -> Result<ParentPOVM> {
    let d = m.dim;
    let k = m.k();
    let vectors = m
        .vectors
        .as_ref()
        .ok_or(Error::NotRankOneProjective)?;
    if alphas.len() != k.saturating_sub(1) || alphas.iter().any(|&a| a <= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need {} positive alphas, got {:?}",
            k - 1,
            alphas
        )));
    }
    // the construction assumes pairwise unbiasedness; verify it
    for x in 0..k {
        for y in (x + 1)..k {
            for va in &vectors[x] {
                for vb in &vectors[y] {
                    let ov: C64 = va.iter().zip(vb).map(|(a, b)| a.conj() * b).sum();
                    if (ov.norm_sqr() - 1.0 / d as f64).abs() > 1e-8 {
                        return Err(Error::InvalidInput(
                            "bases are not pairwise unbiased".into(),
                        ));
                    }
                }
            }
        }
    }
    let sd = (d as f64).sqrt();
    let radices: Vec<usize> = (0..k).map(|x| m.outcomes(x)).collect();
    let count = m
        .tuple_count()
        .ok_or_else(|| Error::BudgetExceeded("tuple count overflows u64".into()))?;
    if count.saturating_mul((d * d) as u64) > 64_000_000 {
        return Err(Error::BudgetExceeded(format!(
            "{count} dense tuple operators of size {d} exceed the budget"
        )));
    }
    let mut elements = Vec::with_capacity(count as usize);
    for j in Tuples::new(radices.clone(), None) {
        let mut g = CMat::zeros(d);
        for y in 0..k {
            let mut chi = vectors[y][j[y]].clone();
            for s in 2..=k {
                let b = (y + s - 1) % k;
                let phi = &vectors[b][j[b]];
                let ov: C64 = phi.iter().zip(&chi).map(|(p, c)| p.conj() * c).sum();
                let w = ov * (alphas[s - 2] * sd);
                for (ci, pi) in chi.iter_mut().zip(phi) {
                    *ci += pi * w;
                }
            }
            g.add_assign_scaled(&CMat::outer(&chi), 1.0);
        }
        elements.push((j, g));
    }
    normalize_elements(d, radices, elements, 1e-8)
}
