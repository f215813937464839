//! Block-structured semidefinite programming for the robustness problem.
//!
//! One data structure carries both faces of the conic pair
//!
//! ```text
//! (P)  min <C,X>   s.t. <A_i,X> = b_i,  X >= 0
//! (D)  max b'y     s.t. sum_i y_i A_i + S = C,  S >= 0
//! ```
//!
//! The robustness primal (max eta over parent POVMs of the noisy set) is
//! encoded as (P) with objective -eta; the textbook dual program — variables
//! X_{a|x}, one scalar trace constraint and d^k PSD tuple-sum constraints —
//! is then literally the (D) reading of the same data, with the multipliers
//! of the marginal constraints assembling to the X_{a|x} (up to sign) and the
//! G_j-block dual slacks being the tuple sums. Both optima equal -eta*.
//!
//! The solver is an infeasible-start primal-dual interior-point method with
//! HKM direction and symmetrized Schur complement, exploiting the block
//! structure and the sparsity of the constraint operators (at most two
//! nonzero entries per block).

use crate::linalg::{cholesky, cholesky_inverse, CMat, C64};
use crate::mub::MeasurementSet;
use crate::{Error, Result};

pub const DEFAULT_BLOCK_BUDGET: u64 = 4096;
pub const DEFAULT_GAP_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 200;
const FEAS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    PrimalRobustness,
    DualRobustness,
    Generic,
}

/// Hermitian coefficient matrix on one block, stored as a full entry list
/// (both (p,q) and (q,p) present).
#[derive(Debug, Clone)]
pub struct SparseHerm {
    pub entries: Vec<(u32, u32, C64)>,
}

impl SparseHerm {
    fn diag(p: usize) -> Self {
        SparseHerm { entries: vec![(p as u32, p as u32, C64::new(1.0, 0.0))] }
    }
    fn re(p: usize, q: usize) -> Self {
        SparseHerm {
            entries: vec![
                (p as u32, q as u32, C64::new(1.0, 0.0)),
                (q as u32, p as u32, C64::new(1.0, 0.0)),
            ],
        }
    }
    fn im(p: usize, q: usize) -> Self {
        SparseHerm {
            entries: vec![
                (p as u32, q as u32, C64::new(0.0, 1.0)),
                (q as u32, p as u32, C64::new(0.0, -1.0)),
            ],
        }
    }
    fn scalar(v: f64) -> Self {
        SparseHerm { entries: vec![(0, 0, C64::new(v, 0.0))] }
    }
    /// public constructor for a 1x1-block coefficient
    pub fn scalar_entry(v: f64) -> Self {
        Self::scalar(v)
    }
    /// tr(F M), real for Hermitian M.
    fn inner(&self, m: &CMat) -> f64 {
        self.entries
            .iter()
            .map(|&(p, q, c)| (c * m[(q as usize, p as usize)]).re)
            .sum()
    }
    fn add_scaled_into(&self, target: &mut CMat, s: f64) {
        for &(p, q, c) in &self.entries {
            target[(p as usize, q as usize)] += c * s;
        }
    }
    #[cfg(test)]
    fn to_mat(&self, dim: usize) -> CMat {
        let mut m = CMat::zeros(dim);
        self.add_scaled_into(&mut m, 1.0);
        m
    }
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub terms: Vec<(u32, SparseHerm)>,
}

/// Index map from the robustness encoding back to measurement language.
#[derive(Debug, Clone)]
pub struct RobustnessMeta {
    pub d: usize,
    pub k: usize,
    pub radices: Vec<usize>,
    /// kept marginal classes (x, a), each spanning d^2 consecutive constraints
    pub kept: Vec<(usize, usize)>,
    pub eta_block: usize,
    pub slack_block: usize,
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    /// objective blocks C (min <C,X>)
    pub objective: Vec<Constraint>,
    pub constraints: Vec<Constraint>,
    pub b: Vec<f64>,
    pub provenance: Provenance,
    pub meta: Option<RobustnessMeta>,
}

impl SdpProblem {
    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    fn objective_block(&self, b: usize) -> CMat {
        let mut m = CMat::zeros(self.block_dims[b]);
        for c in &self.objective {
            for (blk, f) in &c.terms {
                if *blk as usize == b {
                    f.add_scaled_into(&mut m, 1.0);
                }
            }
        }
        m
    }

    /// Plain-text block listing for cross-solver validation.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "sdp problem: {:?}, {} blocks, {} constraints",
            self.provenance,
            self.block_dims.len(),
            self.constraints.len()
        );
        let _ = writeln!(out, "block dims: {:?}", self.block_dims);
        for (i, c) in self.constraints.iter().enumerate() {
            let _ = write!(out, "constraint {i} (b = {:+.12e}):", self.b[i]);
            for (blk, f) in &c.terms {
                let _ = write!(out, " [blk {blk}:");
                for &(p, q, v) in &f.entries {
                    let _ = write!(out, " ({p},{q})={:+.3e}{:+.3e}i", v.re, v.im);
                }
                let _ = write!(out, "]");
            }
            let _ = writeln!(out);
        }
        out
    }
}

/// Hermitian entry basis for a d x d block, ordered diag/re/im by (p, q).
fn herm_basis(d: usize) -> Vec<SparseHerm> {
    let mut basis = Vec::with_capacity(d * d);
    for p in 0..d {
        basis.push(SparseHerm::diag(p));
        for q in (p + 1)..d {
            basis.push(SparseHerm::re(p, q));
            basis.push(SparseHerm::im(p, q));
        }
    }
    basis
}

fn tuple_index(radices: &[usize], j: &[usize]) -> usize {
    j.iter().zip(radices).fold(0, |acc, (&a, &r)| acc * r + a)
}

/// Robustness primal in standard form: one PSD block of size d per outcome
/// tuple (lexicographic order), a 1x1 eta block and a 1x1 slack block for
/// eta <= 1. Marginal constraints are grouped per (x, a) class; for x >= 1
/// the last outcome class is dropped as linearly dependent (implied by the
/// x = 0 classes and POVM completeness, which is verified).
pub fn build_primal(m: &MeasurementSet) -> Result<SdpProblem> {
    build_primal_budget(m, DEFAULT_BLOCK_BUDGET)
}

pub fn build_primal_budget(m: &MeasurementSet, block_budget: u64) -> Result<SdpProblem> {
    let d = m.dim;
    let k = m.k();
    let radices: Vec<usize> = (0..k).map(|x| m.outcomes(x)).collect();
    let n_tuples = m
        .tuple_count()
        .ok_or_else(|| Error::BudgetExceeded("tuple count overflows u64".into()))?;
    if n_tuples > block_budget {
        return Err(Error::BudgetExceeded(format!(
            "{n_tuples} SDP blocks exceed budget {block_budget}"
        )));
    }
    let n_tuples = n_tuples as usize;
    let eta_block = n_tuples;
    let slack_block = n_tuples + 1;
    let mut block_dims = vec![d; n_tuples];
    block_dims.push(1);
    block_dims.push(1);

    let drop_redundant = m.completeness_deviation() <= 1e-12;
    let mut kept = Vec::new();
    for (x, &r) in radices.iter().enumerate() {
        let last = if x >= 1 && drop_redundant { r - 1 } else { r };
        for a in 0..last {
            kept.push((x, a));
        }
    }

    let basis = herm_basis(d);
    let mut constraints = Vec::with_capacity(kept.len() * d * d + 1);
    let mut b = Vec::with_capacity(constraints.capacity());
    for &(x, a) in &kept {
        // tuples with j_x = a, in lexicographic order
        let others: Vec<usize> = (0..k).filter(|&z| z != x).collect();
        let mut tuples = Vec::with_capacity(n_tuples / radices[x]);
        let mut idx = vec![0usize; others.len()];
        loop {
            let mut j = vec![0usize; k];
            j[x] = a;
            for (pos, &z) in others.iter().enumerate() {
                j[z] = idx[pos];
            }
            tuples.push(tuple_index(&radices, &j) as u32);
            // advance mixed-radix counter
            let mut p = others.len();
            loop {
                if p == 0 {
                    idx.clear();
                    break;
                }
                p -= 1;
                idx[p] += 1;
                if idx[p] < radices[others[p]] {
                    break;
                }
                idx[p] = 0;
            }
            if idx.is_empty() {
                break;
            }
        }
        let op = m.operators[x][a].matrix();
        let tr = op.trace().re;
        // B = A - (trA/d) I; constraint: <F, sum G_j> - eta <F, B> = <F, (trA/d) I>
        let bmat = op.add(&CMat::identity(d).scale_re(-tr / d as f64));
        for f in &basis {
            let mut terms: Vec<(u32, SparseHerm)> =
                tuples.iter().map(|&t| (t, f.clone())).collect();
            let coeff = -f.inner(&bmat);
            if coeff.abs() > 0.0 {
                terms.push((eta_block as u32, SparseHerm::scalar(coeff)));
            }
            constraints.push(Constraint { terms });
            // rhs: tr(F * (trA/d) I), nonzero only for diagonal F
            let rhs = f.inner(&CMat::identity(d).scale_re(tr / d as f64));
            b.push(rhs);
        }
    }
    // eta + slack = 1
    constraints.push(Constraint {
        terms: vec![
            (eta_block as u32, SparseHerm::scalar(1.0)),
            (slack_block as u32, SparseHerm::scalar(1.0)),
        ],
    });
    b.push(1.0);

    // objective: min -eta
    let objective = vec![Constraint { terms: vec![(eta_block as u32, SparseHerm::scalar(-1.0))] }];

    Ok(SdpProblem {
        block_dims,
        objective,
        constraints,
        b,
        provenance: Provenance::PrimalRobustness,
        meta: Some(RobustnessMeta { d, k, radices, kept, eta_block, slack_block }),
    })
}

/// The robustness dual program over the same data: the (D) reading of
/// [`build_primal`]. Multiplier y of the marginal class (x, a) assembles to
/// X_{a|x} = -sum y_i F_i; the G_j dual slack is sum_x X_{j_x|x} >= 0, the
/// eta-block slack is the scalar trace constraint, and the optimum b'y
/// equals -(1 + tr sum X A).
pub fn build_dual(m: &MeasurementSet) -> Result<SdpProblem> {
    let mut p = build_primal(m)?;
    p.provenance = Provenance::DualRobustness;
    Ok(p)
}

/// Recover the dual variables X_{a|x} from the multiplier vector.
pub fn dual_variables(p: &SdpProblem, y: &[f64]) -> Option<Vec<Vec<CMat>>> {
    let meta = p.meta.as_ref()?;
    let d = meta.d;
    let basis = herm_basis(d);
    let mut xs: Vec<Vec<CMat>> =
        meta.radices.iter().map(|&r| vec![CMat::zeros(d); r]).collect();
    for (ci, &(x, a)) in meta.kept.iter().enumerate() {
        for (fi, f) in basis.iter().enumerate() {
            f.add_scaled_into(&mut xs[x][a], -y[ci * d * d + fi]);
        }
    }
    Some(xs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// <C, X> of the (P) reading
    pub primal_value: f64,
    /// b'y of the (D) reading
    pub dual_value: f64,
    pub gap: f64,
    pub x_blocks: Vec<CMat>,
    pub s_blocks: Vec<CMat>,
    pub y: Vec<f64>,
    pub status: SdpStatus,
    pub iterations: usize,
}

impl SdpSolution {
    /// eta reading for robustness problems (both faces optimize -eta).
    pub fn eta(&self) -> f64 {
        -0.5 * (self.primal_value + self.dual_value)
    }
}

struct Workspace {
    /// per block: list of (constraint index, term index) touching it
    by_block: Vec<Vec<(u32, u32)>>,
}

fn build_workspace(p: &SdpProblem) -> Workspace {
    let mut by_block = vec![Vec::new(); p.block_dims.len()];
    for (ci, c) in p.constraints.iter().enumerate() {
        for (ti, (blk, _)) in c.terms.iter().enumerate() {
            by_block[*blk as usize].push((ci as u32, ti as u32));
        }
    }
    Workspace { by_block }
}

fn apply_a(p: &SdpProblem, x: &[CMat]) -> Vec<f64> {
    p.constraints
        .iter()
        .map(|c| c.terms.iter().map(|(blk, f)| f.inner(&x[*blk as usize])).sum())
        .collect()
}

fn apply_a_star(p: &SdpProblem, y: &[f64]) -> Vec<CMat> {
    let mut out: Vec<CMat> = p.block_dims.iter().map(|&d| CMat::zeros(d)).collect();
    for (ci, c) in p.constraints.iter().enumerate() {
        for (blk, f) in &c.terms {
            f.add_scaled_into(&mut out[*blk as usize], y[ci]);
        }
    }
    out
}

/// Largest step alpha in (0, 1] keeping X + alpha dX positive definite,
/// by bisection on the Cholesky test.
fn max_step(x: &[CMat], dx: &[CMat]) -> f64 {
    let pd_at = |alpha: f64| -> bool {
        x.iter().zip(dx).all(|(xb, db)| {
            let mut t = xb.clone();
            t.add_assign_scaled(db, alpha);
            cholesky(&t).is_some()
        })
    };
    if pd_at(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if pd_at(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Real symmetric positive-definite solve via in-place Cholesky with an
/// escalating ridge. `a` is row-major n x n (lower triangle used).
fn solve_spd(a: &mut [f64], rhs: &[f64], n: usize) -> Result<Vec<f64>> {
    let max_diag = (0..n).map(|i| a[i * n + i].abs()).fold(0.0f64, f64::max).max(1.0);
    let mut ridge = 0.0f64;
    loop {
        let mut l = a.to_vec();
        let mut ok = true;
        'outer: for i in 0..n {
            for j in 0..=i {
                let mut sum = l[i * n + j] + if i == j { ridge } else { 0.0 };
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        ok = false;
                        break 'outer;
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        if ok {
            let mut v = rhs.to_vec();
            for i in 0..n {
                for k in 0..i {
                    v[i] = v[i] - l[i * n + k] * v[k];
                }
                v[i] /= l[i * n + i];
            }
            for i in (0..n).rev() {
                for k in (i + 1)..n {
                    v[i] = v[i] - l[k * n + i] * v[k];
                }
                v[i] /= l[i * n + i];
            }
            return Ok(v);
        }
        ridge = if ridge == 0.0 { 1e-12 * max_diag } else { ridge * 100.0 };
        if ridge > 1e-4 * max_diag {
            return Err(Error::SdpFailure("Schur system not positive definite".into()));
        }
    }
}

/// Symmetrized HKM Schur matrix: M_ij = Re tr(A_i X A_j S^{-1}), summed over
/// shared blocks. Lower triangle assembled from per-block constraint lists.
fn assemble_schur(
    p: &SdpProblem,
    ws: &Workspace,
    x: &[CMat],
    sinv: &[CMat],
) -> Vec<f64> {
    let m = p.constraints.len();
    let mut schur = vec![0.0f64; m * m];
    for (blk, touching) in ws.by_block.iter().enumerate() {
        let xb = &x[blk];
        let sb = &sinv[blk];
        for (ii, &(ci, ti)) in touching.iter().enumerate() {
            let fi = &p.constraints[ci as usize].terms[ti as usize].1;
            for &(cj, tj) in touching.iter().take(ii + 1) {
                let fj = &p.constraints[cj as usize].terms[tj as usize].1;
                // Re tr(Fi X Fj Sinv): tr(E_pq X E_rs Sinv) = X[q,r] Sinv[s,p]
                let mut acc = 0.0f64;
                for &(ip, iq, ic) in &fi.entries {
                    for &(jp, jq, jc) in &fj.entries {
                        let v = ic
                            * xb[(iq as usize, jp as usize)]
                            * jc
                            * sb[(jq as usize, ip as usize)];
                        acc += v.re;
                    }
                }
                let (hi, lo) = if ci >= cj { (ci as usize, cj as usize) } else { (cj as usize, ci as usize) };
                schur[hi * m + lo] += acc;
            }
        }
    }
    // mirror to the upper triangle
    for i in 0..m {
        for j in (i + 1)..m {
            schur[i * m + j] = schur[j * m + i];
        }
    }
    schur
}

pub fn solve_sdp(p: &SdpProblem, gap_tol: f64) -> Result<SdpSolution> {
    solve_sdp_max_iter(p, gap_tol, DEFAULT_MAX_ITER)
}

pub fn solve_sdp_max_iter(p: &SdpProblem, gap_tol: f64, max_iter: usize) -> Result<SdpSolution> {
    let nblocks = p.block_dims.len();
    let m = p.constraints.len();
    let n_tot: usize = p.block_dims.iter().sum();
    let ws = build_workspace(p);
    let c_blocks: Vec<CMat> = (0..nblocks).map(|b| p.objective_block(b)).collect();
    let b_norm = p.b.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1.0);

    let mut x: Vec<CMat> = p.block_dims.iter().map(|&d| CMat::identity(d)).collect();
    let mut s: Vec<CMat> = p.block_dims.iter().map(|&d| CMat::identity(d)).collect();
    let mut y = vec![0.0f64; m];

    let mut status = SdpStatus::MaxIter;
    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it + 1;
        let sinv: Vec<CMat> = s
            .iter()
            .map(|sb| {
                cholesky(sb)
                    .map(|l| cholesky_inverse(&l))
                    .ok_or_else(|| Error::SdpFailure("dual iterate lost definiteness".into()))
            })
            .collect::<Result<_>>()?;

        let ax = apply_a(p, &x);
        let rp: Vec<f64> = p.b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect();
        let asy = apply_a_star(p, &y);
        let rd: Vec<CMat> = (0..nblocks)
            .map(|bi| c_blocks[bi].sub(&asy[bi]).sub(&s[bi]))
            .collect();

        let mu: f64 = x
            .iter()
            .zip(&s)
            .map(|(xb, sb)| xb.trace_prod(sb).re)
            .sum::<f64>()
            / n_tot as f64;
        let pv: f64 = c_blocks.iter().zip(&x).map(|(cb, xb)| cb.trace_prod(xb).re).sum();
        let dv: f64 = p.b.iter().zip(&y).map(|(bi, yi)| bi * yi).sum();

        let pinf = rp.iter().fold(0.0f64, |a, &v| a.max(v.abs())) / b_norm;
        let dinf = rd.iter().fold(0.0f64, |a, rb| a.max(rb.max_abs()));
        let gap = (mu * n_tot as f64).abs() / (1.0 + pv.abs() + dv.abs());
        if gap <= gap_tol && pinf <= FEAS_TOL && dinf <= FEAS_TOL {
            status = SdpStatus::Optimal;
            break;
        }

        let sigma = 0.3f64;
        // W = sigma mu Sinv - X - (X Rd Sinv + Sinv Rd X)/2
        let w: Vec<CMat> = (0..nblocks)
            .map(|bi| {
                let mut wb = sinv[bi].scale_re(sigma * mu);
                wb.add_assign_scaled(&x[bi], -1.0);
                let t = x[bi].matmul(&rd[bi]).matmul(&sinv[bi]);
                let t = t.add(&t.adjoint()).scale_re(0.5);
                wb.add_assign_scaled(&t, -1.0);
                wb
            })
            .collect();
        let aw = apply_a(p, &w);
        let rhs: Vec<f64> = rp.iter().zip(&aw).map(|(r, a)| r - a).collect();

        let mut schur = assemble_schur(p, &ws, &x, &sinv);
        let dy = solve_spd(&mut schur, &rhs, m)?;

        let asdy = apply_a_star(p, &dy);
        let ds: Vec<CMat> = (0..nblocks).map(|bi| rd[bi].sub(&asdy[bi])).collect();
        let dx: Vec<CMat> = (0..nblocks)
            .map(|bi| {
                let mut dxb = sinv[bi].scale_re(sigma * mu);
                dxb.add_assign_scaled(&x[bi], -1.0);
                let t = x[bi].matmul(&ds[bi]).matmul(&sinv[bi]);
                let t = t.add(&t.adjoint()).scale_re(0.5);
                dxb.add_assign_scaled(&t, -1.0);
                dxb
            })
            .collect();

        let ap = (0.98 * max_step(&x, &dx)).min(1.0);
        let ad = (0.98 * max_step(&s, &ds)).min(1.0);
        for bi in 0..nblocks {
            x[bi].add_assign_scaled(&dx[bi], ap);
            let xa = x[bi].adjoint();
            x[bi] = x[bi].add(&xa).scale_re(0.5);
            s[bi].add_assign_scaled(&ds[bi], ad);
            let sa = s[bi].adjoint();
            s[bi] = s[bi].add(&sa).scale_re(0.5);
        }
        for (yi, dyi) in y.iter_mut().zip(&dy) {
            *yi += ad * dyi;
        }
        if !x.iter().all(|b| b.is_finite()) || !s.iter().all(|b| b.is_finite()) {
            return Err(Error::SdpFailure("iterates diverged".into()));
        }
    }

    let pv: f64 = c_blocks.iter().zip(&x).map(|(cb, xb)| cb.trace_prod(xb).re).sum();
    let dv: f64 = p.b.iter().zip(&y).map(|(bi, yi)| bi * yi).sum();
    Ok(SdpSolution {
        primal_value: pv,
        dual_value: dv,
        gap: pv - dv,
        x_blocks: x,
        s_blocks: s,
        y,
        status,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mub::{build_for_dim, pauli_triple, to_measurements};

    fn mub_subset(d: u64, k: usize) -> MeasurementSet {
        let m = build_for_dim(d).unwrap();
        to_measurements(&m, &(0..k).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn primal_shapes() {
        let p = build_primal(&mub_subset(2, 2)).unwrap();
        assert_eq!(p.block_dims.len(), 4 + 2);
        // x=0 keeps 2 classes, x=1 keeps 1 -> 3 classes * 4 entries + 1
        assert_eq!(p.num_constraints(), 3 * 4 + 1);
        let p3 = build_primal(&mub_subset(3, 3)).unwrap();
        assert_eq!(p3.block_dims.len(), 27 + 2);
        assert_eq!(p3.num_constraints(), (3 + 2 + 2) * 9 + 1);
        assert!(build_primal_budget(&mub_subset(3, 4), 50).is_err());
    }

    #[test]
    fn schur_matches_dense_reference() {
        use rand::{Rng, SeedableRng};
        let p = build_primal(&mub_subset(2, 2)).unwrap();
        let ws = build_workspace(&p);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        // random PD blocks for X and Sinv
        let mut rand_pd = |dim: usize| {
            let g = CMat::from_fn(dim, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            g.matmul(&g.adjoint()).add(&CMat::identity(dim).scale_re(0.5))
        };
        let x: Vec<CMat> = p.block_dims.iter().map(|&d| rand_pd(d)).collect();
        let sinv: Vec<CMat> = p.block_dims.iter().map(|&d| rand_pd(d)).collect();
        let schur = assemble_schur(&p, &ws, &x, &sinv);
        let m = p.num_constraints();
        for i in 0..m {
            for j in 0..m {
                // dense reference: sum over blocks of Re tr(Fi X Fj Sinv)
                let mut expect = 0.0;
                for (bi, fi) in &p.constraints[i].terms {
                    for (bj, fj) in &p.constraints[j].terms {
                        if bi == bj {
                            let blk = *bi as usize;
                            let dim = p.block_dims[blk];
                            let prod = fi
                                .to_mat(dim)
                                .matmul(&x[blk])
                                .matmul(&fj.to_mat(dim))
                                .matmul(&sinv[blk]);
                            expect += prod.trace().re;
                        }
                    }
                }
                assert!(
                    (schur[i * m + j] - expect).abs() < 1e-10 * (1.0 + expect.abs()),
                    "({i},{j}): {} vs {expect}",
                    schur[i * m + j]
                );
            }
        }
    }

    #[test]
    fn solve_single_measurement_eta_one() {
        let p = build_primal(&mub_subset(3, 1)).unwrap();
        let sol = solve_sdp(&p, 1e-8).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.eta() - 1.0).abs() < 1e-6, "eta {}", sol.eta());
    }

    #[test]
    fn solve_pair_d2() {
        let p = build_primal(&mub_subset(2, 2)).unwrap();
        let sol = solve_sdp(&p, 1e-8).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(
            (sol.eta() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6,
            "eta {}",
            sol.eta()
        );
        // weak duality of the min reading
        assert!(sol.primal_value >= sol.dual_value - 1e-7);
    }

    #[test]
    fn solve_pauli_triple() {
        let ms = to_measurements(&pauli_triple(), &[0, 1, 2]).unwrap();
        let p = build_primal(&ms).unwrap();
        let sol = solve_sdp(&p, 1e-8).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.eta() - 1.0 / 3f64.sqrt()).abs() < 1e-6, "eta {}", sol.eta());
    }

    #[test]
    #[ignore = "perf probe for the largest in-budget instance"]
    fn solve_d7_k3_value() {
        let t0 = std::time::Instant::now();
        let p = build_primal(&mub_subset(7, 3)).unwrap();
        let sol = solve_sdp(&p, 1e-8).unwrap();
        eprintln!(
            "d=7 k=3: eta {} iters {} in {:?}",
            sol.eta(),
            sol.iterations,
            t0.elapsed()
        );
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.eta() - 0.5101).abs() < 5e-4);
    }

    #[test]
    fn dual_reading_uniform_point_strictly_feasible() {
        // X_{a|x} = mu I with theta' = -2 is strictly feasible for (D)
        let msr = mub_subset(2, 2);
        let p = build_dual(&msr).unwrap();
        let meta = p.meta.as_ref().unwrap();
        let d = meta.d;
        let mu = 0.1;
        let mut y = vec![0.0; p.num_constraints()];
        for (ci, _) in meta.kept.iter().enumerate() {
            // X = -sum y F: diagonal basis elements come first for each p
            let base = ci * d * d;
            let mut fi = 0;
            for pp in 0..d {
                y[base + fi] = -mu; // diag(pp)
                fi += 1;
                fi += 2 * (d - pp - 1);
            }
        }
        let last = p.num_constraints() - 1;
        y[last] = -2.0;
        let asy = apply_a_star(&p, &y);
        for (bi, dim) in p.block_dims.iter().enumerate() {
            let slack = p.objective_block(bi).sub(&asy[bi]);
            assert!(cholesky(&slack).is_some(), "block {bi} (dim {dim}) not PD");
        }
        let xs = dual_variables(&p, &y).unwrap();
        assert!(xs[0][0].sub(&CMat::identity(d).scale_re(mu)).max_abs() < 1e-12);
    }

    #[test]
    fn dual_variables_recover_certificate_shape() {
        let ms = mub_subset(2, 2);
        let p = build_primal(&ms).unwrap();
        let sol = solve_sdp(&p, 1e-8).unwrap();
        let xs = dual_variables(&p, &sol.y).unwrap();
        // dual objective identity: b'y = -(1 + tr sum X A) with X_{dropped} = 0
        let mut tr_sum = 0.0;
        for (x, ops) in ms.operators.iter().enumerate() {
            for (a, op) in ops.iter().enumerate() {
                tr_sum += xs[x][a].trace_prod(op.matrix()).re;
            }
        }
        assert!(
            (sol.dual_value + 1.0 + tr_sum).abs() < 1e-7,
            "identity violated: {} vs {}",
            sol.dual_value,
            -(1.0 + tr_sum)
        );
    }
}
