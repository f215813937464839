//! Subset enumeration for operational inequivalence (cluster counts of
//! eta_up), qubit closed-form optimality checks, and the steering mapping.

use crate::bounds::{compute_lambda, eta_up_rank1_from_lambda, DEFAULT_TIE_TOL};
use crate::linalg::{CMat, C64};
use crate::mub::{build_for_dim, to_measurements, MeasurementSet};
use crate::report::RobustnessReport;
use crate::robustness::{robustness, RobustnessOptions};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// budget in elementary eigen-iterations: C(d+1, k) * d^k
pub const SCAN_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Serialize)]
pub struct SubsetRecord {
    pub indices: Vec<usize>,
    pub eta_up: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_star: Option<f64>,
    pub cluster_id: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubsetScan {
    pub d: usize,
    pub k: usize,
    pub records: Vec<SubsetRecord>,
    pub group_tol: f64,
    /// lower bound on the number of inequivalent sets
    pub distinct: usize,
    /// sensitivity of the count to the grouping tolerance
    pub distinct_at_1e5: usize,
    pub distinct_at_1e7: usize,
    pub complete: bool,
}

pub const DEFAULT_GROUP_TOL: f64 = 1e-6;

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k == 0 || k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - (k - i) {
                idx[i] += 1;
                for j in (i + 1)..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn count_clusters(sorted: &[f64], tol: f64) -> usize {
    let mut clusters = 0;
    let mut prev = f64::NEG_INFINITY;
    for &v in sorted {
        if v - prev > tol {
            clusters += 1;
        }
        prev = v;
    }
    clusters
}

/// Enumerate all k-subsets of the d+1 constructed bases (computational basis
/// included in the pool), compute eta_up for each, and cluster the values.
pub fn scan_subsets(
    d: u64,
    k: usize,
    compute_exact: bool,
    group_tol: f64,
) -> Result<SubsetScan> {
    let mubs = build_for_dim(d)?;
    let n = mubs.bases.len(); // d + 1
    let work = binomial(n as u64, k as u64).saturating_mul(d.saturating_pow(k as u32));
    if work > SCAN_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "subset scan needs {work} eigen-iterations (budget {SCAN_BUDGET})"
        )));
    }
    let subsets = combinations(n, k);
    let mut records: Vec<SubsetRecord> = subsets
        .par_iter()
        .map(|subset| -> Result<SubsetRecord> {
            let ms = to_measurements(&mubs, subset)?;
            let lam = compute_lambda(&ms, DEFAULT_TIE_TOL)?;
            let eta_up = eta_up_rank1_from_lambda(&ms, &lam).value;
            let eta_star = if compute_exact {
                Some(robustness(&ms, &RobustnessOptions::default())?.eta)
            } else {
                None
            };
            Ok(SubsetRecord { indices: subset.clone(), eta_up, eta_star, cluster_id: 0 })
        })
        .collect::<Result<_>>()?;

    let mut sorted: Vec<f64> = records.iter().map(|r| r.eta_up).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let distinct = count_clusters(&sorted, group_tol);
    let distinct_at_1e5 = count_clusters(&sorted, 1e-5);
    let distinct_at_1e7 = count_clusters(&sorted, 1e-7);

    // assign cluster ids by ascending representative value
    let mut reps: Vec<f64> = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    for &v in &sorted {
        if v - prev > group_tol {
            reps.push(v);
        }
        prev = v;
    }
    for r in &mut records {
        r.cluster_id = reps
            .iter()
            .rposition(|&rep| r.eta_up >= rep - group_tol)
            .unwrap_or(0);
    }

    Ok(SubsetScan {
        d: d as usize,
        k,
        records,
        group_tol,
        distinct,
        distinct_at_1e5,
        distinct_at_1e7,
        complete: true,
    })
}

// ---------- qubit closed forms (Bloch-vector picture) ----------

pub type Bloch = [f64; 3];

fn norm(v: Bloch) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn lincomb(coeffs: &[(f64, Bloch)]) -> Bloch {
    let mut out = [0.0; 3];
    for (c, v) in coeffs {
        for i in 0..3 {
            out[i] += c * v[i];
        }
    }
    out
}

/// eta_2* = 2 / (||a1 + a2|| + ||a1 - a2||)
pub fn qubit_eta2(a1: Bloch, a2: Bloch) -> f64 {
    2.0 / (norm(lincomb(&[(1.0, a1), (1.0, a2)])) + norm(lincomb(&[(1.0, a1), (-1.0, a2)])))
}

/// eta_3* = 4 / (||a1+a2+a3|| + ||a1-a2-a3|| + ||a2-a1-a3|| + ||a3-a1-a2||)
pub fn qubit_eta3(a1: Bloch, a2: Bloch, a3: Bloch) -> f64 {
    let sigma = norm(lincomb(&[(1.0, a1), (1.0, a2), (1.0, a3)]))
        + norm(lincomb(&[(1.0, a1), (-1.0, a2), (-1.0, a3)]))
        + norm(lincomb(&[(1.0, a2), (-1.0, a1), (-1.0, a3)]))
        + norm(lincomb(&[(1.0, a3), (-1.0, a1), (-1.0, a2)]))
    ;
    4.0 / sigma
}

/// c0 * I + v . sigma as a 2x2 complex matrix
fn pauli_matrix(c0: f64, v: Bloch) -> CMat {
    let mut m = CMat::zeros(2);
    m[(0, 0)] = C64::new(c0 + v[2], 0.0);
    m[(1, 1)] = C64::new(c0 - v[2], 0.0);
    m[(0, 1)] = C64::new(v[0], -v[1]);
    m[(1, 0)] = C64::new(v[0], v[1]);
    m
}

fn min_eig_2x2(m: &CMat) -> f64 {
    let t = m.trace().re;
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    let disc = (t * t / 4.0 - det).max(0.0).sqrt();
    t / 2.0 - disc
}

/// The explicit parent elements for unbiased two-outcome qubit POVMs at noise
/// level eta (two vectors: G_{mu1 mu2}; three: G_{mu1 mu2 mu3}); returns the
/// elements with their outcome signs.
pub fn qubit_parent_elements(vectors: &[Bloch], eta: f64) -> Result<Vec<(Vec<i32>, CMat)>> {
    match vectors {
        [a1, a2] => {
            let z = 1.0 - eta * norm(lincomb(&[(1.0, *a1), (-1.0, *a2)]));
            let mut out = Vec::new();
            for &m1 in &[1.0f64, -1.0] {
                for &m2 in &[1.0f64, -1.0] {
                    let v = lincomb(&[(eta * m1, *a1), (eta * m2, *a2)]);
                    let g = pauli_matrix(1.0 + m1 * m2 * z, v).scale_re(0.25);
                    out.push((vec![m1 as i32, m2 as i32], g));
                }
            }
            Ok(out)
        }
        [a1, a2, a3] => {
            let half = |u: Bloch, v: Bloch, w: Bloch| {
                (norm(lincomb(&[(1.0, u), (-1.0, v), (-1.0, w)]))
                    + norm(lincomb(&[(1.0, v), (-1.0, u), (-1.0, w)])))
                    / 2.0
            };
            // Z_i couples the two vectors other than a_i
            let z1 = 1.0 - eta * half(*a2, *a3, *a1);
            let z2 = 1.0 - eta * half(*a1, *a3, *a2);
            let z3 = 1.0 - eta * half(*a1, *a2, *a3);
            let mut out = Vec::new();
            for &m1 in &[1.0f64, -1.0] {
                for &m2 in &[1.0f64, -1.0] {
                    for &m3 in &[1.0f64, -1.0] {
                        let c0 = 1.0 + m2 * m3 * z1 + m3 * m1 * z2 + m1 * m2 * z3;
                        let v = lincomb(&[(eta * m1, *a1), (eta * m2, *a2), (eta * m3, *a3)]);
                        let g = pauli_matrix(c0, v).scale_re(0.125);
                        out.push((vec![m1 as i32, m2 as i32, m3 as i32], g));
                    }
                }
            }
            Ok(out)
        }
        _ => Err(Error::InvalidInput("need 2 or 3 Bloch vectors".into())),
    }
}

/// true iff all elements of the explicit qubit parent are PSD within 1e-10
pub fn qubit_parent_positivity(vectors: &[Bloch], eta: f64) -> Result<bool> {
    let elements = qubit_parent_elements(vectors, eta)?;
    Ok(elements.iter().all(|(_, g)| min_eig_2x2(g) >= -1e-10))
}

// ---------- steering mapping ----------

/// Sub-normalized states sigma_{a|x} prepared on Bob's side.
#[derive(Debug, Clone)]
pub struct Assemblage {
    pub dim: usize,
    pub elements: Vec<Vec<CMat>>,
}

impl Assemblage {
    /// max deviation of sum_a sigma_{a|x} across x from the x=0 sum
    pub fn consistency_deviation(&self) -> f64 {
        let sum = |x: usize| {
            let mut s = CMat::zeros(self.dim);
            for e in &self.elements[x] {
                s.add_assign_scaled(e, 1.0);
            }
            s
        };
        let s0 = sum(0);
        (1..self.elements.len())
            .map(|x| sum(x).sub(&s0).max_abs())
            .fold(0.0, f64::max)
    }
}

/// partial trace over Alice of (A (x) 1) |psi><psi|, psi indexed as i*d + j
fn steered_state(a: &CMat, psi: &[C64], d: usize) -> CMat {
    // sigma_{j j'} = sum_{i m} A_{i m} psi_{m j} conj(psi_{i j'})
    CMat::from_fn(d, |j, jp| {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            for m in 0..d {
                acc += a[(i, m)] * psi[m * d + j] * psi[i * d + jp].conj();
            }
        }
        acc
    })
}

fn reduced_bob(psi: &[C64], d: usize) -> CMat {
    steered_state(&CMat::identity(d), psi, d)
}

/// assemblage of the noisy measurements A^eta on the pure state psi
pub fn assemblage(psi: &[C64], m: &MeasurementSet, eta: f64) -> Assemblage {
    let d = m.dim;
    let rho_b = reduced_bob(psi, d);
    let elements = m
        .operators
        .iter()
        .map(|ops| {
            ops.iter()
                .map(|op| {
                    let mut s = steered_state(op.matrix(), psi, d).scale_re(eta);
                    s.add_assign_scaled(&rho_b, (1.0 - eta) * op.trace_re() / d as f64);
                    s
                })
                .collect()
        })
        .collect();
    Assemblage { dim: d, elements }
}

/// Verifies tr_A[(A^eta (x) 1)|psi><psi|] = tr_A[(A (x) 1) rho^eta_psi] by
/// building both sides; returns the max entrywise deviation.
pub fn steering_identity_check(psi: &[C64], m: &MeasurementSet, eta: f64) -> Result<f64> {
    let d = m.dim;
    if psi.len() != d * d {
        return Err(Error::InvalidInput(format!(
            "psi must live on C^{d} (x) C^{d}"
        )));
    }
    let nrm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if (nrm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput("psi not normalized".into()));
    }
    let lhs = assemblage(psi, m, eta);
    // rhs: noiseless measurements on rho^eta = eta |psi><psi| + (1-eta) 1/d (x) rho_B
    let rho_b = reduced_bob(psi, d);
    let mut dev = 0.0f64;
    for (x, ops) in m.operators.iter().enumerate() {
        for (a, op) in ops.iter().enumerate() {
            // tr_A[(A (x) 1)(1/d (x) rho_B)] = tr(A)/d rho_B
            let mut rhs = steered_state(op.matrix(), psi, d).scale_re(eta);
            rhs.add_assign_scaled(&rho_b, (1.0 - eta) * op.trace_re() / d as f64);
            dev = dev.max(lhs.elements[x][a].sub(&rhs).max_abs());
        }
    }
    Ok(dev)
}

#[derive(Debug, Clone, Serialize)]
pub struct SteeringReport {
    pub d: usize,
    pub k: usize,
    /// critical isotropic-state noise for steering with k MUB: w* = eta*
    pub w_star: f64,
    pub robustness: RobustnessReport,
}

/// w* = eta* for k MUB measurements on the maximally entangled state.
pub fn steering_bound(d: u64, k: usize) -> Result<SteeringReport> {
    let mubs = build_for_dim(d)?;
    let ms = to_measurements(&mubs, &(0..k).collect::<Vec<_>>())?;
    let rep = robustness(&ms, &RobustnessOptions::default())?;
    Ok(SteeringReport { d: d as usize, k, w_star: rep.eta, robustness: rep })
}

/// deterministic unit vector sampler (Box-Muller on a seeded stream)
pub fn random_unit_bloch(rng: &mut impl rand::Rng) -> Bloch {
    loop {
        let mut v = [0.0; 3];
        for pair in 0..2 {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = (-2.0 * u1.ln()).sqrt();
            if 2 * pair < 3 {
                v[2 * pair] = r * u2.cos();
            }
            if 2 * pair + 1 < 3 {
                v[2 * pair + 1] = r * u2.sin();
            }
        }
        let n = norm(v);
        if n > 1e-6 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}
