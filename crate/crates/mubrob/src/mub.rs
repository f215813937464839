//! Construction of mutually unbiased bases in prime-power dimension and the
//! measurement sets built from them.
//!
//! Odd prime powers use the Galois-field quadratic-phase vectors, even prime
//! powers the Galois-ring/Teichmuller vectors, both with the computational
//! basis appended last. Element enumeration (hence basis and vector indexing)
//! is fixed lexicographic over coefficient vectors so that subset scans are
//! reproducible.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::galois::{prime_power, FiniteField, GaloisRing};
use crate::linalg::{root_of_unity, CMat, HermitianOperator, C64};
use crate::{Error, Result};

/// One orthonormal basis.
#[derive(Debug, Clone)]
pub struct Basis {
    pub dim: usize,
    /// vectors[a][l]: component l of the a-th basis vector.
    pub vectors: Vec<Vec<C64>>,
    pub label: String,
}

impl Basis {
    pub fn computational(dim: usize) -> Self {
        let vectors = (0..dim)
            .map(|a| {
                let mut v = vec![C64::new(0.0, 0.0); dim];
                v[a] = C64::new(1.0, 0.0);
                v
            })
            .collect();
        Basis { dim, vectors, label: "computational".into() }
    }

    /// Max deviation of the Gram matrix from identity.
    pub fn gram_deviation(&self) -> f64 {
        let d = self.dim;
        let mut dev: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                let dot: C64 = (0..d).map(|l| self.vectors[a][l].conj() * self.vectors[b][l]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                dev = dev.max((dot - C64::new(expect, 0.0)).norm());
            }
        }
        dev
    }
}

/// How a MUB set was built; carried into serialized output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConstructionMeta {
    /// Galois-field construction, d = p^r with p odd.
    OddPrimePower { p: u64, r: u32, modulus: Vec<u64> },
    /// Galois-ring construction, d = 2^r.
    EvenPrimePower { r: u32, modulus: Vec<u64> },
    /// The qubit Pauli Z/X/Y triple.
    PauliTriple,
    /// Tensor product of two smaller sets (used for the d = 6 triple).
    Tensor { d1: u64, d2: u64 },
    Imported,
}

/// A set of pairwise mutually unbiased bases.
#[derive(Debug, Clone)]
pub struct MubSet {
    pub dim: usize,
    pub bases: Vec<Basis>,
    pub meta: ConstructionMeta,
}

/// Outcome-relabeling covariance group of a measurement set: unitaries U_c
/// with U_c A_{a|x} U_c^dag = A_{perm_c[x][a] | x}. Used to cut exhaustive
/// tuple scans by a factor d; its validity is asserted numerically whenever
/// it is attached.
#[derive(Debug, Clone)]
pub struct ShiftCovariance {
    pub shifts: Vec<Shift>,
}

#[derive(Debug, Clone)]
pub struct Shift {
    /// Diagonal unitary, entries per computational label.
    pub diag: Vec<C64>,
    /// perms[x][a] = image outcome of a under conjugation, per measurement x.
    pub perms: Vec<Vec<usize>>,
}

/// A set of k POVMs on dimension d.
#[derive(Debug, Clone)]
pub struct MeasurementSet {
    pub dim: usize,
    /// operators[x][a] = A_{a|x}.
    pub operators: Vec<Vec<HermitianOperator>>,
    pub rank_one_projective: bool,
    /// Unit vectors when rank-one projective: vectors[x][a].
    pub vectors: Option<Vec<Vec<Vec<C64>>>>,
    pub covariance: Option<ShiftCovariance>,
}

impl MeasurementSet {
    pub fn k(&self) -> usize {
        self.operators.len()
    }

    pub fn outcomes(&self, x: usize) -> usize {
        self.operators[x].len()
    }

    /// Total number of outcome tuples, None on overflow.
    pub fn tuple_count(&self) -> Option<u64> {
        self.operators.iter().try_fold(1u64, |acc, ops| acc.checked_mul(ops.len() as u64))
    }

    /// Max deviation of each sum_a A_{a|x} from identity.
    pub fn completeness_deviation(&self) -> f64 {
        let d = self.dim;
        let mut dev: f64 = 0.0;
        for ops in &self.operators {
            let mut sum = CMat::zeros(d);
            for op in ops {
                sum = sum.add(op.matrix());
            }
            dev = dev.max(sum.sub(&CMat::identity(d)).max_abs());
        }
        dev
    }

    pub fn from_operators(dim: usize, operators: Vec<Vec<HermitianOperator>>) -> Self {
        MeasurementSet { dim, operators, rank_one_projective: false, vectors: None, covariance: None }
    }

    /// Check the covariance metadata numerically: conjugation by every U_c
    /// permutes the POVM elements as declared. Max entrywise deviation.
    pub fn covariance_deviation(&self) -> f64 {
        let Some(cov) = &self.covariance else { return 0.0 };
        let d = self.dim;
        let mut dev: f64 = 0.0;
        for shift in &cov.shifts {
            for (x, ops) in self.operators.iter().enumerate() {
                for (a, op) in ops.iter().enumerate() {
                    let target = &self.operators[x][shift.perms[x][a]];
                    // U A U^dag entrywise: diag[i] A[i][j] conj(diag[j])
                    let m = op.matrix();
                    for i in 0..d {
                        for j in 0..d {
                            let conj = shift.diag[i] * m[(i, j)] * shift.diag[j].conj();
                            dev = dev.max((conj - target.matrix()[(i, j)]).norm());
                        }
                    }
                }
            }
        }
        dev
    }
}

/// Complete set of d+1 MUB for odd prime-power d = p^r:
/// |phi_a^x> = d^{-1/2} sum_l w_p^{Tr(x l^2 + a l)} |l>, computational last.
pub fn build_mub_odd(p: u64, r: u32) -> Result<MubSet> {
    if p == 2 {
        return Err(Error::InvalidInput("p must be odd; use build_mub_even".into()));
    }
    let field = FiniteField::new(p, r)?;
    let d = field.order() as usize;
    let w = root_of_unity(p);
    let norm = 1.0 / (d as f64).sqrt();
    let mut bases = Vec::with_capacity(d + 1);
    for x in field.elements() {
        let mut vectors = Vec::with_capacity(d);
        for a in field.elements() {
            let v: Vec<C64> = field
                .elements()
                .map(|l| {
                    let phase = field.trace(field.add(
                        field.mul(x, field.mul(l, l)),
                        field.mul(a, l),
                    ));
                    w.powu(phase as u32) * norm
                })
                .collect();
            vectors.push(v);
        }
        bases.push(Basis { dim: d, vectors, label: format!("x={}", x.idx) });
    }
    bases.push(Basis::computational(d));
    Ok(MubSet {
        dim: d,
        bases,
        meta: ConstructionMeta::OddPrimePower { p, r, modulus: field.modulus.clone() },
    })
}

/// Complete set of d+1 MUB for even prime-power d = 2^r:
/// |phi_a^x> = d^{-1/2} sum_{l in T_r} i^{Tr[(x + 2a) l]} |l>, computational
/// last; x, a, l range over the Teichmuller set in fixed enumeration order.
pub fn build_mub_even(r: u32) -> Result<MubSet> {
    let ring = GaloisRing::new(r)?;
    let d = 2usize.pow(r);
    let teich = ring.teichmuller_elements();
    let i_unit = C64::new(0.0, 1.0);
    let norm = 1.0 / (d as f64).sqrt();
    let mut bases = Vec::with_capacity(d + 1);
    for &x in &teich {
        let mut vectors = Vec::with_capacity(d);
        for &a in &teich {
            let coeff = ring.add(x, ring.double(a)); // x + 2a
            let v: Vec<C64> = teich
                .iter()
                .map(|&l| i_unit.powu(ring.trace(ring.mul(coeff, l)) as u32) * norm)
                .collect();
            vectors.push(v);
        }
        bases.push(Basis { dim: d, vectors, label: format!("x={}", x.idx) });
    }
    bases.push(Basis::computational(d));
    Ok(MubSet {
        dim: d,
        bases,
        meta: ConstructionMeta::EvenPrimePower { r, modulus: ring.modulus.clone() },
    })
}

/// The three qubit MUB as Pauli Z, X, Y eigenbases, computational first.
pub fn pauli_triple() -> MubSet {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re = |x: f64| C64::new(x, 0.0);
    let im = |x: f64| C64::new(0.0, x);
    let z = Basis::computational(2);
    let x = Basis {
        dim: 2,
        vectors: vec![vec![re(s), re(s)], vec![re(s), re(-s)]],
        label: "pauli-x".into(),
    };
    let y = Basis {
        dim: 2,
        vectors: vec![vec![re(s), im(s)], vec![re(s), im(-s)]],
        label: "pauli-y".into(),
    };
    MubSet { dim: 2, bases: vec![z, x, y], meta: ConstructionMeta::PauliTriple }
}

/// Three MUB in composite dimension d1*d2 by tensoring the first three bases
/// of the constituent prime-power sets (used for d = 6).
pub fn build_mub_tensor_triple(d1: u64, d2: u64) -> Result<MubSet> {
    let m1 = build_for_dim(d1)?;
    let m2 = build_for_dim(d2)?;
    if m1.bases.len() < 3 || m2.bases.len() < 3 {
        return Err(Error::InvalidInput("constituents must have at least 3 bases".into()));
    }
    let d = (d1 * d2) as usize;
    let mut bases = Vec::with_capacity(3);
    for i in 0..3 {
        let mut vectors = Vec::with_capacity(d);
        for v1 in &m1.bases[i].vectors {
            for v2 in &m2.bases[i].vectors {
                vectors.push(CMat::kron_vec(v1, v2));
            }
        }
        bases.push(Basis { dim: d, vectors, label: format!("tensor-{i}") });
    }
    Ok(MubSet { dim: d, bases, meta: ConstructionMeta::Tensor { d1, d2 } })
}

/// Complete set for a prime-power dimension, dispatching odd/even.
pub fn build_for_dim(d: u64) -> Result<MubSet> {
    let (p, r) = prime_power(d).ok_or(Error::NotPrimePower(d))?;
    if p == 2 {
        build_mub_even(r)
    } else {
        build_mub_odd(p, r)
    }
}

/// Unbiasedness verification report.
#[derive(Debug, Clone, Serialize)]
pub struct UnbiasednessReport {
    pub max_deviation: f64,
    pub offending_pair: Option<(usize, usize, usize, usize)>,
    pub pass: bool,
    pub tol: f64,
}

/// Max over distinct basis pairs and vector indices of
/// | |<phi_a|psi_b>| - 1/sqrt(d) |.
pub fn verify_unbiased(m: &MubSet, tol: f64) -> UnbiasednessReport {
    let d = m.dim;
    let target = 1.0 / (d as f64).sqrt();
    let mut max_dev: f64 = 0.0;
    let mut offending = None;
    for x in 0..m.bases.len() {
        for y in (x + 1)..m.bases.len() {
            for a in 0..d {
                for b in 0..d {
                    let dot: C64 = (0..d)
                        .map(|l| m.bases[x].vectors[a][l].conj() * m.bases[y].vectors[b][l])
                        .sum();
                    let dev = (dot.norm() - target).abs();
                    if dev > max_dev {
                        max_dev = dev;
                        offending = Some((x, y, a, b));
                    }
                }
            }
        }
    }
    UnbiasednessReport {
        max_deviation: max_dev,
        offending_pair: if max_dev > tol { offending } else { None },
        pass: max_dev <= tol,
        tol,
    }
}

/// Rank-one projective measurement set from a subset of the bases.
pub fn to_measurements(m: &MubSet, subset: &[usize]) -> Result<MeasurementSet> {
    let mut seen = std::collections::HashSet::new();
    for &i in subset {
        if i >= m.bases.len() {
            return Err(Error::InvalidInput(format!("basis index {i} out of range")));
        }
        if !seen.insert(i) {
            return Err(Error::InvalidInput(format!("duplicate basis index {i}")));
        }
    }
    let d = m.dim;
    let mut operators = Vec::with_capacity(subset.len());
    let mut vectors = Vec::with_capacity(subset.len());
    for &x in subset {
        let ops: Vec<HermitianOperator> = m.bases[x]
            .vectors
            .iter()
            .map(|v| HermitianOperator::from_symmetric_parts(CMat::outer(v)))
            .collect();
        operators.push(ops);
        vectors.push(m.bases[x].vectors.clone());
    }
    let covariance = shift_covariance(m, subset);
    Ok(MeasurementSet {
        dim: d,
        operators,
        rank_one_projective: true,
        vectors: Some(vectors),
        covariance,
    })
}

/// Outcome-shift covariance for the standard constructions: the diagonal
/// unitary with entries w_p^{Tr(c l)} (odd) or i^{Tr(2 c l)} (even) maps
/// |phi_a^x> to |phi_{a+c}^x> and fixes the computational projectors.
fn shift_covariance(m: &MubSet, subset: &[usize]) -> Option<ShiftCovariance> {
    let d = m.dim;
    match &m.meta {
        ConstructionMeta::OddPrimePower { p, r, .. } => {
            let field = FiniteField::new(*p, *r).ok()?;
            let w = root_of_unity(*p);
            let shifts = field
                .elements()
                .map(|c| {
                    let diag: Vec<C64> = field
                        .elements()
                        .map(|l| w.powu(field.trace(field.mul(c, l)) as u32))
                        .collect();
                    let perms = subset
                        .iter()
                        .map(|&x| {
                            if x == d {
                                (0..d).collect() // computational basis: fixed
                            } else {
                                (0..d as u64)
                                    .map(|a| field.add(field.element(a), c).idx as usize)
                                    .collect()
                            }
                        })
                        .collect();
                    Shift { diag, perms }
                })
                .collect();
            Some(ShiftCovariance { shifts })
        }
        ConstructionMeta::EvenPrimePower { r, .. } => {
            let ring = GaloisRing::new(*r).ok()?;
            let teich = ring.teichmuller_elements();
            let pos_of = |idx: u64| teich.iter().position(|t| t.idx == idx).unwrap();
            let i_unit = C64::new(0.0, 1.0);
            let shifts = teich
                .iter()
                .map(|&c| {
                    let two_c = ring.double(c);
                    let diag: Vec<C64> = teich
                        .iter()
                        .map(|&l| i_unit.powu(ring.trace(ring.mul(two_c, l)) as u32))
                        .collect();
                    let perms = subset
                        .iter()
                        .map(|&x| {
                            if x == d {
                                (0..d).collect()
                            } else {
                                teich
                                    .iter()
                                    .map(|&a| {
                                        // outcome shift: 2a -> 2a + 2c, i.e. the
                                        // Teichmuller lift of a + c mod 2
                                        let (t, _) = ring.teichmuller_decompose(ring.add(a, c));
                                        pos_of(t.idx)
                                    })
                                    .collect()
                            }
                        })
                        .collect();
                    Shift { diag, perms }
                })
                .collect();
            Some(ShiftCovariance { shifts })
        }
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// JSON export / import
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct ComplexJson {
    re: f64,
    im: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MubSetJson {
    pub dim: usize,
    pub meta: ConstructionMeta,
    bases: Vec<Vec<Vec<ComplexJson>>>,
    labels: Vec<String>,
}

pub fn export_json(m: &MubSet) -> MubSetJson {
    MubSetJson {
        dim: m.dim,
        meta: m.meta.clone(),
        bases: m
            .bases
            .iter()
            .map(|b| {
                b.vectors
                    .iter()
                    .map(|v| v.iter().map(|z| ComplexJson { re: z.re, im: z.im }).collect())
                    .collect()
            })
            .collect(),
        labels: m.bases.iter().map(|b| b.label.clone()).collect(),
    }
}

/// Import validates orthonormality and pairwise unbiasedness on load.
pub fn import_json(j: MubSetJson) -> Result<MubSet> {
    let bases: Vec<Basis> = j
        .bases
        .into_iter()
        .zip(j.labels)
        .map(|(vs, label)| Basis {
            dim: j.dim,
            vectors: vs
                .into_iter()
                .map(|v| v.into_iter().map(|z| Complex64::new(z.re, z.im)).collect())
                .collect(),
            label,
        })
        .collect();
    let m = MubSet { dim: j.dim, bases, meta: j.meta };
    for b in &m.bases {
        if b.vectors.len() != m.dim || b.vectors.iter().any(|v| v.len() != m.dim) {
            return Err(Error::InvalidInput("basis shape mismatch".into()));
        }
        if b.gram_deviation() > 1e-10 {
            return Err(Error::InvalidInput(format!("basis '{}' not orthonormal", b.label)));
        }
    }
    let rep = verify_unbiased(&m, 1e-10);
    if !rep.pass {
        return Err(Error::InvalidInput(format!(
            "imported bases not mutually unbiased: max deviation {}",
            rep.max_deviation
        )));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::RingElement;
    use crate::linalg::is_psd;

    fn check_complete_set(d: u64) {
        let m = build_for_dim(d).unwrap();
        assert_eq!(m.bases.len() as u64, d + 1);
        for b in &m.bases {
            assert!(b.gram_deviation() <= 1e-10, "d={d} basis {} gram", b.label);
        }
        let rep = verify_unbiased(&m, 1e-10);
        assert!(rep.pass, "d={d}: max deviation {}", rep.max_deviation);
    }

    #[test]
    fn complete_sets_small() {
        for d in [2u64, 3, 4, 5, 7, 8, 9] {
            check_complete_set(d);
        }
    }

    #[test]
    fn complete_sets_up_to_32() {
        for d in [11u64, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32] {
            check_complete_set(d);
        }
    }

    #[test]
    fn even_d2_matches_pauli_overlaps() {
        let m = build_mub_even(1).unwrap();
        assert_eq!(m.bases.len(), 3);
        let rep = verify_unbiased(&m, 1e-12);
        assert!(rep.pass);
    }

    #[test]
    fn pauli_triple_is_mub() {
        let m = pauli_triple();
        let rep = verify_unbiased(&m, 1e-12);
        assert!(rep.pass);
        assert_eq!(m.bases[0].label, "computational");
        let ms = to_measurements(&m, &[0, 1, 2]).unwrap();
        assert!(ms.rank_one_projective);
        assert_eq!(ms.k(), 3);
        assert_eq!(ms.outcomes(0), 2);
    }

    #[test]
    fn identical_bases_fail_unbiasedness() {
        let d = 3;
        let m = MubSet {
            dim: d,
            bases: vec![Basis::computational(d), Basis::computational(d)],
            meta: ConstructionMeta::Imported,
        };
        let rep = verify_unbiased(&m, 1e-10);
        assert!(!rep.pass);
        // orthogonal pairs deviate by the full 1/sqrt(d)
        let expected = 1.0 / (d as f64).sqrt();
        assert!((rep.max_deviation - expected).abs() < 1e-12);
    }

    #[test]
    fn tensor_triple_d6() {
        let m = build_mub_tensor_triple(2, 3).unwrap();
        assert_eq!(m.dim, 6);
        assert_eq!(m.bases.len(), 3);
        for b in &m.bases {
            assert!(b.gram_deviation() <= 1e-10);
        }
        assert!(verify_unbiased(&m, 1e-10).pass);
    }

    #[test]
    fn measurements_are_povms_of_projectors() {
        let m = build_for_dim(3).unwrap();
        let ms = to_measurements(&m, &[0, 1, 2, 3]).unwrap();
        assert!(ms.completeness_deviation() <= 1e-10);
        for ops in &ms.operators {
            for op in ops {
                assert!(is_psd(op, 1e-9).unwrap());
                assert!((op.trace_re() - 1.0).abs() < 1e-10);
                // idempotent
                let sq = op.matrix().matmul(op.matrix());
                assert!(sq.sub(op.matrix()).max_abs() < 1e-10);
            }
        }
        // pairwise orthogonal within a basis
        for ops in &ms.operators {
            for (a, opa) in ops.iter().enumerate() {
                for opb in ops.iter().skip(a + 1) {
                    assert!(opa.matrix().matmul(opb.matrix()).max_abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn to_measurements_rejects_bad_subsets() {
        let m = build_for_dim(3).unwrap();
        assert!(to_measurements(&m, &[0, 0]).is_err());
        assert!(to_measurements(&m, &[4]).is_err());
    }

    #[test]
    fn shift_covariance_exact_all_dims() {
        // The relabeling unitaries are checked entrywise at every dimension
        // where the reduction may later be used.
        for d in [2u64, 3, 4, 5, 7, 8, 9, 11, 13, 16] {
            let m = build_for_dim(d).unwrap();
            let subset: Vec<usize> = (0..=d as usize).collect();
            let ms = to_measurements(&m, &subset).unwrap();
            assert!(ms.covariance.is_some());
            let dev = ms.covariance_deviation();
            assert!(dev <= 1e-10, "d={d}: covariance deviation {dev}");
        }
    }

    #[test]
    fn odd_scalar_product_closed_form() {
        // <phi^alpha_li | phi^x_j><phi^x_j | phi^alpha_lj> equals the
        // quadratic-Gauss-sum closed form for x != alpha.
        for (p, r) in [(3u64, 1u32), (5, 1), (3, 2)] {
            let field = FiniteField::new(p, r).unwrap();
            let d = field.order() as usize;
            let m = build_mub_odd(p, r).unwrap();
            let w = root_of_unity(p);
            let inv2 = field.inv(field.from_int(2));
            let inv4 = field.mul(inv2, inv2);
            for xi in 0..d as u64 {
                for alpha in 0..d as u64 {
                    if xi == alpha {
                        continue;
                    }
                    let (x_el, a_el) = (field.element(xi), field.element(alpha));
                    let mu = field.mul(inv4, field.inv(field.sub(x_el, a_el)));
                    for j in [0u64, 1, (d as u64) - 1] {
                        for li in [0u64, 1, (d as u64) / 2] {
                            for lj in [0u64, (d as u64) - 1] {
                                let (je, lie, lje) =
                                    (field.element(j), field.element(li), field.element(lj));
                                // direct inner products
                                let bra = &m.bases[alpha as usize].vectors[li as usize];
                                let mid = &m.bases[xi as usize].vectors[j as usize];
                                let ket = &m.bases[alpha as usize].vectors[lj as usize];
                                let dot1: C64 =
                                    (0..d).map(|l| bra[l].conj() * mid[l]).sum();
                                let dot2: C64 =
                                    (0..d).map(|l| mid[l].conj() * ket[l]).sum();
                                let direct = dot1 * dot2;
                                // closed form
                                let li2 = field.mul(lie, lie);
                                let lj2 = field.mul(lje, lje);
                                let diff2 = field.sub(li2, lj2);
                                let diff = field.sub(lie, lje);
                                let arg = field.mul(
                                    mu,
                                    field.add(
                                        field.neg(diff2),
                                        field.mul(field.from_int(2), field.mul(je, diff)),
                                    ),
                                );
                                let closed = w.powu(field.trace(arg) as u32) / d as f64;
                                assert!(
                                    (direct - closed).norm() < 1e-10,
                                    "p={p} r={r} x={xi} alpha={alpha}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn even_scalar_product_closed_form() {
        for r in 1..=3u32 {
            let ring = GaloisRing::new(r).unwrap();
            let teich = ring.teichmuller_elements();
            let d = teich.len();
            let m = build_mub_even(r).unwrap();
            let i_unit = C64::new(0.0, 1.0);
            for (pxi, &xi) in teich.iter().enumerate() {
                for (palpha, &alpha) in teich.iter().enumerate() {
                    if xi == alpha {
                        continue;
                    }
                    let (t, _u) = ring.teichmuller_decompose(ring.sub(xi, alpha));
                    assert_ne!(t.idx, 0);
                    let t_inv = ring.inv(t);
                    let t_inv2 = ring.mul(t_inv, t_inv);
                    for (pj, &j) in teich.iter().enumerate() {
                        for (pli, &li) in teich.iter().enumerate() {
                            for (plj, &lj) in teich.iter().enumerate() {
                                let bra = &m.bases[palpha].vectors[pli];
                                let mid = &m.bases[pxi].vectors[pj];
                                let ket = &m.bases[palpha].vectors[plj];
                                let dot1: C64 = (0..d).map(|l| bra[l].conj() * mid[l]).sum();
                                let dot2: C64 = (0..d).map(|l| mid[l].conj() * ket[l]).sum();
                                let direct = dot1 * dot2;
                                let coeff = ring.add(ring.sub(xi, alpha), ring.double(j));
                                let arg = ring.mul(t_inv2, ring.mul(coeff, ring.sub(lj, li)));
                                let closed =
                                    i_unit.powu(ring.trace(arg) as u32) / d as f64;
                                assert!(
                                    (direct - closed).norm() < 1e-10,
                                    "r={r} x={} alpha={} j={} li={} lj={}",
                                    xi.idx, alpha.idx, j.idx, li.idx, lj.idx
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let m = build_for_dim(9).unwrap();
        let json = serde_json::to_string(&export_json(&m)).unwrap();
        let back: MubSetJson = serde_json::from_str(&json).unwrap();
        let m2 = import_json(back).unwrap();
        assert_eq!(m2.dim, 9);
        assert_eq!(m2.bases.len(), 10);
        for (b1, b2) in m.bases.iter().zip(&m2.bases) {
            for (v1, v2) in b1.vectors.iter().zip(&b2.vectors) {
                for (z1, z2) in v1.iter().zip(v2) {
                    assert!((z1 - z2).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn import_rejects_biased_bases() {
        let m = build_for_dim(3).unwrap();
        let mut j = export_json(&m);
        // corrupt one vector
        j.bases[0][0][0].re += 0.1;
        assert!(import_json(j).is_err());
    }

    // keep RingElement imported for the even closed-form test signature
    #[allow(dead_code)]
    fn _touch(_: RingElement) {}
}
