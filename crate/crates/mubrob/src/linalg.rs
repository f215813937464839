//! Dense complex matrices, Hermitian eigendecomposition and polynomial roots.
//!
//! Everything here targets the small dimensions (d <= 32) used by the MUB
//! robustness computations. The eigensolver is a cyclic Jacobi iteration for
//! complex Hermitian matrices: unconditionally stable and deterministic,
//! which matters because degenerate eigenspaces are consumed downstream.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub dim: usize,
    pub data: Vec<C64>,
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        CMat { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = C64::new(e, 0.0);
        }
        m
    }

    /// Rank-one projector |v><v| (v need not be normalized; it is not rescaled).
    pub fn outer(v: &[C64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        Self::from_fn(d, |i, j| self[(j, i)].conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut m = self.clone();
        for (a, b) in m.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        m
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut m = self.clone();
        for (a, b) in m.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = self.clone();
        for a in m.data.iter_mut() {
            *a *= s;
        }
        m
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn add_assign_scaled(&mut self, other: &Self, s: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut m = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let aik = self[(i, k)];
                if aik == ZERO {
                    continue;
                }
                for j in 0..d {
                    m.data[i * d + j] += aik * other.data[k * d + j];
                }
            }
        }
        m
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        let d = self.dim;
        let mut out = vec![ZERO; d];
        for i in 0..d {
            let mut acc = ZERO;
            for j in 0..d {
                acc += self.data[i * d + j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// tr(A B), no intermediate product.
    pub fn trace_prod(&self, other: &Self) -> C64 {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut acc = ZERO;
        for i in 0..d {
            for j in 0..d {
                acc += self.data[i * d + j] * other.data[j * d + i];
            }
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Kronecker product, used by the composite-dimension MUB triple.
    pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
        let mut out = Vec::with_capacity(a.len() * b.len());
        for &x in a {
            for &y in b {
                out.push(x * y);
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Hermitian operator, stored symmetrized as (M + M^dag)/2.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    mat: CMat,
}

pub const HERMITICITY_TOL: f64 = 1e-10;

impl HermitianOperator {
    /// Checks ||M - M^dag||_max <= tol and stores the symmetrized matrix.
    pub fn new(m: CMat) -> Result<Self> {
        Self::with_tol(m, HERMITICITY_TOL)
    }

    pub fn with_tol(m: CMat, tol: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::Numerical("non-finite matrix entries".into()));
        }
        let adj = m.adjoint();
        let dev = m.sub(&adj).max_abs();
        if dev > tol {
            return Err(Error::NotHermitian { dev, tol });
        }
        Ok(Self { mat: m.add(&adj).scale_re(0.5) })
    }

    /// For matrices Hermitian by construction (sums of projectors etc.).
    pub fn from_symmetric_parts(m: CMat) -> Self {
        let adj = m.adjoint();
        Self { mat: m.add(&adj).scale_re(0.5) }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn trace_re(&self) -> f64 {
        self.mat.trace().re
    }
}

/// Full spectral decomposition; eigenvalues ascending, eigenvector columns
/// orthonormal.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// Column i is the eigenvector of eigenvalues[i].
    pub eigenvectors: CMat,
}

impl EigenSystem {
    pub fn eigenvector(&self, i: usize) -> Vec<C64> {
        let d = self.eigenvectors.dim;
        (0..d).map(|r| self.eigenvectors[(r, i)]).collect()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigendecomposition of a complex Hermitian matrix.
///
/// Deterministic: fixed sweep order, ascending eigenvalue sort stable in the
/// pre-sort (Jacobi) order, and each eigenvector's phase is fixed by making
/// its largest-magnitude component real positive.
pub fn eigh(m: &HermitianOperator) -> Result<EigenSystem> {
    eigh_mat(m.matrix())
}

/// As [`eigh`] but on a raw matrix assumed Hermitian (upper triangle used).
pub fn eigh_mat(mat: &CMat) -> Result<EigenSystem> {
    let d = mat.dim;
    let mut a = mat.clone();
    let mut v = CMat::identity(d);
    let norm = a.frobenius().max(f64::MIN_POSITIVE);
    let thresh = 1e-13 * norm;

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..d {
            for q in (p + 1)..d {
                off += a[(p, q)].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= thresh {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[(p, q)];
                let abs = apq.norm();
                if abs <= thresh / (d as f64) {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / abs; // e^{i phi}
                // tan(2 theta) = 2|apq| / (app - aqq), stable small-angle root
                let tau = (app - aqq) / (2.0 * abs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = phase * (t * c); // complex sine
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }
    if !converged {
        // final check after the last sweep
        let mut off = 0.0;
        for p in 0..d {
            for q in (p + 1)..d {
                off += a[(p, q)].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() > thresh.max(1e-11 * norm) {
            return Err(Error::EighNoConvergence(JACOBI_MAX_SWEEPS));
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    let diag: Vec<f64> = (0..d).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap().then(i.cmp(&j)));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut eigenvectors = CMat::zeros(d);
    for (col, &src) in order.iter().enumerate() {
        // deterministic phase: largest component real positive
        let mut best = 0usize;
        let mut best_mag = -1.0;
        for r in 0..d {
            let mag = v[(r, src)].norm();
            if mag > best_mag + 1e-14 {
                best_mag = mag;
                best = r;
            }
        }
        let pivot = v[(best, src)];
        let ph = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { ONE };
        for r in 0..d {
            eigenvectors[(r, col)] = v[(r, src)] * ph;
        }
    }
    Ok(EigenSystem { eigenvalues, eigenvectors })
}

/// Apply the (p,q) Jacobi rotation U = [[c, -s],[s*, c]] as A <- U^dag A U,
/// V <- V U.
fn rotate(a: &mut CMat, v: &mut CMat, p: usize, q: usize, c: f64, s: C64) {
    let d = a.dim;
    // columns: col_p <- c*col_p + s* * col_q ; col_q <- -s*col_p + c*col_q
    for i in 0..d {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip * c + aiq * s.conj();
        a[(i, q)] = aiq * c - aip * s;
    }
    // rows (U^dag from the left)
    for j in 0..d {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = apj * c + aqj * s;
        a[(q, j)] = aqj * c - apj * s.conj();
    }
    for i in 0..d {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * c + viq * s.conj();
        v[(i, q)] = viq * c - vip * s;
    }
}

/// Operator norm: largest eigenvalue magnitude.
pub fn op_norm(m: &HermitianOperator) -> Result<f64> {
    let es = eigh(m)?;
    Ok(es.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max))
}

/// Orthogonal projector onto the span of eigenvectors with eigenvalue
/// >= lambda_max - cluster_tol.
pub fn max_eigenspace_projector(m: &HermitianOperator, cluster_tol: f64) -> Result<HermitianOperator> {
    let es = eigh(m)?;
    Ok(projector_from_eigensystem(&es, cluster_tol))
}

pub fn projector_from_eigensystem(es: &EigenSystem, cluster_tol: f64) -> HermitianOperator {
    let d = es.eigenvectors.dim;
    let lmax = es.max_eigenvalue();
    let mut p = CMat::zeros(d);
    for i in 0..d {
        if es.eigenvalues[i] >= lmax - cluster_tol {
            let v = es.eigenvector(i);
            p = p.add(&CMat::outer(&v));
        }
    }
    HermitianOperator::from_symmetric_parts(p)
}

pub const PSD_TOL: f64 = 1e-9;

/// PSD iff minimum eigenvalue >= -tol.
pub fn is_psd(m: &HermitianOperator, tol: f64) -> Result<bool> {
    let es = eigh(m)?;
    Ok(es.min_eigenvalue() >= -tol)
}

/// Cholesky factor L (lower triangular, M = L L^dag) of a Hermitian
/// positive-definite matrix; None when M is not PD.
pub fn cholesky(m: &CMat) -> Option<CMat> {
    let n = m.dim;
    let mut l = CMat::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = m[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)].conj();
            }
            if i == j {
                if sum.re <= 0.0 || !sum.re.is_finite() {
                    return None;
                }
                l[(i, i)] = C64::new(sum.re.sqrt(), 0.0);
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Some(l)
}

/// Inverse of M = L L^dag given its Cholesky factor.
pub fn cholesky_inverse(l: &CMat) -> CMat {
    let n = l.dim;
    // forward-substitute columns of the identity: L W = I, then L^dag Z = W
    let mut inv = CMat::zeros(n);
    for col in 0..n {
        let mut w = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut s = if i == col { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            for k in 0..i {
                s -= l[(i, k)] * w[k];
            }
            w[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = w[i];
            for k in (i + 1)..n {
                s -= l[(k, i)].conj() * w[k];
            }
            w[i] = s / l[(i, i)];
        }
        for i in 0..n {
            inv[(i, col)] = w[i];
        }
    }
    // clean up rounding asymmetry
    let adj = inv.adjoint();
    inv.add(&adj).scale_re(0.5)
}

/// exp(2 pi i / p).
pub fn root_of_unity(p: u64) -> C64 {
    assert!(p >= 2);
    let theta = 2.0 * PI / (p as f64);
    C64::new(theta.cos(), theta.sin())
}

/// All real roots of a real polynomial c[0] + c[1] X + ... + c[n] X^n,
/// ascending, multiple roots reported once. Degree <= 6 use cases.
///
/// Roots are isolated on the monotonic intervals delimited by the critical
/// points (real roots of the derivative, found recursively), bisected to a
/// tight bracket and polished by Newton steps.
pub fn real_poly_roots(coeffs: &[f64]) -> Result<Vec<f64>> {
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.last().is_some_and(|&x| x == 0.0) {
        c.pop();
    }
    if c.is_empty() {
        return Err(Error::DegeneratePolynomial);
    }
    let scale = c.iter().map(|x| x.abs()).fold(0.0, f64::max);
    for x in c.iter_mut() {
        *x /= scale;
    }
    Ok(real_roots_normalized(&c))
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

fn poly_deriv(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(i, &ci)| ci * i as f64).collect()
}

fn real_roots_normalized(c: &[f64]) -> Vec<f64> {
    let deg = c.len() - 1;
    if deg == 0 {
        return vec![];
    }
    if deg == 1 {
        return vec![-c[0] / c[1]];
    }
    let lead = c[deg];
    // Cauchy bound on root magnitude
    let bound = 1.0 + c[..deg].iter().map(|x| (x / lead).abs()).fold(0.0, f64::max);
    let crit = real_roots_normalized(&poly_deriv(c));
    let mut nodes = vec![-bound];
    nodes.extend(crit.iter().copied().filter(|x| x.abs() < bound));
    nodes.push(bound);
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let val_tol = 1e-11 * (1.0 + bound).powi(deg as i32);
    let mut roots = Vec::new();
    for w in nodes.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (flo, fhi) = (poly_eval(c, lo), poly_eval(c, hi));
        if flo == 0.0 {
            roots.push(lo);
        }
        if flo * fhi < 0.0 {
            roots.push(polish(c, bisect(c, lo, hi)));
        } else if fhi.abs() <= val_tol {
            // touching root at an interior critical point
            roots.push(hi);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + bound));
    roots
}

fn bisect(c: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = poly_eval(c, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fmid = poly_eval(c, mid);
        if fmid == 0.0 || (hi - lo) < 1e-15 * (1.0 + mid.abs()) {
            return mid;
        }
        if flo * fmid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    0.5 * (lo + hi)
}

fn polish(c: &[f64], mut x: f64) -> f64 {
    let dc = poly_deriv(c);
    for _ in 0..8 {
        let f = poly_eval(c, x);
        let df = poly_eval(&dc, x);
        if df.abs() < 1e-300 {
            break;
        }
        let step = f / df;
        x -= step;
        if step.abs() <= 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(d: usize, rng: &mut impl Rng) -> HermitianOperator {
        let m = CMat::from_fn(d, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        HermitianOperator::from_symmetric_parts(m)
    }

    #[test]
    fn eigh_identity() {
        let es = eigh(&HermitianOperator::new(CMat::identity(4)).unwrap()).unwrap();
        for l in es.eigenvalues {
            assert!((l - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eigh_diagonal() {
        let es = eigh(&HermitianOperator::new(CMat::diag(&[0.3, 0.7])).unwrap()).unwrap();
        assert!((es.eigenvalues[0] - 0.3).abs() < 1e-14);
        assert!((es.eigenvalues[1] - 0.7).abs() < 1e-14);
        assert!((es.eigenvector(0)[0].norm() - 1.0).abs() < 1e-12);
        assert!((es.eigenvector(1)[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigh_plus_projector() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = [C64::new(s, 0.0), C64::new(s, 0.0)];
        let p = HermitianOperator::new(CMat::outer(&v)).unwrap();
        let es = eigh(&p).unwrap();
        assert!(es.eigenvalues[0].abs() < 1e-12);
        assert!((es.eigenvalues[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigh_reconstruction_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &d in &[2usize, 3, 5, 8, 13, 32] {
            let m = random_hermitian(d, &mut rng);
            let es = eigh(&m).unwrap();
            // V diag(l) V^dag == M
            let mut rec = CMat::zeros(d);
            for i in 0..d {
                rec.add_assign_scaled(&CMat::outer(&es.eigenvector(i)), es.eigenvalues[i]);
            }
            let err = rec.sub(m.matrix()).frobenius() / m.matrix().frobenius();
            assert!(err < 1e-9, "d={d} err={err}");
            // residual per pair
            for i in 0..d {
                let v = es.eigenvector(i);
                let mv = m.matrix().matvec(&v);
                let res: f64 = mv
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b * es.eigenvalues[i]).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(res <= 1e-9 * m.matrix().max_abs().max(1.0));
            }
            // orthonormality
            for i in 0..d {
                for j in 0..d {
                    let dot: C64 = (0..d)
                        .map(|r| es.eigenvectors[(r, i)].conj() * es.eigenvectors[(r, j)])
                        .sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - expect).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn op_norm_two_projector_sum() {
        // |0><0| + |+><+| has top eigenvalue 1 + 1/sqrt(2)
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p0 = CMat::outer(&[ONE, ZERO]);
        let pp = CMat::outer(&[C64::new(s, 0.0), C64::new(s, 0.0)]);
        let m = HermitianOperator::new(p0.add(&pp)).unwrap();
        assert!((op_norm(&m).unwrap() - (1.0 + s)).abs() < 1e-12);
    }

    #[test]
    fn op_norm_orthogonal_projectors() {
        let m = HermitianOperator::new(CMat::diag(&[1.0, 1.0, 0.0])).unwrap();
        assert!((op_norm(&m).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn op_norm_triangle_inequality_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let d = 4;
            let a0 = random_hermitian(d, &mut rng);
            let b0 = random_hermitian(d, &mut rng);
            // square to make PSD
            let a = HermitianOperator::from_symmetric_parts(a0.matrix().matmul(a0.matrix()));
            let b = HermitianOperator::from_symmetric_parts(b0.matrix().matmul(b0.matrix()));
            let ab = HermitianOperator::from_symmetric_parts(a.matrix().add(b.matrix()));
            assert!(op_norm(&ab).unwrap() <= op_norm(&a).unwrap() + op_norm(&b).unwrap() + 1e-10);
        }
    }

    #[test]
    fn max_eigenspace_projector_cases() {
        let id = HermitianOperator::new(CMat::identity(3)).unwrap();
        let p = max_eigenspace_projector(&id, 1e-8).unwrap();
        assert!(p.matrix().sub(&CMat::identity(3)).max_abs() < 1e-12);

        let m = HermitianOperator::new(CMat::diag(&[1.0, 2.0, 2.0])).unwrap();
        let p = max_eigenspace_projector(&m, 1e-8).unwrap();
        assert!(p.matrix().sub(&CMat::diag(&[0.0, 1.0, 1.0])).max_abs() < 1e-12);

        let m = HermitianOperator::new(CMat::diag(&[1.0, 2.0 - 1e-12, 2.0])).unwrap();
        let p = max_eigenspace_projector(&m, 1e-8).unwrap();
        assert!((p.trace_re() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn projector_properties_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let m = random_hermitian(6, &mut rng);
            let p = max_eigenspace_projector(&m, 1e-8).unwrap();
            let pm = p.matrix();
            assert!(pm.matmul(pm).sub(pm).max_abs() < 1e-9);
            assert!(pm.sub(&pm.adjoint()).max_abs() < 1e-10);
            let comm = m.matrix().matmul(pm).sub(&pm.matmul(m.matrix()));
            assert!(comm.max_abs() < 1e-9);
        }
    }

    #[test]
    fn is_psd_cases() {
        let id = HermitianOperator::new(CMat::identity(2)).unwrap();
        assert!(is_psd(&id, PSD_TOL).unwrap());
        let m = HermitianOperator::new(CMat::diag(&[1.0, -1e-6])).unwrap();
        assert!(!is_psd(&m, 1e-9).unwrap());
        let m = HermitianOperator::new(CMat::diag(&[1.0, -1e-12])).unwrap();
        assert!(is_psd(&m, 1e-9).unwrap());
    }

    #[test]
    fn roots_of_unity() {
        assert!((root_of_unity(2) - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((root_of_unity(4) - C64::new(0.0, 1.0)).norm() < 1e-15);
        let w3 = root_of_unity(3);
        assert!((w3.re + 0.5).abs() < 1e-15);
        assert!((w3.im - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn roots_quadratic() {
        let r = real_poly_roots(&[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0] + 1.0).abs() < 1e-12 && (r[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn roots_appendix_cubic() {
        // 56 X^3 - 28 X^2 + 1
        let r = real_poly_roots(&[1.0, 0.0, -28.0, 56.0]).unwrap();
        let largest = *r.last().unwrap();
        assert!((largest - 0.3685).abs() < 5e-4);
        assert!(poly_eval(&[1.0, 0.0, -28.0, 56.0], largest).abs() < 1e-9);
    }

    #[test]
    fn roots_quartic_multiplicity() {
        // (X-2)^4 = X^4 - 8X^3 + 24X^2 - 32X + 16
        let r = real_poly_roots(&[16.0, -32.0, 24.0, -8.0, 1.0]).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn roots_degenerate() {
        assert!(real_poly_roots(&[0.0, 0.0]).is_err());
    }
}
