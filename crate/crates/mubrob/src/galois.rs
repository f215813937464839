//! Exact arithmetic in finite fields GF(p^r) and Galois rings GR(4,r).
//!
//! Elements are dense coefficient vectors over Z_p (resp. Z_4) reduced
//! against a deterministic modulus: the lexicographically smallest monic
//! irreducible polynomial (coefficients compared low-degree-first) for the
//! field, and its Hensel lift dividing X^(2^r - 1) - 1 for the ring.
//! Sizes are capped at p^r <= 64, so everything is done exhaustively.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default size budget for |field| = p^r and |residue field| = 2^r.
pub const SIZE_BUDGET: u64 = 64;

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= p {
        if p % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// p^r = d decomposition; None if d is not a prime power.
pub fn prime_power(d: u64) -> Option<(u64, u32)> {
    if d < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= d {
        if d % p == 0 {
            let mut m = d;
            let mut r = 0;
            while m % p == 0 {
                m /= p;
                r += 1;
            }
            return if m == 1 { Some((p, r)) } else { None };
        }
        p += 1;
    }
    Some((d, 1))
}

// ---------------------------------------------------------------------------
// polynomial helpers over Z_m (m = p or 4), coefficients low-degree-first
// ---------------------------------------------------------------------------

fn poly_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_mul(a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + ai * bj) % m;
        }
    }
    poly_trim(&mut out);
    out
}

fn poly_add(a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0);
        out[i] = x % m;
    }
    poly_trim(&mut out);
    out
}

fn poly_sub(a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0) + m - b.get(i).copied().unwrap_or(0) % m;
        out[i] = x % m;
    }
    poly_trim(&mut out);
    out
}

/// Remainder of a modulo monic b (leading coefficient of b must be a unit).
fn poly_rem(a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let db = b.len() - 1;
    let lead = b[db];
    // inverse of lead mod m (lead is 1 everywhere we call this, but be safe)
    let lead_inv = (1..m).find(|&x| (x * lead) % m == 1).expect("unit leading coefficient");
    while r.len() > db {
        let k = r.len() - 1 - db;
        let f = (r[r.len() - 1] * lead_inv) % m;
        if f != 0 {
            for i in 0..=db {
                let idx = k + i;
                r[idx] = (r[idx] + m * m - f * b[i] % m) % m;
            }
        }
        r.pop();
        poly_trim(&mut r);
        if r.len() <= db {
            break;
        }
    }
    r
}

/// Quotient of a by monic b over Z_m.
fn poly_div_exact(a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let db = b.len() - 1;
    let mut q = vec![0u64; r.len().saturating_sub(db)];
    while r.len() > db {
        let k = r.len() - 1 - db;
        let f = r[r.len() - 1] % m;
        q[k] = f;
        for i in 0..=db {
            let idx = k + i;
            r[idx] = (r[idx] + m * m - f * b[i] % m) % m;
        }
        poly_trim(&mut r);
        if r.iter().all(|&x| x == 0) {
            break;
        }
    }
    q
}

// ---------------------------------------------------------------------------
// finite field GF(p^r)
// ---------------------------------------------------------------------------

/// The field GF(p^r) with a deterministic modulus polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteField {
    pub p: u64,
    pub r: u32,
    /// Monic degree-r modulus, low-degree-first, length r+1.
    pub modulus: Vec<u64>,
}

/// Element of GF(p^r): length-r coefficient vector over Z_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    /// Index in the fixed lexicographic enumeration: sum coeff[i] * p^i.
    pub idx: u64,
}

impl FiniteField {
    /// Deterministic construction: lexicographically smallest monic
    /// irreducible degree-r polynomial over Z_p.
    pub fn new(p: u64, r: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let d = p.checked_pow(r).filter(|&d| d <= SIZE_BUDGET && r >= 1);
        let Some(_) = d else {
            return Err(Error::BudgetExceeded(format!("p^r = {p}^{r} exceeds {SIZE_BUDGET}")));
        };
        let modulus = smallest_irreducible(p, r);
        Ok(FiniteField { p, r, modulus })
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.r)
    }

    pub fn element(&self, idx: u64) -> FieldElement {
        debug_assert!(idx < self.order());
        FieldElement { idx }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.order()).map(|idx| FieldElement { idx })
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { idx: 0 }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement { idx: 1 }
    }

    pub fn coeffs(&self, a: FieldElement) -> Vec<u64> {
        let mut v = Vec::with_capacity(self.r as usize);
        let mut x = a.idx;
        for _ in 0..self.r {
            v.push(x % self.p);
            x /= self.p;
        }
        v
    }

    fn from_coeffs(&self, c: &[u64]) -> FieldElement {
        let mut idx = 0;
        for i in (0..self.r as usize).rev() {
            idx = idx * self.p + c.get(i).copied().unwrap_or(0) % self.p;
        }
        FieldElement { idx }
    }

    /// Embed an integer via the prime subfield.
    pub fn from_int(&self, n: u64) -> FieldElement {
        FieldElement { idx: n % self.p }
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let (ca, cb) = (self.coeffs(a), self.coeffs(b));
        self.from_coeffs(&poly_add(&ca, &cb, self.p))
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let (ca, cb) = (self.coeffs(a), self.coeffs(b));
        self.from_coeffs(&poly_sub(&ca, &cb, self.p))
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        self.sub(self.zero(), a)
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let prod = poly_mul(&self.coeffs(a), &self.coeffs(b), self.p);
        self.from_coeffs(&poly_rem(&prod, &self.modulus, self.p))
    }

    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse of a nonzero element.
    pub fn inv(&self, a: FieldElement) -> FieldElement {
        assert!(a.idx != 0, "zero has no inverse");
        self.pow(a, self.order() - 2)
    }

    /// Field trace Tr(a) = sum_{i<r} a^(p^i), as an integer in {0,..,p-1}.
    pub fn trace(&self, a: FieldElement) -> u64 {
        let mut acc = self.zero();
        let mut x = a;
        for _ in 0..self.r {
            acc = self.add(acc, x);
            x = self.pow(x, self.p);
        }
        debug_assert!(acc.idx < self.p, "trace must lie in the prime subfield");
        acc.idx
    }
}

/// Lexicographically smallest (low-degree-first) monic irreducible degree-r
/// polynomial over Z_p, via trial division by all monic polynomials of
/// degree <= r/2.
fn smallest_irreducible(p: u64, r: u32) -> Vec<u64> {
    let r = r as usize;
    let count = p.pow(r as u32);
    for low in 0..count {
        let mut poly: Vec<u64> = Vec::with_capacity(r + 1);
        let mut x = low;
        for _ in 0..r {
            poly.push(x % p);
            x /= p;
        }
        poly.push(1); // monic
        if is_irreducible(&poly, p) {
            return poly;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over Z_p")
}

fn is_irreducible(poly: &[u64], p: u64) -> bool {
    let r = poly.len() - 1;
    if r == 1 {
        return true;
    }
    if poly[0] == 0 {
        return false; // divisible by X
    }
    // trial division by all monic divisors of degree 1..=r/2
    for deg in 1..=(r / 2) {
        let count = p.pow(deg as u32);
        for low in 0..count {
            let mut div: Vec<u64> = Vec::with_capacity(deg + 1);
            let mut x = low;
            for _ in 0..deg {
                div.push(x % p);
                x /= p;
            }
            div.push(1);
            if poly_rem(poly, &div, p).is_empty() {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Galois ring GR(4, r)
// ---------------------------------------------------------------------------

/// The Galois ring GR(4,r) = Z_4[X]/(h), with h the Hensel lift of the GF(2^r)
/// modulus chosen so that the class of X has multiplicative order 2^r - 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaloisRing {
    pub r: u32,
    /// Monic degree-r modulus over Z_4, low-degree-first.
    pub modulus: Vec<u64>,
    /// Teichmuller set T_r = {0} cup {g^i}, as element indices, sorted by the
    /// fixed enumeration order (base-4 coefficient vectors).
    pub teichmuller: Vec<u64>,
    /// teich_of_residue[m] = the Teichmuller element congruent to m mod 2,
    /// where m is the base-2 index of the residue.
    teich_of_residue: Vec<u64>,
}

/// Element of GR(4,r): length-r coefficient vector over Z_4, stored as the
/// base-4 index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RingElement {
    pub idx: u64,
}

impl GaloisRing {
    pub fn new(r: u32) -> Result<Self> {
        if r < 1 || 2u64.pow(r) > SIZE_BUDGET {
            return Err(Error::BudgetExceeded(format!("2^{r} exceeds {SIZE_BUDGET}")));
        }
        let f2 = FiniteField::new(2, r)?;
        let modulus = hensel_lift(&f2.modulus, r);
        let mut ring = GaloisRing { r, modulus, teichmuller: vec![], teich_of_residue: vec![] };

        // Teichmuller set: {0} together with the powers of g, a root of the
        // modulus of multiplicative order 2^r - 1. For r >= 2 the class of X
        // has exactly that order by the Hensel-lift construction; for r = 1
        // the order is 1 and g = 1.
        let n = 2u64.pow(r) - 1;
        let g = if r == 1 { ring.one() } else { ring.from_coeffs(&[0, 1]) };
        let mut teich = vec![0u64];
        let mut x = ring.one();
        for _ in 0..n {
            if !teich.contains(&x.idx) {
                teich.push(x.idx);
            }
            x = ring.mul(x, g);
        }
        assert_eq!(teich.len() as u64, 2u64.pow(r), "Teichmuller set has 2^r elements");
        teich.sort_unstable();
        ring.teichmuller = teich;

        let mut map = vec![u64::MAX; 1 << r];
        for &t in &ring.teichmuller {
            let res = ring.residue_index(RingElement { idx: t });
            map[res as usize] = t;
        }
        assert!(map.iter().all(|&t| t != u64::MAX), "Teichmuller set covers all residues");
        ring.teich_of_residue = map;
        Ok(ring)
    }

    /// Number of ring elements, 4^r.
    pub fn order(&self) -> u64 {
        4u64.pow(self.r)
    }

    pub fn element(&self, idx: u64) -> RingElement {
        debug_assert!(idx < self.order());
        RingElement { idx }
    }

    pub fn elements(&self) -> impl Iterator<Item = RingElement> {
        (0..self.order()).map(|idx| RingElement { idx })
    }

    pub fn zero(&self) -> RingElement {
        RingElement { idx: 0 }
    }

    pub fn one(&self) -> RingElement {
        RingElement { idx: 1 }
    }

    pub fn coeffs(&self, a: RingElement) -> Vec<u64> {
        let mut v = Vec::with_capacity(self.r as usize);
        let mut x = a.idx;
        for _ in 0..self.r {
            v.push(x & 3);
            x >>= 2;
        }
        v
    }

    fn from_coeffs(&self, c: &[u64]) -> RingElement {
        let mut idx = 0;
        for i in (0..self.r as usize).rev() {
            idx = (idx << 2) | (c.get(i).copied().unwrap_or(0) & 3);
        }
        RingElement { idx }
    }

    /// Base-2 index of the mod-2 reduction.
    fn residue_index(&self, a: RingElement) -> u64 {
        let c = self.coeffs(a);
        let mut idx = 0;
        for i in (0..self.r as usize).rev() {
            idx = (idx << 1) | (c[i] & 1);
        }
        idx
    }

    pub fn add(&self, a: RingElement, b: RingElement) -> RingElement {
        self.from_coeffs(&poly_add(&self.coeffs(a), &self.coeffs(b), 4))
    }

    pub fn sub(&self, a: RingElement, b: RingElement) -> RingElement {
        self.from_coeffs(&poly_sub(&self.coeffs(a), &self.coeffs(b), 4))
    }

    pub fn mul(&self, a: RingElement, b: RingElement) -> RingElement {
        let prod = poly_mul(&self.coeffs(a), &self.coeffs(b), 4);
        self.from_coeffs(&poly_rem(&prod, &self.modulus, 4))
    }

    /// Multiply by the integer 2, i.e. a + a.
    pub fn double(&self, a: RingElement) -> RingElement {
        self.add(a, a)
    }

    /// Unique 2-adic decomposition a = t + 2u with t, u in T_r.
    pub fn teichmuller_decompose(&self, a: RingElement) -> (RingElement, RingElement) {
        let t = RingElement { idx: self.teich_of_residue[self.residue_index(a) as usize] };
        // a - t = 2v; u is the Teichmuller lift of v mod 2. Halving 2v:
        // every coefficient of a - t is even.
        let diff = self.sub(a, t);
        let halves: Vec<u64> = self.coeffs(diff).iter().map(|&c| {
            debug_assert!(c % 2 == 0);
            c / 2
        }).collect();
        let v = self.from_coeffs(&halves);
        let u = RingElement { idx: self.teich_of_residue[self.residue_index(v) as usize] };
        debug_assert_eq!(self.add(t, self.double(u)).idx, a.idx);
        (t, u)
    }

    /// Generalized Frobenius phi(t + 2u) = t^2 + 2u^2.
    pub fn frobenius(&self, a: RingElement) -> RingElement {
        let (t, u) = self.teichmuller_decompose(a);
        self.add(self.mul(t, t), self.double(self.mul(u, u)))
    }

    /// Ring trace Tr(a) = sum_{i<r} phi^i(a), as an integer in {0,..,3}.
    pub fn trace(&self, a: RingElement) -> u64 {
        let mut acc = self.zero();
        let mut x = a;
        for _ in 0..self.r {
            acc = self.add(acc, x);
            x = self.frobenius(x);
        }
        debug_assert!(acc.idx < 4, "trace must lie in Z_4");
        acc.idx
    }

    /// Teichmuller elements in the fixed enumeration order.
    pub fn teichmuller_elements(&self) -> Vec<RingElement> {
        self.teichmuller.iter().map(|&idx| RingElement { idx }).collect()
    }

    /// Inverse of a unit (odd residue) element.
    pub fn inv(&self, a: RingElement) -> RingElement {
        // unit group order divides 2^(2r) - 2^r... just scan (order <= 4096)
        for b in self.elements() {
            if self.mul(a, b).idx == 1 {
                return b;
            }
        }
        panic!("not a unit");
    }
}

/// Hensel lift: the monic degree-r divisor of X^(2^r - 1) - 1 over Z_4 whose
/// mod-2 reduction is h2. Computed by one quadratic Hensel step from the
/// factorization X^n - 1 = h2 * q2 over GF(2).
fn hensel_lift(h2: &[u64], r: u32) -> Vec<u64> {
    if r == 1 {
        // GR(4,1) = Z_4; the GF(2) modulus is X and its lift stays X.
        return vec![0, 1];
    }
    let n = 2u64.pow(r) - 1;
    // f = X^n - 1 over Z_4
    let mut f = vec![0u64; n as usize + 1];
    f[0] = 3;
    f[n as usize] = 1;
    // q2 = f / h2 over GF(2)
    let f_mod2: Vec<u64> = f.iter().map(|&c| c % 2).collect();
    let q2 = poly_div_exact(&f_mod2, h2, 2);
    debug_assert!(poly_sub(&poly_mul(h2, &q2, 2), &f_mod2, 2).is_empty());
    // Bezout: a*h2 + b*q2 = 1 over GF(2)
    let (_a2, b2) = bezout_gf2(h2, &q2);
    // error e = (f - h2*q2)/2 mod 2
    let prod = poly_mul(h2, &q2, 4);
    let diff = poly_sub(&f, &prod, 4);
    let e: Vec<u64> = diff.iter().map(|&c| {
        debug_assert!(c % 2 == 0);
        (c / 2) % 2
    }).collect();
    // h4 = h2 + 2*(b*e mod h2)
    let corr = poly_rem(&poly_mul(&b2, &e, 2), h2, 2);
    let corr4: Vec<u64> = corr.iter().map(|&c| 2 * c).collect();
    let h4 = poly_add(h2, &corr4, 4);
    debug_assert_eq!(h4.len(), h2.len());
    // sanity: h4 divides X^n - 1 over Z_4
    debug_assert!({
        let a4 = poly_rem(&f, &h4, 4);
        a4.is_empty()
    });
    h4
}

/// Extended Euclid over GF(2)[X]: returns (a, b) with a*x + b*y = gcd = 1.
fn bezout_gf2(x: &[u64], y: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let (mut r0, mut r1) = (x.to_vec(), y.to_vec());
    let (mut a0, mut a1) = (vec![1u64], vec![]);
    let (mut b0, mut b1) = (vec![], vec![1u64]);
    while !r1.is_empty() {
        let q = gf2_div(&r0, &r1);
        let r2 = poly_sub(&r0, &poly_mul(&q, &r1, 2), 2);
        let a2 = poly_sub(&a0, &poly_mul(&q, &a1, 2), 2);
        let b2 = poly_sub(&b0, &poly_mul(&q, &b1, 2), 2);
        r0 = std::mem::replace(&mut r1, r2);
        a0 = std::mem::replace(&mut a1, a2);
        b0 = std::mem::replace(&mut b1, b2);
    }
    assert_eq!(r0, vec![1], "h2 and q2 must be coprime over GF(2)");
    (a0, b0)
}

fn gf2_div(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let db = b.len() - 1;
    if r.len() <= db {
        return vec![];
    }
    let mut q = vec![0u64; r.len() - db];
    while r.len() > db {
        let k = r.len() - 1 - db;
        q[k] = 1;
        for i in 0..=db {
            r[k + i] ^= b[i];
        }
        poly_trim(&mut r);
    }
    q
}
