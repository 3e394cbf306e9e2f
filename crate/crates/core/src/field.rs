//! Exact arithmetic over prime and extension fields GF(p^e).
//!
//! Elements are stored as integer indices in `[0, q)`: the index encodes the
//! coefficient vector of the element over GF(p) as base-p digits, least
//! significant digit first (so index 0 is the additive identity, index 1 the
//! multiplicative identity, and index p the generator `x` of the polynomial
//! basis). This encoding is canonical: every element has exactly one index,
//! and the index doubles as the on-disk serialization.
//!
//! Fields of small order carry exp/log tables for fast multiplication and
//! inversion; larger fields fall back to polynomial arithmetic modulo the
//! field polynomial. Field values are immutable after construction and are
//! shared behind [`std::sync::Arc`].

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 20;

/// Orders up to this limit get exp/log multiplication tables.
const TABLE_LIMIT: u64 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {0} exceeds the supported maximum {MAX_ORDER}")]
    OrderTooLarge(u64),
    #[error("modulus must be monic of degree {expected}, got a polynomial of degree {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("modulus coefficients must be reduced mod {0}")]
    CoefficientOutOfRange(u64),
    #[error("modulus polynomial is reducible over GF({0})")]
    ReducibleModulus(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("elements belong to different fields")]
    FieldMismatch,
}

/// A finite field GF(p^e) with a fixed monic irreducible field polynomial.
pub struct Field {
    p: u64,
    e: u32,
    q: u64,
    /// Monic modulus of degree `e`, coefficients ascending (length `e + 1`).
    modulus: Vec<u64>,
    /// `exp[i] = g^i` for a fixed multiplicative generator g; length `q - 1`.
    exp: Vec<u32>,
    /// `log[exp[i]] = i`; entry 0 is unused.
    log: Vec<u32>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.modulus == other.modulus
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

impl Field {
    /// Constructs GF(p^e). When `modulus` is omitted, the canonical monic
    /// irreducible of degree `e` is chosen: the one with the lowest
    /// lexicographic ascending coefficient vector. A supplied modulus must be
    /// monic of degree `e` and is verified irreducible by trial division.
    pub fn new(p: u64, e: u32, modulus: Option<Vec<u64>>) -> Result<Arc<Field>, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if e == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let q = checked_pow(p, e).ok_or(FieldError::OrderTooLarge(u64::MAX))?;
        if q > MAX_ORDER {
            return Err(FieldError::OrderTooLarge(q));
        }
        let modulus = match modulus {
            Some(m) => {
                let deg = poly_degree(&m).unwrap_or(0);
                if m.len() != e as usize + 1 || deg != e as usize || m[e as usize] != 1 {
                    return Err(FieldError::DegreeMismatch {
                        expected: e as usize,
                        got: deg,
                    });
                }
                if m.iter().any(|&c| c >= p) {
                    return Err(FieldError::CoefficientOutOfRange(p));
                }
                if e > 1 && !is_irreducible(&m, p) {
                    return Err(FieldError::ReducibleModulus(p));
                }
                m
            }
            None => canonical_modulus(p, e),
        };
        let mut field = Field {
            p,
            e,
            q,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
        };
        if q <= TABLE_LIMIT {
            field.build_tables();
        }
        Ok(Arc::new(field))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    /// Field order q = p^e.
    pub fn q(&self) -> u64 {
        self.q
    }

    /// Ascending coefficients of the field polynomial (length e + 1, monic).
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        debug_assert!(a < self.q && b < self.q);
        if self.p == 2 {
            return a ^ b;
        }
        let mut out = 0;
        let mut scale = 1;
        let (mut a, mut b) = (a, b);
        for _ in 0..self.e {
            out += ((a + b) % self.p) * scale;
            a /= self.p;
            b /= self.p;
            scale *= self.p;
        }
        out
    }

    pub fn neg(&self, a: u64) -> u64 {
        debug_assert!(a < self.q);
        if self.p == 2 {
            return a;
        }
        let mut out = 0;
        let mut scale = 1;
        let mut a = a;
        for _ in 0..self.e {
            out += ((self.p - a % self.p) % self.p) * scale;
            a /= self.p;
            scale *= self.p;
        }
        out
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        debug_assert!(a < self.q && b < self.q);
        if a == 0 || b == 0 {
            return 0;
        }
        if !self.exp.is_empty() {
            let idx = (self.log[a as usize] as u64 + self.log[b as usize] as u64) % (self.q - 1);
            return self.exp[idx as usize] as u64;
        }
        self.mul_raw(a, b)
    }

    pub fn inv(&self, a: u64) -> Result<u64, FieldError> {
        debug_assert!(a < self.q);
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        if !self.exp.is_empty() {
            let idx = (self.q - 1 - self.log[a as usize] as u64) % (self.q - 1);
            return Ok(self.exp[idx as usize] as u64);
        }
        Ok(self.pow(a, self.q - 2))
    }

    pub fn pow(&self, a: u64, mut exp: u64) -> u64 {
        let mut base = a;
        let mut out = 1;
        while exp > 0 {
            if exp & 1 == 1 {
                out = self.mul(out, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        out
    }

    /// Encodes an ascending coefficient vector over GF(p) (length ≤ e) as an
    /// element index.
    pub fn element_from_coeffs(&self, coeffs: &[u64]) -> u64 {
        debug_assert!(coeffs.len() <= self.e as usize);
        let mut out = 0;
        for &c in coeffs.iter().rev() {
            debug_assert!(c < self.p);
            out = out * self.p + c;
        }
        out
    }

    /// Ascending coefficient vector of an element (length e).
    pub fn element_coeffs(&self, a: u64) -> Vec<u64> {
        debug_assert!(a < self.q);
        let mut out = Vec::with_capacity(self.e as usize);
        let mut a = a;
        for _ in 0..self.e {
            out.push(a % self.p);
            a /= self.p;
        }
        out
    }

    /// Polynomial-basis multiplication, used when no tables are present and
    /// during table construction.
    fn mul_raw(&self, a: u64, b: u64) -> u64 {
        if self.e == 1 {
            return (a as u128 * b as u128 % self.p as u128) as u64;
        }
        let av = self.element_coeffs(a);
        let bv = self.element_coeffs(b);
        let e = self.e as usize;
        let mut prod = vec![0u64; 2 * e - 1];
        for (i, &ai) in av.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in bv.iter().enumerate() {
                prod[i + j] = (prod[i + j] + ai * bj) % self.p;
            }
        }
        // Reduce modulo the field polynomial: x^e = -(modulus minus leading term).
        for i in (e..prod.len()).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..e {
                let m = self.modulus[j];
                if m != 0 {
                    let sub = c * m % self.p;
                    prod[i - e + j] = (prod[i - e + j] + self.p - sub) % self.p;
                }
            }
        }
        self.element_from_coeffs(&prod[..e])
    }

    fn build_tables(&mut self) {
        let g = self.find_generator();
        let size = (self.q - 1) as usize;
        let mut exp = vec![0u32; size];
        let mut log = vec![0u32; self.q as usize];
        let mut acc = 1u64;
        for (i, slot) in exp.iter_mut().enumerate() {
            *slot = acc as u32;
            log[acc as usize] = i as u32;
            acc = self.mul_raw(acc, g);
        }
        debug_assert_eq!(acc, 1);
        self.exp = exp;
        self.log = log;
    }

    fn find_generator(&self) -> u64 {
        if self.q == 2 {
            return 1;
        }
        let factors = prime_factors(self.q - 1);
        'next: for g in 2..self.q {
            for &f in &factors {
                if self.pow_raw(g, (self.q - 1) / f) == 1 {
                    continue 'next;
                }
            }
            return g;
        }
        unreachable!("every finite field has a multiplicative generator");
    }

    fn pow_raw(&self, a: u64, mut exp: u64) -> u64 {
        let mut base = a;
        let mut out = 1;
        while exp > 0 {
            if exp & 1 == 1 {
                out = self.mul_raw(out, base);
            }
            base = self.mul_raw(base, base);
            exp >>= 1;
        }
        out
    }
}

/// A field element paired with its owning field, for checked arithmetic at
/// API boundaries. Hot paths work on raw indices through [`Field`] directly.
#[derive(Clone)]
pub struct Element {
    field: Arc<Field>,
    index: u64,
}

impl Element {
    pub fn new(field: &Arc<Field>, index: u64) -> Self {
        assert!(index < field.q(), "element index out of range");
        Element {
            field: Arc::clone(field),
            index,
        }
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn coeffs(&self) -> Vec<u64> {
        self.field.element_coeffs(self.index)
    }

    fn check_owner(&self, rhs: &Element) -> Result<(), FieldError> {
        if *self.field != *rhs.field {
            return Err(FieldError::FieldMismatch);
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Element) -> Result<Element, FieldError> {
        self.check_owner(rhs)?;
        Ok(Element::new(
            &self.field,
            self.field.add(self.index, rhs.index),
        ))
    }

    pub fn mul(&self, rhs: &Element) -> Result<Element, FieldError> {
        self.check_owner(rhs)?;
        Ok(Element::new(
            &self.field,
            self.field.mul(self.index, rhs.index),
        ))
    }

    pub fn neg(&self) -> Element {
        Element::new(&self.field, self.field.neg(self.index))
    }

    pub fn inv(&self) -> Result<Element, FieldError> {
        Ok(Element::new(&self.field, self.field.inv(self.index)?))
    }
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        *self.field == *other.field && self.index == other.index
    }
}

impl Eq for Element {}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.field, self.index)
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    let mut out: u64 = 1;
    for _ in 0..exp {
        out = out.checked_mul(base)?;
    }
    Some(out)
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn poly_degree(c: &[u64]) -> Option<usize> {
    c.iter().rposition(|&x| x != 0)
}

/// Remainder of `a` divided by monic-leading `b` over GF(p).
fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let db = poly_degree(b).expect("divisor must be nonzero");
    let lead_inv = mod_inv(b[db], p);
    let mut r: Vec<u64> = a.to_vec();
    while let Some(dr) = poly_degree(&r) {
        if dr < db {
            break;
        }
        let factor = r[dr] * lead_inv % p;
        let shift = dr - db;
        for i in 0..=db {
            let sub = factor * b[i] % p;
            r[i + shift] = (r[i + shift] + p - sub) % p;
        }
    }
    r.truncate(db);
    r
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // p prime, a != 0 mod p
    let mut out = 1u64;
    let mut base = a % p;
    let mut exp = p - 2;
    while exp > 0 {
        if exp & 1 == 1 {
            out = (out as u128 * base as u128 % p as u128) as u64;
        }
        base = (base as u128 * base as u128 % p as u128) as u64;
        exp >>= 1;
    }
    out
}

/// Trial division by every monic polynomial of degree 1..=deg/2.
fn is_irreducible(f: &[u64], p: u64) -> bool {
    let deg = poly_degree(f).expect("modulus must be nonzero");
    if deg == 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        let count = checked_pow(p, d as u32).expect("divisor space fits");
        for v in 0..count {
            let mut g = vec![0u64; d + 1];
            g[d] = 1;
            let mut t = v;
            for coeff in g.iter_mut().take(d) {
                *coeff = t % p;
                t /= p;
            }
            if poly_degree(&poly_rem(f, &g, p)).is_none() {
                return false;
            }
        }
    }
    true
}

/// The monic irreducible of degree e over GF(p) with the lexicographically
/// smallest ascending coefficient vector.
fn canonical_modulus(p: u64, e: u32) -> Vec<u64> {
    let e = e as usize;
    if e == 1 {
        return vec![0, 1];
    }
    let count = checked_pow(p, e as u32).expect("order already validated");
    for v in 0..count {
        let mut m = vec![0u64; e + 1];
        m[e] = 1;
        // Lexicographic order on (c_0, .., c_{e-1}): the last coefficient
        // cycles fastest, so c_0 takes the most significant digit of v.
        let mut t = v;
        for i in (0..e).rev() {
            m[i] = t % p;
            t /= p;
        }
        if is_irreducible(&m, p) {
            return m;
        }
    }
    unreachable!("irreducible polynomials exist in every degree");
}
