//! Exact arithmetic in finite fields `GF(p^m)`.
//!
//! Elements are stored as indices into a fixed enumeration of the field:
//! the element with coefficient vector `(c0, c1, ..., c_{m-1})` (constant
//! term first) has index `c0 + c1·p + ... + c_{m-1}·p^{m-1}`. The
//! enumeration order is therefore the base-`p` integer value of the
//! coefficient vector, so `GF(p)` enumerates as `0, 1, ..., p-1` and
//! equality of elements is equality of indices.
//!
//! A [`Field`] precomputes exp/log tables with respect to a fixed
//! multiplicative generator, an inverse table built by the extended
//! Euclidean algorithm, and the quadratic-root predicate used by the
//! fixed-point tests (squareness for odd characteristic, Artin–Schreier
//! solvability for characteristic 2).

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

/// Hard upper bound on supported field orders.
pub const MAX_ORDER: u64 = 1 << 16;

/// Orders up to this bound get a full `q × q` addition table.
const ADD_TABLE_MAX: u64 = 1024;

const NO_LOG: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("characteristic {0} is not prime")]
    NonPrimeCharacteristic(u64),
    #[error("modulus is reducible over GF({0})")]
    ReducibleModulus(u64),
    #[error("modulus must be monic of degree {0}")]
    DegreeMismatch(u32),
    #[error("field order {0} exceeds the supported bound {MAX_ORDER}")]
    UnsupportedOrder(u64),
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("invalid field element encoding: {0}")]
    BadElement(String),
}

/// Description of a finite field: characteristic, extension degree,
/// defining modulus, and cached order `q = p^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    pub p: u64,
    pub m: u32,
    /// Monic irreducible modulus of degree `m`, constant term first
    /// (length `m + 1`). Degree-1 fields use the convention `x`.
    pub modulus: Vec<u64>,
    pub order: u64,
}

impl FieldSpec {
    /// JSON form `{"p": .., "m": .., "modulus": [..]}`.
    pub fn to_json(&self) -> Value {
        json!({ "p": self.p, "m": self.m, "modulus": self.modulus })
    }
}

/// An element of a [`Field`], stored as its enumeration index together
/// with the owning field's fingerprint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElem {
    pub(crate) field: u64,
    pub(crate) idx: u32,
}

impl FieldElem {
    /// Position of this element in the field's enumeration order.
    pub fn index(&self) -> u64 {
        self.idx as u64
    }

    pub fn is_zero(&self) -> bool {
        self.idx == 0
    }

    /// Whether this element was produced by `f` (or a field with an
    /// identical specification).
    pub fn belongs_to(&self, f: &Field) -> bool {
        self.field == f.id
    }
}

/// A finite field `GF(p^m)` with precomputed arithmetic tables.
pub struct Field {
    id: u64,
    spec: FieldSpec,
    /// p^0, p^1, ..., p^m.
    pw: Vec<u64>,
    /// exp[i] = generator^i for i in 0..2(q-1); doubled so that one
    /// addition of logs never needs a reduction.
    exp: Vec<u32>,
    /// log[x] for x != 0; log[0] = NO_LOG.
    log: Vec<u32>,
    neg: Vec<u32>,
    /// Multiplicative inverses computed by the extended Euclidean
    /// algorithm on coefficient polynomials; inv[0] is a sentinel.
    inv: Vec<u32>,
    /// Full addition table when q <= ADD_TABLE_MAX, else empty.
    add_tbl: Vec<u32>,
    /// quad_aux[x]: for odd p, "x is a square"; for p = 2, "the absolute
    /// trace of x is zero" (so that μ² + μ = x is solvable).
    quad_aux: Vec<bool>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Field(GF({}^{}) = GF({}))",
            self.spec.p, self.spec.m, self.spec.order
        )
    }
}

impl Field {
    /// Builds `GF(p^m)`. When `modulus` is omitted and `m > 1`, the least
    /// monic irreducible polynomial of degree `m` is selected, comparing
    /// candidates by the base-`p` integer value of their non-leading
    /// coefficients (constant term least significant).
    pub fn new(p: u64, m: u32, modulus: Option<&[u64]>) -> Result<Field, GfError> {
        if !is_prime(p) {
            return Err(GfError::NonPrimeCharacteristic(p));
        }
        if m < 1 {
            return Err(GfError::DegreeMismatch(m));
        }
        let mut q: u64 = 1;
        for _ in 0..m {
            q = q
                .checked_mul(p)
                .filter(|&v| v <= MAX_ORDER)
                .ok_or_else(|| GfError::UnsupportedOrder(p.saturating_pow(m)))?;
        }

        let modulus = match modulus {
            Some(raw) => {
                if raw.len() != m as usize + 1 {
                    return Err(GfError::DegreeMismatch(m));
                }
                let reduced: Vec<u64> = raw.iter().map(|&c| c % p).collect();
                if reduced[m as usize] != 1 {
                    return Err(GfError::DegreeMismatch(m));
                }
                if m == 1 {
                    // Elements are residues mod p; store the convention `x`.
                    vec![0, 1]
                } else {
                    if !poly_is_irreducible(&reduced, p) {
                        return Err(GfError::ReducibleModulus(p));
                    }
                    reduced
                }
            }
            None => {
                if m == 1 {
                    vec![0, 1]
                } else {
                    default_modulus(p, m)
                }
            }
        };

        let spec = FieldSpec {
            p,
            m,
            modulus,
            order: q,
        };
        let mut hasher = DefaultHasher::new();
        (spec.p, spec.m, &spec.modulus).hash(&mut hasher);
        let id = hasher.finish();

        let mut pw = Vec::with_capacity(m as usize + 1);
        let mut acc = 1u64;
        for _ in 0..=m {
            pw.push(acc);
            acc = acc.saturating_mul(p);
        }

        let raw = RawArith {
            p,
            m: m as usize,
            modulus: spec.modulus.clone(),
            pw: pw.clone(),
        };

        // exp/log tables from a multiplicative generator.
        let gen = find_generator(&raw, q);
        let qm1 = (q - 1) as usize;
        let mut exp = vec![0u32; 2 * qm1.max(1)];
        let mut log = vec![NO_LOG; q as usize];
        let mut cur = 1u32;
        for i in 0..qm1 {
            exp[i] = cur;
            exp[i + qm1] = cur;
            log[cur as usize] = i as u32;
            cur = raw.mul_idx(cur, gen);
        }
        debug_assert_eq!(cur, 1, "generator order must be q - 1");

        let neg: Vec<u32> = (0..q as u32).map(|x| raw.neg_idx(x)).collect();

        let mut inv = vec![0u32; q as usize];
        for x in 1..q as u32 {
            inv[x as usize] = raw.inv_idx(x);
        }

        let add_tbl = if q <= ADD_TABLE_MAX {
            let n = q as usize;
            let mut t = vec![0u32; n * n];
            for a in 0..n {
                for b in a..n {
                    let s = raw.add_idx(a as u32, b as u32);
                    t[a * n + b] = s;
                    t[b * n + a] = s;
                }
            }
            t
        } else {
            Vec::new()
        };

        let mut field = Field {
            id,
            spec,
            pw,
            exp,
            log,
            neg,
            inv,
            add_tbl,
            quad_aux: Vec::new(),
        };

        let quad_aux: Vec<bool> = if p == 2 {
            // Absolute trace x + x² + x⁴ + ... over GF(2); the trace of
            // every element of GF(2^k) lies in {0, 1}.
            (0..q as u32)
                .map(|x| {
                    let mut tr = 0u32;
                    let mut t = x;
                    for _ in 0..field.spec.m {
                        tr = field.addi(tr, t);
                        t = field.muli(t, t);
                    }
                    tr == 0
                })
                .collect()
        } else {
            (0..q as u32)
                .map(|x| x == 0 || field.log[x as usize].is_multiple_of(2))
                .collect()
        };
        field.quad_aux = quad_aux;
        Ok(field)
    }

    /// Builds the field described by a JSON value
    /// `{"p": .., "m": .., "modulus": [..]?}`.
    pub fn from_json(v: &Value) -> Result<Field, GfError> {
        let obj = v
            .as_object()
            .ok_or_else(|| GfError::BadElement("field must be an object".into()))?;
        let p = obj
            .get("p")
            .and_then(Value::as_u64)
            .ok_or_else(|| GfError::BadElement("missing field characteristic \"p\"".into()))?;
        let m = obj
            .get("m")
            .and_then(Value::as_u64)
            .ok_or_else(|| GfError::BadElement("missing field degree \"m\"".into()))?
            as u32;
        let modulus: Option<Vec<u64>> = match obj.get("modulus") {
            None | Some(Value::Null) => None,
            Some(Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    out.push(item.as_u64().ok_or_else(|| {
                        GfError::BadElement(
                            "modulus coefficients must be nonnegative integers".into(),
                        )
                    })?);
                }
                Some(out)
            }
            Some(_) => return Err(GfError::BadElement("modulus must be an array".into())),
        };
        Field::new(p, m, modulus.as_deref())
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn p(&self) -> u64 {
        self.spec.p
    }

    pub fn m(&self) -> u32 {
        self.spec.m
    }

    /// Field order `q = p^m`.
    pub fn q(&self) -> u64 {
        self.spec.order
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem {
            field: self.id,
            idx: 0,
        }
    }

    pub fn one(&self) -> FieldElem {
        FieldElem {
            field: self.id,
            idx: 1,
        }
    }

    /// Element at position `index` in enumeration order.
    pub fn elem_at(&self, index: u64) -> Option<FieldElem> {
        (index < self.q()).then_some(FieldElem {
            field: self.id,
            idx: index as u32,
        })
    }

    /// Element with the given coefficients (constant term first). Fewer
    /// than `m` coefficients are padded with zeros; values are reduced
    /// modulo `p`, so negatives like `-1` are accepted.
    #[allow(clippy::wrong_self_convention)]
    pub fn from_coeffs(&self, coeffs: &[i64]) -> Result<FieldElem, GfError> {
        if coeffs.len() > self.spec.m as usize {
            return Err(GfError::DegreeMismatch(self.spec.m));
        }
        let p = self.spec.p as i64;
        let mut idx = 0u64;
        for (i, &c) in coeffs.iter().enumerate() {
            idx += (c.rem_euclid(p)) as u64 * self.pw[i];
        }
        Ok(FieldElem {
            field: self.id,
            idx: idx as u32,
        })
    }

    /// Coefficient vector of `x`, constant term first, length `m`.
    pub fn coeffs(&self, x: FieldElem) -> Result<Vec<u64>, GfError> {
        self.check(x)?;
        let mut v = x.idx as u64;
        let mut out = Vec::with_capacity(self.spec.m as usize);
        for _ in 0..self.spec.m {
            out.push(v % self.spec.p);
            v /= self.spec.p;
        }
        Ok(out)
    }

    /// All `q` elements in enumeration order.
    pub fn elements(&self) -> impl ExactSizeIterator<Item = FieldElem> + '_ {
        (0..self.q() as u32).map(move |idx| FieldElem {
            field: self.id,
            idx,
        })
    }

    fn check(&self, x: FieldElem) -> Result<(), GfError> {
        if x.field == self.id {
            Ok(())
        } else {
            Err(GfError::FieldMismatch)
        }
    }

    fn wrap(&self, idx: u32) -> FieldElem {
        FieldElem {
            field: self.id,
            idx,
        }
    }

    pub fn add(&self, x: FieldElem, y: FieldElem) -> Result<FieldElem, GfError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.wrap(self.addi(x.idx, y.idx)))
    }

    pub fn sub(&self, x: FieldElem, y: FieldElem) -> Result<FieldElem, GfError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.wrap(self.subi(x.idx, y.idx)))
    }

    pub fn neg(&self, x: FieldElem) -> Result<FieldElem, GfError> {
        self.check(x)?;
        Ok(self.wrap(self.negi(x.idx)))
    }

    pub fn mul(&self, x: FieldElem, y: FieldElem) -> Result<FieldElem, GfError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.wrap(self.muli(x.idx, y.idx)))
    }

    pub fn inv(&self, x: FieldElem) -> Result<FieldElem, GfError> {
        self.check(x)?;
        if x.idx == 0 {
            return Err(GfError::ZeroInverse);
        }
        Ok(self.wrap(self.invi(x.idx)))
    }

    pub fn pow(&self, x: FieldElem, e: u64) -> Result<FieldElem, GfError> {
        self.check(x)?;
        Ok(self.wrap(self.powi(x.idx, e)))
    }

    /// Product of all `q - 1` nonzero elements. Equals `-1` in every
    /// finite field (which is `+1` in characteristic 2).
    pub fn nonzero_product(&self) -> FieldElem {
        let mut acc = 1u32;
        for x in 1..self.q() as u32 {
            acc = self.muli(acc, x);
        }
        self.wrap(acc)
    }

    /// Renders `x` as a residue for prime fields or a coefficient vector
    /// `[c0, ..]` for extensions.
    pub fn render(&self, x: FieldElem) -> String {
        if self.spec.m == 1 {
            format!("{}", x.idx)
        } else {
            format!("{:?}", self.coeffs(x).expect("element of this field"))
        }
    }

    /// JSON encoding: a bare integer for `m = 1`, else `[c0, c1, ...]`.
    pub fn elem_to_json(&self, x: FieldElem) -> Result<Value, GfError> {
        self.check(x)?;
        if self.spec.m == 1 {
            Ok(json!(x.idx))
        } else {
            Ok(json!(self.coeffs(x)?))
        }
    }

    /// Decodes an element from JSON; accepts a bare integer for any `m`
    /// (treated as `[c]`) and reduces coefficients modulo `p`.
    pub fn elem_from_json(&self, v: &Value) -> Result<FieldElem, GfError> {
        match v {
            Value::Number(_) => {
                let c = v
                    .as_i64()
                    .ok_or_else(|| GfError::BadElement(format!("bad element literal {v}")))?;
                self.from_coeffs(&[c])
            }
            Value::Array(items) => {
                let mut coeffs = Vec::with_capacity(items.len());
                for item in items {
                    coeffs.push(
                        item.as_i64().ok_or_else(|| {
                            GfError::BadElement(format!("bad coefficient {item}"))
                        })?,
                    );
                }
                self.from_coeffs(&coeffs)
            }
            _ => Err(GfError::BadElement(format!("bad element encoding {v}"))),
        }
    }

    // ---- index-level arithmetic used by the rest of the crate ----

    #[inline]
    pub(crate) fn addi(&self, a: u32, b: u32) -> u32 {
        if !self.add_tbl.is_empty() {
            return self.add_tbl[a as usize * self.spec.order as usize + b as usize];
        }
        if self.spec.m == 1 {
            return ((a as u64 + b as u64) % self.spec.p) as u32;
        }
        let p = self.spec.p;
        let (mut a, mut b) = (a as u64, b as u64);
        let mut out = 0u64;
        for &w in &self.pw[..self.spec.m as usize] {
            let s = (a % p + b % p) % p;
            out += s * w;
            a /= p;
            b /= p;
        }
        out as u32
    }

    #[inline]
    pub(crate) fn negi(&self, a: u32) -> u32 {
        self.neg[a as usize]
    }

    #[inline]
    pub(crate) fn subi(&self, a: u32, b: u32) -> u32 {
        self.addi(a, self.neg[b as usize])
    }

    #[inline]
    pub(crate) fn muli(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let la = self.log[a as usize] as usize;
        let lb = self.log[b as usize] as usize;
        self.exp[la + lb]
    }

    #[inline]
    pub(crate) fn invi(&self, a: u32) -> u32 {
        debug_assert_ne!(a, 0);
        self.inv[a as usize]
    }

    pub(crate) fn powi(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let qm1 = self.spec.order - 1;
        let la = self.log[a as usize] as u64;
        let le = (la % qm1) * (e % qm1) % qm1;
        self.exp[le as usize]
    }

    /// Whether `λ² - tλ + d` has a root in the field. This is the
    /// characteristic-polynomial criterion behind the fixed-point tests:
    /// for odd characteristic the discriminant `t² - 4d` must be a square
    /// (or zero); in characteristic 2 a root exists iff `t = 0` or the
    /// absolute trace of `d/t²` vanishes.
    pub(crate) fn quad_has_root(&self, t: u32, d: u32) -> bool {
        if self.spec.p == 2 {
            if t == 0 {
                return true;
            }
            let t2 = self.muli(t, t);
            self.quad_aux[self.muli(d, self.invi(t2)) as usize]
        } else {
            let four = (4 % self.spec.p) as u32;
            let disc = self.subi(self.muli(t, t), self.muli(four, d));
            self.quad_aux[disc as usize]
        }
    }

    /// Raw coefficient-polynomial arithmetic; test support for
    /// cross-checking the table-backed operations.
    #[cfg(test)]
    pub(crate) fn raw_arith(&self) -> RawArith {
        RawArith {
            p: self.spec.p,
            m: self.spec.m as usize,
            modulus: self.spec.modulus.clone(),
            pw: self.pw.clone(),
        }
    }
}

/// Convenience alias used throughout: fields are shared immutably.
pub type FieldRef = Arc<Field>;

/// Builds `GF(p^m)` behind an [`Arc`].
pub fn field_make(p: u64, m: u32, modulus: Option<&[u64]>) -> Result<FieldRef, GfError> {
    Field::new(p, m, modulus).map(Arc::new)
}

/// Splits a prime power `q = p^m`; `None` if `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q.is_multiple_of(p) {
            let mut v = q;
            let mut m = 0;
            while v.is_multiple_of(p) {
                v /= p;
                m += 1;
            }
            return (v == 1).then_some((p, m));
        }
        p += 1;
    }
    Some((q, 1))
}

/// All prime powers `2 <= q <= bound` in increasing order.
pub fn prime_powers_upto(bound: u64) -> Vec<u64> {
    (2..=bound).filter(|&q| prime_power(q).is_some()).collect()
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Polynomial arithmetic on coefficient vectors mod p; used while the
/// lookup tables are being built.
pub(crate) struct RawArith {
    p: u64,
    m: usize,
    modulus: Vec<u64>,
    pw: Vec<u64>,
}

impl RawArith {
    fn to_digits(&self, idx: u32) -> Vec<u64> {
        let mut v = idx as u64;
        let mut out = vec![0u64; self.m];
        for slot in out.iter_mut() {
            *slot = v % self.p;
            v /= self.p;
        }
        out
    }

    fn pack_digits(&self, digits: &[u64]) -> u32 {
        let mut out = 0u64;
        for (i, &c) in digits.iter().enumerate().take(self.m) {
            out += c * self.pw[i];
        }
        out as u32
    }

    pub(crate) fn add_idx(&self, a: u32, b: u32) -> u32 {
        let da = self.to_digits(a);
        let db = self.to_digits(b);
        let sum: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        self.pack_digits(&sum)
    }

    pub(crate) fn neg_idx(&self, a: u32) -> u32 {
        let da = self.to_digits(a);
        let neg: Vec<u64> = da.iter().map(|&x| (self.p - x) % self.p).collect();
        self.pack_digits(&neg)
    }

    pub(crate) fn mul_idx(&self, a: u32, b: u32) -> u32 {
        let da = self.to_digits(a);
        let db = self.to_digits(b);
        let prod = poly_mul_mod(&da, &db, &self.modulus, self.p);
        self.pack_digits(&prod)
    }

    pub(crate) fn pow_idx(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_idx(acc, base);
            }
            base = self.mul_idx(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse by the extended Euclidean algorithm over GF(p)[x].
    pub(crate) fn inv_idx(&self, a: u32) -> u32 {
        assert_ne!(a, 0, "zero has no inverse");
        if self.m == 1 {
            // Bezout on integers.
            let (mut r0, mut r1) = (self.p as i64, a as i64);
            let (mut t0, mut t1) = (0i64, 1i64);
            while r1 != 0 {
                let quot = r0 / r1;
                (r0, r1) = (r1, r0 - quot * r1);
                (t0, t1) = (t1, t0 - quot * t1);
            }
            debug_assert_eq!(r0, 1);
            return t0.rem_euclid(self.p as i64) as u32;
        }
        let da = self.to_digits(a);
        let inv = poly_inv_mod(&da, &self.modulus, self.p);
        self.pack_digits(&inv)
    }
}

fn poly_trim(v: &mut Vec<u64>) {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
}

fn poly_deg(v: &[u64]) -> usize {
    let mut d = v.len();
    while d > 1 && v[d - 1] == 0 {
        d -= 1;
    }
    d - 1
}

fn poly_is_zero(v: &[u64]) -> bool {
    v.iter().all(|&c| c == 0)
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    out
}

/// Remainder of `a` modulo monic `mod_poly`.
fn poly_rem(a: &[u64], mod_poly: &[u64], p: u64) -> Vec<u64> {
    let md = poly_deg(mod_poly);
    let mut r = a.to_vec();
    poly_trim(&mut r);
    while poly_deg(&r) >= md && !poly_is_zero(&r) {
        let d = poly_deg(&r);
        let lead = r[d];
        if lead != 0 {
            let shift = d - md;
            for (i, &mc) in mod_poly.iter().enumerate().take(md + 1) {
                let sub = lead * mc % p;
                r[i + shift] = (r[i + shift] + p - sub) % p;
            }
        }
        poly_trim(&mut r);
        if poly_deg(&r) < md {
            break;
        }
    }
    r.resize(md, 0);
    r
}

fn poly_mul_mod(a: &[u64], b: &[u64], mod_poly: &[u64], p: u64) -> Vec<u64> {
    poly_rem(&poly_mul(a, b, p), mod_poly, p)
}

/// Long division of `a` by monic-leading `b`; returns (quotient, remainder).
fn poly_divmod(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let db = poly_deg(b);
    let lead_inv = mod_inv_u64(b[db], p);
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let da = poly_deg(&r);
    if da < db && poly_is_zero(&r) || da < db {
        return (vec![0], r);
    }
    let mut quot = vec![0u64; da - db + 1];
    while !poly_is_zero(&r) && poly_deg(&r) >= db {
        let d = poly_deg(&r);
        let coef = r[d] * lead_inv % p;
        let shift = d - db;
        quot[shift] = coef;
        for i in 0..=db {
            let sub = coef * b[i] % p;
            r[i + shift] = (r[i + shift] + p - sub) % p;
        }
        poly_trim(&mut r);
        if poly_deg(&r) < db {
            break;
        }
    }
    (quot, r)
}

fn mod_inv_u64(a: u64, p: u64) -> u64 {
    let (mut r0, mut r1) = (p as i64, (a % p) as i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let quot = r0 / r1;
        (r0, r1) = (r1, r0 - quot * r1);
        (t0, t1) = (t1, t0 - quot * t1);
    }
    t0.rem_euclid(p as i64) as u64
}

/// Extended Euclid over GF(p)[x]: the inverse of `a` modulo `mod_poly`.
fn poly_inv_mod(a: &[u64], mod_poly: &[u64], p: u64) -> Vec<u64> {
    let mut r0 = mod_poly.to_vec();
    let mut r1 = a.to_vec();
    poly_trim(&mut r0);
    poly_trim(&mut r1);
    let mut t0 = vec![0u64];
    let mut t1 = vec![1u64];
    while !poly_is_zero(&r1) {
        let (quot, rem) = poly_divmod(&r0, &r1, p);
        let qt1 = poly_mul(&quot, &t1, p);
        let mut t2 = vec![0u64; t0.len().max(qt1.len())];
        for (i, slot) in t2.iter_mut().enumerate() {
            let x = t0.get(i).copied().unwrap_or(0);
            let y = qt1.get(i).copied().unwrap_or(0);
            *slot = (x + p - y % p) % p;
        }
        poly_trim(&mut t2);
        r0 = r1;
        r1 = rem;
        poly_trim(&mut r1);
        t0 = t1;
        t1 = t2;
        if poly_is_zero(&r1) {
            break;
        }
    }
    // r0 is the gcd, a nonzero constant since mod_poly is irreducible.
    debug_assert_eq!(poly_deg(&r0), 0);
    let scale = mod_inv_u64(r0[0], p);
    let mut out: Vec<u64> = t0.iter().map(|&c| c * scale % p).collect();
    out.resize(poly_deg(mod_poly), 0);
    out
}

/// Irreducibility over GF(p) by trial division: a polynomial of degree m
/// is reducible iff it has a monic divisor of degree 1..=m/2.
fn poly_is_irreducible(poly: &[u64], p: u64) -> bool {
    let m = poly_deg(poly);
    if m == 0 {
        return false;
    }
    if m == 1 {
        return true;
    }
    for d in 1..=m / 2 {
        // All monic polynomials of degree d, enumerated by the base-p
        // value of their non-leading coefficients.
        let count = p.pow(d as u32);
        for v in 0..count {
            let mut divisor = vec![0u64; d + 1];
            let mut t = v;
            for slot in divisor.iter_mut().take(d) {
                *slot = t % p;
                t /= p;
            }
            divisor[d] = 1;
            let (_, rem) = poly_divmod(poly, &divisor, p);
            if poly_is_zero(&rem) {
                return false;
            }
        }
    }
    true
}

/// Least monic irreducible polynomial of degree m over GF(p), comparing
/// by the base-p integer value of the non-leading coefficients.
fn default_modulus(p: u64, m: u32) -> Vec<u64> {
    let count = p.pow(m);
    for v in 0..count {
        let mut poly = vec![0u64; m as usize + 1];
        let mut t = v;
        for slot in poly.iter_mut().take(m as usize) {
            *slot = t % p;
            t /= p;
        }
        poly[m as usize] = 1;
        if poly_is_irreducible(&poly, p) {
            return poly;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

fn find_generator(raw: &RawArith, q: u64) -> u32 {
    if q == 2 {
        return 1;
    }
    let qm1 = q - 1;
    let mut prime_factors = Vec::new();
    let mut v = qm1;
    let mut d = 2;
    while d * d <= v {
        if v.is_multiple_of(d) {
            prime_factors.push(d);
            while v.is_multiple_of(d) {
                v /= d;
            }
        }
        d += 1;
    }
    if v > 1 {
        prime_factors.push(v);
    }
    for cand in 2..q as u32 {
        if prime_factors
            .iter()
            .all(|&r| raw.pow_idx(cand, qm1 / r) != 1)
        {
            return cand;
        }
    }
    unreachable!("the multiplicative group of a finite field is cyclic")
}
