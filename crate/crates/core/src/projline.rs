//! The projective line `P¹(K)` and the group `PGL₂(K)` acting on it.
//!
//! Points are homogeneous pairs `(x : y)` in canonical form: `y = 1` for
//! the finite points and `(1 : 0)` for the point at infinity. Group
//! elements are 2×2 matrices up to scalars; the canonical representative
//! scales the first nonzero entry (in the order a, b, c, d) to 1, so
//! structural equality decides equality in `PGL₂`.
//!
//! Point order is the field's element order followed by `(1 : 0)`;
//! element order is lexicographic on the canonical entries. Both orders
//! are relied on by the search and coset code for determinism.

use serde_json::{json, Value};
use thiserror::Error;

use crate::gf::{Field, FieldElem, GfError};

/// Default bound on `q` for full enumeration of `PGL₂(q)`.
pub const DEFAULT_ENUM_CAP: u64 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProjlineError {
    #[error("the zero vector does not define a projective point")]
    ZeroVector,
    #[error("matrix is singular (determinant zero)")]
    SingularMatrix,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("enumerating PGL2({q}) exceeds the cap q <= {cap}")]
    CapExceeded { q: u64, cap: u64 },
    #[error("a coordinate frame needs three distinct points")]
    DegenerateFrame,
    #[error("invalid encoding: {0}")]
    BadEncoding(String),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// A point of `P¹(K)` in canonical form: `y = 1`, or `x = 1, y = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjPoint {
    x: FieldElem,
    y: FieldElem,
}

impl ProjPoint {
    /// Canonicalizes the homogeneous pair `(x : y)`.
    pub fn canon(f: &Field, x: FieldElem, y: FieldElem) -> Result<ProjPoint, ProjlineError> {
        check_elem(f, x)?;
        check_elem(f, y)?;
        if y.is_zero() {
            if x.is_zero() {
                return Err(ProjlineError::ZeroVector);
            }
            Ok(ProjPoint {
                x: f.one(),
                y: f.zero(),
            })
        } else {
            Ok(ProjPoint {
                x: f.mul(x, f.inv(y)?)?,
                y: f.one(),
            })
        }
    }

    /// The point `(1 : 0)`.
    pub fn infinity(f: &Field) -> ProjPoint {
        ProjPoint {
            x: f.one(),
            y: f.zero(),
        }
    }

    /// The finite point `(t : 1)`.
    pub fn finite(f: &Field, t: FieldElem) -> Result<ProjPoint, ProjlineError> {
        check_elem(f, t)?;
        Ok(ProjPoint { x: t, y: f.one() })
    }

    pub fn x(&self) -> FieldElem {
        self.x
    }

    pub fn y(&self) -> FieldElem {
        self.y
    }

    pub fn is_infinity(&self) -> bool {
        self.y.is_zero()
    }

    /// Position in [`points`] order: finite `(t : 1)` at the index of
    /// `t`, then `(1 : 0)` at index `q`.
    pub fn index(&self, f: &Field) -> u32 {
        if self.is_infinity() {
            f.q() as u32
        } else {
            self.x.index() as u32
        }
    }

    /// Inverse of [`ProjPoint::index`].
    pub fn at_index(f: &Field, i: u32) -> Option<ProjPoint> {
        let q = f.q() as u32;
        if i < q {
            Some(ProjPoint {
                x: f.elem_at(i as u64)?,
                y: f.one(),
            })
        } else if i == q {
            Some(ProjPoint::infinity(f))
        } else {
            None
        }
    }

    /// JSON form `[x, y]` in canonical coordinates.
    pub fn to_json(&self, f: &Field) -> Result<Value, ProjlineError> {
        Ok(json!([f.elem_to_json(self.x)?, f.elem_to_json(self.y)?]))
    }

    pub fn from_json(f: &Field, v: &Value) -> Result<ProjPoint, ProjlineError> {
        let items = v
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| ProjlineError::BadEncoding(format!("point must be [x, y], got {v}")))?;
        ProjPoint::canon(
            f,
            f.elem_from_json(&items[0])?,
            f.elem_from_json(&items[1])?,
        )
    }

    pub fn render(&self, f: &Field) -> String {
        format!("({} : {})", f.render(self.x), f.render(self.y))
    }
}

/// All `q + 1` points: `(t : 1)` for `t` in field order, then `(1 : 0)`.
pub fn points(f: &Field) -> Vec<ProjPoint> {
    let mut v: Vec<ProjPoint> = f
        .elements()
        .map(|t| ProjPoint { x: t, y: f.one() })
        .collect();
    v.push(ProjPoint::infinity(f));
    v
}

/// An element of `PGL₂(K)`: the matrix `(a b; c d)` with the first
/// nonzero entry scaled to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElem {
    a: FieldElem,
    b: FieldElem,
    c: FieldElem,
    d: FieldElem,
}

impl GroupElem {
    /// Canonicalizes `(a b; c d)`; idempotent, and invariant under
    /// rescaling all four entries by a nonzero scalar.
    pub fn canon(
        f: &Field,
        a: FieldElem,
        b: FieldElem,
        c: FieldElem,
        d: FieldElem,
    ) -> Result<GroupElem, ProjlineError> {
        for e in [a, b, c, d] {
            check_elem(f, e)?;
        }
        let m = canon_idx(
            f,
            [
                a.index() as u32,
                b.index() as u32,
                c.index() as u32,
                d.index() as u32,
            ],
        )?;
        Ok(GroupElem::from_idxs(f, m))
    }

    pub fn identity(f: &Field) -> GroupElem {
        GroupElem {
            a: f.one(),
            b: f.zero(),
            c: f.zero(),
            d: f.one(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.b.is_zero() && self.c.is_zero() && self.a == self.d && !self.a.is_zero()
    }

    pub fn a(&self) -> FieldElem {
        self.a
    }

    pub fn b(&self) -> FieldElem {
        self.b
    }

    pub fn c(&self) -> FieldElem {
        self.c
    }

    pub fn d(&self) -> FieldElem {
        self.d
    }

    pub fn entries(&self) -> [FieldElem; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Matrix product `self · other`, canonicalized.
    pub fn mul(&self, f: &Field, other: &GroupElem) -> Result<GroupElem, ProjlineError> {
        self.check(f)?;
        other.check(f)?;
        Ok(GroupElem::from_idxs(
            f,
            mul_idx(f, self.idxs(), other.idxs()),
        ))
    }

    /// Inverse via the adjugate `(d -b; -c a)`, canonicalized.
    pub fn inv(&self, f: &Field) -> Result<GroupElem, ProjlineError> {
        self.check(f)?;
        Ok(GroupElem::from_idxs(f, inv_idx(f, self.idxs())))
    }

    pub fn det(&self, f: &Field) -> Result<FieldElem, ProjlineError> {
        self.check(f)?;
        let [a, b, c, d] = self.idxs();
        Ok(f.elem_at(det_idx(f, [a, b, c, d]) as u64)
            .expect("determinant is a field element"))
    }

    /// The left action on `P¹`: `(x : y) ↦ (ax + by : cx + dy)`.
    pub fn act(&self, f: &Field, p: ProjPoint) -> Result<ProjPoint, ProjlineError> {
        self.check(f)?;
        check_elem(f, p.x)?;
        Ok(ProjPoint::at_index(f, act_idx(f, self.idxs(), p.index(f)))
            .expect("action stays on the line"))
    }

    /// All points fixed by `self`, by direct scan in point order. The
    /// identity fixes all `q + 1`; any other element fixes at most 2.
    pub fn fixed_points(&self, f: &Field) -> Result<Vec<ProjPoint>, ProjlineError> {
        self.check(f)?;
        let m = self.idxs();
        let q = f.q() as u32;
        Ok((0..=q)
            .filter(|&i| act_idx(f, m, i) == i)
            .map(|i| ProjPoint::at_index(f, i).expect("index in range"))
            .collect())
    }

    /// Whether `self` moves every point. Decided by the characteristic
    /// polynomial `λ² - (a+d)λ + (ad-bc)`: a fixed point exists iff it
    /// has a root in `K`. The scan route [`GroupElem::fixed_points`] is
    /// the independent cross-check.
    pub fn is_fixed_point_free(&self, f: &Field) -> Result<bool, ProjlineError> {
        self.check(f)?;
        let [a, b, c, d] = self.idxs();
        let t = f.addi(a, d);
        let det = f.subi(f.muli(a, d), f.muli(b, c));
        Ok(!f.quad_has_root(t, det))
    }

    /// JSON form `[a, b, c, d]`, canonical on output; non-canonical
    /// input is accepted and canonicalized.
    pub fn to_json(&self, f: &Field) -> Result<Value, ProjlineError> {
        self.check(f)?;
        Ok(json!([
            f.elem_to_json(self.a)?,
            f.elem_to_json(self.b)?,
            f.elem_to_json(self.c)?,
            f.elem_to_json(self.d)?,
        ]))
    }

    pub fn from_json(f: &Field, v: &Value) -> Result<GroupElem, ProjlineError> {
        let items = v.as_array().filter(|a| a.len() == 4).ok_or_else(|| {
            ProjlineError::BadEncoding(format!("group element must be [a, b, c, d], got {v}"))
        })?;
        GroupElem::canon(
            f,
            f.elem_from_json(&items[0])?,
            f.elem_from_json(&items[1])?,
            f.elem_from_json(&items[2])?,
            f.elem_from_json(&items[3])?,
        )
    }

    pub fn render(&self, f: &Field) -> String {
        format!(
            "[{}, {}, {}, {}]",
            f.render(self.a),
            f.render(self.b),
            f.render(self.c),
            f.render(self.d)
        )
    }

    fn check(&self, f: &Field) -> Result<(), ProjlineError> {
        check_elem(f, self.a)
    }

    /// Canonical entry indices; the compact form used by the hot paths.
    pub(crate) fn idxs(&self) -> [u32; 4] {
        [
            self.a.index() as u32,
            self.b.index() as u32,
            self.c.index() as u32,
            self.d.index() as u32,
        ]
    }

    /// Wraps already-canonical indices; callers must uphold canonicality.
    pub(crate) fn from_idxs(f: &Field, m: [u32; 4]) -> GroupElem {
        let e = |i: u32| f.elem_at(i as u64).expect("index within field");
        GroupElem {
            a: e(m[0]),
            b: e(m[1]),
            c: e(m[2]),
            d: e(m[3]),
        }
    }
}

pub(crate) fn check_elem(f: &Field, x: FieldElem) -> Result<(), ProjlineError> {
    if x.belongs_to(f) {
        Ok(())
    } else {
        Err(ProjlineError::FieldMismatch)
    }
}

pub(crate) fn det_idx(f: &Field, m: [u32; 4]) -> u32 {
    f.subi(f.muli(m[0], m[3]), f.muli(m[1], m[2]))
}

/// Scales the first nonzero entry to 1; errors on singular input.
pub(crate) fn canon_idx(f: &Field, m: [u32; 4]) -> Result<[u32; 4], ProjlineError> {
    if det_idx(f, m) == 0 {
        return Err(ProjlineError::SingularMatrix);
    }
    let lead = m
        .iter()
        .copied()
        .find(|&e| e != 0)
        .expect("nonsingular matrix is nonzero");
    let s = f.invi(lead);
    Ok([
        f.muli(m[0], s),
        f.muli(m[1], s),
        f.muli(m[2], s),
        f.muli(m[3], s),
    ])
}

pub(crate) fn mul_idx(f: &Field, x: [u32; 4], y: [u32; 4]) -> [u32; 4] {
    let raw = [
        f.addi(f.muli(x[0], y[0]), f.muli(x[1], y[2])),
        f.addi(f.muli(x[0], y[1]), f.muli(x[1], y[3])),
        f.addi(f.muli(x[2], y[0]), f.muli(x[3], y[2])),
        f.addi(f.muli(x[2], y[1]), f.muli(x[3], y[3])),
    ];
    canon_idx(f, raw).expect("product of nonsingular matrices is nonsingular")
}

pub(crate) fn inv_idx(f: &Field, m: [u32; 4]) -> [u32; 4] {
    let adj = [m[3], f.negi(m[1]), f.negi(m[2]), m[0]];
    canon_idx(f, adj).expect("adjugate of nonsingular matrix is nonsingular")
}

/// Image of the point with index `pt` (finite `t` at `t.index()`,
/// infinity at `q`) under the matrix `m`.
pub(crate) fn act_idx(f: &Field, m: [u32; 4], pt: u32) -> u32 {
    let q = f.q() as u32;
    let (num, den) = if pt == q {
        (m[0], m[2])
    } else {
        (
            f.addi(f.muli(m[0], pt), m[1]),
            f.addi(f.muli(m[2], pt), m[3]),
        )
    };
    if den == 0 {
        q
    } else {
        f.muli(num, f.invi(den))
    }
}

pub(crate) fn identity_idx() -> [u32; 4] {
    [1, 0, 0, 1]
}

/// The unique element sending the distinct points `p1, p2, p3` to
/// `(1:0), (0:1), (1:1)`; `PGL₂` is sharply 3-transitive, so this pins
/// down a coordinate frame exactly.
pub fn standard_frame(
    f: &Field,
    p1: ProjPoint,
    p2: ProjPoint,
    p3: ProjPoint,
) -> Result<GroupElem, ProjlineError> {
    if p1 == p2 || p1 == p3 || p2 == p3 {
        return Err(ProjlineError::DegenerateFrame);
    }
    for p in [p1, p2, p3] {
        check_elem(f, p.x)?;
    }
    // Solve λ·v1 + μ·v2 = v3 in homogeneous coordinates; the matrix with
    // columns λ·v1, μ·v2 sends (1:0) ↦ p1, (0:1) ↦ p2, (1:1) ↦ p3, and
    // the frame is its inverse.
    let (v1, v2, v3) = (
        [p1.x.index() as u32, p1.y.index() as u32],
        [p2.x.index() as u32, p2.y.index() as u32],
        [p3.x.index() as u32, p3.y.index() as u32],
    );
    let det = f.subi(f.muli(v1[0], v2[1]), f.muli(v2[0], v1[1]));
    debug_assert_ne!(det, 0, "distinct points are independent");
    let det_inv = f.invi(det);
    let lambda = f.muli(f.subi(f.muli(v3[0], v2[1]), f.muli(v2[0], v3[1])), det_inv);
    let mu = f.muli(f.subi(f.muli(v1[0], v3[1]), f.muli(v3[0], v1[1])), det_inv);
    debug_assert!(lambda != 0 && mu != 0, "p3 differs from p1 and p2");
    let to_points = [
        f.muli(lambda, v1[0]),
        f.muli(mu, v2[0]),
        f.muli(lambda, v1[1]),
        f.muli(mu, v2[1]),
    ];
    Ok(GroupElem::from_idxs(f, inv_idx(f, to_points)))
}

/// Every element of `PGL₂(q)` exactly once, in lexicographic order of
/// the canonical entries: the `a = 0, b = 1` block first, then `a = 1`.
/// Length is `q³ - q`.
pub fn enumerate_group(f: &Field) -> Result<Vec<GroupElem>, ProjlineError> {
    enumerate_group_capped(f, DEFAULT_ENUM_CAP)
}

/// [`enumerate_group`] with an explicit cap on `q`.
pub fn enumerate_group_capped(f: &Field, cap: u64) -> Result<Vec<GroupElem>, ProjlineError> {
    let q = f.q();
    if q > cap {
        return Err(ProjlineError::CapExceeded { q, cap });
    }
    let qs = q as u32;
    let mut out = Vec::with_capacity((q * q * q - q) as usize);
    // a = 0 forces b = 1 (first nonzero) and c != 0 (determinant -bc).
    for c in 1..qs {
        for d in 0..qs {
            out.push(GroupElem::from_idxs(f, [0, 1, c, d]));
        }
    }
    // a = 1: determinant d - bc must not vanish.
    for b in 0..qs {
        for c in 0..qs {
            let bc = f.muli(b, c);
            for d in 0..qs {
                if d != bc {
                    out.push(GroupElem::from_idxs(f, [1, b, c, d]));
                }
            }
        }
    }
    debug_assert_eq!(out.len() as u64, q * q * q - q);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::prime_power;

    fn gf(q: u64) -> Field {
        let (p, m) = prime_power(q).unwrap();
        Field::new(p, m, None).unwrap()
    }

    fn ge(f: &Field, m: [i64; 4]) -> GroupElem {
        let e = |v: i64| f.from_coeffs(&[v]).unwrap();
        GroupElem::canon(f, e(m[0]), e(m[1]), e(m[2]), e(m[3])).unwrap()
    }

    #[test]
    fn point_canon_examples() {
        let f5 = gf(5);
        let e = |v: i64| f5.from_coeffs(&[v]).unwrap();
        let p = ProjPoint::canon(&f5, e(2), e(4)).unwrap();
        assert_eq!((p.x(), p.y()), (e(3), e(1)));

        let f11 = gf(11);
        let e11 = |v: i64| f11.from_coeffs(&[v]).unwrap();
        let inf = ProjPoint::canon(&f11, e11(7), e11(0)).unwrap();
        assert!(inf.is_infinity());
        assert_eq!(inf, ProjPoint::infinity(&f11));

        assert_eq!(
            ProjPoint::canon(&f5, f5.zero(), f5.zero()).unwrap_err(),
            ProjlineError::ZeroVector
        );
    }

    #[test]
    fn points_enumeration() {
        let f2 = gf(2);
        let pts = points(&f2);
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[0], ProjPoint::finite(&f2, f2.zero()).unwrap());
        assert_eq!(pts[1], ProjPoint::finite(&f2, f2.one()).unwrap());
        assert_eq!(pts[2], ProjPoint::infinity(&f2));

        assert_eq!(points(&gf(5)).len(), 6);
        assert_eq!(points(&gf(9)).len(), 10);

        // index/at_index are inverse bijections.
        let f9 = gf(9);
        for (i, p) in points(&f9).iter().enumerate() {
            assert_eq!(p.index(&f9), i as u32);
            assert_eq!(ProjPoint::at_index(&f9, i as u32), Some(*p));
        }
        assert_eq!(ProjPoint::at_index(&f9, 10), None);
    }

    #[test]
    fn elem_canon_examples() {
        let f11 = gf(11);
        let g = ge(&f11, [2, 4, 6, 8]);
        assert_eq!(g, ge(&f11, [1, 2, 3, 4]));

        let id = GroupElem::identity(&f11);
        assert_eq!(ge(&f11, [1, 0, 0, 1]), id);
        assert!(id.is_identity());

        let f5 = gf(5);
        let e = |v: i64| f5.from_coeffs(&[v]).unwrap();
        assert_eq!(
            GroupElem::canon(&f5, e(1), e(2), e(2), e(4)).unwrap_err(),
            ProjlineError::SingularMatrix
        );
    }

    #[test]
    fn canonicalization_idempotent_and_scale_invariant() {
        let f7 = gf(7);
        for a in 0..7i64 {
            if (5 * a - 3).rem_euclid(7) == 0 {
                continue; // singular
            }
            for scale in 1..7i64 {
                let g = ge(&f7, [a, 3, 1, 5]);
                let scaled = ge(&f7, [a * scale, 3 * scale, scale, 5 * scale]);
                assert_eq!(g, scaled, "scaling by {scale}");
                let again = GroupElem::canon(&f7, g.a(), g.b(), g.c(), g.d()).unwrap();
                assert_eq!(g, again);
            }
        }
    }

    #[test]
    fn mul_inv_examples() {
        let f2 = gf(2);
        let a = ge(&f2, [0, 1, 1, 1]);
        let a2 = a.mul(&f2, &a).unwrap();
        assert_eq!(a2, ge(&f2, [1, 1, 1, 0]));
        let a3 = a.mul(&f2, &a2).unwrap();
        assert!(a3.is_identity());

        let f5 = gf(5);
        let u = ge(&f5, [1, 1, 0, 1]);
        assert_eq!(u.inv(&f5).unwrap(), ge(&f5, [1, -1, 0, 1]));

        for q in [3u64, 4, 7] {
            let f = gf(q);
            let id = GroupElem::identity(&f);
            for g in enumerate_group(&f).unwrap() {
                assert_eq!(id.mul(&f, &g).unwrap(), g);
                assert_eq!(g.mul(&f, &g.inv(&f).unwrap()).unwrap(), id);
            }
        }
    }

    #[test]
    fn act_examples() {
        let f2 = gf(2);
        let a = ge(&f2, [0, 1, 1, 1]);
        let [p0, p1, pinf] = [
            ProjPoint::finite(&f2, f2.zero()).unwrap(),
            ProjPoint::finite(&f2, f2.one()).unwrap(),
            ProjPoint::infinity(&f2),
        ];
        assert_eq!(a.act(&f2, pinf).unwrap(), p0);
        assert_eq!(a.act(&f2, p0).unwrap(), p1);
        assert_eq!(a.act(&f2, p1).unwrap(), pinf);

        let f7 = gf(7);
        let id = GroupElem::identity(&f7);
        for p in points(&f7) {
            assert_eq!(id.act(&f7, p).unwrap(), p);
        }
        // u = (1, t; 0, 1) sends (0 : 1) to (t : 1).
        for t in 0..7i64 {
            let u = ge(&f7, [1, t, 0, 1]);
            let origin = ProjPoint::finite(&f7, f7.zero()).unwrap();
            let img = u.act(&f7, origin).unwrap();
            assert_eq!(
                img,
                ProjPoint::finite(&f7, f7.from_coeffs(&[t]).unwrap()).unwrap()
            );
        }
    }

    #[test]
    fn fixed_points_examples() {
        let f5 = gf(5);
        let parabolic = ge(&f5, [1, 1, 0, 1]);
        assert_eq!(
            parabolic.fixed_points(&f5).unwrap(),
            vec![ProjPoint::infinity(&f5)]
        );

        let f2 = gf(2);
        let a = ge(&f2, [0, 1, 1, 1]);
        assert!(a.fixed_points(&f2).unwrap().is_empty());
        assert!(a.is_fixed_point_free(&f2).unwrap());

        let id = GroupElem::identity(&f5);
        assert_eq!(id.fixed_points(&f5).unwrap().len(), 6);
        assert!(!id.is_fixed_point_free(&f5).unwrap());
        assert!(!parabolic.is_fixed_point_free(&f5).unwrap());
    }

    #[test]
    fn fixed_point_free_routes_agree() {
        // Characteristic-polynomial test vs direct scan, exhaustively.
        for q in [2u64, 3, 4, 5, 7, 8, 9] {
            let f = gf(q);
            for g in enumerate_group(&f).unwrap() {
                let scan = g.fixed_points(&f).unwrap().is_empty();
                assert_eq!(g.is_fixed_point_free(&f).unwrap(), scan, "q={q} g={g:?}");
            }
        }
    }

    #[test]
    fn fixed_point_count_bound() {
        for q in [2u64, 3, 4, 5, 7] {
            let f = gf(q);
            for g in enumerate_group(&f).unwrap() {
                let n = g.fixed_points(&f).unwrap().len();
                if g.is_identity() {
                    assert_eq!(n, q as usize + 1);
                } else {
                    assert!(n <= 2, "q={q} g={g:?} fixes {n} points");
                }
            }
        }
    }

    #[test]
    fn enumerate_group_counts() {
        for (q, n) in [(2u64, 6usize), (3, 24), (5, 120), (11, 1320)] {
            let f = gf(q);
            let all = enumerate_group(&f).unwrap();
            assert_eq!(all.len(), n);
            let mut sorted = all.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), n, "duplicates at q={q}");
            // Enumeration order is already the canonical sort order.
            assert_eq!(sorted, all);
        }
    }

    #[test]
    fn enumerate_group_cap() {
        let f = gf(67);
        assert_eq!(
            enumerate_group(&f).unwrap_err(),
            ProjlineError::CapExceeded {
                q: 67,
                cap: DEFAULT_ENUM_CAP
            }
        );
        assert!(enumerate_group_capped(&f, 67).is_ok());
    }

    #[test]
    fn elements_act_as_permutations() {
        let f = gf(4);
        let pts = points(&f);
        for g in enumerate_group(&f).unwrap() {
            let mut images: Vec<u32> = pts
                .iter()
                .map(|&p| g.act(&f, p).unwrap().index(&f))
                .collect();
            images.sort_unstable();
            let expected: Vec<u32> = (0..=f.q() as u32).collect();
            assert_eq!(images, expected);
        }
    }

    #[test]
    fn action_law_and_antihomomorphism() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move |n: u64| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state % n
        };
        for q in [2u64, 3, 4, 5, 7, 9] {
            let f = gf(q);
            let all = enumerate_group(&f).unwrap();
            let pts = points(&f);
            for _ in 0..60 {
                let g = all[next(all.len() as u64) as usize];
                let h = all[next(all.len() as u64) as usize];
                let p = pts[next(pts.len() as u64) as usize];
                let gh = g.mul(&f, &h).unwrap();
                assert_eq!(
                    gh.act(&f, p).unwrap(),
                    g.act(&f, h.act(&f, p).unwrap()).unwrap(),
                    "action law at q={q}"
                );
                assert_eq!(
                    gh.inv(&f).unwrap(),
                    h.inv(&f).unwrap().mul(&f, &g.inv(&f).unwrap()).unwrap(),
                    "inverse of product at q={q}"
                );
            }
        }
    }

    #[test]
    fn standard_frame_sends_triple_to_reference() {
        for q in [2u64, 3, 5, 9] {
            let f = gf(q);
            let pts = points(&f);
            let reference = [
                ProjPoint::infinity(&f),
                ProjPoint::finite(&f, f.zero()).unwrap(),
                ProjPoint::finite(&f, f.one()).unwrap(),
            ];
            for &p1 in &pts {
                for &p2 in &pts {
                    for &p3 in &pts {
                        if p1 == p2 || p1 == p3 || p2 == p3 {
                            continue;
                        }
                        let fr = standard_frame(&f, p1, p2, p3).unwrap();
                        let images = [
                            fr.act(&f, p1).unwrap(),
                            fr.act(&f, p2).unwrap(),
                            fr.act(&f, p3).unwrap(),
                        ];
                        assert_eq!(images, reference, "q={q}");
                    }
                }
            }
        }
        let f = gf(3);
        let inf = ProjPoint::infinity(&f);
        let zero = ProjPoint::finite(&f, f.zero()).unwrap();
        assert_eq!(
            standard_frame(&f, inf, inf, zero).unwrap_err(),
            ProjlineError::DegenerateFrame
        );
    }

    #[test]
    fn field_mismatch_rejected() {
        let f5 = gf(5);
        let f7 = gf(7);
        let g5 = GroupElem::identity(&f5);
        let g7 = GroupElem::identity(&f7);
        assert_eq!(g5.mul(&f5, &g7).unwrap_err(), ProjlineError::FieldMismatch);
        assert_eq!(
            g5.act(&f7, ProjPoint::infinity(&f7)).unwrap_err(),
            ProjlineError::FieldMismatch
        );
    }

    #[test]
    fn json_round_trip() {
        let f5 = gf(5);
        let g = ge(&f5, [2, 4, 1, 3]);
        let v = g.to_json(&f5).unwrap();
        assert_eq!(GroupElem::from_json(&f5, &v).unwrap(), g);
        // Non-canonical input canonicalizes on read.
        assert_eq!(
            GroupElem::from_json(&f5, &json!([4, 8, 2, 6])).unwrap(),
            ge(&f5, [2, 4, 1, 3])
        );

        let p = ProjPoint::finite(&f5, f5.from_coeffs(&[3]).unwrap()).unwrap();
        let pv = p.to_json(&f5).unwrap();
        assert_eq!(ProjPoint::from_json(&f5, &pv).unwrap(), p);
        assert_eq!(ProjPoint::from_json(&f5, &json!([6, 2])).unwrap(), p);

        let f9 = gf(9);
        let x = f9.from_coeffs(&[1, 2]).unwrap();
        let h = GroupElem::canon(&f9, f9.one(), x, f9.zero(), f9.one()).unwrap();
        let hv = h.to_json(&f9).unwrap();
        assert_eq!(GroupElem::from_json(&f9, &hv).unwrap(), h);
    }
}
