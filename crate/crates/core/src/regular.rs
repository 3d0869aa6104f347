//! Sharply transitive subsets of `PGL₂(K)` and the structure theory
//! that makes them cosets of subgroups.
//!
//! A set `S` of size `q + 1` is sharply transitive (here: regular) when
//! for every ordered pair of points `(x, y)` exactly one member maps `x`
//! to `y`. Two equivalent tests are implemented: the direct definition,
//! and the pairwise criterion that `h⁻¹g` is fixed-point-free for all
//! distinct `g, h ∈ S`.
//!
//! [`segre_check`] evaluates the product identity
//! `b₁d₂a₃c₄ = c₁a₂d₃b₄` on a quadruple with the zero pattern
//! `a₁ = b₂ = c₃ = d₄ = 0`; every regular set satisfies it, which is the
//! engine behind [`RegularSet::closure_witness`]: a step-by-step
//! derivation that a regular set containing the identity is closed under
//! multiplication, returning the full intermediate trace.

use std::collections::HashMap;

use serde_json::{json, Value};
use thiserror::Error;

use crate::gf::{Field, FieldElem, FieldRef, GfError};
use crate::projline::{points, GroupElem, ProjPoint, ProjlineError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegularError {
    #[error("a candidate set must have at least one member")]
    EmptySet,
    #[error("members belong to different fields")]
    MixedFields,
    #[error("element does not belong to the set's field")]
    FieldMismatch,
    #[error("argument g{position} violates the required zero pattern")]
    ZeroPatternViolation { position: usize },
    #[error("operation requires a verified regular set")]
    NotVerified,
    #[error("the set does not contain the identity")]
    NoIdentity,
    #[error("g and h must be non-identity members")]
    IdentityArgument,
    #[error("element is not a member of the set")]
    NotAMember,
    #[error("invalid encoding: {0}")]
    BadEncoding(String),
    #[error(transparent)]
    Projline(#[from] ProjlineError),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// A candidate (or verified) sharply transitive subset of `PGL₂(K)`.
///
/// Members are canonical, deduplicated, and sorted; `verified` is set
/// only by [`RegularSet::verify`] and is the trust boundary for the
/// operations that require regularity.
#[derive(Debug, Clone)]
pub struct RegularSet {
    field: FieldRef,
    members: Vec<GroupElem>,
    verified: bool,
}

/// Outcome of scanning a member list for zero-pattern quadruples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegreReport {
    /// Members with `a = 0`, `b = 0`, `c = 0`, `d = 0` respectively.
    pub pattern_counts: [usize; 4],
    /// Quadruples evaluated (all combinations across the four patterns).
    pub checked: u64,
    /// Quadruples where the product identity failed.
    pub violations: Vec<[GroupElem; 4]>,
}

impl SegreReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self, f: &Field) -> Result<Value, RegularError> {
        let mut viols = Vec::new();
        for quad in &self.violations {
            let mut row = Vec::new();
            for g in quad {
                row.push(g.to_json(f)?);
            }
            viols.push(Value::Array(row));
        }
        Ok(json!({
            "pattern_counts": self.pattern_counts,
            "checked": self.checked,
            "violations": viols,
            "passed": self.passed(),
        }))
    }
}

/// Every intermediate of the closure derivation for one pair `(g, h)`.
///
/// The derivation shows `g·h ∈ S` for a verified regular set containing
/// the identity: a table assigns to each point `x` the unique `k` with
/// `k h⁻¹ x = g x`; pigeonhole forces some `k` to serve two points,
/// which become fixed points of `g⁻¹kh⁻¹`; after a change of frame and a
/// shear `u`, four members of the transported set exhibit the zero
/// patterns of [`segre_check`], and the identity collapses `h k⁻¹ g` to
/// the identity, i.e. `k = g·h`.
#[derive(Debug, Clone)]
pub struct ClosureTrace {
    pub g: GroupElem,
    pub h: GroupElem,
    /// The member agreeing with `g·h`; the derivation's conclusion.
    pub k: GroupElem,
    /// `k_table[i]` is the unique member with `k h⁻¹ x = g x` for the
    /// point `x` of index `i`.
    pub k_table: Vec<GroupElem>,
    /// Number of distinct values in `k_table`; at most `q`.
    pub distinct_k: usize,
    /// Two points where `k` is attained: fixed points of `g⁻¹kh⁻¹`.
    pub fixed_pair: (ProjPoint, ProjPoint),
    /// Change of coordinates sending `fixed_pair.0 ↦ (1:0)` and its
    /// image under `g` to `(0:1)`.
    pub frame: GroupElem,
    /// The shear `(1 t; 0 1)` aligning `h` with the zero pattern.
    pub u: GroupElem,
    /// Zero-pattern members of the transported set: `gu, ku, u, hu` in
    /// frame coordinates, with `a₁ = b₂ = c₃ = d₄ = 0`.
    pub witnesses: [GroupElem; 4],
    /// Product identity evaluated on `witnesses`.
    pub segre_holds: bool,
    /// `h·k⁻¹·g`; the identity exactly when `k = g·h`.
    pub residual: GroupElem,
}

impl ClosureTrace {
    pub fn residual_is_identity(&self) -> bool {
        self.residual.is_identity()
    }

    pub fn to_json(&self, f: &Field) -> Result<Value, RegularError> {
        let table: Result<Vec<Value>, RegularError> = self
            .k_table
            .iter()
            .enumerate()
            .map(|(i, k)| {
                let pt = ProjPoint::at_index(f, i as u32).expect("table indexed by points");
                Ok(json!({ "x": pt.to_json(f)?, "k": k.to_json(f)? }))
            })
            .collect();
        let witnesses: Result<Vec<Value>, RegularError> =
            self.witnesses.iter().map(|w| Ok(w.to_json(f)?)).collect();
        Ok(json!({
            "g": self.g.to_json(f)?,
            "h": self.h.to_json(f)?,
            "k": self.k.to_json(f)?,
            "k_table": table?,
            "distinct_k": self.distinct_k,
            "fixed_pair": [self.fixed_pair.0.to_json(f)?, self.fixed_pair.1.to_json(f)?],
            "frame": self.frame.to_json(f)?,
            "u": self.u.to_json(f)?,
            "witnesses": witnesses?,
            "segre_holds": self.segre_holds,
            "residual": self.residual.to_json(f)?,
            "residual_is_identity": self.residual_is_identity(),
        }))
    }
}

impl RegularSet {
    /// Builds an unverified candidate set: canonical members, sorted,
    /// duplicates removed.
    pub fn new(field: FieldRef, members: Vec<GroupElem>) -> Result<RegularSet, RegularError> {
        if members.is_empty() {
            return Err(RegularError::EmptySet);
        }
        for g in &members {
            if !g.a().belongs_to(&field) {
                return Err(RegularError::MixedFields);
            }
        }
        let mut members = members;
        members.sort();
        members.dedup();
        Ok(RegularSet {
            field,
            members,
            verified: false,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn field_ref(&self) -> FieldRef {
        self.field.clone()
    }

    pub fn members(&self) -> &[GroupElem] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn verified(&self) -> bool {
        self.verified
    }

    pub fn contains(&self, g: &GroupElem) -> bool {
        self.members.binary_search(g).is_ok()
    }

    /// Member at `index` in the canonical sorted order.
    pub fn member(&self, index: usize) -> Option<&GroupElem> {
        self.members.get(index)
    }

    /// Tests sharp transitivity by the pairwise criterion (`|S| = q+1`
    /// and every quotient `h⁻¹g` of distinct members fixed-point-free)
    /// and stamps the `verified` flag with the outcome.
    ///
    /// [`RegularSet::sharply_transitive_direct`] is the independent
    /// implementation of the definition; the two agree on every input.
    pub fn verify(&mut self) -> bool {
        self.verified = self.pairwise_fixed_point_free();
        self.verified
    }

    fn pairwise_fixed_point_free(&self) -> bool {
        let f = &*self.field;
        if self.members.len() as u64 != f.q() + 1 {
            return false;
        }
        for (i, g) in self.members.iter().enumerate() {
            for h in &self.members[i + 1..] {
                let quot = h
                    .inv(f)
                    .and_then(|hi| hi.mul(f, g))
                    .expect("members share the set's field");
                if !quot.is_fixed_point_free(f).expect("same field") {
                    return false;
                }
            }
        }
        true
    }

    /// The definition verbatim: for every ordered pair of points exactly
    /// one member maps the first to the second.
    pub fn sharply_transitive_direct(&self) -> bool {
        let f = &*self.field;
        let n = f.q() as usize + 1;
        if self.members.len() != n {
            return false;
        }
        let mut counts = vec![0u32; n * n];
        for g in &self.members {
            let m = g.idxs();
            for x in 0..n {
                let y = crate::projline::act_idx(f, m, x as u32) as usize;
                counts[x * n + y] += 1;
            }
        }
        counts.iter().all(|&c| c == 1)
    }

    fn require_verified(&self) -> Result<(), RegularError> {
        if self.verified {
            Ok(())
        } else {
            Err(RegularError::NotVerified)
        }
    }

    /// Scans the members for zero-pattern quadruples and evaluates the
    /// product identity on each. Requires a verified set; for arbitrary
    /// member lists use [`segre_scan_members`].
    pub fn segre_scan(&self) -> Result<SegreReport, RegularError> {
        self.require_verified()?;
        segre_scan_members(&self.field, &self.members)
    }

    /// Whether the identity is a member and the set is closed under
    /// multiplication. A nonempty finite subset of a group closed under
    /// multiplication contains inverses (powers of each element cycle),
    /// so closure alone makes it a subgroup.
    pub fn is_subgroup(&self) -> Result<bool, RegularError> {
        self.require_verified()?;
        let f = &*self.field;
        if !self.contains(&GroupElem::identity(f)) {
            return Ok(false);
        }
        for g in &self.members {
            for h in &self.members {
                if !self.contains(&g.mul(f, h)?) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Right-translated set `S·u`, re-verified. Translation preserves
    /// regularity, so the result of translating a verified set is again
    /// verified.
    pub fn translate_right(&self, u: &GroupElem) -> Result<RegularSet, RegularError> {
        let f = &*self.field;
        let members: Result<Vec<GroupElem>, ProjlineError> =
            self.members.iter().map(|g| g.mul(f, u)).collect();
        let mut out = RegularSet::new(self.field.clone(), members?)?;
        out.verify();
        Ok(out)
    }

    /// Left-translated set `u·S`, re-verified.
    pub fn translate_left(&self, u: &GroupElem) -> Result<RegularSet, RegularError> {
        let f = &*self.field;
        let members: Result<Vec<GroupElem>, ProjlineError> =
            self.members.iter().map(|g| u.mul(f, g)).collect();
        let mut out = RegularSet::new(self.field.clone(), members?)?;
        out.verify();
        Ok(out)
    }

    /// Elementwise inverse `S⁻¹`, re-verified. Regular sets are closed
    /// under this: `h⁻¹x = g⁻¹x` would give `g h⁻¹` a fixed point `h⁻¹x`.
    pub fn inverse_set(&self) -> Result<RegularSet, RegularError> {
        let f = &*self.field;
        let members: Result<Vec<GroupElem>, ProjlineError> =
            self.members.iter().map(|g| g.inv(f)).collect();
        let mut out = RegularSet::new(self.field.clone(), members?)?;
        out.verify();
        Ok(out)
    }

    /// Conjugated set `t·S·t⁻¹`, re-verified.
    pub fn conjugate(&self, t: &GroupElem) -> Result<RegularSet, RegularError> {
        let f = &*self.field;
        let ti = t.inv(f)?;
        let members: Result<Vec<GroupElem>, ProjlineError> = self
            .members
            .iter()
            .map(|g| t.mul(f, g).and_then(|tg| tg.mul(f, &ti)))
            .collect();
        let mut out = RegularSet::new(self.field.clone(), members?)?;
        out.verify();
        Ok(out)
    }

    /// Writes `S = H·s` with `H` a verified regular set containing the
    /// identity (hence a subgroup). `s` is the identity when present,
    /// making the decomposition trivial; otherwise `s` is the least
    /// member and `H = S·s⁻¹`.
    pub fn coset_decompose(&self) -> Result<(RegularSet, GroupElem), RegularError> {
        self.require_verified()?;
        let f = &*self.field;
        let id = GroupElem::identity(f);
        let s = if self.contains(&id) {
            id
        } else {
            self.members[0]
        };
        let h = self.translate_right(&s.inv(f)?)?;
        debug_assert!(h.verified, "translate of a regular set is regular");
        Ok((h, s))
    }

    /// Left-handed variant: `S = s·H` with `H = s⁻¹·S` a subgroup.
    pub fn coset_decompose_left(&self) -> Result<(GroupElem, RegularSet), RegularError> {
        self.require_verified()?;
        let f = &*self.field;
        let id = GroupElem::identity(f);
        let s = if self.contains(&id) {
            id
        } else {
            self.members[0]
        };
        let h = self.translate_left(&s.inv(f)?)?;
        debug_assert!(h.verified, "translate of a regular set is regular");
        Ok((s, h))
    }

    /// The unique member mapping `x` to `y`. Requires a verified set.
    pub fn member_mapping(&self, x: ProjPoint, y: ProjPoint) -> Result<GroupElem, RegularError> {
        self.require_verified()?;
        let f = &*self.field;
        for g in &self.members {
            if g.act(f, x)? == y {
                return Ok(*g);
            }
        }
        unreachable!("a verified regular set maps every point to every point")
    }

    /// Runs the closure derivation for non-identity members `g, h` of a
    /// verified set containing the identity, returning the full trace.
    /// The trace ends with `residual = h·k⁻¹·g` equal to the identity
    /// and `k = g·h`, certifying closure pair by pair.
    pub fn closure_witness(
        &self,
        g: &GroupElem,
        h: &GroupElem,
    ) -> Result<ClosureTrace, RegularError> {
        self.require_verified()?;
        let f = &*self.field;
        let id = GroupElem::identity(f);
        if !self.contains(&id) {
            return Err(RegularError::NoIdentity);
        }
        if g.is_identity() || h.is_identity() {
            return Err(RegularError::IdentityArgument);
        }
        if !self.contains(g) || !self.contains(h) {
            return Err(RegularError::NotAMember);
        }

        let pts = points(f);
        let h_inv = h.inv(f)?;

        // Per point x, the unique k with k h⁻¹ x = g x; k avoids both g
        // (else h would fix x) and h (else g would fix x).
        let mut k_table = Vec::with_capacity(pts.len());
        for &x in &pts {
            let k = self.member_mapping(h_inv.act(f, x)?, g.act(f, x)?)?;
            assert!(
                k != *g && k != *h,
                "g and h are fixed-point-free, so k avoids them"
            );
            k_table.push(k);
        }
        let mut seen: HashMap<GroupElem, usize> = HashMap::new();
        for &k in &k_table {
            *seen.entry(k).or_insert(0) += 1;
        }
        let distinct_k = seen.len();
        assert!(
            distinct_k <= f.q() as usize,
            "k ranges over at most q members"
        );

        // Pigeonhole: the first point (in point order) whose k value
        // reappears later. Both points are fixed by g⁻¹kh⁻¹.
        let (xi, yi, k) = k_table
            .iter()
            .enumerate()
            .find_map(|(i, ki)| {
                k_table[i + 1..]
                    .iter()
                    .position(|kj| kj == ki)
                    .map(|off| (i, i + 1 + off, *ki))
            })
            .expect("q+1 points over at most q values repeat");
        let x = pts[xi];
        let y = pts[yi];
        let phi = g.inv(f)?.mul(f, &k)?.mul(f, &h_inv)?;
        debug_assert_eq!(phi.act(f, x)?, x);
        debug_assert_eq!(phi.act(f, y)?, y);

        // Frame: x ↦ (1:0), gx ↦ (0:1); the first other point ↦ (1:1)
        // pins down the scalar freedom deterministically.
        let gx = g.act(f, x)?;
        debug_assert_ne!(x, gx, "g is fixed-point-free");
        let third = pts
            .iter()
            .copied()
            .find(|&p| p != x && p != gx)
            .expect("the line has at least three points");
        let frame = crate::projline::standard_frame(f, x, gx, third)?;
        let frame_inv = frame.inv(f)?;
        let conj = |e: &GroupElem| -> Result<GroupElem, RegularError> {
            Ok(frame.mul(f, e)?.mul(f, &frame_inv)?)
        };
        let gc = conj(g)?;
        let hc = conj(h)?;
        let kc = conj(&k)?;

        // In frame coordinates g(1:0) = (0:1), so gc has a = 0, and
        // h has no fixed points, so hc has c ≠ 0. The shear u = (1 t; 0 1)
        // with t = -d/c (entries of hc) gives hu(0:1) = (1:0).
        assert!(gc.a().is_zero(), "frame sends x to (1:0) and gx to (0:1)");
        assert!(!hc.c().is_zero(), "h moves the point (1:0) of the frame");
        let t = f.neg(f.mul(hc.d(), f.inv(hc.c())?)?)?;
        let u = GroupElem::canon(f, f.one(), t, f.zero(), f.one())?;

        // The transported set (frame)S(frame)⁻¹·u contains the four
        // zero-pattern witnesses gu, ku, u, hu.
        let witnesses = [gc.mul(f, &u)?, kc.mul(f, &u)?, u, hc.mul(f, &u)?];
        assert!(witnesses[0].a().is_zero(), "gu has upper-left zero");
        assert!(witnesses[1].b().is_zero(), "ku has upper-right zero");
        assert!(witnesses[2].c().is_zero(), "u has lower-left zero");
        assert!(witnesses[3].d().is_zero(), "hu has lower-right zero");
        let segre_holds = segre_check(
            f,
            &witnesses[0],
            &witnesses[1],
            &witnesses[2],
            &witnesses[3],
        )?;

        let residual = h.mul(f, &k.inv(f)?)?.mul(f, g)?;

        Ok(ClosureTrace {
            g: *g,
            h: *h,
            k,
            k_table,
            distinct_k,
            fixed_pair: (x, y),
            frame,
            u,
            witnesses,
            segre_holds,
            residual,
        })
    }

    /// JSON form `{"field": {...}, "members": [[a,b,c,d], ...]}`.
    pub fn to_json(&self) -> Result<Value, RegularError> {
        let f = &*self.field;
        let members: Result<Vec<Value>, RegularError> =
            self.members.iter().map(|g| Ok(g.to_json(f)?)).collect();
        Ok(json!({ "field": f.spec().to_json(), "members": members? }))
    }

    /// Parses a candidate set; members are canonicalized and sorted, and
    /// the result is unverified (call [`RegularSet::verify`]).
    pub fn from_json(v: &Value) -> Result<RegularSet, RegularError> {
        let obj = v
            .as_object()
            .ok_or_else(|| RegularError::BadEncoding("set must be an object".into()))?;
        let field_v = obj
            .get("field")
            .ok_or_else(|| RegularError::BadEncoding("missing \"field\"".into()))?;
        let field: FieldRef = std::sync::Arc::new(Field::from_json(field_v)?);
        let members_v = obj
            .get("members")
            .and_then(Value::as_array)
            .ok_or_else(|| RegularError::BadEncoding("missing \"members\" array".into()))?;
        let mut members = Vec::with_capacity(members_v.len());
        for m in members_v {
            members.push(GroupElem::from_json(&field, m)?);
        }
        RegularSet::new(field, members)
    }
}

/// Evaluates the product identity `b₁d₂a₃c₄ = c₁a₂d₃b₄` on a quadruple
/// with the zero pattern `a₁ = b₂ = c₃ = d₄ = 0`. The coincidences
/// `g1 = g4` and `g2 = g3` are allowed; a wrong zero pattern is an
/// error, not `false`.
pub fn segre_check(
    f: &Field,
    g1: &GroupElem,
    g2: &GroupElem,
    g3: &GroupElem,
    g4: &GroupElem,
) -> Result<bool, RegularError> {
    segre_check_entries(f, g1.entries(), g2.entries(), g3.entries(), g4.entries())
}

/// [`segre_check`] on raw matrix entries. The relation is degree-1
/// homogeneous in each argument, so any scalar representatives give the
/// same answer; this entry point exists to state that property without
/// canonicalization getting in the way.
pub fn segre_check_entries(
    f: &Field,
    e1: [FieldElem; 4],
    e2: [FieldElem; 4],
    e3: [FieldElem; 4],
    e4: [FieldElem; 4],
) -> Result<bool, RegularError> {
    for (position, (entries, zero_slot)) in [(e1, 0usize), (e2, 1), (e3, 2), (e4, 3)]
        .into_iter()
        .enumerate()
    {
        if !entries[zero_slot].is_zero() {
            return Err(RegularError::ZeroPatternViolation {
                position: position + 1,
            });
        }
    }
    let [_, b1, c1, _] = e1;
    let [a2, _, _, d2] = e2;
    let [a3, _, _, d3] = e3;
    let [_, b4, c4, _] = e4;
    let lhs = f.mul(f.mul(b1, d2)?, f.mul(a3, c4)?)?;
    let rhs = f.mul(f.mul(c1, a2)?, f.mul(d3, b4)?)?;
    Ok(lhs == rhs)
}

/// Scans an arbitrary member list: collects the members matching each of
/// the four zero patterns and evaluates [`segre_check`] on every
/// combination. Verified regular sets produce zero violations.
pub fn segre_scan_members(f: &Field, members: &[GroupElem]) -> Result<SegreReport, RegularError> {
    let with_a0: Vec<&GroupElem> = members.iter().filter(|g| g.a().is_zero()).collect();
    let with_b0: Vec<&GroupElem> = members.iter().filter(|g| g.b().is_zero()).collect();
    let with_c0: Vec<&GroupElem> = members.iter().filter(|g| g.c().is_zero()).collect();
    let with_d0: Vec<&GroupElem> = members.iter().filter(|g| g.d().is_zero()).collect();
    let pattern_counts = [with_a0.len(), with_b0.len(), with_c0.len(), with_d0.len()];
    let mut checked = 0u64;
    let mut violations = Vec::new();
    for &g1 in &with_a0 {
        for &g2 in &with_b0 {
            for &g3 in &with_c0 {
                for &g4 in &with_d0 {
                    checked += 1;
                    if !segre_check(f, g1, g2, g3, g4)? {
                        violations.push([*g1, *g2, *g3, *g4]);
                    }
                }
            }
        }
    }
    Ok(SegreReport {
        pattern_counts,
        checked,
        violations,
    })
}
