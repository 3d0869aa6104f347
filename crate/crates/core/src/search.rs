//! Exhaustive enumeration of sharply transitive subsets for small `q`,
//! plus the Latin-square correspondence.
//!
//! A sharply transitive set hits each "bucket" `{g : g(x₀) = y}` exactly
//! once, where `x₀ = (0:1)` is a fixed base point, so the search chooses
//! one element per bucket by depth-first backtracking. Two elements can
//! coexist only if they disagree at every point of the line (their
//! quotient is fixed-point-free); these pairwise compatibilities are
//! precomputed as bitsets over the `q² − q` elements of each bucket, so
//! the inner pruning loop is a handful of word operations. Results
//! stream in a canonical order that is a pure function of `q`: buckets
//! in point order, candidates within a bucket in canonical element
//! order. Worker threads split the tree at the first unforced depth and
//! a coordinator re-merges subtree results in order, so any worker count
//! yields the identical stream. Optional symmetry reduction searches
//! only stabilizer-orbit representatives at the split depth and
//! reconstructs the full orbit of every solution before emission.
//!
//! The exhaustive cap defaults to `q ≤ 11` and can be overridden with
//! the `SHARPLY_ENUM_CAP` environment variable (an integer).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc::{sync_channel, Receiver};
use std::sync::Arc;
use std::thread::JoinHandle;

use serde_json::{json, Value};
use thiserror::Error;

use crate::classify::{conjugacy_classes, subgroup_type, ClassifyError, SubgroupType};
use crate::gf::FieldRef;
use crate::projline::{
    act_idx, enumerate_group_capped, identity_idx, inv_idx, mul_idx, GroupElem, ProjlineError,
};
use crate::regular::{RegularError, RegularSet};

/// Largest `q` enumerated exhaustively unless overridden; `q ≤ 9` is
/// fast, `q = 11` takes minutes at worst.
pub const DEFAULT_EXHAUSTIVE_CAP: u64 = 11;

/// Environment variable overriding the exhaustive cap (integer value).
pub const ENUM_CAP_ENV: &str = "SHARPLY_ENUM_CAP";

/// Effective exhaustive cap: the environment override when it parses as
/// an integer, the default otherwise.
pub fn exhaustive_cap() -> u64 {
    cap_from(std::env::var(ENUM_CAP_ENV).ok().as_deref())
}

fn cap_from(raw: Option<&str>) -> u64 {
    raw.and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_EXHAUSTIVE_CAP)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error(
        "exhaustive enumeration at q = {q} exceeds the cap {cap} (set {ENUM_CAP_ENV} to raise it)"
    )]
    CapExceeded { q: u64, cap: u64 },
    #[error("expected a set of size {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("worker_count must be positive")]
    InvalidWorkerCount,
    #[error(transparent)]
    Regular(#[from] RegularError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Projline(#[from] ProjlineError),
}

/// Settings for the backtracking enumeration.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub field: FieldRef,
    /// Restrict to sets containing the identity (forced at the bucket
    /// fixing the base point).
    pub require_identity: bool,
    /// Stop the stream after this many sets.
    pub limit: Option<usize>,
    /// Search only stabilizer-orbit representatives at the first
    /// unforced depth and re-expand orbits before emission; a pure
    /// speedup, the result stream is identical.
    pub symmetry_reduction: bool,
    pub worker_count: usize,
}

impl SearchConfig {
    pub fn new(field: FieldRef) -> SearchConfig {
        SearchConfig {
            field,
            require_identity: true,
            limit: None,
            symmetry_reduction: false,
            worker_count: 1,
        }
    }

    pub fn with_require_identity(mut self, v: bool) -> SearchConfig {
        self.require_identity = v;
        self
    }

    pub fn with_limit(mut self, v: Option<usize>) -> SearchConfig {
        self.limit = v;
        self
    }

    pub fn with_symmetry_reduction(mut self, v: bool) -> SearchConfig {
        self.symmetry_reduction = v;
        self
    }

    pub fn with_workers(mut self, v: usize) -> SearchConfig {
        self.worker_count = v;
        self
    }
}

/// Immutable tables shared by all workers: bucketed elements and the
/// pairwise-compatibility bitsets.
struct SearchTables {
    field: FieldRef,
    /// Number of points and buckets, `q + 1`.
    n: usize,
    /// Bucket size, `q² − q`.
    bs: usize,
    /// Words per bucket bitset.
    wpb: usize,
    /// `buckets[j]` lists the matrices sending the base point to point
    /// `j`, in canonical order.
    buckets: Vec<Vec<[u32; 4]>>,
    /// Row for element `(j, i)` starts at `(j·bs + i)·n·wpb`; bit `i'`
    /// of bucket segment `k` is set iff the elements disagree at every
    /// point.
    compat: Vec<u64>,
    /// Position of the identity within bucket 0.
    id_local: u32,
}

impl SearchTables {
    fn build(field: &FieldRef) -> Result<SearchTables, SearchError> {
        let f = field;
        let q = f.q();
        let n = (q + 1) as usize;
        let bs = (q * q - q) as usize;
        let wpb = bs.div_ceil(64);
        let elems = enumerate_group_capped(f, q)?;

        let mut buckets: Vec<Vec<[u32; 4]>> = vec![Vec::with_capacity(bs); n];
        let mut perms: Vec<Vec<Vec<u32>>> = vec![Vec::with_capacity(bs); n];
        for g in &elems {
            let m = g.idxs();
            let perm: Vec<u32> = (0..n as u32).map(|x| act_idx(f, m, x)).collect();
            let j = perm[0] as usize;
            buckets[j].push(m);
            perms[j].push(perm);
        }
        debug_assert!(buckets.iter().all(|b| b.len() == bs));

        let row_len = n * wpb;
        let mut compat = vec![0u64; n * bs * row_len];
        for j in 0..n {
            for k in j + 1..n {
                for (i, pi) in perms[j].iter().enumerate() {
                    for (i2, pi2) in perms[k].iter().enumerate() {
                        if pi.iter().zip(pi2).all(|(a, b)| a != b) {
                            compat[(j * bs + i) * row_len + k * wpb + i2 / 64] |= 1u64 << (i2 % 64);
                            compat[(k * bs + i2) * row_len + j * wpb + i / 64] |= 1u64 << (i % 64);
                        }
                    }
                }
            }
        }

        let id_local = buckets[0]
            .binary_search(&identity_idx())
            .expect("identity fixes the base point") as u32;
        Ok(SearchTables {
            field: field.clone(),
            n,
            bs,
            wpb,
            buckets,
            compat,
            id_local,
        })
    }

    fn row(&self, j: usize, i: usize) -> &[u64] {
        let len = self.n * self.wpb;
        let base = (j * self.bs + i) * len;
        &self.compat[base..base + len]
    }

    /// Bucket masks at the first unforced depth: full buckets, with the
    /// identity's compatibility row applied when it is forced.
    fn split_masks(&self, require_identity: bool) -> Vec<u64> {
        let (n, bs, wpb) = (self.n, self.bs, self.wpb);
        let mut masks = vec![0u64; n * wpb];
        for k in 0..n {
            for i in 0..bs {
                masks[k * wpb + i / 64] |= 1u64 << (i % 64);
            }
        }
        if require_identity {
            let row = self.row(0, self.id_local as usize);
            for k in 1..n {
                for w in 0..wpb {
                    masks[k * wpb + w] &= row[k * wpb + w];
                }
            }
            masks[..wpb].fill(0);
            masks[(self.id_local / 64) as usize] = 1u64 << (self.id_local % 64);
        }
        masks
    }

    fn local_index(&self, j: usize, m: &[u32; 4]) -> u32 {
        self.buckets[j]
            .binary_search(m)
            .expect("element belongs to its bucket") as u32
    }
}

/// Depth-first backtracking over buckets with incremental mask
/// intersection; one instance per worker subtree.
struct Dfs<'a> {
    t: &'a SearchTables,
    stop: &'a AtomicBool,
    /// `(n+1)` levels of per-bucket masks, each `n · wpb` words.
    masks: Vec<u64>,
    chosen: Vec<u32>,
    out: Vec<RegularSet>,
}

impl Dfs<'_> {
    fn search(&mut self, depth: usize) {
        if self.stop.load(Ordering::Relaxed) {
            return;
        }
        let t = self.t;
        if depth == t.n {
            self.emit();
            return;
        }
        let (n, wpb) = (t.n, t.wpb);
        let own = depth * n * wpb + depth * wpb;
        for wi in 0..wpb {
            let mut w = self.masks[own + wi];
            while w != 0 {
                let i = wi as u32 * 64 + w.trailing_zeros();
                w &= w - 1;
                self.chosen[depth] = i;
                if self.intersect(depth, i as usize) {
                    self.search(depth + 1);
                }
                if self.stop.load(Ordering::Relaxed) {
                    return;
                }
            }
        }
    }

    /// Builds the next level's masks for buckets past `depth`; false
    /// means some bucket ran empty and the candidate is pruned.
    fn intersect(&mut self, depth: usize, i: usize) -> bool {
        let t = self.t;
        let (n, wpb) = (t.n, t.wpb);
        let row = t.row(depth, i);
        let cur = depth * n * wpb;
        let child = (depth + 1) * n * wpb;
        for k in depth + 1..n {
            let mut any = 0u64;
            for w in 0..wpb {
                let v = self.masks[cur + k * wpb + w] & row[k * wpb + w];
                self.masks[child + k * wpb + w] = v;
                any |= v;
            }
            if any == 0 {
                return false;
            }
        }
        true
    }

    fn emit(&mut self) {
        let t = self.t;
        let members: Vec<GroupElem> = self
            .chosen
            .iter()
            .enumerate()
            .map(|(j, &i)| GroupElem::from_idxs(&t.field, t.buckets[j][i as usize]))
            .collect();
        let mut s =
            RegularSet::new(t.field.clone(), members).expect("search members share one field");
        let ok = s.verify();
        assert!(ok, "search emits only pairwise-compatible sets");
        debug_assert!(s.sharply_transitive_direct());
        self.out.push(s);
    }
}

/// Runs the subtree rooted at choosing candidate `item` at the first
/// unforced depth.
fn solve_item(
    t: &SearchTables,
    require_identity: bool,
    split_masks: &[u64],
    item: u32,
    stop: &AtomicBool,
) -> Vec<RegularSet> {
    let (n, wpb) = (t.n, t.wpb);
    let d0 = usize::from(require_identity);
    let mut dfs = Dfs {
        t,
        stop,
        masks: vec![0u64; (n + 1) * n * wpb],
        chosen: vec![0u32; n],
        out: Vec::new(),
    };
    let base = d0 * n * wpb;
    dfs.masks[base..base + n * wpb].copy_from_slice(split_masks);
    if require_identity {
        dfs.chosen[0] = t.id_local;
    }
    for w in 0..wpb {
        dfs.masks[base + d0 * wpb + w] = 0;
    }
    dfs.masks[base + d0 * wpb + (item / 64) as usize] = 1u64 << (item % 64);
    dfs.search(d0);
    dfs.out
}

fn conj_matrix(f: &crate::gf::Field, u: [u32; 4], m: [u32; 4]) -> [u32; 4] {
    mul_idx(f, mul_idx(f, u, m), inv_idx(f, u))
}

/// Stabilizer used for symmetry reduction at the split depth: the full
/// base-point stabilizer when nothing is forced, the two-point
/// stabilizer of base point and first image point when the identity
/// occupies depth 0. Conjugation by it permutes solutions and fixes the
/// split bucket setwise.
fn split_stabilizer(t: &SearchTables, require_identity: bool) -> Vec<[u32; 4]> {
    let f: &crate::gf::Field = &t.field;
    if require_identity {
        t.buckets[0]
            .iter()
            .copied()
            .filter(|&m| act_idx(f, m, 1) == 1)
            .collect()
    } else {
        t.buckets[0].clone()
    }
}

/// Orbit partition of the split-depth candidates under conjugation by
/// the split stabilizer. Returns ascending orbit representatives and,
/// per representative, the ascending candidate list of its orbit.
fn split_orbits(
    t: &SearchTables,
    items: &[u32],
    stab: &[[u32; 4]],
    d0: usize,
) -> (Vec<u32>, BTreeMap<u32, Vec<u32>>) {
    let f: &crate::gf::Field = &t.field;
    let mut rep_of: HashMap<u32, u32> = HashMap::new();
    let mut reps = Vec::new();
    let mut orbit_items: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &item in items {
        if rep_of.contains_key(&item) {
            continue;
        }
        let g = t.buckets[d0][item as usize];
        let mut orbit: Vec<u32> = stab
            .iter()
            .map(|&u| t.local_index(d0, &conj_matrix(f, u, g)))
            .collect();
        orbit.sort_unstable();
        orbit.dedup();
        for &o in &orbit {
            rep_of.insert(o, item);
        }
        reps.push(item);
        orbit_items.insert(item, orbit);
    }
    (reps, orbit_items)
}

/// Full stabilizer orbit of each solution from a representative
/// subtree, grouped by the orbit member's own split-depth candidate and
/// ordered exactly as the unreduced search would emit them.
fn expand_orbit(
    t: &SearchTables,
    stab: &[[u32; 4]],
    d0: usize,
    sols: Vec<RegularSet>,
) -> BTreeMap<u32, Vec<RegularSet>> {
    let f: &crate::gf::Field = &t.field;
    let mut seen: HashSet<Vec<[u32; 4]>> = HashSet::new();
    let mut grouped: BTreeMap<u32, Vec<(Vec<u32>, RegularSet)>> = BTreeMap::new();
    for s in sols {
        let mats: Vec<[u32; 4]> = s.members().iter().map(|g| g.idxs()).collect();
        for &u in stab {
            let mut conj: Vec<[u32; 4]> = mats.iter().map(|&m| conj_matrix(f, u, m)).collect();
            conj.sort_unstable();
            if !seen.insert(conj.clone()) {
                continue;
            }
            // Choice tuple: each member's local index within its bucket,
            // in bucket order; this is the unreduced DFS emission key.
            let mut key = vec![0u32; t.n];
            for &m in &conj {
                let j = act_idx(f, m, 0) as usize;
                key[j] = t.local_index(j, &m);
            }
            let item = key[d0];
            let members: Vec<GroupElem> =
                conj.iter().map(|&m| GroupElem::from_idxs(f, m)).collect();
            let mut set =
                RegularSet::new(t.field.clone(), members).expect("conjugates share the field");
            let ok = set.verify();
            assert!(ok, "conjugates of regular sets are regular");
            grouped.entry(item).or_default().push((key, set));
        }
    }
    grouped
        .into_iter()
        .map(|(item, mut v)| {
            v.sort_by(|a, b| a.0.cmp(&b.0));
            (item, v.into_iter().map(|(_, s)| s).collect())
        })
        .collect()
}

/// Streaming handle over enumerated sets; dropping it stops the search.
pub struct RegularSetStream {
    rx: Option<Receiver<RegularSet>>,
    stop: Arc<AtomicBool>,
    handles: Vec<JoinHandle<()>>,
}

impl Iterator for RegularSetStream {
    type Item = RegularSet;

    fn next(&mut self) -> Option<RegularSet> {
        self.rx.as_ref()?.recv().ok()
    }
}

impl Drop for RegularSetStream {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        self.rx = None;
        for h in self.handles.drain(..) {
            let _ = h.join();
        }
    }
}

/// Emits every sharply transitive subset of `PGL₂(q)` (containing the
/// identity when required) exactly once, in an order that is a pure
/// function of `q`, independent of worker count and symmetry reduction.
pub fn enumerate_regular_sets(config: &SearchConfig) -> Result<RegularSetStream, SearchError> {
    let q = config.field.q();
    let cap = exhaustive_cap();
    if q > cap {
        return Err(SearchError::CapExceeded { q, cap });
    }
    if config.worker_count == 0 {
        return Err(SearchError::InvalidWorkerCount);
    }

    let t = Arc::new(SearchTables::build(&config.field)?);
    let require_identity = config.require_identity;
    let symmetry = config.symmetry_reduction;
    let limit = config.limit;
    let d0 = usize::from(require_identity);
    let split_masks = Arc::new(t.split_masks(require_identity));

    let items: Vec<u32> = {
        let (wpb, bs) = (t.wpb, t.bs);
        (0..bs as u32)
            .filter(|&i| split_masks[d0 * wpb + (i / 64) as usize] >> (i % 64) & 1 == 1)
            .collect()
    };
    let stab = if symmetry {
        split_stabilizer(&t, require_identity)
    } else {
        Vec::new()
    };
    let (reps, orbit_items) = if symmetry {
        split_orbits(&t, &items, &stab, d0)
    } else {
        (items.clone(), items.iter().map(|&i| (i, vec![i])).collect())
    };

    let stop = Arc::new(AtomicBool::new(false));
    let (tx_out, rx_out) = sync_channel::<RegularSet>(256);
    let (tx_res, rx_res) = std::sync::mpsc::channel::<(u32, Vec<RegularSet>)>();
    let next_rep = Arc::new(AtomicUsize::new(0));
    let reps = Arc::new(reps);

    let mut handles = Vec::new();
    let workers = config.worker_count.min(reps.len().max(1));
    for _ in 0..workers {
        let t = Arc::clone(&t);
        let reps = Arc::clone(&reps);
        let next_rep = Arc::clone(&next_rep);
        let stop = Arc::clone(&stop);
        let split_masks = Arc::clone(&split_masks);
        let tx_res = tx_res.clone();
        handles.push(std::thread::spawn(move || loop {
            let i = next_rep.fetch_add(1, Ordering::Relaxed);
            if i >= reps.len() || stop.load(Ordering::Relaxed) {
                break;
            }
            let rep = reps[i];
            let sols = solve_item(&t, require_identity, &split_masks, rep, &stop);
            if tx_res.send((rep, sols)).is_err() {
                break;
            }
        }));
    }
    drop(tx_res);

    let coord_stop = Arc::clone(&stop);
    let coord = std::thread::spawn(move || {
        let total_items = items.len();
        let pos: HashMap<u32, usize> = items.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let mut slots: Vec<Option<Vec<RegularSet>>> = (0..total_items).map(|_| None).collect();
        let mut ptr = 0usize;
        let mut emitted = 0usize;
        'recv: while let Ok((rep, sols)) = rx_res.recv() {
            let mut expanded = if symmetry {
                expand_orbit(&t, &stab, d0, sols)
            } else {
                BTreeMap::from([(rep, sols)])
            };
            for &item in &orbit_items[&rep] {
                slots[pos[&item]] = Some(expanded.remove(&item).unwrap_or_default());
            }
            debug_assert!(
                expanded.is_empty(),
                "every orbit member maps into its own subtree"
            );
            while ptr < total_items {
                let Some(ready) = slots[ptr].take() else {
                    break;
                };
                for s in ready {
                    if limit.is_some_and(|l| emitted >= l) || tx_out.send(s).is_err() {
                        coord_stop.store(true, Ordering::Relaxed);
                        break 'recv;
                    }
                    emitted += 1;
                }
                ptr += 1;
            }
            if limit.is_some_and(|l| emitted >= l) {
                coord_stop.store(true, Ordering::Relaxed);
                break;
            }
        }
    });
    handles.push(coord);

    Ok(RegularSetStream {
        rx: Some(rx_out),
        stop,
        handles,
    })
}

/// Convenience: run the enumeration to completion and collect.
pub fn enumerate_all(config: &SearchConfig) -> Result<Vec<RegularSet>, SearchError> {
    Ok(enumerate_regular_sets(config)?.collect())
}

/// Empirical verdict on "a sharply transitive set containing the
/// identity is a subgroup" at one `q`, with the type census and
/// conjugacy class counts of everything found.
#[derive(Debug, Clone)]
pub struct TheoremReport {
    pub q: u64,
    pub total_regular_sets_with_identity: usize,
    pub all_are_subgroups: bool,
    pub type_census: BTreeMap<SubgroupType, usize>,
    pub conjugacy_class_count: BTreeMap<SubgroupType, usize>,
    /// Identity-containing regular sets that fail `is_subgroup`; empty
    /// on every completed run.
    pub violations: Vec<RegularSet>,
}

impl TheoremReport {
    pub fn to_json(&self) -> Result<Value, SearchError> {
        let census: serde_json::Map<String, Value> = self
            .type_census
            .iter()
            .map(|(t, c)| (t.tag.to_string(), json!(c)))
            .collect();
        let classes: serde_json::Map<String, Value> = self
            .conjugacy_class_count
            .iter()
            .map(|(t, c)| (t.tag.to_string(), json!(c)))
            .collect();
        let violations: Result<Vec<Value>, RegularError> =
            self.violations.iter().map(|s| s.to_json()).collect();
        Ok(json!({
            "q": self.q,
            "total_regular_sets_with_identity": self.total_regular_sets_with_identity,
            "all_are_subgroups": self.all_are_subgroups,
            "type_census": census,
            "conjugacy_class_count": classes,
            "violations": violations?,
        }))
    }
}

/// Enumerates every identity-containing sharply transitive set at the
/// config's `q`, checks each for being a subgroup, recognizes types,
/// and counts conjugacy classes per type.
pub fn verify_theorem(config: &SearchConfig) -> Result<TheoremReport, SearchError> {
    let cfg = config.clone().with_require_identity(true).with_limit(None);
    let sets = enumerate_all(&cfg)?;

    let mut type_census: BTreeMap<SubgroupType, usize> = BTreeMap::new();
    let mut by_type: BTreeMap<SubgroupType, Vec<RegularSet>> = BTreeMap::new();
    let mut violations = Vec::new();
    for s in sets.iter() {
        if s.is_subgroup()? {
            let ty = subgroup_type(s)?;
            *type_census.entry(ty).or_insert(0) += 1;
            by_type.entry(ty).or_default().push(s.clone());
        } else {
            violations.push(s.clone());
        }
    }
    let mut conjugacy_class_count = BTreeMap::new();
    for (ty, groups) in &by_type {
        let classes = conjugacy_classes(&cfg.field, groups)?;
        conjugacy_class_count.insert(*ty, classes.len());
    }
    Ok(TheoremReport {
        q: cfg.field.q(),
        total_regular_sets_with_identity: sets.len(),
        all_are_subgroups: violations.is_empty(),
        type_census,
        conjugacy_class_count,
        violations,
    })
}

/// Evaluation table of a `(q+1)`-element set: rows are members in
/// canonical order, columns are points in enumeration order, entries
/// are image point indices. The table is a Latin square exactly when
/// the set is sharply transitive; the set need not be verified.
pub fn latin_square(s: &RegularSet) -> Result<Vec<Vec<u32>>, SearchError> {
    let f = s.field();
    let n = (f.q() + 1) as usize;
    if s.len() != n {
        return Err(SearchError::SizeMismatch {
            expected: n,
            got: s.len(),
        });
    }
    Ok(s.members()
        .iter()
        .map(|g| (0..n as u32).map(|x| act_idx(f, g.idxs(), x)).collect())
        .collect())
}

/// Every row and every column is a permutation of `0..n`.
pub fn is_latin(square: &[Vec<u32>]) -> bool {
    let n = square.len();
    let perm = |xs: &mut Vec<u32>| {
        xs.sort_unstable();
        xs.iter().enumerate().all(|(i, &x)| x == i as u32)
    };
    square
        .iter()
        .all(|row| row.len() == n && perm(&mut row.clone()))
        && (0..n).all(|c| perm(&mut square.iter().map(|row| row[c]).collect()))
}

/// Aligned text grid of a Latin square (or any index table).
pub fn render_latin(square: &[Vec<u32>]) -> String {
    let width = square
        .iter()
        .flatten()
        .map(|x| x.to_string().len())
        .max()
        .unwrap_or(1);
    square
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| format!("{x:>width$}"))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}
