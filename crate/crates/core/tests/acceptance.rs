//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line. Time bounds are asserted with `std::time::Instant`
//! and chosen for an unoptimized build on desk hardware.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::prelude::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sharply::classify::{
    construct_cyclic_regular, construct_dihedral_regular, construct_exceptional, order_profile,
    subgroup_type, SubgroupTag,
};
use sharply::gf::{field_make, prime_power, prime_powers_upto, FieldRef};
use sharply::projline::{enumerate_group, points, GroupElem};
use sharply::regular::{segre_check_entries, RegularSet};
use sharply::search::{enumerate_all, is_latin, latin_square, verify_theorem, SearchConfig};

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

fn criterion(name: &str, body: impl FnOnce() -> Result<String, String>) {
    match body() {
        Ok(detail) => println!("PASS {name}: {detail}"),
        Err(e) => {
            println!("FAIL {name}: {e}");
            panic!("{name}: {e}");
        }
    }
}

fn gf(q: u64) -> FieldRef {
    let (p, m) = prime_power(q).unwrap();
    field_make(p, m, None).unwrap()
}

/// All (q+1)-subsets of the group passing the direct sharp-transitivity
/// definition — the independent oracle for the backtracking search.
fn naive_regular_subsets(field: &FieldRef, require_identity: bool) -> Vec<Vec<GroupElem>> {
    let all = enumerate_group(field).unwrap();
    let k = (field.q() + 1) as usize;
    let mut idx: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    loop {
        let members: Vec<GroupElem> = idx.iter().map(|&i| all[i]).collect();
        let candidate = RegularSet::new(field.clone(), members).unwrap();
        let id_ok = !require_identity || candidate.members().iter().any(|g| g.is_identity());
        if id_ok && candidate.sharply_transitive_direct() {
            out.push(candidate.members().to_vec());
        }
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + all.len() - k {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[test]
fn criterion_1_nonzero_product() {
    criterion(
        "criterion 1 (product of nonzero elements is -1, q <= 64)",
        || {
            let t0 = Instant::now();
            let qs = prime_powers_upto(64);
            for &q in &qs {
                let f = gf(q);
                let product = f.nonzero_product();
                let minus_one = f.neg(f.one()).unwrap();
                ensure!(product == minus_one, "q = {q}: product != -1");
            }
            let elapsed = t0.elapsed();
            ensure!(
                elapsed < Duration::from_secs(1),
                "took {elapsed:?}, bound 1 s"
            );
            Ok(format!("{} fields, {elapsed:?}", qs.len()))
        },
    );
}

#[test]
fn criterion_2_theorem_at_desk_scale() {
    criterion(
        "criterion 2 (identity-sets are subgroups, q in 2..9)",
        || {
            let mut detail = Vec::new();
            let small_start = Instant::now();
            let mut small_elapsed = Duration::ZERO;
            for q in [2u64, 3, 4, 5, 7, 8, 9] {
                let t0 = Instant::now();
                let report = verify_theorem(&SearchConfig::new(gf(q)).with_workers(4))
                    .map_err(|e| format!("q = {q}: {e}"))?;
                let elapsed = t0.elapsed();
                ensure!(
                    report.all_are_subgroups,
                    "q = {q}: non-subgroup regular set found"
                );
                ensure!(report.violations.is_empty(), "q = {q}: violations recorded");
                let allowed: BTreeSet<SubgroupTag> = if q % 2 == 0 {
                    BTreeSet::from([SubgroupTag::Cyclic])
                } else {
                    BTreeSet::from([SubgroupTag::Cyclic, SubgroupTag::Dihedral])
                };
                for ty in report.type_census.keys() {
                    ensure!(
                        allowed.contains(&ty.tag),
                        "q = {q}: unexpected type {}",
                        ty.tag
                    );
                    ensure!(
                        report.conjugacy_class_count.get(ty) == Some(&1),
                        "q = {q}: type {} not a single conjugacy class",
                        ty.tag
                    );
                }
                if q == 9 {
                    ensure!(
                        elapsed < Duration::from_secs(120),
                        "q = 9 took {elapsed:?}, bound 120 s"
                    );
                } else {
                    small_elapsed = small_start.elapsed();
                }
                if q == 2 || q == 3 {
                    let oracle = naive_regular_subsets(&gf(q), true);
                    ensure!(
                        oracle.len() == report.total_regular_sets_with_identity,
                        "q = {q}: oracle count {} != search count {}",
                        oracle.len(),
                        report.total_regular_sets_with_identity
                    );
                }
                detail.push(format!("q={q}:{}", report.total_regular_sets_with_identity));
            }
            ensure!(
                small_elapsed < Duration::from_secs(30),
                "q <= 7 took {small_elapsed:?}"
            );
            Ok(detail.join(" "))
        },
    );
}

#[test]
fn criterion_3_exceptional_a4_at_q11() {
    criterion(
        "criterion 3 (q = 11 census includes A4, single class)",
        || {
            let t0 = Instant::now();
            let report = verify_theorem(&SearchConfig::new(gf(11)).with_workers(4))
                .map_err(|e| e.to_string())?;
            ensure!(
                report.all_are_subgroups,
                "non-subgroup regular set at q = 11"
            );
            let a4 = report
                .type_census
                .keys()
                .find(|ty| ty.tag == SubgroupTag::A4)
                .copied()
                .ok_or("census does not include A4")?;
            ensure!(
                report.conjugacy_class_count.get(&a4) == Some(&1),
                "A4 subgroups split into {:?} classes",
                report.conjugacy_class_count.get(&a4)
            );
            let elapsed = t0.elapsed();
            ensure!(
                elapsed < Duration::from_secs(600),
                "took {elapsed:?}, bound 10 min"
            );
            Ok(format!(
                "{} identity-sets, {} A4s in one class, {elapsed:?}",
                report.total_regular_sets_with_identity, report.type_census[&a4]
            ))
        },
    );
}

#[test]
fn criterion_4_constructive_witnesses() {
    criterion(
        "criterion 4 (constructions: cyclic q <= 499, dihedral, exceptional)",
        || {
            let t0 = Instant::now();
            let qs = prime_powers_upto(499);
            for &q in &qs {
                let s = construct_cyclic_regular(&gf(q)).map_err(|e| format!("q = {q}: {e}"))?;
                ensure!(s.verified(), "q = {q}: cyclic witness not verified");
                ensure!(s.len() as u64 == q + 1, "q = {q}: wrong size");
            }
            let cyclic_elapsed = t0.elapsed();
            ensure!(
                cyclic_elapsed < Duration::from_secs(30),
                "cyclic took {cyclic_elapsed:?}"
            );

            for q in prime_powers_upto(31).into_iter().filter(|q| q % 2 == 1) {
                let s = construct_dihedral_regular(&gf(q)).map_err(|e| format!("q = {q}: {e}"))?;
                ensure!(s.verified(), "q = {q}: dihedral witness not verified");
                let ty = subgroup_type(&s).map_err(|e| format!("q = {q}: {e}"))?;
                ensure!(ty.tag == SubgroupTag::Dihedral, "q = {q}: tag {}", ty.tag);
            }

            let cases = [
                (SubgroupTag::A4, 11u64, vec![(1u64, 1usize), (2, 3), (3, 8)]),
                (SubgroupTag::S4, 23, vec![(1, 1), (2, 9), (3, 8), (4, 6)]),
                (SubgroupTag::A5, 59, vec![(1, 1), (2, 15), (3, 20), (5, 24)]),
            ];
            for (tag, q, expected) in cases {
                let f = gf(q);
                let s = construct_exceptional(&f, tag, 0).map_err(|e| format!("{tag}: {e}"))?;
                ensure!(s.verified(), "{tag} at q = {q}: not verified");
                let profile = order_profile(&f, s.members());
                ensure!(
                    profile == expected.into_iter().collect(),
                    "{tag} at q = {q}: wrong order profile {profile:?}"
                );
            }
            Ok(format!(
                "{} cyclic witnesses in {cyclic_elapsed:?}; dihedral + A4/S4/A5 ok",
                qs.len()
            ))
        },
    );
}

#[test]
fn criterion_5_product_identity_scan() {
    criterion("criterion 5 (zero-pattern product identity scans)", || {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut scanned = 0usize;
        for q in [2u64, 3, 4, 5, 7] {
            let f = gf(q);
            let sets = enumerate_all(&SearchConfig::new(f.clone()).with_workers(4))
                .map_err(|e| format!("q = {q}: {e}"))?;
            let all = enumerate_group(&f).unwrap();
            for s in &sets {
                let report = s.segre_scan().map_err(|e| format!("q = {q}: {e}"))?;
                ensure!(report.passed(), "q = {q}: violation in subgroup scan");
                scanned += 1;
            }
            for _ in 0..100 {
                let t = all.choose(&mut rng).unwrap();
                let s = sets.choose(&mut rng).unwrap().translate_right(t).unwrap();
                ensure!(s.verified(), "q = {q}: translate not regular");
                let report = s.segre_scan().map_err(|e| format!("q = {q}: {e}"))?;
                ensure!(report.passed(), "q = {q}: violation in translate scan");
                scanned += 1;
            }
        }

        // Representative rescaling never changes the verdict.
        let fields: Vec<FieldRef> = [3u64, 4, 5, 7, 9].iter().map(|&q| gf(q)).collect();
        for _ in 0..1000 {
            let f = fields.choose(&mut rng).unwrap();
            let q = f.q();
            let rand_elem = |rng: &mut ChaCha8Rng| f.elem_at(rng.random_range(0..q)).unwrap();
            let rand_nonzero = |rng: &mut ChaCha8Rng| f.elem_at(rng.random_range(1..q)).unwrap();
            let zero = f.zero();
            let e1 = [
                zero,
                rand_elem(&mut rng),
                rand_elem(&mut rng),
                rand_elem(&mut rng),
            ];
            let e2 = [
                rand_elem(&mut rng),
                zero,
                rand_elem(&mut rng),
                rand_elem(&mut rng),
            ];
            let e3 = [
                rand_elem(&mut rng),
                rand_elem(&mut rng),
                zero,
                rand_elem(&mut rng),
            ];
            let e4 = [
                rand_elem(&mut rng),
                rand_elem(&mut rng),
                rand_elem(&mut rng),
                zero,
            ];
            let base = segre_check_entries(f, e1, e2, e3, e4).map_err(|e| e.to_string())?;
            let scale =
                |e: [sharply::FieldElem; 4], s: sharply::FieldElem| e.map(|x| f.mul(x, s).unwrap());
            let s1 = rand_nonzero(&mut rng);
            let s2 = rand_nonzero(&mut rng);
            let s3 = rand_nonzero(&mut rng);
            let s4 = rand_nonzero(&mut rng);
            let scaled = segre_check_entries(
                f,
                scale(e1, s1),
                scale(e2, s2),
                scale(e3, s3),
                scale(e4, s4),
            )
            .map_err(|e| e.to_string())?;
            ensure!(base == scaled, "rescaling changed the verdict at q = {q}");
        }
        Ok(format!("{scanned} scans clean; 1000 rescalings invariant"))
    });
}

#[test]
fn criterion_6_closure_traces() {
    criterion(
        "criterion 6 (closure traces: residual identity, gh = k)",
        || {
            // All non-identity ordered pairs in the cyclic regular subgroup
            // at q = 11.
            let f = gf(11);
            let c12 = construct_cyclic_regular(&f).map_err(|e| e.to_string())?;
            let t0 = Instant::now();
            let mut traced = 0usize;
            for g in c12.members() {
                for h in c12.members() {
                    if g.is_identity() || h.is_identity() {
                        continue;
                    }
                    let trace = c12.closure_witness(g, h).map_err(|e| e.to_string())?;
                    ensure!(
                        trace.residual_is_identity(),
                        "residual not identity at q = 11"
                    );
                    ensure!(trace.segre_holds, "product identity failed at q = 11");
                    let gh = g.mul(&f, h).unwrap();
                    ensure!(trace.k == gh, "k != g*h at q = 11");
                    ensure!(c12.contains(&gh), "g*h escaped the set at q = 11");
                    traced += 1;
                }
            }
            let elapsed = t0.elapsed();
            ensure!(
                elapsed < Duration::from_secs(1),
                "q = 11 pairs took {elapsed:?}, bound 1 s"
            );

            // Every pair in every enumerated regular subgroup for q <= 7.
            for q in [2u64, 3, 4, 5, 7] {
                let fq = gf(q);
                for s in enumerate_all(&SearchConfig::new(fq.clone()).with_workers(4))
                    .map_err(|e| format!("q = {q}: {e}"))?
                {
                    for g in s.members() {
                        for h in s.members() {
                            if g.is_identity() || h.is_identity() {
                                continue;
                            }
                            let trace = s
                                .closure_witness(g, h)
                                .map_err(|e| format!("q = {q}: {e}"))?;
                            ensure!(
                                trace.residual_is_identity(),
                                "residual not identity, q = {q}"
                            );
                            ensure!(trace.k == g.mul(&fq, h).unwrap(), "k != g*h, q = {q}");
                            traced += 1;
                        }
                    }
                }
            }
            Ok(format!("{traced} traces, q = 11 block in {elapsed:?}"))
        },
    );
}

#[test]
fn criterion_7_latin_equivalence() {
    criterion("criterion 7 (Latin square iff sharply transitive)", || {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut agreements = 0usize;
        let mut positives = 0usize;
        for q in [2u64, 3, 4, 5] {
            let f = gf(q);
            let all = enumerate_group(&f).unwrap();
            for _ in 0..500 {
                let mut members: Vec<GroupElem> = Vec::new();
                while members.len() < (q + 1) as usize {
                    let g = *all.choose(&mut rng).unwrap();
                    if !members.contains(&g) {
                        members.push(g);
                    }
                }
                let s = RegularSet::new(f.clone(), members).unwrap();
                let latin = is_latin(&latin_square(&s).map_err(|e| e.to_string())?);
                let regular = s.sharply_transitive_direct();
                ensure!(latin == regular, "disagreement at q = {q}");
                agreements += 1;
                positives += usize::from(regular);
            }
            // Known-regular instance keeps the positive side exercised.
            let torus = construct_cyclic_regular(&f).map_err(|e| e.to_string())?;
            ensure!(
                is_latin(&latin_square(&torus).map_err(|e| e.to_string())?),
                "torus table not Latin at q = {q}"
            );
        }
        Ok(format!(
            "{agreements} samples agree ({positives} regular among them)"
        ))
    });
}

#[test]
fn criterion_8_structural_invariants() {
    criterion(
        "criterion 8 (action law, canonical forms, group order, fixed points)",
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            for q in [2u64, 3, 4, 5, 7, 8, 9] {
                let f = gf(q);
                let all = enumerate_group(&f).unwrap();
                ensure!(
                    all.len() as u64 == q * q * q - q,
                    "q = {q}: |PGL2| = {} != q^3 - q",
                    all.len()
                );
                let pts = points(&f);
                for g in &all {
                    // Canonicalization is idempotent on canonical entries.
                    let [a, b, c, d] = g.entries();
                    let recanon = GroupElem::canon(&f, a, b, c, d).unwrap();
                    ensure!(recanon == *g, "q = {q}: canonicalization not idempotent");
                    // Dual fixed-point routes agree; at most 2 fixed points.
                    let fixed = g.fixed_points(&f).unwrap();
                    let fpf = g.is_fixed_point_free(&f).unwrap();
                    ensure!(
                        fpf == fixed.is_empty(),
                        "q = {q}: fixed-point routes disagree"
                    );
                    if !g.is_identity() {
                        ensure!(fixed.len() <= 2, "q = {q}: {} fixed points", fixed.len());
                    }
                }
                // Action law (gh)x = g(hx) on sampled pairs, all points.
                for _ in 0..600 {
                    let g = all.choose(&mut rng).unwrap();
                    let h = all.choose(&mut rng).unwrap();
                    let gh = g.mul(&f, h).unwrap();
                    for x in &pts {
                        let lhs = gh.act(&f, *x).unwrap();
                        let rhs = g.act(&f, h.act(&f, *x).unwrap()).unwrap();
                        ensure!(lhs == rhs, "q = {q}: action law violated");
                    }
                }
            }
            Ok("q in {2,3,4,5,7,8,9}: order, canon, fixed points, action law".to_string())
        },
    );
}
