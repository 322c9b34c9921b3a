use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use num_traits::Zero;
use pentile::exactmath::{int, lp_maximize, lp_minimize, span_member, LpOutcome, Rational};
use pentile::goodsets::{
    candidate_vectors, choose_u, emit_tables, enumerate_all, golden_table, parse_tables, recurse, Enumeration,
};
use pentile::vectypes::{
    angle_system, apply_perm, canonical_form, central_open_point, compat, is_good, min_vector, polytope,
    Permutation5, VecType, VecTypeSet,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn enumeration() -> &'static Enumeration {
    static E: OnceLock<Enumeration> = OnceLock::new();
    E.get_or_init(|| enumerate_all(&golden_table()).expect("enumeration succeeds"))
}

fn set(s: &str) -> VecTypeSet {
    s.parse().unwrap()
}

#[test]
fn counts() {
    let e = enumeration();
    assert_eq!(e.ordered.len(), 193);
    assert_eq!(e.permuted_count, 3495);
    assert_eq!(e.records.len(), 371);
    assert_eq!(e.dim_counts(), BTreeMap::from([(0, 251), (1, 92), (2, 26), (3, 2)]));
    assert!(e.stats.max_depth <= 5);
}

#[test]
fn emitted_sets_are_closed_good_and_open() {
    let e = enumeration();
    let distinct: BTreeSet<_> = e.ordered.iter().collect();
    assert_eq!(distinct.len(), e.ordered.len());
    for y in &e.ordered {
        assert_eq!(&compat(y).unwrap(), y);
        assert!(is_good(y));
        assert!(central_open_point(y, true).is_some());
    }
}

#[test]
fn classes_match_the_golden_table() {
    let e = enumeration();
    let golden = golden_table();
    assert_eq!(golden.len(), 371);
    for g in &golden {
        let r = e.record(g.index).unwrap_or_else(|| panic!("class {} missing", g.index));
        assert_eq!(r.dim, g.dim, "dim of {}", g.index);
        assert_eq!(r.struck, g.struck);
        assert_eq!(g.basis.len() as i64, 4 - g.dim);
        // Mutual implication of the two polytopes, up to a dihedral image.
        let pb = polytope(&g.basis_set(), false);
        let hit = Permutation5::dihedral().iter().any(|p| {
            let image = polytope(&apply_perm(p, &r.canonical), false);
            pb.implies(&image.base) && image.implies(&pb.base)
        });
        assert!(hit, "class {} has no matching image", g.index);
    }
}

#[test]
fn table_text_round_trips_and_matches_goldens() {
    let e = enumeration();
    let text = emit_tables(&e.records);
    assert!(text.lines().any(|l| l.starts_with("7*\t") && l.contains("00012 00111")));
    assert!(text.lines().any(|l| l.starts_with("303\t") && l.contains("00004 00120 02001 20010")));
    let parsed = parse_tables(&text).unwrap();
    assert_eq!(parsed.len(), e.records.len());
    for ((index, struck, dim, basis), r) in parsed.iter().zip(&e.records) {
        assert_eq!((*index, *struck, *dim, basis), (r.index, r.struck, r.dim, &r.basis));
    }
    let golden: BTreeMap<usize, VecTypeSet> = golden_table().into_iter().map(|g| (g.index, g.basis_set())).collect();
    for (index, _, _, basis) in parsed {
        assert_eq!(Some(&basis), golden.get(&index));
    }
}

#[test]
fn permutations_preserve_goodness_and_closure() {
    let e = enumeration();
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..50 {
        let y = &e.ordered[rng.gen_range(0..e.ordered.len())];
        let good = is_good(y);
        for p in Permutation5::dihedral() {
            let image = apply_perm(&p, y);
            assert_eq!(is_good(&image), good);
            assert_eq!(compat(&image).unwrap(), apply_perm(&p, &compat(y).unwrap()));
            assert_eq!(canonical_form(&image), canonical_form(y));
        }
    }
}

#[test]
fn closure_generators_are_implied_by_the_polytope() {
    let e = enumeration();
    for r in &e.records {
        let base = angle_system(&r.basis, false);
        for v in r.maximal_set.iter() {
            let c = v.to_rationals();
            let hi = lp_maximize(&c, &base);
            let lo = lp_minimize(&c, &base);
            assert_eq!(hi.value(), Some(&int(2)), "class {} member {v}", r.index);
            assert_eq!(lo.value(), Some(&int(2)));
        }
    }
}

/// Every `w` inside the box `bounds` whose equation lies in the span of the
/// defining rows of `P_X`.
fn brute_compat(x: &VecTypeSet, bounds: [u32; 5]) -> VecTypeSet {
    let mut rows = vec![{
        let mut r = vec![int(1); 5];
        r.push(int(3));
        r
    }];
    for v in x.iter() {
        let mut r = v.to_rationals();
        r.push(int(2));
        rows.push(r);
    }
    // Cheap necessary condition first: w·alpha = 2 at one open point.
    let alpha = central_open_point(x, false).unwrap();
    let mut out = Vec::new();
    let mut w = [0u32; 5];
    loop {
        if w != [0; 5] && VecType(w).dot(&alpha) == int(2) {
            let mut target = VecType(w).to_rationals();
            target.push(int(2));
            if span_member(&target, &rows) {
                out.push(VecType(w));
            }
        }
        let mut i = 0;
        while i < 5 && w[i] == bounds[i] {
            w[i] = 0;
            i += 1;
        }
        if i == 5 {
            break;
        }
        w[i] += 1;
    }
    VecTypeSet::new(out)
}

#[test]
fn compat_agrees_with_brute_force() {
    let e = enumeration();
    let step = e.records.len() / 20;
    for r in e.records.iter().step_by(step).take(20) {
        let x = &r.basis;
        // A coordinate with a positive lower bound m_i on P_X is at most
        // 2/m_i in any member; the others are searched one step past 6.
        let system = angle_system(x, false);
        let m: Vec<Rational> = (0..5)
            .map(|i| {
                let mut c = vec![int(0); 5];
                c[i] = int(1);
                lp_minimize(&c, &system).value().unwrap().clone()
            })
            .collect();
        let bounds: [u32; 5] = std::array::from_fn(|i| {
            if m[i] > int(0) { (int(2) / &m[i]).floor().to_integer().try_into().unwrap() } else { 7 }
        });
        let fast = compat(x).unwrap();
        let slow = brute_compat(x, bounds);
        let boxed = VecTypeSet::new(fast.iter().copied().filter(|w| (0..5).all(|i| w.counts()[i] <= bounds[i])));
        assert_eq!(boxed, slow, "class {} basis {x}", r.index);
        assert!(slow.iter().all(|w| (0..5).all(|i| m[i] > int(0) || w.counts()[i] <= 6)));
    }
}

#[test]
fn choose_u_meets_its_contract() {
    let e = enumeration();
    let mut inputs: Vec<VecTypeSet> = vec![VecTypeSet::default()];
    inputs.extend(e.ordered.iter().take(40).cloned());
    for x in inputs {
        let m = min_vector(&x).unwrap();
        let u = choose_u(&x, &m).unwrap();
        assert!(u.iter().sum::<Rational>().is_zero());
        for v in x.iter() {
            assert!(v.dot(&u).is_zero());
        }
        for i in 3..5 {
            if m[i].is_zero() {
                assert!(u[i] < int(0));
            }
        }
        if m[3] > int(0) && m[4] > int(0) {
            assert!(u.iter().all(Zero::is_zero));
        }
        assert_eq!(choose_u(&x, &m).unwrap(), u);
        let cands = candidate_vectors(&x, &u, &m).unwrap();
        for v in cands.iter() {
            assert!(v.dot(&m) <= int(2));
            assert!(v.dot(&u) >= int(0));
        }
    }
}

#[test]
fn empty_set_candidates() {
    let x = VecTypeSet::default();
    let m = min_vector(&x).unwrap();
    let u = choose_u(&x, &m).unwrap();
    assert!(u[3] < int(0) && u[4] < int(0));
    let cands = candidate_vectors(&x, &u, &m).unwrap();
    assert!(cands.iter().all(|v| v.counts()[0] <= 3));
    assert!(!cands.contains(&VecType([0, 0, 0, 0, 7])));
    assert!(cands.contains(&VecType([1, 1, 1, 0, 0])));
}

fn run(x: &VecTypeSet, excluded: &VecTypeSet) -> Vec<VecTypeSet> {
    let mut out = Vec::new();
    recurse(x, excluded, &mut |y| out.push(y.clone())).unwrap();
    out
}

#[test]
fn exclusion_filters_exactly() {
    let x = VecTypeSet::new([enumeration().ordered[0].members()[0]]);
    let all = run(&x, &VecTypeSet::default());
    assert!(!all.is_empty());
    let w: VecType = "11100".parse().unwrap();
    let avoided = run(&x, &VecTypeSet::new([w]));
    let expected: BTreeSet<_> = all.iter().filter(|y| !y.contains(&w)).cloned().collect();
    let got: BTreeSet<_> = avoided.iter().cloned().collect();
    assert!(avoided.iter().all(|y| !y.contains(&w)));
    assert_eq!(got, expected);
}

#[test]
fn recursion_is_deterministic_and_fixes_maximal_sets() {
    let e = enumeration();
    let x = VecTypeSet::new([e.ordered[0].members()[0]]);
    assert_eq!(run(&x, &VecTypeSet::default()), run(&x, &VecTypeSet::default()));
    for y in e.ordered.iter().take(10) {
        let out = run(y, &VecTypeSet::default());
        assert_eq!(out[0], *y);
        assert!(out.iter().all(|z| y.is_subset(z)));
    }
}

#[test]
fn first_class_has_dimension_three() {
    let e = enumeration();
    let r = e.record(1).unwrap();
    assert_eq!(r.dim, 3);
    assert_eq!(r.basis, set("11100"));
    assert_eq!(e.record(303).unwrap().basis, set("00120 02001 20010 00004"));
    assert!(matches!(lp_minimize(&vec![int(1); 5], &angle_system(&r.maximal_set, false)), LpOutcome::Optimum { .. }));
}
