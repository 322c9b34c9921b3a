use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

use pentile::exactmath::{
    affine_dim, alg_cos, alg_sin, int, lp_feasible, lp_minimize, rank, rat, span_member, trig_bounds,
    AlgebraicReal, LinearSystem, LpOutcome, OrderedField, Rational,
};

fn small_system(rows: &[(Vec<i64>, i64, u8)]) -> LinearSystem {
    let n = rows.first().map(|r| r.0.len()).unwrap_or(1);
    let mut s = LinearSystem::new(n);
    for (c, b, kind) in rows {
        let c: Vec<Rational> = c.iter().map(|&x| int(x)).collect();
        match kind % 4 {
            0 => s.push_eq(c, int(*b)),
            1 => s.push_lt(c, int(*b)),
            _ => s.push_le(c, int(*b)),
        };
    }
    s
}

fn rows_strategy(n: usize) -> impl Strategy<Value = Vec<(Vec<i64>, i64, u8)>> {
    prop::collection::vec((prop::collection::vec(-3i64..=3, n), -4i64..=4, 0u8..4), 1..7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn feasible_iff_optimum(rows in rows_strategy(3), obj in prop::collection::vec(-3i64..=3, 3)) {
        let mut s = small_system(&rows);
        // Box the system so the minimum exists whenever the set is nonempty.
        s.push_box(&int(-5), &int(5), false);
        let mut relaxed = s.clone();
        for r in &mut relaxed.inequalities { r.strict = false; }
        let obj: Vec<Rational> = obj.into_iter().map(int).collect();
        let out = lp_minimize(&obj, &relaxed);
        prop_assert_eq!(lp_feasible(&relaxed).is_feasible(), matches!(out, LpOutcome::Optimum { .. }));
        if let LpOutcome::Optimum { witness, .. } = out {
            prop_assert!(relaxed.is_satisfied_by(&witness));
        }
        if let Some(w) = lp_feasible(&s).witness() {
            prop_assert!(s.is_satisfied_by(&w));
        }
    }

    #[test]
    fn affine_dim_permutation_invariant(rows in rows_strategy(4), seed in 0u64..1000) {
        let mut s = small_system(&rows);
        s.push_box(&int(-3), &int(3), false);
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..4).collect();
        for i in (1..4).rev() { perm.swap(i, rng.gen_range(0..=i)); }
        prop_assert_eq!(affine_dim(&s), affine_dim(&s.permuted(&perm)));
    }

    #[test]
    fn double_angle(p in -60i64..60, n in 1u64..=24) {
        let c = alg_cos(p, n);
        let lhs = &(&(&c * &c) * &AlgebraicReal::rational(int(2))) - &AlgebraicReal::rational(int(1));
        prop_assert_eq!(lhs, alg_cos(2 * p, n));
    }
}

#[test]
fn span_member_agrees_with_rank() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for _ in 0..200 {
        let n = rng.gen_range(2..=6);
        let k = rng.gen_range(0..=4);
        let basis: Vec<Vec<Rational>> =
            (0..k).map(|_| (0..n).map(|_| int(rng.gen_range(-3..=3))).collect()).collect();
        let target: Vec<Rational> = if rng.gen_bool(0.5) && k > 0 {
            // A combination of the basis, so both answers get exercised.
            let coef: Vec<i64> = (0..k).map(|_| rng.gen_range(-2..=2)).collect();
            (0..n).map(|j| basis.iter().zip(&coef).fold(Rational::zero(), |a, (b, &c)| a + &b[j] * int(c))).collect()
        } else {
            (0..n).map(|_| int(rng.gen_range(-3..=3))).collect()
        };
        let mut with = basis.clone();
        with.push(target.clone());
        let oracle = rank(&basis) == rank(&with);
        assert_eq!(span_member(&target, &basis), oracle, "{basis:?} {target:?}");
    }
}

#[test]
fn trig_enclosures_contain_exact_values() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for _ in 0..100 {
        let n: u64 = rng.gen_range(1..=24);
        let p: i64 = rng.gen_range(-48..=48);
        let a = rat(p, n as i64);
        let (s, c) = trig_bounds(&a, &a);
        let exact_c = alg_cos(p, n);
        let exact_s = alg_sin(p, n);
        // Exact containment: lo <= value <= hi decided in the field.
        for (iv, v) in [(&c, &exact_c), (&s, &exact_s)] {
            let lo = AlgebraicReal::rational(iv.lo().clone());
            let hi = AlgebraicReal::rational(iv.hi().clone());
            assert!(!v.minus(&lo).is_neg() && !hi.minus(v).is_neg(), "{p}/{n}: {iv} vs {v}");
        }
    }
}

#[test]
fn regular_pentagon_closes_exactly() {
    // Exterior turns of 2/5 of pi: the five unit edge directions sum to zero.
    let (mut re, mut im) = (AlgebraicReal::zero_value(), AlgebraicReal::zero_value());
    for i in 0..5 {
        let s = 2 * i; // s_i = 2i/5, as multiples of pi/5
        re = &re + &alg_cos(2 * s, 10);
        im = &im + &alg_sin(s, 5);
    }
    assert!(re.is_zero_value());
    assert!(im.is_zero_value());
}
