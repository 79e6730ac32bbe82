//! Property tests for the algebraic layers: truncated series form a
//! commutative ring, coset minima ignore integral translations, frame
//! shapes of block permutations come out as scaled cycle types, and the
//! cycle-shape weight formula is additive over disjoint cycles.

use std::collections::BTreeMap;

use num::traits::Zero;
use proptest::prelude::*;

use orbivert::catalog::builtin_lattice;
use orbivert::lattice::{coset_min, FrameShape, LatticeIsometry, RationalVector};
use orbivert::orbifold::rho_permutation;
use orbivert::qseries::Series;
use orbivert::rat::{rat, rat_int, Rat};

fn series_strategy() -> impl Strategy<Value = Series<Rat>> {
    let term = ((-4i64..=8, 1i64..=3), (-5i64..=5, 1i64..=3));
    (proptest::collection::vec(term, 0..=5), 4i64..=9).prop_map(|(raw, t)| {
        let pairs = raw
            .into_iter()
            .map(|((en, ed), (cn, cd))| (rat(en, ed), rat(cn, cd)));
        Series::from_terms(pairs, Some(&rat_int(t)))
    })
}

/// Coefficient agreement strictly below the tighter truncation order.
fn agree_below(x: &Series<Rat>, y: &Series<Rat>) -> bool {
    let bound = match (x.trunc_exp(), y.trunc_exp()) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    let mut exps: Vec<Rat> = x.term_list().into_iter().map(|(e, _)| e).collect();
    exps.extend(y.term_list().into_iter().map(|(e, _)| e));
    exps.sort();
    exps.dedup();
    exps.into_iter()
        .filter(|e| bound.as_ref().map_or(true, |b| e < b))
        .all(|e| x.coeff(&e) == y.coeff(&e))
}

proptest! {
    #[test]
    fn series_addition_commutes(a in series_strategy(), b in series_strategy()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
    }

    #[test]
    fn series_addition_associates(
        a in series_strategy(),
        b in series_strategy(),
        c in series_strategy(),
    ) {
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
    }

    #[test]
    fn series_product_commutes(a in series_strategy(), b in series_strategy()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
    }

    #[test]
    fn series_product_associates_below_truncation(
        a in series_strategy(),
        b in series_strategy(),
        c in series_strategy(),
    ) {
        prop_assert!(agree_below(&a.mul(&b).mul(&c), &a.mul(&b.mul(&c))));
    }

    #[test]
    fn series_product_distributes_below_truncation(
        a in series_strategy(),
        b in series_strategy(),
        c in series_strategy(),
    ) {
        prop_assert!(agree_below(&a.mul(&b.add(&c)), &a.mul(&b).add(&a.mul(&c))));
    }

    #[test]
    fn series_units_are_neutral(a in series_strategy()) {
        prop_assert_eq!(a.add(&Series::zero()), a.clone());
        prop_assert_eq!(a.mul(&Series::one()), a);
    }

    #[test]
    fn series_subtraction_cancels(a in series_strategy()) {
        prop_assert!(a.sub(&a).is_zero_series());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coset_minimum_ignores_integral_translations(
        nums in proptest::collection::vec(-3i64..=3, 8),
        dens in proptest::collection::vec(1i64..=4, 8),
        trans in proptest::collection::vec(-4i64..=4, 8),
    ) {
        let e8 = builtin_lattice("e8").unwrap();
        let basis: Vec<RationalVector> = (0..8)
            .map(|i| {
                let mut v = vec![Rat::zero(); 8];
                v[i] = rat_int(1);
                RationalVector(v)
            })
            .collect();
        let shift = RationalVector(
            nums.iter().zip(&dens).map(|(&n, &d)| rat(n, d)).collect(),
        );
        let moved = RationalVector(
            shift.0.iter().zip(&trans).map(|(s, &t)| s + rat_int(t)).collect(),
        );
        let (m1, _) = coset_min(&e8, &basis, &shift).unwrap();
        let (m2, _) = coset_min(&e8, &basis, &moved).unwrap();
        prop_assert_eq!(m1, m2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn block_permutation_frames_scale_cycle_types(
        perm in (1usize..=3).prop_flat_map(|k| Just((0..k).collect::<Vec<_>>()).prop_shuffle()),
    ) {
        let k = perm.len();
        let e8 = builtin_lattice("e8").unwrap();
        let mut lat = e8.clone();
        for _ in 1..k {
            lat = lat.direct_sum(&e8, "stack");
        }
        let n = 8 * k;
        let mut rows = vec![vec![0i64; n]; n];
        for b in 0..k {
            for r in 0..8 {
                rows[8 * perm[b] + r][8 * b + r] = 1;
            }
        }
        let iso = LatticeIsometry::new(&lat, &rows, 12).unwrap();
        let mut expect: BTreeMap<u64, i64> = BTreeMap::new();
        let mut seen = vec![false; k];
        for start in 0..k {
            if seen[start] {
                continue;
            }
            let mut len = 0u64;
            let mut cur = start;
            while !seen[cur] {
                seen[cur] = true;
                cur = perm[cur];
                len += 1;
            }
            *expect.entry(len).or_insert(0) += 8;
        }
        prop_assert_eq!(iso.frame().multiplicities(), &expect);
    }

    #[test]
    fn cycle_weight_formula_is_additive(
        cycles_a in proptest::collection::btree_map(1u64..=6, 1i64..=3, 1..=3),
        cycles_b in proptest::collection::btree_map(1u64..=6, 1i64..=3, 1..=3),
        rho_num in 0i64..=4,
        c_num in 1i64..=48,
    ) {
        let rho_v = rat(rho_num, 8);
        let c = rat_int(c_num);
        let size = |m: &BTreeMap<u64, i64>| {
            m.iter().map(|(t, b)| t * *b as u64).sum::<u64>()
        };
        let ka = size(&cycles_a);
        let kb = size(&cycles_b);
        let mut merged = cycles_a.clone();
        for (t, b) in &cycles_b {
            *merged.entry(*t).or_insert(0) += b;
        }
        let wa = rho_permutation(&rho_v, &c, &FrameShape::from_map(cycles_a), ka).unwrap();
        let wb = rho_permutation(&rho_v, &c, &FrameShape::from_map(cycles_b), kb).unwrap();
        let wm = rho_permutation(&rho_v, &c, &FrameShape::from_map(merged), ka + kb).unwrap();
        prop_assert_eq!(&wm.rho, &(&wa.rho + &wb.rho));
        prop_assert_eq!(&wm.margin, &(&wa.margin + &wb.margin));
    }
}
