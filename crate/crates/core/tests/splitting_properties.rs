//! The canonical splitting against a brute-force linear system, block forms,
//! and behavior under change of basis.

use std::collections::BTreeMap;

use lefkit_core::graded::{GradedMap, Subspaces};
use lefkit_core::linalg::Matrix;
use lefkit_core::models::{
    adversarial_perturbations, arithmetic_surface_toy, random_filtered_instance, Bounds, FilteredOptions,
};
use lefkit_core::pairing::{block_form_check, hodge_equivalence_check};
use lefkit_core::splitting::{three_step_split, three_step_split_by_solve, verify_block_form, FilteredLefschetzModule, ThreeStepSplitting};
use lefkit_core::linalg::rat;
use proptest::prelude::*;

const BOUNDS: Bounds = Bounds { max_dim: 2, max_n: 3 };

fn same_split(a: &ThreeStepSplitting, b: &ThreeStepSplitting) -> bool {
    a.alpha0.same_as(&b.alpha0) && a.alpha1.same_as(&b.alpha1) && a.alpha2.same_as(&b.alpha2) && a.beta.same_as(&b.beta)
}

fn instance(seed: u64) -> lefkit_core::models::FilteredInstance {
    random_filtered_instance(seed, BOUNDS, FilteredOptions::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn constructive_split_is_the_unique_solution(seed in any::<u64>()) {
        let inst = instance(seed);
        let s = three_step_split(&inst.filtered).unwrap();
        let (reference, freedom) = three_step_split_by_solve(&inst.filtered).expect("consistent system");
        prop_assert_eq!(freedom, 0);
        prop_assert!(same_split(&s, &reference));
    }

    #[test]
    fn split_passes_both_block_forms(seed in any::<u64>()) {
        let inst = instance(seed);
        let s = three_step_split(&inst.filtered).unwrap();
        prop_assert!(s.is_filtered_splitting(&inst.filtered));
        prop_assert!(verify_block_form(&inst.filtered, &s));
        prop_assert!(block_form_check(&inst.filtered, &inst.pair, &s).unwrap());
    }

    #[test]
    fn split_images_are_natural_under_rebasing(seed in any::<u64>()) {
        // Same split data, two different random filtered bases: the images
        // of alpha^0 and alpha^1 correspond under the change of basis.
        let inst = instance(seed);
        let s = three_step_split(&inst.filtered).unwrap();
        let f = &inst.filtered;
        let g = random_filtered_automorphism(seed, f);
        let v2 = f.v().with_operator(conjugate(f.v().l(), &g)).unwrap();
        let f2 = FilteredLefschetzModule::new(v2, f.f1().clone(), f.f2().clone()).unwrap();
        let s2 = three_step_split(&f2).unwrap();
        for (a, b) in [(&s.alpha0, &s2.alpha0), (&s.alpha1, &s2.alpha1)] {
            let img = Subspaces::image_of(a);
            let moved = img.image_under(&inverse_map(&g, f.v().space()));
            prop_assert!(moved.same_as(&Subspaces::image_of(b)));
        }
    }

    #[test]
    fn hodge_sides_agree(seed in any::<u64>(), flip in 0u8..3) {
        let opts = FilteredOptions { flip_g1: flip == 1, flip_g0: flip == 2, break_pairing: false };
        let inst = random_filtered_instance(seed, BOUNDS, opts).unwrap();
        let s = three_step_split(&inst.filtered).unwrap();
        let h = hodge_equivalence_check(&inst.filtered, &inst.pair, &s).unwrap();
        prop_assert!(h.agree());
    }
}

/// A random automorphism preserving the coordinate filtration.
fn random_filtered_automorphism(seed: u64, f: &FilteredLefschetzModule) -> BTreeMap<i32, Matrix> {
    use lefkit_core::models::{random_invertible, rng_from_seed};
    let mut rng = rng_from_seed(seed ^ 0x5eed);
    f.v()
        .space()
        .degrees()
        .map(|d| {
            let dims = [f.g(0).dim(d), f.g(1).dim(d), f.g(2).dim(d)];
            let n: usize = dims.iter().sum();
            let mut m = Matrix::zeros(n, n);
            let starts = [0, dims[0], dims[0] + dims[1]];
            for k in 0..3 {
                let blk = random_invertible(&mut rng, dims[k]);
                for r in 0..dims[k] {
                    for c in 0..dims[k] {
                        m.set(starts[k] + r, starts[k] + c, blk.get(r, c).clone());
                    }
                }
            }
            // Lower-triangular mixing: column j may feed rows of later pieces.
            for r in 0..n {
                for c in 0..r {
                    let piece = |i: usize| (0..3).rev().find(|&k| i >= starts[k] && dims[k] > 0).unwrap_or(0);
                    if piece(r) > piece(c) {
                        m.set(r, c, rat(((r + 2 * c) % 3) as i64 - 1));
                    }
                }
            }
            (d, m)
        })
        .collect()
}

fn conjugate(l: &GradedMap, g: &BTreeMap<i32, Matrix>) -> GradedMap {
    GradedMap::from_fn(l.source(), l.target(), 1, |d| {
        let b = l.block(d).into_owned();
        match (g.get(&(d + 1)), g.get(&d)) {
            (Some(up), Some(here)) => &(&up.inverse().unwrap() * &b) * here,
            _ => b,
        }
    })
    .unwrap()
}

fn inverse_map(g: &BTreeMap<i32, Matrix>, space: &lefkit_core::GradedSpace) -> GradedMap {
    GradedMap::from_fn(space, space, 0, |d| g[&d].inverse().unwrap()).unwrap()
}

#[test]
fn perturbations_of_the_toy_split_fail() {
    let d = arithmetic_surface_toy(&rat(2), &rat(6), &Matrix::from_i64(1, 1, &[-1]), &[]).unwrap();
    let f = d.filtered();
    let s = three_step_split(f).unwrap();
    assert!(verify_block_form(f, &s));
    assert!(block_form_check(f, d.pair(), &s).unwrap());
    let bad = adversarial_perturbations(f, &s).unwrap();
    assert_eq!(bad.len(), 3);
    for (name, p) in bad {
        let ok = verify_block_form(f, &p) && block_form_check(f, d.pair(), &p).unwrap_or(false);
        assert!(!ok, "{name} passed the block-form checks");
        assert_ne!(p, s, "{name} is not a perturbation");
    }
}

#[test]
fn perturbations_of_random_splits_fail() {
    let mut tested = 0;
    for seed in 0..30 {
        let inst = instance(seed);
        let s = three_step_split(&inst.filtered).unwrap();
        for (name, p) in adversarial_perturbations(&inst.filtered, &s).unwrap() {
            if p == s {
                continue;
            }
            tested += 1;
            let ok = verify_block_form(&inst.filtered, &p)
                && block_form_check(&inst.filtered, &inst.pair, &p).unwrap_or(false);
            assert!(!ok, "seed {seed}: {name} passed");
        }
    }
    assert!(tested > 10);
}

#[test]
fn broken_pairing_is_rejected() {
    let inst = random_filtered_instance(2, BOUNDS, FilteredOptions { break_pairing: true, ..Default::default() }).unwrap();
    let s = three_step_split(&inst.filtered).unwrap();
    assert!(!inst.pair.orthogonal(inst.filtered.f2()).same_as(inst.filtered.f1()));
    let err = block_form_check(&inst.filtered, &inst.pair, &s).unwrap_err();
    assert!(err.is_hypothesis());
}

#[test]
fn planted_data_is_a_filtered_splitting() {
    let inst = instance(7);
    let p: &ThreeStepSplitting = &inst.planted;
    assert!(p.alpha0.then(inst.filtered.proj0()).unwrap().same_as(&GradedMap::identity(inst.filtered.g(0).space())));
}
