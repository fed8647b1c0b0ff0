//! sl2 identities on random Lefschetz modules.

use lefkit_core::lefschetz::{
    check_hard_lefschetz, lambda_by_commutator, lambda_operator, primitive_parts, LefschetzModule,
};
use lefkit_core::linalg::{rat, Matrix};
use lefkit_core::models::{projective_space_module, random_lefschetz_module, random_non_lefschetz_module, rng_from_seed, Bounds};
use lefkit_core::GradedMap;
use proptest::prelude::*;

const BOUNDS: Bounds = Bounds { max_dim: 4, max_n: 6 };

fn commutator_holds(m: &LefschetzModule, lam: &GradedMap) -> bool {
    m.space().degrees().all(|i| {
        let d = m.dim(i);
        let up = m.dim(i + 1);
        let down = m.dim(i - 1);
        let mut c = Matrix::zeros(d, d);
        if up > 0 {
            c = &c + &(&*lam.block(i + 1) * &*m.l().block(i));
        }
        if down > 0 {
            c = &c - &(&*m.l().block(i - 1) * &*lam.block(i));
        }
        c == Matrix::identity(d).scale(&rat((m.n() - 2 * i) as i64))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn lambda_satisfies_the_commutator(seed in any::<u64>()) {
        let m = random_lefschetz_module(&mut rng_from_seed(seed), BOUNDS).unwrap();
        prop_assert!(check_hard_lefschetz(&m).holds);
        let lam = lambda_operator(&m).unwrap();
        prop_assert!(commutator_holds(&m, &lam));
    }

    #[test]
    fn lambda_kills_primitives(seed in any::<u64>()) {
        let m = random_lefschetz_module(&mut rng_from_seed(seed), BOUNDS).unwrap();
        let lam = lambda_operator(&m).unwrap();
        let dec = primitive_parts(&m).unwrap();
        for (&j, p) in &dec.primitive {
            prop_assert!((&*lam.block(j) * p).is_zero());
            // Primitive means killed by L^{n+1-2j}.
            prop_assert!((&m.power(j, (m.n() + 1 - 2 * j) as u32) * p).is_zero());
        }
    }

    #[test]
    fn lambda_is_the_unique_commutator_solution(seed in any::<u64>()) {
        let m = random_lefschetz_module(&mut rng_from_seed(seed), BOUNDS).unwrap();
        let lam = lambda_operator(&m).unwrap();
        let (solved, freedom) = lambda_by_commutator(&m).unwrap();
        prop_assert_eq!(freedom, 0);
        prop_assert_eq!(solved, lam);
    }

    #[test]
    fn primitive_dimensions_match_the_dimension_jumps(seed in any::<u64>()) {
        let m = random_lefschetz_module(&mut rng_from_seed(seed), BOUNDS).unwrap();
        let dec = primitive_parts(&m).unwrap();
        for j in 0..=m.n() / 2 {
            let jump = m.dim(j) as i64 - if j > 0 { m.dim(j - 1) as i64 } else { 0 };
            prop_assert_eq!(dec.primitive_dim(j) as i64, jump);
        }
    }

    #[test]
    fn broken_modules_are_detected(seed in any::<u64>()) {
        let m = random_non_lefschetz_module(&mut rng_from_seed(seed), BOUNDS).unwrap();
        prop_assert!(!check_hard_lefschetz(&m).holds);
        prop_assert!(lambda_operator(&m).is_err());
    }
}

#[test]
fn projective_spaces() {
    for n in 0..6 {
        let (m, p) = projective_space_module(n).unwrap();
        assert!(check_hard_lefschetz(&m).holds);
        let lam = lambda_operator(&m).unwrap();
        // Λ on P^n: the basis h^i goes to i(n+1-i) h^{i-1}.
        for i in 1..=n {
            assert_eq!(lam.block(i).get(0, 0), &rat((i * (n + 1 - i)) as i64), "P^{n} degree {i}");
        }
        assert!(p.is_nondegenerate());
    }
}
