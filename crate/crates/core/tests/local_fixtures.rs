//! Curve fibers: harmonic forms, liftings and local heights against a
//! direct linear-solve oracle.

use lefkit_core::linalg::{rat, Matrix, Rational};
use lefkit_core::local::{arakelov_lift, bb_lift, conjecture_report, harmonic_split, is_admissible, local_height, vanishing_nearby};
use lefkit_core::models::{bgs_assemble, bgs_intersection_matrix, reduction_graph_model, ReductionGraph, StrataData};
use lefkit_core::Error;
use num_traits::{One, Zero};

/// Solves `M g = d / Σd - e_a` together with `Σ d_i g_i = 0` directly.
/// The horizontal section through component `a` then has height
/// `H_ab + g_b` against the one through `b`.
fn green_oracle(g: &ReductionGraph, a: usize) -> Vec<Rational> {
    let r = g.components();
    let total = g.degrees.iter().fold(Rational::zero(), |s, x| s + x);
    let mut aug = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..r {
        aug.extend(g.intersection_matrix.row(i).iter().cloned());
        let e = if i == a { Rational::one() } else { Rational::zero() };
        rhs.push(&g.degrees[i] / &total - e);
    }
    aug.extend(g.degrees.iter().cloned());
    rhs.push(Rational::zero());
    let sol = Matrix::from_flat(r + 1, r, aug).solve(&rhs).unwrap().unwrap();
    assert!(sol.nullspace.is_empty());
    sol.particular
}

fn section(r: usize, a: usize) -> Vec<Rational> {
    (0..2 * r).map(|i| if i == a { rat(1) } else { rat(0) }).collect()
}

fn frac(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}

#[test]
fn cycle2_heights_match_the_oracle() {
    let g = ReductionGraph::cycle2();
    let (_, m) = reduction_graph_model(&g).unwrap();
    let (z, w) = (section(2, 0), section(2, 1));
    let oracle = green_oracle(&g, 0);
    assert_eq!(oracle, vec![frac(1, 8), frac(-1, 8)]);
    assert_eq!(local_height(&m, 1, &z, &w).unwrap(), frac(-1, 8));
    assert_eq!(local_height(&m, 1, &z, &w).unwrap(), oracle[1]);
    // Two sections through the same component: only the correction term.
    assert_eq!(local_height(&m, 1, &z, &z).unwrap(), frac(1, 8));
    let lift = arakelov_lift(&m, 1, &z).unwrap();
    assert_eq!(lift.g, oracle);
    assert!(is_admissible(&m, 1, &lift.class).unwrap());
    assert!(!is_admissible(&m, 1, &z).unwrap());
}

#[test]
fn heights_on_other_graphs_match_the_oracle() {
    let weighted = ReductionGraph::new(Matrix::from_i64(2, 2, &[-3, 3, 3, -3]), vec![rat(1), rat(2)]).unwrap();
    let horizontal = ReductionGraph::chain3().with_horizontal(Matrix::from_i64(3, 3, &[-1, 0, 0, 0, -1, 0, 0, 0, 2])).unwrap();
    for g in [ReductionGraph::cycle2(), ReductionGraph::chain3(), weighted, horizontal] {
        let r = g.components();
        let (_, m) = reduction_graph_model(&g).unwrap();
        let h = g.horizontal.clone().unwrap_or_else(|| Matrix::zeros(r, r));
        for a in 0..r {
            let oracle = green_oracle(&g, a);
            for b in 0..r {
                let value = local_height(&m, 1, &section(r, a), &section(r, b)).unwrap();
                assert_eq!(value, h.get(a, b) + &oracle[b], "components {a}, {b}");
            }
        }
    }
}

#[test]
fn cycle2_bb_lift_of_a_degree_zero_divisor() {
    let (_, m) = reduction_graph_model(&ReductionGraph::cycle2()).unwrap();
    let z = vec![rat(1), rat(-1), rat(0), rat(0)];
    let lift = bb_lift(&m, 1, &z).unwrap();
    assert_eq!(lift.g, vec![frac(1, 4), frac(-1, 4)]);
    assert_eq!(m.omega().apply(1, &lift.class), vec![rat(0), rat(0)]);
    let err = bb_lift(&m, 1, &section(2, 0)).unwrap_err();
    assert!(matches!(err, Error::NotHomologicallyTrivial(_)));
}

#[test]
fn chain3_vanishing_and_harmonic_parts() {
    let (f, _) = reduction_graph_model(&ReductionGraph::chain3()).unwrap();
    let vn = vanishing_nearby(&f).unwrap();
    assert_eq!(vn.phi.basis(1).cols(), 2);
    assert_eq!(vn.phi.basis(0).cols(), 0);
    let h = harmonic_split(&f).unwrap();
    assert_eq!(h.basis(1), Matrix::column_vector(&[rat(1), rat(1), rat(1)]));
    assert!(conjecture_report(&f).unwrap().all_true());
}

#[test]
fn smooth_fiber_has_no_vanishing_cycles() {
    let (f, m) = reduction_graph_model(&ReductionGraph::smooth()).unwrap();
    let vn = vanishing_nearby(&f).unwrap();
    assert!(f.high().space().degrees().all(|p| vn.phi.basis(p).cols() == 0));
    assert!(conjecture_report(&f).unwrap().all_true());
    // Every class is admissible already.
    let lift = arakelov_lift(&m, 1, &section(1, 0)).unwrap();
    assert_eq!(lift.g, vec![rat(0)]);
}

#[test]
fn invalid_graphs_are_rejected() {
    let not_symmetric = Matrix::from_i64(2, 2, &[-1, 1, 2, -2]);
    assert!(ReductionGraph::new(not_symmetric, vec![rat(1), rat(1)]).is_err());
    let bad_rows = Matrix::from_i64(2, 2, &[-1, 2, 2, -2]);
    assert!(ReductionGraph::new(bad_rows, vec![rat(1), rat(1)]).is_err());
    let disconnected = Matrix::zeros(2, 2);
    assert!(ReductionGraph::new(disconnected, vec![rat(1), rat(1)]).is_err());
    let m = Matrix::from_i64(2, 2, &[-2, 2, 2, -2]);
    assert!(ReductionGraph::new(m.clone(), vec![rat(1), rat(-1)]).is_err());
    assert!(ReductionGraph::new(m, vec![rat(1)]).is_err());
}

#[test]
fn two_lines_reassemble_the_cycle() {
    let s = StrataData::two_lines(2).unwrap();
    let b = bgs_assemble(&s).unwrap();
    assert!(conjecture_report(&b.fiber).unwrap().all_true());
    let direct = ReductionGraph::cycle2().intersection_matrix;
    assert_eq!(bgs_intersection_matrix(&s, &b).unwrap(), direct);

    let s1 = StrataData::two_lines(1).unwrap();
    let b1 = bgs_assemble(&s1).unwrap();
    assert!(conjecture_report(&b1.fiber).unwrap().all_true());
    assert_eq!(bgs_intersection_matrix(&s1, &b1).unwrap(), Matrix::from_i64(2, 2, &[-1, 1, 1, -1]));
}

#[test]
fn smooth_strata() {
    for n in 1..4 {
        let b = bgs_assemble(&StrataData::smooth(n).unwrap()).unwrap();
        assert!(b.fiber.conn().stored_blocks().values().all(Matrix::is_zero));
        assert!(conjecture_report(&b.fiber).unwrap().all_true());
    }
}
