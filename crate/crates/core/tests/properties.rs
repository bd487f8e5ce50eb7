use num_complex::Complex64;
use proptest::prelude::*;

use ginv::blocks::{
    block_hypotheses, permutation_conjugate, swap_route, transpose_route, BlockInstance, TheoremId,
};
use ginv::forge::{
    forge_group_invertible, forge_lambda_pair, forge_rect_pair, forge_thm32_instance,
    forge_with_nilpotent_part, random_matrix, random_similarity, seeded_rng, Strategy as Build,
};
use ginv::harness::{run_verification, RunConfig, Status, Target};
use ginv::io::{from_json_str, to_json_string};
use ginv::linalg::numerical_rank;
use ginv::spectral::{
    cline_transfer, drazin_inverse, group_inverse, group_inverse_at_scale, verify_drazin_axioms,
    verify_group_axioms,
};
use ginv::sums::{detect_lambda, LambdaDetection};
use ginv::{relative_residual, ComplexMatrix, ToleranceProfile};

fn tol() -> ToleranceProfile {
    ToleranceProfile::default()
}

fn sized() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=8).prop_flat_map(|n| (Just(n), 0..=n))
}

fn unit_scalar() -> impl Strategy<Value = Complex64> {
    (0.5f64..2.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_inverse_satisfies_axioms((n, r) in sized(), seed in any::<u64>()) {
        let m = forge_group_invertible(n, r, seed).unwrap();
        let g = group_inverse(&m, &tol()).unwrap();
        prop_assert_eq!(g.rank, r);
        prop_assert!(verify_group_axioms(&m, &g.inverse).unwrap().max() <= 1e-9);
        let p = &g.idempotent;
        prop_assert!(relative_residual(&(p * p), p) <= 1e-9);
        prop_assert!((&m * p).frobenius_norm() <= 1e-9 * m.frobenius_norm().max(1.0));
    }

    #[test]
    fn group_inverse_is_similarity_covariant((n, r) in sized(), seed in any::<u64>()) {
        let m = forge_group_invertible(n, r, seed).unwrap();
        let (s, s_inv) = random_similarity(n, &mut seeded_rng(seed, 1));
        let conj = &(&s * &m) * &s_inv;
        let lhs = group_inverse(&conj, &tol()).unwrap().inverse;
        let rhs = &(&s * &group_inverse(&m, &tol()).unwrap().inverse) * &s_inv;
        prop_assert!(relative_residual(&lhs, &rhs) <= 1e-8);
    }

    #[test]
    fn group_inverse_scales_inversely((n, r) in sized(), seed in any::<u64>(), c in unit_scalar()) {
        let m = forge_group_invertible(n, r, seed).unwrap();
        let lhs = group_inverse(&m.scale(c), &tol()).unwrap().inverse;
        let rhs = group_inverse(&m, &tol()).unwrap().inverse.scale(c.inv());
        prop_assert!(relative_residual(&lhs, &rhs) <= 1e-9);
    }

    #[test]
    fn transpose_commutes_with_group_inverse((n, r) in sized(), seed in any::<u64>()) {
        let m = forge_group_invertible(n, r, seed).unwrap();
        let lhs = group_inverse(&m.transpose(), &tol()).unwrap().inverse;
        let rhs = group_inverse(&m, &tol()).unwrap().inverse.transpose();
        prop_assert!(relative_residual(&lhs, &rhs) <= 1e-9);
    }

    #[test]
    fn nilpotent_parts_block_the_group_inverse(n in 2usize..=8, seed in any::<u64>()) {
        let m = forge_with_nilpotent_part(n, seed).unwrap();
        let refused = matches!(group_inverse(&m, &tol()), Err(ginv::Error::NotGroupInvertible { .. }));
        prop_assert!(refused);
        let d = drazin_inverse(&m, &tol()).unwrap();
        prop_assert!(d.index >= 2);
        prop_assert!(verify_drazin_axioms(&m, &d.inverse, d.index).unwrap().max() <= 1e-9);
    }

    #[test]
    fn cancelled_operands_count_as_zero(n in 1usize..=6, seed in any::<u64>()) {
        let a = random_matrix(n, n, &mut seeded_rng(seed, 0));
        let (s, s_inv) = random_similarity(n, &mut seeded_rng(seed, 1));
        let a = &(&s * &a) * &s_inv;
        let c = |x: f64| Complex64::new(x, 0.0);
        let noise = &(&a.scale(c(0.1)) + &a.scale(c(0.2))) - &a.scale(c(0.3));
        let g = group_inverse_at_scale(&noise, a.frobenius_norm(), &tol()).unwrap();
        prop_assert_eq!(g.rank, 0);
        prop_assert!(g.inverse.max_abs() == 0.0);
    }

    #[test]
    fn lambda_detection_is_scale_invariant(
        k in prop::sample::select(vec![1usize, 2, 3, 4, 6]),
        pad in 0usize..=3,
        seed in any::<u64>(),
        alpha in unit_scalar(),
        beta in unit_scalar(),
    ) {
        let p = forge_lambda_pair(k, pad, seed).unwrap();
        let lambda = p.lambda.unwrap();
        let found = detect_lambda(&p.a.scale(alpha), &p.b.scale(beta), &tol()).unwrap();
        match found {
            LambdaDetection::Certificate(c) => prop_assert!((c.lambda - lambda).norm() <= 1e-9),
            LambdaDetection::BothZero => prop_assert!(false, "a·b vanished"),
        }
    }

    #[test]
    fn cline_transfer_gives_drazin_inverse_of_cb(m in 1usize..=6, n in 1usize..=6, seed in any::<u64>()) {
        let p = forge_rect_pair(m, n, seed).unwrap();
        let bc = drazin_inverse(&(&p.b * &p.c), &tol()).unwrap();
        let x = cline_transfer(&p.b, &p.c, &bc).unwrap();
        let cb = &p.c * &p.b;
        prop_assert!(verify_drazin_axioms(&cb, &x, bc.index + 1).unwrap().max() <= 1e-9);
        let direct = drazin_inverse(&cb, &tol()).unwrap().inverse;
        prop_assert!(relative_residual(&x, &direct) <= 1e-8);
    }

    #[test]
    fn block_routes_are_coherent(m in 1usize..=4, n in 1usize..=4, seed in any::<u64>()) {
        let inst = forge_thm32_instance(m, n, seed, Build::ScalarLift).unwrap().instance;
        let full = inst.assemble();
        prop_assert_eq!(transpose_route(&inst).assemble(), full.transpose());
        prop_assert_eq!(swap_route(&inst).assemble(), permutation_conjugate(&full, m, n).unwrap());
        let back = permutation_conjugate(&permutation_conjugate(&full, m, n).unwrap(), n, m).unwrap();
        prop_assert_eq!(back, full.clone());

        let t = tol();
        prop_assert!(block_hypotheses(&transpose_route(&inst), TheoremId::Thm35, &t).unwrap().passes(&t));
        prop_assert!(block_hypotheses(&swap_route(&inst), TheoremId::Cor33, &t).unwrap().passes(&t));

        let g = group_inverse(&full, &t).unwrap().inverse;
        let gj = group_inverse(&permutation_conjugate(&full, m, n).unwrap(), &t).unwrap().inverse;
        prop_assert!(relative_residual(&gj, &permutation_conjugate(&g, m, n).unwrap()) <= 1e-10);
    }

    #[test]
    fn matrices_round_trip_through_json(rows in 0usize..=5, cols in 0usize..=5, seed in any::<u64>()) {
        let m = random_matrix(rows, cols, &mut seeded_rng(seed, 0));
        let back: ComplexMatrix = from_json_str(&to_json_string(&m), "matrix").unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn block_instances_round_trip_through_json(m in 1usize..=3, n in 1usize..=3, seed in any::<u64>()) {
        let inst = forge_thm32_instance(m, n, seed, Build::ScalarLift).unwrap().instance;
        let back: BlockInstance = from_json_str(&to_json_string(&inst), "block instance").unwrap();
        prop_assert_eq!(back, inst);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn verdicts_only_harden_with_more_trials(
        target in prop::sample::select(Target::ALL.to_vec()),
        seed in any::<u64>(),
        short in 1usize..=10,
        extra in 1usize..=10,
    ) {
        let a = run_verification(&RunConfig::new(target, short, seed)).unwrap();
        let b = run_verification(&RunConfig::new(target, short + extra, seed)).unwrap();
        for (va, vb) in a.report.verdicts.iter().zip(&b.report.verdicts) {
            if va.status == Status::Refuted {
                prop_assert_eq!(vb.status, Status::Refuted);
                prop_assert_eq!(&va.counterexample, &vb.counterexample);
            }
            prop_assert!(vb.max_residual >= va.max_residual);
        }
        prop_assert_eq!(&a.report.trials[..], &b.report.trials[..a.report.trials.len()]);
    }
}

#[test]
fn forged_ranks_are_exact() {
    for seed in 0..40 {
        let n = 1 + (seed % 8) as usize;
        let r = (seed as usize / 8) % (n + 1);
        let m = forge_group_invertible(n, r, seed).unwrap();
        assert_eq!(numerical_rank(&m, &tol()), r);
    }
}
