use ginv::blocks::{block_formula, block_hypotheses, TheoremId, Variant};
use ginv::forge::{
    forge, forge_cor33_instance, forge_cor36_instance, forge_lambda_pair, forge_lem31_instance,
    forge_rect_pair, forge_thm32_instance, forge_thm35_instance, search_thm32, ForgeKind, ForgeSpec,
    Strategy,
};
use ginv::spectral::{cline_transfer, drazin_inverse, group_inverse, verify_drazin_axioms};
use ginv::sums::thm22_equivalence_check;
use ginv::{relative_residual, ToleranceProfile};

fn tol() -> ToleranceProfile {
    ToleranceProfile::default()
}

fn dims(seed: u64) -> (usize, usize) {
    let m = 1 + (seed % 4) as usize;
    let n = 1 + ((seed / 4) % 4) as usize;
    (m, n)
}

#[test]
fn block_forges_pass_their_hypotheses() {
    for seed in 0..100 {
        let (m, n) = dims(seed);
        let lem = forge_lem31_instance(m, n, seed).unwrap();
        assert!(block_hypotheses(&lem, TheoremId::Lem31, &tol()).unwrap().passes(&tol()));
        let cases = [
            (TheoremId::Thm32, forge_thm32_instance(m, n, seed, Strategy::ScalarLift).unwrap()),
            (TheoremId::Thm35, forge_thm35_instance(m, n, seed, Strategy::ScalarLift).unwrap()),
            (TheoremId::Cor33, forge_cor33_instance(m, n, seed, Strategy::ScalarLift).unwrap()),
            (TheoremId::Cor36, forge_cor36_instance(m, n, seed, Strategy::ScalarLift).unwrap()),
        ];
        for (theorem, f) in cases {
            let rep = block_hypotheses(&f.instance, theorem, &tol()).unwrap();
            assert!(rep.passes(&tol()), "{theorem} seed {seed}: {rep:?}");
            assert_eq!((f.instance.m(), f.instance.n()), (m, n));
        }
    }
}

#[test]
fn lift_forge_covers_nontrivial_and_nonzero_diagonal() {
    let forged: Vec<_> = (0..100)
        .map(|seed| {
            let (m, n) = dims(seed);
            forge_thm32_instance(m, n, seed, Strategy::ScalarLift).unwrap()
        })
        .collect();
    assert!(forged.iter().any(|f| f.nontrivial));
    assert!(forged
        .iter()
        .any(|f| f.instance.a.max_abs() > 0.0 || f.instance.d.max_abs() > 0.0));
}

#[test]
fn corrected_block_formula_matches_oracle_on_lifts() {
    for seed in 0..50 {
        let (m, n) = dims(seed);
        let f = forge_thm32_instance(m, n, seed, Strategy::ScalarLift).unwrap();
        let oracle = group_inverse(&f.instance.assemble(), &tol()).unwrap().inverse;
        let x = block_formula(&f.instance, TheoremId::Thm32, Variant::Corrected, &tol()).unwrap();
        assert!(relative_residual(&x, &oracle) <= 1e-8, "seed {seed}");
    }
}

#[test]
fn full_support_instance_exists_on_small_grid() {
    let inst = search_thm32(2, 2, [0; 4], true, &tol()).unwrap();
    for blk in [&inst.a, &inst.b, &inst.c, &inst.d] {
        assert!(blk.max_abs() > 0.0);
    }
    let oracle = group_inverse(&inst.assemble(), &tol()).unwrap().inverse;
    let x = block_formula(&inst, TheoremId::Thm32, Variant::Corrected, &tol()).unwrap();
    assert!(relative_residual(&x, &oracle) <= 1e-10);
}

#[test]
fn search_strategy_is_nontrivial_and_valid() {
    for seed in 0..10 {
        let (m, n) = (1 + (seed % 2) as usize, 1 + ((seed / 2) % 2) as usize);
        let f = forge_thm32_instance(m, n, seed, Strategy::Search).unwrap();
        assert!(f.nontrivial);
    }
}

#[test]
fn lambda_pairs_include_both_existence_outcomes() {
    let mut seen = [false, false];
    for seed in 0..200u64 {
        let k = [1, 2, 3, 4, 6][(seed % 5) as usize];
        let pad = (seed / 5 % 4) as usize;
        let p = forge_lambda_pair(k, pad, seed).unwrap();
        let eq = thm22_equivalence_check(&p.a, &p.b, &tol()).unwrap();
        assert!(eq.all_agree, "seed {seed}: {eq:?}");
        seen[eq.exists_sum as usize] = true;
    }
    assert_eq!(seen, [true, true]);
}

#[test]
fn rect_pairs_obey_cline_transfer() {
    for seed in 0..100 {
        let (m, n) = (1 + (seed % 6) as usize, 1 + ((seed / 6) % 6) as usize);
        let p = forge_rect_pair(m, n, seed).unwrap();
        let bc = drazin_inverse(&(&p.b * &p.c), &tol()).unwrap();
        let x = cline_transfer(&p.b, &p.c, &bc).unwrap();
        let cb = &p.c * &p.b;
        let cb_index = drazin_inverse(&cb, &tol()).unwrap().index.max(1);
        let res = verify_drazin_axioms(&cb, &x, cb_index).unwrap();
        assert!(res.max() <= 1e-9, "seed {seed}: {res:?}");
    }
}

#[test]
fn forging_is_deterministic() {
    for kind in ForgeKind::ALL {
        let spec = ForgeSpec {
            kind,
            dims: if kind == ForgeKind::CommutingPair { vec![4] } else { vec![3, 2] },
            seed: 99,
            strategy: None,
        };
        let one = serde_json::to_string(&forge(&spec).unwrap().value).unwrap();
        let two = serde_json::to_string(&forge(&spec).unwrap().value).unwrap();
        assert_eq!(one, two, "{kind}");
    }
}
