mod common;

use common::*;
use popa_core::sampling::seeded_rng;
use popa_core::{
    analyze, check_omega_homogeneity, factorize, idempotent_solution, kernel_subspace, lambda_scale, recover_partition,
    tilt_t, tilt_t_scaled, verify_gs, Element, GsSolution, PartitionSpec, SigmaMatrix,
};
use proptest::prelude::*;
use rand::Rng;

fn partition_case(seed: u64) -> (GsSolution, rand_chacha::ChaCha8Rng) {
    let mut rng = seeded_rng(seed);
    let d = rng.random_range(1..=6);
    (random_partition_solution(&mut rng, d), rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn circle_group_axioms(seed in any::<u64>()) {
        let (sol, mut rng) = partition_case(seed);
        let alg = sol.algebra().clone();
        let zero = Element::zero(&alg);
        let pick = |rng: &mut rand_chacha::ChaCha8Rng| loop {
            let x = random_element(rng, &alg, 0.4);
            if sol.in_group(&x) {
                break x;
            }
        };
        let (x, y, z) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let xy = sol.circle_op(&x, &y).unwrap();
        let left = sol.circle_op(&xy, &z).unwrap();
        let right = sol.circle_op(&x, &sol.circle_op(&y, &z).unwrap()).unwrap();
        prop_assert!(left.dist(&right) < 1e-10);
        prop_assert!(sol.circle_op(&x, &zero).unwrap().dist(&x) < 1e-15);
        prop_assert!(sol.circle_op(&zero, &x).unwrap().dist(&x) < 1e-15);
        let inv = sol.circle_inv(&x).unwrap();
        prop_assert!(sol.circle_op(&x, &inv).unwrap().norm() < 1e-10);
        prop_assert!(sol.circle_op(&inv, &x).unwrap().norm() < 1e-10);
        // S is a homomorphism onto the multiplicative group
        let lhs = sol.eval(&xy);
        let rhs = &sol.eval(&x) * &sol.eval(&y);
        prop_assert!(lhs.dist(&rhs) < 1e-10);
    }

    #[test]
    fn kernel_closed_under_circle(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let d = rng.random_range(2..=6);
        let sol = random_partition_with_kernel(&mut rng, d);
        let basis = sol.kernel_basis().unwrap();
        let comb = |rng: &mut rand_chacha::ChaCha8Rng| {
            basis.iter().fold(Element::zero(sol.algebra()), |acc, b| &acc + &b.scale(rng.random_range(-2.0..2.0)))
        };
        let (a, b) = (comb(&mut rng), comb(&mut rng));
        prop_assert!(sol.in_kernel(&a) && sol.in_kernel(&b));
        let ab = sol.circle_op(&a, &b).unwrap();
        prop_assert!(sol.in_kernel(&ab));
        prop_assert!(ab.dist(&(&a + &b)) < 1e-12);
    }

    #[test]
    fn adjustor_splits_s(seed in any::<u64>()) {
        let (sol, mut rng) = partition_case(seed);
        let x = random_element(&mut rng, sol.algebra(), 1.0);
        let rho = sol.rho_of().unwrap();
        let rebuilt = &(&Element::one(sol.algebra()) + &(&rho * &x)) + &sol.adjustor_n(&x).unwrap();
        prop_assert!(rebuilt.dist(&sol.eval(&x)) < 1e-12);
        // affine solutions have a linear adjustor
        let n = sol.adjustor_n(&x).unwrap();
        prop_assert!(sol.adjustor_n(&x.scale(-1.7)).unwrap().dist(&n.scale(-1.7)) < 1e-12);
    }

    #[test]
    fn gamma_matches_finite_difference(seed in any::<u64>()) {
        let (sol, mut rng) = partition_case(seed);
        let u = random_element(&mut rng, sol.algebra(), 1.0);
        let exact = sol.gamma(&u).unwrap();
        let fd = sol.gamma_fd(&u, 1e-6).unwrap();
        prop_assert!(exact.dist(&fd) < 1e-6 * (1.0 + u.norm()));
    }

    #[test]
    fn derivative_similarity(seed in any::<u64>()) {
        // differentiating S(c + S(c)k) = S(c)S(k) at k = 0 gives S'(c)h = S(c)γ(S(c)^{-1}h)
        let (sol, mut rng) = partition_case(seed);
        let c = loop {
            let c = random_element(&mut rng, sol.algebra(), 0.4);
            if sol.in_group(&c) {
                break c;
            }
        };
        let hv = random_element(&mut rng, sol.algebra(), 1.0);
        let step = 1e-6;
        let fd = (&sol.eval(&(&c + &hv.scale(step))) - &sol.eval(&(&c - &hv.scale(step)))).scale(0.5 / step);
        let sc = sol.eval(&c);
        let k = hv.div(&sc).unwrap();
        let expected = &sc * &sol.gamma(&k).unwrap();
        prop_assert!(fd.dist(&expected) < 1e-6);
    }

    #[test]
    fn tilt_scaling(seed in any::<u64>(), t in 0.0f64..3.0) {
        let (sol, mut rng) = partition_case(seed);
        let u = cap_gamma(&sol, &random_element(&mut rng, sol.algebra(), 1.0), 1.5);
        let lhs = tilt_t_scaled(&sol, &u, t).unwrap();
        let direct = tilt_t(&sol, &u.scale(t)).unwrap();
        let rhs = &lambda_scale(&sol, &u, t).unwrap() * &tilt_t(&sol, &u).unwrap();
        prop_assert!(lhs.dist(&direct) < 1e-12 * (1.0 + direct.norm()));
        prop_assert!(direct.dist(&rhs) < 1e-10 * (1.0 + rhs.norm()));
    }

    #[test]
    fn lambda_goldie_identity(seed in any::<u64>(), s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let (sol, mut rng) = partition_case(seed);
        let u = cap_gamma(&sol, &random_element(&mut rng, sol.algebra(), 1.0), 1.5);
        let g = sol.gamma(&u).unwrap();
        let lhs = lambda_scale(&sol, &u, s + t).unwrap();
        let rhs = &lambda_scale(&sol, &u, s).unwrap() + &(&g.scale(s).exp() * &lambda_scale(&sol, &u, t).unwrap());
        prop_assert!(lhs.dist(&rhs) < 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn omega_homogeneous_partitions(seed in any::<u64>()) {
        let (sol, mut rng) = partition_case(seed);
        prop_assert!(sol.is_omega_homogeneous());
        let u = random_element(&mut rng, sol.algebra(), 0.8);
        let d = check_omega_homogeneity(&sol, &u, 4).unwrap();
        prop_assert!(d < 1e-10 * (1.0 + sol.gamma(&u).unwrap().norm().powi(5)));
    }

    #[test]
    fn partition_recovered_from_sigma(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let d = rng.random_range(1..=7);
        let spec = random_partition_spec(&mut rng, d);
        let m = spec.induced_sigma();
        let back = recover_partition(&m, 1e-9).unwrap();
        prop_assert_eq!(back.parts(), spec.parts());
        for (a, b) in back.rho().iter().zip(spec.rho()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn structure_report_consistent(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let d = rng.random_range(1..=6);
        let spec = random_partition_spec(&mut rng, d);
        let m = spec.induced_sigma();
        let report = factorize(&m, 1e-9).unwrap();
        prop_assert!(report.valid);
        prop_assert_eq!(report.factors.iter().map(|f| f.dim()).sum::<usize>(), d);
        prop_assert_eq!(report.rank + report.kernel_dim, d);
        prop_assert!(report.max_factor_defect.unwrap() < 1e-10);
        // every kernel vector is annihilated by Σ
        for v in kernel_subspace(&m, 1e-9) {
            let mv = m.apply(v.coords());
            prop_assert!(mv.iter().all(|x| x.abs() < 1e-12));
        }
        prop_assert_eq!(analyze(&m, 1e-9), report);
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let (sol, _) = partition_case(seed);
        let s = popa_core::json::to_json_string(&sol).unwrap();
        let back: GsSolution = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, sol);
    }

    #[test]
    fn full_idempotent_basis_is_canonical(rho in prop::collection::vec(-3.0f64..3.0, 1..6)) {
        let d = rho.len();
        let alg = h(d);
        let basis: Vec<Element> = (0..d)
            .map(|i| {
                let mut c = vec![0.0; d];
                c[i] = 1.0;
                el(&c)
            })
            .collect();
        // σ(z) = Σ ρ_k z_k: on e_i x only the i-th term survives
        let sol = idempotent_solution(alg.clone(), basis, rho.clone()).unwrap();
        let canon = GsSolution::canonical(el(&rho));
        let mut rng = seeded_rng(d as u64);
        for _ in 0..10 {
            let x = random_element(&mut rng, &alg, 2.0);
            prop_assert!(sol.eval(&x).dist(&canon.eval(&x)) < 1e-14);
        }
    }

    #[test]
    fn canonical_passes_verify(rho in prop::collection::vec(-3.0f64..3.0, 1..5), seed in any::<u64>()) {
        let sol = GsSolution::canonical(el(&rho));
        let r = verify_gs(&sol, 200, seed, 0.4).unwrap();
        prop_assert!(r.passes(1e-12));
    }

    #[test]
    fn sigma_with_cross_link_rejected(seed in any::<u64>(), delta in 1e-3f64..1.0) {
        let mut rng = seeded_rng(seed);
        let parts = vec![vec![0], vec![1]];
        let rho = vec![signed(&mut rng, 0.5, 2.0), signed(&mut rng, 0.5, 2.0)];
        let mut rows: Vec<Vec<f64>> = PartitionSpec::new(parts, rho).unwrap().induced_sigma().matrix()
            .row_iter().map(|r| r.iter().cloned().collect()).collect();
        rows[0][1] = delta;
        let m = SigmaMatrix::from_rows(&rows).unwrap();
        prop_assert!(!popa_core::validate_sigma(&m, 1e-9));
        let r = verify_gs(&GsSolution::affine_candidate(m), 2000, seed, 0.4).unwrap();
        prop_assert!(r.max_gs_residual > 1e-6);
    }
}
