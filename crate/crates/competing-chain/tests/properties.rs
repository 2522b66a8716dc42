use competing_chain::algebra::{
    c, identity, max_norm, r_matrix, reflection_residual,
    yang_baxter_residual, Reflection, C64,
};
use competing_chain::bae::{classify_pattern, solve_ground_state, Regime, SolverOptions};
use competing_chain::config::Config;
use competing_chain::io::fmt17;
use competing_chain::model::{
    hamiltonian_direct, hamiltonian_from_transfer, transfer_identity_residual, transfer_matrix,
    ModelParams,
};
use competing_chain::spectrum::{representative, sort_roots, ZeroRootSet};
use competing_chain::thermo::{
    boundary_excitation_energy, bulk_excitation_energy, string_excitation_energy, surface_energy,
    QuadratureSpec,
};
use proptest::prelude::*;

fn complex(radius: f64) -> impl Strategy<Value = C64> {
    (-radius..radius, -radius..radius).prop_map(|(re, im)| c(re, im))
}

/// Boundary parameter bounded away from the divergent point 0.
fn field() -> impl Strategy<Value = f64> {
    prop_oneof![-3.0..-0.05, 0.05..3.0]
}

fn small_params(two_n: usize) -> impl Strategy<Value = ModelParams> {
    (0.0..1.0f64, field(), field(), -3.0..3.0f64)
        .prop_map(move |(a, p, q, xi)| ModelParams::new(two_n, a, p, q, xi).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn r_matrix_unitarity(u in complex(5.0)) {
        let lhs = r_matrix(u) * r_matrix(-u);
        let rhs = identity(4) * (C64::new(1.0, 0.0) - u * u);
        prop_assert!(max_norm(&(lhs - rhs)) <= 1e-12 * (1.0 + u.norm_sqr()));
    }

    #[test]
    fn yang_baxter_holds(u1 in complex(5.0), u2 in complex(5.0), u3 in complex(5.0)) {
        prop_assert!(yang_baxter_residual(u1, u2, u3) <= 1e-12);
    }

    #[test]
    fn reflection_equations_hold(
        l in complex(3.0), u in complex(3.0), p in field(), q in field(), xi in -3.0..3.0f64
    ) {
        let left = reflection_residual(l, u, Reflection::Left { p });
        let right = reflection_residual(l, u, Reflection::Right { q, xi });
        prop_assert!(left <= 1e-12 && right <= 1e-12);
    }

    #[test]
    fn csv_numbers_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
        prop_assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn config_round_trips(
        a in 0.0..2.0f64, p in field(), q in field(), xi in -3.0..3.0f64,
        theta in proptest::collection::vec(-0.5..0.5f64, 6)
    ) {
        let cfg = Config { two_n: 6, a_bar: a, p, q, xi, theta_bar: theta, ..Config::default() };
        prop_assert_eq!(Config::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn representative_is_canonical(z in complex(4.0)) {
        let r = representative(z);
        prop_assert!(r == z || r == -z);
        prop_assert_eq!(representative(-z), r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn hamiltonian_constructions_agree(params in small_params(4)) {
        let h = hamiltonian_direct(&params).unwrap();
        prop_assert!(max_norm(&(h.adjoint() - &h)) <= 1e-12);
        let ht = hamiltonian_from_transfer(&params).unwrap();
        prop_assert!(max_norm(&(h - ht)) <= 1e-9);
    }

    #[test]
    fn transfer_family_commutes_and_is_crossing_symmetric(
        params in small_params(4), u in complex(2.0), v in complex(2.0)
    ) {
        let tu = transfer_matrix(u, &params).unwrap();
        let tv = transfer_matrix(v, &params).unwrap();
        let scale = max_norm(&tu) * max_norm(&tv);
        prop_assert!(max_norm(&(&tu * &tv - &tv * &tu)) <= 1e-10 * scale.max(1.0));
        let tc = transfer_matrix(-u - 1.0, &params).unwrap();
        prop_assert!(max_norm(&(&tu - tc)) <= 1e-10 * max_norm(&tu).max(1.0));
    }

    #[test]
    fn operator_identity_holds(
        params in small_params(4), theta in proptest::collection::vec(-0.3..0.3f64, 4)
    ) {
        let p = params.with_theta(theta).unwrap();
        for j in 1..=4 {
            prop_assert!(transfer_identity_residual(j, &p).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn root_sets_are_sign_invariant(
        roots in proptest::collection::vec(complex(2.0), 5)
    ) {
        let params = ModelParams::new(4, 0.3, 1.0, 1.0, 1.0).unwrap();
        let a = ZeroRootSet::new(&params, roots.clone(), 0.0);
        let b = ZeroRootSet::new(&params, roots.iter().map(|z| -z).collect(), 0.0);
        let mut ra = a.roots.clone();
        let mut rb = b.roots.clone();
        sort_roots(&mut ra);
        sort_roots(&mut rb);
        prop_assert_eq!(ra, rb);
    }

    #[test]
    fn surface_energy_is_symmetric_in_the_two_boundaries(
        a in 0.0..1.0f64, x in field()
    ) {
        let spec = QuadratureSpec::default();
        let xi: f64 = 1.2;
        let p = ModelParams::new(8, a, x, x * (1.0 + xi * xi).sqrt(), xi).unwrap();
        let r = surface_energy(&p, &spec).unwrap();
        prop_assert!((r.components["e_b_p"] - r.components["e_b_q"]).abs() <= 1e-12);
        prop_assert!(r.est_error <= 3.0 * spec.abs_tol);
    }

    #[test]
    fn excitation_energies_are_even_and_finite(
        a in 0.0..1.0f64, z in 0.0..3.0f64, b in 0.01..0.49f64, n in 3usize..6
    ) {
        let spec = QuadratureSpec::default();
        let p = ModelParams::new(8, a, 1.0, 1.0, 1.2).unwrap();
        let e1 = bulk_excitation_energy(z, &p, &spec).unwrap();
        prop_assert!(e1.is_finite());
        prop_assert!((e1 - bulk_excitation_energy(-z, &p, &spec).unwrap()).abs() <= 1e-12);
        let eb = boundary_excitation_energy(b, &p, &spec).unwrap();
        prop_assert!((eb - boundary_excitation_energy(-b, &p, &spec).unwrap()).abs() <= 1e-12);
        prop_assert!(string_excitation_energy(n, z, &p, &spec).unwrap().abs() <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// Inside the regime-V box the converged pattern does not depend on the exact point.
    #[test]
    fn regime_v_pattern_is_stable(p in 0.8..2.0f64, q_bar in 0.6..1.5f64) {
        let params = ModelParams::with_q_bar(8, 0.66, p, q_bar, 1.2).unwrap();
        let sol = solve_ground_state(Regime::V, &params, &SolverOptions::default()).unwrap();
        prop_assert!(sol.residual <= 1e-10);
        prop_assert_eq!(classify_pattern(&sol.roots, &params).regime, Regime::V);
        let z = &sol.roots.roots;
        for r in z {
            // Conjugation maps the set into itself up to the sign convention.
            let cj = representative(r.conj());
            prop_assert!(z.iter().any(|s| (s - cj).norm() <= 1e-10 * (1.0 + r.norm())));
        }
    }
}
