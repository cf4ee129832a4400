use proptest::prelude::*;

use shellbound::bounds::{coupling_bound_model, space_form_jacobian, AmbientRicci, BoundCase, SubmanifoldCurvature};
use shellbound::geometry::*;
use shellbound::hybrid::{solve_hybrid_ground_state, HybridSystem, PointSource};
use shellbound::kernels::bessel_k1;
use shellbound::principal::*;

fn units() -> PhysicalConstants {
    PhysicalConstants::default()
}

fn space_strategy() -> impl Strategy<Value = AmbientSpace> {
    prop_oneof![Just(AmbientSpace::flat()), (0.2f64..3.0).prop_map(|k| AmbientSpace::hyperbolic(k).unwrap())]
}

fn vec3() -> impl Strategy<Value = [f64; 3]> {
    [-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_a_metric(space in space_strategy(), a in vec3(), b in vec3(), c in vec3()) {
        let (p, q, r) = (space.point_from_normal(a), space.point_from_normal(b), space.point_from_normal(c));
        let d = |x: &Point3, y: &Point3| ambient_distance(&space, x, y).unwrap();
        prop_assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-12);
        prop_assert!((d(&p, &q) - d(&q, &p)).abs() <= 1e-12 * (1.0 + d(&p, &q)));
        prop_assert!(d(&p, &p) <= 1e-7);
    }

    #[test]
    fn jacobian_is_linear_near_zero(k in -5.0f64..5.0) {
        prop_assert!((space_form_jacobian(k, 1e-6).unwrap() / 1e-6 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bessel_k1_respects_exponential_bound(z in 0.01f64..30.0) {
        let v = bessel_k1(z).unwrap();
        prop_assert!(v > 0.0 && v < (-z).exp() * (1.0 + 1.0 / z));
    }

    #[test]
    fn model_bound_is_continuous_and_decreasing_in_nu(
        rho in 0.1f64..2.0,
        h in 0.1f64..2.0,
        k in 0.1f64..3.0,
        nu in 0.0f64..3.0,
        which in 0usize..6,
    ) {
        let (ambient, sub) = match which {
            0 => (AmbientRicci::NonnegativeRicci, SubmanifoldCurvature::Zero),
            1 => (AmbientRicci::NonnegativeRicci, SubmanifoldCurvature::Positive(h)),
            2 => (AmbientRicci::NonnegativeRicci, SubmanifoldCurvature::Negative(h)),
            3 => (AmbientRicci::NegativeRicci(k), SubmanifoldCurvature::Zero),
            4 => (AmbientRicci::NegativeRicci(k), SubmanifoldCurvature::Positive(h)),
            _ => (AmbientRicci::NegativeRicci(k + h), SubmanifoldCurvature::Negative(h)),
        };
        let at = |nu| coupling_bound_model(&BoundCase { ambient, submanifold_h: sub, rho_star: rho, nu }, &units()).unwrap();
        let (a, b, c) = (at(nu), at(nu + 1e-7), at(nu + 0.1));
        prop_assert!(a > 0.0);
        prop_assert!((a - b).abs() <= 1e-5 * a);
        prop_assert!(c < a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sphere_round_trip(r in 0.5f64..2.0, nu in 0.1f64..3.0) {
        let flat = AmbientSpace::flat();
        let s = build_sphere(r, Point3::flat(0.0, 0.0, 0.0), 8).unwrap();
        let l = coupling_from_energy(&s, &flat, &units(), nu).unwrap();
        let back = energy_from_coupling(&s, &flat, &units(), l).unwrap().unwrap();
        prop_assert!(((back - nu) / nu).abs() < 1e-8);
        prop_assert!(coupling_from_energy(&s, &flat, &units(), nu * 1.1).unwrap() > l);
    }

    #[test]
    fn two_sphere_matrix_invariants(
        d in 2.3f64..8.0,
        r2 in 0.5f64..1.2,
        n1 in 0.3f64..2.0,
        n2 in 0.3f64..2.0,
        dir in vec3(),
    ) {
        let norm = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt().max(1e-3);
        let c2 = Point3::flat(d * dir[0] / norm, d * dir[1] / norm, d * dir[2] / norm);
        let flat = AmbientSpace::flat();
        let surfaces = [build_sphere(1.0, Point3::flat(0.0, 0.0, 0.0), 8).unwrap(), build_sphere(r2, c2, 8).unwrap()];
        let couplings = [Coupling::NuStar(n1), Coupling::NuStar(n2)];

        let grid: Vec<f64> = (1..=25).map(|k| 0.12 * k as f64).collect();
        let flow = lowest_eigenvalue_flow(&surfaces, &couplings, &flat, &units(), &grid).unwrap();
        prop_assert!(flow.windows(2).all(|w| w[1].1 >= w[0].1));

        let phi = assemble_phi(&surfaces, &couplings, &flat, &units(), 1.3).unwrap();
        prop_assert_eq!(phi.entries[0][1], phi.entries[1][0]);
        prop_assert!(phi.entries[0][1] <= 0.0);
        let p11 = pair_integral(&surfaces[0], &surfaces[0], &flat, &units(), 1.3).unwrap();
        let p22 = pair_integral(&surfaces[1], &surfaces[1], &flat, &units(), 1.3).unwrap();
        prop_assert!(phi.entries[0][1].abs() <= (p11 * p22).sqrt());

        let r = solve_ground_state(&surfaces, &couplings, &flat, &units(), &SolverSettings::default()).unwrap();
        prop_assert!(r.energy <= -(n1.max(n2)).powi(2));
        prop_assert!(r.weights.iter().all(|&w| w > 0.0));
        prop_assert!(r.residual < 1e-10);
    }

    #[test]
    fn geodesic_never_shorter_than_chord(r in 0.3f64..3.0, i in 0usize..128, j in 0usize..128) {
        let s = build_sphere(r, Point3::flat(1.0, 2.0, 3.0), 8).unwrap();
        let g = surface_geodesic_distance(&s, i, j).unwrap();
        let chord = ambient_distance(&AmbientSpace::flat(), &s.nodes[i].point, &s.nodes[j].point).unwrap();
        prop_assert!(g >= chord - 1e-12);
    }

    #[test]
    fn hybrid_interlacing(s in 2.5f64..12.0, mu in 0.4f64..1.6, ns in 0.4f64..1.6) {
        let sys = HybridSystem::new(
            vec![build_sphere(1.0, Point3::flat(0.0, 0.0, 0.0), 8).unwrap()],
            vec![Coupling::NuStar(ns)],
            vec![PointSource { position: Point3::flat(s, 0.0, 0.0), mu }],
            AmbientSpace::flat(),
            units(),
        ).unwrap();
        let r = solve_hybrid_ground_state(&sys, &SolverSettings::default()).unwrap();
        prop_assert!(r.energy < -(mu.max(ns)).powi(2));
        prop_assert!(r.weights.iter().all(|&w| w > 0.0));
    }
}
