use std::f64::consts::PI;

use shellbound::geometry::{build_sphere, AmbientSpace, PhysicalConstants, Point3, SurfaceMesh};
use shellbound::hybrid::*;
use shellbound::oracles::{sphere_point_potential_exact, SphereOracleInput};
use shellbound::principal::{pair_integral, Coupling, SolverSettings};
use shellbound::Error;

fn units() -> PhysicalConstants {
    PhysicalConstants::default()
}

fn unit_sphere(order: usize) -> SurfaceMesh {
    build_sphere(1.0, Point3::flat(0.0, 0.0, 0.0), order).unwrap()
}

fn system(coupling: Coupling, mu: f64, s: f64, order: usize) -> HybridSystem {
    HybridSystem::new(
        vec![unit_sphere(order)],
        vec![coupling],
        vec![PointSource { position: Point3::flat(0.0, 0.0, s), mu }],
        AmbientSpace::flat(),
        units(),
    )
    .unwrap()
}

#[test]
fn point_diagonal_closed_form() {
    let flat = AmbientSpace::flat();
    assert_eq!(point_krein(&flat, &units(), 1.0, 1.0).unwrap(), 0.0);
    for (nu, mu) in [(2.0, 1.0), (3.0, 1.0), (0.4, 1.7)] {
        let v = point_krein(&flat, &units(), mu, nu).unwrap();
        assert!((v - (nu - mu) / (4.0 * PI)).abs() < 1e-10);
    }
    assert!((point_time_moment(&flat, &units(), 1.0).unwrap() - 1.0 / (8.0 * PI)).abs() < 1e-15);
    assert!(point_krein(&flat, &units(), 0.0, 1.0).is_err());
}

#[test]
fn point_diagonal_other_units_match_time_integral() {
    let c = PhysicalConstants::new(0.7, 1.9).unwrap();
    let flat = AmbientSpace::flat();
    let (mu, nu) = (0.8, 1.6);
    let k = |t: f64| (c.mass / (2.0 * PI * c.hbar * t)).powf(1.5);
    let (val, _) = shellbound::quadrature::integrate_adaptive(
        |u: f64| {
            let t = u.exp();
            t * k(t) * ((-mu * mu * t / c.hbar).exp_m1() - (-nu * nu * t / c.hbar).exp_m1()) / c.hbar
        },
        -90.0,
        8.0,
        1e-14,
        1e-12,
        4000,
    );
    let v = point_krein(&flat, &c, mu, nu).unwrap();
    assert!(((v - val) / val).abs() < 1e-9, "{v} vs {val}");
}

#[test]
fn hyperbolic_point_diagonal_matches_time_integral() {
    let k_curv = 0.6;
    let space = AmbientSpace::hyperbolic(k_curv).unwrap();
    let c = units();
    let (mu, nu) = (0.5, 1.3);
    let diag = |t: f64| (c.mass / (2.0 * PI * t)).powf(1.5) * (-k_curv * t / (2.0 * c.mass)).exp();
    let (val, _) = shellbound::quadrature::integrate_adaptive(
        |u: f64| {
            let t = u.exp();
            t * diag(t) * ((-mu * mu * t).exp_m1() - (-nu * nu * t).exp_m1())
        },
        -90.0,
        8.0,
        1e-14,
        1e-12,
        4000,
    );
    let v = point_krein(&space, &c, mu, nu).unwrap();
    assert!(((v - val) / val).abs() < 1e-9, "{v} vs {val}");
}

#[test]
fn surface_point_entry_matches_shell_oracle() {
    let sys = system(Coupling::NuStar(1.0), 1.0, 2.0, 32);
    let phi = assemble_hybrid_phi(&sys, 1.0).unwrap();
    let exact = sphere_point_potential_exact(&SphereOracleInput::new(1.0, 1.0).with_point(2.0)).unwrap();
    assert!((exact - 0.022433).abs() < 1e-6);
    assert!(((-phi.entries[0][1] - exact) / exact).abs() < 1e-6);
    assert_eq!(phi.entries[0][1], phi.entries[1][0]);
}

#[test]
fn point_only_system_binds_at_mu() {
    let sys = HybridSystem::new(
        vec![],
        vec![],
        vec![PointSource { position: Point3::flat(0.0, 0.0, 0.0), mu: 1.3 }],
        AmbientSpace::flat(),
        units(),
    )
    .unwrap();
    let r = solve_hybrid_ground_state(&sys, &SolverSettings::default()).unwrap();
    assert_eq!(r.nu_star, 1.3);
}

#[test]
fn two_points_split_symmetrically() {
    let sys = HybridSystem::new(
        vec![],
        vec![],
        vec![
            PointSource { position: Point3::flat(0.0, 0.0, 0.0), mu: 1.0 },
            PointSource { position: Point3::flat(0.0, 0.0, 2.0), mu: 1.0 },
        ],
        AmbientSpace::flat(),
        units(),
    )
    .unwrap();
    // symmetric mode: (ν − μ)/(4π) = e^{−νd}/(4πd)
    let r = solve_hybrid_ground_state(&sys, &SolverSettings::default()).unwrap();
    let nu = r.nu_star;
    assert!((nu - 1.0 - (-2.0 * nu).exp() / 2.0).abs() < 1e-10);
    assert!((r.weights[0] - r.weights[1]).abs() < 1e-10);
}

#[test]
fn far_point_decouples() {
    let sys = system(Coupling::NuStar(1.0), 1.0, 50.0, 12);
    let phi = assemble_hybrid_phi(&sys, 1.0).unwrap();
    let slope = point_time_moment(&sys.space, &sys.constants, 1.0).unwrap();
    assert!(phi.entries[0][1].abs() < 1e-20 * slope);
}

#[test]
fn point_on_surface_is_rejected() {
    let r = HybridSystem::new(
        vec![unit_sphere(8)],
        vec![Coupling::NuStar(1.0)],
        vec![PointSource { position: Point3::flat(0.0, 0.0, 1.0), mu: 1.0 }],
        AmbientSpace::flat(),
        units(),
    );
    assert!(matches!(r, Err(Error::GeometryViolation(_))));
}

#[test]
fn interlacing_for_surface_and_point() {
    let settings = SolverSettings::default();
    let mut prev = f64::NEG_INFINITY;
    for s in [3.0, 6.0, 10.0, 20.0] {
        let r = solve_hybrid_ground_state(&system(Coupling::NuStar(1.0), 1.0, s, 12), &settings).unwrap();
        assert!(r.energy < -1.0, "s={s}: {}", r.energy);
        assert!(r.energy > prev);
        prev = r.energy;
        assert!(r.weights.iter().all(|&w| w > 0.0));
    }
    // resonant pair at s = 3 splits by far more than 1e-6
    let r = solve_hybrid_ground_state(&system(Coupling::NuStar(1.0), 1.0, 3.0, 12), &settings).unwrap();
    assert!(r.energy < -1.0 - 1e-6);
    // non-degenerate levels
    let r = solve_hybrid_ground_state(&system(Coupling::NuStar(0.8), 1.2, 3.0, 12), &settings).unwrap();
    assert!(r.energy < -1.44);
}

#[test]
fn perturbative_shift_converges_with_separation() {
    let settings = SolverSettings::default();
    let mut errors = Vec::new();
    for s in [5.0, 10.0, 15.0] {
        let sys = system(Coupling::Lambda(1.5), 1.0, s, 16);
        let p = perturbative_shift(&sys).unwrap();
        assert!(p.delta_mu2 > 0.0 && p.surface_diagonal > 0.0);
        let exact = solve_hybrid_ground_state(&sys, &settings).unwrap();
        let shift = exact.shift_from_base();
        errors.push(((p.delta_mu2 - shift) / p.delta_mu2).abs());
    }
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    assert!(errors[1] < 0.1);
}

#[test]
fn resonant_point_is_degenerate() {
    let mesh = unit_sphere(12);
    let flat = AmbientSpace::flat();
    let lambda = 1.0 / pair_integral(&mesh, &mesh, &flat, &units(), 1.0).unwrap();
    let sys = system(Coupling::Lambda(lambda), 1.0, 10.0, 12);
    assert!(matches!(perturbative_shift(&sys), Err(Error::DegeneratePerturbation(_))));
    let sys = system(Coupling::NuStar(1.0), 1.0, 10.0, 12);
    assert!(matches!(perturbative_shift(&sys), Err(Error::DegeneratePerturbation(_))));
}

#[test]
fn envelope_decay_rate() {
    let mesh = unit_sphere(12);
    let positions: Vec<Point3> = [4.0, 6.0, 8.0, 10.0, 14.0].iter().map(|&s| Point3::flat(0.0, 0.0, s)).collect();
    let fit = fit_far_point_envelope(&mesh, &AmbientSpace::flat(), &units(), 1.0, &positions).unwrap();
    // the off-diagonal decays like e^{−cμ d}/d up to a slowly varying factor
    assert!((fit.c2 - 1.0).abs() < 0.05, "{fit:?}");
    assert!(fit.c1 > 0.0 && fit.c1_at_half.is_finite());
}
