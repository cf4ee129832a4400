use std::f64::consts::PI;

use shellbound::bounds::*;
use shellbound::geometry::{build_ellipsoid, build_sphere, AmbientSpace, PhysicalConstants, Point3, SurfaceMesh};
use shellbound::principal::{pair_integral, solve_ground_state, Coupling, SolverSettings};

fn units() -> PhysicalConstants {
    PhysicalConstants::default()
}

fn sphere(x: f64, y: f64, z: f64, r: f64) -> SurfaceMesh {
    build_sphere(r, Point3::flat(x, y, z), 12).unwrap()
}

fn check_gersgorin(surfaces: &[SurfaceMesh], nu_stars: &[f64], source: OffDiagonalSource) -> (f64, f64) {
    let flat = AmbientSpace::flat();
    let couplings: Vec<Coupling> = nu_stars.iter().map(|&n| Coupling::NuStar(n)).collect();
    let bound = gersgorin_energy_bound(surfaces, &couplings, &flat, &units(), 1e-10, source).unwrap();
    let exact = solve_ground_state(surfaces, &couplings, &flat, &units(), &SolverSettings::default()).unwrap();
    assert!(bound.energy <= exact.energy, "{} > {}", bound.energy, exact.energy);
    (bound.energy, exact.energy)
}

#[test]
fn gersgorin_below_ground_state() {
    let pair = [sphere(0.0, 0.0, 0.0, 1.0), sphere(4.0, 0.0, 0.0, 1.0)];
    let (q, _) = check_gersgorin(&pair, &[1.0, 1.0], OffDiagonalSource::Quadrature);
    let (cs, _) = check_gersgorin(&pair, &[1.0, 1.0], OffDiagonalSource::CauchySchwarz);
    assert!(cs <= q);

    let triple = [sphere(0.0, 0.0, 0.0, 1.0), sphere(4.0, 0.0, 0.0, 1.0), sphere(2.0, 3.5, 0.0, 1.2)];
    check_gersgorin(&triple, &[1.0, 0.8, 1.1], OffDiagonalSource::Quadrature);
    let asym = [sphere(0.0, 0.0, 0.0, 1.0), sphere(0.0, 0.0, 4.0, 1.5)];
    check_gersgorin(&asym, &[1.0, 1.0], OffDiagonalSource::Quadrature);
}

#[test]
fn touching_spheres_stay_finite() {
    let pair = [sphere(0.0, 0.0, 0.0, 1.0), sphere(2.0, 0.0, 0.0, 1.0)];
    let (e, _) = check_gersgorin(&pair, &[1.0, 1.0], OffDiagonalSource::CauchySchwarz);
    assert!(e.is_finite());
    let (e, _) = check_gersgorin(&pair, &[1.0, 1.0], OffDiagonalSource::Quadrature);
    assert!(e.is_finite());
}

#[test]
fn cauchy_schwarz_dominates_cross_entries() {
    let flat = AmbientSpace::flat();
    let meshes = [sphere(0.0, 0.0, 0.0, 1.0), sphere(2.0, 0.0, 0.0, 1.0), sphere(0.0, 3.0, 0.0, 0.7)];
    for nu in [0.3, 1.0, 2.5] {
        for i in 0..3 {
            for j in 0..3 {
                let pij = pair_integral(&meshes[i], &meshes[j], &flat, &units(), nu).unwrap();
                let pii = pair_integral(&meshes[i], &meshes[i], &flat, &units(), nu).unwrap();
                let pjj = pair_integral(&meshes[j], &meshes[j], &flat, &units(), nu).unwrap();
                assert!(pij <= (pii * pjj).sqrt() * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn sphere_example_condition_is_conservative() {
    let pair = [sphere(0.0, 0.0, 0.0, 1.0), sphere(4.0, 0.0, 0.0, 1.0)];
    let (_, exact) = check_gersgorin(&pair, &[1.0, 1.0], OffDiagonalSource::Quadrature);
    let e = sphere_example_energy_bound(&[1.0, 1.0], &[1.0, 1.0], &units(), 1e-12).unwrap();
    assert!(e <= exact);
    let touching = [sphere(0.0, 0.0, 0.0, 1.0), sphere(2.0, 0.0, 0.0, 1.0)];
    let (_, exact) = check_gersgorin(&touching, &[1.0, 1.0], OffDiagonalSource::Quadrature);
    assert!(e <= exact);
}

#[test]
fn bound_hierarchy_for_unit_sphere() {
    let flat = AmbientSpace::flat();
    let s = build_sphere(1.0, Point3::flat(0.0, 0.0, 0.0), 16).unwrap();
    let exact = critical_coupling_exact(&s, &flat, &units(), 1e-4).unwrap();
    assert!((exact - 1.0).abs() < 1e-3);
    let diameter = coupling_bound_diameter(&s, &units(), 0.0).unwrap();
    let case = BoundCase {
        ambient: AmbientRicci::NonnegativeRicci,
        submanifold_h: SubmanifoldCurvature::Positive(1.0),
        rho_star: PI / 2.0,
        nu: 0.0,
    };
    let model = coupling_bound_model(&case, &units()).unwrap();
    assert!((diameter - 0.5).abs() < 1e-12 && (model - 0.642699).abs() < 1e-6);
    assert!(diameter <= exact && model <= exact);
    // the bounds hold at every ν, not only at threshold
    for nu in [0.2, 1.0, 3.0] {
        let p = pair_integral(&s, &s, &flat, &units(), nu).unwrap();
        assert!(coupling_bound_diameter(&s, &units(), nu).unwrap() <= p);
        assert!(coupling_bound_model(&BoundCase { nu, ..case }, &units()).unwrap() <= p);
    }
}

#[test]
fn prolate_deformation_direction_is_recorded() {
    // equal-area comparison: sphere radius from the ellipsoid's quadrature area
    let flat = AmbientSpace::flat();
    let e = build_ellipsoid(1.0, 1.0, 1.1, Point3::flat(0.0, 0.0, 0.0), 24).unwrap();
    let r = (e.area / (4.0 * PI)).sqrt();
    let s = build_sphere(r, Point3::flat(0.0, 0.0, 0.0), 24).unwrap();
    let ce = critical_coupling_richardson(&e, &flat, &units(), 1e-4).unwrap();
    let cs = critical_coupling_richardson(&s, &flat, &units(), 1e-4).unwrap();
    assert!((ce - cs).abs() > 1e-6, "ellipsoid and sphere should differ: {ce} vs {cs}");
    println!("1/lambda_C: ellipsoid {ce:.9}, equal-area sphere {cs:.9}, sign {}", (ce - cs).signum());
}
