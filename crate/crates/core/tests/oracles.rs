use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shellbound::geometry::{build_sphere, AmbientSpace, PhysicalConstants, Point3};
use shellbound::hybrid::{assemble_hybrid_phi, HybridSystem, PointSource};
use shellbound::kernels::YukawaKernel;
use shellbound::oracles::*;
use shellbound::principal::{pair_integral, single_surface_amplitude, Coupling};
use shellbound::variational::normalization_z;

fn units() -> PhysicalConstants {
    PhysicalConstants::default()
}

#[test]
fn quadrature_reproduces_every_oracle_at_order_32() {
    let flat = AmbientSpace::flat();
    for r in [0.6, 1.0, 2.0] {
        let s = build_sphere(r, Point3::flat(0.3, -0.1, 0.2), 32).unwrap();
        for nu in [0.25, 1.0, 2.0] {
            let inp = SphereOracleInput::new(r, nu);
            let p = pair_integral(&s, &s, &flat, &units(), nu).unwrap();
            let e = sphere_pair_integral_exact(&inp).unwrap();
            assert!(((p - e) / e).abs() < 1e-6);
            let z = normalization_z(&s, &flat, &units(), nu * nu).unwrap();
            let ze = sphere_z_exact(&inp).unwrap();
            assert!(((z - ze) / ze).abs() < 1e-6, "Z r={r} nu={nu}: {z} vs {ze}");
        }
    }
}

#[test]
fn normalization_at_nu_two() {
    // closed form π(1 − 5e^{−4})/8 for the unit sphere
    let z = sphere_z_exact(&SphereOracleInput::new(1.0, 2.0)).unwrap();
    assert!((z - PI * (1.0 - 5.0 * (-4.0f64).exp()) / 8.0).abs() < 1e-15);
    assert!((z - 0.356736).abs() < 1e-6);
}

#[test]
fn oracles_in_other_units() {
    let c = PhysicalConstants::new(0.9, 1.3).unwrap();
    let flat = AmbientSpace::flat();
    let s = build_sphere(1.4, Point3::flat(0.0, 0.0, 0.0), 32).unwrap();
    let inp = SphereOracleInput { constants: c, ..SphereOracleInput::new(1.4, 0.8) };
    let p = pair_integral(&s, &s, &flat, &c, 0.8).unwrap();
    let e = sphere_pair_integral_exact(&inp).unwrap();
    assert!(((p - e) / e).abs() < 1e-6);
    let z = normalization_z(&s, &flat, &c, 0.64).unwrap();
    let ze = sphere_z_exact(&inp).unwrap();
    assert!(((z - ze) / ze).abs() < 1e-6);
}

#[test]
fn exterior_and_interior_amplitudes() {
    let flat = AmbientSpace::flat();
    let s = build_sphere(1.0, Point3::flat(0.0, 0.0, 0.0), 32).unwrap();
    let inp = SphereOracleInput::new(1.0, 0.7);
    for r in [0.0, 0.4, 0.7, 1.3, 3.0] {
        let q = single_surface_amplitude(&s, &flat, &units(), 0.7, &Point3::flat(0.0, r * 0.6, r * 0.8)).unwrap();
        let e = sphere_shell_amplitude_exact(&inp, r).unwrap();
        assert!(((q - e) / e).abs() < 1e-6, "r={r}: {q} vs {e}");
    }
    let sys = HybridSystem::new(
        vec![s],
        vec![Coupling::NuStar(1.0)],
        vec![PointSource { position: Point3::flat(0.0, 0.0, 2.0), mu: 1.0 }],
        flat,
        units(),
    )
    .unwrap();
    let phi = assemble_hybrid_phi(&sys, 1.0).unwrap();
    let e = sphere_point_potential_exact(&SphereOracleInput::new(1.0, 1.0).with_point(2.0)).unwrap();
    assert!(((-phi.entries[0][1] - e) / e).abs() < 1e-6);
}

#[test]
fn small_nu_point_potential_matches_coulomb_limit() {
    // ν → 0: V^{-1/2}·V·A/s = √(4π)R²/(4π s)
    let v = sphere_point_potential_exact(&SphereOracleInput::new(1.0, 1e-4).with_point(3.0)).unwrap();
    let coulomb = (4.0 * PI).sqrt() / (4.0 * PI * 3.0);
    assert!(((v - coulomb) / coulomb).abs() < 1e-3);
    assert!(sphere_point_potential_exact(&SphereOracleInput::new(1.0, 1.0).with_point(60.0)).unwrap() < 1e-25);
}

fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    let s = (1.0 - z * z).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}

/// Brute-force 4D Monte Carlo with the Coulomb kernel as control variate
/// (its sphere mean is exactly 1/R).
fn monte_carlo_pair_integral(r: f64, nu: f64, samples: usize, seed: u64) -> (f64, f64) {
    let flat = AmbientSpace::flat();
    let g = YukawaKernel::new(&flat, &units(), nu);
    let a = units().kernel_prefactor();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..samples {
        let (p, q) = (unit_vector(&mut rng), unit_vector(&mut rng));
        let d = r * ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
        let x = g.value(d) - a / d;
        sum += x;
        sum2 += x * x;
    }
    let n = samples as f64;
    let mean = sum / n;
    let std_err = ((sum2 / n - mean * mean) / n).sqrt();
    let area = 4.0 * PI * r * r;
    (area * (mean + a / r), area * std_err)
}

#[test]
fn monte_carlo_cross_check_of_sphere_oracle() {
    for (r, nu, seed) in [(1.0, 1.0, 7), (1.0, 0.3, 11), (2.0, 0.5, 13)] {
        let (mc, err) = monte_carlo_pair_integral(r, nu, 400_000, seed);
        let exact = sphere_pair_integral_exact(&SphereOracleInput::new(r, nu)).unwrap();
        assert!(((mc - exact) / exact).abs() < 1e-3, "r={r} nu={nu}: {mc} ± {err} vs {exact}");
        assert!((mc - exact).abs() < 5.0 * err);
    }
}
