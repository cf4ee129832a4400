//! Critical-coupling bounds, Geršgorin ground-state bounds and finiteness
//! certificates for the principal matrix diagonal.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::geometry::{AmbientSpace, PhysicalConstants, SurfaceMesh};
use crate::kernels::{bessel_k1, KernelBoundConstants};
use crate::principal::{kernel_integral, pair_integral, Coupling, KreinSystem, PairRule};
use crate::quadrature::gauss_legendre_on;

/// Jacobian of the exponential map in the space form of curvature `k_signed`.
pub fn space_form_jacobian(k_signed: f64, r: f64) -> Result<f64> {
    require_positive("r", r)?;
    if k_signed > 0.0 {
        let s = k_signed.sqrt();
        if s * r >= PI {
            return Err(Error::OutOfChart(format!("r = {r} beyond pi/sqrt(K)")));
        }
        Ok((s * r).sin() / s)
    } else if k_signed == 0.0 {
        Ok(r)
    } else {
        let s = (-k_signed).sqrt();
        Ok((s * r).sinh() / s)
    }
}

/// 1/λ_C approximated by P(nu_floor).
pub fn critical_coupling_exact(
    mesh: &SurfaceMesh,
    space: &AmbientSpace,
    constants: &PhysicalConstants,
    nu_floor: f64,
) -> Result<f64> {
    if !(nu_floor > 0.0 && nu_floor <= 1e-2) {
        return invalid(format!("nu_floor must be in (0, 1e-2], got {nu_floor}"));
    }
    pair_integral(mesh, mesh, space, constants, nu_floor)
}

/// Richardson estimate 2P(ν/2) − P(ν) of the ν → 0 limit of P.
pub fn critical_coupling_richardson(
    mesh: &SurfaceMesh,
    space: &AmbientSpace,
    constants: &PhysicalConstants,
    nu_floor: f64,
) -> Result<f64> {
    if !(nu_floor > 0.0 && nu_floor <= 1e-2) {
        return invalid(format!("nu_floor must be in (0, 1e-2], got {nu_floor}"));
    }
    let rule = PairRule::between(mesh, mesh, space)?;
    let p = |nu| kernel_integral(&rule, space, constants, nu) / mesh.area;
    Ok(2.0 * p(0.5 * nu_floor) - p(nu_floor))
}

/// 1/λ ≥ m V e^{−cν d}/(2πℏ² d) with d the ambient diameter.
pub fn coupling_bound_diameter(mesh: &SurfaceMesh, constants: &PhysicalConstants, nu: f64) -> Result<f64> {
    if !(nu >= 0.0) {
        return invalid(format!("nu must be >= 0, got {nu}"));
    }
    let d = mesh.diameter_ambient;
    Ok(constants.kernel_prefactor() * mesh.area * (-constants.kappa_per_nu() * nu * d).exp() / d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AmbientRicci {
    NonnegativeRicci,
    NegativeRicci(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SubmanifoldCurvature {
    Zero,
    Positive(f64),
    Negative(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCase {
    pub ambient: AmbientRicci,
    pub submanifold_h: SubmanifoldCurvature,
    pub rho_star: f64,
    pub nu: f64,
}

impl BoundCase {
    fn validate(&self) -> Result<()> {
        require_positive("rho_star", self.rho_star)?;
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return invalid(format!("nu must be >= 0, got {}", self.nu));
        }
        if let AmbientRicci::NegativeRicci(k) = self.ambient {
            require_positive("K", k)?;
        }
        match self.submanifold_h {
            SubmanifoldCurvature::Positive(h) | SubmanifoldCurvature::Negative(h) => require_positive("H", h),
            SubmanifoldCurvature::Zero => Ok(()),
        }
    }
}

/// (1 − e^{−x})/x, accurate for small x.
fn one_minus_exp_over(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 - x / 2.0 + x * x / 6.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// Closed-form lower bound on 1/λ for the given curvature case at ν.
pub fn coupling_bound_model(case: &BoundCase, constants: &PhysicalConstants) -> Result<f64> {
    case.validate()?;
    let mh = constants.mass / (constants.hbar * constants.hbar);
    let c = constants.kappa_per_nu();
    let b = c * case.nu;
    let rho = case.rho_star;
    match case.ambient {
        AmbientRicci::NonnegativeRicci => Ok(match case.submanifold_h {
            SubmanifoldCurvature::Zero => mh * rho * one_minus_exp_over(b * rho),
            SubmanifoldCurvature::Positive(h) => {
                let sh = h.sqrt();
                mh / (2.0 * sh) * one_minus_exp_over(b * rho) * (sh * rho + (sh * rho).sin())
            }
            SubmanifoldCurvature::Negative(h) => {
                let sh = h.sqrt();
                let a = 0.5 * sh;
                let denom = 1.0 - 4.0 * b * b / h;
                if denom.abs() < 1e-6 {
                    // removable singularity at b = √H/2: integrate directly
                    mh * gauss_legendre_on(48, 0.0, rho)
                        .iter()
                        .map(|(r, w)| w * (a * r).cosh() * (-b * r).exp())
                        .sum::<f64>()
                } else {
                    let e = (-b * rho).exp();
                    2.0 * mh / sh
                        * ((a * rho).sinh() * e + 2.0 * b / sh * ((a * rho).cosh() * e - 1.0))
                        / denom
                }
            }
        }),
        AmbientRicci::NegativeRicci(k) => {
            let sk = k.sqrt();
            let beta = ((b * b + k) / PI).sqrt();
            let sp = PI.sqrt();
            match case.submanifold_h {
                SubmanifoldCurvature::Zero => Ok(mh * sp * rho * one_minus_exp_over((sk + beta) * rho)),
                SubmanifoldCurvature::Positive(h) => {
                    let x = h.sqrt() * rho;
                    Ok(0.5 * mh * sp * rho * one_minus_exp_over((sk + beta) * rho) * (1.0 + x.sin() / x))
                }
                SubmanifoldCurvature::Negative(h) => {
                    if h >= k {
                        return Err(Error::UnsupportedRegime(format!(
                            "negative-curvature bound needs H < K (H = {h}, K = {k})"
                        )));
                    }
                    Ok(mh * sp * rho * one_minus_exp_over((h.sqrt() + sk + beta) * rho))
                }
            }
        }
    }
}

/// ν → 0 limit of [`coupling_bound_model`] in closed form.
pub fn coupling_bound_model_limit(case: &BoundCase, constants: &PhysicalConstants) -> Result<f64> {
    case.validate()?;
    let mh = constants.mass / (constants.hbar * constants.hbar);
    let rho = case.rho_star;
    match case.ambient {
        AmbientRicci::NonnegativeRicci => Ok(match case.submanifold_h {
            SubmanifoldCurvature::Zero => mh * rho,
            SubmanifoldCurvature::Positive(h) => {
                let sh = h.sqrt();
                mh / (2.0 * sh) * (sh * rho + (sh * rho).sin())
            }
            SubmanifoldCurvature::Negative(h) => {
                let sh = h.sqrt();
                2.0 * mh / sh * (0.5 * sh * rho).sinh()
            }
        }),
        AmbientRicci::NegativeRicci(k) => {
            let sk = k.sqrt();
            let sp = PI.sqrt();
            let rate = sk * (1.0 + 1.0 / sp);
            let base = mh * PI * (1.0 - (-rate * rho).exp()) / (sk * (1.0 + sp));
            match case.submanifold_h {
                SubmanifoldCurvature::Zero => Ok(base),
                SubmanifoldCurvature::Positive(h) => {
                    let x = h.sqrt() * rho;
                    Ok(0.5 * base * (1.0 + x.sin() / x))
                }
                SubmanifoldCurvature::Negative(h) => {
                    if h >= k {
                        return Err(Error::UnsupportedRegime(format!(
                            "negative-curvature bound needs H < K (H = {h}, K = {k})"
                        )));
                    }
                    let r = h.sqrt() + rate;
                    Ok(mh * sp * (1.0 - (-r * rho).exp()) / r)
                }
            }
        }
    }
}

/// λ_C ≥ (ℏ²/2m)·√(factor·L)/sin(√L ρ/2) for a surface deformed toward
/// lower curvature L.
pub fn deformation_lower_bound(
    l: f64,
    rho_sup: f64,
    chord_arc_factor: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    require_positive("L", l)?;
    require_positive("rho_sup", rho_sup)?;
    let x = l.sqrt() * rho_sup;
    if x >= 2.0 * PI {
        return invalid(format!("sqrt(L)*rho = {x} must be below 2 pi"));
    }
    if !(chord_arc_factor > 0.0 && chord_arc_factor < 1.0) {
        return invalid(format!("chord-arc factor {chord_arc_factor} not in (0,1)"));
    }
    let h2m = constants.hbar * constants.hbar / (2.0 * constants.mass);
    Ok(h2m * (chord_arc_factor * l).sqrt() / (0.5 * x).sin())
}

/// How the off-diagonal magnitudes enter the Geršgorin condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffDiagonalSource {
    /// Quadrature values of the matrix entries.
    Quadrature,
    /// √(Pᵢᵢ Pⱼⱼ), finite even for touching surfaces.
    CauchySchwarz,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GersgorinBound {
    pub energy: f64,
    pub nu: f64,
    pub iterations: usize,
}

/// E_* with E_* ≤ E_gr from min|Φᵢᵢ| = (N−1)·max|Φᵢⱼ|.
pub fn gersgorin_energy_bound(
    surfaces: &[SurfaceMesh],
    couplings: &[Coupling],
    space: &AmbientSpace,
    constants: &PhysicalConstants,
    tol: f64,
    source: OffDiagonalSource,
) -> Result<GersgorinBound> {
    require_positive("tol", tol)?;
    let mut nu_stars = Vec::new();
    for c in couplings {
        match *c {
            Coupling::NuStar(n) => nu_stars.push(n),
            Coupling::Lambda(_) => return invalid("Gersgorin bound needs nu_star-form couplings"),
        }
    }
    let n = surfaces.len();
    let nu_max = nu_stars.iter().cloned().fold(0.0, f64::max);
    if n == 1 {
        return Ok(GersgorinBound { energy: -nu_max * nu_max, nu: nu_max, iterations: 0 });
    }
    let sys = KreinSystem::new(surfaces, couplings, &[], space, constants)?;
    let gap = |nu: f64| {
        let m = sys.matrix(0.0, nu);
        let min_diag = (0..n).map(|i| m[i][i].abs()).fold(f64::INFINITY, f64::min);
        let mut max_off: f64 = 0.0;
        let selfs: Vec<f64> = match source {
            OffDiagonalSource::CauchySchwarz => (0..n).map(|i| sys.surface_self_integral(i, nu)).collect(),
            OffDiagonalSource::Quadrature => Vec::new(),
        };
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let v = match source {
                        OffDiagonalSource::Quadrature => m[i][j].abs(),
                        OffDiagonalSource::CauchySchwarz => (selfs[i] * selfs[j]).sqrt(),
                    };
                    max_off = max_off.max(v);
                }
            }
        }
        min_diag - (n as f64 - 1.0) * max_off
    };
    let mut lo = nu_max;
    let mut hi = 2.0 * nu_max;
    let mut iterations = 0;
    while gap(hi) <= 0.0 {
        iterations += 1;
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoConvergence("Gersgorin crossing not bracketed".into()));
        }
    }
    while hi - lo > tol {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(GersgorinBound { energy: -hi * hi, nu: hi, iterations })
}

/// Analytic lower bound on |Φᵢᵢ(−ν²)| for ν ≥ ν* in a nonnegative-Ricci
/// ambient space (Steffensen/Hermite–Hadamard estimate for H ≠ 0).
pub fn gersgorin_diagonal_lower_bound(
    h: SubmanifoldCurvature,
    rho_star: f64,
    nu_star: f64,
    nu: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    require_positive("rho_star", rho_star)?;
    require_positive("nu_star", nu_star)?;
    if nu < nu_star {
        return invalid("need nu >= nu_star");
    }
    let mh = constants.mass / (constants.hbar * constants.hbar);
    let c = constants.kappa_per_nu();
    match h {
        SubmanifoldCurvature::Zero => {
            let g = |n: f64| -(-c * n * rho_star).exp_m1() / n;
            Ok((constants.mass / (2.0 * constants.hbar * constants.hbar)).sqrt() * (g(nu_star) - g(nu)))
        }
        SubmanifoldCurvature::Positive(hv) | SubmanifoldCurvature::Negative(hv) => {
            require_positive("H", hv)?;
            let sh = hv.sqrt();
            let x = rho_star * sh;
            let positive = matches!(h, SubmanifoldCurvature::Positive(_));
            let (front, shifted) = if positive {
                (1.0 - x.cos(), x - 0.5 * (0.5 * x).tan())
            } else {
                (x.cosh() - 1.0, x - 0.5 * (0.5 * x).tanh())
            };
            if !(shifted > 0.0) {
                return Err(Error::OutOfChart("rho_star too large for the Steffensen estimate".into()));
            }
            let cc = c / sh;
            let term = |n: f64| (-cc * n * shifted).exp() / shifted;
            Ok(mh * front / sh * (term(nu_star) - term(nu)))
        }
    }
}

/// Upper envelope of |Φᵢⱼ(−ν²)| for surfaces at minimum distance `d_ij`.
pub fn offdiagonal_envelope(
    kc: &KernelBoundConstants,
    v_m: f64,
    constants: &PhysicalConstants,
    area_i: f64,
    area_j: f64,
    d_ij: f64,
    nu: f64,
) -> Result<f64> {
    kc.validate()?;
    require_positive("d_ij", d_ij)?;
    require_positive("nu", nu)?;
    if !(v_m > 0.0) {
        return invalid("ambient volume must be > 0 or infinite");
    }
    let a = (2.0 * constants.mass / (kc.c3 * constants.hbar * constants.hbar)).sqrt();
    let vol = if v_m.is_infinite() { 0.0 } else { kc.c1 / v_m * (a * d_ij / nu + 1.0 / (nu * nu)) };
    let local = kc.c2 * kc.c3.sqrt() / (2.0 * PI) * constants.mass / (constants.hbar * constants.hbar * d_ij);
    Ok((area_i * area_j).sqrt() * (vol + local) * (-a * nu * d_ij).exp())
}

/// Both sides of the closed-form Geršgorin condition for N flat spheres
/// (off-diagonal from the Cauchy–Schwarz estimate), common prefactor dropped.
pub fn sphere_example_gersgorin(
    radii: &[f64],
    nu_stars: &[f64],
    constants: &PhysicalConstants,
    nu: f64,
) -> Result<(f64, f64)> {
    if radii.is_empty() || radii.len() != nu_stars.len() {
        return invalid("need one nu_star per sphere radius");
    }
    require_positive("nu", nu)?;
    let fold = |v: &[f64], f: fn(f64, f64) -> f64, init| v.iter().cloned().fold(init, f);
    let r_min = fold(radii, f64::min, f64::INFINITY);
    let r_max = fold(radii, f64::max, 0.0);
    let n_min = fold(nu_stars, f64::min, f64::INFINITY);
    let n_max = fold(nu_stars, f64::max, 0.0);
    let c = constants.kappa_per_nu();
    let big = -(-2.0 * c * r_max * nu).exp_m1() / nu;
    let lhs = -(-2.0 * c * r_min * n_min).exp_m1() / n_max - big;
    let rhs = (radii.len() as f64 - 1.0) * (big + (-2.0 * 2f64.sqrt() * c * r_min * nu).exp() / (4.0 * nu));
    Ok((lhs, rhs))
}

/// Energy where the sphere-example condition first holds (bisection above max ν*).
pub fn sphere_example_energy_bound(
    radii: &[f64],
    nu_stars: &[f64],
    constants: &PhysicalConstants,
    tol: f64,
) -> Result<f64> {
    let n_max = nu_stars.iter().cloned().fold(0.0, f64::max);
    require_positive("nu_star", n_max)?;
    let gap = |nu: f64| sphere_example_gersgorin(radii, nu_stars, constants, nu).map(|(l, r)| l - r);
    let mut lo = n_max;
    let mut hi = 2.0 * n_max;
    while gap(hi)? <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::NoConvergence("sphere-example condition never holds".into()));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(-hi * hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinitenessCertificate {
    pub term_i: f64,
    pub term_ii: f64,
    pub nu: f64,
    pub nu_star: f64,
    pub constants_used: KernelBoundConstants,
    /// Quadrature value of Φᵢᵢ(−ν²) in ν*-form.
    pub phi_diagonal: f64,
    /// Exact time integral of the volume term, (C1/V_M)(1/ν*² − 1/ν²).
    pub term_i_direct: f64,
    /// The Bessel-K₁ surface integral for the volume term, for comparison.
    pub term_i_bessel: f64,
}

impl FinitenessCertificate {
    pub fn holds(&self) -> bool {
        self.phi_diagonal <= self.term_i + self.term_ii
    }
}

/// Upper bounds I and II on Φᵢᵢ(−ν²) from the heat-kernel upper bound,
/// the chord–arc inequality and volume comparison with curvature ≥ h_lower.
pub fn finiteness_certificate(
    mesh: &SurfaceMesh,
    space: &AmbientSpace,
    constants: &PhysicalConstants,
    kc: &KernelBoundConstants,
    v_m: f64,
    nu_star: f64,
    nu: f64,
) -> Result<FinitenessCertificate> {
    kc.validate()?;
    require_positive("nu_star", nu_star)?;
    if !(nu > nu_star) {
        return invalid("finiteness certificate needs nu > nu_star");
    }
    if !(v_m > 0.0) {
        return invalid("ambient volume must be > 0 or infinite");
    }
    let Some(meta) = mesh.curvature else {
        return invalid("finiteness certificate requires curvature metadata (h_lower, rho_max, chord_arc_delta, chord_arc_kappa)");
    };
    meta.validate()?;
    let hbar = constants.hbar;
    let m = constants.mass;
    let one_minus = 1.0 - meta.chord_arc_product();
    let alpha = (2.0 * m * one_minus / (kc.c3 * hbar * hbar)).sqrt();
    let rho = meta.rho_max;
    let vol = if v_m.is_infinite() { 0.0 } else { kc.c1 / v_m };
    let (term_i, term_ii) = if meta.h_lower < 0.0 {
        let l = -meta.h_lower;
        let sl = l.sqrt();
        let g = |n: f64| {
            let x = alpha * n * rho;
            (-2.0 * (-x).exp_m1() - x * (-x).exp()) / n.powi(3)
        };
        let i = 2.0 * PI * vol * (kc.c3 * hbar * hbar / (2.0 * m)).sqrt() * (sl * rho).sinh()
            / (sl * one_minus)
            * (g(nu_star) - g(nu));
        let h = |n: f64| -(-alpha * n * rho).exp_m1() / n;
        let ii = kc.c2 * kc.c3 / one_minus * (m / (2.0 * hbar * hbar)).sqrt() * (sl * rho).sinh() / (sl * rho)
            * (h(nu_star) - h(nu));
        (i, ii)
    } else {
        // same integrals with J_L for L ≥ 0, by quadrature
        let jac = |r: f64| {
            if meta.h_lower > 0.0 {
                // the quadrature nodes stay inside the chart even when ρ reaches π/√L
                Ok((meta.h_lower.sqrt() * r).sin() / meta.h_lower.sqrt())
            } else {
                space_form_jacobian(meta.h_lower, r)
            }
        };
        if meta.h_lower > 0.0 && meta.h_lower.sqrt() * rho > PI * (1.0 + 1e-12) {
            return Err(Error::OutOfChart("rho_max beyond the conjugate radius of h_lower".into()));
        }
        let pref_i = 2.0 * PI * vol * (2.0 * m / (kc.c3 * hbar * hbar)).sqrt();
        let pref_ii = kc.c2 * kc.c3.sqrt() * m / (hbar * hbar * one_minus.sqrt());
        let f = |r: f64, n: f64| (r + 1.0 / (alpha * n)) * (-alpha * n * r).exp() / n;
        let mut i = 0.0;
        let mut ii = 0.0;
        for (r, w) in gauss_legendre_on(64, 0.0, rho) {
            let j = jac(r)?;
            i += w * j * (f(r, nu_star) - f(r, nu));
            ii += w * j / r * ((-alpha * nu_star * r).exp() - (-alpha * nu * r).exp());
        }
        (pref_i * i, pref_ii * ii)
    };
    let rule = PairRule::between(mesh, mesh, space)?;
    let phi_diagonal = (kernel_integral(&rule, space, constants, nu_star)
        - kernel_integral(&rule, space, constants, nu))
        / mesh.area;
    let term_i_direct = vol * (1.0 / (nu_star * nu_star) - 1.0 / (nu * nu));
    let term_i_bessel = if vol == 0.0 {
        0.0
    } else {
        let a = (2.0 * m / (kc.c3 * hbar * hbar)).sqrt();
        let integral = rule.integrate(|d| {
            let k_star = bessel_k1(a * nu_star * d).unwrap_or(0.0);
            let k_nu = bessel_k1(a * nu * d).unwrap_or(0.0);
            d / (nu_star * nu) * (nu * k_star - nu_star * k_nu)
        });
        vol / mesh.area * a * integral
    };
    Ok(FinitenessCertificate {
        term_i,
        term_ii,
        nu,
        nu_star,
        constants_used: *kc,
        phi_diagonal,
        term_i_direct,
        term_i_bessel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_sphere, build_torus, Point3, SurfaceCurvatureMeta};

    fn units() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn case(ambient: AmbientRicci, h: SubmanifoldCurvature, rho: f64, nu: f64) -> BoundCase {
        BoundCase { ambient, submanifold_h: h, rho_star: rho, nu }
    }

    #[test]
    fn jacobian_values() {
        assert_eq!(space_form_jacobian(0.0, 0.7).unwrap(), 0.7);
        assert!((space_form_jacobian(1.0, PI / 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((space_form_jacobian(-1.0, 1.0).unwrap() - 1.175_201_193_643_801_4).abs() < 1e-14);
        assert!(matches!(space_form_jacobian(1.0, PI), Err(Error::OutOfChart(_))));
        for k in [-3.0, 0.0, 2.0] {
            assert!((space_form_jacobian(k, 1e-6).unwrap() / 1e-6 - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn diameter_bound_unit_sphere() {
        let s = build_sphere(1.0, Point3::flat(0.0, 0.0, 0.0), 16).unwrap();
        assert!((coupling_bound_diameter(&s, &units(), 0.0).unwrap() - 0.5).abs() < 1e-12);
        let v = coupling_bound_diameter(&s, &units(), 1.0).unwrap();
        assert!((v - 0.5 * (-2f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn model_bounds_examples() {
        let u = units();
        let flat = AmbientRicci::NonnegativeRicci;
        let v = coupling_bound_model(&case(flat, SubmanifoldCurvature::Zero, 1.0, 0.0), &u).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        let v = coupling_bound_model(&case(flat, SubmanifoldCurvature::Positive(1.0), PI / 2.0, 0.0), &u).unwrap();
        assert!((v - 0.25 * (PI / 2.0 + 1.0)).abs() < 1e-15);
        let r = coupling_bound_model(
            &case(AmbientRicci::NegativeRicci(1.0), SubmanifoldCurvature::Negative(1.0), 1.0, 0.0),
            &u,
        );
        assert!(matches!(r, Err(Error::UnsupportedRegime(_))));
    }

    #[test]
    fn model_bounds_are_continuous_at_zero() {
        let u = units();
        let cases = [
            (AmbientRicci::NonnegativeRicci, SubmanifoldCurvature::Zero),
            (AmbientRicci::NonnegativeRicci, SubmanifoldCurvature::Positive(1.3)),
            (AmbientRicci::NonnegativeRicci, SubmanifoldCurvature::Negative(0.7)),
            (AmbientRicci::NegativeRicci(1.0), SubmanifoldCurvature::Zero),
            (AmbientRicci::NegativeRicci(2.0), SubmanifoldCurvature::Positive(1.0)),
            (AmbientRicci::NegativeRicci(2.0), SubmanifoldCurvature::Negative(0.5)),
        ];
        for (a, h) in cases {
            let lim = coupling_bound_model_limit(&case(a, h, 1.2, 0.0), &u).unwrap();
            let at0 = coupling_bound_model(&case(a, h, 1.2, 0.0), &u).unwrap();
            let near = coupling_bound_model(&case(a, h, 1.2, 1e-7), &u).unwrap();
            assert!((at0 - lim).abs() < 1e-8 * lim, "{a:?} {h:?}: {at0} vs {lim}");
            assert!((near - lim).abs() < 1e-5 * lim);
            let far = coupling_bound_model(&case(a, h, 1.2, 1.0), &u).unwrap();
            assert!(far < at0);
        }
    }

    #[test]
    fn negative_h_model_matches_direct_integral() {
        // flat ambient, H < 0: (m/ℏ²)∫ cosh(√H r/2) e^{-cνr} dr, including the removable point
        let u = units();
        let h = 0.81;
        for nu in [0.0, 0.3, 0.45, 0.45 + 1e-9, 2.0] {
            let v = coupling_bound_model(&case(AmbientRicci::NonnegativeRicci, SubmanifoldCurvature::Negative(h), 1.5, nu), &u)
                .unwrap();
            let (direct, _) = crate::quadrature::integrate_adaptive(
                |r| 0.5 * (0.5 * h.sqrt() * r).cosh() * (-nu * r).exp(),
                0.0,
                1.5,
                1e-15,
                1e-13,
                200,
            );
            assert!((v - direct).abs() < 1e-10 * direct, "nu={nu}: {v} vs {direct}");
        }
    }

    #[test]
    fn deformation_bound_examples() {
        let u = units();
        let v = deformation_lower_bound(1.0, PI / 2.0, 0.9, &u).unwrap();
        assert!((v - 0.9f64.sqrt() / (PI / 4.0).sin()).abs() < 1e-14);
        let v = deformation_lower_bound(1.0, PI / 2.0, 1.0 - 1e-15, &u).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-12);
        let mut prev = 0.0;
        for k in 0..=20 {
            let l = 0.5 + k as f64 * 0.05;
            let v = deformation_lower_bound(l, PI / 2.0, 0.9, &u).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!(deformation_lower_bound(1.0, 7.0, 0.5, &u).is_err());
        assert!(deformation_lower_bound(1.0, 1.0, 1.0, &u).is_err());
    }

    #[test]
    fn sphere_critical_coupling() {
        let space = AmbientSpace::flat();
        for r in [1.0, 2.0] {
            let s = build_sphere(r, Point3::flat(0.0, 0.0, 0.0), 16).unwrap();
            let v = critical_coupling_exact(&s, &space, &units(), 1e-4).unwrap();
            assert!((v - r).abs() < 1e-3);
            let rich = critical_coupling_richardson(&s, &space, &units(), 1e-4).unwrap();
            assert!((rich - r).abs() < 1e-7 * r);
        }
        let s = build_sphere(1.0, Point3::flat(0.0, 0.0, 0.0), 8).unwrap();
        assert!(critical_coupling_exact(&s, &space, &units(), 0.1).is_err());
    }

    #[test]
    fn gersgorin_single_surface_is_exact() {
        let s = build_sphere(1.0, Point3::flat(0.0, 0.0, 0.0), 8).unwrap();
        let b = gersgorin_energy_bound(
            &[s],
            &[Coupling::NuStar(0.7)],
            &AmbientSpace::flat(),
            &units(),
            1e-10,
            OffDiagonalSource::Quadrature,
        )
        .unwrap();
        assert_eq!(b.energy, -0.7 * 0.7);
    }

    #[test]
    fn sphere_example_bound_below_numeric_bound() {
        let e = sphere_example_energy_bound(&[1.0, 1.0], &[1.0, 1.0], &units(), 1e-12).unwrap();
        let (lhs, rhs) = sphere_example_gersgorin(&[1.0, 1.0], &[1.0, 1.0], &units(), (-e).sqrt()).unwrap();
        assert!((lhs - rhs).abs() < 1e-9);
        assert!(e < -1.0);
    }

    #[test]
    fn steffensen_diagonal_bounds_are_positive_and_grow() {
        let u = units();
        for h in [SubmanifoldCurvature::Zero, SubmanifoldCurvature::Positive(1.0), SubmanifoldCurvature::Negative(1.0)] {
            let a = gersgorin_diagonal_lower_bound(h, 1.0, 0.5, 0.5, &u).unwrap();
            assert!(a.abs() < 1e-15);
            let b = gersgorin_diagonal_lower_bound(h, 1.0, 0.5, 1.0, &u).unwrap();
            let c = gersgorin_diagonal_lower_bound(h, 1.0, 0.5, 2.0, &u).unwrap();
            assert!(0.0 < b && b < c, "{h:?}");
        }
    }

    #[test]
    fn sphere_diagonal_formula_is_below_exact_diagonal() {
        // exact Φᵢᵢ for the unit sphere: (1−e^{−2ν*})/(2ν*) − (1−e^{−2ν})/(2ν)
        let p = |n: f64| -(-2.0 * n).exp_m1() / (2.0 * n);
        let rho = PI / 2.0;
        for nu in [0.6, 1.0, 3.0] {
            let bound =
                gersgorin_diagonal_lower_bound(SubmanifoldCurvature::Zero, rho, 0.5, nu, &units()).unwrap();
            assert!(bound <= p(0.5) - p(nu));
        }
    }

    #[test]
    fn envelope_dominates_exact_flat_offdiagonal() {
        // two unit spheres at centre distance D: P₁₂ = sinh²(ν)e^{−νD}/(ν²D) (R = 1, c = 1)
        let kc = KernelBoundConstants::new(1.0, 1.0, 1.0).unwrap();
        let area = 4.0 * PI;
        for (big_d, nu) in [(4.0f64, 1.0f64), (6.0, 0.5), (3.0, 2.0)] {
            let exact = nu.sinh().powi(2) * (-nu * big_d).exp() / (nu * nu * big_d);
            let env = offdiagonal_envelope(&kc, f64::INFINITY, &units(), area, area, big_d - 2.0, nu).unwrap();
            assert!(exact <= env, "{exact} > {env}");
        }
    }

    #[test]
    fn torus_certificate_holds_and_vanishes_at_threshold() {
        let meta = SurfaceCurvatureMeta {
            h_upper: 1.0 / (0.5 * 1.5),
            h_lower: -1.0 / (0.5 * 1.5),
            rho_min: 0.5,
            // polar radius covering the whole torus: meridian plus half a parallel
            rho_max: PI * (2.0 + 2.0 * 0.5),
            chord_arc_delta: 0.32,
            chord_arc_kappa: 2.0,
        };
        let torus = build_torus(2.0, 0.5, Point3::flat(0.0, 0.0, 0.0), 12).unwrap().with_curvature(meta).unwrap();
        let kc = KernelBoundConstants::new(1.0, 1.0, 1.0).unwrap();
        let space = AmbientSpace::flat();
        let mut prev = (0.0, 0.0);
        for nu in [0.6, 1.0, 2.0, 4.0] {
            let c = finiteness_certificate(&torus, &space, &units(), &kc, 100.0, 0.5, nu).unwrap();
            assert!(c.term_i.is_finite() && c.term_ii.is_finite());
            assert!(c.holds(), "nu={nu}: {} > {} + {}", c.phi_diagonal, c.term_i, c.term_ii);
            assert!(c.term_i > prev.0 && c.term_ii > prev.1);
            prev = (c.term_i, c.term_ii);
        }
        // all three sides vanish linearly as ν → ν*
        let near = |eps: f64| finiteness_certificate(&torus, &space, &units(), &kc, 100.0, 0.5, 0.5 + eps).unwrap();
        let (a, b) = (near(1e-6), near(1e-8));
        for (x, y) in [(a.term_i, b.term_i), (a.term_ii, b.term_ii), (a.phi_diagonal, b.phi_diagonal)] {
            assert!((x / y - 100.0).abs() < 1e-2, "{x} {y}");
        }
        assert!(b.holds());
        let bare = torus.without_curvature();
        assert!(matches!(
            finiteness_certificate(&bare, &space, &units(), &kc, 100.0, 0.5, 1.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn sphere_certificate_uses_positive_curvature_branch() {
        let s = build_sphere(1.0, Point3::flat(0.0, 0.0, 0.0), 12).unwrap();
        let kc = KernelBoundConstants::new(1.0, 1.0, 1.0).unwrap();
        for nu in [0.7, 1.5, 3.0] {
            let c = finiteness_certificate(&s, &AmbientSpace::flat(), &units(), &kc, f64::INFINITY, 0.5, nu).unwrap();
            assert_eq!(c.term_i, 0.0);
            assert!(c.holds(), "nu={nu}: {} > {}", c.phi_diagonal, c.term_ii);
        }
    }
}
