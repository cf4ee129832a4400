//! Heat kernels of the model spaces, their time-Laplace transforms and
//! the modified Bessel function K₁.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::geometry::{AmbientKind, AmbientSpace, PhysicalConstants};
use crate::quadrature::integrate_adaptive;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticKernelQuery {
    pub nu: f64,
    pub distance: f64,
    pub space: AmbientSpace,
    pub constants: PhysicalConstants,
}

/// Constants C₁, C₂, C₃ of the off-diagonal heat-kernel upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelBoundConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl KernelBoundConstants {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        let kc = Self { c1, c2, c3 };
        kc.validate()?;
        Ok(kc)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("C1", self.c1)?;
        require_positive("C2", self.c2)?;
        require_positive("C3", self.c3)
    }
}

fn gaussian(constants: &PhysicalConstants, t: f64, d: f64, c3: f64) -> f64 {
    let m = constants.mass;
    let h = constants.hbar;
    (m / (2.0 * PI * h * t)).powf(1.5) * (-m * d * d / (2.0 * c3 * h * t)).exp()
}

/// x / sinh(x), accurate near zero.
pub(crate) fn x_over_sinh(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x / x.sinh()
    }
}

fn check_time(t: f64, d: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return invalid(format!("time must be > 0, got {t}"));
    }
    if !(d >= 0.0) {
        return invalid(format!("distance must be >= 0, got {d}"));
    }
    Ok(())
}

/// Heat kernel K_t at geodesic distance `d`.
pub fn heat_kernel(space: &AmbientSpace, constants: &PhysicalConstants, t: f64, d: f64) -> Result<f64> {
    check_time(t, d)?;
    let g = gaussian(constants, t, d, 1.0);
    Ok(match space.kind {
        AmbientKind::Flat => g,
        AmbientKind::Hyperbolic => {
            let k = space.curvature_k;
            g * x_over_sinh(k.sqrt() * d) * (-k * constants.hbar * t / (2.0 * constants.mass)).exp()
        }
    })
}

/// Lower heat-kernel bound for ambient spaces with nonnegative Ricci
/// curvature (the flat Gaussian, with the distance squared).
pub fn heat_kernel_lower_bound(constants: &PhysicalConstants, t: f64, d: f64) -> Result<f64> {
    check_time(t, d)?;
    Ok(gaussian(constants, t, d, 1.0))
}

/// Upper bound `C1/V_M + C2·(m/2πℏt)^{3/2}·exp(−m d²/(2 C3 ℏ t))`.
/// Pass `f64::INFINITY` for a noncompact ambient space.
pub fn heat_kernel_upper_bound(
    kc: &KernelBoundConstants,
    v_m: f64,
    constants: &PhysicalConstants,
    t: f64,
    d: f64,
) -> Result<f64> {
    kc.validate()?;
    if !(v_m > 0.0) {
        return invalid(format!("ambient volume must be > 0 or infinite, got {v_m}"));
    }
    check_time(t, d)?;
    let vol_term = if v_m.is_infinite() { 0.0 } else { kc.c1 / v_m };
    Ok(vol_term + kc.c2 * gaussian(constants, t, d, kc.c3))
}

/// Static (resolvent) kernel and its α-derivatives at fixed ν = √α.
///
/// `value` is G = (1/ℏ)∫dt e^{−ν²t/ℏ}K_t; `first` is −∂G/∂α and `second`
/// is ∂²G/∂α². The α-derivatives are finite at d = 0.
#[derive(Debug, Clone, Copy)]
pub struct YukawaKernel {
    prefactor: f64,
    c: f64,
    nu: f64,
    sqrt_k: f64,
    q: f64,
}

impl YukawaKernel {
    pub fn new(space: &AmbientSpace, constants: &PhysicalConstants, nu: f64) -> Self {
        let c = constants.kappa_per_nu();
        let k = space.curvature_k;
        let q = (k + c * c * nu * nu).sqrt();
        Self {
            prefactor: constants.kernel_prefactor(),
            c,
            nu,
            sqrt_k: k.sqrt(),
            q,
        }
    }

    fn hyperbolic(&self) -> bool {
        self.sqrt_k > 0.0
    }

    #[inline]
    pub fn value(&self, d: f64) -> f64 {
        if self.hyperbolic() {
            let x = self.sqrt_k * d;
            // √K/sinh(√K d) without overflow for large d
            let geom = if x > 30.0 {
                2.0 * self.sqrt_k * (-x).exp() / (1.0 - (-2.0 * x).exp())
            } else {
                self.sqrt_k / x.sinh()
            };
            self.prefactor * geom * (-d * self.q).exp()
        } else {
            self.prefactor * (-self.c * self.nu * d).exp() / d
        }
    }

    /// −∂G/∂α.
    #[inline]
    pub fn first(&self, d: f64) -> f64 {
        let c2 = self.c * self.c;
        if self.hyperbolic() {
            let gd = self.prefactor * x_over_sinh(self.sqrt_k * d) * (-d * self.q).exp();
            gd * c2 / (2.0 * self.q)
        } else {
            self.prefactor * self.c * (-self.c * self.nu * d).exp() / (2.0 * self.nu)
        }
    }

    /// ∂²G/∂α².
    #[inline]
    pub fn second(&self, d: f64) -> f64 {
        let c2 = self.c * self.c;
        if self.hyperbolic() {
            let gd = self.prefactor * x_over_sinh(self.sqrt_k * d) * (-d * self.q).exp();
            gd * c2 * c2 * (d * self.q + 1.0) / (4.0 * self.q.powi(3))
        } else {
            let csd = self.c * self.nu * d;
            self.prefactor * self.c * (-csd).exp() * (1.0 + csd) / (4.0 * self.nu.powi(3))
        }
    }
}

/// Closed-form static kernel.
pub fn static_kernel(q: &StaticKernelQuery) -> Result<f64> {
    if !(q.nu >= 0.0 && q.nu.is_finite()) {
        return invalid(format!("nu must be >= 0, got {}", q.nu));
    }
    if !(q.distance >= 0.0) {
        return invalid(format!("distance must be >= 0, got {}", q.distance));
    }
    if q.distance == 0.0 {
        return Err(Error::DivergentInput("static kernel is singular at zero distance".into()));
    }
    Ok(YukawaKernel::new(&q.space, &q.constants, q.nu).value(q.distance))
}

/// Static kernel by adaptive quadrature of the heat kernel in log-time,
/// truncated at t_max = (40 + cνd)ℏ/ν². Returns `(value, tail_bound)`, the
/// tail bound dropping the Gaussian factor beyond t_max.
pub fn static_kernel_numeric(q: &StaticKernelQuery) -> Result<(f64, f64)> {
    require_positive("nu", q.nu)?;
    require_positive("distance", q.distance)?;
    let h = q.constants.hbar;
    let m = q.constants.mass;
    let nu2 = q.nu * q.nu;
    // 40 e-folds past the peak of the Laplace integrand, which sits at exponent cνd
    let peak = q.constants.kappa_per_nu() * q.nu * q.distance;
    let t_max = (40.0 + peak) * h / nu2;
    // below this the Gaussian factor is under e^{-200}
    let t_min = (m * q.distance * q.distance / (2.0 * h * 200.0)).min(t_max * 1e-12);
    let f = |u: f64| {
        let t = u.exp();
        let k = heat_kernel(&q.space, &q.constants, t, q.distance).unwrap_or(0.0);
        k * (-nu2 * t / h).exp() * t / h
    };
    let (v, _) = integrate_adaptive(f, t_min.ln(), t_max.ln(), 0.0, 1e-13, 2000);
    let tail = (m / (2.0 * PI * h * t_max)).powf(1.5) * (-(40.0 + peak)).exp() / nu2;
    Ok((v, tail))
}

/// Modified Bessel function of the second kind, order one.
pub fn bessel_k1(z: f64) -> Result<f64> {
    if !(z > 0.0) || z.is_nan() {
        return invalid(format!("bessel_k1 needs z > 0, got {z}"));
    }
    if z <= 2.0 {
        Ok(k1_series(z))
    } else {
        Ok(k1_continued_fraction(z))
    }
}

fn k1_series(z: f64) -> f64 {
    const EULER: f64 = 0.577_215_664_901_532_9;
    let y = z * z / 4.0;
    // I1(z) = (z/2) Σ y^k / (k!(k+1)!)
    let mut i1 = 0.0;
    let mut tail = 0.0;
    let mut term = 1.0; // y^k / (k!(k+1)!)
    let mut psi_k1 = -EULER; // ψ(k+1)
    for k in 0..60 {
        let kf = k as f64;
        if k > 0 {
            term *= y / (kf * (kf + 1.0));
            psi_k1 += 1.0 / kf;
        }
        let psi_k2 = psi_k1 + 1.0 / (kf + 1.0);
        i1 += term;
        tail += (psi_k1 + psi_k2) * term;
        if term < 1e-18 * i1 {
            break;
        }
    }
    let i1 = i1 * z / 2.0;
    1.0 / z + (z / 2.0).ln() * i1 - z / 4.0 * tail
}

// Steed's method (CF2) for K0, K1 at x ≥ 2.
fn k1_continued_fraction(x: f64) -> f64 {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25; // 0.25 - μ² with μ = 0
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    k0 * (x + 0.5 - a1 * h) / x
}
