//! Closed-form sphere results in flat space.

use std::f64::consts::PI;

use crate::error::{invalid, require_positive, Error, Result};
use crate::geometry::PhysicalConstants;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereOracleInput {
    pub radius: f64,
    pub nu: f64,
    /// Distance of an external point from the sphere centre.
    pub s: Option<f64>,
    pub constants: PhysicalConstants,
}

impl SphereOracleInput {
    pub fn new(radius: f64, nu: f64) -> Self {
        Self { radius, nu, s: None, constants: PhysicalConstants::default() }
    }

    pub fn with_point(mut self, s: f64) -> Self {
        self.s = Some(s);
        self
    }

    fn validate(&self) -> Result<()> {
        require_positive("radius", self.radius)?;
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return invalid(format!("nu must be >= 0, got {}", self.nu));
        }
        Ok(())
    }

    fn kappa(&self) -> f64 {
        self.constants.kappa_per_nu() * self.nu
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

/// (1/V)∬ G over sphere × sphere = (m/ℏ²κ)(1 − e^{−2κR}).
pub fn sphere_pair_integral_exact(inp: &SphereOracleInput) -> Result<f64> {
    inp.validate()?;
    let c = inp.constants;
    let r = inp.radius;
    Ok(2.0 * c.mass * r / (c.hbar * c.hbar) * one_minus_exp_over(2.0 * inp.kappa() * r))
}

/// Z = −∂/∂α ∬ G at α = ν².
pub fn sphere_z_exact(inp: &SphereOracleInput) -> Result<f64> {
    inp.validate()?;
    require_positive("nu", inp.nu)?;
    let c = inp.constants;
    let cc = c.kappa_per_nu();
    let r = inp.radius;
    let nu = inp.nu;
    let x = 2.0 * cc * nu * r;
    let e = (-x).exp();
    let amp = 4.0 * PI * r * r * c.mass / (c.hbar * c.hbar * cc);
    Ok(amp * (-(-x).exp_m1() - x * e) / (2.0 * nu.powi(3)))
}

/// V^{−1/2}∫_Σ G(d(x, a)) dμ(x) for a point at distance s > R from the
/// centre: (m/ℏ²) e^{−κs} sinh(κR)/(√π κ s).
pub fn sphere_point_potential_exact(inp: &SphereOracleInput) -> Result<f64> {
    inp.validate()?;
    let Some(s) = inp.s else {
        return invalid("point distance s is required");
    };
    if s <= inp.radius {
        return Err(Error::UnsupportedRegime("point must lie outside the sphere".into()));
    }
    require_positive("nu", inp.nu)?;
    let c = inp.constants;
    let k = inp.kappa();
    let r = inp.radius;
    // sinh(κR)e^{−κs} = (e^{−κ(s−R)} − e^{−κ(s+R)})/2
    let num = 0.5 * ((-k * (s - r)).exp() - (-k * (s + r)).exp());
    Ok(c.mass / (c.hbar * c.hbar) * num / (PI.sqrt() * k * s))
}

/// ∫_Σ G(d(x, y)) dμ(y) at distance `r` from the centre, inside or outside.
pub fn sphere_shell_amplitude_exact(inp: &SphereOracleInput, r: f64) -> Result<f64> {
    inp.validate()?;
    require_positive("nu", inp.nu)?;
    let c = inp.constants;
    let k = inp.kappa();
    let big_r = inp.radius;
    let a = c.kernel_prefactor() * 4.0 * PI * big_r / k;
    Ok(if r == 0.0 {
        a * k * (-k * big_r).exp()
    } else if r < big_r {
        a * (-k * big_r).exp() * (k * r).sinh() / r
    } else if r > big_r {
        a * 0.5 * ((-k * (r - big_r)).exp() - (-k * (r + big_r)).exp()) / r
    } else {
        return Err(Error::DivergentInput("point on the sphere".into()));
    })
}
