//! Point sources coupled to surfaces.
//!
//! A point enters only through its renormalized Krein diagonal, fixed by
//! its standalone bound-state parameter μ.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::geometry::{AmbientKind, AmbientSpace, PhysicalConstants, Point3, SurfaceMesh};
use crate::kernels::YukawaKernel;
use crate::principal::{BoundStateResult, Coupling, KreinSystem, PairRule, PrincipalMatrix, SolverSettings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSource {
    pub position: Point3,
    pub mu: f64,
}

#[derive(Debug, Clone)]
pub struct HybridSystem {
    pub surfaces: Vec<SurfaceMesh>,
    pub couplings: Vec<Coupling>,
    pub points: Vec<PointSource>,
    pub space: AmbientSpace,
    pub constants: PhysicalConstants,
}

/// Krein diagonal of a point source at ν = μ + delta, evaluated without
/// forming ν − μ.
pub(crate) fn point_krein_offset(space: &AmbientSpace, constants: &PhysicalConstants, mu: f64, delta: f64) -> f64 {
    let a = constants.kernel_prefactor();
    let c = constants.kappa_per_nu();
    match space.kind {
        AmbientKind::Flat => a * c * delta,
        AmbientKind::Hyperbolic => {
            let k = space.curvature_k;
            let nu = mu + delta;
            let q_nu = (k + c * c * nu * nu).sqrt();
            let q_mu = (k + c * c * mu * mu).sqrt();
            a * c * c * delta * (2.0 * mu + delta) / (q_nu + q_mu)
        }
    }
}

/// (1/ℏ)∫dt K_t(a,a)(e^{−μ²t/ℏ} − e^{−ν²t/ℏ}).
pub fn point_krein(space: &AmbientSpace, constants: &PhysicalConstants, mu: f64, nu: f64) -> Result<f64> {
    require_positive("mu", mu)?;
    require_positive("nu", nu)?;
    Ok(point_krein_offset(space, constants, mu, nu - mu))
}

/// (1/ℏ)∫dt (t/ℏ) K_t(a,a) e^{−μ²t/ℏ}: the ν²-slope of the point diagonal at ν = μ.
pub fn point_time_moment(space: &AmbientSpace, constants: &PhysicalConstants, mu: f64) -> Result<f64> {
    require_positive("mu", mu)?;
    let a = constants.kernel_prefactor();
    let c = constants.kappa_per_nu();
    Ok(match space.kind {
        AmbientKind::Flat => a * c / (2.0 * mu),
        AmbientKind::Hyperbolic => {
            let q = (space.curvature_k + c * c * mu * mu).sqrt();
            a * c * c / (2.0 * q)
        }
    })
}

impl HybridSystem {
    pub fn new(
        surfaces: Vec<SurfaceMesh>,
        couplings: Vec<Coupling>,
        points: Vec<PointSource>,
        space: AmbientSpace,
        constants: PhysicalConstants,
    ) -> Result<Self> {
        let sys = Self { surfaces, couplings, points, space, constants };
        if sys.surfaces.len() != sys.couplings.len() {
            return invalid("each surface needs exactly one coupling");
        }
        for p in &sys.points {
            require_positive("mu", p.mu)?;
            sys.space.check_point(&p.position)?;
        }
        if !sys.surfaces.is_empty() && !sys.points.is_empty() && !(sys.min_surface_point_distance()? > 0.0) {
            return Err(Error::GeometryViolation("point lies on a surface".into()));
        }
        Ok(sys)
    }

    /// d_*: smallest node-resolved distance between any surface and point.
    pub fn min_surface_point_distance(&self) -> Result<f64> {
        let mut best = f64::INFINITY;
        for mesh in &self.surfaces {
            for p in &self.points {
                best = best.min(PairRule::surface_point(mesh, &p.position, &self.space)?.min_distance());
            }
        }
        Ok(best)
    }

    fn krein(&self) -> Result<KreinSystem> {
        KreinSystem::new(&self.surfaces, &self.couplings, &self.points, &self.space, &self.constants)
    }
}

/// Φ(−ν²) of size N+M: surfaces first, then points.
pub fn assemble_hybrid_phi(sys: &HybridSystem, nu: f64) -> Result<PrincipalMatrix> {
    require_positive("nu", nu)?;
    let k = sys.krein()?;
    Ok(PrincipalMatrix { nu, entries: k.matrix(0.0, nu), couplings: k.couplings(), areas: k.areas() })
}

pub fn solve_hybrid_ground_state(sys: &HybridSystem, settings: &SolverSettings) -> Result<BoundStateResult> {
    sys.krein()?.solve(settings)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbativeShift {
    /// δμ², the deepening of the point level.
    pub delta_mu2: f64,
    /// Surface diagonal at ν = μ.
    pub surface_diagonal: f64,
    /// Surface–point off-diagonal magnitude at ν = μ.
    pub off_diagonal: f64,
    pub time_moment: f64,
}

/// Second-order shift of the point level −μ² from one far surface.
pub fn perturbative_shift(sys: &HybridSystem) -> Result<PerturbativeShift> {
    if sys.surfaces.len() != 1 || sys.points.len() != 1 {
        return invalid("perturbative shift needs exactly one surface and one point");
    }
    let mesh = &sys.surfaces[0];
    let point = sys.points[0];
    let mu = point.mu;
    let g = YukawaKernel::new(&sys.space, &sys.constants, mu);
    let self_rule = PairRule::between(mesh, mesh, &sys.space)?;
    let p_mu = self_rule.integrate(|d| g.value(d)) / mesh.area;
    let surface_diagonal = match sys.couplings[0] {
        Coupling::Lambda(l) => 1.0 / l - p_mu,
        Coupling::NuStar(ns) => {
            let gs = YukawaKernel::new(&sys.space, &sys.constants, ns);
            self_rule.integrate(|d| gs.value(d)) / mesh.area - p_mu
        }
    };
    if surface_diagonal.abs() <= 1e-9 * p_mu {
        return Err(Error::DegeneratePerturbation(
            "surface has a bound state at the point level".into(),
        ));
    }
    let rule = PairRule::surface_point(mesh, &point.position, &sys.space)?;
    let off_diagonal = rule.integrate(|d| g.value(d)) / mesh.area.sqrt();
    let time_moment = point_time_moment(&sys.space, &sys.constants, mu)?;
    Ok(PerturbativeShift {
        delta_mu2: off_diagonal * off_diagonal / (time_moment * surface_diagonal),
        surface_diagonal,
        off_diagonal,
        time_moment,
    })
}

/// Log-linear fit of the far-point off-diagonal to
/// C₁√V/d_* · exp(−C₂ c μ d_*), with c = √(2m)/ℏ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFit {
    pub c1: f64,
    pub c2: f64,
    /// Smallest C₁ for which the envelope with C₂ = 1/2 covers every sample.
    pub c1_at_half: f64,
}

pub fn fit_far_point_envelope(
    mesh: &SurfaceMesh,
    space: &AmbientSpace,
    constants: &PhysicalConstants,
    mu: f64,
    positions: &[Point3],
) -> Result<EnvelopeFit> {
    require_positive("mu", mu)?;
    if positions.len() < 2 {
        return invalid("envelope fit needs at least two positions");
    }
    let g = YukawaKernel::new(space, constants, mu);
    let cm = constants.kappa_per_nu() * mu;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut c1_half: f64 = 0.0;
    for p in positions {
        let rule = PairRule::surface_point(mesh, p, space)?;
        let d = rule.min_distance();
        let b = rule.integrate(|r| g.value(r)) / mesh.area.sqrt();
        let scaled = b * d / mesh.area.sqrt();
        xs.push(cm * d);
        ys.push(scaled.ln());
        c1_half = c1_half.max(scaled * (0.5 * cm * d).exp());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return invalid("envelope fit needs distinct distances");
    }
    let slope = sxy / sxx;
    Ok(EnvelopeFit { c1: (my - slope * mx).exp(), c2: -slope, c1_at_half: c1_half })
}
