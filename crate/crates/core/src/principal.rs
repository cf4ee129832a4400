//! Principal (Krein) matrix assembly, coupling conversions and the
//! ground-state solver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::geometry::{raw_distance, surfaces_intersect, AmbientSpace, PhysicalConstants, Point3, SurfaceMesh};
use crate::hybrid::{point_krein_offset, PointSource};
use crate::kernels::YukawaKernel;
use crate::linalg::{jacobi_eigen, min_eigenvalue, Matrix};

const CHUNK: usize = 4096;

/// Flattened weighted distance list for a double (or single) surface
/// integral. Integration reduces fixed-size chunks in parallel and sums the
/// chunk totals in order, so results do not depend on the thread count.
#[derive(Debug, Clone)]
pub struct PairRule {
    weights: Vec<f64>,
    distances: Vec<f64>,
}

fn check_mesh_space(mesh: &SurfaceMesh, space: &AmbientSpace) -> Result<()> {
    let ms = mesh.space();
    // K is recovered from the mesh center's Minkowski norm, so allow round-off
    let dk = (ms.curvature_k - space.curvature_k).abs();
    if ms.kind != space.kind || dk > 1e-10 * space.curvature_k.abs() {
        return invalid("mesh was built in a different ambient space");
    }
    Ok(())
}

impl PairRule {
    /// Rule for ∬_{a×b}. Coincident meshes get the singular self rule.
    pub fn between(a: &SurfaceMesh, b: &SurfaceMesh, space: &AmbientSpace) -> Result<Self> {
        check_mesh_space(a, space)?;
        check_mesh_space(b, space)?;
        let k = space.curvature_k;
        let rows: Vec<Vec<(f64, f64)>> = if a.coincides_with(b) {
            (0..a.len())
                .into_par_iter()
                .map(|i| {
                    let x = a.nodes[i];
                    a.singular_rule(i)
                        .into_iter()
                        .map(|(p, w)| (x.weight * w, raw_distance(k, &x.point, &p)))
                        .collect()
                })
                .collect()
        } else {
            if surfaces_intersect(a, b) {
                return Err(Error::GeometryViolation("surfaces intersect".into()));
            }
            a.nodes
                .par_iter()
                .map(|x| {
                    b.nodes
                        .iter()
                        .map(|y| (x.weight * y.weight, raw_distance(k, &x.point, &y.point)))
                        .collect()
                })
                .collect()
        };
        Self::from_rows(rows)
    }

    /// Rule for ∫_Σ f(d(x, p)) dμ(x).
    pub fn surface_point(mesh: &SurfaceMesh, p: &Point3, space: &AmbientSpace) -> Result<Self> {
        check_mesh_space(mesh, space)?;
        space.check_point(p)?;
        if mesh.contains_on_surface(p) {
            return Err(Error::GeometryViolation("point lies on the surface".into()));
        }
        let k = space.curvature_k;
        let row = mesh
            .nodes
            .iter()
            .map(|x| (x.weight, raw_distance(k, &x.point, p)))
            .collect();
        Self::from_rows(vec![row])
    }

    fn from_rows(rows: Vec<Vec<(f64, f64)>>) -> Result<Self> {
        let n: usize = rows.iter().map(Vec::len).sum();
        let mut weights = Vec::with_capacity(n);
        let mut distances = Vec::with_capacity(n);
        for (w, d) in rows.into_iter().flatten() {
            if !(d > 0.0) {
                return Err(Error::GeometryViolation(
                    "quadrature nodes of distinct objects coincide".into(),
                ));
            }
            weights.push(w);
            distances.push(d);
        }
        Ok(Self { weights, distances })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn min_distance(&self) -> f64 {
        self.distances.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn integrate<F: Fn(f64) -> f64 + Sync>(&self, f: F) -> f64 {
        let partial: Vec<f64> = self
            .weights
            .par_chunks(CHUNK)
            .zip(self.distances.par_chunks(CHUNK))
            .map(|(w, d)| w.iter().zip(d).map(|(wi, di)| wi * f(*di)).sum::<f64>())
            .collect();
        partial.iter().sum()
    }
}

/// Per-surface interaction strength: a bare coupling λ or the standalone
/// bound-state parameter ν*.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    Lambda(f64),
    NuStar(f64),
}

impl Coupling {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Coupling::Lambda(l) => require_positive("lambda", l),
            Coupling::NuStar(n) => require_positive("nu_star", n),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalMatrix {
    pub nu: f64,
    pub entries: Matrix,
    pub couplings: Vec<Coupling>,
    pub areas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateResult {
    pub energy: f64,
    pub nu_star: f64,
    /// Largest standalone channel threshold the root was measured from.
    pub nu_base: f64,
    /// ν* − nu_base, resolved to full relative precision.
    pub nu_offset: f64,
    pub weights: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

impl BoundStateResult {
    /// ν*² − nu_base², without cancellation.
    pub fn shift_from_base(&self) -> f64 {
        self.nu_offset * (2.0 * self.nu_base + self.nu_offset)
    }
}

/// Root-finding bracket for ν.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub tol: f64,
    pub nu_min: f64,
    pub nu_max: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tol: 1e-10, nu_min: 1e-6, nu_max: 1e3 }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        require_positive("tol", self.tol)?;
        require_positive("nu_min", self.nu_min)?;
        require_positive("nu_max", self.nu_max)?;
        if self.nu_min >= self.nu_max {
            return invalid("solver bracket needs nu_min < nu_max");
        }
        Ok(())
    }
}

/// Unnormalized ∬ G_ν.
pub(crate) fn kernel_integral(rule: &PairRule, space: &AmbientSpace, constants: &PhysicalConstants, nu: f64) -> f64 {
    let g = YukawaKernel::new(space, constants, nu);
    rule.integrate(|d| g.value(d))
}

/// (V_i V_j)^{-1/2} ∬ G_ν dμ dμ′.
pub fn pair_integral(
    mesh_i: &SurfaceMesh,
    mesh_j: &SurfaceMesh,
    space: &AmbientSpace,
    constants: &PhysicalConstants,
    nu: f64,
) -> Result<f64> {
    require_positive("nu", nu)?;
    let rule = PairRule::between(mesh_i, mesh_j, space)?;
    Ok(kernel_integral(&rule, space, constants, nu) / (mesh_i.area * mesh_j.area).sqrt())
}

#[derive(Debug, Clone)]
enum Channel {
    Surface { coupling: Coupling, area: f64, self_rule: PairRule, reference: f64 },
    Point { mu: f64 },
}

/// Mixed surface/point principal matrix with cached quadrature rules.
#[derive(Debug, Clone)]
pub(crate) struct KreinSystem {
    space: AmbientSpace,
    constants: PhysicalConstants,
    channels: Vec<Channel>,
    // (i, j, rule) for i < j surface-surface or surface-point pairs
    cross: Vec<(usize, usize, PairRule)>,
    point_distances: Vec<(usize, usize, f64)>,
}

impl KreinSystem {
    pub(crate) fn new(
        surfaces: &[SurfaceMesh],
        couplings: &[Coupling],
        points: &[PointSource],
        space: &AmbientSpace,
        constants: &PhysicalConstants,
    ) -> Result<Self> {
        if surfaces.len() != couplings.len() {
            return invalid(format!(
                "{} surfaces but {} couplings",
                surfaces.len(),
                couplings.len()
            ));
        }
        if surfaces.is_empty() && points.is_empty() {
            return invalid("system needs at least one surface or point");
        }
        let mut channels = Vec::new();
        for (mesh, coupling) in surfaces.iter().zip(couplings) {
            coupling.validate()?;
            let self_rule = PairRule::between(mesh, mesh, space)?;
            let reference = match *coupling {
                Coupling::Lambda(l) => 1.0 / l,
                Coupling::NuStar(ns) => kernel_integral(&self_rule, space, constants, ns) / mesh.area,
            };
            channels.push(Channel::Surface { coupling: *coupling, area: mesh.area, self_rule, reference });
        }
        for p in points {
            require_positive("mu", p.mu)?;
            space.check_point(&p.position)?;
            channels.push(Channel::Point { mu: p.mu });
        }
        let ns = surfaces.len();
        let rules: Vec<Result<(usize, usize, PairRule)>> = (0..channels.len())
            .flat_map(|i| ((i + 1)..channels.len()).map(move |j| (i, j)))
            .filter(|&(i, _)| i < ns)
            .map(|(i, j)| {
                let rule = if j < ns {
                    PairRule::between(&surfaces[i], &surfaces[j], space)?
                } else {
                    PairRule::surface_point(&surfaces[i], &points[j - ns].position, space)?
                };
                Ok((i, j, rule))
            })
            .collect();
        let cross = rules.into_iter().collect::<Result<Vec<_>>>()?;
        let mut point_distances = Vec::new();
        for a in 0..points.len() {
            for b in (a + 1)..points.len() {
                let d = raw_distance(space.curvature_k, &points[a].position, &points[b].position);
                if !(d > 0.0) {
                    return Err(Error::GeometryViolation("two point sources coincide".into()));
                }
                point_distances.push((ns + a, ns + b, d));
            }
        }
        Ok(Self { space: *space, constants: *constants, channels, cross, point_distances })
    }

    pub(crate) fn dim(&self) -> usize {
        self.channels.len()
    }

    pub(crate) fn surface_self_integral(&self, i: usize, nu: f64) -> f64 {
        match &self.channels[i] {
            Channel::Surface { self_rule, area, .. } => {
                kernel_integral(self_rule, &self.space, &self.constants, nu) / area
            }
            Channel::Point { .. } => f64::NAN,
        }
    }

    /// Φ at ν = base + eta; point diagonals use the offset directly.
    pub(crate) fn matrix(&self, base: f64, eta: f64) -> Matrix {
        let nu = base + eta;
        let n = self.dim();
        let g = YukawaKernel::new(&self.space, &self.constants, nu);
        let mut m = vec![vec![0.0; n]; n];
        for (i, ch) in self.channels.iter().enumerate() {
            m[i][i] = match ch {
                Channel::Surface { self_rule, area, reference, .. } => {
                    reference - self_rule.integrate(|d| g.value(d)) / area
                }
                Channel::Point { mu, .. } => {
                    point_krein_offset(&self.space, &self.constants, *mu, (base - mu) + eta)
                }
            };
        }
        for (i, j, rule) in &self.cross {
            let norm = match (&self.channels[*i], &self.channels[*j]) {
                (Channel::Surface { area: a, .. }, Channel::Surface { area: b, .. }) => (a * b).sqrt(),
                (Channel::Surface { area, .. }, Channel::Point { .. }) => area.sqrt(),
                _ => unreachable!("cross rules always start at a surface"),
            };
            let v = -rule.integrate(|d| g.value(d)) / norm;
            m[*i][*j] = v;
            m[*j][*i] = v;
        }
        for (i, j, d) in &self.point_distances {
            let v = -g.value(*d);
            m[*i][*j] = v;
            m[*j][*i] = v;
        }
        m
    }

    pub(crate) fn couplings(&self) -> Vec<Coupling> {
        self.channels
            .iter()
            .filter_map(|c| match c {
                Channel::Surface { coupling, .. } => Some(*coupling),
                Channel::Point { .. } => None,
            })
            .collect()
    }

    pub(crate) fn areas(&self) -> Vec<f64> {
        self.channels
            .iter()
            .filter_map(|c| match c {
                Channel::Surface { area, .. } => Some(*area),
                Channel::Point { .. } => None,
            })
            .collect()
    }

    fn standalone_threshold(&self, i: usize) -> Result<Option<f64>> {
        Ok(match &self.channels[i] {
            Channel::Surface { coupling: Coupling::NuStar(ns), .. } => Some(*ns),
            Channel::Surface { coupling: Coupling::Lambda(l), self_rule, area, .. } => {
                invert_self_integral(self_rule, *area, &self.space, &self.constants, *l)?
            }
            Channel::Point { mu, .. } => Some(*mu),
        })
    }

    /// Bisection for the zero of ω_min, measured as an offset from the
    /// deepest standalone threshold so that exponentially small tunnelling
    /// shifts keep their relative accuracy.
    pub(crate) fn solve(&self, settings: &SolverSettings) -> Result<BoundStateResult> {
        settings.validate()?;
        let omega = |base: f64, eta: f64| min_eigenvalue(&self.matrix(base, eta));
        let mut base: f64 = 0.0;
        let mut exact_base = false;
        for i in 0..self.dim() {
            if let Some(t) = self.standalone_threshold(i)? {
                if t > base {
                    base = t;
                    exact_base = !matches!(
                        self.channels[i],
                        Channel::Surface { coupling: Coupling::Lambda(_), .. }
                    );
                }
            }
        }
        let mut iterations = 0;
        if base > 0.0 && !exact_base {
            // a λ-form threshold is only known to bisection accuracy
            let mut shrink = 1e-9;
            while omega(base, 0.0) > 0.0 && shrink < 0.5 {
                base *= 1.0 - shrink;
                shrink *= 4.0;
                iterations += 1;
            }
        }
        let mut lo = 0.0;
        if base == 0.0 || omega(base, 0.0) > 0.0 {
            base = 0.0;
            lo = settings.nu_min;
            if omega(0.0, lo) > 0.0 {
                return Err(Error::NoBoundState("no bound state in bracket".into()));
            }
        }
        let scale = base.max(settings.nu_min);
        let mut hi = (scale * 1e-2).max(lo * 2.0);
        loop {
            iterations += 1;
            if omega(base, hi) > 0.0 {
                break;
            }
            lo = hi;
            hi *= 2.0;
            if base + hi > settings.nu_max {
                return Err(Error::NoBoundState("no bound state in bracket".into()));
            }
        }
        let floor = 1e-30 * scale.max(1.0);
        let mut converged = false;
        for _ in 0..600 {
            let lo_eff = lo.max(floor);
            if hi - lo_eff <= 1e-13 * hi && hi - lo_eff <= settings.tol {
                converged = true;
                break;
            }
            iterations += 1;
            let mid = (lo_eff * hi).sqrt();
            if omega(base, mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if !converged {
            return Err(Error::NoConvergence("bisection did not reach tolerance".into()));
        }
        let eta = 0.5 * (lo.max(floor) + hi);
        let eig = jacobi_eigen(&self.matrix(base, eta));
        let residual = eig.values[0].abs();
        let mut weights = eig.vectors[0].clone();
        if weights.iter().sum::<f64>() < 0.0 {
            weights.iter_mut().for_each(|w| *w = -*w);
        }
        let nu = base + eta;
        Ok(BoundStateResult {
            energy: -nu * nu,
            nu_star: nu,
            nu_base: base,
            nu_offset: eta,
            weights,
            converged: residual < settings.tol,
            iterations,
            residual,
        })
    }
}

/// Solves P(ν) = 1/λ by geometric bisection on [1e-8, 1e4].
fn invert_self_integral(
    rule: &PairRule,
    area: f64,
    space: &AmbientSpace,
    constants: &PhysicalConstants,
    lambda: f64,
) -> Result<Option<f64>> {
    let target = 1.0 / lambda;
    let p = |nu: f64| kernel_integral(rule, space, constants, nu) / area;
    let mut lo = 1e-8;
    let mut hi = 1e4;
    if target >= p(lo) {
        return Ok(None);
    }
    if target <= p(hi) {
        return Err(Error::NoConvergence(format!(
            "coupling {lambda} is too strong to bracket nu below {hi}"
        )));
    }
    while hi / lo - 1.0 > 1e-15 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if p(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some((lo * hi).sqrt()))
}

/// Assembles Φ(−ν²) for surfaces only.
pub fn assemble_phi(
    surfaces: &[SurfaceMesh],
    couplings: &[Coupling],
    space: &AmbientSpace,
    constants: &PhysicalConstants,
    nu: f64,
) -> Result<PrincipalMatrix> {
    require_positive("nu", nu)?;
    let sys = KreinSystem::new(surfaces, couplings, &[], space, constants)?;
    Ok(PrincipalMatrix {
        nu,
        entries: sys.matrix(0.0, nu),
        couplings: sys.couplings(),
        areas: sys.areas(),
    })
}

/// λ = 1/P(ν*).
pub fn coupling_from_energy(
    mesh: &SurfaceMesh,
    space: &AmbientSpace,
    constants: &PhysicalConstants,
    nu_star: f64,
) -> Result<f64> {
    Ok(1.0 / pair_integral(mesh, mesh, space, constants, nu_star)?)
}

/// Standalone bound-state parameter for coupling λ, or `None` below the
/// critical coupling.
pub fn energy_from_coupling(
    mesh: &SurfaceMesh,
    space: &AmbientSpace,
    constants: &PhysicalConstants,
    lambda: f64,
) -> Result<Option<f64>> {
    require_positive("lambda", lambda)?;
    let rule = PairRule::between(mesh, mesh, space)?;
    invert_self_integral(&rule, mesh.area, space, constants, lambda)
}

/// ω_min(ν) on each grid point.
pub fn lowest_eigenvalue_flow(
    surfaces: &[SurfaceMesh],
    couplings: &[Coupling],
    space: &AmbientSpace,
    constants: &PhysicalConstants,
    nu_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if nu_grid.windows(2).any(|w| w[1] <= w[0]) || nu_grid.iter().any(|&n| !(n > 0.0)) {
        return invalid("nu grid must be positive and strictly increasing");
    }
    let sys = KreinSystem::new(surfaces, couplings, &[], space, constants)?;
    Ok(nu_grid
        .iter()
        .map(|&nu| (nu, min_eigenvalue(&sys.matrix(0.0, nu))))
        .collect())
}

/// Ground state by bisection on ω_min.
pub fn solve_ground_state(
    surfaces: &[SurfaceMesh],
    couplings: &[Coupling],
    space: &AmbientSpace,
    constants: &PhysicalConstants,
    settings: &SolverSettings,
) -> Result<BoundStateResult> {
    KreinSystem::new(surfaces, couplings, &[], space, constants)?.solve(settings)
}

/// ∫_Σ G_ν(d(x, y)) dμ(y).
pub fn single_surface_amplitude(
    mesh: &SurfaceMesh,
    space: &AmbientSpace,
    constants: &PhysicalConstants,
    nu: f64,
    x: &Point3,
) -> Result<f64> {
    let rule = PairRule::surface_point(mesh, x, space)?;
    Ok(kernel_integral(&rule, space, constants, nu))
}

/// ψ(x) = Σᵢ Aᵢ Vᵢ^{-1/2} ∫_{Σᵢ} G_{ν*}(d(x, y)) dμ(y).
pub fn wavefunction(
    result: &BoundStateResult,
    surfaces: &[SurfaceMesh],
    space: &AmbientSpace,
    constants: &PhysicalConstants,
    x: &Point3,
) -> Result<f64> {
    if !result.converged {
        return Err(Error::InvalidState("bound-state result did not converge".into()));
    }
    if result.weights.len() < surfaces.len() {
        return invalid("result has fewer weights than surfaces");
    }
    let mut psi = 0.0;
    for (mesh, a) in surfaces.iter().zip(&result.weights) {
        psi += a * single_surface_amplitude(mesh, space, constants, result.nu_star, x)? / mesh.area.sqrt();
    }
    Ok(psi)
}
