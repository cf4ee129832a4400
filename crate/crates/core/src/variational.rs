//! Variational functional for one surface and the multi-surface matrices
//! S, L, K, Φ̃ built from α-derivatives of the static kernel.

use crate::error::{invalid, require_positive, Error, Result};
use crate::geometry::{AmbientSpace, PhysicalConstants, SurfaceMesh};
use crate::kernels::YukawaKernel;
use crate::linalg::{cholesky, cholesky_solve, jacobi_eigen, max_abs_diff, min_eigenvalue, Matrix};
use crate::principal::{assemble_phi, Coupling, PairRule};

/// Trial-state integrals for a single surface with a cached self rule.
struct SingleSurface<'a> {
    rule: PairRule,
    area: f64,
    space: &'a AmbientSpace,
    constants: &'a PhysicalConstants,
}

impl<'a> SingleSurface<'a> {
    fn new(mesh: &SurfaceMesh, space: &'a AmbientSpace, constants: &'a PhysicalConstants) -> Result<Self> {
        Ok(Self { rule: PairRule::between(mesh, mesh, space)?, area: mesh.area, space, constants })
    }

    fn w_and_z(&self, alpha: f64) -> (f64, f64) {
        let g = YukawaKernel::new(self.space, self.constants, alpha.sqrt());
        (self.rule.integrate(|d| g.value(d)), self.rule.integrate(|d| g.first(d)))
    }

    fn energy(&self, lambda: f64, alpha: f64) -> f64 {
        let (w, z) = self.w_and_z(alpha);
        w / z - alpha - lambda / self.area * w * w / z
    }
}

/// Z(α) = −∂/∂α ∬ G_{√α} dμ dμ′.
pub fn normalization_z(
    mesh: &SurfaceMesh,
    space: &AmbientSpace,
    constants: &PhysicalConstants,
    alpha: f64,
) -> Result<f64> {
    require_positive("alpha", alpha)?;
    Ok(SingleSurface::new(mesh, space, constants)?.w_and_z(alpha).1)
}

/// E(α) = W/Z − α − (λ/V)·W²/Z.
pub fn energy_functional(
    mesh: &SurfaceMesh,
    space: &AmbientSpace,
    constants: &PhysicalConstants,
    lambda: f64,
    alpha: f64,
) -> Result<f64> {
    require_positive("alpha", alpha)?;
    require_positive("lambda", lambda)?;
    Ok(SingleSurface::new(mesh, space, constants)?.energy(lambda, alpha))
}

/// Central finite differences (E′, E″) of the energy functional.
pub fn stationarity_check(
    mesh: &SurfaceMesh,
    space: &AmbientSpace,
    constants: &PhysicalConstants,
    lambda: f64,
    alpha: f64,
    h: f64,
) -> Result<(f64, f64)> {
    require_positive("alpha", alpha)?;
    require_positive("lambda", lambda)?;
    if !(h >= 1e-6 * alpha && h <= 1e-2 * alpha) {
        return invalid(format!("step {h} outside [1e-6, 1e-2]·alpha"));
    }
    let f = SingleSurface::new(mesh, space, constants)?;
    let e0 = f.energy(lambda, alpha);
    let ep = f.energy(lambda, alpha + h);
    let em = f.energy(lambda, alpha - h);
    Ok(((ep - em) / (2.0 * h), (ep - 2.0 * e0 + em) / (h * h)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationalMatrices {
    pub alpha: f64,
    pub s: Matrix,
    pub l: Matrix,
    pub k: Matrix,
    pub phi_tilde: Matrix,
    /// Diagonal of D, √λᵢ.
    pub d: Vec<f64>,
    /// max |Φ̃ − DΦD| against the independently assembled principal matrix.
    pub identity_residual: f64,
}

impl VariationalMatrices {
    /// Smallest eigenvalues of (K, L, S).
    pub fn min_eigenvalues(&self) -> (f64, f64, f64) {
        (min_eigenvalue(&self.k), min_eigenvalue(&self.l), min_eigenvalue(&self.s))
    }
}

fn lambdas(couplings: &[Coupling]) -> Result<Vec<f64>> {
    couplings
        .iter()
        .map(|c| match *c {
            Coupling::Lambda(l) => {
                require_positive("lambda", l)?;
                Ok(l)
            }
            Coupling::NuStar(_) => invalid("variational matrices need lambda-form couplings"),
        })
        .collect()
}

struct VariationalSystem<'a> {
    rules: Vec<(usize, usize, PairRule)>,
    areas: Vec<f64>,
    lambdas: Vec<f64>,
    space: &'a AmbientSpace,
    constants: &'a PhysicalConstants,
}

impl<'a> VariationalSystem<'a> {
    fn new(
        surfaces: &[SurfaceMesh],
        couplings: &[Coupling],
        space: &'a AmbientSpace,
        constants: &'a PhysicalConstants,
    ) -> Result<Self> {
        if surfaces.len() != couplings.len() || surfaces.is_empty() {
            return invalid("need one lambda coupling per surface and at least one surface");
        }
        let lambdas = lambdas(couplings)?;
        let mut rules = Vec::new();
        for i in 0..surfaces.len() {
            for j in i..surfaces.len() {
                rules.push((i, j, PairRule::between(&surfaces[i], &surfaces[j], space)?));
            }
        }
        Ok(Self { rules, areas: surfaces.iter().map(|m| m.area).collect(), lambdas, space, constants })
    }

    fn weighted<F: Fn(&YukawaKernel, f64) -> f64 + Sync>(&self, alpha: f64, f: F) -> Matrix {
        let n = self.areas.len();
        let g = YukawaKernel::new(self.space, self.constants, alpha.sqrt());
        let mut m = vec![vec![0.0; n]; n];
        for (i, j, rule) in &self.rules {
            let scale = (self.lambdas[*i] * self.lambdas[*j] / (self.areas[*i] * self.areas[*j])).sqrt();
            let v = scale * rule.integrate(|d| f(&g, d));
            m[*i][*j] = v;
            m[*j][*i] = v;
        }
        m
    }

    fn phi_tilde(&self, alpha: f64) -> Matrix {
        let mut k = self.weighted(alpha, |g, d| g.value(d));
        for (i, row) in k.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = if i == j { 1.0 - *x } else { -*x };
            }
        }
        k
    }
}

/// S, L, K, Φ̃ = I − K and D at trial parameter α.
pub fn assemble_variational(
    surfaces: &[SurfaceMesh],
    couplings: &[Coupling],
    space: &AmbientSpace,
    constants: &PhysicalConstants,
    alpha: f64,
) -> Result<VariationalMatrices> {
    require_positive("alpha", alpha)?;
    let sys = VariationalSystem::new(surfaces, couplings, space, constants)?;
    let k = sys.weighted(alpha, |g, d| g.value(d));
    let l = sys.weighted(alpha, |g, d| g.first(d));
    let s = sys.weighted(alpha, |g, d| g.second(d));
    let n = k.len();
    let phi_tilde: Matrix = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 - k[i][j] } else { -k[i][j] }).collect())
        .collect();
    let d: Vec<f64> = sys.lambdas.iter().map(|l| l.sqrt()).collect();
    let phi = assemble_phi(surfaces, couplings, space, constants, alpha.sqrt())?;
    let dpd: Matrix = (0..n)
        .map(|i| (0..n).map(|j| d[i] * phi.entries[i][j] * d[j]).collect())
        .collect();
    let identity_residual = max_abs_diff(&phi_tilde, &dpd);
    Ok(VariationalMatrices { alpha, s, l, k, phi_tilde, d, identity_residual })
}

/// Smallest eigenvalue of S − 2LK⁻¹L.
pub fn schur_gap(vm: &VariationalMatrices) -> Result<f64> {
    let n = vm.k.len();
    let chol = cholesky(&vm.k)?;
    // columns of K⁻¹L
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| cholesky_solve(&chol, &(0..n).map(|i| vm.l[i][j]).collect::<Vec<_>>()))
        .collect();
    let mut m = vm.s.clone();
    for i in 0..n {
        for j in 0..n {
            let lkl: f64 = (0..n).map(|r| vm.l[i][r] * cols[j][r]).sum();
            m[i][j] -= 2.0 * lkl;
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = avg;
            m[j][i] = avg;
        }
    }
    Ok(min_eigenvalue(&m))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationalSolution {
    pub alpha_star: f64,
    /// Zero mode of Φ̃(α*), unit norm with positive sum.
    pub weights: Vec<f64>,
    pub iterations: usize,
}

/// Finds α* where the smallest eigenvalue of Φ̃(α) crosses zero.
pub fn solve_variational(
    surfaces: &[SurfaceMesh],
    couplings: &[Coupling],
    space: &AmbientSpace,
    constants: &PhysicalConstants,
) -> Result<VariationalSolution> {
    let sys = VariationalSystem::new(surfaces, couplings, space, constants)?;
    let omega = |nu: f64| min_eigenvalue(&sys.phi_tilde(nu * nu));
    let mut iterations = 0;
    // deepest standalone level: the diagonal of Φ̃ vanishes there
    let mut lo: f64 = 0.0;
    for (i, mesh) in surfaces.iter().enumerate() {
        if let Some(ns) = crate::principal::energy_from_coupling(mesh, space, constants, sys.lambdas[i])? {
            lo = lo.max(ns);
        }
    }
    let mut shrink = 1e-9;
    while lo > 0.0 && omega(lo) > 0.0 && shrink < 0.5 {
        lo *= 1.0 - shrink;
        shrink *= 4.0;
        iterations += 1;
    }
    if lo == 0.0 || omega(lo) > 0.0 {
        lo = 1e-6;
        if omega(lo) > 0.0 {
            return Err(Error::NoBoundState("no zero crossing of the variational matrix".into()));
        }
    }
    let mut hi = lo * 1.01;
    while omega(hi) <= 0.0 {
        iterations += 1;
        lo = hi;
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::NoBoundState("no zero crossing of the variational matrix".into()));
        }
    }
    while hi / lo - 1.0 > 1e-15 {
        iterations += 1;
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if omega(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let nu = (lo * hi).sqrt();
    let eig = jacobi_eigen(&sys.phi_tilde(nu * nu));
    let mut weights = eig.vectors[0].clone();
    if weights.iter().sum::<f64>() < 0.0 {
        weights.iter_mut().for_each(|w| *w = -*w);
    }
    Ok(VariationalSolution { alpha_star: nu * nu, weights, iterations })
}
