//! Surface meshes, ambient spaces and distances.
//!
//! Flat points are Cartesian triples; hyperbolic points live on the
//! hyperboloid `-x0² + x1² + x2² + x3² = -1/K` with `x0 > 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::quadrature::gauss_legendre;

/// Reduced Planck constant and particle mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 0.5 }
    }
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        require_positive("hbar", hbar)?;
        require_positive("mass", mass)?;
        Ok(Self { hbar, mass })
    }

    /// Decay rate per unit ν: κ = c·ν with c = √(2m)/ℏ.
    pub fn kappa_per_nu(&self) -> f64 {
        (2.0 * self.mass).sqrt() / self.hbar
    }

    /// Prefactor m/(2πℏ²) of the static kernel.
    pub fn kernel_prefactor(&self) -> f64 {
        self.mass / (2.0 * PI * self.hbar * self.hbar)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AmbientKind {
    Flat,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbientSpace {
    pub kind: AmbientKind,
    pub curvature_k: f64,
    pub volume: Option<f64>,
}

impl AmbientSpace {
    pub fn flat() -> Self {
        Self { kind: AmbientKind::Flat, curvature_k: 0.0, volume: None }
    }

    pub fn hyperbolic(k: f64) -> Result<Self> {
        require_positive("curvature K", k)?;
        Ok(Self { kind: AmbientKind::Hyperbolic, curvature_k: k, volume: None })
    }

    pub fn with_volume(mut self, volume: f64) -> Result<Self> {
        require_positive("ambient volume", volume)?;
        self.volume = Some(volume);
        Ok(self)
    }

    pub fn is_flat(&self) -> bool {
        self.kind == AmbientKind::Flat
    }

    /// Base point: the Cartesian origin, or the hyperboloid apex.
    pub fn origin(&self) -> Point3 {
        match self.kind {
            AmbientKind::Flat => Point3::Flat([0.0; 3]),
            AmbientKind::Hyperbolic => {
                Point3::Hyperbolic([1.0 / self.curvature_k.sqrt(), 0.0, 0.0, 0.0])
            }
        }
    }

    /// Maps a vector `v` in normal coordinates at the origin to a point.
    /// In flat space this is the identity; in H³ it is the exponential map.
    pub fn point_from_normal(&self, v: [f64; 3]) -> Point3 {
        match self.kind {
            AmbientKind::Flat => Point3::Flat(v),
            AmbientKind::Hyperbolic => {
                let sk = self.curvature_k.sqrt();
                let r = norm3(v);
                let mut x = [(sk * r).cosh() / sk, 0.0, 0.0, 0.0];
                if r > 0.0 {
                    let f = (sk * r).sinh() / (sk * r);
                    for a in 0..3 {
                        x[a + 1] = f * v[a];
                    }
                }
                Point3::Hyperbolic(x)
            }
        }
    }

    pub(crate) fn check_point(&self, p: &Point3) -> Result<()> {
        match (self.kind, p) {
            (AmbientKind::Flat, Point3::Flat(_)) => Ok(()),
            (AmbientKind::Hyperbolic, Point3::Hyperbolic(x)) => {
                let target = -1.0 / self.curvature_k;
                let q = minkowski(x, x);
                if ((q - target) / target).abs() > 1e-12 * (1.0 + x[0] * x[0] * self.curvature_k) {
                    return invalid(format!(
                        "hyperbolic point off the K={} hyperboloid (norm {q})",
                        self.curvature_k
                    ));
                }
                Ok(())
            }
            _ => invalid("point does not belong to the ambient space"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Point3 {
    Flat([f64; 3]),
    Hyperbolic([f64; 4]),
}

impl Point3 {
    pub fn flat(x: f64, y: f64, z: f64) -> Self {
        Point3::Flat([x, y, z])
    }

    /// Hyperboloid point; checks the normalization for curvature `k`.
    pub fn hyperbolic(x: [f64; 4], k: f64) -> Result<Self> {
        let p = Point3::Hyperbolic(x);
        AmbientSpace::hyperbolic(k)?.check_point(&p)?;
        if x[0] <= 0.0 {
            return invalid("hyperbolic point must lie on the upper sheet");
        }
        Ok(p)
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn minkowski(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// Distance between two points of the same space, without validation.
pub(crate) fn raw_distance(k: f64, p: &Point3, q: &Point3) -> f64 {
    match (p, q) {
        (Point3::Flat(a), Point3::Flat(b)) => {
            norm3([a[0] - b[0], a[1] - b[1], a[2] - b[2]])
        }
        (Point3::Hyperbolic(a), Point3::Hyperbolic(b)) => {
            // chord form avoids the cancellation in arccosh near zero
            let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]];
            let chord = minkowski(&d, &d).max(0.0).sqrt();
            let sk = k.sqrt();
            2.0 / sk * (0.5 * sk * chord).asinh()
        }
        _ => f64::NAN,
    }
}

/// Geodesic distance in the ambient space.
pub fn ambient_distance(space: &AmbientSpace, p: &Point3, q: &Point3) -> Result<f64> {
    space.check_point(p)?;
    space.check_point(q)?;
    Ok(raw_distance(space.curvature_k, p, q))
}

/// Curvature data consumed by the bound formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCurvatureMeta {
    pub h_upper: f64,
    pub h_lower: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub chord_arc_delta: f64,
    pub chord_arc_kappa: f64,
}

/// δ·κ used for the auto-filled chord–arc data of the built-in shapes.
pub const DEFAULT_CHORD_ARC_PRODUCT: f64 = 0.64;

impl SurfaceCurvatureMeta {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("h_upper", self.h_upper),
            ("h_lower", self.h_lower),
            ("rho_min", self.rho_min),
            ("rho_max", self.rho_max),
            ("chord_arc_delta", self.chord_arc_delta),
            ("chord_arc_kappa", self.chord_arc_kappa),
        ] {
            if !v.is_finite() {
                return invalid(format!("curvature meta field {name} is not finite"));
            }
        }
        if self.h_lower > self.h_upper {
            return invalid("curvature meta: h_lower > h_upper");
        }
        if !(self.rho_min > 0.0 && self.rho_min <= self.rho_max) {
            return invalid("curvature meta: need 0 < rho_min <= rho_max");
        }
        let dk = self.chord_arc_product();
        if !(dk > 0.0 && dk < 1.0) {
            return invalid(format!("curvature meta: chord-arc product {dk} not in (0,1)"));
        }
        Ok(())
    }

    /// δ·κ*.
    pub fn chord_arc_product(&self) -> f64 {
        self.chord_arc_delta * self.chord_arc_kappa
    }

    fn with_kappa(h_upper: f64, h_lower: f64, rho_min: f64, rho_max: f64, kappa: f64) -> Self {
        Self {
            h_upper,
            h_lower,
            rho_min,
            rho_max,
            chord_arc_delta: DEFAULT_CHORD_ARC_PRODUCT / kappa,
            chord_arc_kappa: kappa,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ShapeTag {
    Sphere { radius: f64, center: Point3 },
    Ellipsoid { a: f64, b: f64, c: f64, center: Point3 },
    Torus { major: f64, minor: f64, center: Point3 },
}

impl ShapeTag {
    pub fn center(&self) -> Point3 {
        match *self {
            ShapeTag::Sphere { center, .. }
            | ShapeTag::Ellipsoid { center, .. }
            | ShapeTag::Torus { center, .. } => center,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshNode {
    pub point: Point3,
    pub weight: f64,
}

/// Quadrature discretization of a closed embedded surface.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub nodes: Vec<MeshNode>,
    pub area: f64,
    pub diameter_ambient: f64,
    pub shape: ShapeTag,
    pub curvature: Option<SurfaceCurvatureMeta>,
    pub quadrature_order: usize,
    space: AmbientSpace,
    // sphere direction (ellipsoid/sphere) or (u, v, 0) torus angles per node
    params: Vec<[f64; 3]>,
}

/// A weighted point set used to integrate over the surface around one node.
pub(crate) type LocalRule = Vec<(Point3, f64)>;

impl SurfaceMesh {
    pub fn space(&self) -> &AmbientSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Replaces the auto-filled curvature metadata.
    pub fn with_curvature(mut self, meta: SurfaceCurvatureMeta) -> Result<Self> {
        meta.validate()?;
        if meta.h_lower > 0.0 && self.diameter_ambient > PI / meta.h_lower.sqrt() * (1.0 + 1e-12) {
            return invalid("curvature meta violates the Bonnet-Myers diameter bound");
        }
        self.curvature = Some(meta);
        Ok(self)
    }

    pub fn without_curvature(mut self) -> Self {
        self.curvature = None;
        self
    }

    /// Same shape, same order, same ambient space: the two meshes coincide.
    pub(crate) fn coincides_with(&self, other: &SurfaceMesh) -> bool {
        self.shape == other.shape
            && self.quadrature_order == other.quadrature_order
            && self.space == other.space
    }

    /// Signed implicit function: negative inside, positive outside.
    pub(crate) fn implicit(&self, p: &Point3) -> f64 {
        let k = self.space.curvature_k;
        match self.shape {
            ShapeTag::Sphere { radius, center } => raw_distance(k, &center, p) - radius,
            ShapeTag::Ellipsoid { a, b, c, center } => {
                let (x, y, z) = flat_offset(p, &center);
                (x / a).powi(2) + (y / b).powi(2) + (z / c).powi(2) - 1.0
            }
            ShapeTag::Torus { major, minor, center } => {
                let (x, y, z) = flat_offset(p, &center);
                let rho = (x * x + y * y).sqrt() - major;
                rho * rho + z * z - minor * minor
            }
        }
    }

    fn scale(&self) -> f64 {
        self.diameter_ambient
    }

    /// True when `p` lies on the surface up to rounding.
    pub(crate) fn contains_on_surface(&self, p: &Point3) -> bool {
        let f = self.implicit(p);
        let tol = 1e-12
            * match self.shape {
                ShapeTag::Sphere { .. } => self.scale(),
                ShapeTag::Ellipsoid { .. } => 1.0,
                ShapeTag::Torus { minor, .. } => minor * minor + self.scale() * minor,
            };
        f.abs() <= tol
    }

    /// Local rule whose weights absorb the 1/d singularity at node `i`.
    pub(crate) fn singular_rule(&self, i: usize) -> LocalRule {
        let order = self.quadrature_order;
        match self.shape {
            ShapeTag::Torus { major, minor, center } => {
                let [u0, v0, _] = self.params[i];
                torus_duffy_rule(major, minor, &center, u0, v0, order)
            }
            _ => {
                let pole = self.params[i];
                let (e1, e2) = orthonormal_frame(pole);
                let thetas = gauss_legendre_theta(order);
                let nphi = 2 * order;
                let dphi = 2.0 * PI / nphi as f64;
                let mut rule = Vec::with_capacity(thetas.len() * nphi);
                for &(theta, wt) in &thetas {
                    let (st, ct) = theta.sin_cos();
                    for l in 0..nphi {
                        let phi = dphi * (l as f64 + 0.5);
                        let (sp, cp) = phi.sin_cos();
                        let mut w = [0.0; 3];
                        for a in 0..3 {
                            w[a] = ct * pole[a] + st * (cp * e1[a] + sp * e2[a]);
                        }
                        let (p, density) = self.sphere_param_point(w);
                        rule.push((p, density * st * wt * dphi));
                    }
                }
                rule
            }
        }
    }

    /// Point and area density (per unit solid angle) for sphere-like charts.
    fn sphere_param_point(&self, w: [f64; 3]) -> (Point3, f64) {
        match self.shape {
            ShapeTag::Sphere { radius, center } => match center {
                Point3::Flat(c) => (
                    Point3::Flat([c[0] + radius * w[0], c[1] + radius * w[1], c[2] + radius * w[2]]),
                    radius * radius,
                ),
                Point3::Hyperbolic(c) => {
                    let k = self.space.curvature_k;
                    let sk = k.sqrt();
                    let rs = (sk * radius).sinh() / sk;
                    (hyperbolic_sphere_point(k, &c, radius, w), rs * rs)
                }
            },
            ShapeTag::Ellipsoid { a, b, c, center } => {
                let cc = match center {
                    Point3::Flat(c) => c,
                    Point3::Hyperbolic(_) => unreachable!("ellipsoids are flat-only"),
                };
                let density = a * b * c
                    * ((w[0] / a).powi(2) + (w[1] / b).powi(2) + (w[2] / c).powi(2)).sqrt();
                (
                    Point3::Flat([cc[0] + a * w[0], cc[1] + b * w[1], cc[2] + c * w[2]]),
                    density,
                )
            }
            ShapeTag::Torus { .. } => unreachable!("torus has its own chart"),
        }
    }
}

fn flat_offset(p: &Point3, center: &Point3) -> (f64, f64, f64) {
    match (p, center) {
        (Point3::Flat(a), Point3::Flat(c)) => (a[0] - c[0], a[1] - c[1], a[2] - c[2]),
        _ => (f64::NAN, f64::NAN, f64::NAN),
    }
}

/// Gauss–Legendre nodes in the polar angle itself on `[0, π]`.
fn gauss_legendre_theta(order: usize) -> Vec<(f64, f64)> {
    crate::quadrature::gauss_legendre_on(order, 0.0, PI)
}

fn orthonormal_frame(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let a = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dot = a[0] * n[0] + a[1] * n[1] + a[2] * n[2];
    let mut e1 = [a[0] - dot * n[0], a[1] - dot * n[1], a[2] - dot * n[2]];
    let l = norm3(e1);
    for x in e1.iter_mut() {
        *x /= l;
    }
    let e2 = [
        n[1] * e1[2] - n[2] * e1[1],
        n[2] * e1[0] - n[0] * e1[2],
        n[0] * e1[1] - n[1] * e1[0],
    ];
    (e1, e2)
}

/// Point at geodesic distance `radius` from `center` in direction `w`,
/// where `w` is a unit vector in the tangent space at the origin carried to
/// `center` by the pure boost.
fn hyperbolic_sphere_point(k: f64, center: &[f64; 4], radius: f64, w: [f64; 3]) -> Point3 {
    let sk = k.sqrt();
    // normalized coordinates (unit hyperboloid)
    let y0 = (sk * radius).cosh();
    let sh = (sk * radius).sinh();
    let ys = [sh * w[0], sh * w[1], sh * w[2]];
    let gamma = sk * center[0];
    let n = [sk * center[1], sk * center[2], sk * center[3]];
    let ndy = n[0] * ys[0] + n[1] * ys[1] + n[2] * ys[2];
    let out0 = gamma * y0 + ndy;
    let f = ndy / (gamma + 1.0);
    let mut x = [out0 / sk, 0.0, 0.0, 0.0];
    for a in 0..3 {
        x[a + 1] = (n[a] * y0 + ys[a] + n[a] * f) / sk;
    }
    Point3::Hyperbolic(x)
}

fn torus_point(major: f64, minor: f64, center: &Point3, u: f64, v: f64) -> (Point3, f64) {
    let c = match center {
        Point3::Flat(c) => *c,
        Point3::Hyperbolic(_) => unreachable!("tori are flat-only"),
    };
    let (su, cu) = u.sin_cos();
    let (sv, cv) = v.sin_cos();
    let rr = major + minor * cv;
    (
        Point3::Flat([c[0] + rr * cu, c[1] + rr * su, c[2] + minor * sv]),
        minor * rr,
    )
}

/// Duffy rule on the periodic parameter square centred at `(u0, v0)`:
/// eight triangles with apex at the target, collapsing the 1/d singularity.
/// Splitting along the axes keeps the anisotropic directions at vertices.
fn torus_duffy_rule(
    major: f64,
    minor: f64,
    center: &Point3,
    u0: f64,
    v0: f64,
    order: usize,
) -> LocalRule {
    let gl = crate::quadrature::gauss_legendre_on(order, 0.0, 1.0);
    let corners = [(PI, -PI), (PI, 0.0), (PI, PI), (0.0, PI), (-PI, PI), (-PI, 0.0), (-PI, -PI), (0.0, -PI)];
    let mut rule = Vec::with_capacity(8 * order * order);
    for t in 0..8 {
        let p1 = corners[t];
        let p2 = corners[(t + 1) % 8];
        let jac = (p1.0 * p2.1 - p1.1 * p2.0).abs();
        for &(s, ws) in &gl {
            for &(tt, wt) in &gl {
                let du = s * ((1.0 - tt) * p1.0 + tt * p2.0);
                let dv = s * ((1.0 - tt) * p1.1 + tt * p2.1);
                let (p, density) = torus_point(major, minor, center, u0 + du, v0 + dv);
                rule.push((p, s * jac * ws * wt * density));
            }
        }
    }
    rule
}

fn check_order(order: usize) -> Result<()> {
    if order < 4 {
        return invalid(format!("quadrature order must be >= 4, got {order}"));
    }
    Ok(())
}

fn center_space(center: &Point3) -> Result<AmbientSpace> {
    match center {
        Point3::Flat(c) => {
            if c.iter().all(|x| x.is_finite()) {
                Ok(AmbientSpace::flat())
            } else {
                invalid("center has non-finite coordinates")
            }
        }
        Point3::Hyperbolic(x) => {
            let q = -minkowski(x, x);
            if !(q > 0.0 && x[0] > 0.0) {
                return invalid("hyperbolic center is not on the upper hyperboloid sheet");
            }
            AmbientSpace::hyperbolic(1.0 / q)
        }
    }
}

/// Sphere product mesh: Gauss–Legendre in cos θ × offset uniform azimuth.
/// Directions for each node are built from `order` polar and `2·order`
/// azimuthal points.
fn sphere_directions(order: usize) -> Vec<([f64; 3], f64)> {
    let (x, w) = gauss_legendre(order);
    let nphi = 2 * order;
    let dphi = 2.0 * PI / nphi as f64;
    let mut out = Vec::with_capacity(order * nphi);
    for (ct, wt) in x.iter().zip(&w) {
        let st = (1.0 - ct * ct).sqrt();
        for l in 0..nphi {
            let phi = dphi * (l as f64 + 0.5);
            let (sp, cp) = phi.sin_cos();
            out.push(([st * cp, st * sp, *ct], wt * dphi));
        }
    }
    out
}

/// Round sphere of (geodesic) radius `radius` around `center`.
///
/// A hyperbolic `center` places the sphere in H³ with K read off the
/// centre's normalization.
pub fn build_sphere(radius: f64, center: Point3, order: usize) -> Result<SurfaceMesh> {
    require_positive("radius", radius)?;
    check_order(order)?;
    let space = center_space(&center)?;
    let (area, rs) = match space.kind {
        AmbientKind::Flat => (4.0 * PI * radius * radius, radius),
        AmbientKind::Hyperbolic => {
            let sk = space.curvature_k.sqrt();
            let rs = (sk * radius).sinh() / sk;
            (4.0 * PI * rs * rs, rs)
        }
    };
    let h = 1.0 / (rs * rs);
    // convexity radius and the polar radius reaching the antipode
    let mut mesh = SurfaceMesh {
        nodes: Vec::new(),
        area,
        diameter_ambient: 2.0 * radius,
        shape: ShapeTag::Sphere { radius, center },
        curvature: Some(SurfaceCurvatureMeta::with_kappa(h, h, PI * rs / 2.0, PI * rs, 1.0 / rs)),
        quadrature_order: order,
        space,
        params: Vec::new(),
    };
    for (w, wq) in sphere_directions(order) {
        let (p, density) = mesh.sphere_param_point(w);
        mesh.nodes.push(MeshNode { point: p, weight: density * wq });
        mesh.params.push(w);
    }
    Ok(mesh)
}

/// Axis-aligned ellipsoid with semi-axes `a`, `b`, `c` (flat space only).
pub fn build_ellipsoid(a: f64, b: f64, c: f64, center: Point3, order: usize) -> Result<SurfaceMesh> {
    require_positive("a", a)?;
    require_positive("b", b)?;
    require_positive("c", c)?;
    check_order(order)?;
    let space = center_space(&center)?;
    if !space.is_flat() {
        return Err(Error::UnsupportedShape("ellipsoids are only supported in flat space".into()));
    }
    // Gaussian curvature extremes sit at the axis vertices
    let gauss = [a * a / (b * b * c * c), b * b / (a * a * c * c), c * c / (a * a * b * b)];
    let h_upper = gauss.iter().cloned().fold(f64::MIN, f64::max);
    let h_lower = gauss.iter().cloned().fold(f64::MAX, f64::min);
    let axes = [a, b, c];
    let mut kappa: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                kappa = kappa.max(axes[i] / (axes[j] * axes[j]));
            }
        }
    }
    let meta = SurfaceCurvatureMeta::with_kappa(
        h_upper,
        h_lower,
        PI / (2.0 * h_upper.sqrt()),
        // half a great ellipse bounds every intrinsic distance
        PI * a.max(b).max(c),
        kappa,
    );
    let mut mesh = SurfaceMesh {
        nodes: Vec::new(),
        area: 0.0,
        diameter_ambient: 2.0 * a.max(b).max(c),
        shape: ShapeTag::Ellipsoid { a, b, c, center },
        curvature: Some(meta),
        quadrature_order: order,
        space,
        params: Vec::new(),
    };
    for (w, wq) in sphere_directions(order) {
        let (p, density) = mesh.sphere_param_point(w);
        mesh.nodes.push(MeshNode { point: p, weight: density * wq });
        mesh.params.push(w);
    }
    mesh.area = mesh.nodes.iter().map(|n| n.weight).sum();
    Ok(mesh)
}

/// Torus of revolution about the z-axis (flat space only). Trapezoid rule
/// in both angles with `2·order` major and `order` minor points.
pub fn build_torus(major: f64, minor: f64, center: Point3, order: usize) -> Result<SurfaceMesh> {
    require_positive("minor radius", minor)?;
    require_positive("major radius", major)?;
    if minor >= major {
        return invalid(format!("torus needs major > minor, got {major} <= {minor}"));
    }
    check_order(order)?;
    let space = center_space(&center)?;
    if !space.is_flat() {
        return Err(Error::UnsupportedShape("tori are only supported in flat space".into()));
    }
    let nu = 2 * order;
    let nv = order;
    let du = 2.0 * PI / nu as f64;
    let dv = 2.0 * PI / nv as f64;
    let meta = SurfaceCurvatureMeta::with_kappa(
        1.0 / (minor * (major + minor)),
        -1.0 / (minor * (major - minor)),
        PI * minor / 2.0,
        PI * (major + 2.0 * minor),
        1.0 / minor,
    );
    let mut mesh = SurfaceMesh {
        nodes: Vec::with_capacity(nu * nv),
        area: 4.0 * PI * PI * major * minor,
        diameter_ambient: 2.0 * (major + minor),
        shape: ShapeTag::Torus { major, minor, center },
        curvature: Some(meta),
        quadrature_order: order,
        space,
        params: Vec::with_capacity(nu * nv),
    };
    for i in 0..nu {
        let u = du * (i as f64 + 0.5);
        for j in 0..nv {
            let v = dv * (j as f64 + 0.5);
            let (p, density) = torus_point(major, minor, &center, u, v);
            mesh.nodes.push(MeshNode { point: p, weight: density * du * dv });
            mesh.params.push([u, v, 0.0]);
        }
    }
    Ok(mesh)
}

/// Intrinsic great-circle distance between nodes `i` and `j` of a sphere.
pub fn surface_geodesic_distance(mesh: &SurfaceMesh, i: usize, j: usize) -> Result<f64> {
    let ShapeTag::Sphere { radius, .. } = mesh.shape else {
        return Err(Error::UnsupportedShape(
            "surface geodesic distance is only available for spheres".into(),
        ));
    };
    if i >= mesh.len() || j >= mesh.len() {
        return invalid("node index out of range");
    }
    let a = mesh.params[i];
    let b = mesh.params[j];
    let cross = norm3([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]);
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let angle = cross.atan2(dot);
    let rs = match mesh.space.kind {
        AmbientKind::Flat => radius,
        AmbientKind::Hyperbolic => {
            let sk = mesh.space.curvature_k.sqrt();
            (sk * radius).sinh() / sk
        }
    };
    Ok(rs * angle)
}

/// Strict crossing test between two distinct surfaces: one has nodes both
/// strictly inside and strictly outside the other.
pub(crate) fn surfaces_intersect(a: &SurfaceMesh, b: &SurfaceMesh) -> bool {
    let crosses = |outer: &SurfaceMesh, inner: &SurfaceMesh| {
        let mut inside = false;
        let mut outside = false;
        for n in &inner.nodes {
            let f = outer.implicit(&n.point);
            inside |= f < 0.0;
            outside |= f > 0.0;
            if inside && outside {
                return true;
            }
        }
        false
    };
    crosses(a, b) || crosses(b, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn origin() -> Point3 {
        Point3::flat(0.0, 0.0, 0.0)
    }

    #[test]
    fn sphere_area_and_diameter() {
        let m = build_sphere(1.0, origin(), 16).unwrap();
        let s: f64 = m.nodes.iter().map(|n| n.weight).sum();
        assert!((s / (4.0 * PI) - 1.0).abs() < 1e-12);
        let m2 = build_sphere(2.0, origin(), 16).unwrap();
        assert_eq!(m2.diameter_ambient, 4.0);
        assert!(build_sphere(-1.0, origin(), 16).is_err());
        assert!(build_sphere(1.0, origin(), 3).is_err());
    }

    #[test]
    fn nodes_lie_on_surfaces() {
        let s = build_sphere(1.3, Point3::flat(1.0, 2.0, 3.0), 8).unwrap();
        let t = build_torus(2.0, 0.5, origin(), 8).unwrap();
        let e = build_ellipsoid(1.0, 1.5, 0.7, origin(), 8).unwrap();
        for m in [&s, &t, &e] {
            for n in &m.nodes {
                assert!(m.implicit(&n.point).abs() < 1e-12, "{:?}", m.shape);
            }
        }
    }

    #[test]
    fn torus_area_and_validation() {
        let t = build_torus(2.0, 0.5, origin(), 16).unwrap();
        let s: f64 = t.nodes.iter().map(|n| n.weight).sum();
        assert!((s / (4.0 * PI * PI) - 1.0).abs() < 1e-12);
        assert!(build_torus(1.0, 1.0, origin(), 16).is_err());
    }

    #[test]
    fn ellipsoid_degenerates_to_sphere() {
        let e = build_ellipsoid(1.0, 1.0, 1.0, origin(), 16).unwrap();
        assert!((e.area - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn distances() {
        let flat = AmbientSpace::flat();
        let d = ambient_distance(&flat, &origin(), &Point3::flat(3.0, 4.0, 0.0)).unwrap();
        assert_eq!(d, 5.0);
        let h = AmbientSpace::hyperbolic(1.0).unwrap();
        let p = Point3::hyperbolic([1.0, 0.0, 0.0, 0.0], 1.0).unwrap();
        let q = Point3::hyperbolic([1f64.cosh(), 1f64.sinh(), 0.0, 0.0], 1.0).unwrap();
        assert!((ambient_distance(&h, &p, &q).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(ambient_distance(&h, &q, &q).unwrap(), 0.0);
        assert!(ambient_distance(&flat, &origin(), &p).is_err());
    }

    #[test]
    fn normal_coordinates_preserve_radial_distance() {
        let h = AmbientSpace::hyperbolic(0.7).unwrap();
        let p = h.point_from_normal([0.3, -1.2, 2.0]);
        h.check_point(&p).unwrap();
        let r = norm3([0.3, -1.2, 2.0]);
        assert!((ambient_distance(&h, &h.origin(), &p).unwrap() - r).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_sphere_is_round() {
        let h = AmbientSpace::hyperbolic(1.0).unwrap();
        let c = h.point_from_normal([0.5, 0.2, -0.4]);
        let m = build_sphere(0.8, c, 8).unwrap();
        for n in &m.nodes {
            h.check_point(&n.point).unwrap();
            assert!((ambient_distance(&h, &c, &n.point).unwrap() - 0.8).abs() < 1e-12);
        }
        let s: f64 = m.nodes.iter().map(|n| n.weight).sum();
        assert!((s / m.area - 1.0).abs() < 1e-12);
    }

    #[test]
    fn geodesic_distance_only_for_spheres() {
        let t = build_torus(2.0, 0.5, origin(), 8).unwrap();
        assert!(matches!(
            surface_geodesic_distance(&t, 0, 1),
            Err(Error::UnsupportedShape(_))
        ));
    }

    #[test]
    fn singular_rules_integrate_area() {
        let s = build_sphere(1.0, origin(), 12).unwrap();
        let e = build_ellipsoid(1.0, 1.0, 1.2, origin(), 16).unwrap();
        let t = build_torus(2.0, 0.5, origin(), 16).unwrap();
        for m in [&s, &e, &t] {
            for i in [0, m.len() / 3, m.len() - 1] {
                let a: f64 = m.singular_rule(i).iter().map(|(_, w)| w).sum();
                assert!((a / m.area - 1.0).abs() < 1e-9, "{:?}: {a}", m.shape);
            }
        }
    }

    #[test]
    fn intersection_detection() {
        let a = build_sphere(1.0, origin(), 8).unwrap();
        let b = build_sphere(1.0, Point3::flat(1.0, 0.0, 0.0), 8).unwrap();
        let c = build_sphere(1.0, Point3::flat(4.0, 0.0, 0.0), 8).unwrap();
        let inner = build_sphere(0.5, origin(), 8).unwrap();
        assert!(surfaces_intersect(&a, &b));
        assert!(!surfaces_intersect(&a, &c));
        assert!(!surfaces_intersect(&a, &inner));
    }
}
