//! JSON experiment configuration and its translation into core objects.

use std::path::Path;

use serde::Deserialize;
use shellbound::geometry::{
    build_ellipsoid, build_sphere, build_torus, AmbientSpace, PhysicalConstants, Point3, SurfaceCurvatureMeta,
    SurfaceMesh,
};
use shellbound::hybrid::PointSource;
use shellbound::kernels::KernelBoundConstants;
use shellbound::principal::{Coupling, SolverSettings};

/// Rejected configuration; always maps to exit status 1.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub constants: ConstantsConfig,
    pub ambient: AmbientConfig,
    pub surfaces: Vec<SurfaceConfig>,
    #[serde(default)]
    pub points: Vec<PointConfig>,
    #[serde(default)]
    pub solver: Option<SolverSettings>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
    #[serde(default)]
    pub bounds: Option<BoundsConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    pub hbar: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmbientKindConfig {
    Flat,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientConfig {
    pub kind: AmbientKindConfig,
    #[serde(rename = "K", default)]
    pub k: Option<f64>,
    #[serde(default)]
    pub volume: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Sphere,
    Ellipsoid,
    Torus,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeParams {
    pub radius: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub major: Option<f64>,
    pub minor: Option<f64>,
    /// Normal coordinates at the ambient origin.
    #[serde(default)]
    pub center: [f64; 3],
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureMetaConfig {
    pub h_upper: Option<f64>,
    pub h_lower: Option<f64>,
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
    pub chord_arc_delta: Option<f64>,
    pub chord_arc_kappa: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub shape: ShapeKind,
    pub params: ShapeParams,
    pub order: usize,
    pub coupling: Coupling,
    #[serde(default)]
    pub curvature_meta: Option<CurvatureMetaConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    pub position: [f64; 3],
    pub mu: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_format() -> String {
    "csv".into()
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConstantsConfig {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    #[serde(default)]
    pub kernel_constants: Option<KernelConstantsConfig>,
    /// ν values for the finiteness certificate; each must exceed the surface's ν*.
    #[serde(default)]
    pub nu_grid: Option<Vec<f64>>,
    #[serde(default = "default_nu_floor")]
    pub nu_floor: f64,
}

fn default_nu_floor() -> f64 {
    1e-4
}

/// A configuration turned into the objects the compute modules consume.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub constants: PhysicalConstants,
    pub space: AmbientSpace,
    pub surfaces: Vec<SurfaceMesh>,
    pub couplings: Vec<Coupling>,
    pub points: Vec<PointSource>,
    pub solver: SolverSettings,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), ConfigError> {
        let bytes = std::fs::read(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        let text = String::from_utf8(bytes.clone()).map_err(|e| ConfigError::Invalid(format!("config is not UTF-8: {e}")))?;
        Ok((Self::from_json(&text)?, bytes))
    }

    fn check(&self) -> Result<(), ConfigError> {
        if self.surfaces.is_empty() && self.points.is_empty() {
            return invalid("need at least one surface or point");
        }
        if let Some(s) = &self.solver {
            s.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        if let Some(o) = &self.output {
            if o.format != "csv" {
                return invalid(format!("unsupported output format {:?} (only \"csv\")", o.format));
            }
        }
        for (i, s) in self.surfaces.iter().enumerate() {
            if let Some(meta) = &s.curvature_meta {
                let missing: Vec<&str> = [
                    ("h_upper", meta.h_upper),
                    ("h_lower", meta.h_lower),
                    ("rho_min", meta.rho_min),
                    ("rho_max", meta.rho_max),
                ]
                .iter()
                .filter(|(_, v)| v.is_none())
                .map(|(n, _)| *n)
                .collect();
                if !missing.is_empty() {
                    return invalid(format!(
                        "surfaces[{i}].curvature_meta is missing required fields: {}",
                        missing.join(", ")
                    ));
                }
                if meta.chord_arc_delta.is_some() != meta.chord_arc_kappa.is_some() {
                    return invalid(format!(
                        "surfaces[{i}].curvature_meta: chord_arc_delta and chord_arc_kappa go together"
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn kernel_constants(&self) -> Result<Option<KernelBoundConstants>, ConfigError> {
        match self.bounds.as_ref().and_then(|b| b.kernel_constants) {
            None => Ok(None),
            Some(k) => KernelBoundConstants::new(k.c1, k.c2, k.c3)
                .map(Some)
                .map_err(|e| ConfigError::Invalid(e.to_string())),
        }
    }

    pub fn space(&self) -> Result<AmbientSpace, ConfigError> {
        let space = match self.ambient.kind {
            AmbientKindConfig::Flat => {
                if self.ambient.k.is_some_and(|k| k != 0.0) {
                    return invalid("flat ambient takes no curvature K");
                }
                AmbientSpace::flat()
            }
            AmbientKindConfig::Hyperbolic => {
                let Some(k) = self.ambient.k else {
                    return invalid("hyperbolic ambient needs field \"K\"");
                };
                AmbientSpace::hyperbolic(k).map_err(|e| ConfigError::Invalid(e.to_string()))?
            }
        };
        match self.ambient.volume {
            Some(v) => space.with_volume(v).map_err(|e| ConfigError::Invalid(e.to_string())),
            None => Ok(space),
        }
    }

    pub fn build(&self) -> Result<Experiment, ConfigError> {
        let constants = PhysicalConstants::new(self.constants.hbar, self.constants.mass)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let space = self.space()?;
        let mut surfaces = Vec::with_capacity(self.surfaces.len());
        let mut couplings = Vec::with_capacity(self.surfaces.len());
        for (i, s) in self.surfaces.iter().enumerate() {
            let mesh = build_surface(s, &space).map_err(|e| ConfigError::Invalid(format!("surfaces[{i}]: {e}")))?;
            s.coupling.validate().map_err(|e| ConfigError::Invalid(format!("surfaces[{i}]: {e}")))?;
            surfaces.push(mesh);
            couplings.push(s.coupling);
        }
        let points = self
            .points
            .iter()
            .map(|p| PointSource { position: space.point_from_normal(p.position), mu: p.mu })
            .collect();
        Ok(Experiment {
            constants,
            space,
            surfaces,
            couplings,
            points,
            solver: self.solver.unwrap_or_default(),
        })
    }
}

fn require(name: &str, v: Option<f64>) -> Result<f64, String> {
    v.ok_or_else(|| format!("params.{name} is required"))
}

/// Builds one mesh, applying any explicit curvature metadata over the
/// shape's auto-filled values.
pub fn build_surface(s: &SurfaceConfig, space: &AmbientSpace) -> Result<SurfaceMesh, String> {
    let p = &s.params;
    let center: Point3 = space.point_from_normal(p.center);
    let mesh = match s.shape {
        ShapeKind::Sphere => build_sphere(require("radius", p.radius)?, center, s.order),
        ShapeKind::Ellipsoid => {
            build_ellipsoid(require("a", p.a)?, require("b", p.b)?, require("c", p.c)?, center, s.order)
        }
        ShapeKind::Torus => build_torus(require("major", p.major)?, require("minor", p.minor)?, center, s.order),
    }
    .map_err(|e| e.to_string())?;
    let Some(meta) = &s.curvature_meta else {
        return Ok(mesh);
    };
    let auto = mesh.curvature;
    let (delta, kappa) = match (meta.chord_arc_delta, meta.chord_arc_kappa, auto) {
        (Some(d), Some(k), _) => (d, k),
        (_, _, Some(a)) => (a.chord_arc_delta, a.chord_arc_kappa),
        _ => return Err("curvature_meta needs chord_arc_delta and chord_arc_kappa".into()),
    };
    let full = SurfaceCurvatureMeta {
        h_upper: meta.h_upper.unwrap_or_default(),
        h_lower: meta.h_lower.unwrap_or_default(),
        rho_min: meta.rho_min.unwrap_or_default(),
        rho_max: meta.rho_max.unwrap_or_default(),
        chord_arc_delta: delta,
        chord_arc_kappa: kappa,
    };
    mesh.with_curvature(full).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "constants": {"hbar": 1.0, "mass": 0.5},
        "ambient": {"kind": "flat"},
        "surfaces": [{"shape": "sphere", "params": {"radius": 1.0}, "order": 8, "coupling": {"nu_star": 1.0}}]
    }"#;

    #[test]
    fn minimal_config_builds() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        let exp = cfg.build().unwrap();
        assert_eq!(exp.surfaces.len(), 1);
        assert_eq!(exp.couplings, vec![Coupling::NuStar(1.0)]);
        assert!(exp.points.is_empty());
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = ExperimentConfig::from_json("{\n  \"constants\": {\"hbar\": 1.0,}\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("column"), "{msg}");
    }

    #[test]
    fn missing_surfaces_is_rejected() {
        let err = ExperimentConfig::from_json(r#"{"constants": {"hbar": 1, "mass": 0.5}, "ambient": {"kind": "flat"}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("missing field `surfaces`"), "{err}");
    }

    #[test]
    fn partial_curvature_meta_lists_missing_fields() {
        let text = MINIMAL.replace("\"order\": 8,", "\"order\": 8, \"curvature_meta\": {\"h_upper\": 1.0},");
        let msg = ExperimentConfig::from_json(&text).unwrap_err().to_string();
        assert!(msg.contains("h_lower, rho_min, rho_max"), "{msg}");
    }

    #[test]
    fn explicit_meta_overrides_auto_fill() {
        let text = MINIMAL.replace(
            "\"order\": 8,",
            "\"order\": 8, \"curvature_meta\": {\"h_upper\": 1.0, \"h_lower\": 0.5, \"rho_min\": 1.0, \"rho_max\": 3.0},",
        );
        let exp = ExperimentConfig::from_json(&text).unwrap().build().unwrap();
        let meta = exp.surfaces[0].curvature.unwrap();
        assert_eq!((meta.h_lower, meta.rho_max), (0.5, 3.0));
        assert!((meta.chord_arc_product() - 0.64).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_needs_k() {
        let text = MINIMAL.replace("{\"kind\": \"flat\"}", "{\"kind\": \"hyperbolic\"}");
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        assert!(cfg.build().unwrap_err().to_string().contains("\"K\""));
    }

    #[test]
    fn unknown_fields_and_empty_systems_are_rejected() {
        let text = MINIMAL.replace("\"order\": 8,", "\"order\": 8, \"colour\": 1,");
        assert!(ExperimentConfig::from_json(&text).is_err());
        let empty = r#"{"constants": {"hbar": 1, "mass": 0.5}, "ambient": {"kind": "flat"}, "surfaces": []}"#;
        assert!(ExperimentConfig::from_json(empty).unwrap_err().to_string().contains("at least one"));
    }
}
