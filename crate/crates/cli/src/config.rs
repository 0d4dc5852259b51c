//! JSON job configuration and its conversion into core objects.

use std::path::{Path, PathBuf};

use canal4d_core::canal::{CanalSurface, ParamBox, TypeTables};
use canal4d_core::diffgeo::{DerivativeMode, DEFAULT_FD_STEP};
use canal4d_core::families::{self, RadiusFamily};
use canal4d_core::minkowski::ParallelFrame;
use canal4d_core::spine::{IntegratorConfig, SpineCurve};
use canal4d_core::{CurvatureFunctions, FrameKind, RadiusProfile, Vec4};
use serde::Deserialize;

/// A configuration problem, tagged with the JSON path of the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { field: field.into(), message: message.into() }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    /// Canal type `m` in `1..=8`.
    #[serde(rename = "type")]
    pub m: u8,
    pub spine: SpineConfig,
    pub radius: RadiusConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub derivative: DerivativeConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    /// Worker threads for grid sweeps; `None` uses the global pool.
    #[serde(default)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum KindConfig {
    Timelike,
    SpacelikeB2Timelike,
    SpacelikeB3Timelike,
    SpacelikeB4Timelike,
}

impl From<KindConfig> for FrameKind {
    fn from(k: KindConfig) -> Self {
        match k {
            KindConfig::Timelike => FrameKind::TimelikeCurve,
            KindConfig::SpacelikeB2Timelike => FrameKind::SpacelikeB2Timelike,
            KindConfig::SpacelikeB3Timelike => FrameKind::SpacelikeB3Timelike,
            KindConfig::SpacelikeB4Timelike => FrameKind::SpacelikeB4Timelike,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CurvatureConfig {
    Constant([f64; 3]),
    /// Coefficients of each `k_i(u)`, lowest degree first.
    Polynomial([Vec<f64>; 3]),
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpineModeConfig {
    /// Closed form when the curvatures are constant, integration otherwise.
    #[default]
    Auto,
    Analytic,
    Integrated,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpineConfig {
    /// Defaults to the kind that type `m` requires.
    #[serde(default)]
    pub kind: Option<KindConfig>,
    pub curvatures: CurvatureConfig,
    #[serde(default)]
    pub gamma0: Option<[f64; 4]>,
    /// Rows are `B1..B4`; defaults to the standard frame of the kind.
    #[serde(default)]
    pub frame0: Option<[[f64; 4]; 4]>,
    #[serde(default)]
    pub u0: Option<f64>,
    /// Defaults to the grid's `u` range widened by one unit each side.
    #[serde(default)]
    pub interval: Option<[f64; 2]>,
    #[serde(default)]
    pub mode: SpineModeConfig,
    #[serde(default)]
    pub step: Option<f64>,
    /// `0` disables re-orthonormalization.
    #[serde(default)]
    pub reorthonormalize_every: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RadiusConfig {
    /// Coefficients, lowest degree first.
    Polynomial(Vec<f64>),
    Linear { c1: f64, c2: f64 },
    FlatRoot { c1: f64, c2: f64, #[serde(default = "plus")] sign: f64 },
    MinimalRoot { c1: f64, c2: f64, #[serde(default = "plus")] sign: f64 },
    MinimalQuadrature {
        c3: f64,
        c4: f64,
        #[serde(default = "plus")]
        sign: f64,
        #[serde(default)]
        step: Option<f64>,
    },
}

fn plus() -> f64 {
    1.0
}

impl RadiusConfig {
    pub fn family(&self) -> Option<(RadiusFamily, families::Target)> {
        use families::Target;
        match *self {
            RadiusConfig::Polynomial(_) => None,
            RadiusConfig::Linear { c1, c2 } => Some((RadiusFamily::Linear { c1, c2 }, Target::Gaussian)),
            RadiusConfig::FlatRoot { c1, c2, sign } => Some((RadiusFamily::FlatRoot { c1, c2, sign }, Target::Gaussian)),
            RadiusConfig::MinimalRoot { c1, c2, sign } => Some((RadiusFamily::MinimalRoot { c1, c2, sign }, Target::Mean)),
            RadiusConfig::MinimalQuadrature { c3, c4, sign, .. } => {
                Some((RadiusFamily::MinimalQuadrature { c3, c4, sign }, Target::Mean))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    /// Leaves out `max`, for periodic axes.
    #[serde(default)]
    pub periodic: bool,
}

impl AxisConfig {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        if n == 1 {
            return vec![self.min];
        }
        let div = if self.periodic { n as f64 } else { (n - 1) as f64 };
        (0..n).map(|i| self.min + (self.max - self.min) * i as f64 / div).collect()
    }

    fn validate(&self, field: &str) -> Result<(), ConfigError> {
        if self.count == 0 {
            return Err(ConfigError::new(format!("{field}.count"), "grid axis must have at least one node"));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(ConfigError::new(field, format!("interval [{}, {}] is empty or non-finite", self.min, self.max)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub u: AxisConfig,
    pub v: AxisConfig,
    pub w: AxisConfig,
}

impl GridConfig {
    pub fn axes(&self) -> [AxisConfig; 3] {
        [self.u, self.v, self.w]
    }

    /// Nodes in row-major order: `u` outer, `w` inner.
    pub fn nodes(&self) -> Vec<[f64; 3]> {
        let (us, vs, ws) = (self.u.values(), self.v.values(), self.w.values());
        let mut out = Vec::with_capacity(us.len() * vs.len() * ws.len());
        for &u in &us {
            for &v in &vs {
                for &w in &ws {
                    out.push([u, v, w]);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case", deny_unknown_fields, tag = "mode")]
pub enum DerivativeConfig {
    FiniteDifference {
        #[serde(default = "default_step")]
        step: f64,
    },
    Analytic,
}

fn default_step() -> f64 {
    DEFAULT_FD_STEP
}

impl Default for DerivativeConfig {
    fn default() -> Self {
        DerivativeConfig::FiniteDifference { step: DEFAULT_FD_STEP }
    }
}

impl DerivativeConfig {
    pub fn mode(&self) -> DerivativeMode {
        match *self {
            DerivativeConfig::FiniteDifference { step } => DerivativeMode::FiniteDifference { step },
            DerivativeConfig::Analytic => DerivativeMode::Analytic,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative `K`/`H` gap and absolute principal distance against the oracle.
    pub oracle: f64,
    /// Scaled `3H − r²K − 2η/r`.
    pub identity: f64,
    /// Scaled membership residual.
    pub membership: f64,
    pub orthogonality: f64,
    /// `|R_vw|`.
    pub weingarten: f64,
    pub frame_gram: f64,
    /// `max |K|` of a flat family.
    pub flat: f64,
    /// `max |H|` of a minimal family.
    pub minimal: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            oracle: 1e-6,
            identity: 1e-10,
            membership: 1e-9,
            orthogonality: 1e-7,
            weingarten: 1e-9,
            frame_gram: 1e-9,
            flat: 1e-9,
            minimal: 1e-7,
        }
    }
}

impl Tolerances {
    pub fn uniform(t: f64) -> Self {
        Tolerances {
            oracle: t,
            identity: t,
            membership: t,
            orthogonality: t,
            weingarten: t,
            frame_gram: t,
            flat: t,
            minimal: t,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// 1-based coordinate dropped by the OBJ projection (default 1).
    #[serde(default)]
    pub drop: Option<usize>,
    /// 3×4 orthographic projection; overrides `drop`.
    #[serde(default)]
    pub projection: Option<[[f64; 4]; 3]>,
}

pub fn load(path: &Path) -> Result<JobConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<JobConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: JobConfig = serde_path_to_error::deserialize(&mut *de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { String::new() } else { path };
        ConfigError::new(field, e.into_inner().to_string())
    })?;
    de.end().map_err(|e| ConfigError::new("", e.to_string()))?;
    Ok(cfg)
}

/// Everything a command needs, validated.
#[derive(Debug, Clone)]
pub struct Job {
    pub config: JobConfig,
    pub surface: CanalSurface,
}

/// Padding added to the grid's `u` range for the default spine interval.
const SPINE_PAD: f64 = 1.0;

impl JobConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(1..=8).contains(&self.m) {
            return Err(ConfigError::new("type", format!("{} is not in 1..=8", self.m)));
        }
        self.grid.u.validate("grid.u")?;
        self.grid.v.validate("grid.v")?;
        self.grid.w.validate("grid.w")?;
        if let DerivativeConfig::FiniteDifference { step } = self.derivative {
            if !(step.is_finite() && step > 0.0) {
                return Err(ConfigError::new("derivative.step", format!("{step} is not a positive step")));
            }
        }
        if self.workers == Some(0) {
            return Err(ConfigError::new("workers", "must be at least 1"));
        }
        if let Some(d) = self.output.drop {
            if !(1..=4).contains(&d) {
                return Err(ConfigError::new("output.drop", format!("{d} is not a coordinate index in 1..=4")));
            }
        }
        Ok(())
    }

    pub fn tables(&self) -> Result<TypeTables, ConfigError> {
        TypeTables::for_type(self.m).map_err(|e| ConfigError::new("type", e.to_string()))
    }

    pub fn spine(&self, tables: &TypeTables) -> Result<SpineCurve, ConfigError> {
        let s = &self.spine;
        let kind = match s.kind {
            Some(k) => {
                let k = FrameKind::from(k);
                if k != tables.kind {
                    return Err(ConfigError::new(
                        "spine.kind",
                        format!("type {} needs a {:?} spine, got {:?}", self.m, tables.kind, k),
                    ));
                }
                k
            }
            None => tables.kind,
        };
        let curv = match &s.curvatures {
            CurvatureConfig::Constant(k) => CurvatureFunctions::Constant(*k),
            CurvatureConfig::Polynomial(p) => CurvatureFunctions::Polynomial(p.clone()),
        };
        let gamma0 = Vec4(s.gamma0.unwrap_or([0.0; 4]));
        let frame0 = match s.frame0 {
            Some(rows) => ParallelFrame::new(rows.map(Vec4), kind.signature()),
            None => kind.standard_frame(),
        };
        let interval = match s.interval {
            Some([lo, hi]) => (lo, hi),
            None => (self.grid.u.min - SPINE_PAD, self.grid.u.max + SPINE_PAD),
        };
        let u0 = s.u0.unwrap_or_else(|| 0.0_f64.clamp(interval.0, interval.1));
        let bad = |e: canal4d_core::Error| ConfigError::new("spine", e.to_string());
        let integrated = || {
            let mut cfg = IntegratorConfig::default();
            if let Some(h) = s.step {
                cfg.step = h;
            }
            if let Some(n) = s.reorthonormalize_every {
                cfg.reorthonormalize_every = if n == 0 { None } else { Some(n) };
            }
            SpineCurve::integrated(kind, curv.clone(), gamma0, frame0, u0, interval, cfg).map_err(bad)
        };
        let analytic = |k: [f64; 3]| {
            if k == [0.0; 3] {
                SpineCurve::line(kind, gamma0, frame0, u0, interval).map_err(bad)
            } else {
                SpineCurve::constant_k(kind, k, gamma0, frame0, u0, interval).map_err(bad)
            }
        };
        match (s.mode, curv.as_constant()) {
            (SpineModeConfig::Integrated, _) => integrated(),
            (_, Some(k)) => analytic(k),
            (SpineModeConfig::Analytic, None) => {
                Err(ConfigError::new("spine.mode", "closed-form spines need constant curvatures"))
            }
            (SpineModeConfig::Auto, None) => integrated(),
        }
    }

    pub fn radius(&self) -> Result<RadiusProfile, ConfigError> {
        let bad = |e: canal4d_core::Error| ConfigError::new("radius", e.to_string());
        match &self.radius {
            RadiusConfig::Polynomial(c) => {
                if c.is_empty() || c.iter().any(|x| !x.is_finite()) {
                    return Err(ConfigError::new("radius.polynomial", "coefficients must be finite and non-empty"));
                }
                Ok(RadiusProfile::polynomial(c.clone()))
            }
            RadiusConfig::MinimalQuadrature { step: Some(h), .. } => {
                let (family, _) = self.radius.family().expect("quadrature is a family");
                let opts = families::MinimalOdeOptions { step: *h, ..Default::default() };
                families::minimal_radius_with(family, self.m, &opts).map_err(bad)
            }
            spec => {
                let (family, target) = spec.family().expect("non-polynomial radii are families");
                match target {
                    families::Target::Gaussian => families::flat_radius(family, self.m),
                    families::Target::Mean => families::minimal_radius(family, self.m),
                }
                .map_err(bad)
            }
        }
    }

    /// Validates the configuration and builds the surface.
    pub fn build(self) -> Result<Job, ConfigError> {
        self.validate()?;
        let tables = self.tables()?;
        let spine = self.spine(&tables)?;
        let radius = self.radius()?;
        let g = &self.grid;
        let bounds = ParamBox { u: (g.u.min, g.u.max), v: (g.v.min, g.v.max), w: (g.w.min, g.w.max) };
        let surface = CanalSurface::new(tables, spine, radius, bounds).map_err(|e| ConfigError::new("radius", e.to_string()))?;
        Ok(Job { config: self, surface })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TUBE: &str = r#"{
        "type": 2,
        "spine": { "curvatures": { "constant": [0, 0, 0] } },
        "radius": { "polynomial": [1] },
        "grid": {
            "u": { "min": 0, "max": 1, "count": 3 },
            "v": { "min": -1, "max": 1, "count": 3 },
            "w": { "min": -1, "max": 1, "count": 3 }
        }
    }"#;

    #[test]
    fn minimal_config_builds() {
        let job = parse(TUBE).unwrap().build().unwrap();
        assert_eq!(job.config.grid.nodes().len(), 27);
        assert!(job.surface.spine().is_straight());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = TUBE.replace("\"type\": 2,", "\"type\": 2, \"colour\": 1,");
        let err = parse(&text).unwrap_err();
        assert!(err.message.contains("colour"), "{err}");
    }

    #[test]
    fn kind_mismatch_names_the_field() {
        let text = TUBE.replace("\"curvatures\"", "\"kind\": \"timelike\", \"curvatures\"");
        let err = parse(&text).unwrap().build().unwrap_err();
        assert_eq!(err.field, "spine.kind");
    }

    #[test]
    fn empty_axis_is_rejected() {
        let text = TUBE.replace("\"min\": 0, \"max\": 1, \"count\": 3", "\"min\": 0, \"max\": 1, \"count\": 0");
        let err = parse(&text).unwrap().build().unwrap_err();
        assert_eq!(err.field, "grid.u.count");
    }

    #[test]
    fn periodic_axis_leaves_out_the_end() {
        let a = AxisConfig { min: 0.0, max: 1.0, count: 4, periodic: true };
        assert_eq!(a.values(), vec![0.0, 0.25, 0.5, 0.75]);
    }
}
