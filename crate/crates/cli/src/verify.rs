//! Residual sweeps behind `canal4d verify`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use canal4d_core::canal::{ParamBox, TANGENT_STEP};
use canal4d_core::closedform::{self, WEINGARTEN_STEP};
use canal4d_core::diffgeo::DerivativeMode;
use canal4d_core::families::{self, RadiusFamily, Target};
use canal4d_core::spine::IntegratorConfig;
use canal4d_core::{CanalSurface, CurvatureFunctions, FrameKind, RadiusProfile, SpineCurve, TypeTables, Vec4};

use crate::config::{Job, Tolerances};
use crate::output::{chunked, num};

/// Invariant classes in report order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Class {
    Oracle,
    Identity,
    Membership,
    Orthogonality,
    Weingarten,
    FrameGram,
    Family,
}

impl Class {
    pub const ALL: [Class; 7] = [
        Class::Oracle,
        Class::Identity,
        Class::Membership,
        Class::Orthogonality,
        Class::Weingarten,
        Class::FrameGram,
        Class::Family,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Class::Oracle => "oracle",
            Class::Identity => "identity",
            Class::Membership => "membership",
            Class::Orthogonality => "orthogonality",
            Class::Weingarten => "weingarten",
            Class::FrameGram => "frame-gram",
            Class::Family => "family",
        }
    }

    fn tolerance(self, t: &Tolerances, target: Option<Target>) -> f64 {
        match self {
            Class::Oracle => t.oracle,
            Class::Identity => t.identity,
            Class::Membership => t.membership,
            Class::Orthogonality => t.orthogonality,
            Class::Weingarten => t.weingarten,
            Class::FrameGram => t.frame_gram,
            Class::Family => match target {
                Some(Target::Mean) => t.minimal,
                _ => t.flat,
            },
        }
    }
}

/// Where a residual was measured.
#[derive(Clone, Debug, PartialEq)]
pub struct Offender {
    pub case: String,
    /// `(u, v, w)`, or `(u, NaN, NaN)` for spine-only checks.
    pub point: [f64; 3],
    pub note: Option<String>,
}

impl std::fmt::Display for Offender {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let [u, v, w] = self.point;
        if v.is_nan() {
            write!(f, "{} at u={}", self.case, num(u))?;
        } else {
            write!(f, "{} at (u,v,w)=({},{},{})", self.case, num(u), num(v), num(w))?;
        }
        if let Some(n) = &self.note {
            write!(f, ": {n}")?;
        }
        Ok(())
    }
}

/// Largest residual of one class, relative to its tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassResult {
    pub class: Class,
    pub samples: usize,
    pub max: f64,
    pub tolerance: f64,
    pub worst: Option<Offender>,
    /// Offender with the largest `residual / tolerance`, or the first error.
    pub worst_ratio: f64,
}

impl ClassResult {
    pub fn passed(&self) -> bool {
        self.worst_ratio < 1.0
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub classes: Vec<ClassResult>,
}

impl Report {
    fn record(&mut self, class: Class, tolerance: f64, value: Result<f64, String>, at: impl FnOnce() -> Offender) {
        let idx = match self.classes.iter().position(|c| c.class == class) {
            Some(i) => i,
            None => {
                self.classes.push(ClassResult {
                    class,
                    samples: 0,
                    max: 0.0,
                    tolerance,
                    worst: None,
                    worst_ratio: 0.0,
                });
                self.classes.sort_by_key(|c| c.class);
                self.classes.iter().position(|c| c.class == class).expect("just inserted")
            }
        };
        let c = &mut self.classes[idx];
        c.samples += 1;
        let (ratio, note) = match value {
            Ok(x) if x.is_finite() => {
                c.max = c.max.max(x);
                (x / tolerance, None)
            }
            Ok(x) => {
                c.max = f64::INFINITY;
                (f64::INFINITY, Some(format!("non-finite residual {x}")))
            }
            Err(e) => {
                c.max = f64::INFINITY;
                (f64::INFINITY, Some(e))
            }
        };
        if c.worst.is_none() || ratio > c.worst_ratio {
            c.worst_ratio = ratio;
            let mut o = at();
            o.note = note;
            c.worst = Some(o);
        }
    }

    fn merge(&mut self, other: Report) {
        for c in other.classes {
            if let Some(mine) = self.classes.iter_mut().find(|m| m.class == c.class) {
                mine.samples += c.samples;
                mine.max = mine.max.max(c.max);
                if c.worst_ratio > mine.worst_ratio {
                    mine.worst_ratio = c.worst_ratio;
                    mine.worst = c.worst;
                }
                mine.tolerance = mine.tolerance.min(c.tolerance);
            } else {
                self.classes.push(c);
            }
        }
        self.classes.sort_by_key(|c| c.class);
    }

    pub fn passed(&self) -> bool {
        self.classes.iter().all(ClassResult::passed)
    }

    /// The failing class with the largest tolerance ratio.
    pub fn worst(&self) -> Option<&ClassResult> {
        self.classes
            .iter()
            .filter(|c| !c.passed())
            .max_by(|a, b| a.worst_ratio.total_cmp(&b.worst_ratio))
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.classes {
            let status = if c.passed() { "ok" } else { "FAIL" };
            let _ = write!(s, "{:<14} max {:<24} tol {:<8} n {:<6} {status}", c.class.name(), num(c.max), num(c.tolerance), c.samples);
            if let Some(o) = &c.worst {
                let _ = write!(s, "  worst {o}");
            }
            s.push('\n');
        }
        s
    }
}

/// A surface with the grid and checks to run on it.
#[derive(Clone, Debug)]
pub struct Case {
    pub label: String,
    pub surface: CanalSurface,
    pub nodes: Vec<[f64; 3]>,
    /// `None` skips the numerical oracle.
    pub oracle: Option<DerivativeMode>,
    pub weingarten: bool,
    /// Family check on a straight spine.
    pub family: Option<Target>,
}

const FRAME_SAMPLES: usize = 257;

fn point_checks(case: &Case, tol: &Tolerances, chunk: &[[f64; 3]]) -> Report {
    let mut rep = Report::default();
    let s = &case.surface;
    let straight = s.spine().is_straight();
    for &[u, v, w] in chunk {
        let at = || Offender { case: case.label.clone(), point: [u, v, w], note: None };
        let err = |e: canal4d_core::Error| e.to_string();
        let inv = closedform::invariants(s, u, v, w);
        let r = s.valid_jet(u).map(|j| j.r);

        if let Some(mode) = case.oracle {
            let x = closedform::compare_with_oracle(s, u, v, w, mode)
                .map(|c| c.gaussian_error().max(c.mean_error()).max(c.principal_distance()))
                .map_err(err);
            rep.record(Class::Oracle, tol.oracle, x, at);
        }

        let identity = match (&inv, &r) {
            (Ok(i), Ok(r)) => closedform::identity_residual(s, u, v, w)
                .map(|x| x.abs() / (1.0 + i.mean.abs() + r * r * i.gaussian.abs()))
                .map_err(err),
            (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
        };
        rep.record(Class::Identity, tol.identity, identity, at);

        let membership = s
            .membership_residual(u, v, w)
            .and_then(|x| Ok(x.abs() / (1.0 + r.clone()?.powi(2))))
            .map_err(err);
        rep.record(Class::Membership, tol.membership, membership, at);

        let orth = s.tangent_radial_orthogonality(u, v, w, TANGENT_STEP).map(f64::abs).map_err(err);
        rep.record(Class::Orthogonality, tol.orthogonality, orth, at);

        if case.weingarten {
            let x = closedform::weingarten_residuals(s, u, v, w, WEINGARTEN_STEP)
                .map(|r| if straight { r.uv.abs().max(r.uw.abs()).max(r.vw.abs()) } else { r.vw.abs() })
                .map_err(err);
            rep.record(Class::Weingarten, tol.weingarten, x, at);
        }

        if let Some(target) = case.family {
            let x = inv
                .as_ref()
                .map(|i| match target {
                    Target::Gaussian => i.gaussian.abs(),
                    Target::Mean => i.mean.abs(),
                })
                .map_err(|e| e.to_string());
            rep.record(Class::Family, Class::Family.tolerance(tol, Some(target)), x, at);
        }
    }
    rep
}

fn frame_check(label: &str, spine: &SpineCurve, tol: &Tolerances, rep: &mut Report) {
    let (lo, hi) = spine.interval();
    let us: Vec<f64> = (0..FRAME_SAMPLES)
        .map(|i| (lo + (hi - lo) * i as f64 / (FRAME_SAMPLES - 1) as f64).min(hi))
        .collect();
    for &u in &us {
        let x = spine.frame_at(u).map(|(_, f)| f.gram_residual()).map_err(|e| e.to_string());
        rep.record(Class::FrameGram, tol.frame_gram, x, || Offender {
            case: label.to_string(),
            point: [u, f64::NAN, f64::NAN],
            note: None,
        });
    }
}

/// Runs every check of `case`, sweeping nodes on `workers` threads.
pub fn run_case(case: &Case, tol: &Tolerances, workers: Option<usize>) -> Report {
    let parts = chunked(&case.nodes, workers, |chunk| point_checks(case, tol, chunk));
    let mut rep = Report::default();
    for p in parts {
        rep.merge(p);
    }
    frame_check(&case.label, case.surface.spine(), tol, &mut rep);
    rep
}

/// Negates `μ₁` in the closed-form tables, leaving the geometry untouched.
pub fn inject_fault(surface: &CanalSurface) -> CanalSurface {
    let mut t = *surface.tables();
    t.mu[0] = -t.mu[0];
    CanalSurface::new(t, surface.spine().clone(), surface.radius().clone(), *surface.bounds())
        .expect("the radius and spine already passed validation")
}

/// Builds the case a configuration describes.
pub fn job_case(job: &Job, oracle: bool) -> Case {
    let cfg = &job.config;
    let family = if job.surface.spine().is_straight() {
        cfg.radius.family().map(|(_, t)| t)
    } else {
        None
    };
    Case {
        label: format!("type {}", cfg.m),
        surface: job.surface.clone(),
        nodes: cfg.grid.nodes(),
        oracle: oracle.then(|| cfg.derivative.mode()),
        weingarten: true,
        family,
    }
}

pub fn verify_job(job: &Job, tol: &Tolerances, oracle: bool, fault: bool) -> Report {
    let mut case = job_case(job, oracle);
    if fault {
        case.surface = inject_fault(&case.surface);
    }
    run_case(&case, tol, job.config.workers)
}

/// Curvatures used by the oracle surfaces.
pub const ORACLE_K: [f64; 3] = [0.3, 0.2, 0.1];

/// Radius of the oracle surface for type `m`.
pub fn oracle_radius(m: u8) -> RadiusProfile {
    let t = TypeTables::for_type(m).expect("valid type");
    if t.s > 0.0 {
        RadiusProfile::linear(1.5, 0.2)
    } else {
        RadiusProfile::linear(0.2, 1.5)
    }
}

/// Parameter box of the oracle grid for type `m`.
pub fn oracle_box(m: u8) -> ParamBox {
    let t = TypeTables::for_type(m).expect("valid type");
    if t.shape.is_circular() {
        ParamBox { u: (0.3, 0.6), v: (0.0, 2.0 * PI), w: (-1.0, 1.0) }
    } else {
        ParamBox { u: (0.3, 0.6), v: (-0.5, 0.5), w: (-0.5, 0.5) }
    }
}

/// Constant-curvature surface checked against the numerical oracle.
pub fn oracle_surface(m: u8) -> CanalSurface {
    let t = TypeTables::for_type(m).expect("valid type");
    let spine = SpineCurve::constant_k(t.kind, ORACLE_K, Vec4::ZERO, t.kind.standard_frame(), 0.0, (0.0, 2.0))
        .expect("standard frame");
    CanalSurface::new(t, spine, oracle_radius(m), oracle_box(m)).expect("oracle surface is valid")
}

/// `n³` nodes of the oracle box; the circular `v` axis leaves out `2π`.
pub fn oracle_nodes(m: u8, n: usize) -> Vec<[f64; 3]> {
    let b = oracle_box(m);
    let circular = TypeTables::for_type(m).expect("valid type").shape.is_circular();
    let axis = |(lo, hi): (f64, f64), periodic: bool| -> Vec<f64> {
        let div = if periodic { n } else { n.saturating_sub(1).max(1) } as f64;
        (0..n).map(|i| lo + (hi - lo) * i as f64 / div).collect()
    };
    let (us, vs, ws) = (axis(b.u, false), axis(b.v, circular), axis(b.w, false));
    let mut out = Vec::with_capacity(n * n * n);
    for &u in &us {
        for &v in &vs {
            for &w in &ws {
                out.push([u, v, w]);
            }
        }
    }
    out
}

fn straight_case(label: String, profile: &RadiusProfile, m: u8, u: (f64, f64), target: Target, n: usize) -> Case {
    let surface = families::straight_surface(profile, m, u).expect("battery family is valid");
    let b = *surface.bounds();
    let nodes = families::box_grid(b.u, b.v, b.w, [n; 3]).into_iter().map(|(u, v, w)| [u, v, w]).collect();
    Case { label, surface, nodes, oracle: None, weingarten: true, family: Some(target) }
}

/// The builtin battery: oracle surfaces of all eight types, unit tubes,
/// flat and minimal families on straight spines, and integrated frames.
pub fn battery(n: usize) -> Vec<Case> {
    let mut cases = Vec::new();
    for m in 1..=8 {
        cases.push(Case {
            label: format!("oracle type {m}"),
            surface: oracle_surface(m),
            nodes: oracle_nodes(m, n),
            oracle: Some(DerivativeMode::FiniteDifference { step: 1e-4 }),
            weingarten: true,
            family: None,
        });
    }
    for m in [2, 7] {
        let mut c = straight_case(format!("unit tube type {m}"), &RadiusProfile::constant(1.0), m, (-1.0, 1.0), Target::Gaussian, 5);
        c.oracle = Some(DerivativeMode::Analytic);
        cases.push(c);
    }
    for m in 1..=8 {
        let t = TypeTables::for_type(m).expect("valid type");
        let (c1, c2) = if t.s > 0.0 { (0.5, 2.0) } else { (1.5, 2.0) };
        let profile = families::flat_radius(RadiusFamily::Linear { c1, c2 }, m).expect("battery family is valid");
        cases.push(straight_case(format!("linear flat type {m}"), &profile, m, (0.2, 1.0), Target::Gaussian, 6));

        let family = RadiusFamily::MinimalQuadrature { c3: 1.0, c4: 0.0, sign: 1.0 };
        let profile = families::minimal_radius(family, m).expect("battery family is valid");
        let (lo, hi) = profile.domain();
        let pad = 0.1 * (hi - lo);
        cases.push(straight_case(format!("minimal quadrature type {m}"), &profile, m, (lo + pad, hi - pad), Target::Mean, 6));
    }
    cases
}

/// Integrated spines of every kind over `[0, 10]`.
pub fn battery_spines() -> Vec<(String, SpineCurve)> {
    FrameKind::ALL
        .iter()
        .map(|&kind| {
            let spine = SpineCurve::integrated(
                kind,
                CurvatureFunctions::Constant(ORACLE_K),
                Vec4::ZERO,
                kind.standard_frame(),
                0.0,
                (0.0, 10.0),
                IntegratorConfig::default(),
            )
            .expect("standard frame");
            (format!("integrated {kind:?}"), spine)
        })
        .collect()
}

/// Runs the battery. `fault` negates `μ₁` on every surface.
pub fn verify_battery(tol: &Tolerances, workers: Option<usize>, fault: bool) -> Report {
    let mut rep = Report::default();
    for mut case in battery(10) {
        if fault {
            case.surface = inject_fault(&case.surface);
        }
        rep.merge(run_case(&case, tol, workers));
    }
    for (label, spine) in battery_spines() {
        frame_check(&label, &spine, tol, &mut rep);
    }
    rep
}
