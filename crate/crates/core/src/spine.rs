//! Non-null spine curves carried by parallel (Bishop) frames.
//!
//! A spine is defined by its frame kind, the curvature functions
//! `(k1, k2, k3)`, a base point and an initial tetrad. The curve and its
//! frame are then recovered in one of three ways:
//!
//! * a straight line (all curvatures zero, constant frame),
//! * the closed-form solution of the constant-coefficient linear system,
//! * a dense RK4 table with periodic Lorentz re-orthonormalization,
//!   interpolated by cubic Hermite polynomials between knots.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::minkowski::{inner, lorentz_orthonormalize, ParallelFrame, Point4, Signature, Vec4};

/// Causal type of the spine and its frame. The name says which frame vector
/// is timelike.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FrameKind {
    /// Unit speed timelike curve, `B1` timelike.
    TimelikeCurve,
    /// Spacelike curve with timelike `B2`.
    SpacelikeB2Timelike,
    /// Spacelike curve with timelike `B3`.
    SpacelikeB3Timelike,
    /// Spacelike curve with timelike `B4`.
    SpacelikeB4Timelike,
}

impl FrameKind {
    pub const ALL: [FrameKind; 4] = [
        FrameKind::TimelikeCurve,
        FrameKind::SpacelikeB2Timelike,
        FrameKind::SpacelikeB3Timelike,
        FrameKind::SpacelikeB4Timelike,
    ];

    /// 0-based index of the timelike frame vector.
    pub fn timelike_slot(self) -> usize {
        match self {
            FrameKind::TimelikeCurve => 0,
            FrameKind::SpacelikeB2Timelike => 1,
            FrameKind::SpacelikeB3Timelike => 2,
            FrameKind::SpacelikeB4Timelike => 3,
        }
    }

    pub fn signature(self) -> Signature {
        Signature::with_timelike(self.timelike_slot())
    }

    /// Signs `c_i` in `B_{i+1}' = c_i k_i B1`.
    ///
    /// They equal `−σ1 σ_{i+1}`, which is what keeps `⟨B1, B_{i+1}⟩`
    /// constant along the curve.
    pub fn normal_signs(self) -> [f64; 3] {
        match self {
            FrameKind::TimelikeCurve => [1.0, 1.0, 1.0],
            FrameKind::SpacelikeB2Timelike => [1.0, -1.0, -1.0],
            FrameKind::SpacelikeB3Timelike => [-1.0, 1.0, -1.0],
            FrameKind::SpacelikeB4Timelike => [-1.0, -1.0, 1.0],
        }
    }

    /// Signs applied to `k_i²` in the curvature radicand.
    fn kappa_signs(self) -> [f64; 3] {
        match self {
            FrameKind::TimelikeCurve => [1.0, 1.0, 1.0],
            FrameKind::SpacelikeB2Timelike => [1.0, -1.0, -1.0],
            FrameKind::SpacelikeB3Timelike => [1.0, -1.0, 1.0],
            FrameKind::SpacelikeB4Timelike => [1.0, 1.0, -1.0],
        }
    }

    pub fn standard_frame(self) -> ParallelFrame {
        ParallelFrame::standard(self.signature())
    }
}

/// Applies the Bishop system of `kind` with curvatures `k` to an arbitrary
/// quadruple of vectors (the system is linear).
fn apply_system(kind: FrameKind, k: [f64; 3], b: &[Vec4; 4]) -> [Vec4; 4] {
    let c = kind.normal_signs();
    [
        b[1] * k[0] + b[2] * k[1] + b[3] * k[2],
        b[0] * (c[0] * k[0]),
        b[0] * (c[1] * k[1]),
        b[0] * (c[2] * k[2]),
    ]
}

/// Frame velocity `(B1', B2', B3', B4')` from the Bishop system of `kind`.
///
/// `B1' = k1 B2 + k2 B3 + k3 B4` for every kind; the normals move only along
/// `B1`, with signs given by [`FrameKind::normal_signs`].
pub fn bishop_derivative(kind: FrameKind, k: [f64; 3], frame: &ParallelFrame) -> [Vec4; 4] {
    apply_system(kind, k, &frame.b)
}

/// Curvature radicand and, when it is non-negative, its square root.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kappa {
    pub radicand: f64,
    pub kappa: Option<f64>,
}

pub fn kappa(kind: FrameKind, k: [f64; 3]) -> Kappa {
    let s = kind.kappa_signs();
    let radicand = s[0] * k[0] * k[0] + s[1] * k[1] * k[1] + s[2] * k[2] * k[2];
    Kappa {
        radicand,
        kappa: (radicand >= 0.0).then(|| radicand.sqrt()),
    }
}

/// The curvature functions `k1, k2, k3` together with their derivatives.
#[derive(Clone, Debug, PartialEq)]
pub enum CurvatureFunctions {
    Constant([f64; 3]),
    /// Polynomial coefficients in `u`, lowest degree first.
    Polynomial([Vec<f64>; 3]),
}

fn poly_eval(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * u + a)
}

fn poly_deriv(c: &[f64], u: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (n, a)| acc * u + n as f64 * a)
}

impl CurvatureFunctions {
    pub fn straight() -> Self {
        CurvatureFunctions::Constant([0.0; 3])
    }

    pub fn eval(&self, u: f64) -> [f64; 3] {
        match self {
            CurvatureFunctions::Constant(k) => *k,
            CurvatureFunctions::Polynomial(p) => std::array::from_fn(|i| poly_eval(&p[i], u)),
        }
    }

    pub fn derivative(&self, u: f64) -> [f64; 3] {
        match self {
            CurvatureFunctions::Constant(_) => [0.0; 3],
            CurvatureFunctions::Polynomial(p) => std::array::from_fn(|i| poly_deriv(&p[i], u)),
        }
    }

    pub fn as_constant(&self) -> Option<[f64; 3]> {
        match self {
            CurvatureFunctions::Constant(k) => Some(*k),
            CurvatureFunctions::Polynomial(p) => p
                .iter()
                .all(|c| c.iter().skip(1).all(|a| *a == 0.0))
                .then(|| std::array::from_fn(|i| p[i].first().copied().unwrap_or(0.0))),
        }
    }

    pub fn is_straight(&self) -> bool {
        self.as_constant() == Some([0.0; 3])
    }
}

/// RK4 settings for integrated spines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub step: f64,
    /// Re-orthonormalize the frame every this many steps; `None` disables it.
    pub reorthonormalize_every: Option<usize>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            step: 1e-3,
            reorthonormalize_every: Some(16),
        }
    }
}

/// How the spine is evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpineMode {
    AnalyticLine,
    AnalyticConstantK,
    Integrated(IntegratorConfig),
}

/// `Σ z^n / (2n + offset)!` for the closed-form solution.
fn even_series(z: f64, offset: u32) -> f64 {
    let mut term = 1.0;
    for j in 1..=offset {
        term /= j as f64;
    }
    let mut sum = term;
    let mut n = 0u32;
    loop {
        n += 1;
        let a = 2 * n + offset;
        term *= z / ((a - 1) as f64 * a as f64);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() || n > 60 {
            break;
        }
    }
    sum
}

/// `(C, S, T)` with `C'' = ρC`, `S = ∫C`, `T = ∫S`, `C(0) = 1`, `S(0) = T(0) = 0`,
/// together with `ρ` for the derivatives `C' = ρS`, `S' = C`, `T' = S`.
fn propagator(rho: f64, t: f64) -> (f64, f64, f64) {
    let z = rho * t * t;
    if z.abs() < 1.0 {
        (even_series(z, 0), t * even_series(z, 1), t * t * even_series(z, 2))
    } else if rho > 0.0 {
        let w = rho.sqrt();
        let (sh, ch) = ((w * t).sinh(), (w * t).cosh());
        (ch, sh / w, (ch - 1.0) / rho)
    } else {
        let w = (-rho).sqrt();
        let (sn, cs) = (w * t).sin_cos();
        (cs, sn / w, (1.0 - cs) / (-rho))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Knot {
    u: f64,
    state: [Vec4; 5],
    rate: [Vec4; 5],
}

#[derive(Clone, Debug, PartialEq)]
enum Evaluator {
    Line,
    ConstantK { k: [f64; 3], rho: f64, velocity0: Vec4 },
    Table(Arc<Vec<Knot>>),
}

/// Values at one parameter: point, frame, and the first two derivatives of
/// the frame (`γ' = B1`, `γ'' = B1'`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameJet {
    pub point: Point4,
    pub frame: ParallelFrame,
    pub velocity: [Vec4; 4],
    pub acceleration: [Vec4; 4],
}

/// A unit-speed non-null curve with its parallel frame.
#[derive(Clone, Debug, PartialEq)]
pub struct SpineCurve {
    kind: FrameKind,
    curvatures: CurvatureFunctions,
    gamma0: Point4,
    frame0: ParallelFrame,
    u0: f64,
    interval: (f64, f64),
    mode: SpineMode,
    evaluator: Evaluator,
}

/// Worst-case frame diagnostics over a grid.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FrameResiduals {
    /// `max |⟨B_i, B_j⟩ − σ_i δ_ij|`.
    pub gram: f64,
    /// `max ‖FD(γ)' − B1‖` (Euclidean component norm).
    pub tangent: f64,
}

const FRAME0_TOL: f64 = 1e-10;

impl SpineCurve {
    fn validate(kind: FrameKind, frame0: &ParallelFrame, u0: f64, interval: (f64, f64)) -> Result<()> {
        let (lo, hi) = interval;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Invalid(format!("spine interval [{lo}, {hi}] is empty or non-finite")));
        }
        if !(lo..=hi).contains(&u0) {
            return Err(Error::OutOfInterval { u: u0, lo, hi });
        }
        if frame0.signature != kind.signature() {
            return Err(Error::Invalid(format!(
                "frame signature {:?} does not match {:?}",
                frame0.signature.0, kind
            )));
        }
        let residual = frame0.gram_residual();
        if !(residual < FRAME0_TOL) {
            return Err(Error::DegenerateFrame(format!("initial frame Gram residual {residual:e}")));
        }
        Ok(())
    }

    /// A straight line `γ(u) = γ0 + (u − u0) B1` with a constant frame.
    pub fn line(kind: FrameKind, gamma0: Point4, frame0: ParallelFrame, u0: f64, interval: (f64, f64)) -> Result<Self> {
        Self::validate(kind, &frame0, u0, interval)?;
        Ok(SpineCurve {
            kind,
            curvatures: CurvatureFunctions::straight(),
            gamma0,
            frame0,
            u0,
            interval,
            mode: SpineMode::AnalyticLine,
            evaluator: Evaluator::Line,
        })
    }

    /// Closed-form spine for constant curvatures.
    pub fn constant_k(
        kind: FrameKind,
        k: [f64; 3],
        gamma0: Point4,
        frame0: ParallelFrame,
        u0: f64,
        interval: (f64, f64),
    ) -> Result<Self> {
        Self::validate(kind, &frame0, u0, interval)?;
        if k.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("curvature".into()));
        }
        let c = kind.normal_signs();
        // B1'' = ρ B1 for constant curvatures
        let rho = c[0] * k[0] * k[0] + c[1] * k[1] * k[1] + c[2] * k[2] * k[2];
        let velocity0 = bishop_derivative(kind, k, &frame0)[0];
        Ok(SpineCurve {
            kind,
            curvatures: CurvatureFunctions::Constant(k),
            gamma0,
            frame0,
            u0,
            interval,
            mode: SpineMode::AnalyticConstantK,
            evaluator: Evaluator::ConstantK { k, rho, velocity0 },
        })
    }

    /// Spine obtained by RK4 integration of the Bishop system from `u0`
    /// towards both ends of `interval`.
    pub fn integrated(
        kind: FrameKind,
        curvatures: CurvatureFunctions,
        gamma0: Point4,
        frame0: ParallelFrame,
        u0: f64,
        interval: (f64, f64),
        config: IntegratorConfig,
    ) -> Result<Self> {
        Self::validate(kind, &frame0, u0, interval)?;
        let (lo, hi) = interval;
        let span = hi - lo;
        if !(config.step.is_finite() && config.step > 0.0) || config.step < 1e-12 * span.max(1.0) {
            return Err(Error::StepUnderflow(format!("step {} over span {span}", config.step)));
        }
        if span / config.step > 5e7 {
            return Err(Error::StepUnderflow(format!("{} steps requested", span / config.step)));
        }
        if let Some(0) = config.reorthonormalize_every {
            return Err(Error::Invalid("re-orthonormalization period must be positive".into()));
        }

        let rate = |u: f64, y: &[Vec4; 5]| -> [Vec4; 5] {
            let b = [y[1], y[2], y[3], y[4]];
            let d = apply_system(kind, curvatures.eval(u), &b);
            [y[1], d[0], d[1], d[2], d[3]]
        };
        let start = [gamma0, frame0.b[0], frame0.b[1], frame0.b[2], frame0.b[3]];

        let sweep = |end: f64| -> Result<Vec<Knot>> {
            let length = end - u0;
            let n = (length.abs() / config.step).ceil() as usize;
            let mut knots = vec![Knot { u: u0, state: start, rate: rate(u0, &start) }];
            if n == 0 {
                return Ok(knots);
            }
            let h = length / n as f64;
            let mut y = start;
            for i in 0..n {
                let u = u0 + i as f64 * h;
                let k1 = rate(u, &y);
                let mid = |k: &[Vec4; 5], f: f64| -> [Vec4; 5] { std::array::from_fn(|j| y[j] + k[j] * f) };
                let k2 = rate(u + 0.5 * h, &mid(&k1, 0.5 * h));
                let k3 = rate(u + 0.5 * h, &mid(&k2, 0.5 * h));
                let k4 = rate(u + h, &mid(&k3, h));
                for j in 0..5 {
                    y[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0);
                }
                if let Some(every) = config.reorthonormalize_every {
                    if (i + 1) % every == 0 || i + 1 == n {
                        let f = lorentz_orthonormalize(&ParallelFrame::new([y[1], y[2], y[3], y[4]], frame0.signature))?;
                        y[1..].copy_from_slice(&f.b);
                    }
                }
                if !y.iter().all(Vec4::is_finite) {
                    return Err(Error::NonFinite(format!("integrated frame at u = {}", u + h)));
                }
                let un = if i + 1 == n { end } else { u0 + (i + 1) as f64 * h };
                knots.push(Knot { u: un, state: y, rate: rate(un, &y) });
            }
            Ok(knots)
        };

        let mut backward = sweep(lo)?;
        let forward = sweep(hi)?;
        backward.reverse();
        backward.pop(); // u0 is the first forward knot
        backward.extend(forward);

        Ok(SpineCurve {
            kind,
            curvatures,
            gamma0,
            frame0,
            u0,
            interval,
            mode: SpineMode::Integrated(config),
            evaluator: Evaluator::Table(Arc::new(backward)),
        })
    }

    pub fn kind(&self) -> FrameKind {
        self.kind
    }

    pub fn curvatures(&self) -> &CurvatureFunctions {
        &self.curvatures
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn mode(&self) -> SpineMode {
        self.mode
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    pub fn gamma0(&self) -> Point4 {
        self.gamma0
    }

    pub fn frame0(&self) -> &ParallelFrame {
        &self.frame0
    }

    /// Whether the closed-form derivatives of [`Self::frame_jet`] are exact.
    pub fn is_analytic(&self) -> bool {
        !matches!(self.evaluator, Evaluator::Table(_))
    }

    pub fn is_straight(&self) -> bool {
        self.curvatures.is_straight()
    }

    fn check(&self, u: f64) -> Result<()> {
        let (lo, hi) = self.interval;
        if !(u >= lo && u <= hi) {
            return Err(Error::OutOfInterval { u, lo, hi });
        }
        Ok(())
    }

    /// `γ(u)` and the parallel frame at `u`.
    pub fn frame_at(&self, u: f64) -> Result<(Point4, ParallelFrame)> {
        self.check(u)?;
        let sig = self.frame0.signature;
        match &self.evaluator {
            Evaluator::Line => Ok((self.gamma0 + self.frame0.b[0] * (u - self.u0), self.frame0)),
            Evaluator::ConstantK { k, rho, velocity0 } => {
                let t = u - self.u0;
                let (c, s, tt) = propagator(*rho, t);
                let b10 = self.frame0.b[0];
                let integral = b10 * s + *velocity0 * tt;
                let signs = self.kind.normal_signs();
                let b1 = b10 * c + *velocity0 * s;
                let b = [
                    b1,
                    self.frame0.b[1] + integral * (signs[0] * k[0]),
                    self.frame0.b[2] + integral * (signs[1] * k[1]),
                    self.frame0.b[3] + integral * (signs[2] * k[2]),
                ];
                Ok((self.gamma0 + integral, ParallelFrame::new(b, sig)))
            }
            Evaluator::Table(knots) => {
                let j = knots.partition_point(|k| k.u <= u).clamp(1, knots.len() - 1);
                let (a, b) = (&knots[j - 1], &knots[j]);
                let h = b.u - a.u;
                let t = if h > 0.0 { (u - a.u) / h } else { 0.0 };
                let t2 = t * t;
                let t3 = t2 * t;
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + t;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                let y: [Vec4; 5] = std::array::from_fn(|i| {
                    a.state[i] * h00 + a.rate[i] * (h10 * h) + b.state[i] * h01 + b.rate[i] * (h11 * h)
                });
                Ok((y[0], ParallelFrame::new([y[1], y[2], y[3], y[4]], sig)))
            }
        }
    }

    /// Point, frame and the frame's first and second derivatives at `u`,
    /// taken from the Bishop system itself.
    pub fn frame_jet(&self, u: f64) -> Result<FrameJet> {
        let (point, frame) = self.frame_at(u)?;
        let k = self.curvatures.eval(u);
        let dk = self.curvatures.derivative(u);
        let velocity = apply_system(self.kind, k, &frame.b);
        let from_dk = apply_system(self.kind, dk, &frame.b);
        let from_v = apply_system(self.kind, k, &velocity);
        let acceleration = std::array::from_fn(|i| from_dk[i] + from_v[i]);
        Ok(FrameJet { point, frame, velocity, acceleration })
    }

    /// Worst Gram residual and tangent mismatch over `grid`.
    pub fn frame_residuals(&self, grid: &[f64]) -> Result<FrameResiduals> {
        const H: f64 = 1e-4;
        let (lo, hi) = self.interval;
        let mut out = FrameResiduals::default();
        for &u in grid {
            let (_, frame) = self.frame_at(u)?;
            out.gram = out.gram.max(frame.gram_residual());
            let p = |x: f64| self.frame_at(x).map(|(g, _)| g);
            let derivative = if u - H >= lo && u + H <= hi {
                (p(u + H)? - p(u - H)?) * (0.5 / H)
            } else if u + 2.0 * H <= hi {
                (p(u)? * -3.0 + p(u + H)? * 4.0 - p(u + 2.0 * H)?) * (0.5 / H)
            } else {
                (p(u)? * 3.0 - p(u - H)? * 4.0 + p(u - 2.0 * H)?) * (0.5 / H)
            };
            out.tangent = out.tangent.max((derivative - frame.b[0]).euclidean_norm());
        }
        Ok(out)
    }
}

/// `⟨B1', B1⟩` for a frame: identically zero for every Bishop system.
pub fn tangent_acceleration_inner(kind: FrameKind, k: [f64; 3], frame: &ParallelFrame) -> f64 {
    let d = bishop_derivative(kind, k, frame);
    inner(&d[0], &frame.b[0])
}
