//! The eight canal hypersurface types `C_m`, `m ∈ {1..8}`.
//!
//! Each type is the envelope of pseudo hyperspheres (odd `m`) or pseudo
//! hyperbolic hyperspheres (even `m`) of radius `r(u)` centred on a spine:
//!
//! ```text
//! C_m = γ + s r r' B1 + r √(s + r'²) (f1 B2 + f2 B3 + f3 B4),   s = (−1)^{m + (8−m)!}
//! ```
//!
//! with the shape functions `f_i(v, w)` and the sign constants `(ε, μ, η)` of
//! [`TypeTables`]. Only the `+` branch of the square root is built.

use crate::diffgeo::{self, Hypersurface, SurfaceJet};
use crate::error::{Error, Result};
use crate::minkowski::{inner, ParallelFrame, Point4, Vec4};
use crate::radius::{RadiusJet, RadiusProfile};
use crate::spine::{FrameKind, SpineCurve};

/// Smallest admissible value of `s + r'²`.
pub const VALIDITY_MARGIN: f64 = 1e-12;

/// Default step of the finite-difference tangent in the envelope checks.
pub const TANGENT_STEP: f64 = 1e-5;

/// `(−1)^{m + (8−m)!}` evaluated from the factorial's parity.
pub fn parity_sign(m: u8) -> f64 {
    assert!((1..=8).contains(&m), "type index must be in 1..=8");
    let fact: u64 = (1..=u64::from(8 - m)).product();
    if (u64::from(m) + fact).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `(−1)^{(8−m)!}`, the sign on `B1` in the Gauss map.
pub fn gauss_map_b1_sign(m: u8) -> f64 {
    assert!((1..=8).contains(&m), "type index must be in 1..=8");
    let fact: u64 = (1..=u64::from(8 - m)).product();
    if fact.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// One factor of a shape function.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Elem {
    One,
    Cosh,
    Sinh,
    Cos,
    Sin,
}

impl Elem {
    /// Value, first and second derivative.
    fn eval(self, x: f64) -> [f64; 3] {
        match self {
            Elem::One => [1.0, 0.0, 0.0],
            Elem::Cosh => [x.cosh(), x.sinh(), x.cosh()],
            Elem::Sinh => [x.sinh(), x.cosh(), x.sinh()],
            Elem::Cos => [x.cos(), -x.sin(), -x.cos()],
            Elem::Sin => [x.sin(), x.cos(), -x.sin()],
        }
    }
}

/// Row of the shape-function table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    /// `(cosh v cosh w, sinh w, sinh v cosh w)`, types 1 and 2.
    HyperbolicB2,
    /// `(sinh v cosh w, cosh v cosh w, sinh w)`, types 3 and 4.
    HyperbolicB3,
    /// `(sinh w, sinh v cosh w, cosh v cosh w)`, types 5 and 6.
    HyperbolicB4,
    /// `(cos v cos w, sin v cos w, sin w)`, types 7 and 8.
    Circular,
}

/// Shape functions and their partials in `v` and `w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeJet {
    pub f: [f64; 3],
    pub fv: [f64; 3],
    pub fw: [f64; 3],
    pub fvv: [f64; 3],
    pub fvw: [f64; 3],
    pub fww: [f64; 3],
}

impl ShapeKind {
    fn factors(self) -> [(Elem, Elem); 3] {
        use Elem::*;
        match self {
            ShapeKind::HyperbolicB2 => [(Cosh, Cosh), (One, Sinh), (Sinh, Cosh)],
            ShapeKind::HyperbolicB3 => [(Sinh, Cosh), (Cosh, Cosh), (One, Sinh)],
            ShapeKind::HyperbolicB4 => [(One, Sinh), (Sinh, Cosh), (Cosh, Cosh)],
            ShapeKind::Circular => [(Cos, Cos), (Sin, Cos), (One, Sin)],
        }
    }

    pub fn is_circular(self) -> bool {
        self == ShapeKind::Circular
    }

    pub fn values(self, v: f64, w: f64) -> [f64; 3] {
        self.factors().map(|(a, b)| a.eval(v)[0] * b.eval(w)[0])
    }

    pub fn jet(self, v: f64, w: f64) -> ShapeJet {
        let parts = self.factors().map(|(a, b)| (a.eval(v), b.eval(w)));
        ShapeJet {
            f: parts.map(|(a, b)| a[0] * b[0]),
            fv: parts.map(|(a, b)| a[1] * b[0]),
            fw: parts.map(|(a, b)| a[0] * b[1]),
            fvv: parts.map(|(a, b)| a[2] * b[0]),
            fvw: parts.map(|(a, b)| a[1] * b[1]),
            fww: parts.map(|(a, b)| a[0] * b[2]),
        }
    }

    /// Default `(v, w)` boxes: `[−2, 2]²` for hyperbolic rows, and
    /// `[0, 2π) × [−π/2 + 0.2, π/2 − 0.2]` for the circular row.
    pub fn default_vw_box(self) -> ((f64, f64), (f64, f64)) {
        if self.is_circular() {
            let h = std::f64::consts::FRAC_PI_2 - 0.2;
            ((0.0, std::f64::consts::TAU), (-h, h))
        } else {
            ((-2.0, 2.0), (-2.0, 2.0))
        }
    }
}

/// Shape functions of type `m`.
pub fn shape_functions(tables: &TypeTables, v: f64, w: f64) -> [f64; 3] {
    tables.shape.values(v, w)
}

/// Per-type constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TypeTables {
    pub m: u8,
    /// `(−1)^{m + (8−m)!}`.
    pub s: f64,
    pub shape: ShapeKind,
    pub eps: [f64; 3],
    pub mu: [f64; 3],
    pub eta: f64,
    pub kind: FrameKind,
}

impl TypeTables {
    pub fn for_type(m: u8) -> Result<TypeTables> {
        // (m, s, ε, μ, η)
        type Row = (u8, f64, [f64; 3], [f64; 3], f64);
        const ROWS: [Row; 8] = [
            (1, -1.0, [1.0, -1.0, -1.0], [-1.0, 1.0, 1.0], -1.0),
            (2, 1.0, [1.0, -1.0, -1.0], [1.0, -1.0, -1.0], -1.0),
            (3, -1.0, [1.0, -1.0, 1.0], [1.0, -1.0, 1.0], -1.0),
            (4, 1.0, [1.0, -1.0, 1.0], [-1.0, 1.0, -1.0], -1.0),
            (5, -1.0, [1.0, 1.0, -1.0], [1.0, 1.0, -1.0], 1.0),
            (6, 1.0, [1.0, 1.0, -1.0], [-1.0, -1.0, 1.0], -1.0),
            (7, 1.0, [1.0, 1.0, 1.0], [1.0, 1.0, 1.0], 1.0),
            (8, -1.0, [1.0, 1.0, 1.0], [-1.0, -1.0, -1.0], -1.0),
        ];
        if !(1..=8).contains(&m) {
            return Err(Error::Invalid(format!("canal type m = {m} is not in 1..=8")));
        }
        let (_, s, eps, mu, eta) = ROWS[usize::from(m - 1)];
        let (shape, kind) = match m {
            1 | 2 => (ShapeKind::HyperbolicB2, FrameKind::SpacelikeB2Timelike),
            3 | 4 => (ShapeKind::HyperbolicB3, FrameKind::SpacelikeB3Timelike),
            5 | 6 => (ShapeKind::HyperbolicB4, FrameKind::SpacelikeB4Timelike),
            _ => (ShapeKind::Circular, FrameKind::TimelikeCurve),
        };
        Ok(TypeTables { m, s, shape, eps, mu, eta, kind })
    }

    pub fn all() -> [TypeTables; 8] {
        std::array::from_fn(|i| TypeTables::for_type(i as u8 + 1).expect("types 1..=8 exist"))
    }

    /// Odd types envelope pseudo hyperspheres, even types pseudo hyperbolic
    /// hyperspheres.
    pub fn is_pseudo_hypersphere(&self) -> bool {
        self.m % 2 == 1
    }

    /// `(−1)^{m+1}`: the sign of `⟨C − γ, C − γ⟩ / r²`.
    pub fn sphere_sign(&self) -> f64 {
        if self.m % 2 == 1 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Parameter box of a surface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamBox {
    pub u: (f64, f64),
    pub v: (f64, f64),
    pub w: (f64, f64),
}

impl ParamBox {
    pub fn with_default_vw(shape: ShapeKind, u: (f64, f64)) -> Self {
        let (v, w) = shape.default_vw_box();
        ParamBox { u, v, w }
    }

    pub fn contains(&self, u: f64, v: f64, w: f64) -> bool {
        let inside = |x: f64, (lo, hi): (f64, f64)| x >= lo && x <= hi;
        inside(u, self.u) && inside(v, self.v) && inside(w, self.w)
    }
}

/// A canal hypersurface of one of the eight types.
#[derive(Clone, Debug)]
pub struct CanalSurface {
    tables: TypeTables,
    spine: SpineCurve,
    radius: RadiusProfile,
    bounds: ParamBox,
}

/// Samples used when checking validity over the `u` interval.
const VALIDITY_SAMPLES: usize = 1024;

impl CanalSurface {
    /// Builds the surface and checks, over the `u` interval, that the spine
    /// kind matches the type, that `r > 0` and that `s + r'² > 0`.
    pub fn new(tables: TypeTables, spine: SpineCurve, radius: RadiusProfile, bounds: ParamBox) -> Result<Self> {
        if spine.kind() != tables.kind {
            return Err(Error::Invalid(format!(
                "type {} needs a {:?} spine, got {:?}",
                tables.m,
                tables.kind,
                spine.kind()
            )));
        }
        let (ulo, uhi) = bounds.u;
        if !(ulo.is_finite() && uhi.is_finite() && ulo <= uhi) {
            return Err(Error::Invalid(format!("u interval [{ulo}, {uhi}]")));
        }
        for (name, (lo, hi)) in [("v", bounds.v), ("w", bounds.w)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Invalid(format!("{name} interval [{lo}, {hi}]")));
            }
        }
        let (slo, shi) = spine.interval();
        if ulo < slo || uhi > shi {
            return Err(Error::Invalid(format!(
                "u interval [{ulo}, {uhi}] is not inside the spine interval [{slo}, {shi}]"
            )));
        }
        if radius.is_constant() && tables.s < 0.0 {
            return Err(Error::Validity { u: ulo, value: tables.s });
        }
        let surface = CanalSurface { tables, spine, radius, bounds };
        let n = if ulo == uhi { 0 } else { VALIDITY_SAMPLES };
        for i in 0..=n {
            let u = if n == 0 { ulo } else { ulo + (uhi - ulo) * i as f64 / n as f64 };
            surface.valid_jet(u)?;
        }
        Ok(surface)
    }

    pub fn tables(&self) -> &TypeTables {
        &self.tables
    }

    pub fn m(&self) -> u8 {
        self.tables.m
    }

    pub fn spine(&self) -> &SpineCurve {
        &self.spine
    }

    pub fn radius(&self) -> &RadiusProfile {
        &self.radius
    }

    pub fn bounds(&self) -> &ParamBox {
        &self.bounds
    }

    /// Radius jet at `u` after checking `r > 0` and `s + r'² > 0`.
    pub fn valid_jet(&self, u: f64) -> Result<RadiusJet> {
        let j = self.radius.jet(u)?;
        if !(j.r > 0.0) {
            return Err(Error::NonPositiveRadius { u, r: j.r });
        }
        let q = self.tables.s + j.r1 * j.r1;
        if !(q > VALIDITY_MARGIN) {
            return Err(Error::Validity { u, value: q });
        }
        Ok(j)
    }

    /// `s + r'²` at `u`, without any check.
    pub fn validity_value(&self, u: f64) -> Result<f64> {
        let j = self.radius.jet(u)?;
        Ok(self.tables.s + j.r1 * j.r1)
    }

    fn shape_combination(f: &[f64; 3], b: &[Vec4; 4]) -> Vec4 {
        b[1] * f[0] + b[2] * f[1] + b[3] * f[2]
    }

    /// `C_m(u, v, w)`.
    pub fn evaluate(&self, u: f64, v: f64, w: f64) -> Result<Point4> {
        let j = self.valid_jet(u)?;
        let (gamma, frame) = self.spine.frame_at(u)?;
        let s = self.tables.s;
        let f = self.tables.shape.values(v, w);
        let radial = j.r * (s + j.r1 * j.r1).sqrt();
        Ok(gamma + frame.b[0] * (s * j.r * j.r1) + Self::shape_combination(&f, &frame.b) * radial)
    }

    /// The `m ∈ {1, 2}` parametrization written out on its own, with
    /// `n = m` and the hyperbolic shape functions inlined.
    pub fn evaluate_c12(&self, u: f64, v: f64, w: f64) -> Result<Point4> {
        let n = self.tables.m;
        if n > 2 {
            return Err(Error::Invalid(format!("specialized form covers types 1 and 2, not {n}")));
        }
        let sign_n = if n == 1 { -1.0 } else { 1.0 };
        let j = self.valid_jet(u)?;
        let (gamma, frame) = self.spine.frame_at(u)?;
        let (ch_v, sh_v, ch_w, sh_w) = (v.cosh(), v.sinh(), w.cosh(), w.sinh());
        let root = (sign_n + j.r1 * j.r1).sqrt();
        Ok(gamma
            + frame.b[0] * (sign_n * j.r * j.r1)
            + (frame.b[1] * (ch_v * ch_w) + frame.b[2] * sh_w + frame.b[3] * (sh_v * ch_w)) * (j.r * root))
    }

    /// The closed-form unit normal
    /// `η((−1)^{(8−m)!} r' B1 + (−1)^m √(s + r'²) Σ f_i B_{i+1})`.
    pub fn gauss_map_closed(&self, u: f64, v: f64, w: f64) -> Result<Vec4> {
        let j = self.valid_jet(u)?;
        let (_, frame) = self.spine.frame_at(u)?;
        let t = &self.tables;
        let f = t.shape.values(v, w);
        let sign_m = if t.m.is_multiple_of(2) { 1.0 } else { -1.0 };
        let root = (t.s + j.r1 * j.r1).sqrt();
        Ok((frame.b[0] * (gauss_map_b1_sign(t.m) * j.r1) + Self::shape_combination(&f, &frame.b) * (sign_m * root)) * t.eta)
    }

    /// `⟨C − γ, C − γ⟩ − (−1)^{m+1} r²`.
    pub fn membership_residual(&self, u: f64, v: f64, w: f64) -> Result<f64> {
        let c = self.evaluate(u, v, w)?;
        let (gamma, _) = self.spine.frame_at(u)?;
        let r = self.valid_jet(u)?.r;
        let d = c - gamma;
        Ok(inner(&d, &d) - self.tables.sphere_sign() * r * r)
    }

    /// `⟨C − γ, ∂C/∂u⟩` with a central-difference tangent of step `h`.
    pub fn tangent_radial_orthogonality(&self, u: f64, v: f64, w: f64, h: f64) -> Result<f64> {
        let c = self.evaluate(u, v, w)?;
        let (gamma, _) = self.spine.frame_at(u)?;
        let cu = (self.evaluate(u + h, v, w)? - self.evaluate(u - h, v, w)?) * (0.5 / h);
        Ok(inner(&(c - gamma), &cu))
    }

    /// Exact partials through second order from the Bishop system, the
    /// radius jet and the shape-function derivatives. Needs an analytic
    /// spine (straight line or constant curvatures).
    pub fn exact_jet(&self, u: f64, v: f64, w: f64) -> Result<SurfaceJet> {
        if !self.spine.is_analytic() {
            return Err(Error::AnalyticUnavailable("integrated spines have no closed-form frame".into()));
        }
        let j = self.valid_jet(u)?;
        let fj = self.spine.frame_jet(u)?;
        let s = self.tables.s;
        let sh = self.tables.shape.jet(v, w);
        let (r, r1, r2, r3) = (j.r, j.r1, j.r2, j.r3);
        let q = s + r1 * r1;
        let sq = q.sqrt();

        // C = γ + a B1 + b F with F = Σ f_i B_{i+1}
        let a = s * r * r1;
        let a1 = s * (r1 * r1 + r * r2);
        let a2 = s * (3.0 * r1 * r2 + r * r3);
        let b = r * sq;
        let b1 = r1 * sq + r * r1 * r2 / sq;
        let b2 = r2 * sq + 2.0 * r1 * r1 * r2 / sq + (r * r2 * r2 + r * r1 * r3) / sq - r * r1 * r1 * r2 * r2 / (q * sq);

        let frame: &ParallelFrame = &fj.frame;
        let bv = &frame.b;
        let dv = &fj.velocity;
        let av = &fj.acceleration;
        let comb = |f: &[f64; 3], basis: &[Vec4; 4]| basis[1] * f[0] + basis[2] * f[1] + basis[3] * f[2];

        let f0 = comb(&sh.f, bv);
        let f_u = comb(&sh.f, dv);
        let f_uu = comb(&sh.f, av);
        let f_v = comb(&sh.fv, bv);
        let f_w = comb(&sh.fw, bv);

        let point = fj.point + bv[0] * a + f0 * b;
        let cu = bv[0] + bv[0] * a1 + dv[0] * a + f0 * b1 + f_u * b;
        let cv = f_v * b;
        let cw = f_w * b;
        let cuu = dv[0] + bv[0] * a2 + dv[0] * (2.0 * a1) + av[0] * a + f0 * b2 + f_u * (2.0 * b1) + f_uu * b;
        let cuv = f_v * b1 + comb(&sh.fv, dv) * b;
        let cuw = f_w * b1 + comb(&sh.fw, dv) * b;
        let cvv = comb(&sh.fvv, bv) * b;
        let cvw = comb(&sh.fvw, bv) * b;
        let cww = comb(&sh.fww, bv) * b;
        Ok(SurfaceJet {
            point,
            first: [cu, cv, cw],
            second: [[cuu, cuv, cuw], [cuv, cvv, cvw], [cuw, cvw, cww]],
        })
    }

    /// Numerical curvatures of this surface through the generic engine.
    pub fn numeric(&self, u: f64, v: f64, w: f64, mode: diffgeo::DerivativeMode) -> Result<diffgeo::NumericSample> {
        diffgeo::analyze(self, u, v, w, mode)
    }
}

impl Hypersurface for CanalSurface {
    fn point(&self, u: f64, v: f64, w: f64) -> Result<Point4> {
        self.evaluate(u, v, w)
    }

    fn analytic_jet(&self, u: f64, v: f64, w: f64) -> Result<SurfaceJet> {
        self.exact_jet(u, v, w)
    }
}
