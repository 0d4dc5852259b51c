//! Radius families of flat (`K ≡ 0`) and minimal (`H ≡ 0`) canal
//! hypersurfaces over a straight spine, and a driver that measures how far
//! a profile is from either property.
//!
//! The quadrature family solves `2s + 2r'² + 3 r r'' = 0`, whose first
//! integral is `r (s + r'²)^{3/4} = c3`. Its branch is fixed by
//!
//! ```text
//! F(r) = ∫₀^r dρ / √((c3/ρ)^{4/3} − s) = sign · u + c4
//! ```
//!
//! and the profile itself is an RK4 table of the ODE.

use std::sync::Arc;

use crate::canal::{CanalSurface, ParamBox, TypeTables};
use crate::closedform;
use crate::error::{Error, Result};
use crate::minkowski::Vec4;
use crate::radius::{MinimalOdeTable, RadiusKind, RadiusProfile};
use crate::spine::SpineCurve;

/// Gap kept between a root profile's interval and the points where `r = 0`.
pub const ROOT_MARGIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadiusFamily {
    /// `c1 u + c2`.
    Linear { c1: f64, c2: f64 },
    /// `sign √(s (e^{2 c1} − (u + c2)²))`.
    FlatRoot { c1: f64, c2: f64, sign: f64 },
    /// `sign √(−s (−e^{2 c1} + (u + c2)²))`.
    MinimalRoot { c1: f64, c2: f64, sign: f64 },
    /// `F(r) = sign · u + c4` with first integral `c3`.
    MinimalQuadrature { c3: f64, c4: f64, sign: f64 },
}

/// Knobs for building the quadrature family's table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimalOdeOptions {
    /// RK4 step in `u`.
    pub step: f64,
    /// The table starts where `r = r_start_fraction · c3`.
    pub r_start_fraction: f64,
    /// Upper radius for `s = −1`, as a multiple of `c3`.
    pub r_end_fraction: f64,
    /// Integration stops before `(c3/r)^{4/3} − s` drops below this.
    pub turning_margin: f64,
}

impl Default for MinimalOdeOptions {
    fn default() -> Self {
        MinimalOdeOptions { step: 1e-4, r_start_fraction: 0.25, r_end_fraction: 3.0, turning_margin: 1e-6 }
    }
}

fn check_sign(sign: f64) -> Result<()> {
    if sign == 1.0 {
        Ok(())
    } else if sign == -1.0 {
        Err(Error::Invalid("the negative root branch has r < 0 everywhere".into()))
    } else {
        Err(Error::Invalid(format!("branch sign must be ±1, got {sign}")))
    }
}

fn parity(m: u8) -> Result<f64> {
    Ok(TypeTables::for_type(m)?.s)
}

/// Root profile on the component of its domain where `r > 0`. For `s = −1`
/// the domain has two components and the one with `u + c2 > 0` is used.
fn root_profile(c1: f64, c2: f64, sign: f64, s: f64, tag: &str) -> Result<RadiusProfile> {
    check_sign(sign)?;
    if !(c1.is_finite() && c2.is_finite()) {
        return Err(Error::Invalid(format!("root family constants ({c1}, {c2})")));
    }
    let half = c1.exp();
    let domain = if s > 0.0 {
        (-half - c2 + ROOT_MARGIN, half - c2 - ROOT_MARGIN)
    } else {
        (half - c2 + ROOT_MARGIN, f64::INFINITY)
    };
    RadiusProfile::new(RadiusKind::Root { s, c1, c2, sign }, domain, tag)
}

/// Radius of the flat families for type `m`.
pub fn flat_radius(family: RadiusFamily, m: u8) -> Result<RadiusProfile> {
    let s = parity(m)?;
    match family {
        RadiusFamily::Linear { c1, c2 } => {
            if !(c1.is_finite() && c2.is_finite()) {
                return Err(Error::Invalid(format!("linear radius ({c1}, {c2})")));
            }
            if s < 0.0 && c1 * c1 <= 1.0 {
                return Err(Error::Validity { u: f64::NAN, value: s + c1 * c1 });
            }
            let domain = if c1 > 0.0 {
                (-c2 / c1, f64::INFINITY)
            } else if c1 < 0.0 {
                (f64::NEG_INFINITY, -c2 / c1)
            } else if c2 > 0.0 {
                (f64::NEG_INFINITY, f64::INFINITY)
            } else {
                return Err(Error::NonPositiveRadius { u: f64::NAN, r: c2 });
            };
            RadiusProfile::new(RadiusKind::Polynomial(vec![c2, c1]), domain, "linear")
        }
        RadiusFamily::FlatRoot { c1, c2, sign } => root_profile(c1, c2, sign, s, "flat-root"),
        other => Err(Error::Invalid(format!("{other:?} is not a flat family"))),
    }
}

/// Radius of the minimal families for type `m`.
pub fn minimal_radius(family: RadiusFamily, m: u8) -> Result<RadiusProfile> {
    minimal_radius_with(family, m, &MinimalOdeOptions::default())
}

pub fn minimal_radius_with(family: RadiusFamily, m: u8, options: &MinimalOdeOptions) -> Result<RadiusProfile> {
    let s = parity(m)?;
    match family {
        RadiusFamily::MinimalRoot { c1, c2, sign } => root_profile(c1, c2, sign, s, "minimal-root"),
        RadiusFamily::MinimalQuadrature { c3, c4, sign } => {
            let table = quadrature_table(s, c3, c4, sign, options)?;
            let lo = table.knots()[0].0;
            let hi = table.knots()[table.knots().len() - 1].0;
            RadiusProfile::new(RadiusKind::MinimalOde(Arc::new(table)), (lo, hi), "minimal-quadrature")
        }
        other => Err(Error::Invalid(format!("{other:?} is not a minimal family"))),
    }
}

fn quadrature_radicand(s: f64, c3: f64, r: f64) -> f64 {
    (c3 / r).powf(4.0 / 3.0) - s
}

/// Cap on the substituted variable; `cosh^{-5/2}` and `sinh^{-5/2}` are
/// below `1e-60` past it.
const THETA_CAP: f64 = 60.0;

/// `∫_a^b dρ / √((c3/ρ)^{4/3} − s)` for `0 ≤ a, b`.
///
/// Evaluated after the substitution `(c3/ρ)^{2/3} = cosh θ` (`s = +1`) or
/// `sinh θ` (`s = −1`), which turns the integrand into
/// `(3/2) c3 cosh^{−5/2} θ` (resp. `sinh^{−5/2} θ`) and removes the
/// inverse-square-root singularity at the turning point.
pub fn quadrature_integral(s: f64, c3: f64, a: f64, b: f64) -> Result<f64> {
    for x in [a, b] {
        if x < 0.0 || (x > 0.0 && !(quadrature_radicand(s, c3, x) >= 0.0)) {
            return Err(Error::Validity { u: x, value: quadrature_radicand(s, c3, x) });
        }
    }
    let theta = |rho: f64| -> f64 {
        if rho == 0.0 {
            return THETA_CAP;
        }
        let y = (c3 / rho).powf(2.0 / 3.0);
        let t = if s > 0.0 { y.max(1.0).acosh() } else { y.asinh() };
        t.min(THETA_CAP)
    };
    let g = |t: f64| -> f64 {
        let base = if s > 0.0 { t.cosh() } else { t.sinh() };
        1.5 * c3 * base.powf(-2.5)
    };
    // ρ increasing is θ decreasing
    adaptive_simpson(&g, theta(b), theta(a), 1e-12)
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    /// Interval with its end and midpoint samples and its Simpson estimate.
    #[derive(Clone, Copy)]
    struct Panel {
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
    }

    fn recurse(f: &dyn Fn(f64) -> f64, p: Panel, tol: f64, depth: u32) -> Result<f64> {
        let m = 0.5 * (p.a + p.b);
        let (flm, frm) = (f(0.5 * (p.a + m)), f(0.5 * (m + p.b)));
        let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
        let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
        let delta = left + right - p.whole;
        if depth == 0 {
            return Err(Error::StepUnderflow(format!("quadrature did not converge on [{}, {}]", p.a, p.b)));
        }
        // rounding floor: below it the halved tolerance can never be met
        let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
        if delta.abs() <= (15.0 * tol).max(floor) {
            return Ok(left + right + delta / 15.0);
        }
        let lp = Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left };
        let rp = Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right };
        Ok(recurse(f, lp, tol / 2.0, depth - 1)? + recurse(f, rp, tol / 2.0, depth - 1)?)
    }
    if a == b {
        return Ok(0.0);
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let v = recurse(f, Panel { a, b, fa, fm, fb, whole }, tol, 50)?;
    if !v.is_finite() {
        return Err(Error::NonFinite("quadrature".into()));
    }
    Ok(v)
}

fn quadrature_table(s: f64, c3: f64, c4: f64, sign: f64, options: &MinimalOdeOptions) -> Result<MinimalOdeTable> {
    if !(c3.is_finite() && c3 > 0.0) {
        return Err(Error::Invalid(format!("first integral c3 = {c3} must be positive")));
    }
    if !(sign == 1.0 || sign == -1.0) {
        return Err(Error::Invalid(format!("branch sign must be ±1, got {sign}")));
    }
    if !(c4.is_finite() && options.step > 0.0 && options.step.is_finite()) {
        return Err(Error::Invalid("quadrature constant or step".into()));
    }
    let r_start = options.r_start_fraction * c3;
    let r_end = if s > 0.0 { c3 } else { options.r_end_fraction * c3 };
    if !(r_start > 0.0 && r_start < r_end && quadrature_radicand(s, c3, r_start) > options.turning_margin) {
        return Err(Error::Invalid(format!("start radius {r_start} leaves no room before r = {r_end}")));
    }
    let u_start = sign * (quadrature_integral(s, c3, 0.0, r_start)? - c4);
    let dr_start = sign * quadrature_radicand(s, c3, r_start).sqrt();

    // integrate in the direction where r grows
    let h = sign * options.step;
    let rate = |r: f64, r1: f64| (r1, MinimalOdeTable::second(s, r, r1));
    let mut knots = vec![(u_start, r_start, dr_start)];
    let (mut u, mut r, mut r1) = (u_start, r_start, dr_start);
    const MAX_STEPS: usize = 10_000_000;
    for _ in 0..MAX_STEPS {
        let k1 = rate(r, r1);
        let k2 = rate(r + 0.5 * h * k1.0, r1 + 0.5 * h * k1.1);
        let k3 = rate(r + 0.5 * h * k2.0, r1 + 0.5 * h * k2.1);
        let k4 = rate(r + h * k3.0, r1 + h * k3.1);
        let nr = r + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        let nr1 = r1 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if !(nr.is_finite() && nr1.is_finite()) || nr >= r_end || sign * nr1 <= 0.0 {
            break;
        }
        if quadrature_radicand(s, c3, nr) < options.turning_margin {
            break;
        }
        u += h;
        r = nr;
        r1 = nr1;
        knots.push((u, r, r1));
    }
    if knots.len() < 2 {
        return Err(Error::StepUnderflow("quadrature family table has a single knot".into()));
    }
    if sign < 0.0 {
        knots.reverse();
    }
    Ok(MinimalOdeTable { s, knots })
}

/// Diagnostics of a quadrature-family table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureCheck {
    /// Largest `|u_quadrature − u_ode|` over the sampled knots.
    pub u_mismatch: f64,
    /// Largest `|r (s + r'²)^{3/4} − c3|` over all knots.
    pub first_integral_drift: f64,
}

/// Recovers `u` from the quadrature at every `stride`-th knot and compares it
/// with the ODE's `u`.
pub fn check_quadrature(profile: &RadiusProfile, c3: f64, sign: f64, stride: usize) -> Result<QuadratureCheck> {
    let RadiusKind::MinimalOde(table) = profile.kind() else {
        return Err(Error::Invalid("profile is not an ODE table".into()));
    };
    let s = table.s;
    let knots = table.knots();
    let start = if sign > 0.0 { knots[0] } else { knots[knots.len() - 1] };
    let mut u_mismatch = 0.0_f64;
    for knot in knots.iter().step_by(stride.max(1)) {
        let u_quad = start.0 + sign * quadrature_integral(s, c3, start.1, knot.1)?;
        u_mismatch = u_mismatch.max((u_quad - knot.0).abs());
    }
    let first_integral_drift = knots
        .iter()
        .map(|&(_, r, r1)| (r * (s + r1 * r1).powf(0.75) - c3).abs())
        .fold(0.0, f64::max);
    Ok(QuadratureCheck { u_mismatch, first_integral_drift })
}

/// Which defining ODE a profile satisfies, measured on a grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeResiduals {
    /// `max |r'' (s + r'² + r r'')|`.
    pub flat: f64,
    /// `max |2s + 2r'² + 3 r r''|`.
    pub minimal: f64,
}

pub fn ode_residuals(profile: &RadiusProfile, m: u8, us: &[f64]) -> Result<OdeResiduals> {
    let s = parity(m)?;
    let mut out = OdeResiduals { flat: 0.0, minimal: 0.0 };
    for &u in us {
        let j = profile.jet(u)?;
        out.flat = out.flat.max((j.r2 * (s + j.r1 * j.r1 + j.r * j.r2)).abs());
        out.minimal = out.minimal.max((2.0 * s + 2.0 * j.r1 * j.r1 + 3.0 * j.r * j.r2).abs());
    }
    Ok(out)
}

/// Which invariant a family check measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Gaussian,
    Mean,
}

/// Result of sweeping a profile over a grid on a straight spine.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyReport {
    /// Largest `|K|` or `|H|` over the points that evaluated.
    pub max_abs: f64,
    pub evaluated: usize,
    /// Points where the closed form failed, with the error.
    pub failures: Vec<((f64, f64, f64), Error)>,
}

impl FamilyReport {
    pub fn all_evaluated(&self) -> bool {
        self.failures.is_empty()
    }

    /// `max_abs < tol` with every grid point evaluated.
    pub fn below(&self, tol: f64) -> bool {
        self.all_evaluated() && self.evaluated > 0 && self.max_abs < tol
    }
}

/// The type-`m` canal hypersurface over the straight spine through the
/// origin along `B1`, for the `u` range `u_range`.
pub fn straight_surface(profile: &RadiusProfile, m: u8, u_range: (f64, f64)) -> Result<CanalSurface> {
    let t = TypeTables::for_type(m)?;
    let (lo, hi) = u_range;
    let pad = 1.0 + (hi - lo).abs();
    let spine = SpineCurve::line(t.kind, Vec4::ZERO, t.kind.standard_frame(), lo, (lo - pad, hi + pad))?;
    CanalSurface::new(t, spine, profile.clone(), ParamBox::with_default_vw(t.shape, u_range))
}

/// Sweeps `|K|` (flat families) or `|H|` (minimal families) over `grid`.
pub fn verify_family(profile: &RadiusProfile, m: u8, grid: &[(f64, f64, f64)], target: Target) -> Result<FamilyReport> {
    if grid.is_empty() {
        return Err(Error::Invalid("empty family grid".into()));
    }
    let lo = grid.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = grid.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let surface = straight_surface(profile, m, (lo, hi))?;
    let mut report = FamilyReport { max_abs: 0.0, evaluated: 0, failures: Vec::new() };
    for &(u, v, w) in grid {
        match closedform::invariants(&surface, u, v, w) {
            Ok(sample) => {
                let x = match target {
                    Target::Gaussian => sample.gaussian,
                    Target::Mean => sample.mean,
                };
                report.max_abs = report.max_abs.max(x.abs());
                report.evaluated += 1;
            }
            Err(e) => report.failures.push(((u, v, w), e)),
        }
    }
    Ok(report)
}

/// `n_u × n_v × n_w` grid over the given ranges, endpoints included.
pub fn box_grid(u: (f64, f64), v: (f64, f64), w: (f64, f64), n: [usize; 3]) -> Vec<(f64, f64, f64)> {
    let axis = |(lo, hi): (f64, f64), n: usize| -> Vec<f64> {
        if n <= 1 {
            vec![lo]
        } else {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        }
    };
    let (us, vs, ws) = (axis(u, n[0]), axis(v, n[1]), axis(w, n[2]));
    let mut out = Vec::with_capacity(us.len() * vs.len() * ws.len());
    for &a in &us {
        for &b in &vs {
            for &c in &ws {
                out.push((a, b, c));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_family_is_flat() {
        let p = flat_radius(RadiusFamily::Linear { c1: 2.0, c2: 0.0 }, 1).unwrap();
        let grid = box_grid((0.5, 1.5), (-1.0, 1.0), (-1.0, 1.0), [5, 5, 5]);
        let rep = verify_family(&p, 1, &grid, Target::Gaussian).unwrap();
        assert!(rep.below(1e-12), "{rep:?}");
        let p = flat_radius(RadiusFamily::Linear { c1: 0.0, c2: 1.0 }, 2).unwrap();
        assert!(p.is_constant());
    }

    #[test]
    fn linear_family_needs_steep_slope_for_negative_parity() {
        assert!(flat_radius(RadiusFamily::Linear { c1: 0.5, c2: 1.0 }, 1).is_err());
        assert!(flat_radius(RadiusFamily::Linear { c1: 0.0, c2: -1.0 }, 2).is_err());
    }

    #[test]
    fn negative_control_is_not_flat() {
        let p = RadiusProfile::polynomial(vec![0.0, 0.0, 1.0]);
        let grid = box_grid((0.5, 1.5), (-1.0, 1.0), (-1.0, 1.0), [4, 4, 4]);
        let rep = verify_family(&p, 2, &grid, Target::Gaussian).unwrap();
        assert!(rep.all_evaluated() && rep.max_abs > 1e-2, "{rep:?}");
    }

    #[test]
    fn root_family_satisfies_the_flat_ode_only() {
        let p = flat_radius(RadiusFamily::FlatRoot { c1: 0.0, c2: 0.0, sign: 1.0 }, 1).unwrap();
        assert!((p.jet(2.0).unwrap().r - 3f64.sqrt()).abs() < 1e-15);
        let res = ode_residuals(&p, 1, &[1.2, 1.5, 2.0, 3.0]).unwrap();
        assert!(res.flat < 1e-12, "{res:?}");
        assert!(res.minimal > 0.1, "{res:?}");
        assert!(flat_radius(RadiusFamily::FlatRoot { c1: 0.0, c2: 0.0, sign: -1.0 }, 1).is_err());
    }

    #[test]
    fn quadrature_family_conserves_its_first_integral() {
        for (m, sign) in [(2u8, 1.0), (7, -1.0), (1, 1.0)] {
            let p = minimal_radius(RadiusFamily::MinimalQuadrature { c3: 1.0, c4: 0.0, sign }, m).unwrap();
            let check = check_quadrature(&p, 1.0, sign, 97).unwrap();
            assert!(check.first_integral_drift < 1e-8, "m={m} {check:?}");
            assert!(check.u_mismatch < 1e-6, "m={m} {check:?}");
            let (lo, hi) = p.domain();
            let us: Vec<f64> = (0..50).map(|i| lo + (hi - lo) * i as f64 / 49.0).collect();
            assert!(ode_residuals(&p, m, &us).unwrap().minimal < 1e-12);
        }
    }

    #[test]
    fn quadrature_family_is_minimal() {
        let p = minimal_radius(RadiusFamily::MinimalQuadrature { c3: 1.0, c4: 0.0, sign: 1.0 }, 7).unwrap();
        let (lo, hi) = p.domain();
        let grid = box_grid((lo, hi), (0.0, 6.0), (-1.3, 1.3), [6, 4, 4]);
        let rep = verify_family(&p, 7, &grid, Target::Mean).unwrap();
        assert!(rep.below(1e-7), "{rep:?}");
    }

    #[test]
    fn constant_radius_is_not_minimal() {
        let grid = box_grid((0.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), [3, 3, 3]);
        let rep = verify_family(&RadiusProfile::constant(1.0), 2, &grid, Target::Mean).unwrap();
        assert!((rep.max_abs - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_handles_smooth_and_cusped_integrands() {
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-11, "{v}");
        let v = adaptive_simpson(&|x: f64| x.powf(2.0 / 3.0), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 0.6).abs() < 1e-10, "{v}");
    }

    #[test]
    fn substituted_quadrature_matches_direct_integration() {
        // away from both singular ends the plain integrand is smooth
        for s in [1.0, -1.0] {
            let direct = adaptive_simpson(&|r: f64| 1.0 / quadrature_radicand(s, 2.0, r).sqrt(), 0.5, 1.5, 1e-12).unwrap();
            let sub = quadrature_integral(s, 2.0, 0.5, 1.5).unwrap();
            assert!((direct - sub).abs() < 1e-10, "s={s} {direct} {sub}");
        }
    }
}
