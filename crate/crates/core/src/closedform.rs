//! Closed-form Gaussian, mean and principal curvatures of the eight canal
//! types, the linear relation `3H − r²K − 2η/r = 0`, Weingarten residuals
//! and the comparison against the numerical engine.
//!
//! With `q = s + r'²`, `P = Σ ε_i k_i f_i`, `A = Σ μ_i k_i f_i` and
//! `D = r(r'' + √q A) + q`:
//!
//! ```text
//! K = [r''(q + r r'') + P² r q + A √q (q + 2 r r'')] / (η r² D²)
//! H = [(q + r r'')(2q + 3 r r'') + 3 P² r² q + A r √q (5q + 6 r r'')] / (3 η r D²)
//! c1 = c2 = (−1)^{m+1} η / r,   c3 = (−1)^{m+1} r² K
//! ```
//!
//! The [`c12`] submodule writes out the expanded `m ∈ {1, 2}` expressions
//! term by term, independently of the general ones.

use crate::canal::CanalSurface;
use crate::diffgeo::{self, DerivativeMode};
use crate::error::{Error, Result};
use crate::minkowski::inner;

/// `|D|` below this multiple of its term scale is a singular point.
pub const SINGULAR_TOL: f64 = 1e-7;

/// Default step for the Weingarten partials.
pub const WEINGARTEN_STEP: f64 = 1e-5;

/// Closed-form invariants at one point, with the intermediate sums.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantSample {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub gaussian: f64,
    pub mean: f64,
    /// `(c1, c2, c3)`; `c1 == c2` by construction.
    pub principal: [f64; 3],
    /// `Σ μ_i k_i f_i`.
    pub mu_sum: f64,
    /// `Σ_i Σ_j ε_i ε_j k_i k_j f_i f_j`.
    pub eps_double_sum: f64,
    /// `r(r'' + √q Σ μ_i k_i f_i) + q`.
    pub denominator: f64,
}

/// Evaluates every closed-form invariant at `(u, v, w)`.
pub fn invariants(surface: &CanalSurface, u: f64, v: f64, w: f64) -> Result<InvariantSample> {
    let t = surface.tables();
    let j = surface.valid_jet(u)?;
    let k = surface.spine().curvatures().eval(u);
    let f = t.shape.values(v, w);
    let (r, r2) = (j.r, j.r2);
    let q = t.s + j.r1 * j.r1;
    let sq = q.sqrt();

    let mut eps_double_sum = 0.0;
    for i in 0..3 {
        for l in 0..3 {
            eps_double_sum += t.eps[i] * t.eps[l] * k[i] * k[l] * f[i] * f[l];
        }
    }
    let mu_sum: f64 = (0..3).map(|i| t.mu[i] * k[i] * f[i]).sum();

    let denominator = r * (r2 + sq * mu_sum) + q;
    let scale = (r * r2).abs() + (r * sq * mu_sum).abs() + q;
    if !(denominator.abs() > SINGULAR_TOL * scale) {
        return Err(Error::Singular(denominator));
    }
    let d2 = denominator * denominator;
    let rr2 = r * r2;

    let gaussian = (r2 * (q + rr2) + eps_double_sum * r * q + mu_sum * sq * (q + 2.0 * rr2)) / (t.eta * r * r * d2);
    let mean = ((q + rr2) * (2.0 * q + 3.0 * rr2)
        + 3.0 * eps_double_sum * r * r * q
        + mu_sum * r * sq * (5.0 * q + 6.0 * rr2))
        / (3.0 * t.eta * r * d2);
    let sign = t.sphere_sign();
    let c12 = sign * t.eta / r;
    let principal = [c12, c12, sign * r * r * gaussian];

    for x in [gaussian, mean] {
        if !x.is_finite() {
            return Err(Error::NonFinite(format!("closed-form curvature at ({u}, {v}, {w})")));
        }
    }
    Ok(InvariantSample { u, v, w, gaussian, mean, principal, mu_sum, eps_double_sum, denominator })
}

pub fn gaussian_closed(surface: &CanalSurface, u: f64, v: f64, w: f64) -> Result<f64> {
    Ok(invariants(surface, u, v, w)?.gaussian)
}

pub fn mean_closed(surface: &CanalSurface, u: f64, v: f64, w: f64) -> Result<f64> {
    Ok(invariants(surface, u, v, w)?.mean)
}

pub fn principal_closed(surface: &CanalSurface, u: f64, v: f64, w: f64) -> Result<[f64; 3]> {
    Ok(invariants(surface, u, v, w)?.principal)
}

/// `3H − r²K − 2η/r`.
pub fn identity_residual(surface: &CanalSurface, u: f64, v: f64, w: f64) -> Result<f64> {
    let s = invariants(surface, u, v, w)?;
    let r = surface.valid_jet(u)?.r;
    Ok(3.0 * s.mean - r * r * s.gaussian - 2.0 * surface.tables().eta / r)
}

/// The expanded `m ∈ {1, 2}` expressions in terms of `σ = (−1)^m`, written
/// without reusing the general formulas.
pub mod c12 {
    use crate::canal::CanalSurface;
    use crate::error::{Error, Result};

    /// The inputs shared by every expanded expression.
    #[derive(Clone, Copy, Debug)]
    pub struct Inputs {
        pub sigma: f64,
        pub r: f64,
        pub r1: f64,
        pub r2: f64,
        pub k: [f64; 3],
        pub v: f64,
        pub w: f64,
    }

    impl Inputs {
        pub fn at(surface: &CanalSurface, u: f64, v: f64, w: f64) -> Result<Self> {
            let m = surface.m();
            if m > 2 {
                return Err(Error::Invalid(format!("expanded forms exist for types 1 and 2, not {m}")));
            }
            let j = surface.valid_jet(u)?;
            Ok(Inputs {
                sigma: if m == 1 { -1.0 } else { 1.0 },
                r: j.r,
                r1: j.r1,
                r2: j.r2,
                k: surface.spine().curvatures().eval(u),
                v,
                w,
            })
        }

        fn q(&self) -> f64 {
            self.sigma + self.r1 * self.r1
        }

        /// `𝒜 = k1 cosh v cosh w − k2 sinh w − k3 sinh v cosh w`.
        pub fn script_a(&self) -> f64 {
            let [k1, k2, k3] = self.k;
            k1 * self.v.cosh() * self.w.cosh() - k2 * self.w.sinh() - k3 * self.v.sinh() * self.w.cosh()
        }

        /// `r(σ√q 𝒜 + r'') + q`.
        pub fn denominator(&self) -> f64 {
            self.r * (self.sigma * self.q().sqrt() * self.script_a() + self.r2) + self.q()
        }
    }

    pub fn gaussian(x: &Inputs) -> f64 {
        let (sg, r, r2) = (x.sigma, x.r, x.r2);
        let q = x.q();
        let sq = q.sqrt();
        let a = x.script_a();
        let num = q * (r2 + sg * a * (sg * r * a + sq)) + r * r2 * (sg * 2.0 * sq * a + r2);
        let d = x.denominator();
        -num / (r * r * d * d)
    }

    pub fn mean(x: &Inputs) -> f64 {
        let (sg, r, r1, r2) = (x.sigma, x.r, x.r1, x.r2);
        let [k1, k2, k3] = x.k;
        let (chv, shv, chw, shw) = (x.v.cosh(), x.v.sinh(), x.w.cosh(), x.w.sinh());
        let q = x.q();
        let sq = q.sqrt();
        let p = 2.0 * r * r2 + r1 * r1 + sg;
        let inner = r * q * (-sg * ((k1 * k1 * chv * chv + k3 * k3 * shv * shv) * chw * chw + k2 * k2 * shw * shw))
            + sg * (2.0 * r * q * (k2 * shw + k3 * shv * chw) - sg * sq * p) * k1 * chv * chw
            + (sq * p - sg * 2.0 * r * q * k2 * shw) * k3 * shv * chw
            + sq * p * k2 * shw
            - sg * r2 * (r * r2 + r1 * r1 + sg);
        let d = x.denominator();
        let num = r * inner - sg * 2.0 * d * d;
        num / (sg * 3.0 * r * d * d)
    }

    /// `(c1, c2, c3)`.
    pub fn principal(x: &Inputs) -> [f64; 3] {
        let (sg, r, r1, r2) = (x.sigma, x.r, x.r1, x.r2);
        let [k1, k2, k3] = x.k;
        let (chv, shv, chw, shw) = (x.v.cosh(), x.v.sinh(), x.w.cosh(), x.w.sinh());
        let q = x.q();
        let sq = q.sqrt();
        let p = 2.0 * r * r2 + r1 * r1 + sg;
        let num = -sg * (2.0 * r * q * (k2 * shw + k3 * shv * chw) - sg * sq * p) * k1 * chv * chw
            + sg * r * q * k1 * k1 * chv * chv * chw * chw
            - (sq * p - sg * 2.0 * r * q * k2 * shw) * k3 * shv * chw
            + sg * r * q * (k2 * k2 * shw * shw + k3 * k3 * shv * shv * chw * chw)
            - sq * p * k2 * shw
            + sg * r2 * (r * r2 + r1 * r1 + sg);
        let d = x.denominator();
        [sg / r, sg / r, num / (d * d)]
    }

    /// `H_u K_v − H_v K_u` in expanded form.
    pub fn r_uv(x: &Inputs) -> f64 {
        let [k1, _, k3] = x.k;
        let q = x.q();
        let d = x.denominator();
        x.sigma * 2.0 * x.r1 * q.powf(2.5) * (k3 * x.v.cosh() - k1 * x.v.sinh()) * x.w.cosh() / (3.0 * x.r.powi(4) * d * d * d)
    }

    /// `H_u K_w − H_w K_u` in expanded form.
    pub fn r_uw(x: &Inputs) -> f64 {
        let [k1, k2, k3] = x.k;
        let q = x.q();
        let d = x.denominator();
        let trig = (k3 * x.v.sinh() - k1 * x.v.cosh()) * x.w.sinh() + k2 * x.w.cosh();
        x.sigma * 2.0 * x.r1 * q.powf(2.5) * trig / (3.0 * x.r.powi(4) * d * d * d)
    }
}

/// `(R_uv, R_uw, R_vw)` with `R_ab = H_a K_b − H_b K_a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeingartenResiduals {
    pub uv: f64,
    pub uw: f64,
    pub vw: f64,
    /// `(H_u, H_v, H_w)`.
    pub grad_h: [f64; 3],
    /// `(K_u, K_v, K_w)`.
    pub grad_k: [f64; 3],
}

/// Classification of one residual.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Indeterminate,
}

/// Ratio between the "fails" and "holds" thresholds.
const VERDICT_GAP: f64 = 1e3;

impl WeingartenResiduals {
    /// `1e−8 · (1 + |∇H| |∇K|)`.
    pub fn threshold(&self) -> f64 {
        let n = |g: &[f64; 3]| (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
        1e-8 * (1.0 + n(&self.grad_h) * n(&self.grad_k))
    }

    pub fn verdict(&self, residual: f64) -> Verdict {
        let t = self.threshold();
        if residual.abs() < t {
            Verdict::Holds
        } else if residual.abs() > VERDICT_GAP * t {
            Verdict::Fails
        } else {
            Verdict::Indeterminate
        }
    }

    pub fn report(&self) -> [Verdict; 3] {
        [self.verdict(self.uv), self.verdict(self.uw), self.verdict(self.vw)]
    }
}

/// Central-difference partials of the closed-form `H` and `K`, combined
/// into the three Weingarten residuals.
pub fn weingarten_residuals(surface: &CanalSurface, u: f64, v: f64, w: f64, step: f64) -> Result<WeingartenResiduals> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Invalid(format!("Weingarten step {step}")));
    }
    let mut grad_h = [0.0; 3];
    let mut grad_k = [0.0; 3];
    for axis in 0..3 {
        let shifted = |d: f64| {
            let mut p = [u, v, w];
            p[axis] += d;
            invariants(surface, p[0], p[1], p[2])
        };
        let (plus, minus) = (shifted(step)?, shifted(-step)?);
        grad_h[axis] = (plus.mean - minus.mean) / (2.0 * step);
        grad_k[axis] = (plus.gaussian - minus.gaussian) / (2.0 * step);
    }
    let cross = |a: usize, b: usize| grad_h[a] * grad_k[b] - grad_h[b] * grad_k[a];
    Ok(WeingartenResiduals { uv: cross(0, 1), uw: cross(0, 2), vw: cross(1, 2), grad_h, grad_k })
}

/// Closed form against the numerical engine at one point.
///
/// The numerical normal keeps its raw orientation; `orientation` is the sign
/// that maps it onto the closed-form Gauss map, and the `numeric_*` fields
/// are already multiplied by it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleComparison {
    pub closed: InvariantSample,
    pub numeric_gaussian: f64,
    pub numeric_mean: f64,
    /// Sorted descending.
    pub numeric_principal: [f64; 3],
    pub orientation: f64,
    /// `⟨N, N⟩` measured on the numerical normal.
    pub epsilon: f64,
}

impl OracleComparison {
    pub fn gaussian_error(&self) -> f64 {
        (self.closed.gaussian - self.numeric_gaussian).abs() / (1.0 + self.closed.gaussian.abs())
    }

    pub fn mean_error(&self) -> f64 {
        (self.closed.mean - self.numeric_mean).abs() / (1.0 + self.closed.mean.abs())
    }

    /// Largest gap between the sorted principal multisets.
    pub fn principal_distance(&self) -> f64 {
        let mut c = self.closed.principal;
        c.sort_by(|a, b| b.total_cmp(a));
        (0..3).map(|i| (c[i] - self.numeric_principal[i]).abs()).fold(0.0, f64::max)
    }
}

pub fn compare_with_oracle(surface: &CanalSurface, u: f64, v: f64, w: f64, mode: DerivativeMode) -> Result<OracleComparison> {
    let closed = invariants(surface, u, v, w)?;
    let num = diffgeo::analyze(surface, u, v, w, mode)?;
    let n_closed = surface.gauss_map_closed(u, v, w)?;
    let eps = num.forms.epsilon;
    let orientation = (inner(&num.forms.normal, &n_closed) * eps).signum();
    let c = num.curvatures;
    let mut principal = c.principal.map(|x| orientation * x);
    principal.sort_by(|a, b| b.total_cmp(a));
    Ok(OracleComparison {
        closed,
        numeric_gaussian: orientation * c.gaussian,
        numeric_mean: orientation * c.mean,
        numeric_principal: principal,
        orientation,
        epsilon: eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canal::{ParamBox, TypeTables};
    use crate::minkowski::Vec4;
    use crate::radius::RadiusProfile;
    use crate::spine::SpineCurve;

    fn tube(m: u8) -> CanalSurface {
        let t = TypeTables::for_type(m).unwrap();
        let spine = SpineCurve::line(t.kind, Vec4::ZERO, t.kind.standard_frame(), 0.0, (-2.0, 2.0)).unwrap();
        CanalSurface::new(t, spine, RadiusProfile::constant(1.0), ParamBox::with_default_vw(t.shape, (-1.0, 1.0))).unwrap()
    }

    fn constant_k(m: u8, k: [f64; 3]) -> CanalSurface {
        let t = TypeTables::for_type(m).unwrap();
        let spine = SpineCurve::constant_k(t.kind, k, Vec4::ZERO, t.kind.standard_frame(), 0.0, (0.0, 2.0)).unwrap();
        let radius = if t.s > 0.0 { RadiusProfile::linear(1.5, 0.2) } else { RadiusProfile::linear(0.2, 1.5) };
        CanalSurface::new(t, spine, radius, ParamBox::with_default_vw(t.shape, (0.5, 1.0))).unwrap()
    }

    #[test]
    fn unit_tubes() {
        let s = invariants(&tube(2), 0.3, 0.5, -0.4).unwrap();
        assert_eq!(s.gaussian, 0.0);
        assert!((s.mean + 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.principal, [1.0, 1.0, 0.0]);
        let s = invariants(&tube(7), 0.3, 1.0, 0.2).unwrap();
        assert!((s.mean - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(identity_residual(&tube(7), 0.0, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn identity_holds_for_every_type() {
        for m in 1..=8 {
            let c = constant_k(m, [0.3, 0.2, 0.1]);
            for (u, v, w) in [(0.6, 0.2, -0.1), (0.9, -0.4, 0.3)] {
                let s = invariants(&c, u, v, w).unwrap();
                let r = c.valid_jet(u).unwrap().r;
                let res = identity_residual(&c, u, v, w).unwrap();
                assert!(res.abs() < 1e-10 * (1.0 + s.mean.abs() + r * r * s.gaussian.abs()), "m={m}");
            }
        }
    }

    #[test]
    fn expanded_forms_match_general_ones() {
        for m in [1u8, 2] {
            let c = constant_k(m, [0.3, 0.2, 0.1]);
            let (u, v, w) = (0.7, 0.35, -0.25);
            let x = c12::Inputs::at(&c, u, v, w).unwrap();
            let s = invariants(&c, u, v, w).unwrap();
            assert!((c12::gaussian(&x) - s.gaussian).abs() < 1e-12 * s.gaussian.abs().max(1.0), "m={m}");
            assert!((c12::mean(&x) - s.mean).abs() < 1e-12 * s.mean.abs().max(1.0), "m={m}");
            let p = c12::principal(&x);
            for i in 0..3 {
                assert!((p[i] - s.principal[i]).abs() < 1e-12 * s.principal[i].abs().max(1.0), "m={m} i={i}");
            }
        }
        assert!(c12::Inputs::at(&constant_k(3, [0.1, 0.0, 0.0]), 0.7, 0.0, 0.0).is_err());
    }

    #[test]
    fn oracle_agrees_on_constant_k_spines() {
        for m in 1..=8 {
            let c = constant_k(m, [0.3, 0.2, 0.1]);
            let o = compare_with_oracle(&c, 0.75, 0.2, -0.3, DerivativeMode::default()).unwrap();
            assert!(o.gaussian_error() < 1e-6, "m={m} {o:?}");
            assert!(o.mean_error() < 1e-6, "m={m} {o:?}");
            assert!(o.principal_distance() < 1e-6, "m={m} {o:?}");
        }
    }

    #[test]
    fn analytic_jet_matches_finite_differences() {
        for m in 1..=8 {
            let c = constant_k(m, [0.3, 0.2, 0.1]);
            let a = diffgeo::jet(&c, 0.8, 0.1, 0.2, DerivativeMode::Analytic).unwrap();
            let f = diffgeo::jet(&c, 0.8, 0.1, 0.2, DerivativeMode::default()).unwrap();
            assert!(a.max_deviation(&f) < 1e-6, "m={m} dev={}", a.max_deviation(&f));
            let o = compare_with_oracle(&c, 0.8, 0.1, 0.2, DerivativeMode::Analytic).unwrap();
            assert!(o.gaussian_error() < 1e-9 && o.mean_error() < 1e-9, "m={m} {o:?}");
        }
    }

    #[test]
    fn weingarten_on_straight_spine() {
        let t = TypeTables::for_type(2).unwrap();
        let spine = SpineCurve::line(t.kind, Vec4::ZERO, t.kind.standard_frame(), 0.0, (0.0, 3.0)).unwrap();
        let c = CanalSurface::new(t, spine, RadiusProfile::polynomial(vec![1.0, 0.3, 0.2]), ParamBox::with_default_vw(t.shape, (0.5, 2.0)))
            .unwrap();
        let r = weingarten_residuals(&c, 1.0, 0.3, 0.4, WEINGARTEN_STEP).unwrap();
        assert!(r.uv.abs() < 1e-8 && r.uw.abs() < 1e-8 && r.vw.abs() < 1e-8, "{r:?}");
        assert_eq!(r.report(), [Verdict::Holds; 3]);
    }

    #[test]
    fn singular_points_are_reported() {
        // straight spine, r r'' + q = 0 at the point where D vanishes
        let t = TypeTables::for_type(2).unwrap();
        let spine = SpineCurve::line(t.kind, Vec4::ZERO, t.kind.standard_frame(), 0.0, (-0.9, 0.9)).unwrap();
        let radius = RadiusProfile::new(
            crate::radius::RadiusKind::Root { s: 1.0, c1: 0.0, c2: 0.0, sign: 1.0 },
            (-0.95, 0.95),
            "root",
        )
        .unwrap();
        let c = CanalSurface::new(t, spine, radius, ParamBox::with_default_vw(t.shape, (-0.5, 0.5))).unwrap();
        assert!(matches!(invariants(&c, 0.1, 0.0, 0.0), Err(Error::Singular(_))));
    }
}
