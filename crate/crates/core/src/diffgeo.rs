//! Generic numerical engine for parametrized hypersurfaces `Ψ(u, v, w)` in
//! `E⁴₁`: partial derivatives, unit normal, fundamental forms, shape
//! operator and curvatures.
//!
//! Nothing here knows about canal surfaces; it serves as the independent
//! check of every closed-form curvature.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat3};
use crate::minkowski::{inner, norm, triple_product, Point4, Vec4};

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Below this norm the triple product of the partials counts as degenerate.
pub const NORMAL_TOL: f64 = 1e-12;

/// Relative threshold on `|det g|` for the shape operator.
pub const METRIC_TOL: f64 = 1e-12;

/// Anything that maps `(u, v, w)` to a point of `E⁴₁`.
pub trait Hypersurface {
    fn point(&self, u: f64, v: f64, w: f64) -> Result<Point4>;

    /// Exact partial derivatives, when the surface can supply them.
    fn analytic_jet(&self, _u: f64, _v: f64, _w: f64) -> Result<SurfaceJet> {
        Err(Error::AnalyticUnavailable("surface provides no closed-form partials".into()))
    }
}

impl<F> Hypersurface for F
where
    F: Fn(f64, f64, f64) -> Result<Point4>,
{
    fn point(&self, u: f64, v: f64, w: f64) -> Result<Point4> {
        self(u, v, w)
    }
}

/// How partial derivatives are obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DerivativeMode {
    FiniteDifference { step: f64 },
    Analytic,
}

impl Default for DerivativeMode {
    fn default() -> Self {
        DerivativeMode::FiniteDifference { step: DEFAULT_FD_STEP }
    }
}

/// Point with first and second partials; `second[i][j]` is symmetric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceJet {
    pub point: Point4,
    pub first: [Vec4; 3],
    pub second: [[Vec4; 3]; 3],
}

impl SurfaceJet {
    pub fn max_deviation(&self, other: &SurfaceJet) -> f64 {
        let mut worst = (self.point - other.point).max_abs();
        for i in 0..3 {
            worst = worst.max((self.first[i] - other.first[i]).max_abs());
            for j in 0..3 {
                worst = worst.max((self.second[i][j] - other.second[i][j]).max_abs());
            }
        }
        worst
    }
}

/// Central differences of step `h`: three-point stencils for first and pure
/// second partials, the four corner points for mixed partials.
pub fn finite_difference_jet<S: Hypersurface + ?Sized>(surface: &S, p: [f64; 3], h: f64) -> Result<SurfaceJet> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Invalid(format!("finite-difference step {h}")));
    }
    let at = |d: [f64; 3]| surface.point(p[0] + d[0] * h, p[1] + d[1] * h, p[2] + d[2] * h);
    let unit = |i: usize, s: f64| {
        let mut d = [0.0; 3];
        d[i] = s;
        d
    };
    let center = at([0.0; 3])?;
    let mut plus = [Vec4::ZERO; 3];
    let mut minus = [Vec4::ZERO; 3];
    for i in 0..3 {
        plus[i] = at(unit(i, 1.0))?;
        minus[i] = at(unit(i, -1.0))?;
    }
    let first = std::array::from_fn(|i| (plus[i] - minus[i]) * (0.5 / h));
    let mut second = [[Vec4::ZERO; 3]; 3];
    for i in 0..3 {
        second[i][i] = (plus[i] - center * 2.0 + minus[i]) * (1.0 / (h * h));
        for j in (i + 1)..3 {
            let corner = |a: f64, b: f64| {
                let mut d = [0.0; 3];
                d[i] = a;
                d[j] = b;
                at(d)
            };
            let mixed = (corner(1.0, 1.0)? - corner(1.0, -1.0)? - corner(-1.0, 1.0)? + corner(-1.0, -1.0)?) * (0.25 / (h * h));
            second[i][j] = mixed;
            second[j][i] = mixed;
        }
    }
    Ok(SurfaceJet { point: center, first, second })
}

/// Point and partials at `(u, v, w)` in the requested mode.
pub fn jet<S: Hypersurface + ?Sized>(surface: &S, u: f64, v: f64, w: f64, mode: DerivativeMode) -> Result<SurfaceJet> {
    match mode {
        DerivativeMode::FiniteDifference { step } => finite_difference_jet(surface, [u, v, w], step),
        DerivativeMode::Analytic => surface.analytic_jet(u, v, w),
    }
}

/// `N = Ψ_u × Ψ_v × Ψ_w / ‖·‖` and `ε = ⟨N, N⟩`. The raw triple-product
/// orientation is kept.
pub fn unit_normal(jet: &SurfaceJet) -> Result<(Vec4, f64)> {
    let t = triple_product(&jet.first[0], &jet.first[1], &jet.first[2]);
    let n = norm(&t);
    if !(n > NORMAL_TOL) {
        return Err(Error::DegenerateNormal(n));
    }
    let normal = t * (1.0 / n);
    let eps = inner(&normal, &normal).signum();
    Ok((normal, eps))
}

/// First and second fundamental forms with the normal they were built from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FundamentalForms {
    pub g: Mat3,
    pub h: Mat3,
    pub epsilon: f64,
    pub normal: Vec4,
}

pub fn fundamental_forms(jet: &SurfaceJet) -> Result<FundamentalForms> {
    let (normal, epsilon) = unit_normal(jet)?;
    let g = std::array::from_fn(|i| std::array::from_fn(|j| inner(&jet.first[i], &jet.first[j])));
    let h = std::array::from_fn(|i| std::array::from_fn(|j| inner(&jet.second[i][j], &normal)));
    Ok(FundamentalForms { g, h, epsilon, normal })
}

/// `S = g⁻¹ h`.
pub fn shape_operator(forms: &FundamentalForms) -> Result<Mat3> {
    let d = linalg::det(&forms.g);
    let scale = forms.g[0][0].abs().max(forms.g[1][1].abs()).max(forms.g[2][2].abs());
    if !(d.abs() > METRIC_TOL * scale.powi(3)) {
        return Err(Error::DegenerateMetric(d));
    }
    let inv = linalg::inverse(&forms.g).ok_or(Error::DegenerateMetric(d))?;
    Ok(linalg::mul(&inv, &forms.h))
}

/// Gaussian, mean and principal curvatures (principal sorted descending).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Curvatures {
    pub gaussian: f64,
    pub mean: f64,
    pub principal: [f64; 3],
}

/// `K = ε det h / det g`, `H = ε tr S / 3`, principal curvatures as the
/// real eigenvalues of `S`.
pub fn curvatures(forms: &FundamentalForms, shape: &Mat3) -> Result<Curvatures> {
    let gaussian = forms.epsilon * linalg::det(&forms.h) / linalg::det(&forms.g);
    let mean = forms.epsilon * linalg::trace(shape) / 3.0;
    let principal = linalg::real_eigenvalues(shape)?;
    Ok(Curvatures { gaussian, mean, principal })
}

/// Everything the oracle computes at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericSample {
    pub jet: SurfaceJet,
    pub forms: FundamentalForms,
    pub shape: Mat3,
    pub curvatures: Curvatures,
}

/// Full pipeline: jet, forms, shape operator, curvatures.
pub fn analyze<S: Hypersurface + ?Sized>(surface: &S, u: f64, v: f64, w: f64, mode: DerivativeMode) -> Result<NumericSample> {
    let jet = jet(surface, u, v, w, mode)?;
    let forms = fundamental_forms(&jet)?;
    let shape = shape_operator(&forms)?;
    let curvatures = curvatures(&forms, &shape)?;
    Ok(NumericSample { jet, forms, shape, curvatures })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn affine(u: f64, v: f64, w: f64) -> Result<Point4> {
        Ok(Vec4::new(u, v, w, 0.0))
    }

    fn spacelike_plane(u: f64, v: f64, w: f64) -> Result<Point4> {
        Ok(Vec4::new(0.0, u, v, w))
    }

    #[test]
    fn affine_surface_has_no_second_partials() {
        let j = jet(&affine, 0.3, -1.0, 2.0, DerivativeMode::default()).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                assert!(j.second[i][k].max_abs() < 1e-6);
            }
        }
    }

    #[test]
    fn spacelike_hyperplane() {
        let j = jet(&spacelike_plane, 0.1, 0.2, 0.3, DerivativeMode::default()).unwrap();
        let (n, eps) = unit_normal(&j).unwrap();
        assert_eq!(eps, -1.0);
        assert!((n.0[0].abs() - 1.0).abs() < 1e-12);
        let forms = fundamental_forms(&j).unwrap();
        assert!(linalg::max_abs(&forms.h) < 1e-8);
        let s = shape_operator(&forms).unwrap();
        assert!(linalg::max_abs(&s) < 1e-8);
        let c = curvatures(&forms, &s).unwrap();
        assert!(c.gaussian.abs() < 1e-12 && c.mean.abs() < 1e-8);
        assert!(c.principal.iter().all(|p| p.abs() < 1e-8));
    }

    #[test]
    fn repeated_partials_give_degenerate_normal() {
        let f = |u: f64, v: f64, w: f64| -> Result<Point4> { Ok(Vec4::new(0.0, u + v, u + v, w)) };
        let j = jet(&f, 0.0, 0.0, 0.0, DerivativeMode::default()).unwrap();
        assert!(matches!(unit_normal(&j), Err(Error::DegenerateNormal(_))));
    }

    #[test]
    fn analytic_mode_requires_support() {
        assert!(matches!(
            jet(&affine, 0.0, 0.0, 0.0, DerivativeMode::Analytic),
            Err(Error::AnalyticUnavailable(_))
        ));
    }

    #[test]
    fn failing_stencil_propagates() {
        let f = |u: f64, v: f64, w: f64| -> Result<Point4> {
            if u > 1.0 {
                Err(Error::Validity { u, value: -1.0 })
            } else {
                Ok(Vec4::new(u, v, w, 0.0))
            }
        };
        assert!(jet(&f, 1.0, 0.0, 0.0, DerivativeMode::default()).is_err());
        assert!(jet(&f, 0.5, 0.0, 0.0, DerivativeMode::default()).is_ok());
    }

    #[test]
    fn sphere_times_timelike_line() {
        // S²(2) in the spacelike coordinates swept along the x1 axis
        let r = 2.0;
        let f = move |u: f64, v: f64, w: f64| -> Result<Point4> {
            Ok(Vec4::new(0.0, r * u.cos() * v.cos(), r * u.sin() * v.cos(), r * v.sin()) + Vec4::new(w, 0.0, 0.0, 0.0))
        };
        let s = analyze(&f, 0.4, 0.3, 0.0, DerivativeMode::default()).unwrap();
        assert!(s.curvatures.gaussian.abs() < 1e-7);
        let mut p = s.curvatures.principal.map(|x| x.abs());
        p.sort_by(f64::total_cmp);
        assert!(p[0] < 1e-6 && (p[1] - 0.5).abs() < 1e-6 && (p[2] - 0.5).abs() < 1e-6);
        assert_eq!(s.forms.epsilon, 1.0);
    }
}
