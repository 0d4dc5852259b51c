use std::f64::consts::PI;

use canal4d_core::canal::{ParamBox, TANGENT_STEP};
use canal4d_core::diffgeo::{self, DerivativeMode};
use canal4d_core::minkowski::inner;
use canal4d_core::{CanalSurface, Error, RadiusProfile, SpineCurve, TypeTables, Vec4};
use proptest::prelude::*;

fn surface(m: u8) -> CanalSurface {
    let t = TypeTables::for_type(m).unwrap();
    let spine = SpineCurve::constant_k(t.kind, [0.3, 0.2, 0.1], Vec4::ZERO, t.kind.standard_frame(), 0.0, (0.0, 2.0)).unwrap();
    let radius = if t.s > 0.0 {
        RadiusProfile::linear(1.5, 0.2)
    } else {
        RadiusProfile::linear(0.2, 1.5)
    };
    let bounds = if t.shape.is_circular() {
        ParamBox { u: (0.3, 0.6), v: (0.0, 2.0 * PI), w: (-1.0, 1.0) }
    } else {
        ParamBox { u: (0.3, 0.6), v: (-0.5, 0.5), w: (-0.5, 0.5) }
    };
    CanalSurface::new(t, spine, radius, bounds).unwrap()
}

fn point(m: u8, a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    let bx = *surface(m).bounds();
    let lerp = |(lo, hi): (f64, f64), t: f64| lo + (hi - lo) * t;
    (lerp(bx.u, a), lerp(bx.v, b), lerp(bx.w, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn points_lie_on_the_sphere(m in 1u8..=8, a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64) {
        let s = surface(m);
        let (u, v, w) = point(m, a, b, c);
        let r = s.valid_jet(u).unwrap().r;
        prop_assert!(s.membership_residual(u, v, w).unwrap().abs() < 1e-9 * (1.0 + r * r));
        prop_assert!(s.tangent_radial_orthogonality(u, v, w, TANGENT_STEP).unwrap().abs() < 1e-7);
    }

    #[test]
    fn closed_gauss_map_is_normal(m in 1u8..=8, a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64) {
        let s = surface(m);
        let (u, v, w) = point(m, a, b, c);
        let n = s.gauss_map_closed(u, v, w).unwrap();
        let jet = diffgeo::jet(&s, u, v, w, DerivativeMode::Analytic).unwrap();
        let scale = n.euclidean_norm();
        for d in &jet.first {
            prop_assert!(inner(&n, d).abs() < 1e-9 * scale * d.euclidean_norm().max(1.0));
        }
        prop_assert!((inner(&n, &n).abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn analytic_jet_matches_finite_differences(m in 1u8..=8, a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64) {
        let s = surface(m);
        let (u, v, w) = point(m, a, b, c);
        let exact = diffgeo::jet(&s, u, v, w, DerivativeMode::Analytic).unwrap();
        let fd = diffgeo::jet(&s, u, v, w, DerivativeMode::default()).unwrap();
        prop_assert!(exact.max_deviation(&fd) < 1e-5);
    }
}

#[test]
fn every_type_has_its_frame_kind() {
    for t in TypeTables::all() {
        let other = canal4d_core::FrameKind::ALL.into_iter().find(|k| *k != t.kind).unwrap();
        let spine = SpineCurve::line(other, Vec4::ZERO, other.standard_frame(), 0.0, (-1.0, 1.0)).unwrap();
        let err = CanalSurface::new(t, spine, RadiusProfile::constant(1.0), ParamBox::with_default_vw(t.shape, (0.0, 0.5)));
        assert!(matches!(err, Err(Error::Invalid(_))), "m={}", t.m);
    }
}

#[test]
fn validity_is_checked_over_the_whole_interval() {
    // s = -1 needs |r'| > 1; r = 1 + u^2/2 fails for u < 1
    let t = TypeTables::for_type(3).unwrap();
    let spine = SpineCurve::line(t.kind, Vec4::ZERO, t.kind.standard_frame(), 0.0, (0.0, 4.0)).unwrap();
    let r = RadiusProfile::polynomial(vec![1.0, 0.0, 0.5]);
    let bad = CanalSurface::new(t, spine.clone(), r.clone(), ParamBox::with_default_vw(t.shape, (0.5, 2.0)));
    assert!(matches!(bad, Err(Error::Validity { .. })), "{bad:?}");
    assert!(CanalSurface::new(t, spine, r, ParamBox::with_default_vw(t.shape, (1.1, 2.0))).is_ok());
}

#[test]
fn non_positive_radius_is_rejected() {
    let t = TypeTables::for_type(2).unwrap();
    let spine = SpineCurve::line(t.kind, Vec4::ZERO, t.kind.standard_frame(), 0.0, (-2.0, 2.0)).unwrap();
    let r = RadiusProfile::linear(0.5, 1.0);
    let err = CanalSurface::new(t, spine, r, ParamBox::with_default_vw(t.shape, (-1.0, 1.0)));
    assert!(matches!(err, Err(Error::NonPositiveRadius { .. })), "{err:?}");
}

#[test]
fn unit_tube_points() {
    let t = TypeTables::for_type(2).unwrap();
    let spine = SpineCurve::line(t.kind, Vec4::ZERO, t.kind.standard_frame(), 0.0, (-2.0, 2.0)).unwrap();
    let s = CanalSurface::new(t, spine, RadiusProfile::constant(1.0), ParamBox::with_default_vw(t.shape, (-1.0, 1.0))).unwrap();
    let (gamma, _) = s.spine().frame_at(0.0).unwrap();
    let x = s.evaluate(0.0, 0.0, 0.0).unwrap() - gamma;
    assert!((inner(&x, &x) + 1.0).abs() < 1e-15);
}
