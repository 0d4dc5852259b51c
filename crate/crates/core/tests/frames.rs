use canal4d_core::minkowski::{inner, Vec4};
use canal4d_core::spine::IntegratorConfig;
use canal4d_core::{CurvatureFunctions, FrameKind, SpineCurve};

const K: [f64; 3] = [0.3, 0.2, 0.1];

fn integrated(kind: FrameKind, curv: CurvatureFunctions, interval: (f64, f64)) -> SpineCurve {
    SpineCurve::integrated(kind, curv, Vec4::ZERO, kind.standard_frame(), 0.0, interval, IntegratorConfig::default()).unwrap()
}

#[test]
fn line_moves_along_b1() {
    let kind = FrameKind::SpacelikeB2Timelike;
    let s = SpineCurve::line(kind, Vec4::ZERO, kind.standard_frame(), 0.0, (-3.0, 3.0)).unwrap();
    let (p, f) = s.frame_at(2.0).unwrap();
    let b1 = kind.standard_frame().b[0];
    assert_eq!(p, b1 * 2.0);
    assert_eq!(f, kind.standard_frame());
    assert_eq!(s.frame_residuals(&[0.0, 1.0, 2.0]).unwrap().gram, 0.0);
}

#[test]
fn integrated_frames_stay_orthonormal() {
    for kind in FrameKind::ALL {
        let s = integrated(kind, CurvatureFunctions::Constant(K), (0.0, 10.0));
        let us: Vec<f64> = (0..=500).map(|i| i as f64 * 0.02).collect();
        let res = s.frame_residuals(&us).unwrap();
        assert!(res.gram < 1e-9, "{kind:?} {res:?}");
        assert!(res.tangent < 1e-6, "{kind:?} {res:?}");
    }
}

#[test]
fn integration_matches_the_closed_form() {
    for kind in FrameKind::ALL {
        let a = SpineCurve::constant_k(kind, K, Vec4::ZERO, kind.standard_frame(), 0.0, (-1.0, 1.0)).unwrap();
        let b = integrated(kind, CurvatureFunctions::Constant(K), (-1.0, 1.0));
        for i in 0..=40 {
            let u = -1.0 + i as f64 * 0.05;
            let (pa, fa) = a.frame_at(u).unwrap();
            let (pb, fb) = b.frame_at(u).unwrap();
            assert!(fa.max_deviation(&fb) < 1e-8, "{kind:?} u={u}");
            assert!((pa - pb).max_abs() < 1e-8, "{kind:?} u={u}");
        }
    }
}

#[test]
fn tangent_is_unit_with_the_kind_causality() {
    for kind in FrameKind::ALL {
        let s = SpineCurve::constant_k(kind, K, Vec4::ZERO, kind.standard_frame(), 0.0, (0.0, 2.0)).unwrap();
        let jet = s.frame_jet(1.3).unwrap();
        let t = jet.frame.b[0];
        let expected = if kind == FrameKind::TimelikeCurve { -1.0 } else { 1.0 };
        assert!((inner(&t, &t) - expected).abs() < 1e-12, "{kind:?}");
        let h = 1e-5;
        let fd = (s.frame_at(1.3 + h).unwrap().0 - s.frame_at(1.3 - h).unwrap().0) * (0.5 / h);
        assert!((fd - t).max_abs() < 1e-9, "{kind:?}");
    }
}

#[test]
fn polynomial_curvatures_reduce_to_constants() {
    let c = CurvatureFunctions::Polynomial([vec![0.3, 0.0], vec![0.2], vec![0.1, 0.0, 0.0]]);
    assert_eq!(c.as_constant(), Some(K));
    let d = CurvatureFunctions::Polynomial([vec![0.3, 0.1], vec![0.2], vec![0.1]]);
    assert_eq!(d.eval(2.0), [0.5, 0.2, 0.1]);
    assert_eq!(d.derivative(2.0), [0.1, 0.0, 0.0]);
}

#[test]
fn out_of_interval_is_an_error() {
    let s = integrated(FrameKind::TimelikeCurve, CurvatureFunctions::Constant(K), (0.0, 1.0));
    assert!(s.frame_at(1.5).is_err());
    assert!(s.frame_at(-0.1).is_err());
}
