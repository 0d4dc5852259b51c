use canal4d_core::families::{self, box_grid, RadiusFamily, Target};
use canal4d_core::{RadiusProfile, TypeTables};

fn grid(m: u8, u: (f64, f64)) -> Vec<(f64, f64, f64)> {
    let (v, w) = TypeTables::for_type(m).unwrap().shape.default_vw_box();
    box_grid(u, v, w, [5, 5, 5])
}

#[test]
fn linear_radii_give_flat_surfaces_for_every_type() {
    for m in 1..=8 {
        let c1 = if TypeTables::for_type(m).unwrap().s > 0.0 { -0.3 } else { 1.3 };
        let p = families::flat_radius(RadiusFamily::Linear { c1, c2: 1.0 }, m).unwrap();
        let rep = families::verify_family(&p, m, &grid(m, (0.0, 1.0)), Target::Gaussian).unwrap();
        assert!(rep.below(1e-9), "m={m} {rep:?}");
    }
}

#[test]
fn curved_radius_is_not_flat() {
    for m in [2, 4, 6, 7] {
        let p = RadiusProfile::polynomial(vec![0.0, 0.0, 1.0]);
        let rep = families::verify_family(&p, m, &grid(m, (0.5, 1.5)), Target::Gaussian).unwrap();
        assert!(rep.all_evaluated() && rep.max_abs > 1e-2, "m={m} {rep:?}");
    }
}

#[test]
fn quadrature_radii_give_minimal_surfaces() {
    for m in 1..=8 {
        let p = families::minimal_radius(RadiusFamily::MinimalQuadrature { c3: 0.8, c4: 0.1, sign: 1.0 }, m).unwrap();
        let (lo, hi) = p.domain();
        let rep = families::verify_family(&p, m, &grid(m, (lo, hi)), Target::Mean).unwrap();
        assert!(rep.below(1e-7), "m={m} {rep:?}");
        let check = families::check_quadrature(&p, 0.8, 1.0, 53).unwrap();
        assert!(check.u_mismatch < 1e-6 && check.first_integral_drift < 1e-8, "m={m} {check:?}");
    }
}

#[test]
fn root_radii_sit_on_the_singular_locus() {
    for m in 1..=8 {
        let p = families::flat_radius(RadiusFamily::FlatRoot { c1: 0.2, c2: 0.0, sign: 1.0 }, m).unwrap();
        let (lo, hi) = p.domain();
        let hi = if hi.is_finite() { hi } else { lo + 1.0 };
        let mid = 0.5 * (lo + hi);
        let res = families::ode_residuals(&p, m, &[mid]).unwrap();
        assert!(res.flat < 1e-12, "m={m}");
        let j = p.jet(mid).unwrap();
        let s = TypeTables::for_type(m).unwrap().s;
        assert!((s + j.r1 * j.r1 + j.r * j.r2).abs() < 1e-12, "m={m}");
        let rep = families::verify_family(&p, m, &grid(m, (mid, mid)), Target::Gaussian).unwrap();
        assert_eq!(rep.evaluated, 0, "m={m}");
    }
}

#[test]
fn invalid_family_parameters() {
    assert!(families::flat_radius(RadiusFamily::Linear { c1: 0.5, c2: 1.0 }, 3).is_err());
    assert!(families::flat_radius(RadiusFamily::FlatRoot { c1: 0.0, c2: 0.0, sign: -1.0 }, 2).is_err());
    assert!(families::flat_radius(RadiusFamily::MinimalRoot { c1: 0.0, c2: 0.0, sign: 1.0 }, 2).is_err());
    assert!(families::minimal_radius(RadiusFamily::Linear { c1: 0.0, c2: 1.0 }, 2).is_err());
    assert!(families::verify_family(&RadiusProfile::constant(1.0), 2, &[], Target::Mean).is_err());
}
