//! Analytic checks on the spectral curve against the polynomials themselves.

use mop_core::curve::{CurvePreset, Side, SpectralCurve};
use mop_core::model::{poly_eval, solve_mop, ModelDescriptor};
use mop_core::{Cx, PrecisionContext};
use num_complex::Complex64 as C64;

fn curve(prec: u32) -> SpectralCurve {
    SpectralCurve::from_preset(&CurvePreset::ratio_3_4(), prec).unwrap()
}

#[test]
fn g_routes_agree() {
    let c = curve(256);
    for (x, y) in [(1.0, 0.5), (-2.0, -1.0), (5.0, 0.25), (0.3, -2.0)] {
        let z = Cx::new(256, x, y);
        let side = Side::of(z.to_c64());
        let g1 = c.g_eval(&z, side).unwrap();
        let g2 = c.g_path(&z, side, 48).unwrap();
        assert!((&g1 - &g2).abs_f64() < 1e-20, "{x} {y}: {}", (&g1 - &g2).abs_f64());
    }
}

#[test]
fn g_is_log_at_infinity() {
    let c = curve(128);
    let z = Cx::new(128, 3e3, 8e3);
    let g = c.g_eval(&z, Side::Upper).unwrap();
    let e = (&g - &z.ln()).exp();
    assert!((&e - 1.0).abs_f64() < 1e-3);
}

#[test]
fn polynomial_over_exp_ng_stays_bounded() {
    let c = curve(256);
    let m = ModelDescriptor::new(0.3, -0.2, 12, 4).unwrap();
    let p = solve_mop(&m, PrecisionContext::new(256)).unwrap().poly;
    for (x, y) in [(1.0, 1.0), (-2.0, 0.5), (6.0, 0.0), (-0.5, -0.7)] {
        let z = Cx::new(256, x, y);
        let side = Side::of(z.to_c64());
        let r = (&poly_eval(&p, &z) / &c.exp_n_g(12, 4, &z, side).unwrap()).abs_f64();
        assert!((1e-2..1e2).contains(&r), "{x} {y}: {r}");
    }
}

#[test]
fn exp_ng_matches_g() {
    let c = curve(256);
    let z = Cx::new(256, 2.0, 0.7);
    let g = c.g_eval(&z, Side::Upper).unwrap();
    let e = c.exp_n_g(6, 2, &z, Side::Upper).unwrap();
    assert!((&(&g * 8.0).exp() / &e - 1.0).abs_f64() < 1e-60);
}

#[test]
fn phase_signs() {
    let c = curve(128);
    let x0 = c.x0_f64();
    let x1 = c.x1_f64().unwrap();
    for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for side in [Side::Upper, Side::Lower] {
            let pd = c.phi_delta(&Cx::new(128, t * x0, 0.0), side).unwrap();
            assert!(pd.re_f64().abs() < 1e-30);
            let pg = c.phi_gamma(&Cx::new(128, -t * x1, 0.0), side).unwrap();
            assert!(pg.re_f64().abs() < 1e-30);
        }
        let s = if t < 0.5 { 1.0 } else { -1.0 };
        let pd = c.phi_delta(&Cx::new(128, t * x0, s * 0.2), Side::of(C64::new(0.0, s))).unwrap();
        assert!(pd.re_f64() > 0.0);
        let pg = c.phi_gamma(&Cx::new(128, -t * x1, s * 0.2), Side::of(C64::new(0.0, s))).unwrap();
        assert!(pg.re_f64() > 0.0);
    }
    for x in [x0 + 0.3, x0 + 2.0] {
        assert!(c.phi_delta(&Cx::new(128, x, 0.0), Side::Upper).unwrap().re_f64() < 0.0);
    }
    for x in [-x1 - 0.3, -x1 - 2.0] {
        assert!(c.phi_gamma(&Cx::new(128, x, 0.0), Side::Upper).unwrap().re_f64() < 0.0);
    }
}

#[test]
fn density_has_unit_mass() {
    let c = curve(64);
    let x0 = c.x0_f64();
    // x = x0 v³, v = (1 − cos t)/2 tames both x^{−2/3} at 0 and the square root at x0
    let k = 400;
    let mut m = 0.0;
    for i in 0..k {
        let t = std::f64::consts::PI * (i as f64 + 0.5) / k as f64;
        let v = 0.5 * (1.0 - t.cos());
        let dv = 0.5 * t.sin() * std::f64::consts::PI / k as f64;
        m += c.density(x0 * v * v * v) * 3.0 * x0 * v * v * dv;
    }
    assert!((m - 1.0).abs() < 1e-6, "{m}");
}

#[test]
fn soft_edge_coordinates_are_conformal() {
    let c = curve(192);
    let x0 = c.x0_f64();
    let h = 1e-6;
    let fa = c.f_x0(&Cx::new(192, x0 + h, 0.0), Side::Upper).unwrap();
    let fb = c.f_x0(&Cx::new(192, x0 - h, 0.0), Side::Upper).unwrap();
    let d = (&(&fa - &fb) * (0.5 / h)).to_c64();
    assert!(d.re > 0.1 && d.im.abs() < 1e-6, "{d}");
    assert!(fa.re_f64() > 0.0 && fb.re_f64() < 0.0);
    let x1 = c.x1_f64().unwrap();
    let ga = c.f_minus_x1(&Cx::new(192, -x1 + h, 0.0), Side::Upper).unwrap();
    let gb = c.f_minus_x1(&Cx::new(192, -x1 - h, 0.0), Side::Upper).unwrap();
    let d = (&(&ga - &gb) * (0.5 / h)).to_c64();
    assert!(d.re < -0.1 && d.im.abs() < 1e-6, "{d}");
}

#[test]
fn labels_independent_of_path() {
    let c = curve(128);
    for x in [0.5, 2.0, 5.0, -0.5, -3.0] {
        let z = Cx::new(128, x, 0.3);
        let up = c.branches_at(&z, Side::Upper).unwrap();
        let far = c.track_c64(C64::new(x, 0.3), Side::Upper).unwrap();
        for j in 0..3 {
            assert!((up[j].to_c64() - far[j]).norm() < 1e-10);
        }
    }
}
