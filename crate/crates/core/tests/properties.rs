use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, TAU};

use proptest::prelude::*;
use slope_nav::indicatrix::{implicit_residual, indicatrix_point, speed, speed_extrema};
use slope_nav::slope_metric::{convexity_bound, evaluate_metric, hessian_check};
use slope_nav::spray::{riemannian_spray, slope_spray, spray_terms};
use slope_nav::trajectories::{
    compute_time_front, geodesic_from_angle, integrate_geodesic, GeodesicOptions, GeodesicState, Termination,
};
use slope_nav::{NavigationSetup, SurfaceChart, Vec2};

fn chart(kind: u8) -> SurfaceChart {
    match kind % 3 {
        0 => SurfaceChart::inclined_plane(0.5),
        1 => SurfaceChart::gaussian_bell(1.5),
        _ => SurfaceChart::gaussian_bell_polar(1.5),
    }
}

/// Maps `(r, a)` to an in-domain point of chart `kind`.
fn point(kind: u8, r: f64, a: f64) -> Vec2 {
    match kind % 3 {
        0 => Vec2::new(r * a.cos(), r * a.sin()),
        1 => Vec2::new(r * a.cos(), r * a.sin()),
        _ => Vec2::new(r, a),
    }
}

fn polar_vec(a: f64, m: f64) -> Vec2 {
    Vec2::new(m * a.cos(), m * a.sin())
}

/// Setup whose wind norm at `p` is `frac · b̃0(η̃)`.
fn setup_at(kind: u8, p: Vec2, eta: f64, frac: f64) -> NavigationSetup {
    let c = chart(kind);
    let unit = c.gravitational_wind(1.0, p).unwrap().norm;
    let gbar = frac * convexity_bound(eta).unwrap() / unit;
    NavigationSetup::new(c, gbar, eta).unwrap()
}

prop_compose! {
    fn scenario()(kind in 0u8..3, r in 0.1f64..2.5, a in 0.0f64..TAU, eta in 0.0f64..=1.0, frac in 0.0f64..0.95)
        -> (u8, Vec2, f64, f64) {
        (kind, point(kind, r, a), eta, frac)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn root_solves_irrational_equation((kind, p, eta, frac) in scenario(), a in 0.0f64..TAU, m in 0.05f64..20.0) {
        let setup = setup_at(kind, p, eta, frac);
        let y = polar_vec(a, m);
        let ev = evaluate_metric(&setup, p, y).unwrap();
        let h = setup.chart().metric_at(p).unwrap();
        let wind = setup.chart().gravitational_wind(setup.gbar(), p).unwrap();
        let (alpha, bb, g) = (h.norm(&y), -wind.lowered.dot(&y), wind.norm);
        let f = ev.value;
        let lhs = f * (alpha * alpha + 2.0 * bb * f + g * g * f * f).sqrt();
        let rhs = alpha * alpha + (2.0 - eta) * bb * f + (1.0 - eta) * g * g * f * f;
        prop_assert!(f > 0.0 && lhs > 0.0 && rhs > 0.0);
        prop_assert!((lhs - rhs).abs() < 1e-8 * f64::max(1.0, f * f).max(alpha * alpha));
        prop_assert_eq!(ev.admissible_roots, 1);
    }

    #[test]
    fn metric_is_positively_homogeneous((kind, p, eta, frac) in scenario(), a in 0.0f64..TAU) {
        let setup = setup_at(kind, p, eta, frac);
        let y = polar_vec(a, 1.0);
        let f = evaluate_metric(&setup, p, y).unwrap().value;
        for c in [0.1, 2.0, 17.0] {
            let fc = evaluate_metric(&setup, p, c * y).unwrap().value;
            prop_assert!((fc - c * f).abs() <= 1e-10 * c * f, "c {c}: {fc} vs {}", c * f);
        }
    }

    #[test]
    fn in_domain_hessian_is_positive_definite((kind, p, eta, frac) in scenario(), a in 0.0f64..TAU) {
        let setup = setup_at(kind, p, eta, frac);
        let report = hessian_check(&setup, p, polar_vec(a, 1.0), None).unwrap();
        prop_assert!(report.is_positive_definite, "{:?}", report.eigenvalues);
    }

    #[test]
    fn spray_is_two_homogeneous((kind, p, eta, frac) in scenario(), a in 0.0f64..TAU) {
        let setup = setup_at(kind, p, eta, frac);
        let y = polar_vec(a, 1.0);
        let g = slope_spray(&setup, p, y).unwrap().values;
        for c in [0.5, 3.0] {
            let gc = slope_spray(&setup, p, c * y).unwrap().values;
            prop_assert!((gc - c * c * g).norm() <= 1e-8 * c * c * g.norm().max(1e-12));
        }
    }

    #[test]
    fn e_stays_away_from_zero((kind, p, eta, frac) in scenario(), a in 0.0f64..TAU, m in 0.1f64..10.0) {
        let setup = setup_at(kind, p, eta, frac);
        let y = polar_vec(a, m);
        let t = spray_terms(&setup, p, y).unwrap();
        let alpha = setup.chart().metric_at(p).unwrap().norm(&y);
        prop_assert!(t.e.abs() > 1e-8 * alpha.powi(6));
    }

    #[test]
    fn plane_spray_vanishes(eta in 0.0f64..=1.0, frac in 0.0f64..0.95, a in 0.0f64..TAU, x in -5.0f64..5.0) {
        let setup = setup_at(0, Vec2::new(x, -x), eta, frac);
        let g = slope_spray(&setup, Vec2::new(x, -x), polar_vec(a, 3.0)).unwrap().values;
        prop_assert!(g.norm() < 1e-10);
    }

    /// The η̃ = 0 spray against Randers terms derived separately from
    /// `F² = α² + 2ḡβF + |G|²F²`.
    #[test]
    fn zermelo_spray_matches_randers((kind, p, _eta, frac) in scenario(), a in 0.0f64..TAU, m in 0.2f64..5.0) {
        let setup = setup_at(kind, p, 0.0, frac);
        let c = setup.chart();
        let y = polar_vec(a, m);
        let h = c.metric_at(p).unwrap();
        let wind = c.gravitational_wind(setup.gbar(), p).unwrap();
        let gbar = setup.gbar();
        let (alpha, bb, g2) = (h.norm(&y), -wind.lowered.dot(&y), wind.norm * wind.norm);
        let f = (bb + (bb * bb + (1.0 - g2) * alpha * alpha).sqrt()) / (1.0 - g2);
        let d = (alpha * alpha + bb * f).powi(2) / (f * f) + g2 * alpha * alpha - bb * bb;
        let theta = gbar * alpha.powi(3) / (2.0 * d * f);
        let psi = gbar * gbar * alpha * alpha / (2.0 * d);
        let omega = gbar * gbar * alpha * alpha / d;
        let pi = gbar.powi(3) * alpha * f / d;
        let r = gbar * gbar * f * f / (2.0 * alpha * alpha);

        let rq = c.r_quantities(p).unwrap();
        let b_upper = h.inverse * c.height_jet(p).unwrap().gradient;
        let (r00, r0) = (rq.r00(&y), rq.r0(&y));
        let k = r00 + 2.0 * alpha * alpha * r * rq.r_scalar;
        let oracle = riemannian_spray(c, p, y).unwrap()
            + (theta * k + alpha * omega * r0) * y / alpha
            + (psi * k + alpha * pi * r0) * b_upper
            - alpha * alpha * r * rq.r_upper;
        let got = slope_spray(&setup, p, y).unwrap().values;
        prop_assert!((got - oracle).norm() <= 1e-9 * oracle.norm().max(1e-9), "{got} vs {oracle}");
    }

    #[test]
    fn metric_tensor_is_positive_and_inverts(kind in 0u8..3, r in 0.05f64..3.5, a in 0.0f64..TAU) {
        let c = chart(kind);
        let m = c.metric_at(point(kind, r, a)).unwrap();
        prop_assert!(m.determinant > 0.0 && m.components[(0, 0)] > 0.0);
        let id = m.components * m.inverse;
        prop_assert!((id - nalgebra::Matrix2::identity()).abs().max() < 1e-12 * m.components.abs().max());
    }

    #[test]
    fn christoffel_matches_differences(kind in 0u8..3, r in 0.1f64..3.0, a in 0.0f64..TAU) {
        let c = chart(kind);
        let p = point(kind, r, a);
        let exact = c.christoffel_at(p).unwrap();
        let numeric = c.christoffel_numeric(p).unwrap();
        let scale = exact.max_abs().max(1e-3);
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!((exact.get(k, i, j) - numeric.get(k, i, j)).abs() < 1e-6 * scale);
                }
            }
        }
    }

    /// `|G|_h = ḡ |∇f| / sqrt(1 + |∇f|²)` on graph surfaces.
    #[test]
    fn wind_norm_identity(kind in 0u8..3, r in 0.05f64..3.5, a in 0.0f64..TAU, gbar in 0.0f64..3.0) {
        let c = chart(kind);
        let p = point(kind, r, a);
        let w = c.gravitational_wind(gbar, p).unwrap();
        let q = c.slope_squared(p).unwrap();
        prop_assert!((w.norm - gbar * (q / (1.0 + q)).sqrt()).abs() < 1e-12 * (1.0 + gbar));
        prop_assert!((c.metric_at(p).unwrap().norm(&w.components) - w.norm).abs() < 1e-12 * (1.0 + gbar));
    }

    /// The wind is a gradient, so its covariant derivative is symmetric.
    #[test]
    fn wind_is_closed(kind in 0u8..3, r in 0.1f64..3.0, a in 0.0f64..TAU, gbar in 0.1f64..3.0) {
        let c = chart(kind);
        let d = c.wind_covariant_derivative_numeric(gbar, point(kind, r, a)).unwrap();
        prop_assert!((d[(0, 1)] - d[(1, 0)]).abs() < 1e-6 * d.abs().max().max(1e-6));
    }

    #[test]
    fn gaussian_r_quantities_match_closed_forms(rho in 0.1f64..3.0, phi in -PI..PI, rd in -2.0f64..2.0, pd in -2.0f64..2.0) {
        let rq = chart(2).r_quantities(Vec2::new(rho, phi)).unwrap();
        let ex = (-rho * rho).exp();
        let q = 9.0 * rho * rho * ex * ex + 1.0;
        let lin = 1.0 - 2.0 * rho * rho;
        let r00 = -3.0 * ex / q * (lin * rd * rd + rho * rho * pd * pd);
        let r0 = 9.0 * rho * lin * ex * ex / (q * q) * rd;
        let r = -27.0 * rho * rho * lin * ex.powi(3) / q.powi(3);
        let r1 = 9.0 * rho * lin * ex * ex / q.powi(3);
        let y = Vec2::new(rd, pd);
        let scale = 3.0 * ex * (rd * rd + pd * pd + 1.0);
        prop_assert!((rq.r00(&y) - r00).abs() < 1e-8 * scale);
        prop_assert!((rq.r0(&y) - r0).abs() < 1e-8 * scale);
        prop_assert!((rq.r_scalar - r).abs() < 1e-8 * scale);
        prop_assert!((rq.r_upper - Vec2::new(r1, 0.0)).norm() < 1e-8 * scale);
    }

    #[test]
    fn indicatrix_points_solve_implicit_relation(eta in 0.0f64..=1.0, g in 0.0f64..1.5, theta in 0.0f64..TAU) {
        // the square root picks |1 - ηG cos θ|, which folds the curve once ηG > 1
        prop_assume!(eta * g < 1.0);
        let (x, y) = indicatrix_point(eta, g, theta);
        prop_assert!(implicit_residual(eta, g, x, y).abs() < 1e-12 * (1.0 + g * g));
    }

    #[test]
    fn side_speed_is_independent_of_eta(e1 in 0.0f64..=1.0, e2 in 0.0f64..=1.0, g in 0.0f64..1.5) {
        prop_assert!((speed(e1, g, FRAC_PI_2) - speed(e2, g, FRAC_PI_2)).abs() < 1e-14);
        prop_assert!((speed(e1, g, FRAC_PI_2) - (1.0 + g * g).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn uphill_is_slowest(eta in 0.0f64..=1.0, g in 0.01f64..0.5) {
        let p = speed_extrema(eta, g);
        let min = p.global_min().unwrap();
        let at_pi = speed(eta, g, PI);
        prop_assert!((min.speed - at_pi).abs() < 1e-12);
        for k in 0..360 {
            prop_assert!(speed(eta, g, TAU * k as f64 / 360.0) >= at_pi - 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gaussian_geodesics_conserve_the_metric(kind in 1u8..3, r in 0.3f64..1.5, a in 0.0f64..TAU, eta in 0.0f64..=1.0,
                                              frac in 0.0f64..0.8, theta in 0.0f64..TAU) {
        let p = point(kind, r, a);
        let setup = setup_at(kind, p, eta, frac);
        let tr = geodesic_from_angle(&setup, p, theta, 1.0, &GeodesicOptions::default()).unwrap();
        prop_assert!(tr.norm_drift < 1e-6, "drift {} ({:?})", tr.norm_drift, tr.termination);
        prop_assert!(tr.samples.windows(2).all(|w| w[1].time > w[0].time));
    }

    #[test]
    fn plane_fronts_scale_with_horizon(eta in 0.0f64..=1.0, frac in 0.0f64..0.95, t in 0.1f64..3.0) {
        let origin = Vec2::new(0.4, -1.1);
        let setup = setup_at(0, origin, eta, frac);
        let opts = GeodesicOptions::default();
        let one = compute_time_front(&setup, origin, 1.0, 12, &opts).unwrap();
        let scaled = compute_time_front(&setup, origin, t, 12, &opts).unwrap();
        for (p, q) in one.points.iter().zip(&scaled.points) {
            prop_assert!(((q.endpoint - origin) - t * (p.endpoint - origin)).norm() < 1e-8);
        }
    }
}

/// Second-order graph geodesic `ẍ^k = -f_k f_ij ẋ^i ẋ^j / (1 + |∇f|²)` for
/// `f = 1.5 exp(-|x|²)`, by classical RK4.
fn graph_geodesic(x0: Vec2, v0: Vec2, t_end: f64, steps: usize) -> Vec2 {
    let rhs = |s: [f64; 4]| {
        let (x, y) = (s[0], s[1]);
        let e = 1.5 * (-(x * x + y * y)).exp();
        let fx = -2.0 * x * e;
        let fy = -2.0 * y * e;
        let fxx = (4.0 * x * x - 2.0) * e;
        let fyy = (4.0 * y * y - 2.0) * e;
        let fxy = 4.0 * x * y * e;
        let quad = fxx * s[2] * s[2] + 2.0 * fxy * s[2] * s[3] + fyy * s[3] * s[3];
        let k = quad / (1.0 + fx * fx + fy * fy);
        [s[2], s[3], -fx * k, -fy * k]
    };
    let h = t_end / steps as f64;
    let mut s = [x0.x, x0.y, v0.x, v0.y];
    let add = |s: [f64; 4], k: [f64; 4], c: f64| std::array::from_fn::<f64, 4, _>(|i| s[i] + c * k[i]);
    for _ in 0..steps {
        let k1 = rhs(s);
        let k2 = rhs(add(s, k1, h / 2.0));
        let k3 = rhs(add(s, k2, h / 2.0));
        let k4 = rhs(add(s, k3, h));
        s = std::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    Vec2::new(s[0], s[1])
}

#[test]
fn windless_gaussian_geodesic_is_riemannian() {
    let setup = NavigationSetup::new(SurfaceChart::gaussian_bell(1.5), 0.0, 0.5).unwrap();
    let x0 = Vec2::new(0.6, -0.3);
    for a in [0.0f64, 1.3, 2.9, 4.4] {
        let v = Vec2::new(a.cos(), a.sin());
        let v = v / setup.chart().metric_at(x0).unwrap().norm(&v);
        let tr = integrate_geodesic(&setup, GeodesicState::new(x0, v), 1.0, &GeodesicOptions::default()).unwrap();
        let oracle = graph_geodesic(x0, v, 1.0, 4000);
        assert!((tr.last().position - oracle).norm() < 1e-8, "{} vs {}", tr.last().position, oracle);
    }
}

#[test]
fn windless_front_is_rotationally_symmetric() {
    // Origin on the meridian φ = 0: the front is mirror-symmetric about it.
    let setup = NavigationSetup::new(SurfaceChart::gaussian_bell_polar(1.5), 0.0, 0.5).unwrap();
    let front = compute_time_front(&setup, Vec2::new(0.8, 0.0), 1.0, 16, &GeodesicOptions::default()).unwrap();
    for k in 1..8 {
        let (p, q) = (front.points[k].endpoint, front.points[16 - k].endpoint);
        assert!((p.x - q.x).abs() < 1e-8 && (p.y + q.y).abs() < 1e-8);
    }
    for tr in &front.trajectories {
        assert!(tr.norm_drift < 1e-8);
    }
}

#[test]
fn fig9_downhill_regression() {
    let setup = NavigationSetup::new(SurfaceChart::gaussian_bell_polar(1.5), 0.63, 1.0 / 3.0).unwrap();
    let origin = Vec2::new(FRAC_1_SQRT_2, -FRAC_PI_4);
    let run = |rtol: f64| {
        let opts = GeodesicOptions::default().with_tolerances(rtol, rtol * 1e-2);
        geodesic_from_angle(&setup, origin, 0.0, 1.0, &opts).unwrap()
    };
    let tr = geodesic_from_angle(&setup, origin, 0.0, 1.0, &GeodesicOptions::default()).unwrap();
    let reference = run(1e-12).last().position;
    assert_eq!(tr.termination, Termination::TimeReached);
    assert!(tr.norm_drift < 1e-6);
    assert!((tr.last().position - reference).norm() < 1e-8);
    assert!((tr.last().position - Vec2::new(1.651_368_137_382_775, -FRAC_PI_4)).norm() < 1e-9);
}

/// Endpoint error against a 1e-13 reference shrinks by a factor within 3 of
/// ten for each decade of tolerance.
#[test]
fn endpoint_error_tracks_tolerance() {
    let setup = NavigationSetup::new(SurfaceChart::gaussian_bell_polar(1.5), 0.63, 1.0 / 3.0).unwrap();
    let origin = Vec2::new(FRAC_1_SQRT_2, -FRAC_PI_4);
    for theta in [0.0, 1.0, 2.5, 4.0] {
        let run = |rtol: f64| {
            let opts = GeodesicOptions::default().with_tolerances(rtol, rtol * 1e-2);
            geodesic_from_angle(&setup, origin, theta, 1.0, &opts).unwrap().last().position
        };
        let reference = run(1e-13);
        let errors: Vec<f64> = [1e-6, 1e-7, 1e-8, 1e-9].iter().map(|&t| (run(t) - reference).norm()).collect();
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!((10.0 / 3.0..=30.0).contains(&ratio), "θ = {theta}: {errors:?}");
        }
    }
}
