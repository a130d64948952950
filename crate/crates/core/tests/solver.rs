use lagcurv::geometry::OperatorParams;
use lagcurv::grid::Grid2D;
use lagcurv::harness::{manufactured_profile, manufactured_radial, RadialProfile};
use lagcurv::solver::{
    continuity_solve, monitors, newton_step, residual_field, solve_fixed_t, SolverConfig,
};

#[test]
fn exact_solution_residual_is_second_order() {
    let profile = RadialProfile::Exponential { c: 1.0 };
    let cfg = SolverConfig::default();
    let mut errs = Vec::new();
    for nodes in [17, 33, 65] {
        let m = manufactured_profile(Grid2D::unit_square(nodes).unwrap(), profile).unwrap();
        let p = m
            .problem(OperatorParams::new(2, 0.7, 2.2).unwrap())
            .unwrap();
        errs.push(residual_field(&m.u_star, &p, 1.0, &cfg).unwrap().max_abs());
    }
    for w in errs.windows(2) {
        let p = (w[0] / w[1]).log2();
        assert!((1.7..=2.3).contains(&p), "{errs:?}");
    }
}

#[test]
fn quadratic_exact_solution_has_zero_residual() {
    let m = manufactured_radial(Grid2D::unit_square(17).unwrap(), 1.0).unwrap();
    let p = m
        .problem(OperatorParams::new(2, m.delta_used, 2.2).unwrap())
        .unwrap();
    let r = residual_field(&m.u_star, &p, 1.0, &SolverConfig::default()).unwrap();
    assert!(r.max_abs() <= 1e-14);
}

#[test]
fn newton_is_quadratic_near_the_discrete_solution() {
    let m = manufactured_profile(
        Grid2D::unit_square(17).unwrap(),
        RadialProfile::Exponential { c: 1.0 },
    )
    .unwrap();
    let p = m
        .problem(OperatorParams::new(2, m.delta_used, 2.2).unwrap())
        .unwrap();
    let cfg = SolverConfig {
        tol_residual: 1e-14,
        ..Default::default()
    };
    // u* is within O(h²) of the discrete solution.
    let (u1, s1) = newton_step(&m.u_star, &p, 1.0, &cfg).unwrap();
    let (_, s2) = newton_step(&u1, &p, 1.0, &cfg).unwrap();
    assert_eq!((s1.alpha, s2.alpha), (1.0, 1.0));
    let c1 = s1.residual_after / s1.residual_before.powi(2);
    let c2 = s2.residual_after / s2.residual_before.powi(2);
    assert!(c1 < 1e3 && c2 < 1e3, "{c1} {c2}");
}

#[test]
fn warm_start_from_t_09() {
    let m = manufactured_profile(
        Grid2D::unit_square(17).unwrap(),
        RadialProfile::Exponential { c: 1.0 },
    )
    .unwrap();
    let p = m
        .problem(OperatorParams::new(2, m.delta_used, 2.2).unwrap())
        .unwrap();
    let cfg = SolverConfig::default();
    let (u, _) = continuity_solve(&p, &cfg).unwrap();
    let at_09 = solve_fixed_t(&u, &p, 0.9, &cfg).unwrap();
    let back = solve_fixed_t(&at_09.u, &p, 1.0, &cfg).unwrap();
    assert!(back.iterations <= cfg.max_newton);
    assert!(back.u.max_diff(&u) <= 1e-8);
}

#[test]
fn manufactured_margin_monitor_tracks_h() {
    let m = manufactured_profile(
        Grid2D::unit_square(33).unwrap(),
        RadialProfile::Exponential { c: 1.0 },
    )
    .unwrap();
    let delta = 0.5;
    let p = m
        .problem(OperatorParams::new(2, delta, 2.2).unwrap())
        .unwrap();
    let rec = monitors(&m.u_star, &p).unwrap();
    let g = p.grid;
    let expected = g
        .interior()
        .map(|(i, j)| m.h_field.at(i, j) - delta)
        .fold(f64::INFINITY, f64::min);
    assert!(
        (rec.min_phase_margin - expected).abs() <= 10.0 * g.h() * g.h(),
        "{} {expected}",
        rec.min_phase_margin
    );
}

#[test]
fn reruns_are_bitwise_identical() {
    let m = manufactured_radial(Grid2D::unit_square(17).unwrap(), 1.3).unwrap();
    let p = m
        .problem(OperatorParams::new(2, m.delta_used, 3.0).unwrap())
        .unwrap();
    let cfg = SolverConfig::default();
    let (u1, r1) = continuity_solve(&p, &cfg).unwrap();
    let (u2, r2) = continuity_solve(&p, &cfg).unwrap();
    assert_eq!(r1, r2);
    assert!(u1
        .values
        .iter()
        .zip(&u2.values)
        .all(|(a, b)| a.to_bits() == b.to_bits()));
}
