use proptest::prelude::*;
use rapm_core::pde::*;
use rapm_core::{Error, GridSpec, ModelParams, Surface};

fn desk() -> ModelParams {
    ModelParams::from_mu(0.3, 0.05, 0.2, 8.0).unwrap()
}

fn linear_model() -> ModelParams {
    ModelParams::new(0.3, 0.05, 0.0, 8.0).unwrap()
}

/// Call value by Simpson's rule over the terminal log-price density, as an
/// oracle independent of the normal CDF.
fn call_by_quadrature(sigma: f64, r: f64, strike: f64, tau: f64, s: f64) -> f64 {
    let m = s.ln() + (r - 0.5 * sigma * sigma) * tau;
    let sd = sigma * tau.sqrt();
    // the payoff kink sits at the lower limit, so the integrand is smooth
    let (lo, hi, n) = (strike.ln(), m + 12.0 * sd, 20_000);
    let h = (hi - lo) / n as f64;
    let g = |x: f64| {
        let z = (x - m) / sd;
        (x.exp() - strike).max(0.0) * (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
    };
    let mut acc = g(lo) + g(hi);
    for i in 1..n {
        acc += g(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    (-r * tau).exp() * acc * h / 3.0
}

#[test]
fn operator_on_trivial_solutions() {
    let p = desk();
    let s = 73.0;
    assert_eq!(
        rapm_operator(
            &p,
            &Jet {
                u: s,
                u_t: 0.0,
                u_s: 1.0,
                u_ss: 0.0
            },
            s
        ),
        0.0
    );
    let t = 0.4;
    let g = (p.r() * t).exp();
    assert!(
        rapm_operator(
            &p,
            &Jet {
                u: g,
                u_t: p.r() * g,
                u_s: 0.0,
                u_ss: 0.0
            },
            s
        )
        .abs()
            < 1e-15
    );
}

#[test]
fn black_scholes_against_quadrature() {
    let v = bs_call(0.3, 0.05, 100.0, 1.0, 100.0);
    assert!(
        (v - call_by_quadrature(0.3, 0.05, 100.0, 1.0, 100.0)).abs() < 1e-8,
        "{v}"
    );
    let deep = bs_call(0.3, 0.05, 100.0, 1.0, 1e4);
    assert!((deep - (1e4 - 100.0 * (-0.05f64).exp())).abs() < 1e-8);
    assert!((bs_call(0.3, 0.05, 100.0, 1e-12, 120.0) - 20.0).abs() < 1e-9);
    let put = bs_put(0.3, 0.05, 100.0, 1.0, 100.0);
    assert!((v - put - (100.0 - 100.0 * (-0.05f64).exp())).abs() < 1e-12);
}

#[test]
fn black_scholes_solves_the_linear_equation() {
    let p = linear_model();
    let call = BlackScholesCall {
        sigma: 0.3,
        r: 0.05,
        strike: 100.0,
        maturity: 1.0,
    };
    let grid = GridSpec::new((50.0, 200.0), (0.0, 0.9), 20, 20);
    let rep = residual_norm(&call, &p, &grid).unwrap();
    assert!(rep.analytic_derivatives);
    assert!(rep.max_scaled < 1e-10, "{}", rep.max_scaled);
}

#[test]
fn non_solution_residual_by_hand() {
    // u = S·t: u_t = S, u_S = t, u_SS = 0, so the residual is S everywhere
    let p = desk();
    let u = JetSurface(|s: f64, t: f64| Jet {
        u: s * t,
        u_t: s,
        u_s: t,
        u_ss: 0.0,
    });
    let grid = GridSpec::new((10.0, 200.0), (0.0, 0.9), 10, 10);
    let rep = residual_norm(&u, &p, &grid).unwrap();
    assert!((rep.max_abs - 200.0).abs() < 1e-9);
    for pt in &rep.points {
        assert!((pt.residual - pt.s).abs() < 1e-9);
    }
}

#[test]
fn finite_differences_recover_the_residual() {
    let p = linear_model();
    let call = BlackScholesCall {
        sigma: 0.3,
        r: 0.05,
        strike: 100.0,
        maturity: 1.0,
    };
    let values_only = FnSurface(|s: f64, t: f64| bs_call(0.3, 0.05, 100.0, 1.0 - t, s));
    let grid = GridSpec::new((60.0, 160.0), (0.1, 0.7), 40, 40);
    let rep = residual_norm(
        &Restricted {
            inner: values_only,
            support: call.support(),
        },
        &p,
        &grid,
    )
    .unwrap();
    assert!(!rep.analytic_derivatives);
    assert!(rep.max_abs < 1e-3, "{}", rep.max_abs);
}

#[test]
fn support_too_small_is_reported() {
    let u = Restricted::to_grid(
        FnSurface(|s: f64, _t: f64| s),
        &GridSpec::new((10.0, 20.0), (0.0, 0.5), 5, 5),
    );
    let bigger = GridSpec::new((5.0, 20.0), (0.0, 0.5), 5, 5);
    assert!(residual_norm(&u, &desk(), &bigger).is_err());
}

#[test]
fn affine_data_is_reproduced() {
    // c1·S + c2 is exact for the scheme when r = 0; with r > 0 only the
    // c1·S part is, because e^{rt} sees the Crank–Nicolson growth factor
    let exact_runs = [(desk(), 0.0), (desk().with_rate(0.0).unwrap(), 3.0)];
    for (p, c2) in exact_runs {
        let exact = |s: f64, t: f64| 0.7 * s + c2 * (p.r() * t).exp();
        let grid = GridSpec::new((10.0, 200.0), (0.0, 0.9), 30, 30);
        let fd = fd_solve(
            &p,
            |s| exact(s, 0.9),
            |t| exact(10.0, t),
            |t| exact(200.0, t),
            &grid,
            &FdOptions::default(),
        )
        .unwrap();
        for (j, &t) in fd.t_nodes().iter().enumerate() {
            for (i, &s) in fd.s_nodes().iter().enumerate() {
                let e = (fd.node(i, j) - exact(s, t)).abs();
                assert!(e < 1e-10, "{s} {t}: {e}");
            }
        }
    }
}

#[test]
fn gauge_part_converges_in_time() {
    let p = desk();
    let exact = FnSurface(|s: f64, t: f64| 0.7 * s + 3.0 * (p.r() * t).exp());
    let mut errors = [0.0; 3];
    for (k, n) in [10, 20, 40].into_iter().enumerate() {
        let grid = GridSpec::new((10.0, 200.0), (0.0, 0.9), 12, n);
        let at = |s: f64, t: f64| exact.value(s, t).unwrap();
        let fd = fd_solve(
            &p,
            |s| at(s, 0.9),
            |t| at(10.0, t),
            |t| at(200.0, t),
            &grid,
            &FdOptions::default(),
        )
        .unwrap();
        errors[k] = fd.max_error(&exact).unwrap();
    }
    match convergence_order(errors).unwrap() {
        Order::Observed(o) => assert!(o > 1.9, "{o} from {errors:?}"),
        Order::Exact => panic!("{errors:?}"),
    }
}

#[test]
fn call_converges_to_black_scholes() {
    let p = linear_model();
    let call = BlackScholesCall {
        sigma: 0.3,
        r: 0.05,
        strike: 100.0,
        maturity: 1.0,
    };
    let mut errors = [0.0; 3];
    for (k, n) in [50, 100, 200].into_iter().enumerate() {
        let grid = GridSpec::new((40.0, 250.0), (0.0, 0.9), n, n);
        let at = |s: f64, t: f64| call.value(s, t).unwrap();
        let fd = fd_solve(
            &p,
            |s| at(s, 0.9),
            |t| at(40.0, t),
            |t| at(250.0, t),
            &grid,
            &FdOptions::default(),
        )
        .unwrap();
        errors[k] = fd.max_error(&call).unwrap();
    }
    assert!(errors[2] < 1e-3, "{errors:?}");
    match convergence_order(errors).unwrap() {
        Order::Observed(o) => assert!(o >= 1.8, "{o}"),
        Order::Exact => panic!("unexpected exact order"),
    }
}

#[test]
fn linear_solver_is_linear() {
    let p = linear_model();
    let grid = GridSpec::new((10.0, 200.0), (0.0, 0.9), 40, 40);
    let opts = FdOptions::default();
    let f = |s: f64| (s / 50.0).sin() + 2.0;
    let g = |s: f64| (s - 100.0).abs().sqrt();
    let a = fd_solve(&p, f, |_| f(10.0), |_| f(200.0), &grid, &opts).unwrap();
    let b = fd_solve(&p, g, |_| g(10.0), |_| g(200.0), &grid, &opts).unwrap();
    let sum = fd_solve(
        &p,
        |s| f(s) + g(s),
        |_| f(10.0) + g(10.0),
        |_| f(200.0) + g(200.0),
        &grid,
        &opts,
    )
    .unwrap();
    for j in 0..40 {
        for i in 0..40 {
            assert!((sum.node(i, j) - a.node(i, j) - b.node(i, j)).abs() < 1e-10);
        }
    }
}

#[test]
fn parabolicity_loss_is_located() {
    let p = ModelParams::new(0.3, 0.05, 0.02, 8.0).unwrap();
    let grid = GridSpec::new((10.0, 200.0), (0.0, 0.9), 50, 50);
    match fd_solve(&p, |s| s * s, |_| 100.0, |_| 40_000.0, &grid, &FdOptions::default()) {
        Err(Error::ParabolicityLost { s, t, s_gamma, bound }) => {
            assert!(s_gamma > bound);
            assert!(s > 10.0 && s < 200.0 && t == 0.9);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn order_reporting() {
    assert_eq!(convergence_order([1e-12, 1e-13, 1e-12]).unwrap(), Order::Exact);
    assert!(matches!(
        convergence_order([1e-2, 2e-2, 1e-3]),
        Err(Error::NonMonotoneErrors(_))
    ));
    assert_eq!(convergence_order([4e-2, 1e-2, 2.5e-3]).unwrap(), Order::Observed(2.0));
}

proptest! {
    #[test]
    fn gauge_and_linear_shifts_leave_the_operator_unchanged(
        u in -10.0f64..10.0, u_t in -5.0f64..5.0, u_s in -3.0f64..3.0, u_ss in -1.0f64..1.0,
        s in 1.0f64..300.0, t in 0.0f64..1.0, lam in -3.0f64..3.0,
    ) {
        let p = desk();
        let base = rapm_operator(&p, &Jet { u, u_t, u_s, u_ss }, s);
        let g = (p.r() * t).exp();
        let gauge = rapm_operator(&p, &Jet { u: u + lam * g, u_t: u_t + lam * p.r() * g, u_s, u_ss }, s);
        let shift = rapm_operator(&p, &Jet { u: u + lam * s, u_t, u_s: u_s + lam, u_ss }, s);
        let scale = 1.0 + base.abs() + s * s;
        prop_assert!((gauge - base).abs() <= 1e-12 * scale);
        prop_assert!((shift - base).abs() <= 1e-12 * scale);
    }

    #[test]
    fn signed_cube_root_is_odd(x in -1e6f64..1e6) {
        prop_assert_eq!((-x).cbrt(), -x.cbrt());
    }
}
