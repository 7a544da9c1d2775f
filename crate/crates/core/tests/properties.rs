use std::sync::Arc;

use nonosc::chebcore::{barycentric_eval, cheb_grid, spectral_integration_matrix, PiecewiseChebyshev};
use nonosc::kummer::{
    build_phase, window_function, windowed_coefficient, CoefficientProblem, PhaseFunction, PhaseOptions, WindowSpec,
};
use nonosc::phasefile::{decode_phase, encode_phase};
use nonosc::rng::random_points;
use nonosc::solve::{basis_eval, from_initial_data};
use nonosc::specfun::{bessel_reference, legendre_reference};
use nonosc::stiffode::{march, Direction, IvpConfig, SystemFn};
use proptest::prelude::*;

fn phase_for(lambda: f64, a2: f64, w: f64) -> PhaseFunction {
    let prob = CoefficientProblem::new(move |t| 1.0 + a2 * t * t + 0.3 * (w * t).sin(), lambda, -1.0, 1.0).unwrap();
    build_phase(&prob, &PhaseOptions::uniform(-1.0, 1.0, 8, 15)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn barycentric_reproduces_monomials(m in 1usize..=20, k in 0usize..=20, seed in any::<u64>()) {
        let k = k.min(m);
        let grid = cheb_grid(m, -0.7, 1.9).unwrap();
        let vals: Vec<f64> = grid.nodes().iter().map(|x| x.powi(k as i32)).collect();
        let scale = vals.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for x in random_points(seed, 100, -0.7, 1.9) {
            let want = x.powi(k as i32);
            let got = barycentric_eval(&grid, &vals, x).unwrap();
            prop_assert!((got - want).abs() <= 1e-13 * scale, "m={m} k={k} x={x}");
        }
    }

    #[test]
    fn interpolation_is_exact_at_nodes(m in 1usize..=30, seed in any::<u64>()) {
        let grid = cheb_grid(m, 2.0, 5.0).unwrap();
        let vals = random_points(seed, m + 1, -1e3, 1e3);
        for (j, &x) in grid.nodes().iter().enumerate() {
            prop_assert_eq!(barycentric_eval(&grid, &vals, x).unwrap().to_bits(), vals[j].to_bits());
        }
    }

    #[test]
    fn spectral_integration_is_exact(m in 1usize..=24, k in 0usize..=24) {
        let k = k.min(m) as i32;
        let s = spectral_integration_matrix(m).unwrap();
        let grid = cheb_grid(m, -1.0, 1.0).unwrap();
        let vals: Vec<f64> = grid.nodes().iter().map(|x| x.powi(k)).collect();
        let integral = s.apply(&vals, 1.0);
        for (x, got) in grid.nodes().iter().zip(integral) {
            let want = (x.powi(k + 1) - (-1f64).powi(k + 1)) / (k + 1) as f64;
            prop_assert!((got - want).abs() <= 1e-13, "m={m} k={k}");
        }
    }

    #[test]
    fn integrate_then_differentiate(w in 0.5f64..4.0, t in -0.9f64..0.9) {
        let m = 20;
        let grid = cheb_grid(m, -1.0, 1.0).unwrap();
        let vals: Vec<f64> = grid.nodes().iter().map(|x| (w * x).cos()).collect();
        let integral = spectral_integration_matrix(m).unwrap().apply(&vals, 1.0);
        let h = 1e-6;
        let d = (barycentric_eval(&grid, &integral, t + h).unwrap() - barycentric_eval(&grid, &integral, t - h).unwrap())
            / (2.0 * h);
        prop_assert!((d - (w * t).cos()).abs() <= 1e-5);
    }

    #[test]
    fn window_is_symmetric(t in -3.0f64..5.0) {
        let spec = WindowSpec::default();
        let s = window_function(t, -3.0, 5.0, spec) + window_function(2.0 - t, -3.0, 5.0, spec);
        prop_assert!((s - 1.0).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn windowed_coefficient_lies_between(t in -1.0f64..1.0, c in 1e-3f64..1e6) {
        let prob = CoefficientProblem::new(move |x| c * (1.0 + 0.5 * x * x), 10.0, -1.0, 1.0).unwrap();
        let q = prob.q(t);
        let qt = windowed_coefficient(&prob, WindowSpec::default())(t);
        let (lo, hi) = if q < 1.0 { (q, 1.0) } else { (1.0, q) };
        prop_assert!(qt >= lo * (1.0 - 1e-15) && qt <= hi * (1.0 + 1e-15));
    }

    #[test]
    fn legendre_closed_forms(t in -1.0f64..=1.0) {
        let t2 = t * t;
        let closed = [
            1.0,
            t,
            (3.0 * t2 - 1.0) / 2.0,
            (5.0 * t2 - 3.0) * t / 2.0,
            ((35.0 * t2 - 30.0) * t2 + 3.0) / 8.0,
            ((63.0 * t2 - 70.0) * t2 + 15.0) * t / 8.0,
        ];
        for (n, want) in closed.iter().enumerate() {
            prop_assert!((legendre_reference(n, t) - want).abs() <= 1e-14);
        }
    }

    #[test]
    fn bessel_reference_matches_power_series(n in 0usize..40, t in 0.01f64..8.0) {
        // J_n(t) = sum_k (-1)^k (t/2)^(2k+n) / (k! (n+k)!)
        let lead = (n as f64 * (t / 2.0).ln() - libm::lgamma(n as f64 + 1.0)).exp();
        let (mut term, mut sum, mut mag) = (lead, lead, lead);
        for k in 1..200 {
            term *= -(t * t / 4.0) / (k as f64 * (n + k) as f64);
            sum += term;
            mag += term.abs();
        }
        let got = bessel_reference(n, t).unwrap();
        prop_assert!((got - sum).abs() <= 1e-13 * mag + 1e-300, "n={n} t={t} got={got} want={sum}");
    }

    #[test]
    fn march_round_trip(k in 0.1f64..3.0, c in -2.0f64..2.0, y0 in -1.0f64..1.0) {
        let f = SystemFn::new(2, move |t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -k * y[0] + c * t.sin();
        });
        let bp = [0.0, 0.7, 1.5, 2.0];
        let cfg = IvpConfig::for_order(15);
        let fwd = march(&f, &bp, 15, &[y0, 0.5], Direction::Forward, &cfg).unwrap();
        let end = [fwd.components[0].eval(2.0).unwrap(), fwd.components[1].eval(2.0).unwrap()];
        let back = march(&f, &bp, 15, &end, Direction::Backward, &cfg).unwrap();
        prop_assert!((back.components[0].eval(0.0).unwrap() - y0).abs() <= 10.0 * cfg.residual_tol);
        prop_assert!((back.components[1].eval(0.0).unwrap() - 0.5).abs() <= 10.0 * cfg.residual_tol);
    }

    #[test]
    fn node_projection_is_bit_exact(m in 1usize..20) {
        let bp = vec![-1.0, -0.25, 0.5, 3.0];
        let f = |x: f64| (3.0 * x).sin() + x.exp();
        let p = PiecewiseChebyshev::from_fn(bp, m, f).unwrap();
        for (x, v) in p.nodes().iter().zip(p.values()) {
            prop_assert_eq!(v.to_bits(), f(*x).to_bits());
            prop_assert_eq!(p.eval(*x).unwrap().to_bits(), f(*x).to_bits());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn phase_invariants(lambda in 50f64..1e6, a2 in 0.0f64..2.0, w in 0.5f64..5.0, seed in any::<u64>()) {
        let phase = Arc::new(phase_for(lambda, a2, w));
        let pts = random_points(seed, 1000, -1.0, 1.0);
        for &t in &pts {
            let b = basis_eval(&phase, t).unwrap();
            prop_assert!((b.wronskian() - 1.0).abs() <= 1e-11);
            prop_assert!(phase.eval(t).unwrap().alpha_prime > 0.0);
        }
        prop_assert!(phase.alpha_prime().values().iter().all(|&v| v > 0.0));
        for &x in &phase.breakpoints()[1..phase.breakpoints().len() - 1] {
            let j = phase.alpha().locate(x).unwrap();
            let left = *phase.alpha().interval_values(j - 1).last().unwrap();
            let right = phase.alpha().interval_values(j)[0];
            prop_assert!((left - right).abs() <= 1e-12 * (1.0 + left.abs()));
            let left = *phase.alpha_prime().interval_values(j - 1).last().unwrap();
            let right = phase.alpha_prime().interval_values(j)[0];
            prop_assert!((left - right).abs() <= 1e-12 * (1.0 + left.abs()));
        }
    }

    #[test]
    fn superposition(lambda in 50f64..1e5, ya in -2.0f64..2.0, ypa in -2.0f64..2.0, seed in any::<u64>()) {
        let phase = Arc::new(phase_for(lambda, 1.0, 2.0));
        let one = from_initial_data(phase.clone(), -1.0, ya, ypa * lambda).unwrap();
        let two = from_initial_data(phase, -1.0, 2.0 * ya, 2.0 * ypa * lambda).unwrap();
        for t in random_points(seed, 100, -1.0, 1.0) {
            let (y1, _) = one.eval(t).unwrap();
            let (y2, _) = two.eval(t).unwrap();
            prop_assert!((y2 - 2.0 * y1).abs() <= 1e-13 * y2.abs().max(1.0));
        }
    }

    #[test]
    fn cost_does_not_depend_on_lambda(l1 in 1e1f64..1e7, l2 in 1e1f64..1e7) {
        prop_assert_eq!(phase_for(l1, 0.5, 1.0).rhs_evals, phase_for(l2, 0.5, 1.0).rhs_evals);
    }

    #[test]
    fn phase_file_round_trip(lambda in 1f64..1e8) {
        let phase = phase_for(lambda, 0.3, 3.0);
        let bytes = encode_phase(&phase);
        let back = decode_phase(&bytes).unwrap();
        prop_assert_eq!(encode_phase(&back), bytes);
        for t in random_points(lambda.to_bits(), 50, -1.0, 1.0) {
            prop_assert_eq!(phase.eval(t).unwrap(), back.eval(t).unwrap());
        }
    }

    #[test]
    fn constant_q_phase_scales_with_lambda(lambda in 1f64..1e6, t in 0.0f64..2.0) {
        let build = |l: f64| {
            let prob = CoefficientProblem::new(|_| 1.0, l, 0.0, 2.0).unwrap();
            build_phase(&prob, &PhaseOptions::uniform(0.0, 2.0, 5, 15)).unwrap()
        };
        let (p1, p2) = (build(lambda), build(2.0 * lambda));
        let (a1, a2) = (p1.eval(t).unwrap().alpha, p2.eval(t).unwrap().alpha);
        prop_assert!((a2 - 2.0 * a1).abs() <= 1e-13 * a2.abs().max(f64::MIN_POSITIVE));
        prop_assert!((a1 - lambda * t).abs() <= 1e-12 * (lambda * t).max(1.0));
    }
}
