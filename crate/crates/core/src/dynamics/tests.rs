use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::charpoly::{cal_to_charpoly, roots, routh_hurwitz_stable};

/// Roots {0, −1, −2, −3}: x(x+1)(x+2)(x+3) = x⁴ + 6x³ + 11x² + 6x.
fn four_roots() -> CALParameters {
    CALParameters::new(3.0, 1.0, 1.0, 1.0, 0.0).unwrap()
}

fn zero_pot(n: usize) -> PotentialSpec {
    PotentialSpec::Zero { dim: n }
}

fn no_input(m: usize) -> InputSignal {
    InputSignal::Zero { dim: m }
}

fn state1(q: f64, dq: f64, d2q: f64, d3q: f64) -> State {
    State {
        t: 0.0,
        q: vec![q],
        dq: vec![dq],
        d2q: vec![d2q],
        d3q: vec![d3q],
    }
}

fn cauchy1(q: f64, dq: f64, d2q: f64, d3q: f64) -> CauchyData {
    CauchyData::full(vec![q], vec![dq], vec![d2q], vec![d3q])
}

#[test]
fn rhs_examples() {
    let p = CALParameters::new(1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
    let z = rhs(&p, &zero_pot(1), &[0.0], &state1(0.0, 0.0, 0.0, 0.0)).unwrap();
    assert_eq!(z, vec![0.0]);
    // q⁽⁴⁾ = −2θμ q⁽³⁾ / μ
    let v = rhs(&p, &zero_pot(1), &[0.0], &state1(0.0, 0.0, 0.0, 1.0)).unwrap();
    assert_eq!(v, vec![-2.0]);

    let p = four_roots();
    let cp = cal_to_charpoly(&p).unwrap();
    assert_eq!((cp.b, cp.c, cp.d, cp.e), (6.0, 11.0, 6.0, 0.0));
    let v = rhs(&p, &zero_pot(1), &[0.0], &state1(5.0, 0.0, 0.0, 0.0)).unwrap();
    assert_eq!(v, vec![0.0]);

    let degenerate = CALParameters { mu: 0.0, ..p };
    assert_eq!(
        rhs(&degenerate, &zero_pot(1), &[0.0], &state1(0.0, 0.0, 0.0, 0.0)),
        Err(CalError::DegenerateMass)
    );
}

#[test]
fn rhs_matches_monic_recurrence() {
    // q⁽⁴⁾ = −(b q⁽³⁾ + c q̈ + d q̇ + e q) for null input
    let p = CALParameters::new(0.7, 2.0, 0.4, -0.3, 1.5).unwrap();
    let cp = cal_to_charpoly(&p).unwrap();
    let s = state1(0.3, -1.1, 0.8, 2.0);
    let v = rhs(&p, &zero_pot(1), &[0.0], &s).unwrap()[0];
    let expect = -(cp.b * 2.0 + cp.c * 0.8 + cp.d * -1.1 + cp.e * 0.3);
    assert!((v - expect).abs() < 1e-12);
}

#[test]
fn zero_data_stays_zero() {
    let tr = integrate(
        &four_roots(),
        &zero_pot(2),
        &no_input(1),
        &CauchyData::new(vec![0.0; 2], vec![0.0; 2]),
        1.0,
        0.01,
    )
    .unwrap();
    assert_eq!(tr.states.len(), 101);
    assert!(tr.states.iter().all(|s| s.max_abs() == 0.0));
}

#[test]
fn first_sample_is_cauchy_and_grid_is_uniform() {
    let c = cauchy1(0.5, -1.0, 2.0, 0.25);
    let tr = integrate(&four_roots(), &zero_pot(1), &no_input(1), &c, 1.0, 0.03).unwrap();
    assert_eq!(tr.first(), &c.to_state(1).unwrap());
    // 1/0.03 is not an integer; the step is adjusted to T/33
    assert_eq!(tr.states.len(), 34);
    assert!((tr.step() - 1.0 / 33.0).abs() < 1e-15);
    for w in tr.states.windows(2) {
        assert!((w[1].t - w[0].t - tr.step()).abs() < 1e-12);
    }
    assert!((tr.horizon() - 1.0).abs() < 1e-15);
}

#[test]
fn free_dynamics_matches_closed_form() {
    let p = four_roots();
    for c in [cauchy1(1.0, 0.0, 0.0, 0.0), cauchy1(0.0, 1.0, -0.5, 0.3)] {
        let tr = integrate(&p, &zero_pot(1), &no_input(1), &c, 5.0, 1e-3).unwrap();
        let exact = FreeSolution::new(&p, &c).unwrap();
        let err = tr
            .states
            .iter()
            .map(|s| (s.q[0] - exact.eval(s.t).q[0]).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "sup error {err}");
    }
}

fn rk4_sup_error(h: f64) -> f64 {
    let p = four_roots();
    let c = cauchy1(0.0, 1.0, 0.0, 0.0);
    let tr = integrate(&p, &zero_pot(1), &no_input(1), &c, 5.0, h).unwrap();
    // independent oracle: q = 11/6 − 3e^{−t} + 3/2 e^{−2t} − 1/3 e^{−3t}
    let exact = |t: f64| {
        11.0 / 6.0 - 3.0 * (-t).exp() + 1.5 * (-2.0 * t).exp() - (-3.0 * t).exp() / 3.0
    };
    tr.states
        .iter()
        .map(|s| (s.q[0] - exact(s.t)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn rk4_is_fourth_order() {
    let errs: Vec<f64> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&h| rk4_sup_error(h)).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio} from {errs:?}");
    }
}

#[test]
fn unstable_parameters_grow() {
    // roots 1, −2, (−1 ± √0.2)/2
    let p = CALParameters::new(1.0, 1.0, 1.8, 0.0, -0.4).unwrap();
    let rs = roots(&cal_to_charpoly(&p).unwrap());
    assert!((rs.max_real_part() - 1.0).abs() < 1e-12);
    let tr = integrate(&p, &zero_pot(1), &no_input(1), &cauchy1(1.0, 0.0, 0.0, 0.0), 20.0, 1e-2)
        .unwrap();
    // least-squares slope of ln|q| over [10, 20]
    let pts: Vec<(f64, f64)> = tr
        .states
        .iter()
        .filter(|s| s.t >= 10.0)
        .map(|s| (s.t, s.q[0].abs().ln()))
        .collect();
    let m = pts.len() as f64;
    let (st, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mt, my) = (st / m, sy / m);
    let num: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    assert!(num / den >= 0.9, "growth rate {}", num / den);
}

#[test]
fn blow_up_reports_time() {
    let p = CALParameters::new(1.0, 1.0, 1.8, 0.0, -0.4).unwrap();
    let err = integrate(&p, &zero_pot(1), &no_input(1), &cauchy1(1.0, 0.0, 0.0, 0.0), 1000.0, 0.5)
        .unwrap_err();
    match err {
        CalError::NonFinite { t } => assert!(t > 100.0 && t <= 1000.0),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn degenerate_mass_is_rejected() {
    let p = CALParameters::new(1.0, 0.0, 1.0, 1.0, 1.0).unwrap();
    let r = integrate(&p, &zero_pot(1), &no_input(1), &cauchy1(1.0, 0.0, 0.0, 0.0), 1.0, 0.1);
    assert_eq!(r.unwrap_err(), CalError::DegenerateMass);
}

#[test]
fn gradient_flow_limit() {
    let mode = crate::params::gradient_flow_params(1000.0, 1.0).unwrap();
    let tr = integrate_gradient_flow(
        &mode,
        &zero_pot(1),
        &no_input(1),
        &CauchyData::new(vec![1.0], vec![0.0]),
        5.0,
        1e-4,
    )
    .unwrap();
    let err = tr
        .states
        .iter()
        .map(|s| (s.q[0] - (-s.t).exp()).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-2, "distance {err}");
}

#[test]
fn gradient_flow_without_force_settles() {
    let mode = crate::params::gradient_flow_params(2.0, 0.0).unwrap();
    let tr = integrate_gradient_flow(
        &mode,
        &zero_pot(1),
        &no_input(1),
        &CauchyData::new(vec![0.3], vec![1.0]),
        20.0,
        1e-3,
    )
    .unwrap();
    let end = tr.last();
    assert!(end.dq[0].abs() < 1e-12);
    // q̇ = e^{−θt} ⇒ q(∞) = q⁰ + 1/θ
    assert!((end.q[0] - 0.8).abs() < 1e-9);
    assert!(end.d3q.iter().all(|&x| x == 0.0));
}

#[test]
fn pure_gradient_flow_tracks_exact_solution() {
    // q̇ = −q − 2(q − 1) ⇒ q = 2/3 + (q⁰ − 2/3)e^{−3t}
    let track = PotentialSpec::QuadraticTracking { dim: 1, weight: 2.0 };
    let u = InputSignal::constant(vec![1.0]);
    let tr = integrate_pure_gradient_flow(1.0, &track, &u, &[0.0], 3.0, 1e-3).unwrap();
    for s in &tr.states {
        let exact = 2.0 / 3.0 * (1.0 - (-3.0 * s.t).exp());
        assert!((s.q[0] - exact).abs() < 1e-12);
        assert!((s.dq[0] - 2.0 * (-3.0 * s.t).exp()).abs() < 1e-11);
    }
    assert!(integrate_pure_gradient_flow(1.0, &track, &u, &[0.0, 1.0], 3.0, 1e-3).is_err());
}

#[test]
fn euler_examples() {
    let q = euler_step(1.0, &zero_pot(1), &[0.0], &[1.0], 1.0).unwrap();
    assert_eq!(q, vec![0.0]);
    let it = euler_iterates(1.0, &zero_pot(1), &no_input(1), &[1.0], 0.5, 3, 1.0).unwrap();
    assert_eq!(it, vec![vec![1.0], vec![0.5], vec![0.25], vec![0.125]]);
    // q ← q − (q + 2(q − 1)) = 2 − 2q: η = 1 is unstable once k + w > 2
    let track = PotentialSpec::QuadraticTracking { dim: 1, weight: 2.0 };
    let u = InputSignal::constant(vec![1.0]);
    let it = euler_iterates(1.0, &track, &u, &[1.0], 1.0, 4, 1.0).unwrap();
    assert_eq!(it, vec![vec![1.0], vec![0.0], vec![2.0], vec![-2.0], vec![6.0]]);
}

#[test]
fn closed_form_constant_mode() {
    // c = (1, 0, 0, 0) on the zero root ⇔ Cauchy data (1, 0, 0, 0)
    let sol = FreeSolution::new(&four_roots(), &cauchy1(1.0, 0.0, 0.0, 0.0)).unwrap();
    for t in [0.0, 0.5, 3.0] {
        let s = sol.eval(t);
        assert!((s.q[0] - 1.0).abs() < 1e-12);
        assert!(s.derivative_max_abs() < 1e-12);
    }
}

#[test]
fn closed_form_x4_minus_1() {
    let r = [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ];
    let c = cauchy1(1.0, 1.0, 1.0, 1.0);
    let sol = FreeSolution::with_roots(r, &c, 0.0).unwrap();
    assert_eq!(sol.eval(0.0).q, vec![1.0]);
    let s0 = sol.eval(0.0);
    for v in [&s0.dq, &s0.d2q, &s0.d3q] {
        assert!((v[0] - 1.0).abs() < 1e-14);
    }
    // q⁽⁴⁾ = q with all-ones data is eᵗ
    for t in [0.3, 1.0, 2.5] {
        let s = sol.eval(t);
        assert!((s.q[0] - t.exp()).abs() < 1e-12 * t.exp());
        assert!((s.d3q[0] - t.exp()).abs() < 1e-12 * t.exp());
    }
}

#[test]
fn closed_form_rejects_confluent_roots() {
    // (x + 1)⁴: θ = 2, μ = 1, γ = 1, ν = 0, k = 1
    let p = CALParameters::new(2.0, 1.0, 0.0, 1.0, 1.0).unwrap();
    let cp = cal_to_charpoly(&p).unwrap();
    assert_eq!((cp.b, cp.c, cp.d, cp.e), (4.0, 6.0, 4.0, 1.0));
    assert!(matches!(
        closed_form_free(&p, &cauchy1(1.0, 0.0, 0.0, 0.0), 1.0),
        Err(CalError::ConfluentRoots { .. })
    ));
    let r = [Complex64::new(-1.0, 0.0); 4];
    assert!(FreeSolution::with_roots(r, &cauchy1(1.0, 0.0, 0.0, 0.0), 0.0).is_err());
}

#[test]
fn boundary_residual_examples() {
    let p = CALParameters::new(1.0, 1.0, 1.0, 2.0, 0.0).unwrap();
    let zero = boundary_residual_at(&state1(3.0, 0.0, 0.0, 0.0), &p);
    assert_eq!((zero.r1_norm, zero.r2_norm), (0.0, 0.0));

    let r = boundary_residual_at(&state1(0.0, 1.0, -2.0, 0.0), &p);
    assert_eq!(r.r1, vec![0.0]);
    assert_eq!(r.r2, vec![-1.0]);
    assert_eq!(r.r2_norm, 1.0);
    assert_eq!(r.r2_normalized, 1.0 / 3.0);

    let p = CALParameters::new(1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
    let r = boundary_residual_at(&state1(0.0, 1.0, 1.0, 0.0), &p);
    assert_eq!((r.r1[0], r.r2[0]), (1.0, 0.0));
    assert!(r.r1_normalized <= r.r1_norm);
}

fn manual_traj(h: f64, states: Vec<State>, p: CALParameters) -> Trajectory {
    Trajectory {
        states,
        meta: TrajectoryMeta {
            method: "manual".into(),
            step: h,
            params: Some(p),
            schedule_id: None,
            potential_id: "zero".into(),
            input_id: "zero".into(),
        },
    }
}

#[test]
fn simpson_weights_integrate_cubics() {
    for intervals in [1usize, 2, 5, 8] {
        let h = 0.5;
        let w = simpson_weights(intervals, h);
        let t_end = intervals as f64 * h;
        assert!((w.iter().sum::<f64>() - t_end).abs() < 1e-14);
        if intervals % 2 == 0 {
            let integral: f64 = w
                .iter()
                .enumerate()
                .map(|(i, wi)| wi * (i as f64 * h).powi(3))
                .sum();
            assert!((integral - t_end.powi(4) / 4.0).abs() < 1e-12);
        }
    }
}

#[test]
fn action_examples() {
    let p = CALParameters::new(1.0, 1.0, 1.0, 0.0, 2.0).unwrap();
    let h = 0.01;
    let mk = |f: &dyn Fn(f64) -> State| -> Vec<State> {
        (0..=200).map(|i| f(i as f64 * h)).collect()
    };
    let zero = manual_traj(h, mk(&|t| State::zeros(t, 1)), p);
    assert_eq!(action_value(&zero, &p, &zero_pot(1), &no_input(1)).unwrap(), 0.0);

    let c0 = 1.5;
    let constant = manual_traj(
        h,
        mk(&|t| State {
            t,
            ..state1(c0, 0.0, 0.0, 0.0)
        }),
        p,
    );
    let got = action_value(&constant, &p, &zero_pot(1), &no_input(1)).unwrap();
    let exact = p.k * c0 * c0 * ((p.theta * 2.0).exp() - 1.0) / (2.0 * p.theta);
    assert!(((got - exact) / exact).abs() < 1e-8);

    // q(t) = t on [0, 1], θ = 0, ν = 1 → ∫ ½ dt
    let limit = CALParameters {
        theta: 0.0,
        mu: 0.0,
        nu: 1.0,
        gamma: 0.0,
        k: 0.0,
    };
    let line = manual_traj(
        0.1,
        (0..=10)
            .map(|i| {
                let t = i as f64 * 0.1;
                State {
                    t,
                    ..state1(t, 1.0, 0.0, 0.0)
                }
            })
            .collect(),
        limit,
    );
    let got = action_value(&line, &limit, &zero_pot(1), &no_input(1)).unwrap();
    assert!((got - 0.5).abs() < 1e-14);
}

#[test]
fn causality_prefix_is_bit_identical() {
    let pot = PotentialSpec::QuadraticTracking { dim: 2, weight: 1.0 };
    let p = CALParameters::new(1.0, 1.0, 2.0, 0.5, 1.0).unwrap();
    let c = CauchyData::new(vec![0.1, -0.2], vec![0.0, 0.3]);
    let base = InputSignal::PiecewiseConstant {
        breakpoints: vec![1.0],
        values: vec![vec![1.0, 0.0], vec![0.5, -1.0]],
    };
    let changed = InputSignal::PiecewiseConstant {
        breakpoints: vec![1.0, 1.5],
        values: vec![vec![1.0, 0.0], vec![0.5, -1.0], vec![9.0, 9.0]],
    };
    let a = integrate(&p, &pot, &base, &c, 2.0, 0.01).unwrap();
    let b = integrate(&p, &pot, &changed, &c, 2.0, 0.01).unwrap();
    // the step ending at 1.5 already evaluates u(1.5)
    let cut = a.states.iter().position(|s| s.t >= 1.5).unwrap();
    assert_eq!(a.states[..cut], b.states[..cut]);
    assert_ne!(a.states[cut + 1], b.states[cut + 1]);
}

/// Random CAL parameters with μ = 1 whose characteristic roots all lie
/// left of `−margin`.
fn sample_decaying(rng: &mut ChaCha8Rng, margin: f64) -> CALParameters {
    loop {
        let p = CALParameters::new(
            rng.random_range(0.8..4.0),
            1.0,
            rng.random_range(-3.0..3.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(0.0..4.0),
        )
        .unwrap();
        let cp = cal_to_charpoly(&p).unwrap();
        if routh_hurwitz_stable(&cp) && roots(&cp).max_real_part() < -margin {
            return p;
        }
    }
}

#[test]
fn stable_parameters_decay() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..12 {
        let p = sample_decaying(&mut rng, 0.3);
        let c = cauchy1(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let tr = integrate(&p, &zero_pot(1), &no_input(1), &c, 50.0, 1e-2).unwrap();
        let at1 = tr.nearest(1.0).max_abs();
        let at50 = tr.last().max_abs();
        assert!(at50 <= 1e-6 * at1, "{p:?}: {at50} vs {at1}");
    }
}

#[test]
fn action_is_nonnegative_without_potential() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        // μν > γ² keeps the kinetic form positive
        let mu: f64 = rng.random_range(0.5..2.0);
        let nu = rng.random_range(0.5..2.0);
        let gamma = rng.random_range(-0.9..0.9) * (mu * nu).sqrt();
        let p = CALParameters::new(rng.random_range(0.1..2.0), mu, nu, gamma, rng.random_range(0.1..2.0))
            .unwrap();
        let c = cauchy1(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let tr = integrate(&p, &zero_pot(1), &no_input(1), &c, 2.0, 0.01).unwrap();
        let a = action_value(&tr, &p, &zero_pot(1), &no_input(1)).unwrap();
        assert!(a > 1e-10, "{a}");
    }
}

fn oracle_setup() -> (CALParameters, PotentialSpec, InputSignal) {
    (
        CALParameters::new(1.0, 1.0, 2.0, 0.5, 1.0).unwrap(),
        PotentialSpec::QuadraticTracking { dim: 2, weight: 1.0 },
        InputSignal::constant(vec![1.0, -0.5]),
    )
}

#[test]
fn oracle_zero_problem() {
    let p = CALParameters::new(1.0, 1.0, 2.0, 0.5, 1.0).unwrap();
    let sol =
        minimize_discrete_action(&p, &zero_pot(2), &no_input(2), &[0.0; 2], &[0.0; 2], 1.0, 0.05)
            .unwrap();
    assert!(sol.extended.iter().flatten().all(|&x| x == 0.0));
    assert_eq!(sol.action, 0.0);
}

#[test]
fn oracle_meets_left_data_and_right_conditions() {
    let (p, pot, u) = oracle_setup();
    let (q0, q1) = ([0.2, 0.0], [0.5, -1.0]);
    for h in [0.02, 0.01] {
        let sol = minimize_discrete_action(&p, &pot, &u, &q0, &q1, 2.0, h).unwrap();
        assert_eq!(sol.nodes()[0], q0.to_vec());
        let ghost = &sol.extended[0];
        let right = &sol.extended[2];
        for c in 0..2 {
            assert!(((right[c] - ghost[c]) / (2.0 * h) - q1[c]).abs() < 1e-9);
        }
        // the one-sided reconstruction is second order
        let s0 = sol.trajectory.first();
        assert!(s0.dq.iter().zip(&q1).all(|(a, b)| (a - b).abs() < 5.0 * h * h));
        let r = boundary_residual(&sol.trajectory, &p);
        assert!(r.max_normalized() < 10.0 * h, "{r:?}");
    }
}

#[test]
fn oracle_is_a_minimum() {
    let (p, pot, u) = oracle_setup();
    let sol = minimize_discrete_action(&p, &pot, &u, &[0.2, 0.0], &[0.5, -1.0], 2.0, 0.02).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let scale = 10f64.powf(rng.random_range(-4.0..0.0));
        let mut pert = sol.extended.clone();
        for node in pert.iter_mut().skip(2) {
            for x in node.iter_mut() {
                *x += scale * rng.random_range(-1.0..1.0);
            }
        }
        // the ghost follows q₁ through the central derivative constraint
        for c in 0..2 {
            pert[0][c] = sol.extended[0][c] + (pert[2][c] - sol.extended[2][c]);
        }
        let j = discrete_action(&p, &pot, &u, &pert, 2.0).unwrap();
        assert!(j >= sol.action, "{j} < {}", sol.action);
    }
}

fn oracle_ode_gap(h: f64) -> f64 {
    let (p, pot, u) = oracle_setup();
    let sol = minimize_discrete_action(&p, &pot, &u, &[0.2, 0.0], &[0.5, -1.0], 2.0, h).unwrap();
    let s0 = sol.trajectory.first();
    let c = CauchyData::full(s0.q.clone(), vec![0.5, -1.0], s0.d2q.clone(), s0.d3q.clone());
    let ode = integrate(&p, &pot, &u, &c, 2.0, h).unwrap();
    ode.sup_distance_q(&sol.trajectory)
}

#[test]
fn oracle_agrees_with_ode_at_second_order() {
    let gaps: Vec<f64> = [0.04, 0.02, 0.01].iter().map(|&h| oracle_ode_gap(h)).collect();
    for w in gaps.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio} from {gaps:?}");
    }
}

#[test]
fn oracle_rejects_non_quadratic() {
    let p = CALParameters::new(1.0, 1.0, 2.0, 0.5, 1.0).unwrap();
    let pot = PotentialSpec::FeatureDemo {
        input_dim: 1,
        hidden: 1,
        nonlinearity: crate::potential::Nonlinearity::Tanh,
    };
    let n = pot.weight_dim();
    let r = minimize_discrete_action(&p, &pot, &no_input(1), &vec![0.0; n], &vec![0.0; n], 1.0, 0.1);
    assert!(matches!(r, Err(CalError::InvalidArgument(_))));
}

#[test]
fn csv_layout() {
    let tr = integrate(
        &four_roots(),
        &zero_pot(2),
        &no_input(1),
        &CauchyData::new(vec![1.0, 2.0], vec![0.0, 0.0]),
        0.2,
        0.1,
    )
    .unwrap();
    let mut buf = Vec::new();
    write_csv(&tr, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,q_1,q_2,dq_1,dq_2,d2q_1,d2q_2,d3q_1,d3q_2");
    assert_eq!(lines.len(), 4);
    let row: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row, vec![0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let back: Vec<f64> = lines[3].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(back[1], tr.last().q[0]);
}

