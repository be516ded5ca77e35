use bvpmmo::integrate::{integrate, IntegratorConfig, State, Trajectory};
use bvpmmo::models::{
    charts::rescaled_to_standard_time, fields::rhs_standard, from_rescaled, to_rescaled,
    to_standard, AutonomousBvp, ForcedBvp, OriginalState, ParameterSet, RescaledForm,
    RescaledParams, StandardForm, StandardState,
};

fn fig1() -> ParameterSet {
    ParameterSet::new(0.1, 0.1, 0.9, 0.205, 0.1).unwrap()
}

fn run<F: bvpmmo::integrate::VectorField<N>, const N: usize>(
    f: &F,
    y0: State<N>,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Trajectory<N> {
    integrate(f, y0, (0.0, t1), cfg, &[]).unwrap()
}

#[test]
fn forced_autonomous_and_standard_agree() {
    let p = fig1();
    let tol = 1e-10;
    let cfg = IntegratorConfig::with_tolerances(tol, tol);
    let t1 = 40.0;
    let (x0, y0) = (-1.0, 0.3);
    let forced = run(&ForcedBvp(p), State::<2>::new(x0, y0), t1, &cfg);
    let auto = run(
        &AutonomousBvp(p),
        OriginalState::at_phase(x0, y0, 0.0).to_vector(),
        t1,
        &cfg,
    );
    let s0 = to_standard(&OriginalState::at_phase(x0, y0, 0.0), &p).unwrap();
    let std = run(&StandardForm(p), s0.to_vector(), t1, &cfg);

    // compare away from fast jumps, where x is insensitive to timing errors
    let mut compared = 0;
    for k in 1..=400 {
        let t = t1 * k as f64 / 400.0;
        let a = auto.state_at(t).unwrap();
        if (a[1] + a[0] - a[0].powi(3)).abs() / p.epsilon() > 1.0 {
            continue;
        }
        let xf = forced.state_at(t).unwrap()[0];
        let xs = bvpmmo::SQRT_3 / 3.0 - std.state_at(t).unwrap()[0];
        assert!(
            (xf - a[0]).abs() < 10.0 * tol,
            "t={t}: forced {xf} vs autonomous {}",
            a[0]
        );
        assert!(
            (xs - a[0]).abs() < 10.0 * tol,
            "t={t}: standard {xs} vs autonomous {}",
            a[0]
        );
        compared += 1;
    }
    assert!(compared > 100);
}

#[test]
fn rescaled_flow_is_conjugate() {
    let p = ParameterSet::new(0.01, 0.05, 0.4, 0.0, 0.02)
        .unwrap()
        .with_mu(0.005)
        .unwrap();
    let rp = RescaledParams::from_parameters(&p);
    let tol = 1e-11;
    let cfg = IntegratorConfig::with_tolerances(tol, tol);
    // near the critical curve Y = √3 X² − X³ of the fold chart
    let x = -0.05;
    let s0 = StandardState {
        x,
        y: bvpmmo::SQRT_3 * x * x + 0.001,
        p: 0.0,
        z: p.mu() + p.b1(),
    };
    let t1 = 0.5;
    let std = run(&StandardForm(p), s0.to_vector(), t1, &cfg);
    let tau1 = t1 / p.epsilon().sqrt();
    let resc = run(
        &RescaledForm(rp),
        to_rescaled(&s0, p.epsilon()).to_vector(),
        tau1,
        &cfg,
    );
    for k in 1..=50 {
        let tau = tau1 * k as f64 / 50.0;
        let r = bvpmmo::models::RescaledState::from_vector(&resc.state_at(tau).unwrap());
        let back = from_rescaled(&r, p.epsilon()).to_vector();
        let s = std
            .state_at(rescaled_to_standard_time(tau, p.epsilon()))
            .unwrap();
        let err = (back - s).amax();
        assert!(err < 1e-8, "tau={tau}: {err:e}");
    }
}

#[test]
fn circle_invariant_along_long_runs() {
    let p = fig1();
    let tol = 1e-8;
    let cfg = IntegratorConfig::with_tolerances(tol, tol);
    let auto = run(
        &AutonomousBvp(p),
        OriginalState::at_phase(-1.0, 0.0, 0.3).to_vector(),
        1000.0,
        &cfg,
    );
    let worst = auto
        .states
        .iter()
        .map(|s| (s[2] * s[2] + s[3] * s[3] - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(worst < 100.0 * tol, "original chart drift {worst:e}");

    let s0 = to_standard(&OriginalState::at_phase(-1.0, 0.0, 0.3), &p).unwrap();
    let std = run(&StandardForm(p), s0.to_vector(), 1000.0, &cfg);
    let worst = std
        .states
        .iter()
        .map(|s| ((s[3] - p.mu()).powi(2) + s[2] * s[2] - p.b1() * p.b1()).abs())
        .fold(0.0, f64::max);
    assert!(worst < 100.0 * tol, "standard chart drift {worst:e}");
}

#[test]
fn standard_field_has_no_zeros_on_the_circle() {
    for (b1, mu) in [(0.1, 0.0), (0.01, 0.02), (0.2, -0.15)] {
        let p = ParameterSet::new(0.1, 0.1, 0.9, 0.2, b1)
            .unwrap()
            .with_mu(mu)
            .unwrap();
        let mut min = f64::INFINITY;
        for i in 0..720 {
            let th = std::f64::consts::TAU * i as f64 / 720.0;
            let (pp, z) = (b1 * th.cos(), mu + b1 * th.sin());
            for j in 0..=100 {
                let x = -0.8 + 3.0 * j as f64 / 100.0;
                let y = bvpmmo::SQRT_3 * x * x - x * x * x;
                let n = rhs_standard(&State::<4>::new(x, y, pp, z), &p).norm();
                min = min.min(n);
            }
        }
        assert!(min >= 0.99 * p.omega() * b1, "B1={b1}, mu={mu}: min {min}");
    }
}
