use std::f64::consts::{FRAC_PI_2, PI};

use brakefall_core::brake::{drop, drop_with, state_mismatch};
use brakefall_core::central::homothetic_collapse_time;
use brakefall_core::*;

fn hooke() -> MassSystem {
    MassSystem::uniform_hooke(vec![1.0; 3], 1.0).unwrap()
}

fn mode() -> Configuration {
    Configuration::from_xy(&[(0.9, 0.1), (-0.4, 0.7), (-0.5, -0.8)]).unwrap().centered(&[1.0; 3])
}

fn figure_start() -> (PhaseState, MassSystem) {
    // figure-eight choreography: no close approaches
    let sys = MassSystem::gravitational(vec![1.0; 3]).unwrap();
    let cfg = Configuration::from_xy(&[(0.97000436, -0.24308753), (-0.97000436, 0.24308753), (0.0, 0.0)]).unwrap();
    let v3 = Vec2::new(-0.93240737, -0.86473146);
    let v = vec![v3 * -0.5, v3 * -0.5, v3];
    (reduce_to_center_of_mass(&PhaseState::new(cfg, v, 0.0).unwrap(), &sys), sys)
}

#[test]
fn hooke_mode_follows_cosine() {
    let e = mode();
    let omega = 6f64.sqrt();
    let traj = drop(&e, &hooke(), 2.0 * PI / omega + 0.1, 1e-14).unwrap();
    let amp = e.moment_of_inertia(&[1.0; 3]).sqrt();
    for s in traj.sample_uniform(500) {
        if s.time > 2.0 * PI / omega {
            break;
        }
        let c = (omega * s.time).cos();
        let err: f64 = s.positions().iter().zip(&e.positions).map(|(p, q)| (*p - *q * c).norm_sq()).sum::<f64>().sqrt();
        assert!(err / amp < 1e-12, "t = {}: {err}", s.time);
    }
    let brakes: Vec<f64> = traj.events_of("Brake").map(|e| e.time).collect();
    assert_eq!(brakes.len(), 3, "{brakes:?}");
    for (k, t) in brakes.iter().enumerate() {
        assert!((t - k as f64 * PI / omega).abs() < 1e-10);
    }
}

#[test]
fn dense_output_is_continuous_across_steps() {
    let (start, sys) = figure_start();
    let traj = integrate(&start, &sys, 5.0, &IntegratorSettings::default(), &EventSpec::none()).unwrap();
    assert!(traj.steps().len() > 10);
    for w in traj.steps().windows(2) {
        assert_eq!(w[0].t_end(), w[1].t0);
        let (a, b) = (w[0].state_at(w[0].dt), w[1].state_at(0.0));
        assert!(state_mismatch(&a, &b, sys.masses()) < 1e-12);
    }
    assert_eq!(traj.t_start(), 0.0);
    assert_eq!(traj.t_end(), 5.0);
    assert!(traj.dense_eval(5.1).is_err());
    assert!(traj.dense_eval(-0.1).is_err());
}

#[test]
fn restart_from_dense_state_agrees() {
    let (start, sys) = figure_start();
    let settings = IntegratorSettings::default();
    let full = integrate(&start, &sys, 4.0, &settings, &EventSpec::none()).unwrap();
    let mid = full.dense_eval(1.7345).unwrap();
    let rest = integrate(&mid, &sys, 4.0, &settings, &EventSpec::none()).unwrap();
    let a = full.dense_eval(4.0).unwrap();
    let b = rest.dense_eval(4.0).unwrap();
    assert!(state_mismatch(&a, &b, sys.masses()) < 1e-10);
}

#[test]
fn energy_and_momenta_are_conserved() {
    let (start, sys) = figure_start();
    let traj = integrate(&start, &sys, 20.0, &IntegratorSettings::default(), &EventSpec::all()).unwrap();
    assert_eq!(traj.status(), Status::Completed);
    let e0 = traj.initial_energy();
    assert!(traj.max_energy_error() < 1e-11 * e0.abs());
    let l0 = conserved_quantities(&start, &sys).unwrap().angular_momentum;
    for s in traj.sample_uniform(200) {
        let c = conserved_quantities(&s, &sys).unwrap();
        assert!(c.linear_momentum.norm() < 1e-12);
        assert!((c.angular_momentum - l0).abs() < 1e-12);
        assert!((c.energy - e0).abs() < 1e-11 * e0.abs());
    }
}

#[test]
fn two_body_free_fall_collision_time() {
    let (m1, m2, r0) = (1.0, 3.0, 2.0);
    let sys = MassSystem::gravitational(vec![m1, m2]).unwrap();
    let cfg = Configuration::from_xy(&[(0.0, 0.0), (r0, 0.0)]).unwrap();
    let traj = drop(&cfg, &sys, 10.0, 1e-14).unwrap();
    let expected = FRAC_PI_2 * (r0.powi(3) / (2.0 * (m1 + m2))).sqrt();
    match traj.status() {
        Status::CollisionStop { pair, time } => {
            assert_eq!(pair, (0, 1));
            assert!(((time - expected) / expected).abs() < 1e-8, "{time} vs {expected}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn equilateral_collapse_matches_homothetic_time() {
    for masses in [vec![1.0; 3], vec![1.0, 2.0, 3.0]] {
        let sys = MassSystem::gravitational(masses.clone()).unwrap();
        let tri = Configuration::equilateral(1.0);
        let traj = drop(&tri, &sys, 5.0, 1e-14).unwrap();
        let tc = homothetic_collapse_time(&tri, &sys).unwrap();
        let Status::CollisionStop { time, .. } = traj.status() else { panic!("{:?}", traj.status()) };
        assert!(((time - tc) / tc).abs() < 1e-8);
        assert_eq!(traj.events_of("TotalCollisionProximity").count(), 1);
        assert!(traj.max_momentum() < 1e-10);
    }
}

#[test]
fn time_reversal_returns_to_start() {
    let (start, sys) = figure_start();
    let settings = IntegratorSettings::default();
    let tau = 6.0;
    let fwd = integrate(&start, &sys, tau, &settings, &EventSpec::none()).unwrap();
    let turned = PhaseState { time: 0.0, ..fwd.dense_eval(tau).unwrap().reversed() };
    let back = integrate(&turned, &sys, tau, &settings, &EventSpec::none()).unwrap();
    let home = back.dense_eval(tau).unwrap().reversed();
    assert!(state_mismatch(&home, &start, sys.masses()) < 1e-10);
}

#[test]
fn hooke_steps_stay_bounded_below() {
    let traj = drop(&mode(), &hooke(), 20.0, 1e-14).unwrap();
    let dts: Vec<f64> = traj.steps()[..traj.steps().len() - 1].iter().map(|s| s.dt).collect();
    let lo = dts.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = dts.iter().cloned().fold(0.0, f64::max);
    // the solution is entire, so nothing forces tiny steps, even through total collision
    assert!(lo > 0.2 * hi, "{lo} {hi}");
}

#[test]
fn final_state_error_shrinks_with_tolerance() {
    let (start, sys) = figure_start();
    let run = |tol: f64| {
        let t = integrate(&start, &sys, 5.0, &IntegratorSettings::with_tol(tol), &EventSpec::none()).unwrap();
        t.dense_eval(5.0).unwrap()
    };
    let reference = run(1e-16);
    let errs: Vec<f64> =
        [1e-6, 1e-8, 1e-10, 1e-12].iter().map(|&t| state_mismatch(&run(t), &reference, sys.masses())).collect();
    for w in errs.windows(2) {
        assert!(w[1] < w[0], "{errs:?}");
    }
}

#[test]
fn events_are_time_ordered_with_correct_values() {
    let sys = MassSystem::gravitational(vec![1.0; 3]).unwrap();
    let cfg = Configuration::from_xy(&[(1.0, 0.0), (-0.6, 0.3), (-0.2, -0.5)]).unwrap();
    let traj = drop(&cfg, &sys, 3.0, 1e-14).unwrap();
    let events = traj.events();
    assert!(!events.is_empty());
    for w in events.windows(2) {
        assert!(w[0].time <= w[1].time);
    }
    for e in events {
        match e.kind {
            EventKind::Syzygy { collinear: false } => {
                assert!(e.state.config.signed_area().unwrap().abs() < 1e-10);
            }
            EventKind::Brake => assert!(e.state.kinetic_energy(sys.masses()) < 1e-12 * traj.initial_energy().abs()),
            _ => {}
        }
    }
}

#[test]
fn locate_event_finds_cosine_zero() {
    let traj = drop(&mode(), &hooke(), 1.0, 1e-14).unwrap();
    let omega = 6f64.sqrt();
    let target = FRAC_PI_2 / omega;
    let step = traj.steps().iter().find(|s| s.t0 <= target && target <= s.t_end()).unwrap();
    let t = locate_event(step, |k| k.positions[0].x).unwrap();
    assert!((t - target).abs() < 1e-12);
    assert!(locate_event(&traj.steps()[0], |_| 1.0).is_none());
}

#[test]
fn invalid_inputs_are_rejected() {
    let sys = hooke();
    let s = PhaseState::at_rest(mode(), 0.0);
    let bad_order = IntegratorSettings { order: 1, ..Default::default() };
    assert_eq!(integrate(&s, &sys, 1.0, &bad_order, &EventSpec::none()).unwrap_err(), Error::InvalidOrder(1));
    assert!(integrate(&s, &sys, 1.0, &IntegratorSettings::with_tol(0.0), &EventSpec::none()).is_err());
    assert!(integrate(&s, &sys, -1.0, &IntegratorSettings::default(), &EventSpec::none()).is_err());
    let two = MassSystem::gravitational(vec![1.0, 1.0]).unwrap();
    assert!(integrate(&s, &two, 1.0, &IntegratorSettings::default(), &EventSpec::none()).is_err());
    let tiny = IntegratorSettings { max_steps: 3, ..Default::default() };
    assert!(matches!(drop_with(&mode(), &sys, 10.0, &tiny, &EventSpec::none()), Err(Error::IntegrationStopped { .. })));
}
