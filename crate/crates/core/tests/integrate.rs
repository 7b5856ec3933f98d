use std::f64::consts::PI;

use approx::assert_relative_eq;
use cnls_lab::cnls::{effective_coefficient, BoundaryCondition, Dimension, EquationSpec, PSI_PLUS};
use cnls_lab::integrate::{dense_eval, integrate, IntegratorConfig, SolutionTrace, Termination};
use rand::{rngs::StdRng, Rng, SeedableRng};

const LEVELS: [f64; 3] = [-PSI_PLUS, 0.0, PSI_PLUS];

fn solve(spec: &EquationSpec, psi0: f64, cfg: &IntegratorConfig) -> SolutionTrace {
    let bc = BoundaryCondition::new(spec.dimension, psi0, 0.0).unwrap();
    integrate(spec, &bc, cfg, &LEVELS).unwrap()
}

fn planar_cases() -> Vec<(EquationSpec, f64)> {
    let rep = EquationSpec::repulsive(Dimension::Two);
    let att = EquationSpec::attractive(Dimension::Two);
    vec![
        (rep.clone(), 0.7),
        (att.clone(), 0.65),
        (att.clone(), 0.75),
        (att.clone(), 1.0),
        (att.clone(), 3.0),
        (att, 5.0),
    ]
}

/// `|ψ'' + (N-1)/x ψ' + c ψ|` relative to the local scale, the largest of
/// `|ψ|`, `|ψ'|` and the three term sizes. `ψ''` is a central difference of
/// the dense `ψ'`.
fn relative_residual(trace: &SolutionTrace, spec: &EquationSpec, x: f64) -> f64 {
    let h = 1e-5;
    let (psi, dpsi) = dense_eval(trace, x).unwrap();
    let ddpsi = (dense_eval(trace, x + h).unwrap().1 - dense_eval(trace, x - h).unwrap().1) / (2.0 * h);
    let damping = spec.dimension.inertia() / x * dpsi;
    let restoring = effective_coefficient(spec, psi, x).unwrap() * psi;
    let scale = [psi, dpsi, ddpsi, damping, restoring]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    (ddpsi + damping + restoring).abs() / scale.max(1e-300)
}

#[test]
fn dense_output_satisfies_the_equation() {
    let cfg = IntegratorConfig::default();
    let mut rng = StdRng::seed_from_u64(7);
    for (spec, psi0) in planar_cases() {
        let t = solve(&spec, psi0, &cfg);
        let (lo, hi) = t.x_range();
        let (worst, at) = (0..100)
            .map(|_| rng.gen_range(lo + 1e-3..hi - 1e-3))
            .map(|x| (relative_residual(&t, &spec, x), x))
            .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
        assert!(
            worst <= 100.0 * cfg.rel_tol,
            "psi0 = {psi0}: residual {worst:e} at x = {at}"
        );
    }
}

#[test]
fn blow_up_only_for_the_divergent_case() {
    let cfg = IntegratorConfig::default();
    let rep = EquationSpec::repulsive(Dimension::Two);
    let t = solve(&rep, 0.71, &cfg);
    assert_eq!(t.termination(), Termination::BlowUp);
    assert!(t.last().psi.abs() >= t.blowup_threshold());
    assert!(t.x_range().1 < cfg.x_max);
    for (spec, psi0) in planar_cases() {
        let t = solve(&spec, psi0, &cfg);
        assert_eq!(t.termination(), Termination::ReachedXMax, "psi0 = {psi0}");
        assert!(t.last().psi.abs() < t.blowup_threshold());
    }
}

#[test]
fn tightening_tolerances_moves_the_end_point_less_than_the_loose_estimate() {
    let loose = IntegratorConfig::default();
    let tight = loose.clone().with_tolerances(loose.rel_tol * 1e-2, loose.abs_tol * 1e-2);
    for (spec, psi0) in planar_cases() {
        let a = solve(&spec, psi0, &loose);
        let b = solve(&spec, psi0, &tight);
        // Local tolerance accumulated over the accepted steps of the loose run.
        let steps = a.samples().len() as f64;
        let scale = a.samples().iter().map(|s| s.psi.abs()).fold(0.0, f64::max);
        let estimate = steps * (loose.abs_tol + loose.rel_tol * scale);
        let diff = (a.last().psi - b.last().psi).abs();
        assert!(diff < estimate, "psi0 = {psi0}: {diff:e} vs {estimate:e}");
    }
}

#[test]
fn traces_are_bit_reproducible() {
    let cfg = IntegratorConfig::default();
    for (spec, psi0) in planar_cases() {
        let a = solve(&spec, psi0, &cfg);
        let b = solve(&spec, psi0, &cfg);
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
    }
}

#[test]
fn samples_are_ordered_and_start_at_epsilon() {
    let cfg = IntegratorConfig::default();
    for (spec, psi0) in planar_cases() {
        let t = solve(&spec, psi0, &cfg);
        assert_eq!(t.samples()[0].x, cfg.epsilon_start);
        assert!(t.samples().windows(2).all(|w| w[0].x < w[1].x));
        assert!(t.events().windows(2).all(|w| w[0].x <= w[1].x));
    }
}

#[test]
fn recorded_crossings_change_sign() {
    let cfg = IntegratorConfig::default();
    for (spec, psi0) in planar_cases() {
        let t = solve(&spec, psi0, &cfg);
        for level in LEVELS {
            for e in t.crossings(level) {
                let d = 1e-7;
                let before = dense_eval(&t, e.x - d).unwrap().0 - level;
                let after = dense_eval(&t, e.x + d).unwrap().0 - level;
                assert!(before * after < 0.0, "level {level} at x = {}", e.x);
            }
        }
    }
}

#[test]
fn start_offset_does_not_matter() {
    for spec in [
        EquationSpec::repulsive(Dimension::Two),
        EquationSpec::attractive(Dimension::Two),
        EquationSpec::repulsive(Dimension::Three),
        EquationSpec::attractive(Dimension::Three),
    ] {
        let at = |eps: f64| {
            let cfg = IntegratorConfig {
                epsilon_start: eps,
                ..IntegratorConfig::default()
            }
            .with_x_max(1.0);
            solve(&spec, 0.7, &cfg).last().psi
        };
        let cfg = IntegratorConfig::default();
        assert!((at(1e-4) - at(1e-3)).abs() < 10.0 * cfg.rel_tol, "{spec:?}");
    }
}

#[test]
fn kink_value_at_five() {
    let one = Dimension::One;
    let bc = BoundaryCondition::new(one, 0.0, 0.5).unwrap();
    let t = integrate(&EquationSpec::repulsive(one), &bc, &IntegratorConfig::default(), &[]).unwrap();
    let exact = (5.0 / 2f64.sqrt()).tanh() / 2f64.sqrt();
    assert_relative_eq!(exact, 0.7059066725391843, epsilon = 1e-15);
    let (psi, _) = dense_eval(&t, 5.0).unwrap();
    assert!((psi - exact).abs() < 1e-6, "{psi} vs {exact}");
}

#[test]
fn constant_trace_is_flat_everywhere() {
    let t = solve(&EquationSpec::attractive(Dimension::Two), PSI_PLUS, &IntegratorConfig::default());
    for x in [1e-6, 0.5, 7.25, 31.0, 60.0] {
        assert_eq!(dense_eval(&t, x).unwrap(), (PSI_PLUS, 0.0));
    }
}

#[test]
fn sine_surrogate_crossings_include_the_origin_when_sampled() {
    // The origin is a zero of sin x; starting just left of it, all
    // 1 + ⌊x_max/π⌋ zeros on [0, x_max] are found.
    for x_max in [10.0, 33.0, 60.0] {
        let n = (x_max / 0.05f64).round() as usize;
        let xs: Vec<f64> = (0..=n).map(|i| -1e-3 + (x_max + 1e-3) * i as f64 / n as f64).collect();
        let t = SolutionTrace::from_fn(&xs, 0.0, &[0.0], 1e-3, |x| [x.sin(), x.cos(), -x.sin()]).unwrap();
        let zeros = t.crossings(0.0);
        assert_eq!(zeros.len(), 1 + (x_max / PI).floor() as usize, "x_max = {x_max}");
        for (k, e) in zeros.iter().enumerate() {
            assert!((e.x - k as f64 * PI).abs() < 1e-10);
        }
    }
}
