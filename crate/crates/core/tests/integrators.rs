use std::f64::consts::PI;

use trigint::experiments::{by_name, exp1, fpu, harmonic, ProblemSpec, PROBLEM_NAMES};
use trigint::filters::{sinc, FilterPair};
use trigint::integrators::{
    alpha_as_trig, integrate, start_step, AlphaScheme, StepPair, TrigIntegrator, TwoStepMethod, Workspace,
};
use trigint::model::{BlockVector, FrequencySystem, OscState, Potential, ZeroPotential};

/// Classical RK4 on `q' = p, p' = -W^2 q - grad U(q)` with `sub` substeps per `h`.
fn rk4_reference(problem: &ProblemSpec, h: f64, steps: usize, sub: usize) -> Vec<Vec<f64>> {
    let w2: Vec<f64> = problem.freq.component_omegas().iter().map(|w| w * w).collect();
    let freq = &problem.freq;
    let pot = problem.potential.as_ref();
    let accel = |q: &[f64]| -> Vec<f64> {
        let qv = BlockVector::from_flat(freq, q.to_vec()).unwrap();
        let g = pot.gradient(&qv).unwrap();
        q.iter().zip(&w2).zip(g.as_slice()).map(|((q, w2), g)| -w2 * q - g).collect()
    };
    let mut q = problem.initial.q.as_slice().to_vec();
    let mut p = problem.initial.p.as_slice().to_vec();
    let dt = h / sub as f64;
    let axpy = |x: &[f64], a: f64, y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(x, y)| x + a * y).collect() };
    let mut out = vec![q.clone()];
    for _ in 0..steps {
        for _ in 0..sub {
            let k1q = p.clone();
            let k1p = accel(&q);
            let k2q = axpy(&p, dt / 2.0, &k1p);
            let k2p = accel(&axpy(&q, dt / 2.0, &k1q));
            let k3q = axpy(&p, dt / 2.0, &k2p);
            let k3p = accel(&axpy(&q, dt / 2.0, &k2q));
            let k4q = axpy(&p, dt, &k3p);
            let k4p = accel(&axpy(&q, dt, &k3q));
            for i in 0..q.len() {
                q[i] += dt / 6.0 * (k1q[i] + 2.0 * k2q[i] + 2.0 * k3q[i] + k4q[i]);
                p[i] += dt / 6.0 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]);
            }
        }
        out.push(q.clone());
    }
    out
}

fn trig_positions(problem: &ProblemSpec, pair: FilterPair, h: f64, steps: usize) -> Vec<Vec<f64>> {
    let integ = TrigIntegrator::new(pair, h, problem.freq.clone()).unwrap();
    let mut out = Vec::new();
    integrate(&integ, problem.potential.as_ref(), &problem.initial, steps, 1, |_, s| out.push(s.q.as_slice().to_vec()))
        .unwrap();
    out
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn exp1_start_step_matches_closed_form_and_fine_reference() {
    let omega = 100.0;
    let xi = 2.0 * PI / 3.0;
    let h = xi / omega;
    let p = exp1(omega).unwrap();
    let integ = TrigIntegrator::new(FilterPair::deuflhard(), h, p.freq.clone()).unwrap();
    let q1 = start_step(&integ, p.potential.as_ref(), &p.initial.q, &p.initial.p).unwrap().as_slice()[0];

    let (q0, p0) = (0.001, 1.0);
    let g = |q: f64| -(3.0 * q * q + 4.0 * q.powi(3));
    let expected = xi.cos() * q0 + h * sinc(xi) * p0 + 0.5 * h * h * sinc(xi) * g(q0);
    assert!((q1 - expected).abs() < 1e-17, "{q1} vs {expected}");

    // The filtered force term differs from the exact Duhamel integral by
    // O(h^2 max|g|) along the first step, where |q| stays below 2/omega.
    let exact = rk4_reference(&p, h, 1, 1000)[1][0];
    let g_max = g(2.0 / omega).abs();
    assert!((q1 - exact).abs() <= h * h * g_max, "{q1} vs {exact}");
}

#[test]
fn fpu_short_run_converges_at_second_order() {
    // ten or more steps to a fixed t_end; the global error must fall by ~4
    // per halving of h
    let omega = 50.0;
    let p = fpu(omega, 3).unwrap();
    let t_end = 0.2;
    let mut errs = Vec::new();
    for n in [10usize, 20, 40] {
        let h = t_end / n as f64;
        let num = trig_positions(&p, FilterPair::deuflhard(), h, n);
        let refp = rk4_reference(&p, h, n, 200);
        errs.push(max_abs_diff(&num[n], &refp[n]));
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.7..2.5).contains(&order), "errors {errs:?}");
    }
}

#[test]
fn linear_systems_are_integrated_exactly() {
    let freq = FrequencySystem::new(vec![1, 2, 1], vec![0.0, 7.0, 31.0]).unwrap();
    let q0 = BlockVector::from_flat(&freq, vec![0.3, 1.0, -0.5, 0.2]).unwrap();
    let p0 = BlockVector::from_flat(&freq, vec![-0.1, 0.4, 2.0, -3.0]).unwrap();
    let state = OscState::new(0.0, q0.clone(), p0.clone()).unwrap();
    let h = 0.013;
    let steps = 1_000_000;
    let integ = TrigIntegrator::new(FilterPair::deuflhard(), h, freq.clone()).unwrap();
    let w = freq.component_omegas();
    let mut worst: f64 = 0.0;
    integrate(&integ, &ZeroPotential, &state, steps, 997, |n, s| {
        let t = n as f64 * h;
        for (i, &w) in w.iter().enumerate() {
            let (a, b) = (q0.as_slice()[i], p0.as_slice()[i]);
            let exact = if w == 0.0 { a + t * b } else { (t * w).cos() * a + (t * w).sin() / w * b };
            worst = worst.max((s.q.as_slice()[i] - exact).abs() / exact.abs().max(1.0));
        }
    })
    .unwrap();
    assert!(worst <= 1e-8, "relative error {worst:e}");
}

#[test]
fn recovered_momentum_matches_exact_derivative() {
    let omega = 40.0;
    let p = harmonic(omega).unwrap();
    for xi in [0.3, 1.0, 2.5] {
        let h = xi / omega;
        let integ = TrigIntegrator::new(FilterPair::deuflhard(), h, p.freq.clone()).unwrap();
        let bound = 1e-10 / sinc(xi).abs();
        integrate(&integ, &ZeroPotential, &p.initial, 5000, 7, |n, s| {
            let t = n as f64 * h;
            let exact = (t * omega).cos() - (t * omega).sin();
            let err = (s.p.as_slice()[0] - exact).abs();
            assert!(err <= bound, "h omega {xi}, step {n}: {err:e} > {bound:e}");
        })
        .unwrap();
    }
}

fn advance_n(
    integ: &TrigIntegrator,
    pot: &dyn Potential,
    mut a: BlockVector,
    mut b: BlockVector,
    n: usize,
) -> (BlockVector, BlockVector) {
    let mut ws = Workspace::new(integ.freq());
    let mut c = BlockVector::zeros(integ.freq());
    for _ in 0..n {
        integ.advance_into(pot, &a, &b, &mut c, &mut ws).unwrap();
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut b, &mut c);
    }
    (a, b)
}

#[test]
fn two_step_map_is_time_reversible() {
    for name in ["exp1", "multifreq", "fpu"] {
        let p = by_name(name, 30.0).unwrap();
        let h = 0.7 / 30.0;
        for pair in [FilterPair::deuflhard(), FilterPair::gautschi_a()] {
            let integ = TrigIntegrator::new(pair, h, p.freq.clone()).unwrap();
            let pot = p.potential.as_ref();
            let q0 = p.initial.q.clone();
            let q1 = start_step(&integ, pot, &q0, &p.initial.p).unwrap();
            let n = 200;
            let (a, b) = advance_n(&integ, pot, q0.clone(), q1.clone(), n);
            let (back_a, back_b) = advance_n(&integ, pot, b, a, n);
            let scale = q0.max_abs().max(q1.max_abs());
            let err =
                max_abs_diff(back_a.as_slice(), q1.as_slice()).max(max_abs_diff(back_b.as_slice(), q0.as_slice()));
            assert!(err <= 1e-9 * scale, "{name}: reversal error {err:e}");
        }
    }
}

#[test]
fn two_step_advance_is_the_documented_recurrence() {
    let p = exp1(10.0).unwrap();
    let h = 0.1;
    let integ = TrigIntegrator::new(FilterPair::gautschi_a(), h, p.freq.clone()).unwrap();
    let q_prev = BlockVector::from_flat(&p.freq, vec![0.02]).unwrap();
    let q_curr = BlockVector::from_flat(&p.freq, vec![0.03]).unwrap();
    let s = StepPair::new(q_prev, q_curr, 1, h);
    let got = trigint::integrators::two_step_advance(&integ, p.potential.as_ref(), &s).unwrap().as_slice()[0];
    let x = 0.03f64;
    let g = -(3.0 * x * x + 4.0 * x.powi(3));
    let psi = sinc(0.5).powi(2);
    let expected = 2.0 * 1f64.cos() * 0.03 - 0.02 + h * h * psi * g;
    assert!((got - expected).abs() < 1e-16);
}

/// Largest position difference between an alpha-family run and its
/// trigonometric rewrite over `steps` steps; also the momentum check at the end.
fn alpha_trig_gap(problem: &ProblemSpec, alpha: f64, h: f64, steps: usize) -> (f64, f64) {
    let scheme = AlphaScheme::new(alpha, h, problem.freq.clone()).unwrap();
    let equiv = alpha_as_trig(&scheme).unwrap();
    let pot = problem.potential.as_ref();
    let init = &problem.initial;
    let mut qa = Vec::new();
    let last_a = integrate(&scheme, pot, init, steps, 1, |_, s| qa.push(s.q.clone())).unwrap();
    let trig_init = OscState::new(init.t, init.q.clone(), equiv.to_trig_momentum(&init.p)).unwrap();
    let mut qt = Vec::new();
    let last_t = integrate(&equiv.integrator, pot, &trig_init, steps, 1, |_, s| qt.push(s.q.clone())).unwrap();
    let dq = qa.iter().zip(&qt).map(|(a, b)| max_abs_diff(a.as_slice(), b.as_slice())).fold(0.0, f64::max);
    let dp = max_abs_diff(last_a.p.as_slice(), equiv.from_trig_momentum(&last_t.p).as_slice());
    (dq, dp)
}

#[test]
fn alpha_family_equals_trigonometric_rewrite() {
    // FPU is chaotic at these parameters: round-off differences between the
    // two formulations grow like exp(0.08 t), so its horizon is shorter.
    for name in PROBLEM_NAMES {
        let omega = 25.0;
        let steps = if name == "fpu" { 1000 } else { 10_000 };
        let p = by_name(name, omega).unwrap();
        for alpha in [0.0, 0.25, 0.5] {
            let (dq, dp) = alpha_trig_gap(&p, alpha, 1.0 / omega, steps);
            assert!(dq <= 1e-10, "{name} alpha {alpha}: position gap {dq:e}");
            assert!(dp <= 1e-8, "{name} alpha {alpha}: momentum gap {dp:e}");
        }
    }
}

#[test]
fn resonant_step_rejects_momentum_recovery() {
    let p = harmonic(10.0).unwrap();
    let integ = TrigIntegrator::new(FilterPair::deuflhard(), PI / 10.0, p.freq.clone()).unwrap();
    let err = integrate(&integ, &ZeroPotential, &p.initial, 3, 1, |_, _| {}).unwrap_err();
    assert!(err.to_string().contains("momentum"), "{err}");
}
