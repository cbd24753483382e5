//! Stage maps of the Magnus approximations against an adaptive Dormand–Prince integration of
//! the classical oscillator `x'' = −ω²(t)x`.

use hermite_fourier::factorization::{classical_map, Classical2x2};
use hermite_fourier::magnus::stage_kdk;
use hermite_fourier::order::{fit_order, ErrorSample};
use hermite_fourier::{Grid, MagnusOrder, Problem, TimeFunction};
use ode_solvers::{Dop853, OutputType, System, Vector5};

struct Oscillator(TimeFunction);

// Time is carried as y[4]; the solver's own time argument is not used.
impl System<f64, Vector5<f64>> for Oscillator {
    fn system(&self, _t: f64, y: &Vector5<f64>, dy: &mut Vector5<f64>) {
        let w2 = self.0.eval(y[4]);
        dy[0] = y[1];
        dy[1] = -w2 * y[0];
        dy[2] = y[3];
        dy[3] = -w2 * y[2];
        dy[4] = 1.0;
    }
}

fn oracle(f: &TimeFunction, t0: f64, h: f64) -> Classical2x2 {
    let y0 = Vector5::new(1.0, 0.0, 0.0, 1.0, t0);
    let mut solver = Dop853::from_param(
        Oscillator(f.clone()),
        0.0,
        h,
        h,
        y0,
        1e-14,
        1e-15,
        0.9,
        0.0,
        0.333,
        6.0,
        0.002,
        1e-3,
        1_000_000,
        u32::MAX,
        OutputType::Sparse,
    );
    solver.integrate().expect("oracle integration");
    let y = solver.y_out().last().unwrap();
    Classical2x2([[y[0], y[2]], [y[1], y[3]]])
}

fn cosine() -> TimeFunction {
    TimeFunction::Cosine {
        amplitude: 4.0,
        modulation: 0.1,
        frequency: 0.5,
    }
}

fn problem(f: TimeFunction) -> Problem {
    Problem::harmonic(Grid::new(-1.0, 1.0, 4).unwrap().into()).with_omega_sq(f)
}

fn local_errors(order: MagnusOrder) -> Vec<ErrorSample> {
    let f = cosine();
    let p = problem(f.clone());
    (0..8)
        .map(|k| {
            let h = 0.5 * 2f64.powf(-0.5 * k as f64);
            let stage = stage_kdk(&p, 1.0, h, order).unwrap();
            ErrorSample {
                h,
                error: classical_map(&stage).max_abs_diff(&oracle(&f, 1.0, h)),
            }
        })
        .collect()
}

#[test]
fn oracle_reproduces_constant_rotation() {
    let m = oracle(&TimeFunction::Constant(4.0), 0.7, 0.5);
    assert!(m.max_abs_diff(&Classical2x2::oscillator(0.5, 1.0, 2.0)) < 1e-13);
}

#[test]
fn magnus4_local_order_is_five() {
    let fit = fit_order(&local_errors(MagnusOrder::Magnus4), 1e-12).unwrap();
    assert!((fit.slope - 5.0).abs() <= 0.2, "slope {}", fit.slope);
}

#[test]
fn magnus6_local_order_is_seven() {
    let fit = fit_order(&local_errors(MagnusOrder::Magnus6), 1e-12).unwrap();
    assert!((fit.slope - 7.0).abs() <= 0.3, "slope {}", fit.slope);
    assert!(fit.used.len() >= 4);
}

#[test]
fn constant_frequency_stage_matches_oracle() {
    let p = problem(TimeFunction::Constant(2.25));
    for order in [MagnusOrder::Magnus4, MagnusOrder::Magnus6] {
        let stage = stage_kdk(&p, 0.3, 0.8, order).unwrap();
        let err = classical_map(&stage).max_abs_diff(&oracle(&TimeFunction::Constant(2.25), 0.3, 0.8));
        assert!(err < 1e-13, "{order:?}: {err:e}");
    }
}
