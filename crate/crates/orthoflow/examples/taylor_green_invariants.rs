//! Inviscid Taylor-Green run: kinetic energy and helicity conservation are
//! measured, and so is the sup-norm drift that the extendability claims
//! assert to be zero.
//!
//!     cargo run --release --example taylor_green_invariants

use orthoflow::pressure::bkm_integrand;
use orthoflow::solver::{cfl_dt, init_taylor_green, step, SolverParams};
use orthoflow::spectral::curl;
use orthoflow::Grid;

fn main() -> orthoflow::Result<()> {
    let grid = Grid::new(32, 2.0 * std::f64::consts::PI)?;
    let mut state = init_taylor_green(grid);
    let params = SolverParams {
        cfl_number: 0.5,
        dt_max: 0.02,
        dealias: true,
        t_end: 1.0,
    };

    let energy = |s: &orthoflow::solver::SolverState| 0.5 * s.velocity().magnitude_squared().integral();
    let helicity = |s: &orthoflow::solver::SolverState| -> orthoflow::Result<f64> {
        Ok(s.velocity().dot(&curl(s.velocity())?)?.integral())
    };
    let e0 = energy(&state);
    let h0 = helicity(&state)?;
    let speed0 = state.velocity().linf();
    println!("t = 0: energy {e0:.9}, helicity {h0:.2e}, |u|_inf {speed0:.6}");

    let mut bkm_acc = 0.0;
    let mut prev = bkm_integrand(state.velocity())?.sup_vorticity;
    while state.time() < params.t_end - 1e-12 {
        let dt = cfl_dt(&state, &params).min(params.t_end - state.time());
        state = step(&state, &params, dt)?;
        let cur = bkm_integrand(state.velocity())?.sup_vorticity;
        bkm_acc += dt * (prev + cur) / 2.0;
        prev = cur;
    }

    let e1 = energy(&state);
    let h1 = helicity(&state)?;
    let speed1 = state.velocity().linf();
    println!(
        "t = {:.2}: energy drift {:.2e} (relative), helicity drift {:.2e}",
        state.time(),
        (e1 - e0).abs() / e0,
        (h1 - h0).abs()
    );
    // The analysis claims sup-norm constancy for exact Euler solutions; the
    // desk-scale measurement is published, not assumed.
    println!(
        "sup-norm drift |u(t)|_inf - |u0|_inf = {:+.6e} (claimed 0 for exact solutions)",
        speed1 - speed0
    );
    println!("BKM integral int |omega|_inf dt = {bkm_acc:.6}");
    Ok(())
}
