//! Viscous decay of an ABC Beltrami field: the exact solution
//! u(t) = exp(-mu t) u0 validates the projection, the nonlinear term and the
//! viscous integrating factor at once.
//!
//!     cargo run --release --example beltrami_decay

use orthoflow::solver::{cfl_dt, init_abc, step, SolverParams};
use orthoflow::Grid;

fn main() -> orthoflow::Result<()> {
    let grid = Grid::new(32, 2.0 * std::f64::consts::PI)?;
    let mu = 0.01;
    let t_end = 0.5;
    let mut state = init_abc(grid, 1.0, 1.0, 1.0).with_viscosity(mu)?;
    let u0 = state.velocity().clone();
    println!(
        "ABC(1,1,1) at n = {}: |u0|_inf = {:.12} (sqrt 6 = {:.12})",
        grid.n(),
        u0.linf(),
        6.0_f64.sqrt()
    );

    let params = SolverParams {
        cfl_number: 0.5,
        dt_max: 0.05,
        dealias: true,
        t_end,
    };
    while state.time() < t_end - 1e-12 {
        let dt = cfl_dt(&state, &params).min(t_end - state.time());
        state = step(&state, &params, dt)?;
    }

    let decay = (-mu * state.time()).exp();
    let err = state.velocity().sub(&u0.scaled(decay))?.linf();
    println!(
        "after {} steps to t = {:.3}: |u - exp(-mu t) u0|_inf = {:.3e}",
        state.step_count(),
        state.time(),
        err
    );
    println!(
        "measured sup speed {:.12} vs exact {:.12}",
        state.velocity().linf(),
        decay * 6.0_f64.sqrt()
    );
    Ok(())
}
