//! Characteristics of the theta construction: trace vorticity field lines,
//! integrate d theta/ds = lap p / |omega| along them, and measure the
//! holonomy obstruction on closed loops.
//!
//!     cargo run --release --example theta_field_lines

use orthoflow::pressure::pressure_from_velocity;
use orthoflow::solver::init_abc;
use orthoflow::spectral::{curl, laplacian};
use orthoflow::theta::{solve_theta_along_line, trace_fieldline, FieldLineParams};
use orthoflow::{Grid, ScalarField, VectorField};

fn main() -> orthoflow::Result<()> {
    let grid = Grid::new(32, 2.0 * std::f64::consts::PI)?;

    // ABC vorticity equals the velocity; its field lines are famously
    // chaotic, so lines typically run to the length cap.
    let state = init_abc(grid, 1.0, 1.0, 1.0);
    let omega = curl(state.velocity())?;
    let p = pressure_from_velocity(state.velocity())?;
    let lap_p = laplacian(&p)?;
    let params = FieldLineParams::for_grid(grid, omega.linf());
    for seed in [[1.0, 2.0, 3.0], [0.5, 0.5, 4.0]] {
        let line = trace_fieldline(&omega, seed, params)?;
        let solved = solve_theta_along_line(&line, &lap_p, &omega)?;
        let theta = solved.theta_samples.as_ref().expect("theta solved");
        println!(
            "ABC line from {:?}: {} samples, arclength {:.2}, ended: {}, theta range [{:.3}, {:.3}]",
            seed,
            line.positions.len(),
            line.arclengths.last().unwrap(),
            line.terminated_reason.as_str(),
            theta.iter().cloned().fold(f64::INFINITY, f64::min),
            theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
    }

    // A planar circulating field produces closed loops; theta generally
    // comes back to a different value (holonomy), the obstruction to a
    // single-valued solution of the transport equation.
    let circ = VectorField::from_fn(grid, |[x, y, _]| [y.sin(), -(x.sin()), 0.0]);
    let loop_params = FieldLineParams {
        ds: grid.spacing() / 8.0,
        max_length: 40.0,
        min_omega: 1e-6,
    };
    let line = trace_fieldline(&circ, [std::f64::consts::PI + 0.5, std::f64::consts::PI, 1.0], loop_params)?;
    let lap_one = ScalarField::constant(grid, 1.0);
    let solved = solve_theta_along_line(&line, &lap_one, &circ)?;
    println!(
        "circulating line: ended {} after arclength {:.3}, holonomy (loop mismatch) = {:?}",
        line.terminated_reason.as_str(),
        line.arclengths.last().unwrap(),
        solved.line_holonomy
    );

    // Characteristics cannot enter the omega set: a line dies at the barrier.
    let dying = VectorField::from_fn(grid, |[_, _, z]| [0.0, 0.0, z.cos()]);
    let barrier_params = FieldLineParams {
        ds: grid.spacing() / 4.0,
        max_length: 20.0,
        min_omega: 1e-2,
    };
    let line = trace_fieldline(&dying, [0.0, 0.0, 0.0], barrier_params)?;
    println!(
        "line toward |omega| -> 0: ended {} at z = {:.4} (barrier at pi/2 = {:.4})",
        line.terminated_reason.as_str(),
        line.positions.last().unwrap()[2],
        std::f64::consts::FRAC_PI_2
    );
    Ok(())
}
