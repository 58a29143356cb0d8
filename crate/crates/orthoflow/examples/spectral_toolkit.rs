//! Tour of the periodic-box field algebra: transforms, derivatives, the
//! Leray projection and Poisson inversion.
//!
//!     cargo run --release --example spectral_toolkit

use orthoflow::spectral::{divergence, gradient, laplacian, leray_project, solve_poisson};
use orthoflow::{Grid, ScalarField, VectorField};

fn main() -> orthoflow::Result<()> {
    let grid = Grid::new(32, 2.0 * std::f64::consts::PI)?;
    println!("grid: {}^3 nodes, spacing {:.4}", grid.n(), grid.spacing());
    println!("frequency slots (n=8 view): {:?}", Grid::new(8, grid.length())?.frequencies());

    // Spectral derivatives are exact to roundoff on band-limited fields.
    let f = ScalarField::from_fn(grid, |[x, y, _]| x.sin() + (2.0 * y).cos());
    let grad = gradient(&f)?;
    let expect = ScalarField::from_fn(grid, |[x, _, _]| x.cos());
    println!(
        "d/dx(sin x + cos 2y) vs cos x: max deviation {:.2e}",
        grad.x().sub(&expect)?.linf()
    );

    let lap = laplacian(&f)?;
    let div_grad = divergence(&grad)?;
    println!(
        "laplacian vs div(grad): max deviation {:.2e}",
        lap.sub(&div_grad)?.linf()
    );

    // The Leray projection removes gradient parts and fixes solenoidal ones.
    let solenoidal = VectorField::from_fn(grid, |[x, y, z]| {
        [z.sin() + y.cos(), x.sin() + z.cos(), y.sin() + x.cos()]
    });
    let mixed = solenoidal.add(&gradient(&f)?)?;
    let projected = leray_project(&mixed)?;
    println!(
        "projection recovers the solenoidal part: max deviation {:.2e}",
        projected.sub(&solenoidal)?.linf()
    );
    println!(
        "divergence after projection: {:.2e}",
        divergence(&projected)?.linf()
    );

    // Poisson inversion with the zero-mean torus normalization.
    let rhs = ScalarField::from_fn(grid, |[_, y, _]| (2.0 * y).cos());
    let p = solve_poisson(&rhs)?;
    let expect = ScalarField::from_fn(grid, |[_, y, _]| (2.0 * y).cos() / 4.0);
    println!(
        "-lap p = cos 2y gives p = cos(2y)/4: max deviation {:.2e}",
        p.sub(&expect)?.linf()
    );

    // A constant right-hand side is not solvable on the torus.
    match solve_poisson(&ScalarField::constant(grid, 1.0)) {
        Err(e) => println!("constant rhs rejected as expected: {e}"),
        Ok(_) => println!("unexpected: constant rhs accepted"),
    }
    Ok(())
}
