//! The theta construction realized two ways: integration of
//! `d theta/ds = lap p / |omega|` along vorticity field lines, and a global
//! regularized least-squares solve of `grad theta . omega = lap p`.
//! Both publish residuals; neither assumes the construction succeeds.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::interp::FieldEvaluator;
use crate::spectral::{curl_spectral, divergence_spectral, gradient, gradient_spectral};

/// Step, length cap and support threshold for field-line tracing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldLineParams {
    pub ds: f64,
    pub max_length: f64,
    pub min_omega: f64,
}

impl FieldLineParams {
    /// Defaults for a grid: quarter-cell step, a few box lengths of arc,
    /// support threshold 1e-6 of the vorticity sup.
    pub fn for_grid(grid: Grid, omega_sup: f64) -> Self {
        Self {
            ds: grid.spacing() / 4.0,
            max_length: 4.0 * grid.length(),
            min_omega: 1e-6 * omega_sup,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    MaxLength,
    LeftSupport,
    ClosedLoopDetected,
}

impl TerminationReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            TerminationReason::MaxLength => "max_length",
            TerminationReason::LeftSupport => "left_support",
            TerminationReason::ClosedLoopDetected => "closed_loop_detected",
        }
    }
}

/// A traced vorticity field line with optional theta samples.
#[derive(Debug, Clone)]
pub struct FieldLine {
    pub seed: [f64; 3],
    pub arclengths: Vec<f64>,
    pub positions: Vec<[f64; 3]>,
    pub omega_magnitudes: Vec<f64>,
    pub theta_samples: Option<Vec<f64>>,
    pub lap_p_samples: Option<Vec<f64>>,
    pub terminated_reason: TerminationReason,
    /// `theta(end) - theta(0)` over a detected closed loop; the obstruction
    /// to a single-valued theta.
    pub line_holonomy: Option<f64>,
}

fn periodic_distance(grid: Grid, a: [f64; 3], b: [f64; 3]) -> f64 {
    let l = grid.length();
    let mut sq = 0.0;
    for c in 0..3 {
        let mut d = (a[c] - b[c]).rem_euclid(l);
        if d > l / 2.0 {
            d = l - d;
        }
        sq += d * d;
    }
    sq.sqrt()
}

/// Integrate `dx/ds = omega/|omega|` by RK4 from a seed.
///
/// Terminates at `max_length`, when the interpolated `|omega|` drops to
/// `min_omega` (the omega-set barrier, reason `LeftSupport`), or on return
/// to within half a cell of the seed with aligned tangent
/// (`ClosedLoopDetected`).
pub fn trace_fieldline(
    omega: &VectorField,
    seed: [f64; 3],
    params: FieldLineParams,
) -> Result<FieldLine> {
    let grid = omega.grid();
    let eval = FieldEvaluator::vector(omega)?;
    let mag = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();

    let seed = grid.wrap_point(seed);
    let w0 = eval.eval_all(seed);
    let m0 = mag(w0);
    if m0 <= params.min_omega {
        return Err(Error::SeedBelowThreshold {
            omega_mag: m0,
            min_omega: params.min_omega,
        });
    }
    let seed_tangent = [w0[0] / m0, w0[1] / m0, w0[2] / m0];

    let unit = |p: [f64; 3]| -> Option<[f64; 3]> {
        let w = eval.eval_all(p);
        let m = mag(w);
        if m <= params.min_omega {
            None
        } else {
            Some([w[0] / m, w[1] / m, w[2] / m])
        }
    };

    let ds = params.ds;
    let mut line = FieldLine {
        seed,
        arclengths: vec![0.0],
        positions: vec![seed],
        omega_magnitudes: vec![m0],
        theta_samples: None,
        lap_p_samples: None,
        terminated_reason: TerminationReason::MaxLength,
        line_holonomy: None,
    };

    let loop_guard = (4.0 * ds).max(grid.spacing());
    let mut x = seed;
    let mut s = 0.0;
    while s + ds <= params.max_length + 1e-12 {
        let step = (|| -> Option<[f64; 3]> {
            let k1 = unit(x)?;
            let k2 = unit([
                x[0] + 0.5 * ds * k1[0],
                x[1] + 0.5 * ds * k1[1],
                x[2] + 0.5 * ds * k1[2],
            ])?;
            let k3 = unit([
                x[0] + 0.5 * ds * k2[0],
                x[1] + 0.5 * ds * k2[1],
                x[2] + 0.5 * ds * k2[2],
            ])?;
            let k4 = unit([x[0] + ds * k3[0], x[1] + ds * k3[1], x[2] + ds * k3[2]])?;
            Some([
                x[0] + ds / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                x[1] + ds / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
                x[2] + ds / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
            ])
        })();
        let Some(next) = step else {
            line.terminated_reason = TerminationReason::LeftSupport;
            break;
        };
        let next = grid.wrap_point(next);
        let w = eval.eval_all(next);
        let m = mag(w);
        if m <= params.min_omega {
            line.terminated_reason = TerminationReason::LeftSupport;
            break;
        }
        s += ds;
        line.arclengths.push(s);
        line.positions.push(next);
        line.omega_magnitudes.push(m);
        x = next;

        if s >= loop_guard && periodic_distance(grid, next, seed) <= grid.spacing() / 2.0 {
            let t = [w[0] / m, w[1] / m, w[2] / m];
            let align =
                t[0] * seed_tangent[0] + t[1] * seed_tangent[1] + t[2] * seed_tangent[2];
            if align >= 0.98 {
                line.terminated_reason = TerminationReason::ClosedLoopDetected;
                break;
            }
        }
    }
    Ok(line)
}

/// Cumulative 4th-order quadrature over uniformly spaced samples.
/// Falls back to the trapezoid rule when fewer than four samples exist.
fn cumulative_quadrature(ds: f64, g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n < 4 {
        for k in 1..n {
            out[k] = out[k - 1] + ds * (g[k - 1] + g[k]) / 2.0;
        }
        return out;
    }
    // First interval: cubic through g0..g3 integrated over [s0, s1].
    out[1] = ds / 24.0 * (9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3]);
    // Second interval: same cubic over the middle panel.
    out[2] = out[1] + ds / 24.0 * (-g[0] + 13.0 * g[1] + 13.0 * g[2] - g[3]);
    for k in 3..n {
        // Adams-Moulton 3-step panel.
        out[k] = out[k - 1]
            + ds / 24.0 * (g[k - 3] - 5.0 * g[k - 2] + 19.0 * g[k - 1] + 9.0 * g[k]);
    }
    out
}

/// Integrate `d theta/ds = lap p / |omega|` along a traced line with
/// `theta(0) = 0`. Fills `theta_samples` and, for closed loops, the holonomy.
pub fn solve_theta_along_line(
    line: &FieldLine,
    laplacian_p: &ScalarField,
    omega: &VectorField,
) -> Result<FieldLine> {
    if laplacian_p.grid() != omega.grid() {
        return Err(Error::GridMismatch);
    }
    let lap_eval = FieldEvaluator::scalar(laplacian_p)?;
    let omega_eval = FieldEvaluator::vector(omega)?;
    let floor = 1e-12 * omega.linf().max(f64::MIN_POSITIVE);

    let mut integrand = Vec::with_capacity(line.positions.len());
    let mut lap_vals = Vec::with_capacity(line.positions.len());
    for p in &line.positions {
        let w = omega_eval.eval_all(*p);
        let m = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        if m <= floor {
            return Err(Error::DegenerateCharacteristic(m));
        }
        let lp = lap_eval.eval(*p);
        lap_vals.push(lp);
        integrand.push(lp / m);
    }
    let ds = if line.arclengths.len() >= 2 {
        line.arclengths[1] - line.arclengths[0]
    } else {
        0.0
    };
    let theta = cumulative_quadrature(ds, &integrand);

    let mut out = line.clone();
    out.line_holonomy = match line.terminated_reason {
        TerminationReason::ClosedLoopDetected => theta.last().map(|&t| t - theta[0]),
        _ => None,
    };
    out.theta_samples = Some(theta);
    out.lap_p_samples = Some(lap_vals);
    Ok(out)
}

/// Outcome of the global least-squares theta solve.
#[derive(Debug, Clone)]
pub struct ThetaSolution {
    pub theta: ScalarField,
    /// `|grad theta . omega - lap p|_2 / |lap p|_2`.
    pub transport_residual_rel: f64,
    /// `|grad p - u x grad theta|_2 / |grad p|_2`; absent until a
    /// `reconstruct_pressure_gradient` pass supplies it.
    pub reconstruction_residual_rel: Option<f64>,
    pub iterations: usize,
    pub lambda_reg: f64,
    pub converged: bool,
}

/// Default regularization weight `1e-6 |omega|_inf^2`.
pub fn default_lambda(omega: &VectorField) -> f64 {
    let s = omega.linf();
    1e-6 * s * s
}

/// Default iteration cap `10 n^3`.
pub fn default_cg_max_iter(grid: Grid) -> usize {
    10 * grid.node_count()
}

struct ThetaOperator<'a> {
    omega: &'a VectorField,
    lambda: f64,
}

impl ThetaOperator<'_> {
    /// `A theta = grad theta . omega` (spectral gradient, nodal product).
    fn apply_a(&self, theta: &ScalarField) -> Result<ScalarField> {
        let grad = gradient_spectral(&theta.to_spectral()?).to_nodal();
        grad.dot(self.omega)
    }

    /// Adjoint `A^T f = -div(f omega)` under the nodal inner product.
    fn apply_at(&self, f: &ScalarField) -> Result<ScalarField> {
        let prod = VectorField::new([
            f.zip_with(self.omega.component(0), |a, b| a * b)?,
            f.zip_with(self.omega.component(1), |a, b| a * b)?,
            f.zip_with(self.omega.component(2), |a, b| a * b)?,
        ])?;
        let div = divergence_spectral(&prod.to_spectral()?).to_nodal();
        Ok(div.scaled(-1.0))
    }

    /// Normal operator `A^T A + lambda (-div grad)` restricted to zero-mean.
    fn apply_normal(&self, theta: &ScalarField) -> Result<ScalarField> {
        let mut out = self.apply_at(&self.apply_a(theta)?)?;
        if self.lambda > 0.0 {
            let spec = theta.to_spectral()?;
            let reg = divergence_spectral(&gradient_spectral(&spec)).to_nodal();
            out = out.zip_with(&reg, |a, b| a - self.lambda * b)?;
        }
        let m = out.mean();
        Ok(out.map(|v| v - m))
    }
}

/// Minimize `|grad theta . omega - lap p|_2^2 + lambda |grad theta|_2^2`
/// over zero-mean theta by conjugate gradients on the normal operator.
/// Hitting the iteration cap is reported, not an error.
pub fn solve_theta_least_squares(
    omega: &VectorField,
    laplacian_p: &ScalarField,
    lambda_reg: f64,
    cg_tol: f64,
    cg_max_iter: usize,
) -> Result<ThetaSolution> {
    if omega.grid() != laplacian_p.grid() {
        return Err(Error::GridMismatch);
    }
    if omega.linf() == 0.0 {
        return Err(Error::ZeroVorticity);
    }
    if !(lambda_reg >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda_reg must be >= 0, got {lambda_reg}"
        )));
    }
    let grid = omega.grid();
    let op = ThetaOperator {
        omega,
        lambda: lambda_reg,
    };

    let b = {
        let raw = op.apply_at(laplacian_p)?;
        let m = raw.mean();
        raw.map(|v| v - m)
    };
    let dot = |a: &ScalarField, c: &ScalarField| -> f64 {
        a.values().iter().zip(c.values()).map(|(x, y)| x * y).sum()
    };
    let b_norm = dot(&b, &b).sqrt();

    let mut theta = ScalarField::zeros(grid);
    let mut iterations = 0;
    let mut converged = true;
    if b_norm > 0.0 {
        let mut r = b.clone();
        let mut p = r.clone();
        let mut rs = dot(&r, &r);
        converged = false;
        while iterations < cg_max_iter {
            let ap = op.apply_normal(&p)?;
            let denom = dot(&p, &ap);
            if denom <= 0.0 {
                // Numerical null-space direction; the current iterate is the
                // least-squares answer reachable from this Krylov space.
                converged = true;
                break;
            }
            let alpha = rs / denom;
            theta = theta.zip_with(&p, |t, pv| t + alpha * pv)?;
            r = r.zip_with(&ap, |rv, av| rv - alpha * av)?;
            let rs_new = dot(&r, &r);
            iterations += 1;
            if rs_new.sqrt() <= cg_tol * b_norm {
                converged = true;
                break;
            }
            p = r.zip_with(&p, |rv, pv| rv + (rs_new / rs) * pv)?;
            rs = rs_new;
        }
    }
    let m = theta.mean();
    let theta = theta.map(|v| v - m);

    let transport = op.apply_a(&theta)?;
    let resid = transport.sub(laplacian_p)?.l2();
    let denom = laplacian_p.l2();
    let transport_residual_rel = if denom > 0.0 { resid / denom } else { resid };

    Ok(ThetaSolution {
        theta,
        transport_residual_rel,
        reconstruction_residual_rel: None,
        iterations,
        lambda_reg,
        converged,
    })
}

/// Candidate pressure gradient `u x grad theta` and its distance from the
/// actual `grad p`. The candidate is orthogonal to `u` by construction; the
/// open question is only whether it matches `grad p`.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub candidate: VectorField,
    pub residual_rel: f64,
    /// Sup of `|candidate . u|`; algebraically zero, roundoff in practice.
    pub orthogonality_max: f64,
}

pub fn reconstruct_pressure_gradient(
    u: &VectorField,
    theta: &ScalarField,
    p: &ScalarField,
) -> Result<Reconstruction> {
    if u.grid() != theta.grid() || u.grid() != p.grid() {
        return Err(Error::GridMismatch);
    }
    let grad_theta = gradient(theta)?;
    let candidate = u.cross(&grad_theta)?;
    let gp = gradient(p)?;
    let diff = gp.sub(&candidate)?;
    let norm_sq = |v: &VectorField| -> f64 {
        v.component(0).l2().powi(2) + v.component(1).l2().powi(2) + v.component(2).l2().powi(2)
    };
    let residual_rel = norm_sq(&diff).sqrt() / norm_sq(&gp).sqrt().max(f64::MIN_POSITIVE);
    let orthogonality_max = candidate.dot(u)?.linf();
    Ok(Reconstruction {
        candidate,
        residual_rel,
        orthogonality_max,
    })
}

/// Scalar samples with an explicit validity mask (absent inside the
/// thresholded omega set).
#[derive(Debug, Clone)]
pub struct MaskedScalar {
    grid: Grid,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl MaskedScalar {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn max_abs_valid(&self) -> Option<f64> {
        let mut out = None;
        for (v, &ok) in self.values.iter().zip(&self.valid) {
            if ok {
                out = Some(out.map_or(v.abs(), |m: f64| m.max(v.abs())));
            }
        }
        out
    }
}

/// Pointwise residual of the self-consistency relation
/// `theta = [omega.grad p + omega.curl(theta u)] / |omega|^2`,
/// evaluated only where `|omega|` clears the relative floor.
pub fn theta_pointwise_residual(
    theta: &ScalarField,
    omega: &VectorField,
    grad_p: &VectorField,
    u: &VectorField,
    floor_rel: f64,
) -> Result<MaskedScalar> {
    let grid = theta.grid();
    if omega.grid() != grid || grad_p.grid() != grid || u.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let theta_u = VectorField::new([
        theta.zip_with(u.component(0), |a, b| a * b)?,
        theta.zip_with(u.component(1), |a, b| a * b)?,
        theta.zip_with(u.component(2), |a, b| a * b)?,
    ])?;
    let curl_theta_u = curl_spectral(&theta_u.to_spectral()?).to_nodal();
    let w_dot_gp = omega.dot(grad_p)?;
    let w_dot_curl = omega.dot(&curl_theta_u)?;
    let mag_sq = omega.magnitude_squared();
    let floor = floor_rel * omega.linf();

    let count = grid.node_count();
    let mut values = vec![0.0; count];
    let mut valid = vec![false; count];
    for i in 0..count {
        let m2 = mag_sq.values()[i];
        if m2.sqrt() > floor {
            valid[i] = true;
            values[i] =
                theta.values()[i] - (w_dot_gp.values()[i] + w_dot_curl.values()[i]) / m2;
        }
    }
    Ok(MaskedScalar {
        grid,
        values,
        valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::init_abc;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::new(n, 2.0 * PI).unwrap()
    }

    fn constant_omega(g: Grid, w: [f64; 3]) -> VectorField {
        VectorField::from_fn(g, |_| w)
    }

    #[test]
    fn straight_line_along_constant_vorticity() {
        let g = grid(16);
        let w = constant_omega(g, [0.0, 0.0, 2.0]);
        let params = FieldLineParams {
            ds: 0.05,
            max_length: 3.0,
            min_omega: 1e-8,
        };
        let line = trace_fieldline(&w, [0.0, 0.0, 0.0], params).unwrap();
        assert_eq!(line.terminated_reason, TerminationReason::MaxLength);
        for (k, p) in line.positions.iter().enumerate() {
            let s = k as f64 * params.ds;
            assert!(p[0].abs() < 1e-12 && p[1].abs() < 1e-12);
            assert!((p[2] - s).abs() < 1e-12, "sample {k}");
        }
    }

    #[test]
    fn seed_below_threshold_is_rejected() {
        let g = grid(16);
        let w = VectorField::from_fn(g, |[_, _, z]| [0.0, 0.0, z.cos()]);
        let params = FieldLineParams {
            ds: 0.05,
            max_length: 3.0,
            min_omega: 1e-3,
        };
        // |omega| = |cos z| vanishes at z = pi/2.
        let err = trace_fieldline(&w, [0.0, 0.0, PI / 2.0], params);
        assert!(matches!(err, Err(Error::SeedBelowThreshold { .. })));
    }

    #[test]
    fn line_leaves_support_where_vorticity_dies() {
        let g = grid(32);
        let w = VectorField::from_fn(g, |[_, _, z]| [0.0, 0.0, z.cos()]);
        let params = FieldLineParams {
            ds: g.spacing() / 4.0,
            max_length: 20.0,
            min_omega: 1e-2,
        };
        let line = trace_fieldline(&w, [0.0, 0.0, 0.0], params).unwrap();
        assert_eq!(line.terminated_reason, TerminationReason::LeftSupport);
        let last = line.positions.last().unwrap();
        assert!(last[2] < PI / 2.0, "stopped before the barrier");
        assert!(last[2] > 1.0, "made progress toward it");
    }

    #[test]
    fn abc_first_step_matches_rk4_hand_oracle() {
        let g = grid(32);
        let st = init_abc(g, 1.0, 1.0, 1.0);
        let w = st.velocity().clone(); // Beltrami: omega = u
        let ds = 0.1;
        let params = FieldLineParams {
            ds,
            max_length: 0.3,
            min_omega: 1e-8,
        };
        let seed = [PI / 2.0, 0.0, 0.0];
        let line = trace_fieldline(&w, seed, params).unwrap();

        // Hand oracle: RK4 on dx/ds = u/|u| with the closed-form field.
        let f = |p: [f64; 3]| -> [f64; 3] {
            let v = [
                p[2].sin() + p[1].cos(),
                p[0].sin() + p[2].cos(),
                p[1].sin() + p[0].cos(),
            ];
            let m = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            [v[0] / m, v[1] / m, v[2] / m]
        };
        let k1 = f(seed);
        let k2 = f([
            seed[0] + 0.5 * ds * k1[0],
            seed[1] + 0.5 * ds * k1[1],
            seed[2] + 0.5 * ds * k1[2],
        ]);
        let k3 = f([
            seed[0] + 0.5 * ds * k2[0],
            seed[1] + 0.5 * ds * k2[1],
            seed[2] + 0.5 * ds * k2[2],
        ]);
        let k4 = f([
            seed[0] + ds * k3[0],
            seed[1] + ds * k3[1],
            seed[2] + ds * k3[2],
        ]);
        let expect = [
            seed[0] + ds / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            seed[1] + ds / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            seed[2] + ds / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        ];
        let got = line.positions[1];
        for c in 0..3 {
            assert!((got[c] - expect[c]).abs() < 1e-10, "component {c}");
        }
        // Unit tangent at the seed: u/|u| = (1, 2, 0)/sqrt(5).
        let t0 = k1;
        assert!((t0[0] - 1.0 / 5.0_f64.sqrt()).abs() < 1e-14);
        assert!((t0[1] - 2.0 / 5.0_f64.sqrt()).abs() < 1e-14);
        assert!(t0[2].abs() < 1e-14);
    }

    #[test]
    fn closed_loop_is_detected_with_holonomy() {
        let g = grid(32);
        // Planar field circulating around (pi, pi): closed orbits.
        let w = VectorField::from_fn(g, |[x, y, _]| [y.sin(), -(x.sin()), 0.0]);
        let params = FieldLineParams {
            ds: g.spacing() / 8.0,
            max_length: 40.0,
            min_omega: 1e-6,
        };
        let line = trace_fieldline(&w, [PI + 0.5, PI, 1.0], params).unwrap();
        assert_eq!(line.terminated_reason, TerminationReason::ClosedLoopDetected);

        // Theta integrand lap p / |omega| with lap p = 1: holonomy is the
        // loop integral of ds/|omega|, strictly positive.
        let lap_p = ScalarField::constant(g, 1.0);
        let solved = solve_theta_along_line(&line, &lap_p, &w).unwrap();
        let hol = solved.line_holonomy.unwrap();
        assert!(hol > 0.0);
        // Coarse cross-check: trapezoid over the same samples.
        let theta = solved.theta_samples.as_ref().unwrap();
        let ds = params.ds;
        let trap: f64 = line
            .omega_magnitudes
            .windows(2)
            .map(|w2| ds * (1.0 / w2[0] + 1.0 / w2[1]) / 2.0)
            .sum();
        let last = *theta.last().unwrap();
        assert!((last - trap).abs() / trap < 1e-3, "4th-order {last} vs trapezoid {trap}");
    }

    #[test]
    fn constant_integrand_integrates_linearly() {
        let g = grid(16);
        let w = constant_omega(g, [0.0, 0.0, 2.0]);
        let params = FieldLineParams {
            ds: 0.1,
            max_length: 2.0,
            min_omega: 1e-8,
        };
        let line = trace_fieldline(&w, [0.0, 0.0, 0.0], params).unwrap();
        let lap_p = ScalarField::constant(g, 4.0);
        let solved = solve_theta_along_line(&line, &lap_p, &w).unwrap();
        let theta = solved.theta_samples.unwrap();
        for (k, t) in theta.iter().enumerate() {
            let s = k as f64 * 0.1;
            assert!((t - 2.0 * s).abs() < 1e-12, "theta({s}) = {t}");
        }
    }

    #[test]
    fn manufactured_sine_recovered_along_z_line() {
        let g = grid(32);
        let w = constant_omega(g, [0.0, 0.0, 1.0]);
        let lap_p = ScalarField::from_fn(g, |[_, _, z]| z.cos());
        let params = FieldLineParams {
            ds: g.spacing() / 16.0,
            max_length: 2.0 * PI,
            min_omega: 1e-8,
        };
        let line = trace_fieldline(&w, [0.0, 0.0, 0.0], params).unwrap();
        let solved = solve_theta_along_line(&line, &lap_p, &w).unwrap();
        let theta = solved.theta_samples.unwrap();
        let mut max_err = 0.0_f64;
        for (s, t) in line.arclengths.iter().zip(&theta) {
            max_err = max_err.max((t - s.sin()).abs());
        }
        assert!(max_err < 1e-8, "quadrature error {max_err}");
    }

    #[test]
    fn degenerate_characteristic_is_an_error() {
        let g = grid(16);
        let w = constant_omega(g, [0.0, 0.0, 2.0]);
        let params = FieldLineParams {
            ds: 0.1,
            max_length: 1.0,
            min_omega: 1e-8,
        };
        let line = trace_fieldline(&w, [0.0, 0.0, 0.0], params).unwrap();
        let zero_omega = VectorField::zeros(g);
        let lap_p = ScalarField::constant(g, 1.0);
        assert!(matches!(
            solve_theta_along_line(&line, &lap_p, &zero_omega),
            Err(Error::DegenerateCharacteristic(_))
        ));
    }

    #[test]
    fn least_squares_recovers_manufactured_theta() {
        let g = grid(16);
        let w = constant_omega(g, [0.0, 0.0, 1.0]);
        let lap_p = ScalarField::from_fn(g, |[_, _, z]| z.cos());
        let sol = solve_theta_least_squares(&w, &lap_p, 0.0, 1e-12, 1000).unwrap();
        assert!(sol.converged);
        let expect = ScalarField::from_fn(g, |[_, _, z]| z.sin());
        let err = sol.theta.sub(&expect).unwrap().linf();
        assert!(err < 1e-8, "theta error {err}");
        assert!(sol.transport_residual_rel < 1e-8);
    }

    #[test]
    fn least_squares_reports_unreachable_data() {
        let g = grid(8);
        let w = constant_omega(g, [0.0, 0.0, 1.0]);
        // cos x is orthogonal to the range of d/dz on periodic functions:
        // the best theta is 0 and the whole datum remains as residual.
        let lap_p = ScalarField::from_fn(g, |[x, _, _]| x.cos());
        let sol = solve_theta_least_squares(&w, &lap_p, 0.0, 1e-12, 1000).unwrap();
        assert!(sol.theta.linf() < 1e-12);
        assert!((sol.transport_residual_rel - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_data_gives_zero_theta() {
        let g = grid(8);
        let w = constant_omega(g, [0.0, 0.0, 1.0]);
        let sol =
            solve_theta_least_squares(&w, &ScalarField::zeros(g), 0.0, 1e-12, 100).unwrap();
        assert_eq!(sol.theta.linf(), 0.0);
        assert_eq!(sol.transport_residual_rel, 0.0);
        assert_eq!(sol.iterations, 0);

        assert!(matches!(
            solve_theta_least_squares(&VectorField::zeros(g), &ScalarField::zeros(g), 0.0, 1e-12, 10),
            Err(Error::ZeroVorticity)
        ));
    }

    #[test]
    fn transport_residual_monotone_in_lambda() {
        let g = grid(16);
        let st = init_abc(g, 1.0, 1.0, 1.0);
        let w = st.velocity().clone();
        let lap_p = ScalarField::from_fn(g, |[x, y, _]| x.cos() * y.sin());
        let mut prev = f64::INFINITY;
        for lambda in [1e-2, 1e-4, 1e-6, 0.0] {
            let sol = solve_theta_least_squares(&w, &lap_p, lambda, 1e-10, 4000).unwrap();
            assert!(
                sol.transport_residual_rel <= prev + 1e-9,
                "residual grew at lambda {lambda}"
            );
            prev = sol.transport_residual_rel;
        }
    }

    #[test]
    fn ls_objective_is_locally_optimal() {
        use rand::{Rng, SeedableRng};
        let g = grid(8);
        let w = constant_omega(g, [0.0, 0.0, 1.0]);
        let lap_p = ScalarField::from_fn(g, |[_, y, z]| z.cos() + 0.3 * y.sin());
        let lambda = 1e-6;
        let sol = solve_theta_least_squares(&w, &lap_p, lambda, 1e-12, 2000).unwrap();
        let objective = |theta: &ScalarField| -> f64 {
            let grad = gradient(theta).unwrap();
            let transport = grad.dot(&w).unwrap();
            let misfit = transport.sub(&lap_p).unwrap();
            let reg: f64 = (0..3)
                .map(|c| grad.component(c).l2().powi(2))
                .sum();
            misfit.l2().powi(2) + lambda * reg
        };
        let j0 = objective(&sol.theta);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let dir: Vec<f64> = (0..g.node_count()).map(|_| rng.gen::<f64>() - 0.5).collect();
            let mean = dir.iter().sum::<f64>() / dir.len() as f64;
            let norm = (dir.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()).sqrt();
            let dir = ScalarField::new(
                g,
                dir.iter().map(|v| (v - mean) / norm).collect(),
            )
            .unwrap();
            let perturbed = sol.theta.zip_with(&dir, |t, d| t + 1e-4 * d).unwrap();
            let j1 = objective(&perturbed);
            assert!(j1 >= j0 - 1e-10, "objective decreased: {j0} -> {j1}");
        }
    }

    #[test]
    fn line_and_ls_theta_agree_on_integrable_data() {
        let g = grid(32);
        let w = constant_omega(g, [0.0, 0.0, 1.0]);
        let lap_p = ScalarField::from_fn(g, |[_, _, z]| z.cos());
        let sol = solve_theta_least_squares(&w, &lap_p, 0.0, 1e-12, 2000).unwrap();
        let eval = FieldEvaluator::scalar(&sol.theta).unwrap();

        let params = FieldLineParams {
            ds: g.spacing() / 16.0,
            max_length: PI,
            min_omega: 1e-8,
        };
        let line = trace_fieldline(&w, [1.0, 2.0, 0.0], params).unwrap();
        let solved = solve_theta_along_line(&line, &lap_p, &w).unwrap();
        let theta_line = solved.theta_samples.unwrap();
        let offset = eval.eval(line.positions[0]);
        let mut max_err = 0.0_f64;
        for (p, t) in line.positions.iter().zip(&theta_line) {
            max_err = max_err.max((eval.eval(*p) - offset - t).abs());
        }
        assert!(max_err < 1e-6, "line vs LS mismatch {max_err}");
    }

    #[test]
    fn reconstruction_is_orthogonal_to_velocity() {
        let g = grid(16);
        let st = init_abc(g, 1.0, 1.0, 1.0);
        let u = st.velocity();
        let theta = ScalarField::from_fn(g, |[x, y, z]| x.sin() + (y + z).cos());
        let p = crate::pressure::pressure_from_velocity(u).unwrap();
        let rec = reconstruct_pressure_gradient(u, &theta, &p).unwrap();
        assert!(rec.orthogonality_max < 1e-12);
        assert!(rec.residual_rel > 0.0);

        let cu = VectorField::from_fn(g, |_| [1.0, 0.0, 0.0]);
        let ctheta = ScalarField::constant(g, 2.0);
        let cp = ScalarField::zeros(g);
        let crec = reconstruct_pressure_gradient(&cu, &ctheta, &cp).unwrap();
        assert_eq!(crec.candidate.linf(), 0.0);
        assert_eq!(crec.residual_rel, 0.0);
    }

    #[test]
    fn pointwise_residual_vanishes_on_manufactured_chain() {
        let g = grid(16);
        // u with curl u = (0, 0, -cos y); pass grad_p := u x grad theta so
        // the self-consistency relation holds identically off the floor.
        let u = VectorField::from_fn(g, |[_, y, _]| [y.sin(), 0.0, 0.0]);
        let omega = crate::spectral::curl(&u).unwrap();
        let theta = ScalarField::from_fn(g, |[_, _, z]| z.sin());
        let grad_theta = gradient(&theta).unwrap();
        let grad_p = u.cross(&grad_theta).unwrap();
        let resid = theta_pointwise_residual(&theta, &omega, &grad_p, &u, 1e-6).unwrap();
        let max = resid.max_abs_valid().unwrap();
        assert!(max < 1e-8, "manufactured chain residual {max}");
        // Cells near |omega| = 0 (y near pi/2) are masked out.
        assert!(resid.valid().iter().any(|&b| !b));
    }

    #[test]
    fn pointwise_residual_reduces_for_zero_theta() {
        let g = grid(16);
        let u = VectorField::from_fn(g, |[_, y, _]| [y.sin(), 0.0, 0.0]);
        let omega = crate::spectral::curl(&u).unwrap();
        let theta = ScalarField::zeros(g);
        let grad_p = VectorField::from_fn(g, |[x, _, _]| [0.3, 0.0, x.cos()]);
        let resid = theta_pointwise_residual(&theta, &omega, &grad_p, &u, 1e-6).unwrap();
        // Residual should equal -omega.grad_p / |omega|^2 where valid.
        let w_dot = omega.dot(&grad_p).unwrap();
        let m2 = omega.magnitude_squared();
        for i in 0..g.node_count() {
            if resid.valid()[i] {
                let expect = -w_dot.values()[i] / m2.values()[i];
                assert!((resid.values()[i] - expect).abs() < 1e-12);
            }
        }
    }
}
