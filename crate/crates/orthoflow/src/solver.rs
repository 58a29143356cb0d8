//! Time integration of incompressible Euler / Navier-Stokes in rotational
//! form on the periodic box.
//!
//! The nonlinear term is P(dealias(u x omega)); gradient contributions are
//! absorbed by the projection. The viscous term is handled exactly per stage
//! by the spectral integrating factor exp(-mu |k|^2 dt), so single-mode
//! Beltrami data decays as a pure exponential to roundoff.

use crate::error::{Error, Result};
use crate::field::{SpectralScalarField, SpectralVectorField, VectorField};
use crate::grid::Grid;
use crate::spectral::{curl_spectral, dealias_vector_inplace, divergence, leray_project_spectral};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Floor under the sup-speed in the CFL formula.
const CFL_SPEED_FLOOR: f64 = 1e-12;

/// Run parameters that shape the time loop but not the physics.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    pub cfl_number: f64,
    pub dt_max: f64,
    pub dealias: bool,
    pub t_end: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            cfl_number: 0.5,
            dt_max: 0.1,
            dealias: true,
            t_end: 1.0,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_number > 0.0 && self.cfl_number <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cfl_number must be in (0, 1], got {}",
                self.cfl_number
            )));
        }
        if !(self.dt_max > 0.0) || !self.dt_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "dt_max must be positive and finite, got {}",
                self.dt_max
            )));
        }
        Ok(())
    }
}

/// Divergence-free velocity plus clock, viscosity and step counter.
#[derive(Debug, Clone)]
pub struct SolverState {
    velocity: VectorField,
    time: f64,
    viscosity: f64,
    step_count: u64,
}

impl SolverState {
    /// Build a state, checking viscosity, finiteness and the divergence-free
    /// invariant (`|div u|_inf <= 1e-8 |u|_inf`).
    pub fn new(velocity: VectorField, time: f64, viscosity: f64, step_count: u64) -> Result<Self> {
        if !(viscosity >= 0.0) || !viscosity.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "viscosity must be finite and >= 0, got {viscosity}"
            )));
        }
        if !velocity.is_finite() {
            return Err(Error::NonFinite);
        }
        let div = divergence(&velocity)?.linf();
        let scale = velocity.linf().max(f64::MIN_POSITIVE);
        if div > 1e-8 * scale {
            return Err(Error::InvalidParameter(format!(
                "velocity is not divergence-free: |div u| = {div:.3e} vs |u| = {scale:.3e}"
            )));
        }
        Ok(Self {
            velocity,
            time,
            viscosity,
            step_count,
        })
    }

    fn from_initializer(velocity: VectorField) -> Self {
        Self {
            velocity,
            time: 0.0,
            viscosity: 0.0,
            step_count: 0,
        }
    }

    pub fn velocity(&self) -> &VectorField {
        &self.velocity
    }

    pub fn grid(&self) -> Grid {
        self.velocity.grid()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn viscosity(&self) -> f64 {
        self.viscosity
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Same state with a different viscosity (mu = 0 selects Euler).
    pub fn with_viscosity(mut self, viscosity: f64) -> Result<Self> {
        if !(viscosity >= 0.0) || !viscosity.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "viscosity must be finite and >= 0, got {viscosity}"
            )));
        }
        self.viscosity = viscosity;
        Ok(self)
    }

    /// Rescale the velocity amplitude (used for perturbations and the
    /// zero-amplitude scenario).
    pub fn scaled_velocity(mut self, s: f64) -> Self {
        self.velocity = self.velocity.scaled(s);
        self
    }
}

/// Largest stable step: `min(dt_max, cfl * dx / max(|u|_inf, 1e-12))`.
pub fn cfl_dt(state: &SolverState, params: &SolverParams) -> f64 {
    let dx = state.grid().spacing();
    let umax = state.velocity.linf().max(CFL_SPEED_FLOOR);
    params.dt_max.min(params.cfl_number * dx / umax)
}

/// Rotational-form nonlinear term `P(dealias(u x omega))`.
///
/// Equals the projected convective form -P((u.grad)u) up to dealiasing error.
pub fn nonlinear_rhs(u: &VectorField) -> Result<VectorField> {
    if !u.is_finite() {
        return Err(Error::NonFinite);
    }
    let u_hat = u.to_spectral()?;
    Ok(nonlinear_spectral(&u_hat, true)?.to_nodal())
}

fn nonlinear_spectral(u_hat: &SpectralVectorField, dealias: bool) -> Result<SpectralVectorField> {
    let u = u_hat.to_nodal();
    let w = curl_spectral(u_hat).to_nodal();
    let lamb = u.cross(&w)?;
    let mut l_hat = lamb.to_spectral()?;
    if dealias {
        dealias_vector_inplace(&mut l_hat);
    }
    leray_project_spectral(&mut l_hat);
    Ok(l_hat)
}

fn viscous_tables(grid: Grid, mu: f64, dt: f64) -> (Vec<f64>, Vec<f64>) {
    let n = grid.n();
    let mut half = Vec::with_capacity(grid.node_count());
    let mut full = Vec::with_capacity(grid.node_count());
    for ix in 0..n {
        let kx = grid.wavenumber(ix);
        for iy in 0..n {
            let ky = grid.wavenumber(iy);
            for iz in 0..n {
                let kz = grid.wavenumber(iz);
                let k2 = kx * kx + ky * ky + kz * kz;
                let h = (-mu * k2 * 0.5 * dt).exp();
                half.push(h);
                full.push(h * h);
            }
        }
    }
    (half, full)
}

fn svf_zip(
    a: &SpectralVectorField,
    b: &SpectralVectorField,
    f: impl Fn(Complex<f64>, Complex<f64>) -> Complex<f64>,
) -> SpectralVectorField {
    let g = a.grid();
    let mut out = [
        SpectralScalarField::zeros(g),
        SpectralScalarField::zeros(g),
        SpectralScalarField::zeros(g),
    ];
    for c in 0..3 {
        let (ac, bc) = (a.component(c).coeffs(), b.component(c).coeffs());
        let dst = out[c].coeffs_mut();
        for i in 0..dst.len() {
            dst[i] = f(ac[i], bc[i]);
        }
    }
    SpectralVectorField::from_raw(out)
}

fn svf_mul_table(v: &SpectralVectorField, table: &[f64]) -> SpectralVectorField {
    let g = v.grid();
    let mut out = [
        SpectralScalarField::zeros(g),
        SpectralScalarField::zeros(g),
        SpectralScalarField::zeros(g),
    ];
    for c in 0..3 {
        let src = v.component(c).coeffs();
        let dst = out[c].coeffs_mut();
        for i in 0..dst.len() {
            dst[i] = src[i] * table[i];
        }
    }
    SpectralVectorField::from_raw(out)
}

/// One classical 4-stage Runge-Kutta step with per-stage viscous integrating
/// factor (Lawson scheme). `dt` must respect `cfl_dt`.
pub fn step(state: &SolverState, params: &SolverParams, dt: f64) -> Result<SolverState> {
    params.validate()?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let bound = cfl_dt(state, params);
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, bound });
    }

    let grid = state.grid();
    let blow_up = |e: Error| match e {
        Error::NonFinite => Error::NumericalBlowUp {
            time: state.time,
            step: state.step_count,
        },
        other => other,
    };

    let u0 = state.velocity.to_spectral().map_err(blow_up)?;
    let (eh, ef) = viscous_tables(grid, state.viscosity, dt);

    let a = nonlinear_spectral(&u0, params.dealias).map_err(blow_up)?;
    // u_b = E_half (u0 + dt/2 a)
    let u_b = svf_mul_table(&svf_zip(&u0, &a, |x, y| x + y * (dt / 2.0)), &eh);
    let b = nonlinear_spectral(&u_b, params.dealias).map_err(blow_up)?;
    // u_c = E_half u0 + dt/2 b
    let u_c = svf_zip(&svf_mul_table(&u0, &eh), &b, |x, y| x + y * (dt / 2.0));
    let c = nonlinear_spectral(&u_c, params.dealias).map_err(blow_up)?;
    // u_d = E_full u0 + dt E_half c
    let u_d = svf_zip(&svf_mul_table(&u0, &ef), &svf_mul_table(&c, &eh), |x, y| {
        x + y * dt
    });
    let d = nonlinear_spectral(&u_d, params.dealias).map_err(blow_up)?;

    // u1 = E_full u0 + dt/6 (E_full a + 2 E_half (b + c) + d)
    let bc = svf_zip(&b, &c, |x, y| x + y);
    let weighted = svf_zip(
        &svf_zip(&svf_mul_table(&a, &ef), &svf_mul_table(&bc, &eh), |x, y| {
            x + y * 2.0
        }),
        &d,
        |x, y| x + y,
    );
    let u_next = svf_zip(&svf_mul_table(&u0, &ef), &weighted, |x, y| x + y * (dt / 6.0));

    let velocity = u_next.to_nodal();
    let time = state.time + dt;
    let step_count = state.step_count + 1;
    if !velocity.is_finite() {
        return Err(Error::NumericalBlowUp {
            time,
            step: step_count,
        });
    }
    Ok(SolverState {
        velocity,
        time,
        viscosity: state.viscosity,
        step_count,
    })
}

/// Taylor-Green vortex `u = (sin x cos y cos z, -cos x sin y cos z, 0)`.
pub fn init_taylor_green(grid: Grid) -> SolverState {
    let velocity = VectorField::from_fn(grid, |[x, y, z]| {
        [
            x.sin() * y.cos() * z.cos(),
            -(x.cos()) * y.sin() * z.cos(),
            0.0,
        ]
    });
    SolverState::from_initializer(velocity)
}

/// ABC Beltrami field `u = (A sin z + C cos y, B sin x + A cos z, C sin y + B cos x)`.
pub fn init_abc(grid: Grid, a: f64, b: f64, c: f64) -> SolverState {
    let velocity = VectorField::from_fn(grid, |[x, y, z]| {
        [
            a * z.sin() + c * y.cos(),
            b * x.sin() + a * z.cos(),
            c * y.sin() + b * x.cos(),
        ]
    });
    SolverState::from_initializer(velocity)
}

/// Band-limited divergence-free Gaussian random field, deterministic in
/// `seed`, projected and normalized to `|u|_inf = 1`.
///
/// Coefficient magnitudes follow `(k/k_peak)^2` below the peak and
/// `(k/k_peak)^slope` above it; modes are cut at
/// `min(max(2 k_peak, n/6), n/3)` so quadratic products of the default
/// spectrum stay inside the dealias band.
pub fn init_random_solenoidal(grid: Grid, seed: u64, spectrum_slope: f64, k_peak: f64) -> SolverState {
    let n = grid.n();
    let k_fund = 2.0 * std::f64::consts::PI / grid.length();
    let k_cut = (2.0 * k_peak * k_fund)
        .max(n as f64 / 6.0 * k_fund)
        .min(n as f64 / 3.0 * k_fund);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = move |rng: &mut ChaCha8Rng| -> f64 {
        // Box-Muller; deterministic in the RNG stream.
        let u1: f64 = rng.gen::<f64>().max(1e-300);
        let u2: f64 = rng.gen::<f64>();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };

    let mut comps = [
        SpectralScalarField::zeros(grid),
        SpectralScalarField::zeros(grid),
        SpectralScalarField::zeros(grid),
    ];
    let mirror = |i: usize| (n - i) % n;
    for ix in 0..n {
        let kx = grid.wavenumber(ix);
        for iy in 0..n {
            let ky = grid.wavenumber(iy);
            for iz in 0..n {
                let kz = grid.wavenumber(iz);
                let kmag = (kx * kx + ky * ky + kz * kz).sqrt();
                if kmag == 0.0 || kmag > k_cut {
                    continue;
                }
                let idx = grid.idx(ix, iy, iz);
                let midx = grid.idx(mirror(ix), mirror(iy), mirror(iz));
                if idx >= midx {
                    // Mirror already filled (self-conjugate modes lie above the cut).
                    continue;
                }
                let ratio = kmag / (k_peak * k_fund).max(f64::MIN_POSITIVE);
                let amp = if ratio <= 1.0 {
                    ratio * ratio
                } else {
                    ratio.powf(spectrum_slope)
                };
                for comp in comps.iter_mut() {
                    let re = gauss(&mut rng) * amp;
                    let im = gauss(&mut rng) * amp;
                    comp.coeffs_mut()[idx] = Complex::new(re, im);
                    comp.coeffs_mut()[midx] = Complex::new(re, -im);
                }
            }
        }
    }

    let mut spec = SpectralVectorField::from_raw(comps);
    leray_project_spectral(&mut spec);
    let velocity = spec.to_nodal();
    let sup = velocity.linf();
    let velocity = if sup > 0.0 {
        velocity.scaled(1.0 / sup)
    } else {
        velocity
    };
    SolverState::from_initializer(velocity)
}
