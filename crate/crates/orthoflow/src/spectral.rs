//! Periodic-box field algebra: spectral derivatives, Leray projection,
//! Poisson inversion and two-thirds dealiasing.
//!
//! Odd-order derivatives use the Nyquist-zeroed wavenumber so the
//! grad/div/curl algebra closes exactly on real fields; symmetric multipliers
//! (Laplacian, Poisson inversion) keep the full symmetric table so every
//! nonzero mode stays invertible.

use crate::error::{Error, Result};
use crate::field::{ScalarField, SpectralScalarField, SpectralVectorField, VectorField};

use num_complex::Complex;

/// Relative mean tolerance for torus Poisson solvability.
const POISSON_MEAN_TOL: f64 = 1e-10;

/// Spectral gradient; exact to roundoff on band-limited input.
pub fn gradient(s: &ScalarField) -> Result<VectorField> {
    Ok(gradient_spectral(&s.to_spectral()?).to_nodal())
}

pub fn gradient_spectral(s: &SpectralScalarField) -> SpectralVectorField {
    let g = s.grid();
    let n = g.n();
    let mut out = [
        SpectralScalarField::zeros(g),
        SpectralScalarField::zeros(g),
        SpectralScalarField::zeros(g),
    ];
    let coeffs = s.coeffs();
    for (axis, comp) in out.iter_mut().enumerate() {
        let dst = comp.coeffs_mut();
        let mut idx = 0;
        for ix in 0..n {
            let kx = g.wavenumber_deriv(ix);
            for iy in 0..n {
                let ky = g.wavenumber_deriv(iy);
                for iz in 0..n {
                    let kz = g.wavenumber_deriv(iz);
                    let k = [kx, ky, kz][axis];
                    let c = coeffs[idx];
                    dst[idx] = Complex::new(-k * c.im, k * c.re); // i*k*c
                    idx += 1;
                }
            }
        }
    }
    SpectralVectorField::from_raw(out)
}

/// Spectral divergence.
pub fn divergence(v: &VectorField) -> Result<ScalarField> {
    Ok(divergence_spectral(&v.to_spectral()?).to_nodal())
}

pub fn divergence_spectral(v: &SpectralVectorField) -> SpectralScalarField {
    let g = v.grid();
    let n = g.n();
    let mut out = SpectralScalarField::zeros(g);
    let dst = out.coeffs_mut();
    let (cx, cy, cz) = (
        v.component(0).coeffs(),
        v.component(1).coeffs(),
        v.component(2).coeffs(),
    );
    let mut idx = 0;
    for ix in 0..n {
        let kx = g.wavenumber_deriv(ix);
        for iy in 0..n {
            let ky = g.wavenumber_deriv(iy);
            for iz in 0..n {
                let kz = g.wavenumber_deriv(iz);
                let s = Complex::new(
                    -(kx * cx[idx].im + ky * cy[idx].im + kz * cz[idx].im),
                    kx * cx[idx].re + ky * cy[idx].re + kz * cz[idx].re,
                );
                dst[idx] = s;
                idx += 1;
            }
        }
    }
    out
}

/// Spectral curl.
pub fn curl(v: &VectorField) -> Result<VectorField> {
    Ok(curl_spectral(&v.to_spectral()?).to_nodal())
}

pub fn curl_spectral(v: &SpectralVectorField) -> SpectralVectorField {
    let g = v.grid();
    let n = g.n();
    let mut out = [
        SpectralScalarField::zeros(g),
        SpectralScalarField::zeros(g),
        SpectralScalarField::zeros(g),
    ];
    {
        let (cx, cy, cz) = (
            v.component(0).coeffs(),
            v.component(1).coeffs(),
            v.component(2).coeffs(),
        );
        let [ox, oy, oz] = &mut out;
        let (ox, oy, oz) = (ox.coeffs_mut(), oy.coeffs_mut(), oz.coeffs_mut());
        let i_times = |k: f64, c: Complex<f64>| Complex::new(-k * c.im, k * c.re);
        let mut idx = 0;
        for ix in 0..n {
            let kx = g.wavenumber_deriv(ix);
            for iy in 0..n {
                let ky = g.wavenumber_deriv(iy);
                for iz in 0..n {
                    let kz = g.wavenumber_deriv(iz);
                    ox[idx] = i_times(ky, cz[idx]) - i_times(kz, cy[idx]);
                    oy[idx] = i_times(kz, cx[idx]) - i_times(kx, cz[idx]);
                    oz[idx] = i_times(kx, cy[idx]) - i_times(ky, cx[idx]);
                    idx += 1;
                }
            }
        }
    }
    SpectralVectorField::from_raw(out)
}

/// Spectral Laplacian (full symmetric wavenumber table).
pub fn laplacian(s: &ScalarField) -> Result<ScalarField> {
    Ok(laplacian_spectral(&s.to_spectral()?).to_nodal())
}

pub fn laplacian_spectral(s: &SpectralScalarField) -> SpectralScalarField {
    let g = s.grid();
    let n = g.n();
    let mut out = s.clone();
    let dst = out.coeffs_mut();
    let mut idx = 0;
    for ix in 0..n {
        let kx = g.wavenumber(ix);
        for iy in 0..n {
            let ky = g.wavenumber(iy);
            for iz in 0..n {
                let kz = g.wavenumber(iz);
                dst[idx] *= -(kx * kx + ky * ky + kz * kz);
                idx += 1;
            }
        }
    }
    out
}

/// Leray projection onto divergence-free fields. Removes the gradient part,
/// preserves the mean mode, and is idempotent.
pub fn leray_project(v: &VectorField) -> Result<VectorField> {
    if !v.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut spec = v.to_spectral()?;
    leray_project_spectral(&mut spec);
    Ok(spec.to_nodal())
}

pub fn leray_project_spectral(v: &mut SpectralVectorField) {
    let g = v.grid();
    let n = g.n();
    let mut idx = 0;
    for ix in 0..n {
        let kx = g.wavenumber_deriv(ix);
        for iy in 0..n {
            let ky = g.wavenumber_deriv(iy);
            for iz in 0..n {
                let kz = g.wavenumber_deriv(iz);
                let k2 = kx * kx + ky * ky + kz * kz;
                if k2 > 0.0 {
                    let dot = kx * v.component(0).coeffs()[idx]
                        + ky * v.component(1).coeffs()[idx]
                        + kz * v.component(2).coeffs()[idx];
                    let scale = dot / k2;
                    v.component_mut(0).coeffs_mut()[idx] -= kx * scale;
                    v.component_mut(1).coeffs_mut()[idx] -= ky * scale;
                    v.component_mut(2).coeffs_mut()[idx] -= kz * scale;
                }
                idx += 1;
            }
        }
    }
}

/// Solve `-lap p = rhs` with zero-mean normalization.
///
/// The right-hand side must have (numerically) zero mean; on the torus a
/// nonzero mean makes the problem unsolvable, which stands in for the
/// whole-space decay condition.
pub fn solve_poisson(rhs: &ScalarField) -> Result<ScalarField> {
    let spec = rhs.to_spectral()?;
    Ok(solve_poisson_spectral(&spec)?.to_nodal())
}

pub fn solve_poisson_spectral(rhs: &SpectralScalarField) -> Result<SpectralScalarField> {
    let g = rhs.grid();
    let n = g.n();
    let mean = rhs.mean_mode().re;
    let sup: f64 = rhs.coeffs().iter().map(|c| c.norm()).sum(); // upper bound on linf
    if mean.abs() > POISSON_MEAN_TOL * sup.max(f64::MIN_POSITIVE) {
        return Err(Error::NonZeroMean { mean });
    }
    let mut out = rhs.clone();
    let dst = out.coeffs_mut();
    dst[0] = Complex::new(0.0, 0.0);
    let mut idx = 0;
    for ix in 0..n {
        let kx = g.wavenumber(ix);
        for iy in 0..n {
            let ky = g.wavenumber(iy);
            for iz in 0..n {
                let kz = g.wavenumber(iz);
                let k2 = kx * kx + ky * ky + kz * kz;
                if k2 > 0.0 {
                    dst[idx] /= k2;
                }
                idx += 1;
            }
        }
    }
    Ok(out)
}

/// Two-thirds rule: zero every mode with any `|j| > n/3`; surviving modes are
/// bit-identical to the input.
pub fn dealias(s: &SpectralScalarField) -> SpectralScalarField {
    let mut out = s.clone();
    dealias_inplace(&mut out);
    out
}

pub fn dealias_inplace(s: &mut SpectralScalarField) {
    let g = s.grid();
    let n = g.n();
    let keep: Vec<bool> = (0..n).map(|i| g.in_dealias_band(i)).collect();
    let dst = s.coeffs_mut();
    let mut idx = 0;
    for ix in 0..n {
        for iy in 0..n {
            let keep_xy = keep[ix] && keep[iy];
            for iz in 0..n {
                if !(keep_xy && keep[iz]) {
                    dst[idx] = Complex::new(0.0, 0.0);
                }
                idx += 1;
            }
        }
    }
}

pub fn dealias_vector_inplace(v: &mut SpectralVectorField) {
    for i in 0..3 {
        dealias_inplace(v.component_mut(i));
    }
}

/// Velocity gradient tensor; `rows[i]` holds the spectral gradient of
/// component i, so `rows[i].component(j)` is du_i/dx_j.
pub fn velocity_gradient(v: &VectorField) -> Result<[SpectralVectorField; 3]> {
    let spec = v.to_spectral()?;
    Ok([
        gradient_spectral(spec.component(0)),
        gradient_spectral(spec.component(1)),
        gradient_spectral(spec.component(2)),
    ])
}
