//! Cached 3D complex FFT on the axis-major (z fastest) layout.
//!
//! Each 3D transform is three rounds of batched contiguous 1D FFTs along the
//! fastest axis followed by a cyclic axis transpose, so after three rounds the
//! data returns to the canonical (x, y, z) layout with every axis transformed.
//! Coefficients are normalized so that `f(x) = sum_k c_k exp(i k.x)`.

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub(crate) struct Fft3 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();

/// Plan (or fetch the cached plan) for an n^3 transform.
pub(crate) fn plan(n: usize) -> Arc<Fft3> {
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Fft3 {
                n,
                fwd: planner.plan_fft_forward(n),
                inv: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// Cyclic transpose: input layout (a, b, c) with c fastest becomes
/// output layout (c, a, b) with b fastest.
fn cyclic_transpose(n: usize, src: &[Complex<f64>], dst: &mut [Complex<f64>]) {
    let mut o = 0;
    for c in 0..n {
        for a in 0..n {
            let base = a * n * n + c;
            for b in 0..n {
                dst[o] = src[base + b * n];
                o += 1;
            }
        }
    }
}

impl Fft3 {
    fn run(&self, mut a: Vec<Complex<f64>>, fft: &Arc<dyn Fft<f64>>) -> Vec<Complex<f64>> {
        let n = self.n;
        let mut b = vec![Complex::new(0.0, 0.0); a.len()];
        let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for _ in 0..3 {
            for chunk in a.chunks_exact_mut(n) {
                fft.process_with_scratch(chunk, &mut scratch);
            }
            cyclic_transpose(n, &a, &mut b);
            std::mem::swap(&mut a, &mut b);
        }
        a
    }

    /// Real nodal samples -> normalized spectral coefficients.
    pub(crate) fn forward(&self, values: &[f64]) -> Vec<Complex<f64>> {
        debug_assert_eq!(values.len(), self.n * self.n * self.n);
        let buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
        let mut out = self.run(buf, &self.fwd);
        let scale = 1.0 / (self.n * self.n * self.n) as f64;
        for c in &mut out {
            *c *= scale;
        }
        out
    }

    /// Normalized spectral coefficients -> real nodal samples.
    pub(crate) fn inverse(&self, coeffs: &[Complex<f64>]) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), self.n * self.n * self.n);
        let out = self.run(coeffs.to_vec(), &self.inv);
        out.iter().map(|c| c.re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_harmonic_lands_on_one_mode_pair() {
        let n = 8;
        let fft = plan(n);
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let mut values = vec![0.0; n * n * n];
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    values[(ix * n + iy) * n + iz] = (ix as f64 * h).sin();
                }
            }
        }
        let coeffs = fft.forward(&values);
        // sin(x) = (e^{ix} - e^{-ix}) / 2i: modes (1,0,0) and (-1,0,0) at -+ i/2.
        let plus = coeffs[(1 * n + 0) * n + 0];
        let minus = coeffs[((n - 1) * n + 0) * n + 0];
        assert!((plus - Complex::new(0.0, -0.5)).norm() < 1e-14);
        assert!((minus - Complex::new(0.0, 0.5)).norm() < 1e-14);
        let leak: f64 = coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != (n + 0) * n && *i != ((n - 1) * n) * n)
            .map(|(_, c)| c.norm())
            .sum();
        assert!(leak < 1e-12, "leakage {leak}");
    }

    #[test]
    fn forward_inverse_round_trip() {
        let n = 8;
        let fft = plan(n);
        // Deterministic quasi-random samples.
        let values: Vec<f64> = (0..n * n * n)
            .map(|i| ((i as f64 * 0.7311) % 1.0) - 0.5)
            .collect();
        let back = fft.inverse(&fft.forward(&values));
        let err = values
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        assert!(err < 1e-13, "round trip error {err}");
    }
}
