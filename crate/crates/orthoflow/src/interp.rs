//! Off-grid field evaluation: trigonometric interpolation (exact for
//! band-limited fields) up to n = 64, trilinear fallback above.
//!
//! The trig evaluator contracts only the spectrally active slots of each
//! axis, so low-mode fields evaluate in far fewer operations than n^3.

use crate::error::Result;
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use num_complex::Complex;

/// Largest resolution evaluated trigonometrically.
pub const TRIG_INTERP_MAX_N: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpMode {
    Trigonometric,
    Trilinear,
}

impl InterpMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            InterpMode::Trigonometric => "trigonometric",
            InterpMode::Trilinear => "trilinear",
        }
    }
}

enum Inner {
    Trig {
        comps: Vec<Vec<Complex<f64>>>,
        active: [Vec<usize>; 3],
    },
    Trilinear {
        comps: Vec<Vec<f64>>,
    },
}

/// Evaluator for one or three field components at arbitrary points.
pub struct FieldEvaluator {
    grid: Grid,
    inner: Inner,
}

fn active_slots(grid: Grid, comps: &[Vec<Complex<f64>>]) -> [Vec<usize>; 3] {
    let n = grid.n();
    let mut seen = [vec![false; n], vec![false; n], vec![false; n]];
    for coeffs in comps {
        let mut idx = 0;
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    if coeffs[idx].norm_sqr() > 0.0 {
                        seen[0][ix] = true;
                        seen[1][iy] = true;
                        seen[2][iz] = true;
                    }
                    idx += 1;
                }
            }
        }
    }
    seen.map(|axis| {
        (0..n)
            .filter(|&i| axis[i])
            .collect::<Vec<usize>>()
    })
}

impl FieldEvaluator {
    pub fn scalar(field: &ScalarField) -> Result<Self> {
        Self::build(field.grid(), std::slice::from_ref(field))
    }

    pub fn vector(field: &VectorField) -> Result<Self> {
        Self::build(field.grid(), field.components())
    }

    fn build(grid: Grid, fields: &[ScalarField]) -> Result<Self> {
        let inner = if grid.n() <= TRIG_INTERP_MAX_N {
            let comps: Vec<Vec<Complex<f64>>> = fields
                .iter()
                .map(|f| f.to_spectral().map(|s| s.coeffs().to_vec()))
                .collect::<Result<_>>()?;
            let active = active_slots(grid, &comps);
            Inner::Trig { comps, active }
        } else {
            Inner::Trilinear {
                comps: fields.iter().map(|f| f.values().to_vec()).collect(),
            }
        };
        Ok(Self { grid, inner })
    }

    pub fn mode(&self) -> InterpMode {
        match self.inner {
            Inner::Trig { .. } => InterpMode::Trigonometric,
            Inner::Trilinear { .. } => InterpMode::Trilinear,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    fn phases(&self, slots: &[usize], x: f64, deriv: bool) -> (Vec<Complex<f64>>, Vec<f64>) {
        let g = self.grid;
        let mut ph = Vec::with_capacity(slots.len());
        let mut kk = Vec::with_capacity(if deriv { slots.len() } else { 0 });
        for &s in slots {
            let k = g.wavenumber(s);
            let (sin, cos) = (k * x).sin_cos();
            ph.push(Complex::new(cos, sin));
            if deriv {
                kk.push(g.wavenumber_deriv(s));
            }
        }
        (ph, kk)
    }

    /// Evaluate the first (or only) component.
    pub fn eval(&self, p: [f64; 3]) -> f64 {
        self.eval_all(p)[0]
    }

    /// Evaluate every stored component at a point (periodically wrapped).
    pub fn eval_all(&self, p: [f64; 3]) -> [f64; 3] {
        let q = self.grid.wrap_point(p);
        match &self.inner {
            Inner::Trig { comps, active } => {
                let n = self.grid.n();
                let (px, _) = self.phases(&active[0], q[0], false);
                let (py, _) = self.phases(&active[1], q[1], false);
                let (pz, _) = self.phases(&active[2], q[2], false);
                let mut out = [0.0; 3];
                for (ci, coeffs) in comps.iter().enumerate() {
                    let mut acc = Complex::new(0.0, 0.0);
                    for (ai, &sx) in active[0].iter().enumerate() {
                        let mut bx = Complex::new(0.0, 0.0);
                        for (bi, &sy) in active[1].iter().enumerate() {
                            let row = (sx * n + sy) * n;
                            let mut bz = Complex::new(0.0, 0.0);
                            for (gi, &sz) in active[2].iter().enumerate() {
                                bz += coeffs[row + sz] * pz[gi];
                            }
                            bx += bz * py[bi];
                        }
                        acc += bx * px[ai];
                    }
                    out[ci] = acc.re;
                }
                out
            }
            Inner::Trilinear { comps } => {
                let mut out = [0.0; 3];
                for (ci, vals) in comps.iter().enumerate() {
                    out[ci] = self.trilinear(vals, q).0;
                }
                out
            }
        }
    }

    /// Joint value and gradient of all components: returns `(v, grad)` with
    /// `grad[i][j] = d v_i / d x_j`.
    pub fn eval_all_with_gradient(&self, p: [f64; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
        let q = self.grid.wrap_point(p);
        match &self.inner {
            Inner::Trig { comps, active } => {
                let n = self.grid.n();
                let (px, kx) = self.phases(&active[0], q[0], true);
                let (py, ky) = self.phases(&active[1], q[1], true);
                let (pz, kz) = self.phases(&active[2], q[2], true);
                let mut vals = [0.0; 3];
                let mut grads = [[0.0; 3]; 3];
                for (ci, coeffs) in comps.iter().enumerate() {
                    let mut a0 = Complex::new(0.0, 0.0);
                    let mut ax = Complex::new(0.0, 0.0);
                    let mut ay = Complex::new(0.0, 0.0);
                    let mut az = Complex::new(0.0, 0.0);
                    for (ai, &sx) in active[0].iter().enumerate() {
                        let mut b0 = Complex::new(0.0, 0.0);
                        let mut by = Complex::new(0.0, 0.0);
                        let mut bz = Complex::new(0.0, 0.0);
                        for (bi, &sy) in active[1].iter().enumerate() {
                            let row = (sx * n + sy) * n;
                            let mut c0 = Complex::new(0.0, 0.0);
                            let mut cz = Complex::new(0.0, 0.0);
                            for (gi, &sz) in active[2].iter().enumerate() {
                                let t = coeffs[row + sz] * pz[gi];
                                c0 += t;
                                cz += t * kz[gi];
                            }
                            b0 += c0 * py[bi];
                            bz += cz * py[bi];
                            by += c0 * py[bi] * ky[bi];
                        }
                        a0 += b0 * px[ai];
                        ax += b0 * px[ai] * kx[ai];
                        ay += by * px[ai];
                        az += bz * px[ai];
                    }
                    vals[ci] = a0.re;
                    // d/dx sum c e^{ikx} = sum (ik) c e^{ikx}: real part of i*z is -Im(z).
                    grads[ci][0] = -ax.im;
                    grads[ci][1] = -ay.im;
                    grads[ci][2] = -az.im;
                }
                (vals, grads)
            }
            Inner::Trilinear { comps } => {
                let mut vals = [0.0; 3];
                let mut grads = [[0.0; 3]; 3];
                for (ci, data) in comps.iter().enumerate() {
                    let (v, g) = self.trilinear(data, q);
                    vals[ci] = v;
                    grads[ci] = g;
                }
                (vals, grads)
            }
        }
    }

    fn trilinear(&self, vals: &[f64], q: [f64; 3]) -> (f64, [f64; 3]) {
        let g = self.grid;
        let n = g.n();
        let h = g.spacing();
        let mut i0 = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let t = q[a] / h;
            let f = t.floor();
            i0[a] = (f as usize) % n;
            frac[a] = t - f;
        }
        let i1 = [(i0[0] + 1) % n, (i0[1] + 1) % n, (i0[2] + 1) % n];
        let c = |ix: usize, iy: usize, iz: usize| vals[g.idx(ix, iy, iz)];
        let corner = [
            c(i0[0], i0[1], i0[2]),
            c(i0[0], i0[1], i1[2]),
            c(i0[0], i1[1], i0[2]),
            c(i0[0], i1[1], i1[2]),
            c(i1[0], i0[1], i0[2]),
            c(i1[0], i0[1], i1[2]),
            c(i1[0], i1[1], i0[2]),
            c(i1[0], i1[1], i1[2]),
        ];
        let (fx, fy, fz) = (frac[0], frac[1], frac[2]);
        let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
        let v00 = lerp(corner[0], corner[1], fz);
        let v01 = lerp(corner[2], corner[3], fz);
        let v10 = lerp(corner[4], corner[5], fz);
        let v11 = lerp(corner[6], corner[7], fz);
        let v0 = lerp(v00, v01, fy);
        let v1 = lerp(v10, v11, fy);
        let value = lerp(v0, v1, fx);
        let dx = (v1 - v0) / h;
        let dy = (lerp(v01 - v00, v11 - v10, fx)) / h;
        let dz00 = corner[1] - corner[0];
        let dz01 = corner[3] - corner[2];
        let dz10 = corner[5] - corner[4];
        let dz11 = corner[7] - corner[6];
        let dz = lerp(lerp(dz00, dz01, fy), lerp(dz10, dz11, fy), fx) / h;
        (value, [dx, dy, dz])
    }
}

/// Interpolated velocity at one point; exact at grid nodes and for
/// band-limited fields in trigonometric mode.
pub fn interpolate_velocity(u: &VectorField, p: [f64; 3]) -> Result<[f64; 3]> {
    Ok(FieldEvaluator::vector(u)?.eval_all(p))
}
