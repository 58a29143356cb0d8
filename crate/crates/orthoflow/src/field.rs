//! Nodal and spectral field containers on a periodic cubic grid.

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::Grid;
use num_complex::Complex;

/// Real samples at grid nodes, axis-major with z fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    /// Wrap nodal samples; checks the sample count and finiteness.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::SampleCountMismatch {
                got: values.len(),
                expected: grid.node_count(),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.node_count());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::from_raw(grid, vec![0.0; grid.node_count()])
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self::from_raw(grid, vec![c; grid.node_count()])
    }

    /// Sample a closure at every node.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.node_count());
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    values.push(f(grid.node_position(ix, iy, iz)));
                }
            }
        }
        Self::from_raw(grid, values)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        self.values[self.grid.idx(ix, iy, iz)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Max-norm over nodes.
    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Volume-weighted L2 norm, `sqrt(sum f^2 * dV)`.
    pub fn l2(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Volume integral `sum f * dV`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Forward transform to normalized spectral coefficients.
    pub fn to_spectral(&self) -> Result<SpectralScalarField> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(SpectralScalarField {
            grid: self.grid,
            coeffs: fft::plan(self.grid.n()).forward(&self.values),
        })
    }
}

/// Spectral coefficients `c_k` with `f(x) = sum_k c_k exp(i k.x)`,
/// stored in the same axis-major ordering as nodal data.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralScalarField {
    grid: Grid,
    coeffs: Vec<Complex<f64>>,
}

impl SpectralScalarField {
    pub(crate) fn from_raw(grid: Grid, coeffs: Vec<Complex<f64>>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.node_count());
        Self { grid, coeffs }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::from_raw(grid, vec![Complex::new(0.0, 0.0); grid.node_count()])
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex<f64>] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex<f64>] {
        &mut self.coeffs
    }

    /// Inverse transform back to nodal samples.
    pub fn to_nodal(&self) -> ScalarField {
        ScalarField::from_raw(self.grid, fft::plan(self.grid.n()).inverse(&self.coeffs))
    }

    /// Spectral-side L2 norm, `sqrt(sum |c_k|^2 * V)`; matches `ScalarField::l2`
    /// by Parseval.
    pub fn l2(&self) -> f64 {
        (self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.volume()).sqrt()
    }

    pub fn mean_mode(&self) -> Complex<f64> {
        self.coeffs[0]
    }
}

/// Three scalar components sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: [ScalarField; 3],
}

impl VectorField {
    pub fn new(components: [ScalarField; 3]) -> Result<Self> {
        if components[0].grid() != components[1].grid()
            || components[0].grid() != components[2].grid()
        {
            return Err(Error::GridMismatch);
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            components: [
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
            ],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let n = grid.n();
        let count = grid.node_count();
        let mut x = Vec::with_capacity(count);
        let mut y = Vec::with_capacity(count);
        let mut z = Vec::with_capacity(count);
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    let v = f(grid.node_position(ix, iy, iz));
                    x.push(v[0]);
                    y.push(v[1]);
                    z.push(v[2]);
                }
            }
        }
        Self {
            components: [
                ScalarField::from_raw(grid, x),
                ScalarField::from_raw(grid, y),
                ScalarField::from_raw(grid, z),
            ],
        }
    }

    pub fn grid(&self) -> Grid {
        self.components[0].grid()
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn x(&self) -> &ScalarField {
        &self.components[0]
    }

    pub fn y(&self) -> &ScalarField {
        &self.components[1]
    }

    pub fn z(&self) -> &ScalarField {
        &self.components[2]
    }

    pub fn components(&self) -> &[ScalarField; 3] {
        &self.components
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize, iz: usize) -> [f64; 3] {
        [
            self.components[0].at(ix, iy, iz),
            self.components[1].at(ix, iy, iz),
            self.components[2].at(ix, iy, iz),
        ]
    }

    /// Pointwise Euclidean magnitude as a scalar field.
    pub fn magnitude(&self) -> ScalarField {
        let g = self.grid();
        let vals = (0..g.node_count())
            .map(|i| {
                let a = self.components[0].values()[i];
                let b = self.components[1].values()[i];
                let c = self.components[2].values()[i];
                (a * a + b * b + c * c).sqrt()
            })
            .collect();
        ScalarField::from_raw(g, vals)
    }

    /// Pointwise squared magnitude.
    pub fn magnitude_squared(&self) -> ScalarField {
        let g = self.grid();
        let vals = (0..g.node_count())
            .map(|i| {
                let a = self.components[0].values()[i];
                let b = self.components[1].values()[i];
                let c = self.components[2].values()[i];
                a * a + b * b + c * c
            })
            .collect();
        ScalarField::from_raw(g, vals)
    }

    /// Sup of the pointwise magnitude; safe against overflow of squared
    /// components (keeps the CFL bound meaningful for enormous states).
    pub fn linf(&self) -> f64 {
        let comp_max = self
            .components
            .iter()
            .map(|c| c.linf())
            .fold(0.0_f64, f64::max);
        if comp_max == 0.0 {
            return 0.0;
        }
        if comp_max < 1e150 {
            let mut m = 0.0_f64;
            for i in 0..self.grid().node_count() {
                let a = self.components[0].values()[i];
                let b = self.components[1].values()[i];
                let c = self.components[2].values()[i];
                m = m.max(a * a + b * b + c * c);
            }
            m.sqrt()
        } else {
            let mut m = 0.0_f64;
            for i in 0..self.grid().node_count() {
                let a = self.components[0].values()[i] / comp_max;
                let b = self.components[1].values()[i] / comp_max;
                let c = self.components[2].values()[i] / comp_max;
                m = m.max(a * a + b * b + c * c);
            }
            m.sqrt() * comp_max
        }
    }

    /// Pointwise dot product with another vector field.
    pub fn dot(&self, other: &Self) -> Result<ScalarField> {
        if self.grid() != other.grid() {
            return Err(Error::GridMismatch);
        }
        let g = self.grid();
        let vals = (0..g.node_count())
            .map(|i| {
                (0..3)
                    .map(|c| self.components[c].values()[i] * other.components[c].values()[i])
                    .sum()
            })
            .collect();
        Ok(ScalarField::from_raw(g, vals))
    }

    /// Pointwise cross product.
    pub fn cross(&self, other: &Self) -> Result<Self> {
        if self.grid() != other.grid() {
            return Err(Error::GridMismatch);
        }
        let g = self.grid();
        let count = g.node_count();
        let (ax, ay, az) = (
            self.components[0].values(),
            self.components[1].values(),
            self.components[2].values(),
        );
        let (bx, by, bz) = (
            other.components[0].values(),
            other.components[1].values(),
            other.components[2].values(),
        );
        let mut cx = Vec::with_capacity(count);
        let mut cy = Vec::with_capacity(count);
        let mut cz = Vec::with_capacity(count);
        for i in 0..count {
            cx.push(ay[i] * bz[i] - az[i] * by[i]);
            cy.push(az[i] * bx[i] - ax[i] * bz[i]);
            cz.push(ax[i] * by[i] - ay[i] * bx[i]);
        }
        Ok(Self {
            components: [
                ScalarField::from_raw(g, cx),
                ScalarField::from_raw(g, cy),
                ScalarField::from_raw(g, cz),
            ],
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            components: [
                self.components[0].scaled(s),
                self.components[1].scaled(s),
                self.components[2].scaled(s),
            ],
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            components: [
                self.components[0].add(&other.components[0])?,
                self.components[1].add(&other.components[1])?,
                self.components[2].add(&other.components[2])?,
            ],
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            components: [
                self.components[0].sub(&other.components[0])?,
                self.components[1].sub(&other.components[1])?,
                self.components[2].sub(&other.components[2])?,
            ],
        })
    }

    pub fn to_spectral(&self) -> Result<SpectralVectorField> {
        Ok(SpectralVectorField {
            components: [
                self.components[0].to_spectral()?,
                self.components[1].to_spectral()?,
                self.components[2].to_spectral()?,
            ],
        })
    }
}

/// Spectral counterpart of `VectorField`.
#[derive(Debug, Clone)]
pub struct SpectralVectorField {
    components: [SpectralScalarField; 3],
}

impl SpectralVectorField {
    pub(crate) fn from_raw(components: [SpectralScalarField; 3]) -> Self {
        Self { components }
    }

    pub fn grid(&self) -> Grid {
        self.components[0].grid()
    }

    pub fn component(&self, i: usize) -> &SpectralScalarField {
        &self.components[i]
    }

    pub(crate) fn component_mut(&mut self, i: usize) -> &mut SpectralScalarField {
        &mut self.components[i]
    }

    pub fn to_nodal(&self) -> VectorField {
        VectorField {
            components: [
                self.components[0].to_nodal(),
                self.components[1].to_nodal(),
                self.components[2].to_nodal(),
            ],
        }
    }
}
