use crate::error::{Error, Result};

/// Periodic cubic lattice: `n` nodes per axis over a box of edge `length`.
///
/// Nodal storage everywhere in this crate is axis-major with z fastest:
/// `idx = (ix * n + iy) * n + iz`. Spectral layouts reuse the same ordering
/// with the standard symmetric frequency table `0, 1, .., n/2-1, -n/2, .., -1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    /// `n` must be a power of two >= 8; `length` positive (2*pi is the usual box).
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidResolution(n));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidLength(length));
        }
        Ok(Self { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Node spacing `length / n`.
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn node_count(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Cell volume element for quadrature, `spacing()^3`.
    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        h * h * h
    }

    pub fn volume(&self) -> f64 {
        self.length * self.length * self.length
    }

    #[inline]
    pub fn idx(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    #[inline]
    pub fn node_position(&self, ix: usize, iy: usize, iz: usize) -> [f64; 3] {
        let h = self.spacing();
        [ix as f64 * h, iy as f64 * h, iz as f64 * h]
    }

    /// Integer frequency at slot `i` in the symmetric layout.
    #[inline]
    pub fn frequency(&self, i: usize) -> i64 {
        if i <= self.n / 2 - 1 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Per-axis integer frequency table, e.g. `{0,1,2,3,-4,-3,-2,-1}` for n = 8.
    pub fn frequencies(&self) -> Vec<i64> {
        (0..self.n).map(|i| self.frequency(i)).collect()
    }

    /// Physical wavenumber `2*pi*j / length` at slot `i`, Nyquist included.
    ///
    /// Used for symmetric multipliers (Laplacian, Poisson inversion, viscous
    /// integrating factor) where the Nyquist mode has a well-defined k^2.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.frequency(i) as f64 / self.length
    }

    /// Physical wavenumber for odd-order derivatives: the Nyquist slot is
    /// zeroed so spectral gradients of real fields stay real and the
    /// grad/div/curl algebra closes exactly.
    #[inline]
    pub fn wavenumber_deriv(&self, i: usize) -> f64 {
        if i == self.n / 2 {
            0.0
        } else {
            self.wavenumber(i)
        }
    }

    /// Full wavenumber table for one axis.
    pub fn wavenumber_table(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.wavenumber(i)).collect()
    }

    /// Wrap a coordinate into `[0, length)`.
    #[inline]
    pub fn wrap(&self, x: f64) -> f64 {
        let w = x.rem_euclid(self.length);
        // rem_euclid can return `length` itself when x is a tiny negative.
        if w >= self.length {
            0.0
        } else {
            w
        }
    }

    /// Wrap a point componentwise into the box.
    #[inline]
    pub fn wrap_point(&self, p: [f64; 3]) -> [f64; 3] {
        [self.wrap(p[0]), self.wrap(p[1]), self.wrap(p[2])]
    }

    /// True if the mode index survives the two-thirds rule (`3|j| <= n`).
    #[inline]
    pub fn in_dealias_band(&self, i: usize) -> bool {
        3 * self.frequency(i).unsigned_abs() as usize <= self.n
    }
}
