//! Thresholded zero-vorticity partition: the set where `|omega|` falls below
//! a relative threshold, its one-cell boundary shell (6-connectivity), and
//! the complement. Maximum-principle and subharmonicity quantities are
//! measured on these regions, never assumed.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::spectral::laplacian;

/// Region label for a single cell. The three labels partition the grid;
/// the shell is the part of the complement adjacent to the omega set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Omega,
    Shell,
    Complement,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::Omega => "omega",
            Region::Shell => "shell",
            Region::Complement => "complement",
        }
    }
}

/// Boolean lattice marking the thresholded zero-vorticity set and its shell.
#[derive(Debug, Clone)]
pub struct PartitionMask {
    grid: Grid,
    omega_set: Vec<bool>,
    boundary_shell: Vec<bool>,
    threshold_abs: f64,
    rel_threshold: f64,
}

impl PartitionMask {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn omega_set(&self) -> &[bool] {
        &self.omega_set
    }

    pub fn boundary_shell(&self) -> &[bool] {
        &self.boundary_shell
    }

    /// Absolute threshold `eps * |omega|_inf` that was applied.
    pub fn threshold_abs(&self) -> f64 {
        self.threshold_abs
    }

    pub fn rel_threshold(&self) -> f64 {
        self.rel_threshold
    }

    #[inline]
    pub fn region(&self, idx: usize) -> Region {
        if self.omega_set[idx] {
            Region::Omega
        } else if self.boundary_shell[idx] {
            Region::Shell
        } else {
            Region::Complement
        }
    }

    pub fn omega_count(&self) -> usize {
        self.omega_set.iter().filter(|&&b| b).count()
    }

    pub fn shell_count(&self) -> usize {
        self.boundary_shell.iter().filter(|&&b| b).count()
    }

    /// `|Omega_t| / |domain|` as a cell-count fraction.
    pub fn omega_fraction(&self) -> f64 {
        self.omega_count() as f64 / self.grid.node_count() as f64
    }

    /// Region of the node nearest to a (wrapped) point; used to classify
    /// particle positions.
    pub fn region_at_point(&self, p: [f64; 3]) -> Region {
        let n = self.grid.n();
        let h = self.grid.spacing();
        let mut id = [0usize; 3];
        for a in 0..3 {
            let w = self.grid.wrap(p[a]);
            id[a] = ((w / h).round() as usize) % n;
        }
        self.region(self.grid.idx(id[0], id[1], id[2]))
    }
}

/// Build the partition from a vorticity field with relative threshold
/// `0 < eps < 1`. If `|omega|_inf = 0` the omega set covers the whole grid
/// and the shell is empty.
pub fn zero_vorticity_mask(omega: &VectorField, rel_threshold: f64) -> Result<PartitionMask> {
    if !(rel_threshold > 0.0 && rel_threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "relative threshold must be in (0, 1), got {rel_threshold}"
        )));
    }
    let grid = omega.grid();
    let n = grid.n();
    let sup = omega.linf();
    let threshold_abs = rel_threshold * sup;
    let mag = omega.magnitude();
    let omega_set: Vec<bool> = mag.values().iter().map(|&m| m <= threshold_abs).collect();

    let mut boundary_shell = vec![false; grid.node_count()];
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..n {
                let idx = grid.idx(ix, iy, iz);
                if omega_set[idx] {
                    continue;
                }
                let neighbors = [
                    grid.idx((ix + 1) % n, iy, iz),
                    grid.idx((ix + n - 1) % n, iy, iz),
                    grid.idx(ix, (iy + 1) % n, iz),
                    grid.idx(ix, (iy + n - 1) % n, iz),
                    grid.idx(ix, iy, (iz + 1) % n),
                    grid.idx(ix, iy, (iz + n - 1) % n),
                ];
                if neighbors.iter().any(|&j| omega_set[j]) {
                    boundary_shell[idx] = true;
                }
            }
        }
    }

    Ok(PartitionMask {
        grid,
        omega_set,
        boundary_shell,
        threshold_abs,
        rel_threshold,
    })
}

/// Suprema of `|u|^2` over the three disjoint regions; empty regions report
/// `None`, never zero, so inequalities cannot be satisfied vacuously.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxPrincipleReport {
    pub sup_sq_on_omega: Option<f64>,
    pub sup_sq_on_boundary: Option<f64>,
    pub sup_sq_on_complement: Option<f64>,
}

impl MaxPrincipleReport {
    /// The weak maximum principle `sup_Omega |u|^2 <= sup_shell |u|^2`,
    /// evaluable only when both regions are populated.
    pub fn holds(&self) -> Option<bool> {
        match (self.sup_sq_on_omega, self.sup_sq_on_boundary) {
            (Some(o), Some(b)) => Some(o <= b),
            _ => None,
        }
    }
}

pub fn max_principle_report(u: &VectorField, mask: &PartitionMask) -> Result<MaxPrincipleReport> {
    if u.grid() != mask.grid() {
        return Err(Error::GridMismatch);
    }
    let sq = u.magnitude_squared();
    let mut sup = [None::<f64>; 3];
    for (idx, &v) in sq.values().iter().enumerate() {
        let slot = match mask.region(idx) {
            Region::Omega => 0,
            Region::Shell => 1,
            Region::Complement => 2,
        };
        sup[slot] = Some(sup[slot].map_or(v, |m: f64| m.max(v)));
    }
    Ok(MaxPrincipleReport {
        sup_sq_on_omega: sup[0],
        sup_sq_on_boundary: sup[1],
        sup_sq_on_complement: sup[2],
    })
}

/// Minimum of the spectral `lap |u|^2` over interior omega-set cells (cells
/// whose six neighbors all lie in the omega set). `None` when the interior
/// is empty.
pub fn subharmonicity_report(u: &VectorField, mask: &PartitionMask) -> Result<Option<f64>> {
    if u.grid() != mask.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = u.grid();
    let n = grid.n();
    let lap = laplacian(&u.magnitude_squared())?;
    let inside = mask.omega_set();
    let mut min: Option<f64> = None;
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..n {
                let idx = grid.idx(ix, iy, iz);
                if !inside[idx] {
                    continue;
                }
                let interior = inside[grid.idx((ix + 1) % n, iy, iz)]
                    && inside[grid.idx((ix + n - 1) % n, iy, iz)]
                    && inside[grid.idx(ix, (iy + 1) % n, iz)]
                    && inside[grid.idx(ix, (iy + n - 1) % n, iz)]
                    && inside[grid.idx(ix, iy, (iz + 1) % n)]
                    && inside[grid.idx(ix, iy, (iz + n - 1) % n)];
                if interior {
                    let v = lap.values()[idx];
                    min = Some(min.map_or(v, |m: f64| m.min(v)));
                }
            }
        }
    }
    Ok(min)
}

/// Per-sample omega-set fractions and the largest drift from the first
/// sample. The constancy claimed for the exact sets is measured, not assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSeries {
    pub fractions: Vec<f64>,
    pub max_drift: f64,
}

pub fn partition_measure_series(masks: &[PartitionMask]) -> Result<MeasureSeries> {
    if masks.len() < 2 {
        return Err(Error::TooFewSamples {
            need: 2,
            got: masks.len(),
        });
    }
    let fractions: Vec<f64> = masks.iter().map(|m| m.omega_fraction()).collect();
    let max_drift = fractions
        .iter()
        .map(|f| (f - fractions[0]).abs())
        .fold(0.0_f64, f64::max);
    Ok(MeasureSeries {
        fractions,
        max_drift,
    })
}

/// Scalar-field variant of the nearest-node lookup, shared by diagnostics.
pub fn nearest_node_value(field: &ScalarField, p: [f64; 3]) -> f64 {
    let grid = field.grid();
    let n = grid.n();
    let h = grid.spacing();
    let mut id = [0usize; 3];
    for a in 0..3 {
        let w = grid.wrap(p[a]);
        id[a] = ((w / h).round() as usize) % n;
    }
    field.at(id[0], id[1], id[2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{init_abc, init_random_solenoidal, init_taylor_green};
    use crate::spectral::curl;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::new(n, 2.0 * PI).unwrap()
    }

    #[test]
    fn constant_field_fills_omega_set() {
        let g = grid(16);
        let u = VectorField::from_fn(g, |_| [0.7, 0.0, 0.0]);
        let w = curl(&u).unwrap();
        let mask = zero_vorticity_mask(&w, 1e-6).unwrap();
        assert_eq!(mask.omega_count(), g.node_count());
        assert_eq!(mask.shell_count(), 0);
        assert_eq!(mask.threshold_abs(), 0.0);

        let report = max_principle_report(&u, &mask).unwrap();
        let sup = report.sup_sq_on_omega.unwrap();
        assert!((sup - 0.49).abs() < 1e-15);
        assert_eq!(report.sup_sq_on_boundary, None);
        assert_eq!(report.sup_sq_on_complement, None);
        assert_eq!(report.holds(), None);

        // Constant |u|^2 is flat: the subharmonicity minimum is zero.
        let sub = subharmonicity_report(&u, &mask).unwrap().unwrap();
        assert!(sub.abs() < 1e-12);
    }

    #[test]
    fn abc_stagnation_points_are_lattice_nodes_at_n32() {
        let g = grid(32);
        let st = init_abc(g, 1.0, 1.0, 1.0);
        let w = curl(st.velocity()).unwrap();
        // Brute-force scan oracle: the eight ABC stagnation points sit at
        // odd multiples of pi/4, which are exact nodes when 8 divides n, so
        // the thresholded omega set is small but not empty.
        let eps = 1e-6;
        let thr = eps * w.linf();
        let mag = w.magnitude();
        let oracle_count = mag.values().iter().filter(|&&m| m <= thr).count();
        assert_eq!(oracle_count, 8, "expected the 8 diagonal stagnation nodes");

        let mask = zero_vorticity_mask(&w, eps).unwrap();
        assert_eq!(mask.omega_count(), oracle_count);
        // One of them: (3pi/4, 3pi/4, 3pi/4) = node (12, 12, 12).
        assert_eq!(mask.region(g.idx(12, 12, 12)), Region::Omega);
        assert!(mask.shell_count() > 0);

        let report = max_principle_report(st.velocity(), &mask).unwrap();
        // Beltrami: u vanishes with omega, so the omega-set sup is roundoff.
        assert!(report.sup_sq_on_omega.unwrap() < 1e-28);
        assert!(report.sup_sq_on_boundary.unwrap() > 0.0);
        let sup = report.sup_sq_on_complement.unwrap();
        assert!((sup - 6.0).abs() < 1e-12, "sup |u|^2 = {sup}");
        assert_eq!(report.holds(), Some(true));
        // Beltrami vorticity equals velocity: |omega| at (pi/2,0,0) is sqrt(5).
        let m = mag.at(8, 0, 0);
        assert!((m - 5.0_f64.sqrt()).abs() < 1e-12);
        assert_eq!(mask.region(g.idx(8, 0, 0)), Region::Complement);
    }

    #[test]
    fn taylor_green_mask_matches_brute_force_scan() {
        let g = grid(32);
        let st = init_taylor_green(g);
        let w = curl(st.velocity()).unwrap();
        let eps = 1e-6;
        let mask = zero_vorticity_mask(&w, eps).unwrap();

        let thr = eps * w.linf();
        let mag = w.magnitude();
        let oracle_count = mag.values().iter().filter(|&&m| m <= thr).count();
        assert!(oracle_count > 0, "TG t=0 has exact lattice vorticity zeros");
        assert_eq!(mask.omega_count(), oracle_count);
        assert!((mask.omega_fraction() - oracle_count as f64 / g.node_count() as f64).abs() == 0.0);

        for idx in 0..g.node_count() {
            let in_omega = mag.values()[idx] <= thr;
            assert_eq!(mask.omega_set()[idx], in_omega);
        }
    }

    #[test]
    fn subharmonicity_tracks_interpolant_fd_oracle() {
        let g = grid(32);
        let st = init_taylor_green(g);
        let u = st.velocity();
        let w = curl(u).unwrap();
        // A loose threshold gives the omega set a populated interior.
        let mask = zero_vorticity_mask(&w, 0.5).unwrap();
        let min = subharmonicity_report(u, &mask).unwrap().unwrap();

        // Oracle: locate the interior cell attaining the minimum and
        // re-evaluate lap|u|^2 there by 4th-order finite differences of the
        // trig interpolant with a step much finer than the grid.
        let sq = u.magnitude_squared();
        let lap = laplacian(&sq).unwrap();
        let inside = mask.omega_set();
        let n = g.n();
        let mut best = (f64::INFINITY, [0usize; 3]);
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    let idx = g.idx(ix, iy, iz);
                    if !inside[idx] {
                        continue;
                    }
                    let interior = inside[g.idx((ix + 1) % n, iy, iz)]
                        && inside[g.idx((ix + n - 1) % n, iy, iz)]
                        && inside[g.idx(ix, (iy + 1) % n, iz)]
                        && inside[g.idx(ix, (iy + n - 1) % n, iz)]
                        && inside[g.idx(ix, iy, (iz + 1) % n)]
                        && inside[g.idx(ix, iy, (iz + n - 1) % n)];
                    if interior && lap.values()[idx] < best.0 {
                        best = (lap.values()[idx], [ix, iy, iz]);
                    }
                }
            }
        }
        assert_eq!(best.0, min);

        let eval = crate::interp::FieldEvaluator::scalar(&sq).unwrap();
        let p = g.node_position(best.1[0], best.1[1], best.1[2]);
        let h = 5e-3;
        let mut fd = 0.0;
        for axis in 0..3 {
            let probe = |s: f64| {
                let mut q = p;
                q[axis] += s;
                eval.eval(q)
            };
            fd += (-probe(2.0 * h) + 16.0 * probe(h) - 30.0 * probe(0.0) + 16.0 * probe(-h)
                - probe(-2.0 * h))
                / (12.0 * h * h);
        }
        assert!((fd - min).abs() < 1e-6, "fd {fd} vs spectral {min}");
    }

    #[test]
    fn measure_series_drift() {
        let g = grid(16);
        let st = init_taylor_green(g);
        let w = curl(st.velocity()).unwrap();
        let m1 = zero_vorticity_mask(&w, 1e-6).unwrap();
        let m2 = zero_vorticity_mask(&w, 1e-6).unwrap();
        let series = partition_measure_series(&[m1.clone(), m2]).unwrap();
        assert_eq!(series.max_drift, 0.0);
        assert!(matches!(
            partition_measure_series(&[m1]),
            Err(Error::TooFewSamples { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn mask_partition_and_monotonicity(seed in 0u64..500, e1 in 1e-6f64..0.4, gap in 1.0f64..10.0) {
            let g = grid(8);
            let st = init_random_solenoidal(g, seed, -2.0, 2.0);
            let w = curl(st.velocity()).unwrap();
            let e2 = (e1 * gap).min(0.99);
            let small = zero_vorticity_mask(&w, e1).unwrap();
            let large = zero_vorticity_mask(&w, e2).unwrap();
            // Every cell carries exactly one label.
            for idx in 0..g.node_count() {
                let o = small.omega_set()[idx];
                let s = small.boundary_shell()[idx];
                prop_assert!(!(o && s));
                // Monotonicity of the omega set in the threshold.
                prop_assert!(!small.omega_set()[idx] || large.omega_set()[idx]);
            }
            prop_assert!(small.omega_count() + small.shell_count()
                + (0..g.node_count()).filter(|&i| small.region(i) == Region::Complement).count()
                == g.node_count());
        }
    }
}
