//! Discretization grid on the infinite cylinder.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Cell-centered grid on [s_min, s_max] x [0, 2 pi). Cell centers are
/// `s_i = s_min + (i + 1/2) ds`, `theta_j = j * dtheta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderLattice {
    pub s_min: f64,
    pub s_max: f64,
    pub n_s: usize,
    pub n_theta: usize,
}

impl CylinderLattice {
    pub fn new(s_min: f64, s_max: f64, n_s: usize, n_theta: usize) -> Result<Self> {
        if !(s_min < 0.0 && s_max > 0.0) {
            return Err(Error::domain(format!(
                "lattice must straddle s = 0, got [{s_min}, {s_max}]"
            )));
        }
        if n_s < 4 || n_theta < 4 {
            return Err(Error::domain("need at least 4 cells in each direction"));
        }
        if n_theta % 2 != 0 {
            return Err(Error::domain("n_theta must be even"));
        }
        Ok(Self { s_min, s_max, n_s, n_theta })
    }

    /// Truncation rule for a target insertion time t: the window [-(t+10), t+10]
    /// with the requested resolution, theta cells fixed by `n_theta`.
    pub fn for_time(t: f64, ds_target: f64, n_theta: usize) -> Result<Self> {
        let pad = 10.0;
        let half = t.max(0.0) + pad;
        let n_s = ((2.0 * half / ds_target).ceil() as usize).max(4);
        Self::new(-half, half, n_s, n_theta)
    }

    /// Asymmetric window, used by functionals whose two sides have different
    /// decay rates.
    pub fn asymmetric(s_min: f64, s_max: f64, ds_target: f64, n_theta: usize) -> Result<Self> {
        let n_s = (((s_max - s_min) / ds_target).ceil() as usize).max(4);
        Self::new(s_min, s_max, n_s, n_theta)
    }

    pub fn ds(&self) -> f64 {
        (self.s_max - self.s_min) / self.n_s as f64
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n_theta as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.ds() * self.dtheta()
    }

    pub fn n_cells(&self) -> usize {
        self.n_s * self.n_theta
    }

    pub fn s_center(&self, i: usize) -> f64 {
        self.s_min + (i as f64 + 0.5) * self.ds()
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.dtheta()
    }

    /// Row-major cell index.
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }
}
