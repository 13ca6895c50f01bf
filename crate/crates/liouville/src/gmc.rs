//! Chaos cell weights under insertion profiles: the renormalized lattice
//! proxy of the GMC measure with momentum drifts and Green-kernel terms.
//!
//! The weight of cell (i, j) is
//!
//! ```text
//! exp( gamma [ r_i + drift(s_i) + sum_k w_k K_k(s_i, theta_j) + offsets ]
//!      + gamma Y_ij - (gamma^2 / 2)(var_diag + v_i) ) * cell_area
//! ```
//!
//! where `r_i` is the radial value (Brownian, or a supplied deterministic
//! path), `v_i` its variance, and `Y` the lateral noise. With this
//! renormalization the expected weight is `exp(gamma * deterministic part) *
//! cell_area` exactly. Profiles below package the standard total-mass
//! exponents in this convention; drifts written in the `(alpha - Q) s` form
//! carry an extra `+ (gamma/2)|s|` because the engine subtracts the radial
//! Wick term explicitly.

use crate::error::Result;
use crate::kernels::lateral_cov;
use crate::lattice::CylinderLattice;
use crate::params::LiouvilleParams;

/// Log-weights of weight overflow saturate at this exponent and are counted.
const SATURATION_EXP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// Full cylinder Green's function (radial overlap + lateral kernel).
    FullGreen,
    /// Lateral kernel only; what remains of an insertion term after the
    /// radial overlap has been absorbed into the drift or a change of measure.
    LateralOnly,
}

#[derive(Debug, Clone, Copy)]
pub struct KernelTerm {
    pub weight: f64,
    pub s0: f64,
    pub theta0: f64,
    pub kind: KernelKind,
}

/// Deterministic radial drift, continuous and vanishing at s = 0.
#[derive(Debug, Clone, Copy)]
pub enum Drift {
    Linear {
        slope_pos: f64,
        slope_neg: f64,
    },
    /// `slope_mid` up to the knot, `slope_after` beyond it (s >= 0 side).
    TiltedAfter {
        knot: f64,
        slope_mid: f64,
        slope_after: f64,
        slope_neg: f64,
    },
}

impl Drift {
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            Drift::Linear { slope_pos, slope_neg } => {
                if s >= 0.0 {
                    slope_pos * s
                } else {
                    slope_neg * s
                }
            }
            Drift::TiltedAfter { knot, slope_mid, slope_after, slope_neg } => {
                if s < 0.0 {
                    slope_neg * s
                } else if s <= knot {
                    slope_mid * s
                } else {
                    slope_mid * knot + slope_after * (s - knot)
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct InsertionProfile {
    pub drift: Drift,
    pub kernels: Vec<KernelTerm>,
    /// Constant added on the s < 0 side only (the `-u` of the exterior term).
    pub offset_neg: f64,
}

impl InsertionProfile {
    /// Total mass profile of the three-point correlation: momenta at
    /// (0, 1, infinity) mapped to (+inf drift, unit-circle kernel, -inf drift).
    pub fn three_point(a: [f64; 3], params: &LiouvilleParams) -> Self {
        let q = params.q();
        let g = params.gamma();
        InsertionProfile {
            drift: Drift::Linear {
                slope_pos: a[0] - q + g / 2.0,
                slope_neg: q - a[2] - g / 2.0,
            },
            kernels: vec![KernelTerm {
                weight: a[1],
                s0: 0.0,
                theta0: 0.0,
                kind: KernelKind::FullGreen,
            }],
            offset_neg: 0.0,
        }
    }

    /// Total mass profile of the four-point correlation with the moving
    /// insertion at cylinder position (t, phase).
    pub fn four_point(a: [f64; 4], t: f64, phase: f64, params: &LiouvilleParams) -> Self {
        let q = params.q();
        let g = params.gamma();
        InsertionProfile {
            drift: Drift::Linear {
                slope_pos: a[0] - q + g / 2.0,
                slope_neg: q - a[3] - g / 2.0,
            },
            kernels: vec![
                KernelTerm { weight: a[2], s0: 0.0, theta0: 0.0, kind: KernelKind::FullGreen },
                KernelTerm { weight: a[1], s0: t, theta0: phase, kind: KernelKind::FullGreen },
            ],
            offset_neg: 0.0,
        }
    }

    /// The four-point profile after a Cameron-Martin change of measure that
    /// removes drift `theta` on [0, t]: lateral-only kernels and the residual
    /// piecewise drift.
    pub fn four_point_tilted(
        a: [f64; 4],
        t: f64,
        phase: f64,
        theta: f64,
        params: &LiouvilleParams,
    ) -> Self {
        let q = params.q();
        let g = params.gamma();
        InsertionProfile {
            drift: Drift::TiltedAfter {
                knot: t,
                slope_mid: a[0] + a[1] - q - theta + g / 2.0,
                slope_after: a[0] - q + g / 2.0,
                slope_neg: q - a[3] - g / 2.0,
            },
            kernels: vec![
                KernelTerm { weight: a[2], s0: 0.0, theta0: 0.0, kind: KernelKind::LateralOnly },
                KernelTerm { weight: a[1], s0: t, theta0: phase, kind: KernelKind::LateralOnly },
            ],
            offset_neg: 0.0,
        }
    }

    /// Fused (merged-insertion) profile: the subcritical limit object with
    /// momentum a12 at +infinity, a3 on the unit circle, a4 at -infinity.
    pub fn fused(a12: f64, a3: f64, a4: f64, params: &LiouvilleParams) -> Self {
        Self::three_point([a12, a3, a4], params)
    }

    /// Profile of the random functional F_{a1, a2}(u, f): exterior Brownian
    /// side with drift (Q - a2) s and offset -u, path side carried through the
    /// radial values, and the a1 kernel on the unit circle.
    pub fn functional_f(a1: f64, a2: f64, u: f64, params: &LiouvilleParams) -> Self {
        let q = params.q();
        let g = params.gamma();
        InsertionProfile {
            drift: Drift::Linear { slope_pos: 0.0, slope_neg: q - a2 - g / 2.0 },
            kernels: vec![KernelTerm {
                weight: a1,
                s0: 0.0,
                theta0: 0.0,
                kind: KernelKind::LateralOnly,
            }],
            offset_neg: -u,
        }
    }

    /// Heavy-regime rewriting of the limit functional as a plain chaos
    /// integral over the whole cylinder: negative drift D = a1+a2-Q-kappa*gamma
    /// beyond the unit circle, (Q - a1) decay on the exterior side, and the a2
    /// kernel. Algebraically identical to `functional_f(a2, a1, 0)` evaluated
    /// on the drifted-path radial input.
    pub fn heavy_remark(a: [f64; 4], kappa: f64, params: &LiouvilleParams) -> Self {
        let q = params.q();
        let g = params.gamma();
        let d = a[0] + a[1] - q - kappa * g;
        InsertionProfile {
            drift: Drift::Linear {
                slope_pos: -d + g / 2.0,
                slope_neg: q - a[0] - g / 2.0,
            },
            kernels: vec![KernelTerm {
                weight: a[1],
                s0: 0.0,
                theta0: 0.0,
                kind: KernelKind::LateralOnly,
            }],
            offset_neg: 0.0,
        }
    }
}

/// Variance profile of the radial input.
#[derive(Debug, Clone)]
pub enum RadialVariance {
    /// Brownian radial part: Var = |s|.
    AbsS,
    /// Brownian on the negative side, deterministic path (variance 0) on the
    /// nonnegative side.
    BrownianNegOnly,
}

/// Precomputed deterministic part of the log-weights for one profile on one
/// lattice; `chaos` then folds in per-realization radial and lateral values.
pub struct WeightEngine {
    gamma: f64,
    n_s: usize,
    n_theta: usize,
    dets: Vec<f64>,
    /// First cell index with nonnegative s-center.
    first_nonneg: usize,
}

impl WeightEngine {
    pub fn new(
        lattice: &CylinderLattice,
        params: &LiouvilleParams,
        profile: &InsertionProfile,
        var_diag: f64,
        radial_var: RadialVariance,
    ) -> Result<Self> {
        let g = params.gamma();
        let log_area = lattice.cell_area().ln();
        let cap = lateral_cov(lattice.ds() / 2.0, 0.0)?;
        let mut dets = vec![0.0; lattice.n_cells()];
        let first_nonneg = (0..lattice.n_s)
            .find(|&i| lattice.s_center(i) >= 0.0)
            .unwrap_or(lattice.n_s);
        for i in 0..lattice.n_s {
            let s = lattice.s_center(i);
            let v_i = match radial_var {
                RadialVariance::AbsS => s.abs(),
                RadialVariance::BrownianNegOnly => {
                    if s < 0.0 {
                        s.abs()
                    } else {
                        0.0
                    }
                }
            };
            let base = g * (profile.drift.eval(s) + if s < 0.0 { profile.offset_neg } else { 0.0 })
                - 0.5 * g * g * (var_diag + v_i)
                + log_area;
            for j in 0..lattice.n_theta {
                let th = lattice.theta(j);
                let mut k_sum = 0.0;
                for k in &profile.kernels {
                    // kernel values are capped at the cell-averaging scale;
                    // only the singular cell and its immediate surroundings
                    // are affected
                    let lat = match lateral_cov(s - k.s0, th - k.theta0) {
                        Ok(v) => v.min(cap),
                        Err(_) => cap,
                    };
                    let radial = match k.kind {
                        KernelKind::FullGreen => {
                            if s * k.s0 >= 0.0 {
                                s.abs().min(k.s0.abs())
                            } else {
                                0.0
                            }
                        }
                        KernelKind::LateralOnly => 0.0,
                    };
                    k_sum += k.weight * (radial + lat);
                }
                dets[lattice.idx(i, j)] = base + g * k_sum;
            }
        }
        Ok(Self { gamma: g, n_s: lattice.n_s, n_theta: lattice.n_theta, dets, first_nonneg })
    }

    pub fn first_nonneg(&self) -> usize {
        self.first_nonneg
    }

    /// Log-weights for one realization.
    pub fn chaos(&self, radial: &[f64], lateral: &[f64]) -> ChaosMeasure {
        debug_assert_eq!(radial.len(), self.n_s);
        debug_assert_eq!(lateral.len(), self.dets.len());
        let mut logs = vec![0.0; self.dets.len()];
        let mut saturated = 0usize;
        for i in 0..self.n_s {
            let gr = self.gamma * radial[i];
            let row = i * self.n_theta;
            for j in 0..self.n_theta {
                let idx = row + j;
                let l = self.dets[idx] + gr + self.gamma * lateral[idx];
                if l > SATURATION_EXP {
                    saturated += 1;
                }
                logs[idx] = l;
            }
        }
        ChaosMeasure::from_logs(logs, self.n_s, self.n_theta, saturated)
    }
}

/// Cell masses of the discretized chaos measure, kept in log space.
#[derive(Debug, Clone)]
pub struct ChaosMeasure {
    pub log_weights: Vec<f64>,
    pub n_s: usize,
    pub n_theta: usize,
    pub saturated: usize,
    log_total: f64,
}

fn logsumexp(logs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = logs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = logs.map(|l| (l - m).exp()).sum();
    m + s.ln()
}

impl ChaosMeasure {
    pub fn from_logs(log_weights: Vec<f64>, n_s: usize, n_theta: usize, saturated: usize) -> Self {
        let log_total = logsumexp(log_weights.iter().cloned());
        Self { log_weights, n_s, n_theta, saturated, log_total }
    }

    pub fn log_total(&self) -> f64 {
        self.log_total
    }

    pub fn total(&self) -> f64 {
        self.log_total.exp()
    }

    /// Log-mass of the cells whose s-center satisfies the predicate.
    pub fn log_mass_where(
        &self,
        lattice: &CylinderLattice,
        pred: impl Fn(f64) -> bool,
    ) -> f64 {
        logsumexp(
            (0..self.n_s)
                .filter(|&i| pred(lattice.s_center(i)))
                .flat_map(|i| {
                    self.log_weights[i * self.n_theta..(i + 1) * self.n_theta].iter().cloned()
                })
                .collect::<Vec<_>>()
                .into_iter(),
        )
    }

    /// Masses of the left, central and right bands of the [0, t] window at
    /// width exponent eta; the partition is exact by construction.
    pub fn split_mass(&self, lattice: &CylinderLattice, t: f64, eta: f64) -> (f64, f64, f64) {
        let a = t.powf(0.5 - eta);
        let b = t - a;
        let scale = self.log_total;
        let mut l = 0.0;
        let mut c = 0.0;
        let mut r = 0.0;
        for i in 0..self.n_s {
            let s = lattice.s_center(i);
            let row: f64 = self.log_weights[i * self.n_theta..(i + 1) * self.n_theta]
                .iter()
                .map(|&lw| (lw - scale).exp())
                .sum();
            if s < a {
                l += row;
            } else if s <= b {
                c += row;
            } else {
                r += row;
            }
        }
        let total = scale.exp();
        (l * total, c * total, r * total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::seeds;
    use crate::field::{sample_radial, FieldSample, LateralSampler};
    use crate::stats::mean_stderr;

    fn flat_profile() -> InsertionProfile {
        InsertionProfile {
            drift: Drift::Linear { slope_pos: 0.0, slope_neg: 0.0 },
            kernels: vec![],
            offset_neg: 0.0,
        }
    }

    #[test]
    fn unweighted_expected_mass_equals_area() {
        // E[chaos mass of a region] = its area when no drift or insertion is
        // present; the region here is the whole (small) lattice
        let lattice = CylinderLattice::new(-1.0, 1.0, 10, 8).unwrap();
        let params = LiouvilleParams::new(1.0, 1.0).unwrap();
        let sampler = LateralSampler::new(&lattice, None).unwrap();
        let engine = WeightEngine::new(
            &lattice,
            &params,
            &flat_profile(),
            sampler.var_diag(),
            RadialVariance::AbsS,
        )
        .unwrap();
        let n = 2000;
        let mut totals = Vec::with_capacity(n);
        for k in 0..n {
            let f = FieldSample::draw(
                &sampler,
                &mut seeds::stream(70, &[k as u64, 1]),
                &mut seeds::stream(70, &[k as u64, 2]),
            );
            totals.push(engine.chaos(&f.radial, &f.lateral).total());
        }
        let (m, se) = mean_stderr(&totals);
        let area = 2.0 * 2.0 * std::f64::consts::PI;
        assert!((m - area).abs() < 3.0 * se, "mass {m} vs area {area} (se {se})");
    }

    #[test]
    fn constant_shift_scales_weights_exactly() {
        let lattice = CylinderLattice::new(-1.0, 1.0, 8, 6).unwrap();
        let params = LiouvilleParams::new(1.3, 1.0).unwrap();
        let sampler = LateralSampler::new(&lattice, None).unwrap();
        let engine = WeightEngine::new(
            &lattice,
            &params,
            &flat_profile(),
            sampler.var_diag(),
            RadialVariance::AbsS,
        )
        .unwrap();
        let f = FieldSample::draw(
            &sampler,
            &mut seeds::stream(71, &[1]),
            &mut seeds::stream(71, &[2]),
        );
        let c = 0.37;
        let shifted: Vec<f64> = f.radial.iter().map(|r| r + c).collect();
        let base = engine.chaos(&f.radial, &f.lateral);
        let moved = engine.chaos(&shifted, &f.lateral);
        for (a, b) in base.log_weights.iter().zip(moved.log_weights.iter()) {
            approx::assert_relative_eq!(b - a, params.gamma() * c, epsilon = 1e-12);
        }
    }

    #[test]
    fn q_drift_mass_matches_deterministic_integral() {
        // drift -Q|s| (in the engine convention) gives expected mass
        // int e^{-gamma Q |s|} ds dtheta over the window
        let params = LiouvilleParams::new(1.0, 1.0).unwrap();
        let q = params.q();
        let g = params.gamma();
        let lattice = CylinderLattice::new(-4.0, 4.0, 64, 8).unwrap();
        let sampler = LateralSampler::new(&lattice, None).unwrap();
        let profile = InsertionProfile {
            drift: Drift::Linear { slope_pos: -q, slope_neg: q },
            kernels: vec![],
            offset_neg: 0.0,
        };
        let engine = WeightEngine::new(
            &lattice,
            &params,
            &profile,
            sampler.var_diag(),
            RadialVariance::AbsS,
        )
        .unwrap();
        let n = 3000;
        let mut totals = Vec::with_capacity(n);
        for k in 0..n {
            let f = FieldSample::draw(
                &sampler,
                &mut seeds::stream(72, &[k as u64, 1]),
                &mut seeds::stream(72, &[k as u64, 2]),
            );
            totals.push(engine.chaos(&f.radial, &f.lateral).total());
        }
        let (m, se) = mean_stderr(&totals);
        // midpoint-rule value of the deterministic integral on the same grid
        let mut want = 0.0;
        for i in 0..lattice.n_s {
            want += (-g * q * lattice.s_center(i).abs()).exp()
                * lattice.ds()
                * 2.0
                * std::f64::consts::PI;
        }
        assert!((m - want).abs() < 3.0 * se, "mass {m} vs integral {want} (se {se})");
    }

    #[test]
    fn split_mass_partition_is_exact() {
        let lattice = CylinderLattice::new(-3.0, 6.0, 36, 6).unwrap();
        let params = LiouvilleParams::new(1.0, 1.0).unwrap();
        let sampler = LateralSampler::new(&lattice, None).unwrap();
        let engine = WeightEngine::new(
            &lattice,
            &params,
            &flat_profile(),
            sampler.var_diag(),
            RadialVariance::AbsS,
        )
        .unwrap();
        let f = FieldSample::draw(
            &sampler,
            &mut seeds::stream(73, &[1]),
            &mut seeds::stream(73, &[2]),
        );
        let m = engine.chaos(&f.radial, &f.lateral);
        let (l, c, r) = m.split_mass(&lattice, 4.0, 0.25);
        approx::assert_relative_eq!(l + c + r, m.total(), max_relative = 1e-12);
        // eta near 1/2 shrinks the left window toward s < 1
        let (l2, _, _) = m.split_mass(&lattice, 4.0, 0.499);
        let near_one = m.log_mass_where(&lattice, |s| s < 4.0_f64.powf(0.001)).exp();
        approx::assert_relative_eq!(l2, near_one, max_relative = 1e-12);
    }
}
