//! Global parameter records and the Seiberg-bound validator.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Coupling and cosmological constant of the theory. The background charge
/// `Q = gamma/2 + 2/gamma` is always recomputed from `gamma`, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleParams {
    gamma: f64,
    mu: f64,
}

/// `Q = gamma/2 + 2/gamma` for `gamma` in (0, 2).
pub fn background_charge(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(Error::domain(format!(
            "gamma must lie in (0, 2), got {gamma}"
        )));
    }
    Ok(gamma / 2.0 + 2.0 / gamma)
}

impl LiouvilleParams {
    pub fn new(gamma: f64, mu: f64) -> Result<Self> {
        background_charge(gamma)?;
        if !(mu > 0.0) {
            return Err(Error::domain(format!("mu must be positive, got {mu}")));
        }
        Ok(Self { gamma, mu })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn q(&self) -> f64 {
        self.gamma / 2.0 + 2.0 / self.gamma
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(self.gamma, mu)
    }
}

/// A point on the extended complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlanePoint {
    Finite(Complex64),
    Infinity,
}

impl PlanePoint {
    pub fn finite(re: f64, im: f64) -> Self {
        PlanePoint::Finite(Complex64::new(re, im))
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, PlanePoint::Infinity)
    }
}

/// One vertex-operator insertion: a location and a nonnegative momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Insertion {
    pub location: PlanePoint,
    pub momentum: f64,
}

impl Insertion {
    pub fn new(location: PlanePoint, momentum: f64) -> Result<Self> {
        if momentum < 0.0 {
            return Err(Error::domain(format!(
                "momentum must be nonnegative, got {momentum}"
            )));
        }
        Ok(Self { location, momentum })
    }
}

/// Ordered list of insertions with pairwise-distinct locations.
#[derive(Debug, Clone, PartialEq)]
pub struct InsertionSet {
    items: Vec<Insertion>,
}

impl InsertionSet {
    pub fn new(items: Vec<Insertion>) -> Result<Self> {
        for (i, a) in items.iter().enumerate() {
            for b in items.iter().skip(i + 1) {
                let same = match (a.location, b.location) {
                    (PlanePoint::Infinity, PlanePoint::Infinity) => true,
                    (PlanePoint::Finite(x), PlanePoint::Finite(y)) => x == y,
                    _ => false,
                };
                if same {
                    return Err(Error::domain("insertion locations must be pairwise distinct"));
                }
            }
        }
        Ok(Self { items })
    }

    /// Convenience constructor for insertions at (0, 1, infinity).
    pub fn three_point(momenta: [f64; 3]) -> Result<Self> {
        Self::new(vec![
            Insertion::new(PlanePoint::finite(0.0, 0.0), momenta[0])?,
            Insertion::new(PlanePoint::finite(1.0, 0.0), momenta[1])?,
            Insertion::new(PlanePoint::Infinity, momenta[2])?,
        ])
    }

    /// Convenience constructor for insertions at (0, z, 1, infinity).
    pub fn four_point(z: Complex64, momenta: [f64; 4]) -> Result<Self> {
        Self::new(vec![
            Insertion::new(PlanePoint::finite(0.0, 0.0), momenta[0])?,
            Insertion::new(PlanePoint::Finite(z), momenta[1])?,
            Insertion::new(PlanePoint::finite(1.0, 0.0), momenta[2])?,
            Insertion::new(PlanePoint::Infinity, momenta[3])?,
        ])
    }

    pub fn items(&self) -> &[Insertion] {
        &self.items
    }

    pub fn momenta(&self) -> Vec<f64> {
        self.items.iter().map(|i| i.momentum).collect()
    }

    /// sigma = sum(alpha_i) / Q - 2.
    pub fn sigma(&self, params: &LiouvilleParams) -> f64 {
        self.items.iter().map(|i| i.momentum).sum::<f64>() / params.q() - 2.0
    }
}

/// Outcome of the Seiberg-bound validation.
#[derive(Debug, Clone, Serialize)]
pub struct SeibergReport {
    pub sigma: f64,
    /// Per-insertion flag for alpha_i < Q.
    pub per_insertion_ok: Vec<bool>,
    pub first_bound_ok: bool,
    pub enough_insertions: bool,
    pub valid: bool,
    /// The extended-bound inequality evaluated literally as printed for the
    /// supplied moment order: `-kappa < min(4/gamma^2, min(Q - alpha_i))`.
    /// Negative moment orders satisfy it trivially; the flag is carried so
    /// callers can see which side was binding.
    pub extended_literal_ok: Option<bool>,
    pub note: String,
}

/// Validate the Seiberg bounds, optionally together with the extended bound
/// for a supplied moment order `kappa` (the exponent in `M^{-kappa}`).
pub fn check_seiberg(
    set: &InsertionSet,
    params: &LiouvilleParams,
    kappa: Option<f64>,
) -> SeibergReport {
    let q = params.q();
    let sigma = set.sigma(params);
    let per: Vec<bool> = set.items().iter().map(|i| i.momentum < q).collect();
    let enough = set.items().len() >= 3;
    let first = sigma > 0.0;
    let valid = first && per.iter().all(|&b| b) && enough;
    let extended = kappa.map(|k| {
        let cap = (4.0 / (params.gamma() * params.gamma()))
            .min(set.items().iter().map(|i| q - i.momentum).fold(f64::INFINITY, f64::min));
        -k < cap
    });
    SeibergReport {
        sigma,
        per_insertion_ok: per,
        first_bound_ok: first,
        enough_insertions: enough,
        valid,
        extended_literal_ok: extended,
        note: "extended bound checked literally as printed; it never binds for negative moments"
            .to_string(),
    }
}

/// The five decay regimes of the fused momentum alpha = alpha1 + alpha2
/// relative to Q and kappa*gamma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateBranch {
    Subcritical,
    Critical,
    Intermediate,
    Boundary,
    Heavy,
}

/// Branch selection and rate-function inputs for the fused momentum.
#[derive(Debug, Clone, Copy)]
pub struct RateSpec {
    pub alpha: f64,
    pub kappa: f64,
    pub branch: RateBranch,
}

/// Ties with the exact-equality branches are resolved within this tolerance.
pub const BRANCH_TIE_TOL: f64 = 1e-12;

impl RateSpec {
    pub fn new(alpha: f64, kappa: f64, params: &LiouvilleParams) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::domain(format!("kappa must be positive, got {kappa}")));
        }
        let d = alpha - params.q();
        let kg = kappa * params.gamma();
        let branch = if d.abs() < BRANCH_TIE_TOL {
            RateBranch::Critical
        } else if (d - kg).abs() < BRANCH_TIE_TOL {
            RateBranch::Boundary
        } else if d < 0.0 {
            RateBranch::Subcritical
        } else if d < kg {
            RateBranch::Intermediate
        } else {
            RateBranch::Heavy
        };
        Ok(Self { alpha, kappa, branch })
    }
}

/// The five-branch decay profile evaluated at |z| in (0, 1).
pub fn rate_function(spec: &RateSpec, params: &LiouvilleParams, z_modulus: f64) -> Result<f64> {
    if !(z_modulus > 0.0 && z_modulus < 1.0) {
        return Err(Error::domain(format!(
            "z modulus must lie in (0, 1), got {z_modulus}"
        )));
    }
    let t = -z_modulus.ln(); // log(1/|z|) > 0
    let d = spec.alpha - params.q();
    let kg = spec.kappa * params.gamma();
    let poly = (-t * d * d / 2.0).exp();
    Ok(match spec.branch {
        RateBranch::Subcritical => 1.0,
        RateBranch::Critical => t.sqrt(),
        RateBranch::Intermediate => poly * t.powf(1.5),
        RateBranch::Boundary => poly * t.sqrt(),
        RateBranch::Heavy => {
            let e = d * d / 2.0 - (kg - d) * (kg - d) / 2.0;
            (-t * e).exp()
        }
    })
}
