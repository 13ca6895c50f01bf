//! Green's functions and covariance kernels on the sphere and the cylinder.

use crate::error::{Error, Result};
use crate::params::PlanePoint;
use num_complex::Complex64;

fn log_plus(x: Complex64) -> f64 {
    x.norm().max(1.0).ln()
}

/// Green's function on the sphere with the crepe background metric:
/// `G(x, y) = log 1/|x - y| + log|x|_+ + log|y|_+`.
///
/// The point at infinity is handled by the cancellation
/// `log|x|_+ - log|x - y| -> 0`, so `G(inf, y) = log|y|_+`.
pub fn green_sphere(x: PlanePoint, y: PlanePoint) -> Result<f64> {
    match (x, y) {
        (PlanePoint::Infinity, PlanePoint::Infinity) => {
            Err(Error::Singularity("green_sphere at coincident points".into()))
        }
        (PlanePoint::Infinity, PlanePoint::Finite(w))
        | (PlanePoint::Finite(w), PlanePoint::Infinity) => Ok(log_plus(w)),
        (PlanePoint::Finite(a), PlanePoint::Finite(b)) => {
            let d = (a - b).norm();
            if d == 0.0 {
                return Err(Error::Singularity("green_sphere at coincident points".into()));
            }
            Ok(-d.ln() + log_plus(a) + log_plus(b))
        }
    }
}

/// Stationary covariance of the lateral noise:
/// `H(ds, dtheta) = log 1/|1 - e^{-|ds| - i dtheta}|`.
pub fn lateral_cov(ds: f64, dtheta: f64) -> Result<f64> {
    let r = (-ds.abs()).exp();
    // |1 - r e^{-i dtheta}|^2 = 1 - 2 r cos(dtheta) + r^2
    let m2 = 1.0 - 2.0 * r * dtheta.cos() + r * r;
    if m2 <= 0.0 {
        return Err(Error::Singularity("lateral_cov at zero separation".into()));
    }
    Ok(-0.5 * m2.ln())
}

/// Green's function on the infinite cylinder, vanishing mean on the unit
/// circle: radial overlap plus the stationary lateral kernel.
pub fn green_cylinder(s: f64, theta: f64, s2: f64, theta2: f64) -> Result<f64> {
    let radial = if s * s2 >= 0.0 { s.abs().min(s2.abs()) } else { 0.0 };
    Ok(radial + lateral_cov(s2 - s, theta2 - theta)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use std::f64::consts::PI;

    #[test]
    fn green_sphere_values() {
        let g = green_sphere(PlanePoint::finite(0.0, 0.0), PlanePoint::finite(0.5, 0.0)).unwrap();
        assert_relative_eq!(g, 2.0_f64.ln(), epsilon = 1e-14);
        let g2 = green_sphere(PlanePoint::finite(2.0, 0.0), PlanePoint::finite(3.0, 0.0)).unwrap();
        assert_relative_eq!(g2, 6.0_f64.ln(), epsilon = 1e-14);
        assert!(green_sphere(PlanePoint::Infinity, PlanePoint::Infinity).is_err());
        // infinity convention
        let gi = green_sphere(PlanePoint::Infinity, PlanePoint::finite(0.5, 0.0)).unwrap();
        assert_relative_eq!(gi, 0.0);
        let gi2 = green_sphere(PlanePoint::Infinity, PlanePoint::finite(3.0, 4.0)).unwrap();
        assert_relative_eq!(gi2, 5.0_f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn green_sphere_symmetry() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = PlanePoint::finite(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let b = PlanePoint::finite(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            if let (Ok(g1), Ok(g2)) = (green_sphere(a, b), green_sphere(b, a)) {
                assert_relative_eq!(g1, g2, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn lateral_cov_values() {
        // antipodal on the circle: |1 - e^{i pi}| = 2
        assert_relative_eq!(lateral_cov(0.0, PI).unwrap(), -(2.0_f64.ln()), epsilon = 1e-14);
        // decorrelation at large separation
        assert!(lateral_cov(40.0, 1.0).unwrap().abs() < 1e-15);
        // modulus invariance
        assert_relative_eq!(
            lateral_cov(0.7, 0.3).unwrap(),
            lateral_cov(-0.7, -0.3).unwrap(),
            epsilon = 1e-15
        );
        assert!(lateral_cov(0.0, 0.0).is_err());
        assert!(lateral_cov(0.0, 2.0 * PI).is_err());
    }

    #[test]
    fn lateral_cov_decreasing_in_ds() {
        let mut prev = f64::INFINITY;
        for k in 1..60 {
            let ds = 0.05 * k as f64;
            let v = lateral_cov(ds, 0.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn green_cylinder_composition() {
        let g = green_cylinder(1.0, 0.0, 2.0, 0.0).unwrap();
        assert_relative_eq!(g, 1.0 + lateral_cov(1.0, 0.0).unwrap(), epsilon = 1e-14);
        let g2 = green_cylinder(-1.0, 0.2, 2.0, 0.5).unwrap();
        assert_relative_eq!(g2, lateral_cov(3.0, 0.3).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn cylinder_matches_sphere_through_exponential_map() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..100 {
            let s: f64 = rng.random_range(-3.0..3.0);
            let t = rng.random_range(0.0..2.0 * PI);
            let s2: f64 = rng.random_range(-3.0..3.0);
            let t2 = rng.random_range(0.0..2.0 * PI);
            if (s - s2).abs() < 1e-3 && (t - t2).abs() < 1e-3 {
                continue;
            }
            let x = Complex64::from_polar((-s).exp(), -t);
            let y = Complex64::from_polar((-s2).exp(), -t2);
            let gs = green_sphere(PlanePoint::Finite(x), PlanePoint::Finite(y)).unwrap();
            let gc = green_cylinder(s, t, s2, t2).unwrap();
            assert_relative_eq!(gs, gc, epsilon = 1e-10, max_relative = 1e-10);
        }
    }
}
