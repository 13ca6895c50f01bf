//! Zamolodchikov's Upsilon function on the strip 0 < Re z < Q.
//!
//! `log Upsilon(z)` is evaluated from the integral representation
//!
//! ```text
//! int_0^inf [ (Q/2 - z)^2 e^{-t} - sinh^2((Q/2 - z) t/2) / (sinh(gamma t/4) sinh(t/gamma)) ] dt/t
//! ```
//!
//! split into a Taylor segment on [0, eps_t] (the integrand is a 0/0 ratio
//! there) and adaptive Gauss-Kronrod panels on [eps_t, T], with T chosen so the
//! exponential tail (decay rate Q/2 - |Q/2 - Re z|) is below 1e-14.
//!
//! Arguments on the strip boundary (Re z in {0, Q}), where the integral
//! diverges, are served by the quadratic expansion
//! `Upsilon(z) ~ Upsilon'(0) z + Upsilon''(0) z^2 / 2` through derivatives
//! cached at construction.

use crate::error::{Error, Result};
use crate::params::background_charge;
use crate::quad;
use num_complex::Complex64;

/// Cutoff below which the integrand is evaluated by its Taylor expansion.
const EPS_T: f64 = 1e-3;
/// Absolute tolerance for the quadrature segment.
const QUAD_TOL: f64 = 1e-12;
/// Small-argument expansion is only trusted up to this modulus.
pub const EXPANSION_CAP: f64 = 0.05;
/// Strip margin below which the integral representation is not used.
const STRIP_MARGIN: f64 = 1e-2;

#[derive(Debug, Clone)]
pub struct UpsilonEvaluator {
    gamma: f64,
    q: f64,
    /// Upsilon'(0), with the extrapolation residual.
    pub deriv0: f64,
    pub deriv0_err: f64,
    /// Upsilon''(0), with the extrapolation residual.
    pub second0: f64,
    pub second0_err: f64,
    /// Crude bound on |Upsilon'''| near 0, used for expansion error budgets.
    pub third_bound: f64,
}

impl UpsilonEvaluator {
    pub fn new(gamma: f64) -> Result<Self> {
        let q = background_charge(gamma)?;
        let mut ev = Self {
            gamma,
            q,
            deriv0: f64::NAN,
            deriv0_err: f64::NAN,
            second0: f64::NAN,
            second0_err: f64::NAN,
            third_bound: f64::NAN,
        };
        ev.cache_derivatives()?;
        Ok(ev)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// log Upsilon(z) for z strictly inside the strip.
    pub fn log_upsilon(&self, z: Complex64) -> Result<Complex64> {
        if !(z.re > 0.0 && z.re < self.q) {
            return Err(Error::domain(format!(
                "log_upsilon requires 0 < Re z < Q = {}, got Re z = {}",
                self.q, z.re
            )));
        }
        let a = Complex64::new(self.q / 2.0, 0.0) - z;
        // sinh^2 is even in a; fold to Re a >= 0 so the exponential form decays
        let a = if a.re < 0.0 { -a } else { a };
        let small = self.small_t_segment(a, EPS_T);
        let tail_rate = self.q / 2.0 - a.re;
        debug_assert!(tail_rate > 0.0);
        // T large enough that both the e^{-t} term and the sinh-ratio tail
        // (decay rate Q/2 - Re a) are below 1e-14 in absolute size
        let t_ratio = (34.0 + (1.0 + a.norm()).ln()) / tail_rate;
        let t_exp = 34.0 + 2.0 * (1.0 + a.norm()).ln();
        let t_max = t_ratio.max(t_exp).max(EPS_T * 2.0);
        let b = self.gamma / 4.0;
        let c = 1.0 / self.gamma;
        let f = |t: f64| -> Complex64 {
            let at = a * t;
            // sinh^2(a t/2) / (sinh(b t) sinh(c t)) written with explicit
            // exponentials; stable for all t > 0 and never overflows inside
            // the strip since Re a < Q/2 = b + c
            let one = Complex64::new(1.0, 0.0);
            let num = (one - (-at).exp()) * (one - (-at).exp());
            let den = (1.0 - (-2.0 * b * t).exp()) * (1.0 - (-2.0 * c * t).exp());
            let ratio = (at - (b + c) * t).exp() * num / den;
            (a * a * (-t).exp() - ratio) / t
        };
        let (mid, _err) = quad::integrate(f, EPS_T, t_max, QUAD_TOL, 20000)?;
        Ok(small + mid)
    }

    /// Taylor evaluation of `int_0^eps [a^2 e^{-t} - R(t)] dt / t` where
    /// `R(t) = sinh^2(a t/2) / (sinh(gamma t/4) sinh(t/gamma))`.
    fn small_t_segment(&self, a: Complex64, eps: f64) -> Complex64 {
        let g = self.gamma;
        let a2 = a * a;
        // R(t) = a^2 (1 + r2 t^2 + r4 t^4 + O(t^6))
        let n2 = a2 / 12.0;
        let n4 = a2 * a2 / 360.0;
        let c2 = (g * g / 16.0 + 1.0 / (g * g)) / 6.0;
        let c4 = (g.powi(4) / 256.0 + g.powi(-4)) / 120.0 + 1.0 / 576.0;
        let r2 = n2 - c2;
        let r4 = n4 - c4 - c2 * r2;
        // int_0^eps (e^{-t} - 1)/t dt = sum_{k>=1} (-eps)^k / (k * k!)
        let mut s = 0.0;
        let mut term = 1.0;
        for k in 1..30 {
            term *= -eps / k as f64;
            let add = term / k as f64;
            s += add;
            if add.abs() < 1e-20 {
                break;
            }
        }
        a2 * (s - r2 * (eps * eps / 2.0) - r4 * (eps.powi(4) / 4.0))
    }

    /// Upsilon(z) with automatic routing: the integral inside the strip, the
    /// quadratic small-argument expansion near the boundary zeros at 0 and Q.
    pub fn upsilon(&self, z: Complex64) -> Result<Complex64> {
        if z.re > STRIP_MARGIN && z.re < self.q - STRIP_MARGIN {
            return Ok(self.log_upsilon(z)?.exp());
        }
        if z.norm() <= EXPANSION_CAP {
            return Ok(self.upsilon_expand_zero(z));
        }
        let w = Complex64::new(self.q, 0.0) - z;
        if w.norm() <= EXPANSION_CAP {
            // functional symmetry: Upsilon(z) = Upsilon(Q - z)
            return Ok(self.upsilon_expand_zero(w));
        }
        if z.re > 0.0 && z.re < self.q {
            // thin margin strip: still use the integral (longer tail)
            return Ok(self.log_upsilon(z)?.exp());
        }
        Err(Error::domain(format!(
            "Upsilon argument {z} outside the strip and the expansion range"
        )))
    }

    /// Real-argument convenience wrapper.
    pub fn upsilon_real(&self, x: f64) -> Result<f64> {
        Ok(self.upsilon(Complex64::new(x, 0.0))?.re)
    }

    /// Quadratic model at the simple zero: `U'(0) w + U''(0) w^2 / 2`.
    pub fn upsilon_expand_zero(&self, w: Complex64) -> Complex64 {
        w * self.deriv0 + w * w * (self.second0 / 2.0)
    }

    /// Absolute error budget of the quadratic model at modulus |w|.
    pub fn expansion_error_budget(&self, w_norm: f64) -> f64 {
        self.third_bound * w_norm.powi(3) / 6.0
    }

    /// Upsilon'(0) and Upsilon''(0) by Richardson extrapolation of
    /// `Upsilon(delta)/delta` over the ladder delta = 1e-2 * 2^{-k}.
    fn cache_derivatives(&mut self) -> Result<()> {
        let deltas = [1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4, 3.125e-4];
        let mut f = [0.0; 6];
        for (i, &d) in deltas.iter().enumerate() {
            let lu = self.log_upsilon(Complex64::new(d, 0.0))?;
            f[i] = lu.exp().re / d;
        }
        // three Richardson levels kill the delta, delta^2 and delta^3 terms
        let r1: Vec<f64> = f.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
        let r2: Vec<f64> = r1.windows(2).map(|w| (4.0 * w[1] - w[0]) / 3.0).collect();
        let r3: Vec<f64> = r2.windows(2).map(|w| (8.0 * w[1] - w[0]) / 7.0).collect();
        let deriv0 = r3[r3.len() - 1];
        let residual = (r3[r3.len() - 1] - r3[r3.len() - 2]).abs();
        if residual > 1e-6 {
            return Err(Error::Convergence { residual, tolerance: 1e-6 });
        }
        // second derivative from the linear term of (f - deriv0)/delta
        let b: Vec<f64> = deltas.iter().zip(f.iter()).map(|(&d, &fv)| (fv - deriv0) / d).collect();
        let b1: Vec<f64> = b.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
        let b2: Vec<f64> = b1.windows(2).map(|w| (4.0 * w[1] - w[0]) / 3.0).collect();
        let second0 = 2.0 * b2[b2.len() - 1];
        let second0_err = 2.0 * (b2[b2.len() - 1] - b2[b2.len() - 2]).abs();
        // crude third-derivative scale from the curvature of the b-ladder
        let third = {
            let slope1 = (b[1] - b[0]) / (deltas[1] - deltas[0]);
            let slope2 = (b[3] - b[2]) / (deltas[3] - deltas[2]);
            let curv = (slope2 - slope1).abs() / (deltas[2] - deltas[0]).abs();
            (6.0 * curv).max(second0.abs()).max(1.0)
        };
        self.deriv0 = deriv0;
        self.deriv0_err = residual;
        self.second0 = second0;
        self.second0_err = second0_err;
        self.third_bound = third;
        Ok(())
    }
}
