//! The DOZZ three-point structure constant and its derivative at the
//! degenerate argument Q.

use crate::error::{Error, Result};
use crate::params::LiouvilleParams;
use crate::upsilon::UpsilonEvaluator;
use num_complex::Complex64;
use statrs::function::gamma::gamma;

/// Structure-constant value together with the argument record and the
/// exponent of the mu-dependent prefactor.
#[derive(Debug, Clone)]
pub struct DozzValue {
    pub value: f64,
    pub reduced: f64,
    pub arguments: (f64, f64, f64),
    pub prefactor_exponent: f64,
}

/// `pi * mu * (gamma/2)^{2 - gamma^2/2} * Gamma(gamma^2/4) / Gamma(1 - gamma^2/4)`
fn prefactor_base(params: &LiouvilleParams) -> f64 {
    let g = params.gamma();
    std::f64::consts::PI
        * params.mu()
        * (g / 2.0).powf(2.0 - g * g / 2.0)
        * gamma(g * g / 4.0)
        / gamma(1.0 - g * g / 4.0)
}

fn strip_check(ev: &UpsilonEvaluator, x: f64, label: &str) -> Result<f64> {
    if !(x > 0.0 && x < ev.q()) {
        return Err(Error::domain(format!(
            "DOZZ argument {label} = {x} leaves the open strip (0, {})",
            ev.q()
        )));
    }
    Ok(x)
}

/// Full DOZZ constant, including the mu-dependent prefactor, plus the reduced
/// constant (the ratio of Upsilon factors alone).
pub fn dozz(
    a1: f64,
    a2: f64,
    a3: f64,
    params: &LiouvilleParams,
    ev: &UpsilonEvaluator,
) -> Result<DozzValue> {
    let abar = a1 + a2 + a3;
    let q = ev.q();
    let args = [
        strip_check(ev, a1, "alpha1")?,
        strip_check(ev, a2, "alpha2")?,
        strip_check(ev, a3, "alpha3")?,
        strip_check(ev, abar / 2.0 - q, "abar/2 - Q")?,
        strip_check(ev, abar / 2.0 - a1, "abar/2 - alpha1")?,
        strip_check(ev, abar / 2.0 - a2, "abar/2 - alpha2")?,
        strip_check(ev, abar / 2.0 - a3, "abar/2 - alpha3")?,
    ];
    let mut log_reduced = ev.deriv0.ln();
    for (i, &x) in args.iter().enumerate() {
        let lu = ev.log_upsilon(Complex64::new(x, 0.0))?.re;
        if i < 3 {
            log_reduced += lu;
        } else {
            log_reduced -= lu;
        }
    }
    let exponent = -(abar - 2.0 * q) / params.gamma();
    let reduced = log_reduced.exp();
    let value = (exponent * prefactor_base(params).ln() + log_reduced).exp();
    Ok(DozzValue {
        value,
        reduced,
        arguments: (a1, a2, a3),
        prefactor_exponent: exponent,
    })
}

/// DOZZ constant at complex momenta. Upsilon factors whose argument touches
/// the strip boundary are served by the small-argument expansion; everything
/// else goes through the integral representation.
pub fn dozz_complex(
    a1: Complex64,
    a2: Complex64,
    a3: Complex64,
    params: &LiouvilleParams,
    ev: &UpsilonEvaluator,
    reduced_only: bool,
) -> Result<Complex64> {
    let abar = a1 + a2 + a3;
    let q = Complex64::new(ev.q(), 0.0);
    let num = [a1, a2, a3];
    let den = [abar / 2.0 - q, abar / 2.0 - a1, abar / 2.0 - a2, abar / 2.0 - a3];
    let mut val = Complex64::new(ev.deriv0, 0.0);
    for z in num {
        val *= ev.upsilon(z)?;
    }
    for z in den {
        val /= ev.upsilon(z)?;
    }
    if reduced_only {
        return Ok(val);
    }
    let exponent = -(abar - 2.0 * q) / params.gamma();
    Ok((exponent * prefactor_base(params).ln()).exp() * val)
}

/// `d/d alpha1 C(alpha1, a3, a4)` at `alpha1 = Q`, in closed form: the only
/// surviving term replaces the vanishing factor `Upsilon(alpha1)` with
/// `Upsilon'(Q) = -Upsilon'(0)`.
pub fn d_dozz_at_q(
    a3: f64,
    a4: f64,
    params: &LiouvilleParams,
    ev: &UpsilonEvaluator,
) -> Result<f64> {
    let q = ev.q();
    if !(a3 + a4 > q) {
        return Err(Error::Seiberg(format!(
            "d_dozz_at_q needs a3 + a4 > Q, got {} + {} <= {q}",
            a3, a4
        )));
    }
    let reduced = d_dozz_reduced_at_q(a3, a4, ev)?;
    let abar = q + a3 + a4;
    let exponent = -(abar - 2.0 * q) / params.gamma();
    Ok((exponent * prefactor_base(params).ln()).exp() * reduced)
}

/// The reduced-constant version of `d_dozz_at_q` (no mu prefactor).
pub fn d_dozz_reduced_at_q(a3: f64, a4: f64, ev: &UpsilonEvaluator) -> Result<f64> {
    let q = ev.q();
    strip_check(ev, a3, "alpha3")?;
    strip_check(ev, a4, "alpha4")?;
    let d1 = strip_check(ev, (a3 + a4 - q) / 2.0, "(a3+a4-Q)/2")?;
    let d2 = strip_check(ev, (q + a4 - a3) / 2.0, "(Q+a4-a3)/2")?;
    let d3 = strip_check(ev, (q + a3 - a4) / 2.0, "(Q+a3-a4)/2")?;
    let log_mag = 2.0 * ev.deriv0.ln()
        + ev.log_upsilon(Complex64::new(a3, 0.0))?.re
        + ev.log_upsilon(Complex64::new(a4, 0.0))?.re
        - 2.0 * ev.log_upsilon(Complex64::new(d1, 0.0))?.re
        - ev.log_upsilon(Complex64::new(d2, 0.0))?.re
        - ev.log_upsilon(Complex64::new(d3, 0.0))?.re;
    Ok(-log_mag.exp())
}

/// `d/d alpha3 C(a1, a2, alpha3)` at `alpha3 = Q`, by permutation symmetry.
pub fn d3_dozz_at_q(
    a1: f64,
    a2: f64,
    params: &LiouvilleParams,
    ev: &UpsilonEvaluator,
) -> Result<f64> {
    d_dozz_at_q(a1, a2, params, ev)
}
