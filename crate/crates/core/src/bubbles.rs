//! One-loop particle–hole and particle–particle bubbles of the xy model at
//! zero external momentum and frequency, and their large-β asymptotics.
//!
//! ```text
//! B_ph(β) = -4 ∫₀^β du δ₁(u) ln(β/u)          = -2 ln β + 2K + r_ph(β)
//! B_pp(β) = ∫₀^{β/2} dv ln²(2v/β) / cosh² v   = ln²β - 2K ln β + K' + r_pp(β)
//! ```
//!
//! with `δ₁(u) = 1/(4 cosh²(u/2))`, `K = ∫₀^∞ ln(2v)/cosh²v dv`,
//! `K' = ∫₀^∞ ln²(2v)/cosh²v dv`, and exponentially small remainders
//! `r_ph = -4∫_β^∞ δ₁(u) ln(u/β) du`, `r_pp = -∫_{β/2}^∞ ln²(2v/β)/cosh²v dv`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matsubara::approx_delta;
use crate::quad::{integrate, integrate_1d_breaks, FnIntegrand, QuadError, QuadResult, QuadSpec, Region};
use crate::special::fermi_kernel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BubbleError {
    #[error("inverse temperature must be positive and finite, got {0}")]
    InvalidBeta(f64),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BubbleKind {
    Ph,
    Pp,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BubbleResult {
    pub kind: BubbleKind,
    pub beta: f64,
    pub value: f64,
    pub asymptotic_prediction: f64,
    /// `value − asymptotic_prediction`, computed from the exact tail integral
    /// so that it keeps full relative precision even when it is far below
    /// the rounding level of `value`.
    pub residual: f64,
    pub error_estimate: f64,
}

/// Truncation point of the semi-infinite constant integrals.
pub const CONSTANT_CUTOFF: f64 = 200.0;

fn sech2(v: f64) -> f64 {
    // 1/cosh²v = 4δ₁(2v)
    4.0 * fermi_kernel(2.0 * v)
}

fn spec() -> QuadSpec {
    QuadSpec::new(1e-16, 1e-14, 400_000)
}

fn breaks(lo: f64, hi: f64) -> Vec<f64> {
    let mut p = vec![lo];
    for b in [1.0, 4.0, 10.0, 25.0, 60.0, 100.0] {
        if b > lo && b < hi {
            p.push(b);
        }
    }
    p.push(hi);
    p
}

// Bound on ∫_L^∞ |ln^k(2v)|/cosh²v dv for L = CONSTANT_CUTOFF / 2, k ≤ 2.
fn constant_tail_bound() -> f64 {
    let u = CONSTANT_CUTOFF;
    4.0 * (-u / 2.0).exp() * (u.ln().abs() + 1.0).powi(2)
}

/// `K = ∫₀^∞ ln(2v)/cosh²v dv`.
pub fn constant_k() -> Result<QuadResult<f64>, BubbleError> {
    // split off [0, 1/2] where ln(2v) is singular: 1/cosh² = 1 + (1/cosh² − 1)
    let near = integrate_1d_breaks(|v: f64| (2.0 * v).ln() * (sech2(v) - 1.0), &[0.0, 0.5], &spec())?;
    // ∫₀^{1/2} ln(2v) dv = -1/2
    let near = near.map(|x| x - 0.5);
    let far = integrate_1d_breaks(|v: f64| (2.0 * v).ln() * sech2(v), &breaks(0.5, CONSTANT_CUTOFF / 2.0), &spec())?;
    let mut r = near.combine(far);
    r.error_estimate += constant_tail_bound();
    Ok(r)
}

/// The same constant in the form `∫₀^∞ ln u / (2 cosh²(u/2)) du`.
pub fn constant_k_alt() -> Result<QuadResult<f64>, BubbleError> {
    let f = |u: f64| u.ln() * 2.0 * fermi_kernel(u);
    let near = integrate_1d_breaks(|u: f64| u.ln() * (2.0 * fermi_kernel(u) - 0.5), &[0.0, 1.0], &spec())?;
    // ∫₀¹ ln u / 2 du = -1/2
    let near = near.map(|x| x - 0.5);
    let far = integrate_1d_breaks(f, &breaks(1.0, CONSTANT_CUTOFF), &spec())?;
    let mut r = near.combine(far);
    r.error_estimate += constant_tail_bound();
    Ok(r)
}

/// `K' = ∫₀^∞ ln²(2v)/cosh²v dv`.
pub fn constant_k_prime() -> Result<QuadResult<f64>, BubbleError> {
    let near = integrate_1d_breaks(|v: f64| (2.0 * v).ln().powi(2) * (sech2(v) - 1.0), &[0.0, 0.5], &spec())?;
    // ∫₀^{1/2} ln²(2v) dv = 1
    let near = near.map(|x| x + 1.0);
    let far = integrate_1d_breaks(|v: f64| (2.0 * v).ln().powi(2) * sech2(v), &breaks(0.5, CONSTANT_CUTOFF / 2.0), &spec())?;
    let mut r = near.combine(far);
    r.error_estimate += constant_tail_bound();
    Ok(r)
}

fn check_beta(beta: f64) -> Result<(), BubbleError> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(BubbleError::InvalidBeta(beta))
    }
}

// Integrands decay like e^{-u}; nothing beyond this contributes at double precision
// relative to O(1) values.
const NEGLIGIBLE: f64 = 800.0;

/// `-4∫₀^β δ₁(u) ln(β/u) du`.
pub fn bubble_ph_value(beta: f64) -> Result<QuadResult<f64>, BubbleError> {
    check_beta(beta)?;
    let lb = beta.ln();
    let a = beta.min(1.0);
    // ∫₀^a δ₁ ln(β/u) = ∫₀^a (δ₁ − ¼) ln(β/u) + ¼ a (ln(β/a) + 1)
    let near = integrate_1d_breaks(|u: f64| (fermi_kernel(u) - 0.25) * (lb - u.ln()), &[0.0, a], &spec())?;
    let near = near.map(|x| x + 0.25 * a * (lb - a.ln() + 1.0));
    let top = beta.min(NEGLIGIBLE);
    let r = if top > a {
        near.combine(integrate_1d_breaks(|u: f64| fermi_kernel(u) * (lb - u.ln()), &breaks(a, top), &spec())?)
    } else {
        near
    };
    Ok(r.scale(-4.0))
}

/// `-4∫_β^∞ δ₁(u) ln(u/β) du`, the exact remainder of the ph asymptotics.
pub fn bubble_ph_tail(beta: f64) -> Result<QuadResult<f64>, BubbleError> {
    check_beta(beta)?;
    if beta > NEGLIGIBLE {
        return Ok(QuadResult { value: 0.0, error_estimate: 0.0, evaluations: 0, converged: true });
    }
    // u = β + s; integrand ≈ e^{-β-s} ln(1 + s/β), scale-free in relative terms
    let s = QuadSpec::new(1e-300, 1e-13, 400_000);
    let r = integrate_1d_breaks(
        |t: f64| fermi_kernel(beta + t) * (t / beta).ln_1p(),
        &[0.0, 1.0, 5.0, 20.0, 60.0],
        &s,
    )?;
    Ok(r.scale(-4.0))
}

pub fn bubble_ph(beta: f64) -> Result<BubbleResult, BubbleError> {
    let value = bubble_ph_value(beta)?;
    let k = constant_k()?;
    let tail = bubble_ph_tail(beta)?;
    Ok(BubbleResult {
        kind: BubbleKind::Ph,
        beta,
        value: value.value,
        asymptotic_prediction: -2.0 * beta.ln() + 2.0 * k.value,
        residual: tail.value,
        error_estimate: value.error_estimate + 2.0 * k.error_estimate + tail.error_estimate,
    })
}

/// `∫₀^{β/2} ln²(2v/β)/cosh²v dv`.
pub fn bubble_pp_value(beta: f64) -> Result<QuadResult<f64>, BubbleError> {
    check_beta(beta)?;
    let c = 2.0 / beta;
    let l = |v: f64| (c * v).ln();
    let a = (beta / 2.0).min(1.0);
    // ∫₀^a ln²(cv) dv = a[ln²(ca) − 2 ln(ca) + 2]
    let la = l(a);
    let near = integrate_1d_breaks(|v: f64| l(v).powi(2) * (sech2(v) - 1.0), &[0.0, a], &spec())?;
    let near = near.map(|x| x + a * (la * la - 2.0 * la + 2.0));
    let top = (beta / 2.0).min(NEGLIGIBLE / 2.0);
    if top > a {
        Ok(near.combine(integrate_1d_breaks(|v: f64| l(v).powi(2) * sech2(v), &breaks(a, top), &spec())?))
    } else {
        Ok(near)
    }
}

/// `-∫_{β/2}^∞ ln²(2v/β)/cosh²v dv`.
pub fn bubble_pp_tail(beta: f64) -> Result<QuadResult<f64>, BubbleError> {
    check_beta(beta)?;
    if beta > NEGLIGIBLE {
        return Ok(QuadResult { value: 0.0, error_estimate: 0.0, evaluations: 0, converged: true });
    }
    let h = beta / 2.0;
    let s = QuadSpec::new(1e-300, 1e-13, 400_000);
    let r = integrate_1d_breaks(
        |t: f64| (t / h).ln_1p().powi(2) * sech2(h + t),
        &[0.0, 1.0, 5.0, 20.0, 60.0],
        &s,
    )?;
    Ok(r.scale(-1.0))
}

pub fn bubble_pp(beta: f64) -> Result<BubbleResult, BubbleError> {
    let value = bubble_pp_value(beta)?;
    let k = constant_k()?;
    let kp = constant_k_prime()?;
    let tail = bubble_pp_tail(beta)?;
    let lb = beta.ln();
    Ok(BubbleResult {
        kind: BubbleKind::Pp,
        beta,
        value: value.value,
        asymptotic_prediction: lb * lb - 2.0 * k.value * lb + kp.value,
        residual: tail.value,
        error_estimate: value.error_estimate
            + 2.0 * lb.abs() * k.error_estimate
            + kp.error_estimate
            + tail.error_estimate,
    })
}

/// Derivative in β of the asymptotic prediction.
pub fn prediction_slope(kind: BubbleKind, beta: f64, k: f64) -> f64 {
    match kind {
        BubbleKind::Ph => -2.0 / beta,
        BubbleKind::Pp => 2.0 * (beta.ln() - k) / beta,
    }
}

/// `∫_{[-1,1]²} -δ_β(xy) dx dy` by direct 2D quadrature.
pub fn bubble_ph_2d(beta: f64, spec: &QuadSpec) -> Result<QuadResult<f64>, BubbleError> {
    check_beta(beta)?;
    let f = FnIntegrand(|p: &[f64]| -approx_delta(beta, p[0] * p[1]));
    Ok(integrate(&f, &Region::symmetric(2), spec)?)
}

/// `∫_{[-1,1]²} tanh(βxy/2)/(2xy) dx dy` by direct 2D quadrature.
pub fn bubble_pp_2d(beta: f64, spec: &QuadSpec) -> Result<QuadResult<f64>, BubbleError> {
    check_beta(beta)?;
    let f = FnIntegrand(|p: &[f64]| {
        let e = p[0] * p[1];
        let z = 0.5 * beta * e;
        if z.abs() < 1e-8 {
            0.25 * beta * (1.0 - z * z / 3.0)
        } else {
            z.tanh() / (2.0 * e)
        }
    });
    Ok(integrate(&f, &Region::symmetric(2), spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_definitions_agree() {
        let a = constant_k().unwrap();
        let b = constant_k_alt().unwrap();
        assert!((a.value - b.value).abs() < 1e-12, "{} vs {}", a.value, b.value);
    }

    #[test]
    fn constants_match_reference_values() {
        // ∫₀^∞ ln v / cosh²v dv = ln(π/4) − γ, so K = ln(π/2) − γ
        let gamma = 0.577_215_664_901_532_9;
        let want = (std::f64::consts::PI / 2.0).ln() - gamma;
        assert!((constant_k().unwrap().value - want).abs() < 1e-13);
        // 30-digit reference quadrature
        assert!((constant_k_prime().unwrap().value - 1.334_732_480_136_461_6).abs() < 1e-13);
    }

    #[test]
    fn ph_small_beta_has_no_log_singularity_issue() {
        let r = bubble_ph(0.5).unwrap();
        assert!(r.value.is_finite() && r.value < 0.0);
    }

    #[test]
    fn tails_account_for_the_difference() {
        for beta in [2.0, 5.0, 10.0, 20.0] {
            let ph = bubble_ph(beta).unwrap();
            assert!((ph.value - ph.asymptotic_prediction - ph.residual).abs() < 1e-12, "ph β={beta}");
            let pp = bubble_pp(beta).unwrap();
            assert!((pp.value - pp.asymptotic_prediction - pp.residual).abs() < 1e-12, "pp β={beta}");
        }
    }

    #[test]
    fn two_dimensional_forms_agree() {
        let s = QuadSpec::new(1e-10, 1e-10, 2_000_000);
        let ph2 = bubble_ph_2d(10.0, &s).unwrap();
        let ph1 = bubble_ph_value(10.0).unwrap();
        assert!((ph2.value - ph1.value).abs() < 3.0 * (ph2.error_estimate + ph1.error_estimate) + 1e-12);
        let pp2 = bubble_pp_2d(10.0, &s).unwrap();
        let pp1 = bubble_pp_value(10.0).unwrap();
        assert!((pp2.value - pp1.value).abs() < 3.0 * (pp2.error_estimate + pp1.error_estimate) + 1e-12);
    }

    #[test]
    fn invalid_beta() {
        assert!(bubble_ph(0.0).is_err());
        assert!(bubble_pp(f64::NAN).is_err());
    }
}
