//! Second spatial derivatives of `Σ₂` at the Van Hove point.
//!
//! With `ζ = −∂ξ∂η Σ₂(q₀, 0) = ζ₁ + ζ₂ + ζ₃` (`ζ₂`, `ζ₃` carry derivatives
//! of `f(E₁)` and vanish as `β → ∞`), at zero temperature
//! `Re ∂ξ∂η Σ₂(q₀, 0) = −ζ₁ = ζ₁₁ + ζ₁₂` and
//! `∂ξ² Σ₂(q₀, 0) = X₂ − X₁ − X₃` with `X₁ = 2⟨(y−y')² N/(iq₀+ε)³⟩`
//! (`N` the occupation numerator) and `X₂`, `X₃` the terms carrying one and
//! two derivatives of `f(E₁)`. All inner integrations that can be done in
//! closed form are; what remains is 1-D or 2-D.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    check_q0, epsilon0, i_of_q0, iterated_2d, log_breaks, orthant_boxes, xy_energies, SelfEnergyError,
};
use crate::matsubara::{fermi, sigma2_numerator, ThermalState};
use crate::quad::{integrate, integrate_1d_breaks, integrate_partition, Guided, QuadResult, QuadSpec, Region};
use crate::special::fermi_kernel;

/// `ln(1 − t) + t`, accurate for small `t`.
fn log1m_plus_linear(t: f64) -> f64 {
    if t.abs() < 1e-3 {
        // −t²/2 − t³/3 − t⁴/4 − t⁵/5
        -t * t * (0.5 + t * (1.0 / 3.0 + t * (0.25 + t * 0.2)))
    } else {
        (-t).ln_1p() + t
    }
}

/// `ζ₁₂(q₀)`, the part of `Re ∂ξ∂η Σ₂` coming from the cubed denominator,
/// as a 2-D integral over `(y, η) ∈ [0,1]²`.
pub fn zeta12(q0: f64, spec: &QuadSpec) -> Result<QuadResult<f64>, SelfEnergyError> {
    check_q0(q0)?;
    let q = q0.abs();
    let q2 = q * q;
    let f = |y: f64, e: f64| {
        let s = y + 2.0 * e;
        let d2 = q2 + s * s;
        let t = e * (2.0 * y + 3.0 * e) / d2;
        let first = if t < 1e-3 {
            log1m_plus_linear(t) / (e * e)
        } else {
            // 1 − t = (q² + (y+η)²)/D₂, exactly
            ((q2 + (y + e) * (y + e)).ln() - d2.ln() + t) / (e * e)
        };
        let third = if s == 0.0 { 1.0 / q2 } else { (s / q * (s / q)).ln_1p() / (s * s) };
        -4.0 * (first - 1.0 / d2 + third)
    };
    let b = log_breaks(q);
    Ok(iterated_2d(f, &b, &b, spec)?)
}

/// `ζ₁₂(q₀)` from its 3-D form, before the `η` and `z` integrations.
pub fn zeta12_3d(q0: f64, spec: &QuadSpec) -> Result<QuadResult<f64>, SelfEnergyError> {
    check_q0(q0)?;
    let q = q0.abs();
    let f = Guided {
        f: |p: &[f64]| {
            let (xp, y, yp) = (p[0], p[1], p[2]);
            let a = Complex64::new(xp * (y + yp), q);
            let b = Complex64::new(xp * (y + 2.0 * yp), q);
            -8.0 * ((y + yp) * xp * xp / (a * b * b)).re
        },
        energy: |p: &[f64]| p[0] * (p[1] + p[2]),
    };
    Ok(integrate(&f, &Region::unit(3), &spec.guided(q))?)
}

/// `ζ₁(q₀) = ⟨(1 + 2E₁/(iq₀+ε)) N/(iq₀+ε)²⟩` at zero temperature, directly
/// over `[-1,1]⁴`. Its real part should equal `−(ζ₁₁ + ζ₁₂)`.
pub fn zeta1_direct(q0: f64, spec: &QuadSpec) -> Result<QuadResult<Complex64>, SelfEnergyError> {
    check_q0(q0)?;
    let z = ThermalState::ZeroTemperature;
    let f = Guided {
        f: |p: &[f64]| {
            let (e1, e2, e3) = xy_energies([0.0, 0.0], p);
            let d = Complex64::new(e2 - e3 - e1, q0);
            (1.0 + 2.0 * e1 / d) * sigma2_numerator(z, e1, e2, e3) / (d * d)
        },
        energy: |p: &[f64]| epsilon0(p),
    };
    Ok(integrate_partition(&f, &orthant_boxes(), &spec.guided(q0))?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiEtaResult {
    pub q0: f64,
    /// `2 I(q₀)`.
    pub zeta11: QuadResult<f64>,
    pub zeta12: QuadResult<f64>,
    /// `Re ∂ξ∂η Σ₂(q₀, 0) = ζ₁₁ + ζ₁₂` at zero temperature.
    pub value: QuadResult<f64>,
}

/// Real part of the mixed derivative `∂ξ∂η Σ₂(q₀, 0)` at zero temperature.
pub fn d2_sigma2_xi_eta(q0: f64, spec: &QuadSpec) -> Result<XiEtaResult, SelfEnergyError> {
    check_q0(q0)?;
    let zeta11 = i_of_q0(q0.abs(), spec)?.scale(2.0);
    let zeta12 = zeta12(q0, spec)?;
    Ok(XiEtaResult {
        q0,
        zeta11,
        zeta12,
        value: zeta11.combine(zeta12),
    })
}

/// Inverse temperatures below this are rejected by the finite-β terms.
const MIN_BETA: f64 = 1e-3;
/// `|u|` beyond which `δ₁(u) < 10⁻²⁵` is dropped.
const U_CUT: f64 = 60.0;

/// Shared driver for the `δ_β` terms: substitutes `u = βE₁` for `x'` at fixed
/// `(x, y, y')`, so the approximate delta becomes `δ₁(u)` with `u` integrated
/// over `t ∈ [0,1]`. `g(u, ε, f₂ − f₃)` is the remaining integrand; the
/// Jacobian `(hi − lo)/(β|y − y'|)` is applied here.
fn delta_term<G>(q0: f64, beta: f64, g: G, spec: &QuadSpec) -> Result<QuadResult<Complex64>, SelfEnergyError>
where
    G: Fn(f64, f64, f64) -> Complex64 + Sync,
{
    check_q0(q0)?;
    if !(beta >= MIN_BETA && beta.is_finite()) {
        return Err(SelfEnergyError::InvalidArgument(format!("beta must be finite and ≥ {MIN_BETA}, got {beta}")));
    }
    let state = ThermalState::Finite { beta };
    // (u range, x') at fixed (x, y, y', t); None where δ₁ is negligible throughout
    let sub = move |p: &[f64]| -> Option<(f64, f64, f64)> {
        let (x, y, yp, t) = (p[0], p[1], p[2], p[3]);
        let d = y - yp;
        if d == 0.0 {
            return None;
        }
        let (a, b) = (beta * (x - 1.0) * d, beta * (x + 1.0) * d);
        let (lo, hi) = (a.min(b).max(-U_CUT), a.max(b).min(U_CUT));
        if lo >= hi {
            return None;
        }
        let u = lo + t * (hi - lo);
        Some((u, x - u / (beta * d), (hi - lo) / (beta * d.abs())))
    };
    let f = Guided {
        f: |p: &[f64]| match sub(p) {
            None => Complex64::new(0.0, 0.0),
            Some((u, xp, jac)) => {
                let (x, y, yp) = (p[0], p[1], p[2]);
                let e = x * yp + xp * y - 2.0 * xp * yp;
                let df = fermi(state, x * y) - fermi(state, xp * yp);
                g(u, e, df) * jac
            }
        },
        energy: |p: &[f64]| match sub(p) {
            None => f64::INFINITY,
            Some((_, xp, _)) => p[0] * p[2] + xp * p[1] - 2.0 * xp * p[2],
        },
    };
    // f(E₂) sharpens on x = 0 and y = 0 as β grows
    let mut parts = Vec::with_capacity(8);
    for m in 0..8u32 {
        let mut lo = vec![-1.0, -1.0, -1.0, 0.0];
        let mut hi = vec![0.0, 0.0, 0.0, 1.0];
        for i in 0..3 {
            if m >> i & 1 == 1 {
                lo[i] = 0.0;
                hi[i] = 1.0;
            }
        }
        parts.push(Region::new(lo, hi)?);
    }
    Ok(integrate_partition(&f, &parts, &spec.guided(q0))?)
}

/// `ζ₂(q₀, β) = ⟨G_β(E₁)(f₂ − f₃)/(iq₀ + ε)⟩` with
/// `G_β(E) = −Eδ_β'(E) − δ_β(E) = βG₁(βE)`.
pub fn zeta2(q0: f64, beta: f64, spec: &QuadSpec) -> Result<QuadResult<Complex64>, SelfEnergyError> {
    delta_term(
        q0,
        beta,
        |u, e, df| {
            let g1 = fermi_kernel(u) * (u * (0.5 * u).tanh() - 1.0);
            beta * g1 * df / Complex64::new(e, q0)
        },
        spec,
    )
}

/// `ζ₃(q₀, β) = ⟨−2E₁δ_β(E₁)(f₂ − f₃)/(iq₀ + ε)²⟩`.
pub fn zeta3(q0: f64, beta: f64, spec: &QuadSpec) -> Result<QuadResult<Complex64>, SelfEnergyError> {
    delta_term(
        q0,
        beta,
        |u, e, df| {
            let d = Complex64::new(e, q0);
            -2.0 * u * fermi_kernel(u) * df / (d * d)
        },
        spec,
    )
}

/// `B₀ = 2∫₀² ln(1 + η²/q₀²) dη` in closed form.
pub fn b0_closed(q0: f64) -> f64 {
    let q = q0.abs();
    2.0 * (2.0 * (4.0 / (q * q)).ln_1p() - 4.0 + 2.0 * q * (2.0 / q).atan())
}

/// `B₀` from its parent `4∫₋₁¹dy∫₋₁^y dy' (y−y')/(q₀² + (y−y')²)`.
pub fn b0_quadrature(q0: f64, spec: &QuadSpec) -> Result<QuadResult<f64>, SelfEnergyError> {
    check_q0(q0)?;
    let q = q0.abs();
    // y = 2v − 1, y' = −1 + s(1+y)
    let f = |v: f64, s: f64| {
        let w = 2.0 * v;
        let r = w * (1.0 - s);
        2.0 * 4.0 * w * r / (q * q + r * r)
    };
    let vb = log_breaks(q);
    let sb: Vec<f64> = log_breaks(q).iter().rev().map(|t| 1.0 - t).collect();
    Ok(iterated_2d(f, &vb, &sb, spec)?)
}

/// `Re I₂⁽⁰⁾ = −(4/q₀)∫₀¹ y [atan((1+y)/q₀) − atan((1−y)/q₀)] dy`.
pub fn re_i2(q0: f64, spec: &QuadSpec) -> Result<QuadResult<f64>, SelfEnergyError> {
    check_q0(q0)?;
    let q = q0.abs();
    let breaks: Vec<f64> = log_breaks(q).iter().rev().map(|t| 1.0 - t).collect();
    Ok(integrate_1d_breaks(
        |y: f64| -4.0 * y * (((1.0 + y) / q).atan() - ((1.0 - y) / q).atan()) / q,
        &breaks,
        spec,
    )?)
}

/// Closed form of `(Im I₂⁽⁰⁾ − Im X₃⁽⁰⁾)/(4q₀)`.
fn imag_boundary(q: f64) -> f64 {
    1.0 / (q * q) - 2.0 / q * (2.0 / q).atan() + 2.0 / q * (1.0 / q).atan() + 0.5 * (q * q + 4.0).ln()
        - (q * q + 1.0).ln()
        + q.ln()
}

/// `Im X₁⁽⁰⁾` with both `x`-integrations done exactly.
pub fn im_x1(q0: f64, spec: &QuadSpec) -> Result<QuadResult<f64>, SelfEnergyError> {
    check_q0(q0)?;
    let q = q0.abs();
    // Im 1/(iq(iq + α)) and Im 1/(iq + r)
    let img = |a: f64| -a / (q * (q * q + a * a));
    let m = |r: f64| -q / (q * q + r * r);
    let b = log_breaks(q);
    let x11 = iterated_2d(
        |yp: f64, y: f64| {
            let (a, c) = (y + yp, y + 2.0 * yp);
            let diff = if yp == 0.0 { 0.0 } else { (img(a) - img(c)) / (2.0 * yp) };
            -8.0 * a * a * diff
        },
        &b,
        &b,
        spec,
    )?;
    let x12 = iterated_2d(
        |yp: f64, s: f64| {
            // y = s·y', α = 2y' − y
            let alpha = yp * (2.0 - s);
            let bracket = m(0.0) - m(alpha) - m(yp) + m(yp + alpha);
            -4.0 * yp * (1.0 - s) * (1.0 - s) / (2.0 - s) * bracket
        },
        &b,
        &[0.0, 1.0],
        spec,
    )?;
    Ok(x11.combine(x12))
}

/// `Im X₁⁽⁰⁾ = 2∫(y−y')² N Im (iq₀+ε)⁻³` directly over `[-1,1]⁴`.
pub fn im_x1_direct(q0: f64, spec: &QuadSpec) -> Result<QuadResult<f64>, SelfEnergyError> {
    check_q0(q0)?;
    let z = ThermalState::ZeroTemperature;
    let f = Guided {
        f: |p: &[f64]| {
            let (e1, e2, e3) = xy_energies([0.0, 0.0], p);
            let d = Complex64::new(e2 - e3 - e1, q0);
            let dy = p[1] - p[3];
            2.0 * dy * dy * sigma2_numerator(z, e1, e2, e3) * (d * d * d).inv().im
        },
        energy: |p: &[f64]| epsilon0(p),
    };
    Ok(integrate_partition(&f, &orthant_boxes(), &spec.guided(q0))?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiXiResult {
    pub q0: f64,
    pub b0: f64,
    pub re_i2: QuadResult<f64>,
    /// `Re ∂ξ² Σ₂(q₀, 0) = B₀ + Re I₂⁽⁰⁾`.
    pub re: QuadResult<f64>,
    /// `Im ∂ξ² Σ₂(q₀, 0) = Im I₂⁽⁰⁾ − Im X₁⁽⁰⁾ − Im X₃⁽⁰⁾`, when requested.
    pub im: Option<QuadResult<f64>>,
}

/// `∂ξ² Σ₂(q₀, 0)` at zero temperature.
pub fn d2_sigma2_xi_xi(q0: f64, imaginary: bool, spec: &QuadSpec) -> Result<XiXiResult, SelfEnergyError> {
    check_q0(q0)?;
    let q = q0.abs();
    let b0 = b0_closed(q);
    let i2 = re_i2(q, spec)?;
    let re = QuadResult { value: b0 + i2.value, ..i2 };
    let im = if imaginary {
        let x1 = im_x1(q, spec)?;
        // Im Σ₂ is odd in q₀
        let sign = q0.signum();
        Some(QuadResult {
            value: sign * (4.0 * q * imag_boundary(q) - x1.value),
            ..x1
        })
    } else {
        None
    };
    Ok(XiXiResult { q0, b0, re_i2: i2, re, im })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selfenergy::{i_of_q0_2d, reduced_spec};

    #[test]
    fn zeta12_reference_values() {
        let s = reduced_spec();
        let a = zeta12(0.5, &s).unwrap();
        assert!((a.value - 1.096_689_006_9).abs() < 1e-8, "{}", a.value);
        let b = zeta12(0.3, &s).unwrap();
        assert!((b.value - 0.857_615_534_6).abs() < 1e-8, "{}", b.value);
    }

    #[test]
    fn zeta12_reduction_matches_three_dimensional_form() {
        let s = QuadSpec::new(1e-8, 1e-8, 2_000_000);
        for q0 in [0.5, 0.1] {
            let a = zeta12(q0, &reduced_spec()).unwrap().value;
            let b = zeta12_3d(q0, &s).unwrap();
            assert!((a - b.value).abs() < 1e-5 + 3.0 * b.error_estimate, "q0={q0}: {a} vs {}", b.value);
        }
    }

    #[test]
    fn zeta12_is_negative_at_small_frequency() {
        let z = zeta12(1e-2, &reduced_spec()).unwrap().value;
        assert!((z + 25.03).abs() < 0.01, "{z}");
    }

    #[test]
    fn mixed_derivative_matches_direct_four_dimensional_integral() {
        let q0 = 0.5;
        let r = d2_sigma2_xi_eta(q0, &reduced_spec()).unwrap().value.value;
        let d = zeta1_direct(q0, &QuadSpec::new(1e-6, 1e-6, 8_000_000)).unwrap();
        assert!((r + d.value.re).abs() < 1e-3 * r.abs() + 3.0 * d.error_estimate, "{r} vs {}", -d.value.re);
    }

    #[test]
    fn small_t_branch_is_continuous() {
        for t in [1e-3f64 * (1.0 - 1e-12), 1e-3] {
            let series = -t * t * (0.5 + t * (1.0 / 3.0 + t * (0.25 + t * 0.2)));
            assert!((series - ((-t).ln_1p() + t)).abs() < 1e-16);
        }
    }

    #[test]
    fn b0_two_ways() {
        for q0 in [0.5, 1e-2, 1e-4] {
            let c = b0_closed(q0);
            let r = b0_quadrature(q0, &reduced_spec()).unwrap();
            assert!((c - r.value).abs() < 1e-8 * c.abs().max(1.0), "q0={q0}: {c} vs {}", r.value);
        }
    }

    #[test]
    fn pure_derivative_grows_like_a_single_log() {
        let s = reduced_spec();
        let a = d2_sigma2_xi_xi(1e-4, false, &s).unwrap().re.value;
        let b = d2_sigma2_xi_xi(1e-5, false, &s).unwrap().re.value;
        // slope in ln q₀ close to −4
        let slope = (b - a) / (1e-5f64.ln() - 1e-4f64.ln());
        assert!((slope + 4.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn xi_xi_deterministic() {
        let s = reduced_spec();
        let a = d2_sigma2_xi_xi(0.5, true, &s).unwrap();
        let b = d2_sigma2_xi_xi(0.5, true, &s).unwrap();
        assert_eq!(a, b);
        assert!(a.re.value.is_finite() && a.im.unwrap().value.is_finite());
    }

    #[test]
    fn imaginary_x1_reduction_matches_direct() {
        let q0 = 0.5;
        let r = im_x1(q0, &reduced_spec()).unwrap().value;
        let d = im_x1_direct(q0, &QuadSpec::new(1e-6, 1e-6, 4_000_000)).unwrap();
        assert!((r - d.value).abs() < 1e-4 * r.abs().max(1.0) + 3.0 * d.error_estimate, "{r} vs {}", d.value);
    }

    #[test]
    fn xi_eta_adds_pieces() {
        let s = reduced_spec();
        let r = d2_sigma2_xi_eta(0.1, &s).unwrap();
        let i = i_of_q0_2d(0.1, &QuadSpec::new(1e-9, 1e-9, 200_000)).unwrap().value;
        assert!((r.zeta11.value - 2.0 * i).abs() < 1e-6);
        assert_eq!(r.value.value, r.zeta11.value + r.zeta12.value);
    }
}
