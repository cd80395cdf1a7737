//! Second-order self-energy of the xy model and its derivatives at the
//! Van Hove point.
//!
//! Momenta are rescaled so the integration domain is `[-1,1]⁴` with
//! `E₂ = xy`, `E₃ = x'y'` and, by momentum conservation,
//! `E₁ = (ξ + x − x')(η + y − y')`. Values carry the global sign of
//! `Σ₂ = −⟨[f₁ + b₂₃][f₂ − f₃]/(iq₀ + ε)⟩`, `ε = E₂ − E₃ − E₁`.

mod frequency_sum;
mod second;

pub use frequency_sum::{frequency_sum_oracle, FrequencySumCheck};
pub use second::{
    b0_closed, b0_quadrature, d2_sigma2_xi_eta, d2_sigma2_xi_xi, im_x1, im_x1_direct, re_i2, zeta12, zeta12_3d,
    zeta1_direct, zeta2, zeta3, XiEtaResult, XiXiResult,
};

use std::sync::Mutex;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::Vec2;
use crate::matsubara::{fermi, sigma2_kernel, sigma2_numerator, ThermalError, ThermalState};
use crate::quad::{
    integrate, integrate_1d_breaks, integrate_partition, Guided, QuadError, QuadResult, QuadSpec,
    Region,
};
use crate::special::{dilog, fermi_kernel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelfEnergyError {
    #[error(transparent)]
    Thermal(#[from] ThermalError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeKind {
    None,
    DOmega,
    Grad,
    DXiXi,
    DXiEta,
    DEtaEta,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfEnergyPoint {
    pub q0: f64,
    pub q: Vec2,
    pub state: ThermalState,
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: u64,
    pub converged: bool,
    pub derivative_kind: DerivativeKind,
}

fn check_q0(q0: f64) -> Result<(), SelfEnergyError> {
    if q0 == 0.0 {
        return Err(ThermalError::ZeroFrequency.into());
    }
    if !q0.is_finite() {
        return Err(SelfEnergyError::InvalidArgument(format!("q0 must be finite, got {q0}")));
    }
    Ok(())
}

/// `(E₁, E₂, E₃)` at external momentum `q = (ξ, η)`.
pub fn xy_energies(q: Vec2, p: &[f64]) -> (f64, f64, f64) {
    let (x, y, xp, yp) = (p[0], p[1], p[2], p[3]);
    ((q[0] + x - xp) * (q[1] + y - yp), x * y, xp * yp)
}

/// `ε = xy' + x'y − 2x'y'`, the energy denominator at `q = 0`.
pub fn epsilon0(p: &[f64]) -> f64 {
    p[0] * p[3] + p[2] * p[1] - 2.0 * p[2] * p[3]
}

/// `Φ_{q₀}(ε) = Re (iq₀ + ε)⁻² = (ε² − q₀²)/(ε² + q₀²)²`; even in `q₀`.
pub fn phi(q0: f64, e: f64) -> f64 {
    let s = e * e + q0 * q0;
    (e * e - q0 * q0) / (s * s)
}

/// Partition of `[-1,1]⁴` along the coordinate planes, where the zero-temperature
/// occupations jump.
pub(crate) fn orthant_boxes() -> Vec<Region> {
    let mut out = Vec::with_capacity(16);
    for m in 0..16u32 {
        let mut lo = vec![0.0; 4];
        let mut hi = vec![0.0; 4];
        for i in 0..4 {
            if m >> i & 1 == 1 {
                hi[i] = 1.0;
            } else {
                lo[i] = -1.0;
            }
        }
        out.push(Region::new(lo, hi).expect("valid box"));
    }
    out
}

/// `Σ₂(q₀, q)` by 4-D adaptive quadrature of the frequency-summed kernel.
pub fn sigma2(q0: f64, q: Vec2, state: ThermalState, spec: &QuadSpec) -> Result<SelfEnergyPoint, SelfEnergyError> {
    check_q0(q0)?;
    let f = Guided {
        f: |p: &[f64]| {
            let (e1, e2, e3) = xy_energies(q, p);
            let k = sigma2_kernel(state, e1, e2, e3, q0).expect("q0 checked");
            debug_assert!(k.norm() <= 2.0 / q0.abs() * (1.0 + 1e-12));
            k
        },
        energy: |p: &[f64]| {
            let (e1, e2, e3) = xy_energies(q, p);
            e2 - e3 - e1
        },
    };
    let r = integrate_partition(&f, &orthant_boxes(), spec)?;
    Ok(SelfEnergyPoint {
        q0,
        q,
        state,
        value: r.value,
        error_estimate: r.error_estimate,
        evaluations: r.evaluations,
        converged: r.converged,
        derivative_kind: DerivativeKind::None,
    })
}

/// Breakpoints `0, s, 10s, 100s, …, 1` resolving structure at scale `s`.
pub(crate) fn log_breaks(s: f64) -> Vec<f64> {
    let mut v = vec![0.0];
    let mut t = s;
    while t < 1.0 {
        v.push(t);
        t *= 10.0;
    }
    v.push(1.0);
    v
}

/// `∫∫ f(x, y)` over `[0,1]²` as an iterated adaptive integral with breakpoints
/// on both axes. Inner errors are accumulated into the reported estimate.
pub(crate) fn iterated_2d<F>(f: F, xb: &[f64], yb: &[f64], spec: &QuadSpec) -> Result<QuadResult<f64>, QuadError>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let inner_spec = QuadSpec {
        abs_tol: spec.abs_tol * 0.1,
        rel_tol: spec.rel_tol * 0.1,
        ..*spec
    };
    let inner_err = Mutex::new((0.0f64, 0u64, true));
    let failure = Mutex::new(None);
    let outer = integrate_1d_breaks(
        |x: f64| match integrate_1d_breaks(|y: f64| f(x, y), yb, &inner_spec) {
            Ok(r) => {
                let mut g = inner_err.lock().expect("not poisoned");
                g.0 = g.0.max(r.error_estimate);
                g.1 += r.evaluations;
                g.2 &= r.converged;
                r.value
            }
            Err(e) => {
                *failure.lock().expect("not poisoned") = Some(e);
                f64::NAN
            }
        },
        xb,
        spec,
    );
    if let Some(e) = failure.into_inner().expect("not poisoned") {
        return Err(e);
    }
    let outer = outer?;
    let (ie, ievals, iconv) = inner_err.into_inner().expect("not poisoned");
    let span = xb.last().unwrap_or(&1.0) - xb.first().unwrap_or(&0.0);
    Ok(QuadResult {
        value: outer.value,
        error_estimate: outer.error_estimate + ie * span,
        evaluations: outer.evaluations + ievals,
        converged: outer.converged && iconv,
    })
}

/// Default accuracy for the reduced (1-D/2-D) integrals.
pub fn reduced_spec() -> QuadSpec {
    QuadSpec::new(1e-11, 1e-11, 400_000)
}

/// `I(q₀) = 4∫₀¹dy∫₀¹dy'∫₀¹dx'∫₀^{x'}dx Φ_{q₀}((2x'−x)y' + yx')`.
///
/// The `x` and `x'` integrations are exact, leaving
/// `I = 4∫₀¹dy∫₀¹(dy'/y')[h(y+y') − h(y+2y')]`, `h(α) = ln(1+α²/q₀²)/(2α)`;
/// the `y`-integral of `h` is a difference of dilogarithms, so only the
/// `y'` integral is done numerically.
pub fn i_of_q0(q0: f64, spec: &QuadSpec) -> Result<QuadResult<f64>, SelfEnergyError> {
    check_q0(q0)?;
    let q = q0.abs();
    let l = |t: f64| dilog(-(t / q) * (t / q));
    let g = |yp: f64| (l(yp) - l(yp + 1.0) - l(2.0 * yp) + l(2.0 * yp + 1.0)) / yp;
    Ok(integrate_1d_breaks(g, &log_breaks(q), spec)?)
}

fn h_log(q: f64, a: f64) -> f64 {
    (a / q * (a / q)).ln_1p() / (2.0 * a)
}

/// The two-dimensional form of `I(q₀)`, integrated numerically in both variables.
pub fn i_of_q0_2d(q0: f64, spec: &QuadSpec) -> Result<QuadResult<f64>, SelfEnergyError> {
    check_q0(q0)?;
    let q = q0.abs();
    let b = log_breaks(q);
    let r = iterated_2d(
        |yp, y| 4.0 * (h_log(q, y + yp) - h_log(q, y + 2.0 * yp)) / yp,
        &b,
        &b,
        spec,
    )?;
    Ok(r)
}

/// `I(q₀)` from its defining 4-D integral, with `x = s·x'`.
pub fn i_of_q0_direct(q0: f64, spec: &QuadSpec) -> Result<QuadResult<f64>, SelfEnergyError> {
    check_q0(q0)?;
    let q = q0.abs();
    let eps = |p: &[f64]| {
        let (y, yp, xp, s) = (p[0], p[1], p[2], p[3]);
        (2.0 * xp - s * xp) * yp + y * xp
    };
    let f = Guided {
        f: |p: &[f64]| 4.0 * p[2] * phi(q, eps(p)),
        energy: eps,
    };
    let spec = spec.guided(q);
    Ok(integrate(&f, &Region::unit(4), &spec)?)
}

/// `Im ∂₀Σ₂(q₀, 0) = −2 I(|q₀|)` at zero temperature.
pub fn im_d0_sigma2(q0: f64, spec: &QuadSpec) -> Result<SelfEnergyPoint, SelfEnergyError> {
    check_q0(q0)?;
    debug_assert_eq!(phi(q0, 0.3), phi(-q0, 0.3));
    let r = i_of_q0(q0.abs(), spec)?.scale(-2.0);
    Ok(SelfEnergyPoint {
        q0,
        q: [0.0, 0.0],
        state: ThermalState::ZeroTemperature,
        value: Complex64::new(r.value, 0.0),
        error_estimate: r.error_estimate,
        evaluations: r.evaluations,
        converged: r.converged,
        derivative_kind: DerivativeKind::DOmega,
    })
}

/// `Im ∂₀Σ₂(q₀, 0) = ⟨Φ_{q₀}(ε) [f₁ + b₂₃][f₂ − f₃]⟩` by 4-D quadrature over
/// `[-1,1]⁴` at zero temperature, without any orthant reduction.
pub fn im_d0_sigma2_direct(q0: f64, spec: &QuadSpec) -> Result<QuadResult<f64>, SelfEnergyError> {
    check_q0(q0)?;
    let z = ThermalState::ZeroTemperature;
    let f = Guided {
        f: |p: &[f64]| {
            let (e1, e2, e3) = xy_energies([0.0, 0.0], p);
            phi(q0, e2 - e3 - e1) * sigma2_numerator(z, e1, e2, e3)
        },
        energy: |p: &[f64]| epsilon0(p),
    };
    Ok(integrate_partition(&f, &orthant_boxes(), &spec.guided(q0))?)
}

/// `C₁ = 2(ln 2)² − 4∫₀¹ (dx/x) ln((1+2x)/(1+x))`, through
/// `∫₀¹ ln(1+ax)/x dx = −Li₂(−a)`.
pub fn c1_constant() -> f64 {
    let ln2 = std::f64::consts::LN_2;
    2.0 * ln2 * ln2 - 4.0 * (dilog(-1.0) - dilog(-2.0))
}

/// Which component of the gradient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Xi,
    Eta,
}

fn axis_factor(axis: Axis, p: &[f64]) -> f64 {
    match axis {
        Axis::Xi => p[1] - p[3],
        Axis::Eta => p[0] - p[2],
    }
}

/// Integrand of `S₁`, the approximate-delta part of `−∂Σ₂(q₀, 0)`.
pub fn s1_integrand(p: &[f64], beta: f64, q0: f64, axis: Axis) -> Complex64 {
    let state = ThermalState::Finite { beta };
    let (e1, e2, e3) = xy_energies([0.0, 0.0], p);
    let df = fermi(state, e2) - fermi(state, e3);
    let delta = beta * fermi_kernel(beta * e1);
    -axis_factor(axis, p) * delta * df / Complex64::new(e2 - e3 - e1, q0)
}

/// Integrand of `S₂`, the squared-denominator part of `−∂Σ₂(q₀, 0)`.
pub fn s2_integrand(p: &[f64], beta: f64, q0: f64, axis: Axis) -> Complex64 {
    let state = ThermalState::Finite { beta };
    let (e1, e2, e3) = xy_energies([0.0, 0.0], p);
    let d = Complex64::new(e2 - e3 - e1, q0);
    axis_factor(axis, p) * sigma2_numerator(state, e1, e2, e3) / (d * d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientResult {
    pub q0: f64,
    pub beta: f64,
    /// `∂_ξ Σ₂(q₀, 0)` and `∂_η Σ₂(q₀, 0)`.
    pub components: [QuadResult<Complex64>; 2],
}

/// Extra cut in `x`. Without it the partition is reflection-symmetric and the
/// quadrature would cancel the odd integrand node by node, proving nothing.
pub const GRADIENT_SPLIT: f64 = 0.1;

/// `∇Σ₂(q₀, 0) = −(S₁ + S₂)` per component, at finite temperature.
pub fn grad_sigma2_at_vh(q0: f64, state: ThermalState, spec: &QuadSpec) -> Result<GradientResult, SelfEnergyError> {
    check_q0(q0)?;
    let beta = state.beta().ok_or_else(|| {
        SelfEnergyError::InvalidArgument("the gradient integrands need a finite temperature".into())
    })?;
    // orthant boxes (the occupations sharpen on the coordinate planes), with the
    // x > 0 half cut once more so no box is the mirror image of another
    let mut parts = Vec::with_capacity(24);
    for b in orthant_boxes() {
        if b.lower()[0] == 0.0 {
            let (l, r) = b.split_at(0, GRADIENT_SPLIT).expect("interior cut");
            parts.extend([l, r]);
        } else {
            parts.push(b);
        }
    }
    let mut components = Vec::with_capacity(2);
    for axis in [Axis::Xi, Axis::Eta] {
        let f = Guided {
            f: |p: &[f64]| -(s1_integrand(p, beta, q0, axis) + s2_integrand(p, beta, q0, axis)),
            energy: |p: &[f64]| epsilon0(p),
        };
        components.push(integrate_partition(&f, &parts, &spec.guided(q0))?);
    }
    Ok(GradientResult {
        q0,
        beta,
        components: [components[0], components[1]],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const I_01: f64 = 4.149_776_447_171_359;
    const I_001: f64 = 22.763_951_028_657_83;

    #[test]
    fn i_reference_values() {
        let s = reduced_spec();
        let a = i_of_q0(0.1, &s).unwrap();
        assert!((a.value - I_01).abs() < 1e-9, "{}", a.value);
        let b = i_of_q0(0.01, &s).unwrap();
        assert!((b.value - I_001).abs() < 1e-8, "{}", b.value);
        assert!(a.converged && b.converged);
    }

    #[test]
    fn i_two_dimensional_form_agrees() {
        let s = QuadSpec::new(1e-9, 1e-9, 200_000);
        for q0 in [0.3, 0.01] {
            let a = i_of_q0(q0, &reduced_spec()).unwrap().value;
            let b = i_of_q0_2d(q0, &s).unwrap();
            assert!((a - b.value).abs() < 1e-6 * a.abs(), "q0={q0}: {a} vs {}", b.value);
        }
    }

    #[test]
    fn c1_value() {
        assert!((c1_constant() + 1.496_211_306_001_87).abs() < 1e-13);
        // independent quadrature of the defining integral
        let r = crate::quad::integrate_1d(
            |x: f64| ((1.0 + 2.0 * x) / (1.0 + x)).ln() / x,
            0.0,
            1.0,
            &QuadSpec::new(1e-14, 1e-14, 100_000),
        )
        .unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert!((2.0 * ln2 * ln2 - 4.0 * r.value - c1_constant()).abs() < 1e-12);
    }

    #[test]
    fn frequency_derivative_is_even() {
        let s = reduced_spec();
        let a = im_d0_sigma2(0.05, &s).unwrap();
        let b = im_d0_sigma2(-0.05, &s).unwrap();
        assert_eq!(a.value, b.value);
        assert!(a.value.re < 0.0);
        assert!(im_d0_sigma2(0.0, &s).is_err());
    }

    #[test]
    fn sigma2_conjugation() {
        let spec = QuadSpec::new(1e-6, 1e-5, 200_000);
        let st = ThermalState::finite(3.0).unwrap();
        let a = sigma2(0.4, [0.1, -0.2], st, &spec).unwrap();
        let b = sigma2(-0.4, [0.1, -0.2], st, &spec).unwrap();
        assert_eq!(a.value, b.value.conj());
    }

    #[test]
    fn gradient_integrands_are_reflection_odd() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let p: [f64; 4] = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let r = p.map(|c| -c);
            let beta = rng.gen_range(1.0..40.0);
            for axis in [Axis::Xi, Axis::Eta] {
                assert_eq!(s1_integrand(&r, beta, 0.1, axis), -s1_integrand(&p, beta, 0.1, axis));
                assert_eq!(s2_integrand(&r, beta, 0.1, axis), -s2_integrand(&p, beta, 0.1, axis));
            }
        }
    }

    #[test]
    fn log_breaks_cover_unit_interval() {
        assert_eq!(log_breaks(0.01), vec![0.0, 0.01, 0.1, 1.0]);
        assert_eq!(log_breaks(2.0), vec![0.0, 1.0]);
    }
}
