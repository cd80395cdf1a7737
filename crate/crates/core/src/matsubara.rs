//! Thermal occupation factors and the frequency-summed second-order kernel.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::fermi_kernel;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum ThermalError {
    #[error("inverse temperature must be positive and finite, got {0}")]
    InvalidBeta(f64),
    #[error("Bose function evaluated at its pole (beta*E = {0:e})")]
    BosePole(f64),
    #[error("external frequency q0 must be nonzero")]
    ZeroFrequency,
}

/// Inverse temperature, or the zero-temperature limit as a distinct state
/// (so that the step function takes the value ½ at 0 rather than whatever
/// `β = ∞` arithmetic would produce).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThermalState {
    Finite { beta: f64 },
    ZeroTemperature,
}

impl ThermalState {
    pub fn finite(beta: f64) -> Result<Self, ThermalError> {
        if beta.is_finite() && beta > 0.0 {
            Ok(Self::Finite { beta })
        } else {
            Err(ThermalError::InvalidBeta(beta))
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match *self {
            Self::Finite { beta } => Some(beta),
            Self::ZeroTemperature => None,
        }
    }

    pub fn is_zero_temperature(&self) -> bool {
        matches!(self, Self::ZeroTemperature)
    }
}

fn step_half(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// `f_β(E) = 1/(1+e^{βE})`; at zero temperature `Θ_{1/2}(-E)`.
pub fn fermi(state: ThermalState, e: f64) -> f64 {
    match state {
        ThermalState::ZeroTemperature => step_half(-e),
        ThermalState::Finite { beta } => {
            let z = beta * e;
            if z > 0.0 {
                let t = (-z).exp();
                t / (1.0 + t)
            } else {
                1.0 / (1.0 + z.exp())
            }
        }
    }
}

/// `b_β(E) = 1/(e^{βE}-1)`; at zero temperature `-Θ(-E)`.
pub fn bose(state: ThermalState, e: f64) -> Result<f64, ThermalError> {
    match state {
        ThermalState::ZeroTemperature => {
            if e == 0.0 {
                Err(ThermalError::BosePole(0.0))
            } else {
                Ok(-step_half(-e))
            }
        }
        ThermalState::Finite { beta } => {
            let z = beta * e;
            if z.abs() < 1e-12 {
                return Err(ThermalError::BosePole(z));
            }
            if z > 1.0 {
                let t = (-z).exp();
                Ok(t / (1.0 - t))
            } else {
                Ok(1.0 / z.exp_m1())
            }
        }
    }
}

/// `δ_β(x) = β/(4 cosh²(βx/2))`.
pub fn approx_delta(beta: f64, x: f64) -> f64 {
    beta * fermi_kernel(beta * x)
}

/// `b_β(E₂-E₃)[f_β(E₂) - f_β(E₃)]`, evaluated through the pole-free form
/// `f_β(E₂)[f_β(E₃) - 1]`.
pub fn bose_fermi_product(state: ThermalState, e2: f64, e3: f64) -> f64 {
    fermi(state, e2) * (fermi(state, e3) - 1.0)
}

/// Numerator `[f(E₁) + b(E₂-E₃)][f(E₂) - f(E₃)]` of the second-order
/// kernel. Its magnitude never exceeds 2.
pub fn sigma2_numerator(state: ThermalState, e1: f64, e2: f64, e3: f64) -> f64 {
    let f2 = fermi(state, e2);
    let f3 = fermi(state, e3);
    fermi(state, e1) * (f2 - f3) + f2 * (f3 - 1.0)
}

/// `-[f(E₁) + b(E₂-E₃)][f(E₂) - f(E₃)] / (iq₀ + E₂ - E₃ - E₁)`.
pub fn sigma2_kernel(
    state: ThermalState,
    e1: f64,
    e2: f64,
    e3: f64,
    q0: f64,
) -> Result<Complex64, ThermalError> {
    if q0 == 0.0 {
        return Err(ThermalError::ZeroFrequency);
    }
    let num = sigma2_numerator(state, e1, e2, e3);
    Ok(-num / Complex64::new(e2 - e3 - e1, q0))
}

/// Fermionic Matsubara frequency `(2n+1)π/β`.
pub fn matsubara_frequency(beta: f64, n: i64) -> f64 {
    (2 * n + 1) as f64 * std::f64::consts::PI / beta
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn b(beta: f64) -> ThermalState {
        ThermalState::finite(beta).unwrap()
    }

    #[test]
    fn fermi_values() {
        assert_eq!(fermi(b(1.0), 0.0), 0.5);
        assert_eq!(fermi(ThermalState::ZeroTemperature, -0.3), 1.0);
        assert_eq!(fermi(ThermalState::ZeroTemperature, 0.0), 0.5);
        assert_eq!(fermi(ThermalState::ZeroTemperature, 0.3), 0.0);
        // 1/(1+e^2)
        assert!((fermi(b(10.0), 0.2) - 0.119_202_922_022_117_57).abs() < 1e-15);
        assert_eq!(fermi(b(1e4), 1.0), 0.0);
        assert_eq!(fermi(b(1e4), -1.0), 1.0);
    }

    #[test]
    fn bose_values() {
        assert!((bose(b(2.0), 1.0).unwrap() - 0.156_517_642_749_664_84).abs() < 1e-15);
        assert_eq!(bose(ThermalState::ZeroTemperature, 0.4).unwrap(), 0.0);
        assert_eq!(bose(ThermalState::ZeroTemperature, -0.4).unwrap(), -1.0);
        assert!(matches!(bose(b(2.0), 0.0), Err(ThermalError::BosePole(_))));
        for &e in &[1e-6, 0.3, 5.0, 40.0] {
            let (p, m) = (bose(b(3.0), e).unwrap(), bose(b(3.0), -e).unwrap());
            // the sum cancels two terms of size |b|
            assert!((p + m + 1.0).abs() < 1e-12 * (1.0 + p.abs()), "E={e}");
        }
    }

    #[test]
    fn approx_delta_values() {
        assert_eq!(approx_delta(8.0, 0.0), 2.0);
        let want = 10.0 / (4.0 * 2.5f64.cosh().powi(2));
        assert!((approx_delta(10.0, 0.5) - want).abs() < 1e-15);
        assert_eq!(approx_delta(1e4, 1.0), 0.0);
    }

    #[test]
    fn approx_delta_is_normalised() {
        use crate::quad::{integrate_1d_breaks, QuadSpec};
        let r = integrate_1d_breaks(
            |x: f64| approx_delta(50.0, x),
            &[-1.0, -0.1, 0.0, 0.1, 1.0],
            &QuadSpec::new(1e-14, 1e-14, 200_000),
        )
        .unwrap();
        // the tails beyond |x| = 1 weigh 2/(1+e^50) ~ 4e-22
        assert!((r.value - 1.0).abs() < 1e-13, "{}", r.value);
    }

    #[test]
    fn bose_fermi_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let beta: f64 = rng.gen_range(0.1..50.0);
            let e2: f64 = rng.gen_range(-2.0..2.0);
            let e3: f64 = if rng.gen_bool(0.5) {
                rng.gen_range(-2.0..2.0)
            } else {
                e2 + rng.gen_range(-1e-9..1e-9)
            };
            let s = b(beta);
            let combined = bose_fermi_product(s, e2, e3);
            match bose(s, e2 - e3) {
                Ok(bz) => {
                    let direct = bz * (fermi(s, e2) - fermi(s, e3));
                    // the direct form loses digits as |e2 - e3| shrinks
                    let tol = 1e-12 + 1e-15 / (beta * (e2 - e3)).abs();
                    assert!((direct - combined).abs() < tol, "β={beta} e2={e2} e3={e3}");
                }
                Err(ThermalError::BosePole(_)) => {
                    let limit = -fermi(s, e2) * (1.0 - fermi(s, e2));
                    assert!((combined - limit).abs() < 1e-9);
                }
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn kernel_examples() {
        let s = b(5.0);
        let k = sigma2_kernel(s, 0.3, 0.2, 0.2, 0.1).unwrap();
        assert!(k.norm().is_finite() && k.norm() <= 2.0 / 0.1);
        let num = sigma2_numerator(s, 0.3, 0.2, 0.2);
        let f2 = fermi(s, 0.2);
        assert!((num - f2 * (f2 - 1.0)).abs() < 1e-16);

        let z = ThermalState::ZeroTemperature;
        assert_eq!(sigma2_numerator(z, 0.1, -0.1, 0.1), -1.0);
        assert_eq!(sigma2_kernel(z, 0.1, 0.1, 0.1, 0.2).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(sigma2_kernel(z, 0.1, 0.1, 0.1, 0.0), Err(ThermalError::ZeroFrequency));
    }

    #[test]
    fn kernel_bound_and_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let s = if rng.gen_bool(0.2) {
                ThermalState::ZeroTemperature
            } else {
                b(rng.gen_range(0.1..100.0))
            };
            let e: [f64; 3] = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let q0: f64 = rng.gen_range(1e-4..2.0);
            let k = sigma2_kernel(s, e[0], e[1], e[2], q0).unwrap();
            assert!(k.norm() <= 2.0 / q0 * (1.0 + 1e-15));
            let km = sigma2_kernel(s, e[0], e[1], e[2], -q0).unwrap();
            assert_eq!(km, k.conj());
        }
    }

    #[test]
    fn finite_beta_kernel_converges_to_zero_temperature() {
        let pts = [(0.3, -0.5, 0.4), (-0.2, 0.6, -0.3), (0.5, 0.5, -0.25)];
        let m = 0.2;
        let z = ThermalState::ZeroTemperature;
        for &beta in &[10.0, 20.0, 40.0, 80.0] {
            let sup = pts
                .iter()
                .map(|&(e1, e2, e3)| {
                    (sigma2_kernel(b(beta), e1, e2, e3, 0.1).unwrap()
                        - sigma2_kernel(z, e1, e2, e3, 0.1).unwrap())
                    .norm()
                })
                .fold(0.0, f64::max);
            // each of four occupations is within e^{-β m} of its limit
            assert!(sup <= 4.0 * 2.0 / 0.1 * (-beta * m).exp(), "β={beta}: {sup}");
        }
    }

    #[test]
    fn invalid_beta_rejected() {
        assert!(ThermalState::finite(0.0).is_err());
        assert!(ThermalState::finite(f64::INFINITY).is_err());
        assert!(ThermalState::finite(-1.0).is_err());
    }
}
