//! Special functions not covered by `std`: the real dilogarithm and the
//! unit-temperature Fermi kernel.

use std::f64::consts::PI;

const PI2_6: f64 = PI * PI / 6.0;

// B_{2k} / (2k+1)! for k = 1.., the coefficients of the series
// Li2(x) = sum_n B_n u^{n+1}/(n+1)!, u = -ln(1-x).
const BERNOULLI_DILOG: [f64; 10] = [
    1.0 / 36.0,
    -1.0 / 3600.0,
    1.0 / 211_680.0,
    -1.0 / 10_886_400.0,
    1.0 / 526_901_760.0,
    -4.064_761_645_144_226e-11,
    8.921_691_020_456_453e-13,
    -1.993_929_586_072_108e-14,
    4.518_980_029_619_918e-16,
    -1.035_651_761_218_125e-17,
];

/// Real dilogarithm `Li₂(x) = -∫₀ˣ ln(1-t)/t dt` for `x ≤ 1`.
/// Returns NaN for `x > 1` (the function is complex there).
pub fn dilog(x: f64) -> f64 {
    if x.is_nan() || x > 1.0 {
        return f64::NAN;
    }
    if x == 1.0 {
        return PI2_6;
    }
    if x == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if x < -1.0 {
        // Li2(x) = -π²/6 - ½ ln²(-x) - Li2(1/x)
        let l = (-x).ln();
        return -PI2_6 - 0.5 * l * l - dilog_core(1.0 / x);
    }
    if x > 0.5 {
        // Li2(x) = π²/6 - ln(x) ln(1-x) - Li2(1-x)
        return PI2_6 - x.ln() * (-x).ln_1p() - dilog_core(1.0 - x);
    }
    dilog_core(x)
}

// Valid for -1 <= x <= 1/2, where |u| <= ln 2.
fn dilog_core(x: f64) -> f64 {
    let u = -(-x).ln_1p();
    let u2 = u * u;
    let mut sum = 0.0;
    let mut p = u2 * u; // u^{2k+1}
    for c in BERNOULLI_DILOG {
        sum += c * p;
        p *= u2;
    }
    u - 0.25 * u2 + sum
}

/// `δ₁(u) = 1/(4 cosh²(u/2)) = -f'(u)` for the unit-temperature Fermi function.
pub fn fermi_kernel(u: f64) -> f64 {
    let a = u.abs();
    if a > 700.0 {
        return 0.0;
    }
    let t = (-a).exp();
    t / ((1.0 + t) * (1.0 + t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_1d, QuadSpec};

    #[test]
    fn dilog_special_values() {
        let ln2 = 2f64.ln();
        assert!((dilog(0.0)).abs() < 1e-300);
        assert!((dilog(1.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((dilog(-1.0) + PI * PI / 12.0).abs() < 1e-15);
        assert!((dilog(0.5) - (PI * PI / 12.0 - 0.5 * ln2 * ln2)).abs() < 1e-15);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        // Li2((3-√5)/2) = π²/15 - ln²φ with φ the golden ratio
        let lnphi = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((dilog(1.0 - phi) - (PI * PI / 15.0 - lnphi * lnphi)).abs() < 1e-14);
        assert!(dilog(1.5).is_nan());
    }

    #[test]
    fn dilog_matches_defining_integral() {
        let spec = QuadSpec::new(1e-15, 1e-15, 100_000);
        for &x in &[-50.0, -3.0, -1.2, -0.7, -0.1, 0.2, 0.45, 0.6, 0.9, 0.999] {
            let direct = integrate_1d(|t: f64| -(-t * x).ln_1p() / t, 0.0, 1.0, &spec)
                .unwrap()
                .value;
            assert!((dilog(x) - direct).abs() < 1e-13 * (1.0 + direct.abs()), "x={x}: {} vs {direct}", dilog(x));
        }
    }

    #[test]
    fn dilog_is_continuous_across_branch_switches() {
        for &x0 in &[-1.0f64, 0.5] {
            let lo = dilog(x0 - 1e-12);
            let hi = dilog(x0 + 1e-12);
            assert!((lo - hi).abs() < 1e-11);
        }
    }

    #[test]
    fn fermi_kernel_values() {
        assert!((fermi_kernel(0.0) - 0.25).abs() < 1e-16);
        assert!((fermi_kernel(3.0) - 1.0 / (4.0 * 1.5f64.cosh().powi(2))).abs() < 1e-16);
    }
}
