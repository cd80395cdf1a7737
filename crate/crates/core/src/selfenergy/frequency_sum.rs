//! Brute-force check of the summed second-order kernel: the truncated double
//! Matsubara sum of three propagators on a coarse momentum grid.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sigma2, xy_energies, SelfEnergyError};
use crate::dispersion::Vec2;
use crate::matsubara::{matsubara_frequency, sigma2_kernel, ThermalState};
use crate::quad::{QuadResult, QuadSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencySumCheck {
    pub beta: f64,
    pub q0: f64,
    pub grid: usize,
    /// Both fermionic indices run over `[-cutoff, cutoff)`.
    pub cutoff: i64,
    pub distinct_triples: usize,
    pub frequency_sum: Complex64,
    /// The same sum with the cutoff halved.
    pub frequency_sum_half: Complex64,
    /// Midpoint rule of the summed kernel on the same grid.
    pub grid_kernel: Complex64,
    /// Midpoint rule of the summed kernel on a grid half as fine.
    pub grid_kernel_coarse: Complex64,
    pub adaptive: QuadResult<Complex64>,
    /// `2|S_N − S_{N/2}|`; the tail falls off like `1/N`.
    pub truncation_budget: f64,
    /// `|K_h − K_{2h}|`, which bounds the `O(h²)` midpoint error with room to spare.
    pub grid_budget: f64,
}

impl FrequencySumCheck {
    /// Frequency sum vs summed kernel, same grid.
    pub fn truncation_residual(&self) -> f64 {
        (self.frequency_sum - self.grid_kernel).norm()
    }

    /// Grid kernel vs adaptive quadrature.
    pub fn grid_residual(&self) -> f64 {
        (self.grid_kernel - self.adaptive.value).norm()
    }

    pub fn total_residual(&self) -> f64 {
        (self.frequency_sum - self.adaptive.value).norm()
    }

    pub fn total_budget(&self) -> f64 {
        self.truncation_budget + self.grid_budget + 3.0 * self.adaptive.error_estimate
    }

    pub fn passes(&self) -> bool {
        self.truncation_residual() <= self.truncation_budget
            && self.grid_residual() <= self.grid_budget + 3.0 * self.adaptive.error_estimate
            && self.total_residual() <= self.total_budget()
    }
}

type Key = (u64, u64, u64);

/// Multiplicities of the distinct `(E₁, E₂, E₃)` on an `n⁴` midpoint grid.
fn energy_triples(q: Vec2, n: usize) -> BTreeMap<Key, u64> {
    let h = 2.0 / n as f64;
    let v: Vec<f64> = (0..n).map(|k| -1.0 + (k as f64 + 0.5) * h).collect();
    let mut map = BTreeMap::new();
    for &x in &v {
        for &y in &v {
            for &xp in &v {
                for &yp in &v {
                    let (e1, e2, e3) = xy_energies(q, &[x, y, xp, yp]);
                    *map.entry((e1.to_bits(), e2.to_bits(), e3.to_bits())).or_insert(0) += 1;
                }
            }
        }
    }
    map
}

fn propagator(w: f64, e: f64) -> Complex64 {
    Complex64::new(-e, w).inv()
}

/// `−β⁻² Σ_{n₁,n₂} C(ω₁,E₁) C(ω₂,E₂) C(q₀+ω₂−ω₁,E₃)`, `C(ω,E) = 1/(iω − E)`,
/// summed over the grid triples with weight `h⁴`.
fn truncated_sum(triples: &BTreeMap<Key, u64>, beta: f64, q0: f64, cutoff: i64, h4: f64) -> Complex64 {
    let n = (2 * cutoff) as usize;
    let w = |k: usize| matsubara_frequency(beta, k as i64 - cutoff);
    let step = 2.0 * std::f64::consts::PI / beta;
    let mut pairs: BTreeMap<(u64, u64), Vec<(u64, u64)>> = BTreeMap::new();
    for (&(e1, e2, e3), &count) in triples {
        pairs.entry((e2, e3)).or_default().push((e1, count));
    }
    let pairs: Vec<_> = pairs.into_iter().collect();
    let partial: Vec<Complex64> = pairs
        .par_iter()
        .map(|&((e2, e3), ref ones)| {
            let (e2, e3) = (f64::from_bits(e2), f64::from_bits(e3));
            let c2: Vec<Complex64> = (0..n).map(|k| propagator(w(k), e2)).collect();
            // index n₂ − n₁ + n − 1 ∈ [0, 2n−1)
            let c3: Vec<Complex64> = (0..2 * n - 1)
                .map(|m| propagator(q0 + step * (m as f64 - (n as f64 - 1.0)), e3))
                .collect();
            let g: Vec<Complex64> = (0..n)
                .map(|n1| (0..n).map(|n2| c2[n2] * c3[n2 + n - 1 - n1]).sum())
                .collect();
            let mut acc = Complex64::new(0.0, 0.0);
            for &(e1, count) in ones {
                let e1 = f64::from_bits(e1);
                let s: Complex64 = (0..n).map(|n1| propagator(w(n1), e1) * g[n1]).sum();
                acc += s * count as f64;
            }
            acc
        })
        .collect();
    -partial.iter().sum::<Complex64>() * h4 / (beta * beta)
}

fn grid_kernel(state: ThermalState, q: Vec2, q0: f64, n: usize) -> Result<Complex64, SelfEnergyError> {
    let h = 2.0 / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (&(e1, e2, e3), &count) in &energy_triples(q, n) {
        let k = sigma2_kernel(state, f64::from_bits(e1), f64::from_bits(e2), f64::from_bits(e3), q0)?;
        acc += k * count as f64;
    }
    Ok(acc * h.powi(4))
}

/// Compares `sigma2` at the fermionic frequency with index `m` against the
/// truncated double frequency sum on a `grid⁴` midpoint grid.
pub fn frequency_sum_oracle(
    beta: f64,
    m: i64,
    q: Vec2,
    grid: usize,
    cutoff: i64,
    spec: &QuadSpec,
) -> Result<FrequencySumCheck, SelfEnergyError> {
    let state = ThermalState::finite(beta)?;
    if grid < 2 || grid % 2 != 0 || cutoff < 2 || cutoff % 2 != 0 {
        return Err(SelfEnergyError::InvalidArgument(
            "grid and cutoff must be even and at least 2".into(),
        ));
    }
    let q0 = matsubara_frequency(beta, m);
    let triples = energy_triples(q, grid);
    let h4 = (2.0 / grid as f64).powi(4);
    let frequency_sum = truncated_sum(&triples, beta, q0, cutoff, h4);
    let frequency_sum_half = truncated_sum(&triples, beta, q0, cutoff / 2, h4);
    let grid_kernel_fine = grid_kernel(state, q, q0, grid)?;
    let grid_kernel_coarse = grid_kernel(state, q, q0, grid / 2)?;
    let adaptive = sigma2(q0, q, state, spec)?;
    Ok(FrequencySumCheck {
        beta,
        q0,
        grid,
        cutoff,
        distinct_triples: triples.len(),
        frequency_sum,
        frequency_sum_half,
        grid_kernel: grid_kernel_fine,
        grid_kernel_coarse,
        adaptive: QuadResult {
            value: adaptive.value,
            error_estimate: adaptive.error_estimate,
            evaluations: adaptive.evaluations,
            converged: adaptive.converged,
        },
        truncation_budget: 2.0 * (frequency_sum - frequency_sum_half).norm(),
        grid_budget: (grid_kernel_fine - grid_kernel_coarse).norm(),
    })
}
