//! The sixteen sign cases of `(x, y, x', y')` used to rewrite integrals over
//! `[-1,1]⁴` as integrals over `[0,1]⁴`.
//!
//! With `E₂ = xy`, `E₃ = x'y'`, `E₁ = (x-x')(y-y')`, each case lists, as
//! functions of the absolute values `(X, Y, X', Y')`:
//! `ε = xy' + x'y - 2x'y'`, `D = y - y'`, `F = (x-x')(y-y')`, and `ρ`, the
//! condition under which the zero-temperature occupation factors do not
//! vanish. Cases 5–8 and 13–16 have `E₂E₃ > 0`, so `D`, `F`, `ρ` are not
//! tabulated there. Case `n+8` is case `n` reflected through the origin.

use crate::quad::QuadValue;

pub type Point4 = [f64; 4];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrthantTerm {
    n: usize,
    /// Signs of `(x, y, x', y')`.
    signs: [i8; 4],
}

const SIGNS: [[i8; 4]; 16] = [
    [1, 1, 1, -1],
    [1, 1, -1, 1],
    [1, -1, 1, 1],
    [1, -1, -1, -1],
    [1, 1, 1, 1],
    [1, 1, -1, -1],
    [1, -1, 1, -1],
    [1, -1, -1, 1],
    [-1, -1, -1, 1],
    [-1, -1, 1, -1],
    [-1, 1, -1, -1],
    [-1, 1, 1, 1],
    [-1, -1, -1, -1],
    [-1, -1, 1, 1],
    [-1, 1, -1, 1],
    [-1, 1, 1, -1],
];

/// Cases whose sign pattern is compatible with the zero-temperature
/// restriction `E₂E₃ < 0`.
pub const RESTRICTED: [usize; 8] = [1, 2, 3, 4, 9, 10, 11, 12];

/// All 16 rows.
pub fn table() -> Vec<OrthantTerm> {
    (1..=16).map(|n| OrthantTerm::new(n).expect("valid index")).collect()
}

fn eps_base(n: usize, p: &Point4) -> f64 {
    let [x, y, xp, yp] = *p;
    match n {
        1 => xp * y + (2.0 * xp - x) * yp,
        2 => x * yp + (2.0 * yp - y) * xp,
        3 => x * yp - (2.0 * yp + y) * xp,
        4 => xp * y - (2.0 * xp + x) * yp,
        5 => x * yp - xp * (2.0 * yp - y),
        6 => -(x * yp + xp * (2.0 * yp + y)),
        7 => -(x * yp - xp * (2.0 * yp - y)),
        8 => x * yp + xp * (2.0 * yp + y),
        _ => unreachable!(),
    }
}

fn d_base(n: usize, p: &Point4) -> Option<f64> {
    let [_, y, _, yp] = *p;
    match n {
        1 => Some(y + yp),
        2 => Some(y - yp),
        3 => Some(-(y + yp)),
        4 => Some(-(y - yp)),
        _ => None,
    }
}

fn f_base(n: usize, p: &Point4) -> Option<f64> {
    let [x, y, xp, yp] = *p;
    match n {
        1 => Some((x - xp) * (y + yp)),
        2 => Some((x + xp) * (y - yp)),
        3 => Some(-(x - xp) * (y + yp)),
        4 => Some(-(x + xp) * (y - yp)),
        _ => None,
    }
}

fn rho_base(n: usize, p: &Point4) -> Option<bool> {
    let [x, y, xp, yp] = *p;
    match n {
        1 | 3 => Some(x < xp),
        2 | 4 => Some(y < yp),
        _ => None,
    }
}

impl OrthantTerm {
    pub fn new(n: usize) -> Option<Self> {
        (1..=16).contains(&n).then(|| Self {
            n,
            signs: SIGNS[n - 1],
        })
    }

    pub fn index(&self) -> usize {
        self.n
    }

    pub fn sign_pattern(&self) -> [i8; 4] {
        self.signs
    }

    fn base(&self) -> usize {
        if self.n > 8 {
            self.n - 8
        } else {
            self.n
        }
    }

    /// Signed coordinates `(x, y, x', y')` for absolute values `p`.
    pub fn signed_point(&self, p: &Point4) -> Point4 {
        let mut out = *p;
        for (o, s) in out.iter_mut().zip(self.signs) {
            *o *= s as f64;
        }
        out
    }

    pub fn epsilon(&self, p: &Point4) -> f64 {
        eps_base(self.base(), p)
    }

    pub fn d(&self, p: &Point4) -> Option<f64> {
        let d = d_base(self.base(), p)?;
        Some(if self.n > 8 { -d } else { d })
    }

    pub fn f(&self, p: &Point4) -> Option<f64> {
        f_base(self.base(), p)
    }

    pub fn rho(&self, p: &Point4) -> Option<bool> {
        rho_base(self.base(), p)
    }
}

/// `ε = xy' + x'y - 2x'y'` in signed coordinates.
pub fn epsilon_signed(p: &Point4) -> f64 {
    let [x, y, xp, yp] = *p;
    x * yp + xp * y - 2.0 * xp * yp
}

/// Whether `ρ` multiplies the folded integrand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Restriction {
    /// Plain change of variables: `∫_{[-1,1]⁴} g = ∫_{[0,1]⁴} Σₙ g∘sₙ`.
    Ignore,
    /// Multiply each term by `1{ρₙ}` where `ρₙ` is tabulated.
    Rho,
}

/// Sum over the selected cases of `f` evaluated at the signed point, as a
/// function of `(X, Y, X', Y') ∈ [0,1]⁴`.
pub fn fold_to_positive<T, F>(
    f: F,
    selection: &[usize],
    restriction: Restriction,
) -> impl Fn(&Point4) -> T + Sync
where
    T: QuadValue,
    F: Fn(&Point4) -> T + Sync,
{
    let terms: Vec<OrthantTerm> = selection.iter().filter_map(|&n| OrthantTerm::new(n)).collect();
    move |p: &Point4| {
        let mut acc = T::zero();
        for t in &terms {
            if restriction == Restriction::Rho && t.rho(p) == Some(false) {
                continue;
            }
            acc += f(&t.signed_point(p));
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(seed: u64, n: usize) -> Vec<Point4> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| [rng.gen(), rng.gen(), rng.gen(), rng.gen()]).collect()
    }

    #[test]
    fn row_one_example() {
        let t = OrthantTerm::new(1).unwrap();
        let p = [0.0, 0.0, 1.0, 1.0];
        assert_eq!(t.epsilon(&p), 2.0);
        assert_eq!(t.rho(&p), Some(true));
    }

    #[test]
    fn rows_match_signed_formula() {
        let pts = random_points(3, 10_000);
        for t in table() {
            for p in &pts {
                let s = t.signed_point(p);
                assert!((t.epsilon(p) - epsilon_signed(&s)).abs() < 1e-14, "row {}", t.index());
                if let Some(d) = t.d(p) {
                    assert!((d - (s[1] - s[3])).abs() < 1e-14);
                }
                if let Some(f) = t.f(p) {
                    assert!((f - (s[0] - s[2]) * (s[1] - s[3])).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn rho_is_the_occupation_restriction() {
        // E2 E3 < 0 and sign(E1) = sign(E3) off the measure-zero boundary.
        for p in random_points(4, 10_000) {
            for n in RESTRICTED {
                let t = OrthantTerm::new(n).unwrap();
                let s = t.signed_point(&p);
                let (e2, e3) = (s[0] * s[1], s[2] * s[3]);
                assert!(e2 * e3 < 0.0);
                let e1 = (s[0] - s[2]) * (s[1] - s[3]);
                assert_eq!(t.rho(&p).unwrap(), e1 * e3 > 0.0, "row {n}");
            }
            for n in [5, 6, 7, 8, 13, 14, 15, 16] {
                let t = OrthantTerm::new(n).unwrap();
                let s = t.signed_point(&p);
                assert!(s[0] * s[1] * s[2] * s[3] > 0.0);
                assert!(t.rho(&p).is_none() && t.d(&p).is_none() && t.f(&p).is_none());
            }
        }
    }

    #[test]
    fn sign_patterns_cover_all_orthants() {
        let mut seen: Vec<[i8; 4]> = table().iter().map(|t| t.sign_pattern()).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 16);
        for n in 1..=8 {
            let a = SIGNS[n - 1];
            let b = SIGNS[n + 7];
            assert_eq!(a.map(|s| -s), b);
        }
    }

    #[test]
    fn constant_folds_to_sixteen() {
        let all: Vec<usize> = (1..=16).collect();
        let g = fold_to_positive(|_: &Point4| 1.0, &all, Restriction::Ignore);
        for p in random_points(5, 100) {
            assert_eq!(g(&p), 16.0);
        }
        assert!(OrthantTerm::new(0).is_none() && OrthantTerm::new(17).is_none());
    }

    #[test]
    fn restricted_fold_of_even_function_collapses() {
        let q0 = 0.1;
        let phi = |e: f64| (e * e - q0 * q0) / (e * e + q0 * q0).powi(2);
        let g = fold_to_positive(|s: &Point4| phi(epsilon_signed(s)), &RESTRICTED, Restriction::Rho);
        let t1 = OrthantTerm::new(1).unwrap();
        let t2 = OrthantTerm::new(2).unwrap();
        for p in random_points(6, 1000) {
            let want = 4.0 * phi(t1.epsilon(&p)) * (t1.rho(&p).unwrap() as u8 as f64)
                + 4.0 * phi(t2.epsilon(&p)) * (t2.rho(&p).unwrap() as u8 as f64);
            assert!((g(&p) - want).abs() < 1e-12 * (1.0 + want.abs()));
        }
    }
}
