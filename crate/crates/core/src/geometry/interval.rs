//! Sublevel-set volumes of functions with a nonvanishing k-th derivative.
//!
//! If `|f⁽ᵏ⁾| ≥ η` on an interval then `|{x : |f(x)| ≤ ε}| ≤ 2^{k+1} (ε/η)^{1/k}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GeometryError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalCheck {
    pub measured: f64,
    pub bound: f64,
    pub holds: bool,
    /// Smallest `|f⁽ᵏ⁾|` seen on the hypothesis grid.
    pub min_derivative: f64,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Central finite difference for the k-th derivative.
fn fd_derivative(f: &dyn Fn(f64) -> f64, x: f64, k: u32, h: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..=k {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * binomial(k, i) * f(x + (0.5 * k as f64 - i as f64) * h);
    }
    s / h.powi(k as i32)
}

/// Measures `|{x ∈ [a,b] : |f(x)| ≤ ε}|` on a midpoint grid of `grid` cells and
/// compares it with `2^{k+1}(ε/η)^{1/k}`.
///
/// The hypothesis `|f⁽ᵏ⁾| ≥ η` is checked on a grid of `min(grid, 4096)`
/// points, using `derivative` when supplied and central differences otherwise.
pub fn interval_lemma_check(
    f: &dyn Fn(f64) -> f64,
    derivative: Option<&dyn Fn(f64) -> f64>,
    interval: (f64, f64),
    k: u32,
    eta: f64,
    eps: f64,
    grid: usize,
) -> Result<IntervalCheck, GeometryError> {
    let (a, b) = interval;
    if !(a < b) || k == 0 || !(eta > 0.0) || !(eps > 0.0) || grid == 0 {
        return Err(GeometryError::InvalidArgument(
            "need a < b, k ≥ 1, eta > 0, eps > 0, grid > 0".into(),
        ));
    }
    let hyp_n = grid.clamp(2, 4096);
    let h = 1e-3 * (b - a);
    let mut min_derivative = f64::INFINITY;
    for i in 0..hyp_n {
        let x = a + (b - a) * i as f64 / (hyp_n - 1) as f64;
        let d = match derivative {
            Some(df) => df(x),
            None => fd_derivative(f, x, k, h),
        };
        if d.abs() < min_derivative {
            min_derivative = d.abs();
        }
        // finite differences carry O(h²) and roundoff error; exact derivatives get none
        let slack = if derivative.is_some() { 0.0 } else { 1e-6 * eta };
        if d.abs() < eta - slack {
            return Err(GeometryError::HypothesisViolated { x, found: d.abs(), eta });
        }
    }
    let cell = (b - a) / grid as f64;
    let count = (0..grid).filter(|&i| f(a + (i as f64 + 0.5) * cell).abs() <= eps).count();
    let measured = count as f64 * cell;
    let bound = 2f64.powi(k as i32 + 1) * (eps / eta).powf(1.0 / k as f64);
    Ok(IntervalCheck {
        measured,
        bound,
        holds: measured <= bound,
        min_derivative,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    /// Ascending powers.
    pub coefficients: Vec<f64>,
}

impl Polynomial {
    pub fn new(coefficients: Vec<f64>) -> Self {
        Self { coefficients }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self, k: u32) -> Polynomial {
        let k = k as usize;
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .skip(k)
            .map(|(n, c)| c * ((n - k + 1)..=n).map(|m| m as f64).product::<f64>())
            .collect::<Vec<_>>();
        Polynomial::new(if coefficients.is_empty() { vec![0.0] } else { coefficients })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: usize,
    pub k: u32,
    pub eta: f64,
    pub eps: f64,
    pub polynomial: Polynomial,
}

/// The seeded corpus shipped with the crate (seed 2024, 100 per k).
pub const BUNDLED_CORPUS: &str = include_str!("../../data/interval_corpus.csv");
pub const CORPUS_SEED: u64 = 2024;

/// Random polynomials on `[-1, 1]` of the form `a ∏(x − rᵢ) + c x^{k+1}`
/// with `k` roots in `[-1, 1]`; the k-th derivative `a k! + c (k+1)! x`
/// stays at least `η = |a| k! − |c| (k+1)!` away from zero.
pub fn generate_corpus(seed: u64, per_k: usize) -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for k in 1..=3u32 {
        let kf: f64 = (1..=k).map(|m| m as f64).product();
        for _ in 0..per_k {
            let a: f64 = rng.gen_range(0.5..4.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            // clustered roots make the sublevel set as large as the bound allows
            let centre: f64 = rng.gen_range(-0.8..0.8);
            let spread: f64 = 10f64.powf(rng.gen_range(-4.0..-0.5));
            let mut poly = vec![a];
            for _ in 0..k {
                let r = (centre + rng.gen_range(-spread..spread)).clamp(-1.0, 1.0);
                let mut next = vec![0.0; poly.len() + 1];
                for (i, c) in poly.iter().enumerate() {
                    next[i + 1] += c;
                    next[i] -= r * c;
                }
                poly = next;
            }
            let c_max = 0.5 * a.abs() * kf / (kf * (k + 1) as f64);
            let c: f64 = rng.gen_range(-c_max..c_max);
            poly.push(c);
            let eps = 10f64.powf(rng.gen_range(-5.0..-1.0));
            out.push(CorpusEntry {
                id: out.len(),
                k,
                eta: 0.0,
                eps,
                polynomial: Polynomial::new(poly),
            });
        }
    }
    for e in &mut out {
        let d = e.polynomial.derivative(e.k);
        // linear k-th derivative: its minimum modulus sits at an endpoint
        e.eta = d.eval(-1.0).abs().min(d.eval(1.0).abs()) * (1.0 - 1e-12);
    }
    out
}

pub fn write_corpus(entries: &[CorpusEntry]) -> String {
    let mut s = String::from("id,k,eta,eps,c0,c1,c2,c3,c4\n");
    for e in entries {
        s.push_str(&format!("{},{},{:.17e},{:.17e}", e.id, e.k, e.eta, e.eps));
        for i in 0..5 {
            let c = e.polynomial.coefficients.get(i).copied().unwrap_or(0.0);
            s.push_str(&format!(",{c:.17e}"));
        }
        s.push('\n');
    }
    s
}

pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>, GeometryError> {
    let bad = |line: usize, what: &str| GeometryError::InvalidArgument(format!("corpus line {line}: {what}"));
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 5 {
            return Err(bad(n + 1, "too few fields"));
        }
        let id = fields[0].parse().map_err(|_| bad(n + 1, "id"))?;
        let k = fields[1].parse().map_err(|_| bad(n + 1, "k"))?;
        let eta = fields[2].parse().map_err(|_| bad(n + 1, "eta"))?;
        let eps = fields[3].parse().map_err(|_| bad(n + 1, "eps"))?;
        let coefficients = fields[4..]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| bad(n + 1, "coefficient")))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(CorpusEntry {
            id,
            k,
            eta,
            eps,
            polynomial: Polynomial::new(coefficients),
        });
    }
    Ok(out)
}
