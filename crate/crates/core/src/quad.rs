//! Adaptive cubature on axis-aligned boxes in one to four dimensions, plus a
//! plain Monte-Carlo estimator used for cross-checks.
//!
//! Every cell is integrated with a tensor product of a Gauss–Kronrod pair.
//! The Kronrod tensor rule gives the cell value, the Gauss tensor rule (whose
//! nodes are a subset of the Kronrod nodes) gives the embedded comparison, and
//! the cell error estimate is their difference. Rule choice per dimension:
//!
//! | d | 1-D pair | points per cell | Kronrod degree |
//! |---|----------|-----------------|----------------|
//! | 1 | G7 / K15 | 15              | 23             |
//! | 2 | G3 / K7  | 49              | 11             |
//! | 3 | G2 / K5  | 125             | 7              |
//! | 4 | G2 / K5  | 625             | 7              |
//!
//! Cells are bisected along the axis whose "Gauss on this axis, Kronrod on
//! the others" rule differs most from the full Kronrod rule.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("integrand returned a non-finite value at {point:?}")]
    NonFiniteSample { point: Vec<f64> },
    #[error("unsupported dimension {0} (expected 1..=4)")]
    UnsupportedDimension(usize),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
}

/// Scalar types the integrators can accumulate.
pub trait QuadValue:
    Copy
    + Send
    + Sync
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
    + 'static
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
    fn all_finite(self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn all_finite(self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn all_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// An integrand on a box. `energy` optionally reports the value of the
/// near-singular coordinate ε at a point, used by singularity-guided
/// refinement.
pub trait Integrand: Sync {
    type Output: QuadValue;
    fn eval(&self, x: &[f64]) -> Self::Output;
    fn energy(&self, _x: &[f64]) -> Option<f64> {
        None
    }
}

/// Wraps a closure as an [`Integrand`] without energy information.
pub struct FnIntegrand<F>(pub F);

impl<T: QuadValue, F: Fn(&[f64]) -> T + Sync> Integrand for FnIntegrand<F> {
    type Output = T;
    fn eval(&self, x: &[f64]) -> T {
        (self.0)(x)
    }
}

/// A closure integrand paired with the energy ε(x) whose zero set the
/// integrand concentrates on.
pub struct Guided<F, E> {
    pub f: F,
    pub energy: E,
}

impl<T, F, E> Integrand for Guided<F, E>
where
    T: QuadValue,
    F: Fn(&[f64]) -> T + Sync,
    E: Fn(&[f64]) -> f64 + Sync,
{
    type Output = T;
    fn eval(&self, x: &[f64]) -> T {
        (self.f)(x)
    }
    fn energy(&self, x: &[f64]) -> Option<f64> {
        Some((self.energy)(x))
    }
}

/// Axis-aligned box `[lower_i, upper_i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Region {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, QuadError> {
        if lower.len() != upper.len() {
            return Err(QuadError::InvalidRegion("bound lengths differ".into()));
        }
        if lower.is_empty() || lower.len() > 4 {
            return Err(QuadError::UnsupportedDimension(lower.len()));
        }
        for (a, b) in lower.iter().zip(&upper) {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(QuadError::InvalidRegion(format!("bad interval [{a}, {b}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[0,1]^d`.
    pub fn unit(d: usize) -> Self {
        Self::new(vec![0.0; d], vec![1.0; d]).expect("unit box")
    }

    /// `[-1,1]^d`.
    pub fn symmetric(d: usize) -> Self {
        Self::new(vec![-1.0; d], vec![1.0; d]).expect("symmetric box")
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(a, b)| b - a).product()
    }

    /// Splits at `point` along `axis`; `point` must be strictly inside.
    pub fn split_at(&self, axis: usize, point: f64) -> Option<(Region, Region)> {
        let (a, b) = (self.lower[axis], self.upper[axis]);
        if !(point > a && point < b) {
            return None;
        }
        let mut left = self.clone();
        let mut right = self.clone();
        left.upper[axis] = point;
        right.lower[axis] = point;
        Some((left, right))
    }

    fn bisect(&self, axis: usize) -> Option<(Region, Region)> {
        let mid = 0.5 * (self.lower[axis] + self.upper[axis]);
        self.split_at(axis, mid)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Refinement {
    Uniform,
    /// Cells whose smallest sampled |ε| is below about `q0` are refined first.
    SingularityGuided { q0: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evaluations: u64,
    pub refinement: Refinement,
}

impl QuadSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_evaluations: u64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            max_evaluations,
            refinement: Refinement::Uniform,
        }
    }

    pub fn guided(mut self, q0: f64) -> Self {
        self.refinement = Refinement::SingularityGuided { q0: q0.abs() };
        self
    }

    pub fn validate(&self) -> Result<(), QuadError> {
        let ok_abs = self.abs_tol.is_finite() && self.abs_tol >= 0.0;
        let ok_rel = self.rel_tol.is_finite() && self.rel_tol >= 0.0;
        if !(ok_abs && ok_rel) || (self.abs_tol <= 0.0 && self.rel_tol <= 0.0) {
            return Err(QuadError::InvalidSpec(
                "need abs_tol > 0 or rel_tol > 0 (both finite, nonnegative)".into(),
            ));
        }
        if self.max_evaluations == 0 {
            return Err(QuadError::InvalidSpec("max_evaluations must be positive".into()));
        }
        if let Refinement::SingularityGuided { q0 } = self.refinement {
            if !(q0.is_finite() && q0 > 0.0) {
                return Err(QuadError::InvalidSpec("guided refinement needs q0 > 0".into()));
            }
        }
        Ok(())
    }
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self::new(1e-10, 1e-8, 5_000_000)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadResult<T> {
    pub value: T,
    pub error_estimate: f64,
    pub evaluations: u64,
    pub converged: bool,
}

impl<T: QuadValue> QuadResult<T> {
    /// Combines independent results: values add, error estimates add.
    pub fn combine(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }

    pub fn scale(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            error_estimate: self.error_estimate * factor.abs(),
            ..self
        }
    }

    pub fn map<U: QuadValue>(self, f: impl FnOnce(T) -> U) -> QuadResult<U> {
        QuadResult {
            value: f(self.value),
            error_estimate: self.error_estimate,
            evaluations: self.evaluations,
            converged: self.converged,
        }
    }
}

struct Rule1d {
    nodes: &'static [f64],
    kronrod: &'static [f64],
    // Gauss weights on the same node list, zero off the Gauss nodes.
    gauss: &'static [f64],
    degree: usize,
}

const K15_NODES: [f64; 15] = [
    -0.991_455_371_120_812_6,
    -0.949_107_912_342_758_5,
    -0.864_864_423_359_769_1,
    -0.741_531_185_599_394_4,
    -0.586_087_235_467_691_1,
    -0.405_845_151_377_397_2,
    -0.207_784_955_007_898_5,
    0.0,
    0.207_784_955_007_898_5,
    0.405_845_151_377_397_2,
    0.586_087_235_467_691_1,
    0.741_531_185_599_394_4,
    0.864_864_423_359_769_1,
    0.949_107_912_342_758_5,
    0.991_455_371_120_812_6,
];
const K15_WEIGHTS: [f64; 15] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
    0.204_432_940_075_298_9,
    0.190_350_578_064_785_4,
    0.169_004_726_639_267_9,
    0.140_653_259_715_525_9,
    0.104_790_010_322_250_2,
    0.063_092_092_629_978_55,
    0.022_935_322_010_529_22,
];
const G7_WEIGHTS: [f64; 15] = [
    0.0,
    0.129_484_966_168_869_7,
    0.0,
    0.279_705_391_489_276_7,
    0.0,
    0.381_830_050_505_118_9,
    0.0,
    0.417_959_183_673_469_4,
    0.0,
    0.381_830_050_505_118_9,
    0.0,
    0.279_705_391_489_276_7,
    0.0,
    0.129_484_966_168_869_7,
    0.0,
];

const K7_NODES: [f64; 7] = [
    -0.960_491_268_708_020_3,
    -0.774_596_669_241_483_4,
    -0.434_243_749_346_802_56,
    0.0,
    0.434_243_749_346_802_56,
    0.774_596_669_241_483_4,
    0.960_491_268_708_020_3,
];
const K7_WEIGHTS: [f64; 7] = [
    0.104_656_226_026_467_27,
    0.268_488_089_868_333_44,
    0.401_397_414_775_962_2,
    0.450_916_538_658_474_14,
    0.401_397_414_775_962_2,
    0.268_488_089_868_333_44,
    0.104_656_226_026_467_27,
];
const G3_WEIGHTS: [f64; 7] = [
    0.0,
    0.555_555_555_555_555_6,
    0.0,
    0.888_888_888_888_888_9,
    0.0,
    0.555_555_555_555_555_6,
    0.0,
];

const K5_NODES: [f64; 5] = [
    -0.925_820_099_772_551_5,
    -0.577_350_269_189_625_8,
    0.0,
    0.577_350_269_189_625_8,
    0.925_820_099_772_551_5,
];
const K5_WEIGHTS: [f64; 5] = [98.0 / 495.0, 243.0 / 495.0, 308.0 / 495.0, 243.0 / 495.0, 98.0 / 495.0];
const G2_WEIGHTS: [f64; 5] = [0.0, 1.0, 0.0, 1.0, 0.0];

static RULE_K15: Rule1d = Rule1d {
    nodes: &K15_NODES,
    kronrod: &K15_WEIGHTS,
    gauss: &G7_WEIGHTS,
    degree: 23,
};
static RULE_K7: Rule1d = Rule1d {
    nodes: &K7_NODES,
    kronrod: &K7_WEIGHTS,
    gauss: &G3_WEIGHTS,
    degree: 11,
};
static RULE_K5: Rule1d = Rule1d {
    nodes: &K5_NODES,
    kronrod: &K5_WEIGHTS,
    gauss: &G2_WEIGHTS,
    degree: 7,
};

fn rule_for(d: usize) -> &'static Rule1d {
    match d {
        1 => &RULE_K15,
        2 => &RULE_K7,
        _ => &RULE_K5,
    }
}

/// Polynomial degree (per coordinate) integrated exactly by the cell rule in
/// dimension `d`.
pub fn rule_degree(d: usize) -> usize {
    rule_for(d).degree
}

/// Number of integrand evaluations per cell in dimension `d`.
pub fn points_per_cell(d: usize) -> u64 {
    (rule_for(d).nodes.len() as u64).pow(d as u32)
}

struct CellEstimate<T> {
    value: T,
    error: f64,
    split_axis: usize,
    min_energy: f64,
}

fn estimate_cell<I: Integrand>(
    f: &I,
    region: &Region,
    guided: bool,
) -> Result<CellEstimate<I::Output>, QuadError> {
    let d = region.dim();
    let rule = rule_for(d);
    let n = rule.nodes.len();
    let total = n.pow(d as u32);

    let mut centre = [0.0; 4];
    let mut half = [0.0; 4];
    for i in 0..d {
        centre[i] = 0.5 * (region.lower[i] + region.upper[i]);
        half[i] = 0.5 * (region.upper[i] - region.lower[i]);
    }
    let jacobian: f64 = half[..d].iter().product();

    let zero = I::Output::zero();
    let mut q_kronrod = zero;
    let mut q_gauss = zero;
    let mut q_axis = [zero; 4];
    let mut abs_sum = 0.0;
    let mut min_energy = f64::INFINITY;

    let mut idx = [0usize; 4];
    let mut x = [0.0; 4];
    for _ in 0..total {
        let mut wk = 1.0;
        let mut wg = 1.0;
        for i in 0..d {
            x[i] = centre[i] + half[i] * rule.nodes[idx[i]];
            wk *= rule.kronrod[idx[i]];
            wg *= rule.gauss[idx[i]];
        }
        let fx = f.eval(&x[..d]);
        if !fx.all_finite() {
            return Err(QuadError::NonFiniteSample {
                point: x[..d].to_vec(),
            });
        }
        if guided {
            if let Some(e) = f.energy(&x[..d]) {
                min_energy = min_energy.min(e.abs());
            }
        }
        q_kronrod += fx * wk;
        abs_sum += wk * fx.magnitude();
        if wg != 0.0 {
            q_gauss += fx * wg;
        }
        for i in 0..d {
            let g = rule.gauss[idx[i]];
            if g != 0.0 {
                q_axis[i] += fx * (wk / rule.kronrod[idx[i]] * g);
            }
        }
        // odometer increment
        for i in 0..d {
            idx[i] += 1;
            if idx[i] < n {
                break;
            }
            idx[i] = 0;
        }
    }

    let value = q_kronrod * jacobian;
    let raw_error = (q_kronrod - q_gauss).magnitude() * jacobian;
    let roundoff = 50.0 * f64::EPSILON * abs_sum * jacobian;
    let mut split_axis = 0;
    let mut worst = -1.0;
    for (i, qa) in q_axis.iter().enumerate().take(d) {
        // Wider cells win ties so that refinement stays roughly isotropic.
        let score = (q_kronrod - *qa).magnitude() * (1.0 + 1e-12 * half[i]);
        if score > worst {
            worst = score;
            split_axis = i;
        }
    }
    Ok(CellEstimate {
        value,
        error: raw_error.max(roundoff),
        split_axis,
        min_energy,
    })
}

struct Cell<T> {
    id: u64,
    region: Region,
    value: T,
    error: f64,
    split_axis: usize,
    priority: f64,
}

impl<T> PartialEq for Cell<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T> Eq for Cell<T> {}
impl<T> PartialOrd for Cell<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Cell<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn priority(error: f64, min_energy: f64, refinement: Refinement) -> f64 {
    match refinement {
        Refinement::Uniform => error,
        Refinement::SingularityGuided { q0 } => {
            if min_energy.is_finite() {
                error * (1.0 + q0 / (q0 + min_energy))
            } else {
                error
            }
        }
    }
}

/// Globally adaptive integration of `f` over `region`.
///
/// Running out of budget is not an error: the result carries
/// `converged = false`.
pub fn integrate<I: Integrand>(
    f: &I,
    region: &Region,
    spec: &QuadSpec,
) -> Result<QuadResult<I::Output>, QuadError> {
    integrate_partition(f, std::slice::from_ref(region), spec)
}

/// Like [`integrate`], but starts from a caller-supplied partition of the
/// domain into boxes of equal dimension.
pub fn integrate_partition<I: Integrand>(
    f: &I,
    regions: &[Region],
    spec: &QuadSpec,
) -> Result<QuadResult<I::Output>, QuadError> {
    spec.validate()?;
    let d = match regions.first() {
        Some(r) => r.dim(),
        None => return Err(QuadError::InvalidRegion("empty partition".into())),
    };
    if regions.iter().any(|r| r.dim() != d) {
        return Err(QuadError::InvalidRegion("mixed dimensions in partition".into()));
    }
    let guided = matches!(spec.refinement, Refinement::SingularityGuided { .. });
    let cost = points_per_cell(d);

    let mut heap: BinaryHeap<Cell<I::Output>> = BinaryHeap::new();
    let mut frozen: Vec<Cell<I::Output>> = Vec::new();
    let mut next_id = 0u64;
    let mut evaluations = 0u64;
    let mut total_value = I::Output::zero();
    let mut total_error = 0.0;

    let mut make_cell = |region: Region, evaluations: &mut u64| -> Result<Cell<I::Output>, QuadError> {
        let est = estimate_cell(f, &region, guided)?;
        *evaluations += cost;
        let id = next_id;
        next_id += 1;
        Ok(Cell {
            id,
            priority: priority(est.error, est.min_energy, spec.refinement),
            region,
            value: est.value,
            error: est.error,
            split_axis: est.split_axis,
        })
    };

    for r in regions {
        let cell = make_cell(r.clone(), &mut evaluations)?;
        total_value += cell.value;
        total_error += cell.error;
        heap.push(cell);
    }

    let mut since_resum = 0usize;
    let converged = loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total_value.magnitude());
        if total_error <= tol {
            // Re-sum exactly before declaring victory.
            let (v, e) = exact_totals(&heap, &frozen);
            total_value = v;
            total_error = e;
            if total_error <= spec.abs_tol.max(spec.rel_tol * total_value.magnitude()) {
                break true;
            }
        }
        if evaluations + 2 * cost > spec.max_evaluations {
            break false;
        }
        let Some(worst) = heap.pop() else {
            break total_error <= tol;
        };
        let Some((left, right)) = worst.region.bisect(worst.split_axis) else {
            frozen.push(worst);
            continue;
        };
        let a = make_cell(left, &mut evaluations)?;
        let b = make_cell(right, &mut evaluations)?;
        total_value += a.value + b.value - worst.value;
        total_error += a.error + b.error - worst.error;
        heap.push(a);
        heap.push(b);
        since_resum += 1;
        if since_resum >= 4096 {
            let (v, e) = exact_totals(&heap, &frozen);
            total_value = v;
            total_error = e;
            since_resum = 0;
        }
    };

    let (value, error_estimate) = exact_totals(&heap, &frozen);
    Ok(QuadResult {
        value,
        error_estimate,
        evaluations,
        converged,
    })
}

// Sums in cell-creation order so the result does not depend on heap layout.
fn exact_totals<T: QuadValue>(heap: &BinaryHeap<Cell<T>>, frozen: &[Cell<T>]) -> (T, f64) {
    let mut cells: Vec<(u64, T, f64)> = heap
        .iter()
        .chain(frozen.iter())
        .map(|c| (c.id, c.value, c.error))
        .collect();
    cells.sort_unstable_by_key(|c| c.0);
    let mut v = T::zero();
    let mut e = 0.0;
    for (_, cv, ce) in cells {
        v += cv;
        e += ce;
    }
    (v, e)
}

/// Convenience wrapper: adaptive 1-D integral of `f` over `[a, b]`.
/// Reversed limits flip the sign; `a == b` gives zero.
pub fn integrate_1d<T, F>(f: F, a: f64, b: f64, spec: &QuadSpec) -> Result<QuadResult<T>, QuadError>
where
    T: QuadValue,
    F: Fn(f64) -> T + Sync,
{
    if a == b {
        return Ok(QuadResult {
            value: T::zero(),
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let region = Region::new(vec![lo], vec![hi])?;
    let r = integrate(&FnIntegrand(|x: &[f64]| f(x[0])), &region, spec)?;
    Ok(r.scale(sign))
}

/// Adaptive 1-D integral over `[a, b]` with interior breakpoints; the pieces
/// are integrated separately with the budget split evenly.
pub fn integrate_1d_breaks<T, F>(
    f: F,
    points: &[f64],
    spec: &QuadSpec,
) -> Result<QuadResult<T>, QuadError>
where
    T: QuadValue,
    F: Fn(f64) -> T + Sync,
{
    let mut pts: Vec<f64> = points.to_vec();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.len() < 2 {
        return Err(QuadError::InvalidRegion("need at least two points".into()));
    }
    let pieces = pts.len() - 1;
    let sub = QuadSpec {
        abs_tol: spec.abs_tol / pieces as f64,
        max_evaluations: (spec.max_evaluations / pieces as u64).max(points_per_cell(1) * 2),
        ..*spec
    };
    let mut acc: Option<QuadResult<T>> = None;
    for w in pts.windows(2) {
        let r = integrate_1d(&f, w[0], w[1], &sub)?;
        acc = Some(match acc {
            None => r,
            Some(a) => a.combine(r),
        });
    }
    Ok(acc.expect("at least one piece"))
}

/// Plain Monte-Carlo estimate of `∫ f` over `region` with `samples` uniform
/// points from a ChaCha8 stream seeded by `seed`. The error estimate is one
/// standard error; `converged` is always true.
pub fn integrate_mc<T, F>(f: F, region: &Region, samples: u64, seed: u64) -> Result<QuadResult<T>, QuadError>
where
    T: QuadValue,
    F: Fn(&[f64]) -> T,
{
    if samples < 100 {
        return Err(QuadError::InvalidSpec("Monte-Carlo needs at least 100 samples".into()));
    }
    let d = region.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = [0.0; 4];
    let mut mean = T::zero();
    let mut m2 = 0.0;
    for k in 0..samples {
        for i in 0..d {
            let u: f64 = rng.gen();
            x[i] = region.lower[i] + u * (region.upper[i] - region.lower[i]);
        }
        let fx = f(&x[..d]);
        if !fx.all_finite() {
            return Err(QuadError::NonFiniteSample { point: x[..d].to_vec() });
        }
        // Welford update
        let n = (k + 1) as f64;
        let delta = fx - mean;
        mean += delta * (1.0 / n);
        let delta2 = fx - mean;
        m2 += dot_real(delta, delta2);
    }
    let n = samples as f64;
    let variance = (m2 / (n - 1.0)).max(0.0);
    let vol = region.volume();
    Ok(QuadResult {
        value: mean * vol,
        error_estimate: vol * (variance / n).sqrt(),
        evaluations: samples,
        converged: true,
    })
}

// Re(a · conj(b)) for the supported scalar types, via the polarization identity.
fn dot_real<T: QuadValue>(a: T, b: T) -> f64 {
    let s = (a + b).magnitude();
    let d = (a - b).magnitude();
    0.25 * (s * s - d * d)
}
