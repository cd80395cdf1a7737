//! Band functions, their saddle points, and the local product normal form
//! `e(p + Ak) = a(k)(k₁ - k₂^{ν₁} b(k))(k₂ - k₁^{ν₂} c(k))` near a saddle.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::{integrate, FnIntegrand, QuadSpec, Region};

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DispersionError {
    #[error("Hubbard model needs 0 < theta < 1, got {0}")]
    InvalidTheta(f64),
    #[error("parameter must be finite: {0}")]
    NonFinite(&'static str),
    #[error("degenerate Hessian at {location:?}: eigenvalues {eigenvalues:?}")]
    DegenerateHessian { location: Vec2, eigenvalues: Vec2 },
    #[error("singular point at {location:?} is an extremum, not a saddle")]
    NotSaddle { location: Vec2 },
    #[error("normal-form factorization failed down to radius {radius:e}: {reason}")]
    FactorizationFailed { radius: f64, reason: String },
    #[error("curve branch shows no nonvanishing Taylor term up to order {max_order}")]
    FlatBranch { max_order: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// The Brillouin zone `[-π, π)²`, periodic.
    Torus,
    /// The square `[-1, 1]²`, not periodic.
    Square,
}

impl Domain {
    pub fn contains(&self, k: Vec2) -> bool {
        match self {
            Domain::Torus => k.iter().all(|c| c.is_finite()),
            Domain::Square => k.iter().all(|c| c.abs() <= 1.0),
        }
    }

    /// Maps a point to its canonical representative.
    pub fn wrap(&self, k: Vec2) -> Vec2 {
        match self {
            Domain::Torus => k.map(|c| (c + PI).rem_euclid(2.0 * PI) - PI),
            Domain::Square => k,
        }
    }

    /// Shortest displacement from `a` to `b`.
    pub fn displacement(&self, a: Vec2, b: Vec2) -> Vec2 {
        let d = [b[0] - a[0], b[1] - a[1]];
        match self {
            Domain::Torus => d.map(|c| (c + PI).rem_euclid(2.0 * PI) - PI),
            Domain::Square => d,
        }
    }
}

/// A user-supplied band function. Derivatives are taken by central
/// differences; singular points are refined from `seeds`.
#[derive(Clone)]
pub struct CustomBand {
    pub name: String,
    pub energy: Arc<dyn Fn(Vec2) -> f64 + Send + Sync>,
    pub domain: Domain,
    pub seeds: Vec<Vec2>,
}

impl fmt::Debug for CustomBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomBand")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("seeds", &self.seeds)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum ModelKind {
    Hubbard { theta: f64, mu: f64 },
    XyModel,
    Custom(CustomBand),
}

#[derive(Clone, Debug)]
pub struct DispersionModel {
    kind: ModelKind,
}

impl DispersionModel {
    /// `e(k) = -cos k₁ - cos k₂ + θ(1 + cos k₁ cos k₂) - μ` on the torus.
    pub fn hubbard(theta: f64, mu: f64) -> Result<Self, DispersionError> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(DispersionError::InvalidTheta(theta));
        }
        if !mu.is_finite() {
            return Err(DispersionError::NonFinite("mu"));
        }
        Ok(Self {
            kind: ModelKind::Hubbard { theta, mu },
        })
    }

    /// `e(x, y) = xy` on `[-1,1]²`.
    pub fn xy() -> Self {
        Self { kind: ModelKind::XyModel }
    }

    pub fn custom(band: CustomBand) -> Self {
        Self {
            kind: ModelKind::Custom(band),
        }
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn domain(&self) -> Domain {
        match &self.kind {
            ModelKind::Hubbard { .. } => Domain::Torus,
            ModelKind::XyModel => Domain::Square,
            ModelKind::Custom(c) => c.domain,
        }
    }

    pub fn evaluate(&self, k: Vec2) -> f64 {
        match &self.kind {
            ModelKind::Hubbard { theta, mu } => {
                let (c1, c2) = (k[0].cos(), k[1].cos());
                -c1 - c2 + theta * (1.0 + c1 * c2) - mu
            }
            ModelKind::XyModel => k[0] * k[1],
            ModelKind::Custom(c) => (c.energy)(k),
        }
    }

    pub fn gradient(&self, k: Vec2) -> Vec2 {
        match &self.kind {
            ModelKind::Hubbard { theta, .. } => {
                let (s1, c1) = k[0].sin_cos();
                let (s2, c2) = k[1].sin_cos();
                [s1 * (1.0 - theta * c2), s2 * (1.0 - theta * c1)]
            }
            ModelKind::XyModel => [k[1], k[0]],
            ModelKind::Custom(c) => {
                let h = 1e-6;
                let e = &c.energy;
                [
                    (e([k[0] + h, k[1]]) - e([k[0] - h, k[1]])) / (2.0 * h),
                    (e([k[0], k[1] + h]) - e([k[0], k[1] - h])) / (2.0 * h),
                ]
            }
        }
    }

    pub fn hessian(&self, k: Vec2) -> Mat2 {
        match &self.kind {
            ModelKind::Hubbard { theta, .. } => {
                let (s1, c1) = k[0].sin_cos();
                let (s2, c2) = k[1].sin_cos();
                let off = theta * s1 * s2;
                [[c1 * (1.0 - theta * c2), off], [off, c2 * (1.0 - theta * c1)]]
            }
            ModelKind::XyModel => [[0.0, 1.0], [1.0, 0.0]],
            ModelKind::Custom(c) => {
                let h = 1e-4;
                let e = &c.energy;
                let f = |a: f64, b: f64| e([k[0] + a, k[1] + b]);
                let e0 = f(0.0, 0.0);
                let h11 = (f(h, 0.0) - 2.0 * e0 + f(-h, 0.0)) / (h * h);
                let h22 = (f(0.0, h) - 2.0 * e0 + f(0.0, -h)) / (h * h);
                let off = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
                [[h11, off], [off, h22]]
            }
        }
    }

    fn seeds(&self) -> Vec<Vec2> {
        match &self.kind {
            ModelKind::Hubbard { .. } => vec![[0.0, 0.0], [PI, PI], [PI, 0.0], [0.0, PI]],
            ModelKind::XyModel => vec![[0.0, 0.0]],
            ModelKind::Custom(c) => c.seeds.clone(),
        }
    }
}

/// A saddle of the band function lying on the Fermi curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularPoint {
    pub location: Vec2,
    /// Ascending: `[negative, positive]`.
    pub hessian_eigenvalues: Vec2,
    /// Columns are the eigenvectors, in the order of `hessian_eigenvalues`.
    pub hessian_rotation: Mat2,
}

impl SingularPoint {
    /// Unit vectors along which the quadratic part of `e` vanishes; the two
    /// branches of the Fermi curve leave the point along `±d₁` and `±d₂`.
    pub fn null_directions(&self) -> [Vec2; 2] {
        let [lm, lp] = self.hessian_eigenvalues;
        let r = self.hessian_rotation;
        let (a, b) = (lp.sqrt(), (-lm).sqrt());
        let n = (a * a + b * b).sqrt();
        let (a, b) = (a / n, b / n);
        let d = |s: f64| [r[0][0] * a + r[0][1] * s * b, r[1][0] * a + r[1][1] * s * b];
        [d(1.0), d(-1.0)]
    }
}

pub const DEFAULT_GRADIENT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_HESSIAN_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_FACTORIZATION_TOLERANCE: f64 = 1e-6;

fn sym_eigen(h: Mat2) -> (Vec2, Mat2) {
    let m = Matrix2::new(h[0][0], h[0][1], h[1][0], h[1][1]);
    let eig = SymmetricEigen::new(m);
    let mut idx = [0usize, 1];
    if eig.eigenvalues[0] > eig.eigenvalues[1] {
        idx = [1, 0];
    }
    let vals = [eig.eigenvalues[idx[0]], eig.eigenvalues[idx[1]]];
    let v = &eig.eigenvectors;
    let rot = [[v[(0, idx[0])], v[(0, idx[1])]], [v[(1, idx[0])], v[(1, idx[1])]]];
    (vals, rot)
}

/// Saddle points on the Fermi curve, found by Newton refinement of
/// `∇e = 0` from the model's analytic seeds.
pub fn find_singular_points(
    model: &DispersionModel,
    gradient_tolerance: f64,
) -> Result<Vec<SingularPoint>, DispersionError> {
    find_singular_points_with(model, gradient_tolerance, DEFAULT_HESSIAN_TOLERANCE)
}

pub fn find_singular_points_with(
    model: &DispersionModel,
    gradient_tolerance: f64,
    hessian_tolerance: f64,
) -> Result<Vec<SingularPoint>, DispersionError> {
    if !(gradient_tolerance > 0.0) {
        return Err(DispersionError::InvalidArgument("gradient_tolerance must be positive".into()));
    }
    let domain = model.domain();
    let mut found: Vec<SingularPoint> = Vec::new();
    for seed in model.seeds() {
        let mut k = seed;
        for _ in 0..50 {
            let g = model.gradient(k);
            if g[0].hypot(g[1]) < 1e-15 {
                break;
            }
            let h = model.hessian(k);
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            if det.abs() < 1e-300 {
                break;
            }
            let dx = (h[1][1] * g[0] - h[0][1] * g[1]) / det;
            let dy = (-h[1][0] * g[0] + h[0][0] * g[1]) / det;
            k = [k[0] - dx, k[1] - dy];
        }
        k = domain.wrap(k);
        let g = model.gradient(k);
        if g[0].hypot(g[1]) >= gradient_tolerance || model.evaluate(k).abs() >= gradient_tolerance {
            continue;
        }
        let (vals, rot) = sym_eigen(model.hessian(k));
        if vals[0].abs() < hessian_tolerance || vals[1].abs() < hessian_tolerance {
            return Err(DispersionError::DegenerateHessian {
                location: k,
                eigenvalues: vals,
            });
        }
        if vals[0] * vals[1] > 0.0 {
            return Err(DispersionError::NotSaddle { location: k });
        }
        let dup = found.iter().any(|p| {
            let d = domain.displacement(p.location, k);
            d[0].hypot(d[1]) < 1e-8
        });
        if !dup {
            found.push(SingularPoint {
                location: k,
                hessian_eigenvalues: vals,
                hessian_rotation: rot,
            });
        }
    }
    Ok(found)
}

/// Sampled product normal form on the square `|k₁|, |k₂| ≤ radius`.
///
/// `b` and `c` are built from the exact branch graphs `k₁ = G₁(k₂)` and
/// `k₂ = G₂(k₁)` of the zero set, so `b = G₁(k₂)/k₂^{ν₁}` depends on `k₂`
/// alone and `c = G₂(k₁)/k₁^{ν₂}` on `k₁` alone. A branch that is a straight
/// line has no order (`None`) and `b ≡ 0` (resp. `c ≡ 0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalForm {
    /// Columns are the null directions at the saddle.
    pub a_matrix: Mat2,
    pub nu1: Option<u32>,
    pub nu2: Option<u32>,
    pub radius: f64,
    pub grid: usize,
    /// `a` on the `grid × grid` lattice, row-major in `k₂` then `k₁`.
    pub a_samples: Vec<f64>,
    /// `b(k₂)` on the `grid` lattice points.
    pub b_samples: Vec<f64>,
    /// `c(k₁)` on the `grid` lattice points.
    pub c_samples: Vec<f64>,
    /// Max over the lattice of `|e(p + Ak) - a(k₁ - k₂^{ν₁}b)(k₂ - k₁^{ν₂}c)|`.
    pub residual: f64,
    /// Leading Taylor coefficients of the branch graphs `G₁`, `G₂`.
    pub branch_leading: [f64; 2],
}

impl NormalForm {
    pub fn lattice(&self, i: usize) -> f64 {
        -self.radius + 2.0 * self.radius * i as f64 / (self.grid - 1) as f64
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let s = (t + self.radius) / (2.0 * self.radius) * (self.grid - 1) as f64;
        let s = s.clamp(0.0, (self.grid - 1) as f64);
        let i = (s.floor() as usize).min(self.grid - 2);
        (i, s - i as f64)
    }

    /// Bilinear interpolation of `a`.
    pub fn a_at(&self, k: Vec2) -> f64 {
        let (i, u) = self.locate(k[0]);
        let (j, v) = self.locate(k[1]);
        let n = self.grid;
        let s = |ii: usize, jj: usize| self.a_samples[jj * n + ii];
        (1.0 - u) * (1.0 - v) * s(i, j) + u * (1.0 - v) * s(i + 1, j) + (1.0 - u) * v * s(i, j + 1) + u * v * s(i + 1, j + 1)
    }

    pub fn b_at(&self, k2: f64) -> f64 {
        let (j, v) = self.locate(k2);
        (1.0 - v) * self.b_samples[j] + v * self.b_samples[j + 1]
    }

    pub fn c_at(&self, k1: f64) -> f64 {
        let (i, u) = self.locate(k1);
        (1.0 - u) * self.c_samples[i] + u * self.c_samples[i + 1]
    }

    pub fn det_a(&self) -> f64 {
        let m = self.a_matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormOptions {
    pub factorization_tolerance: f64,
    /// Highest Taylor order probed when estimating ν.
    pub max_order: usize,
    /// Relative significance threshold for Taylor coefficients.
    pub significance: f64,
    pub max_halvings: usize,
}

impl Default for NormalFormOptions {
    fn default() -> Self {
        Self {
            factorization_tolerance: DEFAULT_FACTORIZATION_TOLERANCE,
            max_order: 8,
            significance: 1e-4,
            max_halvings: 6,
        }
    }
}

// The band function in saddle-adapted coordinates, F(k) = e(p + A k).
struct Local<'a> {
    model: &'a DispersionModel,
    p: Vec2,
    a: Mat2,
}

impl Local<'_> {
    fn point(&self, k: Vec2) -> Vec2 {
        let a = self.a;
        [
            self.p[0] + a[0][0] * k[0] + a[0][1] * k[1],
            self.p[1] + a[1][0] * k[0] + a[1][1] * k[1],
        ]
    }

    fn f(&self, k: Vec2) -> f64 {
        self.model.evaluate(self.point(k))
    }

    fn grad(&self, k: Vec2) -> Vec2 {
        let g = self.model.gradient(self.point(k));
        let a = self.a;
        [a[0][0] * g[0] + a[1][0] * g[1], a[0][1] * g[0] + a[1][1] * g[1]]
    }

    // AᵀHA
    fn hess(&self, k: Vec2) -> Mat2 {
        let h = self.model.hessian(self.point(k));
        let a = self.a;
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for r in 0..2 {
                    for c in 0..2 {
                        s += a[r][i] * h[r][c] * a[c][j];
                    }
                }
                out[i][j] = s;
            }
        }
        out
    }

    /// Solves F = 0 for coordinate `axis` with the other coordinate fixed to `t`.
    fn branch(&self, axis: usize, t: f64) -> Option<f64> {
        if t == 0.0 {
            return Some(0.0);
        }
        let at = |s: f64| if axis == 0 { [s, t] } else { [t, s] };
        let mut s = 0.0;
        for _ in 0..60 {
            let k = at(s);
            let d = self.grad(k)[axis];
            if d == 0.0 || !d.is_finite() {
                return None;
            }
            let step = self.f(k) / d;
            s -= step;
            if step.abs() <= 1e-15 * (s.abs() + t.abs()) {
                break;
            }
        }
        (self.f(at(s)).abs() < 1e-13 && s.abs() < 10.0 * t.abs()).then_some(s)
    }

    // dG/dt for the branch solving along `axis`
    fn branch_slope(&self, axis: usize, t: f64, s: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let k = if axis == 0 { [s, t] } else { [t, s] };
        let g = self.grad(k);
        -g[1 - axis] / g[axis]
    }
}

/// Leading order and coefficient of a sampled branch graph `G(t)` on
/// `[-r, r]`; `Ok(None)` for a straight branch.
fn branch_order(
    g: impl Fn(f64) -> Option<f64>,
    radius: f64,
    opts: &NormalFormOptions,
) -> Result<Option<(u32, f64)>, String> {
    let deg = opts.max_order;
    let m = 4 * (deg + 1);
    let mut ts = Vec::with_capacity(m);
    let mut gs = Vec::with_capacity(m);
    for i in 0..m {
        let t = ((2 * i + 1) as f64 * PI / (2 * m) as f64).cos();
        let v = g(t * radius).ok_or("branch Newton solve failed")?;
        ts.push(t);
        gs.push(v);
    }
    let scale = gs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale <= 1e-13 * radius {
        return Ok(None);
    }
    let x = DMatrix::from_fn(m, deg + 1, |i, j| ts[i].powi(j as i32));
    let y = DVector::from_vec(gs);
    let coef = x
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| format!("branch fit failed: {e}"))?;
    let cmax = coef.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    for order in 2..=deg {
        if coef[order].abs() > opts.significance * cmax {
            return Ok(Some((order as u32, coef[order] / radius.powi(order as i32))));
        }
    }
    Err(format!("flat:{deg}"))
}

/// Numerical normal form of `model` at the saddle `p`, sampled on a
/// `grid × grid` lattice over `[-radius, radius]²`. On failure the radius is
/// halved, up to `opts.max_halvings` times.
pub fn morse_normal_form(
    model: &DispersionModel,
    p: &SingularPoint,
    radius: f64,
    grid: usize,
    opts: &NormalFormOptions,
) -> Result<NormalForm, DispersionError> {
    if !(radius > 0.0 && radius.is_finite()) || grid < 3 {
        return Err(DispersionError::InvalidArgument("need radius > 0 and grid >= 3".into()));
    }
    let mut r = radius;
    let mut last = String::new();
    for _ in 0..=opts.max_halvings {
        match normal_form_at_radius(model, p, r, grid, opts) {
            Ok(nf) if nf.residual <= opts.factorization_tolerance => return Ok(nf),
            Ok(nf) => last = format!("residual {:e}", nf.residual),
            Err(e) if e.starts_with("flat:") => {
                return Err(DispersionError::FlatBranch {
                    max_order: opts.max_order,
                })
            }
            Err(e) => last = e,
        }
        r *= 0.5;
    }
    Err(DispersionError::FactorizationFailed {
        radius: r * 2.0,
        reason: last,
    })
}

fn normal_form_at_radius(
    model: &DispersionModel,
    p: &SingularPoint,
    r: f64,
    grid: usize,
    opts: &NormalFormOptions,
) -> Result<NormalForm, String> {
    let [d1, d2] = p.null_directions();
    let a = [[d1[0], d2[0]], [d1[1], d2[1]]];
    let local = Local {
        model,
        p: p.location,
        a,
    };
    // branch 1: k1 = G1(k2); branch 2: k2 = G2(k1)
    let g1 = |t: f64| local.branch(0, t);
    let g2 = |t: f64| local.branch(1, t);
    let o1 = branch_order(g1, r, opts)?;
    let o2 = branch_order(g2, r, opts)?;

    let lattice: Vec<f64> = (0..grid)
        .map(|i| -r + 2.0 * r * i as f64 / (grid - 1) as f64)
        .collect();
    let branch_values = |axis: usize| -> Result<Vec<f64>, String> {
        lattice
            .iter()
            .map(|&t| local.branch(axis, t).ok_or_else(|| format!("branch solve failed at {t}")))
            .collect()
    };
    let g1v = branch_values(0)?;
    let g2v = branch_values(1)?;
    let ratio = |order: Option<(u32, f64)>, vals: &[f64]| -> Vec<f64> {
        match order {
            None => vec![0.0; vals.len()],
            Some((nu, lead)) => lattice
                .iter()
                .zip(vals)
                .map(|(&t, &v)| if t == 0.0 { lead } else { v / t.powi(nu as i32) })
                .collect(),
        }
    };
    let b_samples = ratio(o1, &g1v);
    let c_samples = ratio(o2, &g2v);

    // a(k) = ∫∫ [F₁₂(ξ, κ) + F₁₁(ξ, κ)(1-t) G₁'(κ)] dt ds with
    // κ = G₂(k₁) + s(k₂ - G₂(k₁)), ξ = G₁(κ) + t(k₁ - G₁(κ)).
    let spec = QuadSpec::new(1e-14, 1e-12, 50_000);
    let mut a_samples = Vec::with_capacity(grid * grid);
    let mut residual: f64 = 0.0;
    for (j, &k2) in lattice.iter().enumerate() {
        for (i, &k1) in lattice.iter().enumerate() {
            let g2k1 = g2v[i];
            let fails = std::sync::atomic::AtomicBool::new(false);
            let integrand = FnIntegrand(|x: &[f64]| {
                let kappa = g2k1 + x[0] * (k2 - g2k1);
                let Some(g1k) = local.branch(0, kappa) else {
                    fails.store(true, std::sync::atomic::Ordering::Relaxed);
                    return 0.0;
                };
                let xi = g1k + x[1] * (k1 - g1k);
                let h = local.hess([xi, kappa]);
                h[0][1] + h[0][0] * (1.0 - x[1]) * local.branch_slope(0, kappa, g1k)
            });
            let res = integrate(&integrand, &Region::unit(2), &spec).map_err(|e| e.to_string())?;
            if fails.load(std::sync::atomic::Ordering::Relaxed) {
                return Err("branch solve failed inside the disc".into());
            }
            let av = res.value;
            let prod = av * (k1 - g1v[j]) * (k2 - g2v[i]);
            residual = residual.max((local.f([k1, k2]) - prod).abs());
            a_samples.push(av);
        }
    }
    let amin = a_samples.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let amax = a_samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(amin > 0.0) || amax / amin > 1e3 || a_samples.iter().any(|v| v.signum() != a_samples[0].signum()) {
        return Err(format!("a not bounded away from zero (min {amin:e}, max {amax:e})"));
    }
    Ok(NormalForm {
        a_matrix: a,
        nu1: o1.map(|o| o.0),
        nu2: o2.map(|o| o.0),
        radius: r,
        grid,
        a_samples,
        b_samples,
        c_samples,
        residual,
        branch_leading: [o1.map_or(0.0, |o| o.1), o2.map_or(0.0, |o| o.1)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn evaluate_examples() {
        let h = DispersionModel::hubbard(0.3, 0.0).unwrap();
        assert!(h.evaluate([PI, 0.0]).abs() < 1e-15);
        assert!((h.evaluate([0.0, 0.0]) + 1.4).abs() < 1e-15);
        assert_eq!(DispersionModel::xy().evaluate([0.5, -0.2]), 0.5 * -0.2);
        assert!(DispersionModel::hubbard(1.0, 0.0).is_err());
        assert!(DispersionModel::hubbard(0.0, 0.0).is_err());
    }

    #[test]
    fn gradient_and_hessian_match_differences() {
        let models = [DispersionModel::hubbard(0.3, 0.1).unwrap(), DispersionModel::hubbard(0.8, -0.4).unwrap(), DispersionModel::xy()];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for m in &models {
            for _ in 0..100 {
                let k = [rng.gen_range(-1.0..1.0) * 3.0, rng.gen_range(-1.0..1.0) * 3.0];
                let k = if m.domain() == Domain::Square { k.map(|c| c / 3.0) } else { k };
                let h = 1e-5;
                let g = m.gradient(k);
                let fd = [
                    (m.evaluate([k[0] + h, k[1]]) - m.evaluate([k[0] - h, k[1]])) / (2.0 * h),
                    (m.evaluate([k[0], k[1] + h]) - m.evaluate([k[0], k[1] - h])) / (2.0 * h),
                ];
                let norm = g[0].hypot(g[1]).max(1e-3);
                assert!((g[0] - fd[0]).hypot(g[1] - fd[1]) / norm < 1e-6);
                let hs = m.hessian(k);
                assert_eq!(hs[0][1], hs[1][0]);
                let g1 = m.gradient([k[0] + h, k[1]]);
                let g0 = m.gradient([k[0] - h, k[1]]);
                assert!(((g1[0] - g0[0]) / (2.0 * h) - hs[0][0]).abs() < 1e-6);
                assert!(((g1[1] - g0[1]) / (2.0 * h) - hs[1][0]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn hubbard_is_even_and_exchange_symmetric() {
        let m = DispersionModel::hubbard(0.45, 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..1000 {
            let k = [rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)];
            assert_eq!(m.evaluate(k), m.evaluate([k[1], k[0]]));
            assert_eq!(m.evaluate(k), m.evaluate([-k[0], -k[1]]));
        }
    }

    #[test]
    fn hubbard_saddles() {
        let m = DispersionModel::hubbard(0.3, 0.0).unwrap();
        let pts = find_singular_points(&m, DEFAULT_GRADIENT_TOLERANCE).unwrap();
        assert_eq!(pts.len(), 2);
        for p in &pts {
            let on_axis = (p.location[0].abs() - PI).abs() < 1e-12 && p.location[1].abs() < 1e-12
                || (p.location[1].abs() - PI).abs() < 1e-12 && p.location[0].abs() < 1e-12;
            assert!(on_axis, "{:?}", p.location);
            assert!((p.hessian_eigenvalues[0] + 0.7).abs() < 1e-12);
            assert!((p.hessian_eigenvalues[1] - 1.3).abs() < 1e-12);
            for d in p.null_directions() {
                let h = m.hessian(p.location);
                let q = d[0] * (h[0][0] * d[0] + h[0][1] * d[1]) + d[1] * (h[1][0] * d[0] + h[1][1] * d[1]);
                assert!(q.abs() < 1e-14);
            }
        }
        let off = DispersionModel::hubbard(0.3, 0.5).unwrap();
        assert!(find_singular_points(&off, DEFAULT_GRADIENT_TOLERANCE).unwrap().is_empty());
    }

    #[test]
    fn xy_saddle() {
        let pts = find_singular_points(&DispersionModel::xy(), DEFAULT_GRADIENT_TOLERANCE).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].location, [0.0, 0.0]);
        assert!((pts[0].hessian_eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((pts[0].hessian_eigenvalues[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn extremum_on_the_fermi_curve_is_rejected() {
        // e(0,0) = -2 + 2θ - μ vanishes for μ = 2θ - 2: a band-bottom point
        let m = DispersionModel::hubbard(0.5, -1.0).unwrap();
        assert!(matches!(
            find_singular_points(&m, DEFAULT_GRADIENT_TOLERANCE),
            Err(DispersionError::NotSaddle { .. })
        ));
    }

    #[test]
    fn xy_normal_form_is_exact_product() {
        let m = DispersionModel::xy();
        let p = &find_singular_points(&m, DEFAULT_GRADIENT_TOLERANCE).unwrap()[0];
        let nf = morse_normal_form(&m, p, 0.5, 11, &NormalFormOptions::default()).unwrap();
        assert_eq!(nf.nu1, None);
        assert_eq!(nf.nu2, None);
        assert!(nf.residual < 1e-14);
        assert!(nf.b_samples.iter().all(|&b| b == 0.0));
        assert!(nf.det_a().abs() > 0.1);
        let a0 = nf.a_samples[0];
        assert!(nf.a_samples.iter().all(|&a| (a - a0).abs() < 1e-14));
    }

    #[test]
    fn hubbard_normal_form_has_cubic_branches() {
        let m = DispersionModel::hubbard(0.3, 0.0).unwrap();
        for p in find_singular_points(&m, DEFAULT_GRADIENT_TOLERANCE).unwrap() {
            let nf = morse_normal_form(&m, &p, 0.1, 21, &NormalFormOptions::default()).unwrap();
            assert_eq!(nf.nu1, Some(3));
            assert_eq!(nf.nu2, Some(3));
            assert!(nf.residual < 1e-10, "{}", nf.residual);
            assert!(nf.det_a().abs() > 0.1);
        }
    }
}
