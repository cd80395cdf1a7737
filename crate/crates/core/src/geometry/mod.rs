//! Fermi-curve tracing and length-of-overlap measurements.

mod interval;

pub use interval::{
    generate_corpus, interval_lemma_check, parse_corpus, write_corpus, CorpusEntry, IntervalCheck, Polynomial,
    BUNDLED_CORPUS, CORPUS_SEED,
};

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{find_singular_points, DispersionError, DispersionModel, Domain, SingularPoint, Vec2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("Newton projection onto the Fermi curve failed near {0:?}")]
    TraceStalled(Vec2),
    #[error("curve step {step:e} is coarser than the smallest threshold scale {scale:e}")]
    InsufficientResolution { step: f64, scale: f64 },
    #[error("hypothesis violated: |f^(k)| = {found:e} < eta = {eta:e} at x = {x}")]
    HypothesisViolated { x: f64, found: f64, eta: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
}

/// Polyline approximation of one branch of `{e = 0}`.
///
/// On the torus the points are not wrapped, so the polyline is continuous;
/// reduce with [`Domain::wrap`] when a canonical representative is needed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub points: Vec<Vec2>,
    pub cumulative_arclength: Vec<f64>,
    pub branch_id: usize,
    pub closed: bool,
    pub step: f64,
}

impl CurveSample {
    fn new(points: Vec<Vec2>, branch_id: usize, closed: bool, step: f64) -> Self {
        let mut cum = Vec::with_capacity(points.len());
        let mut s = 0.0;
        cum.push(0.0);
        for w in points.windows(2) {
            s += dist(w[0], w[1]);
            cum.push(s);
        }
        Self {
            points,
            cumulative_arclength: cum,
            branch_id,
            closed,
            step,
        }
    }

    pub fn length(&self) -> f64 {
        *self.cumulative_arclength.last().unwrap_or(&0.0)
    }
}

pub fn total_length(curves: &[CurveSample]) -> f64 {
    curves.iter().map(CurveSample::length).sum()
}

fn dist(a: Vec2, b: Vec2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub step: f64,
    pub exclusion_radius: f64,
    pub trace_tolerance: f64,
    /// Grid resolution of the scan for components without singular points.
    pub scan_grid: usize,
    pub max_points: usize,
}

impl TraceOptions {
    pub fn new(step: f64, exclusion_radius: f64) -> Self {
        Self {
            step,
            exclusion_radius,
            trace_tolerance: 1e-12,
            scan_grid: 256,
            max_points: 20_000_000,
        }
    }
}

enum Stop {
    Singular { index: usize, arrival: usize },
    Boundary,
    Closed,
}

struct Tracer<'a> {
    model: &'a DispersionModel,
    domain: Domain,
    opts: TraceOptions,
    singular: Vec<SingularPoint>,
    directions: Vec<[Vec2; 4]>,
}

impl Tracer<'_> {
    fn project(&self, mut p: Vec2) -> Result<Vec2, GeometryError> {
        for _ in 0..30 {
            let e = self.model.evaluate(p);
            if e.abs() <= self.opts.trace_tolerance {
                return Ok(p);
            }
            let g = self.model.gradient(p);
            let n2 = g[0] * g[0] + g[1] * g[1];
            if n2 == 0.0 || !n2.is_finite() {
                break;
            }
            p = [p[0] - e * g[0] / n2, p[1] - e * g[1] / n2];
        }
        Err(GeometryError::TraceStalled(p))
    }

    fn tangent(&self, p: Vec2, prev: Vec2) -> Vec2 {
        let g = self.model.gradient(p);
        let n = g[0].hypot(g[1]);
        let t = [-g[1] / n, g[0] / n];
        if t[0] * prev[0] + t[1] * prev[1] < 0.0 {
            [-t[0], -t[1]]
        } else {
            t
        }
    }

    // displacement from p to the nearest image of singular point i
    fn to_singular(&self, p: Vec2, i: usize) -> Vec2 {
        self.domain.displacement(p, self.singular[i].location)
    }

    fn outside(&self, p: Vec2) -> bool {
        self.domain == Domain::Square && (p[0].abs() > 1.0 || p[1].abs() > 1.0)
    }

    fn arrival_index(&self, i: usize, dir: Vec2) -> usize {
        let back = [-dir[0], -dir[1]];
        let mut best = 0;
        let mut score = f64::NEG_INFINITY;
        for (j, d) in self.directions[i].iter().enumerate() {
            let s = d[0] * back[0] + d[1] * back[1];
            if s > score {
                score = s;
                best = j;
            }
        }
        best
    }

    fn march(&self, start: Vec2, mut dir: Vec2, closable: bool) -> Result<(Vec<Vec2>, Stop), GeometryError> {
        let h = self.opts.step;
        let excl = self.opts.exclusion_radius;
        let mut pts = vec![start];
        let mut cur = start;
        let mut travelled = 0.0;
        let land = |pts: &mut Vec<Vec2>, p: Vec2| {
            let last = *pts.last().expect("nonempty");
            if pts.len() > 1 && dist(last, p) < 0.25 * h {
                pts.pop();
            }
            pts.push(p);
        };
        loop {
            if pts.len() >= self.opts.max_points {
                return Err(GeometryError::TraceStalled(cur));
            }
            let pred = [cur[0] + h * dir[0], cur[1] + h * dir[1]];

            for i in 0..self.singular.len() {
                let to_c = self.to_singular(cur, i);
                let approaching = to_c[0] * dir[0] + to_c[1] * dir[1] > 0.0;
                if !approaching {
                    continue;
                }
                let dc = dist([0.0, 0.0], to_c);
                if excl > 0.0 {
                    let d_pred = dist(pred, [cur[0] + to_c[0], cur[1] + to_c[1]]);
                    if d_pred < excl {
                        // smallest s > 0 with |cur + s·dir − c| = excl
                        let b = -(to_c[0] * dir[0] + to_c[1] * dir[1]);
                        let cc = dc * dc - excl * excl;
                        let disc = (b * b - cc).max(0.0);
                        let s = (-b - disc.sqrt()).max(0.0);
                        let q = self.project([cur[0] + s * dir[0], cur[1] + s * dir[1]])?;
                        land(&mut pts, q);
                        let arrival = self.arrival_index(i, dir);
                        return Ok((pts, Stop::Singular { index: i, arrival }));
                    }
                } else if dc < 1.5 * h {
                    land(&mut pts, [cur[0] + to_c[0], cur[1] + to_c[1]]);
                    let arrival = self.arrival_index(i, dir);
                    return Ok((pts, Stop::Singular { index: i, arrival }));
                }
            }

            if closable && travelled > 3.0 * h {
                let back = self.domain.displacement(cur, start);
                if dist([0.0, 0.0], back) < 1.5 * h && back[0] * dir[0] + back[1] * dir[1] > 0.0 {
                    land(&mut pts, [cur[0] + back[0], cur[1] + back[1]]);
                    return Ok((pts, Stop::Closed));
                }
            }

            if self.outside(pred) {
                // largest s with cur + s·dir inside the square
                let mut s = h;
                for k in 0..2 {
                    if dir[k] != 0.0 {
                        let lim = (dir[k].signum() - cur[k]) / dir[k];
                        s = s.min(lim.max(0.0));
                    }
                }
                let q = [cur[0] + s * dir[0], cur[1] + s * dir[1]];
                let q = match self.project(q) {
                    Ok(p) if !self.outside(p) => p,
                    _ => q,
                };
                land(&mut pts, q);
                return Ok((pts, Stop::Boundary));
            }

            let next = self.project(pred)?;
            travelled += dist(cur, next);
            dir = self.tangent(next, dir);
            pts.push(next);
            cur = next;
        }
    }
}

struct SpatialHash {
    cell: f64,
    wrap: Option<i64>,
    domain: Domain,
    buckets: HashMap<(i64, i64), Vec<Vec2>>,
}

impl SpatialHash {
    fn new(cell: f64, domain: Domain) -> Self {
        let wrap = match domain {
            Domain::Torus => Some(((2.0 * std::f64::consts::PI) / cell).floor().max(1.0) as i64),
            Domain::Square => None,
        };
        Self {
            cell,
            wrap,
            domain,
            buckets: HashMap::new(),
        }
    }

    fn key(&self, p: Vec2) -> (i64, i64) {
        let p = self.domain.wrap(p);
        let shift = if self.wrap.is_some() { std::f64::consts::PI } else { 1.0 };
        let f = |c: f64| ((c + shift) / self.cell).floor() as i64;
        let (a, b) = (f(p[0]), f(p[1]));
        match self.wrap {
            Some(n) => (a.rem_euclid(n), b.rem_euclid(n)),
            None => (a, b),
        }
    }

    fn insert(&mut self, p: Vec2) {
        let k = self.key(p);
        self.buckets.entry(k).or_default().push(self.domain.wrap(p));
    }

    fn near(&self, p: Vec2, r: f64) -> bool {
        let (a, b) = self.key(p);
        for da in -1..=1 {
            for db in -1..=1 {
                let mut k = (a + da, b + db);
                if let Some(n) = self.wrap {
                    k = (k.0.rem_euclid(n), k.1.rem_euclid(n));
                }
                if let Some(v) = self.buckets.get(&k) {
                    if v.iter().any(|q| {
                        let d = self.domain.displacement(p, *q);
                        d[0].hypot(d[1]) < r
                    }) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// All branches of `{e = 0}` in the model's domain, with discs of radius
/// `exclusion_radius` around singular points removed. Branches through a
/// singular point are split there.
pub fn trace_fermi_curve(
    model: &DispersionModel,
    step: f64,
    exclusion_radius: f64,
) -> Result<Vec<CurveSample>, GeometryError> {
    trace_fermi_curve_with(model, &TraceOptions::new(step, exclusion_radius))
}

pub fn trace_fermi_curve_with(model: &DispersionModel, opts: &TraceOptions) -> Result<Vec<CurveSample>, GeometryError> {
    if !(opts.step > 0.0 && opts.step.is_finite()) {
        return Err(GeometryError::InvalidArgument("step must be positive".into()));
    }
    if !(opts.exclusion_radius >= 0.0) {
        return Err(GeometryError::InvalidArgument("exclusion_radius must be nonnegative".into()));
    }
    let singular = find_singular_points(model, crate::dispersion::DEFAULT_GRADIENT_TOLERANCE)?;
    let directions: Vec<[Vec2; 4]> = singular
        .iter()
        .map(|s| {
            let [a, b] = s.null_directions();
            [a, b, [-a[0], -a[1]], [-b[0], -b[1]]]
        })
        .collect();
    let tracer = Tracer {
        model,
        domain: model.domain(),
        opts: *opts,
        singular,
        directions,
    };
    let h = opts.step;
    let mut curves = Vec::new();
    let mut used: Vec<[bool; 4]> = vec![[false; 4]; tracer.singular.len()];
    let mut hash = SpatialHash::new(2.0 * h, tracer.domain);

    for i in 0..tracer.singular.len() {
        for j in 0..4 {
            if used[i][j] {
                continue;
            }
            used[i][j] = true;
            let c = tracer.singular[i].location;
            let d = tracer.directions[i][j];
            let start = if opts.exclusion_radius > 0.0 {
                let r = opts.exclusion_radius;
                tracer.project([c[0] + r * d[0], c[1] + r * d[1]])?
            } else {
                c
            };
            if tracer.outside(start) {
                continue;
            }
            let (pts, stop) = tracer.march(start, d, false)?;
            if let Stop::Singular { index, arrival } = stop {
                used[index][arrival] = true;
            }
            for p in &pts {
                hash.insert(*p);
            }
            curves.push(CurveSample::new(pts, curves.len(), false, h));
        }
    }

    // Components that avoid every singular point: find sign changes on a grid.
    let n = opts.scan_grid.max(8);
    let (lo, span) = match tracer.domain {
        Domain::Torus => (-std::f64::consts::PI, 2.0 * std::f64::consts::PI),
        Domain::Square => (-1.0, 2.0),
    };
    let node = |i: usize| lo + span * i as f64 / n as f64;
    let near_singular = |p: Vec2| {
        (0..tracer.singular.len()).any(|i| dist([0.0, 0.0], tracer.to_singular(p, i)) < opts.exclusion_radius + 3.0 * h)
    };
    let top = if tracer.domain == Domain::Torus { n } else { n + 1 };
    for row in 0..top {
        for col in 0..n {
            for horizontal in [true, false] {
                let a = if horizontal { [node(col), node(row)] } else { [node(row), node(col)] };
                let b = if horizontal { [node(col + 1), node(row)] } else { [node(row), node(col + 1)] };
                let (ea, eb) = (model.evaluate(a), model.evaluate(b));
                if !(ea * eb < 0.0) {
                    continue;
                }
                let (mut x0, mut x1, mut e0) = (a, b, ea);
                for _ in 0..60 {
                    let m = [0.5 * (x0[0] + x1[0]), 0.5 * (x0[1] + x1[1])];
                    let em = model.evaluate(m);
                    if em * e0 <= 0.0 {
                        x1 = m;
                    } else {
                        x0 = m;
                        e0 = em;
                    }
                }
                let root = tracer.project([0.5 * (x0[0] + x1[0]), 0.5 * (x0[1] + x1[1])])?;
                if hash.near(root, 2.0 * h) || near_singular(root) {
                    continue;
                }
                let g = model.gradient(root);
                let dir0 = [-g[1], g[0]];
                let n0 = dir0[0].hypot(dir0[1]);
                let dir0 = [dir0[0] / n0, dir0[1] / n0];
                let (pts, stop) = tracer.march(root, dir0, true)?;
                let (pts, closed) = match stop {
                    Stop::Closed => (pts, true),
                    _ => {
                        let (mut back, _) = tracer.march(root, [-dir0[0], -dir0[1]], false)?;
                        back.reverse();
                        back.pop();
                        back.extend(pts);
                        (back, false)
                    }
                };
                for p in &pts {
                    hash.insert(*p);
                }
                curves.push(CurveSample::new(pts, curves.len(), closed, h));
            }
        }
    }
    Ok(curves)
}

/// Arc length of `{k ∈ curve : |e(p ± k)| ≤ threshold}`, with `e(p ± k)`
/// interpolated linearly along each polyline segment.
pub fn overlap_length(model: &DispersionModel, curve: &CurveSample, p: Vec2, sign: f64, threshold: f64) -> f64 {
    let vals = shifted_energies(model, curve, p, sign);
    flagged_length(curve, &vals, threshold)
}

fn shifted_energies(model: &DispersionModel, curve: &CurveSample, p: Vec2, sign: f64) -> Vec<f64> {
    curve
        .points
        .iter()
        .map(|k| model.evaluate([p[0] + sign * k[0], p[1] + sign * k[1]]))
        .collect()
}

fn flagged_length(curve: &CurveSample, vals: &[f64], t: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..vals.len().saturating_sub(1) {
        let seg = curve.cumulative_arclength[i + 1] - curve.cumulative_arclength[i];
        total += seg * inside_fraction(vals[i], vals[i + 1], t);
    }
    total
}

// Fraction of s ∈ [0,1] with |g0 + s(g1 − g0)| ≤ t.
fn inside_fraction(g0: f64, g1: f64, t: f64) -> f64 {
    let d = g1 - g0;
    if d == 0.0 {
        return if g0.abs() <= t { 1.0 } else { 0.0 };
    }
    let sa = (-t - g0) / d;
    let sb = (t - g0) / d;
    let (lo, hi) = if sa < sb { (sa, sb) } else { (sb, sa) };
    (hi.min(1.0) - lo.max(0.0)).max(0.0)
}

/// Per-sign results of the overlap experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignReport {
    pub sign: i8,
    /// `lengths[i][m]` for `p_samples[i]` and `j_values[m]`.
    pub lengths: Vec<Vec<f64>>,
    /// Whether `ℓ ≥ (M^j/δ)^{1/n₀}` for some `j`.
    pub violated: Vec<bool>,
    pub violation_fraction: f64,
    /// Pooled slope of `ln ℓ` against `j ln M`, excluding the worst δ² fraction
    /// of momenta. `None` when fewer than two `j` values carry data.
    pub fitted_exponent: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapScalingReport {
    pub m: f64,
    pub delta: f64,
    pub n0: u32,
    pub seed: u64,
    pub p_samples: Vec<Vec2>,
    pub j_values: Vec<i32>,
    /// `(M^j/δ)^{1/n₀}` per `j`.
    pub bounds: Vec<f64>,
    pub plus: SignReport,
    pub minus: SignReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapExperiment {
    pub m: f64,
    pub j_values: Vec<i32>,
    pub num_p: usize,
    pub delta: f64,
    pub n0: u32,
    pub seed: u64,
}

/// Overlap lengths for one momentum and sign over a list of thresholds.
pub fn overlap_lengths_at(
    model: &DispersionModel,
    curves: &[CurveSample],
    p: Vec2,
    sign: f64,
    thresholds: &[f64],
) -> Vec<f64> {
    let mut out = vec![0.0; thresholds.len()];
    for c in curves {
        let vals = shifted_energies(model, c, p, sign);
        for (o, &t) in out.iter_mut().zip(thresholds) {
            *o += flagged_length(c, &vals, t);
        }
    }
    out
}

pub fn overlap_scaling_experiment(
    model: &DispersionModel,
    curves: &[CurveSample],
    exp: &OverlapExperiment,
) -> Result<OverlapScalingReport, GeometryError> {
    if !(exp.m > 1.0) || exp.j_values.is_empty() || exp.j_values.iter().any(|&j| j >= 0) {
        return Err(GeometryError::InvalidArgument("need M > 1 and negative j values".into()));
    }
    if !(exp.delta > 0.0 && exp.delta < 1.0) || exp.num_p == 0 || exp.n0 == 0 {
        return Err(GeometryError::InvalidArgument("need 0 < delta < 1, num_p > 0, n0 > 0".into()));
    }
    let jmin = *exp.j_values.iter().min().expect("nonempty");
    let scale = exp.m.powi(jmin);
    let step = curves.iter().map(|c| c.step).fold(0.0, f64::max);
    if step > scale {
        return Err(GeometryError::InsufficientResolution { step, scale });
    }
    let thresholds: Vec<f64> = exp.j_values.iter().map(|&j| exp.m.powi(j)).collect();
    let bounds: Vec<f64> = thresholds.iter().map(|t| (t / exp.delta).powf(1.0 / exp.n0 as f64)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(exp.seed);
    let (lo, hi) = match model.domain() {
        Domain::Torus => (-std::f64::consts::PI, std::f64::consts::PI),
        Domain::Square => (-1.0, 1.0),
    };
    let p_samples: Vec<Vec2> = (0..exp.num_p)
        .map(|_| [rng.gen_range(lo..hi), rng.gen_range(lo..hi)])
        .collect();

    let per_sign = |sign: f64| -> SignReport {
        let lengths: Vec<Vec<f64>> = p_samples
            .par_iter()
            .map(|&p| overlap_lengths_at(model, curves, p, sign, &thresholds))
            .collect();
        let worst: Vec<f64> = lengths
            .iter()
            .map(|row| row.iter().zip(&bounds).map(|(l, b)| l / b).fold(0.0, f64::max))
            .collect();
        let violated: Vec<bool> = worst.iter().map(|&w| w >= 1.0).collect();
        let violation_fraction = violated.iter().filter(|&&v| v).count() as f64 / violated.len() as f64;

        let drop = ((exp.delta * exp.delta) * lengths.len() as f64).ceil() as usize;
        let mut order: Vec<usize> = (0..lengths.len()).collect();
        order.sort_by(|&a, &b| worst[b].total_cmp(&worst[a]).then(a.cmp(&b)));
        let keep = &order[drop.min(order.len())..];
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &i in keep {
            for (m, &j) in exp.j_values.iter().enumerate() {
                let l = lengths[i][m];
                if l > 0.0 {
                    xs.push(j as f64 * exp.m.ln());
                    ys.push(l.ln());
                }
            }
        }
        let mut distinct = xs.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        let fitted_exponent = (distinct.len() >= 2).then(|| {
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            sxy / sxx
        });
        SignReport {
            sign: sign as i8,
            lengths,
            violated,
            violation_fraction,
            fitted_exponent,
        }
    };

    Ok(OverlapScalingReport {
        m: exp.m,
        delta: exp.delta,
        n0: exp.n0,
        seed: exp.seed,
        plus: per_sign(1.0),
        minus: per_sign(-1.0),
        p_samples,
        j_values: exp.j_values.clone(),
        bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn xy_axes() {
        let m = DispersionModel::xy();
        let curves = trace_fermi_curve(&m, 0.01, 0.05).unwrap();
        assert_eq!(curves.len(), 4);
        let len = total_length(&curves);
        assert!((len - 3.8).abs() < 0.038, "{len}");
        for c in &curves {
            for w in c.points.windows(2) {
                let s = dist(w[0], w[1]);
                assert!((0.25 * 0.01..=4.0 * 0.01).contains(&s), "{s}");
            }
        }
    }

    #[test]
    fn hubbard_half_filling_arcs() {
        let m = DispersionModel::hubbard(0.3, 0.0).unwrap();
        let curves = trace_fermi_curve(&m, 0.01, 0.0).unwrap();
        assert_eq!(curves.len(), 4);
        let again = trace_fermi_curve(&m, 0.01, 0.0).unwrap();
        assert_eq!(curves, again);
        for c in &curves {
            assert!(c.cumulative_arclength.windows(2).all(|w| w[1] > w[0]));
            for p in &c.points {
                assert!(m.evaluate(*p).abs() < 1e-12);
            }
            // every arc joins (±π, 0) to (0, ±π)
            let ends = [c.points[0], *c.points.last().unwrap()];
            for e in ends {
                let w = m.domain().wrap(e);
                let at_saddle = (w[0].abs() - PI).abs() < 1e-9 && w[1].abs() < 1e-9
                    || (w[1].abs() - PI).abs() < 1e-9 && w[0].abs() < 1e-9;
                assert!(at_saddle, "{w:?}");
            }
        }
    }

    #[test]
    fn hubbard_closed_curve_off_half_filling() {
        let m = DispersionModel::hubbard(0.3, -1.0).unwrap();
        let curves = trace_fermi_curve(&m, 0.01, 0.0).unwrap();
        assert_eq!(curves.len(), 1);
        assert!(curves[0].closed);
        let c = &curves[0];
        assert!(dist(c.points[0], *c.points.last().unwrap()) < 1e-12);
    }

    #[test]
    fn overlap_at_zero_is_full_length() {
        let m = DispersionModel::hubbard(0.3, 0.0).unwrap();
        let curves = trace_fermi_curve(&m, 0.01, 0.0).unwrap();
        for c in &curves {
            assert_eq!(overlap_length(&m, c, [0.0, 0.0], 1.0, 1.0), c.length());
        }
    }

    #[test]
    fn xy_flat_branch_nests_with_its_translate() {
        let m = DispersionModel::xy();
        let curves = trace_fermi_curve(&m, 0.01, 0.05).unwrap();
        let flat = curves
            .iter()
            .find(|c| c.points.iter().all(|p| p[1] == 0.0 && p[0] > 0.0))
            .expect("positive x half-axis");
        let l = overlap_length(&m, flat, [0.5, 0.0], 1.0, 1e-3);
        assert_eq!(l, flat.length());
    }

    #[test]
    fn inside_fraction_cases() {
        assert_eq!(inside_fraction(0.0, 0.0, 1.0), 1.0);
        assert_eq!(inside_fraction(2.0, 2.0, 1.0), 0.0);
        assert!((inside_fraction(-1.0, 1.0, 0.5) - 0.5).abs() < 1e-15);
        assert!((inside_fraction(0.0, 4.0, 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn short_j_range_has_no_fit() {
        let m = DispersionModel::hubbard(0.3, 0.0).unwrap();
        let curves = trace_fermi_curve(&m, 0.01, 0.0).unwrap();
        let exp = OverlapExperiment {
            m: 2.0,
            j_values: vec![-4],
            num_p: 20,
            delta: 0.1,
            n0: 4,
            seed: 1,
        };
        let r = overlap_scaling_experiment(&m, &curves, &exp).unwrap();
        assert!(r.plus.fitted_exponent.is_none());
        let too_fine = OverlapExperiment { j_values: vec![-10], ..exp };
        assert!(matches!(
            overlap_scaling_experiment(&m, &curves, &too_fine),
            Err(GeometryError::InsufficientResolution { .. })
        ));
    }
}
