//! One function per subcommand; each produces a table plus fit reports.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use vanhove::bubbles::{bubble_ph, bubble_pp, BubbleResult};
use vanhove::dispersion::{
    find_singular_points, morse_normal_form, DispersionModel, NormalFormOptions, DEFAULT_GRADIENT_TOLERANCE,
};
use vanhove::fitlab::{fit_log_square, LogFit, MIN_SAMPLES};
use vanhove::geometry::{
    interval_lemma_check, overlap_scaling_experiment, parse_corpus, total_length, trace_fermi_curve,
    OverlapExperiment, BUNDLED_CORPUS,
};
use vanhove::matsubara::ThermalState;
use vanhove::selfenergy::{d2_sigma2_xi_eta, d2_sigma2_xi_xi, grad_sigma2_at_vh, im_d0_sigma2, sigma2};

use crate::config::{ModelChoice, RunConfig};
use crate::error::CliError;
use crate::output::{col, Cell, Column, Series, Table};

pub const COMMANDS: [&str; 11] = [
    "sigma2",
    "dsigma-domega",
    "grad-check",
    "d2-xieta",
    "d2-xixi",
    "bubble-ph",
    "bubble-pp",
    "overlap",
    "normal-form",
    "interval-check",
    "fit",
];

/// Gradient components smaller than this many error estimates count as zero.
const GRADIENT_ERROR_FACTOR: f64 = 10.0;

const SELF_ENERGY: [Column; 7] = [
    col("q0", "external Matsubara frequency"),
    col("re", "real part (Σ₂ carries the overall minus sign of the second-order kernel)"),
    col("im", "imaginary part"),
    col("err", "quadrature error estimate"),
    col("evals", "integrand evaluations"),
    col("kind", "derivative taken: none, d_omega, d_xi_eta, d_xi_xi"),
    col("converged", "every integration behind the row met its tolerance"),
];

pub fn columns(command: &str) -> Vec<Column> {
    let mut se = SELF_ENERGY.to_vec();
    match command {
        "sigma2" | "dsigma-domega" => se,
        "grad-check" => vec![
            col("q0", "external Matsubara frequency"),
            col("beta", "inverse temperature"),
            col("component", "xi or eta"),
            col("re", "real part of the gradient component at the singular point"),
            col("im", "imaginary part"),
            col("err", "quadrature error estimate"),
            col("evals", "integrand evaluations"),
            col("vanishes", "|value| <= 10 x err"),
            col("converged", "the integration met its tolerance"),
        ],
        "d2-xieta" => {
            se.extend([
                col("zeta11", "closed-form piece of -Re ∂ξη Σ₂"),
                col("zeta12", "boundary piece of -Re ∂ξη Σ₂"),
                col("zeta12_err", "error estimate of zeta12"),
            ]);
            se
        }
        "d2-xixi" => {
            se.extend([
                col("b0", "closed-form leading piece of the real part"),
                col("re_i2", "quadrature piece of the real part"),
            ]);
            se
        }
        "bubble-ph" | "bubble-pp" => vec![
            col("kind", "ph or pp"),
            col("beta", "inverse temperature"),
            col("value", "bubble at zero momentum and frequency"),
            col("prediction", "large-β asymptote"),
            col("residual", "value − prediction, from the exact tail integral"),
            col("err", "error estimate of value"),
        ],
        "overlap" => vec![
            col("sign", "+1 compares e(k) with e(k+p), -1 with e(k-p)"),
            col("p_x", "momentum shift, first component"),
            col("p_y", "momentum shift, second component"),
            col("j", "scale index; threshold M^j"),
            col("length", "length of the Fermi curve where both energies are below M^j"),
            col("bound", "(M^j/δ)^(1/n0)"),
            col("violated", "length >= bound"),
        ],
        "normal-form" => vec![
            col("k1", "singular point, first component"),
            col("k2", "singular point, second component"),
            col("eig_neg", "negative Hessian eigenvalue"),
            col("eig_pos", "positive Hessian eigenvalue"),
            col("det_a", "determinant of the adapted-coordinate matrix"),
            col("nu1", "vanishing order of the first branch graph, or none"),
            col("nu2", "vanishing order of the second branch graph, or none"),
            col("branch1", "leading Taylor coefficient of the first branch graph"),
            col("branch2", "leading Taylor coefficient of the second branch graph"),
            col("residual", "max factorization residual on the sample lattice"),
        ],
        "interval-check" => vec![
            col("id", "corpus entry"),
            col("k", "derivative order"),
            col("eta", "lower bound on |f^(k)|"),
            col("eps", "sublevel threshold"),
            col("measured", "measure of {|f| <= eps} on [-1, 1]"),
            col("bound", "2^(k+1) (eps/eta)^(1/k)"),
            col("holds", "measured <= bound"),
        ],
        "fit" => vec![
            col("x", "abscissa"),
            col("y", "data"),
            col("fitted", "a ln²x + b ln x + c"),
            col("residual", "y − fitted"),
        ],
        _ => Vec::new(),
    }
}

pub fn help(command: &str) -> String {
    let mut s = String::from("CSV columns:\n");
    for c in columns(command) {
        s.push_str(&format!("  {:<12} {}\n", c.name, c.description));
    }
    s
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub series: Vec<Series>,
}

pub struct Outcome {
    pub table: Table,
    pub fits: Map<String, Value>,
    pub summary: Value,
    pub converged: bool,
    pub max_error_estimate: f64,
    pub seeds: Vec<u64>,
    pub plot: Option<Plot>,
}

impl Outcome {
    fn new(command: &str) -> Self {
        Self {
            table: Table::new(columns(command)),
            fits: Map::new(),
            summary: Value::Null,
            converged: true,
            max_error_estimate: 0.0,
            seeds: Vec::new(),
            plot: None,
        }
    }

    fn track(&mut self, converged: bool, err: f64) {
        self.converged &= converged;
        self.max_error_estimate = self.max_error_estimate.max(err);
    }

    /// Fits `points` when there are enough of them; returns the fitted curve.
    fn fit(&mut self, name: &str, points: &[(f64, f64)]) -> Result<Option<LogFit>, CliError> {
        if points.len() < MIN_SAMPLES {
            return Ok(None);
        }
        let f = fit_log_square(points)?;
        self.fits.insert(name.into(), serde_json::to_value(&f).expect("fit serializes"));
        Ok(Some(f))
    }
}

fn fitted_series(f: &LogFit, xs: &[f64]) -> Series {
    Series {
        label: format!("fit a={:.4}, b={:.4}", f.a, f.b),
        points: xs.iter().map(|&x| (x, f.predict(x))).collect(),
        markers: false,
    }
}

fn markers(label: &str, points: Vec<(f64, f64)>) -> Series {
    Series { label: label.into(), points, markers: true }
}

fn zero_temperature_only(cfg: &RunConfig, command: &str) -> Result<(), CliError> {
    match cfg.beta {
        Some(_) => Err(CliError::Config(format!("{command} is evaluated at zero temperature; drop beta"))),
        None => Ok(()),
    }
}

fn model(cfg: &RunConfig) -> Result<DispersionModel, CliError> {
    Ok(match cfg.model {
        ModelChoice::Hubbard => DispersionModel::hubbard(cfg.theta, cfg.mu)?,
        ModelChoice::Xy => DispersionModel::xy(),
    })
}

fn se_row(q0: f64, re: f64, im: f64, err: f64, evals: u64, kind: &str, converged: bool) -> Vec<Cell> {
    vec![
        Cell::F(q0),
        Cell::F(re),
        Cell::F(im),
        Cell::F(err),
        Cell::I(evals as i64),
        Cell::S(kind.into()),
        Cell::B(converged),
    ]
}

pub fn run(command: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        "sigma2" => run_sigma2(cfg),
        "dsigma-domega" => run_dsigma_domega(cfg),
        "grad-check" => run_grad_check(cfg),
        "d2-xieta" => run_d2_xieta(cfg),
        "d2-xixi" => run_d2_xixi(cfg),
        "bubble-ph" | "bubble-pp" => run_bubble(command, cfg),
        "overlap" => run_overlap(cfg),
        "normal-form" => run_normal_form(cfg),
        "interval-check" => run_interval_check(cfg),
        "fit" => run_fit(cfg),
        _ => Err(CliError::Config(format!("unknown command {command}"))),
    }
}

fn run_sigma2(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new("sigma2");
    let state = match cfg.beta {
        Some(b) => ThermalState::finite(b)?,
        None => ThermalState::ZeroTemperature,
    };
    let spec = cfg.quad_spec();
    let grid = cfg.q0_grid();
    let points = grid
        .par_iter()
        .map(|&q0| sigma2(q0, cfg.q, state, &spec))
        .collect::<Result<Vec<_>, _>>()?;
    for p in &points {
        out.track(p.converged, p.error_estimate);
        out.table.push(se_row(p.q0, p.value.re, p.value.im, p.error_estimate, p.evaluations, "none", p.converged));
    }
    out.plot = Some(Plot {
        title: "second-order self-energy".into(),
        x_label: "q0".into(),
        series: vec![
            markers("Re Σ₂", points.iter().map(|p| (p.q0, p.value.re)).collect()),
            markers("Im Σ₂", points.iter().map(|p| (p.q0, p.value.im)).collect()),
        ],
    });
    Ok(out)
}

fn run_dsigma_domega(cfg: &RunConfig) -> Result<Outcome, CliError> {
    zero_temperature_only(cfg, "dsigma-domega")?;
    let mut out = Outcome::new("dsigma-domega");
    let spec = cfg.quad_spec();
    let grid = cfg.q0_grid();
    let points = grid.par_iter().map(|&q0| im_d0_sigma2(q0, &spec)).collect::<Result<Vec<_>, _>>()?;
    for p in &points {
        out.track(p.converged, p.error_estimate);
        out.table.push(se_row(p.q0, p.value.re, p.value.im, p.error_estimate, p.evaluations, "d_omega", p.converged));
    }
    let data: Vec<_> = points.iter().map(|p| (p.q0, p.value.re)).collect();
    let mut series = vec![markers("Im ∂q0 Σ₂", data.clone())];
    if let Some(f) = out.fit("im_d_omega", &data)? {
        series.push(fitted_series(&f, &grid));
    }
    out.summary = json!({ "fitted_quantity": "Im ∂q0 Σ₂ (column re)", "minus_four_ln2": -4.0 * LN_2 });
    out.plot = Some(Plot { title: "frequency derivative".into(), x_label: "q0".into(), series });
    Ok(out)
}

fn run_grad_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new("grad-check");
    let spec = cfg.quad_spec();
    let jobs: Vec<(f64, f64)> = cfg
        .betas
        .iter()
        .flat_map(|&b| cfg.q0_grid().into_iter().map(move |q| (b, q)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(b, q0)| grad_sigma2_at_vh(q0, ThermalState::finite(b)?, &spec).map_err(CliError::from))
        .collect::<Result<Vec<_>, _>>()?;
    let mut all_vanish = true;
    for g in &results {
        for (name, c) in ["xi", "eta"].iter().zip(&g.components) {
            out.track(c.converged, c.error_estimate);
            let vanishes = c.value.norm() <= GRADIENT_ERROR_FACTOR * c.error_estimate;
            all_vanish &= vanishes;
            out.table.push(vec![
                Cell::F(g.q0),
                Cell::F(g.beta),
                Cell::S((*name).into()),
                Cell::F(c.value.re),
                Cell::F(c.value.im),
                Cell::F(c.error_estimate),
                Cell::I(c.evaluations as i64),
                Cell::B(vanishes),
                Cell::B(c.converged),
            ]);
        }
    }
    out.summary = json!({ "all_components_vanish": all_vanish, "error_factor": GRADIENT_ERROR_FACTOR });
    Ok(out)
}

fn run_d2_xieta(cfg: &RunConfig) -> Result<Outcome, CliError> {
    zero_temperature_only(cfg, "d2-xieta")?;
    let mut out = Outcome::new("d2-xieta");
    let spec = cfg.quad_spec();
    let grid = cfg.q0_grid();
    let rs = grid.par_iter().map(|&q0| d2_sigma2_xi_eta(q0, &spec)).collect::<Result<Vec<_>, _>>()?;
    for r in &rs {
        let v = r.value;
        let converged = v.converged && r.zeta12.converged;
        out.track(converged, v.error_estimate);
        let mut row = se_row(r.q0, v.value, 0.0, v.error_estimate, v.evaluations, "d_xi_eta", converged);
        row.extend([Cell::F(r.zeta11.value), Cell::F(r.zeta12.value), Cell::F(r.zeta12.error_estimate)]);
        out.table.push(row);
    }
    let data: Vec<_> = rs.iter().map(|r| (r.q0, r.value.value)).collect();
    let mut series = vec![markers("Re ∂ξη Σ₂", data.clone())];
    if let Some(f) = out.fit("re_d_xi_eta", &data)? {
        series.push(fitted_series(&f, &grid));
    }
    out.fit("zeta12", &rs.iter().map(|r| (r.q0, r.zeta12.value)).collect::<Vec<_>>())?;
    out.plot = Some(Plot { title: "mixed second derivative".into(), x_label: "q0".into(), series });
    Ok(out)
}

fn run_d2_xixi(cfg: &RunConfig) -> Result<Outcome, CliError> {
    zero_temperature_only(cfg, "d2-xixi")?;
    let mut out = Outcome::new("d2-xixi");
    let spec = cfg.quad_spec();
    let grid = cfg.q0_grid();
    let rs = grid
        .par_iter()
        .map(|&q0| d2_sigma2_xi_xi(q0, cfg.imaginary, &spec))
        .collect::<Result<Vec<_>, _>>()?;
    for r in &rs {
        let (im, im_err, im_conv) = match &r.im {
            Some(i) => (i.value, i.error_estimate, i.converged),
            None => (f64::NAN, 0.0, true),
        };
        let converged = r.re.converged && r.re_i2.converged && im_conv;
        out.track(converged, r.re.error_estimate.max(im_err));
        let mut row = se_row(r.q0, r.re.value, im, r.re.error_estimate + im_err, r.re.evaluations, "d_xi_xi", converged);
        row.extend([Cell::F(r.b0), Cell::F(r.re_i2.value)]);
        out.table.push(row);
    }
    let data: Vec<_> = rs.iter().map(|r| (r.q0, r.re.value)).collect();
    let mut series = vec![markers("Re ∂²ξ Σ₂", data.clone())];
    if let Some(f) = out.fit("re_d_xi_xi", &data)? {
        series.push(fitted_series(&f, &grid));
    }
    out.summary = json!({ "im_column": if cfg.imaginary { "computed" } else { "NaN: not requested" } });
    out.plot = Some(Plot { title: "pure second derivative".into(), x_label: "q0".into(), series });
    Ok(out)
}

fn run_bubble(command: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(command);
    let pp = command == "bubble-pp";
    let rs: Vec<BubbleResult> = cfg
        .betas
        .par_iter()
        .map(|&b| if pp { bubble_pp(b) } else { bubble_ph(b) })
        .collect::<Result<_, _>>()?;
    for r in &rs {
        out.track(true, r.error_estimate);
        out.table.push(vec![
            Cell::S(if pp { "pp" } else { "ph" }.into()),
            Cell::F(r.beta),
            Cell::F(r.value),
            Cell::F(r.asymptotic_prediction),
            Cell::F(r.residual),
            Cell::F(r.error_estimate),
        ]);
    }
    let max_residual = rs.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
    out.summary = json!({ "max_abs_residual": max_residual });
    out.plot = Some(Plot {
        title: format!("{} bubble", if pp { "particle–particle" } else { "particle–hole" }),
        x_label: "beta".into(),
        series: vec![
            markers("bubble", rs.iter().map(|r| (r.beta, r.value)).collect()),
            Series {
                label: "asymptote".into(),
                points: rs.iter().map(|r| (r.beta, r.asymptotic_prediction)).collect(),
                markers: false,
            },
        ],
    });
    Ok(out)
}

fn run_overlap(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new("overlap");
    let m = model(cfg)?;
    let curves = trace_fermi_curve(&m, cfg.step, cfg.exclusion)?;
    let exp = OverlapExperiment {
        m: cfg.m,
        j_values: (cfg.j_min..=cfg.j_max).collect(),
        num_p: cfg.num_p,
        delta: cfg.delta,
        n0: cfg.n0,
        seed: cfg.seed,
    };
    let r = overlap_scaling_experiment(&m, &curves, &exp)?;
    out.seeds = vec![cfg.seed];
    for s in [&r.plus, &r.minus] {
        for (i, p) in r.p_samples.iter().enumerate() {
            for (k, &j) in r.j_values.iter().enumerate() {
                let l = s.lengths[i][k];
                out.table.push(vec![
                    Cell::I(s.sign as i64),
                    Cell::F(p[0]),
                    Cell::F(p[1]),
                    Cell::I(j as i64),
                    Cell::F(l),
                    Cell::F(r.bounds[k]),
                    Cell::B(l >= r.bounds[k]),
                ]);
            }
        }
    }
    let report = |s: &vanhove::geometry::SignReport| {
        json!({ "violation_fraction": s.violation_fraction, "fitted_exponent": s.fitted_exponent })
    };
    out.summary = json!({
        "branches": curves.len(),
        "curve_length": total_length(&curves),
        "plus": report(&r.plus),
        "minus": report(&r.minus),
        "delta_squared": cfg.delta * cfg.delta,
    });
    Ok(out)
}

fn run_normal_form(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new("normal-form");
    let m = model(cfg)?;
    let opts = NormalFormOptions::default();
    let order = |nu: Option<u32>| nu.map_or(Cell::S("none".into()), |n| Cell::I(n as i64));
    for p in find_singular_points(&m, DEFAULT_GRADIENT_TOLERANCE)? {
        let nf = morse_normal_form(&m, &p, cfg.radius, cfg.grid, &opts)?;
        out.track(nf.residual < opts.factorization_tolerance, nf.residual);
        out.table.push(vec![
            Cell::F(p.location[0]),
            Cell::F(p.location[1]),
            Cell::F(p.hessian_eigenvalues[0]),
            Cell::F(p.hessian_eigenvalues[1]),
            Cell::F(nf.det_a()),
            order(nf.nu1),
            order(nf.nu2),
            Cell::F(nf.branch_leading[0]),
            Cell::F(nf.branch_leading[1]),
            Cell::F(nf.residual),
        ]);
    }
    out.summary = json!({ "singular_points": out.table.rows.len(), "factorization_tolerance": opts.factorization_tolerance });
    Ok(out)
}

fn run_interval_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new("interval-check");
    let text = match &cfg.corpus {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read corpus {}: {e}", path.display())))?,
        None => BUNDLED_CORPUS.to_string(),
    };
    let corpus = parse_corpus(&text)?;
    let checks = corpus
        .par_iter()
        .map(|e| {
            let d = e.polynomial.derivative(e.k);
            let f = |x: f64| e.polynomial.eval(x);
            let df = |x: f64| d.eval(x);
            interval_lemma_check(&f, Some(&df), (-1.0, 1.0), e.k, e.eta, e.eps, cfg.interval_grid)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(format!("corpus entry fails its hypothesis: {e}")))?;
    let mut counterexamples = Vec::new();
    for (e, c) in corpus.iter().zip(&checks) {
        if !c.holds {
            counterexamples.push(e.id);
        }
        out.table.push(vec![
            Cell::I(e.id as i64),
            Cell::I(e.k as i64),
            Cell::F(e.eta),
            Cell::F(e.eps),
            Cell::F(c.measured),
            Cell::F(c.bound),
            Cell::B(c.holds),
        ]);
    }
    out.summary = json!({ "entries": corpus.len(), "counterexamples": counterexamples });
    Ok(out)
}

fn run_fit(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new("fit");
    let path = cfg.input.as_ref().ok_or_else(|| CliError::Config("fit needs an input CSV".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CliError::Config(format!("column {name} not in {}", path.display())))
    };
    let (xi, yi) = (find(&cfg.x_column)?, find(&cfg.y_column)?);
    let mut points = Vec::new();
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        let num = |i: usize| {
            f.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| CliError::Config(format!("line {}: column {i} is not a number", n + 2)))
        };
        points.push((num(xi)?, num(yi)?));
    }
    let f = fit_log_square(&points)?;
    out.fits.insert("fit".into(), serde_json::to_value(&f).expect("fit serializes"));
    for &(x, y) in &points {
        let p = f.predict(x);
        out.table.push(vec![Cell::F(x), Cell::F(y), Cell::F(p), Cell::F(y - p)]);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    out.summary = json!({ "input": path.display().to_string(), "x_column": cfg.x_column, "y_column": cfg.y_column });
    out.plot = Some(Plot {
        title: format!("{} against {}", cfg.y_column, cfg.x_column),
        x_label: cfg.x_column.clone(),
        series: vec![markers("data", points), fitted_series(&f, &xs)],
    });
    Ok(out)
}
