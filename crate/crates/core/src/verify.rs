//! Monte Carlo experiments that confront simulated paths with the theory:
//! reflection law, marginal law vs kernel, fourth moments, the martingale
//! identity, local-time calibration, pathwise identities, stability under
//! the monotone coupling, and determinism of the construction.
//!
//! Paths are generated in parallel but collected in index order, so every
//! reduction (and therefore every report) is independent of the thread count.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::alpha::{AlphaSpec, AlphaStep};
use crate::error::{Error, Result};
use crate::excursion::{decompose_excursions, ExcursionSet};
use crate::kernel::{
    chapman_kolmogorov_residual, conditional_mean, constant_alpha_cdf, constant_alpha_density,
    density_normalization, kernel_cdf_table, transition_density, KernelQuery,
};
use crate::local_time::{local_time_occupation, local_time_upcrossing};
use crate::path::{make_grid, simulate_bm, SamplePath, TimeGrid};
use crate::report::{ExperimentReport, Rule};
use crate::rng::{Purpose, RngSpec};
use crate::skew::{apply_signs, draw_signs, draw_signs_with, sde_residual, skew_identity_residual, SignAssignment};
use crate::stats::{
    ks_null_quantile, ks_sorted, mean_se, ols_slope, quantile, reflected_cdf, Estimate,
};

/// Inflation applied to the asymptotic KS quantile in marginal tests.
pub const KS_INFLATION: f64 = 1.5;
/// Declared discretization allowance of the marginal KS tests.
pub const KS_ALLOWANCE: f64 = 0.003;
/// Standard deviation of the Kolmogorov limit law, `sd(√N·D_N)`.
const KOLMOGOROV_SD: f64 = 0.260_34;

/// Grid and Monte Carlo settings shared by all experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub paths: usize,
    pub seed: u64,
    /// Local-time window `ε`.
    pub eps: f64,
}

impl SimConfig {
    pub fn new(dt: f64, paths: usize, seed: u64, eps: f64) -> Self {
        Self { dt, paths, seed, eps }
    }

    fn json(&self) -> serde_json::Value {
        json!({"dt": self.dt, "paths": self.paths, "seed": self.seed, "eps": self.eps})
    }

    fn check_paths(&self, min: usize, what: &str) -> Result<()> {
        if self.paths < min {
            return Err(Error::InvalidExperiment(format!("{what} needs at least {min} paths, got {}", self.paths)));
        }
        Ok(())
    }
}

/// `(piece index, value)` of `α` at time `g`.
pub fn alpha_at(spec: &AlphaSpec, g: f64) -> Result<(usize, f64)> {
    match spec {
        AlphaSpec::Step(step) => {
            let i = step.interval_index(g);
            Ok((i, step.values()[i]))
        }
        AlphaSpec::Function { .. } => Ok((0, spec.eval(g)?)),
    }
}

/// One simulated path: the driver, its excursions and the skew process.
#[derive(Debug, Clone)]
pub struct SimulatedPath {
    pub bm: SamplePath,
    pub excursions: ExcursionSet,
    pub signs: SignAssignment,
    pub x: SamplePath,
    /// Random streams of this path; sign uniforms are reused by coupled runs.
    pub rng: RngSpec,
}

/// Path `index` of the experiment keyed by `seed`, on `[0, horizon]`.
pub fn simulate_path(alpha: &AlphaSpec, grid: &TimeGrid, seed: u64, index: u64, x0: f64) -> Result<SimulatedPath> {
    let rng = RngSpec::new(seed).for_path(index);
    let bm = simulate_bm(grid, &rng, x0);
    let excursions = decompose_excursions(&bm);
    let signs = match alpha {
        AlphaSpec::Step(step) => draw_signs(&excursions, step, &rng)?,
        spec => draw_signs_with(&excursions, &rng, |g| alpha_at(spec, g))?,
    };
    let x = apply_signs(&bm, &signs);
    Ok(SimulatedPath {
        bm,
        excursions,
        signs,
        x,
        rng,
    })
}

/// Runs `f` on every path in parallel; results come back in path order.
pub fn map_paths<T: Send>(
    alpha: &AlphaSpec,
    grid: &TimeGrid,
    cfg: &SimConfig,
    x0: f64,
    f: impl Fn(&SimulatedPath) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (0..cfg.paths as u64)
        .into_par_iter()
        .map(|i| f(&simulate_path(alpha, grid, cfg.seed, i, x0)?))
        .collect()
}

fn full_grid(horizon: f64, dt: f64) -> Result<TimeGrid> {
    make_grid(0.0, horizon, dt)
}

fn check_time(t: f64, horizon: f64) -> Result<()> {
    if !(t > 0.0 && t <= horizon * (1.0 + 1e-12)) {
        return Err(Error::InvalidExperiment(format!("time {t} outside (0, {horizon}]")));
    }
    Ok(())
}

fn ks_report(report: &mut ExperimentReport, name: &str, ks: f64, n: usize) {
    report.stat(name, ks, KOLMOGOROV_SD / (n as f64).sqrt());
    report.threshold(
        format!("{name}_bound"),
        name,
        Rule::Below,
        KS_INFLATION * ks_null_quantile(n),
        KS_ALLOWANCE,
    );
}

/// KS distance between `|X_t|` and Brownian motion from `|x0|` reflected at 0
/// (the half-normal law when `x0 = 0`).
pub fn reflection_law_test(alpha: &AlphaStep, t: f64, x0: f64, cfg: &SimConfig) -> Result<ExperimentReport> {
    cfg.check_paths(1000, "reflection law test")?;
    check_time(t, alpha.horizon())?;
    let grid = full_grid(alpha.horizon(), cfg.dt)?;
    let k = grid.nearest_index(t);
    let spec = AlphaSpec::Step(alpha.clone());
    let mut sample = map_paths(&spec, &grid, cfg, x0, |p| Ok(p.x.at(k).abs()))?;
    sample.sort_by(f64::total_cmp);
    let tk = grid.time(k);
    let ks = ks_sorted(&sample, |r| reflected_cdf(r, x0.abs(), tk));
    let mut report = ExperimentReport::new(
        "reflection_law",
        json!({"alpha": alpha.to_string(), "t": t, "x0": x0, "sim": cfg.json()}),
    );
    ks_report(&mut report, "ks", ks, cfg.paths);
    let m = mean_se(&sample);
    report.stat("mean_abs_x", m.value, m.std_error);
    Ok(report)
}

fn interpolate(nodes: &[f64], values: &[f64], y: f64) -> f64 {
    if y <= nodes[0] {
        return 0.0;
    }
    if y >= nodes[nodes.len() - 1] {
        return values[values.len() - 1];
    }
    let i = nodes.partition_point(|&v| v <= y) - 1;
    let w = (y - nodes[i]) / (nodes[i + 1] - nodes[i]);
    values[i] + w * (values[i + 1] - values[i])
}

/// Nodes of the CDF table for `X_t` started at `x0`: `cells` equal cells on
/// `[−c, c]`, `c = |x0| + 8√t`, plus nodes at 0 and `x0`.
fn cdf_nodes(x0: f64, tau: f64, cells: usize) -> Vec<f64> {
    let c = x0.abs() + 8.0 * tau.sqrt();
    let mut nodes: Vec<f64> = (0..=cells).map(|i| -c + 2.0 * c * i as f64 / cells as f64).collect();
    nodes.extend([0.0, x0]);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    nodes
}

/// KS distance between the sample of `X_t` (started at `x0`) and the CDF
/// obtained by integrating the transition kernel. For constant `α` the
/// closed-form CDF is reported alongside.
pub fn marginal_vs_kernel_test(alpha: &AlphaStep, t: f64, x0: f64, cfg: &SimConfig) -> Result<ExperimentReport> {
    cfg.check_paths(10_000, "marginal test")?;
    check_time(t, alpha.horizon())?;
    let grid = full_grid(alpha.horizon(), cfg.dt)?;
    let k = grid.nearest_index(t);
    let tk = grid.time(k);
    let spec = AlphaSpec::Step(alpha.clone());
    let mut sample = map_paths(&spec, &grid, cfg, x0, |p| Ok(p.x.at(k)))?;
    sample.sort_by(f64::total_cmp);

    let q = KernelQuery::new(0.0, tk, x0, 0.0);
    let nodes = cdf_nodes(x0, tk, 800);
    let table = kernel_cdf_table(&q, alpha, &nodes)?;
    let ks = ks_sorted(&sample, |y| interpolate(&nodes, &table, y));

    let mut report = ExperimentReport::new(
        "marginal_vs_kernel",
        json!({"alpha": alpha.to_string(), "t": t, "x0": x0, "sim": cfg.json(), "cdf_cells": nodes.len() - 1}),
    );
    ks_report(&mut report, "ks", ks, cfg.paths);
    report.exact("kernel_mass", table[table.len() - 1]);
    if alpha.pieces() == 1 {
        let a = alpha.values()[0];
        let ks_closed = ks_sorted(&sample, |y| constant_alpha_cdf(tk, x0, y, a).unwrap_or(f64::NAN));
        ks_report(&mut report, "ks_closed_form", ks_closed, cfg.paths);
    }
    Ok(report)
}

fn label(eps: f64) -> String {
    format!("{eps:e}")
}

/// Fourth moments `m₄(ε) = E|X_{t+ε} − X_t|⁴` over `eps_grid`, their ratios
/// to `ε²`, the log-log slope and a fitted constant `C` (geometric mean of the
/// ratios, i.e. the least-squares intercept at slope 2).
pub fn moment_scaling_test(alpha: &AlphaStep, t: f64, eps_grid: &[f64], cfg: &SimConfig) -> Result<ExperimentReport> {
    cfg.check_paths(10_000, "moment scaling test")?;
    let horizon = alpha.horizon();
    if eps_grid.len() < 2 || eps_grid.iter().any(|&e| !(e > 0.0 && t + e <= horizon * (1.0 + 1e-12))) {
        return Err(Error::InvalidExperiment(format!(
            "moment scaling needs ≥ 2 lags in (0, {}]",
            horizon - t
        )));
    }
    let grid = full_grid(horizon, cfg.dt)?;
    let k0 = grid.nearest_index(t);
    let lags: Vec<usize> = eps_grid.iter().map(|&e| grid.nearest_index(t + e) - k0).collect();
    if lags.contains(&0) {
        return Err(Error::InvalidExperiment("lag below the grid step".into()));
    }
    let spec = AlphaSpec::Step(alpha.clone());
    let per_path = map_paths(&spec, &grid, cfg, 0.0, |p| {
        Ok(lags.iter().map(|&l| (p.x.at(k0 + l) - p.x.at(k0)).powi(4)).collect::<Vec<f64>>())
    })?;

    let mut report = ExperimentReport::new(
        "moment_scaling",
        json!({"alpha": alpha.to_string(), "t": t, "eps_grid": eps_grid, "sim": cfg.json()}),
    );
    let mut log_e = Vec::new();
    let mut log_m = Vec::new();
    let mut log_var = Vec::new();
    let mut ratios = Vec::new();
    for (j, &l) in lags.iter().enumerate() {
        let e = l as f64 * grid.dt();
        let column: Vec<f64> = per_path.iter().map(|v| v[j]).collect();
        let m = mean_se(&column);
        let ratio = Estimate {
            value: m.value / (e * e),
            std_error: m.std_error / (e * e),
        };
        report.stat(format!("m4_{}", label(e)), m.value, m.std_error);
        report.stat(format!("ratio_{}", label(e)), ratio.value, ratio.std_error);
        log_e.push(e.ln());
        log_m.push(m.value.ln());
        log_var.push((m.std_error / m.value).powi(2));
        ratios.push(ratio);
    }
    let slope = ols_slope(&log_e, &log_m);
    let mean_x = log_e.iter().sum::<f64>() / log_e.len() as f64;
    let sxx: f64 = log_e.iter().map(|x| (x - mean_x).powi(2)).sum();
    let slope_se = log_e
        .iter()
        .zip(&log_var)
        .map(|(x, v)| ((x - mean_x) / sxx).powi(2) * v)
        .sum::<f64>()
        .sqrt();
    let c_fit = (ratios.iter().map(|r| r.value.ln()).sum::<f64>() / ratios.len() as f64).exp();
    let c_se = c_fit * (ratios.iter().map(|r| (r.std_error / r.value).powi(2)).sum::<f64>()).sqrt() / ratios.len() as f64;
    let worst = ratios.iter().max_by(|a, b| a.value.total_cmp(&b.value)).expect("nonempty");
    report.stat("slope", slope, slope_se);
    report.stat("c_fit", c_fit, c_se);
    report.stat("max_ratio", worst.value, worst.std_error);
    report.stat("max_ratio_over_c_fit", worst.value / c_fit, worst.std_error / c_fit);
    report.threshold("slope_near_two", "slope", Rule::Within { center: 2.0 }, 0.0, 0.1);
    report.threshold("ratio_bounded", "max_ratio_over_c_fit", Rule::Below, 1.0, 0.5);
    Ok(report)
}

/// Conditional-mean and martingale checks on `[s, t]` for paths from 0:
/// (a) ten equal-count bins of `X_s`, each bin's mean of `X_t` against the mean
/// of the conditional-mean formula over its members, within 3 s.e.;
/// (b) `M = X − ∫(2α−1) dL̂` (occupation estimator) has mean increment 0 within
/// 3 s.e. and mean quadratic variation `t − s` within 5%.
pub fn martingale_identity_test(alpha: &AlphaStep, s: f64, t: f64, cfg: &SimConfig) -> Result<ExperimentReport> {
    if !(0.0 <= s && s < t) {
        return Err(Error::InvalidExperiment(format!("need 0 ≤ s < t, got s={s} t={t}")));
    }
    check_time(t, alpha.horizon())?;
    cfg.check_paths(100, "martingale identity test")?;
    let grid = full_grid(alpha.horizon(), cfg.dt)?;
    let ks = grid.nearest_index(s);
    let kt = grid.nearest_index(t);
    let spec = AlphaSpec::Step(alpha.clone());
    let eps = cfg.eps;
    let rows = map_paths(&spec, &grid, cfg, 0.0, |p| {
        let l = local_time_occupation(&p.bm.reflect(), eps)?;
        let lt = l.weighted_integral(|u| 2.0 * alpha.eval(u) - 1.0);
        let m = |k: usize| p.x.at(k) - lt[k];
        let mut qv = 0.0;
        for j in ks..kt {
            qv += (m(j + 1) - m(j)).powi(2);
        }
        let xs = p.x.at(ks);
        let predicted = conditional_mean(grid.time(ks), grid.time(kt), xs, alpha)?;
        Ok((xs, p.x.at(kt), predicted, m(kt) - m(ks), qv))
    })?;

    let mut report = ExperimentReport::new(
        "martingale_identity",
        json!({"alpha": alpha.to_string(), "s": s, "t": t, "x0": 0.0, "bins": 10, "sim": cfg.json()}),
    );
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| rows[a].0.total_cmp(&rows[b].0).then(a.cmp(&b)));
    let bins = 10;
    let mut max_z = 0.0_f64;
    for b in 0..bins {
        let members = &order[b * rows.len() / bins..(b + 1) * rows.len() / bins];
        let gap: Vec<f64> = members.iter().map(|&i| rows[i].1 - rows[i].2).collect();
        let g = mean_se(&gap);
        let z = g.value / g.std_error;
        report.stat(format!("bin{b}_mean_gap"), g.value, g.std_error);
        max_z = max_z.max(z.abs());
    }
    report.stat("max_bin_z", max_z, 0.0);
    report.threshold("conditional_mean", "max_bin_z", Rule::Below, 3.0, 0.0);

    let inc = mean_se(&rows.iter().map(|r| r.3).collect::<Vec<_>>());
    report.stat("mean_increment", inc.value, inc.std_error);
    report.stat("increment_z", (inc.value / inc.std_error).abs(), 0.0);
    report.threshold("martingale_increment", "increment_z", Rule::Below, 3.0, 0.0);
    let qv = mean_se(&rows.iter().map(|r| r.4).collect::<Vec<_>>());
    let elapsed = grid.time(kt) - grid.time(ks);
    report.stat("mean_qv", qv.value, qv.std_error);
    report.threshold("quadratic_variation", "mean_qv", Rule::Within { center: elapsed }, 0.0, 0.05 * elapsed);
    Ok(report)
}

/// One row of the stability experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub n: usize,
    /// `D_n = E sup_t |X^{α_n}_t − X^α_t|²`.
    pub d: f64,
    pub std_error: f64,
    /// Fraction of excursions whose sign differs from the limit's.
    pub flip_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityOutcome {
    pub rows: Vec<StabilityRow>,
    pub report: ExperimentReport,
}

impl StabilityOutcome {
    /// CSV `n,D,std_error,flip_rate`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,D,std_error,flip_rate\n");
        for r in &self.rows {
            out.push_str(&format!("{},{:.16e},{:.16e},{:.16e}\n", r.n, r.d, r.std_error, r.flip_rate));
        }
        out
    }
}

/// Coupled simulation of `X^{α_n}` and `X^α` from the same Brownian paths and
/// the same per-excursion uniforms. `labels[i]` names `alpha_seq[i]`.
pub fn stability_experiment(
    alpha_seq: &[AlphaSpec],
    labels: &[usize],
    alpha_limit: &AlphaSpec,
    cfg: &SimConfig,
) -> Result<StabilityOutcome> {
    if alpha_seq.is_empty() || labels.len() != alpha_seq.len() {
        return Err(Error::InvalidExperiment("need one label per sequence member".into()));
    }
    let horizon = alpha_limit.horizon();
    for a in alpha_seq {
        if (a.horizon() - horizon).abs() > 1e-9 * horizon.max(1.0) {
            return Err(Error::HorizonMismatch(a.horizon(), horizon));
        }
    }
    cfg.check_paths(2, "stability experiment")?;
    let grid = full_grid(horizon, cfg.dt)?;
    // per path: (sup², disagreement fraction) for each member
    let per_path = map_paths(alpha_limit, &grid, cfg, 0.0, |p| {
        alpha_seq
            .iter()
            .map(|spec| {
                let signs = draw_signs_with(&p.excursions, &p.rng, |g| alpha_at(spec, g))?;
                let xn = apply_signs(&p.bm, &signs);
                let sup = xn
                    .values()
                    .iter()
                    .zip(p.x.values())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                Ok((sup * sup, signs.disagreement(&p.signs)))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut rows = Vec::new();
    let mut report = ExperimentReport::new(
        "stability",
        json!({"members": labels, "sim": cfg.json(), "horizon": horizon}),
    );
    let column = |j: usize| per_path.iter().map(|v| v[j].0).collect::<Vec<f64>>();
    for (j, &n) in labels.iter().enumerate() {
        let d = mean_se(&column(j));
        let f = mean_se(&per_path.iter().map(|v| v[j].1).collect::<Vec<f64>>());
        report.stat(format!("D_{n}"), d.value, d.std_error);
        report.stat(format!("flip_rate_{n}"), f.value, f.std_error);
        rows.push(StabilityRow {
            n,
            d: d.value,
            std_error: d.std_error,
            flip_rate: f.value,
        });
    }
    // paired drops D_j − D_{j+1}, in units of their own standard error
    let mut min_drop_z = f64::INFINITY;
    for j in 0..labels.len().saturating_sub(1) {
        let (a, b) = (column(j), column(j + 1));
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let d = mean_se(&diff);
        let z = if d.std_error > 0.0 {
            d.value / d.std_error
        } else if d.value == 0.0 {
            0.0
        } else {
            d.value.signum() * f64::INFINITY
        };
        report.stat(format!("drop_{}_{}", labels[j], labels[j + 1]), d.value, d.std_error);
        min_drop_z = min_drop_z.min(z);
    }
    if labels.len() > 1 {
        report.stat("min_drop_z", min_drop_z, 0.0);
        report.threshold("strictly_decreasing", "min_drop_z", Rule::Above, 1.0, 0.0);
        let first = rows[0].d;
        let last = rows[rows.len() - 1].d;
        let ratio = if first > 0.0 { last / first } else if last == 0.0 { 0.0 } else { f64::INFINITY };
        report.stat("last_over_first", ratio, 0.0);
        report.threshold("shrinks_fourfold", "last_over_first", Rule::Below, 0.25, 0.0);
    }
    Ok(StabilityOutcome { rows, report })
}

/// Determinism probe: identical inputs reproduce `X` bitwise; a different
/// sign seed changes `X` (unless `α` is degenerate) but never `|X|`.
pub fn uniqueness_probe(alpha: &AlphaStep, cfg: &SimConfig) -> Result<ExperimentReport> {
    let grid = full_grid(alpha.horizon(), cfg.dt)?;
    let paths = cfg.paths.clamp(1, 64);
    let mut rerun_identical = true;
    let mut abs_identical = true;
    let mut any_differs = false;
    for i in 0..paths as u64 {
        let bm = simulate_bm(&grid, &RngSpec::new(cfg.seed).for_path(i), 0.0);
        let ex = decompose_excursions(&bm);
        let signs_a = RngSpec::new(cfg.seed).for_path(i);
        let signs_b = RngSpec::new(cfg.seed.wrapping_add(0x5EED)).for_path(i);
        let x1 = apply_signs(&bm, &draw_signs(&ex, alpha, &signs_a)?);
        let x2 = apply_signs(&bm, &draw_signs(&ex, alpha, &signs_a)?);
        let x3 = apply_signs(&bm, &draw_signs(&ex, alpha, &signs_b)?);
        rerun_identical &= x1.values().iter().zip(x2.values()).all(|(a, b)| a.to_bits() == b.to_bits());
        abs_identical &= x1.values().iter().zip(x3.values()).all(|(a, b)| a.abs().to_bits() == b.abs().to_bits());
        any_differs |= x1 != x3;
    }
    let random = !alpha.is_degenerate();
    let mut report = ExperimentReport::new(
        "uniqueness",
        json!({"alpha": alpha.to_string(), "paths": paths, "dt": cfg.dt, "seed": cfg.seed}),
    );
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    report.exact("rerun_identical", flag(rerun_identical));
    report.exact("abs_identical", flag(abs_identical));
    report.exact("sign_seed_changes_path", flag(any_differs));
    report.threshold("rerun_identical", "rerun_identical", Rule::Exact { target: 1.0 }, 0.0, 0.0);
    report.threshold("abs_identical", "abs_identical", Rule::Exact { target: 1.0 }, 0.0, 0.0);
    report.threshold(
        "sign_seed_effect",
        "sign_seed_changes_path",
        Rule::Exact { target: flag(random) },
        0.0,
        0.0,
    );
    Ok(report)
}

/// Mean of `L̂(horizon)` for standard Brownian motion under both estimators,
/// against `E L⁰_1 = √(2/π)·√horizon`.
pub fn local_time_calibration(horizon: f64, cfg: &SimConfig) -> Result<ExperimentReport> {
    cfg.check_paths(2, "local time calibration")?;
    let grid = full_grid(horizon, cfg.dt)?;
    let eps = cfg.eps;
    let rows: Vec<(f64, f64)> = (0..cfg.paths as u64)
        .into_par_iter()
        .map(|i| {
            let r = simulate_bm(&grid, &RngSpec::new(cfg.seed).for_path(i), 0.0).reflect();
            Ok((local_time_upcrossing(&r, eps)?.last(), local_time_occupation(&r, eps)?.last()))
        })
        .collect::<Result<_>>()?;
    let target = (2.0 / std::f64::consts::PI * horizon).sqrt();
    let up = mean_se(&rows.iter().map(|r| r.0).collect::<Vec<_>>());
    let occ = mean_se(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    let diff = mean_se(&rows.iter().map(|r| r.0 - r.1).collect::<Vec<_>>());
    let mut report = ExperimentReport::new(
        "local_time_calibration",
        json!({"horizon": horizon, "target": target, "sim": cfg.json()}),
    );
    report.stat("mean_upcrossing", up.value, up.std_error);
    report.stat("mean_occupation", occ.value, occ.std_error);
    report.stat("mean_difference", diff.value.abs(), diff.std_error);
    report.threshold("upcrossing_calibrated", "mean_upcrossing", Rule::Within { center: target }, 0.0, 0.03 * target);
    report.threshold("occupation_calibrated", "mean_occupation", Rule::Within { center: target }, 0.0, 0.03 * target);
    report.threshold("estimators_agree", "mean_difference", Rule::Below, 0.0, 0.05);
    Ok(report)
}

/// Pathwise identity residuals for `alpha` against an envelope calibrated on
/// the `α ≡ 1` (Tanaka) case at the same `(dt, ε)`: the envelope is the 95th
/// percentile of the baseline residuals over an independent set of paths, and
/// the test passes when at least 95% of the `alpha` residuals fall below it.
pub fn identity_residual_test(alpha: &AlphaStep, cfg: &SimConfig, target: f64) -> Result<ExperimentReport> {
    cfg.check_paths(20, "identity residual test")?;
    let grid = full_grid(alpha.horizon(), cfg.dt)?;
    let eps = cfg.eps;
    let residuals = |a: &AlphaStep, seed: u64| -> Result<Vec<(f64, f64)>> {
        let spec = AlphaSpec::Step(a.clone());
        let c = SimConfig { seed, ..*cfg };
        map_paths(&spec, &grid, &c, 0.0, |p| {
            let l = local_time_upcrossing(&p.bm.reflect(), eps)?;
            let skew = skew_identity_residual(&p.signs, &p.bm, a, &l)?;
            let sde = sde_residual(&p.x, &p.bm, a, &l, 0.0)?;
            Ok((skew, sde.residual))
        })
    };
    let baseline = residuals(&AlphaStep::constant(1.0, alpha.horizon())?, cfg.seed ^ 0xBA5E_11E0)?;
    let tested = residuals(alpha, cfg.seed)?;
    let env_skew = quantile(&baseline.iter().map(|r| r.0).collect::<Vec<_>>(), 0.95);
    let env_sde = quantile(&baseline.iter().map(|r| r.1).collect::<Vec<_>>(), 0.95);
    let n = tested.len() as f64;
    let frac = |f: &dyn Fn(&(f64, f64)) -> bool| tested.iter().filter(|r| f(r)).count() as f64 / n;
    let binom_se = |p: f64| (p * (1.0 - p) / n).sqrt();

    let mut report = ExperimentReport::new(
        "identity_residuals",
        json!({"alpha": alpha.to_string(), "target": target, "sim": cfg.json(), "estimator": "upcrossing"}),
    );
    let boot = |xs: Vec<f64>| quantile_se(&xs, 0.95);
    report.stat("envelope_skew", env_skew, boot(baseline.iter().map(|r| r.0).collect()));
    report.stat("envelope_sde", env_sde, boot(baseline.iter().map(|r| r.1).collect()));
    let skew_in = frac(&|r| r.0 <= env_skew);
    let sde_in = frac(&|r| r.1 <= env_sde);
    report.stat("fraction_skew_within_envelope", skew_in, binom_se(skew_in));
    report.stat("fraction_sde_within_envelope", sde_in, binom_se(sde_in));
    let skew_target = frac(&|r| r.0 <= target);
    let sde_target = frac(&|r| r.1 <= target);
    report.stat("fraction_skew_below_target", skew_target, binom_se(skew_target));
    report.stat("fraction_sde_below_target", sde_target, binom_se(sde_target));
    let med = |xs: Vec<f64>| quantile(&xs, 0.5);
    report.stat("median_skew", med(tested.iter().map(|r| r.0).collect()), 0.0);
    report.stat("median_sde", med(tested.iter().map(|r| r.1).collect()), 0.0);
    report.threshold("skew_identity", "fraction_skew_within_envelope", Rule::Above, 0.95, -1e-12);
    report.threshold("sde", "fraction_sde_within_envelope", Rule::Above, 0.95, -1e-12);
    Ok(report)
}

/// Order-statistic standard error of the `p`-quantile (binomial interval
/// mapped through the empirical distribution, half-width of the ±1σ range).
fn quantile_se(xs: &[f64], p: f64) -> f64 {
    let n = xs.len() as f64;
    let s = (p * (1.0 - p) / n).sqrt();
    (quantile(xs, (p + s).min(1.0)) - quantile(xs, (p - s).max(0.0))) / 2.0
}

fn random_step(rng: &mut impl Rng, pieces: usize, horizon: f64, extra: Option<f64>) -> Result<AlphaStep> {
    let mut bp: Vec<f64> = (1..pieces).map(|_| rng.random::<f64>() * horizon).collect();
    if let Some(e) = extra {
        bp.push(e);
    }
    bp.push(0.0);
    bp.push(horizon);
    bp.sort_by(f64::total_cmp);
    bp.dedup();
    let values = (0..bp.len() - 1).map(|_| rng.random::<f64>()).collect();
    AlphaStep::new(bp, values)
}

/// Constant-skew reduction over `(a, x, y, τ) ∈ {0,¼,½,¾,1} × {−1,0,1} ×
/// {−2,…,2} × {¼,1,4}`: max of `|p − p_closed| / p_closed`, and of `|p|` where
/// the closed form vanishes.
pub fn kernel_reduction_suite(quad_tol: f64) -> Result<ExperimentReport> {
    let mut worst = 0.0_f64;
    let mut count = 0;
    for a in [0.0, 0.25, 0.5, 0.75, 1.0] {
        for tau in [0.25, 1.0, 4.0] {
            let alpha = AlphaStep::constant(a, tau)?;
            for x in [-1.0, 0.0, 1.0] {
                for y in [-2.0, -1.0, 0.0, 1.0, 2.0] {
                    let p = transition_density(&KernelQuery::new(0.0, tau, x, y).with_tol(quad_tol), &alpha)?;
                    let c = constant_alpha_density(tau, x, y, a)?;
                    let err = if c > 0.0 { (p - c).abs() / c } else { p.abs() };
                    worst = worst.max(err);
                    count += 1;
                }
            }
        }
    }
    let mut report = ExperimentReport::new("kernel_reduction", json!({"quad_tol": quad_tol, "queries": count}));
    report.exact("max_relative_error", worst);
    report.threshold("reduction", "max_relative_error", Rule::Below, 0.0, 1e-6);
    Ok(report)
}

/// `|∫ p dy − 1|` for `configs` random `(s, t, x)` with constant `α` and with
/// 16-piece step `α`.
pub fn kernel_normalization_suite(configs: usize, seed: u64) -> Result<ExperimentReport> {
    let mut rng = RngSpec::new(seed).stream(Purpose::Auxiliary);
    let mut worst_const = 0.0_f64;
    let mut worst_step = 0.0_f64;
    for _ in 0..configs {
        let s = rng.random::<f64>() * 0.5;
        let t = s + 0.05 + rng.random::<f64>() * (0.95 - s);
        let x = rng.random_range(-1.5..1.5);
        let constant = AlphaStep::constant(rng.random::<f64>(), 1.0)?;
        worst_const = worst_const.max((density_normalization(s, t, x, &constant)? - 1.0).abs());
        let step = random_step(&mut rng, 16, 1.0, None)?;
        worst_step = worst_step.max((density_normalization(s, t, x, &step)? - 1.0).abs());
    }
    let mut report = ExperimentReport::new("kernel_normalization", json!({"configs": configs, "seed": seed}));
    report.exact("max_error_constant", worst_const);
    report.exact("max_error_step", worst_step);
    report.threshold("constant", "max_error_constant", Rule::Below, 0.0, 1e-6);
    report.threshold("step", "max_error_step", Rule::Below, 0.0, 1e-5);
    Ok(report)
}

/// Chapman–Kolmogorov residuals for `configs` random `(s, r, t, x, y)` and
/// step `α` with a breakpoint at `r`.
pub fn chapman_kolmogorov_suite(configs: usize, seed: u64) -> Result<ExperimentReport> {
    let mut rng = RngSpec::new(seed).stream(Purpose::Auxiliary);
    let mut worst = 0.0_f64;
    for _ in 0..configs {
        let s = rng.random::<f64>() * 0.4;
        let t = s + 0.2 + rng.random::<f64>() * (0.8 - s);
        let r = s + (t - s) * (0.25 + 0.5 * rng.random::<f64>());
        let x = rng.random_range(-1.0..1.0);
        let y = rng.random_range(-1.0..1.0);
        let pieces = rng.random_range(2..9);
        let alpha = random_step(&mut rng, pieces, 1.0, Some(r))?;
        worst = worst.max(chapman_kolmogorov_residual(s, r, t, x, y, &alpha)?);
    }
    let mut report = ExperimentReport::new("chapman_kolmogorov", json!({"configs": configs, "seed": seed}));
    report.exact("max_residual", worst);
    report.threshold("semigroup", "max_residual", Rule::Below, 0.0, 1e-4);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(paths: usize) -> SimConfig {
        SimConfig::new(1e-3, paths, 7, 0.1)
    }

    #[test]
    fn reflection_law_small() {
        let r = reflection_law_test(&AlphaStep::constant(0.7, 1.0).unwrap(), 1.0, 0.0, &cfg(2000)).unwrap();
        assert!(r.pass, "{}", r.summary());
        assert!(reflection_law_test(&AlphaStep::constant(0.7, 1.0).unwrap(), 1.0, 0.0, &cfg(10)).is_err());
    }

    #[test]
    fn reflection_is_bitwise_for_full_skew() {
        // α ≡ 1 yields |X| = |B|, so the statistic equals the pure half-normal KS
        let c = cfg(1000);
        let r = reflection_law_test(&AlphaStep::constant(1.0, 1.0).unwrap(), 1.0, 0.0, &c).unwrap();
        let grid = make_grid(0.0, 1.0, c.dt).unwrap();
        let mut b: Vec<f64> = (0..1000)
            .map(|i| simulate_bm(&grid, &RngSpec::new(7).for_path(i), 0.0).last().abs())
            .collect();
        b.sort_by(f64::total_cmp);
        let ks = ks_sorted(&b, |v| reflected_cdf(v, 0.0, 1.0));
        assert_eq!(r.value("ks").unwrap(), ks);
    }

    #[test]
    fn stability_degenerate_is_exactly_zero() {
        let a = AlphaSpec::Step(AlphaStep::parse_inline("0:0.3,0.5:0.8", 1.0).unwrap());
        let out = stability_experiment(&[a.clone(), a.clone()], &[1, 2], &a, &cfg(50)).unwrap();
        assert!(out.rows.iter().all(|r| r.d == 0.0 && r.flip_rate == 0.0));
        // nothing left to decrease: only the strict-decrease threshold can fail
        assert_eq!(out.report.value("last_over_first"), Some(0.0));
        assert_eq!(out.report.failed_thresholds(), vec!["strictly_decreasing"]);
        assert!(out.to_csv().starts_with("n,D,std_error,flip_rate\n1,0.0000000000000000e0,"));
    }

    #[test]
    fn stability_flip_rate_matches_gap() {
        // constant members: disagreement probability is |α_n − α| exactly
        let limit = AlphaSpec::Step(AlphaStep::constant(0.5, 1.0).unwrap());
        let seq: Vec<AlphaSpec> = [0.9, 0.6]
            .iter()
            .map(|&a| AlphaSpec::Step(AlphaStep::constant(a, 1.0).unwrap()))
            .collect();
        let out = stability_experiment(&seq, &[1, 2], &limit, &cfg(400)).unwrap();
        let grid = make_grid(0.0, 1.0, 1e-3).unwrap();
        let total: usize = (0..400).map(|i| decompose_excursions(&simulate_bm(&grid, &RngSpec::new(7).for_path(i), 0.0)).len()).sum();
        for (row, gap) in out.rows.iter().zip([0.4, 0.1]) {
            let band = 3.0 * (gap * (1.0 - gap) / total as f64).sqrt() + 0.02;
            assert!((row.flip_rate - gap).abs() < band, "{row:?}");
        }
        assert!(out.rows[0].d > out.rows[1].d);
    }

    #[test]
    fn uniqueness_examples() {
        let c = cfg(4);
        let r = uniqueness_probe(&AlphaStep::constant(0.5, 1.0).unwrap(), &c).unwrap();
        assert!(r.pass, "{}", r.summary());
        assert_eq!(r.value("sign_seed_changes_path"), Some(1.0));
        let r = uniqueness_probe(&AlphaStep::constant(1.0, 1.0).unwrap(), &c).unwrap();
        assert!(r.pass);
        assert_eq!(r.value("sign_seed_changes_path"), Some(0.0));
    }

    #[test]
    fn reports_do_not_depend_on_thread_count() {
        let alpha = AlphaStep::parse_inline("0:0.9,0.5:0.1", 1.0).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| reflection_law_test(&alpha, 1.0, 0.0, &cfg(1000)).unwrap().to_json().unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn experiment_argument_checks() {
        let a = AlphaStep::constant(0.5, 1.0).unwrap();
        assert!(moment_scaling_test(&a, 0.5, &[0.1, 0.6], &cfg(10_000)).is_err());
        assert!(martingale_identity_test(&a, 0.6, 0.5, &cfg(1000)).is_err());
        let other = AlphaSpec::Step(AlphaStep::constant(0.5, 2.0).unwrap());
        assert!(matches!(
            stability_experiment(&[other], &[1], &AlphaSpec::Step(a), &cfg(10)),
            Err(Error::HorizonMismatch(..))
        ));
    }
}
