//! Uniform time grids, sampled paths and the discrete integrals built on them.
//!
//! All integrals use the left-point rule, so `∫ H dY` on the grid is
//! `Σ_{j<k} H_j (Y_{j+1} − Y_j)`: the integrand is always the value known at
//! the start of the step.

use std::fmt::Write as _;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Purpose, RngSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    origin: f64,
    dt: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(origin: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidGrid(format!("step must be positive, got {dt}")));
        }
        if n == 0 {
            return Err(Error::InvalidGrid("grid needs at least one step".into()));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidGrid(format!("origin must be finite, got {origin}")));
        }
        Ok(Self { origin, dt, n })
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of steps; the grid has `n + 1` points.
    pub fn steps(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> usize {
        self.n + 1
    }

    pub fn time(&self, k: usize) -> f64 {
        self.origin + k as f64 * self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.n)
    }

    /// Index of the grid point nearest to `t`, clamped to the grid.
    pub fn nearest_index(&self, t: f64) -> usize {
        let k = ((t - self.origin) / self.dt).round();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.n)
        }
    }

    /// Index of the last grid point `≤ t` (with a little slack for roundoff).
    pub fn floor_index(&self, t: f64) -> usize {
        let k = ((t - self.origin) / self.dt + 1e-9).floor();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.n)
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(move |k| self.time(k))
    }
}

/// Uniform grid on `[origin, horizon]` with step `dt`.
///
/// The span must be an integer multiple of `dt` (to 1e-9 relative); the
/// stored step is `span / n`, so the final grid time lands on `horizon`.
pub fn make_grid(origin: f64, horizon: f64, dt: f64) -> Result<TimeGrid> {
    if !(dt > 0.0) {
        return Err(Error::InvalidGrid(format!("step must be positive, got {dt}")));
    }
    if !(horizon > origin) {
        return Err(Error::InvalidGrid(format!(
            "horizon {horizon} must exceed origin {origin}"
        )));
    }
    let span = horizon - origin;
    let ratio = span / dt;
    if !ratio.is_finite() || ratio > u32::MAX as f64 {
        return Err(Error::InvalidGrid(format!("{ratio} steps is out of range")));
    }
    let n = ratio.round().max(1.0) as usize;
    if (n as f64 * dt - span).abs() > 1e-9 * span.max(dt) {
        return Err(Error::InvalidGrid(format!(
            "span {span} is not a multiple of dt {dt}"
        )));
    }
    TimeGrid::new(origin, span / n as f64, n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl SamplePath {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::LengthMismatch {
                expected: grid.points(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: TimeGrid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.points()])
    }

    /// Builds a path by evaluating `f` at every grid time.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.times().map(f).collect())
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn at(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Value at the grid point nearest to `t`.
    pub fn at_time(&self, t: f64) -> f64 {
        self.values[self.grid.nearest_index(t)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SamplePath {
        SamplePath {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise `|path|`.
    pub fn reflect(&self) -> SamplePath {
        self.map(f64::abs)
    }

    pub fn zip_with(&self, other: &SamplePath, f: impl Fn(f64, f64) -> f64) -> Result<SamplePath> {
        self.ensure_same_grid(other)?;
        Ok(SamplePath {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn ensure_same_grid(&self, other: &SamplePath) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// CSV with header `t,value`, one row per grid point, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(48 * self.values.len() + 8);
        out.push_str("t,value\n");
        for (k, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{:.16e},{:.16e}", self.grid.time(k), v);
        }
        out
    }

    /// Parses the CSV written by [`SamplePath::to_csv`]; the grid is inferred
    /// from the first and last rows.
    pub fn from_csv(text: &str) -> Result<SamplePath> {
        let mut lines = text.lines();
        match lines.next().map(str::trim) {
            Some("t,value") => {}
            other => return Err(Error::Parse(format!("expected header `t,value`, got {other:?}"))),
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (row, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (t, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("row {}: expected `t,value`", row + 1)))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: {e}", row + 1)))
            };
            times.push(parse(t)?);
            values.push(parse(v)?);
        }
        if times.len() < 2 {
            return Err(Error::Parse("a path needs at least two rows".into()));
        }
        let n = times.len() - 1;
        let dt = (times[n] - times[0]) / n as f64;
        SamplePath::new(TimeGrid::new(times[0], dt, n)?, values)
    }
}

/// Brownian path started at `x0` with i.i.d. `N(0, dt)` increments drawn from
/// the `Increments` stream of `rng`.
pub fn simulate_bm(grid: &TimeGrid, rng: &RngSpec, x0: f64) -> SamplePath {
    let mut stream = rng.stream(Purpose::Increments);
    let sd = grid.dt().sqrt();
    let mut values = Vec::with_capacity(grid.points());
    let mut x = x0;
    values.push(x);
    for _ in 0..grid.steps() {
        let z: f64 = StandardNormal.sample(&mut stream);
        x += sd * z;
        values.push(x);
    }
    SamplePath {
        grid: *grid,
        values,
    }
}

/// Left-point Stieltjes sum `Σ_{j<k} H_j (Y_{j+1} − Y_j)`.
pub fn stieltjes_integral(integrand: &SamplePath, integrator: &SamplePath) -> Result<SamplePath> {
    integrand.ensure_same_grid(integrator)?;
    let h = &integrand.values;
    let y = &integrator.values;
    let mut values = Vec::with_capacity(y.len());
    let mut acc = 0.0;
    values.push(acc);
    for j in 0..y.len() - 1 {
        acc += h[j] * (y[j + 1] - y[j]);
        values.push(acc);
    }
    Ok(SamplePath {
        grid: integrand.grid,
        values,
    })
}

/// Realized quadratic variation `Σ_{j<k} (Y_{j+1} − Y_j)²`.
pub fn quadratic_variation(path: &SamplePath) -> SamplePath {
    let y = &path.values;
    let mut values = Vec::with_capacity(y.len());
    let mut acc = 0.0;
    values.push(acc);
    for w in y.windows(2) {
        let d = w[1] - w[0];
        acc += d * d;
        values.push(acc);
    }
    SamplePath {
        grid: path.grid,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triangle() -> SamplePath {
        let grid = TimeGrid::new(0.0, 1.0, 4).unwrap();
        SamplePath::new(grid, vec![0.0, 1.0, 0.0, -1.0, 0.0]).unwrap()
    }

    #[test]
    fn grid_examples() {
        let g = make_grid(0.0, 1.0, 0.25).unwrap();
        assert_eq!(g.steps(), 4);
        let times: Vec<f64> = g.times().collect();
        assert_eq!(times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);

        assert_eq!(make_grid(0.0, 1.0, 1.0).unwrap().steps(), 1);

        let fine = make_grid(0.0, 1.0, 1e-4).unwrap();
        assert_eq!(fine.steps(), 10_000);
        assert!((fine.horizon() - 1.0).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn grid_errors() {
        assert!(make_grid(0.0, 1.0, 0.0).is_err());
        assert!(make_grid(0.0, 1.0, -0.1).is_err());
        assert!(make_grid(1.0, 1.0, 0.1).is_err());
        assert!(make_grid(2.0, 1.0, 0.1).is_err());
        assert!(make_grid(0.0, 1.0, 0.3).is_err());
    }

    #[test]
    fn path_validation() {
        let g = TimeGrid::new(0.0, 0.5, 2).unwrap();
        assert!(matches!(
            SamplePath::new(g, vec![0.0, 1.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            SamplePath::new(g, vec![0.0, f64::NAN, 1.0]),
            Err(Error::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn bm_starts_at_x0_and_is_deterministic() {
        let g = make_grid(0.0, 1.0, 1.0).unwrap();
        for seed in 0..5 {
            let p = simulate_bm(&g, &RngSpec::new(seed), 0.37);
            assert_eq!(p.first(), 0.37);
        }
        let g = make_grid(0.0, 1.0, 1e-3).unwrap();
        let rng = RngSpec::new(11).for_path(3);
        let a = simulate_bm(&g, &rng, 0.0);
        let b = simulate_bm(&g, &rng, 0.0);
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), simulate_bm(&g, &rng.for_path(4), 0.0).values());
    }

    #[test]
    fn increment_variance_matches_dt() {
        // sample variance of one increment over 10⁴ paths: relative sd √(2/10⁴),
        // the band dt·(1 ± 5/√10⁴) is a 3.5σ window.
        let g = make_grid(0.0, 0.05, 1e-2).unwrap();
        let n = 10_000;
        let incs: Vec<f64> = (0..n)
            .map(|i| {
                let p = simulate_bm(&g, &RngSpec::new(5).for_path(i), 0.0);
                p.at(3) - p.at(2)
            })
            .collect();
        let mean = incs.iter().sum::<f64>() / n as f64;
        let var = incs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let band = 5.0 / (n as f64).sqrt();
        assert!((var / 1e-2 - 1.0).abs() < band, "variance ratio {}", var / 1e-2);
    }

    #[test]
    fn stieltjes_examples() {
        let y = triangle();
        let one = SamplePath::constant(*y.grid(), 1.0).unwrap();
        let s = stieltjes_integral(&one, &y).unwrap();
        assert_eq!(s.values(), y.values());

        let zero = SamplePath::constant(*y.grid(), 0.0).unwrap();
        assert!(stieltjes_integral(&zero, &y).unwrap().values().iter().all(|&v| v == 0.0));

        // Σ Z_j ΔY_j = (+1)(1) + (+1)(−1) + (−1)(−1) + (−1)(1)
        let z = SamplePath::new(*y.grid(), vec![1.0, 1.0, -1.0, -1.0, 0.0]).unwrap();
        let s = stieltjes_integral(&z, &y).unwrap();
        assert_eq!(s.values(), &[0.0, 1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn stieltjes_rejects_mismatched_grids() {
        let a = SamplePath::constant(TimeGrid::new(0.0, 1.0, 4).unwrap(), 1.0).unwrap();
        let b = SamplePath::constant(TimeGrid::new(0.0, 0.5, 4).unwrap(), 1.0).unwrap();
        assert!(matches!(stieltjes_integral(&a, &b), Err(Error::GridMismatch)));
    }

    #[test]
    fn quadratic_variation_examples() {
        let g = TimeGrid::new(0.0, 0.1, 10).unwrap();
        let c = SamplePath::constant(g, 3.0).unwrap();
        assert!(quadratic_variation(&c).values().iter().all(|&v| v == 0.0));
        assert_eq!(quadratic_variation(&triangle()).last(), 4.0);
    }

    #[test]
    fn quadratic_variation_of_bm_concentrates() {
        // QV(1) at n = 10⁴ steps is χ²_n/n: sd √(2/n) ≈ 0.014, so ±0.05 is 3.5σ
        // (two-sided tail ≈ 5e-4 per path).
        let g = make_grid(0.0, 1.0, 1e-4).unwrap();
        let n_paths = 200;
        let inside = (0..n_paths)
            .filter(|&i| {
                let p = simulate_bm(&g, &RngSpec::new(21).for_path(i), 0.0);
                (quadratic_variation(&p).last() - 1.0).abs() < 0.05
            })
            .count();
        assert!(inside as f64 >= 0.99 * n_paths as f64, "{inside}/{n_paths}");
    }

    #[test]
    fn quadratic_variation_mean_within_three_standard_errors() {
        let g = make_grid(0.0, 1.0, 1e-2).unwrap();
        let n = 1000;
        let qv: Vec<f64> = (0..n)
            .map(|i| quadratic_variation(&simulate_bm(&g, &RngSpec::new(8).for_path(i), 0.0)).last())
            .collect();
        let mean = qv.iter().sum::<f64>() / n as f64;
        let sd = (qv.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * sd / (n as f64).sqrt());
    }

    #[test]
    fn csv_layout() {
        let csv = triangle().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,value"));
        assert_eq!(lines.next(), Some("0.0000000000000000e0,0.0000000000000000e0"));
        assert_eq!(lines.count(), 4);
    }

    proptest! {
        #[test]
        fn stieltjes_is_bilinear(
            h1 in prop::collection::vec(-5.0..5.0f64, 9),
            h2 in prop::collection::vec(-5.0..5.0f64, 9),
            y1 in prop::collection::vec(-5.0..5.0f64, 9),
            y2 in prop::collection::vec(-5.0..5.0f64, 9),
            a in -3.0..3.0f64,
            b in -3.0..3.0f64,
        ) {
            let g = TimeGrid::new(0.0, 0.125, 8).unwrap();
            let p = |v: &Vec<f64>| SamplePath::new(g, v.clone()).unwrap();
            let (h1, h2, y1, y2) = (p(&h1), p(&h2), p(&y1), p(&y2));
            let comb = |x: &SamplePath, y: &SamplePath| x.zip_with(y, |u, v| a * u + b * v).unwrap();

            let lhs = stieltjes_integral(&comb(&h1, &h2), &y1).unwrap();
            let r1 = stieltjes_integral(&h1, &y1).unwrap();
            let r2 = stieltjes_integral(&h2, &y1).unwrap();
            for k in 0..9 {
                let rhs = a * r1.at(k) + b * r2.at(k);
                prop_assert!((lhs.at(k) - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
            }

            let lhs = stieltjes_integral(&h1, &comb(&y1, &y2)).unwrap();
            let r2 = stieltjes_integral(&h1, &y2).unwrap();
            for k in 0..9 {
                let rhs = a * r1.at(k) + b * r2.at(k);
                prop_assert!((lhs.at(k) - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
            }
        }

        #[test]
        fn csv_round_trip(values in prop::collection::vec(-1e6..1e6f64, 2..40), dt in 1e-6..1.0f64) {
            let g = TimeGrid::new(0.0, dt, values.len() - 1).unwrap();
            let p = SamplePath::new(g, values).unwrap();
            let back = SamplePath::from_csv(&p.to_csv()).unwrap();
            prop_assert_eq!(back.values(), p.values());
        }
    }
}
