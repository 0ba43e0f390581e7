//! Upcrossing counts and symmetric local time estimators at level zero.
//!
//! Both estimators report the symmetric local time of a signed process whose
//! absolute value is the input path, i.e. half the local time of the reflected
//! path. For reflected Brownian motion `|B|` the target is `L_t(B)` with
//! `E L_1(B) = E|B_1| = √(2/π)`.
//!
//! The stopping times `τ_{2k+1} = inf{t > τ_{2k} : |Y_t| > ε}` and
//! `τ_{2k+2} = inf{t > τ_{2k+1} : |Y_t| = 0}` are evaluated on the grid. A
//! sampled path almost never lands on zero, and discrete monitoring sees a
//! barrier as if it were shifted by `β·√dt` with `β = −ζ(1/2)/√(2π)`, so
//! "back at zero" means `|Y| ≤ 2β·√dt` (capped at `ε/2`). To first order
//! this makes the discrete passage count match the continuous one between
//! levels `0` and `ε`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{SamplePath, TimeGrid};

/// Mean overshoot of a Gaussian random walk over a far barrier, in units of
/// the step standard deviation: `−ζ(1/2)/√(2π)`.
pub const OVERSHOOT_CONSTANT: f64 = 0.582_597_157_939_010_6;

/// Smallest admissible `ε` in units of `√dt`.
pub const RESOLUTION_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Upcrossing,
    Occupation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeCurve {
    grid: TimeGrid,
    values: Vec<f64>,
    kind: EstimatorKind,
    eps: f64,
    zero_band: f64,
    /// `τ_1, τ_2, …` (grid times); odd entries are passages above `ε`.
    crossing_times: Vec<f64>,
    /// Grid indices of the `τ_{2k+1}`.
    up_indices: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalTimeMetadata {
    pub kind: EstimatorKind,
    pub eps: f64,
    pub zero_band: f64,
    pub dt: f64,
    pub horizon: f64,
    pub upcrossings: Option<usize>,
    pub crossing_times: Vec<f64>,
    pub final_value: f64,
}

impl LocalTimeCurve {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn kind(&self) -> EstimatorKind {
        self.kind
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn crossing_times(&self) -> &[f64] {
        &self.crossing_times
    }

    pub fn up_indices(&self) -> &[usize] {
        &self.up_indices
    }

    /// `N(a, b, ε)`: completed passages whose arrival above `ε` falls in
    /// `[a, b]`. `None` for occupation curves.
    pub fn window_count(&self, a: f64, b: f64) -> Option<usize> {
        match self.kind {
            EstimatorKind::Occupation => None,
            EstimatorKind::Upcrossing => Some(
                self.up_indices
                    .iter()
                    .filter(|&&k| {
                        let t = self.grid.time(k);
                        a <= t && t <= b
                    })
                    .count(),
            ),
        }
    }

    pub fn as_path(&self) -> SamplePath {
        SamplePath::new(self.grid, self.values.clone()).expect("local time values are finite")
    }

    /// `Σ_k w(t_k)·(L_k − L_{k−1})`, cumulative, with `w` evaluated where
    /// the curve moves.
    pub fn weighted_integral(&self, weight: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = 0.0;
        out.push(acc);
        for k in 1..self.values.len() {
            let d = self.values[k] - self.values[k - 1];
            if d != 0.0 {
                acc += weight(self.grid.time(k)) * d;
            }
            out.push(acc);
        }
        out
    }

    /// CSV with header `t,L`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(48 * self.values.len() + 4);
        out.push_str("t,L\n");
        for (k, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{:.16e},{:.16e}", self.grid.time(k), v);
        }
        out
    }

    pub fn metadata(&self) -> LocalTimeMetadata {
        LocalTimeMetadata {
            kind: self.kind,
            eps: self.eps,
            zero_band: self.zero_band,
            dt: self.grid.dt(),
            horizon: self.grid.horizon(),
            upcrossings: match self.kind {
                EstimatorKind::Upcrossing => Some(self.up_indices.len()),
                EstimatorKind::Occupation => None,
            },
            crossing_times: self.crossing_times.clone(),
            final_value: self.last(),
        }
    }

    /// JSON sidecar for [`LocalTimeCurve::to_csv`].
    pub fn metadata_json(&self) -> String {
        serde_json::to_string_pretty(&self.metadata()).expect("metadata serializes")
    }
}

/// Threshold below which a sampled `|Y|` counts as being at zero.
pub fn zero_band(eps: f64, dt: f64) -> f64 {
    (2.0 * OVERSHOOT_CONSTANT * dt.sqrt()).min(0.5 * eps)
}

struct Passages {
    times: Vec<f64>,
    up_indices: Vec<usize>,
    band: f64,
}

fn passages(path: &SamplePath, eps: f64) -> Passages {
    let grid = path.grid();
    let band = zero_band(eps, grid.dt());
    let mut times = Vec::new();
    let mut up_indices = Vec::new();
    let mut above = false;
    for (k, v) in path.values().iter().enumerate() {
        let r = v.abs();
        if !above {
            if r > eps {
                above = true;
                times.push(grid.time(k));
                up_indices.push(k);
            }
        } else if r <= band {
            above = false;
            times.push(grid.time(k));
        }
    }
    Passages {
        times,
        up_indices,
        band,
    }
}

/// Number of passages of `|path|` from zero to above `ε` completed at a grid
/// time in `[a, b]`.
///
/// The stopping-time sequence always starts at the grid origin, so windowed
/// counts over adjacent windows add up (up to a passage landing exactly on
/// the shared endpoint).
pub fn count_upcrossings(path: &SamplePath, eps: f64, a: f64, b: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    let grid = path.grid();
    let slack = 1e-9 * grid.dt();
    if !(a < b) || a < grid.origin() - slack || b > grid.horizon() + slack {
        return Err(Error::EmptyWindow { a, b });
    }
    let p = passages(path, eps);
    Ok(p
        .up_indices
        .iter()
        .filter(|&&k| {
            let t = grid.time(k);
            a <= t && t <= b
        })
        .count())
}

fn check_estimator_input(reflected: &SamplePath, eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    let floor = RESOLUTION_FACTOR * reflected.grid().dt().sqrt();
    if eps < floor * (1.0 - 1e-12) {
        return Err(Error::BelowResolution { eps, floor });
    }
    if let Some((index, &value)) = reflected.values().iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NegativePath { index, value });
    }
    Ok(())
}

/// `L̂(t) = ε·N(0, t, ε)`, jumping by `ε` at each `τ_{2k+1}`.
pub fn local_time_upcrossing(reflected: &SamplePath, eps: f64) -> Result<LocalTimeCurve> {
    check_estimator_input(reflected, eps)?;
    let p = passages(reflected, eps);
    let mut values = vec![0.0; reflected.len()];
    let mut level = 0.0;
    let mut next = p.up_indices.iter().peekable();
    for (k, v) in values.iter_mut().enumerate() {
        while next.peek().is_some_and(|&&j| j == k) {
            level += eps;
            next.next();
        }
        *v = level;
    }
    Ok(LocalTimeCurve {
        grid: *reflected.grid(),
        values,
        kind: EstimatorKind::Upcrossing,
        eps,
        zero_band: p.band,
        crossing_times: p.times,
        up_indices: p.up_indices,
    })
}

/// `L̂(t) = (1/2ε)·Σ_{t_j < t} 1{|Y_j| ≤ ε}·dt`.
pub fn local_time_occupation(reflected: &SamplePath, eps: f64) -> Result<LocalTimeCurve> {
    check_estimator_input(reflected, eps)?;
    let dt = reflected.grid().dt();
    let step = dt / (2.0 * eps);
    let mut values = Vec::with_capacity(reflected.len());
    let mut hits = 0u64;
    values.push(0.0);
    for &y in &reflected.values()[..reflected.len() - 1] {
        if y <= eps {
            hits += 1;
        }
        values.push(hits as f64 * step);
    }
    Ok(LocalTimeCurve {
        grid: *reflected.grid(),
        values,
        kind: EstimatorKind::Occupation,
        eps,
        zero_band: 0.0,
        crossing_times: Vec::new(),
        up_indices: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{make_grid, simulate_bm};
    use crate::rng::RngSpec;
    use proptest::prelude::*;

    fn triangle() -> SamplePath {
        let g = TimeGrid::new(0.0, 1.0, 4).unwrap();
        SamplePath::new(g, vec![0.0, 1.0, 0.0, -1.0, 0.0]).unwrap()
    }

    /// `teeth` teeth of height `height` over `2·half` steps each, exact zeros
    /// between teeth.
    fn sawtooth(teeth: usize, half: usize, height: f64, dt: f64) -> SamplePath {
        let mut v = vec![0.0];
        for _ in 0..teeth {
            for j in 1..=half {
                v.push(height * j as f64 / half as f64);
            }
            for j in (0..half).rev() {
                v.push(height * j as f64 / half as f64);
            }
        }
        let g = TimeGrid::new(0.0, dt, v.len() - 1).unwrap();
        SamplePath::new(g, v).unwrap()
    }

    #[test]
    fn triangle_has_two_upcrossings() {
        // τ1 = 1 (|Y| = 1 > .5), τ2 = 2, τ3 = 3, τ4 = 4
        assert_eq!(count_upcrossings(&triangle(), 0.5, 0.0, 4.0).unwrap(), 2);
        assert_eq!(count_upcrossings(&triangle(), 0.5, 0.0, 2.0).unwrap(), 1);
        assert_eq!(count_upcrossings(&triangle(), 0.5, 2.0, 4.0).unwrap(), 1);
    }

    #[test]
    fn level_above_max_counts_nothing() {
        assert_eq!(count_upcrossings(&triangle(), 1.5, 0.0, 4.0).unwrap(), 0);
        let s = sawtooth(5, 10, 0.1, 1e-4);
        let curve = local_time_upcrossing(&s, 0.2).unwrap();
        assert!(curve.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn count_errors() {
        assert!(matches!(
            count_upcrossings(&triangle(), 0.0, 0.0, 4.0),
            Err(Error::InvalidEpsilon(_))
        ));
        assert!(matches!(
            count_upcrossings(&triangle(), 0.5, 2.0, 2.0),
            Err(Error::EmptyWindow { .. })
        ));
        assert!(matches!(
            count_upcrossings(&triangle(), 0.5, -1.0, 2.0),
            Err(Error::EmptyWindow { .. })
        ));
    }

    #[test]
    fn sawtooth_counts_each_tooth() {
        let s = sawtooth(7, 10, 0.1, 1e-4);
        let eps = 0.05;
        let curve = local_time_upcrossing(&s, eps).unwrap();
        assert!((curve.last() - 7.0 * eps).abs() < 1e-15);
        assert_eq!(curve.up_indices().len(), 7);
        assert_eq!(curve.crossing_times().len(), 14);
        // jumps land on the first sample above ε of each tooth
        assert_eq!(curve.up_indices()[0], 6);
    }

    #[test]
    fn resolution_floor_is_enforced() {
        let s = sawtooth(2, 10, 0.1, 1e-4);
        let err = local_time_upcrossing(&s, 0.02).unwrap_err();
        assert!(matches!(err, Error::BelowResolution { .. }), "{err}");
        assert!(matches!(
            local_time_occupation(&s, 0.02),
            Err(Error::BelowResolution { .. })
        ));
        assert!(local_time_upcrossing(&s, 0.03).is_ok());
    }

    #[test]
    fn negative_input_is_rejected() {
        let g = TimeGrid::new(0.0, 1e-4, 2).unwrap();
        let p = SamplePath::new(g, vec![0.0, -0.1, 0.0]).unwrap();
        assert!(matches!(
            local_time_upcrossing(&p, 0.05),
            Err(Error::NegativePath { index: 1, .. })
        ));
    }

    #[test]
    fn occupation_ignores_paths_away_from_zero() {
        let g = TimeGrid::new(0.0, 1e-4, 100).unwrap();
        let p = SamplePath::constant(g, 0.5).unwrap();
        let curve = local_time_occupation(&p, 0.05).unwrap();
        assert!(curve.values().iter().all(|&v| v == 0.0));
        assert_eq!(curve.window_count(0.0, 1.0), None);
    }

    #[test]
    fn curves_only_move_near_zero() {
        let g = make_grid(0.0, 1.0, 1e-4).unwrap();
        for i in 0..10 {
            let r = simulate_bm(&g, &RngSpec::new(3).for_path(i), 0.0).reflect();
            let eps = 0.05;
            let up = local_time_upcrossing(&r, eps).unwrap();
            let occ = local_time_occupation(&r, eps).unwrap();
            for k in 1..r.len() {
                assert!(up.at(k) >= up.at(k - 1));
                assert!(occ.at(k) >= occ.at(k - 1));
                if occ.at(k) > occ.at(k - 1) {
                    assert!(r.at(k - 1) <= eps);
                }
                if up.at(k) > up.at(k - 1) {
                    // a jump is the first sample above ε after a visit to the zero band
                    assert!(r.at(k) > eps && r.at(k - 1) <= eps);
                }
            }
        }
    }

    #[test]
    fn sidecar_and_csv() {
        let s = sawtooth(3, 10, 0.1, 1e-4);
        let curve = local_time_upcrossing(&s, 0.05).unwrap();
        let csv = curve.to_csv();
        assert!(csv.starts_with("t,L\n"));
        assert_eq!(csv.lines().count(), s.len() + 1);
        let meta: serde_json::Value = serde_json::from_str(&curve.metadata_json()).unwrap();
        assert_eq!(meta["kind"], "upcrossing");
        assert_eq!(meta["upcrossings"], 3);
        assert_eq!(meta["eps"], 0.05);
    }

    #[test]
    fn weighted_integral_uses_jump_times() {
        let s = sawtooth(4, 10, 0.1, 1e-4);
        let curve = local_time_upcrossing(&s, 0.05).unwrap();
        let t_mid = s.grid().time(40);
        let w = curve.weighted_integral(|t| if t < t_mid { 1.0 } else { -1.0 });
        assert!((w.last().unwrap() - 0.0).abs() < 1e-15);
        assert!((w[39] - 0.1).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn window_counts_are_additive(seed in 0u64..500, split in 0.05..0.95f64) {
            let g = make_grid(0.0, 1.0, 1e-3).unwrap();
            let r = simulate_bm(&g, &RngSpec::new(seed), 0.0).reflect();
            let eps = 0.1;
            let whole = count_upcrossings(&r, eps, 0.0, 1.0).unwrap() as i64;
            let left = count_upcrossings(&r, eps, 0.0, split).unwrap() as i64;
            let right = count_upcrossings(&r, eps, split, 1.0).unwrap() as i64;
            prop_assert!((left + right - whole).abs() <= 1);
        }
    }
}
