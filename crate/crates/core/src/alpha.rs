//! The skewness function `α(·)`.
//!
//! [`AlphaStep`] is a right-continuous step function on `[0, horizon]`:
//! `α(t) = α_i` on `[t_i, t_{i+1})`, and the last value also holds at the
//! horizon itself. [`AlphaSpec`] adds pointwise-evaluable functions, which are
//! turned into step functions by left-endpoint sampling.

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaStep {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

fn check_value(a: f64) -> Result<()> {
    if (0.0..=1.0).contains(&a) {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(format!("value {a} outside [0, 1]")))
    }
}

impl AlphaStep {
    /// `breakpoints = [0 = t_0, t_1, …, t_m = horizon]`, `values.len() == m`.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidAlpha(format!(
                "{} breakpoints for {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::InvalidAlpha(format!(
                "first breakpoint must be 0, got {}",
                breakpoints[0]
            )));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidAlpha(format!(
                "breakpoints must increase strictly: {} then {}",
                w[0], w[1]
            )));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidAlpha("breakpoints must be finite".into()));
        }
        for &a in &values {
            check_value(a)?;
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(alpha: f64, horizon: f64) -> Result<Self> {
        Self::new(vec![0.0, horizon], vec![alpha])
    }

    /// Step function from `(t_i, α_i)` pairs; `t_0` must be zero.
    pub fn from_pairs(pairs: &[(f64, f64)], horizon: f64) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidAlpha("no pieces".into()));
        }
        let mut breakpoints: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        if let Some(&last) = breakpoints.last() {
            if !(horizon > last) {
                return Err(Error::InvalidAlpha(format!(
                    "horizon {horizon} must exceed the last breakpoint {last}"
                )));
            }
        }
        breakpoints.push(horizon);
        Self::new(breakpoints, pairs.iter().map(|p| p.1).collect())
    }

    pub fn horizon(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1]
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn pieces(&self) -> usize {
        self.values.len()
    }

    /// Index `i` with `t ∈ [t_i, t_{i+1})`, clamped to the first and last piece.
    pub fn interval_index(&self, t: f64) -> usize {
        let i = self.breakpoints[1..].partition_point(|&b| b <= t);
        i.min(self.values.len() - 1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.values[self.interval_index(t)]
    }

    /// Whether every value is 0 or 1, i.e. sign draws carry no randomness.
    pub fn is_degenerate(&self) -> bool {
        self.values.iter().all(|&a| a == 0.0 || a == 1.0)
    }

    /// `u ↦ α(s + u)` on `[0, horizon − s]`.
    pub fn shift(&self, s: f64) -> Result<AlphaStep> {
        shift_alpha(self, s)
    }

    /// Pieces of `α` restricted to `[a, b]` as `(start, end, value)`.
    pub fn pieces_on(&self, a: f64, b: f64) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        let mut lo = a;
        let mut i = self.interval_index(a);
        while lo < b {
            let hi = if i + 1 < self.values.len() {
                self.breakpoints[i + 1].min(b)
            } else {
                b
            };
            if hi > lo {
                out.push((lo, hi, self.values[i]));
            }
            lo = hi;
            i += 1;
        }
        out
    }

    /// Text form `t,alpha` with one row per piece.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,alpha\n");
        for (t, a) in self.breakpoints.iter().zip(&self.values) {
            let _ = writeln!(out, "{t},{a}");
        }
        out
    }

    /// Parses `t,alpha` CSV: rows sorted by `t`, first `t` is 0, each row
    /// meaning `α = alpha` on `[t, next t)`, the last row up to `horizon`.
    pub fn from_csv(text: &str, horizon: f64) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(str::trim) {
            Some("t,alpha") => {}
            other => {
                return Err(Error::Parse(format!("expected header `t,alpha`, got {other:?}")))
            }
        }
        let mut pairs = Vec::new();
        for line in lines {
            let (t, a) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("malformed row `{line}`")))?;
            let t: f64 = t
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad time in row `{line}`")))?;
            let a: f64 = a
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad alpha in row `{line}`")))?;
            pairs.push((t, a));
        }
        Self::from_pairs(&pairs, horizon)
    }

    /// Parses the inline form `t0:a0,t1:a1,…`. Errors name the offending token.
    pub fn parse_inline(text: &str, horizon: f64) -> Result<Self> {
        let mut pairs = Vec::new();
        for token in text.split(',').map(str::trim) {
            let bad = |why: &str| Error::Parse(format!("invalid alpha token \"{token}\": {why}"));
            let (t, a) = token.split_once(':').ok_or_else(|| bad("expected t:alpha"))?;
            let t: f64 = t.trim().parse().map_err(|_| bad("time is not a number"))?;
            let a: f64 = a.trim().parse().map_err(|_| bad("alpha is not a number"))?;
            if !(0.0..=1.0).contains(&a) {
                return Err(bad("alpha must lie in [0, 1]"));
            }
            if pairs.is_empty() && t != 0.0 {
                return Err(bad("the first piece must start at t = 0"));
            }
            if let Some(&(prev, _)) = pairs.last() {
                if !(t > prev) {
                    return Err(bad("times must increase strictly"));
                }
            }
            if !(t < horizon) {
                return Err(bad("time must be below the horizon"));
            }
            pairs.push((t, a));
        }
        Self::from_pairs(&pairs, horizon)
    }
}

impl fmt::Display for AlphaStep {
    /// Inline form `t0:a0,t1:a1,…`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (t, a)) in self.breakpoints.iter().zip(&self.values).enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}:{a}")?;
        }
        Ok(())
    }
}

pub type AlphaFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum AlphaSpec {
    Step(AlphaStep),
    Function { f: AlphaFn, horizon: f64 },
}

impl fmt::Debug for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSpec::Step(s) => f.debug_tuple("Step").field(s).finish(),
            AlphaSpec::Function { horizon, .. } => {
                f.debug_struct("Function").field("horizon", horizon).finish_non_exhaustive()
            }
        }
    }
}

impl From<AlphaStep> for AlphaSpec {
    fn from(step: AlphaStep) -> Self {
        AlphaSpec::Step(step)
    }
}

impl AlphaSpec {
    pub fn function(horizon: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        AlphaSpec::Function {
            f: Arc::new(f),
            horizon,
        }
    }

    pub fn horizon(&self) -> f64 {
        match self {
            AlphaSpec::Step(s) => s.horizon(),
            AlphaSpec::Function { horizon, .. } => *horizon,
        }
    }

    /// Pointwise value, validated to lie in `[0, 1]`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let a = match self {
            AlphaSpec::Step(s) => s.eval(t),
            AlphaSpec::Function { f, .. } => f(t),
        };
        check_value(a).map_err(|_| Error::InvalidAlpha(format!("α({t}) = {a} outside [0, 1]")))?;
        Ok(a)
    }
}

/// Left-endpoint sampling on the uniform partition `t_i = i·horizon/n`.
pub fn discretize_alpha(spec: &AlphaSpec, n: usize) -> Result<AlphaStep> {
    if n == 0 {
        return Err(Error::InvalidAlpha("discretization level must be ≥ 1".into()));
    }
    let horizon = spec.horizon();
    let breakpoints: Vec<f64> = (0..=n).map(|i| horizon * i as f64 / n as f64).collect();
    let values = breakpoints[..n]
        .iter()
        .map(|&t| spec.eval(t))
        .collect::<Result<Vec<_>>>()?;
    AlphaStep::new(breakpoints, values)
}

/// The shifted function `u ↦ α(s + u)` on `[0, horizon − s]`.
pub fn shift_alpha(alpha: &AlphaStep, s: f64) -> Result<AlphaStep> {
    let horizon = alpha.horizon();
    if !(0.0..=horizon).contains(&s) {
        return Err(Error::ShiftOutOfRange { s, horizon });
    }
    if s == 0.0 {
        return Ok(alpha.clone());
    }
    if s == horizon {
        // degenerate remainder; keep the value in force at the horizon on a
        // zero-length window represented by the smallest positive span
        return AlphaStep::constant(alpha.eval(horizon), f64::MIN_POSITIVE);
    }
    let pieces = alpha.pieces_on(s, horizon);
    let mut breakpoints: Vec<f64> = pieces.iter().map(|p| p.0 - s).collect();
    breakpoints[0] = 0.0;
    breakpoints.push(horizon - s);
    let values = pieces.iter().map(|p| p.2).collect();
    AlphaStep::new(breakpoints, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn construction_errors() {
        assert!(AlphaStep::new(vec![0.0, 1.0], vec![1.5]).is_err());
        assert!(AlphaStep::new(vec![0.0, 1.0], vec![-0.1]).is_err());
        assert!(AlphaStep::new(vec![0.1, 1.0], vec![0.5]).is_err());
        assert!(AlphaStep::new(vec![0.0, 0.5, 0.5, 1.0], vec![0.5, 0.5, 0.5]).is_err());
        assert!(AlphaStep::new(vec![0.0, 1.0], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn right_continuous_evaluation() {
        let a = AlphaStep::new(vec![0.0, 0.5, 1.0], vec![0.9, 0.1]).unwrap();
        assert_eq!(a.eval(0.0), 0.9);
        assert_eq!(a.eval(0.4999), 0.9);
        assert_eq!(a.eval(0.5), 0.1);
        assert_eq!(a.eval(1.0), 0.1);
        assert_eq!(a.eval(7.0), 0.1);
        assert_eq!(a.eval(-1.0), 0.9);
        assert_eq!(a.interval_index(0.5), 1);
    }

    #[test]
    fn discretize_examples() {
        let c = discretize_alpha(&AlphaStep::constant(0.3, 1.0).unwrap().into(), 4).unwrap();
        assert_eq!(c.pieces(), 4);
        assert!(c.values().iter().all(|&v| v == 0.3));

        let id = AlphaSpec::function(1.0, |t| t);
        let half = discretize_alpha(&id, 2).unwrap();
        assert_eq!(half.values(), &[0.0, 0.5]);
        assert_eq!(half.breakpoints(), &[0.0, 0.5, 1.0]);

        // sup|α_n − α| for α(t) = t is 1/n, approached just below each breakpoint
        for n in [4usize, 16, 64] {
            let step = discretize_alpha(&id, n).unwrap();
            let mut sup = 0.0_f64;
            for k in 0..=100_000 {
                let t = k as f64 / 100_000.0;
                sup = sup.max((step.eval(t) - t).abs());
            }
            let left_limit = 1.0 / n as f64;
            assert!(sup <= left_limit + 1e-12);
            assert!(sup > left_limit - 1e-4, "n={n} sup={sup}");
        }
    }

    #[test]
    fn discretize_rejects_out_of_range() {
        let bad = AlphaSpec::function(1.0, |t| 2.0 * t);
        assert!(matches!(discretize_alpha(&bad, 4), Err(Error::InvalidAlpha(_))));
        assert!(discretize_alpha(&AlphaStep::constant(0.5, 1.0).unwrap().into(), 0).is_err());
    }

    #[test]
    fn discretize_is_idempotent_on_aligned_steps() {
        let step = AlphaStep::new(vec![0.0, 0.25, 0.5, 0.75, 1.0], vec![0.1, 0.7, 0.2, 0.9]).unwrap();
        assert_eq!(discretize_alpha(&step.clone().into(), 4).unwrap(), step);
    }

    #[test]
    fn shift_examples() {
        let a = AlphaStep::new(vec![0.0, 0.5, 1.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(shift_alpha(&a, 0.0).unwrap(), a);
        let s = shift_alpha(&a, 0.5).unwrap();
        assert_eq!(s.values(), &[0.0]);
        assert_eq!(s.horizon(), 0.5);
        assert!(matches!(shift_alpha(&a, 1.5), Err(Error::ShiftOutOfRange { .. })));
        assert!(matches!(shift_alpha(&a, -0.1), Err(Error::ShiftOutOfRange { .. })));
    }

    #[test]
    fn shift_matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let m = rng.random_range(1..12);
            let mut cuts: Vec<f64> = (0..m - 1).map(|_| rng.random::<f64>()).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut bp = vec![0.0];
            bp.extend(cuts.into_iter().filter(|&c| c > 0.0));
            bp.push(1.0);
            let vals = (0..bp.len() - 1).map(|_| rng.random::<f64>()).collect();
            let alpha = AlphaStep::new(bp, vals).unwrap();
            let s = rng.random::<f64>();
            let shifted = shift_alpha(&alpha, s).unwrap();
            for _ in 0..100 {
                let u = rng.random::<f64>() * (1.0 - s);
                assert_eq!(shifted.eval(u), alpha.eval(s + u), "s={s} u={u}");
            }
        }
    }

    #[test]
    fn inline_grammar() {
        let a = AlphaStep::parse_inline("0:0.9,0.5:0.1", 1.0).unwrap();
        assert_eq!(a.breakpoints(), &[0.0, 0.5, 1.0]);
        assert_eq!(a.values(), &[0.9, 0.1]);
        assert_eq!(a.to_string(), "0:0.9,0.5:0.1");

        let err = AlphaStep::parse_inline("0:1.5", 1.0).unwrap_err().to_string();
        assert!(err.contains("\"0:1.5\""), "{err}");
        let err = AlphaStep::parse_inline("0.2:0.5", 1.0).unwrap_err().to_string();
        assert!(err.contains("t = 0"), "{err}");
        assert!(AlphaStep::parse_inline("0:0.5,0:0.2", 1.0).is_err());
        assert!(AlphaStep::parse_inline("0:0.5,x", 1.0).is_err());
    }

    #[test]
    fn csv_format() {
        let a = AlphaStep::parse_inline("0:0.9,0.5:0.1", 1.0).unwrap();
        assert_eq!(a.to_csv(), "t,alpha\n0,0.9\n0.5,0.1\n");
        assert!(AlphaStep::from_csv("t,alpha\n0.1,0.5\n", 1.0).is_err());
        assert!(AlphaStep::from_csv("time,alpha\n0,0.5\n", 1.0).is_err());
        assert!(AlphaStep::from_csv("t,alpha\n0,0.5\n0.5,1.2\n", 1.0).is_err());
    }

    proptest! {
        #[test]
        fn csv_is_bit_exact(values in prop::collection::vec(0.0..=1.0f64, 1..16)) {
            let m = values.len();
            let bp: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64 * 0.83).collect();
            let a = AlphaStep::new(bp, values).unwrap();
            let back = AlphaStep::from_csv(&a.to_csv(), a.horizon()).unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
