//! Transition kernel `p^α(s, t; x, y)` of the inhomogeneous skew Brownian
//! motion, evaluated by deterministic quadrature, plus the constant-skew
//! closed forms and the semigroup / normalization / conditional-mean checks.
//!
//! With `τ = t − s` and `c(u) = [1 + sgn(y)(2α(s+u) − 1)]/2` the kernel is
//!
//! ```text
//! p = ∫_0^τ c(u) |y|/π · e^{−y²/2(τ−u)} e^{−x²/2u} / (√u (τ−u)^{3/2}) du
//!     + [φ_τ(y−x) − φ_τ(y+x)]·1{xy > 0}
//! ```
//!
//! The first term is the last-zero decomposition: the path sits at zero at
//! time `s+u`, then makes one excursion to `y` whose sign is drawn with the
//! skew in force when it starts.

use serde::{Deserialize, Serialize};

use crate::alpha::AlphaStep;
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions, QuadResult};
use crate::stats::{normal_cdf, normal_pdf};

const Y_ZERO_OFFSET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelQuery {
    pub s: f64,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub quad_tol: f64,
    pub max_subdiv: usize,
}

impl KernelQuery {
    pub fn new(s: f64, t: f64, x: f64, y: f64) -> Self {
        Self {
            s,
            t,
            x,
            y,
            quad_tol: 1e-8,
            max_subdiv: 64,
        }
    }

    pub fn with_tol(mut self, quad_tol: f64) -> Self {
        self.quad_tol = quad_tol;
        self
    }

    pub fn at(&self, x: f64, y: f64) -> Self {
        Self { x, y, ..*self }
    }

    pub fn tau(&self) -> f64 {
        self.t - self.s
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > self.s) {
            return Err(Error::InvalidQuery(format!("need t > s, got s={} t={}", self.s, self.t)));
        }
        if !(self.quad_tol > 0.0) {
            return Err(Error::InvalidQuery(format!("quad_tol must be > 0, got {}", self.quad_tol)));
        }
        if ![self.s, self.t, self.x, self.y].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidQuery("non-finite query argument".into()));
        }
        Ok(())
    }

    fn options(&self) -> QuadOptions {
        QuadOptions {
            rel_tol: self.quad_tol,
            abs_tol: 1e-300,
            max_subdiv: self.max_subdiv,
        }
    }
}

/// Kernel value with the quadrature diagnostics of its integral term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityValue {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

fn check_alpha_covers(alpha: &AlphaStep, s: f64, t: f64) -> Result<()> {
    let h = alpha.horizon();
    if s < 0.0 || t > h * (1.0 + 1e-12) {
        return Err(Error::InvalidQuery(format!(
            "skew function on [0, {h}] does not cover [{s}, {t}]"
        )));
    }
    Ok(())
}

/// Sign-weighted last-zero integral for `y ≠ 0`.
///
/// The time axis is split at `τ/2`: `u = v²` on the first half removes the
/// `1/√u` singularity, and `u = τ − w²` on the second turns the
/// `(τ−u)^{−3/2}` blow-up into a bounded bump of width `~|y|` near `w = 0`,
/// which is resolved by geometric split points `|y|·4^k`.
fn last_zero_term(q: &KernelQuery, shifted: &AlphaStep) -> Result<QuadResult> {
    let tau = q.tau();
    let (x, y) = (q.x, q.y);
    let h = (0.5 * tau).sqrt();
    let sgn = y.signum();
    let ay = y.abs();
    let x2 = x * x;
    let weight = |u: f64| 0.5 * (1.0 + sgn * (2.0 * shifted.eval(u) - 1.0));

    // skip the whole integral when every excursion points away from y
    if shifted.pieces_on(0.0, tau).iter().all(|p| weight(p.0) == 0.0) {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
        });
    }

    let mut v_points = vec![0.0, h];
    let mut w_points = vec![0.0, h];
    let inner = shifted.breakpoints();
    for &b in &inner[1..inner.len() - 1] {
        if b > 0.0 && b < tau {
            if b <= 0.5 * tau {
                v_points.push(b.sqrt());
            } else {
                w_points.push((tau - b).sqrt());
            }
        }
    }
    for f in [0.25, 0.5, 1.0, 2.0] {
        let v = f * x.abs();
        if v > 0.0 && v < h {
            v_points.push(v);
        }
    }
    let mut w = 0.25 * ay;
    while w < h {
        w_points.push(w);
        w *= 4.0;
    }
    for pts in [&mut v_points, &mut w_points] {
        pts.sort_by(f64::total_cmp);
        pts.dedup();
    }

    let coef = 2.0 * ay / std::f64::consts::PI;
    let x_term = |u: f64| if x2 == 0.0 { 0.0 } else { x2 / (2.0 * u) };
    let near_start = |v: f64| -> Result<f64> {
        let u = v * v;
        let c = weight(u);
        if c == 0.0 {
            return Ok(0.0);
        }
        let r = tau - u;
        Ok(coef * c * (-(y * y) / (2.0 * r) - x_term(u)).exp() / (r * r.sqrt()))
    };
    let near_end = |w: f64| -> Result<f64> {
        if w <= 0.0 {
            return Ok(0.0);
        }
        let u = tau - w * w;
        let c = weight(u);
        if c == 0.0 {
            return Ok(0.0);
        }
        Ok(coef * c * (-(y * y) / (2.0 * w * w) - x_term(u)).exp() / (w * w * u.sqrt()))
    };
    let opts = q.options();
    let a = integrate(near_start, &v_points, &opts)?;
    let b = integrate(
        near_end,
        &w_points,
        &QuadOptions {
            max_subdiv: opts.max_subdiv - a.subdivisions,
            ..opts
        },
    )
    .map_err(|e| match e {
        Error::Quadrature {
            estimate,
            error_estimate,
            subdivisions,
        } => Error::Quadrature {
            estimate: estimate + a.value,
            error_estimate: error_estimate + a.error_estimate,
            subdivisions: subdivisions + a.subdivisions,
        },
        other => other,
    })?;
    Ok(QuadResult {
        value: a.value + b.value,
        error_estimate: a.error_estimate + b.error_estimate,
        subdivisions: a.subdivisions + b.subdivisions,
    })
}

fn density_nonzero_y(q: &KernelQuery, shifted: &AlphaStep) -> Result<DensityValue> {
    let tau = q.tau();
    let first = last_zero_term(q, shifted)?;
    let direct = if q.x * q.y > 0.0 {
        normal_pdf(q.y - q.x, tau) - normal_pdf(q.y + q.x, tau)
    } else {
        0.0
    };
    Ok(DensityValue {
        value: (first.value + direct).max(0.0),
        error_estimate: first.error_estimate,
        subdivisions: first.subdivisions,
    })
}

/// `p^α(s, t; x, y)` with quadrature diagnostics. At `y = 0` the kernel is
/// the average of its one-sided limits, taken at `y = ±10⁻⁶·√(t−s)`.
pub fn transition_density_detailed(q: &KernelQuery, alpha: &AlphaStep) -> Result<DensityValue> {
    q.validate()?;
    check_alpha_covers(alpha, q.s, q.t)?;
    let shifted = alpha.shift(q.s)?;
    if q.y == 0.0 {
        let d = Y_ZERO_OFFSET * q.tau().sqrt();
        let hi = density_nonzero_y(&q.at(q.x, d), &shifted)?;
        let lo = density_nonzero_y(&q.at(q.x, -d), &shifted)?;
        return Ok(DensityValue {
            value: 0.5 * (hi.value + lo.value),
            error_estimate: 0.5 * (hi.error_estimate + lo.error_estimate),
            subdivisions: hi.subdivisions + lo.subdivisions,
        });
    }
    density_nonzero_y(q, &shifted)
}

pub fn transition_density(q: &KernelQuery, alpha: &AlphaStep) -> Result<f64> {
    transition_density_detailed(q, alpha).map(|d| d.value)
}

fn check_constant(tau: f64, a: f64) -> Result<()> {
    if !(tau > 0.0) {
        return Err(Error::InvalidQuery(format!("tau must be > 0, got {tau}")));
    }
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::InvalidAlpha(format!("value {a} outside [0, 1]")));
    }
    Ok(())
}

/// Closed-form density of skew Brownian motion with constant parameter `a`.
pub fn constant_alpha_density(tau: f64, x: f64, y: f64, a: f64) -> Result<f64> {
    check_constant(tau, a)?;
    let sgn = if y == 0.0 { 0.0 } else { y.signum() };
    let mut p = (1.0 + sgn * (2.0 * a - 1.0)) * normal_pdf(x.abs() + y.abs(), tau);
    if x * y > 0.0 {
        p += normal_pdf(y - x, tau) - normal_pdf(y + x, tau);
    }
    Ok(p)
}

/// Closed-form distribution function `P(X_τ ≤ y)` for constant skew `a`.
pub fn constant_alpha_cdf(tau: f64, x: f64, y: f64, a: f64) -> Result<f64> {
    check_constant(tau, a)?;
    let s = tau.sqrt();
    let phi = |z: f64| normal_cdf(z, 1.0);
    let ax = x.abs();
    let m = y.min(0.0);
    let mut f = (2.0 - 2.0 * a) * phi((m - ax) / s);
    if x < 0.0 {
        f += phi((m - x) / s) - phi((m + x) / s);
    }
    if y > 0.0 {
        f += 2.0 * a * (phi((ax + y) / s) - phi(ax / s));
        if x > 0.0 {
            f += (phi((y - x) / s) - phi(-x / s)) - (phi((y + x) / s) - phi(x / s));
        }
    }
    Ok(f.clamp(0.0, 1.0))
}

fn spatial_cutoff(x: f64, tau: f64) -> f64 {
    x.abs() + 8.0 * tau.sqrt()
}

fn sorted_points(mut pts: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    pts.retain(|p| *p > lo && *p < hi);
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `∫ p^α(s, t; x, y) dy` over `[−c, c]`, `c = |x| + 8√(t−s)`.
pub fn density_normalization(s: f64, t: f64, x: f64, alpha: &AlphaStep) -> Result<f64> {
    density_normalization_with(&KernelQuery::new(s, t, x, 0.0), alpha)
}

pub fn density_normalization_with(q: &KernelQuery, alpha: &AlphaStep) -> Result<f64> {
    q.validate()?;
    let c = spatial_cutoff(q.x, q.tau());
    let points = sorted_points(vec![0.0, q.x], -c, c);
    let r = integrate(|y| transition_density(&q.at(q.x, y), alpha), &points, &q.options())?;
    Ok(r.value)
}

/// `|∫ p(s,r;x,z) p(r,t;z,y) dz − p(s,t;x,y)|` over `z ∈ [−c, c]`.
pub fn chapman_kolmogorov_residual(s: f64, r: f64, t: f64, x: f64, y: f64, alpha: &AlphaStep) -> Result<f64> {
    if !(s < r && r < t) {
        return Err(Error::InvalidQuery(format!("need s < r < t, got {s}, {r}, {t}")));
    }
    let base = KernelQuery::new(s, t, x, y);
    let first = KernelQuery::new(s, r, x, 0.0);
    let second = KernelQuery::new(r, t, 0.0, y);
    let c = spatial_cutoff(x, t - s).max(y.abs() + 8.0 * (t - r).sqrt());
    let points = sorted_points(vec![0.0, x, y], -c, c);
    let composed = integrate(
        |z| Ok(transition_density(&first.at(x, z), alpha)? * transition_density(&second.at(z, y), alpha)?),
        &points,
        &base.options(),
    )?;
    Ok((composed.value - transition_density(&base, alpha)?).abs())
}

/// `xs + ∫_0^{t−s} (2α(s+u) − 1) e^{−xs²/2u} / √(2πu) du`.
pub fn conditional_mean(s: f64, t: f64, xs: f64, alpha: &AlphaStep) -> Result<f64> {
    conditional_mean_with(&KernelQuery::new(s, t, xs, 0.0), alpha)
}

pub fn conditional_mean_with(q: &KernelQuery, alpha: &AlphaStep) -> Result<f64> {
    q.validate()?;
    check_alpha_covers(alpha, q.s, q.t)?;
    let shifted = alpha.shift(q.s)?;
    let tau = q.tau();
    let root = tau.sqrt();
    let x2 = q.x * q.x;
    let mut pts: Vec<f64> = shifted.breakpoints()[1..shifted.breakpoints().len() - 1]
        .iter()
        .filter(|&&b| b < tau)
        .map(|b| b.sqrt())
        .collect();
    pts.extend([0.25, 0.5, 1.0, 2.0].map(|f| f * q.x.abs()));
    let points = sorted_points(pts, 0.0, root);
    let norm = 2.0 / (2.0 * std::f64::consts::PI).sqrt();
    let integrand = |v: f64| -> Result<f64> {
        let u = v * v;
        let k = 2.0 * shifted.eval(u) - 1.0;
        if k == 0.0 || v == 0.0 {
            return Ok(0.0);
        }
        let ex = if x2 == 0.0 { 0.0 } else { x2 / (2.0 * u) };
        Ok(norm * k * (-ex).exp())
    };
    let opts = QuadOptions {
        abs_tol: q.quad_tol * 1e-4 * root,
        ..q.options()
    };
    Ok(q.x + integrate(integrand, &points, &opts)?.value)
}

/// CDF of `X_t` given `X_s = x`, tabulated at the sorted nodes `ys` by
/// integrating the kernel cell by cell from `ys[0]` (mass below `ys[0]` is
/// taken as zero).
pub fn kernel_cdf_table(q: &KernelQuery, alpha: &AlphaStep, ys: &[f64]) -> Result<Vec<f64>> {
    q.validate()?;
    let mut out = Vec::with_capacity(ys.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in ys.windows(2) {
        let r = integrate(|y| transition_density(&q.at(q.x, y), alpha), &[w[0], w[1]], &q.options())?;
        acc += r.value;
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn constant(a: f64) -> AlphaStep {
        AlphaStep::constant(a, 1.0).unwrap()
    }

    fn random_step(rng: &mut ChaCha8Rng, pieces: usize, horizon: f64) -> AlphaStep {
        let bp = (0..=pieces).map(|i| horizon * i as f64 / pieces as f64).collect();
        let vals = (0..pieces).map(|_| rng.random::<f64>()).collect();
        AlphaStep::new(bp, vals).unwrap()
    }

    fn gauss(x: f64, var: f64) -> f64 {
        (-x * x / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
    }

    #[test]
    fn density_examples() {
        let p = transition_density(&KernelQuery::new(0.0, 1.0, 0.0, 0.5), &constant(0.5)).unwrap();
        assert!((p - 0.3520653).abs() < 1e-7, "{p}");
        let p = transition_density(&KernelQuery::new(0.0, 1.0, 0.0, 1.0), &constant(1.0)).unwrap();
        assert!((p - 0.4839414).abs() < 1e-7, "{p}");
        let p = transition_density(&KernelQuery::new(0.0, 1.0, 0.0, -1.0), &constant(1.0)).unwrap();
        assert_eq!(p, 0.0);
        let q = KernelQuery::new(0.0, 1.0, 0.3, -0.4);
        let p = transition_density(&q, &constant(0.7)).unwrap();
        let c = constant_alpha_density(1.0, 0.3, -0.4, 0.7).unwrap();
        assert!((p - c).abs() <= 1e-8 * c, "{p} vs {c}");
    }

    #[test]
    fn closed_form_examples() {
        assert!((constant_alpha_density(1.0, 0.3, -0.4, 0.5).unwrap() - 0.3122539).abs() < 1e-7);
        assert!((constant_alpha_density(1.0, 0.0, 1.0, 0.7).unwrap() - 0.3387590).abs() < 1e-7);
        for y in [0.1, 0.9, 2.5] {
            let p = constant_alpha_density(2.0, 0.0, y, 1.0).unwrap();
            assert!((p - 2.0 * gauss(y, 2.0)).abs() < 1e-15);
        }
        for (x, y) in [(0.3, -0.4), (1.0, 2.0), (-0.5, -0.1), (0.0, 0.7)] {
            let p = constant_alpha_density(1.5, x, y, 0.5).unwrap();
            assert!((p - gauss(y - x, 1.5)).abs() < 1e-15);
        }
        assert!(constant_alpha_density(0.0, 0.0, 1.0, 0.5).is_err());
        assert!(constant_alpha_density(1.0, 0.0, 1.0, 1.2).is_err());
    }

    #[test]
    fn closed_form_cdf_integrates_the_density() {
        // independent check: Simpson quadrature of the closed-form density
        for &(tau, x, a) in &[(1.0, 0.3, 0.7), (0.5, -0.8, 0.2), (2.0, 0.0, 0.9), (1.0, 1.2, 0.0)] {
            for &y in &[-2.0, -0.3, 0.0, 0.4, 1.7] {
                let lo = -12.0;
                let mut total = 0.0;
                // integrate separately on each side of zero, where the density jumps
                let mut simpson = |a0: f64, b0: f64| {
                    let n = 20_000;
                    let h = (b0 - a0) / n as f64;
                    let f = |z: f64| constant_alpha_density(tau, x, z, a).unwrap();
                    let mut sum = f(a0) + f(b0);
                    for i in 1..n {
                        sum += f(a0 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
                    }
                    total += sum * h / 3.0;
                };
                if y <= 0.0 {
                    simpson(lo, y - 1e-12);
                } else {
                    simpson(lo, -1e-12);
                    simpson(1e-12, y);
                }
                let cdf = constant_alpha_cdf(tau, x, y, a).unwrap();
                assert!((cdf - total).abs() < 1e-9, "tau={tau} x={x} a={a} y={y}: {cdf} vs {total}");
            }
        }
    }

    #[test]
    fn zero_y_is_average_of_limits() {
        let a = constant(0.8);
        let p0 = transition_density(&KernelQuery::new(0.0, 1.0, 0.4, 0.0), &a).unwrap();
        let expect = gauss(0.4, 1.0);
        assert!((p0 - expect).abs() < 1e-6, "{p0} vs {expect}");
    }

    #[test]
    fn rejects_bad_queries() {
        assert!(matches!(
            transition_density(&KernelQuery::new(1.0, 1.0, 0.0, 0.5), &constant(0.5)),
            Err(Error::InvalidQuery(_))
        ));
        assert!(transition_density(&KernelQuery::new(0.0, 1.0, 0.0, 0.5).with_tol(0.0), &constant(0.5)).is_err());
        assert!(transition_density(&KernelQuery::new(0.0, 2.0, 0.0, 0.5), &constant(0.5)).is_err());
    }

    #[test]
    fn quadrature_failure_is_reported() {
        let mut q = KernelQuery::new(0.0, 1.0, 0.3, 0.2).with_tol(1e-15);
        q.max_subdiv = 0;
        let step = AlphaStep::new(vec![0.0, 0.37, 1.0], vec![0.9, 0.1]).unwrap();
        assert!(matches!(
            transition_density(&q, &step),
            Err(Error::Quadrature { .. })
        ));
    }

    #[test]
    fn spatial_flip_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let alpha = random_step(&mut rng, 6, 1.0);
            let flipped = AlphaStep::new(
                alpha.breakpoints().to_vec(),
                alpha.values().iter().map(|a| 1.0 - a).collect(),
            )
            .unwrap();
            let s = rng.random::<f64>() * 0.5;
            let t = s + 0.1 + rng.random::<f64>() * (0.9 - s);
            let x = rng.random_range(-1.5..1.5);
            let y = rng.random_range(-1.5..1.5);
            let p = transition_density(&KernelQuery::new(s, t, x, y), &alpha).unwrap();
            let pf = transition_density(&KernelQuery::new(s, t, -x, -y), &flipped).unwrap();
            assert!((p - pf).abs() < 1e-8, "{p} vs {pf}");
        }
    }

    #[test]
    fn nonnegative_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let alphas: Vec<AlphaStep> = (0..10).map(|_| random_step(&mut rng, 8, 1.0)).collect();
        for i in 0..10_000 {
            let s = rng.random::<f64>() * 0.9;
            let t = s + 1e-3 + rng.random::<f64>() * (1.0 - s - 1e-3);
            let q = KernelQuery::new(s, t, rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let p = transition_density(&q, &alphas[i % 10]).unwrap();
            assert!(p >= 0.0 && p.is_finite());
        }
    }

    #[test]
    fn normalization_examples() {
        let n = density_normalization(0.0, 1.0, 0.0, &constant(0.5)).unwrap();
        assert!((n - 1.0).abs() < 1e-8, "{n}");
        let n = density_normalization(0.0, 1.0, 0.0, &constant(1.0)).unwrap();
        assert!((n - 1.0).abs() < 1e-6, "{n}");
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let step = random_step(&mut rng, 4, 1.0);
        let n = density_normalization(0.0, 1.0, 0.2, &step).unwrap();
        assert!((n - 1.0).abs() < 1e-5, "{n}");
    }

    #[test]
    fn chapman_kolmogorov_examples() {
        let r = chapman_kolmogorov_residual(0.0, 0.5, 1.0, 0.3, -0.2, &constant(0.5)).unwrap();
        assert!(r < 1e-6, "{r}");
        let r = chapman_kolmogorov_residual(0.0, 0.5, 1.0, 0.0, 0.8, &constant(0.7)).unwrap();
        assert!(r < 1e-4, "{r}");
        let step = AlphaStep::new(vec![0.0, 0.5, 1.0], vec![0.9, 0.1]).unwrap();
        let r = chapman_kolmogorov_residual(0.1, 0.5, 0.9, -0.3, 0.4, &step).unwrap();
        assert!(r < 1e-4, "{r}");
        assert!(chapman_kolmogorov_residual(0.5, 0.5, 1.0, 0.0, 0.0, &step).is_err());
    }

    #[test]
    fn conditional_mean_examples() {
        assert_eq!(conditional_mean(0.2, 0.9, 0.37, &constant(0.5)).unwrap(), 0.37);
        let m = conditional_mean(0.0, 1.0, 0.0, &constant(1.0)).unwrap();
        assert!((m - 0.7978846).abs() < 1e-7, "{m}");
        let m = conditional_mean(0.0, 1.0, 0.0, &constant(0.0)).unwrap();
        assert!((m + 0.7978846).abs() < 1e-7, "{m}");
    }

    #[test]
    fn conditional_mean_matches_first_moment() {
        let step = AlphaStep::new(vec![0.0, 0.3, 0.6, 1.0], vec![0.8, 0.2, 0.65]).unwrap();
        for &(s, t, x) in &[(0.0, 1.0, 0.0), (0.2, 0.9, 0.4), (0.5, 1.0, -0.3)] {
            let q = KernelQuery::new(s, t, x, 0.0);
            let c = spatial_cutoff(x, t - s);
            let first = integrate(
                |y| Ok(y * transition_density(&q.at(x, y), &step)?),
                &sorted_points(vec![0.0, x], -c, c),
                &QuadOptions {
                    abs_tol: 1e-12,
                    ..q.options()
                },
            )
            .unwrap()
            .value;
            let m = conditional_mean(s, t, x, &step).unwrap();
            assert!((first - m).abs() < 1e-5, "s={s} t={t} x={x}: {first} vs {m}");
        }
    }

    #[test]
    fn cdf_table_matches_closed_form() {
        let q = KernelQuery::new(0.0, 1.0, 0.3, 0.0);
        let ys: Vec<f64> = (0..=40).map(|i| -8.3 + i as f64 * 0.415).collect();
        let ys: Vec<f64> = ys.into_iter().chain([0.0]).collect::<Vec<_>>();
        let mut ys = ys;
        ys.sort_by(f64::total_cmp);
        let table = kernel_cdf_table(&q, &constant(0.7), &ys).unwrap();
        for (y, f) in ys.iter().zip(&table) {
            let c = constant_alpha_cdf(1.0, 0.3, *y, 0.7).unwrap();
            assert!((f - c).abs() < 1e-8, "y={y}: {f} vs {c}");
        }
    }
}
