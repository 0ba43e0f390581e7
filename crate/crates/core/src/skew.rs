//! Excursion-sign construction of the skew process and pathwise checks.
//!
//! Every excursion `(g_n, d_n)` of a Brownian path receives a sign
//! `ξ_n = +1` iff `u_n < α(g_n)`, where `u_n` is a uniform keyed by the
//! excursion index. The skew process is `X = ξ·|B|`. Since the sign is
//! chosen where the excursion starts, `X` is continuous even when an
//! excursion straddles a breakpoint of `α`.
//!
//! Relative to a signed input path `Y`, the step process `Z = ξ·sgn(Y)`
//! satisfies `Z·Y = ξ·|Y|`; for `Y = B` this is the skew process itself.

use serde::{Deserialize, Serialize};

use crate::alpha::AlphaStep;
use crate::error::{Error, Result};
use crate::excursion::{decompose_excursions, ExcursionSet};
use crate::local_time::LocalTimeCurve;
use crate::path::{quadratic_variation, stieltjes_integral, SamplePath};
use crate::rng::{Purpose, RngSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignRecord {
    pub excursion: usize,
    /// Index of the `α` piece containing the excursion start.
    pub interval: usize,
    /// `None` for the initial segment of a path started away from zero.
    pub uniform: Option<f64>,
    pub xi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignAssignment {
    records: Vec<SignRecord>,
    xi: SamplePath,
    z: SamplePath,
}

impl SignAssignment {
    pub fn records(&self) -> &[SignRecord] {
        &self.records
    }

    /// `ξ` on the grid: the sign given to the owning excursion, 0 on the zero set.
    pub fn xi(&self) -> &SamplePath {
        &self.xi
    }

    /// `Z = ξ·sgn(path)` on the grid, 0 on the zero set.
    pub fn z(&self) -> &SamplePath {
        &self.z
    }

    /// Fraction of excursions whose sign differs from `other`'s.
    pub fn disagreement(&self, other: &SignAssignment) -> f64 {
        let n = self.records.len().min(other.records.len());
        if n == 0 {
            return 0.0;
        }
        let d = self.records[..n]
            .iter()
            .zip(&other.records[..n])
            .filter(|(a, b)| a.xi != b.xi)
            .count();
        d as f64 / n as f64
    }
}

fn check_horizon(excursions: &ExcursionSet, horizon: f64) -> Result<()> {
    let h = excursions.grid().horizon();
    if (h - horizon).abs() > 1e-9 * h.abs().max(1.0) {
        return Err(Error::HorizonMismatch(h, horizon));
    }
    Ok(())
}

/// Draws one sign per excursion, with `alpha_at(g)` returning the piece index
/// and skew value in force at the excursion start `g`.
pub fn draw_signs_with(
    excursions: &ExcursionSet,
    rng: &RngSpec,
    alpha_at: impl Fn(f64) -> Result<(usize, f64)>,
) -> Result<SignAssignment> {
    let grid = *excursions.grid();
    let mut records = Vec::with_capacity(excursions.len());
    for (n, e) in excursions.excursions().iter().enumerate() {
        let (interval, a) = alpha_at(e.start)?;
        let record = if e.starts_at_zero {
            let u = rng.uniform(Purpose::Signs, n as u64);
            SignRecord {
                excursion: n,
                interval,
                uniform: Some(u),
                xi: if u < a { 1.0 } else { -1.0 },
            }
        } else {
            // a path started at x ≠ 0 keeps the sign of x until it first hits zero
            SignRecord {
                excursion: n,
                interval,
                uniform: None,
                xi: e.sign,
            }
        };
        records.push(record);
    }
    let mut xi = vec![0.0; grid.points()];
    let mut z = vec![0.0; grid.points()];
    for k in 0..grid.points() {
        if let Some(n) = excursions.owner(k) {
            xi[k] = records[n].xi;
            z[k] = records[n].xi * excursions.excursions()[n].sign;
        }
    }
    Ok(SignAssignment {
        records,
        xi: SamplePath::new(grid, xi)?,
        z: SamplePath::new(grid, z)?,
    })
}

pub fn draw_signs(excursions: &ExcursionSet, alpha: &AlphaStep, rng: &RngSpec) -> Result<SignAssignment> {
    check_horizon(excursions, alpha.horizon())?;
    draw_signs_with(excursions, rng, |g| {
        let i = alpha.interval_index(g);
        Ok((i, alpha.values()[i]))
    })
}

/// `X = ξ·|B|` from already drawn signs.
pub fn apply_signs(bm: &SamplePath, signs: &SignAssignment) -> SamplePath {
    let xi = signs.xi().values();
    let values = bm.values().iter().zip(xi).map(|(b, s)| s * b.abs()).collect();
    SamplePath::new(*bm.grid(), values).expect("same grid, finite values")
}

/// The skew process driven by `bm` (started at `bm(0)`) and its signs.
pub fn construct_isbm(bm: &SamplePath, alpha: &AlphaStep, rng: &RngSpec) -> Result<(SamplePath, SignAssignment)> {
    let excursions = decompose_excursions(bm);
    let signs = draw_signs(&excursions, alpha, rng)?;
    Ok((apply_signs(bm, &signs), signs))
}

/// A nonnegative path split as `X = N + A` with `A` increasing only on `{X = 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaDecomposition {
    x: SamplePath,
    n: SamplePath,
    a: SamplePath,
    eps_a: f64,
}

impl SigmaDecomposition {
    /// Validates the decomposition. `eps_a` is the level above which `X`
    /// counts as away from zero over a whole step.
    pub fn new(x: SamplePath, n: SamplePath, a: SamplePath, eps_a: f64) -> Result<Self> {
        x.ensure_same_grid(&n)?;
        x.ensure_same_grid(&a)?;
        if let Some((k, &v)) = x.values().iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::NegativePath { index: k, value: v });
        }
        let scale = x.sup_abs().max(n.sup_abs()).max(a.sup_abs()).max(1.0);
        let tol = 1e-9 * scale;
        let (xv, nv, av) = (x.values(), n.values(), a.values());
        if let Some(k) = (0..xv.len()).find(|&k| (xv[k] - nv[k] - av[k]).abs() > tol) {
            return Err(Error::SigmaInvariant(format!("X ≠ N + A at index {k}")));
        }
        if av[0].abs() > tol {
            return Err(Error::SigmaInvariant(format!("A(0) = {} ≠ 0", av[0])));
        }
        for j in 0..av.len() - 1 {
            let d = av[j + 1] - av[j];
            if d < -tol {
                return Err(Error::SigmaInvariant(format!("A decreases at index {j}")));
            }
            if xv[j].min(xv[j + 1]) > eps_a && d > tol {
                return Err(Error::SigmaInvariant(format!(
                    "A increases at index {j} while X stays above {eps_a}"
                )));
            }
        }
        Ok(Self { x, n, a, eps_a })
    }

    /// Discrete Tanaka split of `|Y|`: `N = ∫ sgn(Y) dY`, `A = |Y| − N`.
    /// Away-from-zero steps are those whose endpoints both exceed the
    /// largest increment of `Y`, so no crossing can hide inside them.
    pub fn tanaka(y: &SamplePath) -> Result<Self> {
        let x = y.reflect();
        let n = stieltjes_integral(&y.map(sgn), y)?;
        let a = x.zip_with(&n, |p, q| p - q)?;
        let max_step = y
            .values()
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max);
        Self::new(x, n, a, max_step)
    }

    pub fn x(&self) -> &SamplePath {
        &self.x
    }

    pub fn n(&self) -> &SamplePath {
        &self.n
    }

    pub fn a(&self) -> &SamplePath {
        &self.a
    }

    pub fn eps_a(&self) -> f64 {
        self.eps_a
    }
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Signed martingale `M` with `|M| = X`: the path is cut at grid zeros and at
/// every step where `A` grows, and each piece gets an independent fair sign.
pub fn unfold_submartingale(sigma: &SigmaDecomposition, rng: &RngSpec) -> Result<SamplePath> {
    let x = sigma.x().values();
    let a = sigma.a().values();
    let tol = 1e-12 * sigma.x().sup_abs().max(1.0);
    let mut values = Vec::with_capacity(x.len());
    let mut piece = 0u64;
    let mut sign = fair_sign(rng, piece);
    for k in 0..x.len() {
        if k > 0 && (a[k] - a[k - 1] > tol || x[k - 1] == 0.0) {
            piece += 1;
            sign = fair_sign(rng, piece);
        }
        values.push(if x[k] == 0.0 { 0.0 } else { sign * x[k] });
    }
    SamplePath::new(*sigma.x().grid(), values)
}

fn fair_sign(rng: &RngSpec, counter: u64) -> f64 {
    if rng.uniform(Purpose::Unfold, counter) < 0.5 {
        1.0
    } else {
        -1.0
    }
}

/// `R = k·Y − k(0)·Y(0) − ∫ k dY` (left-point rule). `k` must be constant
/// on every excursion of `Y`.
pub fn balayage_residual(k: &SamplePath, y: &SamplePath) -> Result<SamplePath> {
    k.ensure_same_grid(y)?;
    let excursions = decompose_excursions(y);
    let kv = k.values();
    for j in 1..kv.len() {
        if let (Some(a), Some(b)) = (excursions.owner(j - 1), excursions.owner(j)) {
            if a == b && kv[j] != kv[j - 1] {
                return Err(Error::NotConstantOnExcursion { index: j });
            }
        }
    }
    let integral = stieltjes_integral(k, y)?;
    let k0y0 = kv[0] * y.first();
    let values = (0..kv.len())
        .map(|j| kv[j] * y.at(j) - k0y0 - integral.at(j))
        .collect();
    SamplePath::new(*y.grid(), values)
}

fn skew_weight(alpha: &AlphaStep) -> impl Fn(f64) -> f64 + '_ {
    move |t| 2.0 * alpha.eval(t) - 1.0
}

/// `sup_t |Z_t Y_t − Z_0 Y_0 − ∫_0^t Z dY − ∫_0^t (2α − 1) dL̂|`, the local
/// time term summed over the jump times of `L̂`.
pub fn skew_identity_residual(
    signs: &SignAssignment,
    y: &SamplePath,
    alpha: &AlphaStep,
    l: &LocalTimeCurve,
) -> Result<f64> {
    let z = signs.z();
    z.ensure_same_grid(y)?;
    if l.grid() != y.grid() {
        return Err(Error::GridMismatch);
    }
    let integral = stieltjes_integral(z, y)?;
    let lt = l.weighted_integral(skew_weight(alpha));
    let zy0 = z.first() * y.first();
    let mut sup = 0.0_f64;
    for k in 0..y.len() {
        let r = z.at(k) * y.at(k) - zy0 - integral.at(k) - lt[k];
        sup = sup.max(r.abs());
    }
    Ok(sup)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdeResidual {
    /// `sup_t |X_t − x0 − W_t − ∫_0^t (2α − 1) dL̂|`.
    pub residual: f64,
    /// Realized quadratic variation of the reconstructed driver at the horizon.
    pub driver_qv: f64,
    /// Whether `driver_qv` lies within 5% of the elapsed time.
    pub driver_qv_ok: bool,
}

/// Reconstructs the driver `W = Σ sgn(X_j) sgn(B_j) ΔB_j` and measures how far
/// `X` is from solving the equation with the estimated local time.
pub fn sde_residual(
    x: &SamplePath,
    bm: &SamplePath,
    alpha: &AlphaStep,
    l: &LocalTimeCurve,
    x0: f64,
) -> Result<SdeResidual> {
    x.ensure_same_grid(bm)?;
    if l.grid() != x.grid() {
        return Err(Error::GridMismatch);
    }
    let integrand = x.zip_with(bm, |a, b| sgn(a) * sgn(b))?;
    let w = stieltjes_integral(&integrand, bm)?;
    let lt = l.weighted_integral(skew_weight(alpha));
    let mut sup = 0.0_f64;
    for k in 0..x.len() {
        sup = sup.max((x.at(k) - x0 - w.at(k) - lt[k]).abs());
    }
    let elapsed = x.grid().horizon() - x.grid().origin();
    let qv = quadratic_variation(&w).last();
    Ok(SdeResidual {
        residual: sup,
        driver_qv: qv,
        driver_qv_ok: (qv - elapsed).abs() <= 0.05 * elapsed,
    })
}
