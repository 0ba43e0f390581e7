//! Small statistics toolkit: Gaussian helpers, Kolmogorov–Smirnov distances,
//! sample moments with standard errors and least-squares slopes.

use libm::erf;

/// Asymptotic 95% quantile factor of the one-sample KS statistic.
pub const KS_95: f64 = 1.36;

pub fn normal_pdf(x: f64, var: f64) -> f64 {
    (-x * x / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

pub fn normal_cdf(x: f64, var: f64) -> f64 {
    0.5 * (1.0 + erf(x / (2.0 * var).sqrt()))
}

/// CDF of `|N(0, t)|`.
pub fn half_normal_cdf(r: f64, t: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else {
        erf(r / (2.0 * t).sqrt())
    }
}

/// CDF of `|x + N(0, t)|`, i.e. Brownian motion from `x` reflected at zero.
pub fn reflected_cdf(r: f64, x: f64, t: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let s = t.sqrt();
    let phi = |z: f64| normal_cdf(z, 1.0);
    (phi((r - x) / s) - phi((-r - x) / s)).clamp(0.0, 1.0)
}

/// `sup |F_n − F|` for a sample against a continuous CDF. Sorts a copy.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    ks_sorted(&xs, cdf)
}

pub fn ks_sorted(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// 95% null threshold `1.36/√N`.
pub fn ks_null_quantile(n: usize) -> f64 {
    KS_95 / (n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return Estimate {
            value: f64::NAN,
            std_error: f64::NAN,
        };
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return Estimate {
            value: mean,
            std_error: f64::NAN,
        };
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Estimate {
        value: mean,
        std_error: (var / n).sqrt(),
    }
}

/// Ordinary least squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Quantile by linear interpolation between order statistics.
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let h = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}
