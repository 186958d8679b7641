//! Closed-form throughput bounds and the degree-based ASPL lower bound.

use serde::{Deserialize, Serialize};

use crate::CoreError;

/// `d*` as an exact fraction `(numerator, denominator)`.
///
/// `k` is the largest level with a nonnegative remainder
/// `R = N - 1 - sum_{j<k} r (r-1)^(j-1)`; the first `k - 1` levels are full
/// and the remaining `R` nodes sit at distance `k`.
pub fn aspl_lower_bound_exact(n: u64, r: u64) -> Result<(u128, u128), CoreError> {
    if n < 2 || r == 0 || r >= n {
        return Err(CoreError::InvalidDegree);
    }
    let total = (n - 1) as u128;
    if r == 1 {
        // a single edge; larger graphs cannot be 1-regular and connected
        return if n == 2 { Ok((1, 1)) } else { Err(CoreError::InvalidDegree) };
    }
    let r = r as u128;
    let mut covered: u128 = 0;
    let mut weighted: u128 = 0;
    let mut level: u128 = 1;
    let mut width = r;
    // grow while the next full level still fits
    while covered + width <= total {
        covered += width;
        weighted += level * width;
        level += 1;
        width = width.saturating_mul(r - 1);
    }
    let rem = total - covered;
    let num = weighted + level * rem;
    let g = gcd(num, total);
    Ok((num / g, total / g))
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn aspl_lower_bound(n: u64, r: u64) -> Result<f64, CoreError> {
    let (p, q) = aspl_lower_bound_exact(n, r)?;
    Ok(p as f64 / q as f64)
}

/// `N r / (<D> f)`, with `<D>` the measured ASPL if given and `d*` otherwise.
pub fn homog_throughput_bound(n: u64, r: u64, f: f64, aspl: Option<f64>) -> Result<f64, CoreError> {
    if !(f > 0.0) {
        return Err(CoreError::NoFlows);
    }
    let d = match aspl {
        Some(d) if d > 0.0 => d,
        Some(_) => return Err(CoreError::InvalidInput("ASPL must be positive".into())),
        None => aspl_lower_bound(n, r)?,
    };
    Ok((n * r) as f64 / (d * f))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeteroBound {
    pub path_bound: f64,
    pub cut_bound: f64,
    pub min: f64,
}

/// Path bound `C / (D (n1 + n2))` and cut bound `C_bar (n1 + n2) / (2 n1 n2)`.
pub fn hetero_throughput_bound(c: f64, c_bar: f64, n1: f64, n2: f64, d: f64) -> Result<HeteroBound, CoreError> {
    if !(c > 0.0 && c_bar >= 0.0 && n1 > 0.0 && n2 > 0.0 && d > 0.0) {
        return Err(CoreError::InvalidInput("bound inputs must be positive".into()));
    }
    let path_bound = c / (d * (n1 + n2));
    let cut_bound = c_bar * (n1 + n2) / (2.0 * n1 * n2);
    Ok(HeteroBound { path_bound, cut_bound, min: path_bound.min(cut_bound) })
}

/// Cut capacity below which throughput must fall under `t_star`.
pub fn drop_threshold(t_star: f64, n1: f64, n2: f64) -> f64 {
    t_star * 2.0 * n1 * n2 / (n1 + n2)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub d_star: Option<f64>,
    pub homog_bound: Option<f64>,
    pub path_bound: Option<f64>,
    pub cut_bound: Option<f64>,
    pub hetero_bound: Option<f64>,
    pub c_bar_star: Option<f64>,
}
