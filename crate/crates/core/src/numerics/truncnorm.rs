//! Error functions and the truncated normal distribution on a finite union
//! of intervals.
//!
//! Interval masses are always formed in log space from upper-tail
//! probabilities on the side of the mean the interval lies on, so that
//! intervals 40 standard deviations out still yield accurate ratios.

use crate::error::{Error, Result};
use crate::model::Region;
use crate::real::Real;

/// Below this argument `erf` is summed from its Maclaurin series and
/// `erfcx(x) = exp(x^2) (1 - erf(x))`; above, `erfcx` comes from the
/// Laplace continued fraction.
const SERIES_CUTOFF: f64 = 1.5;
const MAX_TERMS: usize = 500;

fn erf_series<T: Real>(x: T) -> T {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..MAX_TERMS {
        let nf = T::from_usize(n).unwrap();
        term = -term * x2 / nf;
        let contrib = term / (T::lit(2.0) * nf + T::one());
        sum = sum + contrib;
        if contrib.abs() <= T::epsilon() * sum.abs() * T::lit(0.25) {
            break;
        }
    }
    sum * T::lit(2.0) / T::PI().sqrt()
}

/// Scaled complementary error function `exp(x^2) erfc(x)` for `x >= 1.5`,
/// by modified Lentz evaluation of
/// `1 / (x + (1/2) / (x + 1 / (x + (3/2) / (x + ...))))`.
fn erfcx_cf<T: Real>(x: T) -> T {
    let tiny = T::min_positive_value().sqrt();
    let half = T::lit(0.5);
    let mut f = x;
    let mut c = x;
    let mut d = T::zero();
    for k in 1..MAX_TERMS {
        let a = half * T::from_usize(k).unwrap();
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() <= T::epsilon() {
            break;
        }
    }
    (T::PI().sqrt() * f).recip()
}

/// Scaled complementary error function `exp(x^2) erfc(x)`.
pub fn erfcx<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x < T::zero() {
        // erfcx(-x) = 2 exp(x^2) - erfcx(x)
        return T::lit(2.0) * (x * x).exp() - erfcx(-x);
    }
    if x == T::infinity() {
        return T::zero();
    }
    if x < T::lit(SERIES_CUTOFF) {
        (x * x).exp() * (T::one() - erf_series(x))
    } else {
        erfcx_cf(x)
    }
}

pub fn erf<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    let ax = x.abs();
    let v = if ax < T::lit(SERIES_CUTOFF) {
        erf_series(ax)
    } else if ax == T::infinity() {
        T::one()
    } else {
        T::one() - (-(ax * ax)).exp() * erfcx_cf(ax)
    };
    if x < T::zero() {
        -v
    } else {
        v
    }
}

pub fn erfc<T: Real>(x: T) -> T {
    if x < T::zero() {
        T::lit(2.0) - erfc(-x)
    } else if x < T::lit(SERIES_CUTOFF) {
        T::one() - erf_series(x)
    } else {
        (-(x * x)).exp() * erfcx(x)
    }
}

/// Standard normal CDF.
pub fn normal_cdf<T: Real>(t: T) -> T {
    let s = T::SQRT_2();
    if t < T::zero() {
        T::lit(0.5) * erfc(-t / s)
    } else {
        T::one() - T::lit(0.5) * erfc(t / s)
    }
}

/// `ln P(Z > t)` for `Z ~ N(0, 1)`.
pub fn log_upper_tail<T: Real>(t: T) -> T {
    if t == T::infinity() {
        return T::neg_infinity();
    }
    if t == T::neg_infinity() {
        return T::zero();
    }
    let u = t / T::SQRT_2();
    if t >= T::zero() {
        -(u * u) + (T::lit(0.5) * erfcx(u)).ln()
    } else {
        let lower = T::lit(0.5) * (-(u * u)).exp() * erfcx(-u);
        (-lower).ln_1p()
    }
}

/// `P(0 <= Z <= t)` for `t >= 0`, accurate for small `t`.
fn half_mass<T: Real>(t: T) -> T {
    T::lit(0.5) * erf(t / T::SQRT_2())
}

/// `ln P(l <= Z <= u)` for standardized endpoints `l <= u`.
pub fn log_normal_mass<T: Real>(l: T, u: T) -> T {
    if !(u > l) {
        return T::neg_infinity();
    }
    if l >= T::zero() {
        let ql = log_upper_tail(l);
        let qu = log_upper_tail(u);
        if ql == T::neg_infinity() {
            return ql;
        }
        ql + (-(qu - ql).exp_m1()).ln()
    } else if u <= T::zero() {
        log_normal_mass(-u, -l)
    } else {
        (half_mass(-l) + half_mass(u)).ln()
    }
}

fn log_sum_exp<T: Real>(vals: &[T]) -> T {
    let m = vals.iter().copied().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() {
        return m;
    }
    m + vals.iter().map(|&v| (v - m).exp()).sum::<T>().ln()
}

fn check_inputs<T: Real>(var: T, region: &Region<T>) -> Result<T> {
    if !(var > T::zero()) || !var.is_finite() {
        return Err(Error::InvalidVariance(var.to_f64().unwrap_or(f64::NAN)));
    }
    if region.is_empty() {
        return Err(Error::DegenerateRegion);
    }
    Ok(var.sqrt())
}

/// Shared body of the CDF and survival function: log masses of the whole
/// region and of its part inside `keep`.
fn log_masses<T: Real>(mean: T, sd: T, region: &Region<T>, keep: impl Fn(T, T) -> Option<(T, T)>) -> Result<(T, T)> {
    let mut total = Vec::with_capacity(region.len());
    let mut part = Vec::with_capacity(region.len());
    for iv in region.intervals() {
        let l = (iv.lo - mean) / sd;
        let u = (iv.hi - mean) / sd;
        total.push(log_normal_mass(l, u));
        if let Some((lo, hi)) = keep(iv.lo, iv.hi) {
            part.push(log_normal_mass((lo - mean) / sd, (hi - mean) / sd));
        }
    }
    let lt = log_sum_exp(&total);
    if lt == T::neg_infinity() || lt.is_nan() {
        return Err(Error::DegenerateRegion);
    }
    Ok((log_sum_exp(&part), lt))
}

/// CDF at `x` of `N(mean, var)` truncated to `region`.
pub fn truncnorm_cdf<T: Real>(mean: T, var: T, region: &Region<T>, x: T) -> Result<T> {
    let sd = check_inputs(var, region)?;
    let (lp, lt) = log_masses(mean, sd, region, |lo, hi| if x <= lo { None } else { Some((lo, hi.min(x))) })?;
    Ok((lp - lt).exp().min(T::one()).max(T::zero()))
}

/// Survival function `1 - CDF` at `x`, computed directly (not by
/// subtraction) so that small upper tails keep their relative accuracy.
pub fn truncnorm_sf<T: Real>(mean: T, var: T, region: &Region<T>, x: T) -> Result<T> {
    let sd = check_inputs(var, region)?;
    let (lp, lt) = log_masses(mean, sd, region, |lo, hi| if x >= hi { None } else { Some((lo.max(x), hi)) })?;
    Ok((lp - lt).exp().min(T::one()).max(T::zero()))
}

/// Result of inverting the pivot in its mean parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion<T> {
    pub mu: T,
    /// `false` when the target was not attained inside the search bracket;
    /// `mu` is then the clamped bracket end.
    pub bracketed: bool,
}

/// Finds `mu` with `truncnorm_cdf(mu, var, region, z_obs) = target` by
/// bisection on `[z_obs - 40 sd, z_obs + 40 sd]`, stopping once the bracket
/// is narrower than `tol`. The CDF is decreasing in `mu`.
pub fn invert_pivot_for_mean<T: Real>(z_obs: T, var: T, region: &Region<T>, target: T, tol: T) -> Result<Inversion<T>> {
    let sd = check_inputs(var, region)?;
    let reach = T::lit(40.0) * sd;
    let (mut lo, mut hi) = (z_obs - reach, z_obs + reach);
    let f = |mu: T| truncnorm_cdf(mu, var, region, z_obs).map(|v| v - target);
    if f(lo)? < T::zero() {
        return Ok(Inversion { mu: lo, bracketed: false });
    }
    if f(hi)? > T::zero() {
        return Ok(Inversion { mu: hi, bracketed: false });
    }
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + (hi - lo) * T::lit(0.5);
        let v = f(mid)?;
        if v == T::zero() {
            return Ok(Inversion { mu: mid, bracketed: true });
        }
        if v > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Inversion { mu: lo + (hi - lo) * T::lit(0.5), bracketed: true })
}
