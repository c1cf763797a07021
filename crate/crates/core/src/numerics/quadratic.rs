use std::ops::Sub;

use crate::model::{Interval, Region};
use crate::real::Real;

/// Leading-coefficient threshold below which a quadratic is solved as linear.
pub const QUAD_TOL: f64 = 1e-12;

/// `a2 z^2 + a1 z + a0`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadCoeffs<T> {
    pub a2: T,
    pub a1: T,
    pub a0: T,
}

impl<T: Real> QuadCoeffs<T> {
    pub fn new(a2: T, a1: T, a0: T) -> Self {
        QuadCoeffs { a2, a1, a0 }
    }

    pub fn constant(a0: T) -> Self {
        QuadCoeffs { a2: T::zero(), a1: T::zero(), a0 }
    }

    #[inline]
    pub fn eval(&self, z: T) -> T {
        (self.a2 * z + self.a1) * z + self.a0
    }
}

impl<T: Real> Sub for QuadCoeffs<T> {
    type Output = QuadCoeffs<T>;

    fn sub(self, rhs: Self) -> Self {
        QuadCoeffs { a2: self.a2 - rhs.a2, a1: self.a1 - rhs.a1, a0: self.a0 - rhs.a0 }
    }
}

impl<T: Real> std::ops::Add for QuadCoeffs<T> {
    type Output = QuadCoeffs<T>;

    fn add(self, rhs: Self) -> Self {
        QuadCoeffs { a2: self.a2 + rhs.a2, a1: self.a1 + rhs.a1, a0: self.a0 + rhs.a0 }
    }
}

/// `{ z : a2 z^2 + a1 z + a0 <= 0 }`.
///
/// Coefficients with magnitude below `tol` are treated as zero (leading
/// first, then linear). Roots use the cancellation-free form
/// `q = -(a1 + sgn(a1) sqrt(disc)) / 2`, `r = {q / a2, a0 / q}`.
pub fn solve_quadratic_leq<T: Real>(q: QuadCoeffs<T>, tol: T) -> Region<T> {
    let QuadCoeffs { a2, a1, a0 } = q;
    let ninf = T::neg_infinity();
    let inf = T::infinity();
    if a2.abs() < tol {
        if a1.abs() < tol {
            return if a0 <= T::zero() { Region::full() } else { Region::empty() };
        }
        let root = -a0 / a1;
        return if a1 > T::zero() { Region::from_interval(ninf, root) } else { Region::from_interval(root, inf) };
    }
    let disc = a1 * a1 - T::lit(4.0) * a2 * a0;
    if disc < T::zero() {
        return if a2 > T::zero() { Region::empty() } else { Region::full() };
    }
    let sq = disc.sqrt();
    let qq = -T::lit(0.5) * (a1 + a1.sign_pos() * sq);
    let (r1, r2) = if qq == T::zero() { (T::zero(), T::zero()) } else { (qq / a2, a0 / qq) };
    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    if a2 > T::zero() {
        Region::from_interval(lo, hi)
    } else {
        Region::normalize(vec![Interval::new(ninf, lo), Interval::new(hi, inf)], T::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn textbook_cases() {
        let r = solve_quadratic_leq(QuadCoeffs::new(1.0, 0.0, -1.0), 1e-12);
        assert_eq!(r, Region::from_interval(-1.0, 1.0));
        assert!(solve_quadratic_leq(QuadCoeffs::new(1.0, 0.0, 1.0), 1e-12).is_empty());
        let r = solve_quadratic_leq(QuadCoeffs::new(-1.0, 0.0, 1.0), 1e-12);
        assert_eq!(r.intervals(), &[Interval::new(f64::NEG_INFINITY, -1.0), Interval::new(1.0, f64::INFINITY)]);
    }

    #[test]
    fn degenerate_orders() {
        assert_eq!(solve_quadratic_leq(QuadCoeffs::new(0.0, 2.0, -4.0), 1e-12), Region::from_interval(f64::NEG_INFINITY, 2.0));
        assert_eq!(solve_quadratic_leq(QuadCoeffs::new(1e-14, -2.0, -4.0), 1e-12), Region::from_interval(-2.0, f64::INFINITY));
        assert_eq!(solve_quadratic_leq(QuadCoeffs::new(0.0, 0.0, -1.0), 1e-12), Region::full());
        assert!(solve_quadratic_leq(QuadCoeffs::new(0.0, 0.0, 1.0), 1e-12).is_empty());
        assert!(solve_quadratic_leq(QuadCoeffs::<f64>::new(-1.0, 0.0, -1.0), 1e-12) == Region::full());
    }

    #[test]
    fn stable_roots_under_cancellation() {
        // Roots 1e-8 and 1e8.
        let r = solve_quadratic_leq(QuadCoeffs::new(1.0f64, -(1e8 + 1e-8), 1.0), 1e-12);
        let iv = r.intervals()[0];
        assert!((iv.lo - 1e-8).abs() < 1e-22);
        assert!((iv.hi - 1e8).abs() < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn agrees_with_sign_evaluation_on_grid(a2 in -3.0f64..3.0, a1 in -5.0f64..5.0, a0 in -5.0f64..5.0) {
            let q = QuadCoeffs::new(a2, a1, a0);
            let r = solve_quadratic_leq(q, 1e-12);
            // Roots by the textbook formula for the exclusion band.
            let mut roots = vec![];
            if a2.abs() >= 1e-12 {
                let d = a1 * a1 - 4.0 * a2 * a0;
                if d >= 0.0 {
                    roots.push((-a1 - d.sqrt()) / (2.0 * a2));
                    roots.push((-a1 + d.sqrt()) / (2.0 * a2));
                }
            } else if a1.abs() >= 1e-12 {
                roots.push(-a0 / a1);
            }
            for k in 0..10_000 {
                let z = -20.0 + 40.0 * k as f64 / 9_999.0;
                if roots.iter().any(|r| (z - r).abs() <= 1e-6) {
                    continue;
                }
                prop_assert_eq!(r.contains(z), q.eval(z) <= 0.0, "z={}", z);
            }
        }
    }
}
