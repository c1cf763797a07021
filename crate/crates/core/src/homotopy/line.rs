use crate::error::{Error, Result};
use crate::model::{Dataset, FeatureSet};
use crate::numerics::OrthoBasis;
use crate::real::{dot, Real};

/// The line `y(z) = a + b z` through the observed response along the test
/// direction `eta`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineParam<T> {
    pub eta: Vec<T>,
    pub a_vec: Vec<T>,
    pub b_vec: Vec<T>,
    pub z_obs: T,
    pub var: T,
}

impl<T: Real> LineParam<T> {
    /// Line for an arbitrary direction `eta` with `eta^T Sigma eta > 0`.
    pub fn from_direction(ds: &Dataset<T>, eta: Vec<T>) -> Result<Self> {
        let s_eta = ds.sigma().apply(&eta);
        let var = dot(&eta, &s_eta);
        if !(var > T::zero()) || !var.is_finite() {
            return Err(Error::InvalidVariance(var.to_f64().unwrap_or(f64::NAN)));
        }
        let b_vec: Vec<T> = s_eta.iter().map(|&v| v / var).collect();
        let z_obs = dot(&eta, ds.y());
        let a_vec = ds.y().iter().zip(&b_vec).map(|(&y, &b)| y - b * z_obs).collect();
        Ok(LineParam { eta, a_vec, b_vec, z_obs, var })
    }

    /// `a + b z`
    pub fn point(&self, z: T) -> Vec<T> {
        self.a_vec.iter().zip(&self.b_vec).map(|(&a, &b)| a + b * z).collect()
    }

    pub fn sd(&self) -> T {
        self.var.sqrt()
    }

    pub fn n(&self) -> usize {
        self.eta.len()
    }
}

/// Test direction for coefficient `j` (0-based) of the least-squares fit on
/// `set`: `eta = X_M (X_M^T X_M)^{-1} e_j`.
///
/// Computed as `r / (r^T x_j)` with `r` the residual of `x_j` on the other
/// selected columns, which is the same vector.
pub fn test_direction<T: Real>(ds: &Dataset<T>, set: &FeatureSet, j: usize) -> Result<LineParam<T>> {
    if !set.contains(j) {
        return Err(Error::FeatureNotSelected(j + 1));
    }
    OrthoBasis::from_columns(ds.x(), set.indices())?;
    let others = set.without(j);
    let basis = OrthoBasis::from_columns(ds.x(), others.indices())?;
    let xj = ds.x().col(j);
    let r = basis.project_out(xj);
    let scale = dot(&r, xj);
    let eta = r.into_iter().map(|v| v / scale).collect();
    LineParam::from_direction(ds, eta)
}
