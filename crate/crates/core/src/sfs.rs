//! Forward stepwise feature selection.
//!
//! At step `k` the feature maximizing `|x_j^T r(y, X_{M_{k-1}})|` over the
//! features not yet selected enters, where `r` is the least-squares residual
//! on the current model. With unit-length columns this is the feature that
//! most reduces the residual sum of squares. Exact ties go to the smallest
//! index and a zero correlation counts as a positive sign.

use crate::error::{Error, Result};
use crate::model::{Dataset, FeatureSet, History, Matrix, Signs};
use crate::numerics::OrthoBasis;
use crate::real::{dot, Real};

/// Ordered entry sequence and signs of a forward run.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ForwardPath {
    pub order: Vec<usize>,
    pub signs: Signs,
}

impl ForwardPath {
    pub fn history(&self) -> History {
        History::from_order(&self.order)
    }

    pub fn selected(&self) -> FeatureSet {
        FeatureSet::new(self.order.clone())
    }
}

/// `K`-step forward selection on an arbitrary design (columns are assumed
/// to have unit length).
pub fn forward_path<T: Real>(x: &Matrix<T>, y: &[T], k: usize) -> Result<ForwardPath> {
    let p = x.ncols();
    if k == 0 || k > p {
        return Err(Error::InvalidK { k, p });
    }
    let mut basis = OrthoBasis::new(x.nrows());
    let mut r = y.to_vec();
    let mut in_model = vec![false; p];
    let mut order = Vec::with_capacity(k);
    let mut signs = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(usize, T)> = None;
        for j in (0..p).filter(|&j| !in_model[j]) {
            let c = dot(x.col(j), &r);
            match best {
                Some((_, bc)) if c.abs() <= bc.abs() => {}
                _ => best = Some((j, c)),
            }
        }
        let (j, c) = best.expect("K <= p leaves a candidate");
        signs.push(if c < T::zero() { -1 } else { 1 });
        order.push(j);
        in_model[j] = true;
        basis.push(x.col(j), j)?;
        r = basis.project_out(y);
    }
    Ok(ForwardPath { order, signs: Signs(signs) })
}

/// `K`-step forward selection on the dataset design with response `y_vec`.
pub fn run_sfs<T: Real>(ds: &Dataset<T>, y_vec: &[T], k: usize) -> Result<(History, Signs)> {
    let path = forward_path(ds.x(), y_vec, k)?;
    Ok((path.history(), path.signs))
}

/// The final set of a history.
pub fn selected_set(h: &History) -> Result<FeatureSet> {
    h.selected().cloned()
}
