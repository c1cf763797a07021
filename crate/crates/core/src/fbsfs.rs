//! AIC-driven forward-backward stepwise selection.
//!
//! `AIC(M) = y^T A_M y + 2|M|` with the generalized least-squares residual
//! form `A_M`, evaluated in whitened coordinates. Every step moves to the
//! neighbour (one addition or one deletion) with the smallest AIC and stops
//! once no neighbour strictly improves on the current model. Among equal
//! candidates additions win over deletions, then the smaller index.

use crate::error::{Error, Result};
use crate::model::{Dataset, FeatureSet, History, Matrix};
use crate::numerics::OrthoBasis;
use crate::real::{dot, norm2, Real};

/// Starting model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FbStart {
    #[default]
    Null,
    Full,
}

/// AIC of `set` for response `y_vec` (constant term omitted).
pub fn aic<T: Real>(ds: &Dataset<T>, y_vec: &[T], set: &FeatureSet) -> Result<T> {
    let yw = ds.sigma().whiten(y_vec);
    whitened_aic(ds.whitened_x(), &yw, set)
}

pub(crate) fn whitened_aic<T: Real>(xw: &Matrix<T>, yw: &[T], set: &FeatureSet) -> Result<T> {
    let basis = OrthoBasis::from_columns(xw, set.indices())?;
    Ok(norm2(&basis.project_out(yw)) + T::lit(2.0) * T::from_usize(set.len()).unwrap())
}

/// A candidate move and the AIC it leads to.
#[derive(Debug, Clone)]
struct Move<T> {
    target: FeatureSet,
    aic: T,
}

/// Best neighbour of `current` under the tie rules, with the AIC of `current`.
fn best_neighbour<T: Real>(xw: &Matrix<T>, yw: &[T], current: &FeatureSet) -> Result<(T, Option<Move<T>>)> {
    let p = xw.ncols();
    let basis = OrthoBasis::from_columns(xw, current.indices())?;
    let ry = basis.project_out(yw);
    let rss = norm2(&ry);
    let two = T::lit(2.0);
    let size = T::from_usize(current.len()).unwrap();
    let here = rss + two * size;

    let mut best: Option<Move<T>> = None;
    let mut consider = |target: FeatureSet, value: T| {
        if best.as_ref().is_none_or(|b| value < b.aic) {
            best = Some(Move { target, aic: value });
        }
    };
    for j in (0..p).filter(|&j| !current.contains(j)) {
        // Adding x_j lowers the RSS by (r_j^T r_y)^2 / |r_j|^2.
        let rj = basis.project_out(xw.col(j));
        if !(norm2(&rj).sqrt() > T::floor_tol(1e-10) * norm2(xw.col(j)).sqrt()) {
            let mut columns: Vec<usize> = current.with(j).to_one_based();
            columns.sort_unstable();
            return Err(Error::RankDeficient { columns });
        }
        let gain = dot(&rj, &ry).powi(2) / norm2(&rj);
        consider(current.with(j), rss - gain + two * (size + T::one()));
    }
    for &j in current.indices() {
        let target = current.without(j);
        let value = whitened_aic(xw, yw, &target)?;
        consider(target, value);
    }
    Ok((here, best))
}

/// Runs the forward-backward search; the returned history starts with the
/// starting model and records every accepted move.
pub fn run_fbsfs<T: Real>(ds: &Dataset<T>, y_vec: &[T], start: FbStart) -> Result<History> {
    let yw = ds.sigma().whiten(y_vec);
    fb_path(ds.whitened_x(), &yw, start)
}

pub(crate) fn fb_path<T: Real>(xw: &Matrix<T>, yw: &[T], start: FbStart) -> Result<History> {
    let mut current = match start {
        FbStart::Null => FeatureSet::empty(),
        FbStart::Full => FeatureSet::new((0..xw.ncols()).collect()),
    };
    let mut steps = vec![current.clone()];
    // AIC strictly decreases, so no model repeats; 2^p bounds the loop.
    loop {
        let (here, best) = best_neighbour(xw, yw, &current)?;
        match best {
            Some(m) if m.aic < here => {
                current = m.target;
                steps.push(current.clone());
            }
            _ => break,
        }
    }
    Ok(History::new(steps))
}
