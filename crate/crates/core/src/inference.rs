//! Selective p-values and confidence intervals from the truncated-normal
//! pivot, and end-to-end drivers for both selectors and for data splitting.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fbsfs::{run_fbsfs, FbStart};
use crate::homotopy::{test_direction, trace_fbsfs, trace_sfs, HomotopyConfig, LineParam, SfsReference};
use crate::model::{ConditioningMode, Dataset, FeatureSet, Region};
use crate::numerics::{invert_pivot_for_mean, truncnorm_cdf, truncnorm_sf, Inversion};
use crate::real::Real;
use crate::sfs::forward_path;

/// Which inference procedure produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Sfs(ConditioningMode),
    Fbsfs(ConditioningMode),
    SfsCv,
    DataSplit,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Sfs(m) => m.label(),
            Method::Fbsfs(ConditioningMode::SelectedSet) => "homotopy",
            Method::Fbsfs(ConditioningMode::SelectedSetAndHistory) => "quadratic",
            Method::Fbsfs(m) => m.label(),
            Method::SfsCv => "homotopy-cv",
            Method::DataSplit => "ds",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Inference for one selected coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceResult<T> {
    /// 0-based feature index.
    pub feature: usize,
    /// `eta^T y`, the least-squares coefficient on the selected set.
    pub coefficient: T,
    /// `None` when the region carries no numerically representable mass.
    pub p_selective: Option<T>,
    pub ci_lo: T,
    pub ci_hi: T,
    /// Whether each CI endpoint was bracketed by the pivot inversion.
    pub ci_lo_bracketed: bool,
    pub ci_hi_bracketed: bool,
    pub region: Region<T>,
    pub n_intervals: usize,
    pub var: T,
    pub method: Method,
}

impl<T: Real> InferenceResult<T> {
    pub fn ci_length(&self) -> T {
        self.ci_hi - self.ci_lo
    }

    pub fn rejects(&self, alpha: T) -> bool {
        self.p_selective.is_some_and(|p| p < alpha)
    }
}

fn membership_tol<T: Real>(z: T, var: T) -> T {
    T::floor_tol(1e-9) * T::one().max(z.abs()).max(var.sqrt())
}

/// Two-sided selective p-value `2 min(F, 1 - F)` under `eta^T mu = 0`, with
/// `F` the truncated-normal CDF at `z_obs`.
pub fn selective_p_value<T: Real>(z_obs: T, var: T, region: &Region<T>) -> Result<T> {
    if !region.contains_with_tol(z_obs, membership_tol(z_obs, var)) {
        return Err(Error::PointOutsideRegion { z: z_obs.to_f64().unwrap_or(f64::NAN) });
    }
    let cdf = truncnorm_cdf(T::zero(), var, region, z_obs)?;
    let sf = truncnorm_sf(T::zero(), var, region, z_obs)?;
    Ok((T::lit(2.0) * cdf.min(sf)).min(T::one()))
}

/// Equal-tailed `1 - alpha` selective interval for `eta^T mu`.
pub fn selective_ci<T: Real>(z_obs: T, var: T, region: &Region<T>, alpha: T) -> Result<(Inversion<T>, Inversion<T>)> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::InvalidConfig(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !region.contains_with_tol(z_obs, membership_tol(z_obs, var)) {
        return Err(Error::PointOutsideRegion { z: z_obs.to_f64().unwrap_or(f64::NAN) });
    }
    let tol = T::floor_tol(1e-10) * var.sqrt();
    let half = alpha * T::lit(0.5);
    let lo = invert_pivot_for_mean(z_obs, var, region, T::one() - half, tol)?;
    let hi = invert_pivot_for_mean(z_obs, var, region, half, tol)?;
    Ok((lo, hi))
}

/// Combines the statistic and its region into a result.
pub fn infer_on_region<T: Real>(feature: usize, lp: &LineParam<T>, region: Region<T>, alpha: T, method: Method) -> Result<InferenceResult<T>> {
    let (p, ci) = match selective_p_value(lp.z_obs, lp.var, &region) {
        Ok(p) => (Some(p), selective_ci(lp.z_obs, lp.var, &region, alpha)?),
        Err(Error::DegenerateRegion) => {
            let open = |mu| Inversion { mu, bracketed: false };
            (None, (open(T::neg_infinity()), open(T::infinity())))
        }
        Err(e) => return Err(e),
    };
    Ok(InferenceResult {
        feature,
        coefficient: lp.z_obs,
        p_selective: p,
        ci_lo: ci.0.mu,
        ci_hi: ci.1.mu,
        ci_lo_bracketed: ci.0.bracketed,
        ci_hi_bracketed: ci.1.bracketed,
        n_intervals: region.len(),
        region,
        var: lp.var,
        method,
    })
}

/// Forward selection with `K` steps followed by inference under each of
/// `modes`; one homotopy walk per feature serves every mode. Results are
/// grouped by mode and, within a mode, listed in selection order.
pub fn run_si_sfs_modes<T: Real>(ds: &Dataset<T>, k: usize, modes: &[ConditioningMode], alpha: T) -> Result<Vec<Vec<InferenceResult<T>>>> {
    let path = forward_path(ds.x(), ds.y(), k)?;
    let reference = SfsReference::from_path(&path);
    let selected = path.selected();
    let mut out = vec![Vec::with_capacity(k); modes.len()];
    for &j in &path.order {
        let lp = test_direction(ds, &selected, j)?;
        let cfg = HomotopyConfig::for_line(&lp);
        let w = trace_sfs(ds, k, &lp, &cfg)?;
        for (slot, &mode) in out.iter_mut().zip(modes) {
            slot.push(infer_on_region(j, &lp, w.sfs_region(&reference, mode), alpha, Method::Sfs(mode))?);
        }
    }
    Ok(out)
}

/// Forward selection followed by selective inference for every selected
/// coefficient, in selection order.
pub fn run_si_sfs<T: Real>(ds: &Dataset<T>, k: usize, mode: ConditioningMode, alpha: T) -> Result<Vec<InferenceResult<T>>> {
    Ok(run_si_sfs_modes(ds, k, &[mode], alpha)?.pop().unwrap_or_default())
}

fn check_fb_mode(mode: ConditioningMode) -> Result<()> {
    match mode {
        ConditioningMode::SelectedSet | ConditioningMode::SelectedSetAndHistory => Ok(()),
        other => Err(Error::InvalidConfig(format!("conditioning mode `{other}` is not defined for forward-backward selection"))),
    }
}

/// Forward-backward selection followed by inference under each of `modes`
/// (selected set, or selected set and history). Features are listed in
/// increasing index order.
pub fn run_si_fbsfs_modes<T: Real>(ds: &Dataset<T>, modes: &[ConditioningMode], alpha: T, start: FbStart) -> Result<Vec<Vec<InferenceResult<T>>>> {
    for &m in modes {
        check_fb_mode(m)?;
    }
    let h_ref = run_fbsfs(ds, ds.y(), start)?;
    let selected = h_ref.selected()?.clone();
    let mut out = vec![Vec::with_capacity(selected.len()); modes.len()];
    for &j in selected.indices() {
        let lp = test_direction(ds, &selected, j)?;
        let cfg = HomotopyConfig::for_line(&lp);
        let w = trace_fbsfs(ds, &lp, &cfg, start)?;
        for (slot, &mode) in out.iter_mut().zip(modes) {
            let region = match mode {
                ConditioningMode::SelectedSet => w.region_where(|h| h.selected().is_ok_and(|m| *m == selected)),
                _ => w.region_where(|h| *h == h_ref),
            };
            slot.push(infer_on_region(j, &lp, region, alpha, Method::Fbsfs(mode))?);
        }
    }
    Ok(out)
}

pub fn run_si_fbsfs<T: Real>(ds: &Dataset<T>, mode: ConditioningMode, alpha: T, start: FbStart) -> Result<Vec<InferenceResult<T>>> {
    Ok(run_si_fbsfs_modes(ds, &[mode], alpha, start)?.pop().unwrap_or_default())
}

/// Random row split: `floor(n/2)` rows for selection, the rest for
/// inference.
pub fn split_rows(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let inference = rows.split_off(n / 2);
    (rows, inference)
}

/// Rows `rows` of `ds` with renormalised columns.
pub(crate) fn sub_dataset<T: Real>(ds: &Dataset<T>, rows: &[usize]) -> Result<Dataset<T>> {
    let y = rows.iter().map(|&i| ds.y()[i]).collect();
    Ok(Dataset::with_normalized_columns(ds.x().select_rows(rows), y, ds.sigma().restrict(rows)?)?.0)
}

/// Data splitting: forward selection on one half, classical z-tests and
/// intervals on the other. Coefficients refer to the inference half with
/// its columns rescaled to unit length.
pub fn data_split_inference<T: Real>(ds: &Dataset<T>, k: usize, alpha: T, split_seed: u64) -> Result<Vec<InferenceResult<T>>> {
    if ds.n() < 4 {
        return Err(Error::InvalidDataset(format!("data splitting needs n >= 4, got {}", ds.n())));
    }
    let (sel_rows, inf_rows) = split_rows(ds.n(), split_seed);
    let sel = sub_dataset(ds, &sel_rows)?;
    let inf = sub_dataset(ds, &inf_rows)?;
    let path = forward_path(sel.x(), sel.y(), k)?;
    let selected = path.selected();
    path.order
        .iter()
        .map(|&j| {
            let lp = test_direction(&inf, &selected, j)?;
            infer_on_region(j, &lp, Region::full(), alpha, Method::DataSplit)
        })
        .collect()
}

/// Feature set of a result list.
pub fn selected_features<T>(results: &[InferenceResult<T>]) -> FeatureSet {
    FeatureSet::new(results.iter().map(|r| r.feature).collect())
}
