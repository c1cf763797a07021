//! Brute-force references for the homotopy regions: re-running the selector
//! on a grid along the line, and enumerating every ordering and sign
//! pattern of the selected features.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::homotopy::{trace_sfs, HomotopyConfig, LineParam};
use crate::model::{Dataset, FeatureSet, Interval, Region};
use crate::real::Real;
use crate::sfs::forward_path;

/// Largest `K` accepted by [`enumerate_polytopes_oracle`]; `5! * 2^5 = 3840`
/// candidate polytopes.
pub const MAX_ENUMERATION_K: usize = 5;

/// Grid `z_lo, z_lo + step, ..., <= z_hi`.
pub fn grid_points<T: Real>(cfg: &HomotopyConfig<T>, step: T) -> Result<Vec<T>> {
    if !(step > T::zero()) {
        return Err(Error::InvalidConfig(format!("grid step must be positive, got {step}")));
    }
    let count = ((cfg.z_hi - cfg.z_lo) / step).floor().to_usize().unwrap_or(0);
    Ok((0..=count).map(|i| cfg.z_lo + step * T::from_usize(i).unwrap()).collect())
}

/// Evaluates `label` at `y(z)` for every grid point, in parallel.
pub fn grid_labels<T: Real, L: Send>(
    lp: &LineParam<T>,
    cfg: &HomotopyConfig<T>,
    step: T,
    label: impl Fn(&[T]) -> Result<L> + Sync,
) -> Result<Vec<(T, L)>> {
    grid_points(cfg, step)?.into_par_iter().map(|z| label(&lp.point(z)).map(|l| (z, l))).collect()
}

/// Maximal runs of grid points where `predicate` holds, each widened by half
/// a step on both sides.
pub fn grid_region_oracle<T: Real>(
    lp: &LineParam<T>,
    cfg: &HomotopyConfig<T>,
    step: T,
    predicate: impl Fn(&[T]) -> Result<bool> + Sync,
) -> Result<Region<T>> {
    let labels = grid_labels(lp, cfg, step, predicate)?;
    Ok(runs_to_region(&labels, step))
}

pub(crate) fn runs_to_region<T: Real>(labels: &[(T, bool)], step: T) -> Region<T> {
    let half = step * T::lit(0.5);
    let mut raw = Vec::new();
    let mut start: Option<T> = None;
    let mut prev = T::zero();
    for &(z, hit) in labels {
        match (hit, start) {
            (true, None) => start = Some(z),
            (false, Some(s)) => {
                raw.push(Interval::new(s - half, prev + half));
                start = None;
            }
            _ => {}
        }
        prev = z;
    }
    if let Some(s) = start {
        raw.push(Interval::new(s - half, prev + half));
    }
    Region::normalize(raw, T::zero())
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// Union over every ordering of `m_ref` and every sign vector of the
/// corresponding forward-selection interval, restricted to the walk range.
/// Each candidate is kept only if forward selection at its midpoint really
/// produces that ordering and those signs.
pub fn enumerate_polytopes_oracle<T: Real>(
    ds: &Dataset<T>,
    k: usize,
    lp: &LineParam<T>,
    m_ref: &FeatureSet,
    cfg: &HomotopyConfig<T>,
) -> Result<Region<T>> {
    if k > MAX_ENUMERATION_K {
        return Err(Error::CostGuard(format!("K={k} exceeds the enumeration limit {MAX_ENUMERATION_K}")));
    }
    if m_ref.len() != k || k == 0 || k > ds.p() {
        return Err(Error::InvalidK { k, p: ds.p() });
    }
    let candidates: Vec<(Vec<usize>, Vec<i8>)> = permutations(m_ref.indices())
        .into_iter()
        .flat_map(|order| {
            (0..1u32 << k).map(move |mask| {
                let signs = (0..k).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
                (order.clone(), signs)
            })
        })
        .collect();
    let pieces: Vec<Option<Interval<T>>> = candidates
        .par_iter()
        .map(|(order, signs)| {
            let iv = match crate::homotopy::forward_interval(ds.x(), &lp.a_vec, &lp.b_vec, order, signs, cfg.endpoint_tol) {
                Ok(iv) => iv,
                Err(Error::InconsistentConstraints { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let (lo, hi) = (iv.lo.max(cfg.z_lo), iv.hi.min(cfg.z_hi));
            if !(hi > lo) {
                return Ok(None);
            }
            let mid = (lo + hi) * T::lit(0.5);
            let path = forward_path(ds.x(), &lp.point(mid), k)?;
            Ok((path.order == *order && path.signs.values() == signs.as_slice()).then_some(Interval::new(lo, hi)))
        })
        .collect::<Result<_>>()?;
    Ok(Region::from_intervals(pieces.into_iter().flatten().collect()))
}

/// Number of intervals processed by the forward-selection walk.
pub fn count_breakpoints<T: Real>(ds: &Dataset<T>, k: usize, lp: &LineParam<T>, cfg: &HomotopyConfig<T>) -> Result<usize> {
    Ok(trace_sfs(ds, k, lp, cfg)?.breakpoint_count())
}
