use std::collections::HashMap;

use super::{walk, HomotopyConfig, LineParam, Walk};
use crate::error::{Error, Result};
use crate::fbsfs::{fb_path, FbStart};
use crate::model::{ConditioningMode, Dataset, FeatureSet, History, Interval, Matrix, Region};
use crate::numerics::{aic_quadratic_whitened, solve_quadratic_leq, OrthoBasis, QuadCoeffs, QUAD_TOL};
use crate::real::{norm2, Real};

/// AIC of every model along the line as a quadratic in `z`, memoised per
/// feature set.
pub(crate) struct AicLine<'a, T> {
    xw: &'a Matrix<T>,
    aw: Vec<T>,
    bw: Vec<T>,
    tol: T,
    cache: HashMap<FeatureSet, QuadCoeffs<T>>,
}

impl<'a, T: Real> AicLine<'a, T> {
    pub(crate) fn new(ds: &'a Dataset<T>, lp: &LineParam<T>) -> Self {
        let aw = ds.sigma().whiten(&lp.a_vec);
        let bw = ds.sigma().whiten(&lp.b_vec);
        let (na, nb) = (norm2(&aw), norm2(&bw));
        let tol = T::floor_tol(QUAD_TOL) * T::one().max(nb).max((na * nb).sqrt());
        AicLine { xw: ds.whitened_x(), aw, bw, tol, cache: HashMap::new() }
    }

    fn quad(&mut self, set: &FeatureSet) -> Result<QuadCoeffs<T>> {
        if let Some(q) = self.cache.get(set) {
            return Ok(*q);
        }
        let basis = OrthoBasis::from_columns(self.xw, set.indices())?;
        let q = aic_quadratic_whitened(&basis, &self.aw, &self.bw);
        self.cache.insert(set.clone(), q);
        Ok(q)
    }

    /// `{z : AIC(winner) <= AIC(other)}`
    fn no_worse(&mut self, winner: &FeatureSet, other: &FeatureSet) -> Result<Region<T>> {
        let d = self.quad(winner)? - self.quad(other)?;
        Ok(solve_quadratic_leq(d, self.tol))
    }

    /// Whitened response at `z`.
    fn point(&self, z: T) -> Vec<T> {
        self.aw.iter().zip(&self.bw).map(|(&a, &b)| a + b * z).collect()
    }

    /// Set of `z` on which forward-backward selection reproduces `h`.
    fn history_region(&mut self, h: &History) -> Result<Region<T>> {
        let steps = h.steps();
        if steps.is_empty() {
            return Err(Error::EmptyHistory);
        }
        let p = self.xw.ncols();
        let mut region = Region::full();
        for w in steps.windows(2) {
            let (prev, cur) = (&w[0], &w[1]);
            for nb in neighbours(prev, p).iter().filter(|nb| *nb != cur) {
                region = region.intersect(&self.no_worse(cur, nb)?);
            }
            region = region.intersect(&self.no_worse(cur, prev)?);
            if region.is_empty() {
                return Ok(region);
            }
        }
        let last = steps.last().expect("non-empty");
        for nb in neighbours(last, p) {
            region = region.intersect(&self.no_worse(last, &nb)?);
        }
        Ok(region)
    }
}

/// Models one addition or one deletion away from `set`.
fn neighbours(set: &FeatureSet, p: usize) -> Vec<FeatureSet> {
    (0..p).map(|j| if set.contains(j) { set.without(j) } else { set.with(j) }).collect()
}

/// Region of `z` on which forward-backward selection along `lp` realises
/// history `h`; an intersection of quadratic inequalities and possibly a
/// union of several intervals.
pub fn history_region<T: Real>(ds: &Dataset<T>, lp: &LineParam<T>, h: &History) -> Result<Region<T>> {
    AicLine::new(ds, lp).history_region(h)
}

/// Full homotopy walk for forward-backward selection along `lp`.
pub fn trace_fbsfs<T: Real>(ds: &Dataset<T>, lp: &LineParam<T>, cfg: &HomotopyConfig<T>, start: FbStart) -> Result<Walk<T, History>> {
    let mut line = AicLine::new(ds, lp);
    let xw = ds.whitened_x();
    let probe = cfg.endpoint_tol.max(T::floor_tol(1e-12) * cfg.z_hi.abs().max(cfg.z_lo.abs()));
    walk(cfg, |seed| {
        let h = fb_path(xw, &line.point(seed), start)?;
        let region = line.history_region(&h)?;
        // Rounding can leave the seed a hair outside its own region.
        let iv = region
            .component_containing(seed)
            .or_else(|| region.intervals().iter().copied().find(|iv| iv.lo - probe <= seed && seed <= iv.hi + probe))
            .ok_or(Error::InconsistentConstraints { e: seed.to_f64().unwrap_or(f64::NAN) })?;
        Ok((Interval::new(iv.lo, iv.hi), h))
    })
}

/// Truncation region of forward-backward selection. Only the selected-set
/// and selected-set-plus-history modes are defined.
pub fn compute_truncation_region_fbsfs<T: Real>(
    ds: &Dataset<T>,
    lp: &LineParam<T>,
    cfg: &HomotopyConfig<T>,
    m_ref: &FeatureSet,
    mode: ConditioningMode,
    start: FbStart,
) -> Result<Region<T>> {
    let w = trace_fbsfs(ds, lp, cfg, start)?;
    fb_region(&w, ds, lp, m_ref, mode, start)
}

pub(crate) fn fb_region<T: Real>(
    w: &Walk<T, History>,
    ds: &Dataset<T>,
    lp: &LineParam<T>,
    m_ref: &FeatureSet,
    mode: ConditioningMode,
    start: FbStart,
) -> Result<Region<T>> {
    match mode {
        ConditioningMode::SelectedSet => Ok(w.region_where(|h| h.selected().is_ok_and(|m| m == m_ref))),
        ConditioningMode::SelectedSetAndHistory => {
            let h_ref = fb_path(ds.whitened_x(), &ds.sigma().whiten(&lp.point(lp.z_obs)), start)?;
            Ok(w.region_where(|h| *h == h_ref))
        }
        other => Err(Error::InvalidConfig(format!("conditioning mode `{other}` is not defined for forward-backward selection"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbsfs::{aic, run_fbsfs};
    use crate::homotopy::test_direction;
    use crate::model::Covariance;
    use rand::{Rng, SeedableRng};

    fn random_ds(seed: u64, n: usize, p: usize, signal: f64) -> Dataset<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut x = Matrix::zeros(n, p);
        for j in 0..p {
            for i in 0..n {
                x.set(i, j, rng.random_range(-1.0..1.0));
            }
        }
        x.normalize_columns();
        let y = (0..n).map(|i| rng.random_range(-1.5..1.5) + signal * x.get(i, 0)).collect();
        Dataset::new(x, y, Covariance::isotropic(n, 0.5).unwrap()).unwrap()
    }

    /// Random instance whose observed selection is non-empty.
    fn instance(seed: u64, n: usize, p: usize) -> Option<(Dataset<f64>, LineParam<f64>, History)> {
        let ds = random_ds(seed, n, p, 3.0);
        let h = run_fbsfs(&ds, ds.y(), FbStart::Null).unwrap();
        let m = h.selected().unwrap().clone();
        let j = *m.indices().first()?;
        let lp = test_direction(&ds, &m, j).unwrap();
        Some((ds, lp, h))
    }

    #[test]
    fn one_feature_null_versus_singleton() {
        // p = 1: history (0, {1}) holds where AIC({1}) <= AIC(0), and the
        // final step adds nothing new since {1}'s only neighbour is 0.
        let x = Matrix::from_columns(&[vec![0.6, 0.8]]);
        let ds = Dataset::new(x, vec![3.0, 4.0], Covariance::isotropic(2, 1.0).unwrap()).unwrap();
        let lp = test_direction(&ds, &FeatureSet::new(vec![0]), 0).unwrap();
        let h = run_fbsfs(&ds, ds.y(), FbStart::Null).unwrap();
        assert_eq!(h.steps(), &[FeatureSet::empty(), FeatureSet::new(vec![0])]);
        // AIC(0) = |a|^2 + 2 a.b z + |b|^2 z^2 and AIC({1}) = |P a|^2 + 2, with
        // eta = x1, b = x1 and a orthogonal to x1: the gap is 2 - z^2.
        let r = history_region(&ds, &lp, &h).unwrap();
        let s = 2f64.sqrt();
        assert_eq!(r.len(), 2);
        assert!((r.intervals()[0].hi + s).abs() < 1e-12 && (r.intervals()[1].lo - s).abs() < 1e-12);
        assert_eq!(r.intervals()[0].lo, f64::NEG_INFINITY);
    }

    #[test]
    fn region_matches_rerun_oracle() {
        let mut checked = 0;
        for seed in 0..40 {
            let Some((ds, lp, h)) = instance(seed, 8, 3) else { continue };
            let r = history_region(&ds, &lp, &h).unwrap();
            assert!(r.contains_with_tol(lp.z_obs, 1e-9));
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..200 {
                let z = lp.z_obs + rng.random_range(-6.0..6.0) * lp.sd();
                if r.distance_to_endpoint(z) < 1e-7 {
                    continue;
                }
                let again = run_fbsfs(&ds, &lp.point(z), FbStart::Null).unwrap();
                assert_eq!(again == h, r.contains(z), "seed={seed} z={z}");
            }
            checked += 1;
        }
        assert!(checked > 20);
    }

    #[test]
    fn modes_nest_and_contain_observation() {
        for seed in 0..15 {
            let Some((ds, lp, h)) = instance(seed, 10, 4) else { continue };
            let cfg = HomotopyConfig::for_line(&lp);
            let m = h.selected().unwrap().clone();
            let w = trace_fbsfs(&ds, &lp, &cfg, FbStart::Null).unwrap();
            let full = fb_region(&w, &ds, &lp, &m, ConditioningMode::SelectedSet, FbStart::Null).unwrap();
            let hist = fb_region(&w, &ds, &lp, &m, ConditioningMode::SelectedSetAndHistory, FbStart::Null).unwrap();
            assert!(full.contains(lp.z_obs) && hist.contains(lp.z_obs));
            assert_eq!(hist.intersect(&full), hist);
            assert!(fb_region(&w, &ds, &lp, &m, ConditioningMode::HistoryAndSigns, FbStart::Null).is_err());
            // Intermediate AICs strictly decrease at the observation.
            let aics: Vec<f64> = h.steps().iter().map(|s| aic(&ds, ds.y(), s).unwrap()).collect();
            assert!(aics.windows(2).all(|w| w[1] < w[0]));
        }
    }
}
