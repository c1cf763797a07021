use super::{walk, HomotopyConfig, LineParam, Walk};
use crate::error::{Error, Result};
use crate::model::{ConditioningMode, Dataset, FeatureSet, History, Interval, Matrix, Region, Signs};
use crate::numerics::OrthoBasis;
use crate::real::{dot, Real};
use crate::sfs::{forward_path, ForwardPath};

/// Interval of `z` on which forward selection along `a + b z` reproduces
/// `order` with entry signs `signs`.
///
/// At step `k`, for every `j` outside `M_{k-1}` and `s = +-1`, the entering
/// feature must satisfy `(S_k x_{j_k} - s x_j)^T P(a + b z) >= 0`, with `P`
/// the projector off `X_{M_{k-1}}`. Each constraint is linear in `z`.
pub(crate) fn forward_interval<T: Real>(
    x: &Matrix<T>,
    a: &[T],
    b: &[T],
    order: &[usize],
    signs: &[i8],
    endpoint_tol: T,
) -> Result<Interval<T>> {
    let p = x.ncols();
    let mut lo = T::neg_infinity();
    let mut hi = T::infinity();
    let mut basis = OrthoBasis::new(x.nrows());
    let mut in_model = vec![false; p];
    let mut ra = a.to_vec();
    let mut rb = b.to_vec();
    for (&jk, &sk) in order.iter().zip(signs) {
        let sk = if sk < 0 { -T::one() } else { T::one() };
        let ga = sk * dot(x.col(jk), &ra);
        let gb = sk * dot(x.col(jk), &rb);
        for j in (0..p).filter(|&j| !in_model[j]) {
            let ca = dot(x.col(j), &ra);
            let cb = dot(x.col(j), &rb);
            for (ea, db) in [(ga - ca, gb - cb), (ga + ca, gb + cb)] {
                // ea + db z >= 0
                let (e, d) = (-ea, db);
                if d.abs() < endpoint_tol {
                    if e > endpoint_tol {
                        return Err(Error::InconsistentConstraints { e: e.to_f64().unwrap_or(f64::NAN) });
                    }
                } else if d > T::zero() {
                    lo = lo.max(e / d);
                } else {
                    hi = hi.min(e / d);
                }
            }
        }
        in_model[jk] = true;
        basis.push(x.col(jk), jk)?;
        ra = basis.project_out(a);
        rb = basis.project_out(b);
    }
    Ok(Interval::new(lo, hi))
}

/// Over-conditioned interval for a forward history and its signs.
pub fn polytope_interval<T: Real>(ds: &Dataset<T>, lp: &LineParam<T>, h: &History, s: &Signs) -> Result<Interval<T>> {
    if h.is_empty() {
        return Err(Error::EmptyHistory);
    }
    if !h.is_forward() || h.len() != s.len() {
        return Err(Error::InvalidConfig("need a forward history with one sign per step".into()));
    }
    let order = h.entered();
    forward_interval(ds.x(), &lp.a_vec, &lp.b_vec, &order, s.values(), T::lit(super::ENDPOINT_TOL))
}

/// Walks the line with `K`-step forward selection on design `x`.
pub(crate) fn trace_forward<T: Real>(x: &Matrix<T>, a: &[T], b: &[T], k: usize, cfg: &HomotopyConfig<T>) -> Result<Walk<T, ForwardPath>> {
    if k == 0 || k > x.ncols() {
        return Err(Error::InvalidK { k, p: x.ncols() });
    }
    let mut y = vec![T::zero(); a.len()];
    walk(cfg, |seed| {
        for ((yi, &ai), &bi) in y.iter_mut().zip(a).zip(b) {
            *yi = ai + bi * seed;
        }
        let path = forward_path(x, &y, k)?;
        let iv = forward_interval(x, a, b, &path.order, path.signs.values(), cfg.endpoint_tol)?;
        Ok((iv, path))
    })
}

/// Full homotopy walk for forward selection along `lp`.
pub fn trace_sfs<T: Real>(ds: &Dataset<T>, k: usize, lp: &LineParam<T>, cfg: &HomotopyConfig<T>) -> Result<Walk<T, ForwardPath>> {
    trace_forward(ds.x(), &lp.a_vec, &lp.b_vec, k, cfg)
}

/// Observed selection outputs that a forward walk is compared against.
#[derive(Debug, Clone, PartialEq)]
pub struct SfsReference {
    pub selected: FeatureSet,
    pub order: Vec<usize>,
    pub signs: Signs,
}

impl SfsReference {
    pub fn new(selected: &FeatureSet, h: &History, s: &Signs) -> Self {
        SfsReference { selected: selected.clone(), order: h.entered(), signs: s.clone() }
    }

    pub fn from_path(path: &ForwardPath) -> Self {
        SfsReference { selected: path.selected(), order: path.order.clone(), signs: path.signs.clone() }
    }

    /// Acceptance predicate of `mode` for a realised path. Signs are
    /// compared position by position in entry order.
    pub fn accepts(&self, mode: ConditioningMode, path: &ForwardPath) -> bool {
        let set_ok = || path.order.len() == self.selected.len() && path.order.iter().all(|&j| self.selected.contains(j));
        match mode {
            ConditioningMode::SelectedSet => set_ok(),
            ConditioningMode::SelectedSetAndHistory => path.order == self.order,
            ConditioningMode::SelectedSetAndSigns => set_ok() && path.signs == self.signs,
            ConditioningMode::HistoryAndSigns => path.order == self.order && path.signs == self.signs,
        }
    }
}

impl<T: Real> Walk<T, ForwardPath> {
    pub fn sfs_region(&self, reference: &SfsReference, mode: ConditioningMode) -> Region<T> {
        self.region_where(|p| reference.accepts(mode, p))
    }
}

/// Truncation region of forward selection under `mode`.
#[allow(clippy::too_many_arguments)]
pub fn compute_truncation_region_sfs<T: Real>(
    ds: &Dataset<T>,
    k: usize,
    lp: &LineParam<T>,
    cfg: &HomotopyConfig<T>,
    m_ref: &FeatureSet,
    mode: ConditioningMode,
    h_ref: &History,
    s_ref: &Signs,
) -> Result<Region<T>> {
    let reference = SfsReference::new(m_ref, h_ref, s_ref);
    Ok(trace_sfs(ds, k, lp, cfg)?.sfs_region(&reference, mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homotopy::test_direction;
    use crate::model::Covariance;
    use crate::sfs::run_sfs;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn random_ds(seed: u64, n: usize, p: usize) -> Dataset<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut x = Matrix::zeros(n, p);
        for j in 0..p {
            for i in 0..n {
                x.set(i, j, rng.random_range(-1.0..1.0));
            }
        }
        x.normalize_columns();
        let y = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        Dataset::new(x, y, Covariance::isotropic(n, 1.0).unwrap()).unwrap()
    }

    fn observed_line(ds: &Dataset<f64>, k: usize) -> (LineParam<f64>, ForwardPath) {
        let path = forward_path(ds.x(), ds.y(), k).unwrap();
        let lp = test_direction(ds, &path.selected(), path.order[0]).unwrap();
        (lp, path)
    }

    #[test]
    fn single_feature_gives_a_ray() {
        let x = Matrix::from_columns(&[vec![0.6, 0.8]]);
        let ds = Dataset::new(x, vec![1.0, 2.0], Covariance::isotropic(2, 1.0).unwrap()).unwrap();
        let (lp, path) = observed_line(&ds, 1);
        let iv = polytope_interval(&ds, &lp, &path.history(), &path.signs).unwrap();
        // eta = x1, so x1^T y(z) = z and the sign constraint is z >= 0.
        assert!(iv.lo.abs() < 1e-12 && iv.hi == f64::INFINITY);
    }

    #[test]
    fn interval_matches_grid_rerun() {
        let ds = random_ds(11, 10, 4);
        let (lp, path) = observed_line(&ds, 2);
        let (h, s) = (path.history(), path.signs.clone());
        let iv = polytope_interval(&ds, &lp, &h, &s).unwrap();
        assert!(iv.contains(lp.z_obs));
        let (lo, hi) = (iv.lo.max(lp.z_obs - 20.0), iv.hi.min(lp.z_obs + 20.0));
        for t in 1..100 {
            let z = lo + (hi - lo) * t as f64 / 100.0;
            assert_eq!(run_sfs(&ds, &lp.point(z), 2).unwrap(), (h.clone(), s.clone()));
        }
        for z in [iv.lo - 1e-6, iv.hi + 1e-6].into_iter().filter(|z| z.is_finite()) {
            assert_ne!(run_sfs(&ds, &lp.point(z), 2).unwrap(), (h.clone(), s.clone()));
        }
    }

    #[test]
    fn polytope_region_is_one_interval_and_modes_nest() {
        for seed in 0..20 {
            let ds = random_ds(seed, 10, 5);
            let (lp, path) = observed_line(&ds, 3);
            let cfg = HomotopyConfig::for_line(&lp);
            let w = trace_sfs(&ds, 3, &lp, &cfg).unwrap();
            let r = SfsReference::from_path(&path);
            let regions: Vec<Region<f64>> = ConditioningMode::ALL.iter().map(|&m| w.sfs_region(&r, m)).collect();
            assert_eq!(regions[3].len(), 1);
            for reg in &regions {
                assert!(reg.contains(lp.z_obs));
            }
            let sub = |a: &Region<f64>, b: &Region<f64>| a.intersect(b) == *a;
            assert!(sub(&regions[1], &regions[0]) && sub(&regions[2], &regions[0]));
            assert!(sub(&regions[3], &regions[1]) && sub(&regions[3], &regions[2]));
        }
    }

    #[test]
    fn selected_set_region_is_union_of_realised_polytopes() {
        let ds = random_ds(5, 12, 5);
        let (lp, path) = observed_line(&ds, 3);
        let cfg = HomotopyConfig::for_line(&lp);
        let w = trace_sfs(&ds, 3, &lp, &cfg).unwrap();
        let target = path.selected();
        let mut union = Region::empty();
        for seg in w.segments.iter().filter(|s| s.label.selected() == target) {
            let poly = forward_interval(ds.x(), &lp.a_vec, &lp.b_vec, &seg.label.order, seg.label.signs.values(), 1e-12).unwrap();
            union = union.union(&Region::from_interval(poly.lo, poly.hi));
        }
        let homotopy = w.sfs_region(&SfsReference::from_path(&path), ConditioningMode::SelectedSet);
        for t in 0..2000 {
            let z = cfg.z_lo + (cfg.z_hi - cfg.z_lo) * (t as f64 + 0.5) / 2000.0;
            if homotopy.distance_to_endpoint(z) > 1e-6 {
                assert_eq!(union.contains(z), homotopy.contains(z), "z={z}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn seed_lies_in_its_interval(seed in 0u64..1_000_000, z in -5.0f64..5.0) {
            let ds = random_ds(seed, 8, 4);
            let (lp, _) = observed_line(&ds, 3);
            let path = forward_path(ds.x(), &lp.point(z), 3).unwrap();
            let iv = forward_interval(ds.x(), &lp.a_vec, &lp.b_vec, &path.order, path.signs.values(), 1e-12).unwrap();
            prop_assert!(iv.lo <= z + 1e-9 && z <= iv.hi + 1e-9);
        }
    }
}
