use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use stepwise_si::cv::CvSplit;
use stepwise_si::oracle::grid_labels;
use stepwise_si::{
    run_sfs, run_si_sfs, run_si_sfs_cv, test_direction, ConditioningMode, Covariance, Dataset, FeatureSet, HomotopyConfig, Matrix,
};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn random_dataset(seed: u64, n: usize, p: usize) -> Dataset<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
    let mut y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    for (i, v) in y.iter_mut().enumerate() {
        *v += 0.6 * cols[0][i];
    }
    Dataset::with_normalized_columns(Matrix::from_columns(&cols), y, Covariance::isotropic(n, 1.0).unwrap()).unwrap().0
}

#[test]
fn direction_recovers_least_squares_coefficient() {
    let ds = random_dataset(41, 4, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mu: Vec<f64> = (0..4).map(|_| StandardNormal.sample(&mut rng)).collect();
    let (x1, x2) = (ds.x().col(0), ds.x().col(1));
    let (g11, g12, g22) = (dot(x1, x1), dot(x1, x2), dot(x2, x2));
    let (r1, r2) = (dot(x1, &mu), dot(x2, &mu));
    let det = g11 * g22 - g12 * g12;
    let beta = [(g22 * r1 - g12 * r2) / det, (g11 * r2 - g12 * r1) / det];
    let set = FeatureSet::new(vec![0, 1]);
    for j in 0..2 {
        let lp = test_direction(&ds, &set, j).unwrap();
        assert!((dot(&lp.eta, &mu) - beta[j]).abs() < 1e-12);
        assert!(dot(&lp.eta, &lp.a_vec).abs() < 1e-12);
        assert!((dot(&lp.eta, &lp.b_vec) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn validation_region_matches_grid_rerun() {
    let ds = random_dataset(7, 30, 5);
    let cands = [1, 2, 3];
    let split = CvSplit::new(ds.x(), 5, 99).unwrap();
    let k_sel = split.select_k(ds.y(), &cands).unwrap();
    let selected = run_sfs(&ds, ds.y(), k_sel).unwrap().0.selected().unwrap().clone();
    for &j in selected.indices() {
        let lp = test_direction(&ds, &selected, j).unwrap();
        let cfg = HomotopyConfig::for_line(&lp);
        let paths = split.error_paths(&lp, &cands, &cfg).unwrap();
        let region = stepwise_si::cv::cv_selection_region(&paths, k_sel).unwrap();
        assert!(region.contains(lp.z_obs));
        let step = 1e-3 * lp.sd();
        let labels = grid_labels(&lp, &cfg, step, |y| split.select_k(y, &cands).map(|k| k == k_sel)).unwrap();
        let mut checked = 0;
        for (z, hit) in labels {
            if region.distance_to_endpoint(z) > 1e-6 * lp.sd() {
                assert_eq!(region.contains(z), hit, "z = {z}");
                checked += 1;
            }
        }
        assert!(checked > 1000);
    }
}

#[test]
fn cv_region_is_contained_in_selected_set_region() {
    let ds = random_dataset(8, 40, 6);
    let out = run_si_sfs_cv(&ds, &[1, 3, 5], 0.05, 5, 3).unwrap();
    let plain = run_si_sfs(&ds, out.k_selected, ConditioningMode::SelectedSet, 0.05).unwrap();
    assert_eq!(out.results.len(), plain.len());
    for (c, p) in out.results.iter().zip(&plain) {
        assert_eq!(c.feature, p.feature);
        assert!(c.region.contains(c.coefficient));
        assert!(c.region.intersect(&p.region).measure() >= c.region.measure() - 1e-9);
    }
}

#[test]
fn single_precision_pipeline_agrees_with_double() {
    let ds = random_dataset(12, 50, 4);
    let (x32, y32): (Vec<Vec<f32>>, Vec<f32>) = (
        (0..4).map(|j| ds.x().col(j).iter().map(|&v| v as f32).collect()).collect(),
        ds.y().iter().map(|&v| v as f32).collect(),
    );
    let ds32 = Dataset::with_normalized_columns(Matrix::from_columns(&x32), y32, Covariance::isotropic(50, 1.0f32).unwrap()).unwrap().0;
    let r64 = run_si_sfs(&ds, 2, ConditioningMode::SelectedSet, 0.05).unwrap();
    let r32 = run_si_sfs(&ds32, 2, ConditioningMode::SelectedSet, 0.05f32).unwrap();
    assert_eq!(r64.len(), r32.len());
    for (a, b) in r64.iter().zip(&r32) {
        assert_eq!(a.feature, b.feature);
        assert!((a.coefficient - b.coefficient as f64).abs() < 1e-4 * a.coefficient.abs().max(1.0));
        let (pa, pb) = (a.p_selective.unwrap(), b.p_selective.unwrap() as f64);
        assert!((pa - pb).abs() < 1e-3, "{pa} vs {pb}");
    }
}
