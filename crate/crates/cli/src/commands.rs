use std::fs;
use std::io::Write;
use std::path::Path;

use stepwise_si::experiment::{
    endpoint_gap, generate_synthetic, parse_method, run_bench, run_experiment, summarize, summarize_bench, BenchRecord, ExperimentSpec,
    Noise, Selector, SummaryRow, TrialRecord,
};
use stepwise_si::homotopy::{trace_sfs, SfsReference};
use stepwise_si::oracle::{enumerate_polytopes_oracle, grid_labels, MAX_ENUMERATION_K};
use stepwise_si::{
    compute_truncation_region_fbsfs, data_split_inference, forward_path, run_fbsfs, run_si_fbsfs, run_si_sfs, run_si_sfs_cv, test_direction,
    ConditioningMode, Dataset64, FbStart, HomotopyConfig64, InferenceResult64, Method, Region64,
};

use crate::ingest::load_dataset;
use crate::{AnalyzeArgs, BenchArgs, CliError, ExperimentArgs, Kind, OracleArgs, SelectorArg};

fn selector(s: SelectorArg) -> Selector {
    match s {
        SelectorArg::Sfs => Selector::Sfs,
        SelectorArg::Fbsfs => Selector::Fbsfs,
    }
}

/// `3,6,9`, `1-10` or a mix such as `1-3,8`.
pub fn parse_candidates(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Flags(format!("cannot read K candidates `{s}`"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| CliError::Flags(format!("`{v}` is not a number")))).collect()
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::Flags(format!("--alpha must lie in (0, 1), got {alpha}")))
    }
}

fn csv_writer(out: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn analyze(a: &AnalyzeArgs) -> Result<(), CliError> {
    check_alpha(a.alpha)?;
    let ds = load_dataset(&a.input, a.sigma2, a.sigma_file.as_deref())?;
    let sel = selector(a.selector);
    let results: Vec<InferenceResult64> = match (&a.k_candidates, parse_method(&a.mode, sel)?) {
        (Some(c), Method::Sfs(ConditioningMode::SelectedSet) | Method::SfsCv) => run_si_sfs_cv(&ds, &parse_candidates(c)?, a.alpha, a.folds, a.seed)?.results,
        (Some(_), m) => return Err(CliError::Flags(format!("--k-candidates is only available with forward selection and mode homotopy, got `{m}`"))),
        (None, Method::Sfs(mode)) => run_si_sfs(&ds, a.k, mode, a.alpha)?,
        (None, Method::DataSplit) => data_split_inference(&ds, a.k, a.alpha, a.seed)?,
        (None, Method::SfsCv) => return Err(CliError::Flags("mode homotopy-cv needs --k-candidates".into())),
        (None, Method::Fbsfs(mode)) => run_si_fbsfs(&ds, mode, a.alpha, FbStart::Null)?,
    };
    let mut w = csv_writer(a.out.as_deref())?;
    w.write_record(["feature_index", "coefficient", "p_selective", "ci_lo", "ci_hi", "n_intervals", "mode"])?;
    for r in &results {
        w.write_record([
            (r.feature + 1).to_string(),
            r.coefficient.to_string(),
            fmt_opt(r.p_selective),
            r.ci_lo.to_string(),
            r.ci_hi.to_string(),
            r.n_intervals.to_string(),
            r.method.label().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn default_beta(kind: Kind, p: usize) -> Vec<f64> {
    match kind {
        Kind::Tpr | Kind::Ci => (0..p).map(|j| if j < p / 2 { 0.25 } else { 0.0 }).collect(),
        _ => vec![0.0; p],
    }
}

/// Experiment specs implied by the flags, one per summary parameter value.
pub fn experiment_specs(a: &ExperimentArgs) -> Result<Vec<ExperimentSpec>, CliError> {
    check_alpha(a.alpha)?;
    if !(a.sigma2 > 0.0) {
        return Err(CliError::Flags(format!("--sigma2 must be positive, got {}", a.sigma2)));
    }
    let sel = selector(a.selector);
    let beta = match &a.beta {
        Some(s) => parse_list(s)?,
        None => default_beta(a.kind, a.p),
    };
    let noises: Vec<Noise> = match (&a.noise, a.kind) {
        (Some(s), _) => vec![s.parse()?],
        (None, Kind::Robustness) => vec![Noise::Laplace, Noise::SkewNormal(10.0), Noise::StudentT(20.0)],
        (None, _) => vec![Noise::Gaussian],
    };
    let methods: Vec<Method> = match &a.mode {
        Some(m) => m.split(',').map(|l| parse_method(l, sel)).collect::<Result<_, _>>()?,
        None if a.kind == Kind::Robustness && sel == Selector::Fbsfs => vec![Method::Fbsfs(ConditioningMode::SelectedSet)],
        None => stepwise_si::experiment::default_methods(sel),
    };
    let base = ExperimentSpec {
        selector: sel,
        methods,
        n: a.n,
        p: a.p,
        k: a.k,
        candidates: Vec::new(),
        folds: a.folds,
        beta,
        noise: Noise::Gaussian,
        sigma: a.sigma2.sqrt(),
        trials: a.trials,
        alpha: a.alpha,
        seed: a.seed,
    };
    let mut specs = Vec::new();
    if a.kind == Kind::Cv {
        if sel != Selector::Sfs {
            return Err(CliError::Flags("cv experiments use --selector sfs".into()));
        }
        let sets = if a.k_candidates.is_empty() { vec!["3,6,9".to_string()] } else { a.k_candidates.clone() };
        for noise in &noises {
            // Fixed-K baseline on the same seeds.
            specs.push(ExperimentSpec { noise: *noise, methods: vec![Method::Sfs(ConditioningMode::SelectedSet)], ..base.clone() });
            for s in &sets {
                specs.push(ExperimentSpec { noise: *noise, methods: vec![Method::SfsCv], candidates: parse_candidates(s)?, ..base.clone() });
            }
        }
    } else {
        for noise in &noises {
            specs.push(ExperimentSpec { noise: *noise, ..base.clone() });
        }
    }
    for s in &specs {
        s.validate()?;
    }
    Ok(specs)
}

fn write_summary(out: Option<&Path>, rows: &[SummaryRow]) -> Result<(), CliError> {
    let mut w = csv_writer(out)?;
    w.write_record(SummaryRow::HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

fn out_dir(out: Option<&Path>) -> Result<Option<&Path>, CliError> {
    if let Some(d) = out {
        fs::create_dir_all(d)?;
    }
    Ok(out)
}

pub fn experiment(a: &ExperimentArgs) -> Result<(), CliError> {
    if a.kind == Kind::Bench {
        return bench(&BenchArgs { n: a.n, p: a.p, k: a.k, trials: a.trials, seed: a.seed, out: a.out.clone() });
    }
    let specs = experiment_specs(a)?;
    let dir = out_dir(a.out.as_deref())?;
    let mut summary = Vec::new();
    let mut trials: Vec<(String, TrialRecord)> = Vec::new();
    for spec in &specs {
        let records = run_experiment(spec)?;
        let labels: Vec<String> = spec.methods.iter().map(|m| m.label().to_string()).collect();
        let parameter = spec.parameter();
        summary.extend(summarize(&records, &labels, &parameter));
        trials.extend(records.into_iter().map(|r| (parameter.clone(), r)));
    }
    match dir {
        Some(d) => {
            let mut w = csv_writer(Some(&d.join("trials.csv")))?;
            let mut header = vec!["parameter"];
            header.extend(TrialRecord::HEADER);
            w.write_record(&header)?;
            for (param, r) in &trials {
                let mut f = vec![param.clone()];
                f.extend(r.fields());
                w.write_record(&f)?;
            }
            w.flush()?;
            write_summary(Some(&d.join("summary.csv")), &summary)
        }
        None => write_summary(None, &summary),
    }
}

pub fn bench(a: &BenchArgs) -> Result<(), CliError> {
    if a.k == 0 || a.k > a.p || a.trials == 0 {
        return Err(CliError::Flags(format!("need 1 <= --k <= --p and --trials >= 1, got k={} p={} trials={}", a.k, a.p, a.trials)));
    }
    let spec = ExperimentSpec { seed: a.seed, ..ExperimentSpec::new(Selector::Sfs, a.n, a.p, 1) };
    let ks: Vec<usize> = (1..=a.k).collect();
    let records = run_bench(&spec, &ks, a.trials)?;
    let parameter = format!("n={};p={}", a.n, a.p);
    let summary = summarize_bench(&records, &parameter);
    match out_dir(a.out.as_deref())? {
        Some(d) => {
            let mut w = csv_writer(Some(&d.join("trials.csv")))?;
            w.write_record(BenchRecord::HEADER)?;
            for r in &records {
                w.write_record(r.fields())?;
            }
            w.flush()?;
            write_summary(Some(&d.join("summary.csv")), &summary)
        }
        None => write_summary(None, &summary),
    }
}

/// Grid points where region membership and the re-run selector disagree,
/// ignoring points within `1e-6` of an endpoint.
fn grid_mismatches(region: &Region64, labels: &[(f64, bool)]) -> (usize, usize) {
    labels.iter().filter(|(z, _)| region.distance_to_endpoint(*z) >= 1e-6).fold((0, 0), |(c, b), &(z, hit)| {
        (c + 1, b + usize::from(region.contains(z) != hit))
    })
}

fn oracle_dataset(a: &OracleArgs) -> Result<Dataset64, CliError> {
    match &a.input {
        Some(p) => load_dataset(p, a.sigma2, None),
        None => {
            let beta = (0..a.p).map(|j| if j < a.p / 2 { 0.5 } else { 0.0 }).collect();
            let spec = ExperimentSpec {
                beta,
                sigma: a.sigma2.sqrt(),
                seed: a.seed,
                methods: vec![Method::Sfs(ConditioningMode::SelectedSet)],
                ..ExperimentSpec::new(Selector::Sfs, a.n, a.p, a.k.clamp(1, a.p.max(1)))
            };
            Ok(generate_synthetic(&spec, 0)?)
        }
    }
}

pub fn oracle_check(a: &OracleArgs) -> Result<(), CliError> {
    if !(a.step > 0.0) {
        return Err(CliError::Flags("--step must be positive".into()));
    }
    let ds = oracle_dataset(a)?;
    let mut w = csv_writer(None)?;
    w.write_record(["feature_index", "check", "mode", "points", "disagreements", "max_endpoint_gap"])?;
    let mut bad = 0usize;
    match a.selector {
        SelectorArg::Sfs => {
            let path = forward_path(ds.x(), ds.y(), a.k)?;
            let m = path.selected();
            let reference = SfsReference::from_path(&path);
            for &j in &path.order {
                let lp = test_direction(&ds, &m, j)?;
                let cfg = HomotopyConfig64::for_line(&lp);
                let walk = trace_sfs(&ds, a.k, &lp, &cfg)?;
                let paths = grid_labels(&lp, &cfg, a.step * lp.sd(), |y| forward_path(ds.x(), y, a.k))?;
                for mode in ConditioningMode::ALL {
                    let region = walk.sfs_region(&reference, mode);
                    let labels: Vec<(f64, bool)> = paths.iter().map(|(z, p)| (*z, reference.accepts(mode, p))).collect();
                    let (c, b) = grid_mismatches(&region, &labels);
                    bad += b;
                    w.write_record([(j + 1).to_string(), "grid".into(), mode.label().into(), c.to_string(), b.to_string(), String::new()])?;
                }
                if a.k <= MAX_ENUMERATION_K {
                    let enumerated = enumerate_polytopes_oracle(&ds, a.k, &lp, &m, &cfg)?;
                    let gap = endpoint_gap(&walk.sfs_region(&reference, ConditioningMode::SelectedSet).restrict(cfg.z_lo, cfg.z_hi), &enumerated);
                    if gap > 1e-8 {
                        bad += 1;
                    }
                    w.write_record([(j + 1).to_string(), "enumeration".into(), "homotopy".into(), String::new(), String::new(), gap.to_string()])?;
                }
            }
        }
        SelectorArg::Fbsfs => {
            let h = run_fbsfs(&ds, ds.y(), FbStart::Null)?;
            let m = h.selected()?.clone();
            for &j in m.indices() {
                let lp = test_direction(&ds, &m, j)?;
                let cfg = HomotopyConfig64::for_line(&lp);
                let hist = grid_labels(&lp, &cfg, a.step * lp.sd(), |y| run_fbsfs(&ds, y, FbStart::Null))?;
                for (mode, label) in [(ConditioningMode::SelectedSet, "homotopy"), (ConditioningMode::SelectedSetAndHistory, "quadratic")] {
                    let region = compute_truncation_region_fbsfs(&ds, &lp, &cfg, &m, mode, FbStart::Null)?;
                    let labels: Vec<(f64, bool)> = hist
                        .iter()
                        .map(|(z, g)| (*z, if mode == ConditioningMode::SelectedSet { g.selected().is_ok_and(|s| *s == m) } else { *g == h }))
                        .collect();
                    let (c, b) = grid_mismatches(&region, &labels);
                    bad += b;
                    w.write_record([(j + 1).to_string(), "grid".into(), label.into(), c.to_string(), b.to_string(), String::new()])?;
                }
            }
        }
    }
    w.flush()?;
    if bad > 0 {
        return Err(CliError::Mismatch(format!("{bad} disagreements with the oracles")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_lists() {
        assert_eq!(parse_candidates("3,6,9").unwrap(), vec![3, 6, 9]);
        assert_eq!(parse_candidates("1-4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_candidates("5, 1-2").unwrap(), vec![1, 2, 5]);
        assert!(parse_candidates("4-2").is_err());
        assert!(parse_candidates("").is_err());
    }

    #[test]
    fn default_coefficients() {
        assert_eq!(default_beta(Kind::Tpr, 5), vec![0.25, 0.25, 0.0, 0.0, 0.0]);
        assert_eq!(default_beta(Kind::Fpr, 3), vec![0.0; 3]);
    }
}
