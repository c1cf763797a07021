//! Seeded Monte-Carlo harness over synthetic linear-model data.
//!
//! Every trial draws from its own ChaCha stream `(seed, trial)`, so results
//! do not depend on scheduling and any single trial can be replayed.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, SkewNormal, StandardNormal, StudentT};
use rayon::prelude::*;

use crate::cv::run_si_sfs_cv;
use crate::error::{Error, Result};
use crate::fbsfs::FbStart;
use crate::homotopy::{test_direction, trace_sfs, HomotopyConfig, SfsReference};
use crate::inference::{data_split_inference, run_si_fbsfs_modes, run_si_sfs_modes, InferenceResult, Method};
use crate::model::{ConditioningMode, Covariance, Dataset, Matrix, Region};
use crate::oracle::{enumerate_polytopes_oracle, MAX_ENUMERATION_K};
use crate::sfs::forward_path;

/// Noise distribution, always rescaled to mean 0 and the requested sd.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    Gaussian,
    Laplace,
    SkewNormal(f64),
    StudentT(f64),
}

impl Noise {
    pub fn validate(self) -> Result<()> {
        match self {
            Noise::SkewNormal(a) if !a.is_finite() => Err(Error::InvalidSpec(format!("skew-normal shape must be finite, got {a}"))),
            Noise::StudentT(df) if !(df > 2.0 && df.is_finite()) => Err(Error::InvalidSpec(format!("student-t needs finite df > 2 for a finite variance, got {df}"))),
            _ => Ok(()),
        }
    }

    /// One draw with mean 0 and variance 1.
    pub fn sample_standardized(self, rng: &mut impl Rng) -> f64 {
        match self {
            Noise::Gaussian => rng.sample(StandardNormal),
            Noise::Laplace => {
                let e: f64 = rng.sample(Exp1);
                let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                s * e / std::f64::consts::SQRT_2
            }
            Noise::SkewNormal(a) => {
                let delta = a / (1.0 + a * a).sqrt();
                let mean = delta * (2.0 / std::f64::consts::PI).sqrt();
                let sd = (1.0 - 2.0 * delta * delta / std::f64::consts::PI).sqrt();
                let x: f64 = SkewNormal::new(0.0, 1.0, a).expect("validated").sample(rng);
                (x - mean) / sd
            }
            Noise::StudentT(df) => {
                let x: f64 = StudentT::new(df).expect("validated").sample(rng);
                x / (df / (df - 2.0)).sqrt()
            }
        }
    }
}

impl fmt::Display for Noise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Noise::Gaussian => f.write_str("gaussian"),
            Noise::Laplace => f.write_str("laplace"),
            Noise::SkewNormal(a) => write!(f, "skew_normal({a})"),
            Noise::StudentT(df) => write!(f, "student_t({df})"),
        }
    }
}

impl FromStr for Noise {
    type Err = Error;

    /// `gaussian`, `laplace`, `skew_normal[(shape)]`, `student_t[(df)]`;
    /// the defaults are shape 10 and df 20.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        let (name, arg) = match s.split_once('(') {
            Some((name, rest)) => {
                let inner = rest.strip_suffix(')').ok_or_else(|| Error::InvalidSpec(format!("unbalanced parenthesis in noise `{s}`")))?;
                let v = inner.trim().parse::<f64>().map_err(|_| Error::InvalidSpec(format!("bad noise parameter `{inner}`")))?;
                (name.trim().to_string(), Some(v))
            }
            None => (s.clone(), None),
        };
        let noise = match name.as_str() {
            "gaussian" | "normal" if arg.is_none() => Noise::Gaussian,
            "laplace" if arg.is_none() => Noise::Laplace,
            "skew_normal" | "skewnormal" => Noise::SkewNormal(arg.unwrap_or(10.0)),
            "student_t" | "t" => Noise::StudentT(arg.unwrap_or(20.0)),
            _ => return Err(Error::InvalidSpec(format!("unknown noise `{s}`"))),
        };
        noise.validate()?;
        Ok(noise)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    Sfs,
    Fbsfs,
}

impl FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sfs" => Ok(Selector::Sfs),
            "fbsfs" => Ok(Selector::Fbsfs),
            other => Err(Error::InvalidSpec(format!("unknown selector `{other}`"))),
        }
    }
}

/// Parses a method label for `selector`: `homotopy`, `homotopy-h`,
/// `homotopy-s`, `polytope`, `ds` for forward selection; `homotopy`,
/// `quadratic` for forward-backward selection; `homotopy-cv` for forward
/// selection with validation-chosen `K`.
pub fn parse_method(label: &str, selector: Selector) -> Result<Method> {
    let l = label.trim().to_ascii_lowercase();
    match (selector, l.as_str()) {
        (Selector::Sfs, "ds") => Ok(Method::DataSplit),
        (Selector::Sfs, "homotopy-cv") => Ok(Method::SfsCv),
        (Selector::Sfs, _) => Ok(Method::Sfs(l.parse()?)),
        (Selector::Fbsfs, "homotopy") => Ok(Method::Fbsfs(ConditioningMode::SelectedSet)),
        (Selector::Fbsfs, "quadratic") => Ok(Method::Fbsfs(ConditioningMode::SelectedSetAndHistory)),
        (Selector::Fbsfs, _) => Err(Error::InvalidSpec(format!("method `{label}` is not available for forward-backward selection"))),
    }
}

/// Default method set of each selector.
pub fn default_methods(selector: Selector) -> Vec<Method> {
    match selector {
        Selector::Sfs => {
            let mut m: Vec<Method> = ConditioningMode::ALL.iter().map(|&c| Method::Sfs(c)).collect();
            m.push(Method::DataSplit);
            m
        }
        Selector::Fbsfs => vec![
            Method::Fbsfs(ConditioningMode::SelectedSet),
            Method::Fbsfs(ConditioningMode::SelectedSetAndHistory),
        ],
    }
}

/// Synthetic experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub selector: Selector,
    pub methods: Vec<Method>,
    pub n: usize,
    pub p: usize,
    /// Steps for forward selection with fixed `K`.
    pub k: usize,
    /// Candidate `K` values for validation-chosen `K`.
    pub candidates: Vec<usize>,
    pub folds: usize,
    pub beta: Vec<f64>,
    pub noise: Noise,
    pub sigma: f64,
    pub trials: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl ExperimentSpec {
    /// Null forward-selection spec with all five methods.
    pub fn new(selector: Selector, n: usize, p: usize, k: usize) -> Self {
        ExperimentSpec {
            selector,
            methods: default_methods(selector),
            n,
            p,
            k,
            candidates: Vec::new(),
            folds: 5,
            beta: vec![0.0; p],
            noise: Noise::Gaussian,
            sigma: 1.0,
            trials: 100,
            alpha: 0.05,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.beta.len() != self.p {
            return bad(format!("beta has length {} but p={}", self.beta.len(), self.p));
        }
        if self.p == 0 || self.n < 2 {
            return bad(format!("need p >= 1 and n >= 2, got n={} p={}", self.n, self.p));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if self.methods.is_empty() {
            return bad("no methods requested".into());
        }
        self.noise.validate()?;
        let uses_k = self.methods.iter().any(|m| matches!(m, Method::Sfs(_) | Method::DataSplit));
        if uses_k && (self.k == 0 || self.k > self.p) {
            return Err(Error::InvalidK { k: self.k, p: self.p });
        }
        if self.methods.contains(&Method::SfsCv) {
            if self.candidates.is_empty() || self.candidates.iter().any(|&k| k == 0 || k > self.p) {
                return bad(format!("candidates {:?} must be non-empty and within 1..={}", self.candidates, self.p));
            }
            if self.folds < 2 || self.folds > self.n {
                return bad(format!("folds must lie in 2..=n, got {}", self.folds));
            }
        }
        for m in &self.methods {
            let ok = match (self.selector, m) {
                (Selector::Sfs, Method::Sfs(_) | Method::DataSplit | Method::SfsCv) => true,
                (Selector::Fbsfs, Method::Fbsfs(c)) => matches!(c, ConditioningMode::SelectedSet | ConditioningMode::SelectedSetAndHistory),
                _ => false,
            };
            if !ok {
                return bad(format!("method `{m}` does not match the selector"));
            }
        }
        Ok(())
    }

    /// Short description of the varying parameters.
    pub fn parameter(&self) -> String {
        let mut s = format!("n={};p={}", self.n, self.p);
        if self.methods.contains(&Method::SfsCv) {
            let c: Vec<String> = self.candidates.iter().map(|k| k.to_string()).collect();
            s += &format!(";K={{{}}}", c.join(","));
        } else if self.selector == Selector::Sfs {
            s += &format!(";K={}", self.k);
        }
        if self.noise != Noise::Gaussian {
            s += &format!(";noise={}", self.noise);
        }
        s
    }
}

/// Per-trial random stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Synthetic data for one trial. Rows of `X` are standard normal, `y` is
/// `X beta + sigma e` with standardized noise `e`, and the columns of `X`
/// are rescaled to unit length afterwards. `Sigma = sigma^2 I`.
pub fn generate_synthetic(spec: &ExperimentSpec, trial: u64) -> Result<Dataset<f64>> {
    generate_with_rng(spec, &mut trial_rng(spec.seed, trial))
}

fn generate_with_rng(spec: &ExperimentSpec, rng: &mut ChaCha8Rng) -> Result<Dataset<f64>> {
    spec.validate()?;
    let (n, p) = (spec.n, spec.p);
    let mut x = Matrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            x.set(i, j, rng.sample(StandardNormal));
        }
    }
    let signal = x.mul_vec(&spec.beta);
    let y = signal.iter().map(|&m| m + spec.sigma * spec.noise.sample_standardized(rng)).collect();
    let sigma = Covariance::isotropic(n, spec.sigma * spec.sigma)?;
    Ok(Dataset::with_normalized_columns(x, y, sigma)?.0)
}

/// One inference outcome of one method in one trial, or a failure row.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub method: String,
    /// 1-based feature index; 0 on failure rows.
    pub feature: usize,
    /// Whether the feature's true coefficient is nonzero.
    pub signal: bool,
    pub coefficient: f64,
    pub p_selective: Option<f64>,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n_intervals: usize,
    pub rejected: bool,
    /// The null feature drawn for the false-positive count of this trial.
    pub tested: bool,
    /// Selected by every method in this trial.
    pub common: bool,
    pub k_selected: usize,
    pub error: Option<String>,
}

impl TrialRecord {
    pub const HEADER: [&'static str; 14] = [
        "trial", "method", "feature", "signal", "coefficient", "p_selective", "ci_lo", "ci_hi", "n_intervals", "rejected", "tested", "common",
        "k_selected", "error",
    ];

    pub fn fields(&self) -> Vec<String> {
        let b = |v: bool| if v { "1" } else { "0" }.to_string();
        vec![
            self.trial.to_string(),
            self.method.clone(),
            self.feature.to_string(),
            b(self.signal),
            self.coefficient.to_string(),
            self.p_selective.map(|p| p.to_string()).unwrap_or_default(),
            self.ci_lo.to_string(),
            self.ci_hi.to_string(),
            self.n_intervals.to_string(),
            b(self.rejected),
            b(self.tested),
            b(self.common),
            self.k_selected.to_string(),
            self.error.clone().unwrap_or_default(),
        ]
    }

    pub fn is_failure(&self) -> bool {
        self.error.is_some()
    }

    pub fn ci_length(&self) -> f64 {
        self.ci_hi - self.ci_lo
    }

    fn failure(trial: u64, method: Method, e: &Error) -> Self {
        TrialRecord {
            trial,
            method: method.label().to_string(),
            feature: 0,
            signal: false,
            coefficient: f64::NAN,
            p_selective: None,
            ci_lo: f64::NAN,
            ci_hi: f64::NAN,
            n_intervals: 0,
            rejected: false,
            tested: false,
            common: false,
            k_selected: 0,
            error: Some(e.to_string()),
        }
    }
}

fn run_methods(spec: &ExperimentSpec, ds: &Dataset<f64>, aux_seed: u64) -> Vec<(Method, Result<(usize, Vec<InferenceResult<f64>>)>)> {
    let mut out = Vec::new();
    let sfs_modes: Vec<ConditioningMode> = spec.methods.iter().filter_map(|m| if let Method::Sfs(c) = m { Some(*c) } else { None }).collect();
    let fb_modes: Vec<ConditioningMode> = spec.methods.iter().filter_map(|m| if let Method::Fbsfs(c) = m { Some(*c) } else { None }).collect();
    if !sfs_modes.is_empty() {
        match run_si_sfs_modes(ds, spec.k, &sfs_modes, spec.alpha) {
            Ok(groups) => out.extend(sfs_modes.iter().zip(groups).map(|(&c, g)| (Method::Sfs(c), Ok((spec.k, g))))),
            Err(e) => out.extend(sfs_modes.iter().map(|&c| (Method::Sfs(c), Err(e.clone())))),
        }
    }
    if !fb_modes.is_empty() {
        match run_si_fbsfs_modes(ds, &fb_modes, spec.alpha, FbStart::Null) {
            Ok(groups) => out.extend(fb_modes.iter().zip(groups).map(|(&c, g)| {
                let k = g.len();
                (Method::Fbsfs(c), Ok((k, g)))
            })),
            Err(e) => out.extend(fb_modes.iter().map(|&c| (Method::Fbsfs(c), Err(e.clone())))),
        }
    }
    if spec.methods.contains(&Method::DataSplit) {
        out.push((Method::DataSplit, data_split_inference(ds, spec.k, spec.alpha, aux_seed).map(|r| (spec.k, r))));
    }
    if spec.methods.contains(&Method::SfsCv) {
        let r = run_si_sfs_cv(ds, &spec.candidates, spec.alpha, spec.folds, aux_seed).map(|o| (o.k_selected, o.results));
        out.push((Method::SfsCv, r));
    }
    // Keep the requested order.
    out.sort_by_key(|(m, _)| spec.methods.iter().position(|x| x == m));
    out
}

/// Runs one trial and returns its records in method order.
pub fn run_trial(spec: &ExperimentSpec, trial: u64) -> Result<Vec<TrialRecord>> {
    let mut rng = trial_rng(spec.seed, trial);
    let ds = generate_with_rng(spec, &mut rng)?;
    let aux_seed = rng.next_u64();
    let pick: f64 = rng.random();
    let outcomes = run_methods(spec, &ds, aux_seed);
    let ok_sets: Vec<Vec<usize>> = outcomes.iter().filter_map(|(_, r)| r.as_ref().ok().map(|(_, v)| v.iter().map(|x| x.feature).collect())).collect();
    let mut records = Vec::new();
    for (method, outcome) in outcomes {
        match outcome {
            Err(e) => records.push(TrialRecord::failure(trial, method, &e)),
            Ok((k_selected, results)) => {
                let nulls: Vec<usize> = results.iter().filter(|r| spec.beta[r.feature] == 0.0).map(|r| r.feature).collect();
                let tested = (!nulls.is_empty()).then(|| nulls[((pick * nulls.len() as f64) as usize).min(nulls.len() - 1)]);
                for r in results {
                    records.push(TrialRecord {
                        trial,
                        method: method.label().to_string(),
                        feature: r.feature + 1,
                        signal: spec.beta[r.feature] != 0.0,
                        coefficient: r.coefficient,
                        p_selective: r.p_selective,
                        ci_lo: r.ci_lo,
                        ci_hi: r.ci_hi,
                        n_intervals: r.n_intervals,
                        rejected: r.rejects(spec.alpha),
                        tested: tested == Some(r.feature),
                        common: ok_sets.iter().all(|s| s.contains(&r.feature)),
                        k_selected,
                        error: None,
                    });
                }
            }
        }
    }
    Ok(records)
}

/// All trials in parallel, concatenated in trial order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<TrialRecord>> {
    spec.validate()?;
    let per: Vec<Vec<TrialRecord>> = (0..spec.trials as u64).into_par_iter().map(|t| run_trial(spec, t)).collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

/// One plot-ready summary line.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub metric: String,
    pub parameter: String,
    pub value: f64,
    pub stderr: f64,
    pub count: usize,
    pub failures: usize,
}

impl SummaryRow {
    pub const HEADER: [&'static str; 7] = ["method", "metric", "parameter", "value", "stderr", "count", "failures"];

    pub fn fields(&self) -> Vec<String> {
        vec![
            self.method.clone(),
            self.metric.clone(),
            self.parameter.clone(),
            self.value.to_string(),
            self.stderr.to_string(),
            self.count.to_string(),
            self.failures.to_string(),
        ]
    }
}

fn proportion(hits: usize, n: usize) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, f64::NAN);
    }
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// One-sample Kolmogorov-Smirnov statistic against Uniform[0, 1].
pub fn ks_uniform(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len() as f64;
    v.iter().enumerate().fold(0.0f64, |d, (i, &x)| d.max((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
}

/// Summary statistics computed from trial records only:
/// - `fpr`: rejection rate of the drawn null feature, per trial;
/// - `tpr`: rejected signal features over selected signal features;
/// - `ci_length`: mean CI length over features selected by every method;
/// - `ks`: KS distance of all null p-values from uniform.
pub fn summarize(records: &[TrialRecord], methods: &[String], parameter: &str) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for m in methods {
        let recs: Vec<&TrialRecord> = records.iter().filter(|r| &r.method == m).collect();
        let failures = recs.iter().filter(|r| r.is_failure()).count();
        let ok: Vec<&TrialRecord> = recs.into_iter().filter(|r| !r.is_failure()).collect();
        let mut push = |metric: &str, (value, stderr): (f64, f64), count: usize| {
            rows.push(SummaryRow { method: m.clone(), metric: metric.into(), parameter: parameter.into(), value, stderr, count, failures });
        };
        let tested: Vec<_> = ok.iter().filter(|r| r.tested && !r.signal).collect();
        if !tested.is_empty() {
            push("fpr", proportion(tested.iter().filter(|r| r.rejected).count(), tested.len()), tested.len());
        }
        let signal: Vec<_> = ok.iter().filter(|r| r.signal).collect();
        if !signal.is_empty() {
            push("tpr", proportion(signal.iter().filter(|r| r.rejected).count(), signal.len()), signal.len());
        }
        let lengths: Vec<f64> = ok.iter().filter(|r| r.common).map(|r| r.ci_length()).collect();
        if !lengths.is_empty() {
            push("ci_length", mean_se(&lengths), lengths.len());
        }
        let null_p: Vec<f64> = ok.iter().filter(|r| !r.signal).filter_map(|r| r.p_selective).collect();
        if !null_p.is_empty() {
            push("ks", (ks_uniform(&null_p), f64::NAN), null_p.len());
        }
    }
    rows
}

/// Timing and breakpoint measurements of one benchmark instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub instance: u64,
    pub k: usize,
    pub homotopy_seconds: f64,
    pub breakpoints: usize,
    pub enumeration_seconds: Option<f64>,
    /// Largest endpoint discrepancy between the two regions.
    pub max_endpoint_gap: Option<f64>,
}

impl BenchRecord {
    pub const HEADER: [&'static str; 6] = ["instance", "k", "homotopy_seconds", "breakpoints", "enumeration_seconds", "max_endpoint_gap"];

    pub fn fields(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.instance.to_string(),
            self.k.to_string(),
            self.homotopy_seconds.to_string(),
            self.breakpoints.to_string(),
            opt(self.enumeration_seconds),
            opt(self.max_endpoint_gap),
        ]
    }
}

/// Times the selected-set region of the last selected feature by homotopy
/// and, for `K <= 5`, by enumeration; instances are drawn from `spec` with
/// `K` overridden. Runs serially so timings are not contended.
pub fn run_bench(spec: &ExperimentSpec, ks: &[usize], instances: usize) -> Result<Vec<BenchRecord>> {
    let mut out = Vec::new();
    for &k in ks {
        let s = ExperimentSpec { k, methods: vec![Method::Sfs(ConditioningMode::SelectedSet)], ..spec.clone() };
        s.validate()?;
        for inst in 0..instances as u64 {
            let ds = generate_synthetic(&s, inst)?;
            let path = forward_path(ds.x(), ds.y(), k)?;
            let selected = path.selected();
            let lp = test_direction(&ds, &selected, path.order[k - 1])?;
            let cfg = HomotopyConfig::for_line(&lp);
            let t0 = Instant::now();
            let walk = trace_sfs(&ds, k, &lp, &cfg)?;
            let reference = SfsReference::from_path(&path);
            let region = walk.sfs_region(&reference, ConditioningMode::SelectedSet);
            let homotopy_seconds = t0.elapsed().as_secs_f64();
            let (enumeration_seconds, max_endpoint_gap) = if k <= MAX_ENUMERATION_K {
                let t1 = Instant::now();
                let enumerated = enumerate_polytopes_oracle(&ds, k, &lp, &selected, &cfg)?;
                let secs = t1.elapsed().as_secs_f64();
                (Some(secs), Some(endpoint_gap(&region.restrict(cfg.z_lo, cfg.z_hi), &enumerated)))
            } else {
                (None, None)
            };
            out.push(BenchRecord { instance: inst, k, homotopy_seconds, breakpoints: walk.breakpoint_count(), enumeration_seconds, max_endpoint_gap });
        }
    }
    Ok(out)
}

/// Largest endpoint difference of two regions with matching structure, or
/// infinity when the interval counts differ.
pub fn endpoint_gap(a: &Region<f64>, b: &Region<f64>) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.intervals().iter().zip(b.intervals()).fold(0.0f64, |g, (x, y)| g.max((x.lo - y.lo).abs()).max((x.hi - y.hi).abs()))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Per-`K` summaries: mean times and mean and median breakpoint counts.
pub fn summarize_bench(records: &[BenchRecord], parameter: &str) -> Vec<SummaryRow> {
    let mut ks: Vec<usize> = records.iter().map(|r| r.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut rows = Vec::new();
    for k in ks {
        let recs: Vec<&BenchRecord> = records.iter().filter(|r| r.k == k).collect();
        let param = format!("{parameter};K={k}");
        let row = |method: &str, metric: &str, (value, stderr): (f64, f64), count: usize| SummaryRow {
            method: method.into(),
            metric: metric.into(),
            parameter: param.clone(),
            value,
            stderr,
            count,
            failures: 0,
        };
        let ht: Vec<f64> = recs.iter().map(|r| r.homotopy_seconds).collect();
        rows.push(row("homotopy", "time_s", mean_se(&ht), ht.len()));
        let mut bp: Vec<f64> = recs.iter().map(|r| r.breakpoints as f64).collect();
        rows.push(row("homotopy", "breakpoints", mean_se(&bp), bp.len()));
        rows.push(row("homotopy", "breakpoints_median", (median(&mut bp), f64::NAN), bp.len()));
        let et: Vec<f64> = recs.iter().filter_map(|r| r.enumeration_seconds).collect();
        if !et.is_empty() {
            rows.push(row("enumeration", "time_s", mean_se(&et), et.len()));
        }
    }
    rows
}
