use std::path::Path;
use std::process::{Command, Output};

fn stepsi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stepsi")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Deterministic design: y equals column 2 plus a small perturbation.
fn write_data(dir: &Path) -> String {
    let mut s = String::from("x1,x2,x3,y\n");
    for i in 0..25 {
        let t = i as f64;
        let (x1, x2, x3) = ((0.7 * t).sin(), (1.3 * t + 0.4).cos(), ((t * 0.37).fract() - 0.5));
        let y = 3.0 * x2 + 0.05 * (2.1 * t).sin();
        s += &format!("{x1},{x2},{x3},{y}\n");
    }
    let path = dir.join("data.csv");
    std::fs::write(&path, s).unwrap();
    path.to_str().unwrap().to_string()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn analyze_selects_the_generating_column_first() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let o = stepsi(&["analyze", "--input", &data, "--k", "2", "--sigma2", "0.01"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.starts_with("feature_index,coefficient,p_selective,ci_lo,ci_hi,n_intervals,mode\n"));
    let r = rows(&out);
    assert_eq!(r.len(), 2);
    assert_eq!(r[0][0], "2");
    assert!(r[0][1].parse::<f64>().unwrap().abs() > 5.0);
    assert_eq!(r[0][6], "homotopy");
}

#[test]
fn polytope_and_homotopy_share_selection_and_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let a = rows(&stdout(&stepsi(&["analyze", "--input", &data, "--k", "3", "--mode", "homotopy"])));
    let b = rows(&stdout(&stepsi(&["analyze", "--input", &data, "--k", "3", "--mode", "polytope"])));
    assert_eq!(a.len(), 3);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x[0], y[0]);
        assert_eq!(x[1], y[1]);
        let (lx, ly) = (x[4].parse::<f64>().unwrap() - x[3].parse::<f64>().unwrap(), y[4].parse::<f64>().unwrap() - y[3].parse::<f64>().unwrap());
        // Polytope conditions on more, so its interval count is one.
        assert_eq!(y[5], "1");
        assert!(lx.is_finite() && ly.is_finite());
    }
}

#[test]
fn output_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let out = dir.path().join("res.csv");
    let o = stepsi(&["analyze", "--input", &data, "--selector", "fbsfs", "--mode", "quadratic", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let r = rows(&text);
    assert!(!r.is_empty());
    assert!(r.iter().all(|row| row.len() == 7 && row[6] == "quadratic"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    assert_eq!(stepsi(&["analyze", "--input", &data, "--k", "7"]).status.code(), Some(2));
    assert_eq!(stepsi(&["analyze", "--input", &data, "--mode", "nope"]).status.code(), Some(2));
    assert_eq!(stepsi(&["analyze", "--input", &data, "--alpha", "1.5"]).status.code(), Some(2));
    assert_eq!(stepsi(&["frobnicate"]).status.code(), Some(2));
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x1,y\n1,2\n3,oops\n").unwrap();
    let o = stepsi(&["analyze", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    // Two identical columns are rank deficient once the first enters.
    let dup = dir.path().join("dup.csv");
    std::fs::write(&dup, "x1,x2,y\n1,1,1\n2,2,2.5\n3,3,2.9\n").unwrap();
    assert_eq!(stepsi(&["analyze", "--input", dup.to_str().unwrap(), "--k", "2"]).status.code(), Some(3));
}

#[test]
fn experiment_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let d = dir.path().join(sub);
        let o = stepsi(&["experiment", "tpr", "--trials", "8", "--n", "40", "--seed", "3", "--out", d.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (std::fs::read(d.join("trials.csv")).unwrap(), std::fs::read_to_string(d.join("summary.csv")).unwrap())
    };
    let (t1, s1) = run("a");
    let (t2, s2) = run("b");
    assert_eq!(t1, t2);
    assert_eq!(s1, s2);
    assert!(s1.starts_with("method,metric,parameter,value,stderr,count,failures\n"));
    assert!(s1.lines().any(|l| l.starts_with("homotopy,tpr,")));
}

#[test]
fn summary_is_recomputable_from_trials() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("fpr");
    let o = stepsi(&["experiment", "fpr", "--trials", "30", "--n", "40", "--mode", "homotopy,ds", "--out", d.to_str().unwrap()]);
    assert!(o.status.success());
    let trials = std::fs::read_to_string(d.join("trials.csv")).unwrap();
    let summary = std::fs::read_to_string(d.join("summary.csv")).unwrap();
    let header: Vec<&str> = trials.lines().next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    for method in ["homotopy", "ds"] {
        let (mut tested, mut rejected) = (0, 0);
        for line in trials.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            if f[col("method")] == method && f[col("tested")] == "1" && f[col("signal")] == "0" {
                tested += 1;
                rejected += usize::from(f[col("rejected")] == "1");
            }
        }
        let row = summary.lines().find(|l| l.starts_with(&format!("{method},fpr,"))).unwrap();
        let value: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(tested, 30);
        assert!((value - rejected as f64 / tested as f64).abs() < 1e-15);
    }
}

#[test]
fn robustness_runs_every_noise_family() {
    let o = stepsi(&["experiment", "robustness", "--selector", "fbsfs", "--trials", "4", "--n", "30"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    for noise in ["laplace", "skew_normal(10)", "student_t(20)"] {
        assert!(out.contains(noise), "{out}");
    }
}

#[test]
fn cv_experiment_compares_candidate_sets() {
    let o = stepsi(&["experiment", "cv", "--trials", "3", "--n", "40", "--p", "5", "--k", "3", "--k-candidates", "1,3", "--k-candidates", "1-5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("K={1,3}") && out.contains("K={1,2,3,4,5}") && out.contains("homotopy,"));
}

#[test]
fn bench_and_oracle_check() {
    let o = stepsi(&["bench", "--k", "2", "--trials", "2", "--n", "20", "--p", "4"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("enumeration,time_s"));
    let o = stepsi(&["oracle-check", "--k", "2", "--n", "12", "--p", "4", "--step", "0.01"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let o = stepsi(&["oracle-check", "--selector", "fbsfs", "--n", "12", "--p", "3", "--step", "0.01"]);
    assert!(o.status.success(), "{}", stdout(&o));
}
