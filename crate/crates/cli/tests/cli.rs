use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn volmaj() -> Command {
    Command::new(env!("CARGO_BIN_EXE_volmaj"))
}

struct Run {
    out: Output,
    dir: PathBuf,
}

impl Run {
    fn code(&self) -> i32 {
        self.out.status.code().expect("exit code")
    }

    fn stdout(&self) -> String {
        String::from_utf8_lossy(&self.out.stdout).into_owned()
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.out.stderr).into_owned()
    }

    fn summary(&self) -> BTreeMap<String, String> {
        parse_summary(&self.stdout())
    }

    fn file(&self, name: &str) -> String {
        std::fs::read_to_string(self.dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }
}

fn parse_summary(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn run(tmp: &Path, cmd: &str, config: &str, extra: &[&str]) -> Run {
    let cfg = tmp.join(format!("{cmd}.toml"));
    std::fs::write(&cfg, config).unwrap();
    let dir = tmp.join(format!("{cmd}-out"));
    let out = volmaj()
        .arg(cmd)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .args(extra)
        .output()
        .unwrap();
    Run { out, dir }
}

fn value(s: &BTreeMap<String, String>, key: &str) -> f64 {
    s.get(key).unwrap_or_else(|| panic!("missing {key} in {s:?}")).parse().unwrap()
}

#[test]
fn majorant_classifies_reference_entries() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("example2", "ValueBlowUp", std::f64::consts::FRAC_PI_2),
        ("lemma3_demo", "DerivativeBlowUp", 2.0 / 3.0),
        ("linear_case", "Global", f64::INFINITY),
    ];
    for (name, class, horizon) in cases {
        let r = run(
            tmp.path(),
            "majorant",
            &format!("[problem]\ncorpus = \"{name}\"\n\n[mesh]\nn = 100\n"),
            &[],
        );
        assert_eq!(r.code(), 0, "{name}: {}", r.stderr());
        let s = r.summary();
        assert_eq!(s["classification"], class, "{name}");
        if horizon.is_finite() {
            assert!((value(&s, "t_plus") - horizon).abs() < 1e-6, "{name}: {}", s["t_plus"]);
        } else {
            assert_eq!(s["t_plus"], "inf");
        }
        let csv = r.file("majorant.csv");
        assert!(csv.starts_with("t,omega,z,z_last\n"));
        assert_eq!(csv.lines().count(), 102);
    }
}

#[test]
fn majorant_csv_matches_tan_for_example2() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(
        tmp.path(),
        "majorant",
        "[majorant]\nf = \"w + t\"\ngamma = \"z^2\"\n\n[mesh]\nt_end = 1.0\nn = 50\n",
        &[],
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    for line in r.file("majorant.csv").lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[2] - v[0].tan()).abs() <= 1e-7 * (1.0 + v[0].tan()), "{line}");
    }
}

#[test]
fn lyapunov_reports_tangency() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(
        tmp.path(),
        "lyapunov",
        "[lyapunov]\nf = \"t*r^2 + t\"\nf_r = \"2*t*r\"\nc = 1.0\n\n[mesh]\nn = 10\n",
        &[],
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let s = r.summary();
    assert_eq!(s["r_plus"], "1.00000000e0");
    assert_eq!(s["t_plus"], "5.00000000e-1");
    // r(t) = (1 - sqrt(1 - 4t^2)) / (2t)
    for line in r.file("branch.csv").lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let exact = if v[0] == 0.0 { 0.0 } else { (1.0 - (1.0 - 4.0 * v[0] * v[0]).sqrt()) / (2.0 * v[0]) };
        assert!((v[1] - exact).abs() < 1e-7, "{line}");
    }
}

#[test]
fn lyapunov_exponential_tangency() {
    let tmp = tempfile::tempdir().unwrap();
    // r = t e^r and 1 = t e^r meet at r = 1, t = 1/e
    let r = run(tmp.path(), "lyapunov", "[lyapunov]\nf = \"t*exp(r)\"\nc = 1.0\n", &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let s = r.summary();
    assert!((value(&s, "r_plus") - 1.0).abs() < 1e-7);
    assert!((value(&s, "t_plus") - (-1.0f64).exp()).abs() < 1e-7);
}

#[test]
fn non_convex_lyapunov_reports_the_violation() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(tmp.path(), "lyapunov", "[lyapunov]\nf = \"t*r^2 + t - r^3\"\nc = 1.0\n", &[]);
    assert_eq!(r.code(), 2);
    let s = r.summary();
    assert_eq!(s["convexity"], "fails");
    assert_eq!(s["convexity_violation"], "Concave");
    assert!(r.file("summary.txt").contains("violation_r = "));
    assert!(!r.dir.join("branch.csv").exists());
}

#[test]
fn example2_diagnostics_stay_below_tan() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(
        tmp.path(),
        "solve",
        "[problem]\ncorpus = \"example2\"\n\n[mesh]\ntheta = 0.25\nn = 60\n",
        &[],
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let t_end = value(&r.summary(), "t_end");
    assert!((t_end - 0.25 * std::f64::consts::FRAC_PI_2).abs() < 1e-7);
    for line in r.file("diagnostics.csv").lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        for d in &v[1..] {
            assert!(*d <= v[0].tan() + 1e-9, "{line}");
        }
    }
}

#[test]
fn example1_main_solution_is_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(tmp.path(), "solve", "[problem]\ncorpus = \"example1\"\nparams = { p = 2 }\n\n[mesh]\nn = 50\n", &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let s = r.summary();
    assert_eq!(s["iterations"], "1");
    assert_eq!(s["max_norm"], "0.00000000e0");
}

#[test]
fn linear_test_reaches_e_minus_one() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(tmp.path(), "solve", "[problem]\ncorpus = \"linear_test\"\n\n[mesh]\nn = 400\n", &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let csv = r.file("solution.csv");
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last[0], 1.0);
    assert!((last[1] - 1.718282).abs() < 1e-5, "{}", last[1]);
}

#[test]
fn help_documents_precedence_and_exit_codes() {
    let out = volmaj().arg("--help").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("-t^2 is -(t^2)"));
    assert!(text.contains("5 a sampled condition failed"));
}

#[test]
fn solve_example2_writes_solution_and_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(
        tmp.path(),
        "solve",
        "[problem]\ncorpus = \"example2\"\nparams = { m = 9 }\n\n[mesh]\nt_end = 0.4\nn = 40\n",
        &[],
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let s = r.summary();
    assert_eq!(s["status"], "converged");
    assert_eq!(s["domination"], "holds");
    assert!(r.file("solution.csv").starts_with("t,norm,residual,bound\n"));
    assert!(r.file("diagnostics.csv").starts_with("t,u_max,du_max,d2u_max\n"));
    assert!(r.file("summary.txt").contains("timestamp = "));
}

#[test]
fn solve_linear_test_tracks_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(tmp.path(), "solve", "[problem]\ncorpus = \"linear_test\"\n\n[mesh]\nn = 200\n", &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    // trapezoid error for e^t - 1 at h = 1/200
    assert!(value(&r.summary(), "max_error_vs_closed_form") < 1e-4);
}

#[test]
fn solve_without_convergence_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(
        tmp.path(),
        "solve",
        "[problem]\ncorpus = \"linear_test\"\n\n[solver]\nn_max = 2\n\n[mesh]\nn = 20\n",
        &[],
    );
    assert_eq!(r.code(), 4);
    assert_eq!(r.summary()["status"], "not converged");
    assert!(r.dir.join("solution.csv").exists());
}

#[test]
fn invalid_configurations_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("majorant", "[majorant]\nf = \"w +\"\ngamma = \"z\"\n"),
        ("majorant", "[majorant]\nf = \"w + q\"\ngamma = \"z\"\n"),
        ("majorant", "[majorant]\nf = \"w\"\ngamma = \"z\"\nextra = 1\n"),
        ("majorant", "[majorant]\nf = \"w + t\"\ngamma = \"z^2\"\n\n[mesh]\nt_end = 2.0\n"),
        ("majorant", "[problem]\ncorpus = \"nope\"\n"),
        ("majorant", "[problem]\ncorpus = \"example2\"\nparams = { q = 1 }\n"),
        ("majorant", "[problem]\ncorpus = \"example2\"\n\n[mesh]\nt_end = 1.0\ntheta = 0.5\n"),
        ("solve", "[majorant]\nf = \"w\"\ngamma = \"z\"\n"),
        ("lyapunov", "[lyapunov]\nf = \"t*r^2 + t - r^3\"\nc = 1.0\n"),
        ("lyapunov", "[lyapunov]\nf = \"r + t\"\nc = 1.0\n"),
        ("verify", "[mesh]\nn = 0\n"),
    ];
    for (cmd, cfg) in cases {
        let r = run(tmp.path(), cmd, cfg, &[]);
        assert_eq!(r.code(), 2, "{cmd} with {cfg:?}: {}", r.stderr());
        assert!(r.stderr().starts_with("error: "), "{}", r.stderr());
    }
    let missing = volmaj().args(["majorant", "--config", "/nonexistent/x.toml"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    // r = t r^2 and 1 = 2 t r cannot hold together
    let r = run(tmp.path(), "lyapunov", "[lyapunov]\nf = \"t*r^2\"\nc = 1.0\n", &[]);
    assert_eq!(r.code(), 3, "{}", r.stderr());
    assert!(r.stderr().contains("no positive solution"));
}

#[test]
fn failed_condition_exits_5_with_witnesses() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[problem]\nkernel = \"3*u^2 + 1\"\nphi = \"w - u + t\"\n\n\
               [majorant]\nf = \"w + t\"\ngamma = \"z^2\"\n\n[mesh]\nt_end = 0.5\nn = 20\n\n[verify]\nsamples = 20\n";
    let r = run(tmp.path(), "verify", cfg, &[]);
    assert_eq!(r.code(), 5);
    assert_eq!(r.summary()["condition.A"], "fail");
    let w = r.file("witnesses.csv");
    assert!(w.starts_with("condition,witness\n"));
    assert!(w.lines().count() > 1);
}

#[test]
fn verify_without_problem_skips_problem_conditions() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(
        tmp.path(),
        "verify",
        "[majorant]\nf = \"1 + w^2\"\ngamma = \"z\"\n\n[mesh]\nn = 50\n\n[verify]\nsamples = 10\n",
        &[],
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let s = r.summary();
    for c in ["A", "D", "E"] {
        assert_eq!(s[&format!("condition.{c}")], "skipped");
    }
    assert_eq!(s["condition.B"], "pass (sampled, not proven)");
    let csv = r.file("conditions.csv");
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[problem]\ncorpus = \"example2\"\nparams = { m = 7 }\n\n[mesh]\nt_end = 0.3\nn = 15\n\n[verify]\nsamples = 15\n";
    let mut seen = Vec::new();
    for k in 0..2 {
        let sub = tmp.path().join(k.to_string());
        std::fs::create_dir(&sub).unwrap();
        let r = run(&sub, "verify", cfg, &["--no-timestamp", "--jobs", if k == 0 { "1" } else { "3" }]);
        assert_eq!(r.code(), 0, "{}", r.stderr());
        seen.push((r.stdout(), r.file("summary.txt"), r.file("conditions.csv")));
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn batch_runs_write_per_run_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[[runs]]\nname = \"tan\"\n[runs.majorant]\nf = \"w + t\"\ngamma = \"z^2\"\n[runs.mesh]\nt_end = 1.0\nn = 20\n\n\
               [[runs]]\nname = \"exp\"\n[runs.problem]\ncorpus = \"linear_case\"\n[runs.mesh]\nn = 20\n\n\
               [[runs]]\nname = \"broken\"\n[runs.majorant]\nf = \"w +\"\ngamma = \"z\"\n";
    let r = run(tmp.path(), "majorant", cfg, &["--jobs", "2", "--no-timestamp"]);
    assert_eq!(r.code(), 2);
    let out = r.stdout();
    let tan = out.find("[tan]").unwrap();
    let exp = out.find("[exp]").unwrap();
    let broken = out.find("[broken]").unwrap();
    assert!(tan < exp && exp < broken);
    assert!(out.contains("exit = 2"));
    assert!(r.dir.join("tan/majorant.csv").exists());
    assert!(r.dir.join("exp/majorant.csv").exists());
    assert!(!r.dir.join("broken").exists());
}

#[test]
fn batch_names_must_be_distinct() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[[runs]]\nname = \"a\"\n[runs.majorant]\nf = \"w\"\ngamma = \"z\"\n\n\
               [[runs]]\nname = \"a\"\n[runs.majorant]\nf = \"w\"\ngamma = \"z\"\n";
    assert_eq!(run(tmp.path(), "majorant", cfg, &[]).code(), 2);
}

#[test]
fn corpus_list_names_every_entry() {
    let out = volmaj().args(["corpus", "list"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["example1", "example2", "linear_case", "lemma3_demo", "linear_test"] {
        assert!(text.lines().any(|l| l == name), "{name}");
    }
    assert!(text.contains("m = 21"));
}
