use std::process::{Command, Output};

fn whf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_whf")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value<'a>(report: &'a str, key: &str) -> Option<&'a str> {
    report.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix(" = "))
}

#[test]
fn index_of_mobius_kernel() {
    let o = whf(&["index", "--expr", "(t-i)/(t+i)", "--grid", "200,65536"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "index = 1"));
}

#[test]
fn pole_on_line_is_a_domain_error() {
    let o = whf(&["factor", "--expr", "1/t"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kernel vanishes on line"));
}

#[test]
fn nonzero_index_is_a_domain_error() {
    let o = whf(&["factor", "--expr", "(t-i)/(t+i)", "--grid", "100,4096"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn render_writes_ppm() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.ppm");
    let o = whf(&["render", "--expr", "t", "--window", "-2,2,-2,2", "--size", "8x8", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let bytes = std::fs::read(&out).unwrap();
    assert!(bytes.starts_with(b"P6\n8 8\n255\n"));
    assert_eq!(bytes.len(), 11 + 8 * 8 * 3);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(whf(&["index", "--expr", "t", "--grid", "200,100"]).status.code(), Some(2));
    assert_eq!(whf(&["index", "--expr", "t+"]).status.code(), Some(2));
    assert_eq!(whf(&["render", "--expr", "t", "--size", "0x4", "--out", "x.ppm"]).status.code(), Some(2));
    assert_eq!(whf(&["solve", "--kernel-expr", "t", "--rhs-expr", "t"]).status.code(), Some(2));
    assert_eq!(whf(&["bogus"]).status.code(), Some(2));
}

#[test]
fn reports_are_key_value_and_stable() {
    let args = ["split", "--expr", "1/(t^2+1)", "--grid", "100,8192"];
    let a = whf(&args);
    let b = whf(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.lines().all(|l| l.split(" = ").count() == 2), "{text}");
    let err: f64 = value(&text, "reconstruction_error").unwrap().parse().unwrap();
    assert!(err < 1e-10);
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["--threads", "1", "factor", "--expr", "(t+i)*(t-2*i)/((t+3*i)*(t-i))", "--grid", "100,8192", "--box-width", "1"];
    let one = whf(&args);
    let many = Command::new(env!("CARGO_BIN_EXE_whf"))
        .args(&args[2..])
        .env("WHF_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
    assert_eq!(value(&stdout(&one), "index_removed"), Some("0"));
}

#[test]
fn solve_reports_small_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.csv");
    let o = whf(&[
        "solve",
        "--kernel-expr",
        "exp(-sqrt(t^2))",
        "--rhs-expr",
        "(7/4+3/2*t)*exp(-t)",
        "--second-kind",
        "1.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let fwd: f64 = value(&text, "forward_residual").unwrap().parse().unwrap();
    assert!(fwd < 2e-3);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 2 + 4096);
}

#[test]
fn first_kind_names_the_violated_hypothesis() {
    let o = whf(&["solve", "--kernel-expr", "exp(-sqrt(t^2))", "--rhs-expr", "exp(-t)", "--first-kind"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kernel limit != 1"));
}

#[test]
fn rh_solve_and_classify_run() {
    let o = whf(&["rh-solve", "--d-expr", "1", "--h-expr", "1/(t^2+1)", "--grid", "100,8192"]);
    assert_eq!(o.status.code(), Some(0));
    let o = whf(&["classify", "--expr", "1/(t^2+1)", "--grid", "100,8192"]);
    assert_eq!(o.status.code(), Some(0));
    let lower: f64 = value(&stdout(&o), "strip_lower").unwrap().parse().unwrap();
    assert!((lower + 1.0).abs() < 1e-3);
}

#[test]
fn help_lists_flags_with_defaults() {
    let cases: [(&str, &[&str]); 7] = [
        ("index", &["--expr", "--grid", "--line", "[default: 200,65536]"]),
        ("split", &["--strip", "--lines", "--tolerance", "--out-plus", "--out-minus", "[default: 1e-6]"]),
        ("factor", &["--normalize-index", "--box-width", "--grid", "[default: 2]"]),
        ("solve", &["--kernel-expr", "--rhs-expr", "--second-kind", "--first-kind", "--time", "--grid", "--out", "[default: 30,4096]"]),
        ("rh-solve", &["--d-expr", "--h-expr", "--grid", "--line"]),
        ("render", &["--expr", "--window", "--size", "--out", "[default: 400x400]"]),
        ("classify", &["--expr", "--grid", "--line"]),
    ];
    for (cmd, flags) in cases {
        let o = whf(&[cmd, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        for f in flags {
            assert!(text.contains(f), "{cmd} --help lacks {f}");
        }
        assert!(text.contains("--threads"));
    }
}
