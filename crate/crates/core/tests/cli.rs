use std::process::{Command, Output};

use countfact::report::read_sweep_csv;

fn countfact(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_countfact"))
        .args(args)
        .output()
        .expect("spawn countfact")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| {
            let mut it = l.split_whitespace();
            (it.next() == Some(key)).then(|| it.next().unwrap().parse().unwrap())
        })
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

#[test]
fn coeffs_n3() {
    let o = countfact(&["coeffs", "--n", "3", "--check"]);
    assert_eq!(o.status.code(), Some(0));
    let r: Vec<f64> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(r, vec![1.0, 0.5, 0.375]);
}

#[test]
fn bounds_n1() {
    let o = countfact(&["bounds", "--n", "1", "--check"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((field(&stdout(&o), "nuclear_lb") - 1.0).abs() < 1e-12);
}

#[test]
fn metrics_nsr_n2_check_passes() {
    let o = countfact(&["metrics", "--method", "nsr", "--n", "2", "--check"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((field(&stdout(&o), "maxse") - 1.17557).abs() < 1e-5);
    assert!((field(&stdout(&o), "meanse") - 1.14717).abs() < 1e-5);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(countfact(&["nope"]).status.code(), Some(2));
    assert_eq!(
        countfact(&["metrics", "--method", "cholesky", "--n", "4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(countfact(&["coeffs", "--n", "0"]).status.code(), Some(2));
    assert_eq!(
        countfact(&["simulate", "--method", "nsr", "--n", "4", "--mu", "-1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn factorize_dump_roundtrips() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("m");
    let o = countfact(&[
        "factorize",
        "--method",
        "nsr",
        "--n",
        "5",
        "--check",
        "--dump",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let f = countfact::nsr_factorization(5).unwrap();
    let left = std::fs::read_to_string(dump.join("left.csv")).unwrap();
    for (j, line) in left.lines().enumerate() {
        for (k, v) in line.split(',').enumerate() {
            assert_eq!(
                v.parse::<f64>().unwrap().to_bits(),
                f.left().entry(j, k).to_bits()
            );
        }
    }
    assert!(dump.join("right.csv").exists());
}

#[test]
fn sweep_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let svg = dir.path().join("s.svg");
    let o = countfact(&[
        "sweep",
        "--methods",
        "sqrt",
        "--metrics",
        "maxse",
        "--n-min",
        "2",
        "--n-max",
        "4",
        "--check",
        "--threads",
        "2",
        "--csv",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let rows = read_sweep_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!((rows[0].value - 1.25).abs() < 1e-14);
    assert!((rows[1].value - 1.48828125).abs() < 1e-14);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));
}

#[test]
fn sweep_empty_methods_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let o = countfact(&["sweep", "--methods", "", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!csv.exists());
}

#[test]
fn simulate_is_reproducible() {
    let args = [
        "simulate", "--method", "sqrt", "--n", "8", "--mu", "2", "--trials", "300", "--seed", "7",
        "--input", "ones",
    ];
    let a = countfact(&args);
    let b = countfact(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn out_flag_redirects_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.txt");
    let o = countfact(&["bounds", "--n", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    assert!((field(&text, "g_n") - 0.25 * (2.0 * 2f64.sqrt() + 1.0)).abs() < 1e-14);
}

#[test]
fn csv_flag_appends_records() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m.csv");
    for n in ["2", "3"] {
        assert_eq!(
            countfact(&[
                "metrics",
                "--method",
                "sqrt",
                "--n",
                n,
                "--csv",
                csv.to_str().unwrap()
            ])
            .status
            .code(),
            Some(0)
        );
    }
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("method,n,maxse"));
}
