use std::fs;
use std::path::Path;
use std::process::Command;

fn bench(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tucker-bench")).args(args).output().unwrap()
}

fn run_to(dir: &Path, name: &str, extra: &[&str]) -> String {
    let out = dir.join(name);
    let mut args = vec!["--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = bench(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    fs::read_to_string(out).unwrap()
}

#[test]
fn fixed_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let flags = ["--experiment", "approx-fn", "--function", "X2", "--n", "20", "--seed", "5"];
    let a = run_to(dir.path(), "a.csv", &flags);
    let b = run_to(dir.path(), "b.csv", &flags);
    assert_eq!(a.replace("a.csv", ""), b.replace("b.csv", ""));
    let ta = fs::read_to_string(dir.path().join("a.tolerance.csv")).unwrap();
    let tb = fs::read_to_string(dir.path().join("b.tolerance.csv")).unwrap();
    assert_eq!(ta.replace("a.csv", ""), tb.replace("b.csv", ""));
    let mut lines = a.lines();
    assert!(lines.next().unwrap().starts_with("# tucker-bench"));
    assert!(lines.next().unwrap().starts_with("function,hosvd_rank,hosvd_error"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "experiment = \"poisson-bench\"\nlevels = [3, 4]\nvalidate_dense = true\nd = 2\n").unwrap();
    let text = run_to(dir.path(), "p.csv", &["--config", cfg.to_str().unwrap(), "--d", "3"]);
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[0], "3");
        let err: f64 = cells.last().unwrap().parse().unwrap();
        assert!(err < 1e-4, "{row}");
    }
}

#[test]
fn helmholtz_warm_starts_use_fewer_iterations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("h.toml");
    fs::write(&cfg, "experiment = \"helmholtz\"\nn = 30\nkappa = [1.0, 16.0]\nx_start = 4.0\nx_stop = 3.0\nx_step = 0.1\ntol = 1e-9\n").unwrap();
    let text = run_to(dir.path(), "h.csv", &["--config", cfg.to_str().unwrap()]);
    let rows: Vec<Vec<f64>> = text.lines().skip(2).map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect()).collect();
    assert_eq!(rows.len(), 22);
    for block in rows.chunks(11) {
        let cold = block[0][3];
        assert!(block[1..].iter().all(|r| r[3] <= cold));
    }
    let warm: f64 = rows[12..].iter().map(|r| r[3]).sum::<f64>() / 10.0;
    assert!(warm < rows[11][3], "warm {warm} vs cold {}", rows[11][3]);
    // higher wave number needs at least the rank of the lower one at each position
    for (lo, hi) in rows[..11].iter().zip(&rows[11..]) {
        assert!(hi[5] >= lo[5]);
    }
}

#[test]
fn bad_input_fails_with_diagnostic() {
    let o = bench(&["--experiment", "heat"]);
    assert!(!o.status.success());
    let o = bench(&["--n", "10"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no experiment"));
    let o = bench(&["--experiment", "helmholtz", "--d", "5"]);
    assert!(!o.status.success());
    let o = bench(&["--experiment", "poisson-bench", "--d", "3", "--out", "/nonexistent/dir/x.csv"]);
    assert!(!o.status.success());
}
