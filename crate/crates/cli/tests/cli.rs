use std::process::Command;

fn ridc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ridc"))
        .args(args)
        .env("RIDC_AVAILABLE_PARALLELISM", "4")
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("ridc-cli-it-{}-{name}", std::process::id()))
}

#[test]
fn converge_writes_csv() {
    let out = tmp("converge.csv");
    let o = ridc(&[
        "converge",
        "--scheme",
        "ridc-3",
        "--steps",
        "40,80",
        "--dx",
        "1/20",
        "--t-end",
        "0.5",
        "--workers",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = ridc_cli::read_csv(&out).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].scheme, "ridc-3");
    assert_eq!(rows[1].workers, 2);
    assert!(rows[1].observed_order.is_some());
    std::fs::remove_file(out).unwrap();
}

#[test]
fn config_file_with_flag_override() {
    let cfg = tmp("study.cfg");
    std::fs::write(
        &cfg,
        "scheme = imex3\nsteps = 10, 20\ndx = 1/20\nt_end = 0.5\n",
    )
    .unwrap();
    let o = ridc(&[
        "converge",
        "--config",
        cfg.to_str().unwrap(),
        "--scheme",
        "fbe",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.lines().nth(1).unwrap().starts_with("fbe"));
    std::fs::remove_file(cfg).unwrap();
}

#[test]
fn configuration_errors_exit_1() {
    assert_eq!(
        ridc(&["converge", "--scheme", "rk4"]).status.code(),
        Some(1)
    );
    assert_eq!(
        ridc(&["converge", "--steps", "200,100"]).status.code(),
        Some(1)
    );
    assert_eq!(ridc(&["converge", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        ridc(&[
            "restarts",
            "--steps",
            "100",
            "--restarts",
            "3",
            "--dx",
            "1/20"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        ridc(&["speedup", "--workers", "1,8", "--dx", "1/20"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn solver_failures_exit_2() {
    let o = ridc(&[
        "converge",
        "--problem",
        "burgers",
        "--scheme",
        "fbe",
        "--steps",
        "50",
    ]);
    assert_eq!(o.status.code(), Some(2));
    // The table is still printed with the failed row marked.
    assert!(String::from_utf8_lossy(&o.stdout).contains("failed"));
}

#[test]
fn speedup_table() {
    let o = ridc(&[
        "speedup",
        "--steps",
        "60",
        "--dx",
        "1/20",
        "--t-end",
        "0.5",
        "--workers",
        "1,2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("speedup"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn help_exits_0() {
    assert_eq!(ridc(&["--help"]).status.code(), Some(0));
}
