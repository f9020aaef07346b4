use std::process::{Command, Output};

fn sparsegfs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsegfs"))
        .args(args)
        .output()
        .expect("spawn sparsegfs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn approx_defaults_recover_f1() {
    let o = sparsegfs(&["approx"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "shape,N,M,l2_error");
    let l2: f64 = lines[1].rsplit(',').next().unwrap().parse().unwrap();
    assert!(lines[1].starts_with("Y,5,6,"));
    assert!(l2 <= 1e-8, "l2 {l2}");
}

#[test]
fn dump_indices_lists_hyperbolic_cross() {
    let o = sparsegfs(&["dump-indices", "--shape", "S", "--N", "3", "--d", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 8);
}

#[test]
fn noiseless_classification_is_perfect() {
    let o = sparsegfs(&["classify", "--sigma", "0", "--trials", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        stdout(&o),
        "sigma,kind,identified,categorized\n0.00,gauss,1.0000,1.0000\n"
    );
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["approx", "--N", "1"][..],
        &["approx", "--bogus"],
        &["moments"],
        &["moments", "--glyph", "9"],
        &["frobnicate"],
    ] {
        let o = sparsegfs(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn non_convergence_exits_two() {
    let o = sparsegfs(&[
        "approx",
        "--function",
        "f3",
        "--N",
        "9",
        "--M",
        "9",
        "--max-iters",
        "3",
        "--no-polish",
    ]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn help_lists_defaults() {
    let o = sparsegfs(&["approx", "--help"]);
    assert!(o.status.success());
    let h = stdout(&o);
    for needle in [
        "[default: f1]",
        "[default: Y]",
        "[default: 5]",
        "[default: 6]",
        "--max-iters",
    ] {
        assert!(h.contains(needle), "missing {needle}");
    }
}

#[test]
fn output_is_reproducible() {
    let args = ["moments", "--glyph", "4", "--rotate", "90"];
    let a = sparsegfs(&args);
    let b = sparsegfs(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = sparsegfs(&[
        "classify", "--noise", "bitflip", "--sigma", "0.1", "--trials", "1", "--seed", "7",
    ]);
    let d = sparsegfs(&[
        "classify", "--noise", "bitflip", "--sigma", "0.1", "--trials", "1", "--seed", "7",
    ]);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let o = sparsegfs(&[
        "approx",
        "--shape",
        "T",
        "--N",
        "3",
        "--M",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("shape,N,M,l2_error\nT,3,3,"));
}

#[test]
fn sweep_covers_the_table() {
    let o = sparsegfs(&["approx", "--sweep", "--function", "f1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 73);
    assert!(out.lines().nth(1).unwrap().starts_with("Y,2,1,"));
    assert!(out.lines().last().unwrap().starts_with("S,9,10,"));
}
