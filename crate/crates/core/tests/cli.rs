//! Runs the built binary: byte-identical output, file output and exit codes.

use std::process::Command;

fn uep(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_uep"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn sweeps_are_byte_deterministic() {
    let args = [
        "fbl",
        "--preset",
        "fig2",
        "--n",
        "1000",
        "--theta-min",
        "0.1",
        "--theta-max",
        "0.5",
        "--theta-step",
        "0.1",
    ];
    let a = uep(&[&args[..], &["--threads", "1"]].concat());
    let b = uep(&[&args[..], &["--threads", "2"]].concat());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(!text.contains('\r'));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        header,
        "theta,N5,N6,N2,N4,pct_fbl_vs_asym_pds,pct_fbl_vs_asym_ora,pct_ora_vs_pds_fbl"
    );
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 6);
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let path = std::env::temp_dir().join(format!("uep-cli-test-{}.csv", std::process::id()));
    let p = path.to_str().unwrap();
    let direct = uep(&["error-bounds", "--points", "20"]);
    let filed = uep(&["error-bounds", "--points", "20", "--out", p]);
    assert!(filed.status.success() && filed.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(uep(&["asym", "--d", "0.2,0.8"]).status.code(), Some(2));
    assert_eq!(uep(&["asym", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        uep(&["partition", "--preset", "fig3", "--d", "0.6,0.4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        uep(&["partition", "--d", "0.5,0.3,0.2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        uep(&[
            "asym",
            "--theta-min",
            "1e-9",
            "--theta-max",
            "1",
            "--theta-step",
            "1e-7"
        ])
        .status
        .code(),
        Some(4)
    );
    let v = uep(&["validate", "--quick", "--inject-fault"]);
    assert_eq!(v.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&v.stdout).contains("FAIL kkt"));
}

#[test]
fn quick_validation_passes() {
    let start = std::time::Instant::now();
    let v = uep(&["validate", "--quick"]);
    assert_eq!(
        v.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&v.stdout)
    );
    assert!(start.elapsed().as_secs() < 60);
}
