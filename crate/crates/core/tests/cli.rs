use std::process::Command;

fn nxfem() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nxfem"))
}

#[test]
fn writes_csv_with_exact_header() {
    let dir = std::env::temp_dir().join(format!("nxfem-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("ex1.csv");
    let status = nxfem().args(["--example", "example1", "--n-list", "8,16", "--out"]).arg(&out).status().unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "h,e1_u,rate1,e0_u,rate0,e0_p,ratep");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0.25,") && lines[1].ends_with(','));
    assert!(lines[2].starts_with("0.125,"));

    let config = dir.join("sweep.cfg");
    std::fs::write(&config, "example = example2\nsweep-mu1 = 10,100\nsweep-n = 8\n").unwrap();
    let sweep = dir.join("sweep.csv");
    let status = nxfem().arg("--config").arg(&config).arg("--out").arg(&sweep).status().unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(&sweep).unwrap();
    assert!(csv.starts_with("mu1,mu2,e1_u,e0_u,e0_p\n10,1,"));
    assert_eq!(csv.lines().count(), 3);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn reports_failures_through_exit_codes() {
    // Two crossings on one edge of the coarse mesh.
    let code = nxfem().args(["--example", "example2", "--n-list", "2"]).output().unwrap().status.code();
    assert_eq!(code, Some(1));
    let code = nxfem().args(["--example", "example1", "--n-list", "16,8"]).output().unwrap().status.code();
    assert_eq!(code, Some(3));
    let code = nxfem().args(["--example", "nope"]).output().unwrap().status.code();
    assert_eq!(code, Some(3));
    let code = nxfem().args(["--gamma0", "-1"]).output().unwrap().status.code();
    assert_eq!(code, Some(3));
}
