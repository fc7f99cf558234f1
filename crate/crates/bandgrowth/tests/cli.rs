//! End-to-end checks of the binary: exit codes, artifacts, determinism.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bandgrowth"))
}

fn outdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bandgrowth-it-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

#[test]
fn profile_builtin_shift_is_all_ones() {
    let out = outdir("shift");
    let status = bin()
        .args(["profile", "shift", "--window", "16", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(out.join("profile.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("position,bandwidth"));
    for (idx, line) in lines.enumerate() {
        let expect = if idx == 15 { "16,0" } else { &format!("{},1", idx + 1) };
        assert_eq!(line, expect);
    }
}

#[test]
fn profile_block_builtin_fits_half() {
    let out = outdir("rblock");
    let status = bin()
        .args(["profile", "R:r=0.5", "--window", "500", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let fit: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("profile_fit.json")).unwrap()).unwrap();
    let s = fit["fit"]["s"].as_f64().unwrap();
    assert!((s - 0.5).abs() < 0.1, "fitted exponent {s}");
}

#[test]
fn malformed_matrix_file_exits_2() {
    let out = outdir("bad");
    fs::create_dir_all(&out).unwrap();
    let bad = out.join("bad.json");
    fs::write(&bad, "{ definitely not json").unwrap();
    let status = bin()
        .args(["profile"])
        .arg(&bad)
        .args(["--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn degenerate_r_exits_2() {
    let out = outdir("r1");
    let status = bin()
        .args(["construct", "--r", "1", "--window", "100", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn step1_zero_exponent_reports_unit_d() {
    let out = outdir("step1");
    let status = bin()
        .args(["step1", "--s", "0", "--m-max", "16", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("step1.json")).unwrap()).unwrap();
    let d = report["results"][0]["fitted_d"].as_f64().unwrap();
    assert!((d - 1.0).abs() < 1e-9);
}

#[test]
fn tridiag_diagonal_matrix_is_strict() {
    let out = outdir("tridiag");
    fs::create_dir_all(&out).unwrap();
    // A diagonal matrix as an input file.
    let entries: Vec<String> =
        (1..=20).map(|i| format!("[{i}, {i}, \"{}\"]", (i % 6) + 1)).collect();
    let file = out.join("diag.json");
    fs::write(
        &file,
        format!(
            "{{\"field\":{{\"kind\":\"gfp\",\"p\":7}},\"window\":20,\"entries\":[{}]}}",
            entries.join(",")
        ),
    )
    .unwrap();
    let status = bin()
        .args(["tridiag"])
        .arg(&file)
        .args(["--window", "20", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("tridiag.json")).unwrap()).unwrap();
    assert_eq!(report["strict_runs"], 1);
    assert_eq!(report["rows"][0]["certificate_c"], 0.0);
}

#[test]
fn stretch_placements_respect_fourth_power() {
    let out = outdir("stretch");
    let status = bin()
        .args(["stretch", "--r", "1/2", "--s", "1/4", "--window", "4096", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(out.join("placements.csv")).unwrap();
    for (idx, line) in csv.lines().skip(1).enumerate() {
        let k = (idx + 1) as u64;
        let p: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(p >= (k.pow(4)) as f64, "p_{k} = {p}");
    }
}

#[test]
fn identical_seeds_give_byte_identical_reports() {
    let run = |tag: &str| -> (String, String) {
        let out = outdir(tag);
        let status = bin()
            .args([
                "free", "generic:1", "generic:2", "--field", "q", "--window", "64",
                "--max-len", "2", "--seed", "42", "--out",
            ])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        let free = fs::read_to_string(out.join("free.json")).unwrap();
        let out2 = outdir(&format!("{tag}-k"));
        let status = bin()
            .args(["keyprop", "--k-max", "4", "--seed", "42", "--out"])
            .arg(&out2)
            .status()
            .unwrap();
        assert!(status.success());
        let keyprop = fs::read_to_string(out2.join("keyprop.json")).unwrap();
        (free, keyprop)
    };
    assert_eq!(run("det1"), run("det2"));
}

#[test]
fn report_battery_passes() {
    let out = outdir("report");
    let status = bin().args(["report", "--out"]).arg(&out).status().unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["all_passed"], true);
}
