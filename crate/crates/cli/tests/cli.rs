use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_driven-hydrogen"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("DRIVEN_HYDROGEN_SCRATCH")
        .output()
        .unwrap()
}

#[test]
fn config_errors_exit_with_2() {
    let d = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 5] = [
        &["scan", "--from", "0.003", "--to", "0.001"],
        &["scan", "--points", "0"],
        &["propagate", "--schedule", "custom", "--breakpoints", "0:0,0:0.001"],
        &["propagate", "--t1", "0"],
        &["scan", "--axis", "nope"],
    ];
    for args in cases {
        let o = cli(args, d.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn large_bases_need_the_flag() {
    let d = tempfile::tempdir().unwrap();
    let o = cli(&["floquet", "--n0", "60", "--window", "20", "--k-max", "8"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--large"));
}

#[test]
fn config_file_is_merged_under_flags() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    std::fs::write(&cfg, "[convert_units]\nn0 = 30\nf0 = 0.02\n").unwrap();
    let o = cli(&["convert-units", "--config", cfg.to_str().unwrap(), "--f0", "0.01"], d.path());
    assert!(o.status.success());
    let units = std::fs::read_to_string(d.path().join("units.csv")).unwrap();
    assert!(units.starts_with("# driven-hydrogen "));
    assert!(units.contains("schema=units/1"));
    assert!(units.contains("n0,30\n"));
    assert!(units.contains("f0_scaled,1e-2\n"));

    std::fs::write(&cfg, "[convert_units]\nbogus = 1\n").unwrap();
    let o = cli(&["convert-units", "--config", cfg.to_str().unwrap()], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unit_conversion_round_trips() {
    let d = tempfile::tempdir().unwrap();
    let o = cli(&["convert-units", "--n0", "60", "--field-v-per-cm", "5.95162818287037", "--static-v-per-cm", "0"], d.path());
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    let f0: f64 = text.lines().find(|l| l.starts_with("f0_scaled")).unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((f0 - 0.015).abs() < 1e-12, "{f0}");
}

#[test]
fn help_describes_every_subcommand() {
    let d = tempfile::tempdir().unwrap();
    let o = cli(&["--help"], d.path());
    let text = String::from_utf8_lossy(&o.stdout);
    for sub in ["scan", "floquet", "propagate", "contours", "dipole-spectrum", "convert-units"] {
        assert!(text.contains(sub), "{sub}");
    }
    let o = cli(&["propagate", "--help"], d.path());
    assert!(String::from_utf8_lossy(&o.stdout).contains("circularize"));
}

#[test]
fn scratch_staging_leaves_only_final_files() {
    let d = tempfile::tempdir().unwrap();
    let scratch = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_driven-hydrogen"))
        .args(["contours", "--n0", "12", "--top", "3", "--out"])
        .arg(d.path())
        .env("DRIVEN_HYDROGEN_SCRATCH", scratch.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(d.path().join("contours.csv").exists());
    assert!(d.path().join("job.json").exists());
    assert_eq!(std::fs::read_dir(scratch.path()).unwrap().count(), 0);
}
