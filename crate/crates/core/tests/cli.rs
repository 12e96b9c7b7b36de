mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use maxclass::setsystem::SetSystem;

struct Workdir(PathBuf);

impl Workdir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("maxclass-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Workdir(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_maxclass"))
            .args(args)
            .current_dir(&self.0)
            .output()
            .unwrap()
    }
}

impl Drop for Workdir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{report}"))
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn exit_codes() {
    let w = Workdir::new("exit");
    assert_eq!(w.run(&["demo", "disks"]).status.code(), Some(0));
    assert_eq!(w.run(&["demo", "halfspace_violation"]).status.code(), Some(1));
    assert_eq!(w.run(&["demo", "trig"]).status.code(), Some(2));
    let unknown = w.run(&["demo", "spheres"]);
    assert_eq!(unknown.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("unknown demo"));
    assert_eq!(w.run(&["verify", "--family", "disks"]).status.code(), Some(3));
    assert_eq!(w.run(&["verify", "--nonsense"]).status.code(), Some(3));
    assert_eq!(w.run(&["--help"]).status.code(), Some(0));
}

#[test]
fn sampled_file_matches_inline_seed() {
    let w = Workdir::new("sample");
    let s = w.run(&["sample", "--n", "10", "--seed", "17", "--out", "p.txt"]);
    assert!(s.status.success());
    assert!(read(&w.path("p.txt")).starts_with("k=2\n"));

    let from_file = stdout(&w.run(&["verify", "--family", "disks", "--points", "p.txt"]));
    let inline = stdout(&w.run(&["verify", "--family", "disks", "--n", "10", "--seed", "17"]));
    assert_eq!(field(&from_file, "sample"), "file p.txt");
    for key in [
        "cells",
        "vc_dimension",
        "maximum",
        "condition1",
        "condition2",
        "verdict",
    ] {
        assert_eq!(field(&from_file, key), field(&inline, key), "{key}");
    }
    assert_eq!(field(&inline, "cells"), "176");
}

#[test]
fn enumerate_then_vcdim() {
    let w = Workdir::new("enum");
    let (points, _) = common::concyclic_fixture();
    std::fs::write(w.path("c.txt"), maxclass::harness::format_points(&points, 2)).unwrap();
    let e = w.run(&[
        "enumerate",
        "--family",
        "disks",
        "--points",
        "c.txt",
        "--oracle",
        "--out",
        "s.txt",
    ]);
    assert!(e.status.success(), "{}", String::from_utf8_lossy(&e.stderr));
    let system = SetSystem::parse_file(&read(&w.path("s.txt"))).unwrap();
    assert_eq!(system.ground_size(), 8);

    let report = stdout(&w.run(&["verify", "--family", "disks", "--points", "c.txt"]));
    assert_eq!(field(&report, "cells"), system.len().to_string());
    assert_eq!(field(&report, "condition2_witness"), "1,3,4,6");

    let v = stdout(&w.run(&["vcdim", "--system", "s.txt"]));
    assert_eq!(field(&v, "vc_dimension"), "3");
    assert_eq!(field(&v, "sets"), system.len().to_string());
}

#[test]
fn basis_file_and_json() {
    let w = Workdir::new("basis");
    std::fs::write(
        w.path("parabola.basis"),
        "# y > a + b x + c x^2\ndim: 2\nf0: y\nf: 1\nf: x\nf: x^2\n",
    )
    .unwrap();
    let o = w.run(&[
        "verify",
        "--basis-file",
        "parabola.basis",
        "--n",
        "8",
        "--seed",
        "2",
        "--exhaustive",
        "--json",
        "r.json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(field(&text, "cells"), "93");
    assert_eq!(field(&text, "maximum_criterion"), "all_subsets");
    let json: serde_json::Value = serde_json::from_str(&read(&w.path("r.json"))).unwrap();
    assert_eq!(json["enumeration"]["cells"], 93);
    assert_eq!(json["mode"], "Exact");
}

#[test]
fn trial_summary_lists_failing_seeds() {
    let w = Workdir::new("trial");
    let o = w.run(&[
        "trial", "--family", "disks", "--n", "7", "--trials", "5", "--seed", "40",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(field(&text, "maximum"), "5");
    assert_eq!(field(&text, "failing_seeds"), "none");
    assert_eq!(field(&text, "precision_bits"), "53");

    // A two-point grid in each coordinate forces repeated points.
    let o = w.run(&["trial", "--family", "disks", "--n", "7", "--trials", "3", "--bits", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert_eq!(field(&text, "failing_seeds"), "0,1,2");
    assert_eq!(field(&text, "precision_bits"), "1");
}

#[test]
fn timing_is_opt_in() {
    let w = Workdir::new("timing");
    assert!(!stdout(&w.run(&["demo", "disks"])).contains("time_"));
    assert!(stdout(&w.run(&["demo", "disks", "--timing"])).contains("time_enumeration_ms: "));
}
