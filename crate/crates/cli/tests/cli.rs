//! End-to-end checks of the command-line interface: formats, exit codes,
//! determinism.

use std::io::Write;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_planarsucc"))
}

fn write_tmp(name: &str, content: &str) -> std::path::PathBuf {
    let p = std::env::temp_dir().join(format!("planarsucc_test_{name}_{}", std::process::id()));
    let mut f = std::fs::File::create(&p).unwrap();
    f.write_all(content.as_bytes()).unwrap();
    p
}

#[test]
fn run_prints_survivor_and_neighbors() {
    let g = write_tmp("path.g", "p 3 2\ne 1 2\ne 2 3\n");
    let s = write_tmp("path.s", "C 1 2\nN 1\n");
    let out = bin().args(["run"]).arg(&g).arg("--script").arg(&s).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "1\n3\n");
}

#[test]
fn run_is_deterministic() {
    let graph = planarsucc_core::generate_planar(60, 4);
    let g = write_tmp("det.g", &planarsucc_core::write_graph(&graph));
    let edges = graph.edges();
    let (a1, b1) = edges[0];
    let (a2, b2) = edges[edges.len() / 2];
    let script = format!(
        "C {} {}\nN {}\nD {}\nA {} {}\nN {}\n",
        a1 + 1, b1 + 1, a1 + 1, a1 + 1, a2 + 1, b2 + 1, a2 + 1
    );
    let s = write_tmp("det.s", &script);
    let run = || {
        bin()
            .args(["run"])
            .arg(&g)
            .args(["--hashing", "--script"])
            .arg(&s)
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "byte-for-byte reproducible output");
}

#[test]
fn edge_deletion_requires_hashing() {
    let g = write_tmp("k3.g", "p 3 3\ne 1 2\ne 1 3\ne 2 3\n");
    let s = write_tmp("de.s", "DE 1 2\n");
    let out = bin().args(["run"]).arg(&g).arg("--script").arg(&s).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hashing mode required"));
}

#[test]
fn illegal_op_exits_3_with_line() {
    let g = write_tmp("p3.g", "p 3 2\ne 1 2\ne 2 3\n");
    let s = write_tmp("bad.s", "N 1\nC 1 3\n");
    let out = bin().args(["run"]).arg(&g).arg("--script").arg(&s).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn build_reports_and_rejects() {
    let g = write_tmp("k4.g", "p 4 6\ne 1 2\ne 1 3\ne 1 4\ne 2 3\ne 2 4\ne 3 4\n");
    let out = bin().args(["build"]).arg(&g).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(text.contains("pieces 1"));
    assert!(text.contains("global-boundary 0"));

    // over-dense input: m > 3n - 6
    let mut dense = String::from("p 9 22\n");
    let mut cnt = 0;
    'outer: for a in 1..=9u32 {
        for b in a + 1..=9 {
            dense.push_str(&format!("e {a} {b}\n"));
            cnt += 1;
            if cnt == 22 {
                break 'outer;
            }
        }
    }
    let g = write_tmp("dense.g", &dense);
    let out = bin().args(["build"]).arg(&g).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let g = write_tmp("broken.g", "p 2 1\ne 1 1\n");
    let out = bin().args(["build"]).arg(&g).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn verify_and_bench_smoke() {
    let out = bin()
        .args(["verify", "--n", "80", "--ops", "200", "--seed", "3", "--hashing"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verify pass"));

    let out = bin()
        .args(["bench", "--sizes", "200,400", "--seed", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(text.lines().count() >= 3);

    // an empty size list prints only the header
    let out = bin().args(["bench", "--sizes", ""]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(text.lines().count() <= 1 || out.status.success());
}
