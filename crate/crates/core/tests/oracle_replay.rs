//! Random-operation replays of the encoding against the naive oracle.

use planarsucc_core::partition::PartitionConfig;
use planarsucc_core::verify::{run_verify, VerifyParams};

fn params(n: u32, ops: usize, seed: u64, r: u32, rp: u32) -> VerifyParams {
    VerifyParams {
        n,
        ops,
        seed,
        cfg: PartitionConfig {
            r,
            r_prime: rp,
            size_cap_multiplier: 2,
        },
        hashing: true,
        check_every_op: true,
        probe_factor: 16,
    }
}

#[test]
fn tiny_single_piece() {
    let s = run_verify(&params(8, 30, 1, 64, 4)).unwrap_or_else(|d| panic!("{d}"));
    assert!(s.probe_budget_violations == 0);
}

#[test]
fn small_multi_piece() {
    for seed in 0..4 {
        let s = run_verify(&params(60, 150, seed, 8, 4)).unwrap_or_else(|d| panic!("seed {seed}: {d}"));
        assert_eq!(s.probe_budget_violations, 0, "seed {seed}");
    }
}

#[test]
fn medium_replay() {
    let s = run_verify(&params(300, 500, 7, 32, 4)).unwrap_or_else(|d| panic!("{d}"));
    assert_eq!(s.probe_budget_violations, 0);
}

#[test]
fn stress_parameter_corners() {
    // boundary-heavy decompositions: tiny r forces many pieces
    for (n, r, rp, seeds) in [(40u32, 4u32, 2u32, 6u64), (80, 6, 3, 4), (120, 16, 5, 3)] {
        for seed in 0..seeds {
            let mut p = params(n, 3 * n as usize, seed, r, rp);
            p.cfg.r_prime = rp;
            let s = run_verify(&p)
                .unwrap_or_else(|d| panic!("n={n} r={r} rp={rp} seed={seed}: {d}"));
            assert_eq!(s.probe_budget_violations, 0, "n={n} r={r} seed={seed}");
        }
    }
}

#[test]
fn stress_no_hashing_mode() {
    for seed in 0..3 {
        let mut p = params(100, 300, seed, 12, 4);
        p.hashing = false;
        run_verify(&p).unwrap_or_else(|d| panic!("seed {seed}: {d}"));
    }
}

#[test]
fn larger_sparse_checks() {
    // fewer invariant scans, bigger instance
    let mut p = params(800, 1200, 11, 48, 4);
    p.check_every_op = false;
    let s = run_verify(&p).unwrap_or_else(|d| panic!("{d}"));
    assert_eq!(s.probe_budget_violations, 0);
}
