//! Workload runner and benchmark behaviour.

use rangefreq::harness::bench::{bench, BenchConfig, Distribution};
use rangefreq::harness::entropy::entropy;
use rangefreq::harness::workload::{run_workload, Workload};
use rangefreq::Fraction;

fn run(text: &str, alpha: Fraction, workload: &str) -> Vec<String> {
    run_workload(text.as_bytes(), alpha, &Workload::parse(workload).unwrap()).unwrap().0
}

#[test]
fn workload_lines() {
    assert_eq!(run("aabbbab", Fraction::new(1, 4), "Q 1 7 0.5"), vec!["Q 1 7 0.5 -> b"]);
    assert_eq!(run("aaab", Fraction::new(1, 2), "M 1 4"), vec!["M 1 4 -> b"]);
    let lines = run("aabbbab", Fraction::new(1, 4), "I 1 98\nQ 1 8 1/2\n# done\nD 1\nQ 1 7 1/3");
    assert_eq!(lines, vec!["Q 1 8 1/2 -> b", "Q 1 7 1/3 -> a b"]);
}

#[test]
fn malformed_line_is_reported_by_number() {
    let e = Workload::parse("Q 1").unwrap_err();
    assert_eq!(e.line, 1);
}

#[test]
fn entropy_examples() {
    assert!((entropy(&[1, 2, 1, 2], 0) - 1.0).abs() < 1e-12);
    assert_eq!(entropy(&[1, 1, 1, 1], 0), 0.0);
    let alternating: Vec<u32> = (0..64).map(|i| i % 2 + 1).collect();
    assert_eq!(entropy(&alternating, 1), 0.0);
}

#[test]
fn bench_verifications_fall_with_beta() {
    let cfg = BenchConfig {
        n: 1 << 14,
        sigma: 26,
        alpha: Fraction::new(1, 8),
        ops: 10_000,
        seed: 42,
        dist: Distribution::Uniform,
    };
    let (report, timings) = bench(&cfg).unwrap();
    assert_eq!(report.betas, vec!["1/8", "1/4", "1/2"]);
    let v = &report.mean_verifications_per_beta;
    assert!(v[2] < v[0], "{v:?}");
    assert_eq!(timings.op_counts, report.op_counts);
    assert_eq!(report.op_counts.iter().sum::<u64>(), 10_000);
}

#[test]
fn bench_single_symbol_text() {
    let cfg =
        BenchConfig { n: 1, sigma: 1, alpha: Fraction::new(1, 2), ops: 0, seed: 0, dist: Distribution::Runs(0.5) };
    let (report, _) = bench(&cfg).unwrap();
    assert_eq!(report.n_final, 1);
    assert_eq!(report.queries_per_beta, vec![0]);
}
