//! Seeded synthetic benchmarks.
//!
//! Texts and workloads come from ChaCha8 seeded with the given seed, so the
//! report (everything except latencies) is identical across runs. Latencies
//! are returned separately as [`Timings`].

use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::space::SpaceReport;
use super::workload::Timings;
use crate::document::Document;
use crate::error::{Error, Result};
use crate::fraction::Fraction;
use crate::majority::QueryPath;
use crate::Symbol;

pub const RNG_NAME: &str = "ChaCha8";
pub const THREADS_VAR: &str = "RANGEFREQ_THREADS";

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Distribution {
    Uniform,
    /// Zipf with exponent `s` over the alphabet.
    Zipf(f64),
    /// Repeat the previous symbol with probability `p`, else draw uniformly.
    Runs(f64),
}

impl FromStr for Distribution {
    type Err = Error;

    /// `uniform`, `zipf`, `zipf:S`, `runs` or `runs:P`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown distribution {s:?}"));
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b.parse::<f64>().map_err(|_| bad())?)),
            None => (s, None),
        };
        let d = match name {
            "uniform" if arg.is_none() => Distribution::Uniform,
            "zipf" => Distribution::Zipf(arg.unwrap_or(1.0)),
            "runs" => Distribution::Runs(arg.unwrap_or(0.9)),
            _ => return Err(bad()),
        };
        match d {
            Distribution::Zipf(e) if !(e > 0.0 && e.is_finite()) => Err(bad()),
            Distribution::Runs(p) if !(0.0..1.0).contains(&p) => Err(bad()),
            _ => Ok(d),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Uniform => write!(f, "uniform"),
            Distribution::Zipf(s) => write!(f, "zipf:{s}"),
            Distribution::Runs(p) => write!(f, "runs:{p}"),
        }
    }
}

/// `n` symbols over `1..=sigma`.
pub fn generate_text<R: Rng>(rng: &mut R, n: usize, sigma: u32, dist: Distribution) -> Vec<Symbol> {
    match dist {
        Distribution::Uniform => (0..n).map(|_| rng.gen_range(1..=sigma)).collect(),
        Distribution::Zipf(s) => {
            let z = rand_distr::Zipf::new(sigma as u64, s).expect("validated exponent");
            (0..n).map(|_| rng.sample(z) as Symbol).collect()
        }
        Distribution::Runs(p) => {
            let mut prev = rng.gen_range(1..=sigma);
            (0..n)
                .map(|_| {
                    if !rng.gen_bool(p) {
                        prev = rng.gen_range(1..=sigma);
                    }
                    prev
                })
                .collect()
        }
    }
}

/// Thresholds queried by a benchmark built for `alpha`: `alpha`, doubled
/// while below 1/2, then 1/2.
pub fn bench_betas(alpha: Fraction) -> Vec<Fraction> {
    let half = Fraction::new(1, 2);
    let mut out = Vec::new();
    let mut b = alpha;
    while b < half {
        out.push(b);
        b *= 2;
    }
    out.push(if alpha > half { alpha } else { half });
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub n: usize,
    pub sigma: u32,
    pub alpha: Fraction,
    pub ops: usize,
    pub seed: u64,
    pub dist: Distribution,
}

/// Deterministic part of a benchmark run; one flat JSON object. `n` and
/// `sigma` come from the space report and describe the final text.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub rng: String,
    pub seed: u64,
    pub n_initial: usize,
    pub alpha: String,
    pub dist: String,
    pub ops: usize,
    pub n_final: usize,
    pub op_classes: Vec<String>,
    pub op_counts: Vec<u64>,
    pub betas: Vec<String>,
    pub queries_per_beta: Vec<u64>,
    pub verifications_per_beta: Vec<u64>,
    pub mean_verifications_per_beta: Vec<f64>,
    pub paths: Vec<String>,
    pub path_counts: Vec<u64>,
    pub minority_queries: u64,
    pub minority_found: u64,
    pub minority_candidates_total: u64,
    /// Hash of every query answer, for comparing runs.
    pub answer_digest: u64,
    #[serde(flatten)]
    pub space: SpaceReport,
}

const CLASSES: [&str; 4] = ["Q", "M", "I", "D"];
const PATHS: [&str; 5] = ["direct", "all_symbols", "large", "medium", "beta"];

fn path_index(p: QueryPath) -> usize {
    match p {
        QueryPath::Direct => 0,
        QueryPath::AllSymbols => 1,
        QueryPath::Large { .. } => 2,
        QueryPath::Medium { .. } => 3,
        QueryPath::Beta { .. } => 4,
    }
}

pub fn bench(cfg: &BenchConfig) -> Result<(BenchReport, Timings)> {
    if cfg.n == 0 || cfg.sigma == 0 {
        return Err(Error::InvalidParameter("bench needs n >= 1 and sigma >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let text = generate_text(&mut rng, cfg.n, cfg.sigma, cfg.dist);
    let mut doc = Document::build(&text, cfg.sigma, cfg.alpha, cfg.alpha)?;
    let betas = bench_betas(cfg.alpha);
    let mut samples: Vec<Vec<u64>> = vec![Vec::new(); 4];
    let mut op_counts = [0u64; 4];
    let (mut per_beta_q, mut per_beta_v) = (vec![0u64; betas.len()], vec![0u64; betas.len()]);
    let mut path_counts = [0u64; 5];
    let (mut mq, mut mfound, mut mcands) = (0, 0, 0);
    let mut digest = DefaultHasher::new();
    for _ in 0..cfg.ops {
        let n = doc.len();
        let roll = rng.gen_range(0..100);
        let class = if n == 0 || (50..75).contains(&roll) {
            2
        } else if roll < 40 {
            0
        } else if roll < 50 {
            1
        } else {
            3
        };
        let start = Instant::now();
        match class {
            0 | 1 => {
                let (a, b) = (rng.gen_range(1..=n), rng.gen_range(1..=n));
                let (l, r) = (a.min(b), a.max(b));
                if class == 0 {
                    let k = rng.gen_range(0..betas.len());
                    let (out, trace) = doc.query_majority_traced(l, r, betas[k])?;
                    per_beta_q[k] += 1;
                    per_beta_v[k] += trace.verified as u64;
                    path_counts[path_index(trace.path)] += 1;
                    out.hash(&mut digest);
                } else {
                    let (out, trace) = doc.query_minority_traced(l, r)?;
                    mq += 1;
                    mfound += out.is_some() as u64;
                    mcands += trace.candidates as u64;
                    out.hash(&mut digest);
                }
            }
            2 => {
                let (c, i) = (rng.gen_range(1..=cfg.sigma), rng.gen_range(1..=n + 1));
                doc.insert(c, i)?;
            }
            _ => {
                let i = rng.gen_range(1..=n);
                doc.delete(i)?;
            }
        }
        samples[class].push(start.elapsed().as_nanos() as u64);
        op_counts[class] += 1;
    }
    let report = BenchReport {
        rng: RNG_NAME.into(),
        seed: cfg.seed,
        n_initial: cfg.n,
        alpha: cfg.alpha.to_string(),
        dist: cfg.dist.to_string(),
        ops: cfg.ops,
        n_final: doc.len(),
        op_classes: CLASSES.iter().map(|s| s.to_string()).collect(),
        op_counts: op_counts.to_vec(),
        betas: betas.iter().map(|b| b.to_string()).collect(),
        mean_verifications_per_beta: per_beta_q
            .iter()
            .zip(&per_beta_v)
            .map(|(&q, &v)| if q == 0 { 0.0 } else { v as f64 / q as f64 })
            .collect(),
        queries_per_beta: per_beta_q,
        verifications_per_beta: per_beta_v,
        paths: PATHS.iter().map(|s| s.to_string()).collect(),
        path_counts: path_counts.to_vec(),
        minority_queries: mq,
        minority_found: mfound,
        minority_candidates_total: mcands,
        answer_digest: digest.finish(),
        space: SpaceReport::for_document(&doc),
    };
    Ok((report, Timings::from_samples(&CLASSES, &mut samples)))
}

/// Worker count from `RANGEFREQ_THREADS`, else the available parallelism.
pub fn thread_count() -> usize {
    std::env::var(THREADS_VAR)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get()))
}

/// Runs independent benchmarks on up to `threads` threads; results keep
/// the order of `configs`.
pub fn bench_many(configs: &[BenchConfig], threads: usize) -> Vec<Result<(BenchReport, Timings)>> {
    let threads = threads.clamp(1, configs.len().max(1));
    let mut out: Vec<Option<Result<(BenchReport, Timings)>>> = vec![None; configs.len()];
    std::thread::scope(|scope| {
        for (t, slots) in out.chunks_mut(configs.len().div_ceil(threads).max(1)).enumerate() {
            let base = t * configs.len().div_ceil(threads).max(1);
            scope.spawn(move || {
                for (k, slot) in slots.iter_mut().enumerate() {
                    *slot = Some(bench(&configs[base + k]));
                }
            });
        }
    });
    out.into_iter().map(|r| r.expect("every run finished")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, ops: usize, seed: u64, dist: Distribution) -> BenchConfig {
        BenchConfig { n, sigma: 26, alpha: Fraction::new(1, 8), ops, seed, dist }
    }

    #[test]
    fn distributions_parse() {
        assert_eq!("uniform".parse::<Distribution>().unwrap(), Distribution::Uniform);
        assert_eq!("zipf:1.5".parse::<Distribution>().unwrap(), Distribution::Zipf(1.5));
        assert_eq!("runs".parse::<Distribution>().unwrap(), Distribution::Runs(0.9));
        for bad in ["gauss", "runs:1.5", "zipf:-1", "uniform:2", "zipf:x"] {
            assert!(bad.parse::<Distribution>().is_err(), "{bad}");
        }
        assert_eq!(Distribution::Zipf(1.5).to_string(), "zipf:1.5");
    }

    #[test]
    fn betas_double_up_to_half() {
        let f = |n, d| Fraction::new(n, d);
        assert_eq!(bench_betas(f(1, 8)), vec![f(1, 8), f(1, 4), f(1, 2)]);
        assert_eq!(bench_betas(f(1, 2)), vec![f(1, 2)]);
        assert_eq!(bench_betas(f(2, 3)), vec![f(2, 3)]);
        assert_eq!(bench_betas(f(1, 3)), vec![f(1, 3), f(1, 2)]);
    }

    #[test]
    fn replay_is_identical() {
        for dist in [Distribution::Uniform, Distribution::Zipf(1.2), Distribution::Runs(0.8)] {
            let a = bench(&cfg(3000, 2000, 42, dist)).unwrap().0;
            let b = bench(&cfg(3000, 2000, 42, dist)).unwrap().0;
            assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
            let c = bench(&cfg(3000, 2000, 43, dist)).unwrap().0;
            assert_ne!(a.answer_digest, c.answer_digest);
        }
    }

    #[test]
    fn degenerate_runs_complete() {
        let (r, t) = bench(&cfg(1, 0, 1, Distribution::Uniform)).unwrap();
        assert_eq!(r.op_counts, vec![0; 4]);
        assert_eq!(t.median_ns, vec![0; 4]);
        let (r, _) = bench(&cfg(1, 50, 1, Distribution::Uniform)).unwrap();
        assert_eq!(r.op_counts.iter().sum::<u64>(), 50);
        assert!(bench(&cfg(0, 5, 1, Distribution::Uniform)).is_err());
    }

    #[test]
    fn sharded_runs_match_serial() {
        let configs: Vec<BenchConfig> = (0..3).map(|s| cfg(500, 300, s, Distribution::Uniform)).collect();
        let serial: Vec<_> = bench_many(&configs, 1).into_iter().map(|r| r.unwrap().0).collect();
        let sharded: Vec<_> = bench_many(&configs, 3).into_iter().map(|r| r.unwrap().0).collect();
        assert_eq!(serial, sharded);
    }
}
