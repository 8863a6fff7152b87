//! Dynamic majority and minority indexes against brute-force counting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rangefreq::harness::bench::{generate_text, Distribution};
use rangefreq::harness::oracle::{brute_majorities, brute_minority};
use rangefreq::{Fraction, IndexConfig, MajorityIndex, MinorityIndex, Symbol};

fn threshold(rng: &mut ChaCha8Rng, lo: Fraction) -> Fraction {
    loop {
        let q: u64 = rng.gen_range(2..=40);
        let f = Fraction::new(rng.gen_range(1..q), q);
        if f >= lo {
            return f;
        }
    }
}

fn range(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let len = ((n as f64).powf(rng.gen::<f64>()) as usize).clamp(1, n);
    let l = rng.gen_range(1..=n - len + 1);
    (l, l + len - 1)
}

#[test]
fn majority_queries_match_oracle_on_static_text() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let text = generate_text(&mut rng, 20_000, 26, Distribution::Zipf(1.3));
    let alpha = Fraction::new(1, 16);
    let index = MajorityIndex::build(&text, 26, alpha).unwrap();
    for _ in 0..10_000 {
        let (l, r) = range(&mut rng, text.len());
        let beta = threshold(&mut rng, alpha);
        let mut got = index.query(l, r, beta).unwrap();
        got.sort_unstable();
        assert_eq!(got, brute_majorities(&text, l, r, beta).unwrap(), "Q {l} {r} {beta}");
    }
}

#[test]
fn majority_updates_keep_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut model = generate_text(&mut rng, 3000, 4, Distribution::Runs(0.7));
    let alpha = Fraction::new(1, 4);
    let config = IndexConfig { stride: Some(2), instrument: false };
    let mut index = MajorityIndex::build_with(&model, 4, alpha, config).unwrap();
    for step in 0..10_000 {
        let n = model.len();
        if n == 0 || rng.gen_bool(0.5) {
            let (c, i) = (rng.gen_range(1..=4), rng.gen_range(1..=n + 1));
            index.insert(c, i).unwrap();
            model.insert(i - 1, c);
        } else {
            let i = rng.gen_range(1..=n);
            assert_eq!(index.delete(i).unwrap(), model.remove(i - 1));
        }
        if step % 250 == 0 {
            index.audit().unwrap_or_else(|e| panic!("step {step}: {e:?}"));
        }
    }
    index.audit().unwrap();
    for _ in 0..500 {
        let (l, r) = range(&mut rng, model.len());
        let mut got = index.query(l, r, alpha).unwrap();
        got.sort_unstable();
        assert_eq!(got, brute_majorities(&model, l, r, alpha).unwrap());
    }
}

#[test]
fn growing_from_empty_crosses_parameter_changes() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let alpha = Fraction::new(1, 8);
    let mut index = MajorityIndex::build(&[], 26, alpha).unwrap();
    let mut model: Vec<Symbol> = Vec::new();
    for step in 0..40_000 {
        let c = if rng.gen_bool(0.3) { 1 } else { rng.gen_range(1..=26) };
        let i = rng.gen_range(1..=model.len() + 1);
        index.insert(c, i).unwrap();
        model.insert(i - 1, c);
        if step % 5000 == 4999 {
            index.audit().unwrap();
            let n = model.len();
            for _ in 0..200 {
                let (l, r) = range(&mut rng, n);
                let mut got = index.query(l, r, alpha).unwrap();
                got.sort_unstable();
                assert_eq!(got, brute_majorities(&model, l, r, alpha).unwrap());
            }
        }
    }
    assert!(index.stats().global_rebuilds >= 1);
}

#[test]
fn minority_audited_after_every_update() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let sigma = 26;
    let alpha = Fraction::new(1, 4);
    let mut model = generate_text(&mut rng, 2000, sigma, Distribution::Uniform);
    let mut index = MinorityIndex::build(&model, sigma, alpha).unwrap();
    for step in 0..10_000 {
        let n = model.len();
        if n == 0 || rng.gen_bool(0.5) {
            let (c, i) = (rng.gen_range(1..=sigma), rng.gen_range(1..=n + 1));
            index.insert(c, i).unwrap();
            model.insert(i - 1, c);
        } else {
            let i = rng.gen_range(1..=n);
            assert_eq!(index.delete(i).unwrap(), model.remove(i - 1));
        }
        index.audit().unwrap_or_else(|e| panic!("step {step}: {e:?}"));
    }
}

#[test]
fn minority_none_exactly_when_oracle_is_empty() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut samples = 0;
    for (sigma, dist) in [(4, Distribution::Runs(0.9)), (26, Distribution::Zipf(1.5)), (256, Distribution::Uniform)] {
        let alpha = Fraction::new(1, 8);
        let mut model = generate_text(&mut rng, 3000, sigma, dist);
        let mut index = MinorityIndex::build(&model, sigma, alpha).unwrap();
        for _ in 0..4000 {
            if rng.gen_bool(0.2) {
                let (c, i) = (rng.gen_range(1..=sigma), rng.gen_range(1..=model.len() + 1));
                index.insert(c, i).unwrap();
                model.insert(i - 1, c);
            }
            let (l, r) = range(&mut rng, model.len());
            let valid = brute_minority(&model, l, r, alpha).unwrap();
            match index.query(l, r).unwrap() {
                Some(c) => assert!(valid.contains(&c), "M {l} {r}: {c} not in {valid:?}"),
                None => assert!(valid.is_empty(), "M {l} {r}: missed {valid:?}"),
            }
            samples += 1;
        }
    }
    assert!(samples >= 10_000);
}
