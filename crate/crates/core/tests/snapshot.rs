//! Frozen indexes and the on-disk snapshot format.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rangefreq::harness::oracle::brute_minority;
use rangefreq::{Error, Fraction, MajorityIndex, Snapshot, StaticMajorityIndex};

#[test]
fn abracadabra_has_a_above_three_tenths() {
    let snap = Snapshot::freeze(b"abracadabra", None).unwrap();
    let got = snap.majority.query(1, 11, Fraction::new(3, 10)).unwrap();
    assert_eq!(got, vec![snap.alphabet.symbol_of(b'a').unwrap()]);
    assert!(snap.minority.is_none());
}

#[test]
fn single_symbol_text() {
    let frozen = StaticMajorityIndex::freeze(&[1], 1).unwrap();
    assert_eq!(frozen.level_sizes().len(), 1);
    assert_eq!(frozen.query(1, 1, Fraction::new(1, 2)).unwrap(), vec![1]);
    assert!(frozen.query(1, 2, Fraction::new(1, 2)).is_err());
}

#[test]
fn frozen_matches_dynamic() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let text: Vec<u32> = (0..5000).map(|i| if i % 3 == 0 { 1 } else { rng.gen_range(1..=20) }).collect();
    let frozen = StaticMajorityIndex::freeze(&text, 20).unwrap();
    let dynamic = MajorityIndex::build(&text, 20, Fraction::new(1, 20)).unwrap();
    for _ in 0..1000 {
        let (a, b) = (rng.gen_range(1..=5000), rng.gen_range(1..=5000));
        let beta = Fraction::new(rng.gen_range(1..10), 10);
        let (mut s, mut d) =
            (frozen.query(a.min(b), a.max(b), beta).unwrap(), dynamic.query(a.min(b), a.max(b), beta).unwrap());
        s.sort_unstable();
        d.sort_unstable();
        assert_eq!(s, d);
    }
}

#[test]
fn snapshot_roundtrip_preserves_answers() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let text: Vec<u8> = (0..4000).map(|_| b"aaabcdeffg"[rng.gen_range(0..10)]).collect();
    let alpha = Fraction::new(1, 8);
    let snap = Snapshot::freeze(&text, Some(alpha)).unwrap();
    let mut bytes = Vec::new();
    snap.write_to(&mut bytes).unwrap();
    assert_eq!(&bytes[..8], b"RFQIDX01");
    let back = Snapshot::read_from(&mut bytes.as_slice()).unwrap();
    assert_eq!(back.alphabet.table(), snap.alphabet.table());
    let (m0, m1) = (snap.minority.as_ref().unwrap(), back.minority.as_ref().unwrap());
    assert_eq!(m1.alpha(), alpha);
    let symbols = snap.alphabet.encode(&text);
    for _ in 0..2000 {
        let (a, b) = (rng.gen_range(1..=4000), rng.gen_range(1..=4000));
        let (l, r) = (a.min(b), a.max(b));
        let beta = Fraction::new(rng.gen_range(1..8), 8);
        assert_eq!(snap.majority.query(l, r, beta).unwrap(), back.majority.query(l, r, beta).unwrap());
        let got = m1.query(l, r).unwrap();
        assert_eq!(got, m0.query(l, r).unwrap());
        let valid = brute_minority(&symbols, l, r, alpha).unwrap();
        assert_eq!(got.is_none(), valid.is_empty());
    }
}

#[test]
fn damaged_snapshots_are_rejected() {
    let snap = Snapshot::freeze(b"mississippi", Some(Fraction::new(1, 3))).unwrap();
    let mut bytes = Vec::new();
    snap.write_to(&mut bytes).unwrap();
    for cut in [0, 4, 8, 20, bytes.len() / 2, bytes.len() - 1] {
        assert!(matches!(Snapshot::read_from(&mut &bytes[..cut]), Err(Error::Format(_))), "cut {cut}");
    }
    let mut wrong_magic = bytes.clone();
    wrong_magic[0] ^= 0xff;
    assert!(matches!(Snapshot::read_from(&mut wrong_magic.as_slice()), Err(Error::Format(_))));
    let mut wrong_version = bytes.clone();
    wrong_version[8] = 9;
    assert!(matches!(Snapshot::read_from(&mut wrong_version.as_slice()), Err(Error::Format(_))));
}
