//! End-to-end paths through several modules at once.

use jumpcode::embedding::{content_at_depth, embed, one_step_decode, verify_homomorphism, verify_separation, GenericOracle};
use jumpcode::free_group::{act, Configuration, F2Word, Letter};
use jumpcode::jump::{decode_column, encode, EncodedPrefix, JumpCodePrefix};
use jumpcode::streams::{Bit, FiniteWord, Index};
use proptest::prelude::*;

fn word() -> impl Strategy<Value = FiniteWord> {
    proptest::collection::vec(any::<bool>(), 0..=8).prop_map(|bits| FiniteWord::from_bits(bits.into_iter().map(Bit::from)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // JSON prefix in, JSON columns out, and back again
    #[test]
    fn prefix_survives_encoding_and_serialization(words in proptest::collection::vec(word(), 0..12), seed in any::<u64>()) {
        let depth = words.len();
        let payload = FiniteWord::from_bits((0..depth).map(|i| Bit::from((seed >> (i % 64)) & 1 == 1)));
        let prefix = JumpCodePrefix { words, payload, depth };
        let code = prefix.to_jump_code();
        let encoded = EncodedPrefix::capture(&encode(&code.words, &code.payload), depth);
        let text = serde_json::to_string(&encoded).unwrap();
        let back: EncodedPrefix = serde_json::from_str(&text).unwrap();
        let z = back.to_tame().unwrap();
        for n in 0..depth {
            let (w, b) = decode_column(&z, n as Index).unwrap();
            prop_assert_eq!(&w, &prefix.words[n]);
            prop_assert_eq!(Some(b), prefix.payload.get(n));
        }
    }
}

#[test]
fn forcing_built_oracle_drives_the_embedding() {
    let x = Configuration::seeded(11);
    let mut members = vec![x.clone()];
    members.extend(Letter::ALL.iter().map(|l| act(&F2Word::generator(*l), &x)));
    let g = GenericOracle::forcing_built(members, 5, 16, &[]).unwrap();

    let report = verify_homomorphism(&x, &g, 96);
    assert!(report.pass, "{}", report.to_json());

    let step = one_step_decode(&embed(&x, &g)).unwrap();
    for n in 0..16 {
        assert_eq!(step.words.word(n), g.word(&x, n));
    }
}

#[test]
fn content_and_separation_agree_on_a_shifted_point() {
    let x = Configuration::seeded(21);
    let g = GenericOracle::seeded(3);
    let y = act(&"ab".parse().unwrap(), &x);
    let content = content_at_depth(&x, &g, 2).unwrap();
    assert!(content.f_parts.iter().any(|(w, _)| w.to_string() == "ab"));

    let report = verify_separation(&x, &y, &g, 2, 64);
    assert!(!report.pass);
    let unrelated = verify_separation(&x, &Configuration::seeded(22), &g, 2, 64);
    assert!(unrelated.pass, "{}", unrelated.to_json());
}
