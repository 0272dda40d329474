use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use regker::automata::{parse_dfa, sample_dfa, serialize_dfa, DEFAULT_ENUMERATION_CAP};
use regker::embedding::{phi, ConceptUniverse};
use regker::kernel::{exact_kn, kernel_value, Scalar};
use regker::{Alphabet, KernelParams, Mode, Scaling};

fn ab() -> Alphabet {
    Alphabet::new("ab").unwrap()
}

fn word(max: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec(prop_oneof![Just('a'), Just('b')], 0..=max)
        .prop_map(|cs| cs.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn runs_are_total(seed in any::<u64>(), n in 1usize..6, x in word(12)) {
        let dfa = sample_dfa(n, &ab(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(dfa.run(&x).unwrap() < n);
    }

    #[test]
    fn serialization_round_trips(seed in any::<u64>(), n in 1usize..6, symbols in "[a-z]{1,4}") {
        prop_assume!(Alphabet::new(&symbols).is_ok());
        let sigma = Alphabet::new(&symbols).unwrap();
        let dfa = sample_dfa(n, &sigma, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let text = serialize_dfa(&dfa);
        let back = parse_dfa(&text).unwrap();
        prop_assert_eq!(&back, &dfa);
        prop_assert_eq!(serialize_dfa(&back), text);
    }

    #[test]
    fn exact_kernel_is_symmetric_and_dominated(x in word(4), y in word(4)) {
        let params = KernelParams::new(ab()).with_scaling(Scaling::Paper).with_n_max(3);
        let xy = kernel_value(&x, &y, &params).unwrap();
        let yx = kernel_value(&y, &x, &params).unwrap();
        prop_assert_eq!(&xy.value, &yx.value);
        for n in 1..=3 {
            let off = exact_kn(&x, &y, n, &ab(), DEFAULT_ENUMERATION_CAP).unwrap();
            let diag = exact_kn(&x, &x, n, &ab(), DEFAULT_ENUMERATION_CAP).unwrap();
            prop_assert!(off <= diag);
        }
    }

    #[test]
    fn monte_carlo_kernel_is_symmetric(x in word(5), y in word(5), seed in any::<u64>()) {
        let params = KernelParams::new(ab())
            .with_mode(Mode::MonteCarlo)
            .with_accuracy(0.5, 0.2)
            .with_seed(seed);
        let xy = kernel_value(&x, &y, &params).unwrap().value;
        let yx = kernel_value(&y, &x, &params).unwrap().value;
        match (xy, yx) {
            (Scalar::Real(a), Scalar::Real(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
            other => prop_assert!(false, "unexpected {:?}", other),
        }
    }

    #[test]
    fn embedding_matches_kernel(x in word(4), y in word(4)) {
        let universe = ConceptUniverse::new(ab(), 2).unwrap();
        let params = KernelParams::new(ab()).with_scaling(Scaling::Paper).with_n_max(2);
        let dot = phi(&x, &universe).unwrap().dot(&phi(&y, &universe).unwrap());
        let Scalar::Exact(k) = kernel_value(&x, &y, &params).unwrap().value else {
            panic!("exact paper scaling");
        };
        prop_assert_eq!(dot.to_integer(), num_bigint::BigInt::from(k));
        prop_assert!(dot.is_integer());
    }
}

#[test]
fn half_of_each_space_accepts_any_word() {
    use regker::automata::DfaSpace;
    for n in 1..=3 {
        let space = DfaSpace::new(n, ab()).unwrap();
        let total = space.cardinality();
        for x in ab().words(6) {
            let accepting = space
                .iter(DEFAULT_ENUMERATION_CAP)
                .unwrap()
                .filter(|d| d.accepts(&x).unwrap())
                .count();
            assert_eq!(num_bigint::BigUint::from(accepting * 2), total, "n={n} x={x:?}");
        }
    }
}
