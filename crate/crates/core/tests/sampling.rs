//! Statistical checks of the sampler and the Monte Carlo estimator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use regker::automata::{sample_dfa, table_index, DEFAULT_ENUMERATION_CAP};
use regker::kernel::{exact_pn, mc_pn, required_samples};
use regker::Alphabet;

fn ab() -> Alphabet {
    Alphabet::new("ab").unwrap()
}

#[test]
fn every_two_state_dfa_within_five_percent() {
    let mut counts = [0u32; 64];
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let draws = 1_000_000;
    for _ in 0..draws {
        let d = sample_dfa(2, &ab(), &mut rng).unwrap();
        counts[table_index(2, d.table()).unwrap() as usize * 4 + d.accepting_mask() as usize] += 1;
    }
    let expected = draws as f64 / 64.0;
    for (i, &c) in counts.iter().enumerate() {
        assert!((c as f64 - expected).abs() <= 0.05 * expected, "dfa {i}: {c}");
    }
}

fn fraction_within(x: &str, y: &str, lo: f64, hi: f64, m: u64, seeds: u64) -> f64 {
    let inside = (0..seeds)
        .filter(|&s| {
            let p = mc_pn(x, y, 2, m, &ab(), s).unwrap();
            (lo..=hi).contains(&p)
        })
        .count();
    inside as f64 / seeds as f64
}

#[test]
fn estimates_fall_in_chernoff_band() {
    let m = 6358;
    assert!(fraction_within("a", "b", 0.3375, 0.4125, m, 1000) >= 0.99);
    assert!(fraction_within("a", "a", 0.45, 0.55, m, 1000) >= 0.99);
}

#[test]
fn concentration_at_required_budget() {
    let (eps, delta, seeds) = (0.1, 0.05, 1000u64);
    let m = required_samples(eps, delta).unwrap();
    let p = exact_ab_b();
    let failures = (0..seeds)
        .filter(|&s| (mc_pn("ab", "b", 2, m, &ab(), s).unwrap() - p).abs() > eps * p)
        .count();
    let allowed = delta + 3.0 * (delta / seeds as f64).sqrt();
    assert!(failures as f64 / seeds as f64 <= allowed, "{failures} failures");
}

fn exact_ab_b() -> f64 {
    use num_traits::ToPrimitive;
    exact_pn("ab", "b", 2, &ab(), DEFAULT_ENUMERATION_CAP).unwrap().to_f64().unwrap()
}

#[test]
fn estimator_is_unbiased() {
    let (m, seeds) = (100u64, 1000u64);
    let p = exact_ab_b();
    let estimates: Vec<f64> = (0..seeds).map(|s| mc_pn("ab", "b", 2, m, &ab(), s).unwrap()).collect();
    let mean = estimates.iter().sum::<f64>() / seeds as f64;
    let stderr = (p * (1.0 - p) / (m * seeds) as f64).sqrt();
    assert!((mean - p).abs() <= 4.0 * stderr, "mean {mean} vs {p}");
}
