//! Self-checks of the kernel's structural properties, runnable from the CLI.
//!
//! Each suite returns a [`SuiteReport`] with one line per check; a suite passes when
//! every check does.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::automata::{dfa_space_size, Alphabet, DfaSpace, DEFAULT_ENUMERATION_CAP};
use crate::embedding::{alpha_view, phi_view, score, separator_parts, ConceptUniverse};
use crate::error::{Error, Result};
use crate::kernel::{
    agreement_matrix, exact_pn, gram_matrix, joint_acceptance_matrix, mc_pn, pn_from_agreement,
    required_samples, KernelParams, Scaling,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Bounds,
    Embedding,
    Concentration,
    Psd,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Bounds, Suite::Embedding, Suite::Concentration, Suite::Psd];

    pub fn run(self) -> Result<SuiteReport> {
        match self {
            Suite::Bounds => bounds(3, 6),
            Suite::Embedding => embedding(2, 5),
            Suite::Concentration => concentration(0.1, 0.05, 1000),
            Suite::Psd => psd(20, 2),
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bounds" => Ok(Suite::Bounds),
            "embedding" => Ok(Suite::Embedding),
            "concentration" => Ok(Suite::Concentration),
            "psd" => Ok(Suite::Psd),
            _ => Err(Error::invalid(format!("unknown suite {s:?}"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Bounds => "bounds",
            Suite::Embedding => "embedding",
            Suite::Concentration => "concentration",
            Suite::Psd => "psd",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        SuiteReport {
            suite,
            checks: Vec::new(),
        }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Tab-separated `suite check PASS|FAIL detail` lines.
    pub fn to_table(&self) -> String {
        self.checks
            .iter()
            .map(|c| {
                let status = if c.passed { "PASS" } else { "FAIL" };
                format!("{}\t{}\t{status}\t{}\n", self.suite, c.name, c.detail)
            })
            .collect()
    }
}

fn ab() -> Alphabet {
    Alphabet::new("ab").expect("valid alphabet")
}

fn frac(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// `1/4 ≤ P_n ≤ 1/2`, `P_n(x,x) = 1/2`, dominance, and agreement-count vs full
/// enumeration, over all pairs of strings up to `max_len` and `n ≤ n_max`.
pub fn bounds(n_max: usize, max_len: usize) -> Result<SuiteReport> {
    let sigma = ab();
    let words: Vec<String> = sigma.words(max_len).collect();
    let mut report = SuiteReport::new(Suite::Bounds);
    let (quarter, half) = (frac(1, 4), frac(1, 2));
    for n in 1..=n_max {
        let agree = agreement_matrix(&words, n, &sigma, DEFAULT_ENUMERATION_CAP)?;
        let joint = joint_acceptance_matrix(&words, n, &sigma, DEFAULT_ENUMERATION_CAP)?;
        let space = dfa_space_size(n, sigma.len());
        let (mut in_range, mut diag, mut dominated, mut paths) = (true, true, true, true);
        let mut min_pn = half.clone();
        for i in 0..words.len() {
            for j in 0..words.len() {
                let pn = pn_from_agreement(agree.get(i, j), n, sigma.len());
                in_range &= pn >= quarter && pn <= half;
                if i == j {
                    diag &= pn == half;
                }
                dominated &= agree.get(i, j) <= agree.get(i, i);
                let by_definition = BigRational::new(
                    BigInt::from(joint.get(i, j)),
                    BigInt::from(space.clone()),
                );
                paths &= pn == by_definition;
                if pn < min_pn {
                    min_pn = pn;
                }
            }
        }
        let pairs = words.len() * words.len();
        report.check(format!("n={n} range"), in_range, format!("{pairs} pairs, min P_n = {min_pn}"));
        report.check(format!("n={n} diagonal"), diag, "P_n(x,x) = 1/2");
        report.check(format!("n={n} dominance"), dominated, "K_n(x,y) <= K_n(x,x)");
        report.check(format!("n={n} two-path"), paths, "agreement identity = enumeration");
    }
    Ok(report)
}

/// Exact membership recovery for every DFA with at most `max_states` states.
pub fn embedding(max_states: usize, max_len: usize) -> Result<SuiteReport> {
    let sigma = ab();
    let universe = ConceptUniverse::new(sigma.clone(), max_len.max(max_states))?;
    let words: Vec<String> = sigma.words(max_len).collect();
    let mut report = SuiteReport::new(Suite::Embedding);
    let (mut targets, mut recovered, mut partitioned) = (0usize, true, true);
    let mut first_failure = String::new();
    for n in 1..=max_states {
        for target in DfaSpace::new(n, sigma.clone())?.iter(DEFAULT_ENUMERATION_CAP)? {
            targets += 1;
            let parts = separator_parts(&target, &universe)?;
            let w = parts.combined();
            for x in &words {
                let member = target.accepts(x)?;
                let expected = if member { frac(1, 1) } else { BigRational::zero() };
                let got = score(&w, &phi_view(x, &universe)?);
                if got != expected {
                    recovered = false;
                    if first_failure.is_empty() {
                        first_failure = format!("{:?} on {x:?}: {got}", target.table());
                    }
                }
                let via_instance = score(&parts.instance_part, &crate::embedding::chi(x));
                let via_concept = score(&parts.concept_part, &alpha_view(x, &universe)?);
                let nonzero = [&via_instance, &via_concept].iter().filter(|v| !v.is_zero()).count();
                partitioned &= nonzero == member as usize;
            }
        }
    }
    let detail = if recovered {
        format!("{targets} targets x {} strings", words.len())
    } else {
        first_failure
    };
    report.check("recovery", recovered, detail);
    report.check("partition", partitioned, "exactly one part fires on members");
    Ok(report)
}

/// Failure rate of `|P̂_n − P_n| ≤ ε·P_n` over `seeds` master seeds at the
/// required sample budget, for the pair ("a", "b") with `n = 2`.
pub fn concentration(epsilon: f64, failure_prob: f64, seeds: u64) -> Result<SuiteReport> {
    let sigma = ab();
    let (x, y, n) = ("a", "b", 2);
    let m = required_samples(epsilon, failure_prob)?;
    let exact = exact_pn(x, y, n, &sigma, DEFAULT_ENUMERATION_CAP)?
        .to_f64()
        .expect("small rational");
    let failures: u64 = (0..seeds)
        .into_par_iter()
        .map(|seed| {
            mc_pn(x, y, n, m, &sigma, seed).map(|p| ((p - exact).abs() > epsilon * exact) as u64)
        })
        .sum::<Result<u64>>()?;
    let rate = failures as f64 / seeds as f64;
    let allowed = failure_prob + 3.0 * (failure_prob / seeds as f64).sqrt();
    let mut report = SuiteReport::new(Suite::Concentration);
    report.check(
        "failure-rate",
        rate <= allowed,
        format!("m={m} failures={failures}/{seeds} rate={rate:.4} allowed={allowed:.4}"),
    );
    Ok(report)
}

/// Minimum eigenvalue of an exact Gram matrix over `count` strings of length ≤ 5.
pub fn psd(count: usize, n_max: usize) -> Result<SuiteReport> {
    let sigma = ab();
    let strings = spread_strings(&sigma, 5, count);
    let params = KernelParams::new(sigma).with_scaling(Scaling::Paper).with_n_max(n_max);
    let gram = gram_matrix(&strings, &params)?;
    let min = gram.min_eigenvalue();
    let bound = -1e-9 * gram.max_diagonal();
    let mut report = SuiteReport::new(Suite::Psd);
    report.check("symmetric", gram.is_symmetric(), format!("{}x{}", gram.len(), gram.len()));
    report.check("min-eigenvalue", min >= bound, format!("min={min:.6e} bound={bound:.3e}"));
    Ok(report)
}

/// `count` strings spread evenly through the length-ordered list of strings up to `max_len`.
pub fn spread_strings(sigma: &Alphabet, max_len: usize, count: usize) -> Vec<String> {
    let all: Vec<String> = sigma.words(max_len).collect();
    if count >= all.len() {
        return all;
    }
    (0..count).map(|i| all[i * (all.len() - 1) / (count - 1).max(1)].clone()).collect()
}
