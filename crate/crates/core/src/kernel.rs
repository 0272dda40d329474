//! The universal regular kernel
//!
//! `K(x, y) = 1{x = y} + Σ_{n=1}^{min(|x|, |y|, n_max)} K_n(x, y)` where `K_n(x, y)`
//! counts the labeled `n`-state DFAs accepting both strings. `P_n = K_n / |DFA(n)|`
//! is the probability that a uniformly drawn `n`-state DFA accepts both.
//!
//! Exact evaluation enumerates transition tables. Because accepting flags are
//! independent fair bits, a table whose end states for `x` and `y` coincide
//! contributes `1/2` and any other table `1/4`, so
//! `P_n = (1 + agree / tables) / 4` with `agree` the number of tables on which the
//! two runs end together. [`exact_pn_by_enumeration`] computes the same quantity
//! from its definition over every DFA and is kept as a cross-check.
//!
//! Monte Carlo evaluation draws `m` DFAs per `(n, x, y)` from a ChaCha8 stream whose
//! seed is derived from the unordered pair, see [`pair_stream_seed`]. The sample count
//! comes from [`required_samples`], which with `P_n ≥ 1/4` turns the multiplicative
//! Chernoff bound into an `ε`-relative guarantee at failure probability `δ`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::automata::{
    check_table_cap, dfa_space_size, enumerate_tables, sample_dfa, Alphabet, DfaSpace,
    DEFAULT_ENUMERATION_CAP,
};
use crate::error::{Error, Result};

const MC_HINT: &str = "; use monte-carlo mode (--mode mc) instead";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    #[serde(rename = "mc")]
    MonteCarlo,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "mc" | "monte-carlo" => Ok(Mode::MonteCarlo),
            _ => Err(Error::invalid(format!("unknown mode {s:?}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::MonteCarlo => "mc",
        })
    }
}

/// How the per-`n` terms are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scaling {
    /// Raw DFA counts `K_n`; exact integers in exact mode.
    Paper,
    /// Weighted probabilities `w_n · P_n`.
    Normalized,
}

impl FromStr for Scaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Scaling::Paper),
            "normalized" => Ok(Scaling::Normalized),
            _ => Err(Error::invalid(format!("unknown scaling {s:?}"))),
        }
    }
}

impl fmt::Display for Scaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scaling::Paper => "paper",
            Scaling::Normalized => "normalized",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub mode: Mode,
    pub scaling: Scaling,
    pub n_max: usize,
    pub epsilon: f64,
    /// Probability that a Monte Carlo term misses its relative accuracy.
    pub failure_prob: f64,
    pub master_seed: u64,
    pub alphabet: Alphabet,
    /// Per-`n` weights for normalized scaling, `weights[n - 1]`; missing entries are 1.
    #[serde(default)]
    pub weights: Vec<f64>,
    #[serde(default = "default_cap")]
    pub enumeration_cap: u64,
}

fn default_cap() -> u64 {
    DEFAULT_ENUMERATION_CAP
}

impl KernelParams {
    /// Exact mode, normalized scaling, `n_max = 3`, `ε = 0.1`, `δ = 0.05`, seed 0.
    pub fn new(alphabet: Alphabet) -> Self {
        KernelParams {
            mode: Mode::Exact,
            scaling: Scaling::Normalized,
            n_max: 3,
            epsilon: 0.1,
            failure_prob: 0.05,
            master_seed: 0,
            alphabet,
            weights: Vec::new(),
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_scaling(mut self, scaling: Scaling) -> Self {
        self.scaling = scaling;
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn with_accuracy(mut self, epsilon: f64, failure_prob: f64) -> Self {
        self.epsilon = epsilon;
        self.failure_prob = failure_prob;
        self
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn weight(&self, n: usize) -> f64 {
        self.weights.get(n - 1).copied().unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::invalid("n_max must be at least 1"));
        }
        if let Some(w) = self.weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::invalid(format!("weight {w} is not a finite non-negative number")));
        }
        if self.mode == Mode::MonteCarlo {
            required_samples(self.epsilon, self.failure_prob)?;
        }
        Ok(())
    }

    /// Samples per Monte Carlo term, `None` in exact mode.
    pub fn samples(&self) -> Result<Option<u64>> {
        match self.mode {
            Mode::Exact => Ok(None),
            Mode::MonteCarlo => required_samples(self.epsilon, self.failure_prob).map(Some),
        }
    }
}

/// The parameters under which a Monte Carlo value carries its Chernoff guarantee.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub epsilon: f64,
    pub failure_prob: f64,
    pub samples: u64,
    pub master_seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(BigUint),
    Real(f64),
}

impl Scalar {
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(v) => v.to_f64().unwrap_or(f64::INFINITY),
            Scalar::Real(v) => *v,
        }
    }
}

impl fmt::Display for Scalar {
    /// Exact integers in full decimal, reals with 17 significant digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(v) => write!(f, "{v}"),
            Scalar::Real(v) => write!(f, "{v:.16e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelValue {
    pub value: Scalar,
    /// Largest `n` summed, `min(|x|, |y|, n_max)`.
    pub summed_to: usize,
    /// Set when `n_max` cut the sum short of `min(|x|, |y|)`.
    pub truncated: bool,
    pub certificate: Option<Certificate>,
}

impl KernelValue {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::invalid("automaton size n must be at least 1"))
    } else {
        Ok(())
    }
}

fn with_mc_hint(e: Error) -> Error {
    match e {
        Error::CapExceeded { required, cap, .. } => Error::CapExceeded {
            required,
            cap,
            hint: MC_HINT,
        },
        other => other,
    }
}

/// Number of `n`-state transition tables on which `x` and `y` end in the same state.
pub fn agreement_count(x: &str, y: &str, n: usize, alphabet: &Alphabet, cap: u64) -> Result<u64> {
    let words = [x.to_owned(), y.to_owned()];
    Ok(agreement_matrix(&words, n, alphabet, cap)?.get(0, 1))
}

/// `P_n(x, y)` via the agreement-count identity.
pub fn exact_pn(x: &str, y: &str, n: usize, alphabet: &Alphabet, cap: u64) -> Result<BigRational> {
    let agree = agreement_count(x, y, n, alphabet, cap)?;
    Ok(pn_from_agreement(agree, n, alphabet.len()))
}

/// `P_n(x, y)` as the fraction of all `n`-state DFAs accepting both strings.
pub fn exact_pn_by_enumeration(
    x: &str,
    y: &str,
    n: usize,
    alphabet: &Alphabet,
    cap: u64,
) -> Result<BigRational> {
    let joint = exact_kn_by_enumeration(x, y, n, alphabet, cap)?;
    Ok(BigRational::new(joint.into(), dfa_space_size(n, alphabet.len()).into()))
}

/// `K_n(x, y)`, exact.
pub fn exact_kn(x: &str, y: &str, n: usize, alphabet: &Alphabet, cap: u64) -> Result<BigUint> {
    let agree = agreement_count(x, y, n, alphabet, cap)?;
    Ok(kn_from_agreement(agree, n, alphabet.len()))
}

/// `K_n(x, y)` by running every DFA of the space on both strings.
pub fn exact_kn_by_enumeration(
    x: &str,
    y: &str,
    n: usize,
    alphabet: &Alphabet,
    cap: u64,
) -> Result<BigUint> {
    check_n(n)?;
    let (xe, ye) = (alphabet.encode(x)?, alphabet.encode(y)?);
    let space = DfaSpace::new(n, alphabet.clone())?;
    let count = space
        .iter(cap)?
        .filter(|dfa| dfa.accepts_encoded(&xe) && dfa.accepts_encoded(&ye))
        .count();
    Ok(BigUint::from(count))
}

/// `(1 + agree / n^(n·k)) / 4`.
pub fn pn_from_agreement(agree: u64, n: usize, alphabet_size: usize) -> BigRational {
    let tables = crate::automata::table_count(n, alphabet_size);
    let numer = BigInt::from(tables.clone() + agree);
    BigRational::new(numer, BigInt::from(tables << 2))
}

/// `P_n · |DFA(n)| = 2^n · (tables + agree) / 4`, always an integer.
pub fn kn_from_agreement(agree: u64, n: usize, alphabet_size: usize) -> BigUint {
    let tables = crate::automata::table_count(n, alphabet_size);
    let (q, r) = ((tables + agree) << n).div_rem(&BigUint::from(4u32));
    debug_assert!(r.is_zero());
    q
}

/// Packed symmetric matrix over a word list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairTable {
    size: usize,
    cells: Vec<u64>,
}

impl PairTable {
    fn new(size: usize) -> Self {
        PairTable {
            size,
            cells: vec![0; size * (size + 1) / 2],
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        hi * (hi + 1) / 2 + lo
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.cells[self.slot(i, j)]
    }
}

/// Prefix trie over the words so each table's end states are computed once per node.
struct Trie {
    /// `(parent, symbol)` per node, parents before children; node 0 is the root.
    nodes: Vec<(usize, usize)>,
    word_node: Vec<usize>,
}

impl Trie {
    fn build(words: &[String], alphabet: &Alphabet) -> Result<Self> {
        let k = alphabet.len();
        let mut nodes = vec![(0, 0)];
        let mut children: Vec<Vec<usize>> = vec![vec![usize::MAX; k]];
        let mut word_node = Vec::with_capacity(words.len());
        for w in words {
            let mut at = 0;
            for a in alphabet.encode(w)? {
                if children[at][a] == usize::MAX {
                    children[at][a] = nodes.len();
                    nodes.push((at, a));
                    children.push(vec![usize::MAX; k]);
                }
                at = children[at][a];
            }
            word_node.push(at);
        }
        Ok(Trie { nodes, word_node })
    }

    fn end_states(&self, table: &[usize], k: usize, ends: &mut [usize], out: &mut [usize]) {
        ends[0] = 0;
        for (node, &(parent, a)) in self.nodes.iter().enumerate().skip(1) {
            ends[node] = table[ends[parent] * k + a];
        }
        for (o, &node) in out.iter_mut().zip(&self.word_node) {
            *o = ends[node];
        }
    }
}

/// For every pair of `words`, the number of `n`-state tables on which both runs end together.
pub fn agreement_matrix(words: &[String], n: usize, alphabet: &Alphabet, cap: u64) -> Result<PairTable> {
    check_n(n)?;
    let k = alphabet.len();
    let trie = Trie::build(words, alphabet)?;
    let mut tables = enumerate_tables(n, alphabet, cap)?;
    let mut out = PairTable::new(words.len());
    let mut ends = vec![0; trie.nodes.len()];
    let mut word_ends = vec![0; words.len()];
    while tables.advance() {
        trie.end_states(tables.current(), k, &mut ends, &mut word_ends);
        let mut slot = 0;
        for j in 0..words.len() {
            for i in 0..=j {
                out.cells[slot] += (word_ends[i] == word_ends[j]) as u64;
                slot += 1;
            }
        }
    }
    Ok(out)
}

/// For every pair of `words`, the number of `n`-state DFAs accepting both, counted
/// directly over every (table, accepting set) combination.
pub fn joint_acceptance_matrix(
    words: &[String],
    n: usize,
    alphabet: &Alphabet,
    cap: u64,
) -> Result<PairTable> {
    check_n(n)?;
    if n >= 64 {
        return Err(Error::CapExceeded {
            required: dfa_space_size(n, alphabet.len()),
            cap,
            hint: "",
        });
    }
    let space = dfa_space_size(n, alphabet.len());
    if space > BigUint::from(cap) {
        return Err(Error::CapExceeded {
            required: space,
            cap,
            hint: "",
        });
    }
    let k = alphabet.len();
    let trie = Trie::build(words, alphabet)?;
    let mut tables = enumerate_tables(n, alphabet, cap)?;
    let mut out = PairTable::new(words.len());
    let mut ends = vec![0; trie.nodes.len()];
    let mut word_ends = vec![0; words.len()];
    let mut accepted = vec![false; words.len()];
    while tables.advance() {
        trie.end_states(tables.current(), k, &mut ends, &mut word_ends);
        for mask in 0..1u64 << n {
            for (acc, &q) in accepted.iter_mut().zip(&word_ends) {
                *acc = mask >> q & 1 == 1;
            }
            let mut slot = 0;
            for j in 0..words.len() {
                for i in 0..=j {
                    out.cells[slot] += (accepted[i] && accepted[j]) as u64;
                    slot += 1;
                }
            }
        }
    }
    Ok(out)
}

/// `ceil(12 · ε⁻² · ln(2/δ))`.
pub fn required_samples(epsilon: f64, failure_prob: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon {epsilon} is outside (0, 1)")));
    }
    if !(failure_prob > 0.0 && failure_prob < 1.0) {
        return Err(Error::invalid(format!(
            "failure probability {failure_prob} is outside (0, 1)"
        )));
    }
    Ok((12.0 / (epsilon * epsilon) * (2.0 / failure_prob).ln()).ceil() as u64)
}

/// Seed of the sampling stream for one Monte Carlo term.
///
/// SHA-256 over `master_seed (u64 LE) ‖ n (u64 LE) ‖ len(lo) (u64 LE) ‖ lo ‖ len(hi) (u64 LE) ‖ hi`,
/// where `lo ≤ hi` are the two strings in byte order, encoded as UTF-8. The seed is
/// the first 8 digest bytes read little-endian.
pub fn pair_stream_seed(master_seed: u64, n: usize, x: &str, y: &str) -> u64 {
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update((n as u64).to_le_bytes());
    for s in [lo, hi] {
        h.update((s.len() as u64).to_le_bytes());
        h.update(s.as_bytes());
    }
    let digest = h.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(first)
}

/// Number of `samples` uniformly drawn `n`-state DFAs accepting both strings.
pub fn mc_joint_hits(
    x: &str,
    y: &str,
    n: usize,
    samples: u64,
    alphabet: &Alphabet,
    master_seed: u64,
) -> Result<u64> {
    check_n(n)?;
    if samples == 0 {
        return Err(Error::invalid("Monte Carlo estimate needs at least one sample"));
    }
    let (xe, ye) = (alphabet.encode(x)?, alphabet.encode(y)?);
    let mut rng = ChaCha8Rng::seed_from_u64(pair_stream_seed(master_seed, n, x, y));
    let mut dfa = sample_dfa(n, alphabet, &mut rng)?;
    let mut hits = 0;
    for i in 0..samples {
        if i > 0 {
            dfa.resample(&mut rng);
        }
        hits += (dfa.accepts_encoded(&xe) && dfa.accepts_encoded(&ye)) as u64;
    }
    Ok(hits)
}

/// Monte Carlo estimate of `P_n(x, y)` from `samples` draws.
pub fn mc_pn(
    x: &str,
    y: &str,
    n: usize,
    samples: u64,
    alphabet: &Alphabet,
    master_seed: u64,
) -> Result<f64> {
    Ok(mc_joint_hits(x, y, n, samples, alphabet, master_seed)? as f64 / samples as f64)
}

enum Term {
    Count(BigUint),
    Probability(BigRational),
    Estimate(f64),
}

/// Combines `1{x=y}` with per-`n` terms; shared by single evaluations and Gram rows so
/// both round identically.
fn combine(identical: bool, terms: impl IntoIterator<Item = (usize, Term)>, params: &KernelParams) -> Scalar {
    let k = params.alphabet.len();
    match (params.mode, params.scaling) {
        (Mode::Exact, Scaling::Paper) => {
            let mut total = BigUint::from(identical as u32);
            for (_, t) in terms {
                if let Term::Count(c) = t {
                    total += c;
                }
            }
            Scalar::Exact(total)
        }
        _ => {
            let mut total = identical as u8 as f64;
            for (n, t) in terms {
                total += match (t, params.scaling) {
                    (Term::Probability(p), _) => params.weight(n) * p.to_f64().unwrap_or(0.0),
                    (Term::Estimate(p), Scaling::Normalized) => params.weight(n) * p,
                    (Term::Estimate(p), Scaling::Paper) => {
                        p * dfa_space_size(n, k).to_f64().unwrap_or(f64::INFINITY)
                    }
                    (Term::Count(c), _) => c.to_f64().unwrap_or(f64::INFINITY),
                };
            }
            Scalar::Real(total)
        }
    }
}

fn summation_limit(x: &str, y: &str, params: &KernelParams) -> (usize, bool) {
    let shortest = x.chars().count().min(y.chars().count());
    (shortest.min(params.n_max), params.n_max < shortest)
}

fn certificate(params: &KernelParams) -> Result<Option<Certificate>> {
    Ok(params.samples()?.map(|samples| Certificate {
        epsilon: params.epsilon,
        failure_prob: params.failure_prob,
        samples,
        master_seed: params.master_seed,
    }))
}

/// `K(x, y)` under `params`.
pub fn kernel_value(x: &str, y: &str, params: &KernelParams) -> Result<KernelValue> {
    params.validate()?;
    params.alphabet.validate(x)?;
    params.alphabet.validate(y)?;
    let (limit, truncated) = summation_limit(x, y, params);
    let samples = params.samples()?;
    let mut terms = Vec::with_capacity(limit);
    for n in 1..=limit {
        let term = match (params.mode, params.scaling) {
            (Mode::Exact, scaling) => {
                let agree = agreement_count(x, y, n, &params.alphabet, params.enumeration_cap)
                    .map_err(with_mc_hint)?;
                match scaling {
                    Scaling::Paper => Term::Count(kn_from_agreement(agree, n, params.alphabet.len())),
                    Scaling::Normalized => {
                        Term::Probability(pn_from_agreement(agree, n, params.alphabet.len()))
                    }
                }
            }
            (Mode::MonteCarlo, _) => {
                let m = samples.expect("monte carlo params carry a sample count");
                Term::Estimate(mc_pn(x, y, n, m, &params.alphabet, params.master_seed)?)
            }
        };
        terms.push((n, term));
    }
    Ok(KernelValue {
        value: combine(x == y, terms, params),
        summed_to: limit,
        truncated,
        certificate: certificate(params)?,
    })
}

/// Pairwise kernel values over a list of distinct strings.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    strings: Vec<String>,
    params: KernelParams,
    /// Row-major, `len × len`.
    values: Vec<Scalar>,
    certificate: Option<Certificate>,
}

/// Builds the Gram matrix, evaluating each unordered pair once.
///
/// Exact mode shares one table enumeration per `n` across all pairs; Monte Carlo pairs
/// are evaluated in parallel, each on its own derived stream.
pub fn gram_matrix(strings: &[String], params: &KernelParams) -> Result<GramMatrix> {
    params.validate()?;
    for (i, s) in strings.iter().enumerate() {
        params.alphabet.validate(s)?;
        if strings[..i].contains(s) {
            return Err(Error::invalid(format!("duplicate string {s:?} in Gram input")));
        }
    }
    let size = strings.len();
    let pairs: Vec<(usize, usize)> = (0..size).flat_map(|j| (0..=j).map(move |i| (i, j))).collect();

    let upper: Vec<Scalar> = match params.mode {
        Mode::Exact => {
            let longest = strings.iter().map(|s| s.chars().count()).max().unwrap_or(0);
            let top = longest.min(params.n_max);
            let k = params.alphabet.len();
            let mut per_n = Vec::with_capacity(top);
            for n in 1..=top {
                per_n.push(
                    agreement_matrix(strings, n, &params.alphabet, params.enumeration_cap)
                        .map_err(with_mc_hint)?,
                );
            }
            pairs
                .iter()
                .map(|&(i, j)| {
                    let (limit, _) = summation_limit(&strings[i], &strings[j], params);
                    let terms = (1..=limit).map(|n| {
                        let agree = per_n[n - 1].get(i, j);
                        let term = match params.scaling {
                            Scaling::Paper => Term::Count(kn_from_agreement(agree, n, k)),
                            Scaling::Normalized => Term::Probability(pn_from_agreement(agree, n, k)),
                        };
                        (n, term)
                    });
                    combine(i == j, terms, params)
                })
                .collect()
        }
        Mode::MonteCarlo => pairs
            .par_iter()
            .map(|&(i, j)| kernel_value(&strings[i], &strings[j], params).map(|v| v.value))
            .collect::<Result<_>>()?,
    };

    let mut values = vec![Scalar::Real(0.0); size * size];
    for (&(i, j), v) in pairs.iter().zip(upper) {
        values[j * size + i] = v.clone();
        values[i * size + j] = v;
    }
    Ok(GramMatrix {
        strings: strings.to_vec(),
        params: params.clone(),
        values,
        certificate: certificate(params)?,
    })
}

#[derive(Serialize)]
struct GramMetadata<'a> {
    format: &'static str,
    strings: &'a [String],
    params: &'a KernelParams,
    certificate: &'a Option<Certificate>,
}

impl GramMatrix {
    /// Wraps precomputed real values (row-major, symmetric) as a Gram matrix.
    pub fn from_real(strings: Vec<String>, params: KernelParams, values: Vec<f64>) -> Result<Self> {
        let k = strings.len();
        if values.len() != k * k {
            return Err(Error::invalid(format!("{} values for a {k}×{k} matrix", values.len())));
        }
        let g = GramMatrix {
            strings,
            params,
            values: values.into_iter().map(Scalar::Real).collect(),
            certificate: None,
        };
        if !g.is_symmetric() {
            return Err(Error::invalid("Gram matrix is not symmetric"));
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn strings(&self) -> &[String] {
        &self.strings
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        self.certificate.as_ref()
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.values[i * self.len() + j]
    }

    pub fn get_f64(&self, i: usize, j: usize) -> f64 {
        self.get(i, j).to_f64()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let k = self.len();
        DMatrix::from_fn(k, k, |i, j| self.get_f64(i, j))
    }

    pub fn is_symmetric(&self) -> bool {
        let k = self.len();
        (0..k).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.len()).map(|i| self.get_f64(i, i)).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the (floating-point) matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.to_dmatrix()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV with header `s0,…,s{k-1}` and one row per string.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let k = self.len();
        let header: Vec<String> = (0..k).map(|i| format!("s{i}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for i in 0..k {
            let row: Vec<String> = (0..k).map(|j| self.get(i, j).to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// JSON sidecar with the string order and every parameter needed to replay the matrix.
    pub fn metadata_json(&self) -> String {
        let meta = GramMetadata {
            format: "regker-gram-v1",
            strings: &self.strings,
            params: &self.params,
            certificate: &self.certificate,
        };
        serde_json::to_string_pretty(&meta).expect("metadata serializes")
    }
}

/// Cap check for exact evaluation up to `n_max`, without evaluating anything.
pub fn check_exact_feasible(params: &KernelParams) -> Result<()> {
    for n in 1..=params.n_max {
        check_table_cap(n, params.alphabet.len(), params.enumeration_cap).map_err(with_mc_hint)?;
    }
    Ok(())
}
