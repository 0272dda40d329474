//! The canonical finite-support embedding of strings and its linear separators.
//!
//! A string `x` maps to `φ(x) = χ(x) ⊕ α(x)` where
//!
//! * `χ(x)` is the one-hot *instance* vector with a single coordinate `inst:x`;
//! * `α(x)` has coordinate `conc:c` set for every DFA `c` with `‖c‖ ≤ |x|` that accepts `x`.
//!
//! For a target DFA `ĉ` the separator `w = w^χ ⊕ w^α` puts weight 1 on every string
//! `u ∈ L(ĉ)` shorter than `‖ĉ‖` and on the single concept coordinate `ĉ`. The two
//! parts cover complementary length ranges, so `⟨w, φ(x)⟩ = 1{x ∈ L(ĉ)}` exactly.
//!
//! Concepts are labeled DFAs, not languages: two automata recognising the same
//! language occupy distinct coordinates. Both vectors always have finite support. The
//! degenerate alternatives (one coordinate per concept with no size cutoff, or a
//! separator listing every member string) would break that, one on `φ` and one on `w`.
//!
//! `α(x)` has about `|DFA(|x|)| / 2` entries, so for longer strings use the implicit
//! [`EmbeddingView`], which answers single coordinates without materializing anything.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::automata::{
    dfa_space_size, enumerate_tables, table_from_index, table_index, Alphabet,
    Dfa, DEFAULT_ENUMERATION_CAP,
};
use crate::error::{Error, Result};

/// A DFA's coordinate: its size, table position in enumeration order, and accepting bitmask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConceptId {
    pub states: usize,
    pub table_index: u64,
    pub accept_mask: u64,
}

/// Feature coordinates; instances sort before concepts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureKey {
    Instance(String),
    Concept(ConceptId),
}

impl fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureKey::Instance(s) => write!(f, "inst:{s}"),
            FeatureKey::Concept(c) => write!(f, "conc:{}:{}:{}", c.states, c.table_index, c.accept_mask),
        }
    }
}

impl FromStr for FeatureKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(word) = s.strip_prefix("inst:") {
            return Ok(FeatureKey::Instance(word.to_owned()));
        }
        let bad = || Error::invalid(format!("malformed feature key {s:?}"));
        let rest = s.strip_prefix("conc:").ok_or_else(bad)?;
        let parts: Vec<&str> = rest.split(':').collect();
        let [n, t, m] = parts[..] else {
            return Err(bad());
        };
        Ok(FeatureKey::Concept(ConceptId {
            states: n.parse().map_err(|_| bad())?,
            table_index: t.parse().map_err(|_| bad())?,
            accept_mask: m.parse().map_err(|_| bad())?,
        }))
    }
}

/// Anything that can report a coordinate value.
pub trait Features {
    fn coordinate(&self, key: &FeatureKey) -> BigRational;
}

/// Finite-support rational vector. Zeros are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseVec {
    entries: BTreeMap<FeatureKey, BigRational>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: FeatureKey, value: BigRational) {
        if value.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, value);
        }
    }

    pub fn get(&self, key: &FeatureKey) -> Option<&BigRational> {
        self.entries.get(key)
    }

    /// `‖v‖₀`.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FeatureKey, &BigRational)> {
        self.entries.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &FeatureKey> {
        self.entries.keys()
    }

    pub fn dot(&self, other: &SparseVec) -> BigRational {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small
            .iter()
            .filter_map(|(k, v)| large.get(k).map(|w| v * w))
            .fold(BigRational::zero(), |acc, x| acc + x)
    }

    /// Concatenation of two vectors with disjoint supports.
    pub fn direct_sum(mut self, other: SparseVec) -> Result<SparseVec> {
        for (k, v) in other.entries {
            if self.entries.contains_key(&k) {
                return Err(Error::invalid(format!("direct sum of overlapping supports at {k}")));
            }
            self.entries.insert(k, v);
        }
        Ok(self)
    }

    /// One `<key>\t<value>` line per entry in key order.
    pub fn to_text(&self) -> String {
        self.iter().map(|(k, v)| format!("{k}\t{v}\n")).collect()
    }

    pub fn from_text(text: &str) -> Result<SparseVec> {
        let mut out = SparseVec::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(i + 1, "expected `<key>\\t<value>`"))?;
            let key: FeatureKey = key.parse().map_err(|e: Error| Error::parse(i + 1, e.to_string()))?;
            let value: BigRational = value
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("invalid rational {value:?}")))?;
            if out.entries.contains_key(&key) {
                return Err(Error::parse(i + 1, format!("duplicate key {key}")));
            }
            out.set(key, value);
        }
        Ok(out)
    }
}

impl Features for SparseVec {
    fn coordinate(&self, key: &FeatureKey) -> BigRational {
        self.get(key).cloned().unwrap_or_else(BigRational::zero)
    }
}

impl FromIterator<(FeatureKey, BigRational)> for SparseVec {
    fn from_iter<I: IntoIterator<Item = (FeatureKey, BigRational)>>(iter: I) -> Self {
        let mut v = SparseVec::new();
        for (k, x) in iter {
            v.set(k, x);
        }
        v
    }
}

/// All labeled DFAs over an alphabet with `1..=n_max` states, sized by state count.
///
/// The universe is not materialized; levels are enumerated on demand under `cap`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConceptUniverse {
    alphabet: Alphabet,
    n_max: usize,
    cap: u64,
}

impl ConceptUniverse {
    pub fn new(alphabet: Alphabet, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::invalid("a concept universe needs n_max ≥ 1"));
        }
        Ok(ConceptUniverse {
            alphabet,
            n_max,
            cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Number of concepts of size `n`.
    pub fn level_size(&self, n: usize) -> BigUint {
        if n == 0 || n > self.n_max {
            BigUint::zero()
        } else {
            dfa_space_size(n, self.alphabet.len())
        }
    }

    pub fn contains(&self, id: &ConceptId) -> bool {
        id.states >= 1
            && id.states <= self.n_max
            && id.states <= 64
            && (id.states == 64 || id.accept_mask >> id.states == 0)
            && table_from_index(id.states, self.alphabet.len(), id.table_index).is_some()
    }

    pub fn concept_id(&self, dfa: &Dfa) -> Result<ConceptId> {
        if dfa.alphabet() != &self.alphabet {
            return Err(Error::invalid(format!(
                "DFA alphabet {} differs from universe alphabet {}",
                dfa.alphabet(),
                self.alphabet
            )));
        }
        if dfa.states() > self.n_max || dfa.states() > 64 {
            return Err(Error::invalid(format!(
                "a {}-state DFA is outside the universe of size ≤ {}",
                dfa.states(),
                self.n_max
            )));
        }
        let table_index = table_index(dfa.states(), dfa.table())
            .ok_or_else(|| Error::invalid("transition table index overflows 64 bits"))?;
        Ok(ConceptId {
            states: dfa.states(),
            table_index,
            accept_mask: dfa.accepting_mask(),
        })
    }

    pub fn dfa(&self, id: &ConceptId) -> Result<Dfa> {
        if !self.contains(id) {
            return Err(Error::invalid(format!(
                "{} is not a concept of this universe",
                FeatureKey::Concept(*id)
            )));
        }
        let table = table_from_index(id.states, self.alphabet.len(), id.table_index)
            .expect("membership checked");
        Dfa::from_mask(self.alphabet.clone(), id.states, table, id.accept_mask)
    }

    /// Every concept of size `n`, in enumeration order.
    pub fn level(&self, n: usize) -> Result<impl Iterator<Item = (ConceptId, Dfa)> + '_> {
        if n == 0 || n > self.n_max {
            return Err(Error::invalid(format!("level {n} is outside 1..={}", self.n_max)));
        }
        let required = dfa_space_size(n, self.alphabet.len());
        if required > BigUint::from(self.cap) {
            return Err(Error::CapExceeded {
                required,
                cap: self.cap,
                hint: "",
            });
        }
        let tables = enumerate_tables(n, &self.alphabet, self.cap)?;
        Ok(tables.enumerate().flat_map(move |(index, table)| {
            (0..1u64 << n).map(move |accept_mask| {
                let id = ConceptId {
                    states: n,
                    table_index: index as u64,
                    accept_mask,
                };
                let dfa = Dfa::from_mask(self.alphabet.clone(), n, table.clone(), accept_mask)
                    .expect("enumerated tables are valid");
                (id, dfa)
            })
        }))
    }
}

fn one() -> BigRational {
    BigRational::one()
}

/// Embedding by instance: the single coordinate `inst:x`.
pub fn chi(x: &str) -> SparseVec {
    let mut v = SparseVec::new();
    v.set(FeatureKey::Instance(x.to_owned()), one());
    v
}

/// Embedding by concept: every universe DFA with at most `|x|` states that accepts `x`.
pub fn alpha_embed(x: &str, universe: &ConceptUniverse) -> Result<SparseVec> {
    let encoded = universe.alphabet.encode(x)?;
    let limit = encoded.len().min(universe.n_max);
    let mut v = SparseVec::new();
    for n in 1..=limit {
        for (id, dfa) in universe.level(n)? {
            if dfa.accepts_encoded(&encoded) {
                v.set(FeatureKey::Concept(id), one());
            }
        }
    }
    Ok(v)
}

/// Canonical embedding `χ(x) ⊕ α(x)`, materialized.
pub fn phi(x: &str, universe: &ConceptUniverse) -> Result<SparseVec> {
    chi(x).direct_sum(alpha_embed(x, universe)?)
}

/// Lazily evaluated `α(x)` or `φ(x)`.
#[derive(Clone, Debug)]
pub struct EmbeddingView<'u> {
    word: String,
    encoded: Vec<usize>,
    universe: &'u ConceptUniverse,
    with_instance: bool,
}

/// Implicit `α(x)`.
pub fn alpha_view<'u>(x: &str, universe: &'u ConceptUniverse) -> Result<EmbeddingView<'u>> {
    Ok(EmbeddingView {
        word: x.to_owned(),
        encoded: universe.alphabet.encode(x)?,
        universe,
        with_instance: false,
    })
}

/// Implicit `φ(x)`.
pub fn phi_view<'u>(x: &str, universe: &'u ConceptUniverse) -> Result<EmbeddingView<'u>> {
    Ok(EmbeddingView {
        with_instance: true,
        ..alpha_view(x, universe)?
    })
}

impl EmbeddingView<'_> {
    pub fn word(&self) -> &str {
        &self.word
    }

    /// Largest concept size present, `min(|x|, n_max)`.
    pub fn concept_limit(&self) -> usize {
        self.encoded.len().min(self.universe.n_max)
    }

    /// True when `n_max < |x|`, so concept coordinates above `n_max` are missing.
    pub fn is_truncated(&self) -> bool {
        self.universe.n_max < self.encoded.len()
    }

    /// `‖·‖₀`, counted per transition table as the accepting sets containing the end state.
    pub fn support_size(&self) -> Result<BigUint> {
        let k = self.universe.alphabet.len();
        let mut total = BigUint::from(self.with_instance as u32);
        for n in 1..=self.concept_limit() {
            let mut tables = enumerate_tables(n, &self.universe.alphabet, self.universe.cap)?;
            let mut count = 0u64;
            while tables.advance() {
                let table = tables.current();
                let end = self.encoded.iter().fold(0, |q, &a| table[q * k + a]);
                count += (0..1u64 << n).filter(|m| m >> end & 1 == 1).count() as u64;
            }
            total += count;
        }
        Ok(total)
    }

    pub fn materialize(&self) -> Result<SparseVec> {
        if self.with_instance {
            phi(&self.word, self.universe)
        } else {
            alpha_embed(&self.word, self.universe)
        }
    }
}

impl Features for EmbeddingView<'_> {
    fn coordinate(&self, key: &FeatureKey) -> BigRational {
        let hit = match key {
            FeatureKey::Instance(u) => self.with_instance && *u == self.word,
            FeatureKey::Concept(id) => {
                id.states <= self.concept_limit()
                    && self
                        .universe
                        .dfa(id)
                        .map(|d| d.accepts_encoded(&self.encoded))
                        .unwrap_or(false)
            }
        };
        if hit {
            one()
        } else {
            BigRational::zero()
        }
    }
}

/// The two halves of a separator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Separator {
    /// `w^χ`: members of the target language shorter than the target's state count.
    pub instance_part: SparseVec,
    /// `w^α`: the target's own concept coordinate.
    pub concept_part: SparseVec,
}

impl Separator {
    pub fn combined(&self) -> SparseVec {
        self.instance_part
            .clone()
            .direct_sum(self.concept_part.clone())
            .expect("instance and concept keys are disjoint")
    }
}

pub fn separator_parts(target: &Dfa, universe: &ConceptUniverse) -> Result<Separator> {
    let id = universe.concept_id(target)?;
    let size = target.states();
    let mut instance_part = SparseVec::new();
    for u in universe.alphabet.words(size - 1) {
        if target.accepts(&u)? {
            instance_part.set(FeatureKey::Instance(u), one());
        }
    }
    let mut concept_part = SparseVec::new();
    concept_part.set(FeatureKey::Concept(id), one());
    Ok(Separator {
        instance_part,
        concept_part,
    })
}

/// `w = w^χ ⊕ w^α` for `target`.
pub fn separator(target: &Dfa, universe: &ConceptUniverse) -> Result<SparseVec> {
    Ok(separator_parts(target, universe)?.combined())
}

/// `⟨w, v⟩`, driven by the support of `w`.
pub fn score<V: Features + ?Sized>(w: &SparseVec, v: &V) -> BigRational {
    w.iter()
        .map(|(k, x)| x * v.coordinate(k))
        .fold(BigRational::zero(), |acc, t| acc + t)
}

/// `⟨w, φ(x)⟩ > 0`.
pub fn classify<V: Features + ?Sized>(w: &SparseVec, v: &V) -> bool {
    score(w, v) > BigRational::zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn integer(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    fn ab() -> Alphabet {
        Alphabet::new("ab").unwrap()
    }

    fn parity() -> Dfa {
        Dfa::new(ab(), 2, vec![1, 1, 0, 0], [0]).unwrap()
    }

    fn universe(n_max: usize) -> ConceptUniverse {
        ConceptUniverse::new(ab(), n_max).unwrap()
    }

    #[test]
    fn chi_is_one_hot() {
        assert_eq!(chi("").to_text(), "inst:\t1\n");
        assert_eq!(chi("ab").len(), 1);
        let words: Vec<String> = ab().words(2).collect();
        for x in &words {
            for y in &words {
                assert_eq!(chi(x).dot(&chi(y)), integer((x == y) as i64));
            }
        }
    }

    #[test]
    fn alpha_sizes() {
        let u = universe(2);
        assert!(alpha_embed("", &u).unwrap().is_empty());
        let a = alpha_embed("a", &u).unwrap();
        assert_eq!(a.len(), 1);
        // the one-state DFA with its only state accepting
        let key = a.keys().next().unwrap();
        assert_eq!(
            key,
            &FeatureKey::Concept(ConceptId {
                states: 1,
                table_index: 0,
                accept_mask: 1
            })
        );
        // one 1-state concept plus half of the 64 two-state DFAs
        assert_eq!(alpha_embed("ab", &u).unwrap().len(), 33);
    }

    #[test]
    fn phi_sizes() {
        let u = universe(2);
        assert_eq!(phi("", &u).unwrap().to_text(), "inst:\t1\n");
        assert_eq!(phi("a", &u).unwrap().len(), 2);
        let view = phi_view("abb", &u).unwrap();
        assert!(view.is_truncated());
        assert_eq!(view.support_size().unwrap(), BigUint::from(34u32));
        assert_eq!(view.materialize().unwrap().len(), 34);
    }

    #[test]
    fn view_matches_materialized() {
        let u = universe(2);
        for x in ab().words(3) {
            let dense = phi(&x, &u).unwrap();
            let view = phi_view(&x, &u).unwrap();
            for (k, v) in dense.iter() {
                assert_eq!(&view.coordinate(k), v);
            }
            assert_eq!(view.support_size().unwrap(), BigUint::from(dense.len()));
        }
    }

    #[test]
    fn separator_examples() {
        let u = universe(2);
        let accept_all = Dfa::new(ab(), 1, vec![0, 0], [0]).unwrap();
        let s = separator_parts(&accept_all, &u).unwrap();
        assert_eq!(s.instance_part, chi(""));
        assert_eq!(s.concept_part.len(), 1);

        let s = separator_parts(&parity(), &u).unwrap();
        assert_eq!(s.instance_part, chi(""));
        assert_eq!(s.concept_part.len(), 1);

        let reject_all = Dfa::new(ab(), 1, vec![0, 0], []).unwrap();
        let s = separator_parts(&reject_all, &u).unwrap();
        assert!(s.instance_part.is_empty());
        assert_eq!(s.concept_part.len(), 1);

        let big = Dfa::new(ab(), 3, vec![0; 6], [0]).unwrap();
        assert!(separator(&big, &u).is_err());
        let other_alphabet = Dfa::new(Alphabet::new("ba").unwrap(), 1, vec![0, 0], [0]).unwrap();
        assert!(separator(&other_alphabet, &u).is_err());
    }

    #[test]
    fn parity_scores() {
        let u = universe(2);
        let w = separator(&parity(), &u).unwrap();
        assert_eq!(score(&w, &phi("a", &u).unwrap()), integer(0));
        assert_eq!(score(&w, &phi("aa", &u).unwrap()), integer(1));
        assert_eq!(score(&w, &phi("", &u).unwrap()), integer(1));
        assert!(classify(&w, &phi_view("abab", &u).unwrap()));
    }

    #[test]
    fn feature_key_order_and_text() {
        let inst = FeatureKey::Instance("zz".into());
        let conc = FeatureKey::Concept(ConceptId {
            states: 1,
            table_index: 0,
            accept_mask: 0,
        });
        assert!(inst < conc);
        for k in [inst, conc, FeatureKey::Instance(String::new())] {
            assert_eq!(k.to_string().parse::<FeatureKey>().unwrap(), k);
        }
        assert!("conc:1:2".parse::<FeatureKey>().is_err());
        assert!("foo".parse::<FeatureKey>().is_err());
    }

    #[test]
    fn sparse_text_round_trip() {
        let u = universe(2);
        let mut v = phi("ab", &u).unwrap();
        v.set(FeatureKey::Instance("b".into()), BigRational::new(BigInt::from(-3), BigInt::from(4)));
        let text = v.to_text();
        assert_eq!(SparseVec::from_text(&text).unwrap(), v);
        assert_eq!(text.lines().take(2).collect::<Vec<_>>(), ["inst:ab\t1", "inst:b\t-3/4"]);
    }

    #[test]
    fn zeros_are_not_stored() {
        let mut v = chi("a");
        v.set(FeatureKey::Instance("a".into()), integer(0));
        assert!(v.is_empty());
    }

    #[test]
    fn direct_sum_rejects_overlap() {
        assert!(chi("a").direct_sum(chi("a")).is_err());
        assert_eq!(chi("a").direct_sum(chi("b")).unwrap().len(), 2);
    }
}
