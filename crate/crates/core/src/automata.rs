//! Complete deterministic automata over a small alphabet.
//!
//! The automaton model used throughout the crate is the *labeled* one: states are
//! `0..n`, the start state is always `0`, the transition function is total, and any
//! subset of states (including none or all) may be accepting. Nothing is quotiented
//! by isomorphism or reachability, so the space of `n`-state automata over `k`
//! symbols has exactly `n^(n·k) · 2^n` members. Uniform sampling and exhaustive
//! enumeration both range over that space.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ceiling on the number of transition tables an exhaustive pass may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// An ordered set of single-character symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    /// Builds an alphabet from its concatenated symbols, e.g. `"ab"`.
    pub fn new(symbols: &str) -> Result<Self> {
        let symbols: Vec<char> = symbols.chars().collect();
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet is empty".into()));
        }
        for (i, &c) in symbols.iter().enumerate() {
            if c.is_whitespace() || c.is_control() || c == '#' {
                return Err(Error::InvalidAlphabet(format!(
                    "symbol {c:?} is not a printable non-whitespace character"
                )));
            }
            if symbols[..i].contains(&c) {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol {c:?}")));
            }
        }
        Ok(Alphabet { symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn index_of(&self, symbol: char) -> Option<usize> {
        self.symbols.iter().position(|&c| c == symbol)
    }

    /// Translates a string into symbol indices, reporting the first foreign character.
    pub fn encode(&self, word: &str) -> Result<Vec<usize>> {
        word.chars()
            .enumerate()
            .map(|(position, symbol)| {
                self.index_of(symbol)
                    .ok_or(Error::UnknownSymbol { symbol, position })
            })
            .collect()
    }

    pub fn decode(&self, indices: &[usize]) -> String {
        indices.iter().map(|&i| self.symbols[i]).collect()
    }

    /// Checks that every character of `word` belongs to the alphabet.
    pub fn validate(&self, word: &str) -> Result<()> {
        self.encode(word).map(|_| ())
    }

    /// All words of length `0..=max_len`, shortest first and lexicographic
    /// (in alphabet order) within a length.
    pub fn words(&self, max_len: usize) -> Words<'_> {
        Words {
            alphabet: self,
            max_len,
            current: Some(Vec::new()),
        }
    }

    /// Number of words of length at most `max_len`.
    pub fn word_count(&self, max_len: usize) -> BigUint {
        let k = BigUint::from(self.len());
        let mut total = BigUint::from(0u32);
        let mut level = BigUint::one();
        for _ in 0..=max_len {
            total += &level;
            level *= &k;
        }
        total
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.symbols {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Alphabet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Alphabet::new(s)
    }
}

impl TryFrom<String> for Alphabet {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Alphabet::new(&s)
    }
}

impl From<Alphabet> for String {
    fn from(a: Alphabet) -> String {
        a.to_string()
    }
}

/// Length-then-lexicographic iterator over words, see [`Alphabet::words`].
pub struct Words<'a> {
    alphabet: &'a Alphabet,
    max_len: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for Words<'_> {
    type Item = String;

    fn next(&mut self) -> Option<String> {
        let word = self.current.take()?;
        let out = self.alphabet.decode(&word);
        let k = self.alphabet.len();
        let mut next = word;
        // odometer increment, growing the word when every position wraps
        let mut pos = next.len();
        loop {
            if pos == 0 {
                if next.len() < self.max_len {
                    next = vec![0; next.len() + 1];
                    self.current = Some(next);
                }
                break;
            }
            pos -= 1;
            next[pos] += 1;
            if next[pos] < k {
                self.current = Some(next);
                break;
            }
            next[pos] = 0;
        }
        Some(out)
    }
}

/// A complete DFA with states `0..n`, start state `0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dfa {
    alphabet: Alphabet,
    states: usize,
    accepting: Vec<bool>,
    /// Row-major `(state, symbol)` transition targets.
    table: Vec<usize>,
}

impl Dfa {
    /// `table` is row-major over `(state, symbol-index)`; `accepting` lists state ids.
    pub fn new(
        alphabet: Alphabet,
        states: usize,
        table: Vec<usize>,
        accepting: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        if states == 0 {
            return Err(Error::invalid("a DFA needs at least one state"));
        }
        if table.len() != states * alphabet.len() {
            return Err(Error::invalid(format!(
                "transition table has {} cells, expected {}",
                table.len(),
                states * alphabet.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&t| t >= states) {
            return Err(Error::invalid(format!(
                "transition target {bad} is not a state of a {states}-state DFA"
            )));
        }
        let mut flags = vec![false; states];
        for q in accepting {
            if q >= states {
                return Err(Error::invalid(format!(
                    "accepting state {q} is not a state of a {states}-state DFA"
                )));
            }
            flags[q] = true;
        }
        Ok(Dfa {
            alphabet,
            states,
            accepting: flags,
            table,
        })
    }

    /// Builds a DFA from an enumerated table and an accepting bitmask (bit `q` = state `q`).
    pub fn from_mask(alphabet: Alphabet, states: usize, table: Vec<usize>, mask: u64) -> Result<Self> {
        if states > 64 {
            return Err(Error::invalid("accepting masks cover at most 64 states"));
        }
        Dfa::new(
            alphabet,
            states,
            table,
            (0..states).filter(|q| mask >> q & 1 == 1),
        )
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Number of states, the concept size `‖A‖`.
    pub fn states(&self) -> usize {
        self.states
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.states).filter(|&q| self.accepting[q])
    }

    /// Bitmask of accepting states; only meaningful for at most 64 states.
    pub fn accepting_mask(&self) -> u64 {
        self.accepting_states()
            .filter(|&q| q < 64)
            .fold(0, |m, q| m | 1 << q)
    }

    #[inline]
    pub fn step(&self, state: usize, symbol: usize) -> usize {
        self.table[state * self.alphabet.len() + symbol]
    }

    /// End state after reading an already-encoded word from state 0.
    #[inline]
    pub fn run_encoded(&self, word: &[usize]) -> usize {
        word.iter().fold(0, |q, &a| self.step(q, a))
    }

    /// End state after reading `word` from state 0.
    pub fn run(&self, word: &str) -> Result<usize> {
        let mut q = 0;
        for (position, symbol) in word.chars().enumerate() {
            let a = self
                .alphabet
                .index_of(symbol)
                .ok_or(Error::UnknownSymbol { symbol, position })?;
            q = self.step(q, a);
        }
        Ok(q)
    }

    pub fn accepts(&self, word: &str) -> Result<bool> {
        Ok(self.accepting[self.run(word)?])
    }

    #[inline]
    pub fn accepts_encoded(&self, word: &[usize]) -> bool {
        self.accepting[self.run_encoded(word)]
    }

    /// Redraws every transition cell and accepting flag from `rng`, keeping the shape.
    ///
    /// Stream consumption: one `gen_range(0..n)` per cell in `(state, symbol)` order
    /// (none when `n == 1`, the cells being forced), then `ceil(n/64)` words from
    /// `next_u64`, state `q` accepting iff bit `q % 64` of word `q / 64` is set.
    pub fn resample<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let n = self.states;
        if n == 1 {
            self.table.fill(0);
        } else {
            for cell in self.table.iter_mut() {
                *cell = rng.gen_range(0..n);
            }
        }
        for chunk in self.accepting.chunks_mut(64) {
            let bits = rng.next_u64();
            for (i, flag) in chunk.iter_mut().enumerate() {
                *flag = bits >> i & 1 == 1;
            }
        }
    }
}

impl fmt::Display for Dfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_dfa(self))
    }
}

impl FromStr for Dfa {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_dfa(s)
    }
}

/// The set of all `n`-state DFAs over an alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DfaSpace {
    pub states: usize,
    pub alphabet: Alphabet,
}

impl DfaSpace {
    pub fn new(states: usize, alphabet: Alphabet) -> Result<Self> {
        if states == 0 {
            return Err(Error::invalid("a DFA needs at least one state"));
        }
        Ok(DfaSpace { states, alphabet })
    }

    pub fn cardinality(&self) -> BigUint {
        dfa_space_size(self.states, self.alphabet.len())
    }

    pub fn table_count(&self) -> BigUint {
        table_count(self.states, self.alphabet.len())
    }

    /// Every DFA in the space: tables in enumeration order, accepting masks ascending within a table.
    pub fn iter(&self, cap: u64) -> Result<impl Iterator<Item = Dfa> + '_> {
        let required = self.cardinality();
        if required > BigUint::from(cap) {
            return Err(Error::CapExceeded {
                required,
                cap,
                hint: "",
            });
        }
        let n = self.states;
        Ok(enumerate_tables(n, &self.alphabet, cap)?.flat_map(move |table| {
            (0..1u64 << n).map(move |mask| {
                Dfa::from_mask(self.alphabet.clone(), n, table.clone(), mask)
                    .expect("enumerated tables are valid")
            })
        }))
    }
}

/// `n^(n·k)`: the number of complete transition tables.
pub fn table_count(states: usize, alphabet_size: usize) -> BigUint {
    BigUint::from(states).pow((states * alphabet_size) as u32)
}

/// `n^(n·k) · 2^n`: the number of labeled `n`-state DFAs over `k` symbols.
pub fn dfa_space_size(states: usize, alphabet_size: usize) -> BigUint {
    table_count(states, alphabet_size) << states
}

/// Draws a uniformly random `n`-state DFA; see [`Dfa::resample`] for stream usage.
pub fn sample_dfa<R: Rng + ?Sized>(states: usize, alphabet: &Alphabet, rng: &mut R) -> Result<Dfa> {
    if states == 0 {
        return Err(Error::invalid("cannot sample a DFA with zero states"));
    }
    let mut dfa = Dfa {
        alphabet: alphabet.clone(),
        states,
        accepting: vec![false; states],
        table: vec![0; states * alphabet.len()],
    };
    dfa.resample(rng);
    Ok(dfa)
}

/// Checks that `n^(n·k)` tables fit under `cap`, returning the count.
pub fn check_table_cap(states: usize, alphabet_size: usize, cap: u64) -> Result<u64> {
    let required = table_count(states, alphabet_size);
    match required.to_u64() {
        Some(count) if count <= cap => Ok(count),
        _ => Err(Error::CapExceeded {
            required,
            cap,
            hint: "",
        }),
    }
}

/// Streams every transition table of an `n`-state DFA, lexicographic over cells
/// ordered by `(state, symbol-index)` with the last cell varying fastest.
pub fn enumerate_tables(states: usize, alphabet: &Alphabet, cap: u64) -> Result<Tables> {
    if states == 0 {
        return Err(Error::invalid("a DFA needs at least one state"));
    }
    let remaining = check_table_cap(states, alphabet.len(), cap)?;
    Ok(Tables {
        states,
        cells: vec![0; states * alphabet.len()],
        remaining,
        started: false,
    })
}

/// Iterator returned by [`enumerate_tables`].
///
/// [`Tables::advance`] steps in place without allocating; the `Iterator` impl clones.
#[derive(Clone, Debug)]
pub struct Tables {
    states: usize,
    cells: Vec<usize>,
    remaining: u64,
    started: bool,
}

impl Tables {
    /// Moves to the next table, returning `false` once all have been visited.
    pub fn advance(&mut self) -> bool {
        if self.remaining == 0 {
            return false;
        }
        self.remaining -= 1;
        if !self.started {
            self.started = true;
            return true;
        }
        for cell in self.cells.iter_mut().rev() {
            *cell += 1;
            if *cell < self.states {
                return true;
            }
            *cell = 0;
        }
        true
    }

    /// The current table; valid after a successful [`Tables::advance`].
    pub fn current(&self) -> &[usize] {
        &self.cells
    }
}

impl Iterator for Tables {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        self.advance().then(|| self.cells.clone())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = self.remaining as usize;
        (r, Some(r))
    }
}

/// Position of `table` in enumeration order (base-`n` digits, first cell most significant).
pub fn table_index(states: usize, table: &[usize]) -> Option<u64> {
    table.iter().try_fold(0u64, |acc, &cell| {
        acc.checked_mul(states as u64)?.checked_add(cell as u64)
    })
}

/// Inverse of [`table_index`].
pub fn table_from_index(states: usize, alphabet_size: usize, mut index: u64) -> Option<Vec<usize>> {
    let cells = states * alphabet_size;
    let mut table = vec![0; cells];
    let n = states as u64;
    for cell in table.iter_mut().rev() {
        *cell = (index % n) as usize;
        index /= n;
    }
    (index == 0).then_some(table)
}

/// Renders a DFA in the canonical `dfa v1` text form.
pub fn serialize_dfa(dfa: &Dfa) -> String {
    let mut out = String::new();
    out.push_str("dfa v1\n");
    out.push_str(&format!("states {}\n", dfa.states));
    out.push_str(&format!("alphabet {}\n", dfa.alphabet));
    out.push_str("start 0\n");
    out.push_str("accept");
    for q in dfa.accepting_states() {
        out.push_str(&format!(" {q}"));
    }
    out.push('\n');
    for q in 0..dfa.states {
        for (a, sym) in dfa.alphabet.symbols().iter().enumerate() {
            out.push_str(&format!("trans {q} {sym} {}\n", dfa.step(q, a)));
        }
    }
    out
}

/// Parses the `dfa v1` text form. `#` starts a comment; blank lines are ignored.
pub fn parse_dfa(text: &str) -> Result<Dfa> {
    let mut saw_header = false;
    let mut states: Option<usize> = None;
    let mut alphabet: Option<Alphabet> = None;
    let mut start_seen = false;
    let mut accepting: Option<Vec<usize>> = None;
    let mut table: Vec<Option<usize>> = Vec::new();
    let mut last_line = 0;

    let parse_state = |tok: &str, line: usize, what: &str| -> Result<usize> {
        tok.parse::<usize>()
            .map_err(|_| Error::parse(line, format!("{what} {tok:?} is not a state id")))
    };

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let keyword = tokens.next().unwrap_or("");
        let args: Vec<&str> = tokens.collect();

        if !saw_header {
            if keyword == "dfa" && args == ["v1"] {
                saw_header = true;
                continue;
            }
            return Err(Error::parse(line, "expected header `dfa v1`"));
        }

        match keyword {
            "dfa" => return Err(Error::parse(line, "duplicate header")),
            "states" => {
                if states.is_some() {
                    return Err(Error::parse(line, "duplicate `states` line"));
                }
                let [n] = args[..] else {
                    return Err(Error::parse(line, "`states` takes exactly one count"));
                };
                let n: usize = n
                    .parse()
                    .map_err(|_| Error::parse(line, format!("invalid state count {n:?}")))?;
                if n == 0 {
                    return Err(Error::parse(line, "a DFA needs at least one state"));
                }
                states = Some(n);
            }
            "alphabet" => {
                if alphabet.is_some() {
                    return Err(Error::parse(line, "duplicate `alphabet` line"));
                }
                let [symbols] = args[..] else {
                    return Err(Error::parse(line, "`alphabet` takes one concatenated symbol list"));
                };
                alphabet = Some(Alphabet::new(symbols).map_err(|e| Error::parse(line, e.to_string()))?);
            }
            "start" => {
                if start_seen {
                    return Err(Error::parse(line, "duplicate `start` line"));
                }
                if args != ["0"] {
                    return Err(Error::parse(line, "start state must be 0"));
                }
                start_seen = true;
            }
            "accept" => {
                if accepting.is_some() {
                    return Err(Error::parse(line, "duplicate `accept` line"));
                }
                let n = states.ok_or_else(|| Error::parse(line, "`accept` before `states`"))?;
                let mut ids = Vec::with_capacity(args.len());
                for tok in &args {
                    let q = parse_state(tok, line, "accepting state")?;
                    if q >= n {
                        return Err(Error::parse(line, format!("accepting state {q} ≥ {n}")));
                    }
                    ids.push(q);
                }
                accepting = Some(ids);
            }
            "trans" => {
                let (Some(n), Some(sigma)) = (states, alphabet.as_ref()) else {
                    return Err(Error::parse(line, "`trans` before `states` and `alphabet`"));
                };
                if table.is_empty() {
                    table = vec![None; n * sigma.len()];
                }
                let [from, sym, to] = args[..] else {
                    return Err(Error::parse(line, "`trans` takes <state> <symbol> <state>"));
                };
                let from = parse_state(from, line, "source state")?;
                let to = parse_state(to, line, "target state")?;
                for q in [from, to] {
                    if q >= n {
                        return Err(Error::parse(line, format!("state {q} ≥ {n}")));
                    }
                }
                let mut chars = sym.chars();
                let (Some(c), None) = (chars.next(), chars.next()) else {
                    return Err(Error::parse(line, format!("symbol {sym:?} is not a single character")));
                };
                let a = sigma
                    .index_of(c)
                    .ok_or_else(|| Error::parse(line, format!("unknown symbol {c:?}")))?;
                let cell = &mut table[from * sigma.len() + a];
                if cell.is_some() {
                    return Err(Error::parse(line, format!("duplicate transition for ({from}, {c})")));
                }
                *cell = Some(to);
            }
            other => return Err(Error::parse(line, format!("unknown keyword {other:?}"))),
        }
    }

    let eof = last_line + 1;
    if !saw_header {
        return Err(Error::parse(eof, "missing header `dfa v1`"));
    }
    let n = states.ok_or_else(|| Error::parse(eof, "missing `states` line"))?;
    let sigma = alphabet.ok_or_else(|| Error::parse(eof, "missing `alphabet` line"))?;
    if !start_seen {
        return Err(Error::parse(eof, "missing `start` line"));
    }
    let accepting = accepting.ok_or_else(|| Error::parse(eof, "missing `accept` line"))?;
    if table.is_empty() {
        table = vec![None; n * sigma.len()];
    }
    let mut cells = Vec::with_capacity(table.len());
    for (i, cell) in table.into_iter().enumerate() {
        match cell {
            Some(t) => cells.push(t),
            None => {
                let (q, a) = (i / sigma.len(), sigma.symbols()[i % sigma.len()]);
                return Err(Error::parse(
                    eof,
                    format!("incomplete transition table: missing `trans {q} {a} …`"),
                ));
            }
        }
    }
    Dfa::new(sigma, n, cells, accepting)
}
