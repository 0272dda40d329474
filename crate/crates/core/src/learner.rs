//! Learning regular languages with a dual (kernel) perceptron.
//!
//! A trained model is a list of support strings `sᵢ` with coefficients `αᵢ`; a string
//! `x` is accepted iff `Σ αᵢ K(sᵢ, x) > 0`. Training sweeps the records in dataset
//! order and adds `yᵢ` to `αᵢ` on every mistake (`yᵢ · Σⱼ αⱼ G[j][i] ≤ 0`), stopping
//! after the first mistake-free sweep.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::automata::{Alphabet, Dfa};
use crate::error::{Error, Result};
use crate::kernel::{kernel_value, GramMatrix, KernelParams};

/// Default ceiling on the number of strings [`enumerate_strings`] may produce.
pub const DEFAULT_STRING_CAP: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn from_bool(member: bool) -> Self {
        if member {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    /// Strict sign rule: zero is negative.
    pub fn from_score(score: f64) -> Self {
        Label::from_bool(score > 0.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Positive => "+1",
            Label::Negative => "-1",
        })
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+1" | "1" => Ok(Label::Positive),
            "-1" => Ok(Label::Negative),
            _ => Err(Error::invalid(format!("label {s:?} is not +1 or -1"))),
        }
    }
}

/// Labeled, distinct strings over one alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    alphabet: Alphabet,
    records: Vec<(String, Label)>,
}

impl Dataset {
    pub fn new(alphabet: Alphabet, records: Vec<(String, Label)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for (s, _) in &records {
            alphabet.validate(s)?;
            if !seen.insert(s.as_str()) {
                return Err(Error::invalid(format!("duplicate string {s:?} in dataset")));
            }
        }
        Ok(Dataset { alphabet, records })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn records(&self) -> &[(String, Label)] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn strings(&self) -> Vec<String> {
        self.records.iter().map(|(s, _)| s.clone()).collect()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.records.iter().map(|&(_, l)| l).collect()
    }

    /// `# alphabet <symbols>` followed by `<label>\t<string>` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("# alphabet {}\n", self.alphabet);
        for (s, l) in &self.records {
            out.push_str(&format!("{l}\t{s}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let alphabet = loop {
            let Some((i, line)) = lines.next() else {
                return Err(Error::parse(1, "missing `# alphabet` header"));
            };
            if line.trim().is_empty() {
                continue;
            }
            let symbols = line
                .strip_prefix("# alphabet ")
                .ok_or_else(|| Error::parse(i + 1, "expected `# alphabet <symbols>` header"))?;
            break Alphabet::new(symbols.trim()).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        };
        let mut records = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (i, line) in lines {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (label, word) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(i + 1, "expected `<label>\\t<string>`"))?;
            let label: Label = label.trim().parse().map_err(|e: Error| Error::parse(i + 1, e.to_string()))?;
            let word = word.trim_end_matches('\r');
            alphabet
                .validate(word)
                .map_err(|e| Error::parse(i + 1, e.to_string()))?;
            if !seen.insert(word.to_owned()) {
                return Err(Error::parse(i + 1, format!("duplicate string {word:?}")));
            }
            records.push((word.to_owned(), label));
        }
        Ok(Dataset { alphabet, records })
    }
}

/// Every string of length `0..=max_len`, shortest first, lexicographic within a length.
pub fn enumerate_strings(alphabet: &Alphabet, max_len: usize) -> Result<Vec<String>> {
    enumerate_strings_capped(alphabet, max_len, DEFAULT_STRING_CAP)
}

pub fn enumerate_strings_capped(alphabet: &Alphabet, max_len: usize, cap: u64) -> Result<Vec<String>> {
    let required = alphabet.word_count(max_len);
    if required > cap.into() {
        return Err(Error::CapExceeded {
            required,
            cap,
            hint: "",
        });
    }
    Ok(alphabet.words(max_len).collect())
}

/// Labels each string by membership in `target`'s language.
pub fn label_strings(target: &Dfa, strings: &[String]) -> Result<Dataset> {
    let records = strings
        .iter()
        .map(|s| Ok((s.clone(), Label::from_bool(target.accepts(s)?))))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(target.alphabet().clone(), records)
}

/// Support strings and coefficients of a trained perceptron.
#[derive(Clone, Debug, PartialEq)]
pub struct PerceptronModel {
    /// Nonzero coefficients in training order.
    pub support: Vec<(String, f64)>,
    pub params: KernelParams,
    pub epochs: usize,
    /// Mistakes made during each sweep.
    pub epoch_mistakes: Vec<usize>,
    /// Training strings the final model misclassifies under the strict sign rule.
    pub training_errors: usize,
    /// Whether the last sweep was mistake-free.
    pub converged: bool,
}

/// Runs the dual perceptron for at most `max_epochs` sweeps over the Gram matrix.
///
/// Labels align with `gram.strings()`. Failing to converge is not an error; the model
/// reports its remaining training errors.
pub fn train(gram: &GramMatrix, labels: &[Label], max_epochs: usize) -> Result<PerceptronModel> {
    let k = gram.len();
    if labels.len() != k {
        return Err(Error::invalid(format!(
            "{} labels for a {k}×{k} Gram matrix",
            labels.len()
        )));
    }
    if max_epochs == 0 {
        return Err(Error::invalid("max_epochs must be at least 1"));
    }
    let g: Vec<f64> = (0..k * k).map(|c| gram.get_f64(c / k, c % k)).collect();
    let decision = |alpha: &[f64], i: usize| -> f64 {
        alpha
            .iter()
            .enumerate()
            .fold(0.0, |acc, (j, &a)| if a == 0.0 { acc } else { acc + a * g[j * k + i] })
    };

    let mut alpha = vec![0.0; k];
    let mut epoch_mistakes = Vec::new();
    let mut converged = false;
    while epoch_mistakes.len() < max_epochs {
        let mut mistakes = 0;
        for i in 0..k {
            let y = labels[i].sign();
            if y * decision(&alpha, i) <= 0.0 {
                alpha[i] += y;
                mistakes += 1;
            }
        }
        epoch_mistakes.push(mistakes);
        if mistakes == 0 {
            converged = true;
            break;
        }
    }

    let training_errors = (0..k)
        .filter(|&i| Label::from_score(decision(&alpha, i)) != labels[i])
        .count();
    let support = gram
        .strings()
        .iter()
        .zip(&alpha)
        .filter(|(_, &a)| a != 0.0)
        .map(|(s, &a)| (s.clone(), a))
        .collect();
    Ok(PerceptronModel {
        support,
        params: gram.params().clone(),
        epochs: epoch_mistakes.len(),
        epoch_mistakes,
        training_errors,
        converged,
    })
}

/// `Σ αᵢ K(sᵢ, x)`.
pub fn decision_value(model: &PerceptronModel, x: &str) -> Result<f64> {
    model.params.alphabet.validate(x)?;
    let mut total = 0.0;
    for (s, a) in &model.support {
        total += a * kernel_value(s, x, &model.params)?.to_f64();
    }
    Ok(total)
}

pub fn predict(model: &PerceptronModel, x: &str) -> Result<Label> {
    decision_value(model, x).map(Label::from_score)
}

const MODEL_HEADER: &str = "# regker model v1";

impl PerceptronModel {
    /// Metadata lines (`# key value`) followed by `<alpha>\t<string>` lines.
    pub fn to_text(&self) -> String {
        let mistakes: Vec<String> = self.epoch_mistakes.iter().map(|m| m.to_string()).collect();
        let mut out = format!(
            "{MODEL_HEADER}\n# params {}\n# epochs {}\n# epoch_mistakes {}\n# training_errors {}\n# converged {}\n",
            serde_json::to_string(&self.params).expect("params serialize"),
            self.epochs,
            mistakes.join(" "),
            self.training_errors,
            self.converged,
        );
        for (s, a) in &self.support {
            out.push_str(&format!("{a}\t{s}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, MODEL_HEADER)) => {}
            _ => return Err(Error::parse(1, format!("expected `{MODEL_HEADER}`"))),
        }
        let mut params = None;
        let mut epochs = None;
        let mut epoch_mistakes = None;
        let mut training_errors = None;
        let mut converged = None;
        let mut support = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            if let Some(meta) = line.strip_prefix("# ") {
                let (key, value) = meta.split_once(' ').unwrap_or((meta, ""));
                let bad = |what: &str| Error::parse(line_no, format!("invalid {what}"));
                match key {
                    "params" => params = Some(serde_json::from_str::<KernelParams>(value).map_err(|e| Error::parse(line_no, e.to_string()))?),
                    "epochs" => epochs = Some(value.parse::<usize>().map_err(|_| bad("epochs"))?),
                    "epoch_mistakes" => {
                        epoch_mistakes = Some(
                            value
                                .split_whitespace()
                                .map(|m| m.parse::<usize>().map_err(|_| bad("epoch_mistakes")))
                                .collect::<Result<Vec<_>>>()?,
                        )
                    }
                    "training_errors" => {
                        training_errors = Some(value.parse::<usize>().map_err(|_| bad("training_errors"))?)
                    }
                    "converged" => converged = Some(value.parse::<bool>().map_err(|_| bad("converged"))?),
                    _ => return Err(Error::parse(line_no, format!("unknown metadata key {key:?}"))),
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let (a, s) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(line_no, "expected `<alpha>\\t<string>`"))?;
            let a: f64 = a
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid coefficient {a:?}")))?;
            support.push((s.to_owned(), a));
        }
        let eof = text.lines().count() + 1;
        let missing = |key: &str| Error::parse(eof, format!("missing `# {key}` metadata"));
        let params: KernelParams = params.ok_or_else(|| missing("params"))?;
        for (s, _) in &support {
            params.alphabet.validate(s)?;
        }
        Ok(PerceptronModel {
            support,
            params,
            epochs: epochs.ok_or_else(|| missing("epochs"))?,
            epoch_mistakes: epoch_mistakes.ok_or_else(|| missing("epoch_mistakes"))?,
            training_errors: training_errors.ok_or_else(|| missing("training_errors"))?,
            converged: converged.ok_or_else(|| missing("converged"))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{gram_matrix, Scaling};

    fn ab() -> Alphabet {
        Alphabet::new("ab").unwrap()
    }

    fn parity() -> Dfa {
        Dfa::new(ab(), 2, vec![1, 1, 0, 0], [0]).unwrap()
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(enumerate_strings(&ab(), 0).unwrap(), [""]);
        assert_eq!(enumerate_strings(&ab(), 2).unwrap(), ["", "a", "b", "aa", "ab", "ba", "bb"]);
        assert_eq!(enumerate_strings(&Alphabet::new("a").unwrap(), 3).unwrap(), ["", "a", "aa", "aaa"]);
        assert!(enumerate_strings(&ab(), 20).unwrap_err().is_resource());
    }

    #[test]
    fn label_examples() {
        let strings = enumerate_strings(&ab(), 2).unwrap();
        let d = label_strings(&parity(), &strings).unwrap();
        let pos: Vec<_> = d.records().iter().filter(|r| r.1 == Label::Positive).map(|r| r.0.as_str()).collect();
        assert_eq!(pos, ["", "aa", "ab", "ba", "bb"]);
        let reject = Dfa::new(ab(), 1, vec![0, 0], []).unwrap();
        assert!(label_strings(&reject, &strings).unwrap().labels().iter().all(|&l| l == Label::Negative));
        let accept = Dfa::new(ab(), 1, vec![0, 0], [0]).unwrap();
        assert!(label_strings(&accept, &strings).unwrap().labels().iter().all(|&l| l == Label::Positive));
    }

    #[test]
    fn dataset_text_round_trip() {
        let d = label_strings(&parity(), &enumerate_strings(&ab(), 2).unwrap()).unwrap();
        let text = d.to_text();
        assert!(text.starts_with("# alphabet ab\n+1\t\n-1\ta\n"));
        assert_eq!(Dataset::parse(&text).unwrap(), d);
        assert!(Dataset::parse("# alphabet ab\n+1\ta\n-1\ta\n").is_err());
        assert!(Dataset::parse("# alphabet ab\n2\ta\n").is_err());
        assert!(Dataset::parse("# alphabet ab\n+1\tc\n").is_err());
        assert!(Dataset::parse("+1\ta\n").is_err());
    }

    #[test]
    fn single_class_converges_immediately() {
        let strings = enumerate_strings(&ab(), 3).unwrap();
        let gram = gram_matrix(&strings, &KernelParams::new(ab())).unwrap();
        let labels = vec![Label::Positive; strings.len()];
        let model = train(&gram, &labels, 10).unwrap();
        assert!(model.converged);
        assert!(model.epochs <= 2);
        for s in &strings {
            assert_eq!(predict(&model, s).unwrap(), Label::Positive);
        }
    }

    #[test]
    fn rank_one_xor_does_not_converge() {
        let strings = vec!["a".to_owned(), "b".to_owned()];
        let ones = GramMatrix::from_real(strings, KernelParams::new(ab()), vec![1.0; 4]).unwrap();
        let model = train(&ones, &[Label::Positive, Label::Negative], 25).unwrap();
        assert!(!model.converged);
        assert_eq!(model.epochs, 25);
        assert_eq!(model.epoch_mistakes.len(), 25);
        assert!(model.training_errors > 0);
    }

    #[test]
    fn train_rejects_misaligned_labels() {
        let strings = vec!["a".to_owned()];
        let gram = gram_matrix(&strings, &KernelParams::new(ab())).unwrap();
        assert!(train(&gram, &[], 5).is_err());
        assert!(train(&gram, &[Label::Positive], 0).is_err());
    }

    #[test]
    fn prediction_edge_cases() {
        let params = KernelParams::new(ab());
        let empty = PerceptronModel {
            support: vec![],
            params: params.clone(),
            epochs: 0,
            epoch_mistakes: vec![],
            training_errors: 0,
            converged: true,
        };
        for x in ab().words(3) {
            assert_eq!(predict(&empty, &x).unwrap(), Label::Negative);
        }
        let single = PerceptronModel {
            support: vec![("ab".into(), 1.0)],
            ..empty
        };
        assert_eq!(predict(&single, "ab").unwrap(), Label::Positive);
        assert!(predict(&single, "abc").is_err());
    }

    #[test]
    fn parity_learns_and_round_trips() {
        let strings = enumerate_strings(&ab(), 4).unwrap();
        let data = label_strings(&parity(), &strings).unwrap();
        let params = KernelParams::new(ab()).with_n_max(3);
        let gram = gram_matrix(&data.strings(), &params).unwrap();
        let model = train(&gram, &data.labels(), 50).unwrap();
        assert!(model.converged);
        assert_eq!(model.training_errors, 0);
        for (s, l) in data.records() {
            assert_eq!(predict(&model, s).unwrap(), *l);
        }
        let again = PerceptronModel::parse(&model.to_text()).unwrap();
        assert_eq!(again, model);

        let paper = params.with_scaling(Scaling::Paper);
        let gram = gram_matrix(&data.strings(), &paper).unwrap();
        let model = train(&gram, &data.labels(), 50).unwrap();
        assert_eq!(PerceptronModel::parse(&model.to_text()).unwrap(), model);
    }
}
