//! Quasi-realizations of stationary finite-alphabet processes.
//!
//! A quasi-realization is a quadruple `(dim, pi, D, tau)` with one real
//! `dim x dim` matrix per alphabet symbol. Word probabilities are
//! `p(u) = pi D(u_1) ... D(u_l) tau`; the eigenvector relations
//! `pi sum_u D(u) = pi` and `sum_u D(u) tau = tau` together with
//! `pi tau = 1` make this a normalized stationary (signed) measure on words.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{RMat, RVec};

/// Ordered set of distinct symbol labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self, Error> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::structural("alphabet must be non-empty"));
        }
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::structural("empty symbol label"));
            }
            if symbols[..i].contains(s) {
                return Err(Error::structural(format!("duplicate symbol label {s:?}")));
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

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn label(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == label)
    }

    /// Render a word as a string: labels concatenated when every label is a
    /// single character, otherwise joined with `.`. The empty word is `""`.
    pub fn format_word(&self, word: &Word) -> String {
        let single = self.symbols.iter().all(|s| s.chars().count() == 1);
        let sep = if single { "" } else { "." };
        word.indices
            .iter()
            .map(|&i| self.symbols[i].as_str())
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Parse a word string. Accepts the `.`-separated form always and the
    /// concatenated form via greedy longest-label matching.
    pub fn parse_word(&self, text: &str) -> Result<Word, Error> {
        if text.is_empty() {
            return Ok(Word::epsilon());
        }
        if text.contains('.') {
            let mut indices = Vec::new();
            for part in text.split('.') {
                let idx = self
                    .index_of(part)
                    .ok_or_else(|| Error::UnknownSymbol(part.to_string()))?;
                indices.push(idx);
            }
            return Ok(Word::new(indices));
        }
        let mut rest = text;
        let mut indices = Vec::new();
        'outer: while !rest.is_empty() {
            let mut by_len: Vec<usize> = (0..self.symbols.len()).collect();
            by_len.sort_by_key(|&i| std::cmp::Reverse(self.symbols[i].len()));
            for i in by_len {
                if let Some(tail) = rest.strip_prefix(self.symbols[i].as_str()) {
                    indices.push(i);
                    rest = tail;
                    continue 'outer;
                }
            }
            return Err(Error::UnknownSymbol(rest.to_string()));
        }
        Ok(Word::new(indices))
    }

    /// All words of exactly the given length, lexicographic in symbol order.
    pub fn words_of_length(&self, len: usize) -> WordIter {
        WordIter {
            m: self.symbols.len(),
            len,
            next: Some(vec![0; len]),
        }
    }
}

/// Iterator over all words of a fixed length in lexicographic order.
pub struct WordIter {
    m: usize,
    len: usize,
    next: Option<Vec<usize>>,
}

impl Iterator for WordIter {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut pos = self.len;
        loop {
            if pos == 0 {
                self.next = None;
                break;
            }
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.m {
                for v in succ.iter_mut().skip(pos + 1) {
                    *v = 0;
                }
                self.next = Some(succ);
                break;
            }
        }
        Some(Word::new(cur))
    }
}

/// A finite word: a sequence of symbol indices. The empty word is epsilon.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    indices: Vec<usize>,
}

impl Word {
    pub fn new(indices: Vec<usize>) -> Self {
        Word { indices }
    }

    pub fn epsilon() -> Self {
        Word { indices: vec![] }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// New word with `symbol` prepended.
    pub fn prepend(&self, symbol: usize) -> Word {
        let mut indices = Vec::with_capacity(self.indices.len() + 1);
        indices.push(symbol);
        indices.extend_from_slice(&self.indices);
        Word { indices }
    }

    /// New word with `symbol` appended.
    pub fn append(&self, symbol: usize) -> Word {
        let mut indices = self.indices.clone();
        indices.push(symbol);
        Word { indices }
    }

    /// Concatenation `self . other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut indices = self.indices.clone();
        indices.extend_from_slice(&other.indices);
        Word { indices }
    }

    pub fn validate(&self, alphabet: &Alphabet) -> Result<(), Error> {
        for &i in &self.indices {
            if i >= alphabet.len() {
                return Err(Error::UnknownSymbol(format!("symbol index {i}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.indices)
    }
}

/// Quasi-realization `(dim, pi, D, tau)` over an alphabet.
#[derive(Debug, Clone)]
pub struct QuasiRealization {
    alphabet: Alphabet,
    dim: usize,
    pi: RVec,
    tau: RVec,
    maps: Vec<RMat>,
}

impl QuasiRealization {
    pub fn new(
        alphabet: Alphabet,
        pi: RVec,
        tau: RVec,
        maps: Vec<RMat>,
    ) -> Result<Self, Error> {
        let dim = tau.len();
        if dim == 0 {
            return Err(Error::structural("realization dimension must be positive"));
        }
        if pi.len() != dim {
            return Err(Error::structural(format!(
                "pi has length {} but tau has length {dim}",
                pi.len()
            )));
        }
        if maps.len() != alphabet.len() {
            return Err(Error::structural(format!(
                "{} maps for {} symbols",
                maps.len(),
                alphabet.len()
            )));
        }
        for (i, m) in maps.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::structural(format!(
                    "map for symbol {:?} is {}x{}, expected {dim}x{dim}",
                    alphabet.label(i),
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(QuasiRealization {
            alphabet,
            dim,
            pi,
            tau,
            maps,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pi(&self) -> &RVec {
        &self.pi
    }

    pub fn tau(&self) -> &RVec {
        &self.tau
    }

    pub fn map(&self, symbol: usize) -> &RMat {
        &self.maps[symbol]
    }

    pub fn maps(&self) -> &[RMat] {
        &self.maps
    }

    /// Sum of the symbol maps.
    pub fn total_map(&self) -> RMat {
        let mut total = RMat::zeros(self.dim, self.dim);
        for m in &self.maps {
            total += m;
        }
        total
    }

    /// Product matrix `D(u_1) ... D(u_l)` for a word.
    pub fn word_map(&self, word: &Word) -> Result<RMat, Error> {
        word.validate(&self.alphabet)?;
        let mut out = RMat::identity(self.dim, self.dim);
        for &i in word.indices() {
            out = &out * &self.maps[i];
        }
        Ok(out)
    }

    /// `D(u_l) ... ` applied to tau, accumulating right to left.
    fn word_vector(&self, word: &Word) -> RVec {
        let mut v = self.tau.clone();
        for &i in word.indices().iter().rev() {
            v = &self.maps[i] * v;
        }
        v
    }

    /// Word probability `p(u) = pi D(u_1) ... D(u_l) tau`.
    pub fn word_probability(&self, word: &Word) -> Result<f64, Error> {
        word.validate(&self.alphabet)?;
        Ok(self.pi.dot(&self.word_vector(word)))
    }

    /// Probabilities of all words of exactly the given length, in
    /// lexicographic order. Shares `D(suffix) tau` vectors across prefixes.
    pub fn batch_probabilities(&self, length: usize) -> Vec<(Word, f64)> {
        let mut level: Vec<(Word, RVec)> = vec![(Word::epsilon(), self.tau.clone())];
        for _ in 0..length {
            let mut next = Vec::with_capacity(level.len() * self.alphabet.len());
            // Prepending with the new first symbol as the major key keeps
            // each level in lexicographic order.
            for a in 0..self.alphabet.len() {
                for (w, v) in &level {
                    next.push((w.prepend(a), &self.maps[a] * v));
                }
            }
            level = next;
        }
        level
            .into_iter()
            .map(|(w, v)| {
                let p = self.pi.dot(&v);
                (w, p)
            })
            .collect()
    }

    /// Diagnostic check of the defining relations.
    pub fn check_realization(&self, tol: f64) -> RealizationCheck {
        let total = self.total_map();
        let right = (&total * &self.tau - &self.tau).norm() / self.tau.norm().max(1.0);
        let left_vec = total.transpose() * &self.pi;
        let left = (left_vec - &self.pi).norm() / self.pi.norm().max(1.0);
        let normalization = (self.pi.dot(&self.tau) - 1.0).abs();
        let map_norms = self.maps.iter().map(|m| m.norm()).collect();
        RealizationCheck {
            left_residual: left,
            right_residual: right,
            normalization_residual: normalization,
            map_norms,
            tol,
        }
    }

    /// All words up to `max_length` whose probability is below `-tol`.
    /// An empty result is evidence, not proof, of nonnegativity.
    pub fn scan_negativity(&self, max_length: usize, tol: f64) -> Vec<(Word, f64)> {
        let mut bad = Vec::new();
        for len in 0..=max_length {
            for (w, p) in self.batch_probabilities(len) {
                if p < -tol {
                    bad.push((w, p));
                }
            }
        }
        bad
    }

    /// Similarity transform `(pi T, T^-1 D T, T^-1 tau)`; generates the
    /// same process for invertible `T`.
    pub fn similarity_transform(&self, t: &RMat) -> Result<QuasiRealization, Error> {
        if t.nrows() != self.dim || t.ncols() != self.dim {
            return Err(Error::structural("similarity transform has wrong shape"));
        }
        let tinv = t
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::precondition("similarity transform is singular"))?;
        let pi = t.transpose() * &self.pi;
        let tau = &tinv * &self.tau;
        let maps = self.maps.iter().map(|d| &tinv * d * t).collect();
        QuasiRealization::new(self.alphabet.clone(), pi, tau, maps)
    }
}

/// Residual report from [`QuasiRealization::check_realization`].
#[derive(Debug, Clone, Serialize)]
pub struct RealizationCheck {
    pub left_residual: f64,
    pub right_residual: f64,
    pub normalization_residual: f64,
    pub map_norms: Vec<f64>,
    pub tol: f64,
}

impl RealizationCheck {
    pub fn passed(&self) -> bool {
        self.left_residual <= self.tol
            && self.right_residual <= self.tol
            && self.normalization_residual <= self.tol
    }
}

/// Serialized form of a quasi-realization.
#[derive(Debug, Serialize, Deserialize)]
pub struct RealizationJson {
    pub alphabet: Vec<String>,
    pub dim: usize,
    pub pi: Vec<f64>,
    pub tau: Vec<f64>,
    pub maps: BTreeMap<String, Vec<Vec<f64>>>,
}

impl QuasiRealization {
    pub fn to_json(&self) -> RealizationJson {
        let mut maps = BTreeMap::new();
        for (i, m) in self.maps.iter().enumerate() {
            let rows: Vec<Vec<f64>> = (0..self.dim)
                .map(|r| (0..self.dim).map(|c| m[(r, c)]).collect())
                .collect();
            maps.insert(self.alphabet.label(i).to_string(), rows);
        }
        RealizationJson {
            alphabet: self.alphabet.symbols().to_vec(),
            dim: self.dim,
            pi: self.pi.iter().cloned().collect(),
            tau: self.tau.iter().cloned().collect(),
            maps,
        }
    }

    pub fn from_json(json: &RealizationJson) -> Result<Self, Error> {
        let alphabet = Alphabet::new(json.alphabet.clone())?;
        let dim = json.dim;
        let mut maps = Vec::with_capacity(alphabet.len());
        for label in alphabet.symbols() {
            let rows = json
                .maps
                .get(label)
                .ok_or_else(|| Error::Parse(format!("missing map for symbol {label:?}")))?;
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(Error::Parse(format!(
                    "map for symbol {label:?} is not {dim}x{dim}"
                )));
            }
            let flat: Vec<f64> = rows.iter().flatten().cloned().collect();
            maps.push(DMatrix::from_row_slice(dim, dim, &flat));
        }
        QuasiRealization::new(
            alphabet,
            DVector::from_vec(json.pi.clone()),
            DVector::from_vec(json.tau.clone()),
            maps,
        )
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("serialize realization")
    }

    pub fn from_json_str(text: &str) -> Result<Self, Error> {
        let json: RealizationJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_json(&json)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, FixtureParams};

    #[test]
    fn epsilon_probability_is_one() {
        let r = catalog::monitored_qubit_quasi(&FixtureParams::new(1.0, 1.0));
        assert!((r.word_probability(&Word::epsilon()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_symbol_probabilities() {
        let r = catalog::monitored_qubit_quasi(&FixtureParams::new(1.0, 1.0));
        let word = |s: &str| r.alphabet().parse_word(s).unwrap();
        assert!((r.word_probability(&word("+")).unwrap() - 0.25).abs() < 1e-12);
        assert!(r.word_probability(&word("+-")).unwrap().abs() < 1e-12);
        let pxx = r.word_probability(&word("xx")).unwrap();
        assert!((pxx - 1.0 / 36.0).abs() < 1e-12);
    }

    #[test]
    fn batch_length_one_matches_closed_form() {
        let r = catalog::monitored_qubit_quasi(&FixtureParams::new(1.0, 1.0));
        let table = r.batch_probabilities(1);
        let expect = [0.25, 0.25, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 0.0];
        let mut total = 0.0;
        for ((w, p), e) in table.iter().zip(expect.iter()) {
            assert_eq!(w.len(), 1);
            assert!((p - e).abs() < 1e-12, "{w} -> {p} != {e}");
            total += p;
        }
        assert!((total - 1.0).abs() < 1e-12);

        let half = catalog::monitored_qubit_quasi(&FixtureParams::new(0.5, 1.0));
        let t_idx = half.alphabet().index_of("t").unwrap();
        let table = half.batch_probabilities(1);
        let sum: f64 = table.iter().map(|(_, p)| p).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        let pt = table
            .iter()
            .find(|(w, _)| w.indices() == [t_idx])
            .unwrap()
            .1;
        assert!((pt - 0.5).abs() < 1e-12);
    }

    #[test]
    fn batch_length_zero_is_epsilon() {
        let r = catalog::monitored_qubit_quasi(&FixtureParams::default());
        let table = r.batch_probabilities(0);
        assert_eq!(table.len(), 1);
        assert!(table[0].0.is_empty());
        assert!((table[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn check_realization_detects_breakage() {
        let r = catalog::monitored_qubit_quasi(&FixtureParams::new(1.0, 1.0));
        assert!(r.check_realization(1e-10).passed());

        // Scaling tau breaks normalization.
        let scaled = QuasiRealization::new(
            r.alphabet().clone(),
            r.pi().clone(),
            r.tau() * 2.0,
            r.maps().to_vec(),
        )
        .unwrap();
        let check = scaled.check_realization(1e-10);
        assert!(!check.passed());
        assert!(check.normalization_residual > 0.5);

        // Zeroing one map breaks the eigenvector relation.
        let mut maps = r.maps().to_vec();
        maps[0] = RMat::zeros(r.dim(), r.dim());
        let broken =
            QuasiRealization::new(r.alphabet().clone(), r.pi().clone(), r.tau().clone(), maps)
                .unwrap();
        let check = broken.check_realization(1e-10);
        assert!(!check.passed());
        assert!(check.right_residual > 1e-3);
    }

    #[test]
    fn negativity_scan_on_valid_process_is_empty() {
        let r = catalog::monitored_qubit_quasi(&FixtureParams::new(1.0, 1.0));
        assert!(r.scan_negativity(4, 1e-10).is_empty());
        assert!(r.scan_negativity(0, 1e-10).is_empty());

        let negated = QuasiRealization::new(
            r.alphabet().clone(),
            -r.pi().clone(),
            r.tau().clone(),
            r.maps().to_vec(),
        )
        .unwrap();
        let bad = negated.scan_negativity(1, 1e-10);
        // The empty word and every length-1 word with positive probability
        // flip sign; p(t) = 0 at gamma = 1 stays out.
        assert_eq!(bad.iter().filter(|(w, _)| w.len() == 1).count(), 5);
        assert_eq!(bad.len(), 6);
    }

    #[test]
    fn structural_error_on_dimension_mismatch() {
        let alphabet = Alphabet::new(["a"]).unwrap();
        let err = QuasiRealization::new(
            alphabet,
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![1.0]),
            vec![RMat::identity(1, 1)],
        );
        assert!(matches!(err, Err(Error::Structural(_))));
    }

    #[test]
    fn word_parsing_round_trip() {
        let alphabet = Alphabet::new(["+", "-", "x", "y", "z", "t"]).unwrap();
        let w = alphabet.parse_word("+x-t").unwrap();
        assert_eq!(alphabet.format_word(&w), "+x-t");
        assert_eq!(w.len(), 4);
        assert!(alphabet.parse_word("").unwrap().is_empty());
        let multi = Alphabet::new(["ab", "a"]).unwrap();
        let w = multi.parse_word("ab.a").unwrap();
        assert_eq!(w.indices(), &[0, 1]);
        assert_eq!(multi.format_word(&w), "ab.a");
        let greedy = multi.parse_word("aba").unwrap();
        assert_eq!(greedy.indices(), &[0, 1]);
        assert!(alphabet.parse_word("+q").is_err());
    }

    #[test]
    fn word_map_is_multiplicative() {
        let r = catalog::monitored_qubit_quasi(&FixtureParams::default());
        let u = r.alphabet().parse_word("x+").unwrap();
        let v = r.alphabet().parse_word("zt").unwrap();
        let prod = r.word_map(&u).unwrap() * r.word_map(&v).unwrap();
        let joint = r.word_map(&u.concat(&v)).unwrap();
        assert_eq!(prod, joint, "products of symbol matrices are associative and exact");
    }

    #[test]
    fn json_round_trip() {
        let r = catalog::monitored_qubit_quasi(&FixtureParams::new(0.5, 1.0));
        let text = r.to_json_string();
        let back = QuasiRealization::from_json_str(&text).unwrap();
        assert_eq!(back.dim(), r.dim());
        let w = r.alphabet().parse_word("x+").unwrap();
        assert!(
            (back.word_probability(&w).unwrap() - r.word_probability(&w).unwrap()).abs() < 1e-15
        );
    }
}
