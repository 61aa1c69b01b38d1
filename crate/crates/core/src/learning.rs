//! Spectral reconstruction from word tables and trajectory sampling.
//!
//! A rank-`r` process is pinned down by the Hankel matrix of its word
//! probabilities: a truncated SVD factorization of the empty-context Hankel
//! plus one symbol-shifted Hankel per letter yields a quasi-realization
//! equivalent to the regular one. Tables can be exact (from a model) or
//! empirical (sliding-window counts over sampled trajectories).

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{RMat, RVec};
use crate::operators::{CPRealization, HermBasis};
use crate::process::{Alphabet, QuasiRealization, Word};

/// Word-probability table up to a maximum length.
#[derive(Debug, Clone)]
pub struct WordTable {
    pub alphabet: Alphabet,
    pub max_length: usize,
    entries: BTreeMap<Word, f64>,
}

impl WordTable {
    pub fn new(alphabet: Alphabet, max_length: usize) -> Self {
        WordTable {
            alphabet,
            max_length,
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, word: Word, p: f64) {
        self.entries.insert(word, p);
    }

    pub fn get(&self, word: &Word) -> Option<f64> {
        self.entries.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exact table of a quasi-realization up to `max_length`.
    pub fn exact(r: &QuasiRealization, max_length: usize) -> Self {
        let mut table = WordTable::new(r.alphabet().clone(), max_length);
        for len in 0..=max_length {
            for (w, p) in r.batch_probabilities(len) {
                table.insert(w, p);
            }
        }
        table
    }

    /// Sum of entries at one length.
    pub fn length_sum(&self, len: usize) -> f64 {
        self.entries
            .iter()
            .filter(|(w, _)| w.len() == len)
            .map(|(_, p)| p)
            .sum()
    }
}

/// All words of length at most `max_len`, breadth-first lexicographic.
fn words_up_to(alphabet: &Alphabet, max_len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    for len in 0..=max_len {
        out.extend(alphabet.words_of_length(len));
    }
    out
}

/// Hankel matrix with rows indexed by words up to `prefix_len` and columns
/// by words up to `suffix_len` (both breadth-first lexicographic including
/// the empty word); entry `p(prefix . suffix)`.
pub fn hankel_matrix(
    table: &WordTable,
    prefix_len: usize,
    suffix_len: usize,
) -> Result<(RMat, Vec<Word>, Vec<Word>), Error> {
    if table.is_empty() {
        return Err(Error::MissingData("empty table".into()));
    }
    let prefixes = words_up_to(&table.alphabet, prefix_len);
    let suffixes = words_up_to(&table.alphabet, suffix_len);
    let mut h = RMat::zeros(prefixes.len(), suffixes.len());
    for (i, u) in prefixes.iter().enumerate() {
        for (j, v) in suffixes.iter().enumerate() {
            let uv = u.concat(v);
            let p = table.get(&uv).ok_or_else(|| {
                Error::MissingData(table.alphabet.format_word(&uv))
            })?;
            h[(i, j)] = p;
        }
    }
    Ok((h, prefixes, suffixes))
}

/// Diagnostics from [`spectral_realization`].
#[derive(Debug, Clone, Serialize)]
pub struct SpectralDiagnostics {
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// Set when the singular-value gap at the chosen rank is below 10x.
    pub gap_warning: Option<String>,
    pub prefix_len: usize,
}

/// Reconstruct a quasi-realization from a word table by truncated-SVD
/// factorization of the Hankel matrix.
///
/// The table must cover words up to `2 * prefix_len + 1` where
/// `prefix_len = (max_length - 1) / 2`. Without a `rank_hint`, singular
/// values below `tol` relative to the largest are discarded.
pub fn spectral_realization(
    table: &WordTable,
    rank_hint: Option<usize>,
    tol: f64,
) -> Result<(QuasiRealization, SpectralDiagnostics), Error> {
    if table.max_length < 1 {
        return Err(Error::MissingData(
            "table must contain words of length at least 1".into(),
        ));
    }
    let prefix_len = (table.max_length - 1) / 2;
    let (h, prefixes, suffixes) = hankel_matrix(table, prefix_len, prefix_len)?;
    let m = table.alphabet.len();
    let svd = h.clone().svd(true, true);
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    if smax <= 0.0 {
        return Err(Error::Precondition("table is identically zero".into()));
    }
    let rank = match rank_hint {
        Some(r) => r.min(sv.len()),
        None => sv.iter().filter(|&&s| s > tol * smax).count().max(1),
    };
    let gap_warning = if rank < sv.len() && sv[rank] > 0.0 && sv[rank - 1] / sv[rank] < 10.0 {
        Some(format!(
            "singular-value gap at rank {rank} is only {:.2}x; rank decision is ambiguous",
            sv[rank - 1] / sv[rank]
        ))
    } else {
        None
    };
    let u = svd.u.as_ref().expect("svd u");
    let v_t = svd.v_t.as_ref().expect("svd v_t");
    let ur = u.columns(0, rank).into_owned();
    let vr = v_t.rows(0, rank).transpose().into_owned();
    let sigma_inv = DMatrix::from_fn(rank, rank, |i, j| {
        if i == j {
            1.0 / sv[i]
        } else {
            0.0
        }
    });
    // D(a) = Sigma^-1 U^T H_a V with (H_a)_{ij} = p(u_i . a . v_j).
    let mut maps = Vec::with_capacity(m);
    for a in 0..m {
        let mut ha = RMat::zeros(prefixes.len(), suffixes.len());
        for (i, pu) in prefixes.iter().enumerate() {
            for (j, sv_word) in suffixes.iter().enumerate() {
                let w = pu.append(a).concat(sv_word);
                let p = table
                    .get(&w)
                    .ok_or_else(|| Error::MissingData(table.alphabet.format_word(&w)))?;
                ha[(i, j)] = p;
            }
        }
        maps.push(&sigma_inv * ur.transpose() * ha * &vr);
    }
    // tau from the empty-suffix column, pi from the empty-prefix row.
    let eps_col = suffixes
        .iter()
        .position(|w| w.is_empty())
        .expect("epsilon suffix present");
    let eps_row = prefixes
        .iter()
        .position(|w| w.is_empty())
        .expect("epsilon prefix present");
    let tau = &sigma_inv * ur.transpose() * h.column(eps_col).into_owned();
    let pi = vr.transpose() * h.row(eps_row).transpose().into_owned();
    let realization = QuasiRealization::new(table.alphabet.clone(), pi, tau, maps)?;
    Ok((
        realization,
        SpectralDiagnostics {
            singular_values: sv,
            rank,
            gap_warning,
            prefix_len,
        },
    ))
}

/// Sample `count` trajectories of the given length from an instrument
/// realization. Symbol `a` is emitted with probability
/// `tr[rho_t E(a)(I)]`; the state then updates to `E(a)*(rho_t)` normalized.
/// Deterministic for a fixed seed; trajectory `k` uses an independent
/// stream derived from `(seed, k)`.
pub fn sample_trajectories(
    q: &CPRealization,
    length: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Word>, Error> {
    use rand::{Rng, SeedableRng};
    let report = crate::reduction::verify_cp_realization(q, 1e-7);
    if !report.passed() {
        return Err(Error::precondition(
            "sampling requires a verified instrument realization",
        ));
    }
    let n = q.n();
    let basis = HermBasis::new(n);
    let m = q.alphabet().len();
    let id_coords = basis.coords(&q.identity);
    let effect: Vec<RVec> = (0..m)
        .map(|a| &q.instrument.maps[a].mat * &id_coords)
        .collect();
    let transfer: Vec<RMat> = (0..m)
        .map(|a| q.instrument.maps[a].mat.transpose())
        .collect();
    let rho0 = basis.coords(&q.rho);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let stream_seed = seed
            .wrapping_mul(0x9e3779b97f4a7c15)
            .wrapping_add(k as u64)
            .rotate_left(17);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(stream_seed);
        let mut rho = rho0.clone();
        let mut symbols = Vec::with_capacity(length);
        for _ in 0..length {
            let mut probs = Vec::with_capacity(m);
            let mut total = 0.0;
            for eff in &effect {
                let mut p = rho.dot(eff);
                if p < 0.0 {
                    if p < -1e-9 {
                        return Err(Error::precondition(format!(
                            "negative outcome probability {p:.3e}; maps are not positive"
                        )));
                    }
                    p = 0.0;
                }
                probs.push(p);
                total += p;
            }
            if total <= 0.0 {
                return Err(Error::precondition("all outcome probabilities vanished"));
            }
            let draw: f64 = rng.sample::<f64, _>(rand::distr::StandardUniform) * total;
            let mut acc = 0.0;
            let mut chosen = m - 1;
            for (a, p) in probs.iter().enumerate() {
                acc += p;
                if draw < acc {
                    chosen = a;
                    break;
                }
            }
            rho = &transfer[chosen] * rho / probs[chosen].max(1e-300);
            symbols.push(chosen);
        }
        out.push(Word::new(symbols));
    }
    Ok(out)
}

/// Empirical word table from trajectories by overlapping sliding windows.
pub fn empirical_table(
    trajectories: &[Word],
    alphabet: &Alphabet,
    max_length: usize,
) -> Result<WordTable, Error> {
    if trajectories.is_empty() || trajectories.iter().all(|t| t.is_empty()) {
        return Err(Error::precondition("no trajectory data"));
    }
    let mut table = WordTable::new(alphabet.clone(), max_length);
    table.insert(Word::epsilon(), 1.0);
    for len in 1..=max_length {
        let mut counts: BTreeMap<Word, usize> = BTreeMap::new();
        let mut windows = 0usize;
        for t in trajectories {
            if t.len() < len {
                continue;
            }
            for start in 0..=(t.len() - len) {
                let w = Word::new(t.indices()[start..start + len].to_vec());
                *counts.entry(w).or_insert(0) += 1;
                windows += 1;
            }
        }
        if windows == 0 {
            break;
        }
        // Unobserved words at a covered length have frequency zero; enter
        // them explicitly so Hankel assembly sees a complete table.
        for w in alphabet.words_of_length(len) {
            let c = counts.get(&w).copied().unwrap_or(0);
            table.insert(w, c as f64 / windows as f64);
        }
    }
    Ok(table)
}

/// Serialized table format.
#[derive(Debug, Serialize, Deserialize)]
pub struct WordTableJson {
    pub alphabet: Vec<String>,
    pub max_length: usize,
    pub entries: BTreeMap<String, f64>,
}

impl WordTable {
    pub fn to_json(&self) -> WordTableJson {
        WordTableJson {
            alphabet: self.alphabet.symbols().to_vec(),
            max_length: self.max_length,
            entries: self
                .entries
                .iter()
                .map(|(w, p)| (self.alphabet.format_word(w), *p))
                .collect(),
        }
    }

    pub fn from_json(json: &WordTableJson) -> Result<Self, Error> {
        let alphabet = Alphabet::new(json.alphabet.clone())?;
        let mut table = WordTable::new(alphabet, json.max_length);
        for (text, p) in &json.entries {
            if !(-1e-6..=1.0 + 1e-6).contains(p) {
                return Err(Error::Parse(format!(
                    "table entry {text:?} = {p} is not a probability"
                )));
            }
            let word = table.alphabet.parse_word(text)?;
            table.insert(word, *p);
        }
        for len in 0..=table.max_length {
            let total = table.length_sum(len);
            if total > 1.0 + 1e-6 {
                return Err(Error::Parse(format!(
                    "length-{len} entries sum to {total}, above 1"
                )));
            }
        }
        Ok(table)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("serialize table")
    }

    pub fn from_json_str(text: &str) -> Result<Self, Error> {
        let json: WordTableJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_json(&json)
    }
}
