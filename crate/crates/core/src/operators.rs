//! Finite-dimensional Hermitian operator algebra.
//!
//! All superoperators are stored as real `n^2 x n^2` matrices acting on the
//! coordinates of Hermitian operators in a fixed orthonormal basis
//! (identity over sqrt(n) plus generalized Gell-Mann matrices). This keeps
//! every linear-algebra question over the reals; complex arithmetic only
//! appears inside eigendecompositions and the Choi matrix.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::encode::ComplexMatJson;
use crate::error::Error;
use crate::linalg::{
    self, ceye, herm_eigen, hermitize, hermiticity_residual, hs_inner, kron, lambda_min, psd_clip,
    CMat, RMat, RVec, C_ONE, C_ZERO,
};
use crate::process::{Alphabet, QuasiRealization, Word};

/// Orthonormal basis of the real space of Hermitian `n x n` matrices.
///
/// Element 0 is `I/sqrt(n)`; then for each pair `i < j` the symmetric and
/// antisymmetric off-diagonal elements; finally the `n-1` diagonal
/// generalized Gell-Mann matrices.
#[derive(Debug, Clone)]
pub struct HermBasis {
    pub n: usize,
    elements: Vec<CMat>,
    /// Nonzero entries of each element, for sparse coordinate conversion.
    sparse: Vec<Vec<(usize, usize, Complex64)>>,
}

impl HermBasis {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut elements = Vec::with_capacity(n * n);
        let mut id = CMat::zeros(n, n);
        for i in 0..n {
            id[(i, i)] = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        }
        elements.push(id);
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        for i in 0..n {
            for j in (i + 1)..n {
                let mut sym = CMat::zeros(n, n);
                sym[(i, j)] = Complex64::new(inv_sqrt2, 0.0);
                sym[(j, i)] = Complex64::new(inv_sqrt2, 0.0);
                elements.push(sym);
                let mut asym = CMat::zeros(n, n);
                asym[(i, j)] = Complex64::new(0.0, -inv_sqrt2);
                asym[(j, i)] = Complex64::new(0.0, inv_sqrt2);
                elements.push(asym);
            }
        }
        for k in 1..n {
            let norm = 1.0 / ((k * (k + 1)) as f64).sqrt();
            let mut diag = CMat::zeros(n, n);
            for j in 0..k {
                diag[(j, j)] = Complex64::new(norm, 0.0);
            }
            diag[(k, k)] = Complex64::new(-(k as f64) * norm, 0.0);
            elements.push(diag);
        }
        let sparse = elements
            .iter()
            .map(|e| {
                let mut entries = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        let z = e[(i, j)];
                        if z != Complex64::new(0.0, 0.0) {
                            entries.push((i, j, z));
                        }
                    }
                }
                entries
            })
            .collect();
        HermBasis { n, elements, sparse }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn element(&self, k: usize) -> &CMat {
        &self.elements[k]
    }

    /// Real coordinates of a Hermitian matrix.
    pub fn coords(&self, x: &CMat) -> RVec {
        RVec::from_iterator(
            self.sparse.len(),
            self.sparse.iter().map(|entries| {
                entries
                    .iter()
                    .map(|&(i, j, z)| (z.conj() * x[(i, j)]).re)
                    .sum()
            }),
        )
    }

    /// Hermitian matrix from real coordinates.
    pub fn matrix(&self, v: &RVec) -> CMat {
        let mut out = CMat::zeros(self.n, self.n);
        for (k, entries) in self.sparse.iter().enumerate() {
            let c = v[k];
            if c != 0.0 {
                for &(i, j, z) in entries {
                    out[(i, j)] += z * c;
                }
            }
        }
        out
    }
}

/// Linear map on Hermitian matrices, stored over the fixed Hermitian basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    pub n: usize,
    /// `n^2 x n^2` real action matrix: `coords(F(X)) = mat * coords(X)`.
    pub mat: RMat,
}

impl SuperOperator {
    pub fn identity(n: usize) -> Self {
        SuperOperator {
            n,
            mat: RMat::identity(n * n, n * n),
        }
    }

    pub fn zero(n: usize) -> Self {
        SuperOperator {
            n,
            mat: RMat::zeros(n * n, n * n),
        }
    }

    /// Build from an arbitrary Hermitian-preserving action.
    pub fn from_fn(n: usize, f: impl Fn(&CMat) -> CMat) -> Self {
        let basis = HermBasis::new(n);
        let nn = n * n;
        let mut mat = RMat::zeros(nn, nn);
        for k in 0..nn {
            let img = f(basis.element(k));
            mat.set_column(k, &basis.coords(&img));
        }
        SuperOperator { n, mat }
    }

    /// `X -> A X A^dag`.
    pub fn conjugation(a: &CMat) -> Self {
        let n = a.nrows();
        Self::from_fn(n, |x| a * x * a.adjoint())
    }

    /// `X -> sum_k K_k X K_k^dag`.
    pub fn from_kraus(kraus: &[CMat]) -> Result<Self, Error> {
        let n = kraus
            .first()
            .ok_or_else(|| Error::structural("empty Kraus list"))?
            .nrows();
        if kraus.iter().any(|k| k.nrows() != n || k.ncols() != n) {
            return Err(Error::structural("Kraus operators must be square of equal size"));
        }
        Ok(Self::from_fn(n, |x| {
            let mut out = CMat::zeros(n, n);
            for k in kraus {
                out += k * x * k.adjoint();
            }
            out
        }))
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        let basis = HermBasis::new(self.n);
        basis.matrix(&(&self.mat * basis.coords(x)))
    }

    pub fn apply_coords(&self, v: &RVec) -> RVec {
        &self.mat * v
    }

    /// Adjoint with respect to the Hilbert-Schmidt pairing.
    pub fn adjoint(&self) -> SuperOperator {
        SuperOperator {
            n: self.n,
            mat: self.mat.transpose(),
        }
    }

    /// Composition `self . other` (apply `other` first).
    pub fn compose(&self, other: &SuperOperator) -> SuperOperator {
        assert_eq!(self.n, other.n);
        SuperOperator {
            n: self.n,
            mat: &self.mat * &other.mat,
        }
    }

    pub fn scale(&self, s: f64) -> SuperOperator {
        SuperOperator {
            n: self.n,
            mat: &self.mat * s,
        }
    }

    pub fn add(&self, other: &SuperOperator) -> SuperOperator {
        assert_eq!(self.n, other.n);
        SuperOperator {
            n: self.n,
            mat: &self.mat + &other.mat,
        }
    }

    /// Choi matrix `C = sum_ij F(|i><j|) (x) |i><j|`.
    pub fn choi(&self) -> ChoiMatrix {
        let n = self.n;
        let basis = HermBasis::new(n);
        let mut c = CMat::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                let img = self.apply_to_unit(&basis, i, j);
                let mut e = CMat::zeros(n, n);
                e[(i, j)] = C_ONE;
                c += kron(&img, &e);
            }
        }
        ChoiMatrix { n, mat: c }
    }

    /// Image of the (non-Hermitian) matrix unit `|i><j|` under the complex-
    /// linear extension of the map.
    fn apply_to_unit(&self, basis: &HermBasis, i: usize, j: usize) -> CMat {
        let n = self.n;
        if i == j {
            let mut e = CMat::zeros(n, n);
            e[(i, i)] = C_ONE;
            self_apply(self, basis, &e)
        } else {
            // E_ij = (S - i A)/sqrt(2) with S, A the basis pair for (i, j).
            let mut s = CMat::zeros(n, n);
            s[(i.min(j), i.max(j))] = Complex64::new(1.0 / 2.0f64.sqrt(), 0.0);
            s[(i.max(j), i.min(j))] = Complex64::new(1.0 / 2.0f64.sqrt(), 0.0);
            let mut a = CMat::zeros(n, n);
            a[(i.min(j), i.max(j))] = Complex64::new(0.0, -1.0 / 2.0f64.sqrt());
            a[(i.max(j), i.min(j))] = Complex64::new(0.0, 1.0 / 2.0f64.sqrt());
            let fs = self_apply(self, basis, &s);
            let fa = self_apply(self, basis, &a);
            let sign = if i < j { 1.0 } else { -1.0 };
            (fs + fa * Complex64::new(0.0, sign)).scale(1.0 / 2.0f64.sqrt())
        }
    }

    /// Complete positivity test via the smallest Choi eigenvalue.
    pub fn is_completely_positive(&self, tol: f64) -> (bool, f64) {
        let c = self.choi();
        let lmin = lambda_min(&c.mat);
        (lmin >= -tol, lmin)
    }

    /// Heuristic positivity test: minimize the smallest eigenvalue of
    /// `F(|psi><psi|)` over sampled and locally refined pure states.
    pub fn is_positive_sampled(&self, trials: usize, seed: u64) -> (bool, f64) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let n = self.n;
        let basis = HermBasis::new(n);
        let random_state = |rng: &mut rand_chacha::ChaCha12Rng| {
            let mut v = CMat::zeros(n, 1);
            for i in 0..n {
                v[(i, 0)] = Complex64::new(
                    rng.sample::<f64, _>(rand::distr::StandardUniform) - 0.5,
                    rng.sample::<f64, _>(rand::distr::StandardUniform) - 0.5,
                );
            }
            let norm = v.norm();
            v /= Complex64::new(norm, 0.0);
            v
        };
        let value = |this: &SuperOperator, v: &CMat| {
            let proj = v * v.adjoint();
            lambda_min(&basis.matrix(&(&this.mat * basis.coords(&proj))))
        };
        let mut worst = f64::INFINITY;
        let mut worst_state = random_state(&mut rng);
        for _ in 0..trials.max(1) {
            let v = random_state(&mut rng);
            let val = value(self, &v);
            if val < worst {
                worst = val;
                worst_state = v;
            }
        }
        // Local refinement around the worst sample.
        let mut step = 0.3;
        for _ in 0..200 {
            let mut perturped = worst_state.clone();
            for i in 0..n {
                perturped[(i, 0)] += Complex64::new(
                    step * (rng.sample::<f64, _>(rand::distr::StandardUniform) - 0.5),
                    step * (rng.sample::<f64, _>(rand::distr::StandardUniform) - 0.5),
                );
            }
            let norm = perturped.norm();
            perturped /= Complex64::new(norm, 0.0);
            let val = value(self, &perturped);
            if val < worst {
                worst = val;
                worst_state = perturped;
            } else {
                step *= 0.97;
            }
        }
        (worst >= -1e-9, worst)
    }
}

fn self_apply(f: &SuperOperator, basis: &HermBasis, x: &CMat) -> CMat {
    basis.matrix(&(&f.mat * basis.coords(x)))
}

/// Choi matrix of a superoperator.
#[derive(Debug, Clone)]
pub struct ChoiMatrix {
    pub n: usize,
    pub mat: CMat,
}

impl ChoiMatrix {
    /// Hermiticity residual; a Hermitian-preserving map has Hermitian Choi.
    pub fn hermiticity(&self) -> f64 {
        hermiticity_residual(&self.mat)
    }

    /// Reconstruct the superoperator: `F(E_ij)[a,b] = C[(a,i),(b,j)]`.
    pub fn to_superoperator(&self) -> SuperOperator {
        let n = self.n;
        let basis = HermBasis::new(n);
        let nn = n * n;
        let mut mat = RMat::zeros(nn, nn);
        for k in 0..nn {
            let x = basis.element(k);
            let mut img = CMat::zeros(n, n);
            for a in 0..n {
                for b in 0..n {
                    let mut acc = C_ZERO;
                    for i in 0..n {
                        for j in 0..n {
                            acc += self.mat[(a * n + i, b * n + j)] * x[(i, j)];
                        }
                    }
                    img[(a, b)] = acc;
                }
            }
            mat.set_column(k, &basis.coords(&hermitize(&img)));
        }
        SuperOperator { n, mat }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        herm_eigen(&self.mat).0
    }
}

/// Build a superoperator from a Choi matrix.
pub fn from_choi(c: &ChoiMatrix) -> SuperOperator {
    c.to_superoperator()
}

/// Partial transpose on the first tensor factor of `Herm(n1 (x) n2)`.
pub fn partial_transpose(x: &CMat, dims: (usize, usize)) -> Result<CMat, Error> {
    let (n1, n2) = dims;
    if x.nrows() != n1 * n2 || x.ncols() != n1 * n2 {
        return Err(Error::structural("partial transpose dimension mismatch"));
    }
    let mut out = CMat::zeros(n1 * n2, n1 * n2);
    for a in 0..n1 {
        for b in 0..n1 {
            for i in 0..n2 {
                for j in 0..n2 {
                    out[(b * n2 + i, a * n2 + j)] = x[(a * n2 + i, b * n2 + j)];
                }
            }
        }
    }
    Ok(out)
}

/// A per-symbol family of superoperators.
#[derive(Debug, Clone)]
pub struct QuantumInstrument {
    pub alphabet: Alphabet,
    pub n: usize,
    pub maps: Vec<SuperOperator>,
}

impl QuantumInstrument {
    pub fn new(alphabet: Alphabet, maps: Vec<SuperOperator>) -> Result<Self, Error> {
        let n = maps
            .first()
            .ok_or_else(|| Error::structural("instrument needs at least one map"))?
            .n;
        if maps.len() != alphabet.len() {
            return Err(Error::structural("one map per symbol required"));
        }
        if maps.iter().any(|m| m.n != n) {
            return Err(Error::structural("instrument maps on different spaces"));
        }
        Ok(QuantumInstrument { alphabet, n, maps })
    }

    pub fn total(&self) -> SuperOperator {
        let mut total = SuperOperator::zero(self.n);
        for m in &self.maps {
            total = total.add(m);
        }
        total
    }

    /// `E(u_1) o ... o E(u_l)` applied to `X`.
    pub fn apply_word(&self, word: &Word, x: &CMat) -> Result<CMat, Error> {
        word.validate(&self.alphabet)?;
        let basis = HermBasis::new(self.n);
        let mut v = basis.coords(x);
        for &i in word.indices().iter().rev() {
            v = &self.maps[i].mat * v;
        }
        Ok(basis.matrix(&v))
    }
}

/// Instrument together with a state and reference element. Completeness of
/// the positivity structure is checked by [`crate::reduction::verify_cp_realization`],
/// not enforced on construction, so non-completely-positive presentations
/// can be represented and diagnosed.
#[derive(Debug, Clone)]
pub struct CPRealization {
    pub instrument: QuantumInstrument,
    pub rho: CMat,
    pub identity: CMat,
}

impl CPRealization {
    pub fn new(instrument: QuantumInstrument, rho: CMat, identity: CMat) -> Result<Self, Error> {
        let n = instrument.n;
        if rho.nrows() != n || rho.ncols() != n || identity.nrows() != n || identity.ncols() != n {
            return Err(Error::structural("state/reference dimension mismatch"));
        }
        if hermiticity_residual(&rho) > 1e-9 * rho.norm().max(1.0)
            || hermiticity_residual(&identity) > 1e-9 * identity.norm().max(1.0)
        {
            return Err(Error::structural("state and reference must be Hermitian"));
        }
        Ok(CPRealization {
            instrument,
            rho,
            identity,
        })
    }

    pub fn n(&self) -> usize {
        self.instrument.n
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.instrument.alphabet
    }

    /// Word probability `tr[rho E(u_1) o ... o E(u_l) (I)]`.
    pub fn word_probability(&self, word: &Word) -> Result<f64, Error> {
        let img = self.instrument.apply_word(word, &self.identity)?;
        Ok(hs_inner(&self.rho, &img))
    }

    /// Coordinatize as a quasi-realization of dimension `n^2` in the fixed
    /// Hermitian basis: `tau = coords(I)`, `pi = coords(rho)`, maps are the
    /// superoperator action matrices.
    pub fn as_quasi_realization(&self) -> QuasiRealization {
        let basis = HermBasis::new(self.n());
        let pi = basis.coords(&self.rho);
        let tau = basis.coords(&self.identity);
        let maps = self.instrument.maps.iter().map(|m| m.mat.clone()).collect();
        QuasiRealization::new(self.alphabet().clone(), pi, tau, maps)
            .expect("coordinatization is structurally consistent")
    }
}

/// Stationary state of an instrument: the fixed point of the adjoint of the
/// symbol-map sum, normalized to `tr[rho I] = 1` against the reference.
///
/// Returns the state and a uniqueness flag; when the eigenvalue-1 space of
/// the adjoint has dimension greater than one, a representative is returned
/// with `unique = false`.
pub fn stationary_state(
    total: &SuperOperator,
    reference: &CMat,
    tol: f64,
) -> Result<(CMat, bool), Error> {
    let n = total.n;
    let nn = n * n;
    let adj = total.adjoint();
    let shifted = &adj.mat - RMat::identity(nn, nn);
    let svd = shifted.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cut = (tol * smax.max(1.0)).max(1e-12);
    let null_idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= cut)
        .collect();
    if null_idx.is_empty() {
        return Err(Error::precondition(
            "no eigenvalue-1 fixed point: the instrument sum is not stochastic",
        ));
    }
    let unique = null_idx.len() == 1;
    let v_t = svd.v_t.as_ref().expect("svd with v_t");
    let basis = HermBasis::new(n);
    // Representative: the projection of the reference element onto the
    // fixed-point space. For a one-dimensional space this is the fixed
    // point itself; for degenerate spaces it is the canonical best-aligned
    // element, e.g. I/n for a unitary conjugation channel.
    let ref_coords = basis.coords(reference);
    let mut coords = RVec::zeros(nn);
    for &k in &null_idx {
        let b: RVec = v_t.row(k).transpose().into_owned();
        coords += &b * b.dot(&ref_coords);
    }
    if coords.norm() < 1e-12 * ref_coords.norm().max(1.0) {
        // Reference has no component in the fixed space; fall back to the
        // first null vector.
        coords = v_t.row(null_idx[0]).transpose().into_owned();
    }
    let pairing = coords.dot(&ref_coords);
    if pairing.abs() < 1e-12 {
        return Err(Error::precondition(
            "fixed point pairs to zero with the reference element",
        ));
    }
    coords /= pairing;
    let raw = basis.matrix(&coords);
    let lmin = lambda_min(&raw);
    let scale = raw.norm().max(1e-300);
    if lmin < -tol.max(1e-9) * scale {
        return Err(Error::precondition(format!(
            "stationary fixed point is not positive semidefinite (lambda_min = {lmin:.3e})"
        )));
    }
    let rho = psd_clip(&raw);
    Ok((rho, unique))
}

/// Pauli matrices (unnormalized), handy for constructions and tests.
pub fn pauli(k: usize) -> CMat {
    let mut m = CMat::zeros(2, 2);
    match k {
        0 => {
            m[(0, 0)] = C_ONE;
            m[(1, 1)] = C_ONE;
        }
        1 => {
            m[(0, 1)] = C_ONE;
            m[(1, 0)] = C_ONE;
        }
        2 => {
            m[(0, 1)] = Complex64::new(0.0, -1.0);
            m[(1, 0)] = Complex64::new(0.0, 1.0);
        }
        3 => {
            m[(0, 0)] = C_ONE;
            m[(1, 1)] = Complex64::new(-1.0, 0.0);
        }
        _ => panic!("pauli index out of range"),
    }
    m
}

/// JSON form of one instrument map: either an explicit real action matrix
/// over the Hermitian basis or a list of Kraus operators.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapJson {
    Kraus { kraus: Vec<ComplexMatJson> },
    Action { action: Vec<Vec<f64>> },
}

/// Serialized instrument realization.
#[derive(Debug, Serialize, Deserialize)]
pub struct CPRealizationJson {
    pub n: usize,
    pub alphabet: Vec<String>,
    pub maps: BTreeMap<String, MapJson>,
    pub rho: ComplexMatJson,
    pub identity: ComplexMatJson,
}

impl CPRealization {
    pub fn to_json(&self) -> CPRealizationJson {
        let mut maps = BTreeMap::new();
        for (i, m) in self.instrument.maps.iter().enumerate() {
            let rows: Vec<Vec<f64>> = (0..m.mat.nrows())
                .map(|r| (0..m.mat.ncols()).map(|c| m.mat[(r, c)]).collect())
                .collect();
            maps.insert(
                self.alphabet().label(i).to_string(),
                MapJson::Action { action: rows },
            );
        }
        CPRealizationJson {
            n: self.n(),
            alphabet: self.alphabet().symbols().to_vec(),
            maps,
            rho: ComplexMatJson::from_mat(&self.rho),
            identity: ComplexMatJson::from_mat(&self.identity),
        }
    }

    pub fn from_json(json: &CPRealizationJson) -> Result<Self, Error> {
        let alphabet = Alphabet::new(json.alphabet.clone())?;
        let n = json.n;
        let nn = n * n;
        let mut maps = Vec::with_capacity(alphabet.len());
        for label in alphabet.symbols() {
            let entry = json
                .maps
                .get(label)
                .ok_or_else(|| Error::Parse(format!("missing map for symbol {label:?}")))?;
            let superop = match entry {
                MapJson::Action { action } => {
                    if action.len() != nn || action.iter().any(|r| r.len() != nn) {
                        return Err(Error::Parse(format!(
                            "action for {label:?} is not {nn}x{nn}"
                        )));
                    }
                    let flat: Vec<f64> = action.iter().flatten().cloned().collect();
                    SuperOperator {
                        n,
                        mat: RMat::from_row_slice(nn, nn, &flat),
                    }
                }
                MapJson::Kraus { kraus } => {
                    let ops: Result<Vec<CMat>, Error> =
                        kraus.iter().map(|k| k.to_mat()).collect();
                    SuperOperator::from_kraus(&ops?)?
                }
            };
            if superop.n != n {
                return Err(Error::Parse(format!("map for {label:?} has wrong dimension")));
            }
            maps.push(superop);
        }
        let instrument = QuantumInstrument::new(alphabet, maps)?;
        CPRealization::new(instrument, json.rho.to_mat()?, json.identity.to_mat()?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("serialize instrument realization")
    }

    pub fn from_json_str(text: &str) -> Result<Self, Error> {
        let json: CPRealizationJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_json(&json)
    }
}

/// Identity embedded in `Herm(n)` as a complex matrix.
pub fn identity_op(n: usize) -> CMat {
    ceye(n)
}

/// Coordinates of the identity operator, convenience for callers working in
/// the fixed basis.
pub fn identity_coords(n: usize) -> RVec {
    HermBasis::new(n).coords(&ceye(n))
}

pub use linalg::psd_clip as project_psd_matrix;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, FixtureParams};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn basis_is_orthonormal() {
        for n in [1usize, 2, 3, 4] {
            let b = HermBasis::new(n);
            assert_eq!(b.len(), n * n);
            for i in 0..b.len() {
                for j in 0..b.len() {
                    let ip = hs_inner(b.element(i), b.element(j));
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - expect).abs() < 1e-12, "n={n} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn identity_channel_choi_is_maximally_entangled() {
        let id = SuperOperator::identity(2);
        let c = id.choi();
        let ev = c.eigenvalues();
        assert!((ev[3] - 2.0).abs() < 1e-10);
        assert!(ev[..3].iter().all(|l| l.abs() < 1e-10));
    }

    #[test]
    fn transpose_choi_is_swap_with_min_eigenvalue_minus_one() {
        let t = SuperOperator::from_fn(2, |x| x.transpose());
        let c = t.choi();
        let ev = c.eigenvalues();
        assert!((ev[0] + 1.0).abs() < 1e-10);
        assert!((ev[3] - 1.0).abs() < 1e-10);
        let (cp, lmin) = t.is_completely_positive(1e-9);
        assert!(!cp);
        assert!((lmin + 1.0).abs() < 1e-10);
    }

    #[test]
    fn choi_round_trip_on_random_superoperators() {
        let mut rng = StdRng::seed_from_u64(3);
        for n in [2usize, 3] {
            let nn = n * n;
            let f = SuperOperator {
                n,
                mat: RMat::from_fn(nn, nn, |_, _| rng.random::<f64>() - 0.5),
            };
            let back = from_choi(&f.choi());
            assert!((&back.mat - &f.mat).norm() < 1e-12 * f.mat.norm().max(1.0));
        }
    }

    #[test]
    fn adjoint_is_involutive_and_pairs_correctly() {
        let mut rng = StdRng::seed_from_u64(5);
        let n = 3;
        let nn = n * n;
        let f = SuperOperator {
            n,
            mat: RMat::from_fn(nn, nn, |_, _| rng.random::<f64>() - 0.5),
        };
        assert_eq!(f.adjoint().adjoint().mat, f.mat);
        let basis = HermBasis::new(n);
        let a = hermitize(&CMat::from_fn(n, n, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        }));
        let b = hermitize(&CMat::from_fn(n, n, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        }));
        let lhs = hs_inner(&a, &basis.matrix(&(&f.mat * basis.coords(&b))));
        let rhs = hs_inner(&basis.matrix(&(&f.adjoint().mat * basis.coords(&a))), &b);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn spin_flip_transpose_map_fails_cp_by_one_minus_gamma() {
        for gamma in [0.0, 0.25, 0.5] {
            let model = catalog::monitored_qubit_instrument(&FixtureParams::new(gamma, 1.0));
            let t_idx = model.alphabet().index_of("t").unwrap();
            let (cp, lmin) = model.instrument.maps[t_idx].is_completely_positive(1e-10);
            assert!(!cp);
            assert!(
                (lmin + (1.0 - gamma)).abs() < 1e-10,
                "gamma={gamma} lmin={lmin}"
            );
        }
        // gamma = 1: the map is zero, trivially CP.
        let model = catalog::monitored_qubit_instrument(&FixtureParams::new(1.0, 1.0));
        let t_idx = model.alphabet().index_of("t").unwrap();
        let (cp, _) = model.instrument.maps[t_idx].is_completely_positive(1e-10);
        assert!(cp);
    }

    #[test]
    fn spin_flip_transpose_map_is_positive() {
        let model = catalog::monitored_qubit_instrument(&FixtureParams::new(0.5, 1.0));
        let t_idx = model.alphabet().index_of("t").unwrap();
        let (pos, worst) = model.instrument.maps[t_idx].is_positive_sampled(200, 7);
        assert!(pos, "worst value {worst}");
        let neg = SuperOperator::from_fn(2, |x| -x);
        let (pos, _) = neg.is_positive_sampled(50, 7);
        assert!(!pos);
        let id = SuperOperator::identity(2);
        let (pos, _) = id.is_positive_sampled(50, 7);
        assert!(pos);
    }

    #[test]
    fn apply_word_matches_composition() {
        let model = catalog::monitored_qubit_instrument(&FixtureParams::new(1.0, 1.0));
        let eps = Word::epsilon();
        let x = pauli(1) + pauli(0) * Complex64::new(2.0, 0.0);
        let same = model.instrument.apply_word(&eps, &x).unwrap();
        assert!((same - &x).norm() < 1e-12);
        // E(+) applied to I at gamma=1 is P_plus / 2.
        let plus = model.alphabet().parse_word("+").unwrap();
        let img = model.instrument.apply_word(&plus, &ceye(2)).unwrap();
        let p_plus = (pauli(0) + pauli(3)).scale(0.5);
        assert!((img - p_plus.scale(0.5)).norm() < 1e-12);
    }

    #[test]
    fn partial_transpose_of_bell_projector() {
        // Bell projector (1/2) sum_ij |ii><jj| on C2 (x) C2.
        let mut bell = CMat::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                bell[(i * 2 + i, j * 2 + j)] = Complex64::new(0.5, 0.0);
            }
        }
        let pt = partial_transpose(&bell, (2, 2)).unwrap();
        let ev = herm_eigen(&pt).0;
        assert!((ev[0] + 0.5).abs() < 1e-12);
        let back = partial_transpose(&pt, (2, 2)).unwrap();
        assert!((back - &bell).norm() < 1e-14);
        // Product state spectrum is unchanged.
        let prod = kron(&((pauli(0) + pauli(3)).scale(0.5)), &((pauli(0) + pauli(1)).scale(0.5)));
        let pt = partial_transpose(&prod, (2, 2)).unwrap();
        let mut ev1 = herm_eigen(&prod).0;
        let mut ev2 = herm_eigen(&pt).0;
        ev1.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev2.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ev1.iter().zip(ev2.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_state_of_qubit_model_is_maximally_mixed() {
        let model = catalog::monitored_qubit_instrument(&FixtureParams::new(1.0, 1.0));
        let (rho, unique) =
            stationary_state(&model.instrument.total(), &model.identity, 1e-9).unwrap();
        assert!(unique);
        assert!((rho - ceye(2).scale(0.5)).norm() < 1e-9);
        // A unitary conjugation channel fixes everything commuting with the
        // unitary; the representative is flagged non-unique and is the
        // canonical projection of the reference, I/n.
        let u = catalog::rotation_unitary(1, 0.7);
        let chan = SuperOperator::conjugation(&u);
        let (rho, unique) = stationary_state(&chan, &ceye(2), 1e-9).unwrap();
        assert!(!unique, "commutant of a rotation is two-dimensional");
        assert!((rho - ceye(2).scale(0.5)).norm() < 1e-9);
    }

    #[test]
    fn coordinatization_reproduces_trace_probabilities() {
        let model = catalog::monitored_qubit_instrument(&FixtureParams::new(1.0, 1.0));
        let quasi = model.as_quasi_realization();
        assert_eq!(quasi.dim(), 4);
        for text in ["", "+", "x", "+x", "zz", "+-x"] {
            let w = model.alphabet().parse_word(text).unwrap();
            let direct = model.word_probability(&w).unwrap();
            let via_quasi = quasi.word_probability(&w).unwrap();
            assert!((direct - via_quasi).abs() < 1e-12, "word {text:?}");
        }
    }

    #[test]
    fn instrument_json_round_trip_accepts_kraus() {
        let model = catalog::two_qubit_cp(&FixtureParams::new(0.5, 1.0)).realization;
        let text = model.to_json_string();
        let back = CPRealization::from_json_str(&text).unwrap();
        let w = model.alphabet().parse_word("+x").unwrap();
        assert!(
            (back.word_probability(&w).unwrap() - model.word_probability(&w).unwrap()).abs()
                < 1e-12
        );
        // Kraus form input.
        let kraus_json = r#"{
            "n": 2,
            "alphabet": ["a"],
            "maps": {"a": {"kraus": [[[[0.0,0.0],[1.0,0.0]],[[1.0,0.0],[0.0,0.0]]]]}},
            "rho": [[[0.5,0.0],[0.0,0.0]],[[0.0,0.0],[0.5,0.0]]],
            "identity": [[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]]
        }"#;
        let parsed = CPRealization::from_json_str(kraus_json).unwrap();
        let x_img = parsed.instrument.maps[0].apply(&pauli(3));
        assert!((x_img + pauli(3)).norm() < 1e-12, "sigma_x flips sigma_z");
    }
}
