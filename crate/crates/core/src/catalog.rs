//! Built-in example processes and realizations.
//!
//! Everything here revolves around one six-symbol process, the *monitored
//! qubit*: at each step the system is projectively measured in the
//! computational basis with probability gamma/2 per outcome (`+`, `-`),
//! rotated by `theta` around a random axis with probability gamma/6 each
//! (`x`, `y`, `z`), or hit by a spin-flip transpose event with probability
//! `1 - gamma` (`t`). The process has a four-dimensional regular
//! quasi-realization, a qubit presentation whose `t` map is positive but not
//! completely positive, and two genuinely completely positive presentations
//! on four-dimensional Hilbert spaces. A pair of PSD-cone representations
//! with different level-2 extensions and a tridiagonal lifting family round
//! out the test bed for the cone machinery.

use num_complex::Complex64;

use crate::cones::{MappingConeSpec, SDRCone};
use crate::error::Error;
use crate::linalg::{ceye, kron, CMat, RMat, RVec, C_ONE};
use crate::operators::{
    pauli, stationary_state, CPRealization, HermBasis, QuantumInstrument, SuperOperator,
};
use crate::process::{Alphabet, QuasiRealization};

/// Parameters of the monitored-qubit family.
#[derive(Debug, Clone, Copy)]
pub struct FixtureParams {
    /// Probability weight of the measurement/rotation channel, in `[0, 1]`.
    pub gamma: f64,
    /// Rotation angle in radians. The default 1.0 is an irrational multiple
    /// of 2 pi, which keeps the rotation orbit infinite.
    pub theta: f64,
}

impl FixtureParams {
    pub fn new(gamma: f64, theta: f64) -> Self {
        assert!((0.0..=1.0).contains(&gamma), "gamma must be in [0, 1]");
        FixtureParams { gamma, theta }
    }
}

impl Default for FixtureParams {
    fn default() -> Self {
        FixtureParams {
            gamma: 0.5,
            theta: 1.0,
        }
    }
}

/// The six-symbol alphabet of the monitored-qubit process.
pub fn monitored_alphabet() -> Alphabet {
    Alphabet::new(["+", "-", "x", "y", "z", "t"]).expect("static alphabet")
}

/// Four-dimensional regular quasi-realization of the monitored qubit.
pub fn monitored_qubit_quasi(params: &FixtureParams) -> QuasiRealization {
    let g = params.gamma;
    let (c, s) = (params.theta.cos(), params.theta.sin());
    let h = g / 2.0;
    let r = g / 6.0;
    let plus = RMat::from_row_slice(
        4,
        4,
        &[
            h * 0.5,
            0.0,
            0.0,
            h * 0.5,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            h * 0.5,
            0.0,
            0.0,
            h * 0.5,
        ],
    );
    let minus = RMat::from_row_slice(
        4,
        4,
        &[
            h * 0.5,
            0.0,
            0.0,
            -h * 0.5,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            -h * 0.5,
            0.0,
            0.0,
            h * 0.5,
        ],
    );
    let x = RMat::from_row_slice(
        4,
        4,
        &[
            r, 0.0, 0.0, 0.0, //
            0.0, r, 0.0, 0.0, //
            0.0, 0.0, r * c, r * s, //
            0.0, 0.0, -r * s, r * c,
        ],
    );
    let y = RMat::from_row_slice(
        4,
        4,
        &[
            r, 0.0, 0.0, 0.0, //
            0.0, r * c, 0.0, -r * s, //
            0.0, 0.0, r, 0.0, //
            0.0, r * s, 0.0, r * c,
        ],
    );
    let z = RMat::from_row_slice(
        4,
        4,
        &[
            r, 0.0, 0.0, 0.0, //
            0.0, r * c, r * s, 0.0, //
            0.0, -r * s, r * c, 0.0, //
            0.0, 0.0, 0.0, r,
        ],
    );
    let t = RMat::from_diagonal(&RVec::from_vec(vec![
        1.0 - g,
        g - 1.0,
        g - 1.0,
        g - 1.0,
    ]));
    let pi = RVec::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
    let tau = pi.clone();
    QuasiRealization::new(monitored_alphabet(), pi, tau, vec![plus, minus, x, y, z, t])
        .expect("static realization")
}

/// Rotation `exp(i theta/2 sigma_axis)` on one qubit, `axis in {1,2,3}`.
pub fn rotation_unitary(axis: usize, theta: f64) -> CMat {
    let half = theta / 2.0;
    ceye(2).scale(half.cos()) + pauli(axis) * Complex64::new(0.0, half.sin())
}

/// Universal spin flip `Phi(X) = sigma_2 X^T sigma_2`.
pub fn spin_flip(x: &CMat) -> CMat {
    &pauli(2) * x.transpose() * pauli(2)
}

fn spin_projector(up: bool) -> CMat {
    if up {
        (pauli(0) + pauli(3)).scale(0.5)
    } else {
        (pauli(0) - pauli(3)).scale(0.5)
    }
}

/// Qubit presentation of the monitored-qubit process. The `t` map is
/// positive but not completely positive for `gamma < 1`, so this is a valid
/// quasi-realization that fails instrument verification.
pub fn monitored_qubit_instrument(params: &FixtureParams) -> CPRealization {
    let g = params.gamma;
    let mut maps = Vec::with_capacity(6);
    for up in [true, false] {
        maps.push(SuperOperator::conjugation(
            &spin_projector(up).scale((g / 2.0).sqrt()),
        ));
    }
    for axis in 1..=3 {
        maps.push(SuperOperator::conjugation(
            &rotation_unitary(axis, params.theta).scale((g / 6.0).sqrt()),
        ));
    }
    let tw = 1.0 - g;
    maps.push(SuperOperator::from_fn(2, move |x| spin_flip(x).scale(tw)));
    let instrument = QuantumInstrument::new(monitored_alphabet(), maps).expect("qubit instrument");
    CPRealization::new(instrument, ceye(2).scale(0.5), ceye(2)).expect("qubit model")
}

/// Completely positive two-qubit presentation with its quotient data.
pub struct TwoQubitModel {
    /// The literal structure-preserving map family with `(rho, I)`: every
    /// map is completely positive, the quotient relation onto
    /// [`monitored_qubit_quasi`] holds exactly and the word probabilities
    /// agree, but the map sum fixes the reference element only modulo the
    /// kernel (`sum E(I) = I - (gamma/2) sigma_3 (x) sigma_3`), so this is a
    /// witness family rather than a unital realization.
    pub witness: CPRealization,
    /// Proper unital realization obtained by reducing the witness family.
    pub realization: CPRealization,
    /// Quotient projection onto the coordinates of
    /// [`monitored_qubit_quasi`]: `L(omega_mu) = e_mu`.
    pub l: RMat,
    /// The frame `omega_mu = {I, sigma_i (x) 1 - 1 (x) sigma_i}`.
    pub omega: Vec<CMat>,
    /// Mapping-cone specification `(W, Wt)` built from the stable subspaces.
    pub spec: MappingConeSpec,
}

/// Completely positive presentation of the monitored qubit on two qubits,
/// with the subspace pair and quotient map relating it to the
/// four-dimensional quasi-realization.
pub fn two_qubit_cp(params: &FixtureParams) -> TwoQubitModel {
    let g = params.gamma;
    let swap = {
        let mut m = CMat::zeros(4, 4);
        for a in 0..2 {
            for i in 0..2 {
                m[(a * 2 + i, i * 2 + a)] = C_ONE;
            }
        }
        m
    };
    let mut maps = Vec::with_capacity(6);
    for up in [true, false] {
        let p_here = spin_projector(up);
        let mut kraus = Vec::new();
        for k in 0..2 {
            let mut ket_bra = CMat::zeros(2, 2);
            // |other><k| routes the traced-out second factor into P_other.
            let other_index = if up { 1 } else { 0 };
            ket_bra[(other_index, k)] = C_ONE;
            kraus.push(kron(&p_here, &ket_bra).scale((g / 2.0).sqrt()));
        }
        maps.push(SuperOperator::from_kraus(&kraus).expect("measurement kraus"));
    }
    for axis in 1..=3 {
        let u = rotation_unitary(axis, params.theta);
        maps.push(SuperOperator::conjugation(
            &kron(&u, &u).scale((g / 6.0).sqrt()),
        ));
    }
    maps.push(SuperOperator::conjugation(&swap.scale((1.0 - g).sqrt())));
    let instrument = QuantumInstrument::new(monitored_alphabet(), maps).expect("two-qubit maps");
    let identity = ceye(4);
    let (rho, _unique) =
        stationary_state(&instrument.total(), &identity, 1e-9).expect("stationary state");
    let witness = CPRealization::new(instrument, rho, identity).expect("two-qubit witness");
    let (realization, _trace) = crate::reduction::reduce_to_realization(
        &witness.instrument,
        &witness.rho,
        &witness.identity,
        &crate::reduction::ReductionConfig::default(),
    )
    .expect("two-qubit reduction");

    // Stable subspaces: the span reachable from the identity and the span
    // reachable from the state, written out explicitly.
    let sig = |k: usize| pauli(k);
    let mut w_raw: Vec<CMat> = (0..4).map(|mu| kron(&sig(mu), &sig(mu))).collect();
    for i in 1..=3 {
        w_raw.push(kron(&sig(i), &sig(0)) - kron(&sig(0), &sig(i)));
    }
    for (i, j) in [(1, 2), (2, 3), (3, 1)] {
        w_raw.push(kron(&sig(i), &sig(j)) + kron(&sig(j), &sig(i)));
    }
    let mut wt_raw: Vec<CMat> = (0..4).map(|mu| kron(&sig(mu), &sig(0))).collect();
    for i in 1..=3 {
        wt_raw.push(kron(&sig(0), &sig(i)));
    }
    let omega: Vec<CMat> = std::iter::once(ceye(4))
        .chain((1..=3).map(|i| kron(&sig(i), &sig(0)) - kron(&sig(0), &sig(i))))
        .collect();
    let basis = HermBasis::new(4);
    let mut frame = RMat::zeros(16, 4);
    for (k, om) in omega.iter().enumerate() {
        frame.set_column(k, &basis.coords(om));
    }
    let l = crate::linalg::pinv_rows(&frame);
    let spec = MappingConeSpec::with_l(4, w_raw, wt_raw, l.clone()).expect("two-qubit spec");
    TwoQubitModel {
        witness,
        realization,
        l,
        omega,
        spec,
    }
}

/// Completely positive presentation on a direct sum of two qubits, together
/// with the alternative map family with the same quotient.
pub struct DirectSumModel {
    pub realization: CPRealization,
    pub alternative: CPRealization,
}

/// Block-diagonal embedding `Y (+) Z` with the block index as the major
/// tensor factor.
pub fn block_diag(y: &CMat, z: &CMat) -> CMat {
    let mut e00 = CMat::zeros(2, 2);
    e00[(0, 0)] = C_ONE;
    let mut e11 = CMat::zeros(2, 2);
    e11[(1, 1)] = C_ONE;
    kron(&e00, y) + kron(&e11, z)
}

/// Monitored qubit on `C^2 (+) C^2`: the second summand carries the
/// spin-flipped copy, and the `t` event swaps the summands, which is
/// completely positive even though its quotient is the transpose-type map.
pub fn direct_sum_cp(params: &FixtureParams) -> DirectSumModel {
    let g = params.gamma;
    let zero2 = CMat::zeros(2, 2);
    let mut maps = Vec::with_capacity(6);
    let mut alt_maps = Vec::with_capacity(6);
    for up in [true, false] {
        let a = spin_projector(up);
        let b = spin_projector(!up);
        maps.push(SuperOperator::conjugation(
            &block_diag(&a, &b).scale((g / 2.0).sqrt()),
        ));
        alt_maps.push(
            SuperOperator::from_kraus(&[
                block_diag(&a, &zero2).scale((g / 2.0).sqrt()),
                block_diag(&zero2, &b).scale((g / 2.0).sqrt()),
            ])
            .expect("split measurement kraus"),
        );
    }
    for axis in 1..=3 {
        let u = rotation_unitary(axis, params.theta);
        maps.push(SuperOperator::conjugation(
            &block_diag(&u, &u).scale((g / 6.0).sqrt()),
        ));
        alt_maps.push(
            SuperOperator::from_kraus(&[
                block_diag(&u, &zero2).scale((g / 6.0).sqrt()),
                block_diag(&zero2, &u).scale((g / 6.0).sqrt()),
            ])
            .expect("split rotation kraus"),
        );
    }
    let block_swap = kron(&pauli(1), &ceye(2));
    maps.push(SuperOperator::conjugation(
        &block_swap.scale((1.0 - g).sqrt()),
    ));
    let mut e01 = CMat::zeros(2, 2);
    e01[(0, 1)] = C_ONE;
    let mut e10 = CMat::zeros(2, 2);
    e10[(1, 0)] = C_ONE;
    alt_maps.push(
        SuperOperator::from_kraus(&[
            kron(&e10, &ceye(2)).scale((1.0 - g).sqrt()),
            kron(&e01, &ceye(2)).scale((1.0 - g).sqrt()),
        ])
        .expect("block move kraus"),
    );
    let rho = ceye(4).scale(0.25);
    let identity = ceye(4);
    let realization = CPRealization::new(
        QuantumInstrument::new(monitored_alphabet(), maps).expect("direct sum maps"),
        rho.clone(),
        identity.clone(),
    )
    .expect("direct sum model");
    let alternative = CPRealization::new(
        QuantumInstrument::new(monitored_alphabet(), alt_maps).expect("alternative maps"),
        rho,
        identity,
    )
    .expect("alternative model");
    DirectSumModel {
        realization,
        alternative,
    }
}

/// The PSD cone of a qubit, represented on its own Hermitian space with the
/// identity map.
pub fn psd_cone_direct() -> SDRCone {
    let basis = HermBasis::new(2);
    let w: Vec<CMat> = (0..4).map(|k| basis.element(k).clone()).collect();
    SDRCone::new(2, w, RMat::identity(4, 4)).expect("direct cone")
}

/// The same qubit PSD cone represented on `C^2 (+) C^2` through the
/// spin-flip pairing `Y (+) Phi(Y)`. Level 1 agrees with the direct
/// representation; the level-2 extension is the PSD-and-PPT cone, strictly
/// smaller than the PSD cone of the direct representation.
pub fn psd_cone_spin_flip() -> SDRCone {
    let basis2 = HermBasis::new(2);
    let basis4 = HermBasis::new(4);
    let w: Vec<CMat> = (0..4)
        .map(|mu| {
            let b = basis2.element(mu);
            block_diag(b, &spin_flip(b))
        })
        .collect();
    let mut e00 = CMat::zeros(2, 2);
    e00[(0, 0)] = C_ONE;
    let mut l = RMat::zeros(4, 16);
    for mu in 0..4 {
        let probe = kron(&e00, basis2.element(mu));
        l.set_row(mu, &basis4.coords(&probe).transpose());
    }
    SDRCone::new(4, w, l).expect("spin flip cone")
}

/// Mapping-cone specification with the full qubit operator space on both
/// sides and the quotient map fixed to the Pauli coordinates of
/// [`monitored_qubit_quasi`].
pub fn qubit_full_spec() -> MappingConeSpec {
    let basis = HermBasis::new(2);
    let w: Vec<CMat> = (0..4).map(|k| basis.element(k).clone()).collect();
    let mut l = RMat::zeros(4, 4);
    for mu in 0..4 {
        l.set_row(mu, &basis.coords(&pauli(mu).scale(0.5)).transpose());
    }
    MappingConeSpec::with_l(2, w.clone(), w, l).expect("full qubit spec")
}

/// Deliberately under-sized specification: a one-dimensional Hilbert space
/// whose quotient image is the ray through `tau`. The mapping cone contains
/// only rank-one maps, so any non-scalar symbol map fails membership.
pub fn scalar_spec(target: &QuasiRealization) -> MappingConeSpec {
    let w = vec![ceye(1)];
    let mut l = RMat::zeros(target.dim(), 1);
    l.set_column(0, target.tau());
    MappingConeSpec::with_l(1, w.clone(), w, l).expect("scalar spec")
}

/// Generator permutation helpers for [`tridiagonal_lifting`].
pub fn generator_identity(m: usize) -> Vec<usize> {
    (0..m - 1).collect()
}

/// The reversal `j -> m-2-j` of the generator indices; the corresponding
/// quotient map lifts to a positive (decomposable) map but not to a
/// completely positive one.
pub fn generator_reversal(m: usize) -> Vec<usize> {
    (0..m - 1).rev().collect()
}

/// Swap of the last two generators, `(1)(23)` in one-based cycle notation
/// for `m = 4`; no positive lifting exists at all.
pub fn generator_swap_tail(m: usize) -> Vec<usize> {
    assert!(m >= 3);
    let mut p = generator_identity(m);
    p.swap(m - 3, m - 2);
    p
}

/// Lifting problem for permutation automorphisms of the tridiagonal
/// operator system: `W` is the tridiagonal Hermitians in `Herm(m)`, the
/// kernel is the traceless diagonals, and the quotient target permutes the
/// off-diagonal generator classes.
///
/// Returns the specification together with the target matrix in the basis
/// `{[I], [S_j], [A_j]}` (identity class, then symmetric, then antisymmetric
/// off-diagonal classes).
pub fn tridiagonal_lifting(m: usize, perm: &[usize]) -> Result<(MappingConeSpec, RMat), Error> {
    if m < 2 {
        return Err(Error::precondition("tridiagonal family needs m >= 2"));
    }
    if perm.len() != m - 1 {
        return Err(Error::precondition("permutation must act on m-1 generators"));
    }
    let mut seen = vec![false; m - 1];
    for &p in perm {
        if p >= m - 1 || seen[p] {
            return Err(Error::precondition("not a permutation of the generators"));
        }
        seen[p] = true;
    }
    let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
    let sym = |j: usize| {
        let mut s = CMat::zeros(m, m);
        s[(j, j + 1)] = Complex64::new(inv_sqrt2, 0.0);
        s[(j + 1, j)] = Complex64::new(inv_sqrt2, 0.0);
        s
    };
    let asym = |j: usize| {
        let mut a = CMat::zeros(m, m);
        a[(j, j + 1)] = Complex64::new(0.0, -inv_sqrt2);
        a[(j + 1, j)] = Complex64::new(0.0, inv_sqrt2);
        a
    };
    let mut w_raw: Vec<CMat> = Vec::new();
    for j in 0..m {
        let mut e = CMat::zeros(m, m);
        e[(j, j)] = C_ONE;
        w_raw.push(e);
    }
    for j in 0..m - 1 {
        w_raw.push(sym(j));
        w_raw.push(asym(j));
    }
    // Wt = complement of the traceless diagonals: identity plus every
    // off-diagonal direction.
    let mut wt_raw: Vec<CMat> = vec![ceye(m)];
    for i in 0..m {
        for j in (i + 1)..m {
            let mut s = CMat::zeros(m, m);
            s[(i, j)] = Complex64::new(inv_sqrt2, 0.0);
            s[(j, i)] = Complex64::new(inv_sqrt2, 0.0);
            wt_raw.push(s);
            let mut a = CMat::zeros(m, m);
            a[(i, j)] = Complex64::new(0.0, -inv_sqrt2);
            a[(j, i)] = Complex64::new(0.0, inv_sqrt2);
            wt_raw.push(a);
        }
    }
    // Quotient map rows: the orthonormal frame {I/sqrt(m), S_j, A_j}.
    let basis = HermBasis::new(m);
    let r = 2 * m - 1;
    let mut l = RMat::zeros(r, m * m);
    l.set_row(0, &basis.coords(&ceye(m).scale(1.0 / (m as f64).sqrt())).transpose());
    for j in 0..m - 1 {
        l.set_row(1 + j, &basis.coords(&sym(j)).transpose());
        l.set_row(m + j, &basis.coords(&asym(j)).transpose());
    }
    let spec = MappingConeSpec::with_l(m, w_raw, wt_raw, l)?;
    let mut d = RMat::zeros(r, r);
    d[(0, 0)] = 1.0;
    for (j, &pj) in perm.iter().enumerate() {
        d[(1 + pj, 1 + j)] = 1.0;
        d[(m + pj, m + j)] = 1.0;
    }
    Ok((spec, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hs_inner;
    use crate::quotient;

    #[test]
    fn representations_generate_identical_probabilities() {
        for (gamma, theta) in [(1.0, 1.0), (0.5, 1.0), (0.5, std::f64::consts::FRAC_PI_2)] {
            let p = FixtureParams::new(gamma, theta);
            let quasi = monitored_qubit_quasi(&p);
            let qubit = monitored_qubit_instrument(&p).as_quasi_realization();
            let two_model = two_qubit_cp(&p);
            let two_witness = two_model.witness.as_quasi_realization();
            let two = two_model.realization.as_quasi_realization();
            let ds = direct_sum_cp(&p);
            let dsq = ds.realization.as_quasi_realization();
            let dsa = ds.alternative.as_quasi_realization();
            for len in 0..=3usize {
                let reference = quasi.batch_probabilities(len);
                for other in [&qubit, &two_witness, &two, &dsq, &dsa] {
                    for ((w, a), (_, b)) in
                        reference.iter().zip(other.batch_probabilities(len).iter())
                    {
                        assert!(
                            (a - b).abs() < 1e-10,
                            "gamma={gamma} theta={theta} word {w}: {a} vs {b}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn two_qubit_subspaces_match_the_closures() {
        let model = two_qubit_cp(&FixtureParams::default());
        let big = model.witness.as_quasi_realization();
        let acc = quotient::accessible_subspace(&big, 1e-9);
        let obs = quotient::observable_subspace(&big, 1e-9);
        assert_eq!(acc.rank(), 10);
        assert_eq!(obs.rank(), 7);
        // The written-out bases span exactly the computed closures.
        let basis = HermBasis::new(4);
        for w in &model.spec.w {
            let v = basis.coords(w);
            assert!((acc.project(&v) - &v).norm() < 1e-9, "W element outside closure");
        }
        for wt in &model.spec.wt {
            let v = basis.coords(wt);
            assert!((obs.project(&v) - &v).norm() < 1e-9, "Wt element outside closure");
        }
        assert_eq!(model.spec.w.len(), 10);
        assert_eq!(model.spec.wt.len(), 7);
        assert_eq!(model.spec.k.len(), 6);
        assert_eq!(model.spec.g.len(), 4);
    }

    #[test]
    fn two_qubit_quotient_reproduces_the_quasi_matrices_exactly() {
        let p = FixtureParams::default();
        let model = two_qubit_cp(&p);
        let target = monitored_qubit_quasi(&p);
        let basis = HermBasis::new(4);
        // L E(a) omega_nu = D(a) L omega_nu for the frame elements.
        for a in 0..6 {
            for (nu, om) in model.omega.iter().enumerate() {
                let img = model.witness.instrument.maps[a].apply(om);
                let lhs = &model.l * basis.coords(&img);
                let rhs = target.map(a).column(nu).into_owned();
                assert!(
                    (lhs - rhs).norm() < 1e-10,
                    "symbol {a} frame element {nu}"
                );
            }
        }
    }

    #[test]
    fn stationary_states_are_maximally_mixed() {
        let p = FixtureParams::default();
        let two = two_qubit_cp(&p).witness;
        assert!((&two.rho - ceye(4).scale(0.25)).norm() < 1e-9);
        assert!((hs_inner(&two.rho, &two.identity) - 1.0).abs() < 1e-12);
        let ds = direct_sum_cp(&p).realization;
        let (rho, unique) =
            stationary_state(&ds.instrument.total(), &ds.identity, 1e-9).unwrap();
        assert!(unique);
        assert!((rho - ceye(4).scale(0.25)).norm() < 1e-9);
    }

    #[test]
    fn direct_sum_subspace_is_preserved() {
        // W = {Y (+) Phi(Y)} must be invariant under all six maps.
        let ds = direct_sum_cp(&FixtureParams::default());
        let basis2 = HermBasis::new(2);
        for model in [&ds.realization, &ds.alternative] {
            for map in &model.instrument.maps {
                for mu in 0..4 {
                    let y = basis2.element(mu);
                    let w = block_diag(y, &spin_flip(y));
                    let img = map.apply(&w);
                    let top = img.view((0, 0), (2, 2)).into_owned();
                    let bottom = img.view((2, 2), (2, 2)).into_owned();
                    assert!(
                        (bottom - spin_flip(&top)).norm() < 1e-12,
                        "spin-flip pairing broken"
                    );
                    assert!(img.view((0, 2), (2, 2)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn fixture_instruments_are_unital() {
        let p = FixtureParams::default();
        let ds = direct_sum_cp(&p);
        for model in [
            monitored_qubit_instrument(&p),
            two_qubit_cp(&p).realization,
            ds.realization,
            ds.alternative,
        ] {
            let resid = (model.instrument.total().apply(&model.identity) - &model.identity).norm();
            assert!(resid < 1e-10, "unitality residual {resid:.3e}");
        }
        // The two-qubit witness family misses unitality by exactly the
        // kernel element (gamma/2) sigma_3 (x) sigma_3.
        let w = two_qubit_cp(&p).witness;
        let defect = w.instrument.total().apply(&w.identity) - &w.identity;
        let expected = kron(&pauli(3), &pauli(3)).scale(-p.gamma / 2.0);
        assert!((defect - expected).norm() < 1e-12);
    }

    #[test]
    fn zero_angle_rotations_are_scaled_identities() {
        let r = monitored_qubit_quasi(&FixtureParams::new(0.5, 0.0));
        for sym in ["x", "y", "z"] {
            let a = r.alphabet().index_of(sym).unwrap();
            let expect = RMat::identity(4, 4) * (0.5 / 6.0);
            assert!((r.map(a) - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn tridiagonal_spec_dimensions() {
        let (spec, d) = tridiagonal_lifting(4, &generator_swap_tail(4)).unwrap();
        assert_eq!(spec.w.len(), 10);
        assert_eq!(spec.k.len(), 3);
        assert_eq!(spec.g.len(), 7);
        assert_eq!(spec.target_dim(), 7);
        assert!(spec.proximinal);
        assert_eq!(d.nrows(), 7);
        // The identity permutation produces the identity target.
        let (_, d_id) = tridiagonal_lifting(4, &generator_identity(4)).unwrap();
        assert!((d_id - RMat::identity(7, 7)).norm() < 1e-14);
        assert!(tridiagonal_lifting(4, &[0, 0, 1]).is_err());
    }

    #[test]
    fn stability_dimension_matches_closed_form() {
        let model = two_qubit_cp(&FixtureParams::default());
        let (rank, expected) = model.spec.stability_subspace_dim();
        assert_eq!(rank, expected);
        let (spec, _) = tridiagonal_lifting(4, &generator_identity(4)).unwrap();
        let (rank, expected) = spec.stability_subspace_dim();
        assert_eq!(rank, expected);
    }
}
