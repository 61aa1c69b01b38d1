//! Cross-module integration tests: cone duality, mapping-cone witnesses,
//! the structural properties behind the certificate, and statistical checks of
//! the learning stack.

use fincor::catalog::{self, FixtureParams};
use fincor::cones::{projection_structure_check, rank_one_structure_check};
use fincor::feasibility::{FeasibilityOutcome, SolverConfig, Start};
use fincor::learning::{empirical_table, sample_trajectories, WordTable};
use fincor::linalg::{hs_inner, kron, CMat, RMat, RVec};
use fincor::operators::{from_choi, ChoiMatrix, HermBasis, SuperOperator};
use fincor::process::Word;
use fincor::quotient;
use fincor::reduction::cesaro_limit;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn params() -> FixtureParams {
    FixtureParams::new(0.5, 1.0)
}

fn cfg() -> SolverConfig {
    SolverConfig {
        max_iter: 100_000,
        ..SolverConfig::default()
    }
}

/// Mapping-cone witnesses preserve the subspace pair: `F(W) <= W`,
/// `F(K) <= K`, and the dual side `F*(Wt) <= Wt` on the fixture.
#[test]
fn mapping_cone_witness_structure() {
    let p = params();
    let model = catalog::two_qubit_cp(&p);
    let target = catalog::monitored_qubit_quasi(&p);
    let spec = &model.spec;
    let basis = HermBasis::new(4);
    let d = target.map(2); // the x rotation
    let start = spec.order_unit_start(d, &cfg()).unwrap_or(Start::Default);
    let out = spec.mapping_cone_membership(d, &cfg(), start).unwrap();
    let choi = out.witness().expect("feasible").clone();
    let f = from_choi(&ChoiMatrix { n: 4, mat: choi });

    let proj = |span: &[CMat], x: &CMat| -> CMat {
        let mut out = CMat::zeros(4, 4);
        for s in span {
            out += s.scale(hs_inner(s, x));
        }
        out
    };
    let mut w_resid = 0.0f64;
    for w in &spec.w {
        let img = f.apply(w);
        w_resid = w_resid.max((proj(&spec.w, &img) - &img).norm());
    }
    assert!(w_resid < 1e-7, "F(W) escapes W by {w_resid:.3e}");
    let mut k_resid = 0.0f64;
    for k in &spec.k {
        let img = f.apply(k);
        k_resid = k_resid.max((proj(&spec.k, &img) - &img).norm());
    }
    assert!(k_resid < 1e-7, "F(K) escapes K by {k_resid:.3e}");
    let fd = f.adjoint();
    let mut wt_resid = 0.0f64;
    for wt in &spec.wt {
        let img = fd.apply(wt);
        wt_resid = wt_resid.max((proj(&spec.wt, &img) - &img).norm());
    }
    assert!(wt_resid < 1e-7, "F*(Wt) escapes Wt by {wt_resid:.3e}");
    // The quotient is reproduced.
    for g in &spec.g {
        let lhs = &spec.l * basis.coords(&f.apply(g));
        let rhs = d * (&spec.l * basis.coords(g));
        assert!((lhs - rhs).norm() < 1e-7);
    }
}

/// Duality consistency: pairings of feasible cone points with feasible dual
/// functionals are nonnegative.
#[test]
fn cone_duality_pairings_are_nonnegative() {
    let model = catalog::two_qubit_cp(&params());
    let spec = &model.spec;
    let cone = spec.cone();
    let basis = HermBasis::new(4);
    let mut rng = StdRng::seed_from_u64(21);
    let e = cone.order_unit(&cfg()).expect("order unit");
    let mut samples_x = Vec::new();
    let mut samples_f = Vec::new();
    for _ in 0..6 {
        // PSD element of W: order unit plus damped random span element.
        let mut pert = CMat::zeros(4, 4);
        for w in &spec.w {
            pert += w.scale(rng.random::<f64>() - 0.5);
        }
        let lmin = fincor::linalg::lambda_min(&(&e + &pert));
        let scale = if lmin < 0.0 { (0.45 / -lmin).min(1.0) } else { 1.0 };
        let x_op = &e + pert.scale(scale);
        samples_x.push(cone.apply_l(&x_op));
        // PSD element of Wt + W_perp similarly.
        let mut pert = CMat::zeros(4, 4);
        for y in &spec.dual_domain {
            pert += y.scale(rng.random::<f64>() - 0.5);
        }
        let lmin = fincor::linalg::lambda_min(&(fincor::linalg::ceye(4) + &pert));
        let scale = if lmin < 0.0 { (0.45 / -lmin).min(1.0) } else { 1.0 };
        let y_op = fincor::linalg::ceye(4) + pert.scale(scale);
        samples_f.push(spec.apply_dual(&y_op));
    }
    for x in &samples_x {
        // Sanity: the construction really is in the cone.
        assert!(cone.membership(x, &cfg(), Start::Default).unwrap().is_feasible());
        for f in &samples_f {
            let pairing = f.dot(x);
            assert!(pairing >= -1e-9, "dual pairing {pairing:.3e} negative");
        }
    }
    for f in &samples_f {
        assert!(spec.dual_membership(f, &cfg(), Start::Default).unwrap().is_feasible());
    }
    let _ = basis;
}

/// Level-2 membership restricts to level-1 membership on the corner block.
#[test]
fn level_monotonicity_on_corner_blocks() {
    let cone = catalog::psd_cone_direct();
    let b2 = HermBasis::new(2);
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..5 {
        // Random PSD element of Herm(2) (x) Herm(2) = Herm(4).
        let raw = CMat::from_fn(4, 4, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let y = &raw * raw.adjoint();
        let b4 = HermBasis::new(4);
        let mut x = RVec::zeros(16);
        for mu in 0..4 {
            for j in 0..4 {
                x[mu * 4 + j] = hs_inner(&kron(b2.element(mu), b2.element(j)), &y);
            }
        }
        let _ = b4;
        assert!(cone
            .extension_membership(2, &x, &cfg(), Start::Default)
            .unwrap()
            .is_feasible());
        // Corner block (1 (x) <0|) Y (1 (x) |0>) in V coordinates.
        let mut corner = RVec::zeros(4);
        for mu in 0..4 {
            for j in 0..4 {
                corner[mu] += x[mu * 4 + j] * b2.element(j)[(0, 0)].re;
            }
        }
        assert!(cone
            .membership(&corner, &cfg(), Start::Default)
            .unwrap()
            .is_feasible());
    }
}

/// Rank-one elements of the mapping cone are exactly the products of cone
/// and dual-cone elements, on the two-qubit specification.
#[test]
fn rank_one_elements_of_two_qubit_spec() {
    let p = params();
    let model = catalog::two_qubit_cp(&p);
    let target = catalog::monitored_qubit_quasi(&p);
    let check =
        rank_one_structure_check(&model.spec, target.tau(), target.pi(), &cfg()).unwrap();
    assert_eq!(check.consistent, Some(true));
    assert!(check.mapping.is_feasible(), "tau (x) pi must be a member");
    // A vector outside the cone: tau with the wrong sign.
    let bad = -target.tau().clone();
    let check = rank_one_structure_check(&model.spec, &bad, target.pi(), &cfg()).unwrap();
    assert_eq!(check.consistent, Some(true));
    assert!(!check.mapping.is_feasible());
}

/// Sampled projection/containment checks pass for genuine mapping-cone
/// members and catch the transpose at level 2.
#[test]
fn projection_structure_detects_transpose_at_level_two() {
    let spec = catalog::qubit_full_spec();
    // The identity map is a member; its quotient in the fixed coordinates
    // is the identity matrix.
    let id = RMat::identity(4, 4);
    // Bell projector block vector as a level-2 probe.
    let b2 = HermBasis::new(2);
    let mut bell = CMat::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            bell[(i * 2 + i, j * 2 + j)] = Complex64::new(0.5, 0.0);
        }
    }
    let mut probe = RVec::zeros(16);
    for mu in 0..4 {
        for j in 0..4 {
            probe[mu * 4 + j] = hs_inner(&kron(b2.element(mu), b2.element(j)), &bell);
        }
    }
    let ok = projection_structure_check(&spec, &[id], &[probe.clone()], 2, 11, &cfg()).unwrap();
    assert!(ok.pass, "{ok:?}");
    // The transpose map is positive (level-1 safe) but fails on the
    // entangled level-2 probe.
    let mut transpose = RMat::identity(4, 4);
    transpose[(2, 2)] = -1.0;
    let bad =
        projection_structure_check(&spec, &[transpose], &[probe], 2, 11, &cfg()).unwrap();
    assert_eq!(bad.level1_failures, 0, "transpose is positive at level 1");
    assert!(bad.level2_failures > 0, "{bad:?}");
}

/// Completely positive maps never trigger the sampled positivity heuristic.
#[test]
fn cp_maps_pass_sampled_positivity() {
    let mut rng = StdRng::seed_from_u64(31);
    for n in [2usize, 3] {
        for trial in 0..4 {
            let kraus: Vec<CMat> = (0..2)
                .map(|_| {
                    CMat::from_fn(n, n, |_, _| {
                        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
                    })
                })
                .collect();
            let f = SuperOperator::from_kraus(&kraus).unwrap();
            let (cp, lmin) = f.is_completely_positive(1e-9);
            assert!(cp, "Kraus map must be CP, got {lmin:.3e}");
            let (pos, worst) = f.is_positive_sampled(60, 1000 + trial);
            assert!(pos, "n={n} trial={trial} worst {worst:.3e}");
        }
    }
}

/// Any similarity embedding of a fixture keeps the quotient isomorphic.
#[test]
fn random_similarities_have_isomorphic_quotients() {
    let r = catalog::monitored_qubit_quasi(&params());
    let mut rng = StdRng::seed_from_u64(17);
    for _ in 0..20 {
        let mut t = RMat::from_fn(4, 4, |_, _| rng.random::<f64>() - 0.5);
        for i in 0..4 {
            t[(i, i)] += 2.0;
        }
        let moved = r.similarity_transform(&t).unwrap();
        let iso = quotient::equivalence_isomorphism(&r, &moved, 1e-8).unwrap();
        assert!(iso.found);
        assert!(iso.residuals.unwrap().max() < 1e-8);
    }
}

/// Empirical frequencies converge to the exact probabilities at the
/// binomial rate.
#[test]
fn sampling_consistency_at_1e5_steps() {
    let p = params();
    let model = catalog::two_qubit_cp(&p).realization;
    let exact = catalog::monitored_qubit_quasi(&p);
    let count = 20usize;
    let len = 5_000usize;
    let trajectories = sample_trajectories(&model, len, count, 4242).unwrap();
    let table = empirical_table(&trajectories, exact.alphabet(), 2).unwrap();
    let windows_1 = (count * len) as f64;
    for (w, p_exact) in exact.batch_probabilities(1) {
        let freq = table.get(&w).unwrap_or(0.0);
        let sigma = (p_exact * (1.0 - p_exact) / windows_1).sqrt().max(1.0 / windows_1);
        assert!(
            (freq - p_exact).abs() <= 4.0 * sigma,
            "word {w}: freq {freq:.5} vs exact {p_exact:.5} (sigma {sigma:.2e})"
        );
    }
}

/// Length-1 empirical frequencies of the instrument match the closed-form
/// symbol distribution.
#[test]
fn sampled_symbol_frequencies_match_closed_form() {
    let p = params(); // gamma = 0.5
    let model = catalog::two_qubit_cp(&p).realization;
    let trajectories = sample_trajectories(&model, 2_000, 10, 7).unwrap();
    let table = empirical_table(&trajectories, model.alphabet(), 1).unwrap();
    let expect = [1.0 / 8.0, 1.0 / 8.0, 1.0 / 12.0, 1.0 / 12.0, 1.0 / 12.0, 0.5];
    let n = 20_000f64;
    for (a, e) in expect.iter().enumerate() {
        let freq = table.get(&Word::new(vec![a])).unwrap_or(0.0);
        let sigma = (e * (1.0 - e) / n).sqrt();
        assert!(
            (freq - e).abs() <= 4.0 * sigma,
            "symbol {a}: {freq:.5} vs {e:.5}"
        );
    }
}

/// The decomposable relaxation certifies a positive lifting for the
/// generator reversal, whose completely positive lifting is infeasible.
#[test]
fn reversal_lifting_positive_but_not_cp() {
    let (spec, d) = catalog::tridiagonal_lifting(4, &catalog::generator_reversal(4)).unwrap();
    let config = SolverConfig {
        max_iter: 50_000,
        stall_rel_change: 1e-8,
        ..SolverConfig::default()
    };
    let cp = spec
        .mapping_cone_membership(&d, &config, Start::Random(3))
        .unwrap();
    assert!(cp.is_infeasible(), "CP lifting reported {}", cp.status_word());

    let dec = spec
        .decomposable_membership(&d, &config, Start::Default)
        .unwrap();
    let FeasibilityOutcome::Feasible { witness, .. } = &dec else {
        panic!("decomposable lifting reported {}", dec.status_word());
    };
    // The witness is a positive map lifting the reversal: spot-check that it
    // maps a PSD tridiagonal matrix to a PSD matrix.
    let f = from_choi(&ChoiMatrix {
        n: 4,
        mat: witness.clone(),
    });
    let mut tri = CMat::zeros(4, 4);
    for i in 0..4 {
        tri[(i, i)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..3 {
        tri[(i, i + 1)] = Complex64::new(0.4, 0.1);
        tri[(i + 1, i)] = Complex64::new(0.4, -0.1);
    }
    assert!(fincor::linalg::lambda_min(&tri) > 0.0, "probe is PSD");
    let img = f.apply(&tri);
    assert!(
        fincor::linalg::lambda_min(&img) > -1e-7,
        "positive lifting maps PSD to PSD"
    );
}

/// Cesaro limits average out rotating peripheral spectrum.
#[test]
fn cesaro_limit_with_rotating_block() {
    // Two-dimensional space; the channel scales by 2 and rotates the
    // off-diagonal phase, so the peripheral spectrum is 2*{1, e^{+-ia}}.
    let alpha = 0.9f64;
    let u = CMat::from_fn(2, 2, |i, j| {
        if i != j {
            Complex64::new(0.0, 0.0)
        } else if i == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, alpha)
        }
    });
    let chan = SuperOperator::conjugation(&u).scale(2.0);
    let x = {
        let mut m = fincor::linalg::ceye(2);
        m[(0, 1)] = Complex64::new(0.3, 0.1);
        m[(1, 0)] = Complex64::new(0.3, -0.1);
        m
    };
    let (lam, omega) = cesaro_limit(&chan, &x, 1e-9).unwrap();
    assert!((lam - 2.0).abs() < 1e-9);
    // The rotating off-diagonal part averages out; the diagonal stays.
    assert!(omega[(0, 1)].norm() < 1e-9);
    assert!((omega[(0, 0)].re - 1.0).abs() < 1e-9);
    assert!((omega[(1, 1)].re - 1.0).abs() < 1e-9);
}

/// Random restarts reach the same feasibility verdict on the structured
/// lifting problems.
#[test]
fn mapping_cone_verdicts_are_start_independent() {
    let p = params();
    let model = catalog::two_qubit_cp(&p);
    let target = catalog::monitored_qubit_quasi(&p);
    let d = target.map(5); // the spin-flip symbol, the interesting lift
    for seed in [1u64, 2] {
        let out = model
            .spec
            .mapping_cone_membership(d, &cfg(), Start::Random(seed))
            .unwrap();
        assert!(out.is_feasible(), "seed {seed}: {}", out.status_word());
    }
}

/// Negative and degenerate certificate variants.
#[test]
fn certificate_variants() {
    use fincor::cones::{cprp_certificate, CertificateStatus};
    use fincor::reduction::ReductionConfig;
    let red = ReductionConfig::default();
    // The full qubit operator space with the Pauli-frame quotient: every
    // symbol map is pinned to a unique lift, so the certificate passes
    // exactly when all maps are completely positive (gamma = 1).
    let spec = catalog::qubit_full_spec();
    let target = catalog::monitored_qubit_quasi(&FixtureParams::new(1.0, 1.0));
    let report = cprp_certificate(&target, &spec, &cfg(), &red).unwrap();
    assert_eq!(report.status, CertificateStatus::Passed);
    let real = report.realization.expect("qubit realization");
    assert_eq!(real.n(), 2);
    for len in 0..=3usize {
        for (w, p) in target.batch_probabilities(len) {
            assert!((real.word_probability(&w).unwrap() - p).abs() < 1e-7);
        }
    }
    // At gamma < 1 the pinned lift of the spin-flip symbol is not CP.
    let target = catalog::monitored_qubit_quasi(&FixtureParams::new(0.5, 1.0));
    let report = cprp_certificate(&target, &spec, &cfg(), &red).unwrap();
    match report.status {
        CertificateStatus::Failed { ref condition } => {
            assert!(condition.contains("\"t\""), "failing condition: {condition}")
        }
        ref other => panic!("expected failure, got {other:?}"),
    }
    // A scalar specification is too small to carry any non-scalar map.
    let tiny = catalog::scalar_spec(&target);
    let report = cprp_certificate(&target, &tiny, &cfg(), &red).unwrap();
    match report.status {
        CertificateStatus::Failed { ref condition } => {
            assert!(condition.contains("mapping cone"), "{condition}")
        }
        ref other => panic!("expected failure, got {other:?}"),
    }
}

/// The two PSD-cone representations agree at level 1 on random rays.
#[test]
fn cone_representations_agree_at_level_one() {
    let direct = catalog::psd_cone_direct();
    let flipped = catalog::psd_cone_spin_flip();
    let mut rng = StdRng::seed_from_u64(77);
    let mut agreements = 0;
    for _ in 0..100 {
        let x = RVec::from_fn(4, |_, _| rng.random::<f64>() - 0.5);
        // Closed form: x is in the cone iff x0 >= |x_vec| in these
        // coordinates.
        let radial = (x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).sqrt();
        if (x[0] - radial).abs() < 1e-3 {
            continue; // skip near-boundary rays
        }
        let expect = x[0] >= radial;
        let a = direct.membership(&x, &cfg(), Start::Default).unwrap();
        let b = flipped.membership(&x, &cfg(), Start::Default).unwrap();
        assert_eq!(a.is_feasible(), expect, "direct representation vs closed form");
        assert_eq!(b.is_feasible(), expect, "flipped representation vs closed form");
        agreements += 1;
    }
    assert!(agreements >= 90);
}

/// Sampled containment checks pass for a genuine witness of the two-qubit
/// specification.
#[test]
fn projection_structure_on_two_qubit_spec() {
    let p = params();
    let model = catalog::two_qubit_cp(&p);
    let target = catalog::monitored_qubit_quasi(&p);
    // The quotient of the measurement map is a genuine member.
    let witness = target.map(0).clone();
    let ok = projection_structure_check(&model.spec, &[witness], &[], 2, 3, &cfg()).unwrap();
    assert!(ok.pass, "{ok:?}");
}

/// Exact tables are normalized and two-sided stationary; empirical tables
/// approximately so.
#[test]
fn table_normalization_and_stationarity() {
    let r = catalog::monitored_qubit_quasi(&params());
    let table = WordTable::exact(&r, 4);
    for len in 0..=4usize {
        assert!((table.length_sum(len) - 1.0).abs() < 1e-10);
    }
    for len in 0..=2usize {
        for (w, p) in r.batch_probabilities(len) {
            let mut left = 0.0;
            let mut right = 0.0;
            for a in 0..r.alphabet().len() {
                left += table.get(&w.prepend(a)).unwrap();
                right += table.get(&w.append(a)).unwrap();
            }
            assert!((left - p).abs() < 1e-10, "left stationarity at {w}");
            assert!((right - p).abs() < 1e-10, "right stationarity at {w}");
        }
    }
}
