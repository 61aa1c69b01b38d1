//! Verification of instrument realizations and the reduction of feasibility
//! witnesses to proper realizations.
//!
//! Feasibility witnesses come as completely positive maps together with a
//! PSD pair `(rho, I)` that reproduces the word probabilities but is not yet
//! a realization: neither element needs to be a fixed point of the symbol-map
//! sum. The reduction repeatedly extracts the leading growth rate of the
//! orbit of `I` (a Cesaro mean, computed spectrally), sieves out the
//! corresponding eigenvector by a hereditary compression when it grows
//! faster than the probabilities, then does the same on the dual side with
//! `rho`, and finally restricts to the range of `I` and renormalizes so the
//! instrument becomes unital with a stationary PSD state.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Error;
use crate::linalg::{ceye, herm_fn, hs_inner, lambda_min, psd_clip, CMat, RMat, RVec};
use crate::operators::{CPRealization, HermBasis, QuantumInstrument, SuperOperator};
use crate::process::QuasiRealization;

/// Verification report for an instrument realization.
#[derive(Debug, Clone, Serialize)]
pub struct CpReport {
    /// Per-symbol smallest Choi eigenvalue with the CP verdict.
    pub symbol_cp: Vec<(String, bool, f64)>,
    pub unitality_residual: f64,
    pub rho_lambda_min: f64,
    pub stationarity_residual: f64,
    pub trace_pairing_residual: f64,
    pub tol: f64,
}

impl CpReport {
    pub fn passed(&self) -> bool {
        self.symbol_cp.iter().all(|(_, ok, _)| *ok)
            && self.unitality_residual <= self.tol
            && self.rho_lambda_min >= -self.tol
            && self.stationarity_residual <= self.tol
            && self.trace_pairing_residual <= self.tol
    }
}

/// Check each symbol map for complete positivity, the sum for unitality
/// against the reference element, and the state for stationarity.
pub fn verify_cp_realization(q: &CPRealization, tol: f64) -> CpReport {
    let total = q.instrument.total();
    let symbol_cp = q
        .instrument
        .maps
        .iter()
        .enumerate()
        .map(|(a, m)| {
            let (ok, lmin) = m.is_completely_positive(tol);
            (q.alphabet().label(a).to_string(), ok, lmin)
        })
        .collect();
    let unitality_residual =
        (total.apply(&q.identity) - &q.identity).norm() / q.identity.norm().max(1.0);
    let rho_lambda_min = lambda_min(&q.rho);
    let stationarity_residual =
        (total.adjoint().apply(&q.rho) - &q.rho).norm() / q.rho.norm().max(1.0);
    let trace_pairing_residual = (hs_inner(&q.rho, &q.identity) - 1.0).abs();
    CpReport {
        symbol_cp,
        unitality_residual,
        rho_lambda_min,
        stationarity_residual,
        trace_pairing_residual,
        tol,
    }
}

/// Report for the quotient relation between an instrument realization and a
/// quasi-realization under a projection `L`.
#[derive(Debug, Clone, Serialize)]
pub struct QuotientRelationReport {
    /// Per-symbol residual of `L o E(a) = D(a) o L` on the accessible span.
    pub intertwine_residuals: Vec<f64>,
    pub tau_residual: f64,
    pub pi_residual: f64,
    /// Norm of `L` on the kernel `K`; nonzero values are a violation.
    pub kernel_violation: f64,
    pub tol: f64,
}

impl QuotientRelationReport {
    pub fn passed(&self) -> bool {
        self.intertwine_residuals.iter().all(|&r| r <= self.tol)
            && self.tau_residual <= self.tol
            && self.pi_residual <= self.tol
            && self.kernel_violation <= self.tol
    }
}

/// Verify `L o E(a)|_W = D(a) o L`, `tau = L(I)` and `pi o L = rho|_W`,
/// where `W` is the accessible subspace of the instrument realization.
pub fn verify_quotient_relation(
    q: &CPRealization,
    r: &QuasiRealization,
    l: &RMat,
    tol: f64,
) -> Result<QuotientRelationReport, Error> {
    let nn = q.n() * q.n();
    if l.nrows() != r.dim() || l.ncols() != nn {
        return Err(Error::structural("projection matrix has wrong shape"));
    }
    let big = q.as_quasi_realization();
    let acc = crate::quotient::accessible_subspace(&big, 1e-9);
    let obs = crate::quotient::observable_subspace(&big, 1e-9);
    let obs_perp = crate::linalg::orthonormal_complement(&obs.basis, nn);
    let (kernel, _) = crate::linalg::subspace_intersection(&acc.basis, &obs_perp, 1e-9);
    let kernel_violation = if kernel.ncols() > 0 {
        (l * &kernel).norm() / l.norm().max(1.0)
    } else {
        0.0
    };
    let mut intertwine = Vec::with_capacity(r.alphabet().len());
    for a in 0..r.alphabet().len() {
        let lhs = l * (&big.map(a).clone() * &acc.basis);
        let rhs = r.map(a) * (l * &acc.basis);
        intertwine.push((lhs - rhs).norm() / big.map(a).norm().max(1.0));
    }
    let tau_residual = (l * big.tau() - r.tau()).norm() / r.tau().norm().max(1.0);
    // pi o L = rho|_W: compare <rho, w> with pi . L(w) on the accessible basis.
    let mut pi_residual = 0.0f64;
    for c in 0..acc.basis.ncols() {
        let w = acc.basis.column(c).into_owned();
        let lhs = r.pi().dot(&(l * &w));
        let rhs = big.pi().dot(&w);
        pi_residual = pi_residual.max((lhs - rhs).abs());
    }
    Ok(QuotientRelationReport {
        intertwine_residuals: intertwine,
        tau_residual,
        pi_residual,
        kernel_violation,
        tol,
    })
}

/// One step of a reduction trace.
#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub kind: StepKind,
    /// Leading eigenvalue involved in the step, when applicable.
    pub lambda: Option<f64>,
    /// Hilbert dimensions removed by the step.
    pub removed_dim: usize,
    /// Hilbert dimension after the step.
    pub hilbert_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepKind {
    Cesaro,
    Sieve,
    DualCesaro,
    DualSieve,
    Restrict,
    Normalize,
}

/// Ordered log of the reduction.
#[derive(Debug, Clone, Serialize, Default)]
pub struct ReductionTrace {
    /// Scale applied to `rho` on entry so that `tr[rho I] = 1`.
    pub input_scale: f64,
    pub steps: Vec<TraceStep>,
}

impl ReductionTrace {
    pub fn sieve_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s.kind, StepKind::Sieve | StepKind::DualSieve))
            .count()
    }

    /// Hilbert dimension never increases along a trace.
    pub fn dims_non_increasing(&self) -> bool {
        self.steps
            .windows(2)
            .all(|w| w[1].hilbert_dim <= w[0].hilbert_dim)
    }
}

/// Configuration of the reduction loop.
#[derive(Debug, Clone)]
pub struct ReductionConfig {
    pub tol: f64,
    /// Half-width of the eigenvalue cluster treated as 1.
    pub lambda_one_tol: f64,
    pub max_rounds: usize,
    /// Validate probability preservation after every trace step (words up
    /// to length 4); intended for tests.
    pub validate_steps: bool,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        ReductionConfig {
            tol: 1e-9,
            lambda_one_tol: 1e-8,
            max_rounds: 64,
            validate_steps: false,
        }
    }
}

/// Growth rate and Cesaro limit of the orbit `E^k(X)`.
///
/// `lambda` is the largest eigenvalue modulus of the channel visible from
/// `X`, and `omega` is the spectral projection of `X` onto the eigenspace of
/// the real positive eigenvalue of that modulus (rotating peripheral parts
/// average out under the Cesaro mean and are dropped). The returned `omega`
/// is PSD within `tol` (eigen-clipped) and satisfies `E(omega) = lambda omega`.
pub fn cesaro_limit(
    channel: &SuperOperator,
    x: &CMat,
    tol: f64,
) -> Result<(f64, CMat), Error> {
    let basis = HermBasis::new(channel.n);
    let coords = basis.coords(x);
    let xnorm = coords.norm();
    if xnorm <= 1e-300 {
        return Err(Error::precondition("cesaro limit of the zero operator"));
    }
    let nn = channel.n * channel.n;
    if nn == 1 {
        let lam = channel.mat[(0, 0)];
        return Ok((lam, x.clone()));
    }
    let eigs = channel.mat.clone().complex_eigenvalues();
    // Cluster eigenvalues (upper half plane representatives; complex pairs
    // are handled with real quadratic factors).
    let scale = eigs.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1.0);
    let ctol = 1e-8 * scale;
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for z in eigs.iter() {
        let zz = if z.im < 0.0 { z.conj() } else { *z };
        if z.im < -ctol {
            continue; // counted through the conjugate partner
        }
        match clusters.iter_mut().find(|(rep, _)| (*rep - zz).norm() <= ctol) {
            Some((_, mult)) => *mult += 1,
            None => clusters.push((zz, 1)),
        }
    }
    // Projection of x onto each cluster via annihilating polynomial filters.
    let project = |target: usize| -> RVec {
        let (lam_t, _) = clusters[target];
        let mut y = coords.clone();
        for (idx, &(mu, mult)) in clusters.iter().enumerate() {
            if idx == target {
                continue;
            }
            for _ in 0..mult {
                if mu.im.abs() <= ctol {
                    // (A - mu) / (lam_t - mu), real factor.
                    let denom = lam_t.re - mu.re;
                    if denom.abs() < 1e-14 * scale {
                        y.fill(0.0);
                        return y;
                    }
                    y = (&channel.mat * &y - &y * mu.re) / denom;
                } else {
                    // Quadratic real factor for the conjugate pair.
                    let b = 2.0 * mu.re;
                    let c = mu.norm_sqr();
                    let denom = lam_t.re * lam_t.re - b * lam_t.re + c;
                    if denom.abs() < 1e-14 * scale * scale {
                        y.fill(0.0);
                        return y;
                    }
                    let ay = &channel.mat * &y;
                    let aay = &channel.mat * &ay;
                    y = (aay - ay * b + &y * c) / denom;
                }
            }
        }
        y
    };
    // Visible clusters, by descending modulus; find the real positive one at
    // the top visible modulus (rotating tops Cesaro-average to zero).
    let mut order: Vec<usize> = (0..clusters.len()).collect();
    order.sort_by(|&i, &j| {
        clusters[j]
            .0
            .norm()
            .partial_cmp(&clusters[i].0.norm())
            .unwrap()
    });
    let vis_tol = 1e-9 * xnorm;
    for &idx in &order {
        let (rep, _) = clusters[idx];
        if rep.im.abs() > ctol || rep.re <= ctol {
            continue;
        }
        let proj = project(idx);
        if proj.norm() <= vis_tol {
            continue;
        }
        // Anything visible at a strictly larger modulus must be rotating
        // only; those parts vanish in the Cesaro mean, so this cluster
        // carries the limit.
        let lam = rep.re;
        let omega_raw = basis.matrix(&proj);
        let lmin = lambda_min(&omega_raw);
        let onorm = omega_raw.norm().max(1e-300);
        if lmin < -tol.max(1e-8) * onorm {
            return Err(Error::precondition(format!(
                "cesaro limit is not positive semidefinite (lambda_min = {lmin:.3e}); \
                 the leading eigenspace may be defective"
            )));
        }
        let omega = psd_clip(&omega_raw);
        let eig_res = (channel.apply(&omega) - omega.scale(lam)).norm() / onorm;
        if eig_res > (tol * 1e3).max(1e-6) {
            return Err(Error::precondition(format!(
                "cesaro projection is not an eigenvector (residual {eig_res:.3e})"
            )));
        }
        return Ok((lam, omega));
    }
    Err(Error::precondition(
        "no visible real positive eigenvalue in the orbit of the reference element",
    ))
}

/// Compress all data to the kernel of a spurious eigenvector.
///
/// `omega` must be a PSD eigenvector of the symbol-map sum with
/// `tr[rho omega] = 0`; everything is conjugated by the isometry onto
/// `ker(omega)`, preserving all word probabilities.
pub fn remove_spurious_eigenvector(
    maps: &[SuperOperator],
    rho: &CMat,
    identity: &CMat,
    omega: &CMat,
    tol: f64,
) -> Result<(Vec<SuperOperator>, CMat, CMat, usize), Error> {
    let n = rho.nrows();
    let onorm = omega.norm().max(1e-300);
    let lmin = lambda_min(omega);
    if lmin < -tol.max(1e-9) * onorm {
        return Err(Error::precondition(format!(
            "omega is not positive semidefinite (lambda_min = {lmin:.3e})"
        )));
    }
    let pairing = hs_inner(rho, omega).abs();
    if pairing > (tol * 1e3).max(1e-7) * rho.norm().max(1.0) * onorm {
        return Err(Error::precondition(format!(
            "tr[rho omega] = {pairing:.3e} is not zero; omega is not spurious"
        )));
    }
    // Eigenvector check against the sum.
    let mut total = SuperOperator::zero(maps[0].n);
    for m in maps {
        total = total.add(m);
    }
    let eomega = total.apply(omega);
    let lam = hs_inner(omega, &eomega) / hs_inner(omega, omega);
    if (total.apply(omega) - omega.scale(lam)).norm() > (tol * 1e3).max(1e-6) * onorm {
        return Err(Error::precondition(
            "omega is not an eigenvector of the symbol-map sum",
        ));
    }
    let v = crate::linalg::kernel_isometry(omega, 1e-10 * onorm);
    let s = v.ncols();
    if s == 0 {
        return Err(Error::precondition(
            "omega is strictly positive; its kernel is trivial",
        ));
    }
    let compress = |m: &SuperOperator| -> SuperOperator {
        SuperOperator::from_fn(s, |xs| {
            let lifted = &v * xs * v.adjoint();
            let img = m.apply(&lifted);
            v.adjoint() * img * &v
        })
    };
    let new_maps: Vec<SuperOperator> = maps.iter().map(compress).collect();
    let new_rho = v.adjoint() * rho * &v;
    let new_identity = v.adjoint() * identity * &v;
    Ok((new_maps, new_rho, new_identity, n - s))
}

fn word_probabilities_raw(
    maps: &[SuperOperator],
    rho: &CMat,
    identity: &CMat,
    max_len: usize,
) -> Vec<f64> {
    let n = maps[0].n;
    let basis = HermBasis::new(n);
    let rho_coords = basis.coords(rho);
    let mut level = vec![basis.coords(identity)];
    let mut out = vec![rho_coords.dot(&level[0])];
    for _ in 1..=max_len {
        let mut next = Vec::with_capacity(level.len() * maps.len());
        for m in maps {
            for v in &level {
                next.push(&m.mat * v);
            }
        }
        for v in &next {
            out.push(rho_coords.dot(v));
        }
        level = next;
    }
    out
}

/// Reduce completely positive witness maps with a PSD pair `(rho, I)` to a
/// proper realization: unital instrument, stationary PSD state, identical
/// word probabilities.
pub fn reduce_to_realization(
    instrument: &QuantumInstrument,
    rho_in: &CMat,
    identity_in: &CMat,
    config: &ReductionConfig,
) -> Result<(CPRealization, ReductionTrace), Error> {
    let mut maps = instrument.maps.clone();
    let mut rho = rho_in.clone();
    let mut identity = identity_in.clone();
    let pairing = hs_inner(&rho, &identity);
    if pairing.abs() < 1e-12 {
        return Err(Error::precondition("tr[rho I] vanishes; cannot normalize"));
    }
    let input_scale = 1.0 / pairing;
    rho = rho.scale(input_scale);
    let mut trace = ReductionTrace {
        input_scale,
        steps: Vec::new(),
    };
    let reference = if config.validate_steps {
        Some(word_probabilities_raw(&maps, &rho, &identity, 4))
    } else {
        None
    };
    let validate = |maps: &[SuperOperator],
                    rho: &CMat,
                    identity: &CMat,
                    reference: &Option<Vec<f64>>|
     -> Result<(), Error> {
        if let Some(expected) = reference {
            let now = word_probabilities_raw(maps, rho, identity, 4);
            let dev = expected
                .iter()
                .zip(now.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            if dev > 1e-8 {
                return Err(Error::precondition(format!(
                    "probability preservation violated during reduction ({dev:.3e})"
                )));
            }
        }
        Ok(())
    };

    let total_of = |maps: &[SuperOperator]| -> SuperOperator {
        let mut t = SuperOperator::zero(maps[0].n);
        for m in maps {
            t = t.add(m);
        }
        t
    };

    let mut converged = false;
    for _round in 0..config.max_rounds {
        let mut changed = false;
        // Primal pass: make the reference element a fixed point.
        loop {
            let total = total_of(&maps);
            let (lam, omega) = cesaro_limit(&total, &identity, config.tol)?;
            if lam > 1.0 + config.lambda_one_tol {
                let (m2, r2, i2, removed) =
                    remove_spurious_eigenvector(&maps, &rho, &identity, &omega, config.tol)?;
                maps = m2;
                rho = r2;
                identity = i2;
                changed = true;
                trace.steps.push(TraceStep {
                    kind: StepKind::Sieve,
                    lambda: Some(lam),
                    removed_dim: removed,
                    hilbert_dim: rho.nrows(),
                });
                validate(&maps, &rho, &identity, &reference)?;
            } else if lam < 1.0 - config.lambda_one_tol {
                return Err(Error::precondition(format!(
                    "leading eigenvalue {lam} below 1: input does not generate a normalized process"
                )));
            } else {
                let moved = (&omega - &identity).norm() > config.tol * identity.norm().max(1.0);
                identity = omega;
                if moved {
                    trace.steps.push(TraceStep {
                        kind: StepKind::Cesaro,
                        lambda: Some(lam),
                        removed_dim: 0,
                        hilbert_dim: rho.nrows(),
                    });
                    validate(&maps, &rho, &identity, &reference)?;
                }
                break;
            }
        }
        // Dual pass: same with the adjoint maps and roles swapped.
        loop {
            let total = total_of(&maps).adjoint();
            let (lam, omega) = cesaro_limit(&total, &rho, config.tol)?;
            if lam > 1.0 + config.lambda_one_tol {
                let adj: Vec<SuperOperator> = maps.iter().map(|m| m.adjoint()).collect();
                let (m2, i2, r2, removed) =
                    remove_spurious_eigenvector(&adj, &identity, &rho, &omega, config.tol)?;
                maps = m2.iter().map(|m| m.adjoint()).collect();
                identity = i2;
                rho = r2;
                changed = true;
                trace.steps.push(TraceStep {
                    kind: StepKind::DualSieve,
                    lambda: Some(lam),
                    removed_dim: removed,
                    hilbert_dim: rho.nrows(),
                });
                validate(&maps, &rho, &identity, &reference)?;
            } else if lam < 1.0 - config.lambda_one_tol {
                return Err(Error::precondition(format!(
                    "dual leading eigenvalue {lam} below 1"
                )));
            } else {
                let moved = (&omega - &rho).norm() > config.tol * rho.norm().max(1.0);
                rho = omega;
                if moved {
                    trace.steps.push(TraceStep {
                        kind: StepKind::DualCesaro,
                        lambda: Some(lam),
                        removed_dim: 0,
                        hilbert_dim: rho.nrows(),
                    });
                    validate(&maps, &rho, &identity, &reference)?;
                }
                break;
            }
        }
        let total = total_of(&maps);
        let fixed_i = (total.apply(&identity) - &identity).norm()
            <= (config.tol * 1e2).max(1e-8) * identity.norm().max(1.0);
        let fixed_rho = (total.adjoint().apply(&rho) - &rho).norm()
            <= (config.tol * 1e2).max(1e-8) * rho.norm().max(1.0);
        if !changed && fixed_i && fixed_rho {
            converged = true;
            break;
        }
        if rho.nrows() == 0 {
            return Err(Error::precondition("reduction emptied the space"));
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: config.max_rounds,
            context: format!(
                "sieve did not stabilize; {} steps taken, dimension {}",
                trace.steps.len(),
                rho.nrows()
            ),
        });
    }

    // Restrict to the range of the reference element.
    let inorm = identity.norm().max(1e-300);
    let v = crate::linalg::range_isometry(&identity, 1e-10 * inorm);
    let s = v.ncols();
    if s == 0 {
        return Err(Error::precondition("reference element vanished"));
    }
    if s < identity.nrows() {
        let removed = identity.nrows() - s;
        let compress = |m: &SuperOperator| -> SuperOperator {
            SuperOperator::from_fn(s, |xs| {
                let lifted = &v * xs * v.adjoint();
                v.adjoint() * m.apply(&lifted) * &v
            })
        };
        maps = maps.iter().map(&compress).collect();
        rho = v.adjoint() * &rho * &v;
        identity = v.adjoint() * &identity * &v;
        trace.steps.push(TraceStep {
            kind: StepKind::Restrict,
            lambda: None,
            removed_dim: removed,
            hilbert_dim: s,
        });
        validate(&maps, &rho, &identity, &reference)?;
    }

    // Normalize: N(x) = I^{-1/2} x I^{-1/2} turns the reference into the
    // matrix identity and keeps complete positivity on both sides.
    let ihalf_inv = herm_fn(&identity, |l| {
        if l > 0.0 {
            1.0 / l.sqrt()
        } else {
            0.0
        }
    });
    let ihalf = herm_fn(&identity, |l| if l > 0.0 { l.sqrt() } else { 0.0 });
    let nfwd = SuperOperator::conjugation(&ihalf_inv);
    let nbwd = SuperOperator::conjugation(&ihalf);
    maps = maps
        .iter()
        .map(|m| nfwd.compose(m).compose(&nbwd))
        .collect();
    rho = psd_clip(&(&ihalf * &rho * &ihalf));
    let dim = rho.nrows();
    identity = ceye(dim);
    trace.steps.push(TraceStep {
        kind: StepKind::Normalize,
        lambda: None,
        removed_dim: 0,
        hilbert_dim: dim,
    });
    validate(&maps, &rho, &identity, &reference)?;

    // Renormalize away the eigen-clip crumbs in the trace pairing.
    let pairing = hs_inner(&rho, &identity);
    if (pairing - 1.0).abs() > 1e-12 && pairing.abs() > 1e-12 {
        rho = rho.scale(1.0 / pairing);
    }
    let instr = QuantumInstrument::new(instrument.alphabet.clone(), maps)?;
    let real = CPRealization::new(instr, rho, identity)?;
    Ok((real, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, FixtureParams};
    use crate::linalg::kron;
    use crate::process::Alphabet;

    fn params() -> FixtureParams {
        FixtureParams::new(0.5, 1.0)
    }

    #[test]
    fn two_qubit_model_verifies() {
        let model = catalog::two_qubit_cp(&params()).realization;
        let report = verify_cp_realization(&model, 1e-8);
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn qubit_model_fails_verification_for_gamma_below_one() {
        let model = catalog::monitored_qubit_instrument(&params());
        let report = verify_cp_realization(&model, 1e-8);
        assert!(!report.passed());
        let t = report.symbol_cp.iter().find(|(s, _, _)| s == "t").unwrap();
        assert!(!t.1);
        assert!((t.2 + 0.5).abs() < 1e-9);
    }

    #[test]
    fn trivial_identity_instrument_passes() {
        let alphabet = Alphabet::new(["a"]).unwrap();
        let instr = QuantumInstrument::new(alphabet, vec![SuperOperator::identity(3)]).unwrap();
        let q = CPRealization::new(instr, ceye(3).scale(1.0 / 3.0), ceye(3)).unwrap();
        assert!(verify_cp_realization(&q, 1e-10).passed());
    }

    #[test]
    fn cesaro_limit_of_unital_channel_is_identity() {
        let model = catalog::two_qubit_cp(&params()).realization;
        let total = model.instrument.total();
        let (lam, omega) = cesaro_limit(&total, &model.identity, 1e-9).unwrap();
        assert!((lam - 1.0).abs() < 1e-9);
        assert!((omega - &model.identity).norm() < 1e-8);
        // Scaling the channel scales the eigenvalue.
        let doubled = total.scale(2.0);
        let (lam, omega) = cesaro_limit(&doubled, &model.identity, 1e-9).unwrap();
        assert!((lam - 2.0).abs() < 1e-9);
        assert!((omega - &model.identity).norm() < 1e-8);
    }

    #[test]
    fn cesaro_limit_finds_amplified_block() {
        // Block channel: eigenvalue 1 on the first diagonal block of a
        // two-dimensional space, eigenvalue 3 on the second.
        let chan = SuperOperator::from_fn(2, |x| {
            let mut out = CMat::zeros(2, 2);
            out[(0, 0)] = x[(0, 0)];
            out[(1, 1)] = x[(1, 1)] * 3.0;
            out
        });
        let (lam, omega) = cesaro_limit(&chan, &ceye(2), 1e-9).unwrap();
        assert!((lam - 3.0).abs() < 1e-9);
        assert!(omega[(0, 0)].norm() < 1e-9);
        assert!((omega[(1, 1)].re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sieve_removes_planted_block() {
        // Two-qubit model padded with a junk qubit block that only talks to
        // itself; rho is supported on the main block.
        let base = catalog::two_qubit_cp(&params()).realization;
        let n = base.n();
        let big = n + 2;
        let embed_top = |x: &CMat| -> CMat {
            let mut out = CMat::zeros(big, big);
            out.view_mut((0, 0), (n, n)).copy_from(x);
            out
        };
        let junk_unitary = catalog::rotation_unitary(1, 0.3);
        let lift = |m: &SuperOperator, scale: f64| -> SuperOperator {
            let m = m.clone();
            let u = junk_unitary.clone();
            SuperOperator::from_fn(big, move |x| {
                let top = x.view((0, 0), (n, n)).into_owned();
                let bot = x.view((n, n), (2, 2)).into_owned();
                let mut out = CMat::zeros(big, big);
                out.view_mut((0, 0), (n, n)).copy_from(&m.apply(&top));
                out.view_mut((n, n), (2, 2))
                    .copy_from(&(&u * bot * u.adjoint()).scale(scale));
                out
            })
        };
        let mcount = base.instrument.maps.len() as f64;
        // Growing block: per-symbol scale 1.5/m makes the block sum grow by 1.5.
        let maps: Vec<SuperOperator> = base
            .instrument
            .maps
            .iter()
            .map(|m| lift(m, 1.5 / mcount))
            .collect();
        let rho = embed_top(&base.rho);
        let identity = {
            let mut i = embed_top(&base.identity);
            i[(n, n)] = Complex64::new(1.0, 0.0);
            i[(n + 1, n + 1)] = Complex64::new(1.0, 0.0);
            i
        };
        let instr =
            QuantumInstrument::new(base.alphabet().clone(), maps).unwrap();
        let cfg = ReductionConfig {
            validate_steps: true,
            ..ReductionConfig::default()
        };
        let (reduced, trace) = reduce_to_realization(&instr, &rho, &identity, &cfg).unwrap();
        assert_eq!(reduced.n(), n, "junk block removed");
        assert!(trace.sieve_count() >= 1);
        assert!(trace.dims_non_increasing());
        assert!(verify_cp_realization(&reduced, 1e-7).passed());
        for len in 0..=3usize {
            for (w, p) in base.as_quasi_realization().batch_probabilities(len) {
                let q = reduced.word_probability(&w).unwrap();
                assert!((p - q).abs() < 1e-8, "word {w} deviates");
            }
        }
    }

    #[test]
    fn already_proper_realization_is_fixed_point() {
        let base = catalog::two_qubit_cp(&params()).realization;
        let cfg = ReductionConfig::default();
        let (reduced, trace) =
            reduce_to_realization(&base.instrument, &base.rho, &base.identity, &cfg).unwrap();
        assert_eq!(trace.sieve_count(), 0);
        assert_eq!(reduced.n(), base.n());
        for len in 0..=3usize {
            for (w, p) in base.as_quasi_realization().batch_probabilities(len) {
                let q = reduced.word_probability(&w).unwrap();
                assert!((p - q).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn nonorthogonal_omega_is_rejected() {
        // A PSD eigenvector that pairs nontrivially with the state is not
        // spurious and must be refused.
        let base = catalog::two_qubit_cp(&params()).realization;
        let omega = base.identity.clone();
        let err = remove_spurious_eigenvector(
            &base.instrument.maps,
            &base.rho,
            &base.identity,
            &omega,
            1e-9,
        );
        assert!(err.is_err());
        let msg = format!("{}", err.unwrap_err());
        assert!(msg.contains("not zero"), "{msg}");
    }

    #[test]
    fn defective_leading_eigenvalue_is_diagnosed() {
        // A Jordan block at the leading eigenvalue has no Cesaro limit when
        // the seed overlaps the generalized direction; the polynomial
        // filter detects that the projection fails the eigenvector
        // equation.
        let mut mat = RMat::identity(4, 4) * 2.0;
        mat[(0, 1)] = 1.0;
        let chan = SuperOperator { n: 2, mat };
        // Identity plus a component along the coupled coordinate.
        let x = ceye(2) + crate::operators::pauli(1).scale(1.0 / 2.0f64.sqrt());
        assert!(lambda_min(&x) > 0.0);
        let err = cesaro_limit(&chan, &x, 1e-9);
        assert!(err.is_err(), "defective channel must be rejected");
    }

    #[test]
    fn strictly_positive_omega_is_rejected() {
        let base = catalog::two_qubit_cp(&params()).realization;
        let err = remove_spurious_eigenvector(
            &base.instrument.maps,
            &base.rho,
            &base.identity,
            &base.identity,
            1e-9,
        );
        assert!(err.is_err());
    }

    #[test]
    fn block_spurious_vector_drops_dimension() {
        // diag blocks: maps act separately, omega on the junk block.
        let maps = vec![SuperOperator::from_fn(3, |x| {
            let mut out = CMat::zeros(3, 3);
            out.view_mut((0, 0), (2, 2))
                .copy_from(&x.view((0, 0), (2, 2)).into_owned());
            out[(2, 2)] = x[(2, 2)];
            out
        })];
        let mut rho = CMat::zeros(3, 3);
        rho[(0, 0)] = Complex64::new(0.5, 0.0);
        rho[(1, 1)] = Complex64::new(0.5, 0.0);
        let identity = ceye(3);
        let mut omega = CMat::zeros(3, 3);
        omega[(2, 2)] = Complex64::new(1.0, 0.0);
        let (new_maps, new_rho, _, removed) =
            remove_spurious_eigenvector(&maps, &rho, &identity, &omega, 1e-9).unwrap();
        assert_eq!(removed, 1);
        assert_eq!(new_rho.nrows(), 2);
        assert_eq!(new_maps[0].n, 2);
    }

    #[test]
    fn quotient_relation_for_two_qubit_model() {
        let model = catalog::two_qubit_cp(&params());
        let target = catalog::monitored_qubit_quasi(&params());
        let report =
            verify_quotient_relation(&model.witness, &target, &model.l, 1e-8).unwrap();
        assert!(report.passed(), "{report:?}");
        // A random projection fails.
        let mut bad = model.l.clone();
        bad[(0, 3)] += 0.37;
        bad[(2, 7)] -= 0.21;
        let report = verify_quotient_relation(&model.witness, &target, &bad, 1e-8).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn direct_sum_identification_matches_qubit_model() {
        // L(Y (+) Phi(Y)) = Y against the qubit presentation.
        let ds = catalog::direct_sum_cp(&params());
        let qubit = catalog::monitored_qubit_instrument(&params()).as_quasi_realization();
        let basis2 = HermBasis::new(2);
        let basis4 = HermBasis::new(4);
        let mut l = RMat::zeros(4, 16);
        for mu in 0..4 {
            let mut e00 = CMat::zeros(2, 2);
            e00[(0, 0)] = Complex64::new(1.0, 0.0);
            let probe = kron(&e00, basis2.element(mu));
            l.set_row(mu, &basis4.coords(&probe).transpose());
        }
        let report = verify_quotient_relation(&ds.realization, &qubit, &l, 1e-8).unwrap();
        assert!(report.passed(), "{report:?}");
    }
}
