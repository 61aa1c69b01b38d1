//! Accessible/observable subspaces, quotient (minimal) realizations and
//! constructive equivalence testing.
//!
//! The accessible subspace is `W = span{D(u) tau}`, the observable span is
//! `Wt = span{pi D(u)}`, and the quotient realization lives on `W / K` with
//! `K = W cap Wt^perp`. Two quasi-realizations generate the same process
//! exactly when their quotients are related by a similarity transform, and
//! that transform can be built explicitly from a word basis.

use serde::Serialize;

use crate::error::Error;
use crate::linalg::{
    complement_within, orthonormal_complement, subspace_intersection, RMat, RVec,
};
use crate::process::{QuasiRealization, Word};

/// A subspace of the realization space, with the words that generated it.
#[derive(Debug, Clone)]
pub struct Subspace {
    pub ambient_dim: usize,
    /// Orthonormal basis columns, `ambient_dim x rank`.
    pub basis: RMat,
    pub rank_tol: f64,
    /// Words whose vectors were accepted as rank-increasing, in breadth-first
    /// lexicographic order.
    pub words: Vec<Word>,
}

impl Subspace {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthogonal projection of a vector onto the subspace.
    pub fn project(&self, v: &RVec) -> RVec {
        &self.basis * (self.basis.transpose() * v)
    }
}

/// Greedy breadth-first closure. `step` maps an accepted vector to its image
/// under one symbol; `extend` builds the candidate word.
#[allow(clippy::too_many_arguments)]
fn closure(
    dim: usize,
    m: usize,
    seed: RVec,
    rank_tol: f64,
    step: impl Fn(usize, &RVec) -> RVec,
    step_scale: impl Fn(usize) -> f64,
    extend: impl Fn(&Word, usize) -> Word,
    prepend_order: bool,
) -> (RMat, Vec<Word>) {
    let mut basis: Vec<RVec> = Vec::new();
    let mut words: Vec<Word> = Vec::new();
    // The residual is compared against the scale at which cancellation can
    // have happened (map norm times parent norm), so that images that are
    // zero up to roundoff never count as new directions.
    let accept = |w: Word,
                  v: &RVec,
                  scale: f64,
                  basis: &mut Vec<RVec>,
                  words: &mut Vec<Word>|
     -> bool {
        if scale <= 1e-300 {
            return false;
        }
        let mut res = v.clone();
        for _ in 0..2 {
            for b in basis.iter() {
                let c = b.dot(&res);
                res -= b * c;
            }
        }
        if res.norm() > rank_tol * scale {
            basis.push(&res / res.norm());
            words.push(w);
            true
        } else {
            false
        }
    };

    let mut level: Vec<(Word, RVec)> = Vec::new();
    let seed_scale = seed.norm();
    if accept(Word::epsilon(), &seed, seed_scale, &mut basis, &mut words) {
        level.push((Word::epsilon(), seed));
    }
    while !level.is_empty() && basis.len() < dim {
        let mut next: Vec<(Word, RVec)> = Vec::new();
        let mut consider = |a: usize, w: &Word, v: &RVec, next: &mut Vec<(Word, RVec)>| {
            let cand = step(a, v);
            let scale = step_scale(a) * v.norm();
            let word = extend(w, a);
            if accept(word.clone(), &cand, scale, &mut basis, &mut words) {
                next.push((word, cand));
            }
        };
        if prepend_order {
            // Candidates a.w in lexicographic order: first symbol major.
            for a in 0..m {
                for (w, v) in &level {
                    consider(a, w, v, &mut next);
                }
            }
        } else {
            // Candidates w.a in lexicographic order: existing word major.
            for (w, v) in &level {
                for a in 0..m {
                    consider(a, w, v, &mut next);
                }
            }
        }
        level = next;
    }
    let mut q = RMat::zeros(dim, basis.len());
    for (k, b) in basis.iter().enumerate() {
        q.set_column(k, b);
    }
    (q, words)
}

/// Accessible subspace `span{D(u) tau}` with generating words.
pub fn accessible_subspace(r: &QuasiRealization, rank_tol: f64) -> Subspace {
    let (basis, words) = closure(
        r.dim(),
        r.alphabet().len(),
        r.tau().clone(),
        rank_tol,
        |a, v| r.map(a) * v,
        |a| r.map(a).norm(),
        |w, a| w.prepend(a),
        true,
    );
    Subspace {
        ambient_dim: r.dim(),
        basis,
        rank_tol,
        words,
    }
}

/// Observable span `span{pi D(u)}` (stored as column vectors) with
/// generating words.
pub fn observable_subspace(r: &QuasiRealization, rank_tol: f64) -> Subspace {
    let (basis, words) = closure(
        r.dim(),
        r.alphabet().len(),
        r.pi().clone(),
        rank_tol,
        |a, v| r.map(a).transpose() * v,
        |a| r.map(a).norm(),
        |w, a| w.append(a),
        false,
    );
    Subspace {
        ambient_dim: r.dim(),
        basis,
        rank_tol,
        words,
    }
}

/// Quotient realization together with the projection that produced it.
#[derive(Debug, Clone)]
pub struct QuotientResult {
    pub quotient: QuasiRealization,
    /// `r x d` matrix mapping parent coordinates (restricted to the
    /// accessible subspace) to quotient coordinates; annihilates `K`.
    pub projection: RMat,
    /// Words whose quotient vectors form a basis of the quotient space.
    pub word_basis: Vec<Word>,
    pub accessible_dim: usize,
    pub observable_dim: usize,
    pub kernel_dim: usize,
    /// Principal-angle cosines from the `W cap Wt^perp` computation.
    pub intersection_cosines: Vec<f64>,
    pub warnings: Vec<String>,
    /// Largest residual of `L D(a) - Dq(a) L` on the accessible subspace.
    pub intertwine_residual: f64,
    /// Largest `|p_parent(u) - p_quotient(u)|` over the validation words.
    pub max_probability_deviation: f64,
}

/// Compute the quotient (regular) realization of `r`.
///
/// `tol` doubles as the numerical rank threshold and as the bound on the
/// verification residuals. Borderline principal angles are reported as
/// warnings rather than silently resolved. Probability agreement between
/// parent and quotient is validated on words up to twice the quotient
/// dimension, capped so no more than 200k words are evaluated.
pub fn quotient_realization(r: &QuasiRealization, tol: f64) -> Result<QuotientResult, Error> {
    let d = r.dim();
    let acc = accessible_subspace(r, tol);
    let obs = observable_subspace(r, tol);
    let obs_perp = orthonormal_complement(&obs.basis, d);
    let (kernel, cosines) = subspace_intersection(&acc.basis, &obs_perp, tol);
    let mut warnings = Vec::new();
    for &c in &cosines {
        if c < 1.0 - tol && c >= 1.0 - 1e3 * tol {
            warnings.push(format!(
                "principal angle cosine {c:.12} is within 1000x of the rank threshold"
            ));
        }
    }
    let g = complement_within(&acc.basis, &kernel, tol);
    let rdim = g.ncols();
    if rdim == 0 {
        return Err(Error::precondition(
            "quotient is zero-dimensional; the process is trivial or inputs are degenerate",
        ));
    }
    let l = g.transpose();
    let tau_q = &l * r.tau();
    let pi_q = &l * r.pi();
    let maps_q: Vec<RMat> = (0..r.alphabet().len()).map(|a| &l * r.map(a) * &g).collect();
    let quotient = QuasiRealization::new(r.alphabet().clone(), pi_q, tau_q, maps_q)?;

    // Intertwining residual L D(a) w = Dq(a) L w on the accessible basis.
    let mut intertwine = 0.0f64;
    for a in 0..r.alphabet().len() {
        let lhs = &l * (r.map(a) * &acc.basis);
        let rhs = quotient.map(a) * (&l * &acc.basis);
        let scale = r.map(a).norm().max(1.0);
        intertwine = intertwine.max((lhs - rhs).norm() / scale);
    }

    // Word basis in the quotient, breadth-first lexicographic.
    let qacc = accessible_subspace(&quotient, tol);
    let word_basis = qacc.words.clone();
    if word_basis.len() != rdim {
        return Err(Error::precondition(format!(
            "quotient word basis has {} elements for dimension {rdim}",
            word_basis.len()
        )));
    }

    // Validate that the quotient generates the same probabilities on a
    // word-count-capped window of lengths up to 2 * rdim.
    let m = r.alphabet().len() as f64;
    let mut max_dev = 0.0f64;
    let mut len = 0usize;
    while len <= 2 * rdim && (m.powi(len as i32) as usize) <= 200_000 {
        let parent = r.batch_probabilities(len);
        let quot = quotient.batch_probabilities(len);
        for ((_, p), (_, q)) in parent.iter().zip(quot.iter()) {
            max_dev = max_dev.max((p - q).abs());
        }
        len += 1;
    }
    if max_dev > tol.max(1e-12) * 1e2 {
        return Err(Error::precondition(format!(
            "quotient deviates from parent probabilities by {max_dev:.3e}"
        )));
    }

    Ok(QuotientResult {
        quotient,
        projection: l,
        word_basis,
        accessible_dim: acc.rank(),
        observable_dim: obs.rank(),
        kernel_dim: kernel.ncols(),
        intersection_cosines: cosines,
        warnings,
        intertwine_residual: intertwine,
        max_probability_deviation: max_dev,
    })
}

/// Order of the process: dimension of the quotient realization.
pub fn order(r: &QuasiRealization, rank_tol: f64) -> usize {
    let acc = accessible_subspace(r, rank_tol);
    let obs = observable_subspace(r, rank_tol);
    let obs_perp = orthonormal_complement(&obs.basis, r.dim());
    let (kernel, _) = subspace_intersection(&acc.basis, &obs_perp, rank_tol);
    acc.rank() - kernel.ncols()
}

/// Residuals of the three intertwining relations checked by
/// [`equivalence_isomorphism`].
#[derive(Debug, Clone, Serialize)]
pub struct IsoResiduals {
    pub pi: f64,
    pub tau: f64,
    pub maps: Vec<f64>,
}

impl IsoResiduals {
    pub fn max(&self) -> f64 {
        self.maps
            .iter()
            .cloned()
            .fold(self.pi.max(self.tau), f64::max)
    }
}

/// Result of the constructive equivalence test.
#[derive(Debug, Clone)]
pub struct IsomorphismResult {
    pub found: bool,
    /// Change of basis from quotient 1 to quotient 2 when found.
    pub t: Option<RMat>,
    pub residuals: Option<IsoResiduals>,
    pub quotient_dims: (usize, usize),
    /// Condition number of the candidate basis in quotient 2.
    pub condition: Option<f64>,
    pub reason: Option<String>,
}

/// Decide equivalence of two quasi-realizations by building the quotient
/// isomorphism from a word basis.
///
/// The word basis of the first quotient is evaluated in the second quotient;
/// if the processes agree the images form a basis and the induced map
/// intertwines `(pi, D, tau)` of both quotients.
pub fn equivalence_isomorphism(
    r1: &QuasiRealization,
    r2: &QuasiRealization,
    tol: f64,
) -> Result<IsomorphismResult, Error> {
    if r1.alphabet() != r2.alphabet() {
        return Err(Error::structural(
            "equivalence test needs a common alphabet",
        ));
    }
    let rank_tol = tol.min(1e-6);
    let q1 = quotient_realization(r1, rank_tol)?;
    let q2 = quotient_realization(r2, rank_tol)?;
    let d1 = q1.quotient.dim();
    let d2 = q2.quotient.dim();
    if d1 != d2 {
        return Ok(IsomorphismResult {
            found: false,
            t: None,
            residuals: None,
            quotient_dims: (d1, d2),
            condition: None,
            reason: Some(format!("quotient dimensions differ: {d1} vs {d2}")),
        });
    }
    let r = d1;
    let mut e = RMat::zeros(r, r);
    let mut f = RMat::zeros(r, r);
    for (k, w) in q1.word_basis.iter().enumerate() {
        let ev = q1.quotient.word_map(w)? * q1.quotient.tau();
        let fv = q2.quotient.word_map(w)? * q2.quotient.tau();
        e.set_column(k, &ev);
        f.set_column(k, &fv);
    }
    let svd_f = f.clone().svd(false, false);
    let smax = svd_f.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let smin = svd_f
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if smin.partial_cmp(&(1e-10 * smax.max(1e-300))) != Some(std::cmp::Ordering::Greater) {
        return Ok(IsomorphismResult {
            found: false,
            t: None,
            residuals: None,
            quotient_dims: (d1, d2),
            condition: Some(cond),
            reason: Some("candidate basis in the second quotient is numerically singular".into()),
        });
    }
    let e_inv = e
        .try_inverse()
        .ok_or_else(|| Error::precondition("quotient word basis is singular"))?;
    let t = &f * e_inv;

    let pi_res = {
        // pi1 = pi2 T  row-wise, i.e. pi1 = T^T pi2 as column vectors.
        let lhs = t.transpose() * q2.quotient.pi();
        (lhs - q1.quotient.pi()).norm() / q1.quotient.pi().norm().max(1.0)
    };
    let tau_res =
        (&t * q1.quotient.tau() - q2.quotient.tau()).norm() / q2.quotient.tau().norm().max(1.0);
    let map_res: Vec<f64> = (0..r1.alphabet().len())
        .map(|a| {
            let lhs = &t * q1.quotient.map(a);
            let rhs = q2.quotient.map(a) * &t;
            (lhs - rhs).norm() / q2.quotient.map(a).norm().max(1e-3)
        })
        .collect();
    let residuals = IsoResiduals {
        pi: pi_res,
        tau: tau_res,
        maps: map_res,
    };
    let found = residuals.max() <= tol;
    Ok(IsomorphismResult {
        found,
        reason: if found {
            None
        } else {
            Some(format!(
                "intertwining residual {:.3e} exceeds tolerance",
                residuals.max()
            ))
        },
        t: Some(t),
        residuals: Some(residuals),
        quotient_dims: (d1, d2),
        condition: Some(cond),
    })
}

/// Serializable form of a quotient result.
#[derive(Debug, Serialize)]
pub struct QuotientJson {
    pub quotient: crate::process::RealizationJson,
    pub projection: Vec<Vec<f64>>,
    pub word_basis: Vec<String>,
    pub accessible_dim: usize,
    pub observable_dim: usize,
    pub kernel_dim: usize,
    pub warnings: Vec<String>,
}

impl QuotientResult {
    pub fn to_json(&self, parent: &QuasiRealization) -> QuotientJson {
        QuotientJson {
            quotient: self.quotient.to_json(),
            projection: (0..self.projection.nrows())
                .map(|i| {
                    (0..self.projection.ncols())
                        .map(|j| self.projection[(i, j)])
                        .collect()
                })
                .collect(),
            word_basis: self
                .word_basis
                .iter()
                .map(|w| parent.alphabet().format_word(w))
                .collect(),
            accessible_dim: self.accessible_dim,
            observable_dim: self.observable_dim,
            kernel_dim: self.kernel_dim,
            warnings: self.warnings.clone(),
        }
    }
}
