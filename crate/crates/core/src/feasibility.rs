//! Semidefinite feasibility via alternating projections with Dykstra
//! correction.
//!
//! A problem is a set of Hermitian equality constraints `<A_i, X> = b_i`,
//! optionally restricted to a subspace of Hermitian space, intersected with
//! the positive semidefinite cone. The engine alternates between the exact
//! projection onto the affine set (precomputed orthonormalized constraint
//! normals) and the eigenvalue-clip projection onto the cone, carrying the
//! Dykstra increment on the cone side so that the iteration converges to the
//! projection of the start point when the intersection is nonempty.
//!
//! Infeasibility cannot be certified by projections alone; it is reported
//! heuristically when the inter-set distance estimate stabilizes above a
//! threshold over a sliding window.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{psd_clip, CMat, RMat, RVec};
use crate::operators::HermBasis;

/// Feasibility problem `{X Hermitian : X >= 0, <A_i, X> = b_i}` with an
/// optional restriction of `X` to the span of a set of Hermitian matrices.
#[derive(Debug, Clone)]
pub struct FeasibilityProblem {
    /// Matrix side length.
    pub dim: usize,
    /// Hermitian constraint matrices with right-hand sides.
    pub constraints: Vec<(CMat, f64)>,
    /// Optional subspace restriction (need not be orthonormal).
    pub subspace: Option<Vec<CMat>>,
}

/// Engine configuration. All fields have conservative defaults; callers
/// expose them as flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Declare feasible when the PSD iterate is this close to the affine set.
    pub tol_feas: f64,
    /// Gap above which a stalled distance sequence is reported infeasible.
    pub tol_stall: f64,
    /// Sliding-window length for the stall test.
    pub stall_window: usize,
    /// Relative change of the gap over the window below which it stalls.
    pub stall_rel_change: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iter: 20_000,
            tol_feas: 1e-9,
            tol_stall: 1e-6,
            stall_window: 500,
            stall_rel_change: 1e-10,
        }
    }
}

/// Starting point selection.
#[derive(Debug, Clone)]
pub enum Start {
    /// Minimum-norm point of the affine set.
    Default,
    /// Caller-supplied warm start (e.g. an order-unit interior point).
    Warm(CMat),
    /// Seeded Gaussian coordinates, for independent restarts.
    Random(u64),
}

/// Outcome of a feasibility solve.
#[derive(Debug, Clone)]
pub enum FeasibilityOutcome {
    Feasible {
        witness: CMat,
        iterations: usize,
        residual: f64,
    },
    Infeasible {
        gap: f64,
        iterations: usize,
        window: usize,
    },
    Undecided {
        iterations: usize,
        last_gap: f64,
        history: Vec<f64>,
    },
}

impl FeasibilityOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityOutcome::Feasible { .. })
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, FeasibilityOutcome::Infeasible { .. })
    }

    pub fn witness(&self) -> Option<&CMat> {
        match self {
            FeasibilityOutcome::Feasible { witness, .. } => Some(witness),
            _ => None,
        }
    }

    pub fn status_word(&self) -> &'static str {
        match self {
            FeasibilityOutcome::Feasible { .. } => "feasible",
            FeasibilityOutcome::Infeasible { .. } => "infeasible",
            FeasibilityOutcome::Undecided { .. } => "undecided",
        }
    }
}

/// Preprocessed problem: orthonormalized constraints in (possibly
/// restricted) real coordinates.
pub struct Prepared {
    basis: HermBasis,
    /// Restriction matrix, `N^2 x s`, orthonormal columns; identity-free
    /// shortcut when `None`.
    sub: Option<RMat>,
    /// Orthonormal constraint normals in restricted coordinates, `s x q`.
    normals: RMat,
    /// Right-hand side in the orthonormal normal frame.
    rhs: RVec,
    /// Raw constraint rows and rhs for residual reporting.
    raw_rows: RMat,
    raw_b: RVec,
}

impl FeasibilityProblem {
    /// Orthonormalize constraints and detect dependent or inconsistent rows.
    pub fn prepare(&self) -> Result<Prepared, Error> {
        let n = self.dim;
        let nn = n * n;
        let basis = HermBasis::new(n);
        for (a, _) in &self.constraints {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::structural("constraint matrix dimension mismatch"));
            }
        }
        let sub = match &self.subspace {
            None => None,
            Some(mats) => {
                let mut raw = RMat::zeros(nn, mats.len());
                for (k, m) in mats.iter().enumerate() {
                    if m.nrows() != n || m.ncols() != n {
                        return Err(Error::structural("subspace element dimension mismatch"));
                    }
                    raw.set_column(k, &basis.coords(m));
                }
                Some(crate::linalg::orthonormal_span(&raw, 1e-12))
            }
        };
        let s = sub.as_ref().map(|m| m.ncols()).unwrap_or(nn);
        let k = self.constraints.len();
        let mut rows = RMat::zeros(k, s);
        let mut b = RVec::zeros(k);
        for (i, (a, bi)) in self.constraints.iter().enumerate() {
            let coords = basis.coords(a);
            let row = match &sub {
                Some(smat) => smat.transpose() * &coords,
                None => coords,
            };
            rows.set_row(i, &row.transpose());
            b[i] = *bi;
        }
        // Orthonormal normals from the SVD of the row stack.
        let svd = rows.clone().svd(true, true);
        let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&sv| sv > 1e-12 * smax.max(1.0))
            .count();
        let v_t = svd.v_t.as_ref().expect("svd v_t");
        let normals = v_t.rows(0, rank).transpose().into_owned();
        // Least-squares solve for consistency of dependent rows.
        let y0 = svd.solve(&b, 1e-12 * smax.max(1.0)).expect("svd solve");
        let resid = (&rows * &y0 - &b).norm();
        let scale = b.norm().max(1.0);
        if resid > 1e-9 * scale {
            return Err(Error::InconsistentConstraints { residual: resid });
        }
        let rhs = normals.transpose() * &y0;
        Ok(Prepared {
            basis,
            sub,
            normals,
            rhs,
            raw_rows: rows,
            raw_b: b,
        })
    }
}

impl Prepared {
    fn n(&self) -> usize {
        self.basis.n
    }

    /// Projection onto the affine set (subspace restriction included), in
    /// ambient Hermitian coordinates.
    fn project_affine_coords(&self, x: &RVec) -> RVec {
        match &self.sub {
            None => {
                let defect = self.normals.transpose() * x - &self.rhs;
                x - &self.normals * defect
            }
            Some(smat) => {
                let t = smat.transpose() * x;
                let defect = self.normals.transpose() * &t - &self.rhs;
                smat * (t - &self.normals * defect)
            }
        }
    }

    fn constraint_residual(&self, x: &RVec) -> f64 {
        let t = match &self.sub {
            Some(smat) => smat.transpose() * x,
            None => x.clone(),
        };
        let mut r: f64 = (&self.raw_rows * t - &self.raw_b).norm();
        if let Some(smat) = &self.sub {
            // Distance from the restriction subspace also violates the set.
            let proj = smat * (smat.transpose() * x);
            r = r.hypot((x - proj).norm());
        }
        r
    }
}

/// Nearest positive semidefinite matrix (eigenvalue clip).
pub fn project_psd(x: &CMat) -> CMat {
    psd_clip(x)
}

/// Projection of `x` onto the affine constraint set of `problem`.
pub fn project_affine(x: &CMat, problem: &FeasibilityProblem) -> Result<CMat, Error> {
    let prepared = problem.prepare()?;
    let coords = prepared.basis.coords(x);
    Ok(prepared.basis.matrix(&prepared.project_affine_coords(&coords)))
}

/// Solve the feasibility problem with Dykstra-corrected alternating
/// projections.
pub fn solve(
    problem: &FeasibilityProblem,
    config: &SolverConfig,
    start: Start,
) -> Result<FeasibilityOutcome, Error> {
    let prepared = match problem.prepare() {
        Ok(p) => p,
        Err(Error::InconsistentConstraints { residual }) => {
            // The affine set itself is empty: infeasible with the
            // least-squares defect as the reported gap.
            return Ok(FeasibilityOutcome::Infeasible {
                gap: residual,
                iterations: 0,
                window: 0,
            });
        }
        Err(e) => return Err(e),
    };
    solve_prepared(&prepared, config, start)
}

fn solve_prepared(
    prepared: &Prepared,
    config: &SolverConfig,
    start: Start,
) -> Result<FeasibilityOutcome, Error> {
    let n = prepared.n();
    let nn = n * n;
    let x0 = match start {
        Start::Default => RVec::zeros(nn),
        Start::Warm(ref m) => prepared.basis.coords(m),
        Start::Random(seed) => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            RVec::from_fn(nn, |_, _| {
                rng.sample::<f64, _>(rand::distr::StandardUniform) - 0.5
            })
        }
    };
    let mut x = prepared.project_affine_coords(&x0);
    let mut p = RVec::zeros(nn);
    let mut history: Vec<f64> = Vec::with_capacity(config.max_iter.min(1 << 20));
    for it in 0..config.max_iter {
        let y_mat = psd_clip(&prepared.basis.matrix(&(&x + &p)));
        let y = prepared.basis.coords(&y_mat);
        p = &x + &p - &y;
        let xn = prepared.project_affine_coords(&y);
        let gap = (&y - &xn).norm();
        if gap <= config.tol_feas {
            let residual = prepared.constraint_residual(&y);
            // The witness is the PSD-side iterate; by construction its
            // smallest eigenvalue is nonnegative up to eigensolver noise.
            assert!(
                residual <= config.tol_feas * 10.0,
                "witness constraint residual {residual:.3e} out of tolerance"
            );
            return Ok(FeasibilityOutcome::Feasible {
                witness: y_mat,
                iterations: it + 1,
                residual,
            });
        }
        if cfg!(debug_assertions) {
            if let Some(&prev) = history.last() {
                debug_assert!(
                    gap <= prev + 1e-12 * prev.max(1.0),
                    "distance estimate increased at iteration {it}: {prev:.17e} -> {gap:.17e}"
                );
            }
        }
        history.push(gap);
        let w = config.stall_window;
        if history.len() > w && gap > config.tol_stall {
            let prev = history[history.len() - 1 - w];
            if (prev - gap).abs() <= config.stall_rel_change * gap.max(1e-300) {
                return Ok(FeasibilityOutcome::Infeasible {
                    gap,
                    iterations: it + 1,
                    window: w,
                });
            }
        }
        x = xn;
    }
    let last_gap = history.last().cloned().unwrap_or(f64::INFINITY);
    let tail = history.len().saturating_sub(20);
    Ok(FeasibilityOutcome::Undecided {
        iterations: config.max_iter,
        last_gap,
        history: history[tail..].to_vec(),
    })
}
