//! Semidefinite representable cones, mapping cones and the quantum
//! realizability certificate.
//!
//! An SDR cone is the image `C = L(W+)` of the PSD slice of a subspace
//! `W <= Herm(n)` under a linear map `L` into the realization space. Cone
//! membership, dual membership and the level-n extensions are all
//! semidefinite feasibility problems handled by [`crate::feasibility`].
//!
//! A mapping-cone specification is a pair of subspaces `(W, Wt)` with
//! proximinal kernel `K = W cap Wt_perp`; the cone of quotient maps induced
//! by completely positive maps preserving `W` and `K` is decided per target
//! matrix by feasibility over the Choi variable. Putting the pieces
//! together, a quasi-realization admits an equivalent instrument realization
//! for a given specification exactly when every symbol map lies in the
//! mapping cone, `tau` lies in `C` and `pi` lies in the dual cone; the
//! witnesses are then sieved into a proper realization by
//! [`crate::reduction::reduce_to_realization`].

use serde::Serialize;

use crate::error::Error;
use crate::feasibility::{solve, FeasibilityOutcome, FeasibilityProblem, SolverConfig, Start};
use crate::linalg::{
    ceye, hs_inner, kron, nnls, orthonormal_complement, orthonormal_span, pinv_rows,
    subspace_intersection, CMat, RMat, RVec,
};
use crate::operators::{from_choi, ChoiMatrix, HermBasis, QuantumInstrument, SuperOperator};
use crate::process::QuasiRealization;
use crate::quotient;
use crate::reduction::{reduce_to_realization, ReductionConfig, ReductionTrace};

/// SDR cone representation `(n, W, L)` for `C = L(W+)`.
#[derive(Debug, Clone)]
pub struct SDRCone {
    /// Hilbert dimension of the representation space.
    pub n: usize,
    /// Orthonormal basis of `W` (subspace of `Herm(n)`).
    pub w_basis: Vec<CMat>,
    /// `target_dim x n^2` matrix acting on Hermitian coordinates.
    pub l: RMat,
}

fn orthonormal_mats(n: usize, raw: &[CMat]) -> Vec<CMat> {
    let basis = HermBasis::new(n);
    let mut coords = RMat::zeros(n * n, raw.len());
    for (k, m) in raw.iter().enumerate() {
        coords.set_column(k, &basis.coords(m));
    }
    let onb = orthonormal_span(&coords, 1e-12);
    (0..onb.ncols())
        .map(|k| basis.matrix(&onb.column(k).into_owned()))
        .collect()
}

impl SDRCone {
    pub fn new(n: usize, w_raw: Vec<CMat>, l: RMat) -> Result<Self, Error> {
        if l.ncols() != n * n {
            return Err(Error::structural(
                "cone map must act on Hermitian coordinates of the representation space",
            ));
        }
        let w_basis = orthonormal_mats(n, &w_raw);
        if w_basis.is_empty() {
            return Err(Error::structural("cone subspace is trivial"));
        }
        Ok(SDRCone { n, w_basis, l })
    }

    pub fn target_dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn w_dim(&self) -> usize {
        self.w_basis.len()
    }

    /// Image of a Hermitian matrix under `L`.
    pub fn apply_l(&self, x: &CMat) -> RVec {
        let basis = HermBasis::new(self.n);
        &self.l * basis.coords(x)
    }

    /// Decide `x in C = L(W+)`: find PSD `w in W` with `L(w) = x`.
    pub fn membership(
        &self,
        x: &RVec,
        config: &SolverConfig,
        start: Start,
    ) -> Result<FeasibilityOutcome, Error> {
        if x.len() != self.target_dim() {
            return Err(Error::structural("cone membership target has wrong length"));
        }
        let basis = HermBasis::new(self.n);
        let constraints = (0..self.target_dim())
            .map(|mu| {
                let row = self.l.row(mu).transpose().into_owned();
                (basis.matrix(&row), x[mu])
            })
            .collect();
        let problem = FeasibilityProblem {
            dim: self.n,
            constraints,
            subspace: Some(self.w_basis.clone()),
        };
        solve(&problem, config, start)
    }

    /// Decide membership in the level-`level` extension cone
    /// `C_level = (L (x) id)((W (x) Herm(level))+)`.
    ///
    /// The target is a block vector over `V (x) Herm(level)`: index
    /// `mu * level^2 + j` pairs target coordinate `mu` with the `j`-th
    /// element of the Hermitian basis of `Herm(level)`.
    pub fn extension_membership(
        &self,
        level: usize,
        x: &RVec,
        config: &SolverConfig,
        start: Start,
    ) -> Result<FeasibilityOutcome, Error> {
        if level == 0 {
            return Err(Error::precondition("extension level must be at least 1"));
        }
        let r = self.target_dim();
        let ll = level * level;
        if x.len() != r * ll {
            return Err(Error::structural("block vector has wrong length"));
        }
        let level_basis = HermBasis::new(level);
        let big = self.n * level;
        let mut subspace: Vec<CMat> = Vec::with_capacity(self.w_basis.len() * ll);
        for w in &self.w_basis {
            for j in 0..ll {
                subspace.push(kron(w, level_basis.element(j)));
            }
        }
        // <T_{mu j}, Y> = ((L (x) id) Y)_{mu j} for Y in the subspace.
        let ambient = HermBasis::new(self.n);
        let lw: Vec<RVec> = self
            .w_basis
            .iter()
            .map(|w| &self.l * ambient.coords(w))
            .collect();
        let mut constraints = Vec::with_capacity(r * ll);
        for mu in 0..r {
            for j in 0..ll {
                let mut t = CMat::zeros(big, big);
                for (i, w) in self.w_basis.iter().enumerate() {
                    let c = lw[i][mu];
                    if c != 0.0 {
                        t += kron(w, level_basis.element(j)).scale(c);
                    }
                }
                constraints.push((t, x[mu * ll + j]));
            }
        }
        let problem = FeasibilityProblem {
            dim: big,
            constraints,
            subspace: Some(subspace),
        };
        solve(&problem, config, start)
    }

    /// A strictly positive element of `W`, when one exists: the identity if
    /// `W` contains it, otherwise via a shifted feasibility solve.
    pub fn order_unit(&self, config: &SolverConfig) -> Option<CMat> {
        order_unit_of_span(self.n, &self.w_basis, config)
    }

    /// `W = span(W+)`: witnessed by an interior PSD element of `W`.
    pub fn is_proper(&self, config: &SolverConfig) -> bool {
        self.order_unit(config).is_some()
    }

    /// `ker L cap PSD = {0}` inside `W`: no PSD kernel element of unit
    /// trace exists.
    pub fn kernel_is_proximinal(&self, config: &SolverConfig) -> bool {
        let basis = HermBasis::new(self.n);
        let mut constraints: Vec<(CMat, f64)> = (0..self.target_dim())
            .map(|mu| {
                let row = self.l.row(mu).transpose().into_owned();
                (basis.matrix(&row), 0.0)
            })
            .collect();
        constraints.push((ceye(self.n), 1.0));
        let problem = FeasibilityProblem {
            dim: self.n,
            constraints,
            subspace: Some(self.w_basis.clone()),
        };
        match solve(&problem, config, Start::Default) {
            Ok(out) => !out.is_feasible(),
            Err(_) => true,
        }
    }
}

fn order_unit_of_span(n: usize, span: &[CMat], config: &SolverConfig) -> Option<CMat> {
    let basis = HermBasis::new(n);
    let id = ceye(n);
    let id_coords = basis.coords(&id);
    // Projection of the identity onto the span.
    let mut proj = RVec::zeros(n * n);
    for w in span {
        let c = basis.coords(w);
        proj += &c * c.dot(&id_coords);
    }
    if (proj - &id_coords).norm() < 1e-10 * id_coords.norm() {
        return Some(id);
    }
    // Find X >= 0 with X + eps*I in the span and tr X = n.
    let eps = 1e-4;
    let mut coords_mat = RMat::zeros(n * n, span.len());
    for (k, w) in span.iter().enumerate() {
        coords_mat.set_column(k, &basis.coords(w));
    }
    let perp = orthonormal_complement(&orthonormal_span(&coords_mat, 1e-12), n * n);
    let mut constraints: Vec<(CMat, f64)> = (0..perp.ncols())
        .map(|k| {
            let t = perp.column(k).into_owned();
            let b = -eps * t.dot(&id_coords);
            (basis.matrix(&t), b)
        })
        .collect();
    constraints.push((id.clone(), n as f64));
    let problem = FeasibilityProblem {
        dim: n,
        constraints,
        subspace: None,
    };
    match solve(&problem, config, Start::Default) {
        Ok(FeasibilityOutcome::Feasible { witness, .. }) => Some(witness + id.scale(eps)),
        _ => None,
    }
}

/// Mapping-cone specification: subspace pair `(W, Wt)` with derived kernel,
/// quotient map and the stability subspace of the structure-preserving maps.
#[derive(Debug, Clone)]
pub struct MappingConeSpec {
    pub n: usize,
    /// Orthonormal basis of `W`.
    pub w: Vec<CMat>,
    /// Orthonormal basis of `Wt` (identified with operators through the
    /// Hilbert-Schmidt pairing).
    pub wt: Vec<CMat>,
    /// Orthonormal basis of `K = W cap Wt_perp`.
    pub k: Vec<CMat>,
    /// Orthonormal basis of the complement of `K` inside `W`.
    pub g: Vec<CMat>,
    /// Orthonormal basis of `W_perp`.
    pub w_perp: Vec<CMat>,
    /// Orthonormal basis of `Wt + W_perp` (domain of the dual projection).
    pub dual_domain: Vec<CMat>,
    /// Quotient map, `target_dim x n^2` on Hermitian coordinates.
    pub l: RMat,
    /// `K+ = {0}` verified.
    pub proximinal: bool,
}

impl MappingConeSpec {
    /// Build with the canonical quotient map (dual basis of the complement
    /// of `K` in `W`).
    pub fn new(n: usize, w_raw: Vec<CMat>, wt_raw: Vec<CMat>) -> Result<Self, Error> {
        Self::build(n, w_raw, wt_raw, None)
    }

    /// Build with an explicit quotient map `l` (must annihilate `K`).
    pub fn with_l(n: usize, w_raw: Vec<CMat>, wt_raw: Vec<CMat>, l: RMat) -> Result<Self, Error> {
        Self::build(n, w_raw, wt_raw, Some(l))
    }

    fn build(
        n: usize,
        w_raw: Vec<CMat>,
        wt_raw: Vec<CMat>,
        l: Option<RMat>,
    ) -> Result<Self, Error> {
        let nn = n * n;
        let basis = HermBasis::new(n);
        let w = orthonormal_mats(n, &w_raw);
        let wt = orthonormal_mats(n, &wt_raw);
        if w.is_empty() || wt.is_empty() {
            return Err(Error::structural("mapping cone needs nontrivial subspaces"));
        }
        let w_coords = {
            let mut m = RMat::zeros(nn, w.len());
            for (k, x) in w.iter().enumerate() {
                m.set_column(k, &basis.coords(x));
            }
            m
        };
        let wt_coords = {
            let mut m = RMat::zeros(nn, wt.len());
            for (k, x) in wt.iter().enumerate() {
                m.set_column(k, &basis.coords(x));
            }
            m
        };
        let wt_perp = orthonormal_complement(&wt_coords, nn);
        let (k_coords, _) = subspace_intersection(&w_coords, &wt_perp, 1e-9);
        let g_coords = crate::linalg::complement_within(&w_coords, &k_coords, 1e-9);
        let w_perp_coords = orthonormal_complement(&w_coords, nn);
        let dual_domain_coords = {
            let mut stack = RMat::zeros(nn, wt.len() + w_perp_coords.ncols());
            stack.view_mut((0, 0), (nn, wt.len())).copy_from(&wt_coords);
            stack
                .view_mut((0, wt.len()), (nn, w_perp_coords.ncols()))
                .copy_from(&w_perp_coords);
            orthonormal_span(&stack, 1e-12)
        };
        let to_mats = |m: &RMat| -> Vec<CMat> {
            (0..m.ncols())
                .map(|c| basis.matrix(&m.column(c).into_owned()))
                .collect()
        };
        let k_mats = to_mats(&k_coords);
        let g_mats = to_mats(&g_coords);
        let l = match l {
            Some(l) => {
                if l.ncols() != nn {
                    return Err(Error::structural("quotient map has wrong column count"));
                }
                // L must annihilate K for the quotient to be well defined.
                for kc in 0..k_coords.ncols() {
                    let img = &l * k_coords.column(kc).into_owned();
                    if img.norm() > 1e-9 * l.norm().max(1.0) {
                        return Err(Error::precondition(
                            "quotient map does not annihilate the kernel",
                        ));
                    }
                }
                l
            }
            None => pinv_rows(&g_coords),
        };
        let proximinal = kernel_has_no_psd(n, &k_mats);
        if !proximinal {
            return Err(Error::precondition(
                "kernel contains nonzero positive semidefinite elements",
            ));
        }
        Ok(MappingConeSpec {
            n,
            w,
            wt,
            k: k_mats,
            g: g_mats,
            w_perp: to_mats(&w_perp_coords),
            dual_domain: to_mats(&dual_domain_coords),
            l,
            proximinal,
        })
    }

    pub fn target_dim(&self) -> usize {
        self.l.nrows()
    }

    /// The cone `C = L(W+)` of this specification.
    pub fn cone(&self) -> SDRCone {
        SDRCone {
            n: self.n,
            w_basis: self.w.clone(),
            l: self.l.clone(),
        }
    }

    /// Dual pairing coordinates of a functional-side operator:
    /// `Lt(y)_mu = <y, omega_mu>` for the frame dual to `L`.
    pub fn apply_dual(&self, y: &CMat) -> RVec {
        // omega_mu solves L(omega) = e_mu within G; the pseudoinverse of L
        // restricted to G gives the frame.
        let basis = HermBasis::new(self.n);
        let frame = self.dual_frame();
        RVec::from_iterator(
            self.target_dim(),
            (0..self.target_dim()).map(|mu| {
                let om = basis.matrix(&frame.column(mu).into_owned());
                hs_inner(&om, y)
            }),
        )
    }

    /// Coordinates (columns) of the frame `omega_mu` with `L(omega_mu) = e_mu`,
    /// `omega_mu in G`.
    fn dual_frame(&self) -> RMat {
        let nn = self.n * self.n;
        let basis = HermBasis::new(self.n);
        let mut g_coords = RMat::zeros(nn, self.g.len());
        for (k, x) in self.g.iter().enumerate() {
            g_coords.set_column(k, &basis.coords(x));
        }
        // L restricted to G: target_dim x g; solve for preimages.
        let lg = &self.l * &g_coords;
        let pinv = pinv_rows(&lg); // g x target_dim with lg * pinv = I
        &g_coords * pinv
    }

    /// Membership of `f` in the dual cone: find PSD `Y in Wt + W_perp`
    /// with `<Y, w> = f(L(w))` on a basis of `W`.
    pub fn dual_membership(
        &self,
        f: &RVec,
        config: &SolverConfig,
        start: Start,
    ) -> Result<FeasibilityOutcome, Error> {
        if f.len() != self.target_dim() {
            return Err(Error::structural("dual functional has wrong length"));
        }
        let basis = HermBasis::new(self.n);
        let constraints: Vec<(CMat, f64)> = self
            .w
            .iter()
            .map(|w| {
                let rhs = f.dot(&(&self.l * basis.coords(w)));
                (w.clone(), rhs)
            })
            .collect();
        let problem = FeasibilityProblem {
            dim: self.n,
            constraints,
            subspace: Some(self.dual_domain.clone()),
        };
        solve(&problem, config, start)
    }

    /// Linear constraints on the Choi matrix expressing
    /// `F(W) <= W`, `F(K) <= K` and `L o F|_W = D o L`.
    fn choi_constraints(&self, d: &RMat) -> Vec<(CMat, f64)> {
        let basis = HermBasis::new(self.n);
        let conj = |m: &CMat| m.map(|z| z.conj());
        let mut constraints = Vec::new();
        for q in &self.w_perp {
            for w in &self.w {
                constraints.push((kron(q, &conj(w)), 0.0));
            }
        }
        for g in &self.g {
            for k in &self.k {
                constraints.push((kron(g, &conj(k)), 0.0));
            }
        }
        let r = self.target_dim();
        for g in &self.g {
            let lg = &self.l * basis.coords(g);
            let target = d * lg;
            for mu in 0..r {
                let row = self.l.row(mu).transpose().into_owned();
                let lmu = basis.matrix(&row);
                constraints.push((kron(&lmu, &conj(g)), target[mu]));
            }
        }
        constraints
    }

    /// Decide `D in P = (L (x) Lt)(S^CP)`: find a completely positive map
    /// preserving `W` and `K` whose induced quotient is `D`.
    pub fn mapping_cone_membership(
        &self,
        d: &RMat,
        config: &SolverConfig,
        start: Start,
    ) -> Result<FeasibilityOutcome, Error> {
        let r = self.target_dim();
        if d.nrows() != r || d.ncols() != r {
            return Err(Error::structural("quotient target has wrong shape"));
        }
        let problem = FeasibilityProblem {
            dim: self.n * self.n,
            constraints: self.choi_constraints(d),
            subspace: None,
        };
        solve(&problem, config, start)
    }

    /// Diagnostic relaxation: decide whether a *decomposable* (CP plus
    /// co-CP, hence positive) map lifts `D`. Evidence for the existence of a
    /// positive lifting when the CP version is infeasible.
    pub fn decomposable_membership(
        &self,
        d: &RMat,
        config: &SolverConfig,
        start: Start,
    ) -> Result<FeasibilityOutcome, Error> {
        let nn = self.n * self.n;
        let block = 2 * nn;
        let base = self.choi_constraints(d);
        // Block variable diag(M1, M2); total Choi is M1 + PT2(M2).
        let mut constraints = Vec::with_capacity(base.len());
        for (a, b) in base {
            let a_pt = partial_transpose_second(&a, self.n);
            let mut big = CMat::zeros(block, block);
            big.view_mut((0, 0), (nn, nn)).copy_from(&a);
            big.view_mut((nn, nn), (nn, nn)).copy_from(&a_pt);
            constraints.push((big, b));
        }
        let herm = HermBasis::new(nn);
        let mut subspace = Vec::with_capacity(2 * nn * nn);
        for k in 0..nn * nn {
            let e = herm.element(k);
            let mut top = CMat::zeros(block, block);
            top.view_mut((0, 0), (nn, nn)).copy_from(e);
            subspace.push(top);
            let mut bot = CMat::zeros(block, block);
            bot.view_mut((nn, nn), (nn, nn)).copy_from(e);
            subspace.push(bot);
        }
        let problem = FeasibilityProblem {
            dim: block,
            constraints,
            subspace: Some(subspace),
        };
        let out = solve(&problem, config, start)?;
        // Repackage the witness as a Choi matrix of the decomposable map.
        Ok(match out {
            FeasibilityOutcome::Feasible {
                witness,
                iterations,
                residual,
            } => {
                let m1 = witness.view((0, 0), (nn, nn)).into_owned();
                let m2 = witness.view((nn, nn), (nn, nn)).into_owned();
                FeasibilityOutcome::Feasible {
                    witness: m1 + partial_transpose_second(&m2, self.n),
                    iterations,
                    residual,
                }
            }
            other => other,
        })
    }

    /// Order-unit warm start `e (x) et` for the Choi variable, scaled to the
    /// magnitude of the target.
    pub fn order_unit_start(&self, d: &RMat, config: &SolverConfig) -> Option<Start> {
        let e = order_unit_of_span(self.n, &self.w, config)?;
        let et = order_unit_of_span(self.n, &self.dual_domain, config)?;
        let warm = kron(&e, &et.map(|z| z.conj()));
        let scale = d.norm() / warm.norm().max(1e-300);
        Some(Start::Warm(warm.scale(scale.max(1e-6))))
    }

    /// Number of real dimensions of the stability subspace
    /// `S = W (x) (W_perp + Wt) + K (x) all + all (x) W_perp`, computed from
    /// a factored Gram matrix of its generators and checked against the
    /// closed-form count.
    pub fn stability_subspace_dim(&self) -> (usize, usize) {
        let nn = self.n * self.n;
        let basis = HermBasis::new(self.n);
        let coords = |mats: &[CMat]| -> Vec<RVec> {
            mats.iter().map(|m| basis.coords(m)).collect()
        };
        let w = coords(&self.w);
        let kdual = coords(&self.dual_domain); // W_perp + Wt = K_perp
        let k = coords(&self.k);
        let full: Vec<RVec> = (0..nn)
            .map(|i| {
                let mut v = RVec::zeros(nn);
                v[i] = 1.0;
                v
            })
            .collect();
        let wperp = coords(&self.w_perp);
        // Generators as (left, right) coordinate pairs.
        let mut gens: Vec<(&RVec, &RVec)> = Vec::new();
        for a in &w {
            for b in &kdual {
                gens.push((a, b));
            }
        }
        for a in &k {
            for b in &full {
                gens.push((a, b));
            }
        }
        for a in &full {
            for b in &wperp {
                gens.push((a, b));
            }
        }
        let m = gens.len();
        let mut gram = RMat::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = gens[i].0.dot(gens[j].0) * gens[i].1.dot(gens[j].1);
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let eig = gram.symmetric_eigen();
        let emax = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let rank = eig
            .eigenvalues
            .iter()
            .filter(|&&e| e > 1e-10 * emax.max(1.0))
            .count();
        let wd = self.w.len();
        let kd = self.k.len();
        let expected = kd * kd + wd * (wd - kd) + nn * (nn - wd);
        (rank, expected)
    }
}

/// Transpose of the second tensor factor of a matrix on `C^n (x) C^n`.
fn partial_transpose_second(x: &CMat, n: usize) -> CMat {
    let mut out = CMat::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            for i in 0..n {
                for j in 0..n {
                    out[(a * n + j, b * n + i)] = x[(a * n + i, b * n + j)];
                }
            }
        }
    }
    out
}

fn kernel_has_no_psd(n: usize, k_mats: &[CMat]) -> bool {
    if k_mats.is_empty() {
        return true;
    }
    let basis = HermBasis::new(n);
    let id_coords = basis.coords(&ceye(n));
    // Fast path: a kernel orthogonal to the identity is entirely traceless,
    // and a nonzero PSD matrix has positive trace.
    if k_mats
        .iter()
        .all(|k| basis.coords(k).dot(&id_coords).abs() < 1e-12)
    {
        return true;
    }
    // Otherwise ask for a PSD kernel element of unit trace.
    let problem = FeasibilityProblem {
        dim: n,
        constraints: vec![(ceye(n), 1.0)],
        subspace: Some(k_mats.to_vec()),
    };
    match solve(&problem, &SolverConfig::default(), Start::Default) {
        Ok(out) => !out.is_feasible(),
        Err(_) => true,
    }
}

/// Check that `a (x) b` behaves like a rank-one element of the mapping
/// cone: membership should hold exactly when `a in C` and `b in C*`.
#[derive(Debug)]
pub struct RankOneCheck {
    pub cone: FeasibilityOutcome,
    pub dual: FeasibilityOutcome,
    pub mapping: FeasibilityOutcome,
    /// `Some(true)` when all three outcomes are decided and consistent.
    pub consistent: Option<bool>,
}

pub fn rank_one_structure_check(
    spec: &MappingConeSpec,
    a: &RVec,
    b: &RVec,
    config: &SolverConfig,
) -> Result<RankOneCheck, Error> {
    let cone = spec.cone().membership(a, config, Start::Default)?;
    let dual = spec.dual_membership(b, config, Start::Default)?;
    let d = a * b.transpose();
    let start = spec
        .order_unit_start(&d, config)
        .unwrap_or(Start::Default);
    let mapping = spec.mapping_cone_membership(&d, config, start)?;
    let consistent = match (&cone, &dual, &mapping) {
        (FeasibilityOutcome::Undecided { .. }, _, _)
        | (_, FeasibilityOutcome::Undecided { .. }, _)
        | (_, _, FeasibilityOutcome::Undecided { .. }) => None,
        _ => Some((cone.is_feasible() && dual.is_feasible()) == mapping.is_feasible()),
    };
    Ok(RankOneCheck {
        cone,
        dual,
        mapping,
        consistent,
    })
}

/// Report from [`projection_structure_check`].
#[derive(Debug, Serialize)]
pub struct ProjectionCheck {
    pub samples: usize,
    pub level1_failures: usize,
    pub level2_failures: usize,
    pub dual_failures: usize,
    pub pass: bool,
}

/// For sampled elements of the mapping cone, verify that they map sampled
/// cone elements into the cone (level 1 and level 2) and dual samples into
/// the dual cone. `level2_probes` are extra block vectors that must already
/// lie in the level-2 cone; entangled probes catch maps that are positive
/// but not completely positive.
pub fn projection_structure_check(
    spec: &MappingConeSpec,
    witnesses: &[RMat],
    level2_probes: &[RVec],
    samples: usize,
    seed: u64,
    config: &SolverConfig,
) -> Result<ProjectionCheck, Error> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let cone = spec.cone();
    let basis = HermBasis::new(spec.n);
    let e = order_unit_of_span(spec.n, &spec.w, config)
        .ok_or_else(|| Error::precondition("cone subspace has no order unit"))?;
    let et = order_unit_of_span(spec.n, &spec.dual_domain, config)
        .ok_or_else(|| Error::precondition("dual domain has no order unit"))?;
    let mut level1_failures = 0usize;
    let mut level2_failures = 0usize;
    let mut dual_failures = 0usize;

    // PSD samples in a span: order unit plus a small random span element.
    let span_sample = |span: &[CMat], unit: &CMat, rng: &mut rand_chacha::ChaCha12Rng| {
        let mut x = unit.clone();
        let mut pert = CMat::zeros(spec.n, spec.n);
        for m in span {
            let c = rng.sample::<f64, _>(rand::distr::StandardUniform) - 0.5;
            pert += m.scale(c);
        }
        let lmin = crate::linalg::lambda_min(&(&x + &pert));
        let scale = if lmin < 0.0 { 0.45 / (-lmin) } else { 1.0 };
        x += pert.scale(scale.min(1.0));
        x
    };

    for d in witnesses {
        for _ in 0..samples {
            // Level-1 containment D(C) <= C.
            let w_sample = span_sample(&spec.w, &e, &mut rng);
            let img = d * cone.apply_l(&w_sample);
            if !cone.membership(&img, config, Start::Default)?.is_feasible() {
                level1_failures += 1;
            }
            // Dual containment D*(C*) <= C*.
            let y_sample = span_sample(&spec.dual_domain, &et, &mut rng);
            let fy = spec.apply_dual(&y_sample);
            let pulled = d.transpose() * fy;
            if !spec
                .dual_membership(&pulled, config, Start::Default)?
                .is_feasible()
            {
                dual_failures += 1;
            }
        }
        // Level-2 containment on random near-unit samples and the probes.
        let level_basis = HermBasis::new(2);
        let r = spec.target_dim();
        let mut level2_targets: Vec<RVec> = Vec::new();
        for _ in 0..samples.min(3) {
            // e (x) I_2 plus a small random element of W (x) Herm(2).
            let mut y = kron(&e, &ceye(2));
            let mut pert = CMat::zeros(2 * spec.n, 2 * spec.n);
            for w in &spec.w {
                for j in 0..4 {
                    let c = rng.sample::<f64, _>(rand::distr::StandardUniform) - 0.5;
                    pert += kron(w, level_basis.element(j)).scale(c * 0.2);
                }
            }
            let lmin = crate::linalg::lambda_min(&(&y + &pert));
            let scale = if lmin < 0.0 { 0.45 / (-lmin) } else { 1.0 };
            y += pert.scale(scale.min(1.0));
            // Block vector of (L (x) id)(y).
            let mut x = RVec::zeros(r * 4);
            for w in &spec.w {
                let lw = &spec.l * basis.coords(w);
                for j in 0..4 {
                    let c = hs_inner(&kron(w, level_basis.element(j)), &y);
                    for mu in 0..r {
                        x[mu * 4 + j] += lw[mu] * c;
                    }
                }
            }
            level2_targets.push(x);
        }
        level2_targets.extend(level2_probes.iter().cloned());
        for x in &level2_targets {
            let mut dx = RVec::zeros(x.len());
            for j in 0..4 {
                let mut col = RVec::zeros(r);
                for mu in 0..r {
                    col[mu] = x[mu * 4 + j];
                }
                let out = d * col;
                for mu in 0..r {
                    dx[mu * 4 + j] = out[mu];
                }
            }
            if !cone
                .extension_membership(2, &dx, config, Start::Default)?
                .is_feasible()
            {
                level2_failures += 1;
            }
        }
    }
    Ok(ProjectionCheck {
        samples,
        level1_failures,
        level2_failures,
        dual_failures,
        pass: level1_failures == 0 && level2_failures == 0 && dual_failures == 0,
    })
}

/// Status of a realizability certificate.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub enum CertificateStatus {
    Passed,
    Failed { condition: String },
    Undecided { condition: String },
}

/// Full certificate report with witnesses and the reduced realization.
pub struct CertificateReport {
    pub status: CertificateStatus,
    pub symbol_outcomes: Vec<(String, FeasibilityOutcome)>,
    pub tau_outcome: Option<FeasibilityOutcome>,
    pub pi_outcome: Option<FeasibilityOutcome>,
    pub realization: Option<crate::operators::CPRealization>,
    pub trace: Option<ReductionTrace>,
    /// Largest deviation of the reduced realization's probabilities from the
    /// target on words up to length 4.
    pub max_probability_deviation: Option<f64>,
}

/// End-to-end realizability certificate: every symbol map must lie in the
/// mapping cone, `tau` in the cone and `pi` in the dual cone; the witnesses
/// are then reduced to a proper instrument realization.
pub fn cprp_certificate(
    r: &QuasiRealization,
    spec: &MappingConeSpec,
    config: &SolverConfig,
    reduction: &ReductionConfig,
) -> Result<CertificateReport, Error> {
    if spec.target_dim() != r.dim() {
        return Err(Error::structural(
            "specification target dimension does not match the realization",
        ));
    }
    let ord = quotient::order(r, 1e-9);
    if ord != r.dim() {
        return Err(Error::precondition(format!(
            "realization is not regular: order {ord} < dimension {}",
            r.dim()
        )));
    }
    let cone = spec.cone();
    let tau_outcome = cone.membership(r.tau(), config, Start::Default)?;
    if !tau_outcome.is_feasible() {
        let status = match tau_outcome {
            FeasibilityOutcome::Infeasible { .. } => CertificateStatus::Failed {
                condition: "tau not in cone".into(),
            },
            _ => CertificateStatus::Undecided {
                condition: "tau membership undecided".into(),
            },
        };
        return Ok(CertificateReport {
            status,
            symbol_outcomes: vec![],
            tau_outcome: Some(tau_outcome),
            pi_outcome: None,
            realization: None,
            trace: None,
            max_probability_deviation: None,
        });
    }
    let pi_outcome = spec.dual_membership(r.pi(), config, Start::Default)?;
    if !pi_outcome.is_feasible() {
        let status = match pi_outcome {
            FeasibilityOutcome::Infeasible { .. } => CertificateStatus::Failed {
                condition: "pi not in dual cone".into(),
            },
            _ => CertificateStatus::Undecided {
                condition: "pi membership undecided".into(),
            },
        };
        return Ok(CertificateReport {
            status,
            symbol_outcomes: vec![],
            tau_outcome: Some(tau_outcome),
            pi_outcome: Some(pi_outcome),
            realization: None,
            trace: None,
            max_probability_deviation: None,
        });
    }
    let mut symbol_outcomes = Vec::new();
    let mut witnesses: Vec<SuperOperator> = Vec::new();
    for a in 0..r.alphabet().len() {
        let d = r.map(a);
        let start = spec
            .order_unit_start(d, config)
            .unwrap_or(Start::Default);
        let out = spec.mapping_cone_membership(d, config, start)?;
        if let Some(choi) = out.witness() {
            witnesses.push(from_choi(&ChoiMatrix {
                n: spec.n,
                mat: choi.clone(),
            }));
        }
        let feasible = out.is_feasible();
        let infeasible = out.is_infeasible();
        symbol_outcomes.push((r.alphabet().label(a).to_string(), out));
        if !feasible {
            let label = r.alphabet().label(a);
            let status = if infeasible {
                CertificateStatus::Failed {
                    condition: format!("symbol map {label:?} not in mapping cone"),
                }
            } else {
                CertificateStatus::Undecided {
                    condition: format!("symbol map {label:?} membership undecided"),
                }
            };
            return Ok(CertificateReport {
                status,
                symbol_outcomes,
                tau_outcome: Some(tau_outcome),
                pi_outcome: Some(pi_outcome),
                realization: None,
                trace: None,
                max_probability_deviation: None,
            });
        }
    }
    let identity_pre = tau_outcome.witness().expect("feasible tau").clone();
    let rho_pre = pi_outcome.witness().expect("feasible pi").clone();
    let instrument = QuantumInstrument::new(r.alphabet().clone(), witnesses)?;
    let (real, trace) = reduce_to_realization(&instrument, &rho_pre, &identity_pre, reduction)?;
    let mut max_dev = 0.0f64;
    for len in 0..=4usize {
        if (r.alphabet().len() as f64).powi(len as i32) > 1e5 {
            break;
        }
        for (w, p) in r.batch_probabilities(len) {
            let q = real.word_probability(&w)?;
            max_dev = max_dev.max((p - q).abs());
        }
    }
    Ok(CertificateReport {
        status: CertificateStatus::Passed,
        symbol_outcomes,
        tau_outcome: Some(tau_outcome),
        pi_outcome: Some(pi_outcome),
        realization: Some(real),
        trace: Some(trace),
        max_probability_deviation: Some(max_dev),
    })
}

/// Per-length statistics of the reachable-ray family `D(u) tau / |..|`.
#[derive(Debug, Clone, Serialize)]
pub struct RayStats {
    pub length: usize,
    /// Distinct rays among all words of length at most `length`.
    pub distinct: usize,
    /// Extreme rays of their conic hull.
    pub extreme: usize,
}

/// Obstruction report: growing ray counts rule out small stable polyhedral
/// cones (numerical evidence, not a proof).
#[derive(Debug, Clone, Serialize)]
pub struct ObstructionReport {
    pub per_length: Vec<RayStats>,
    /// Strictly increasing distinct-ray counts from length 2 on.
    pub growing: bool,
}

/// Enumerate normalized reachable rays up to `max_length` and count distinct
/// and extreme ones per cumulative length.
pub fn polyhedral_obstruction_scan(
    r: &QuasiRealization,
    max_length: usize,
    tol: f64,
) -> ObstructionReport {
    let mut rays: Vec<RVec> = Vec::new();
    let mut per_length = Vec::new();
    let mut level: Vec<RVec> = vec![r.tau().clone()];
    let scale = r.tau().norm();
    for len in 0..=max_length {
        if len > 0 {
            let mut next = Vec::new();
            for a in 0..r.alphabet().len() {
                for v in &level {
                    next.push(r.map(a) * v);
                }
            }
            level = next;
        }
        for v in &level {
            let norm = v.norm();
            if norm <= 1e-12 * scale.max(1.0) {
                continue;
            }
            let unit = v / norm;
            let known = rays.iter().any(|u| u.dot(&unit) >= 1.0 - tol);
            if !known {
                rays.push(unit);
            }
        }
        let extreme = count_extreme_rays(&rays, tol.max(1e-9));
        per_length.push(RayStats {
            length: len,
            distinct: rays.len(),
            extreme,
        });
    }
    let growing = per_length
        .windows(2)
        .skip(1)
        .all(|w| w[1].distinct > w[0].distinct);
    ObstructionReport {
        per_length,
        growing,
    }
}

fn count_extreme_rays(rays: &[RVec], tol: f64) -> usize {
    if rays.len() <= 2 {
        return rays.len();
    }
    let d = rays[0].len();
    let mut extreme = 0;
    for i in 0..rays.len() {
        let mut a = RMat::zeros(d, rays.len() - 1);
        let mut col = 0;
        for (j, v) in rays.iter().enumerate() {
            if j != i {
                a.set_column(col, v);
                col += 1;
            }
        }
        let (_, resid) = nnls(&a, &rays[i], 200);
        if resid > tol.max(1e-7) {
            extreme += 1;
        }
    }
    extreme
}
