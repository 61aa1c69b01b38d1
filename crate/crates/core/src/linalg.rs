//! Small dense linear-algebra helpers shared across the crate.
//!
//! Complex Hermitian eigenproblems are solved with a cyclic Jacobi sweep,
//! which is accurate and deterministic at the matrix sizes this crate works
//! with (n <= 64). Real SVD and nonsymmetric spectra come from nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Complex identity matrix.
pub fn ceye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Promote a real matrix to a complex one.
pub fn to_complex(m: &RMat) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| Complex64::new(m[(i, j)], 0.0))
}

/// Hermitian part `(X + X^dag)/2`.
pub fn hermitize(x: &CMat) -> CMat {
    let xd = x.adjoint();
    (x + xd).scale(0.5)
}

/// Frobenius distance to the Hermitian part, as a hermiticity residual.
pub fn hermiticity_residual(x: &CMat) -> f64 {
    (x - x.adjoint()).norm() * 0.5
}

/// Hilbert-Schmidt inner product `tr[A^dag B]`, real part.
pub fn hs_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x.conj() * y).re)
        .sum()
}

/// Kronecker product, first factor major.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi.
///
/// Returns eigenvalues in ascending order and the matching unitary matrix of
/// column eigenvectors. The input is hermitized first; callers that care
/// should check [`hermiticity_residual`] themselves.
pub fn herm_eigen(x: &CMat) -> (Vec<f64>, CMat) {
    let n = x.nrows();
    assert_eq!(n, x.ncols(), "herm_eigen needs a square matrix");
    let mut a = hermitize(x);
    let mut v = ceye(n);
    if n <= 1 {
        let ev = if n == 1 { vec![a[(0, 0)].re] } else { vec![] };
        return (ev, v);
    }
    let scale = a.norm().max(1e-300);
    let tol = 1e-15 * scale;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let abs = apq.norm();
                if abs <= tol * 1e-2 {
                    continue;
                }
                let phase = apq / abs;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * abs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J acts on columns p,q: col_p' = c*col_p - s*conj(phase)*col_q,
                // col_q' = s*phase*col_p + c*col_q. A <- J^dag A J, V <- V J.
                let jp = Complex64::new(c, 0.0);
                let jsp = phase * s; // J[p,q]
                let jqp = -phase.conj() * s; // J[q,p]
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jp + akq * jqp;
                    a[(k, q)] = akp * jsp + akq * jp;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jp * apk + jqp.conj() * aqk;
                    a[(q, k)] = jsp.conj() * apk + jp * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jp + vkq * jqp;
                    v[(k, q)] = vkp * jsp + vkq * jp;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vsorted = CMat::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        vsorted.set_column(new, &v.column(old));
    }
    (values, vsorted)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn lambda_min(x: &CMat) -> f64 {
    let (ev, _) = herm_eigen(x);
    ev.first().copied().unwrap_or(0.0)
}

/// Apply a spectral function to a Hermitian matrix.
pub fn herm_fn(x: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let n = x.nrows();
    let (ev, v) = herm_eigen(x);
    let mut out = CMat::zeros(n, n);
    for (k, &lam) in ev.iter().enumerate() {
        let flam = f(lam);
        if flam != 0.0 {
            let col = v.column(k);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += col[i] * col[j].conj() * flam;
                }
            }
        }
    }
    out
}

/// Nearest positive semidefinite matrix in Frobenius norm (eigenvalue clip).
pub fn psd_clip(x: &CMat) -> CMat {
    herm_fn(x, |l| l.max(0.0))
}

/// Orthonormal columns spanning the eigenspace of eigenvalues `<= cut`.
pub fn kernel_isometry(x: &CMat, cut: f64) -> CMat {
    let (ev, v) = herm_eigen(x);
    let cols: Vec<usize> = (0..ev.len()).filter(|&k| ev[k].abs() <= cut).collect();
    let mut out = CMat::zeros(x.nrows(), cols.len());
    for (new, &old) in cols.iter().enumerate() {
        out.set_column(new, &v.column(old));
    }
    out
}

/// Orthonormal columns spanning the eigenspace of eigenvalues `> cut`.
pub fn range_isometry(x: &CMat, cut: f64) -> CMat {
    let (ev, v) = herm_eigen(x);
    let cols: Vec<usize> = (0..ev.len()).filter(|&k| ev[k].abs() > cut).collect();
    let mut out = CMat::zeros(x.nrows(), cols.len());
    for (new, &old) in cols.iter().enumerate() {
        out.set_column(new, &v.column(old));
    }
    out
}

/// Orthonormal basis of the column span, dropping singular values below
/// `tol` relative to the largest one. Returns a `d x r` matrix.
pub fn orthonormal_span(m: &RMat, tol: f64) -> RMat {
    if m.ncols() == 0 {
        return RMat::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.as_ref().expect("svd with u");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return RMat::zeros(m.nrows(), 0);
    }
    let r = svd
        .singular_values
        .iter()
        .filter(|&&s| s > tol * smax)
        .count();
    u.columns(0, r).into_owned()
}

/// Orthonormal basis of the orthogonal complement of the column span of `q`
/// inside the full space `R^d`.
pub fn orthonormal_complement(q: &RMat, d: usize) -> RMat {
    if q.ncols() == 0 {
        return RMat::identity(d, d);
    }
    assert_eq!(q.nrows(), d);
    // Null space of q^T via full SVD of q.
    let svd = q.clone().svd(true, false);
    let u = svd.u.as_ref().expect("svd with u");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let r = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-12 * smax.max(1.0))
        .count();
    // u has d rows, min(d, cols) columns; complete to a full basis first.
    let mut full = RMat::zeros(d, d);
    full.view_mut((0, 0), (d, u.ncols())).copy_from(u);
    // Complete via QR of [u | I].
    let mut basis: Vec<RVec> = (0..r).map(|k| u.column(k).into_owned()).collect();
    for j in 0..d {
        let mut v = RVec::zeros(d);
        v[j] = 1.0;
        for b in &basis {
            let c = b.dot(&v);
            v -= b * c;
        }
        for b in &basis {
            let c = b.dot(&v);
            v -= b * c;
        }
        let nv = v.norm();
        if nv > 1e-10 {
            basis.push(v / nv);
        }
    }
    let mut out = RMat::zeros(d, basis.len() - r);
    for (k, b) in basis.iter().skip(r).enumerate() {
        out.set_column(k, b);
    }
    out
}

/// Intersection of two subspaces given by orthonormal bases, via principal
/// angles. Returns an orthonormal basis of the intersection together with
/// the cosines (singular values) used for the rank decision.
pub fn subspace_intersection(qa: &RMat, qb: &RMat, rank_tol: f64) -> (RMat, Vec<f64>) {
    let d = qa.nrows();
    if qa.ncols() == 0 || qb.ncols() == 0 {
        return (RMat::zeros(d, 0), vec![]);
    }
    let m = qa.transpose() * qb;
    let svd = m.svd(true, false);
    let u = svd.u.as_ref().expect("svd with u");
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let keep: Vec<usize> = (0..sv.len()).filter(|&k| sv[k] >= 1.0 - rank_tol).collect();
    let mut raw = RMat::zeros(d, keep.len());
    for (new, &old) in keep.iter().enumerate() {
        raw.set_column(new, &(qa * u.column(old)));
    }
    (orthonormal_span(&raw, 1e-12), sv)
}

/// Basis of `span(qa)` orthogonal to `span(qk)` (`qk` must lie inside `qa`
/// for this to be the complement within `qa`).
pub fn complement_within(qa: &RMat, qk: &RMat, rank_tol: f64) -> RMat {
    if qk.ncols() == 0 {
        return qa.clone();
    }
    let proj = qa - qk * (qk.transpose() * qa);
    orthonormal_span(&proj, rank_tol.max(1e-12))
}

/// Dual-basis rows for a full-column-rank frame: returns `L` with
/// `L * frame = I` and `L` vanishing on the orthogonal complement of the
/// frame span (Moore-Penrose pseudoinverse).
pub fn pinv_rows(frame: &RMat) -> RMat {
    let svd = frame.clone().svd(true, true);
    svd.pseudo_inverse(1e-12).expect("pseudo inverse")
}

/// Least squares solve `A x = b` via SVD.
pub fn lstsq(a: &RMat, b: &RVec) -> RVec {
    let svd = a.clone().svd(true, true);
    svd.solve(b, 1e-12).expect("svd solve")
}

/// Lawson-Hanson nonnegative least squares: minimize `|A x - b|` over
/// `x >= 0`. Returns the solution and the residual norm.
pub fn nnls(a: &RMat, b: &RVec, max_iter: usize) -> (RVec, f64) {
    let n = a.ncols();
    let mut passive = vec![false; n];
    let mut x = RVec::zeros(n);
    let mut resid = b - a * &x;
    for _ in 0..max_iter {
        let w = a.transpose() * &resid;
        let mut best = None;
        let mut best_w = 1e-10 * b.norm().max(1.0);
        for j in 0..n {
            if !passive[j] && w[j] > best_w {
                best_w = w[j];
                best = Some(j);
            }
        }
        let Some(j_star) = best else { break };
        passive[j_star] = true;
        loop {
            // Solve unconstrained LS on the passive set.
            let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let mut ap = RMat::zeros(a.nrows(), cols.len());
            for (k, &j) in cols.iter().enumerate() {
                ap.set_column(k, &a.column(j));
            }
            let z = lstsq(&ap, b);
            if z.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (k, &j) in cols.iter().enumerate() {
                    x[j] = z[k];
                }
                break;
            }
            // Step back to the boundary and drop a variable.
            let mut alpha = f64::INFINITY;
            for (k, &j) in cols.iter().enumerate() {
                if z[k] <= 0.0 {
                    let denom = x[j] - z[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (k, &j) in cols.iter().enumerate() {
                x[j] += alpha * (z[k] - x[j]);
            }
            for &j in &cols {
                if x[j] <= 1e-14 {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
        }
        resid = b - a * &x;
    }
    let r = (b - a * &x).norm();
    (x, r)
}
