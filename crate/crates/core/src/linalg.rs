//! Dense complex linear algebra with fully deterministic pivoting.
//!
//! Everything here is hand-rolled on purpose: identical inputs must produce
//! bit-identical outputs across runs and platforms, which rules out backends
//! with environment-dependent kernels. Sizes are desk scale (dimensions in
//! the tens), so cubic algorithms are fine.

use crate::tolerances;
use ndarray::{Array1, Array2};
use num_complex::Complex64;

pub type CVec = Array1<Complex64>;
pub type CMat = Array2<Complex64>;

pub fn adjoint(m: &CMat) -> CMat {
    m.t().mapv(|z| z.conj())
}

pub fn frobenius_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.dim(), b.dim(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn mat_from_columns(dim: usize, cols: &[CVec]) -> CMat {
    let mut m = CMat::zeros((dim, cols.len()));
    for (j, c) in cols.iter().enumerate() {
        assert_eq!(c.len(), dim, "column length mismatch");
        m.column_mut(j).assign(c);
    }
    m
}

/// Orthonormal basis of the span of the given vectors, as the columns of an
/// `dim x rank` matrix.
///
/// Modified Gram-Schmidt with column pivoting: each step takes the remaining
/// vector of largest norm (first index wins ties), re-orthogonalizes it once
/// against the basis so far, and rejects it if its norm has fallen below
/// `rank_tol` times the largest input norm. Fully deterministic.
pub fn orthonormal_basis(vectors: &[CVec], dim: usize, rank_tol: f64) -> CMat {
    let mut work: Vec<CVec> = vectors
        .iter()
        .inspect(|v| assert_eq!(v.len(), dim, "vector length mismatch"))
        .cloned()
        .collect();
    let scale = work.iter().map(vec_norm).fold(0.0, f64::max);
    let mut basis: Vec<CVec> = Vec::new();
    if scale == 0.0 {
        return mat_from_columns(dim, &basis);
    }
    let cutoff = scale * rank_tol;
    let mut alive: Vec<bool> = vec![true; work.len()];
    loop {
        let mut pivot: Option<(usize, f64)> = None;
        for (i, v) in work.iter().enumerate() {
            if !alive[i] {
                continue;
            }
            let n = vec_norm(v);
            if pivot.map_or(true, |(_, best)| n > best) {
                pivot = Some((i, n));
            }
        }
        let Some((i, n)) = pivot else { break };
        if n < cutoff {
            break;
        }
        alive[i] = false;
        let mut q = work[i].clone();
        // one re-orthogonalization pass stabilizes nearly dependent inputs
        for b in &basis {
            let coeff = inner(b, &q);
            q = &q - &(b * coeff);
        }
        let qn = vec_norm(&q);
        if qn < cutoff {
            continue;
        }
        q.mapv_inplace(|z| z / qn);
        for (j, v) in work.iter_mut().enumerate() {
            if alive[j] {
                let coeff = inner(&q, v);
                *v = &*v - &(&q * coeff);
            }
        }
        basis.push(q);
    }
    mat_from_columns(dim, &basis)
}

/// `<a, b>` with the conjugation on the first argument.
pub fn inner(a: &CVec, b: &CVec) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Runs the pivoted Gram-Schmidt of [`orthonormal_basis`] on the `b`
/// columns while applying the identical column operations to the paired
/// `c` columns. Pivot selection looks only at the `b` side, so the `b`
/// basis is bit-identical to `orthonormal_basis(b, ...)`.
///
/// If the pairing `b_t -> c_t` is the restriction of a linear map `A`
/// (meaning every linear relation among the `b`s also holds among the
/// `c`s), the result `(Q, Y)` satisfies `A q_i = y_i` columnwise, so
/// `Y Q*` reconstructs `A` on the span of the `b`s and is zero on its
/// orthogonal complement. When no such `A` exists, `Y Q* b_t` deviates
/// from `c_t`; callers detect that through the reconstruction residual.
pub fn orthonormalize_with_images(
    b: &[CVec],
    c: &[CVec],
    b_dim: usize,
    c_dim: usize,
    rank_tol: f64,
) -> (CMat, CMat) {
    assert_eq!(b.len(), c.len(), "each b column needs a paired c column");
    let mut work: Vec<(CVec, CVec)> = b
        .iter()
        .zip(c.iter())
        .map(|(x, y)| {
            assert_eq!(x.len(), b_dim);
            assert_eq!(y.len(), c_dim);
            (x.clone(), y.clone())
        })
        .collect();
    let scale = work.iter().map(|(x, _)| vec_norm(x)).fold(0.0, f64::max);
    let mut basis: Vec<CVec> = Vec::new();
    let mut images: Vec<CVec> = Vec::new();
    if scale > 0.0 {
        let cutoff = scale * rank_tol;
        let mut alive = vec![true; work.len()];
        loop {
            let mut pivot: Option<(usize, f64)> = None;
            for (i, (x, _)) in work.iter().enumerate() {
                if !alive[i] {
                    continue;
                }
                let n = vec_norm(x);
                if pivot.map_or(true, |(_, best)| n > best) {
                    pivot = Some((i, n));
                }
            }
            let Some((i, n)) = pivot else { break };
            if n < cutoff {
                break;
            }
            alive[i] = false;
            let (mut q, mut y) = work[i].clone();
            for (bq, by) in basis.iter().zip(images.iter()) {
                let coeff = inner(bq, &q);
                q = &q - &(bq * coeff);
                y = &y - &(by * coeff);
            }
            let qn = vec_norm(&q);
            if qn < cutoff {
                continue;
            }
            q.mapv_inplace(|z| z / qn);
            y.mapv_inplace(|z| z / qn);
            for (j, (x, w)) in work.iter_mut().enumerate() {
                if alive[j] {
                    let coeff = inner(&q, x);
                    *x = &*x - &(&q * coeff);
                    *w = &*w - &(&y * coeff);
                }
            }
            basis.push(q);
            images.push(y);
        }
    }
    (
        mat_from_columns(b_dim, &basis),
        mat_from_columns(c_dim, &images),
    )
}

/// Norm of the component of `v` outside the span of the orthonormal columns
/// of `q`.
pub fn projection_residual(q: &CMat, v: &CVec) -> f64 {
    let coeffs = adjoint(q).dot(v);
    let proj = q.dot(&coeffs);
    vec_norm(&(v - &proj))
}

/// Whether each column of `qa` lies within `tol` of the span of `qb`.
/// Columns are assumed unit, so the residual is compared absolutely.
pub fn subspace_contained(qa: &CMat, qb: &CMat, tol: f64) -> bool {
    (0..qa.ncols()).all(|j| projection_residual(qb, &qa.column(j).to_owned()) <= tol)
}

pub fn subspace_equal(qa: &CMat, qb: &CMat, tol: f64) -> bool {
    subspace_contained(qa, qb, tol) && subspace_contained(qb, qa, tol)
}

/// Solves `A X = B` for square `A` by LU with partial pivoting. Returns
/// `None` when a pivot falls below `1e-14` times the largest entry of `A`.
pub fn solve_square(a: &CMat, b: &CMat) -> Option<CMat> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "coefficient matrix must be square");
    assert_eq!(b.nrows(), n, "right-hand side height mismatch");
    if n == 0 {
        return Some(CMat::zeros((0, b.ncols())));
    }
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let mut lu = a.clone();
    let mut rhs = b.clone();
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[(k, k)].norm();
        for r in k + 1..n {
            let cand = lu[(r, k)].norm();
            if cand > best {
                best = cand;
                piv = r;
            }
        }
        if best < scale * 1e-14 {
            return None;
        }
        if piv != k {
            for c in 0..n {
                lu.swap((k, c), (piv, c));
            }
            for c in 0..rhs.ncols() {
                rhs.swap((k, c), (piv, c));
            }
        }
        let d = lu[(k, k)];
        for r in k + 1..n {
            let f = lu[(r, k)] / d;
            lu[(r, k)] = f;
            for c in k + 1..n {
                let sub = f * lu[(k, c)];
                lu[(r, c)] -= sub;
            }
            for c in 0..rhs.ncols() {
                let sub = f * rhs[(k, c)];
                rhs[(r, c)] -= sub;
            }
        }
    }
    for k in (0..n).rev() {
        for c in 0..rhs.ncols() {
            let mut s = rhs[(k, c)];
            for j in k + 1..n {
                s -= lu[(k, j)] * rhs[(j, c)];
            }
            rhs[(k, c)] = s / lu[(k, k)];
        }
    }
    Some(rhs)
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns eigenvalues in ascending order with matching
/// orthonormal eigenvector columns. Deterministic sweep order.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    assert_eq!(m.ncols(), n, "eigendecomposition needs a square matrix");
    let scale = frobenius_norm(m);
    let mut a = m.clone();
    let mut v = CMat::eye(n);
    if scale > 0.0 {
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
                .map(|(p, q)| a[(p, q)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= scale * 1e-14 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    jacobi_rotate(&mut a, &mut v, p, q, scale);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(i, i)]
            .re
            .partial_cmp(&a[(j, j)].re)
            .expect("eigenvalues are finite")
            .then(i.cmp(&j))
    });
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMat::zeros((n, n));
    for (c, &i) in order.iter().enumerate() {
        vectors.column_mut(c).assign(&v.column(i));
    }
    (values, vectors)
}

/// One complex Jacobi rotation annihilating the `(p, q)` entry of the
/// Hermitian matrix `a`, accumulated into `v`.
fn jacobi_rotate(a: &mut CMat, v: &mut CMat, p: usize, q: usize, scale: f64) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r <= scale * 1e-18 {
        return;
    }
    let phase = apq / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let n = a.nrows();
    // right multiplication by the rotation
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * s * phase.conj();
        a[(k, q)] = akp * s * phase + akq * c;
    }
    // left multiplication by its adjoint
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * s * phase;
        a[(q, k)] = apk * s * phase.conj() + aqk * c;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * s * phase.conj();
        v[(k, q)] = vkp * s * phase + vkq * c;
    }
}

/// Spectral norm (largest singular value), via the eigenvalues of `M* M`.
pub fn operator_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let h = adjoint(m).dot(m);
    let (values, _) = hermitian_eigen(&h);
    values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Orthonormal basis with the crate-default rank cutoff.
pub fn orthonormal_basis_default(vectors: &[CVec], dim: usize) -> CMat {
    orthonormal_basis(vectors, dim, tolerances::RANK)
}
