//! Dense complex linear algebra substrate.
//!
//! Everything downstream (algebra generation, boundary-ideal search,
//! multiplier solves) reduces to three primitives: operator norms,
//! Hermitian spectral decompositions, and span membership at explicit
//! tolerances. All verdict thresholds flow through one [`Tolerances`]
//! record so a run can be re-tuned from a single point.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Numerical thresholds used throughout the toolkit.
///
/// `rank_eps` governs span/rank decisions, `norm_eps` optimization-based
/// verdicts, and `gap_eps` eigenvalue clustering for spectral projections.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    pub rank_eps: f64,
    pub norm_eps: f64,
    pub gap_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_eps: 1e-9,
            norm_eps: 1e-6,
            gap_eps: 1e-7,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        if !(self.rank_eps > 0.0 && self.norm_eps > 0.0 && self.gap_eps > 0.0) {
            return Err(Error::InvalidInput(
                "tolerances must be strictly positive".into(),
            ));
        }
        if self.rank_eps >= self.norm_eps {
            return Err(Error::InvalidInput(
                "rank_eps must be smaller than norm_eps".into(),
            ));
        }
        Ok(())
    }
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> Result<f64> {
    if !is_finite(m) {
        return Err(Error::InvalidInput("non-finite matrix entries".into()));
    }
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    Ok(m.singular_values().max())
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Trace inner product `tr(a^* b)`.
pub fn frobenius_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn adjoint(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn hermitian_defect(m: &CMatrix) -> f64 {
    frobenius_norm(&(m - m.adjoint()))
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Returns eigenvalues sorted descending and the matching unitary of
/// column eigenvectors, so that `m = U diag(l) U^*`.
pub fn herm_eig(m: &CMatrix, tol: &Tolerances) -> Result<(Vec<f64>, CMatrix)> {
    if !is_finite(m) {
        return Err(Error::InvalidInput("non-finite matrix entries".into()));
    }
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidInput("herm_eig requires a square matrix".into()));
    }
    let scale = frobenius_norm(m).max(1.0);
    let defect = hermitian_defect(m);
    if defect > tol.rank_eps * scale {
        return Err(Error::NotHermitian(defect));
    }
    // Work on the Hermitian part; kills roundoff asymmetry.
    let h = (m + m.adjoint()).scale(0.5);
    let eig = h.clone().symmetric_eigen();
    let (raw_values, raw_vectors) = if eig.eigenvalues.iter().all(|l| l.is_finite()) {
        (eig.eigenvalues.iter().cloned().collect::<Vec<f64>>(), eig.eigenvectors)
    } else {
        // The QR iteration occasionally fails to converge and emits NaN;
        // fall back to cyclic Jacobi, which is slower but unconditionally
        // stable for Hermitian input.
        jacobi_herm_eig(&h)?
    };
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        raw_values[j]
            .partial_cmp(&raw_values[i])
            .expect("finite eigenvalues")
    });
    let values: Vec<f64> = order.iter().map(|&i| raw_values[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &raw_vectors.column(i));
    }
    Ok((values, vectors))
}

/// Cyclic Jacobi eigensolver for a complex Hermitian matrix.
///
/// Sweeps rotations annihilating off-diagonal entries until the
/// off-diagonal mass is negligible relative to the matrix scale.
fn jacobi_herm_eig(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = h.nrows();
    let mut a = h.clone();
    let mut v = identity(n);
    let scale = frobenius_norm(h).max(1.0);
    let eps = 1e-14 * scale;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= eps {
            let values: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
            return Ok((values, v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() <= eps / (n as f64) {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Phase removal makes the pivot real, then a real Jacobi
                // rotation annihilates it.
                let phase = apq / C64::new(apq.norm(), 0.0);
                let theta = 0.5 * (2.0 * apq.norm()).atan2(app - aqq);
                let (c, s) = (theta.cos(), theta.sin());
                let jp = C64::new(c, 0.0);
                let jq = phase * C64::new(s, 0.0);
                // Columns: col_p <- c*col_p + s*phase*col_q, col_q <- -s*conj(phase)*col_p + c*col_q.
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * jp + aiq * jq.conj();
                    a[(i, q)] = -aip * jq + aiq * jp;
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * jp + viq * jq.conj();
                    v[(i, q)] = -vip * jq + viq * jp;
                }
                for i in 0..n {
                    let api = a[(p, i)];
                    let aqi = a[(q, i)];
                    a[(p, i)] = api * jp.conj() + aqi * jq;
                    a[(q, i)] = -api * jq.conj() + aqi * jp;
                }
            }
        }
    }
    Err(Error::NumericalDegeneracy(
        "Jacobi eigensolver did not converge".into(),
    ))
}

/// Hermitian square root via the spectral decomposition. Small negative
/// eigenvalues from roundoff are clamped to zero.
pub fn herm_sqrt(m: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    herm_fn(m, tol, |l| if l > 0.0 { l.sqrt() } else { 0.0 })
}

/// Apply a real function to a Hermitian matrix through its eigenvalues.
pub fn herm_fn(m: &CMatrix, tol: &Tolerances, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    let (values, u) = herm_eig(m, tol)?;
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values.iter().map(|&l| C64::new(f(l), 0.0)),
    ));
    Ok(&u * d * u.adjoint())
}

pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_iterator(m.len(), m.iter().cloned())
}

/// Least-squares span membership with explicit tolerance.
///
/// `member` is true iff the residual of the best approximation is at most
/// `rank_eps * (1 + ||candidate||)`; the coefficients over the original
/// basis are returned in that case. An empty basis is not an error: a
/// nonzero candidate is simply not a member.
pub fn span_membership(
    basis: &[CMatrix],
    candidate: &CMatrix,
    tol: &Tolerances,
) -> Result<(bool, Option<CVector>)> {
    if !is_finite(candidate) {
        return Err(Error::InvalidInput("non-finite candidate".into()));
    }
    for b in basis {
        if b.shape() != candidate.shape() {
            return Err(Error::InvalidInput(
                "span_membership: mismatched matrix shapes".into(),
            ));
        }
    }
    let cand_norm = operator_norm(candidate)?;
    if basis.is_empty() {
        let member = cand_norm <= tol.rank_eps;
        return Ok((member, member.then(|| CVector::zeros(0))));
    }
    let rows = candidate.len();
    let mut a = CMatrix::zeros(rows, basis.len());
    for (j, b) in basis.iter().enumerate() {
        a.set_column(j, &vectorize(b));
    }
    let rhs = vectorize(candidate);
    let svd = a.clone().svd(true, true);
    let coeffs = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::NumericalDegeneracy(format!("least squares failed: {e}")))?;
    let residual = (&a * &coeffs - &rhs).norm();
    let member = residual <= tol.rank_eps * (1.0 + cand_norm);
    Ok((member, member.then_some(coeffs)))
}

/// Orthonormal basis of the (right) nullspace of `m`: right singular
/// vectors whose singular values are at most `rank_eps` times the
/// largest one (or absolutely, for a zero matrix).
pub fn nullspace(m: &CMatrix, rank_eps: f64) -> Vec<CVector> {
    let cols = m.ncols();
    if m.nrows() == 0 || cols == 0 {
        return (0..cols)
            .map(|j| CVector::from_fn(cols, |i, _| C64::new(f64::from(u8::from(i == j)), 0.0)))
            .collect();
    }
    // Zero-pad wide matrices to square so the thin SVD carries a full
    // orthonormal basis of the domain in V.
    let padded = if m.nrows() < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let smax = svd.singular_values.max();
    let cut = rank_eps * (1.0 + smax);
    let vt = svd.v_t.as_ref().expect("svd with v_t requested");
    let mut out = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= cut {
            out.push(vt.row(k).adjoint());
        }
    }
    out
}

/// A linear span of matrices with a cached orthonormal basis under the
/// trace inner product. Supports fast membership tests during closure
/// iterations.
#[derive(Clone, Debug)]
pub struct Span {
    shape: (usize, usize),
    mats: Vec<CMatrix>,
    ortho: Vec<CMatrix>,
    rank_eps: f64,
}

impl Span {
    pub fn new(shape: (usize, usize), rank_eps: f64) -> Self {
        Span {
            shape,
            mats: Vec::new(),
            ortho: Vec::new(),
            rank_eps,
        }
    }

    pub fn from_mats(mats: &[CMatrix], tol: &Tolerances) -> Result<Self> {
        let shape = mats
            .first()
            .map(|m| m.shape())
            .ok_or_else(|| Error::InvalidInput("empty matrix list".into()))?;
        let mut s = Span::new(shape, tol.rank_eps);
        for m in mats {
            s.insert(m)?;
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.ortho.len()
    }

    pub fn members(&self) -> &[CMatrix] {
        &self.mats
    }

    pub fn ortho_basis(&self) -> &[CMatrix] {
        &self.ortho
    }

    /// Residual after projecting `m` onto the span (modified Gram-Schmidt
    /// with one reorthogonalization pass).
    fn residual(&self, m: &CMatrix) -> CMatrix {
        let mut r = m.clone();
        for _ in 0..2 {
            for q in &self.ortho {
                let c = frobenius_inner(q, &r);
                r -= q.scale_complex(c);
            }
        }
        r
    }

    pub fn contains(&self, m: &CMatrix) -> bool {
        frobenius_norm(&self.residual(m)) <= self.rank_eps * (1.0 + frobenius_norm(m))
    }

    /// Add `m` to the span if independent; returns true when the span grew.
    pub fn insert(&mut self, m: &CMatrix) -> Result<bool> {
        if m.shape() != self.shape {
            return Err(Error::InvalidInput("span: mismatched matrix shape".into()));
        }
        if !is_finite(m) {
            return Err(Error::InvalidInput("span: non-finite matrix".into()));
        }
        let r = self.residual(m);
        let rn = frobenius_norm(&r);
        if rn <= self.rank_eps * (1.0 + frobenius_norm(m)) {
            return Ok(false);
        }
        self.mats.push(m.clone());
        self.ortho.push(r.scale(1.0 / rn));
        Ok(true)
    }

    /// Orthogonal projection of `m` onto the span.
    pub fn project(&self, m: &CMatrix) -> CMatrix {
        m - self.residual(m)
    }
}

/// Extension trait: scale a matrix by a complex scalar.
pub trait ScaleComplex {
    fn scale_complex(&self, c: C64) -> CMatrix;
}

impl ScaleComplex for CMatrix {
    fn scale_complex(&self, c: C64) -> CMatrix {
        self.map(|z| z * c)
    }
}

/// Kronecker product, used for level amplifications.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMatrix {
    CMatrix::zeros(r, c)
}

/// Elementary matrix unit `e_{ij}` in an `r x c` shape (zero-based).
pub fn unit_matrix(r: usize, c: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(r, c);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// Build a matrix from row-major real data.
pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    debug_assert_eq!(data.len(), rows * cols);
    CMatrix::from_fn(rows, cols, |i, j| C64::new(data[i * cols + j], 0.0))
}

/// Build a matrix from row-major complex data.
pub fn from_complex(rows: usize, cols: usize, data: &[C64]) -> CMatrix {
    debug_assert_eq!(data.len(), rows * cols);
    CMatrix::from_fn(rows, cols, |i, j| data[i * cols + j])
}

/// Block-diagonal direct sum of two matrices.
pub fn direct_sum_mat(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut m = CMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{proptest, prop_assert, ProptestConfig};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn random_cmatrix(rng: &mut impl Rng, r: usize, c: usize) -> CMatrix {
        CMatrix::from_fn(r, c, |_, _| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
        let m = random_cmatrix(rng, n, n);
        let qr = m.qr();
        qr.q()
    }

    #[test]
    fn jacobi_fallback_matches_qr_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2, 5, 17] {
            let g = random_cmatrix(&mut rng, n, n);
            let h = (&g + g.adjoint()).scale(0.5);
            let (vals, v) = jacobi_herm_eig(&h).unwrap();
            let d = CMatrix::from_fn(n, n, |i, j| {
                if i == j { C64::new(vals[i], 0.0) } else { C64::new(0.0, 0.0) }
            });
            let recon = &v * d * v.adjoint();
            assert!(frobenius_norm(&(&recon - &h)) < 1e-12 * frobenius_norm(&h).max(1.0));
            assert!(frobenius_norm(&(v.adjoint() * &v - identity(n))) < 1e-12);
        }
    }

    #[test]
    fn operator_norm_zero_and_identity() {
        assert_eq!(operator_norm(&zeros(2, 2)).unwrap(), 0.0);
        assert!((operator_norm(&identity(3)).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn operator_norm_nilpotent() {
        // [[0,2],[0,0]] has singular values {2, 0}.
        let m = unit_matrix(2, 2, 0, 1).scale(2.0);
        assert!((operator_norm(&m).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn operator_norm_rejects_nan() {
        let mut m = zeros(2, 2);
        m[(0, 0)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(operator_norm(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn herm_eig_diagonal() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::new(3.0, 0.0),
            C64::new(1.0, 0.0),
        ]));
        let (vals, u) = herm_eig(&m, &tol()).unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);
        assert!(frobenius_norm(&(&u * u.adjoint() - identity(2))) < 1e-12);
    }

    #[test]
    fn herm_eig_bordered_q() {
        // Q = 2I_3 + ones(3) has spectrum {5, 2, 2}.
        let q = identity(3).scale(2.0) + CMatrix::from_element(3, 3, C64::new(1.0, 0.0));
        let (vals, _) = herm_eig(&q, &tol()).unwrap();
        assert!((vals[0] - 5.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
        assert!((vals[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn herm_eig_off_diagonal_symmetry() {
        let m = unit_matrix(2, 2, 0, 1) + unit_matrix(2, 2, 1, 0);
        let (vals, _) = herm_eig(&m, &tol()).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let m = unit_matrix(2, 2, 0, 1);
        assert!(matches!(herm_eig(&m, &tol()), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn nullspace_examples() {
        let t = tol();
        // Wide matrix [1 0 0]: nullspace is 2-dimensional.
        let m = unit_matrix(1, 3, 0, 0);
        let ns = nullspace(&m, t.rank_eps);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((&m * v).norm() < 1e-10);
            assert!((v.norm() - 1.0).abs() < 1e-10);
        }
        // Invertible matrix: trivial nullspace.
        assert!(nullspace(&identity(3), t.rank_eps).is_empty());
        // Tall rank-1 matrix.
        let mut tall = zeros(3, 2);
        tall[(0, 0)] = C64::new(1.0, 0.0);
        tall[(1, 0)] = C64::new(2.0, 0.0);
        assert_eq!(nullspace(&tall, t.rank_eps).len(), 1);
    }

    #[test]
    fn span_membership_examples() {
        let t = tol();
        // 2I in span{I}.
        let (member, coeffs) =
            span_membership(&[identity(2)], &identity(2).scale(2.0), &t).unwrap();
        assert!(member);
        let c = coeffs.unwrap();
        assert!((c[0] - C64::new(2.0, 0.0)).norm() < 1e-10);

        // e12 not in span{e11}.
        let (member, _) =
            span_membership(&[unit_matrix(2, 2, 0, 0)], &unit_matrix(2, 2, 0, 1), &t).unwrap();
        assert!(!member);

        // e12 + 5 e13 in span{e12, e13}.
        let basis = vec![unit_matrix(1, 3, 0, 1), unit_matrix(1, 3, 0, 2)];
        let cand = unit_matrix(1, 3, 0, 1) + unit_matrix(1, 3, 0, 2).scale(5.0);
        let (member, coeffs) = span_membership(&basis, &cand, &t).unwrap();
        assert!(member);
        let c = coeffs.unwrap();
        assert!((c[0] - C64::new(1.0, 0.0)).norm() < 1e-10);
        assert!((c[1] - C64::new(5.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn span_membership_empty_basis() {
        let t = tol();
        let (member, _) = span_membership(&[], &unit_matrix(2, 2, 0, 0), &t).unwrap();
        assert!(!member);
    }

    #[test]
    fn span_membership_idempotent_on_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = tol();
        let basis: Vec<CMatrix> = (0..3).map(|_| random_cmatrix(&mut rng, 3, 3)).collect();
        let cand = &basis[0] + basis[2].scale(0.25);
        let (member, coeffs) = span_membership(&basis, &cand, &t).unwrap();
        assert!(member);
        let c = coeffs.unwrap();
        let mut rec = zeros(3, 3);
        for (i, b) in basis.iter().enumerate() {
            rec += b.scale_complex(c[i]);
        }
        let (member2, _) = span_membership(&basis, &rec, &t).unwrap();
        assert!(member2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn unitary_invariance(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2..6);
            let m = random_cmatrix(&mut rng, n, n);
            let u = random_unitary(&mut rng, n);
            let v = random_unitary(&mut rng, n);
            let a = operator_norm(&m).unwrap();
            let b = operator_norm(&(&u * &m * &v)).unwrap();
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + a));
        }

        #[test]
        fn submultiplicative(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2..6);
            let a = random_cmatrix(&mut rng, n, n);
            let b = random_cmatrix(&mut rng, n, n);
            let na = operator_norm(&a).unwrap();
            let nb = operator_norm(&b).unwrap();
            let nab = operator_norm(&(&a * &b)).unwrap();
            prop_assert!(nab <= na * nb + 1e-12);
        }

        #[test]
        fn herm_eig_reconstruction(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2..41);
            let g = random_cmatrix(&mut rng, n, n);
            let h = (&g + g.adjoint()).scale(0.5);
            let (vals, u) = herm_eig(&h, &Tolerances::default()).unwrap();
            let d = CMatrix::from_diagonal(&CVector::from_iterator(
                n, vals.iter().map(|&l| C64::new(l, 0.0))));
            let rec = &u * d * u.adjoint();
            let scale = frobenius_norm(&h).max(1e-12);
            // Dense eigensolvers lose digits on clustered spectra, so the
            // reconstruction bound is looser than machine epsilon.
            prop_assert!(frobenius_norm(&(rec - h)) <= 1e-8 * scale);
        }
    }
}
