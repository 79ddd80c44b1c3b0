//! Concrete operator spaces: subspaces of complex `r x c` matrices with
//! their matrix-level norms, plus the Paulsen system and the standard
//! `⊕∞` / column-amplification constructions.

use crate::matcore::{
    self, direct_sum_mat, identity, kron, operator_norm, unit_matrix, CMatrix, CVector,
    ScaleComplex, Span, Tolerances,
};
use crate::{Error, Result};

/// A finite-dimensional operator space given by a linearly independent
/// basis of concrete `rows x cols` matrices.
#[derive(Clone, Debug)]
pub struct OperatorSpace {
    pub rows: usize,
    pub cols: usize,
    pub basis: Vec<CMatrix>,
    pub label: String,
}

/// An element of `M_n(X)`: an `n x n` grid of coefficient vectors over
/// the basis of `X`, stored row-major.
#[derive(Clone, Debug)]
pub struct LevelElement {
    pub n: usize,
    pub coeffs: Vec<CVector>,
}

impl LevelElement {
    pub fn new(n: usize, coeffs: Vec<CVector>) -> Result<Self> {
        if coeffs.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "level element needs {} coefficient vectors, got {}",
                n * n,
                coeffs.len()
            )));
        }
        Ok(LevelElement { n, coeffs })
    }

    /// The 1x1 level element with the given coefficients.
    pub fn scalar(coeffs: CVector) -> Self {
        LevelElement {
            n: 1,
            coeffs: vec![coeffs],
        }
    }

    pub fn block(&self, i: usize, j: usize) -> &CVector {
        &self.coeffs[i * self.n + j]
    }
}

impl OperatorSpace {
    pub fn new(
        rows: usize,
        cols: usize,
        basis: Vec<CMatrix>,
        label: impl Into<String>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::InvalidInput("operator space needs a basis".into()));
        }
        for b in &basis {
            if b.shape() != (rows, cols) {
                return Err(Error::InvalidInput(format!(
                    "basis matrix has shape {:?}, expected {:?}",
                    b.shape(),
                    (rows, cols)
                )));
            }
            if !matcore::is_finite(b) {
                return Err(Error::InvalidInput("non-finite basis matrix".into()));
            }
        }
        let span = Span::from_mats(&basis, tol)?;
        if span.dim() != basis.len() {
            return Err(Error::InvalidInput(format!(
                "basis is linearly dependent at rank_eps ({} of {} independent)",
                span.dim(),
                basis.len()
            )));
        }
        Ok(OperatorSpace {
            rows,
            cols,
            basis,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// The concrete matrix with the given basis coefficients.
    pub fn element(&self, coeffs: &CVector) -> CMatrix {
        debug_assert_eq!(coeffs.len(), self.dim());
        let mut m = CMatrix::zeros(self.rows, self.cols);
        for (b, &c) in self.basis.iter().zip(coeffs.iter()) {
            m += b.scale_complex(c);
        }
        m
    }

    /// Coefficients of a member matrix, if it lies in the span.
    pub fn coefficients(&self, m: &CMatrix, tol: &Tolerances) -> Result<CVector> {
        let (member, coeffs) = matcore::span_membership(&self.basis, m, tol)?;
        coeffs.ok_or_else(|| {
            Error::InvalidInput(format!(
                "matrix not in the span of {} (member = {member})",
                self.label
            ))
        })
    }

    /// Assemble the concrete `n*rows x n*cols` matrix of a level element.
    pub fn assemble(&self, x: &LevelElement) -> Result<CMatrix> {
        let n = x.n;
        if x.coeffs.len() != n * n {
            return Err(Error::InvalidInput("malformed level element".into()));
        }
        let mut out = CMatrix::zeros(n * self.rows, n * self.cols);
        for i in 0..n {
            for j in 0..n {
                let c = x.block(i, j);
                if c.len() != self.dim() {
                    return Err(Error::InvalidInput(
                        "level element coefficient length mismatch".into(),
                    ));
                }
                let block = self.element(c);
                out.view_mut((i * self.rows, j * self.cols), (self.rows, self.cols))
                    .copy_from(&block);
            }
        }
        Ok(out)
    }

    /// The norm of a level element, i.e. the operator norm of the
    /// assembled concrete matrix.
    pub fn level_norm(&self, x: &LevelElement) -> Result<f64> {
        operator_norm(&self.assemble(x)?)
    }

    /// The corner embedding of a basis matrix into `M_{rows+cols}`:
    /// `b` goes in the 1-2 block.
    pub fn corner(&self, b: &CMatrix) -> CMatrix {
        let s = self.rows + self.cols;
        let mut m = CMatrix::zeros(s, s);
        m.view_mut((0, self.rows), (self.rows, self.cols)).copy_from(b);
        m
    }

    /// The Paulsen operator system `S(X) = [[C, X], [X*, C]]` inside
    /// `M_{rows+cols}`, spanned by the identity, the corner copies of the
    /// basis, and their adjoints (deduplicated).
    pub fn paulsen_system(&self, tol: &Tolerances) -> Result<OperatorSpace> {
        let s = self.rows + self.cols;
        let mut span = Span::new((s, s), tol.rank_eps);
        let mut basis = Vec::new();
        let push = |span: &mut Span, basis: &mut Vec<CMatrix>, m: CMatrix| -> Result<()> {
            if span.insert(&m)? {
                basis.push(m);
            }
            Ok(())
        };
        push(&mut span, &mut basis, identity(s))?;
        for b in &self.basis {
            push(&mut span, &mut basis, self.corner(b))?;
        }
        for b in &self.basis {
            push(&mut span, &mut basis, self.corner(b).adjoint())?;
        }
        OperatorSpace::new(s, s, basis, format!("S({})", self.label), tol)
    }

    /// `X ⊕∞ Y` as a block-diagonal subspace.
    pub fn direct_sum(&self, other: &OperatorSpace, tol: &Tolerances) -> Result<OperatorSpace> {
        let mut basis = Vec::new();
        for b in &self.basis {
            basis.push(direct_sum_mat(b, &matcore::zeros(other.rows, other.cols)));
        }
        for b in &other.basis {
            basis.push(direct_sum_mat(&matcore::zeros(self.rows, self.cols), b));
        }
        OperatorSpace::new(
            self.rows + other.rows,
            self.cols + other.cols,
            basis,
            format!("{} (+) {}", self.label, other.label),
            tol,
        )
    }

    /// The column amplification `C_n(X)` inside `M_{n*rows x cols}`.
    pub fn column_amplification(&self, n: usize, tol: &Tolerances) -> Result<OperatorSpace> {
        if n < 1 {
            return Err(Error::InvalidInput("column amplification needs n >= 1".into()));
        }
        let mut basis = Vec::new();
        for i in 0..n {
            let e = unit_matrix(n, 1, i, 0);
            for b in &self.basis {
                basis.push(kron(&e, b));
            }
        }
        OperatorSpace::new(
            n * self.rows,
            self.cols,
            basis,
            format!("C_{}({})", n, self.label),
            tol,
        )
    }

    /// Is the space self-adjoint as a set (square, basis closed under *
    /// up to span)?
    pub fn is_selfadjoint(&self, tol: &Tolerances) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let span = match Span::from_mats(&self.basis, tol) {
            Ok(s) => s,
            Err(_) => return false,
        };
        self.basis.iter().all(|b| span.contains(&b.adjoint()))
    }
}

/// The scalar operator space `C`, realized as `M_1`.
pub fn scalar_space(tol: &Tolerances) -> OperatorSpace {
    OperatorSpace::new(1, 1, vec![identity(1)], "C", tol).expect("scalar space")
}

/// Upper-triangular 2x2 matrices `T_2`.
pub fn upper_triangular_2(tol: &Tolerances) -> OperatorSpace {
    OperatorSpace::new(
        2,
        2,
        vec![
            unit_matrix(2, 2, 0, 0),
            unit_matrix(2, 2, 0, 1),
            unit_matrix(2, 2, 1, 1),
        ],
        "T_2",
        tol,
    )
    .expect("T_2")
}

/// Diagonal 2x2 matrices `D_2`.
pub fn diagonal_2(tol: &Tolerances) -> OperatorSpace {
    OperatorSpace::new(
        2,
        2,
        vec![unit_matrix(2, 2, 0, 0), unit_matrix(2, 2, 1, 1)],
        "D_2",
        tol,
    )
    .expect("D_2")
}

/// Full matrix algebra `M_n` as an operator space.
pub fn full_matrix_space(n: usize, tol: &Tolerances) -> OperatorSpace {
    let mut basis = Vec::new();
    for i in 0..n {
        for j in 0..n {
            basis.push(unit_matrix(n, n, i, j));
        }
    }
    OperatorSpace::new(n, n, basis, format!("M_{n}"), tol).expect("M_n")
}

/// Column space `C_n` = `M_{n x 1}`.
pub fn column_space(n: usize, tol: &Tolerances) -> OperatorSpace {
    let basis = (0..n).map(|i| unit_matrix(n, 1, i, 0)).collect();
    OperatorSpace::new(n, 1, basis, format!("C_{n}"), tol).expect("C_n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::C64;
    use proptest::prelude::{proptest, prop_assert, ProptestConfig};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn cvec(vals: &[(f64, f64)]) -> CVector {
        CVector::from_iterator(vals.len(), vals.iter().map(|&(r, i)| C64::new(r, i)))
    }

    #[test]
    fn level_norm_scalar_space() {
        let t = tol();
        let x = scalar_space(&t);
        let e = LevelElement::scalar(cvec(&[(5.0, 0.0)]));
        assert!((x.level_norm(&e).unwrap() - 5.0).abs() < 1e-12);

        // 2x2 identity pattern over C has norm 1.
        let e2 = LevelElement::new(
            2,
            vec![
                cvec(&[(1.0, 0.0)]),
                cvec(&[(0.0, 0.0)]),
                cvec(&[(0.0, 0.0)]),
                cvec(&[(1.0, 0.0)]),
            ],
        )
        .unwrap();
        assert!((x.level_norm(&e2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn level_norm_row_space_column_of_rows() {
        let t = tol();
        // Row space R_2 = span{e12, e13} in M_{1x3}; the 2x1-style level
        // element stacking the two basis rows has norm sqrt(2).
        let x = OperatorSpace::new(
            1,
            3,
            vec![unit_matrix(1, 3, 0, 1), unit_matrix(1, 3, 0, 2)],
            "R_2",
            &t,
        )
        .unwrap();
        let e = LevelElement::new(
            2,
            vec![
                cvec(&[(1.0, 0.0), (0.0, 0.0)]),
                cvec(&[(0.0, 0.0), (1.0, 0.0)]),
                cvec(&[(0.0, 0.0), (0.0, 0.0)]),
                cvec(&[(0.0, 0.0), (0.0, 0.0)]),
            ],
        )
        .unwrap();
        assert!((x.level_norm(&e).unwrap() - 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn paulsen_system_scalar() {
        let t = tol();
        let s = scalar_space(&t).paulsen_system(&t).unwrap();
        assert_eq!(s.dim(), 3);
        assert_eq!((s.rows, s.cols), (2, 2));
        assert!(s.is_selfadjoint(&t));
    }

    #[test]
    fn paulsen_system_scaling_invariance() {
        let t = tol();
        let x = OperatorSpace::new(1, 1, vec![identity(1).scale(2.0)], "2C", &t).unwrap();
        let s = x.paulsen_system(&t).unwrap();
        let s0 = scalar_space(&t).paulsen_system(&t).unwrap();
        assert_eq!(s.dim(), s0.dim());
        let span = Span::from_mats(&s0.basis, &t).unwrap();
        assert!(s.basis.iter().all(|b| span.contains(b)));
    }

    #[test]
    fn paulsen_system_t2() {
        let t = tol();
        let s = upper_triangular_2(&t).paulsen_system(&t).unwrap();
        assert_eq!(s.dim(), 7);
        assert_eq!((s.rows, s.cols), (4, 4));
        assert!(s.is_selfadjoint(&t));
    }

    #[test]
    fn direct_sum_examples() {
        let t = tol();
        let c = scalar_space(&t);
        let cc = c.direct_sum(&c, &t).unwrap();
        assert_eq!(cc.dim(), 2);
        assert_eq!((cc.rows, cc.cols), (2, 2));

        let t2c = upper_triangular_2(&t).direct_sum(&c, &t).unwrap();
        assert_eq!(t2c.dim(), 4);
        assert_eq!((t2c.rows, t2c.cols), (3, 3));
    }

    #[test]
    fn direct_sum_zero_extension_preserves_norms() {
        let t = tol();
        let x = upper_triangular_2(&t);
        let sum = x.direct_sum(&scalar_space(&t), &t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let c: CVector = CVector::from_fn(3, |_, _| {
                C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let mut padded = CVector::zeros(4);
            padded.rows_mut(0, 3).copy_from(&c);
            let nx = x.level_norm(&LevelElement::scalar(c)).unwrap();
            let ns = sum.level_norm(&LevelElement::scalar(padded)).unwrap();
            assert!((nx - ns).abs() < 1e-12);
        }
    }

    #[test]
    fn column_amplification_examples() {
        let t = tol();
        let x = scalar_space(&t);
        let c1 = x.column_amplification(1, &t).unwrap();
        assert_eq!(c1.dim(), 1);
        assert_eq!((c1.rows, c1.cols), (1, 1));

        let c3 = x.column_amplification(3, &t).unwrap();
        assert_eq!(c3.dim(), 3);
        assert_eq!((c3.rows, c3.cols), (3, 1));

        let t2 = upper_triangular_2(&t).column_amplification(2, &t).unwrap();
        assert_eq!(t2.dim(), 6);
        assert_eq!((t2.rows, t2.cols), (4, 2));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        // Ruan axiom spot checks on the direct-sum max formula.
        #[test]
        fn direct_sum_max_formula(seed in 0u64..500) {
            let t = tol();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = upper_triangular_2(&t);
            let y = diagonal_2(&t);
            let s = x.direct_sum(&y, &t).unwrap();
            let cx: CVector = CVector::from_fn(3, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            let cy: CVector = CVector::from_fn(2, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            let mut cs = CVector::zeros(5);
            cs.rows_mut(0, 3).copy_from(&cx);
            cs.rows_mut(3, 2).copy_from(&cy);
            let nx = x.level_norm(&LevelElement::scalar(cx)).unwrap();
            let ny = y.level_norm(&LevelElement::scalar(cy)).unwrap();
            let ns = s.level_norm(&LevelElement::scalar(cs)).unwrap();
            prop_assert!((ns - nx.max(ny)).abs() < 1e-10);
        }

        // ||a x b|| <= ||a|| ||x|| ||b|| for scalar matrices a, b.
        #[test]
        fn ruan_scalar_compression(seed in 0u64..500) {
            let t = tol();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = upper_triangular_2(&t);
            let n = 2usize;
            let coeffs: Vec<CVector> = (0..n*n).map(|_| CVector::from_fn(3, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))).collect();
            let e = LevelElement::new(n, coeffs).unwrap();
            let big = x.assemble(&e).unwrap();
            let a = CMatrix::from_fn(n * x.rows, n * x.rows, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            let b = CMatrix::from_fn(n * x.cols, n * x.cols, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            let lhs = operator_norm(&(&a * &big * &b)).unwrap();
            let rhs = operator_norm(&a).unwrap() * operator_norm(&big).unwrap() * operator_norm(&b).unwrap();
            prop_assert!(lhs <= rhs + 1e-10);
        }
    }

    #[test]
    fn dependent_basis_rejected() {
        let t = tol();
        let r = OperatorSpace::new(
            2,
            2,
            vec![identity(2), identity(2).scale(2.0)],
            "bad",
            &t,
        );
        assert!(r.is_err());
    }
}
