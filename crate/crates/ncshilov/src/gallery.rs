//! Named fixture spaces used by the examples, the CLI, and the test
//! suites.  Each fixture is a concrete operator space; the two Banach
//! fixtures also carry their underlying normed space so callers can
//! run the MIN-space bridge on them.

use crate::matcore::{from_real, herm_sqrt, identity, unit_matrix, CMatrix, Tolerances};
use crate::minspace::{realize_min, BanachSpace, MinRealization};
use crate::opspace::{
    column_space, diagonal_2, full_matrix_space, upper_triangular_2, OperatorSpace,
};
use crate::{Error, Result};

pub const NAMES: [&str; 6] = ["weighted_row3", "skew_diag2", "t2", "c2_column", "l1_2", "linf_2"];

/// A named fixture: always an operator space, plus the Banach space it
/// realizes when it is a MIN-space fixture.
#[derive(Debug, Clone)]
pub struct GalleryEntry {
    pub name: String,
    pub space: OperatorSpace,
    pub min: Option<MinRealization>,
}

/// The unital algebra `A = ℂI₃ + span{e12, e13}` whose row space
/// fixture below is built from; returned as a basis.
pub fn weighted_row3_algebra_basis() -> Vec<CMatrix> {
    vec![identity(3), unit_matrix(3, 3, 0, 1), unit_matrix(3, 3, 0, 2)]
}

/// `P = (2I₃ + ones)^{1/2}`, the positive factor of the `weighted_row3` space.
pub fn weighted_row3_p(tol: &Tolerances) -> CMatrix {
    let q = from_real(3, 3, &[3.0, 1.0, 1.0, 1.0, 3.0, 1.0, 1.0, 1.0, 3.0]);
    herm_sqrt(&q, tol).expect("Q is positive definite")
}

/// `X = A·P ⊂ M₃` for `A = ℂI₃ + span{e12, e13}`: a 3-dimensional
/// space whose envelope is all of `M₃` and whose left multiplier
/// algebra is exactly `A`.
pub fn weighted_row3(tol: &Tolerances) -> OperatorSpace {
    let p = weighted_row3_p(tol);
    let basis = weighted_row3_algebra_basis().into_iter().map(|a| a * &p).collect();
    OperatorSpace::new(3, 3, basis, "weighted_row3", tol).expect("fixture basis is independent")
}

/// The positive square root of `[[2,1],[1,2]]`.
pub fn skew_diag2_p(tol: &Tolerances) -> CMatrix {
    let q = from_real(2, 2, &[2.0, 1.0, 1.0, 2.0]);
    herm_sqrt(&q, tol).expect("Q is positive definite")
}

/// `X = D₂·P ⊂ M₂` with `P² = [[2,1],[1,2]]`: a diagonal module whose
/// left multipliers are `D₂` but whose right multipliers are the
/// conjugated algebra `P⁻¹D₂P`.
pub fn skew_diag2(tol: &Tolerances) -> OperatorSpace {
    let p = skew_diag2_p(tol);
    let basis = vec![
        unit_matrix(2, 2, 0, 0) * &p,
        unit_matrix(2, 2, 1, 1) * &p,
    ];
    OperatorSpace::new(2, 2, basis, "skew_diag2", tol).expect("fixture basis is independent")
}

/// Look up a fixture by name.  MIN fixtures are sampled with the given
/// size and seed; the other fixtures ignore both.
pub fn fixture(
    name: &str,
    sample_size: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<GalleryEntry> {
    let (space, min) = match name {
        "weighted_row3" => (weighted_row3(tol), None),
        "skew_diag2" => (skew_diag2(tol), None),
        "t2" => (upper_triangular_2(tol), None),
        "c2_column" => (column_space(2, tol), None),
        "d2" => (diagonal_2(tol), None),
        "m2" => (full_matrix_space(2, tol), None),
        "l1_2" => {
            let r = realize_min(&BanachSpace::l1(2), sample_size.max(2), seed, tol)?;
            (r.space.clone(), Some(r))
        }
        "linf_2" => {
            let r = realize_min(&BanachSpace::linf(2), sample_size.max(2), seed, tol)?;
            (r.space.clone(), Some(r))
        }
        _ => {
            return Err(Error::InvalidInput(format!(
                "unknown fixture '{name}'; known: {}",
                NAMES.join(", ")
            )))
        }
    };
    Ok(GalleryEntry {
        name: name.into(),
        space,
        min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{frobenius_norm, operator_norm};

    #[test]
    fn fixtures_resolve() {
        let t = Tolerances::default();
        for name in NAMES {
            let e = fixture(name, 16, 42, &t).unwrap();
            assert_eq!(e.name, name);
            assert!(e.space.dim() > 0);
        }
        assert!(fixture("nope", 16, 42, &t).is_err());
    }

    #[test]
    fn weighted_row3_square_recovers_q() {
        let t = Tolerances::default();
        let p = weighted_row3_p(&t);
        let q = from_real(3, 3, &[3.0, 1.0, 1.0, 1.0, 3.0, 1.0, 1.0, 1.0, 3.0]);
        assert!(frobenius_norm(&(&p * &p - q)) < 1e-12);
        // Eigenvalues of Q are 5, 2, 2, so ‖P‖ = √5.
        assert!((operator_norm(&p).unwrap() - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn skew_diag2_rows_have_positive_entries() {
        let t = Tolerances::default();
        let x = skew_diag2(&t);
        // P² has no zero entries, which is what forces the envelope to
        // be all of M_2(M_2).
        let p = skew_diag2_p(&t);
        for i in 0..2 {
            for j in 0..2 {
                assert!(p[(i, j)].norm() > 0.1);
            }
        }
        assert_eq!(x.dim(), 2);
    }
}
