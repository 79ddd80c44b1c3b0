//! Left and right multipliers of the conjugated diagonal module
//! `X = D₂·P ⊂ M₂` with `P² = [[2, 1], [1, 2]]`.
//!
//! Because P² has no vanishing entries, the envelope of X is a single
//! M₂(M₂) block.  The left multipliers recover D₂ on the nose and the
//! adjointable ones agree, but the right side is skewed: M_r(X) is the
//! conjugated algebra P⁻¹D₂P while the adjointable right multipliers
//! collapse to the scalars.
//!
//! The punchline is the norm anomaly: for a = P⁻¹·diag(1,0)·P the map
//! x ↦ x·a coincides with left multiplication by diag(1,0), so it acts
//! on X with norm exactly 1 — yet its realizing element in M_r(X) is
//! the skew idempotent a itself, of norm 2/√3.  The right regular
//! representation M_r(X) → CB(X) is not isometric.
//!
//! Run with: cargo run --release --example right_multiplier_anomaly

use ncshilov::envelope::triple_envelope;
use ncshilov::gallery::{skew_diag2, skew_diag2_p};
use ncshilov::matcore::{from_real, operator_norm, Tolerances};
use ncshilov::multiplier::{
    adjointable_left, adjointable_right, left_multipliers, multiplier_norm, right_multipliers,
};
use ncshilov::search::SearchParams;
use ncshilov::CMatrix;

fn main() {
    let tol = Tolerances::default();
    let seed = 42;
    let x = skew_diag2(&tol);
    let env = triple_envelope(&x, &tol, seed).expect("envelope");

    let kept: Vec<usize> = env.quotient_map.kept.iter().map(|b| b.dim).collect();
    println!("envelope C*-algebra blocks: {kept:?} (one size-4 block = M_2(M_2))");

    let ml = left_multipliers(&env, &tol).expect("M_l");
    let mr = right_multipliers(&env, &tol).expect("M_r");
    let al = adjointable_left(&env, &tol).expect("A_l");
    let ar = adjointable_right(&env, &tol).expect("A_r");
    println!(
        "dims: M_l {} (= D_2), M_r {} (= P^-1 D_2 P), A_l {}, A_r {} (= scalars)",
        ml.dim(),
        mr.dim(),
        al.dim(),
        ar.dim()
    );

    // Right multiplication by a = P^-1 diag(1,0) P.  On the basis
    // {e11·P, e22·P} we get (e_kk·P)·a = e_kk·diag(1,0)·P, so the
    // coefficient matrix is diag(1, 0).
    let p = skew_diag2_p(&tol);
    let pinv = p.clone().try_inverse().expect("P invertible");
    let d10 = from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let a = &pinv * &d10 * &p;
    println!(
        "matrix norm of a = P^-1 diag(1,0) P: {:.6} (> 1: a is a skew idempotent)",
        operator_norm(&a).expect("norm")
    );

    let mut op = CMatrix::zeros(2, 2);
    op[(0, 0)] = ncshilov::C64::new(1.0, 0.0);
    let params = SearchParams::default();
    let right = multiplier_norm(&env, &mr, &op, &tol, &params).expect("right norm");
    println!(
        "as a right multiplier: element norm {:.9}, but cb action norm only {:.9}",
        right.multiplier_norm, right.cb_norm_lower
    );

    // The same map is left multiplication by diag(1,0), where element
    // norm and action norm agree at exactly 1.
    let left = multiplier_norm(&env, &ml, &op, &tol, &params).expect("left norm");
    println!(
        "as a left multiplier (by diag(1,0)): element norm {:.9}",
        left.multiplier_norm
    );
}
