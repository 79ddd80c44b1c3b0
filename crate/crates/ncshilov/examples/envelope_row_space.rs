//! Triple envelope of the weighted row space `X = A·P ⊂ M₃`.
//!
//! `A = ℂI₃ + span{e12, e13}` and `P = (2I₃ + ones)^{1/2}`.  The
//! linking C*-algebra of this space is all of `M₆` (a single simple
//! block), so the boundary ideal is empty and the triple envelope is a
//! full 3×3 corner: T(X) ≅ M₃ even though X itself is 3-dimensional.
//!
//! The left multiplier algebra recovers A exactly, but multiplier
//! norms on X do not agree with the cb norms of the corresponding
//! coefficient maps: multiplication operators can be strictly larger
//! as multipliers than as maps.
//!
//! Run with: cargo run --release --example envelope_row_space

use ncshilov::envelope::triple_envelope;
use ncshilov::gallery::{weighted_row3, weighted_row3_algebra_basis};
use ncshilov::matcore::{Span, Tolerances};
use ncshilov::multiplier::{left_multipliers, multiplier_norm};
use ncshilov::search::SearchParams;
use ncshilov::CMatrix;

fn main() {
    let tol = Tolerances::default();
    let seed = 42;
    let x = weighted_row3(&tol);
    println!("space: {} (dim {}, ambient M_3)", "weighted_row3", x.dim());

    let env = triple_envelope(&x, &tol, seed).expect("envelope");
    let block_dims: Vec<usize> = env
        .linking
        .decomposition
        .blocks
        .iter()
        .map(|b| b.dim)
        .collect();
    println!(
        "linking algebra: dim {}, blocks {:?}",
        env.linking.algebra.dim(),
        block_dims
    );
    println!(
        "shilov ideal: {:?} (empty = the whole linking algebra is the envelope)",
        env.shilov_ideal.block_indices
    );
    println!("triple system T(X): dim {} (= dim M_3)", env.t_basis.len());

    let ml = left_multipliers(&env, &tol).expect("left multipliers");
    println!("left multipliers M_l(X): dim {}", ml.dim());

    // The realizing elements must span exactly the algebra A the space
    // was built from, up to the envelope's coefficient action.
    let a_basis = weighted_row3_algebra_basis();
    let span = Span::from_mats(
        &ml.actions.iter().cloned().collect::<Vec<CMatrix>>(),
        &tol,
    )
    .expect("action span");
    let mut recovered = 0;
    for a in &a_basis {
        // Coefficient action of left multiplication by a on the basis
        // {a_k · P}: (a · a_k) · P, so the action matrix is just the
        // multiplication table of A.
        let mut act = CMatrix::zeros(3, 3);
        for (k, ak) in a_basis.iter().enumerate() {
            let prod = a * ak;
            let coeffs = coeffs_in_a(&prod);
            for i in 0..3 {
                act[(i, k)] = coeffs[i];
            }
        }
        if span.contains(&act) {
            recovered += 1;
        }
    }
    println!("multiplication operators of A recovered in M_l(X): {recovered}/3");

    // Multiplier norm vs cb norm for left multiplication by e12.
    // On the basis {I·P, e12·P, e13·P}: e12·(I·P) = e12·P and e12
    // kills the other two basis elements, so the coefficient matrix
    // has a single 1 in position (1, 0).
    let mut op = CMatrix::zeros(3, 3);
    op[(1, 0)] = ncshilov::C64::new(1.0, 0.0);
    let params = SearchParams::default();
    let res = multiplier_norm(&env, &ml, &op, &tol, &params).expect("norm");
    println!(
        "left mult by e12: multiplier norm {:.6}, cb lower bound {:.6} (gap {:.6})",
        res.multiplier_norm,
        res.cb_norm_lower,
        res.multiplier_norm - res.cb_norm_lower
    );
}

/// Coefficients of a matrix in the basis {I, e12, e13} of A.
fn coeffs_in_a(m: &CMatrix) -> [ncshilov::C64; 3] {
    [m[(0, 0)], m[(0, 1)], m[(0, 2)]]
}
