//! Factor a unital complete isometry between operator algebras.
//!
//! A surjective completely isometric map T between unital operator
//! algebras need not be multiplicative, but it always factors as
//! T(a) = u·π(a) with u = T(1) unitary and π a completely isometric
//! unital homomorphism.  This example scrambles M₂ by a hidden pair
//! (u₀, π₀) — a unitary twist composed with a conjugation
//! automorphism — and recovers the factorization from T alone.
//!
//! Run with: cargo run --release --example banach_stone_factorization

use ncshilov::matcore::{frobenius_norm, identity, Tolerances};
use ncshilov::multiplier::banach_stone;
use ncshilov::opspace::full_matrix_space;
use ncshilov::search::SearchParams;
use ncshilov::{C64, CMatrix};

fn main() {
    let tol = Tolerances::default();
    let params = SearchParams::default();
    let m2 = full_matrix_space(2, &tol);

    // Hidden data: u0 a rotation, pi0(a) = v a v* for another rotation.
    let u0 = rotation(0.7);
    let v = rotation(-0.3);
    let dim = m2.dim();

    // T(a) = u0 · v a v*, written as a coefficient matrix on the basis.
    let mut tmap = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        let image = &u0 * &v * &m2.basis[k] * v.adjoint();
        let coeffs = m2.coefficients(&image, &tol).expect("image in M_2");
        tmap.column_mut(k).copy_from(&coeffs);
    }

    let unit = m2
        .coefficients(&identity(2), &tol)
        .expect("unit coefficients");
    let res = banach_stone(&m2, &unit, &m2, &unit, &tmap, &tol, &params).expect("factorize");

    println!(
        "recovered u with unitary defect {:.3e}",
        res.u_unitary_defect
    );
    println!("u matches T(1) = u0: {:.3e}", frobenius_norm(&(&res.u - &u0)));
    println!("pi is a unital homomorphism: {}", res.pi_is_homomorphism);
    println!(
        "pi is completely isometric: {}",
        res.pi_report.is_complete_isometry
    );
    println!(
        "T promotes to a triple isomorphism of the generated ternary systems: {}",
        res.triple_promotion_ok
    );

    // Residual of the factorization T(a) = u·pi(a) over the basis.
    let mut worst: f64 = 0.0;
    for (k, pik) in res.pi_proof_images.iter().enumerate() {
        let mut t_image = CMatrix::zeros(2, 2);
        for j in 0..dim {
            t_image += &m2.basis[j] * tmap[(j, k)];
        }
        worst = worst.max(frobenius_norm(&(&t_image - &res.u * pik)));
    }
    println!("max residual ||T(b_k) - u·pi(b_k)||: {worst:.3e}");
}

/// A real rotation by the given angle, as a complex 2×2 unitary.
fn rotation(theta: f64) -> CMatrix {
    let (s, c) = theta.sin_cos();
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = C64::new(c, 0.0);
    m[(0, 1)] = C64::new(-s, 0.0);
    m[(1, 0)] = C64::new(s, 0.0);
    m[(1, 1)] = C64::new(c, 0.0);
    m
}
