//! Certify that the upper-triangular 2×2 matrices form an operator
//! algebra — from the norms alone.
//!
//! The input to the certification is not "T₂ is a subalgebra of M₂";
//! it is the abstract package (X, m, e): an operator space, a bilinear
//! multiplication tensor on its coefficients, and a contractive unit.
//! The pipeline checks that the multiplication is completely
//! contractive, derives the canonical representation θ into the left
//! multipliers of X, and certifies an operator algebra exactly when θ
//! is a completely isometric unital homomorphism.
//!
//! A second run doubles the multiplication.  Bilinearity survives but
//! complete contractivity fails at the first matrix level, so the
//! certificate is refused with a concrete witness ratio.
//!
//! Run with: cargo run --release --example certify_operator_algebra

use ncshilov::envelope::triple_envelope;
use ncshilov::matcore::{ScaleComplex, Tolerances};
use ncshilov::oplication::{brs_certify, multiplication_tensor, CcVerdict};
use ncshilov::opspace::upper_triangular_2;
use ncshilov::search::SearchParams;
use ncshilov::{C64, CVector};

fn main() {
    let tol = Tolerances::default();
    let params = SearchParams::default();
    let x = upper_triangular_2(&tol);
    let env = triple_envelope(&x, &tol, 42).expect("envelope");

    // Unit I = e11 + e22 in the basis {e11, e12, e22}.
    let e = CVector::from_vec(vec![
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
    ]);
    let m = multiplication_tensor(&x, &tol).expect("T_2 is an algebra");

    let cert = brs_certify(&x, m.clone(), e.clone(), &env, &tol, &params).expect("certify");
    println!(
        "T_2 with its matrix multiplication: operator algebra = {}",
        cert.is_operator_algebra
    );
    if let Some(c) = &cert.certificate {
        println!(
            "  theta unital {:?}, homomorphism {:?}, completely isometric {}",
            c.theta_unital, c.theta_homomorphism, c.theta_completely_isometric
        );
    }

    // Doubling the product keeps bilinearity and associativity but
    // breaks contractivity: ||2ab|| can exceed ||a||·||b||.
    let doubled: Vec<_> = m.iter().map(|mk| mk.scale_complex(C64::new(2.0, 0.0))).collect();
    let half_e = e.map(|z| z * C64::new(0.5, 0.0));
    let bad = brs_certify(&x, doubled, half_e, &env, &tol, &params).expect("certify doubled");
    println!(
        "T_2 with the doubled multiplication: operator algebra = {}",
        bad.is_operator_algebra
    );
    if let CcVerdict::Fail { level, ratio, .. } = &bad.cc_verdict {
        println!("  refused at level {level} with witness ratio {ratio:.3}");
    }
}
