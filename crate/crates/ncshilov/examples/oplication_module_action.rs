//! Derive the canonical representation of an algebra acting on a
//! module, from the action's norms alone.
//!
//! M₂ acts on the column space C₂ by matrix-vector multiplication.
//! Handing the pipeline only the coefficient tensor of that action,
//! it verifies complete contractivity level by level, then realizes
//! every algebra element as a left multiplier of C₂ — producing the
//! representation θ: M₂ → M_l(C₂) with certificates: θ is unital,
//! completely isometric, and lands in the adjointable multipliers.
//!
//! Run with: cargo run --release --example oplication_module_action

use ncshilov::envelope::triple_envelope;
use ncshilov::matcore::Tolerances;
use ncshilov::oplication::{derive_theta, verify_cc, BilinearAction, CcVerdict};
use ncshilov::opspace::{column_space, full_matrix_space};
use ncshilov::search::SearchParams;
use ncshilov::{C64, CMatrix, CVector};

fn main() {
    let tol = Tolerances::default();
    let params = SearchParams::default();
    let y = full_matrix_space(2, &tol);
    let x = column_space(2, &tol);

    // Coefficient tensor of (a, v) -> a·v on the bases of M_2 and C_2.
    let d = x.dim();
    let m: Vec<CMatrix> = y
        .basis
        .iter()
        .map(|a| {
            let mut mk = CMatrix::zeros(d, d);
            for j in 0..d {
                let image = a * &x.basis[j];
                let coeffs = x.coefficients(&image, &tol).expect("image stays in C_2");
                mk.column_mut(j).copy_from(&coeffs);
            }
            mk
        })
        .collect();
    let unit = y
        .coefficients(&ncshilov::matcore::identity(2), &tol)
        .expect("unit of M_2");
    let action =
        BilinearAction::new(y, x.clone(), m, Some(unit), &tol).expect("well-formed action");

    let cc = verify_cc(&action, 2, &tol, &params).expect("cc search");
    match &cc {
        CcVerdict::Pass => println!("action of M_2 on C_2: completely contractive"),
        other => {
            println!("unexpected verdict {other:?}");
            return;
        }
    }

    let env = triple_envelope(&x, &tol, 42).expect("envelope of C_2");
    let cert = derive_theta(&action, &env, cc, &tol, &params).expect("theta");
    println!("theta derived: {} realizing elements", cert.theta.len());
    println!("  unital:                 {:?}", cert.theta_unital);
    println!("  completely isometric:   {}", cert.theta_completely_isometric);
    println!("  adjointable range:      {}", cert.adjointable_range);

    // theta is multiplicative on the module action even though the
    // action is not a self-multiplication: check on a sample pair.
    let a = CVector::from_vec(vec![
        C64::new(1.0, 0.0),
        C64::new(0.5, 0.0),
        C64::new(0.0, 0.0),
        C64::new(-1.0, 0.0),
    ]);
    let act = action.coefficient_action(&a);
    println!(
        "  sample coefficient action has operator norm {:.6}",
        ncshilov::matcore::operator_norm(&act).expect("norm")
    );
}
