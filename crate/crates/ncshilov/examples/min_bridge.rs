//! Cross-validate Banach-space multipliers against operator-space
//! multipliers on MIN realizations.
//!
//! A finite-dimensional Banach space B embeds as an operator space
//! MIN(B) by evaluating sampled extreme dual functionals along the
//! diagonal.  Its multipliers can then be computed two independent
//! ways: on the Banach side as maps whose transpose fixes every
//! sampled functional line, and on the operator side as corner
//! multipliers of the triple envelope of the realization.
//!
//! For ℓ∞₂ the dual extremes are the four sign functionals, sampling
//! is exact, and both computations give the diagonal algebra D₂.  For
//! ℓ1₂ the dual extreme set is a whole torus; sampling a finite circle
//! grid still pins the multipliers down to the scalars, with the two
//! norm computations agreeing to sampling resolution.
//!
//! Run with: cargo run --release --example min_bridge

use ncshilov::matcore::Tolerances;
use ncshilov::minspace::{
    cross_validate_multipliers, env_banach_check, realize_min, BanachSpace,
};

fn main() {
    let tol = Tolerances::default();
    let seed = 42;

    for (b, samples) in [(BanachSpace::linf(2), 8), (BanachSpace::l1(2), 48)] {
        let label = b.label.clone();
        let r = realize_min(&b, samples, seed, &tol).expect("realization");
        println!(
            "{label}: {} sampled dual extremes, sphere defect {:.2e}, norm gap {:.2e}",
            r.functionals.len(),
            env_banach_check(&r),
            r.realization_gap(64, seed)
        );
        let cv = cross_validate_multipliers(&r, &tol, seed).expect("cross validation");
        println!(
            "  multipliers: banach side dim {}, envelope side dim {} ({})",
            cv.banach_dim,
            cv.envelope_dim,
            if cv.dims_agree { "agree" } else { "DISAGREE" }
        );
        println!("  worst norm gap between the two computations: {:.2e}", cv.max_norm_gap);
    }
}
