//! Multiplier algebras of an operator space, computed inside the
//! corners of its triple envelope.
//!
//! A left multiplier of `X` is an element `a` of the left corner
//! algebra `E(X)` with `a · J(X) ⊆ J(X)`; right multipliers live in
//! `F(X)` and act from the right.  In finite dimensions these are
//! plain linear conditions, so the algebras come out of exact
//! nullspace solves; only the cb-norm comparisons need optimization.

use crate::envelope::{complete_isometry_defect, triple_closure, IsometryReport, TripleEnvelope};
use crate::matcore::{
    frobenius_norm, herm_fn, identity, nullspace, operator_norm, span_membership, vectorize,
    CMatrix, CVector, Span, Tolerances, C64,
};
use crate::opspace::OperatorSpace;
use crate::search::{maximize_ratio, SearchParams};
use crate::{Error, Result};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which multiplier algebra a [`MultiplierAlgebra`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplierKind {
    Left,
    Right,
    AdjointableLeft,
    AdjointableRight,
}

/// A multiplier algebra realized concretely in the envelope ambient.
#[derive(Debug, Clone)]
pub struct MultiplierAlgebra {
    pub kind: MultiplierKind,
    /// Basis of realizing elements inside `E(X)` (or `F(X)`).
    pub element_basis: Vec<CMatrix>,
    /// For each basis element, the induced coefficient matrix on the
    /// basis of `X` (column `k` = coefficients of `a · b_k`).
    pub actions: Vec<CMatrix>,
    /// Whether the corner unit belongs to the algebra.
    pub unit_included: bool,
}

impl MultiplierAlgebra {
    pub fn dim(&self) -> usize {
        self.element_basis.len()
    }
}

/// Multiplier norm of an operator on `X`, with a cb-norm lower bound
/// for comparison.
#[derive(Debug, Clone)]
pub struct MultiplierNormResult {
    pub multiplier_norm: f64,
    pub cb_norm_lower: f64,
    pub realizing_element: CMatrix,
}

fn j_span(env: &TripleEnvelope, tol: &Tolerances) -> Result<Span> {
    Span::from_mats(&env.j_images, tol)
}

/// Coefficient matrix of `x ↦ a·x` (or `x ↦ x·a`), provided the image
/// stays inside `J(X)`.
fn action_of(
    env: &TripleEnvelope,
    a: &CMatrix,
    from_left: bool,
    tol: &Tolerances,
) -> Result<CMatrix> {
    let dim = env.source.dim();
    let mut act = CMatrix::zeros(dim, dim);
    for (k, jb) in env.j_images.iter().enumerate() {
        let image = if from_left { a * jb } else { jb * a };
        let (member, coeffs) = span_membership(&env.j_images, &image, tol)?;
        let coeffs = coeffs.filter(|_| member).ok_or_else(|| {
            Error::NotAMultiplier(format!(
                "element does not preserve J(X) on basis vector {k}"
            ))
        })?;
        act.column_mut(k).copy_from(&coeffs);
    }
    Ok(act)
}

fn solve_multipliers(
    env: &TripleEnvelope,
    corner_basis: &[CMatrix],
    from_left: bool,
    tol: &Tolerances,
) -> Result<Vec<CMatrix>> {
    let jsp = j_span(env, tol)?;
    let amb = env.quotient.ambient;
    let dim = env.source.dim();
    if corner_basis.is_empty() {
        return Ok(Vec::new());
    }
    // Stack, for every X-basis vector, the component of a·J(b_k) that
    // falls outside J(X); multipliers are the joint nullspace.
    let mut constraint = CMatrix::zeros(amb * amb * dim, corner_basis.len());
    for (m, e) in corner_basis.iter().enumerate() {
        for (k, jb) in env.j_images.iter().enumerate() {
            let image = if from_left { e * jb } else { jb * e };
            let tail = &image - jsp.project(&image);
            constraint
                .view_mut((amb * amb * k, m), (amb * amb, 1))
                .copy_from(&vectorize(&tail));
        }
    }
    let null = nullspace(&constraint, tol.rank_eps);
    let mut span = Span::new((amb, amb), tol.rank_eps);
    for t in &null {
        let mut a = CMatrix::zeros(amb, amb);
        for (m, e) in corner_basis.iter().enumerate() {
            a += e * t[m];
        }
        span.insert(&a)?;
    }
    Ok(span.ortho_basis().to_vec())
}

fn verify_product_closed(basis: &[CMatrix], tol: &Tolerances) -> Result<()> {
    let span = Span::from_mats(basis, tol)?;
    for a in basis {
        for b in basis {
            if !span.contains(&(a * b)) {
                return Err(Error::InconsistentNumerics(
                    "multiplier solution space is not closed under products".into(),
                ));
            }
        }
    }
    Ok(())
}

fn verify_action_injective(actions: &[CMatrix], tol: &Tolerances) -> Result<()> {
    if actions.is_empty() {
        return Ok(());
    }
    let dim = actions[0].nrows();
    let mut stacked = CMatrix::zeros(dim * dim, actions.len());
    for (m, a) in actions.iter().enumerate() {
        stacked.column_mut(m).copy_from(&vectorize(a));
    }
    if !nullspace(&stacked, tol.rank_eps).is_empty() {
        return Err(Error::InconsistentNumerics(
            "multiplier action is not injective".into(),
        ));
    }
    Ok(())
}

fn build_algebra(
    env: &TripleEnvelope,
    kind: MultiplierKind,
    element_basis: Vec<CMatrix>,
    from_left: bool,
    corner_unit: &CMatrix,
    tol: &Tolerances,
) -> Result<MultiplierAlgebra> {
    verify_product_closed(&element_basis, tol)?;
    let actions = element_basis
        .iter()
        .map(|a| action_of(env, a, from_left, tol))
        .collect::<Result<Vec<_>>>()?;
    verify_action_injective(&actions, tol)?;
    let unit_included = if element_basis.is_empty() {
        false
    } else {
        Span::from_mats(&element_basis, tol)?.contains(corner_unit)
    };
    Ok(MultiplierAlgebra {
        kind,
        element_basis,
        actions,
        unit_included,
    })
}

/// The left multiplier algebra `M_l(X) ⊂ E(X)`.
pub fn left_multipliers(env: &TripleEnvelope, tol: &Tolerances) -> Result<MultiplierAlgebra> {
    let basis = solve_multipliers(env, &env.e_corner.basis, true, tol)?;
    build_algebra(
        env,
        MultiplierKind::Left,
        basis,
        true,
        &env.e_corner.unit,
        tol,
    )
}

/// The right multiplier algebra `M_r(X) ⊂ F(X)`.
pub fn right_multipliers(env: &TripleEnvelope, tol: &Tolerances) -> Result<MultiplierAlgebra> {
    let basis = solve_multipliers(env, &env.f_corner.basis, false, tol)?;
    build_algebra(
        env,
        MultiplierKind::Right,
        basis,
        false,
        &env.f_corner.unit,
        tol,
    )
}

fn span_intersection(b1: &[CMatrix], b2: &[CMatrix], tol: &Tolerances) -> Result<Vec<CMatrix>> {
    if b1.is_empty() || b2.is_empty() {
        return Ok(Vec::new());
    }
    let shape = b1[0].shape();
    let rows = shape.0 * shape.1;
    let mut stacked = CMatrix::zeros(rows, b1.len() + b2.len());
    for (j, m) in b1.iter().enumerate() {
        stacked.column_mut(j).copy_from(&vectorize(m));
    }
    for (j, m) in b2.iter().enumerate() {
        stacked
            .column_mut(b1.len() + j)
            .copy_from(&(-vectorize(m)));
    }
    let null = nullspace(&stacked, tol.rank_eps);
    let mut span = Span::new(shape, tol.rank_eps);
    for t in &null {
        let mut a = CMatrix::zeros(shape.0, shape.1);
        for (j, m) in b1.iter().enumerate() {
            a += m * t[j];
        }
        span.insert(&a)?;
    }
    Ok(span.ortho_basis().to_vec())
}

/// The adjointable left multipliers `A_l(X) = {a ∈ M_l(X) : a* ∈ M_l(X)}`,
/// a C*-subalgebra of `E(X)`.
pub fn adjointable_left(env: &TripleEnvelope, tol: &Tolerances) -> Result<MultiplierAlgebra> {
    let ml = solve_multipliers(env, &env.e_corner.basis, true, tol)?;
    let ml_star: Vec<CMatrix> = ml.iter().map(|a| a.adjoint()).collect();
    let basis = span_intersection(&ml, &ml_star, tol)?;
    // A *-algebra: closure under adjoints on top of products.
    if !basis.is_empty() {
        let span = Span::from_mats(&basis, tol)?;
        for a in &basis {
            if !span.contains(&a.adjoint()) {
                return Err(Error::InconsistentNumerics(
                    "adjointable multiplier space is not *-closed".into(),
                ));
            }
        }
    }
    build_algebra(
        env,
        MultiplierKind::AdjointableLeft,
        basis,
        true,
        &env.e_corner.unit,
        tol,
    )
}

/// The adjointable right multipliers inside `F(X)`.
pub fn adjointable_right(env: &TripleEnvelope, tol: &Tolerances) -> Result<MultiplierAlgebra> {
    let mr = solve_multipliers(env, &env.f_corner.basis, false, tol)?;
    let mr_star: Vec<CMatrix> = mr.iter().map(|a| a.adjoint()).collect();
    let basis = span_intersection(&mr, &mr_star, tol)?;
    build_algebra(
        env,
        MultiplierKind::AdjointableRight,
        basis,
        false,
        &env.f_corner.unit,
        tol,
    )
}

/// Find the realizing element for a coefficient operator on `X` inside
/// a multiplier algebra.
pub fn realize_in(
    malg: &MultiplierAlgebra,
    op: &CMatrix,
    tol: &Tolerances,
) -> Result<CMatrix> {
    let dim = op.nrows();
    if op.ncols() != dim {
        return Err(Error::InvalidInput("operator must be square on X".into()));
    }
    if malg.dim() == 0 {
        return Err(Error::NotAMultiplier("multiplier algebra is trivial".into()));
    }
    let mut stacked = CMatrix::zeros(dim * dim, malg.dim());
    for (m, a) in malg.actions.iter().enumerate() {
        stacked.column_mut(m).copy_from(&vectorize(a));
    }
    let rhs = vectorize(op);
    let svd = stacked.clone().svd(true, true);
    let t = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::NumericalDegeneracy(format!("multiplier solve failed: {e}")))?;
    let residual = (&stacked * &t - &rhs).norm();
    if residual > tol.rank_eps * (1.0 + rhs.norm()) {
        return Err(Error::NotAMultiplier(format!(
            "operator is not realized by the multiplier algebra (residual {residual:.3e})"
        )));
    }
    let shape = malg.element_basis[0].shape();
    let mut a = CMatrix::zeros(shape.0, shape.1);
    for (m, e) in malg.element_basis.iter().enumerate() {
        a += e * t[m];
    }
    Ok(a)
}

/// Multiplier norm of `op` (the operator norm of its unique realizing
/// element) together with a certified lower bound on its cb norm as a
/// map on `X`, searched up to level `dim(X)`.
pub fn multiplier_norm(
    env: &TripleEnvelope,
    malg: &MultiplierAlgebra,
    op: &CMatrix,
    tol: &Tolerances,
    params: &SearchParams,
) -> Result<MultiplierNormResult> {
    multiplier_norm_capped(env, malg, op, env.source.dim().max(1), tol, params)
}

/// As [`multiplier_norm`] with an explicit level cap for the cb-norm
/// search, for callers working with level-determined spaces.
pub fn multiplier_norm_capped(
    env: &TripleEnvelope,
    malg: &MultiplierAlgebra,
    op: &CMatrix,
    level_cap: usize,
    tol: &Tolerances,
    params: &SearchParams,
) -> Result<MultiplierNormResult> {
    let a = realize_in(malg, op, tol)?;
    let m_norm = operator_norm(&a)?;
    let cb = cb_norm_lower(&env.source, op, level_cap, params)?;
    if cb > m_norm + tol.norm_eps {
        return Err(Error::InconsistentNumerics(format!(
            "cb lower bound {cb:.6} exceeds the multiplier norm {m_norm:.6}"
        )));
    }
    Ok(MultiplierNormResult {
        multiplier_norm: m_norm,
        cb_norm_lower: cb,
        realizing_element: a,
    })
}

/// Best lower bound found for the cb norm of the coefficient operator
/// `op` acting on `x`, over levels `1..=level_cap`.
pub fn cb_norm_lower(
    x: &OperatorSpace,
    op: &CMatrix,
    level_cap: usize,
    params: &SearchParams,
) -> Result<f64> {
    let dim = x.dim();
    let images: Vec<CMatrix> = (0..dim)
        .map(|k| {
            let mut m = CMatrix::zeros(x.rows, x.cols);
            for j in 0..dim {
                m += &x.basis[j] * op[(j, k)];
            }
            m
        })
        .collect();
    let mut best = 0.0f64;
    for n in 1..=level_cap {
        let mut numer = Vec::with_capacity(n * n * dim);
        let mut denom = Vec::with_capacity(n * n * dim);
        for i in 0..n {
            for j in 0..n {
                let e = crate::matcore::unit_matrix(n, n, i, j);
                for k in 0..dim {
                    numer.push(crate::matcore::kron(&e, &images[k]));
                    denom.push(crate::matcore::kron(&e, &x.basis[k]));
                }
            }
        }
        let level_params = params
            .clone()
            .with_seed(params.seed ^ (0xCB00 + n as u64));
        let res = maximize_ratio(&numer, &denom, &level_params)?;
        best = best.max(res.value);
    }
    Ok(best)
}

/// Verify the left order bounded criterion for `op` at bound `m_bound`:
/// for tuples `(x_1..x_k)`, the block matrix
/// `M²[J(x_i)* J(x_j)] − [J(Sx_i)* J(Sx_j)]` must be positive
/// semidefinite.  The full basis tuple is always included — it is
/// decisive, since the columns of `J(X)` span the left corner's range —
/// plus `sample_count` random tuples.  Returns the most negative
/// eigenvalue seen along with the verdict.
pub fn lob_verify(
    env: &TripleEnvelope,
    malg: &MultiplierAlgebra,
    op: &CMatrix,
    m_bound: f64,
    sample_count: usize,
    tol: &Tolerances,
    seed: u64,
) -> Result<(bool, f64)> {
    let a = realize_in(malg, op, tol)?;
    let dim = env.source.dim();
    let amb = env.quotient.ambient;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tuples: Vec<Vec<CVector>> = Vec::with_capacity(sample_count + 1);
    tuples.push(
        (0..dim)
            .map(|k| CVector::from_fn(dim, |i, _| C64::new(f64::from(u8::from(i == k)), 0.0)))
            .collect(),
    );
    for _ in 0..sample_count {
        let k = rng.gen_range(1..=dim);
        tuples.push(
            (0..k)
                .map(|_| {
                    CVector::from_fn(dim, |_, _| {
                        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    })
                })
                .collect(),
        );
    }
    let j_of = |c: &CVector| -> CMatrix {
        let mut m = CMatrix::zeros(amb, amb);
        for (k, jb) in env.j_images.iter().enumerate() {
            m += jb * c[k];
        }
        m
    };
    let mut worst = f64::INFINITY;
    for tuple in &tuples {
        let k = tuple.len();
        let jxs: Vec<CMatrix> = tuple.iter().map(&j_of).collect();
        let sxs: Vec<CMatrix> = jxs.iter().map(|jx| &a * jx).collect();
        let mut gap = CMatrix::zeros(k * amb, k * amb);
        for i in 0..k {
            for j in 0..k {
                let block = (jxs[i].adjoint() * &jxs[j]).scale(m_bound * m_bound)
                    - sxs[i].adjoint() * &sxs[j];
                gap.view_mut((i * amb, j * amb), (amb, amb)).copy_from(&block);
            }
        }
        let sym = (&gap + gap.adjoint()).scale(0.5);
        let eig = nalgebra::SymmetricEigen::new(sym);
        let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        worst = worst.min(min_eig);
    }
    let scale = 1.0 + m_bound * m_bound;
    Ok((worst >= -tol.norm_eps * scale, worst))
}

/// Polar decomposition `t = V·|t|` inside an adjointable multiplier
/// algebra: `|t| = (t*t)^{1/2}` and `V` the partial isometry with the
/// same kernel as `t`.  Both factors stay inside the algebra.
pub fn polar_decompose(
    malg: &MultiplierAlgebra,
    t_elem: &CMatrix,
    tol: &Tolerances,
) -> Result<(CMatrix, CMatrix)> {
    if !matches!(
        malg.kind,
        MultiplierKind::AdjointableLeft | MultiplierKind::AdjointableRight
    ) {
        return Err(Error::InvalidInput(
            "polar decomposition requires an adjointable multiplier algebra".into(),
        ));
    }
    let span = Span::from_mats(&malg.element_basis, tol)?;
    if !span.contains(t_elem) {
        return Err(Error::InvalidInput(
            "element does not belong to the multiplier algebra".into(),
        ));
    }
    let tt = t_elem.adjoint() * t_elem;
    let abs_t = herm_fn(&tt, tol, |l| l.max(0.0).sqrt())?;
    let scale = operator_norm(t_elem)?;
    let cut = (tol.rank_eps.sqrt() * (1.0 + scale)).max(1e-12);
    let abs_inv = herm_fn(&tt, tol, |l| {
        let s = l.max(0.0).sqrt();
        if s > cut {
            1.0 / s
        } else {
            0.0
        }
    })?;
    let v = t_elem * &abs_inv;
    // Reconstruction and the partial-isometry law.
    if frobenius_norm(&(t_elem - &v * &abs_t)) > 1e-8 * (1.0 + scale) {
        return Err(Error::NumericalDegeneracy(
            "polar reconstruction failed; |t| is too ill-conditioned".into(),
        ));
    }
    if frobenius_norm(&(&v * v.adjoint() * &v - &v)) > 1e-8 * (1.0 + scale) {
        return Err(Error::NumericalDegeneracy(
            "polar factor is not a partial isometry".into(),
        ));
    }
    if !span.contains(&v) || !span.contains(&abs_t) {
        return Err(Error::InconsistentNumerics(
            "polar factors left the multiplier algebra".into(),
        ));
    }
    Ok((v, abs_t))
}

/// Banach–Stone factorization of a unital complete isometry between
/// operator algebras.
#[derive(Debug, Clone)]
pub struct BanachStoneResult {
    /// `u = T(1)`, a unitary.
    pub u: CMatrix,
    /// `π` with `T(a) = u·π(a)` — the factorization from the proof.
    pub pi_proof_images: Vec<CMatrix>,
    /// `π'` with `T(a) = u^{-1}·π'(a)` — the statement's convention.
    pub pi_statement_images: Vec<CMatrix>,
    pub u_unitary_defect: f64,
    /// Whether the proof-form `π` is a unital homomorphism.
    pub pi_is_homomorphism: bool,
    pub pi_report: IsometryReport,
    /// Whether `T` extends to a triple isomorphism of the generated
    /// ternary systems.
    pub triple_promotion_ok: bool,
}

fn check_unital_algebra(
    x: &OperatorSpace,
    unit_coeffs: &CVector,
    tol: &Tolerances,
) -> Result<CMatrix> {
    if x.rows != x.cols {
        return Err(Error::InvalidInput(
            "a unital operator algebra needs a square ambient".into(),
        ));
    }
    let e = x.element(unit_coeffs);
    let span = Span::from_mats(&x.basis, tol)?;
    for a in &x.basis {
        for b in &x.basis {
            if !span.contains(&(a * b)) {
                return Err(Error::InvalidInput(
                    "basis is not closed under products; not an operator algebra".into(),
                ));
            }
        }
        if frobenius_norm(&(&e * a - a)) > 1e-8 * (1.0 + frobenius_norm(a))
            || frobenius_norm(&(a * &e - a)) > 1e-8 * (1.0 + frobenius_norm(a))
        {
            return Err(Error::InvalidInput(
                "supplied unit does not act as an identity".into(),
            ));
        }
    }
    Ok(e)
}

/// Paired triple closure: extend the correspondence `J(a_k) ↦ images_k`
/// through triple products, verifying well-definedness along the way.
fn promote_to_triple_iso(
    from: &[CMatrix],
    to: &[CMatrix],
    tol: &Tolerances,
) -> Result<bool> {
    let mut pairs: Vec<(CMatrix, CMatrix)> = from
        .iter()
        .cloned()
        .zip(to.iter().cloned())
        .collect();
    let mut span = Span::from_mats(from, tol)?;
    // from[..] may be linearly dependent only if to[..] matches; we
    // assume independent bases here (operator space bases are).
    let mut frontier = 0usize;
    while frontier < pairs.len() {
        let n = pairs.len();
        if n > from[0].nrows() * from[0].ncols() {
            return Err(Error::NumericalDegeneracy(
                "triple promotion exceeded the ambient dimension".into(),
            ));
        }
        let mut grew = false;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i < frontier && j < frontier && k < frontier {
                        continue;
                    }
                    let g1 = &pairs[i].0 * pairs[j].0.adjoint() * &pairs[k].0;
                    let g2 = &pairs[i].1 * pairs[j].1.adjoint() * &pairs[k].1;
                    if span.insert(&g1)? {
                        pairs.push((g1, g2));
                        grew = true;
                    } else {
                        // Dependent: the image must match the linear
                        // prediction from existing pairs.
                        let basis: Vec<CMatrix> =
                            pairs.iter().map(|(a, _)| a.clone()).collect();
                        let (member, coeffs) = span_membership(&basis, &g1, tol)?;
                        let coeffs = coeffs.filter(|_| member).ok_or_else(|| {
                            Error::NumericalDegeneracy(
                                "triple closure membership became ambiguous".into(),
                            )
                        })?;
                        let mut predicted =
                            CMatrix::zeros(g2.nrows(), g2.ncols());
                        for (m, (_, b2)) in pairs.iter().enumerate() {
                            predicted += b2 * coeffs[m];
                        }
                        if frobenius_norm(&(&predicted - &g2))
                            > tol.norm_eps * (1.0 + frobenius_norm(&g2))
                        {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        frontier = n;
        if !grew {
            break;
        }
    }
    Ok(true)
}

/// Factor a unital completely isometric surjection `T: A → B` between
/// operator algebras as `T(a) = u·π(a)` with `u = T(1)` unitary and `π`
/// a completely isometric unital homomorphism.  Both the proof-form and
/// the statement-form (`T(a) = u^{-1}·π'(a)`) factorizations are
/// returned.
pub fn banach_stone(
    a_space: &OperatorSpace,
    a_unit: &CVector,
    b_space: &OperatorSpace,
    b_unit: &CVector,
    tmap: &CMatrix,
    tol: &Tolerances,
    params: &SearchParams,
) -> Result<BanachStoneResult> {
    let _ea = check_unital_algebra(a_space, a_unit, tol)?;
    let _eb = check_unital_algebra(b_space, b_unit, tol)?;
    let dim = a_space.dim();
    if b_space.dim() != dim || tmap.nrows() != dim || tmap.ncols() != dim {
        return Err(Error::InvalidInput(
            "Banach-Stone requires a square coefficient bijection".into(),
        ));
    }
    let images: Vec<CMatrix> = (0..dim)
        .map(|k| {
            let mut m = CMatrix::zeros(b_space.rows, b_space.cols);
            for j in 0..dim {
                m += &b_space.basis[j] * tmap[(j, k)];
            }
            m
        })
        .collect();
    let cap = a_space.rows.max(b_space.rows);
    let fwd = complete_isometry_defect(a_space, &images, cap, tol, params)?;
    if !fwd.is_complete_isometry {
        return Err(Error::NotIsometric(fwd.defect));
    }
    // Reverse direction: T^{-1} must be completely contractive too.
    let tinv = tmap
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("coefficient map is not invertible".into()))?;
    let back_images: Vec<CMatrix> = (0..dim)
        .map(|k| {
            let mut m = CMatrix::zeros(a_space.rows, a_space.cols);
            for j in 0..dim {
                m += &a_space.basis[j] * tinv[(j, k)];
            }
            m
        })
        .collect();
    let bwd = complete_isometry_defect(b_space, &back_images, cap, tol, params)?;
    if !bwd.is_complete_isometry {
        return Err(Error::NotIsometric(bwd.defect));
    }
    let u = {
        let mut m = CMatrix::zeros(b_space.rows, b_space.cols);
        for j in 0..dim {
            let c = (tmap * a_unit)[j];
            m += &b_space.basis[j] * c;
        }
        m
    };
    let n = u.nrows();
    let u_unitary_defect = operator_norm(&(u.adjoint() * &u - identity(n)))?
        .max(operator_norm(&(&u * u.adjoint() - identity(n)))?);
    if u_unitary_defect > tol.norm_eps {
        return Err(Error::StructureViolation(format!(
            "T(1) is not unitary (defect {u_unitary_defect:.3e}); T is not onto an operator algebra"
        )));
    }
    let pi_proof_images: Vec<CMatrix> = images.iter().map(|t| u.adjoint() * t).collect();
    let pi_statement_images: Vec<CMatrix> = images.iter().map(|t| &u * t).collect();
    // Homomorphism check for the proof form, on basis products.
    let mut pi_is_homomorphism = true;
    'outer: for (i, bi) in a_space.basis.iter().enumerate() {
        for (j, bj) in a_space.basis.iter().enumerate() {
            let prod = bi * bj;
            let c = a_space.coefficients(&prod, tol)?;
            let mut pi_prod = CMatrix::zeros(b_space.rows, b_space.cols);
            for (k, img) in pi_proof_images.iter().enumerate() {
                pi_prod += img * c[k];
            }
            let direct = &pi_proof_images[i] * &pi_proof_images[j];
            if frobenius_norm(&(&pi_prod - &direct))
                > tol.norm_eps * (1.0 + frobenius_norm(&direct))
            {
                pi_is_homomorphism = false;
                break 'outer;
            }
        }
    }
    let pi_report = complete_isometry_defect(a_space, &pi_proof_images, cap, tol, params)?;
    let triple_promotion_ok = promote_to_triple_iso(&a_space.basis, &images, tol)?;
    Ok(BanachStoneResult {
        u,
        pi_proof_images,
        pi_statement_images,
        u_unitary_defect,
        pi_is_homomorphism,
        pi_report,
        triple_promotion_ok,
    })
}

/// Triple system generated by the concrete space (used by callers that
/// want the promoted system itself).
pub fn generated_triple_system(x: &OperatorSpace, tol: &Tolerances) -> Result<Vec<CMatrix>> {
    triple_closure(&x.basis, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::triple_envelope;
    use crate::matcore::{from_real, zeros};
    use crate::opspace::{column_space, diagonal_2, full_matrix_space, upper_triangular_2};
    use approx::assert_relative_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn params() -> SearchParams {
        SearchParams::default()
    }

    #[test]
    fn t2_left_multipliers_are_t2() {
        let t = tol();
        let x = upper_triangular_2(&t);
        let env = triple_envelope(&x, &t, 42).unwrap();
        let ml = left_multipliers(&env, &t).unwrap();
        assert_eq!(ml.dim(), 3);
        assert!(ml.unit_included);
        let mr = right_multipliers(&env, &t).unwrap();
        assert_eq!(mr.dim(), 3);
        let al = adjointable_left(&env, &t).unwrap();
        assert_eq!(al.dim(), 2);
    }

    #[test]
    fn column_space_multipliers() {
        let t = tol();
        let x = column_space(2, &t);
        let env = triple_envelope(&x, &t, 42).unwrap();
        let ml = left_multipliers(&env, &t).unwrap();
        assert_eq!(ml.dim(), 4);
        let mr = right_multipliers(&env, &t).unwrap();
        assert_eq!(mr.dim(), 1);
    }

    #[test]
    fn m2_adjointable_is_m2() {
        let t = tol();
        let x = full_matrix_space(2, &t);
        let env = triple_envelope(&x, &t, 42).unwrap();
        let al = adjointable_left(&env, &t).unwrap();
        assert_eq!(al.dim(), 4);
        assert!(al.unit_included);
    }

    #[test]
    fn multiplier_norm_of_identity_and_scalings() {
        let t = tol();
        let x = upper_triangular_2(&t);
        let env = triple_envelope(&x, &t, 42).unwrap();
        let ml = left_multipliers(&env, &t).unwrap();
        let id = identity(3);
        let res = multiplier_norm(&env, &ml, &id, &t, &params()).unwrap();
        assert_relative_eq!(res.multiplier_norm, 1.0, epsilon = 1e-8);
        let res2 = multiplier_norm(&env, &ml, &id.scale(2.0), &t, &params()).unwrap();
        assert_relative_eq!(res2.multiplier_norm, 2.0, epsilon = 1e-8);
        assert!(res2.cb_norm_lower <= 2.0 + 1e-8);
        assert!(res2.cb_norm_lower >= 2.0 - 1e-6);
    }

    #[test]
    fn non_multiplier_is_rejected() {
        let t = tol();
        let x = upper_triangular_2(&t);
        let env = triple_envelope(&x, &t, 42).unwrap();
        let ml = left_multipliers(&env, &t).unwrap();
        // The coefficient operator swapping e11 and e22 while fixing
        // e12 is not left multiplication by anything in T_2.
        let mut op = zeros(3, 3);
        op[(0, 2)] = C64::new(1.0, 0.0);
        op[(1, 1)] = C64::new(1.0, 0.0);
        op[(2, 0)] = C64::new(1.0, 0.0);
        assert!(matches!(
            multiplier_norm(&env, &ml, &op, &t, &params()),
            Err(Error::NotAMultiplier(_))
        ));
    }

    #[test]
    fn lob_accepts_true_bound_and_rejects_smaller() {
        let t = tol();
        let x = upper_triangular_2(&t);
        let env = triple_envelope(&x, &t, 42).unwrap();
        let ml = left_multipliers(&env, &t).unwrap();
        // Left multiplication by e11 on T_2.
        let mut op = zeros(3, 3);
        op[(0, 0)] = C64::new(1.0, 0.0);
        op[(1, 1)] = C64::new(1.0, 0.0);
        let res = multiplier_norm(&env, &ml, &op, &t, &params()).unwrap();
        let (ok, _) = lob_verify(&env, &ml, &op, res.multiplier_norm, 50, &t, 7).unwrap();
        assert!(ok);
        let (ok, worst) =
            lob_verify(&env, &ml, &op, 0.9 * res.multiplier_norm, 50, &t, 7).unwrap();
        assert!(!ok, "0.9x bound should fail, worst eigenvalue {worst}");
    }

    #[test]
    fn polar_decomposition_examples() {
        let t = tol();
        let x = full_matrix_space(2, &t);
        let env = triple_envelope(&x, &t, 42).unwrap();
        let al = adjointable_left(&env, &t).unwrap();
        // The unit decomposes trivially.
        let unit = &env.e_corner.unit;
        let (v, abs) = polar_decompose(&al, unit, &t).unwrap();
        assert!(frobenius_norm(&(&v - unit)) < 1e-8);
        assert!(frobenius_norm(&(&abs - unit)) < 1e-8);
        // A random element reconstructs.
        let mut elem = zeros(al.element_basis[0].nrows(), al.element_basis[0].ncols());
        for (k, b) in al.element_basis.iter().enumerate() {
            elem += b * C64::new(0.3 + k as f64, 0.1 * k as f64);
        }
        let (v, abs) = polar_decompose(&al, &elem, &t).unwrap();
        assert!(frobenius_norm(&(&elem - &v * &abs)) < 1e-8);
    }

    #[test]
    fn banach_stone_identity_on_t2() {
        let t = tol();
        let x = upper_triangular_2(&t);
        // Unit of T_2 = e11 + e22 = basis elements 0 and 2.
        let unit = CVector::from_fn(3, |i, _| {
            if i == 0 || i == 2 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let res =
            banach_stone(&x, &unit, &x, &unit, &identity(3), &t, &params()).unwrap();
        assert!(res.u_unitary_defect < 1e-8);
        assert!(frobenius_norm(&(&res.u - identity(2))) < 1e-8);
        assert!(res.pi_is_homomorphism);
        assert!(res.pi_report.is_complete_isometry);
        assert!(res.triple_promotion_ok);
    }

    #[test]
    fn banach_stone_recovers_left_unitary_factor() {
        let t = tol();
        let x = full_matrix_space(2, &t);
        let unit = CVector::from_fn(4, |i, _| {
            if i == 0 || i == 3 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        // T(a) = u0 · a for a fixed unitary u0.
        let u0 = from_real(2, 2, &[0.6, 0.8, -0.8, 0.6]);
        let mut tmap = zeros(4, 4);
        for (k, b) in x.basis.iter().enumerate() {
            let c = x.coefficients(&(&u0 * b), &t).unwrap();
            tmap.column_mut(k).copy_from(&c);
        }
        let res = banach_stone(&x, &unit, &x, &unit, &tmap, &t, &params()).unwrap();
        assert!(frobenius_norm(&(&res.u - &u0)) < 1e-8);
        assert!(res.pi_is_homomorphism);
        // Proof form: T(a) = u·π(a) with π the identity.
        for (k, b) in x.basis.iter().enumerate() {
            assert!(frobenius_norm(&(&res.pi_proof_images[k] - b)) < 1e-8);
        }
        assert!(res.triple_promotion_ok);
    }

    #[test]
    fn banach_stone_swap_on_d2() {
        let t = tol();
        let x = diagonal_2(&t);
        let unit = CVector::from_element(2, C64::new(1.0, 0.0));
        let swap = from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let res = banach_stone(&x, &unit, &x, &unit, &swap, &t, &params()).unwrap();
        assert!(frobenius_norm(&(&res.u - identity(2))) < 1e-8);
        assert!(res.pi_is_homomorphism);
        assert!(res.triple_promotion_ok);
    }

    #[test]
    fn banach_stone_rejects_contractions() {
        let t = tol();
        let x = diagonal_2(&t);
        let unit = CVector::from_element(2, C64::new(1.0, 0.0));
        let shrink = from_real(2, 2, &[1.0, 0.0, 0.0, 0.5]);
        assert!(matches!(
            banach_stone(&x, &unit, &x, &unit, &shrink, &t, &params()),
            Err(Error::NotIsometric(_))
        ));
    }
}
