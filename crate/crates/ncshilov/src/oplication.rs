//! Oplications: completely contractive bilinear actions `Y × X → X`
//! with a unit vector, the derived map `θ: Y → M_l(X)`, and the
//! BRS-style characterization certificates built from it.

use crate::envelope::{complete_isometry_defect, TripleEnvelope};
use crate::matcore::{
    frobenius_norm, operator_norm, CMatrix, CVector, Span, Tolerances, C64,
};
use crate::multiplier::{adjointable_left, left_multipliers, realize_in, MultiplierAlgebra};
use crate::opspace::{LevelElement, OperatorSpace};
use crate::search::{maximize_ratio, SearchParams};
use rand_chacha::rand_core::SeedableRng;
use crate::{Error, Result};

/// A bilinear action of `Y` on `X`, given as one coefficient matrix per
/// `Y`-basis vector: `m[k]` sends coefficients of `x` to coefficients
/// of `y_k ∘ x`.
#[derive(Debug, Clone)]
pub struct BilinearAction {
    pub y: OperatorSpace,
    pub x: OperatorSpace,
    pub m: Vec<CMatrix>,
    /// Coefficients of the unit element `e ∈ Y` with `e ∘ x = x`.
    pub identity_coeffs: Option<CVector>,
}

impl BilinearAction {
    pub fn new(
        y: OperatorSpace,
        x: OperatorSpace,
        m: Vec<CMatrix>,
        identity_coeffs: Option<CVector>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if m.len() != y.dim() {
            return Err(Error::InvalidInput(format!(
                "need one action matrix per Y basis vector ({} != {})",
                m.len(),
                y.dim()
            )));
        }
        let d = x.dim();
        if m.iter().any(|a| a.nrows() != d || a.ncols() != d) {
            return Err(Error::InvalidInput(
                "action matrices must be square on the X basis".into(),
            ));
        }
        let action = BilinearAction {
            y,
            x,
            m,
            identity_coeffs,
        };
        if let Some(e) = &action.identity_coeffs {
            if e.len() != action.y.dim() {
                return Err(Error::InvalidInput("unit coefficient length mismatch".into()));
            }
            let me = action.coefficient_action(e);
            let defect = frobenius_norm(&(&me - crate::matcore::identity(d)));
            if defect > 1e3 * tol.rank_eps * (d as f64) {
                return Err(Error::InvalidInput(format!(
                    "unit does not act as the identity (defect {defect:.3e})"
                )));
            }
            let enorm = action.y.level_norm(&LevelElement::scalar(e.clone()))?;
            if enorm > 1.0 + 1e3 * tol.rank_eps {
                return Err(Error::InvalidInput(format!(
                    "unit has norm {enorm:.6} > 1"
                )));
            }
        }
        Ok(action)
    }

    /// The coefficient matrix of `x ↦ y ∘ x` for `y = Σ c_k y_k`.
    pub fn coefficient_action(&self, c: &CVector) -> CMatrix {
        let d = self.x.dim();
        let mut out = CMatrix::zeros(d, d);
        for (k, mk) in self.m.iter().enumerate() {
            out += mk * c[k];
        }
        out
    }

    /// Whether `Y` and `X` are the same concrete space, in which case
    /// the action is a candidate multiplication.
    pub fn is_self_action(&self) -> bool {
        self.y.rows == self.x.rows
            && self.y.cols == self.x.cols
            && self.y.dim() == self.x.dim()
            && self
                .y
                .basis
                .iter()
                .zip(self.x.basis.iter())
                .all(|(a, b)| frobenius_norm(&(a - b)) <= 1e-12 * (1.0 + frobenius_norm(a)))
    }
}

/// Verdict of the complete-contractivity test for a bilinear action.
#[derive(Debug, Clone)]
pub enum CcVerdict {
    Pass,
    Fail {
        level: usize,
        ratio: f64,
        y_witness: LevelElement,
        x_witness: LevelElement,
    },
    Inconclusive {
        ratio: f64,
    },
}

impl CcVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, CcVerdict::Pass)
    }
}

/// Block coefficients of the level-`n` product `[Σ_k m(y_ik, x_kj)]`.
fn product_blocks(a: &BilinearAction, ys: &[CVector], xs: &[CVector], n: usize) -> Vec<CVector> {
    let d = a.x.dim();
    let mut blocks = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut c = CVector::zeros(d);
            for k in 0..n {
                c += a.coefficient_action(&ys[i * n + k]) * &xs[k * n + j];
            }
            blocks.push(c);
        }
    }
    blocks
}

fn slot_coeffs(dim: usize, n: usize, slot: usize, index: usize) -> Vec<CVector> {
    let mut out = vec![CVector::zeros(dim); n * n];
    out[slot][index] = C64::new(1.0, 0.0);
    out
}

/// Ratio `‖product‖ / ‖free argument‖` maximized over one argument
/// with the other held fixed; both sides are linear families.
fn maximize_one_side(
    a: &BilinearAction,
    fixed_y: Option<&[CVector]>,
    fixed_x: Option<&[CVector]>,
    n: usize,
    params: &SearchParams,
) -> Result<Option<(f64, Vec<CVector>)>> {
    let (free_space, free_dim) = if fixed_y.is_some() {
        (&a.x, a.x.dim())
    } else {
        (&a.y, a.y.dim())
    };
    let mut numer = Vec::with_capacity(n * n * free_dim);
    let mut denom = Vec::with_capacity(n * n * free_dim);
    for slot in 0..n * n {
        for idx in 0..free_dim {
            let unit = slot_coeffs(free_dim, n, slot, idx);
            let blocks = match fixed_y {
                Some(ys) => product_blocks(a, ys, &unit, n),
                None => product_blocks(a, &unit, fixed_x.unwrap(), n),
            };
            numer.push(a.x.assemble(&LevelElement::new(n, blocks)?)?);
            denom.push(free_space.assemble(&LevelElement::new(n, unit)?)?);
        }
    }
    // A fixed argument in the kernel of the action yields a zero
    // numerator family; report ratio 0 rather than a degeneracy.
    if numer.iter().all(|m| frobenius_norm(m) < 1e-12) {
        return Ok(None);
    }
    let res = maximize_ratio(&numer, &denom, params)?;
    let coeffs = (0..n * n)
        .map(|s| CVector::from_fn(free_dim, |k, _| res.coeffs[s * free_dim + k]))
        .collect();
    Ok(Some((res.value, coeffs)))
}

/// Estimate the maximal ratio `‖[Σ_k y_ik ∘ x_kj]‖ / (‖y‖_n ‖x‖_n)`
/// over levels `1..=level_cap` and return the three-valued verdict.
///
/// The product is linear in each argument, so the supremum is found by
/// alternating exact one-sided ratio maximizations from several seeded
/// starting points for the `y` argument.
pub fn verify_cc(
    a: &BilinearAction,
    level_cap: usize,
    tol: &Tolerances,
    params: &SearchParams,
) -> Result<CcVerdict> {
    if level_cap < 1 {
        return Err(Error::InvalidInput("level_cap must be at least 1".into()));
    }
    let dy = a.y.dim();
    let mut best: Option<(f64, usize, Vec<CVector>, Vec<CVector>)> = None;
    for n in 1..=level_cap {
        let seed = params.seed ^ (0x0CC0 + n as u64);
        let inner = SearchParams {
            restarts: 6,
            max_iters: 80,
            seed,
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        // Starts: each Y basis vector on the diagonal, the unit if
        // present, and two random fillings of all slots.
        let mut starts: Vec<Vec<CVector>> = Vec::new();
        for k in 0..dy {
            let mut ys = vec![CVector::zeros(dy); n * n];
            for i in 0..n {
                ys[i * n + i][k] = C64::new(1.0, 0.0);
            }
            starts.push(ys);
        }
        if let Some(e) = &a.identity_coeffs {
            let mut ys = vec![CVector::zeros(dy); n * n];
            for i in 0..n {
                ys[i * n + i] = e.clone();
            }
            starts.push(ys);
        }
        for _ in 0..2 {
            starts.push(
                (0..n * n)
                    .map(|_| crate::search::random_unit(dy, &mut rng))
                    .collect(),
            );
        }
        for start in starts {
            let mut ys = start;
            let mut level_best: Option<(f64, Vec<CVector>, Vec<CVector>)> = None;
            for _ in 0..3 {
                let Some((_, xs)) = maximize_one_side(a, Some(&ys), None, n, &inner)? else {
                    break;
                };
                let Some((_, new_ys)) = maximize_one_side(a, None, Some(&xs), n, &inner)? else {
                    break;
                };
                ys = new_ys;
                // Certify the pair with directly computed norms.
                let yn = a.y.level_norm(&LevelElement::new(n, ys.clone())?)?;
                let xn = a.x.level_norm(&LevelElement::new(n, xs.clone())?)?;
                if yn <= 1e-9 || xn <= 1e-9 {
                    break;
                }
                let pn =
                    a.x.level_norm(&LevelElement::new(n, product_blocks(a, &ys, &xs, n))?)?;
                let ratio = pn / (yn * xn);
                if level_best.as_ref().map_or(true, |(b, ..)| ratio > *b) {
                    level_best = Some((ratio, ys.clone(), xs.clone()));
                }
            }
            if let Some((ratio, ys, xs)) = level_best {
                if best.as_ref().map_or(true, |(b, ..)| ratio > *b) {
                    best = Some((ratio, n, ys, xs));
                }
            }
        }
        if best.as_ref().map_or(false, |(b, ..)| *b > 1.0 + 10.0 * tol.norm_eps) {
            break;
        }
    }
    let Some((ratio, level, ys, xs)) = best else {
        return Err(Error::NumericalDegeneracy(
            "all probed arguments annihilated the action".into(),
        ));
    };
    if ratio <= 1.0 + tol.norm_eps {
        Ok(CcVerdict::Pass)
    } else if ratio > 1.0 + 10.0 * tol.norm_eps {
        Ok(CcVerdict::Fail {
            level,
            ratio,
            y_witness: LevelElement::new(level, ys)?,
            x_witness: LevelElement::new(level, xs)?,
        })
    } else {
        Ok(CcVerdict::Inconclusive { ratio })
    }
}

/// Certificate from deriving the canonical `θ: Y → M_l(X)`.
#[derive(Debug, Clone)]
pub struct OplicationCertificate {
    pub cc_verdict: CcVerdict,
    /// Realizing elements `θ(y_k)` inside `E(X)`.
    pub theta: Vec<CMatrix>,
    /// `θ(e)` equals the corner unit (when a unit is present).
    pub theta_unital: Option<bool>,
    /// `θ(y ∘ y') = θ(y)θ(y')` — meaningful only for self-actions.
    pub theta_homomorphism: Option<bool>,
    pub theta_completely_isometric: bool,
    /// All `θ(y_k)` lie in `A_l(X)`.
    pub adjointable_range: bool,
}

/// Derive `θ` for an action already known to be completely contractive
/// (callers must have `verify_cc` pass first; `cc` is recorded in the
/// certificate).  For a contractive unital action every `y` must
/// realize as a left multiplier; a failed solve is a numerics alarm,
/// not a negative result.
pub fn derive_theta(
    a: &BilinearAction,
    env: &TripleEnvelope,
    cc: CcVerdict,
    tol: &Tolerances,
    params: &SearchParams,
) -> Result<OplicationCertificate> {
    if !cc.passed() {
        return Err(Error::NotApplicable(
            "theta is only derived for completely contractive actions".into(),
        ));
    }
    let ml = left_multipliers(env, tol)?;
    let mut theta = Vec::with_capacity(a.y.dim());
    for (k, mk) in a.m.iter().enumerate() {
        let elem = realize_in(&ml, mk, tol).map_err(|e| {
            Error::TheoremViolation(format!(
                "contractive action failed to realize y_{k} as a left multiplier ({e}); \
                 this contradicts the oplication theorem and signals bad numerics"
            ))
        })?;
        theta.push(elem);
    }
    let theta_unital = a.identity_coeffs.as_ref().map(|e| {
        let mut te = CMatrix::zeros(env.quotient.ambient, env.quotient.ambient);
        for (k, t) in theta.iter().enumerate() {
            te += t * e[k];
        }
        frobenius_norm(&(&te - &env.e_corner.unit)) <= 1e-7 * (1.0 + env.quotient.ambient as f64)
    });
    let theta_homomorphism = if a.is_self_action() {
        let mut ok = true;
        'outer: for (i, mi) in a.m.iter().enumerate() {
            for j in 0..a.m.len() {
                // y_i ∘ y_j has coefficients = column j of m[i].
                let prod_coeffs = mi.column(j).into_owned();
                let mut lhs = CMatrix::zeros(theta[0].nrows(), theta[0].ncols());
                for (k, t) in theta.iter().enumerate() {
                    lhs += t * prod_coeffs[k];
                }
                let rhs = &theta[i] * &theta[j];
                if frobenius_norm(&(&lhs - &rhs)) > 1e-7 * (1.0 + frobenius_norm(&rhs)) {
                    ok = false;
                    break 'outer;
                }
            }
        }
        Some(ok)
    } else {
        None
    };
    let cap = a.y.rows.max(a.y.cols).max(1);
    let theta_completely_isometric =
        match complete_isometry_defect(&a.y, &theta, cap, tol, params) {
            Ok(rep) => rep.is_complete_isometry,
            Err(Error::InconsistentNumerics(msg)) => {
                return Err(Error::InconsistentNumerics(msg))
            }
            Err(e) => return Err(e),
        };
    let al = adjointable_left(env, tol)?;
    let adjointable_range = if al.dim() == 0 {
        theta.iter().all(|t| operator_norm(t).map_or(false, |n| n <= tol.rank_eps))
    } else {
        let span = Span::from_mats(&al.element_basis, tol)?;
        theta.iter().all(|t| span.contains(t))
    };
    Ok(OplicationCertificate {
        cc_verdict: cc,
        theta,
        theta_unital,
        theta_homomorphism,
        theta_completely_isometric,
        adjointable_range,
    })
}

/// A BRS-style certificate: is `(A, m, e)` an operator algebra?
#[derive(Debug, Clone)]
pub struct BrsCertificate {
    pub certificate: Option<OplicationCertificate>,
    pub cc_verdict: CcVerdict,
    /// Certified iff the action is cc and θ is a completely isometric
    /// unital homomorphism.
    pub is_operator_algebra: bool,
    /// Direct associativity of the multiplication tensor.
    pub associative: bool,
}

/// Multiplication tensor of a concrete operator algebra: one
/// coefficient matrix per basis vector, `m[k]` acting on coefficients
/// as left multiplication by `basis[k]`.  Fails if the product of two
/// basis elements leaves the span.
pub fn multiplication_tensor(x: &OperatorSpace, tol: &Tolerances) -> Result<Vec<CMatrix>> {
    let d = x.dim();
    let mut out = Vec::with_capacity(d);
    for k in 0..d {
        let mut mk = CMatrix::zeros(d, d);
        for j in 0..d {
            let prod = &x.basis[k] * &x.basis[j];
            let c = x.coefficients(&prod, tol).map_err(|_| {
                Error::InvalidInput(format!(
                    "products of basis elements {k} and {j} leave the space: \
                     not an algebra under matrix multiplication"
                ))
            })?;
            mk.column_mut(j).copy_from(&c);
        }
        out.push(mk);
    }
    Ok(out)
}

fn tensor_associative(m: &[CMatrix], tol: &Tolerances) -> bool {
    // m(a, m(b, c)) = m(m(a,b), c): as coefficient operators,
    // m[a]·m[b] must equal the action of the product a ∘ b.
    for mi in m.iter() {
        for (j, mj) in m.iter().enumerate() {
            let prod_coeffs = mi.column(j).into_owned();
            let mut action_of_prod = CMatrix::zeros(mi.nrows(), mi.ncols());
            for (k, mk) in m.iter().enumerate() {
                action_of_prod += mk * prod_coeffs[k];
            }
            let composed = mi * mj;
            if frobenius_norm(&(&action_of_prod - &composed))
                > 1e3 * tol.rank_eps * (1.0 + frobenius_norm(&composed))
            {
                return false;
            }
        }
    }
    true
}

/// Run the full BRS pipeline on a candidate multiplication for `A`.
pub fn brs_certify(
    a_space: &OperatorSpace,
    m: Vec<CMatrix>,
    e: CVector,
    env: &TripleEnvelope,
    tol: &Tolerances,
    params: &SearchParams,
) -> Result<BrsCertificate> {
    let action = BilinearAction::new(
        a_space.clone(),
        a_space.clone(),
        m,
        Some(e),
        tol,
    )?;
    let cap = a_space.dim().max(1).min(4);
    let cc = verify_cc(&action, cap, tol, params)?;
    let associative = tensor_associative(&action.m, tol);
    if !cc.passed() {
        return Ok(BrsCertificate {
            certificate: None,
            cc_verdict: cc,
            is_operator_algebra: false,
            associative,
        });
    }
    let cert = derive_theta(&action, env, cc.clone(), tol, params)?;
    let is_operator_algebra = cert.theta_completely_isometric
        && cert.theta_unital == Some(true)
        && cert.theta_homomorphism == Some(true);
    // When θ reports a homomorphism, the tensor must be associative.
    if cert.theta_homomorphism == Some(true) && !associative {
        return Err(Error::TheoremViolation(
            "θ is a homomorphism but the multiplication tensor is not associative".into(),
        ));
    }
    Ok(BrsCertificate {
        certificate: Some(cert),
        cc_verdict: cc,
        is_operator_algebra,
        associative,
    })
}

/// Which hypothesis of the nonassociative BRS lemma to check for the
/// unit vector `g = e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonassocCondition {
    /// `T ∈ M_l(X)` with `T g = 0` implies `T = 0`.
    FaithfulAtUnit,
    /// `J(g) J(g)*` is strictly positive in `E(X)`.
    StrictPositivity,
    /// `g · M_r(X)` is dense in (= spans) `X`.
    RightDensity,
}

/// Report from the nonassociative BRS check.
#[derive(Debug, Clone)]
pub struct NonassocReport {
    pub condition: NonassocCondition,
    pub condition_holds: bool,
    pub associative: bool,
    /// `θ(A)` exhausts `M_l(A)`.
    pub theta_spans_ml: bool,
    pub certificate: OplicationCertificate,
}

fn condition_holds(
    env: &TripleEnvelope,
    ml: &MultiplierAlgebra,
    jg: &CMatrix,
    condition: NonassocCondition,
    tol: &Tolerances,
) -> Result<bool> {
    match condition {
        NonassocCondition::FaithfulAtUnit => {
            // Nullspace of a ↦ a·J(g) over the multiplier basis.
            if ml.dim() == 0 {
                return Ok(true);
            }
            let amb = env.quotient.ambient;
            let mut stacked = CMatrix::zeros(amb * amb, ml.dim());
            for (k, a) in ml.element_basis.iter().enumerate() {
                stacked
                    .column_mut(k)
                    .copy_from(&crate::matcore::vectorize(&(a * jg)));
            }
            Ok(crate::matcore::nullspace(&stacked, tol.rank_eps).is_empty())
        }
        NonassocCondition::StrictPositivity => {
            // Smallest eigenvalue of J(g)J(g)* on the range of the left
            // corner unit.
            let gg = jg * jg.adjoint();
            let e_unit = &env.e_corner.unit;
            let (evals, evecs) = crate::matcore::herm_eig(e_unit, tol)?;
            let cols: Vec<usize> = evals
                .iter()
                .enumerate()
                .filter(|(_, &l)| l > 0.5)
                .map(|(i, _)| i)
                .collect();
            if cols.is_empty() {
                return Ok(false);
            }
            let mut v = CMatrix::zeros(e_unit.nrows(), cols.len());
            for (j, &i) in cols.iter().enumerate() {
                v.column_mut(j).copy_from(&evecs.column(i));
            }
            let compressed = v.adjoint() * &gg * &v;
            let (gevals, _) = crate::matcore::herm_eig(&compressed, tol)?;
            Ok(gevals.iter().all(|&l| l > tol.norm_eps))
        }
        NonassocCondition::RightDensity => {
            let mr = crate::multiplier::right_multipliers(env, tol)?;
            let products: Vec<CMatrix> =
                mr.element_basis.iter().map(|b| jg * b).collect();
            if products.is_empty() {
                return Ok(env.source.dim() == 0);
            }
            let span = Span::from_mats(&products, tol)?;
            Ok(env.j_images.iter().all(|j| span.contains(j)))
        }
    }
}

/// Nonassociative BRS: required only to be completely contractive as a
/// map `A' ⊗ A → A` (with `A'` a possibly different operator space
/// structure on the same coefficients) and unital; the selected lemma
/// condition then forces associativity.
pub fn nonassoc_brs(
    a_alt: &OperatorSpace,
    a_space: &OperatorSpace,
    m: Vec<CMatrix>,
    e: CVector,
    condition: NonassocCondition,
    env: &TripleEnvelope,
    tol: &Tolerances,
    params: &SearchParams,
) -> Result<NonassocReport> {
    let action = BilinearAction::new(a_alt.clone(), a_space.clone(), m, Some(e.clone()), tol)?;
    let cap = a_space.dim().max(1).min(4);
    let cc = verify_cc(&action, cap, tol, params)?;
    if !cc.passed() {
        return Err(Error::NotApplicable(
            "action is not completely contractive; the lemma does not apply".into(),
        ));
    }
    // g = J(e ∘ ·)... the distinguished vector is the unit of X itself:
    // e acts as the identity, so J(g) for g = the image of e in X is
    // J applied to the element with those coefficients when A' = A;
    // in general the lemma's g is the unit of the module X, supplied
    // here as the unit's action target. We use g = Σ e_k x_k when the
    // coefficient spaces align, otherwise the condition is not
    // expressible and we bail out.
    if e.len() != env.source.dim() {
        return Err(Error::NotApplicable(
            "unit coefficients do not live in X; cannot locate g".into(),
        ));
    }
    let amb = env.quotient.ambient;
    let mut jg = CMatrix::zeros(amb, amb);
    for (k, j) in env.j_images.iter().enumerate() {
        jg += j * e[k];
    }
    let ml = left_multipliers(env, tol)?;
    let holds = condition_holds(env, &ml, &jg, condition, tol)?;
    if !holds {
        return Err(Error::NotApplicable(format!(
            "lemma condition {condition:?} fails for the supplied unit"
        )));
    }
    let cert = derive_theta(&action, env, cc, tol, params)?;
    let associative = tensor_associative(&action.m, tol);
    let theta_spans_ml = {
        let span = Span::from_mats(&ml.element_basis, tol)?;
        cert.theta.iter().all(|t| span.contains(t)) && cert.theta.len() >= ml.dim() && {
            let tspan = Span::from_mats(&cert.theta, tol)?;
            ml.element_basis.iter().all(|b| tspan.contains(b))
        }
    };
    if !associative {
        return Err(Error::TheoremViolation(
            "lemma condition holds but the product is not associative".into(),
        ));
    }
    Ok(NonassocReport {
        condition,
        condition_holds: holds,
        associative,
        theta_spans_ml,
        certificate: cert,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::triple_envelope;
    use crate::matcore::{from_real, identity};
    use crate::opspace::{column_space, full_matrix_space, scalar_space, upper_triangular_2};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn params() -> SearchParams {
        SearchParams::default()
    }

    fn multiplication_tensor(x: &OperatorSpace, t: &Tolerances) -> Vec<CMatrix> {
        super::multiplication_tensor(x, t).unwrap()
    }

    fn t2_unit() -> CVector {
        CVector::from_fn(3, |i, _| {
            if i == 0 || i == 2 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn t2_multiplication_is_cc() {
        let t = tol();
        let x = upper_triangular_2(&t);
        let m = multiplication_tensor(&x, &t);
        let a = BilinearAction::new(x.clone(), x, m, Some(t2_unit()), &t).unwrap();
        let v = verify_cc(&a, 3, &t, &params()).unwrap();
        assert!(v.passed());
    }

    #[test]
    fn doubled_multiplication_fails_cc() {
        let t = tol();
        let x = upper_triangular_2(&t);
        let m: Vec<CMatrix> = multiplication_tensor(&x, &t)
            .into_iter()
            .map(|mk| mk.scale(2.0))
            .collect();
        let a = BilinearAction::new(x.clone(), x, m, None, &t).unwrap();
        match verify_cc(&a, 2, &t, &params()).unwrap() {
            CcVerdict::Fail { level, ratio, .. } => {
                assert_eq!(level, 1);
                assert!(ratio > 1.9, "ratio {ratio}");
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn m2_on_c2_matrix_vector_action() {
        let t = tol();
        let y = full_matrix_space(2, &t);
        let x = column_space(2, &t);
        // m[k] = coefficient action of matrix basis element k on the
        // column coordinates.
        let m: Vec<CMatrix> = y
            .basis
            .iter()
            .map(|b| {
                CMatrix::from_fn(2, 2, |i, j| b[(i, j)])
            })
            .collect();
        let e = CVector::from_fn(4, |i, _| {
            if i == 0 || i == 3 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let a = BilinearAction::new(y, x.clone(), m, Some(e), &t).unwrap();
        let v = verify_cc(&a, 2, &t, &params()).unwrap();
        assert!(v.passed());
        let env = triple_envelope(&x, &t, 42).unwrap();
        let cert = derive_theta(&a, &env, v, &t, &params()).unwrap();
        assert_eq!(cert.theta_unital, Some(true));
        assert!(cert.theta_completely_isometric);
        assert!(cert.adjointable_range);
    }

    #[test]
    fn scalars_act_unitaly_on_anything() {
        let t = tol();
        let y = scalar_space(&t);
        let x = upper_triangular_2(&t);
        let m = vec![identity(3)];
        let e = CVector::from_element(1, C64::new(1.0, 0.0));
        let a = BilinearAction::new(y, x.clone(), m, Some(e), &t).unwrap();
        let v = verify_cc(&a, 2, &t, &params()).unwrap();
        assert!(v.passed());
        let env = triple_envelope(&x, &t, 42).unwrap();
        let cert = derive_theta(&a, &env, v, &t, &params()).unwrap();
        assert_eq!(cert.theta_unital, Some(true));
        assert!(cert.adjointable_range);
    }

    #[test]
    fn brs_certifies_t2() {
        let t = tol();
        let x = upper_triangular_2(&t);
        let env = triple_envelope(&x, &t, 42).unwrap();
        let m = multiplication_tensor(&x, &t);
        let res = brs_certify(&x, m, t2_unit(), &env, &t, &params()).unwrap();
        assert!(res.is_operator_algebra);
        assert!(res.associative);
        let cert = res.certificate.unwrap();
        assert!(cert.theta_completely_isometric);
        assert_eq!(cert.theta_homomorphism, Some(true));
    }

    #[test]
    fn brs_certifies_m2_with_adjointable_theta() {
        let t = tol();
        let x = full_matrix_space(2, &t);
        let env = triple_envelope(&x, &t, 42).unwrap();
        let m = multiplication_tensor(&x, &t);
        let e = x.coefficients(&identity(2), &t).unwrap();
        let res = brs_certify(&x, m, e, &env, &t, &params()).unwrap();
        assert!(res.is_operator_algebra);
        let cert = res.certificate.unwrap();
        assert!(cert.adjointable_range, "M_2 is a C*-algebra; θ must be adjointable");
    }

    #[test]
    fn brs_rejects_twisted_multiplication() {
        let t = tol();
        let x = crate::opspace::diagonal_2(&t);
        // m(a, b) = a·s·b with s = diag(2, 1); unit e = s^{-1} has
        // norm 1, but the product inflates e11·e11 to 2·e11.
        let s = from_real(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let m: Vec<CMatrix> = x
            .basis
            .iter()
            .map(|b| {
                let d = x.dim();
                let mut mk = CMatrix::zeros(d, d);
                for j in 0..d {
                    let prod = b * &s * &x.basis[j];
                    let c = x.coefficients(&prod, &t).unwrap();
                    mk.column_mut(j).copy_from(&c);
                }
                mk
            })
            .collect();
        let e = x.coefficients(&from_real(2, 2, &[0.5, 0.0, 0.0, 1.0]), &t).unwrap();
        let env = triple_envelope(&x, &t, 42).unwrap();
        let res = brs_certify(&x, m, e, &env, &t, &params()).unwrap();
        assert!(!res.is_operator_algebra);
        assert!(matches!(res.cc_verdict, CcVerdict::Fail { .. }));
    }

    #[test]
    fn nonassoc_brs_on_t2_conditions() {
        let t = tol();
        let x = upper_triangular_2(&t);
        let env = triple_envelope(&x, &t, 42).unwrap();
        let m = multiplication_tensor(&x, &t);
        for cond in [
            NonassocCondition::FaithfulAtUnit,
            NonassocCondition::StrictPositivity,
            NonassocCondition::RightDensity,
        ] {
            let rep = nonassoc_brs(
                &x,
                &x,
                m.clone(),
                t2_unit(),
                cond,
                &env,
                &t,
                &params(),
            )
            .unwrap();
            assert!(rep.condition_holds, "{cond:?}");
            assert!(rep.associative);
            assert!(rep.theta_spans_ml, "{cond:?}");
        }
    }

    #[test]
    fn nonassoc_brs_twisted_m2_product() {
        let t = tol();
        let x = full_matrix_space(2, &t);
        let env = triple_envelope(&x, &t, 42).unwrap();
        // m(a, b) = a·s·b with s positive invertible; unital for
        // e = s^{-1}.  Contractivity holds against A' realized with
        // basis {b_k·s}.
        let s = from_real(2, 2, &[0.8, 0.2, 0.2, 0.8]);
        let d = x.dim();
        let m: Vec<CMatrix> = x
            .basis
            .iter()
            .map(|b| {
                let mut mk = CMatrix::zeros(d, d);
                for j in 0..d {
                    let prod = b * &s * &x.basis[j];
                    let c = x.coefficients(&prod, &t).unwrap();
                    mk.column_mut(j).copy_from(&c);
                }
                mk
            })
            .collect();
        let s_inv = s.clone().try_inverse().unwrap();
        let e = x.coefficients(&s_inv, &t).unwrap();
        let alt_basis: Vec<CMatrix> = x.basis.iter().map(|b| b * &s).collect();
        let alt = OperatorSpace::new(2, 2, alt_basis, "M_2 twisted by s", &t).unwrap();
        let rep = nonassoc_brs(
            &alt,
            &x,
            m,
            e,
            NonassocCondition::StrictPositivity,
            &env,
            &t,
            &params(),
        )
        .unwrap();
        assert!(rep.condition_holds);
        assert!(rep.associative);
    }

    #[test]
    fn associativity_detector() {
        let t = tol();
        let x = crate::opspace::diagonal_2(&t);
        let m = multiplication_tensor(&x, &t);
        assert!(tensor_associative(&m, &t));
        // Break associativity by perturbing a single action entry.
        let mut bad = m.clone();
        bad[1][(0, 1)] += C64::new(0.5, 0.0);
        assert!(!tensor_associative(&bad, &t));
    }
}
