//! Minimal operator space structures on finite-dimensional Banach
//! spaces, realized by sampling extreme points of the dual ball, and a
//! cross-check that the two natural multiplier computations (function
//! multipliers on the Banach side, corner multipliers on the operator
//! side) agree.

use crate::envelope::{triple_envelope_with, EnvelopeOptions};
use crate::matcore::{nullspace, CMatrix, CVector, Tolerances, C64};
use crate::multiplier::{left_multipliers, multiplier_norm_capped};
use crate::opspace::OperatorSpace;
use crate::search::SearchParams;
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Unit-ball shape of a finite-dimensional Banach space.
#[derive(Debug, Clone)]
pub enum Ball {
    L1,
    Linf,
    L2,
    /// A symmetric planar polytope given by its vertices (dimension
    /// must be 2, vertices listed for the full ball, symmetric).
    Polytope(Vec<[f64; 2]>),
}

#[derive(Debug, Clone)]
pub struct BanachSpace {
    pub dim: usize,
    pub ball: Ball,
    pub label: String,
}

impl BanachSpace {
    pub fn new(dim: usize, ball: Ball, label: &str) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if let Ball::Polytope(v) = &ball {
            if dim != 2 {
                return Err(Error::InvalidInput(
                    "polytope balls are supported in dimension 2 only".into(),
                ));
            }
            if v.len() < 4 {
                return Err(Error::InvalidInput(
                    "a symmetric planar ball needs at least 4 vertices".into(),
                ));
            }
            for p in v {
                let has_neg = v
                    .iter()
                    .any(|q| (q[0] + p[0]).abs() < 1e-9 && (q[1] + p[1]).abs() < 1e-9);
                if !has_neg {
                    return Err(Error::InvalidInput(
                        "polytope ball must be symmetric about the origin".into(),
                    ));
                }
            }
        }
        Ok(BanachSpace {
            dim,
            ball,
            label: label.into(),
        })
    }

    pub fn l1(dim: usize) -> Self {
        BanachSpace::new(dim, Ball::L1, &format!("l1_{dim}")).unwrap()
    }

    pub fn linf(dim: usize) -> Self {
        BanachSpace::new(dim, Ball::Linf, &format!("linf_{dim}")).unwrap()
    }

    pub fn l2(dim: usize) -> Self {
        BanachSpace::new(dim, Ball::L2, &format!("l2_{dim}")).unwrap()
    }

    /// The norm of a complex coordinate vector.  Polytope norms extend
    /// to complex scalars through their facet functionals.
    pub fn norm(&self, x: &CVector) -> f64 {
        match &self.ball {
            Ball::L1 => x.iter().map(|z| z.norm()).sum(),
            Ball::Linf => x.iter().map(|z| z.norm()).fold(0.0, f64::max),
            Ball::L2 => x.norm(),
            Ball::Polytope(_) => self
                .polar_vertices()
                .iter()
                .map(|u| (x[0] * u[0] + x[1] * u[1]).norm())
                .fold(0.0, f64::max),
        }
    }

    /// The dual norm of a functional, represented as a coordinate
    /// vector acting by `f(x) = Σ f_i x_i`.
    pub fn dual_norm(&self, f: &CVector) -> f64 {
        match &self.ball {
            Ball::L1 => f.iter().map(|z| z.norm()).fold(0.0, f64::max),
            Ball::Linf => f.iter().map(|z| z.norm()).sum(),
            Ball::L2 => f.norm(),
            Ball::Polytope(v) => v
                .iter()
                .map(|p| (f[0] * p[0] + f[1] * p[1]).norm())
                .fold(0.0, f64::max),
        }
    }

    /// Vertices of the polar polytope: the extreme functionals of the
    /// dual ball.  Each facet through consecutive vertices contributes
    /// the functional equal to 1 on both.
    fn polar_vertices(&self) -> Vec<[f64; 2]> {
        let Ball::Polytope(v) = &self.ball else {
            panic!("polar_vertices is only defined for polytope balls");
        };
        let mut sorted = v.clone();
        sorted.sort_by(|a, b| {
            a[1].atan2(a[0])
                .partial_cmp(&b[1].atan2(b[0]))
                .unwrap()
        });
        let mut out = Vec::with_capacity(sorted.len());
        for i in 0..sorted.len() {
            let p = sorted[i];
            let q = sorted[(i + 1) % sorted.len()];
            let det = p[0] * q[1] - p[1] * q[0];
            if det.abs() < 1e-12 {
                continue;
            }
            // Solve u·p = 1, u·q = 1.
            out.push([(q[1] - p[1]) / det, (p[0] - q[0]) / det]);
        }
        out
    }

    /// Sample (approximate) extreme points of the dual unit ball, each
    /// of dual norm 1.  For `ℓ∞` and polytopes the extremes form a
    /// finite set times a circle of phases and the sample is exact; for
    /// `ℓ1` and `ℓ2` a deterministic grid plus seeded random points is
    /// used.
    pub fn sample_dual_extremes(&self, count: usize, seed: u64) -> Vec<CVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x00D0_A17E);
        let mut out = Vec::new();
        match &self.ball {
            Ball::Linf => {
                // Dual ℓ1 extremes: ω·e_i.  A global phase on a
                // functional never matters, so ±e_i suffices; extra
                // budget adds phased copies for robustness.
                for i in 0..self.dim {
                    for sign in [1.0, -1.0] {
                        let mut f = CVector::zeros(self.dim);
                        f[i] = C64::new(sign, 0.0);
                        out.push(f);
                    }
                }
                while out.len() < count {
                    let i = rng.gen_range(0..self.dim);
                    let t: f64 = rng.gen_range(0.0..2.0 * PI);
                    let mut f = CVector::zeros(self.dim);
                    f[i] = C64::new(t.cos(), t.sin());
                    out.push(f);
                }
            }
            Ball::L1 => {
                // Dual ℓ∞ extremes: unimodular coordinates.  In
                // dimension 2 a circle grid (1, e^{iθ}) is dense in the
                // extremes modulo global phase.
                if self.dim == 2 {
                    for k in 0..count.max(4) {
                        let t = 2.0 * PI * (k as f64) / (count.max(4) as f64);
                        out.push(CVector::from_vec(vec![
                            C64::new(1.0, 0.0),
                            C64::new(t.cos(), t.sin()),
                        ]));
                    }
                } else {
                    while out.len() < count.max(2 * self.dim) {
                        let f = CVector::from_fn(self.dim, |_, _| {
                            let t: f64 = rng.gen_range(0.0..2.0 * PI);
                            C64::new(t.cos(), t.sin())
                        });
                        out.push(f);
                    }
                }
            }
            Ball::L2 => {
                for i in 0..self.dim {
                    let mut f = CVector::zeros(self.dim);
                    f[i] = C64::new(1.0, 0.0);
                    out.push(f);
                }
                while out.len() < count.max(2 * self.dim) {
                    out.push(crate::search::random_unit(self.dim, &mut rng));
                }
            }
            Ball::Polytope(_) => {
                for u in self.polar_vertices() {
                    out.push(CVector::from_vec(vec![
                        C64::new(u[0], 0.0),
                        C64::new(u[1], 0.0),
                    ]));
                }
            }
        }
        // Normalize to exact dual norm 1.
        for f in &mut out {
            let n = self.dual_norm(f);
            if n > 1e-12 {
                *f /= C64::new(n, 0.0);
            }
        }
        out
    }
}

/// The MIN operator space realization: coordinates become diagonal
/// matrices of sampled extreme-functional values.
#[derive(Debug, Clone)]
pub struct MinRealization {
    pub banach: BanachSpace,
    pub space: OperatorSpace,
    pub functionals: Vec<CVector>,
}

/// Build a minimal operator space structure on `b` by sampling
/// `sample_size` extreme dual functionals.  Resamples with shifted
/// seeds (up to 8 times) if the sampled realization is rank deficient.
pub fn realize_min(
    b: &BanachSpace,
    sample_size: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<MinRealization> {
    if sample_size < b.dim {
        return Err(Error::InvalidInput(
            "need at least dim(B) sampled functionals".into(),
        ));
    }
    for attempt in 0..8u64 {
        let fs = b.sample_dual_extremes(sample_size, seed.wrapping_add(attempt));
        let n = fs.len();
        let basis: Vec<CMatrix> = (0..b.dim)
            .map(|k| CMatrix::from_fn(n, n, |i, j| if i == j { fs[i][k] } else { C64::default() }))
            .collect();
        match OperatorSpace::new(n, n, basis, &format!("min({})", b.label), tol) {
            Ok(space) => {
                return Ok(MinRealization {
                    banach: b.clone(),
                    space,
                    functionals: fs,
                })
            }
            Err(_) => continue,
        }
    }
    Err(Error::NumericalDegeneracy(
        "sampled functionals never became linearly independent".into(),
    ))
}

impl MinRealization {
    /// The realized norm of a coordinate vector: the sup of `|ψ(x)|`
    /// over the sampled functionals.
    pub fn realized_norm(&self, x: &CVector) -> f64 {
        self.functionals
            .iter()
            .map(|f| f.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<C64>().norm())
            .fold(0.0, f64::max)
    }

    /// Worst relative gap between the Banach norm and the realized
    /// norm over a seeded set of probe vectors.
    pub fn realization_gap(&self, probes: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6A9);
        let mut worst: f64 = 0.0;
        let mut check = |x: &CVector| {
            let truth = self.banach.norm(x);
            if truth > 1e-12 {
                let gap = (truth - self.realized_norm(x)).abs() / truth;
                if gap > worst {
                    worst = gap;
                }
            }
        };
        for k in 0..self.banach.dim {
            let mut x = CVector::zeros(self.banach.dim);
            x[k] = C64::new(1.0, 0.0);
            check(&x);
        }
        for _ in 0..probes {
            check(&crate::search::random_unit(self.banach.dim, &mut rng));
        }
        worst
    }
}

/// Test whether a linear map `T` on `B` (given in coordinates) is a
/// multiplier of `MIN(B)`: every sampled extreme functional must be an
/// eigenvector of `Tᵀ`.  Returns the verdict and the multiplier bound
/// `max |λ|`.
pub fn banach_multiplier_check(
    r: &MinRealization,
    op: &CMatrix,
    tol: &Tolerances,
) -> Result<(bool, f64)> {
    let d = r.banach.dim;
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::InvalidInput("operator has wrong shape for B".into()));
    }
    let tt = op.transpose();
    let mut bound: f64 = 0.0;
    let mut ok = true;
    for f in &r.functionals {
        let tf = &tt * f;
        let lambda = f.dotc(&tf) / f.dotc(f);
        let residual = (&tf - f * lambda).norm();
        if residual > tol.norm_eps * (1.0 + tf.norm()) {
            ok = false;
        }
        if lambda.norm() > bound {
            bound = lambda.norm();
        }
    }
    Ok((ok, bound))
}

/// Basis of the space of Banach-side multipliers: linear maps `T` on
/// `B` whose transpose fixes the line of every sampled functional.
pub fn banach_multiplier_basis(r: &MinRealization, tol: &Tolerances) -> Vec<CMatrix> {
    let d = r.banach.dim;
    // Constraint per functional f: (I − f f*/‖f‖²) Tᵀ f = 0, linear in
    // the d² entries of T.
    let mut rows = CMatrix::zeros(d * r.functionals.len(), d * d);
    for (s, f) in r.functionals.iter().enumerate() {
        let proj = crate::matcore::identity(d) - (f * f.adjoint()).unscale(f.norm_squared());
        // (Tᵀ f)_i = Σ_j T_ji f_j; entry column index for T_ab is a*d+b.
        for i in 0..d {
            for a in 0..d {
                for b in 0..d {
                    // coefficient of T_ab in (proj Tᵀ f)_i = proj_ib? —
                    // (proj Tᵀ f)_i = Σ_k proj_ik (Tᵀf)_k = Σ_k proj_ik Σ_j T_jk f_j
                    // so T_ab contributes proj_ib · f_a.
                    rows[(s * d + i, a * d + b)] += proj[(i, b)] * f[a];
                }
            }
        }
    }
    nullspace(&rows, tol.rank_eps)
        .into_iter()
        .map(|v| CMatrix::from_fn(d, d, |a, b| v[a * d + b]))
        .collect()
}

/// Outcome of comparing the Banach-side and envelope-side multiplier
/// computations for a MIN realization.
#[derive(Debug, Clone)]
pub struct CrossValidation {
    pub banach_dim: usize,
    pub envelope_dim: usize,
    pub dims_agree: bool,
    /// Largest gap between the Banach multiplier bound and the
    /// envelope multiplier norm over the Banach basis.
    pub max_norm_gap: f64,
}

/// Compare multipliers of `MIN(B)` computed two independent ways: as
/// eigenfunctionals on the Banach side, and as corner multipliers of
/// the triple envelope of the realization.  MIN spaces are level-1
/// determined, so the envelope runs with a level cap of 1.
pub fn cross_validate_multipliers(
    r: &MinRealization,
    tol: &Tolerances,
    seed: u64,
) -> Result<CrossValidation> {
    let banach_basis = banach_multiplier_basis(r, tol);
    let opts = EnvelopeOptions::new(seed)
        .with_level_cap(1)
        .with_params(SearchParams::light(seed));
    let env = triple_envelope_with(&r.space, tol, &opts)?;
    let ml = left_multipliers(&env, tol)?;
    let mut max_norm_gap: f64 = 0.0;
    for t in &banach_basis {
        let (is_mult, bound) = banach_multiplier_check(r, t, tol)?;
        if !is_mult {
            return Err(Error::InconsistentNumerics(
                "nullspace produced a map the eigenvector test rejects".into(),
            ));
        }
        // MIN spaces are level-1 determined, so level 1 already gives
        // the full multiplier norm.
        let res = multiplier_norm_capped(&env, &ml, t, 1, tol, &SearchParams::light(seed))?;
        let gap = (res.multiplier_norm - bound).abs();
        if gap > max_norm_gap {
            max_norm_gap = gap;
        }
    }
    Ok(CrossValidation {
        banach_dim: banach_basis.len(),
        envelope_dim: ml.dim(),
        dims_agree: banach_basis.len() == ml.dim(),
        max_norm_gap,
    })
}

/// Boundary sanity check: every sampled functional must sit on the
/// dual unit sphere; returns the maximum deviation from 1.
pub fn env_banach_check(r: &MinRealization) -> f64 {
    r.functionals
        .iter()
        .map(|f| (r.banach.dual_norm(f) - 1.0).abs())
        .fold(0.0, f64::max)
}
