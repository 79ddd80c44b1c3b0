//! Finite-dimensional *-algebras of matrices: generation, Wedderburn
//! central-block decomposition, and quotients by block ideals.
//!
//! A subalgebra `A` of `M_N` may act with multiplicity; the decomposition
//! records the abstract blocks (sizes `n_i`) together with concrete
//! compressions realizing each block as a full `n_i x n_i` matrix algebra.
//! Ideals and quotients are handled entirely on the abstract side.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::matcore::{
    self, frobenius_norm, herm_eig, identity, operator_norm, zeros, CMatrix, CVector,
    ScaleComplex, Span, Tolerances, C64,
};
use crate::{Error, Result};

/// Desk-scale guard on the ambient dimension.
pub const MAX_AMBIENT: usize = 160;

/// A self-adjoint subalgebra of `M_N`, with an orthonormal spanning basis
/// (trace inner product) and its own unit.
#[derive(Clone, Debug)]
pub struct StarAlgebra {
    pub ambient: usize,
    pub generators: Vec<CMatrix>,
    pub basis: Vec<CMatrix>,
    pub unit: CMatrix,
    pub has_unit_of_ambient: bool,
}

impl StarAlgebra {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    /// Membership in the algebra's span.
    pub fn contains(&self, m: &CMatrix, tol: &Tolerances) -> bool {
        match Span::from_mats(&self.basis, tol) {
            Ok(span) => span.contains(m),
            Err(_) => false,
        }
    }

    /// A convenience span over the basis.
    pub fn span(&self, tol: &Tolerances) -> Result<Span> {
        Span::from_mats(&self.basis, tol)
    }
}

/// One Wedderburn block: a minimal central projection, the abstract block
/// size `n`, the multiplicity `m` of the block in the ambient action, and
/// an `N x n` isometry `embed` with column range inside the block such
/// that `a -> embed^* a embed` is a *-isomorphism onto `M_n`.
#[derive(Clone, Debug)]
pub struct Block {
    pub projection: CMatrix,
    pub dim: usize,
    pub multiplicity: usize,
    pub embed: CMatrix,
}

impl Block {
    /// The abstract `n x n` image of an algebra element.
    pub fn compress(&self, a: &CMatrix) -> CMatrix {
        self.embed.adjoint() * a * &self.embed
    }
}

#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    pub blocks: Vec<Block>,
    pub seed: u64,
}

impl BlockDecomposition {
    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Sum of squared block sizes; equals `dim A`.
    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.dim).sum()
    }

    /// Block-diagonal representative of an algebra element across all
    /// blocks (multiplicity one per block).
    pub fn block_diag(&self, a: &CMatrix) -> CMatrix {
        let total: usize = self.blocks.iter().map(|b| b.dim).sum();
        let mut out = zeros(total, total);
        let mut off = 0;
        for b in &self.blocks {
            out.view_mut((off, off), (b.dim, b.dim)).copy_from(&b.compress(a));
            off += b.dim;
        }
        out
    }
}

/// A subset of the blocks of a decomposition, i.e. a two-sided ideal.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlockIdeal {
    pub block_indices: BTreeSet<usize>,
}

impl BlockIdeal {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_indices(idx: impl IntoIterator<Item = usize>) -> Self {
        BlockIdeal {
            block_indices: idx.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.block_indices.is_empty()
    }
}

/// The *-homomorphism killing the ideal blocks; maps ambient `N x N`
/// matrices of the algebra onto the block-diagonal complement.
#[derive(Clone, Debug)]
pub struct QuotientMap {
    pub kept: Vec<Block>,
    pub target_dim: usize,
}

impl QuotientMap {
    pub fn apply(&self, a: &CMatrix) -> CMatrix {
        let mut out = zeros(self.target_dim, self.target_dim);
        let mut off = 0;
        for b in &self.kept {
            out.view_mut((off, off), (b.dim, b.dim)).copy_from(&b.compress(a));
            off += b.dim;
        }
        out
    }
}

/// Generate the smallest *-closed, product-closed subspace of `M_N`
/// containing the generators, together with the algebra's own unit.
///
/// Closure proceeds breadth-first: each round multiplies the current span
/// by the (adjoint-closed) generator set only.
pub fn generate(ambient: usize, generators: &[CMatrix], tol: &Tolerances) -> Result<StarAlgebra> {
    if ambient > MAX_AMBIENT {
        return Err(Error::InvalidInput(format!(
            "ambient dimension {ambient} exceeds the desk-scale guard {MAX_AMBIENT}"
        )));
    }
    for g in generators {
        if g.shape() != (ambient, ambient) {
            return Err(Error::InvalidInput("generators must be square N x N".into()));
        }
        if !matcore::is_finite(g) {
            return Err(Error::InvalidInput("non-finite generator".into()));
        }
    }
    // Adjoint-closed generating set; products of its span are *-closed.
    let mut gen_set: Vec<CMatrix> = Vec::new();
    {
        let mut gspan = Span::new((ambient, ambient), tol.rank_eps);
        for g in generators {
            if gspan.insert(g)? {
                gen_set.push(g.clone());
            }
            let ga = g.adjoint();
            if gspan.insert(&ga)? {
                gen_set.push(ga);
            }
        }
    }
    let mut span = Span::new((ambient, ambient), tol.rank_eps);
    let mut frontier: Vec<CMatrix> = Vec::new();
    for g in &gen_set {
        if span.insert(g)? {
            frontier.push(g.clone());
        }
    }
    while !frontier.is_empty() {
        if span.dim() > ambient * ambient {
            return Err(Error::NumericalDegeneracy(
                "algebra closure exceeded N^2 dimensions (internal bug)".into(),
            ));
        }
        let mut next = Vec::new();
        for f in &frontier {
            for g in &gen_set {
                for p in [f * g, g * f] {
                    let scale = frobenius_norm(&p);
                    if scale <= tol.rank_eps {
                        continue;
                    }
                    let p = p.scale(1.0 / scale);
                    if span.insert(&p)? {
                        next.push(p);
                    }
                }
            }
        }
        frontier = next;
    }
    if span.dim() == 0 {
        return Ok(StarAlgebra {
            ambient,
            generators: generators.to_vec(),
            basis: Vec::new(),
            unit: zeros(ambient, ambient),
            has_unit_of_ambient: false,
        });
    }
    let basis: Vec<CMatrix> = span.ortho_basis().to_vec();
    let unit = algebra_unit(ambient, &gen_set, &basis, tol)?;
    let has_unit_of_ambient = frobenius_norm(&(&unit - identity(ambient))) <= 1e-8 * ambient as f64;
    Ok(StarAlgebra {
        ambient,
        generators: generators.to_vec(),
        basis,
        unit,
        has_unit_of_ambient,
    })
}

/// The unit of the algebra: the support projection of the strictly
/// positive element `h = sum_g (g g^* + g^* g)`, which is a spectral
/// projection of `h` and therefore lies in the algebra.
fn algebra_unit(
    ambient: usize,
    gen_set: &[CMatrix],
    basis: &[CMatrix],
    tol: &Tolerances,
) -> Result<CMatrix> {
    let mut h = zeros(ambient, ambient);
    for g in gen_set {
        h += g * g.adjoint() + g.adjoint() * g;
    }
    let nh = operator_norm(&h)?;
    if nh <= tol.rank_eps {
        return Ok(zeros(ambient, ambient));
    }
    let (vals, u) = herm_eig(&h, tol)?;
    let cut = nh * 1e-12 * (ambient as f64).max(1.0);
    let rank = vals.iter().take_while(|&&l| l > cut).count();
    let u_pos = u.columns(0, rank);
    let e: CMatrix = &u_pos * u_pos.adjoint();
    // Sanity: e acts as unit on the basis.
    for a in basis {
        let d1 = frobenius_norm(&(&e * a - a));
        let d2 = frobenius_norm(&(a * &e - a));
        let s = 1.0 + frobenius_norm(a);
        if d1 > 1e-7 * s || d2 > 1e-7 * s {
            return Err(Error::NumericalDegeneracy(format!(
                "computed support projection fails the unit law (defect {:.3e})",
                d1.max(d2)
            )));
        }
    }
    Ok(e)
}

/// Wedderburn decomposition into minimal central blocks.
///
/// A seeded random Hermitian element of the center is clustered at
/// `gap_eps`; degenerate draws are resampled up to 8 times.
pub fn wedderburn(a: &StarAlgebra, tol: &Tolerances, seed: u64) -> Result<BlockDecomposition> {
    if a.is_zero() {
        return Ok(BlockDecomposition {
            blocks: Vec::new(),
            seed,
        });
    }
    let center = center_basis(a, tol)?;
    let mut last_err = None;
    for attempt in 0..8u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9)));
        match try_decompose(a, &center, tol, &mut rng) {
            Ok(mut blocks) => {
                order_blocks(a, &mut blocks, tol, seed)?;
                return Ok(BlockDecomposition { blocks, seed });
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| {
        Error::NumericalDegeneracy("wedderburn failed without diagnostics".into())
    }))
}

/// Hermitian basis of the center of `a`.
fn center_basis(a: &StarAlgebra, tol: &Tolerances) -> Result<Vec<CMatrix>> {
    let k = a.dim();
    let n2 = a.ambient * a.ambient;
    // Commutation with the generators (and their adjoints) characterizes
    // the center of the generated algebra.
    let mut gens: Vec<CMatrix> = a.generators.clone();
    let adjoints: Vec<CMatrix> = a.generators.iter().map(|g| g.adjoint()).collect();
    gens.extend(adjoints);
    if gens.is_empty() {
        gens = a.basis.clone();
    }
    // Nullspace of the stacked commutator system through its k×k Gram
    // matrix — one tall SVD per generator would dominate the whole
    // decomposition for large algebras.  The Gram route squares the
    // spectrum, so the rank cut is clamped above the eigensolver noise
    // floor; the block-dimension and multiplicativity checks downstream
    // catch a misidentified center.
    let mut gram = zeros(k, k);
    for g in &gens {
        let mut c = CMatrix::zeros(n2, k);
        for (i, b) in a.basis.iter().enumerate() {
            let comm = b * g - g * b;
            c.column_mut(i).copy_from(&matcore::vectorize(&comm));
        }
        gram += c.adjoint() * &c;
    }
    let (evals, evecs) = matcore::herm_eig(&gram, tol)?;
    let emax = evals.iter().cloned().fold(1.0f64, f64::max);
    let s_cut = emax.sqrt() * tol.rank_eps.max(1e-6);
    let mut herm: Vec<CMatrix> = Vec::new();
    let mut span = Span::new((a.ambient, a.ambient), tol.rank_eps);
    for (idx, &e) in evals.iter().enumerate() {
        if e.max(0.0).sqrt() > s_cut {
            continue;
        }
        let coeffs: CVector = evecs.column(idx).into_owned();
        let mut c = zeros(a.ambient, a.ambient);
        for (i, b) in a.basis.iter().enumerate() {
            c += b.scale_complex(coeffs[i]);
        }
        for part in [(&c + c.adjoint()).scale(0.5), ((&c - c.adjoint()).scale(0.5)).map(|z| z * C64::new(0.0, -1.0))] {
            if frobenius_norm(&part) > tol.rank_eps && span.insert(&part)? {
                herm.push(part);
            }
        }
    }
    if herm.is_empty() {
        return Err(Error::NumericalDegeneracy(
            "center computation produced no Hermitian basis".into(),
        ));
    }
    Ok(herm)
}

fn try_decompose(
    a: &StarAlgebra,
    center: &[CMatrix],
    tol: &Tolerances,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Block>> {
    // Random Hermitian central element.
    let mut z = zeros(a.ambient, a.ambient);
    for c in center {
        z += c.scale(rng.gen::<f64>() * 2.0 - 1.0);
    }
    let nz = operator_norm(&z)?;
    if nz <= tol.rank_eps {
        return Err(Error::NumericalDegeneracy("degenerate central sample".into()));
    }
    let (vals, u) = herm_eig(&z, tol)?;
    // Cluster eigenvalues at gap_eps * ||z||.
    let mut clusters: Vec<(usize, usize)> = Vec::new(); // (start, len)
    let mut start = 0;
    for i in 1..=vals.len() {
        if i == vals.len() || (vals[i - 1] - vals[i]).abs() > tol.gap_eps * nz {
            clusters.push((start, i - start));
            start = i;
        }
    }
    let dim_a = a.dim();
    let mut blocks = Vec::new();
    let mut dim_seen = 0usize;
    for &(s, len) in &clusters {
        let uc = u.columns(s, len);
        let p_raw: CMatrix = &uc * uc.adjoint();
        // Restrict to the algebra's support: the cluster at the kernel of
        // the unit is not a block.
        let p = &a.unit * &p_raw * &a.unit;
        let defect = frobenius_norm(&(&p * &p - &p));
        if frobenius_norm(&p) <= tol.rank_eps {
            continue;
        }
        if defect > 1e-7 * (1.0 + frobenius_norm(&p)) {
            return Err(Error::NumericalDegeneracy(format!(
                "central spectral cluster is not a projection (defect {defect:.3e})"
            )));
        }
        let block = realize_block(a, &p, tol, rng)?;
        dim_seen += block.dim * block.dim;
        blocks.push(block);
    }
    if dim_seen != dim_a {
        return Err(Error::NumericalDegeneracy(format!(
            "block dimension check failed: sum n_i^2 = {dim_seen}, dim A = {dim_a}"
        )));
    }
    Ok(blocks)
}

/// Realize the block cut out by the central projection `p` as a full
/// matrix algebra, via a minimal projection of the block's commutant.
fn realize_block(
    a: &StarAlgebra,
    p: &CMatrix,
    tol: &Tolerances,
    rng: &mut ChaCha8Rng,
) -> Result<Block> {
    // Orthonormal basis of range(p).
    let (vals, u) = herm_eig(p, tol)?;
    let rank = vals.iter().take_while(|&&l| l > 0.5).count();
    if rank == 0 || vals.iter().skip(rank).any(|&l| l > 0.5) {
        return Err(Error::NumericalDegeneracy("projection with ambiguous rank".into()));
    }
    let v = u.columns(0, rank).clone_owned(); // N x d
    // Compressed block algebra basis and its linear dimension.
    let mut compressed: Vec<CMatrix> = Vec::new();
    let mut span = Span::new((rank, rank), tol.rank_eps);
    for b in &a.basis {
        // v spans range(p), so v†·b·v = v†·(p b p)·v without the big
        // ambient-sized products.
        let c = (v.adjoint() * b) * &v;
        if frobenius_norm(&c) > tol.rank_eps && span.insert(&c)? {
            compressed.push(c);
        }
    }
    let block_lin_dim = span.dim();
    let n = (block_lin_dim as f64).sqrt().round() as usize;
    if n * n != block_lin_dim {
        return Err(Error::NumericalDegeneracy(format!(
            "block linear dimension {block_lin_dim} is not a perfect square"
        )));
    }
    if rank % n != 0 {
        return Err(Error::NumericalDegeneracy(format!(
            "block rank {rank} not divisible by block size {n}"
        )));
    }
    let mult = rank / n;
    // Commutant of the compressed algebra on range(p).
    let w_tilde = if mult == 1 {
        identity(rank)
    } else {
        minimal_commutant_projection_basis(&compressed, rank, n, tol, rng)?
    };
    let embed = &v * &w_tilde; // N x n
    // Verify multiplicativity of the compression on a few basis pairs.
    // embed spans a reducing subspace inside range(p), so compressing
    // x·y equals (embed† x)(y embed); work with the small factors.
    let probe: Vec<&CMatrix> = a.basis.iter().take(6).collect();
    let ex: Vec<CMatrix> = probe.iter().map(|x| embed.adjoint() * *x).collect();
    let ye: Vec<CMatrix> = probe.iter().map(|y| *y * &embed).collect();
    let cx: Vec<CMatrix> = ex.iter().map(|e| e * &embed).collect();
    for i in 0..probe.len() {
        for j in i..probe.len() {
            let lhs = &ex[i] * &ye[j];
            let rhs = &cx[i] * &cx[j];
            if frobenius_norm(&(lhs - rhs)) > 1e-6 * (1.0 + frobenius_norm(&cx[i])) {
                return Err(Error::NumericalDegeneracy(
                    "block compression is not multiplicative".into(),
                ));
            }
        }
    }
    Ok(Block {
        projection: p.clone(),
        dim: n,
        multiplicity: mult,
        embed,
    })
}

/// An orthonormal `d x n` basis of the range of a minimal projection in
/// the commutant of the (simple) compressed block algebra.
fn minimal_commutant_projection_basis(
    compressed: &[CMatrix],
    d: usize,
    n: usize,
    tol: &Tolerances,
    rng: &mut ChaCha8Rng,
) -> Result<CMatrix> {
    // Solve y b = b y for all compressed basis elements b.
    let d2 = d * d;
    let mut sys = CMatrix::zeros(d2 * compressed.len(), d2);
    for (j, b) in compressed.iter().enumerate() {
        // vec(y b - b y) = (b^T (x) I - I (x) b) vec(y), with column-major vec.
        let bt = b.transpose();
        let op = matcore::kron(&bt, &identity(d)) - matcore::kron(&identity(d), b);
        sys.view_mut((j * d2, 0), (d2, d2)).copy_from(&op);
    }
    let svd = sys.svd(false, true);
    let smax = svd.singular_values.max().max(1.0);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::NumericalDegeneracy("SVD failed in commutant".into()))?;
    let mut comm: Vec<CMatrix> = Vec::new();
    for (idx, &s) in svd.singular_values.iter().enumerate() {
        if s <= tol.rank_eps * smax {
            let coeffs: CVector = v_t.row(idx).adjoint();
            let y = CMatrix::from_iterator(d, d, coeffs.iter().cloned());
            comm.push(y);
        }
    }
    if comm.is_empty() {
        return Err(Error::NumericalDegeneracy("empty commutant".into()));
    }
    // Random Hermitian commutant element; its eigen-clusters are minimal
    // projections of the commutant, each of rank n.
    let mut k = zeros(d, d);
    for y in &comm {
        let h = (y + y.adjoint()).scale(0.5);
        let ih = ((y - y.adjoint()).scale(0.5)).map(|z| z * C64::new(0.0, -1.0));
        k += h.scale(rng.gen::<f64>() * 2.0 - 1.0) + ih.scale(rng.gen::<f64>() * 2.0 - 1.0);
    }
    let nk = operator_norm(&k)?;
    if nk <= tol.rank_eps {
        return Err(Error::NumericalDegeneracy("degenerate commutant sample".into()));
    }
    let (vals, u) = herm_eig(&k, tol)?;
    // First cluster of size exactly n.
    let mut start = 0;
    for i in 1..=vals.len() {
        if i == vals.len() || (vals[i - 1] - vals[i]).abs() > tol.gap_eps * nk {
            if i - start == n {
                return Ok(u.columns(start, n).clone_owned());
            }
            start = i;
        }
    }
    Err(Error::NumericalDegeneracy(
        "no commutant eigen-cluster of the expected rank".into(),
    ))
}

/// Canonical ordering: descending block size, ties broken by the sorted
/// eigenvalue fingerprint of a fixed pseudo-random Hermitian combination
/// of the spanning basis.
fn order_blocks(a: &StarAlgebra, blocks: &mut [Block], tol: &Tolerances, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_F1A6);
    let mut h0 = zeros(a.ambient, a.ambient);
    for b in &a.basis {
        let g = b.scale(rng.gen::<f64>() * 2.0 - 1.0);
        h0 += &g + g.adjoint();
    }
    let mut keyed: Vec<(usize, Vec<f64>, Block)> = Vec::new();
    for b in blocks.iter() {
        let img = b.compress(&h0);
        let (vals, _) = herm_eig(&img, tol)?;
        keyed.push((b.dim, vals, b.clone()));
    }
    keyed.sort_by(|x, y| {
        y.0.cmp(&x.0).then_with(|| {
            x.1.iter()
                .zip(&y.1)
                .find_map(|(a, b)| a.partial_cmp(b).filter(|o| o.is_ne()))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    for (slot, (_, _, b)) in keyed.into_iter().enumerate() {
        blocks[slot] = b;
    }
    Ok(())
}

/// Quotient by a block ideal: the direct sum of the complementary blocks,
/// together with the kill-the-ideal *-homomorphism.
pub fn quotient_by(
    a: &StarAlgebra,
    d: &BlockDecomposition,
    ideal: &BlockIdeal,
    tol: &Tolerances,
) -> Result<(StarAlgebra, QuotientMap)> {
    for &i in &ideal.block_indices {
        if i >= d.blocks.len() {
            return Err(Error::InvalidInput(format!("ideal block index {i} out of range")));
        }
    }
    let kept: Vec<Block> = d
        .blocks
        .iter()
        .enumerate()
        .filter(|(i, _)| !ideal.block_indices.contains(i))
        .map(|(_, b)| b.clone())
        .collect();
    let target_dim: usize = kept.iter().map(|b| b.dim).sum();
    let q = QuotientMap { kept, target_dim };
    if target_dim == 0 {
        let b = StarAlgebra {
            ambient: 0,
            generators: Vec::new(),
            basis: Vec::new(),
            unit: zeros(0, 0),
            has_unit_of_ambient: false,
        };
        return Ok((b, q));
    }
    let mut span = Span::new((target_dim, target_dim), tol.rank_eps);
    for m in &a.basis {
        span.insert(&q.apply(m))?;
    }
    let basis: Vec<CMatrix> = span.ortho_basis().to_vec();
    let unit = q.apply(&a.unit);
    let has_unit_of_ambient =
        frobenius_norm(&(&unit - identity(target_dim))) <= 1e-8 * target_dim as f64;
    let gens: Vec<CMatrix> = a.generators.iter().map(|g| q.apply(g)).collect();
    Ok((
        StarAlgebra {
            ambient: target_dim,
            generators: gens,
            basis,
            unit,
            has_unit_of_ambient,
        },
        q,
    ))
}

/// Deterministic pseudo-random element of the algebra (used by tests).
pub fn random_element(a: &StarAlgebra, rng: &mut ChaCha8Rng) -> CMatrix {
    let mut m = zeros(a.ambient, a.ambient);
    for b in &a.basis {
        m += b.scale_complex(C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::unit_matrix;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn generate_rank_one_projection() {
        let t = tol();
        let a = generate(2, &[unit_matrix(2, 2, 0, 0)], &t).unwrap();
        assert_eq!(a.dim(), 1);
        assert!(frobenius_norm(&(&a.unit - unit_matrix(2, 2, 0, 0))) < 1e-10);
        assert!(!a.has_unit_of_ambient);
    }

    #[test]
    fn generate_full_m2_from_e12() {
        let t = tol();
        let a = generate(2, &[unit_matrix(2, 2, 0, 1)], &t).unwrap();
        assert_eq!(a.dim(), 4);
        assert!(a.has_unit_of_ambient);
    }

    #[test]
    fn generate_idempotent() {
        let t = tol();
        let a = generate(3, &[unit_matrix(3, 3, 0, 1), unit_matrix(3, 3, 1, 2)], &t).unwrap();
        let b = generate(3, &a.basis, &t).unwrap();
        assert_eq!(a.dim(), b.dim());
    }

    #[test]
    fn wedderburn_diagonal() {
        let t = tol();
        let a = generate(2, &[unit_matrix(2, 2, 0, 0), unit_matrix(2, 2, 1, 1)], &t).unwrap();
        let d = wedderburn(&a, &t, 42).unwrap();
        assert_eq!(d.n_blocks(), 2);
        assert!(d.blocks.iter().all(|b| b.dim == 1));
    }

    #[test]
    fn wedderburn_full_m2() {
        let t = tol();
        let a = generate(2, &[unit_matrix(2, 2, 0, 1)], &t).unwrap();
        let d = wedderburn(&a, &t, 42).unwrap();
        assert_eq!(d.n_blocks(), 1);
        assert_eq!(d.blocks[0].dim, 2);
        assert_eq!(d.blocks[0].multiplicity, 1);
    }

    #[test]
    fn wedderburn_m2_plus_c() {
        let t = tol();
        // M_2 (+) C block-diagonally inside M_3.
        let mut gens = Vec::new();
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            gens.push(unit_matrix(3, 3, i, j));
        }
        gens.push(unit_matrix(3, 3, 2, 2));
        let a = generate(3, &gens, &t).unwrap();
        assert_eq!(a.dim(), 5);
        let d = wedderburn(&a, &t, 42).unwrap();
        let mut dims: Vec<usize> = d.blocks.iter().map(|b| b.dim).collect();
        dims.sort_unstable();
        assert_eq!(dims, vec![1, 2]);
        // Canonical order: descending block size.
        assert_eq!(d.blocks[0].dim, 2);
    }

    #[test]
    fn wedderburn_projection_identities() {
        let t = tol();
        let mut gens = Vec::new();
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            gens.push(unit_matrix(3, 3, i, j));
        }
        gens.push(unit_matrix(3, 3, 2, 2));
        let a = generate(3, &gens, &t).unwrap();
        let d = wedderburn(&a, &t, 42).unwrap();
        let mut sum = zeros(3, 3);
        for b in &d.blocks {
            let p = &b.projection;
            assert!(frobenius_norm(&(p * p - p)) <= 1e-8);
            sum += p;
        }
        for (i, bi) in d.blocks.iter().enumerate() {
            for bj in d.blocks.iter().skip(i + 1) {
                assert!(operator_norm(&(&bi.projection * &bj.projection)).unwrap() <= 1e-8);
            }
        }
        assert!(frobenius_norm(&(sum - &a.unit)) <= 1e-8);
    }

    #[test]
    fn wedderburn_with_multiplicity() {
        let t = tol();
        // M_2 acting with multiplicity 2 inside M_4: a -> diag(a, a).
        let mut gens = Vec::new();
        for (i, j) in [(0, 1), (1, 0)] {
            let mut g = zeros(4, 4);
            g[(i, j)] = C64::new(1.0, 0.0);
            g[(i + 2, j + 2)] = C64::new(1.0, 0.0);
            gens.push(g);
        }
        let a = generate(4, &gens, &t).unwrap();
        assert_eq!(a.dim(), 4);
        let d = wedderburn(&a, &t, 42).unwrap();
        assert_eq!(d.n_blocks(), 1);
        assert_eq!(d.blocks[0].dim, 2);
        assert_eq!(d.blocks[0].multiplicity, 2);
    }

    #[test]
    fn quotient_examples() {
        let t = tol();
        // D_2, kill the first block.
        let a = generate(2, &[unit_matrix(2, 2, 0, 0), unit_matrix(2, 2, 1, 1)], &t).unwrap();
        let d = wedderburn(&a, &t, 42).unwrap();
        let (b, q) = quotient_by(&a, &d, &BlockIdeal::from_indices([0]), &t).unwrap();
        assert_eq!(b.dim(), 1);
        assert_eq!(q.target_dim, 1);

        // Empty ideal: bijective.
        let (b2, _) = quotient_by(&a, &d, &BlockIdeal::empty(), &t).unwrap();
        assert_eq!(b2.dim(), a.dim());

        // M_2 (+) C, kill the C block.
        let mut gens = Vec::new();
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            gens.push(unit_matrix(3, 3, i, j));
        }
        gens.push(unit_matrix(3, 3, 2, 2));
        let a3 = generate(3, &gens, &t).unwrap();
        let d3 = wedderburn(&a3, &t, 42).unwrap();
        let c_block = (0..d3.n_blocks()).find(|&i| d3.blocks[i].dim == 1).unwrap();
        let (b3, _) = quotient_by(&a3, &d3, &BlockIdeal::from_indices([c_block]), &t).unwrap();
        assert_eq!(b3.dim(), 4);
        assert_eq!(b3.ambient, 2);
    }

    #[test]
    fn quotient_is_star_homomorphism() {
        let t = tol();
        let mut gens = Vec::new();
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            gens.push(unit_matrix(3, 3, i, j));
        }
        gens.push(unit_matrix(3, 3, 2, 2));
        let a = generate(3, &gens, &t).unwrap();
        let d = wedderburn(&a, &t, 42).unwrap();
        let (_, q) = quotient_by(&a, &d, &BlockIdeal::from_indices([1]), &t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x = random_element(&a, &mut rng);
            let y = random_element(&a, &mut rng);
            let mul = frobenius_norm(&(q.apply(&(&x * &y)) - q.apply(&x) * q.apply(&y)));
            let star = frobenius_norm(&(q.apply(&x.adjoint()) - q.apply(&x).adjoint()));
            assert!(mul <= 1e-8 * (1.0 + frobenius_norm(&x) * frobenius_norm(&y)));
            assert!(star <= 1e-8 * (1.0 + frobenius_norm(&x)));
        }
        let unit_img = q.apply(&a.unit);
        assert!(frobenius_norm(&(&unit_img - identity(q.target_dim))) <= 1e-8);
    }

    #[test]
    fn deterministic_block_order() {
        let t = tol();
        let mut gens = Vec::new();
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            gens.push(unit_matrix(3, 3, i, j));
        }
        gens.push(unit_matrix(3, 3, 2, 2));
        let a = generate(3, &gens, &t).unwrap();
        let d1 = wedderburn(&a, &t, 7).unwrap();
        let d2 = wedderburn(&a, &t, 7).unwrap();
        assert_eq!(d1.n_blocks(), d2.n_blocks());
        for (b1, b2) in d1.blocks.iter().zip(&d2.blocks) {
            assert_eq!(b1.dim, b2.dim);
            assert_eq!(frobenius_norm(&(&b1.embed - &b2.embed)), 0.0);
        }
    }
}
