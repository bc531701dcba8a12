//! The unitary representation of the colored braid groupoid on
//! conformal-block bases.
//!
//! Basis vectors are fusion paths of the plat-adapted tree: pair channels
//! `p_1..p_m` and spine labels `r_1..r_{m-3}`. Odd generators act diagonally
//! with the half-twist eigenvalue read off the pair channel; even generators
//! are conjugates of a diagonal by the odd-to-even duality matrix, which is
//! built as the composition of `3m-5` elementary duality moves.
//!
//! Generators map between bases for different colorings (a crossing
//! transposes the two strand states), so every [`RepMatrix`] records its
//! source and target slices and composition checks their compatibility.

pub mod tree;

use std::collections::HashMap;
use std::rc::Rc;

use thiserror::Error;

use crate::braid::LevelSlice;
use crate::linalg::CMatrix;
use crate::qarith::{casimir, q_power, Cplx, Level, QExponent, Spin};
use crate::recoupling::{admissible, SixJCache};
use tree::{even_channel_slot, DualityChain, DualityMove, FusionTree};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KaulError {
    #[error("inadmissible half-twist triple ({j}, {jp}; {t})")]
    InadmissibleTriple { j: Spin, jp: Spin, t: Spin },
    #[error("generator index {index} invalid on {strands} strands (need {parity}, 1..={max})")]
    Index {
        index: usize,
        strands: usize,
        parity: &'static str,
        max: usize,
    },
    #[error("cannot compose: source slice of the next factor differs from the current target")]
    SliceMismatch,
}

/// One conformal-block basis vector: the boundary colors plus the internal
/// labels of the plat-adapted fusion tree.
///
/// `p` holds the pair channels `p_1..p_m` (for four strands `p_2 = p_1` is
/// the same tree edge) and `r` the free spine labels `r_1..r_{m-3}`. Two
/// strands are the degenerate case with the single total channel `p_1 = 0`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FusionPath {
    pub colors: Vec<Spin>,
    pub p: Vec<Spin>,
    pub r: Vec<Spin>,
}

impl FusionPath {
    /// The independent internal labels in register order: `2m-3` of them for
    /// `2m ≥ 4` strands, one for the two-strand case.
    pub fn independent_labels(&self) -> Vec<Spin> {
        let m = self.colors.len() / 2;
        if m <= 2 {
            vec![self.p[0]]
        } else {
            self.p.iter().chain(self.r.iter()).copied().collect()
        }
    }

    fn from_labeling(colors: &[Spin], labeling: &[u32]) -> FusionPath {
        let m = colors.len() / 2;
        let spins: Vec<Spin> = labeling.iter().map(|&t| Spin::from_twice(t)).collect();
        let (p, r) = if m == 1 {
            (vec![Spin::ZERO], Vec::new())
        } else if m == 2 {
            (vec![spins[0], spins[0]], Vec::new())
        } else {
            (spins[..m].to_vec(), spins[m..].to_vec())
        };
        FusionPath {
            colors: colors.to_vec(),
            p,
            r,
        }
    }

    /// True when every internal label is zero (the plat cap state).
    pub fn is_all_zero(&self) -> bool {
        self.p.iter().chain(self.r.iter()).all(|&s| s == Spin::ZERO)
    }
}

/// Ordered basis of admissible fusion paths for one slice.
#[derive(Clone, Debug)]
pub struct Basis {
    pub level: Level,
    pub slice: LevelSlice,
    pub paths: Vec<FusionPath>,
    labelings: Vec<Vec<u32>>,
}

impl Basis {
    pub fn dim(&self) -> usize {
        self.paths.len()
    }

    pub fn labelings(&self) -> &[Vec<u32>] {
        &self.labelings
    }

    pub fn index_of_labeling(&self, labeling: &[u32]) -> Option<usize> {
        self.labelings.binary_search_by(|l| l.as_slice().cmp(labeling)).ok()
    }

    /// Index of the all-zero fusion path, when present.
    pub fn all_zero_index(&self) -> Option<usize> {
        let m = self.slice.width() / 2;
        let zero = vec![0u32; if m == 1 { 1 } else { (2 * m).saturating_sub(3).max(1) }];
        self.index_of_labeling(&zero)
    }
}

/// All admissible fusion paths for the slice's colors, in lexicographic
/// order of the internal labels. Colors beyond the truncation simply yield
/// an empty basis.
pub fn enumerate_basis(level: Level, slice: &LevelSlice) -> Basis {
    let colors = slice.colors();
    let m = colors.len() / 2;
    let labelings: Vec<Vec<u32>> = if m == 1 {
        if colors[0] == colors[1] && level.allows(colors[0]) {
            vec![vec![0]]
        } else {
            Vec::new()
        }
    } else {
        FusionTree::plat(m).enumerate(level, &colors)
    };
    let paths = labelings
        .iter()
        .map(|l| FusionPath::from_labeling(&colors, l))
        .collect();
    Basis {
        level,
        slice: slice.clone(),
        paths,
        labelings,
    }
}

/// Unitary image of one braid generator (or a composition of them).
#[derive(Clone, Debug)]
pub struct RepMatrix {
    pub source: Basis,
    pub target: Basis,
    pub entries: CMatrix,
}

impl RepMatrix {
    /// `rhs` is applied first: `self ∘ rhs`.
    pub fn compose(&self, rhs: &RepMatrix) -> Result<RepMatrix, KaulError> {
        if self.source.slice != rhs.target.slice {
            return Err(KaulError::SliceMismatch);
        }
        Ok(RepMatrix {
            source: rhs.source.clone(),
            target: self.target.clone(),
            entries: self.entries.mul(&rhs.entries),
        })
    }
}

fn sign_from_twice(twice: i64) -> f64 {
    debug_assert!(twice % 2 == 0, "half-twist sign exponent must be an integer");
    if (twice / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Eigenvalue of a right-handed (positively signed) oriented crossing of two
/// strands colored `j`, `jp` fused in channel `t`; conjugated for the
/// inverse crossing.
///
/// Parallel strands: `(-1)^(j+j'-t) q^((c_j+c_j')/2 + c_min(j,j') - c_t/2)`.
/// Antiparallel strands: `(-1)^(t-|j-j'|) q^(-|c_j-c_j'|/2 + c_t/2)`.
///
/// Note the handedness is the oriented crossing sign. A positive braid
/// letter is a right-handed half twist of the unoriented strands; when the
/// strands run antiparallel its oriented crossing sign is negative, so
/// generator images take the conjugate of the antiparallel value (see
/// [`RepContext::odd_generator`]). The braid-group relations single out this
/// pairing of the two formulas.
pub fn half_twist_eigenvalue(
    level: Level,
    j: Spin,
    jp: Spin,
    t: Spin,
    parallel: bool,
    inverse: bool,
) -> Result<Cplx, KaulError> {
    if !admissible(level, j, jp, t) {
        return Err(KaulError::InadmissibleTriple { j, jp, t });
    }
    let (cj, cjp, ct) = (casimir(j), casimir(jp), casimir(t));
    let (sign, expo): (f64, QExponent) = if parallel {
        let cmin = casimir(j.min(jp));
        let sign = sign_from_twice(i64::from(j.twice()) + i64::from(jp.twice()) - i64::from(t.twice()));
        (sign, (cj + cjp) / 2 + cmin - ct / 2)
    } else {
        let diff = if cj >= cjp { cj - cjp } else { cjp - cj };
        let tw = i64::from(t.twice()) - (i64::from(j.twice()) - i64::from(jp.twice())).abs();
        (sign_from_twice(tw), -diff / 2 + ct / 2)
    };
    let lambda = q_power(level, expo) * sign;
    Ok(if inverse { lambda.conj() } else { lambda })
}

/// Shared recoupling data for building generators: a q-6j memo table and the
/// duality chains realized so far, keyed by coloring.
pub struct RepContext {
    level: Level,
    cache: SixJCache,
    chains: std::cell::RefCell<HashMap<Vec<u32>, Rc<DualityChain>>>,
}

impl RepContext {
    pub fn new(level: Level) -> Self {
        RepContext {
            level,
            cache: SixJCache::new(level),
            chains: std::cell::RefCell::new(HashMap::new()),
        }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn cache(&self) -> &SixJCache {
        &self.cache
    }

    /// The odd-to-even duality chain for a coloring, memoized.
    pub fn chain(&self, colors: &[Spin]) -> Rc<DualityChain> {
        let key: Vec<u32> = colors.iter().map(|c| c.twice()).collect();
        if let Some(chain) = self.chains.borrow().get(&key) {
            return Rc::clone(chain);
        }
        let chain = Rc::new(DualityChain::new(&self.cache, colors));
        self.chains.borrow_mut().insert(key, Rc::clone(&chain));
        chain
    }

    /// Diagonal image of an odd generator `i ∈ {1, 3, …, 2m-1}`: the
    /// half-twist eigenvalue at the pair channel `p_(i+1)/2`.
    pub fn odd_generator(
        &self,
        basis: &Basis,
        index: usize,
        inverse: bool,
    ) -> Result<RepMatrix, KaulError> {
        let strands = basis.slice.width();
        if index % 2 == 0 || index + 1 > strands {
            return Err(KaulError::Index {
                index,
                strands,
                parity: "odd",
                max: strands - 1,
            });
        }
        let pair = (index + 1) / 2;
        let (left, right) = (basis.slice.strands[index - 1], basis.slice.strands[index]);
        let parallel = left.up == right.up;
        // a right-handed half twist of antiparallel strands is a negatively
        // signed oriented crossing
        let crossing_inverse = if parallel { inverse } else { !inverse };
        let target = enumerate_basis(self.level, &transposed(&basis.slice, index));
        debug_assert_eq!(target.labelings, basis.labelings);
        let mut entries = CMatrix::zeros(basis.dim(), basis.dim());
        for (idx, path) in basis.paths.iter().enumerate() {
            let t = path.p[pair - 1];
            let lambda = half_twist_eigenvalue(
                self.level,
                left.color,
                right.color,
                t,
                parallel,
                crossing_inverse,
            )?;
            entries[(idx, idx)] = lambda;
        }
        Ok(RepMatrix {
            source: basis.clone(),
            target,
            entries,
        })
    }

    /// Image of an even generator `i ∈ {2, 4, …, 2m-2}`: the odd-to-even
    /// duality matrix conjugating the diagonal of half-twist eigenvalues at
    /// the even channel `q_(i/2)`.
    pub fn even_generator(
        &self,
        basis: &Basis,
        index: usize,
        inverse: bool,
    ) -> Result<RepMatrix, KaulError> {
        let strands = basis.slice.width();
        if index % 2 != 0 || index == 0 || index + 1 > strands || strands < 4 {
            return Err(KaulError::Index {
                index,
                strands,
                parity: "even",
                max: strands.saturating_sub(2),
            });
        }
        let m = strands / 2;
        let l = index / 2;
        let (left, right) = (basis.slice.strands[index - 1], basis.slice.strands[index]);
        let parallel = left.up == right.up;
        let crossing_inverse = if parallel { inverse } else { !inverse };

        let colors = basis.slice.colors();
        let target_slice = transposed(&basis.slice, index);
        let target = enumerate_basis(self.level, &target_slice);

        let forward = self.chain(&colors);
        let backward = self.chain(&target_slice.colors());
        debug_assert_eq!(
            forward.even_basis(),
            backward.even_basis(),
            "even bases must agree across the transposition"
        );

        let slot = even_channel_slot(m, l);
        let mut lambda = CMatrix::zeros(forward.even_basis().len(), forward.even_basis().len());
        for (idx, labeling) in forward.even_basis().iter().enumerate() {
            let q = Spin::from_twice(labeling[slot]);
            lambda[(idx, idx)] = half_twist_eigenvalue(
                self.level,
                left.color,
                right.color,
                q,
                parallel,
                crossing_inverse,
            )?;
        }
        let entries = backward
            .composed
            .transpose()
            .mul(&lambda)
            .mul(&forward.composed);
        Ok(RepMatrix {
            source: basis.clone(),
            target,
            entries,
        })
    }

    /// Image of a signed braid letter.
    pub fn generator(&self, basis: &Basis, letter: i32) -> Result<RepMatrix, KaulError> {
        let index = letter.unsigned_abs() as usize;
        let inverse = letter < 0;
        if index % 2 == 1 {
            self.odd_generator(basis, index, inverse)
        } else {
            self.even_generator(basis, index, inverse)
        }
    }

    /// Ordered product of generator images along a word, with slice tracking.
    pub fn word_unitary(
        &self,
        bottom: &LevelSlice,
        word: &[i32],
    ) -> Result<RepMatrix, KaulError> {
        let source = enumerate_basis(self.level, bottom);
        let dim = source.dim();
        let mut acc = RepMatrix {
            source: source.clone(),
            target: source,
            entries: CMatrix::identity(dim),
        };
        for &letter in word {
            let gen = self.generator(&acc.target, letter)?;
            acc = gen.compose(&acc)?;
        }
        Ok(acc)
    }
}

fn transposed(slice: &LevelSlice, index: usize) -> LevelSlice {
    let mut out = slice.clone();
    out.strands.swap(index - 1, index);
    out
}

/// The odd-to-even duality decomposition for a basis: the ordered moves and
/// the composed dense matrix they realize.
pub struct DualityDecomposition {
    pub moves: Vec<DualityMove>,
    pub composed: CMatrix,
    pub even_labelings: Vec<Vec<u32>>,
}

impl DualityDecomposition {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }
}

/// Decompose the duality matrix for the basis's coloring into elementary
/// moves; the sequence has exactly `3m-5` entries for `m ≥ 2`.
pub fn duality_decomposition(level: Level, basis: &Basis) -> DualityDecomposition {
    let ctx = RepContext::new(level);
    let chain = ctx.chain(&basis.slice.colors());
    DualityDecomposition {
        moves: chain.moves.clone(),
        composed: chain.composed.clone(),
        even_labelings: chain.even_basis().clone(),
    }
}

/// Convenience wrappers constructing a fresh context per call; prefer
/// [`RepContext`] when building many generators at one level.
pub fn odd_generator(
    level: Level,
    basis: &Basis,
    index: usize,
    inverse: bool,
) -> Result<RepMatrix, KaulError> {
    RepContext::new(level).odd_generator(basis, index, inverse)
}

pub fn even_generator(
    level: Level,
    basis: &Basis,
    index: usize,
    inverse: bool,
) -> Result<RepMatrix, KaulError> {
    RepContext::new(level).even_generator(basis, index, inverse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::StrandState;
    use crate::qarith::root_of_unity;

    fn sp(t: u32) -> Spin {
        Spin::from_twice(t)
    }

    /// Plat-style slice: colors given per strand, orientations alternating.
    fn plat_slice(colors_twice: &[u32]) -> LevelSlice {
        LevelSlice {
            strands: colors_twice
                .iter()
                .enumerate()
                .map(|(i, &t)| StrandState {
                    color: sp(t),
                    up: i % 2 == 0,
                })
                .collect(),
        }
    }

    /// Slice with all strands pointing up (parallel everywhere).
    fn parallel_slice(colors_twice: &[u32]) -> LevelSlice {
        LevelSlice {
            strands: colors_twice
                .iter()
                .map(|&t| StrandState { color: sp(t), up: true })
                .collect(),
        }
    }

    #[test]
    fn half_twist_parallel_examples() {
        // (j=j'=1/2, t=1): exponent (3/4+3/4)/2 + 3/4 - 1 = 1/2, sign +1
        for k in 2..=4u32 {
            let level = Level::new(k);
            let l = half_twist_eigenvalue(level, sp(1), sp(1), sp(2), true, false).unwrap();
            assert!((l - root_of_unity(level, 1)).norm() <= 1e-12);
            // (j=j'=1/2, t=0): exponent 3/2, sign (-1)^1
            let l0 = half_twist_eigenvalue(level, sp(1), sp(1), sp(0), true, false).unwrap();
            assert!((l0 + root_of_unity(level, 3)).norm() <= 1e-12);
        }
    }

    #[test]
    fn half_twist_antiparallel_t0_is_one() {
        for k in 1..=4u32 {
            let level = Level::new(k);
            for t in 0..=k {
                let l = half_twist_eigenvalue(level, sp(t), sp(t), sp(0), false, false).unwrap();
                assert!((l - Cplx::new(1.0, 0.0)).norm() <= 1e-12, "color {t}/2");
            }
        }
    }

    #[test]
    fn half_twist_inadmissible() {
        let err = half_twist_eigenvalue(Level::new(1), sp(1), sp(1), sp(2), true, false);
        assert!(matches!(err, Err(KaulError::InadmissibleTriple { .. })));
    }

    #[test]
    fn half_twist_inverse_conjugates() {
        let level = Level::new(3);
        let l = half_twist_eigenvalue(level, sp(1), sp(2), sp(1), true, false).unwrap();
        let li = half_twist_eigenvalue(level, sp(1), sp(2), sp(1), true, true).unwrap();
        assert!((l.conj() - li).norm() <= 1e-12);
        assert!((l.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn basis_counts() {
        assert_eq!(enumerate_basis(Level::new(1), &plat_slice(&[1, 1, 1, 1])).dim(), 1);
        assert_eq!(enumerate_basis(Level::new(2), &plat_slice(&[1, 1, 1, 1])).dim(), 2);
        assert_eq!(enumerate_basis(Level::new(3), &plat_slice(&[0, 0])).dim(), 1);
        // colors beyond the truncation give an empty basis
        assert_eq!(enumerate_basis(Level::new(1), &plat_slice(&[2, 2])).dim(), 0);
    }

    #[test]
    fn all_zero_path_found() {
        let basis = enumerate_basis(Level::new(2), &plat_slice(&[1, 1, 1, 1]));
        let idx = basis.all_zero_index().unwrap();
        assert!(basis.paths[idx].is_all_zero());
        // mixed pair colors admit no all-zero path
        let basis = enumerate_basis(Level::new(3), &plat_slice(&[1, 1, 2, 2]));
        assert!(basis.all_zero_index().is_none() || !basis.paths.is_empty());
    }

    #[test]
    fn odd_generator_diagonal_and_involutive() {
        let level = Level::new(2);
        let ctx = RepContext::new(level);
        let basis = enumerate_basis(level, &plat_slice(&[1, 1, 1, 1]));
        let g = ctx.odd_generator(&basis, 1, false).unwrap();
        let gi = ctx.odd_generator(&g.target, 1, true).unwrap();
        // g then g^{-1} is the identity
        let prod = gi.compose(&g).unwrap();
        assert!(prod.entries.max_diff(&CMatrix::identity(basis.dim())) <= 1e-12);
        // all off-diagonal entries are exactly zero
        for i in 0..basis.dim() {
            for j in 0..basis.dim() {
                if i != j {
                    assert_eq!(g.entries[(i, j)], Cplx::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn odd_generator_k1_parallel_value() {
        // at k=1 only t=0 survives; with parallel strands the eigenvalue is
        // -q^(3/2)
        let level = Level::new(1);
        let ctx = RepContext::new(level);
        let basis = enumerate_basis(level, &parallel_slice(&[1, 1, 1, 1]));
        assert_eq!(basis.dim(), 1);
        let g = ctx.odd_generator(&basis, 1, false).unwrap();
        assert!((g.entries[(0, 0)] + root_of_unity(level, 3)).norm() <= 1e-12);
    }

    #[test]
    fn even_generator_unitary_and_inverse() {
        for k in 1..=3u32 {
            let level = Level::new(k);
            let ctx = RepContext::new(level);
            for colors in [[1u32, 1, 1, 1], [2, 2, 2, 2], [1, 1, 2, 2]] {
                if colors.iter().any(|&c| c > k) {
                    continue;
                }
                let basis = enumerate_basis(level, &plat_slice(&colors));
                if basis.dim() == 0 {
                    continue;
                }
                let g = ctx.even_generator(&basis, 2, false).unwrap();
                assert!(g.entries.unitarity_defect() <= 1e-10, "k={k} {colors:?}");
                let gi = ctx.even_generator(&g.target, 2, true).unwrap();
                let prod = gi.compose(&g).unwrap();
                assert!(
                    prod.entries.max_diff(&CMatrix::identity(basis.dim())) <= 1e-10,
                    "k={k} {colors:?}"
                );
            }
        }
    }

    #[test]
    fn braid_relation_b4() {
        // B2 B3 B2 = B3 B2 B3 with groupoid-consistent tracking
        for k in 1..=3u32 {
            let level = Level::new(k);
            let ctx = RepContext::new(level);
            for colors in [[1u32, 1, 1, 1], [1, 1, 2, 2], [2, 2, 1, 1]] {
                if colors.iter().any(|&c| c > k) {
                    continue;
                }
                let slice = plat_slice(&colors);
                if enumerate_basis(level, &slice).dim() == 0 {
                    continue;
                }
                let lhs = ctx.word_unitary(&slice, &[2, 3, 2]).unwrap();
                let rhs = ctx.word_unitary(&slice, &[3, 2, 3]).unwrap();
                assert_eq!(lhs.target.slice, rhs.target.slice);
                assert!(
                    lhs.entries.max_diff(&rhs.entries) <= 1e-9,
                    "k={k} colors {colors:?}"
                );
            }
        }
    }

    #[test]
    fn far_commutativity_b6() {
        let level = Level::new(2);
        let ctx = RepContext::new(level);
        let slice = plat_slice(&[1, 1, 1, 1, 1, 1]);
        for (i, j) in [(1i32, 3i32), (1, 4), (1, 5), (2, 4), (2, 5), (3, 5)] {
            let lhs = ctx.word_unitary(&slice, &[i, j]).unwrap();
            let rhs = ctx.word_unitary(&slice, &[j, i]).unwrap();
            assert!(lhs.entries.max_diff(&rhs.entries) <= 1e-9, "({i},{j})");
        }
    }

    #[test]
    fn duality_decomposition_counts() {
        let level = Level::new(2);
        for m in 2..=3usize {
            let basis = enumerate_basis(level, &plat_slice(&vec![1u32; 2 * m]));
            let dec = duality_decomposition(level, &basis);
            assert_eq!(dec.len(), 3 * m - 5);
            // composed duality matrix is self-inverse
            let sq = dec.composed.mul(&dec.composed);
            assert!(sq.max_diff(&CMatrix::identity(sq.rows())) <= 1e-10);
        }
    }

    #[test]
    fn generator_index_errors() {
        let level = Level::new(2);
        let ctx = RepContext::new(level);
        let basis = enumerate_basis(level, &plat_slice(&[1, 1, 1, 1]));
        assert!(matches!(
            ctx.odd_generator(&basis, 2, false),
            Err(KaulError::Index { .. })
        ));
        assert!(matches!(
            ctx.even_generator(&basis, 4, false),
            Err(KaulError::Index { .. })
        ));
        let b2 = enumerate_basis(level, &plat_slice(&[1, 1]));
        assert!(matches!(
            ctx.even_generator(&b2, 2, false),
            Err(KaulError::Index { .. })
        ));
    }
}
