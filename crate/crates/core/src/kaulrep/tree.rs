//! Fusion trees over the plat strands and the elementary duality moves that
//! carry the odd-pairing tree to the even-pairing tree.
//!
//! Trees are unrooted planar trivalent graphs whose leaves are the `2m`
//! strands; the `2m-3` internal edges carry the intermediate labels and map
//! one-to-one onto the internal register blocks. A duality move re-pairs the
//! four subtrees around one internal edge: with cyclic boundary
//! `(a, b, c, d)` and old channel `x` separating `{a,b}` from `{c,d}`, the
//! new channel `y` separates `{b,c}` from `{d,a}` and the coefficient is the
//! unitarized q-6j `(-1)^(a+b+c+d) √([2x+1][2y+1]) {a b x; c d y}`.
//!
//! The even-adapted tree is the fully rotated pairing
//! `(2,3)(4,5)…(2m-2,2m-1)(2m,1)`: every even generator channel `q_l` sits
//! at a pair vertex, and the wrap channel `q_m` closes the rotation. The
//! canonical odd-to-even sequence has three stages, `3m-5` moves in all:
//!
//! 1. open the pair channels `p_2 … p_{m-1}` into odd-prefix channels
//!    (`m-2` moves),
//! 2. fuse the shifted pairs `(2l, 2l+1)` left to right (`m-1` moves),
//! 3. fuse the even channels along the rotated spine, ending in the wrap
//!    channel `(2m, 1)` (`m-2` moves).

use crate::linalg::CMatrix;
use crate::qarith::{Cplx, Level, Spin};
use crate::recoupling::{admissible, admissible_channels, SixJCache};

/// A tree edge: either a strand (leaf) or an internal label slot.
///
/// Internal slots are identified with register blocks: slot `a-1` starts as
/// the pair channel `p_a`, slots `m..2m-3` as the spine labels.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum EdgeId {
    Leaf(usize),
    Internal(usize),
}

/// One elementary duality move.
///
/// With cyclic boundary `(a, b, c, d)`, the target slot's label `x`
/// separates `{a, b}` from `{c, d}` before the move and `{b, c}` from
/// `{d, a}` after it.
#[derive(Clone, Copy, Debug)]
pub struct DualityMove {
    pub quad: [EdgeId; 4],
    /// Internal slot whose label changes.
    pub target: usize,
}

/// Unrooted trivalent fusion tree with `2m` ordered leaves.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FusionTree {
    pub leaves: usize,
    pub internal: usize,
    pub vertices: Vec<[EdgeId; 3]>,
}

impl FusionTree {
    /// The plat-adapted tree: pairs `(2a-1, 2a)` fused into `p_a`, pair
    /// channels fused left to right along spine labels. Requires `m ≥ 2`.
    pub fn plat(m: usize) -> FusionTree {
        assert!(m >= 2, "fusion trees need at least four strands");
        let mut vertices = Vec::new();
        if m == 2 {
            // single internal edge shared by both pair vertices
            vertices.push([EdgeId::Leaf(0), EdgeId::Leaf(1), EdgeId::Internal(0)]);
            vertices.push([EdgeId::Internal(0), EdgeId::Leaf(2), EdgeId::Leaf(3)]);
        } else {
            for a in 0..m {
                vertices.push([
                    EdgeId::Leaf(2 * a),
                    EdgeId::Leaf(2 * a + 1),
                    EdgeId::Internal(a),
                ]);
            }
            // spine: (p1,p2,r1), (r_{j-1}, p_{j+1}, r_j), …, (r_{m-3}, p_{m-1}, p_m)
            let spine = |j: usize| EdgeId::Internal(m + j - 1);
            if m == 3 {
                vertices.push([EdgeId::Internal(0), EdgeId::Internal(1), EdgeId::Internal(2)]);
            } else {
                vertices.push([EdgeId::Internal(0), EdgeId::Internal(1), spine(1)]);
                for j in 2..=m - 3 {
                    vertices.push([spine(j - 1), EdgeId::Internal(j), spine(j)]);
                }
                vertices.push([
                    spine(m - 3),
                    EdgeId::Internal(m - 2),
                    EdgeId::Internal(m - 1),
                ]);
            }
        }
        FusionTree {
            leaves: 2 * m,
            internal: 2 * m - 3,
            vertices,
        }
    }

    /// Apply a move, producing the re-paired tree.
    pub fn apply(&self, mv: &DualityMove) -> FusionTree {
        let target = EdgeId::Internal(mv.target);
        let [a, b, c, d] = mv.quad;
        let mut vertices: Vec<[EdgeId; 3]> = self
            .vertices
            .iter()
            .filter(|v| !v.contains(&target))
            .cloned()
            .collect();
        assert_eq!(
            vertices.len(),
            self.vertices.len() - 2,
            "move target must join exactly two vertices"
        );
        vertices.push([b, c, target]);
        vertices.push([target, d, a]);
        FusionTree {
            leaves: self.leaves,
            internal: self.internal,
            vertices,
        }
    }

    /// Enumerate admissible labelings of the internal slots, lexicographically
    /// ascending in twice-spin. `colors[i]` labels leaf `i`.
    pub fn enumerate(&self, level: Level, colors: &[Spin]) -> Vec<Vec<u32>> {
        assert_eq!(colors.len(), self.leaves);
        // peel plan: each step determines one internal slot from a vertex
        // whose other two edges are already known; leftovers are checks.
        let mut known = vec![false; self.internal];
        let mut used = vec![false; self.vertices.len()];
        let mut plan: Vec<(usize, usize)> = Vec::new();
        loop {
            let mut progressed = false;
            for (vi, v) in self.vertices.iter().enumerate() {
                if used[vi] {
                    continue;
                }
                let unknown: Vec<usize> = v
                    .iter()
                    .filter_map(|e| match e {
                        EdgeId::Internal(b) if !known[*b] => Some(*b),
                        _ => None,
                    })
                    .collect();
                if unknown.len() == 1 {
                    known[unknown[0]] = true;
                    used[vi] = true;
                    plan.push((unknown[0], vi));
                    progressed = true;
                }
            }
            if known.iter().all(|&k| k) {
                break;
            }
            assert!(progressed, "tree peeling stalled; malformed tree");
        }
        let checks: Vec<usize> = (0..self.vertices.len()).filter(|&vi| !used[vi]).collect();

        let mut out = Vec::new();
        let mut labels = vec![0u32; self.internal];
        self.enumerate_rec(level, colors, &plan, &checks, 0, &mut labels, &mut out);
        out.sort();
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate_rec(
        &self,
        level: Level,
        colors: &[Spin],
        plan: &[(usize, usize)],
        checks: &[usize],
        step: usize,
        labels: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if step == plan.len() {
            let ok = checks.iter().all(|&vi| {
                let [x, y, z] = self.vertices[vi];
                admissible(
                    level,
                    self.edge_value(x, colors, labels),
                    self.edge_value(y, colors, labels),
                    self.edge_value(z, colors, labels),
                )
            });
            if ok {
                out.push(labels.clone());
            }
            return;
        }
        let (block, vi) = plan[step];
        let others: Vec<Spin> = self.vertices[vi]
            .iter()
            .filter(|e| **e != EdgeId::Internal(block))
            .map(|e| self.edge_value(*e, colors, labels))
            .collect();
        for t in admissible_channels(level, others[0], others[1]) {
            labels[block] = t.twice();
            self.enumerate_rec(level, colors, plan, checks, step + 1, labels, out);
        }
    }

    fn edge_value(&self, e: EdgeId, colors: &[Spin], labels: &[u32]) -> Spin {
        match e {
            EdgeId::Leaf(i) => colors[i],
            EdgeId::Internal(b) => Spin::from_twice(labels[b]),
        }
    }

    /// Leaf set on the far side of an internal edge (the side without leaf 0),
    /// as a bitmask. Canonical identity of the edge across trees.
    pub fn edge_bitmask(&self, block: usize) -> u32 {
        let target = EdgeId::Internal(block);
        let (side_a, side_b) = self.edge_sides(target);
        if side_a & 1 == 0 {
            side_a
        } else {
            side_b
        }
    }

    fn edge_sides(&self, target: EdgeId) -> (u32, u32) {
        let ends: Vec<usize> = (0..self.vertices.len())
            .filter(|&vi| self.vertices[vi].contains(&target))
            .collect();
        assert_eq!(ends.len(), 2, "internal edge must join two vertices");
        let mask = self.flood_leaves(ends[0], target);
        let all = if self.leaves == 32 {
            u32::MAX
        } else {
            (1u32 << self.leaves) - 1
        };
        (mask, all & !mask)
    }

    fn flood_leaves(&self, start_vertex: usize, blocked: EdgeId) -> u32 {
        let mut mask = 0u32;
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![start_vertex];
        seen[start_vertex] = true;
        while let Some(vi) = stack.pop() {
            for e in self.vertices[vi] {
                if e == blocked {
                    continue;
                }
                match e {
                    EdgeId::Leaf(i) => mask |= 1 << i,
                    EdgeId::Internal(_) => {
                        for (wi, w) in self.vertices.iter().enumerate() {
                            if wi != vi && !seen[wi] && w.contains(&e) {
                                seen[wi] = true;
                                stack.push(wi);
                            }
                        }
                    }
                }
            }
        }
        mask
    }
}

/// The canonical odd-to-even move sequence for `m ≥ 2`: exactly `3m-5` moves.
pub fn decomposition_moves(m: usize) -> Vec<DualityMove> {
    assert!(m >= 2);
    let leaf = EdgeId::Leaf;
    let internal = EdgeId::Internal;
    // spine slot holding r_j in the plat tree
    let spine = |j: usize| internal(m + j - 1);
    let mut moves = Vec::new();

    // Stage 1: open p_{i+1} into the odd prefix t_i (written into slot i).
    // Quad around p_{i+1}: (r_i, r_{i-1}, j_{2i+1}, j_{2i+2}) cyclically,
    // re-pairing {r_{i-1}, j_{2i+1}}.
    for i in 1..=m.saturating_sub(2) {
        let left = if i == 1 { internal(0) } else { spine(i - 1) };
        let right = if i <= m - 3 { spine(i) } else { internal(m - 1) };
        moves.push(DualityMove {
            quad: [right, left, leaf(2 * i), leaf(2 * i + 1)],
            target: i,
        });
    }

    // Stage 2: fuse the shifted pair (2l, 2l+1) into q_l. The target slot is
    // the even-prefix edge: slot 0 for l=1, spine slot l-1 for the middle,
    // slot m-1 for l=m-1. Quad: (t_{l-1}, j_{2l}, j_{2l+1}, t_l) with the
    // ends replaced by the outer strands j_1, j_{2m}.
    for l in 1..=m - 1 {
        let a = if l == 1 { leaf(0) } else { internal(l - 1) };
        let d = if l == m - 1 { leaf(2 * m - 1) } else { internal(l) };
        moves.push(DualityMove {
            quad: [a, leaf(2 * l - 1), leaf(2 * l), d],
            target: even_channel_slot(m, l),
        });
    }

    // Stage 3: fuse the even channels along the rotated spine. The odd
    // prefixes t_1 … t_{m-2} (in slots 1 … m-2) turn into the rotated spine
    // labels, with the last one the wrap channel (2m, 1). The first strand
    // migrates outward one move at a time.
    for i in 1..=m.saturating_sub(2) {
        let b = if i == 1 {
            internal(even_channel_slot(m, 1))
        } else {
            internal(i - 1)
        };
        let c = internal(even_channel_slot(m, i + 1));
        let d = if i == m - 2 { leaf(2 * m - 1) } else { internal(i + 1) };
        moves.push(DualityMove {
            quad: [leaf(0), b, c, d],
            target: i,
        });
    }

    debug_assert_eq!(moves.len(), 3 * m - 5);
    moves
}

/// Internal slot holding the even pair channel `q_l` after the move sequence.
pub fn even_channel_slot(m: usize, l: usize) -> usize {
    assert!((1..m).contains(&l));
    if l == 1 {
        0
    } else if l == m - 1 {
        m - 1
    } else {
        m + l - 2
    }
}

/// A realized odd-to-even duality chain for one coloring: the intermediate
/// trees, their labeling bases and the dense move matrices.
pub struct DualityChain {
    pub moves: Vec<DualityMove>,
    pub trees: Vec<FusionTree>,
    pub bases: Vec<Vec<Vec<u32>>>,
    pub matrices: Vec<CMatrix>,
    /// Product of all move matrices: maps odd-basis coordinates to even-basis
    /// coordinates.
    pub composed: CMatrix,
}

impl DualityChain {
    pub fn new(cache: &SixJCache, colors: &[Spin]) -> DualityChain {
        let m = colors.len() / 2;
        let moves = decomposition_moves(m);
        let level = cache.level();
        let mut trees = vec![FusionTree::plat(m)];
        let mut bases = vec![trees[0].enumerate(level, colors)];
        let mut matrices = Vec::new();
        let dim = bases[0].len();
        let mut composed = CMatrix::identity(dim);
        for mv in &moves {
            let before_tree = trees.last().unwrap().clone();
            let after_tree = before_tree.apply(mv);
            let before = bases.last().unwrap().clone();
            let after = after_tree.enumerate(level, colors);
            debug_assert_eq!(after.len(), dim, "duality move must preserve dimension");
            let mat = move_matrix(cache, colors, mv, &before, &after);
            composed = mat.mul(&composed);
            trees.push(after_tree);
            bases.push(after);
            matrices.push(mat);
        }
        DualityChain {
            moves,
            trees,
            bases,
            matrices,
            composed,
        }
    }

    pub fn odd_basis(&self) -> &Vec<Vec<u32>> {
        &self.bases[0]
    }

    pub fn even_basis(&self) -> &Vec<Vec<u32>> {
        self.bases.last().unwrap()
    }
}

/// Dense matrix of one move: rows run over `after`, columns over `before`.
pub fn move_matrix(
    cache: &SixJCache,
    colors: &[Spin],
    mv: &DualityMove,
    before: &[Vec<u32>],
    after: &[Vec<u32>],
) -> CMatrix {
    let level = cache.level();
    let mut out = CMatrix::zeros(after.len(), before.len());
    let value = |e: EdgeId, labels: &[u32]| match e {
        EdgeId::Leaf(i) => colors[i],
        EdgeId::Internal(b) => Spin::from_twice(labels[b]),
    };
    for (col, labels) in before.iter().enumerate() {
        let [ea, eb, ec, ed] = mv.quad;
        let (a, b, c, d) = (
            value(ea, labels),
            value(eb, labels),
            value(ec, labels),
            value(ed, labels),
        );
        let x = Spin::from_twice(labels[mv.target]);
        debug_assert!(admissible(level, a, b, x) && admissible(level, c, d, x));
        let mut scratch = labels.clone();
        for y in admissible_channels(level, b, c) {
            if !admissible(level, d, a, y) {
                continue;
            }
            let coeff = cache.unitarized(a, b, c, d, x, y);
            if coeff == 0.0 {
                continue;
            }
            scratch[mv.target] = y.twice();
            let row = after
                .binary_search(&scratch)
                .expect("move image must be an admissible labeling");
            out[(row, col)] += Cplx::new(coeff, 0.0);
        }
    }
    out
}
