//! Level-k fusion rules, q-6j symbols of SU(2)_q and elementary duality
//! matrices.
//!
//! The q-6j symbol is evaluated with the Kirillov-Reshetikhin sum formula
//! over truncated quantum factorials. At level k every admissible triple has
//! `a+b+c ≤ k`, which keeps all factorial arguments inside `[0, k+1]` where
//! the quantum factorial is strictly positive; summands with `z > k` vanish
//! because `[z+1]!` picks up the factor `[k+2] = 0`, so they are skipped.
//!
//! Elementary duality matrices are the unitarized form: entry
//! `(-1)^(a+b+c+d) √([2x+1][2y+1]) {a b x; c d y}` relating the two planar
//! pairings of four objects. In this convention every block with a spin-0
//! boundary label collapses to the 1x1 matrix `[+1]`, and the blocks are
//! real orthogonal.

use std::collections::HashMap;
use std::sync::RwLock;

use thiserror::Error;

use crate::linalg::CMatrix;
use crate::qarith::{qfact, qint, Cplx, Level, Spin};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RecouplingError {
    /// No admissible intermediate label exists for the requested block.
    #[error("empty duality block for boundary ({a}, {b}; {c}, {d}) at {level}")]
    EmptyBlock {
        level: Level,
        a: Spin,
        b: Spin,
        c: Spin,
        d: Spin,
    },
}

/// An ordered triple of spins subject to the fusion rules.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Triple {
    pub a: Spin,
    pub b: Spin,
    pub c: Spin,
}

impl Triple {
    pub fn new(a: Spin, b: Spin, c: Spin) -> Self {
        Triple { a, b, c }
    }

    pub fn is_admissible(&self, level: Level) -> bool {
        admissible(level, self.a, self.b, self.c)
    }
}

/// Level-k truncated SU(2) fusion rules: `|a-b| ≤ c ≤ a+b`, integer total
/// spin, and `a+b+c ≤ k`.
pub fn admissible(level: Level, a: Spin, b: Spin, c: Spin) -> bool {
    let (ta, tb, tc) = (a.twice(), b.twice(), c.twice());
    let lo = ta.abs_diff(tb);
    let hi = ta + tb;
    tc >= lo && tc <= hi && (ta + tb + tc) % 2 == 0 && ta + tb + tc <= 2 * level.k()
}

/// All spins `t` with `(a, b, t)` admissible at the given level, ascending.
pub fn admissible_channels(level: Level, a: Spin, b: Spin) -> Vec<Spin> {
    let (ta, tb) = (a.twice(), b.twice());
    if ta + tb > 2 * level.k() {
        return Vec::new();
    }
    let lo = ta.abs_diff(tb);
    let hi = (ta + tb).min(2 * level.k() - ta - tb);
    (lo..=hi).step_by(2).map(Spin::from_twice).collect()
}

/// The six edge labels of an elementary recoupling, arranged as the symbol
/// `{j1 j2 j12; j3 j j23}` with triads `(j1,j2,j12)`, `(j12,j3,j)`,
/// `(j2,j3,j23)`, `(j1,j23,j)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct SixJ {
    pub j1: Spin,
    pub j2: Spin,
    pub j12: Spin,
    pub j3: Spin,
    pub j23: Spin,
    pub j: Spin,
}

impl SixJ {
    #[allow(clippy::too_many_arguments)]
    pub fn new(j1: Spin, j2: Spin, j12: Spin, j3: Spin, j23: Spin, j: Spin) -> Self {
        SixJ { j1, j2, j12, j3, j23, j }
    }

    fn triads(&self) -> [Triple; 4] {
        [
            Triple::new(self.j1, self.j2, self.j12),
            Triple::new(self.j12, self.j3, self.j),
            Triple::new(self.j2, self.j3, self.j23),
            Triple::new(self.j1, self.j23, self.j),
        ]
    }
}

/// `(-1)^n` for an integer `n` given as twice-value over two.
fn parity(twice_sum: i64) -> f64 {
    debug_assert!(twice_sum % 2 == 0, "parity exponent must be an integer");
    if (twice_sum / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Triangle weight `Δ(a,b,c) = √([a+b−c]! [a−b+c]! [−a+b+c]! / [a+b+c+1]!)`.
///
/// Only called on level-admissible triples, so every factorial argument lies
/// in `[0, k+1]`.
fn triangle_weight(level: Level, t: Triple) -> f64 {
    let (ta, tb, tc) = (
        i64::from(t.a.twice()),
        i64::from(t.b.twice()),
        i64::from(t.c.twice()),
    );
    let num = qfact(level, (ta + tb - tc) / 2).unwrap()
        * qfact(level, (ta - tb + tc) / 2).unwrap()
        * qfact(level, (-ta + tb + tc) / 2).unwrap();
    let den = qfact(level, (ta + tb + tc) / 2 + 1).unwrap();
    (num / den).sqrt()
}

/// The quantum 6j symbol at `q = exp(2πi/(k+2))` in the classical
/// normalization. Returns 0 when any of the four triads is inadmissible.
pub fn qsixj(level: Level, s: &SixJ) -> f64 {
    let triads = s.triads();
    if triads.iter().any(|t| !t.is_admissible(level)) {
        return 0.0;
    }

    let half = |x: Spin| i64::from(x.twice());
    // Triad and quadrilateral sums, in ordinary (not twice) units.
    let t1 = (half(s.j1) + half(s.j2) + half(s.j12)) / 2;
    let t2 = (half(s.j12) + half(s.j3) + half(s.j)) / 2;
    let t3 = (half(s.j2) + half(s.j3) + half(s.j23)) / 2;
    let t4 = (half(s.j1) + half(s.j23) + half(s.j)) / 2;
    let q1 = (half(s.j1) + half(s.j2) + half(s.j3) + half(s.j)) / 2;
    let q2 = (half(s.j1) + half(s.j12) + half(s.j3) + half(s.j23)) / 2;
    let q3 = (half(s.j2) + half(s.j12) + half(s.j) + half(s.j23)) / 2;

    let z_min = t1.max(t2).max(t3).max(t4);
    let z_max = q1.min(q2).min(q3).min(i64::from(level.k()));

    let mut sum = 0.0;
    for z in z_min..=z_max {
        let sign = if z % 2 == 0 { 1.0 } else { -1.0 };
        let num = qfact(level, z + 1).unwrap();
        let den = qfact(level, z - t1).unwrap()
            * qfact(level, z - t2).unwrap()
            * qfact(level, z - t3).unwrap()
            * qfact(level, z - t4).unwrap()
            * qfact(level, q1 - z).unwrap()
            * qfact(level, q2 - z).unwrap()
            * qfact(level, q3 - z).unwrap();
        sum += sign * num / den;
    }

    let weight: f64 = triads.iter().map(|&t| triangle_weight(level, t)).product();
    weight * sum
}

/// Unitarized q-6j: `(-1)^(a+b+c+d) √([2x+1][2y+1]) {a b x; c d y}`.
///
/// This is the matrix element of the elementary duality move with cyclic
/// boundary `(a, b, c, d)`, carrying the `{a,b}|{c,d}` pairing with channel
/// `x` to the `{b,c}|{d,a}` pairing with channel `y`.
pub fn unitarized_qsixj(level: Level, a: Spin, b: Spin, c: Spin, d: Spin, x: Spin, y: Spin) -> f64 {
    let s = SixJ::new(a, b, x, c, y, d);
    let value = qsixj(level, &s);
    if value == 0.0 {
        return 0.0;
    }
    let dims = qint(level, i64::from(x.twice()) + 1).unwrap()
        * qint(level, i64::from(y.twice()) + 1).unwrap();
    let sign = parity(i64::from(a.twice() + b.twice() + c.twice() + d.twice()));
    sign * dims.sqrt() * value
}

/// An elementary duality matrix: the change of basis between the two planar
/// pairings of four objects with fixed boundary labels.
///
/// Rows are indexed by the new channel `y ∈ adm(b,c) ∩ adm(d,a)`, columns by
/// the old channel `x ∈ adm(a,b) ∩ adm(c,d)`, both ascending. Entries are
/// real; the matrix is orthogonal.
#[derive(Clone, Debug)]
pub struct ElementaryDualityMatrix {
    pub boundary: [Spin; 4],
    pub row_labels: Vec<Spin>,
    pub col_labels: Vec<Spin>,
    pub entries: CMatrix,
}

/// Intersection of the two channel sets a duality-block index ranges over.
fn block_channels(level: Level, p: Spin, q: Spin, r: Spin, s: Spin) -> Vec<Spin> {
    admissible_channels(level, p, q)
        .into_iter()
        .filter(|&t| admissible(level, r, s, t))
        .collect()
}

/// Build the elementary duality matrix for cyclic boundary `(a, b, c, d)`.
pub fn elementary_duality(
    level: Level,
    a: Spin,
    b: Spin,
    c: Spin,
    d: Spin,
) -> Result<ElementaryDualityMatrix, RecouplingError> {
    let cols = block_channels(level, a, b, c, d);
    let rows = block_channels(level, b, c, d, a);
    if rows.is_empty() || cols.is_empty() {
        return Err(RecouplingError::EmptyBlock { level, a, b, c, d });
    }
    debug_assert_eq!(rows.len(), cols.len(), "duality block must be square");
    let entries = CMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        Cplx::new(unitarized_qsixj(level, a, b, c, d, cols[j], rows[i]), 0.0)
    });
    Ok(ElementaryDualityMatrix {
        boundary: [a, b, c, d],
        row_labels: rows,
        col_labels: cols,
        entries,
    })
}

/// Memo table of q-6j values for one level.
///
/// Safe for concurrent reads; concurrent misses fill the table behind a
/// write lock. Behavior is identical with or without the cache.
pub struct SixJCache {
    level: Level,
    table: RwLock<HashMap<SixJ, f64>>,
}

impl SixJCache {
    pub fn new(level: Level) -> Self {
        SixJCache {
            level,
            table: RwLock::new(HashMap::new()),
        }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn get(&self, s: &SixJ) -> f64 {
        if let Some(v) = self.table.read().unwrap().get(s) {
            return *v;
        }
        let v = qsixj(self.level, s);
        self.table.write().unwrap().insert(*s, v);
        v
    }

    /// Cached variant of [`unitarized_qsixj`].
    pub fn unitarized(&self, a: Spin, b: Spin, c: Spin, d: Spin, x: Spin, y: Spin) -> f64 {
        let s = SixJ::new(a, b, x, c, y, d);
        let value = self.get(&s);
        if value == 0.0 {
            return 0.0;
        }
        let dims = qint(self.level, i64::from(x.twice()) + 1).unwrap()
            * qint(self.level, i64::from(y.twice()) + 1).unwrap();
        let sign = parity(i64::from(a.twice() + b.twice() + c.twice() + d.twice()));
        sign * dims.sqrt() * value
    }
}
