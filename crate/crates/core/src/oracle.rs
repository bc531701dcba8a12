//! Independent Kauffman-bracket state sum for spin-1/2 plat closures.
//!
//! This is the validation oracle for the representation engine: an
//! exponential-time sum over all `2^ℓ` smoothings of the plat diagram, with
//! loop value `-A² - A^(-2)` at `A = q^(-1/4)` and writhe normalization
//! `(-A³)^(-w)`. The value is un-reduced: the unknot evaluates to the loop
//! value, whose modulus is the quantum dimension `[2]`, matching the
//! cap-pair normalization of the exact engine. No code is shared with the
//! recoupling path.

use num_rational::Rational64;
use thiserror::Error;

use crate::braid::ColoredBraidWord;
use crate::invariant::{evaluate, InvariantError};
use crate::qarith::{q_power, Cplx, Level, Spin};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle requires every color to be 1/2, found {0}")]
    Color(Spin),
    #[error("state sum capped at {max} crossings, braid has {got}")]
    Size { got: usize, max: usize },
    #[error(transparent)]
    Invariant(#[from] InvariantError),
}

const MAX_CROSSINGS: usize = 16;

/// Planar data of one smoothing state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlanarDiagram {
    pub crossings: usize,
    pub loops: usize,
}

/// `base^n` for a unit-modulus complex number (the inverse is the conjugate).
fn unit_pow(base: Cplx, n: i64) -> Cplx {
    let b = if n >= 0 { base } else { base.conj() };
    let mut acc = Cplx::new(1.0, 0.0);
    for _ in 0..n.unsigned_abs() {
        acc *= b;
    }
    acc
}

/// Ambient-isotopy Kauffman bracket of the plat closure.
pub fn kauffman_bracket(level: Level, braid: &ColoredBraidWord) -> Result<Cplx, OracleError> {
    for s in braid.bottom() {
        if s.color != Spin::HALF {
            return Err(OracleError::Color(s.color));
        }
    }
    let len = braid.word().len();
    if len > MAX_CROSSINGS {
        return Err(OracleError::Size { got: len, max: MAX_CROSSINGS });
    }

    let a = q_power(level, Rational64::new(-1, 4));
    let loop_value = -(a * a) - (a.conj() * a.conj());

    let mut total = Cplx::new(0.0, 0.0);
    for state in 0u32..(1u32 << len) {
        let mut exponent = 0i64;
        for (ci, &letter) in braid.word().iter().enumerate() {
            // the A-weighted smoothing of σ_i (and the A^{-1}-weighted one of
            // σ_i^{-1}) is the vertical tangle; `smooth` uses the same rule
            let identity_tangle = ((state >> ci) & 1 == 0) == (letter > 0);
            let sign = i64::from(letter.signum());
            exponent += if identity_tangle { sign } else { -sign };
        }
        let diagram = smooth(braid, state);
        total += unit_pow(a, exponent) * unit_pow(loop_value, diagram.loops as i64);
    }

    let w = writhe(braid);
    let minus_a_cubed = -unit_pow(a, 3);
    Ok(total * unit_pow(minus_a_cubed, -w))
}

/// Oriented writhe of the plat diagram: each letter contributes its sign,
/// flipped when the two strands run antiparallel at that level.
pub fn writhe(braid: &ColoredBraidWord) -> i64 {
    let mut w = 0i64;
    for (pos, &letter) in braid.word().iter().enumerate() {
        let slice = braid.slice_at(pos).expect("prefix position in range");
        let i = letter.unsigned_abs() as usize - 1;
        let parallel = slice.strands[i].up == slice.strands[i + 1].up;
        let sign = i64::from(letter.signum());
        w += if parallel { sign } else { -sign };
    }
    w
}

/// Resolve every crossing per the state bits and count closed loops.
pub fn smooth(braid: &ColoredBraidWord, state: u32) -> PlanarDiagram {
    let n = braid.strands();
    let len = braid.word().len();
    let mut uf = UnionFind::new(n * (len + 1));
    let id = |level: usize, pos: usize| level * n + pos;

    for i in (0..n).step_by(2) {
        uf.union(id(0, i), id(0, i + 1));
        uf.union(id(len, i), id(len, i + 1));
    }
    for (ci, &letter) in braid.word().iter().enumerate() {
        let i = letter.unsigned_abs() as usize - 1;
        // Kauffman smoothings: the A-coefficient of a positive letter (and
        // the A^{-1}-coefficient of a negative one) joins the strands
        // vertically; the other choice caps them.
        let identity_tangle = ((state >> ci) & 1 == 0) == (letter > 0);
        if identity_tangle {
            uf.union(id(ci, i), id(ci + 1, i));
            uf.union(id(ci, i + 1), id(ci + 1, i + 1));
        } else {
            uf.union(id(ci, i), id(ci, i + 1));
            uf.union(id(ci + 1, i), id(ci + 1, i + 1));
        }
        for pos in 0..n {
            if pos != i && pos != i + 1 {
                uf.union(id(ci, pos), id(ci + 1, pos));
            }
        }
    }
    let mut roots: Vec<usize> = (0..n * (len + 1)).map(|x| uf.find(x)).collect();
    roots.sort_unstable();
    roots.dedup();
    PlanarDiagram { crossings: len, loops: roots.len() }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Result of comparing the two engines on one braid.
#[derive(Clone, Debug)]
pub struct CompareRecord {
    pub kaul_abs: f64,
    pub bracket_abs: f64,
    pub difference: f64,
    pub pass: bool,
}

/// Compare `|V|` from the representation engine against the bracket modulus
/// at the 1e-6 agreement threshold.
pub fn compare(level: Level, braid: &ColoredBraidWord) -> Result<CompareRecord, OracleError> {
    let kaul = evaluate(level, braid)?;
    let bracket = kauffman_bracket(level, braid)?;
    let difference = (kaul.abs() - bracket.norm()).abs();
    Ok(CompareRecord {
        kaul_abs: kaul.abs(),
        bracket_abs: bracket.norm(),
        difference,
        pass: difference <= 1e-6,
    })
}
