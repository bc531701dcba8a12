//! Quantum integers, quantum dimensions, Casimirs and exact powers of the
//! root of unity `q = exp(2πi/(k+2))`.
//!
//! Every phase in the representation is a power of `q` with a quarter-integer
//! exponent (Casimirs are quarter-integers), so exponents are carried as
//! exact rationals until the final complex exponentiation. Quantum integers
//! are evaluated through the sine ratio `[n] = sin(πn/(k+2)) / sin(π/(k+2))`,
//! which is numerically identical to the Laurent form at a root of unity but
//! free of cancellation.

use std::f64::consts::PI;
use std::fmt;

use num_rational::Rational64;
use thiserror::Error;

/// Double-precision complex scalar used throughout the crate.
pub type Cplx = num_complex::Complex64;

/// Exact rational exponent of `q`.
pub type QExponent = Rational64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QArithError {
    /// A quantum integer outside `0 ≤ n ≤ k+2` was requested; the quantum
    /// factorials vanish beyond the truncation, so no caller should need one.
    #[error("quantum integer [{n}] out of range at level k={k} (need 0 <= n <= {max})")]
    OutOfRange { n: i64, k: u32, max: i64 },
}

/// An SU(2)_q spin label, stored exactly as twice its value.
///
/// The type itself puts no ceiling on the label; the level-k bound
/// `2j ≤ k` is enforced where fusion rules apply.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub const ZERO: Spin = Spin { twice: 0 };
    pub const HALF: Spin = Spin { twice: 1 };
    pub const ONE: Spin = Spin { twice: 2 };

    pub const fn from_twice(twice: u32) -> Self {
        Spin { twice }
    }

    /// Twice the spin value, `2j`.
    pub const fn twice(self) -> u32 {
        self.twice
    }

    /// `j` as a float (for display and diagnostics only).
    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }
}

impl fmt::Debug for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Spin({self})")
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// The Chern-Simons / WZW level `k ≥ 1`, fixing `q = exp(2πi/(k+2))` and the
/// spin truncation `{0, 1/2, ..., k/2}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Level {
    k: u32,
}

impl Level {
    /// `k` must be at least 1.
    pub fn new(k: u32) -> Self {
        assert!(k >= 1, "level must satisfy k >= 1");
        Level { k }
    }

    pub const fn k(self) -> u32 {
        self.k
    }

    /// `k + 2`, the order of `q`.
    pub const fn root_order(self) -> u32 {
        self.k + 2
    }

    /// Largest admissible twice-spin, `2j = k`.
    pub const fn max_twice(self) -> u32 {
        self.k
    }

    /// True iff the label survives the level-k truncation.
    pub fn allows(self, j: Spin) -> bool {
        j.twice() <= self.k
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={}", self.k)
    }
}

/// `q^e` for an exact rational exponent: `exp(2πi · e / (k+2))`.
pub fn q_power(level: Level, exponent: QExponent) -> Cplx {
    let e = (*exponent.numer() as f64) / (*exponent.denom() as f64);
    let theta = 2.0 * PI * e / f64::from(level.root_order());
    Cplx::new(theta.cos(), theta.sin())
}

/// `q^(half_steps/2)`, i.e. `exp(2πi · half_steps / (2(k+2)))`.
///
/// Half-integer powers of `q` are the atomic currency: differences of
/// Casimirs are half-integers times integers.
pub fn root_of_unity(level: Level, half_steps: i64) -> Cplx {
    q_power(level, Rational64::new(half_steps, 2))
}

/// The quantum integer `[n] = sin(πn/(k+2)) / sin(π/(k+2))`.
///
/// Defined for `0 ≤ n ≤ k+2`, with `[0] = [k+2] = 0` and `[1] = 1`.
pub fn qint(level: Level, n: i64) -> Result<f64, QArithError> {
    let max = i64::from(level.root_order());
    if n < 0 || n > max {
        return Err(QArithError::OutOfRange { n, k: level.k(), max });
    }
    let denom = f64::from(level.root_order());
    Ok((PI * n as f64 / denom).sin() / (PI / denom).sin())
}

/// Quantum factorial `[n]! = [n][n-1]…[1]`, with `[0]! = 1`.
///
/// Requires `0 ≤ n ≤ k+1` so that every factor is strictly positive.
pub(crate) fn qfact(level: Level, n: i64) -> Result<f64, QArithError> {
    if n < 0 || n > i64::from(level.k()) + 1 {
        return Err(QArithError::OutOfRange {
            n,
            k: level.k(),
            max: i64::from(level.k()) + 1,
        });
    }
    let mut acc = 1.0;
    for m in 1..=n {
        acc *= qint(level, m)?;
    }
    Ok(acc)
}

/// The quadratic Casimir `c_j = j(j+1)` as an exact rational.
///
/// With `2j = t` this is `t(t+2)/4`, so `4·c_j` is always an integer.
pub fn casimir(j: Spin) -> Rational64 {
    let t = i64::from(j.twice());
    Rational64::new(t * (t + 2), 4)
}

/// The quantum dimension `[2j+1]` of the spin-`j` irrep.
pub fn qdim(level: Level, j: Spin) -> Result<f64, QArithError> {
    if !level.allows(j) {
        return Err(QArithError::OutOfRange {
            n: i64::from(j.twice()),
            k: level.k(),
            max: i64::from(level.k()),
        });
    }
    qint(level, i64::from(j.twice()) + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    fn close(a: Cplx, b: Cplx) -> bool {
        (a - b).norm() <= TOL
    }

    #[test]
    fn root_of_unity_trivial_cases() {
        let k1 = Level::new(1);
        assert!(close(root_of_unity(k1, 0), Cplx::new(1.0, 0.0)));
        // q^4 at k=2 is a full period.
        let k2 = Level::new(2);
        assert!(close(root_of_unity(k2, 8), Cplx::new(1.0, 0.0)));
    }

    #[test]
    fn root_of_unity_third_root() {
        // q at k=1 is exp(2πi/3).
        let k1 = Level::new(1);
        let expected = Cplx::new(-0.5, 0.75f64.sqrt());
        assert!(close(root_of_unity(k1, 2), expected));
    }

    #[test]
    fn qint_values() {
        assert!((qint(Level::new(3), 1).unwrap() - 1.0).abs() <= TOL);
        // sin(π/2)/sin(π/4) = √2
        assert!((qint(Level::new(2), 2).unwrap() - 2f64.sqrt()).abs() <= TOL);
        // sin(2π/3)/sin(π/3) = 1
        assert!((qint(Level::new(1), 2).unwrap() - 1.0).abs() <= TOL);
        // endpoints
        assert!(qint(Level::new(3), 0).unwrap().abs() <= TOL);
        assert!(qint(Level::new(3), 5).unwrap().abs() <= TOL);
    }

    #[test]
    fn qint_out_of_range() {
        assert_eq!(
            qint(Level::new(2), 5),
            Err(QArithError::OutOfRange { n: 5, k: 2, max: 4 })
        );
        assert!(qint(Level::new(2), -1).is_err());
    }

    #[test]
    fn casimir_values() {
        assert_eq!(casimir(Spin::ZERO), Rational64::new(0, 1));
        assert_eq!(casimir(Spin::HALF), Rational64::new(3, 4));
        assert_eq!(casimir(Spin::ONE), Rational64::new(2, 1));
    }

    #[test]
    fn qdim_values() {
        assert!((qdim(Level::new(3), Spin::ZERO).unwrap() - 1.0).abs() <= TOL);
        assert!((qdim(Level::new(1), Spin::HALF).unwrap() - 1.0).abs() <= TOL);
        assert!((qdim(Level::new(2), Spin::HALF).unwrap() - 2f64.sqrt()).abs() <= TOL);
        assert!(qdim(Level::new(2), Spin::from_twice(3)).is_err());
    }

    proptest! {
        // [n] = [k+2-n]: reflection symmetry of the sine.
        #[test]
        fn qint_reflection(k in 1u32..8, n in 0i64..10) {
            let level = Level::new(k);
            let max = i64::from(level.root_order());
            prop_assume!(n <= max);
            let a = qint(level, n).unwrap();
            let b = qint(level, max - n).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }

        // [n] > 0 strictly inside the truncation.
        #[test]
        fn qint_positive(k in 1u32..8, n in 1i64..9) {
            let level = Level::new(k);
            prop_assume!(n <= i64::from(k) + 1);
            prop_assert!(qint(level, n).unwrap() > 0.0);
        }

        // q^(a/2) · q^(b/2) = q^((a+b)/2)
        #[test]
        fn root_of_unity_additive(k in 1u32..8, a in -40i64..40, b in -40i64..40) {
            let level = Level::new(k);
            let lhs = root_of_unity(level, a) * root_of_unity(level, b);
            let rhs = root_of_unity(level, a + b);
            prop_assert!((lhs - rhs).norm() <= 1e-12);
        }

        // 4·c_j is an integer.
        #[test]
        fn casimir_quarter_integer(t in 0u32..64) {
            let c = casimir(Spin::from_twice(t));
            prop_assert_eq!(*(c * 4).denom(), 1);
        }
    }
}
