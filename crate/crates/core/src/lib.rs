//! Colored Jones polynomials of plat-closed braids at `q = exp(2πi/(k+2))`.
//!
//! The crate has two evaluation engines for the same invariant:
//!
//! * a dense one ([`invariant`]) that applies the unitary images of the
//!   colored braid generators to a conformal-block state vector, and
//! * a gate-level one ([`circuitsim`]) that encodes the fusion-path basis
//!   into qubit blocks, compiles each generator into diagonal-phase and
//!   q-6j gates, and estimates the invariant by Hadamard-test sampling.
//!
//! Supporting layers: [`qarith`] (quantum integers, Casimirs, exact powers
//! of the root of unity), [`recoupling`] (q-6j symbols and elementary
//! duality matrices), [`braid`] (colored braid words and plat closures),
//! [`kaulrep`] (the braid-group representation itself) and [`oracle`]
//! (an independent Kauffman-bracket state sum used for cross-validation).

pub mod braid;
pub mod circuitsim;
pub mod invariant;
pub mod kaulrep;
pub mod linalg;
pub mod oracle;
pub mod qarith;
pub mod recoupling;

pub use braid::{ColoredBraidWord, LevelSlice, StrandState};
pub use invariant::InvariantValue;
pub use kaulrep::{Basis, FusionPath, RepMatrix};
pub use linalg::CMatrix;
pub use qarith::{Cplx, Level, Spin};
pub use recoupling::{ElementaryDualityMatrix, SixJ};
