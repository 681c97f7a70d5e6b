//! Optimal H2 decentralized controllers for cone-causal spatially invariant
//! systems.
//!
//! Transfer functions are series in a spatial shift `z` (two-sided) and a
//! temporal delay `lambda` (one-sided). A system is cone causal when its
//! impulse response vanishes at `(i, t)` with `t < |i|`: effects travel at
//! most one site per time step. The synthesis reduces the decentralized H2
//! problem to one scalar model-matching problem per site index, and the
//! resulting controller is realized in l-causal state-space form so each
//! site only talks to its nearest neighbours.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix `f64`.

pub mod bivariate;
pub mod error;
pub mod example;
pub mod factorization;
pub mod lattice_sim;
pub mod matrix;
pub mod rational;
pub mod roots;
pub mod scalar;
pub mod statespace;
pub mod synthesis;

pub use bivariate::{BiSeries, LambdaSeries, SupportBox, TruncationShape};
pub use error::{Error, Result};
pub use example::RingExample;
pub use factorization::{apply_inner_adjoint, inner_outer, InnerOuter};
pub use lattice_sim::{FeedbackLoop, LatticeSignal, LatticeSystem};
pub use matrix::Mat;
pub use rational::RationalTransfer;
pub use scalar::Scalar;
pub use statespace::{LRealization, ZMatrix};
pub use synthesis::{NormReport, Problem, ProblemMode, SynthesisOptions, SynthesisResult};

pub type Series = BiSeries<f64>;
pub type Slice = LambdaSeries<f64>;
pub type Rational = RationalTransfer<f64>;
pub type Realization = LRealization<f64>;
pub type Matrix = Mat<f64>;
pub type Signal = LatticeSignal<f64>;
pub type System = LatticeSystem<f64>;
pub type Plant = Problem<f64>;
pub type Synthesis = SynthesisResult<f64>;
pub type Example = RingExample<f64>;
