//! Random walks on primitive lattice points.
//!
//! A walk on `Z^d` adds an i.i.d. step drawn from a finitely supported
//! measure and then removes common factors: either the whole gcd
//! ([`WalkMode::FullGcd`]) or only powers of a fixed `k`
//! ([`WalkMode::CoprimeTo`]). The crate provides
//!
//! * exact step maps and the constructive irreducibility path ([`lattice`]),
//! * step distributions and their assumption checks ([`measure`]),
//! * the plain-sum walk on the discrete torus and the Chernoff experiment ([`torus`]),
//! * a seeded, thread-count-independent Monte Carlo engine ([`engine`]),
//! * an exact rational oracle on truncated chains ([`oracle`]).

pub mod engine;
pub mod error;
pub mod lattice;
pub mod measure;
pub mod oracle;
pub mod par;
pub mod stats;
pub mod stream;
pub mod torus;

pub use error::{Result, WalkError};
pub use lattice::{LatticePoint, NormKind, StepSequence, WalkMode};
pub use measure::StepDistribution;
pub use par::Parallelism;
pub use stream::RandomStream;
