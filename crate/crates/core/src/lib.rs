//! Decide whether a linear ODE `ẋ = Ax` can be rewritten as a Schrödinger
//! equation, and build the transforming matrices that do it.
//!
//! The pipeline runs bottom-up:
//!
//! - [`linalg`]: dense real/complex kernel (eigen, polar, square roots,
//!   left inverses, exponentials, structural predicates).
//! - [`embeddability`]: pure-imaginary diagonalizability test and positive
//!   witnesses `D` with `DA` anti-hermitian or real anti-symmetric.
//! - [`carleman`]: complex transforming matrices `B`, the mapped Hamiltonian
//!   `i·B A C_B`, and truncated Carleman linearization of polynomial ODEs.
//! - [`koopman`]: real transforming matrices, conversions between the two
//!   flavors, sparsity bounds, and the second-quantized Fock Hamiltonian.
//! - [`dynamics`]: quadratic classical Hamiltonians and coupled oscillators.
//! - [`simulate`]: dense reference evolution and embedding round trips.
//! - [`resources`]: query and qubit counts for the quantum algorithm.
//! - [`cli`]: the `ode2schrod` command-line front end.

pub mod carleman;
pub mod cli;
pub mod dynamics;
pub mod embeddability;
pub mod error;
pub mod koopman;
pub mod linalg;
pub mod resources;
pub mod simulate;

pub use carleman::{
    carleman_construct, carleman_linearize, carleman_verify, carleman_verify_with_inverse,
    transfer_matrix, EmbeddingTransform, Flavor, PolynomialSystem,
};
pub use embeddability::{
    classify, positive_witness, witness_to_transform, Classification, PositiveWitness,
    WitnessFlavor,
};
pub use error::{Error, Result};
pub use koopman::{
    carleman_to_koopman, fock_block, fock_hamiltonian, koopman_construct, koopman_to_carleman,
    koopman_verify, sparsity, sparsity_bound_check, FockHamiltonian, SparsityReport,
};
pub use linalg::{
    eig, expm, polar_decompose, pseudo_left_inverse, sqrt_spd, structure_check, Complex,
    EigenDecomposition, Matrix, StructureKind, StructureVerdict, ToleranceConfig,
};
pub use dynamics::{
    canonical_matrix, oscillator_carleman, oscillator_koopman, oscillator_system, quad_embed,
    quad_embed_with_root, OscillatorKoopman, OscillatorNetwork, QuadraticHamiltonian, Spring,
};
pub use simulate::{
    embedding_roundtrip, observable_expectation, propagate_ode, propagate_state, RoundTripReport,
    Trajectory,
};
pub use resources::{query_estimate, BlockEncodingParams, QueryEstimate};
