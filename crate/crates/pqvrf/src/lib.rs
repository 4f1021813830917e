//! Post-quantum verifiable random function built from symmetric primitives.
//!
//! The proof system is an MPC-in-the-head zero-knowledge argument: the prover
//! simulates a three-player evaluation of an arithmetic circuit under a linear
//! (2,3)-decomposition, commits to each simulated player's view, and opens two
//! of the three views per Fiat-Shamir challenge. Repetition drives the
//! soundness error of 2/3 per iteration down geometrically. Two serialization
//! modes are supported: a baseline that ships expanded tapes and input shares
//! (`Mode::ZkBoo`) and a compressed mode that ships seeds and elides
//! recomputable data (`Mode::ZkBpp`).
//!
//! On top of the proof engine:
//!
//! * [`eq_proof`] proves that one witness satisfies two circuit relations
//!   under a joint challenge, which is exactly the shape a VRF needs
//!   (key commitment and output commitment computed from the same secret).
//! * [`vrf`] is the VRF itself: keys, evaluation, verification, and the
//!   on-disk formats for keys and evaluations.
//! * [`dvrf`] is a threshold variant over a prime field with Feldman-style
//!   verifiable secret sharing and Lagrange combination of partial outputs.
//! * [`beacon`] drives the threshold VRF round-by-round to produce a
//!   distributed randomness beacon with byzantine fault injection.
//! * [`pos`] is a discrete-event proof-of-stake lottery simulator whose
//!   leader election is the VRF.
//!
//! Circuits are gate lists over GF(2) or a small prime field; the bundled
//! SHA-256 compression-function circuit ([`sha256`]) is the workhorse relation
//! for the VRF.

pub mod beacon;
pub mod circuit;
pub mod codec;
pub mod decomposition;
pub mod dvrf;
pub mod eq_proof;
pub mod field;
pub mod hashing;
pub mod pos;
pub mod sha256;
pub mod stats;
pub mod testkit;
pub mod vrf;
pub mod zkboo;

/// Iteration count giving better than 80-bit soundness, (2/3)^137 < 2^-80.
/// This is the default when a caller asks for "full strength" proofs.
pub const RECOMMENDED_ROUNDS: u32 = 137;
