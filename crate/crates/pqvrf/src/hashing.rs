//! SHA-256 wrappers with one-byte domain tags.
//!
//! Every hash invocation in the system goes through a tagged helper so that
//! streams produced for different purposes can never collide byte-for-byte.

use sha2::{Digest, Sha256};

/// Message hash H1: maps an arbitrary message to the 256-bit circuit input.
pub const TAG_H1: u8 = 0x01;
/// Output hash H3: maps the circuit output sigma to the VRF value beta.
pub const TAG_H3: u8 = 0x03;
/// Tape expansion stream.
pub const TAG_TAPE: u8 = 0x54; // 'T'
/// View commitments.
pub const TAG_COMMIT: u8 = 0x43; // 'C'
/// Fiat-Shamir challenge stream.
pub const TAG_CHALLENGE: u8 = 0x46; // 'F'
/// Circuit structure digests.
pub const TAG_CIRCUIT: u8 = 0x49; // 'I'
/// Hash-to-field for the prime-field threshold scheme.
pub const TAG_ZQ: u8 = 0x51; // 'Q'
/// Beacon round messages.
pub const TAG_ROUND: u8 = 0x52; // 'R'
/// Sigma-protocol challenges in the threshold scheme.
pub const TAG_SIGMA: u8 = 0x53; // 'S'
/// Block headers in the proof-of-stake simulator.
pub const TAG_BLOCK: u8 = 0x42; // 'B'
/// Generic seed derivation (splitting one seed into many).
pub const TAG_DERIVE: u8 = 0x44; // 'D'

/// SHA-256 of `tag || data`.
pub fn tagged(tag: u8, data: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update([tag]);
    h.update(data);
    h.finalize().into()
}

/// SHA-256 of `tag || part1 || part2` without intermediate allocation.
pub fn tagged2(tag: u8, part1: &[u8], part2: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update([tag]);
    h.update(part1);
    h.update(part2);
    h.finalize().into()
}

/// Plain SHA-256, used for whole-artifact integrity trailers.
pub fn sha256(data: &[u8]) -> [u8; 32] {
    Sha256::digest(data).into()
}

/// H1: message to 32-byte circuit input block half.
pub fn h1(message: &[u8]) -> [u8; 32] {
    tagged(TAG_H1, message)
}

/// H3: 32-byte sigma to 32-byte beta.
pub fn h3(sigma: &[u8; 32]) -> [u8; 32] {
    tagged(TAG_H3, sigma)
}

/// Derives a 32-byte subseed from a parent seed and an index. Used to fan one
/// caller-provided seed out into independent per-iteration seeds.
pub fn derive_seed(parent: &[u8], index: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update([TAG_DERIVE]);
    h.update(parent);
    h.update(index.to_le_bytes());
    h.finalize().into()
}
