//! Threshold (distributed) VRF over the scalar field Z_q.
//!
//! A committee of `n` nodes shares one evaluation key with threshold `t`:
//! any `t` honest nodes produce the group output, while `t - 1` shares carry
//! no information about the key (Shamir privacy). The scheme is deliberately
//! linear-algebraic — the "commitment" to a scalar `x` is `x·R mod q` for a
//! fixed public base `R` — which keeps every step exactly verifiable in the
//! simulations this crate runs, while preserving the protocol shape of a
//! group-based distributed VRF (dealings, share checks, partials, sigma
//! proofs, Lagrange combination).
//!
//! Protocol outline:
//!
//! * **Dealing** — each dealer draws a random degree-`t-1` polynomial `f_i`,
//!   sends node `j` the share `f_i(j)` and publishes commitments to the
//!   coefficients. Anyone checks a share against the commitments.
//! * **Aggregation** — node `j`'s key share is `x_j = Σ_i f_i(j)`, a point
//!   on the summed polynomial whose constant term is the group key `x`.
//!   Per-node verification keys `vvk_j = x_j·R` are computable from the
//!   public commitments alone.
//! * **Evaluation** — for message `m`, let `u = H2q(m)`. Node `j` emits the
//!   partial `u_j = x_j·u` plus a sigma proof that the same `x_j` underlies
//!   `vvk_j` and `u_j`. Any `t` verified partials combine via Lagrange
//!   interpolation at zero to `y = x·u`, and the beacon output is `H3(y)`.

use crate::hashing::{TAG_H3, TAG_SIGMA, TAG_ZQ};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::RngCore;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum DvrfError {
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("node index {0} out of range")]
    BadNode(u32),
    #[error("dealing from dealer {0} has the wrong shape")]
    BadDealing(u32),
    #[error("share from dealer {dealer} to node {node} fails the commitment check")]
    BadShare { dealer: u32, node: u32 },
    #[error("partial evaluation from node {0} has an invalid proof")]
    BadPartialProof(u32),
    #[error("duplicate partial from node {0}")]
    DuplicateNode(u32),
    #[error("need {need} distinct partials, got {got}")]
    NotEnoughPartials { need: u32, got: u32 },
    #[error("combined output does not match the claimed value")]
    OutputMismatch,
}

/// Committee parameters: scalar modulus (prime), committee size, threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DvrfParams {
    pub q: BigUint,
    pub n: u32,
    pub threshold: u32,
}

impl DvrfParams {
    pub fn new(q: BigUint, n: u32, threshold: u32) -> Result<DvrfParams, DvrfError> {
        if q < BigUint::from(3u32) {
            return Err(DvrfError::BadParams("modulus must be at least 3".into()));
        }
        if threshold == 0 || threshold > n {
            return Err(DvrfError::BadParams(format!(
                "threshold {threshold} must be in 1..={n}"
            )));
        }
        // Node indices 1..=n must be nonzero and distinct mod q.
        if BigUint::from(n) >= q {
            return Err(DvrfError::BadParams(
                "committee size must be smaller than the modulus".into(),
            ));
        }
        Ok(DvrfParams { q, n, threshold })
    }

    /// Standard full-size scalar field: the 256-bit prime `2^256 - 2^32 - 977`.
    pub fn standard(n: u32, threshold: u32) -> Result<DvrfParams, DvrfError> {
        DvrfParams::new(standard_modulus(), n, threshold)
    }
}

pub fn standard_modulus() -> BigUint {
    (BigUint::one() << 256u32) - (BigUint::one() << 32u32) - BigUint::from(977u32)
}

/// Fixed public base for the linear commitment, derived from a tag string and
/// guaranteed nonzero mod q.
pub fn base_r(q: &BigUint) -> BigUint {
    let mut counter = 0u64;
    loop {
        let mut h = Sha256::new();
        h.update([TAG_ZQ]);
        h.update(b"pqvrf/dvrf/base/v1");
        h.update(counter.to_le_bytes());
        let r = BigUint::from_bytes_be(&h.finalize()) % q;
        if !r.is_zero() {
            return r;
        }
        counter += 1;
    }
}

/// Hashes arbitrary bytes into Z_q with negligible bias (512 bits reduced).
pub fn hash_to_zq(q: &BigUint, data: &[u8]) -> BigUint {
    let mut wide = Vec::with_capacity(64);
    for counter in 0u64..2 {
        let mut h = Sha256::new();
        h.update([TAG_ZQ]);
        h.update(data);
        h.update(counter.to_le_bytes());
        wide.extend_from_slice(&h.finalize());
    }
    BigUint::from_bytes_be(&wide) % q
}

fn uniform_zq(q: &BigUint, rng: &mut impl RngCore) -> BigUint {
    let mut bytes = [0u8; 64];
    rng.fill_bytes(&mut bytes);
    BigUint::from_bytes_be(&bytes) % q
}

fn sub_mod(q: &BigUint, a: &BigUint, b: &BigUint) -> BigUint {
    ((a + q) - b) % q
}

fn inv_mod(q: &BigUint, a: &BigUint) -> BigUint {
    // q is prime, so Fermat's little theorem applies.
    a.modpow(&(q - 2u32), q)
}

/// One dealer's contribution: public coefficient commitments and the private
/// shares destined for nodes `1..=n` (`shares[j-1]` goes to node `j`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dealing {
    pub dealer: u32,
    pub commitments: Vec<BigUint>,
    pub shares: Vec<BigUint>,
}

fn poly_eval(q: &BigUint, coeffs: &[BigUint], at: &BigUint) -> BigUint {
    // Horner, highest coefficient first.
    let mut acc = BigUint::zero();
    for c in coeffs.iter().rev() {
        acc = (acc * at + c) % q;
    }
    acc
}

/// Draws a random polynomial and produces shares plus commitments.
pub fn deal(params: &DvrfParams, dealer: u32, rng: &mut impl RngCore) -> Result<Dealing, DvrfError> {
    if dealer == 0 || dealer > params.n {
        return Err(DvrfError::BadNode(dealer));
    }
    let q = &params.q;
    let r = base_r(q);
    let coeffs: Vec<BigUint> = (0..params.threshold).map(|_| uniform_zq(q, rng)).collect();
    let commitments: Vec<BigUint> = coeffs.iter().map(|a| (a * &r) % q).collect();
    let shares: Vec<BigUint> = (1..=params.n)
        .map(|j| poly_eval(q, &coeffs, &BigUint::from(j)))
        .collect();
    Ok(Dealing {
        dealer,
        commitments,
        shares,
    })
}

/// Expected commitment of node `j`'s share under a coefficient commitment
/// vector: `Σ_ℓ j^ℓ · C_ℓ`.
fn share_commitment(q: &BigUint, commitments: &[BigUint], node: u32) -> BigUint {
    let j = BigUint::from(node);
    let mut power = BigUint::one();
    let mut acc = BigUint::zero();
    for c in commitments {
        acc = (acc + c * &power) % q;
        power = (power * &j) % q;
    }
    acc
}

/// Checks one share against a dealer's public commitments.
pub fn verify_share(
    params: &DvrfParams,
    dealing: &Dealing,
    node: u32,
) -> Result<(), DvrfError> {
    if node == 0 || node > params.n {
        return Err(DvrfError::BadNode(node));
    }
    if dealing.commitments.len() != params.threshold as usize
        || dealing.shares.len() != params.n as usize
    {
        return Err(DvrfError::BadDealing(dealing.dealer));
    }
    let q = &params.q;
    let r = base_r(q);
    let share = &dealing.shares[(node - 1) as usize];
    if (share * &r) % q != share_commitment(q, &dealing.commitments, node) {
        return Err(DvrfError::BadShare {
            dealer: dealing.dealer,
            node,
        });
    }
    Ok(())
}

/// Aggregates a node's key share across all dealings, verifying each share.
pub fn aggregate_share(
    params: &DvrfParams,
    dealings: &[Dealing],
    node: u32,
) -> Result<BigUint, DvrfError> {
    let mut x = BigUint::zero();
    for d in dealings {
        verify_share(params, d, node)?;
        x = (x + &d.shares[(node - 1) as usize]) % &params.q;
    }
    Ok(x)
}

/// Per-node verification keys `vvk_j = x_j·R`, computed from the public
/// transcript (commitments only — no shares needed).
pub fn verification_keys(params: &DvrfParams, dealings: &[Dealing]) -> Result<Vec<BigUint>, DvrfError> {
    for d in dealings {
        if d.commitments.len() != params.threshold as usize {
            return Err(DvrfError::BadDealing(d.dealer));
        }
    }
    let q = &params.q;
    Ok((1..=params.n)
        .map(|j| {
            let mut acc = BigUint::zero();
            for d in dealings {
                acc = (acc + share_commitment(q, &d.commitments, j)) % q;
            }
            acc
        })
        .collect())
}

/// The group key commitment `x·R`: the sum of all constant-term commitments.
pub fn group_commitment(params: &DvrfParams, dealings: &[Dealing]) -> Result<BigUint, DvrfError> {
    let mut acc = BigUint::zero();
    for d in dealings {
        let c0 = d.commitments.first().ok_or(DvrfError::BadDealing(d.dealer))?;
        acc = (acc + c0) % &params.q;
    }
    Ok(acc)
}

/// Sigma proof that one scalar underlies both `vvk = x·R` and the partial
/// `u_part = x·u` (an equal-discrete-log statement in the linear setting).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaProof {
    pub c1: BigUint,
    pub c2: BigUint,
    pub z: BigUint,
}

fn sigma_challenge(
    q: &BigUint,
    u: &BigUint,
    vvk: &BigUint,
    partial: &BigUint,
    c1: &BigUint,
    c2: &BigUint,
    node: u32,
) -> BigUint {
    let mut data = vec![TAG_SIGMA];
    for v in [u, vvk, partial, c1, c2] {
        let b = v.to_bytes_be();
        data.extend_from_slice(&(b.len() as u32).to_le_bytes());
        data.extend_from_slice(&b);
    }
    data.extend_from_slice(&node.to_le_bytes());
    hash_to_zq(q, &data)
}

/// A node's partial evaluation with its proof of correctness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialEval {
    pub node: u32,
    pub value: BigUint,
    pub proof: SigmaProof,
}

/// Message hash point `u = H2q(m)` all partials are computed against.
pub fn message_point(params: &DvrfParams, message: &[u8]) -> BigUint {
    let mut data = b"pqvrf/dvrf/msg/v1".to_vec();
    data.extend_from_slice(message);
    hash_to_zq(&params.q, &data)
}

/// Produces node `j`'s partial `x_j·u` and a sigma proof. The proof nonce is
/// derived deterministically from the share and message, so identical calls
/// are reproducible and never reuse a nonce across distinct messages.
pub fn partial_eval(
    params: &DvrfParams,
    node: u32,
    key_share: &BigUint,
    message: &[u8],
) -> Result<PartialEval, DvrfError> {
    if node == 0 || node > params.n {
        return Err(DvrfError::BadNode(node));
    }
    let q = &params.q;
    let r = base_r(q);
    let u = message_point(params, message);
    let value = (key_share * &u) % q;
    let vvk = (key_share * &r) % q;

    let mut nonce_data = b"pqvrf/dvrf/nonce/v1".to_vec();
    nonce_data.extend_from_slice(&key_share.to_bytes_be());
    nonce_data.extend_from_slice(&u.to_bytes_be());
    nonce_data.extend_from_slice(&node.to_le_bytes());
    let nonce = hash_to_zq(q, &nonce_data);

    let c1 = (&nonce * &r) % q;
    let c2 = (&nonce * &u) % q;
    let c = sigma_challenge(q, &u, &vvk, &value, &c1, &c2, node);
    let z = (&nonce + c * key_share) % q;
    Ok(PartialEval {
        node,
        value,
        proof: SigmaProof { c1, c2, z },
    })
}

/// Checks a partial against the node's public verification key.
pub fn verify_partial(
    params: &DvrfParams,
    vvk: &BigUint,
    message: &[u8],
    partial: &PartialEval,
) -> Result<(), DvrfError> {
    if partial.node == 0 || partial.node > params.n {
        return Err(DvrfError::BadNode(partial.node));
    }
    let q = &params.q;
    let r = base_r(q);
    let u = message_point(params, message);
    let SigmaProof { c1, c2, z } = &partial.proof;
    let c = sigma_challenge(q, &u, vvk, &partial.value, c1, c2, partial.node);
    let ok_r = (z * &r) % q == (c1 + &c * vvk) % q;
    let ok_u = (z * &u) % q == (c2 + &c * &partial.value) % q;
    if ok_r && ok_u {
        Ok(())
    } else {
        Err(DvrfError::BadPartialProof(partial.node))
    }
}

/// Lagrange coefficient `λ_j` for interpolating at zero over `subset`.
pub fn lagrange_at_zero(q: &BigUint, subset: &[u32], j: u32) -> BigUint {
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    let bj = BigUint::from(j);
    for &k in subset {
        if k == j {
            continue;
        }
        let bk = BigUint::from(k);
        num = (num * &bk) % q;
        den = (den * sub_mod(q, &bk, &bj)) % q;
    }
    (num * inv_mod(q, &den)) % q
}

/// Combines verified partials into the group value `y = x·u`. Requires at
/// least `threshold` distinct nodes; extras beyond the first `threshold`
/// (in input order) are ignored.
pub fn combine(params: &DvrfParams, partials: &[PartialEval]) -> Result<BigUint, DvrfError> {
    let mut seen = std::collections::BTreeSet::new();
    let mut chosen: Vec<&PartialEval> = Vec::new();
    for p in partials {
        if p.node == 0 || p.node > params.n {
            return Err(DvrfError::BadNode(p.node));
        }
        if !seen.insert(p.node) {
            return Err(DvrfError::DuplicateNode(p.node));
        }
        if chosen.len() < params.threshold as usize {
            chosen.push(p);
        }
    }
    if chosen.len() < params.threshold as usize {
        return Err(DvrfError::NotEnoughPartials {
            need: params.threshold,
            got: chosen.len() as u32,
        });
    }
    let q = &params.q;
    let subset: Vec<u32> = chosen.iter().map(|p| p.node).collect();
    let mut y = BigUint::zero();
    for p in &chosen {
        let lambda = lagrange_at_zero(q, &subset, p.node);
        y = (y + lambda * &p.value) % q;
    }
    Ok(y)
}

/// Final beacon output: a 32-byte hash of the group value.
pub fn output_hash(y: &BigUint) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update([TAG_H3]);
    h.update(b"pqvrf/dvrf/out/v1");
    let bytes = y.to_bytes_be();
    h.update((bytes.len() as u32).to_le_bytes());
    h.update(&bytes);
    h.finalize().into()
}

/// Full verification: every partial's proof checks against the
/// transcript-derived keys, the combination matches `claimed_y`, and the
/// output hash matches.
pub fn dvrf_verify(
    params: &DvrfParams,
    vvks: &[BigUint],
    message: &[u8],
    partials: &[PartialEval],
    claimed_y: &BigUint,
    claimed_output: &[u8; 32],
) -> Result<(), DvrfError> {
    for p in partials {
        if p.node == 0 || p.node > params.n {
            return Err(DvrfError::BadNode(p.node));
        }
        verify_partial(params, &vvks[(p.node - 1) as usize], message, p)?;
    }
    let y = combine(params, partials)?;
    if &y != claimed_y || &output_hash(&y) != claimed_output {
        return Err(DvrfError::OutputMismatch);
    }
    Ok(())
}
