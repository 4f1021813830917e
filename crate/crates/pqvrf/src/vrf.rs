//! Verifiable random function built from hash circuits and shared-witness
//! proofs.
//!
//! A secret key is a pair `(k, s)` of 32-byte strings. The public key
//! publishes `k` together with the key commitment `α = F(k, s)`, where `F`
//! is a domain-separated compression function. Evaluating the VRF on a
//! message `m`:
//!
//! 1. `h = H1(m)` — hash the message to a 32-byte point.
//! 2. `σ = H2(s, h)` — the unique intermediate output.
//! 3. `β = H3(σ)` — the pseudorandom output everyone consumes.
//! 4. `π` — a joint proof that one witness `s` satisfies both `F(k, s) = α`
//!    and `H2(s, h) = σ`, over circuits the verifier rebuilds from `k` and
//!    `h` alone.
//!
//! Verification recomputes `h`, rebuilds both circuits, checks the proof
//! against the published `α` and the claimed `σ`, and finally checks
//! `β = H3(σ)`. Uniqueness holds because `σ` is a function of `(s, m)` and
//! the proof pins `s` through `α`: a second accepting `σ'` for the same
//! public key and message would require a second preimage under `H2` or a
//! break of the proof's binding. Pseudorandomness comes from `H3` applied to
//! an unpredictable `σ`.
//!
//! Key material and evaluations are serializable: keys as JSON, evaluations
//! in the binary `PQVR` format.

use crate::codec::{bytes_to_bits_msb, ByteReader, ByteWriter};
use crate::eq_proof::{eq_prove, eq_verify, EqProof, EqProveError};
use crate::hashing::{h1, h3};
use crate::sha256::{f_circuit, f_direct, h2_circuit, h2_direct};
use crate::zkboo::{DecodeError, Mode, VerifyError};
use crate::hashing;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const MAGIC: &[u8; 4] = b"PQVR";
const VERSION: u16 = 1;
const KEY_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VrfPublicKey {
    pub k: [u8; 32],
    pub alpha: [u8; 32],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VrfSecretKey {
    pub k: [u8; 32],
    pub s: [u8; 32],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VrfKeypair {
    pub public: VrfPublicKey,
    pub secret: VrfSecretKey,
}

/// A full VRF evaluation: the output, the intermediate hash point, and the
/// proof tying both to the public key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VrfEvaluation {
    pub beta: [u8; 32],
    pub sigma: [u8; 32],
    pub proof: EqProof,
}

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum VrfError {
    #[error("secret key is inconsistent with the public key commitment")]
    KeyMismatch,
    #[error(transparent)]
    Prove(#[from] EqProveError),
}

/// Why a verification rejected, first failed check wins.
#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum VrfRejectReason {
    #[error("beta is not the hash of sigma")]
    BetaMismatch,
    #[error(transparent)]
    Proof(#[from] VerifyError),
}

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum KeyFileError {
    #[error("unsupported key file version {0}")]
    Version(u32),
    #[error("field {0} is not valid 32-byte hex")]
    BadHex(&'static str),
    #[error("stored circuit id does not match the key material")]
    CircuitIdMismatch,
    #[error("malformed JSON: {0}")]
    Json(String),
}

/// Derives a keypair from a seed. The commitment is computed by the direct
/// compression function; the circuit form is definitionally equal and tested
/// as such.
pub fn vrf_gen(seed: u64) -> VrfKeypair {
    vrf_gen_from_rng(&mut ChaCha20Rng::seed_from_u64(seed))
}

pub fn vrf_gen_from_rng(rng: &mut impl RngCore) -> VrfKeypair {
    let mut k = [0u8; 32];
    let mut s = [0u8; 32];
    rng.fill_bytes(&mut k);
    rng.fill_bytes(&mut s);
    let alpha = f_direct(&k, &s);
    VrfKeypair {
        public: VrfPublicKey { k, alpha },
        secret: VrfSecretKey { k, s },
    }
}

/// The public key a secret key commits to.
pub fn public_from_secret(secret: &VrfSecretKey) -> VrfPublicKey {
    VrfPublicKey {
        k: secret.k,
        alpha: f_direct(&secret.k, &secret.s),
    }
}

/// Full evaluation with proof. `rounds` controls soundness: error `(2/3)^rounds`.
pub fn vrf_eval(
    secret: &VrfSecretKey,
    message: &[u8],
    rounds: u32,
    mode: Mode,
    rng_seed: u64,
) -> Result<VrfEvaluation, VrfError> {
    let h = h1(message);
    let alpha = f_direct(&secret.k, &secret.s);
    let sigma = h2_direct(&secret.s, &h);
    let beta = h3(&sigma);

    let circ_f = f_circuit(&secret.k);
    let circ_h2 = h2_circuit(&h);
    let s_bits = bytes_to_bits_msb(&secret.s);
    let alpha_bits = bytes_to_bits_msb(&alpha);
    let sigma_bits = bytes_to_bits_msb(&sigma);
    let proof = eq_prove(
        &circ_f,
        &alpha_bits,
        &circ_h2,
        &sigma_bits,
        &s_bits,
        rounds,
        mode,
        rng_seed,
    )?;
    Ok(VrfEvaluation { beta, sigma, proof })
}

/// Straight-line `β` computation without a proof, for simulations that only
/// need outputs. Definitionally equal to [`vrf_eval`]'s `beta`.
pub fn eval_beta_fast(secret: &VrfSecretKey, message: &[u8]) -> [u8; 32] {
    h3(&h2_direct(&secret.s, &h1(message)))
}

/// Checks an evaluation against a public key and message.
pub fn vrf_verify(
    public: &VrfPublicKey,
    message: &[u8],
    eval: &VrfEvaluation,
) -> Result<(), VrfRejectReason> {
    if h3(&eval.sigma) != eval.beta {
        return Err(VrfRejectReason::BetaMismatch);
    }
    let h = h1(message);
    let circ_f = f_circuit(&public.k);
    let circ_h2 = h2_circuit(&h);
    let alpha_bits = bytes_to_bits_msb(&public.alpha);
    let sigma_bits = bytes_to_bits_msb(&eval.sigma);
    eq_verify(&circ_f, &alpha_bits, &circ_h2, &sigma_bits, &eval.proof)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct PublicKeyFile {
    version: u32,
    k: String,
    alpha: String,
    /// Hash id of the key-commitment circuit; redundant with `k` but lets a
    /// reader detect stale or mixed-up files early.
    circuit_f: String,
}

#[derive(Serialize, Deserialize)]
struct SecretKeyFile {
    version: u32,
    k: String,
    s: String,
}

fn hex32(field: &'static str, s: &str) -> Result<[u8; 32], KeyFileError> {
    let v = hex::decode(s).map_err(|_| KeyFileError::BadHex(field))?;
    v.try_into().map_err(|_| KeyFileError::BadHex(field))
}

impl VrfPublicKey {
    pub fn to_json(&self) -> String {
        let file = PublicKeyFile {
            version: KEY_FILE_VERSION,
            k: hex::encode(self.k),
            alpha: hex::encode(self.alpha),
            circuit_f: f_circuit(&self.k).id(),
        };
        serde_json::to_string_pretty(&file).expect("static struct serializes")
    }

    pub fn from_json(text: &str) -> Result<VrfPublicKey, KeyFileError> {
        let file: PublicKeyFile =
            serde_json::from_str(text).map_err(|e| KeyFileError::Json(e.to_string()))?;
        if file.version != KEY_FILE_VERSION {
            return Err(KeyFileError::Version(file.version));
        }
        let key = VrfPublicKey {
            k: hex32("k", &file.k)?,
            alpha: hex32("alpha", &file.alpha)?,
        };
        if file.circuit_f != f_circuit(&key.k).id() {
            return Err(KeyFileError::CircuitIdMismatch);
        }
        Ok(key)
    }
}

impl VrfSecretKey {
    pub fn to_json(&self) -> String {
        let file = SecretKeyFile {
            version: KEY_FILE_VERSION,
            k: hex::encode(self.k),
            s: hex::encode(self.s),
        };
        serde_json::to_string_pretty(&file).expect("static struct serializes")
    }

    pub fn from_json(text: &str) -> Result<VrfSecretKey, KeyFileError> {
        let file: SecretKeyFile =
            serde_json::from_str(text).map_err(|e| KeyFileError::Json(e.to_string()))?;
        if file.version != KEY_FILE_VERSION {
            return Err(KeyFileError::Version(file.version));
        }
        Ok(VrfSecretKey {
            k: hex32("k", &file.k)?,
            s: hex32("s", &file.s)?,
        })
    }
}

impl VrfEvaluation {
    /// Serializes to the `PQVR` format: header, β, σ, embedded proof, and a
    /// trailing SHA-256 over everything before it.
    pub fn serialize(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.bytes(MAGIC);
        w.u16(VERSION);
        w.bytes(&self.beta);
        w.bytes(&self.sigma);
        w.bytes_u32(&self.proof.serialize());
        let trailer = hashing::sha256(w.as_slice());
        w.bytes(&trailer);
        w.into_vec()
    }

    pub fn deserialize(bytes: &[u8]) -> Result<VrfEvaluation, DecodeError> {
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(DecodeError::MagicMismatch);
        }
        let mut r = ByteReader::new(&bytes[4..]);
        let version = r.u16()?;
        if version != VERSION {
            return Err(DecodeError::VersionMismatch(version));
        }
        let beta: [u8; 32] = r.array()?;
        let sigma: [u8; 32] = r.array()?;
        let proof_bytes = r.bytes_u32()?;
        let proof = EqProof::deserialize(proof_bytes)?;
        let trailer: [u8; 32] = r.array()?;
        if !r.is_empty() {
            return Err(DecodeError::Structure(format!("{} trailing bytes", r.remaining())));
        }
        let body_len = bytes.len() - 32;
        if hashing::sha256(&bytes[..body_len]) != trailer {
            return Err(DecodeError::TrailingHashMismatch);
        }
        Ok(VrfEvaluation { beta, sigma, proof })
    }
}
