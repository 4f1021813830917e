//! Non-interactive zero-knowledge proofs of circuit satisfiability from the
//! (2,3)-decomposition, in the MPC-in-the-head style.
//!
//! For a public circuit `φ` and statement `y`, the prover runs `t` independent
//! three-player simulations of `φ(w)`, commits to each player's (seed, view)
//! pair, and broadcasts the three output shares and three commitment digests
//! per iteration. A Fiat-Shamir challenge maps the broadcast transcript to one
//! trit per iteration, selecting which adjacent pair of players to open. A
//! cheating prover must corrupt at least one player per iteration and survives
//! a single iteration with probability at most 2/3, so soundness error decays
//! as `(2/3)^t`.
//!
//! Two serialization modes share identical commitments, challenges, and
//! accept/reject behaviour and differ only in what the openings carry:
//!
//! * [`Mode::ZkBoo`] — the baseline: expanded tapes, input shares for both
//!   opened players, and all three output shares travel in full.
//! * [`Mode::ZkBpp`] — the compressed form: tapes travel as 128-bit seeds,
//!   input shares are recomputed from the seed where the protocol defines
//!   them that way (players 1 and 2), the third output share is recomputed
//!   from the statement, and views carry only MUL-gate wires.
//!
//! The compressed openings still commit to exactly the same payload, so a
//! bundle produced in one mode attests to the same simulated runs as the
//! other; only the byte encoding changes.

use crate::circuit::{Circuit, CircuitError};
use crate::codec::{
    pack_elements, packed_len, unpack_elements, ByteReader, ByteWriter, CodecError,
};
use crate::decomposition::{replay_pair, run_decomposition, Tape, TranscriptError};
use crate::field::Field;
use crate::hashing::{self, TAG_CHALLENGE, TAG_COMMIT};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Proofs refuse circuits above this gate count.
pub const MAX_PROOF_GATES: usize = 1 << 20;

const MAGIC: &[u8; 4] = b"PQZK";
const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    ZkBoo = 0,
    ZkBpp = 1,
}

impl Mode {
    pub fn from_byte(b: u8) -> Option<Mode> {
        match b {
            0 => Some(Mode::ZkBoo),
            1 => Some(Mode::ZkBpp),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::ZkBoo => "zkboo",
            Mode::ZkBpp => "zkbpp",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Mode, String> {
        match s {
            "zkboo" => Ok(Mode::ZkBoo),
            "zkbpp" | "zkb++" => Ok(Mode::ZkBpp),
            other => Err(format!("unknown mode {other:?} (expected zkboo or zkbpp)")),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum ProveError {
    #[error("witness does not satisfy the statement")]
    StatementMismatch,
    #[error("round count must be at least 1")]
    ZeroRounds,
    #[error("statement element {0} is not canonical for the circuit field")]
    BadStatement(usize),
    #[error("statement length {got} does not match circuit output count {expected}")]
    StatementLength { expected: usize, got: usize },
    #[error("circuit has {0} gates, above the proof limit of {MAX_PROOF_GATES}")]
    CircuitTooLarge(usize),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Decomposition(#[from] crate::decomposition::DecompositionError),
}

/// Verification failure, naming the first check that failed.
#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum VerifyError {
    #[error("recomputed challenge does not match the opened players")]
    ChallengeMismatch,
    #[error("iteration {iteration}: commitment does not open to the transmitted view")]
    CommitmentOpenFail { iteration: usize },
    #[error("iteration {iteration}: output shares do not recombine to the statement")]
    RecMismatch { iteration: usize },
    #[error("iteration {iteration}: opened view does not produce its broadcast output share")]
    OutputMismatch { iteration: usize },
    #[error("iteration {iteration}: recorded wire {wire} violates the update rule")]
    WireMismatch { iteration: usize, wire: u32 },
    #[error("malformed proof: {0}")]
    Structure(String),
}

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum DecodeError {
    #[error("magic bytes are not PQZK")]
    MagicMismatch,
    #[error("unsupported proof version {0}")]
    VersionMismatch(u16),
    #[error("unknown mode byte {0}")]
    BadMode(u8),
    #[error("round count must be at least 1")]
    ZeroRounds,
    #[error("trailing integrity hash does not match")]
    TrailingHashMismatch,
    #[error("structural problem: {0}")]
    Structure(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
}

/// Per-iteration public transcript: three output shares and three commitment
/// digests. This is the `a^(i)` message the challenge is derived from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationBroadcast {
    pub output_shares: [Vec<u64>; 3],
    pub commitments: [[u8; 32]; 3],
}

/// Opening of one player's committed view. Packed byte fields use the same
/// encoding the commitment digests are computed over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Opening {
    /// 1-based player index.
    pub player: u8,
    pub randomizer: [u8; 32],
    pub seed: [u8; 16],
    /// Full expanded tape (packed, `m + mul_count` elements); baseline mode only.
    pub expanded_tape: Option<Vec<u8>>,
    /// Packed input share. Always present in baseline mode; in compressed mode
    /// only player 3 carries it (players 1 and 2 derive theirs from the seed).
    pub input_share: Option<Vec<u8>>,
    /// Packed MUL-gate output wires of this view.
    pub mul_wires: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationRecord {
    pub broadcast: IterationBroadcast,
    /// Openings for players `e` and `e+1` where `e` is the iteration's trit.
    pub openings: [Opening; 2],
}

/// A complete non-interactive proof.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofBundle {
    pub mode: Mode,
    pub rounds: u32,
    pub circuit_hash: [u8; 32],
    pub field_modulus: u64,
    pub input_count: u32,
    pub mul_count: u32,
    pub statement: Vec<u64>,
    /// One trit (1..=3) per iteration; recomputable from the transcript and
    /// stored for convenience.
    pub challenge: Vec<u8>,
    pub iterations: Vec<IterationRecord>,
}

/// Commitment digest over a player's committed payload. The payload is the
/// seed plus the packed input share and MUL wires — identical in both modes.
pub fn commit_view(
    randomizer: &[u8; 32],
    seed: &[u8; 16],
    input_share_packed: &[u8],
    mul_wires_packed: &[u8],
) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update([TAG_COMMIT]);
    h.update(randomizer);
    h.update(seed);
    h.update(input_share_packed);
    h.update(mul_wires_packed);
    h.finalize().into()
}

/// Canonical byte form of the broadcast transcript used for challenge
/// derivation; always includes all three output shares regardless of mode.
pub fn broadcast_transcript_bytes(binary: bool, broadcasts: &[IterationBroadcast]) -> Vec<u8> {
    let mut out = Vec::new();
    for b in broadcasts {
        for y in &b.output_shares {
            out.extend_from_slice(&pack_elements(binary, y));
        }
        for ct in &b.commitments {
            out.extend_from_slice(ct);
        }
    }
    out
}

/// Maps a byte stream to challenge trits by consuming two-bit chunks, most
/// significant bits of each byte first: `00 → 1`, `01 → 2`, `10 → 3`, `11`
/// is skipped (rejection sampling keeps the trits uniform).
pub(crate) fn trits_from_bytes(bytes: &[u8], out: &mut Vec<u8>, want: usize) {
    for &byte in bytes {
        for shift in [6u8, 4, 2, 0] {
            if out.len() == want {
                return;
            }
            let chunk = (byte >> shift) & 0b11;
            if chunk != 0b11 {
                out.push(chunk + 1);
            }
        }
    }
}

/// Fiat-Shamir trit stream over an arbitrary transcript byte string. The
/// digest of `context || transcript` seeds the stream; on exhaustion the
/// stream is extended counter-mode.
pub fn derive_challenge_from_transcript(context: &[u8], transcript: &[u8], count: usize) -> Vec<u8> {
    let mut h = Sha256::new();
    h.update([TAG_CHALLENGE]);
    h.update(context);
    h.update(transcript);
    let seed_digest: [u8; 32] = h.finalize().into();

    let mut trits = Vec::with_capacity(count);
    trits_from_bytes(&seed_digest, &mut trits, count);
    let mut counter = 0u64;
    while trits.len() < count {
        let mut h = Sha256::new();
        h.update([TAG_CHALLENGE]);
        h.update(seed_digest);
        h.update(counter.to_le_bytes());
        let block: [u8; 32] = h.finalize().into();
        trits_from_bytes(&block, &mut trits, count);
        counter += 1;
    }
    trits
}

/// Fiat-Shamir challenge: one trit per iteration, derived from the context
/// string and the full broadcast transcript.
pub fn derive_challenge(
    context: &[u8],
    binary: bool,
    broadcasts: &[IterationBroadcast],
) -> Vec<u8> {
    derive_challenge_from_transcript(
        context,
        &broadcast_transcript_bytes(binary, broadcasts),
        broadcasts.len(),
    )
}

/// Context string binding a proof to its relation and parameters.
pub fn fs_context(circuit_hash: &[u8; 32], mode: Mode, rounds: u32, statement_packed: &[u8]) -> Vec<u8> {
    let mut w = ByteWriter::new();
    w.bytes(b"PQZKCTX1");
    w.bytes(circuit_hash);
    w.u8(mode as u8);
    w.u32(rounds);
    w.bytes_u32(statement_packed);
    w.into_vec()
}

/// Secret material for one iteration: three tape seeds and three commitment
/// randomizers, all derived deterministically from the proof seed.
#[derive(Clone)]
pub struct IterationSecrets {
    pub tapes: [Tape; 3],
    pub randomizers: [[u8; 32]; 3],
}

impl IterationSecrets {
    pub fn from_rng(rng: &mut impl RngCore) -> IterationSecrets {
        let tapes = std::array::from_fn(|_| {
            let mut seed = [0u8; 16];
            rng.fill_bytes(&mut seed);
            Tape::from_seed(seed)
        });
        let randomizers = std::array::from_fn(|_| {
            let mut r = [0u8; 32];
            rng.fill_bytes(&mut r);
            r
        });
        IterationSecrets { tapes, randomizers }
    }
}

/// One player's committed artifacts for one iteration, in packed form.
pub struct PlayerArtifact {
    pub seed: [u8; 16],
    pub randomizer: [u8; 32],
    pub input_share_packed: Vec<u8>,
    pub mul_wires_packed: Vec<u8>,
    pub commitment: [u8; 32],
}

/// Runs one simulated iteration and commits to all three views.
pub fn run_iteration(
    circuit: &Circuit,
    witness: &[u64],
    secrets: &IterationSecrets,
) -> Result<(IterationBroadcast, [PlayerArtifact; 3]), ProveError> {
    let binary = circuit.field().is_binary();
    let run = run_decomposition(circuit, witness, &secrets.tapes)?;
    let artifacts: [PlayerArtifact; 3] = std::array::from_fn(|j| {
        let share_packed = pack_elements(binary, &run.views[j].input_share);
        let mul_packed = pack_elements(binary, &run.views[j].mul_wires(circuit));
        let commitment = commit_view(
            &secrets.randomizers[j],
            secrets.tapes[j].seed(),
            &share_packed,
            &mul_packed,
        );
        PlayerArtifact {
            seed: *secrets.tapes[j].seed(),
            randomizer: secrets.randomizers[j],
            input_share_packed: share_packed,
            mul_wires_packed: mul_packed,
            commitment,
        }
    });
    let broadcast = IterationBroadcast {
        output_shares: run.output_shares,
        commitments: std::array::from_fn(|j| artifacts[j].commitment),
    };
    Ok((broadcast, artifacts))
}

/// Builds the iteration record for a given challenge trit from a full set of
/// player artifacts: opens players `trit` and `trit+1`.
pub fn assemble_record(
    circuit: &Circuit,
    mode: Mode,
    broadcast: IterationBroadcast,
    artifacts: &[PlayerArtifact; 3],
    trit: u8,
) -> IterationRecord {
    let first = trit;
    let second = trit % 3 + 1;
    let openings = [
        build_opening(circuit, mode, &artifacts[(first - 1) as usize], first),
        build_opening(circuit, mode, &artifacts[(second - 1) as usize], second),
    ];
    IterationRecord { broadcast, openings }
}

fn build_opening(
    circuit: &Circuit,
    mode: Mode,
    artifact: &PlayerArtifact,
    player: u8,
) -> Opening {
    let binary = circuit.field().is_binary();
    let (expanded_tape, input_share) = match mode {
        Mode::ZkBoo => {
            let stream = Tape::from_seed(artifact.seed)
                .elements(circuit.field(), circuit.input_count() + circuit.mul_count());
            (
                Some(pack_elements(binary, &stream)),
                Some(artifact.input_share_packed.clone()),
            )
        }
        Mode::ZkBpp => {
            let share = if player == 3 {
                Some(artifact.input_share_packed.clone())
            } else {
                None
            };
            (None, share)
        }
    };
    Opening {
        player,
        randomizer: artifact.randomizer,
        seed: artifact.seed,
        expanded_tape,
        input_share,
        mul_wires: artifact.mul_wires_packed.clone(),
    }
}

/// Produces a proof that `circuit(witness) = statement`.
///
/// All randomness (tape seeds, commitment randomizers) derives from
/// `rng_seed`, so proofs are reproducible; iterations are processed in
/// parallel but their secrets are derived sequentially first, which keeps the
/// output independent of thread scheduling.
pub fn prove(
    circuit: &Circuit,
    statement: &[u64],
    witness: &[u64],
    rounds: u32,
    mode: Mode,
    rng_seed: u64,
) -> Result<ProofBundle, ProveError> {
    if rounds == 0 {
        return Err(ProveError::ZeroRounds);
    }
    if circuit.gate_count() > MAX_PROOF_GATES {
        return Err(ProveError::CircuitTooLarge(circuit.gate_count()));
    }
    if statement.len() != circuit.output_count() {
        return Err(ProveError::StatementLength {
            expected: circuit.output_count(),
            got: statement.len(),
        });
    }
    if let Some(i) = statement.iter().position(|&v| v >= circuit.field().modulus()) {
        return Err(ProveError::BadStatement(i));
    }
    if circuit.evaluate(witness)? != statement {
        return Err(ProveError::StatementMismatch);
    }

    let mut master = ChaCha20Rng::seed_from_u64(rng_seed);
    let secrets: Vec<IterationSecrets> = (0..rounds)
        .map(|_| IterationSecrets::from_rng(&mut master))
        .collect();

    let iterations: Vec<(IterationBroadcast, [PlayerArtifact; 3])> = secrets
        .par_iter()
        .map(|s| run_iteration(circuit, witness, s))
        .collect::<Result<_, _>>()?;

    let binary = circuit.field().is_binary();
    let statement_packed = pack_elements(binary, statement);
    let circuit_hash = circuit.hash();
    let context = fs_context(&circuit_hash, mode, rounds, &statement_packed);
    let broadcasts: Vec<IterationBroadcast> =
        iterations.iter().map(|(b, _)| b.clone()).collect();
    let challenge = derive_challenge(&context, binary, &broadcasts);

    let records: Vec<IterationRecord> = iterations
        .into_iter()
        .zip(&challenge)
        .map(|((broadcast, artifacts), &trit)| {
            assemble_record(circuit, mode, broadcast, &artifacts, trit)
        })
        .collect();

    Ok(ProofBundle {
        mode,
        rounds,
        circuit_hash,
        field_modulus: circuit.field().modulus(),
        input_count: circuit.input_count() as u32,
        mul_count: circuit.mul_count() as u32,
        statement: statement.to_vec(),
        challenge,
        iterations: records,
    })
}

struct OpenedView {
    share: Vec<u64>,
    mul_wires: Vec<u64>,
    corrections: Vec<u64>,
}

/// Shape checks shared by direct and composed verification: canonical output
/// shares, per-mode opening layout, and opening positions against trits.
pub(crate) fn check_structure(
    circuit: &Circuit,
    mode: Mode,
    iterations: &[IterationRecord],
    challenge: &[u8],
) -> Result<(), VerifyError> {
    let field = circuit.field();
    let binary = field.is_binary();
    let m = circuit.input_count();
    let n_mul = circuit.mul_count();
    let l = circuit.output_count();

    if iterations.is_empty() {
        return Err(VerifyError::Structure("round count must be at least 1".into()));
    }
    if challenge.len() != iterations.len() {
        return Err(VerifyError::Structure(
            "challenge and iteration counts disagree".into(),
        ));
    }
    for (i, rec) in iterations.iter().enumerate() {
        for y in &rec.broadcast.output_shares {
            if y.len() != l || y.iter().any(|&v| v >= field.modulus()) {
                return Err(VerifyError::Structure(format!(
                    "iteration {i}: broadcast output share is not canonical"
                )));
            }
        }
        for op in &rec.openings {
            if !(1..=3).contains(&op.player) {
                return Err(VerifyError::Structure(format!(
                    "iteration {i}: opening names player {}",
                    op.player
                )));
            }
            if op.mul_wires.len() != packed_len(binary, n_mul) {
                return Err(VerifyError::Structure(format!(
                    "iteration {i}: mul wire bytes have the wrong length"
                )));
            }
            match mode {
                Mode::ZkBoo => {
                    match op.expanded_tape.as_ref() {
                        Some(t) if t.len() == packed_len(binary, m + n_mul) => {}
                        _ => {
                            return Err(VerifyError::Structure(format!(
                                "iteration {i}: expanded tape missing or mis-sized"
                            )))
                        }
                    }
                    match op.input_share.as_ref() {
                        Some(s) if s.len() == packed_len(binary, m) => {}
                        _ => {
                            return Err(VerifyError::Structure(format!(
                                "iteration {i}: input share missing or mis-sized"
                            )))
                        }
                    }
                }
                Mode::ZkBpp => {
                    if op.expanded_tape.is_some() {
                        return Err(VerifyError::Structure(format!(
                            "iteration {i}: compressed mode must not carry expanded tapes"
                        )));
                    }
                    match (op.player, op.input_share.as_ref()) {
                        (3, Some(s)) if s.len() == packed_len(binary, m) => {}
                        (3, _) => {
                            return Err(VerifyError::Structure(format!(
                                "iteration {i}: player 3 input share missing or mis-sized"
                            )))
                        }
                        (_, None) => {}
                        (_, Some(_)) => {
                            return Err(VerifyError::Structure(format!(
                                "iteration {i}: seed-derived player must not carry an input share"
                            )))
                        }
                    }
                }
            }
        }
    }
    // The openings must sit exactly where the challenge says they must.
    for (rec, &trit) in iterations.iter().zip(challenge) {
        if rec.openings[0].player != trit || rec.openings[1].player != trit % 3 + 1 {
            return Err(VerifyError::ChallengeMismatch);
        }
    }
    Ok(())
}

/// Verifies all iterations in parallel, reporting the lowest-indexed failure.
pub(crate) fn verify_iterations(
    circuit: &Circuit,
    mode: Mode,
    statement: &[u64],
    iterations: &[IterationRecord],
) -> Result<(), VerifyError> {
    let results: Vec<Result<(), VerifyError>> = iterations
        .par_iter()
        .enumerate()
        .map(|(i, rec)| verify_iteration(circuit, mode, statement, i, rec))
        .collect();
    for r in results {
        r?;
    }
    Ok(())
}

/// Checks a proof bundle against a circuit and statement.
pub fn verify(circuit: &Circuit, statement: &[u64], bundle: &ProofBundle) -> Result<(), VerifyError> {
    let field = circuit.field();
    let binary = field.is_binary();

    if bundle.rounds == 0 {
        return Err(VerifyError::Structure("round count must be at least 1".into()));
    }
    if bundle.rounds as usize != bundle.iterations.len() {
        return Err(VerifyError::Structure(
            "iteration count disagrees with the round count".into(),
        ));
    }
    if bundle.circuit_hash != circuit.hash() {
        return Err(VerifyError::Structure("proof is bound to a different circuit".into()));
    }
    if bundle.field_modulus != field.modulus()
        || bundle.input_count as usize != circuit.input_count()
        || bundle.mul_count as usize != circuit.mul_count()
    {
        return Err(VerifyError::Structure("proof header disagrees with the circuit".into()));
    }
    if bundle.statement != statement {
        return Err(VerifyError::Structure(
            "proof statement differs from the given statement".into(),
        ));
    }
    if statement.len() != circuit.output_count()
        || statement.iter().any(|&v| v >= field.modulus())
    {
        return Err(VerifyError::Structure("statement is not canonical for the circuit".into()));
    }
    check_structure(circuit, bundle.mode, &bundle.iterations, &bundle.challenge)?;

    // Recompute the challenge from the context and broadcast transcript.
    let statement_packed = pack_elements(binary, statement);
    let context = fs_context(&bundle.circuit_hash, bundle.mode, bundle.rounds, &statement_packed);
    let broadcasts: Vec<IterationBroadcast> = bundle
        .iterations
        .iter()
        .map(|r| r.broadcast.clone())
        .collect();
    let challenge = derive_challenge(&context, binary, &broadcasts);
    if challenge != bundle.challenge {
        return Err(VerifyError::ChallengeMismatch);
    }

    verify_iterations(circuit, bundle.mode, statement, &bundle.iterations)
}

fn verify_iteration(
    circuit: &Circuit,
    mode: Mode,
    statement: &[u64],
    iteration: usize,
    rec: &IterationRecord,
) -> Result<(), VerifyError> {
    let field = circuit.field();
    let binary = field.is_binary();
    let m = circuit.input_count();
    let n_mul = circuit.mul_count();

    // Output shares must recombine to the statement.
    let ys = &rec.broadcast.output_shares;
    let sum = field.add_vec(&field.add_vec(&ys[0], &ys[1]), &ys[2]);
    if sum != statement {
        return Err(VerifyError::RecMismatch { iteration });
    }

    // Open both views: recompute commitments and extract the replay inputs.
    let mut opened: Vec<OpenedView> = Vec::with_capacity(2);
    for op in &rec.openings {
        let stream = Tape::from_seed(op.seed).elements(field, m + n_mul);
        let share_packed: Vec<u8> = match mode {
            Mode::ZkBoo => {
                let tape = op.expanded_tape.as_deref().expect("checked structurally");
                if tape != pack_elements(binary, &stream) {
                    return Err(VerifyError::CommitmentOpenFail { iteration });
                }
                let share = op.input_share.as_deref().expect("checked structurally");
                if op.player != 3 && share != pack_elements(binary, &stream[..m]) {
                    return Err(VerifyError::CommitmentOpenFail { iteration });
                }
                share.to_vec()
            }
            Mode::ZkBpp => match op.input_share.as_deref() {
                Some(share) => share.to_vec(),
                None => pack_elements(binary, &stream[..m]),
            },
        };
        let expect_ct = commit_view(&op.randomizer, &op.seed, &share_packed, &op.mul_wires);
        if expect_ct != rec.broadcast.commitments[(op.player - 1) as usize] {
            return Err(VerifyError::CommitmentOpenFail { iteration });
        }
        let share = unpack_elements(binary, &share_packed, m)
            .map_err(|_| VerifyError::Structure(format!("iteration {iteration}: bad share bytes")))?;
        if share.iter().any(|&v| v >= field.modulus()) {
            return Err(VerifyError::Structure(format!(
                "iteration {iteration}: input share is not canonical"
            )));
        }
        let mul_wires = unpack_elements(binary, &op.mul_wires, n_mul)
            .map_err(|_| VerifyError::Structure(format!("iteration {iteration}: bad wire bytes")))?;
        if mul_wires.iter().any(|&v| v >= field.modulus()) {
            return Err(VerifyError::Structure(format!(
                "iteration {iteration}: recorded wires are not canonical"
            )));
        }
        opened.push(OpenedView {
            share,
            mul_wires,
            corrections: stream[m..].to_vec(),
        });
    }

    // Replay the opened pair of views through the circuit.
    let e = rec.openings[0].player;
    let replay = replay_pair(
        circuit,
        e,
        &opened[0].share,
        &opened[1].share,
        &opened[0].mul_wires,
        &opened[1].mul_wires,
        &opened[0].corrections,
        &opened[1].corrections,
    )
    .map_err(|err| match err {
        TranscriptError::RecordedWireMismatch { wire, .. } => {
            VerifyError::WireMismatch { iteration, wire }
        }
        other => VerifyError::Structure(format!("iteration {iteration}: {other}")),
    })?;

    // The replayed views must produce exactly the broadcast output shares.
    let e1 = e % 3 + 1;
    if replay.out_e != rec.broadcast.output_shares[(e - 1) as usize]
        || replay.out_e1 != rec.broadcast.output_shares[(e1 - 1) as usize]
    {
        return Err(VerifyError::OutputMismatch { iteration });
    }
    Ok(())
}

impl ProofBundle {
    /// Serializes to the `PQZK` wire format: header, challenge trits,
    /// length-prefixed iteration records, and a trailing SHA-256 of
    /// everything before it.
    pub fn serialize(&self) -> Vec<u8> {
        let binary = self.field_modulus == 2;
        let mut w = ByteWriter::new();
        w.bytes(MAGIC);
        w.u16(VERSION);
        w.u8(self.mode as u8);
        w.u32(self.rounds);
        w.bytes(&self.circuit_hash);
        w.u64(self.field_modulus);
        w.u32(self.input_count);
        w.u32(self.mul_count);
        w.u32(self.statement.len() as u32);
        w.bytes(&pack_elements(binary, &self.statement));
        w.bytes(&self.challenge);
        for rec in &self.iterations {
            let mut rw = ByteWriter::new();
            let share_count = match self.mode {
                Mode::ZkBoo => 3,
                Mode::ZkBpp => 2,
            };
            for y in rec.broadcast.output_shares.iter().take(share_count) {
                rw.bytes(&pack_elements(binary, y));
            }
            for ct in &rec.broadcast.commitments {
                rw.bytes(ct);
            }
            for op in &rec.openings {
                rw.u8(op.player);
                rw.bytes(&op.randomizer);
                rw.bytes(&op.seed);
                if let Some(t) = &op.expanded_tape {
                    rw.bytes(t);
                }
                if let Some(s) = &op.input_share {
                    rw.bytes(s);
                }
                rw.bytes(&op.mul_wires);
            }
            w.bytes_u32(rw.as_slice());
        }
        let trailer = hashing::sha256(w.as_slice());
        w.bytes(&trailer);
        w.into_vec()
    }

    /// Parses the `PQZK` wire format, checking magic, version, structure, and
    /// the trailing integrity hash in that order.
    pub fn deserialize(bytes: &[u8]) -> Result<ProofBundle, DecodeError> {
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(DecodeError::MagicMismatch);
        }
        let mut r = ByteReader::new(&bytes[4..]);
        let version = r.u16()?;
        if version != VERSION {
            return Err(DecodeError::VersionMismatch(version));
        }
        let mode = Mode::from_byte(r.u8()?).ok_or_else(|| DecodeError::Structure("bad mode".into()))?;
        let rounds = r.u32()?;
        if rounds == 0 {
            return Err(DecodeError::ZeroRounds);
        }
        if rounds > 1 << 20 {
            return Err(DecodeError::Structure(format!("round count {rounds} is implausible")));
        }
        let circuit_hash: [u8; 32] = r.array()?;
        let field_modulus = r.u64()?;
        let field = Field::new(field_modulus)?;
        let binary = field.is_binary();
        let input_count = r.u32()?;
        let mul_count = r.u32()?;
        let l = r.u32()? as usize;
        if l > crate::codec::MAX_DECODE_LEN / 8 {
            return Err(DecodeError::Structure("output count is implausible".into()));
        }
        let statement = unpack_elements(binary, r.take(packed_len(binary, l))?, l)?;
        let challenge: Vec<u8> = r.take(rounds as usize)?.to_vec();
        if challenge.iter().any(|&t| !(1..=3).contains(&t)) {
            return Err(DecodeError::Structure("challenge trit out of range".into()));
        }

        let m = input_count as usize;
        let n_mul = mul_count as usize;
        let mut iterations = Vec::with_capacity(rounds as usize);
        for (i, &trit) in challenge.iter().enumerate() {
            let rec_bytes = r.bytes_u32()?;
            let mut rr = ByteReader::new(rec_bytes);
            let share_count = match mode {
                Mode::ZkBoo => 3,
                Mode::ZkBpp => 2,
            };
            let mut output_shares: Vec<Vec<u64>> = Vec::with_capacity(3);
            for _ in 0..share_count {
                output_shares.push(unpack_elements(binary, rr.take(packed_len(binary, l))?, l)?);
            }
            let commitments: [[u8; 32]; 3] = [rr.array()?, rr.array()?, rr.array()?];
            let mut openings = Vec::with_capacity(2);
            for slot in 0..2 {
                let expected_player = if slot == 0 { trit } else { trit % 3 + 1 };
                let player = rr.u8()?;
                if player != expected_player {
                    return Err(DecodeError::Structure(format!(
                        "iteration {i}: opening slot {slot} names player {player}, challenge says {expected_player}"
                    )));
                }
                let randomizer: [u8; 32] = rr.array()?;
                let seed: [u8; 16] = rr.array()?;
                let expanded_tape = match mode {
                    Mode::ZkBoo => Some(rr.take(packed_len(binary, m + n_mul))?.to_vec()),
                    Mode::ZkBpp => None,
                };
                let input_share = match mode {
                    Mode::ZkBoo => Some(rr.take(packed_len(binary, m))?.to_vec()),
                    Mode::ZkBpp if player == 3 => Some(rr.take(packed_len(binary, m))?.to_vec()),
                    Mode::ZkBpp => None,
                };
                let mul_wires = rr.take(packed_len(binary, n_mul))?.to_vec();
                openings.push(Opening {
                    player,
                    randomizer,
                    seed,
                    expanded_tape,
                    input_share,
                    mul_wires,
                });
            }
            if !rr.is_empty() {
                return Err(DecodeError::Structure(format!(
                    "iteration {i}: record has {} unread bytes",
                    rr.remaining()
                )));
            }
            // In compressed mode the third output share is implicit:
            // y3 = statement - y1 - y2.
            if output_shares.len() == 2 {
                let y3: Vec<u64> = statement
                    .iter()
                    .zip(output_shares[0].iter().zip(&output_shares[1]))
                    .map(|(&y, (&a, &b))| field.sub(field.sub(y, a), b))
                    .collect();
                output_shares.push(y3);
            }
            iterations.push(IterationRecord {
                broadcast: IterationBroadcast {
                    output_shares: output_shares.try_into().unwrap(),
                    commitments,
                },
                openings: openings.try_into().unwrap(),
            });
        }

        let trailer: [u8; 32] = r.array()?;
        if !r.is_empty() {
            return Err(DecodeError::Structure(format!("{} trailing bytes", r.remaining())));
        }
        let body_len = bytes.len() - 32;
        if hashing::sha256(&bytes[..body_len]) != trailer {
            return Err(DecodeError::TrailingHashMismatch);
        }

        Ok(ProofBundle {
            mode,
            rounds,
            circuit_hash,
            field_modulus,
            input_count,
            mul_count,
            statement,
            challenge,
            iterations,
        })
    }
}
