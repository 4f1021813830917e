//! Proof that two circuits are satisfied by one shared witness.
//!
//! For circuits `C_A`, `C_B` over the same field with the same input width,
//! and public outputs `y_A`, `y_B`, this module proves knowledge of a single
//! `w` with `C_A(w) = y_A` and `C_B(w) = y_B`. This is the statement a
//! verifiable random function needs: the key commitment and the evaluation
//! output are images of the *same* secret.
//!
//! Construction: each iteration draws one master seed per player. The master
//! deterministically expands into a share tape (defining players 1 and 2's
//! witness shares) and two independent correction tapes, one per circuit.
//! Both circuits are simulated over the identical witness split, each player
//! commits once per side, and a single joint challenge — derived from both
//! sides' broadcasts — picks one pair of players whose views are opened for
//! *both* circuits at once. An opening carries one master seed and one input
//! share, so the verifier mechanically replays both sides from the same
//! witness shares; mixing witnesses between sides is structurally impossible
//! for the opened players and is caught probabilistically for the hidden one.
//!
//! The two correction tapes are independent streams. Reusing one stream for
//! both sides would let the revealed views of player `e+1` share a one-time
//! pad across circuits, leaking wire differences of the hidden player.

use crate::circuit::Circuit;
use crate::codec::{pack_elements, packed_len, unpack_elements, ByteReader, ByteWriter};
use crate::decomposition::{replay_pair, run_decomposition_with_shares, Tape, TranscriptError};
use crate::field::Field;
use crate::hashing::{self, derive_seed};
use crate::zkboo::{
    broadcast_transcript_bytes, commit_view, derive_challenge_from_transcript, DecodeError,
    IterationBroadcast, Mode, ProveError, VerifyError,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use thiserror::Error;

const MAGIC: &[u8; 4] = b"PQEQ";
const VERSION: u16 = 1;

/// Derivation indices for the per-player master seed.
const SEED_SHARE: u64 = 0;
const SEED_SIDE_A: u64 = 1;
const SEED_SIDE_B: u64 = 2;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum EqProveError {
    #[error("circuits are over different fields")]
    FieldMismatch,
    #[error("circuits take different input counts")]
    InputCountMismatch,
    #[error("side {0}: {1}")]
    Side(char, ProveError),
    #[error(transparent)]
    Prove(#[from] ProveError),
}

/// Opening of one player across both circuits: one master seed, one input
/// share, per-side randomizers and recorded MUL wires.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqOpening {
    pub player: u8,
    pub master_seed: [u8; 16],
    pub randomizers: [[u8; 32]; 2],
    /// Expanded correction tapes for both sides (packed); baseline mode only.
    pub expanded_tapes: Option<[Vec<u8>; 2]>,
    /// Packed input share. Baseline mode: always present. Compressed mode:
    /// only player 3 carries it.
    pub input_share: Option<Vec<u8>>,
    pub mul_wires: [Vec<u8>; 2],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqIterationRecord {
    pub broadcasts: [IterationBroadcast; 2],
    pub openings: [EqOpening; 2],
}

/// A joint proof of shared-witness satisfiability for two circuits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqProof {
    pub mode: Mode,
    pub rounds: u32,
    pub circuit_hashes: [[u8; 32]; 2],
    pub field_modulus: u64,
    pub input_count: u32,
    pub mul_counts: [u32; 2],
    pub statements: [Vec<u64>; 2],
    pub challenge: Vec<u8>,
    pub iterations: Vec<EqIterationRecord>,
}

fn derive16(master: &[u8; 16], index: u64) -> [u8; 16] {
    let full = derive_seed(master, index);
    full[..16].try_into().unwrap()
}

fn share_tape(master: &[u8; 16]) -> Tape {
    Tape::from_seed(derive16(master, SEED_SHARE))
}

fn side_tape(master: &[u8; 16], side: usize) -> Tape {
    let idx = if side == 0 { SEED_SIDE_A } else { SEED_SIDE_B };
    Tape::from_seed(derive16(master, idx))
}

/// Context string binding a joint proof to both relations and the parameters.
pub fn eq_fs_context(
    hash_a: &[u8; 32],
    hash_b: &[u8; 32],
    mode: Mode,
    rounds: u32,
    stmt_a_packed: &[u8],
    stmt_b_packed: &[u8],
) -> Vec<u8> {
    let mut w = ByteWriter::new();
    w.bytes(b"PQEQCTX1");
    w.bytes(hash_a);
    w.bytes(hash_b);
    w.u8(mode as u8);
    w.u32(rounds);
    w.bytes_u32(stmt_a_packed);
    w.bytes_u32(stmt_b_packed);
    w.into_vec()
}

/// Joint challenge over both sides' broadcast transcripts.
pub fn eq_derive_challenge(
    context: &[u8],
    binary: bool,
    broadcasts_a: &[IterationBroadcast],
    broadcasts_b: &[IterationBroadcast],
) -> Vec<u8> {
    let mut transcript = broadcast_transcript_bytes(binary, broadcasts_a);
    transcript.extend_from_slice(&broadcast_transcript_bytes(binary, broadcasts_b));
    derive_challenge_from_transcript(context, &transcript, broadcasts_a.len())
}

/// Secret material for one joint iteration.
pub struct EqIterationSecrets {
    pub masters: [[u8; 16]; 3],
    /// `randomizers[player][side]`.
    pub randomizers: [[[u8; 32]; 2]; 3],
}

impl EqIterationSecrets {
    pub fn from_rng(rng: &mut impl RngCore) -> EqIterationSecrets {
        let masters = std::array::from_fn(|_| {
            let mut s = [0u8; 16];
            rng.fill_bytes(&mut s);
            s
        });
        let randomizers = std::array::from_fn(|_| {
            std::array::from_fn(|_| {
                let mut r = [0u8; 32];
                rng.fill_bytes(&mut r);
                r
            })
        });
        EqIterationSecrets { masters, randomizers }
    }
}

/// One player's committed artifacts across both sides.
pub struct EqPlayerArtifact {
    pub master_seed: [u8; 16],
    pub randomizers: [[u8; 32]; 2],
    pub input_share_packed: Vec<u8>,
    pub mul_wires_packed: [Vec<u8>; 2],
    pub commitments: [[u8; 32]; 2],
}

/// Runs one joint iteration: both circuits over the same witness split.
pub fn run_eq_iteration(
    circ_a: &Circuit,
    circ_b: &Circuit,
    witness: &[u64],
    secrets: &EqIterationSecrets,
) -> Result<([IterationBroadcast; 2], [EqPlayerArtifact; 3]), ProveError> {
    let field = circ_a.field();
    let binary = field.is_binary();
    let m = circ_a.input_count();

    let w1 = share_tape(&secrets.masters[0]).elements(field, m);
    let w2 = share_tape(&secrets.masters[1]).elements(field, m);
    let w3 = field.sub_vec(&field.sub_vec(witness, &w1), &w2);
    let shares = [w1, w2, w3];

    let tapes_a: [Tape; 3] = std::array::from_fn(|j| side_tape(&secrets.masters[j], 0));
    let tapes_b: [Tape; 3] = std::array::from_fn(|j| side_tape(&secrets.masters[j], 1));
    let run_a = run_decomposition_with_shares(circ_a, &shares, &tapes_a)?;
    let run_b = run_decomposition_with_shares(circ_b, &shares, &tapes_b)?;

    let artifacts: [EqPlayerArtifact; 3] = std::array::from_fn(|j| {
        let share_packed = pack_elements(binary, &shares[j]);
        let mul_a = pack_elements(binary, &run_a.views[j].mul_wires(circ_a));
        let mul_b = pack_elements(binary, &run_b.views[j].mul_wires(circ_b));
        let ct_a = commit_view(
            &secrets.randomizers[j][0],
            &secrets.masters[j],
            &share_packed,
            &mul_a,
        );
        let ct_b = commit_view(
            &secrets.randomizers[j][1],
            &secrets.masters[j],
            &share_packed,
            &mul_b,
        );
        EqPlayerArtifact {
            master_seed: secrets.masters[j],
            randomizers: secrets.randomizers[j],
            input_share_packed: share_packed,
            mul_wires_packed: [mul_a, mul_b],
            commitments: [ct_a, ct_b],
        }
    });
    let broadcasts = [
        IterationBroadcast {
            output_shares: run_a.output_shares,
            commitments: std::array::from_fn(|j| artifacts[j].commitments[0]),
        },
        IterationBroadcast {
            output_shares: run_b.output_shares,
            commitments: std::array::from_fn(|j| artifacts[j].commitments[1]),
        },
    ];
    Ok((broadcasts, artifacts))
}

fn build_eq_opening(
    circ_a: &Circuit,
    circ_b: &Circuit,
    mode: Mode,
    artifact: &EqPlayerArtifact,
    player: u8,
) -> EqOpening {
    let field = circ_a.field();
    let binary = field.is_binary();
    let m = circ_a.input_count();
    let (expanded_tapes, input_share) = match mode {
        Mode::ZkBoo => {
            let stream_a = side_tape(&artifact.master_seed, 0).elements(field, m + circ_a.mul_count());
            let stream_b = side_tape(&artifact.master_seed, 1).elements(field, m + circ_b.mul_count());
            (
                Some([
                    pack_elements(binary, &stream_a),
                    pack_elements(binary, &stream_b),
                ]),
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
    EqOpening {
        player,
        master_seed: artifact.master_seed,
        randomizers: artifact.randomizers,
        expanded_tapes,
        input_share,
        mul_wires: artifact.mul_wires_packed.clone(),
    }
}

/// Builds the joint iteration record for a challenge trit.
pub fn assemble_eq_record(
    circ_a: &Circuit,
    circ_b: &Circuit,
    mode: Mode,
    broadcasts: [IterationBroadcast; 2],
    artifacts: &[EqPlayerArtifact; 3],
    trit: u8,
) -> EqIterationRecord {
    let first = trit;
    let second = trit % 3 + 1;
    EqIterationRecord {
        broadcasts,
        openings: [
            build_eq_opening(circ_a, circ_b, mode, &artifacts[(first - 1) as usize], first),
            build_eq_opening(circ_a, circ_b, mode, &artifacts[(second - 1) as usize], second),
        ],
    }
}

fn check_side(
    circ: &Circuit,
    statement: &[u64],
    witness: &[u64],
    side: char,
) -> Result<(), EqProveError> {
    if circ.gate_count() > crate::zkboo::MAX_PROOF_GATES {
        return Err(EqProveError::Side(
            side,
            ProveError::CircuitTooLarge(circ.gate_count()),
        ));
    }
    if statement.len() != circ.output_count() {
        return Err(EqProveError::Side(
            side,
            ProveError::StatementLength {
                expected: circ.output_count(),
                got: statement.len(),
            },
        ));
    }
    if let Some(i) = statement.iter().position(|&v| v >= circ.field().modulus()) {
        return Err(EqProveError::Side(side, ProveError::BadStatement(i)));
    }
    let eval = circ.evaluate(witness).map_err(|e| EqProveError::Side(side, e.into()))?;
    if eval != statement {
        return Err(EqProveError::Side(side, ProveError::StatementMismatch));
    }
    Ok(())
}

/// Produces a joint proof that one witness satisfies both circuits.
pub fn eq_prove(
    circ_a: &Circuit,
    stmt_a: &[u64],
    circ_b: &Circuit,
    stmt_b: &[u64],
    witness: &[u64],
    rounds: u32,
    mode: Mode,
    rng_seed: u64,
) -> Result<EqProof, EqProveError> {
    if circ_a.field().modulus() != circ_b.field().modulus() {
        return Err(EqProveError::FieldMismatch);
    }
    if circ_a.input_count() != circ_b.input_count() {
        return Err(EqProveError::InputCountMismatch);
    }
    if rounds == 0 {
        return Err(EqProveError::Prove(ProveError::ZeroRounds));
    }
    check_side(circ_a, stmt_a, witness, 'A')?;
    check_side(circ_b, stmt_b, witness, 'B')?;

    let mut master = ChaCha20Rng::seed_from_u64(rng_seed);
    let secrets: Vec<EqIterationSecrets> = (0..rounds)
        .map(|_| EqIterationSecrets::from_rng(&mut master))
        .collect();

    let iterations: Vec<([IterationBroadcast; 2], [EqPlayerArtifact; 3])> = secrets
        .par_iter()
        .map(|s| run_eq_iteration(circ_a, circ_b, witness, s))
        .collect::<Result<_, _>>()?;

    let binary = circ_a.field().is_binary();
    let stmt_a_packed = pack_elements(binary, stmt_a);
    let stmt_b_packed = pack_elements(binary, stmt_b);
    let hashes = [circ_a.hash(), circ_b.hash()];
    let context = eq_fs_context(&hashes[0], &hashes[1], mode, rounds, &stmt_a_packed, &stmt_b_packed);
    let broadcasts_a: Vec<IterationBroadcast> =
        iterations.iter().map(|(b, _)| b[0].clone()).collect();
    let broadcasts_b: Vec<IterationBroadcast> =
        iterations.iter().map(|(b, _)| b[1].clone()).collect();
    let challenge = eq_derive_challenge(&context, binary, &broadcasts_a, &broadcasts_b);

    let records: Vec<EqIterationRecord> = iterations
        .into_iter()
        .zip(&challenge)
        .map(|((broadcasts, artifacts), &trit)| {
            assemble_eq_record(circ_a, circ_b, mode, broadcasts, &artifacts, trit)
        })
        .collect();

    Ok(EqProof {
        mode,
        rounds,
        circuit_hashes: hashes,
        field_modulus: circ_a.field().modulus(),
        input_count: circ_a.input_count() as u32,
        mul_counts: [circ_a.mul_count() as u32, circ_b.mul_count() as u32],
        statements: [stmt_a.to_vec(), stmt_b.to_vec()],
        challenge,
        iterations: records,
    })
}

/// Checks a joint proof against both circuits and statements.
pub fn eq_verify(
    circ_a: &Circuit,
    stmt_a: &[u64],
    circ_b: &Circuit,
    stmt_b: &[u64],
    proof: &EqProof,
) -> Result<(), VerifyError> {
    let field = circ_a.field();
    let binary = field.is_binary();

    if circ_a.field().modulus() != circ_b.field().modulus()
        || circ_a.input_count() != circ_b.input_count()
    {
        return Err(VerifyError::Structure(
            "circuits do not share a field and input width".into(),
        ));
    }
    if proof.rounds == 0 || proof.rounds as usize != proof.iterations.len() {
        return Err(VerifyError::Structure(
            "iteration count disagrees with the round count".into(),
        ));
    }
    if proof.challenge.len() != proof.iterations.len() {
        return Err(VerifyError::Structure(
            "challenge and iteration counts disagree".into(),
        ));
    }
    if proof.circuit_hashes != [circ_a.hash(), circ_b.hash()] {
        return Err(VerifyError::Structure("proof is bound to different circuits".into()));
    }
    if proof.field_modulus != field.modulus()
        || proof.input_count as usize != circ_a.input_count()
        || proof.mul_counts != [circ_a.mul_count() as u32, circ_b.mul_count() as u32]
    {
        return Err(VerifyError::Structure("proof header disagrees with the circuits".into()));
    }
    if proof.statements[0] != stmt_a || proof.statements[1] != stmt_b {
        return Err(VerifyError::Structure(
            "proof statements differ from the given statements".into(),
        ));
    }
    for (stmt, circ) in [(stmt_a, circ_a), (stmt_b, circ_b)] {
        if stmt.len() != circ.output_count() || stmt.iter().any(|&v| v >= field.modulus()) {
            return Err(VerifyError::Structure("statement is not canonical for its circuit".into()));
        }
    }

    let m = circ_a.input_count();
    let mul_counts = [circ_a.mul_count(), circ_b.mul_count()];
    let out_counts = [circ_a.output_count(), circ_b.output_count()];

    // Structural pass.
    for (i, rec) in proof.iterations.iter().enumerate() {
        for (side, b) in rec.broadcasts.iter().enumerate() {
            for y in &b.output_shares {
                if y.len() != out_counts[side] || y.iter().any(|&v| v >= field.modulus()) {
                    return Err(VerifyError::Structure(format!(
                        "iteration {i}: broadcast output share is not canonical"
                    )));
                }
            }
        }
        for op in &rec.openings {
            if !(1..=3).contains(&op.player) {
                return Err(VerifyError::Structure(format!(
                    "iteration {i}: opening names player {}",
                    op.player
                )));
            }
            for side in 0..2 {
                if op.mul_wires[side].len() != packed_len(binary, mul_counts[side]) {
                    return Err(VerifyError::Structure(format!(
                        "iteration {i}: mul wire bytes have the wrong length"
                    )));
                }
            }
            match proof.mode {
                Mode::ZkBoo => {
                    match op.expanded_tapes.as_ref() {
                        Some(tapes)
                            if tapes[0].len() == packed_len(binary, m + mul_counts[0])
                                && tapes[1].len() == packed_len(binary, m + mul_counts[1]) => {}
                        _ => {
                            return Err(VerifyError::Structure(format!(
                                "iteration {i}: expanded tapes missing or mis-sized"
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
                    if op.expanded_tapes.is_some() {
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
    for (rec, &trit) in proof.iterations.iter().zip(&proof.challenge) {
        if rec.openings[0].player != trit || rec.openings[1].player != trit % 3 + 1 {
            return Err(VerifyError::ChallengeMismatch);
        }
    }

    // Joint challenge recomputation.
    let stmt_a_packed = pack_elements(binary, stmt_a);
    let stmt_b_packed = pack_elements(binary, stmt_b);
    let context = eq_fs_context(
        &proof.circuit_hashes[0],
        &proof.circuit_hashes[1],
        proof.mode,
        proof.rounds,
        &stmt_a_packed,
        &stmt_b_packed,
    );
    let broadcasts_a: Vec<IterationBroadcast> =
        proof.iterations.iter().map(|r| r.broadcasts[0].clone()).collect();
    let broadcasts_b: Vec<IterationBroadcast> =
        proof.iterations.iter().map(|r| r.broadcasts[1].clone()).collect();
    let challenge = eq_derive_challenge(&context, binary, &broadcasts_a, &broadcasts_b);
    if challenge != proof.challenge {
        return Err(VerifyError::ChallengeMismatch);
    }

    // Per-iteration verification.
    let results: Vec<Result<(), VerifyError>> = proof
        .iterations
        .par_iter()
        .enumerate()
        .map(|(i, rec)| verify_eq_iteration(circ_a, circ_b, proof.mode, stmt_a, stmt_b, i, rec))
        .collect();
    for r in results {
        r?;
    }
    Ok(())
}

fn verify_eq_iteration(
    circ_a: &Circuit,
    circ_b: &Circuit,
    mode: Mode,
    stmt_a: &[u64],
    stmt_b: &[u64],
    iteration: usize,
    rec: &EqIterationRecord,
) -> Result<(), VerifyError> {
    let field = circ_a.field();
    let binary = field.is_binary();
    let m = circ_a.input_count();
    let circuits = [circ_a, circ_b];
    let statements = [stmt_a, stmt_b];

    // Output shares must recombine to each side's statement.
    for side in 0..2 {
        let ys = &rec.broadcasts[side].output_shares;
        let sum = field.add_vec(&field.add_vec(&ys[0], &ys[1]), &ys[2]);
        if sum != statements[side] {
            return Err(VerifyError::RecMismatch { iteration });
        }
    }

    // Open both players: derive tapes from the master seed, settle the input
    // share, and check both sides' commitments against it.
    struct EqOpenedView {
        share: Vec<u64>,
        mul_wires: [Vec<u64>; 2],
        corrections: [Vec<u64>; 2],
    }
    let mut opened: Vec<EqOpenedView> = Vec::with_capacity(2);
    for op in &rec.openings {
        let stream_a = side_tape(&op.master_seed, 0).elements(field, m + circ_a.mul_count());
        let stream_b = side_tape(&op.master_seed, 1).elements(field, m + circ_b.mul_count());
        let derived_share = share_tape(&op.master_seed).elements(field, m);

        let share_packed: Vec<u8> = match mode {
            Mode::ZkBoo => {
                let tapes = op.expanded_tapes.as_ref().expect("checked structurally");
                if tapes[0] != pack_elements(binary, &stream_a)
                    || tapes[1] != pack_elements(binary, &stream_b)
                {
                    return Err(VerifyError::CommitmentOpenFail { iteration });
                }
                let share = op.input_share.as_deref().expect("checked structurally");
                if op.player != 3 && share != pack_elements(binary, &derived_share) {
                    return Err(VerifyError::CommitmentOpenFail { iteration });
                }
                share.to_vec()
            }
            Mode::ZkBpp => match op.input_share.as_deref() {
                Some(share) => share.to_vec(),
                None => pack_elements(binary, &derived_share),
            },
        };
        for side in 0..2 {
            let expect = commit_view(
                &op.randomizers[side],
                &op.master_seed,
                &share_packed,
                &op.mul_wires[side],
            );
            if expect != rec.broadcasts[side].commitments[(op.player - 1) as usize] {
                return Err(VerifyError::CommitmentOpenFail { iteration });
            }
        }
        let share = unpack_elements(binary, &share_packed, m)
            .map_err(|_| VerifyError::Structure(format!("iteration {iteration}: bad share bytes")))?;
        if share.iter().any(|&v| v >= field.modulus()) {
            return Err(VerifyError::Structure(format!(
                "iteration {iteration}: input share is not canonical"
            )));
        }
        let mut mul_wires = Vec::with_capacity(2);
        for side in 0..2 {
            let w = unpack_elements(binary, &op.mul_wires[side], circuits[side].mul_count())
                .map_err(|_| {
                    VerifyError::Structure(format!("iteration {iteration}: bad wire bytes"))
                })?;
            if w.iter().any(|&v| v >= field.modulus()) {
                return Err(VerifyError::Structure(format!(
                    "iteration {iteration}: recorded wires are not canonical"
                )));
            }
            mul_wires.push(w);
        }
        opened.push(EqOpenedView {
            share,
            mul_wires: mul_wires.try_into().unwrap(),
            corrections: [stream_a[m..].to_vec(), stream_b[m..].to_vec()],
        });
    }

    // Replay both sides from the single shared witness split.
    let e = rec.openings[0].player;
    let e1 = e % 3 + 1;
    for side in 0..2 {
        let replay = replay_pair(
            circuits[side],
            e,
            &opened[0].share,
            &opened[1].share,
            &opened[0].mul_wires[side],
            &opened[1].mul_wires[side],
            &opened[0].corrections[side],
            &opened[1].corrections[side],
        )
        .map_err(|err| match err {
            TranscriptError::RecordedWireMismatch { wire, .. } => {
                VerifyError::WireMismatch { iteration, wire }
            }
            other => VerifyError::Structure(format!("iteration {iteration}: {other}")),
        })?;
        if replay.out_e != rec.broadcasts[side].output_shares[(e - 1) as usize]
            || replay.out_e1 != rec.broadcasts[side].output_shares[(e1 - 1) as usize]
        {
            return Err(VerifyError::OutputMismatch { iteration });
        }
    }
    Ok(())
}

impl EqProof {
    /// Serializes to the `PQEQ` wire format; layout mirrors the single-proof
    /// format with doubled side-specific fields and the same trailing hash.
    pub fn serialize(&self) -> Vec<u8> {
        let binary = self.field_modulus == 2;
        let mut w = ByteWriter::new();
        w.bytes(MAGIC);
        w.u16(VERSION);
        w.u8(self.mode as u8);
        w.u32(self.rounds);
        w.bytes(&self.circuit_hashes[0]);
        w.bytes(&self.circuit_hashes[1]);
        w.u64(self.field_modulus);
        w.u32(self.input_count);
        w.u32(self.mul_counts[0]);
        w.u32(self.mul_counts[1]);
        for stmt in &self.statements {
            w.u32(stmt.len() as u32);
            w.bytes(&pack_elements(binary, stmt));
        }
        w.bytes(&self.challenge);
        for rec in &self.iterations {
            let mut rw = ByteWriter::new();
            let share_count = match self.mode {
                Mode::ZkBoo => 3,
                Mode::ZkBpp => 2,
            };
            for b in &rec.broadcasts {
                for y in b.output_shares.iter().take(share_count) {
                    rw.bytes(&pack_elements(binary, y));
                }
                for ct in &b.commitments {
                    rw.bytes(ct);
                }
            }
            for op in &rec.openings {
                rw.u8(op.player);
                rw.bytes(&op.master_seed);
                rw.bytes(&op.randomizers[0]);
                rw.bytes(&op.randomizers[1]);
                if let Some(tapes) = &op.expanded_tapes {
                    rw.bytes(&tapes[0]);
                    rw.bytes(&tapes[1]);
                }
                if let Some(s) = &op.input_share {
                    rw.bytes(s);
                }
                rw.bytes(&op.mul_wires[0]);
                rw.bytes(&op.mul_wires[1]);
            }
            w.bytes_u32(rw.as_slice());
        }
        let trailer = hashing::sha256(w.as_slice());
        w.bytes(&trailer);
        w.into_vec()
    }

    /// Parses the `PQEQ` wire format with the same check order as the
    /// single-proof decoder: magic, version, structure, trailing hash.
    pub fn deserialize(bytes: &[u8]) -> Result<EqProof, DecodeError> {
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
        let circuit_hashes = [r.array()?, r.array()?];
        let field_modulus = r.u64()?;
        let field = Field::new(field_modulus)?;
        let binary = field.is_binary();
        let input_count = r.u32()?;
        let mul_counts = [r.u32()?, r.u32()?];
        let mut statements: Vec<Vec<u64>> = Vec::with_capacity(2);
        for _ in 0..2 {
            let l = r.u32()? as usize;
            if l > crate::codec::MAX_DECODE_LEN / 8 {
                return Err(DecodeError::Structure("output count is implausible".into()));
            }
            statements.push(unpack_elements(binary, r.take(packed_len(binary, l))?, l)?);
        }
        let statements: [Vec<u64>; 2] = statements.try_into().unwrap();
        let challenge: Vec<u8> = r.take(rounds as usize)?.to_vec();
        if challenge.iter().any(|&t| !(1..=3).contains(&t)) {
            return Err(DecodeError::Structure("challenge trit out of range".into()));
        }

        let m = input_count as usize;
        let lens = [statements[0].len(), statements[1].len()];
        let mut iterations = Vec::with_capacity(rounds as usize);
        for (i, &trit) in challenge.iter().enumerate() {
            let rec_bytes = r.bytes_u32()?;
            let mut rr = ByteReader::new(rec_bytes);
            let share_count = match mode {
                Mode::ZkBoo => 3,
                Mode::ZkBpp => 2,
            };
            let mut broadcasts: Vec<IterationBroadcast> = Vec::with_capacity(2);
            for side in 0..2 {
                let l = lens[side];
                let mut output_shares: Vec<Vec<u64>> = Vec::with_capacity(3);
                for _ in 0..share_count {
                    output_shares.push(unpack_elements(binary, rr.take(packed_len(binary, l))?, l)?);
                }
                let commitments: [[u8; 32]; 3] = [rr.array()?, rr.array()?, rr.array()?];
                if output_shares.len() == 2 {
                    let y3: Vec<u64> = statements[side]
                        .iter()
                        .zip(output_shares[0].iter().zip(&output_shares[1]))
                        .map(|(&y, (&a, &b))| field.sub(field.sub(y, a), b))
                        .collect();
                    output_shares.push(y3);
                }
                broadcasts.push(IterationBroadcast {
                    output_shares: output_shares.try_into().unwrap(),
                    commitments,
                });
            }
            let mut openings = Vec::with_capacity(2);
            for slot in 0..2 {
                let expected_player = if slot == 0 { trit } else { trit % 3 + 1 };
                let player = rr.u8()?;
                if player != expected_player {
                    return Err(DecodeError::Structure(format!(
                        "iteration {i}: opening slot {slot} names player {player}, challenge says {expected_player}"
                    )));
                }
                let master_seed: [u8; 16] = rr.array()?;
                let randomizers: [[u8; 32]; 2] = [rr.array()?, rr.array()?];
                let expanded_tapes = match mode {
                    Mode::ZkBoo => Some([
                        rr.take(packed_len(binary, m + mul_counts[0] as usize))?.to_vec(),
                        rr.take(packed_len(binary, m + mul_counts[1] as usize))?.to_vec(),
                    ]),
                    Mode::ZkBpp => None,
                };
                let input_share = match mode {
                    Mode::ZkBoo => Some(rr.take(packed_len(binary, m))?.to_vec()),
                    Mode::ZkBpp if player == 3 => Some(rr.take(packed_len(binary, m))?.to_vec()),
                    Mode::ZkBpp => None,
                };
                let mul_wires = [
                    rr.take(packed_len(binary, mul_counts[0] as usize))?.to_vec(),
                    rr.take(packed_len(binary, mul_counts[1] as usize))?.to_vec(),
                ];
                openings.push(EqOpening {
                    player,
                    master_seed,
                    randomizers,
                    expanded_tapes,
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
            iterations.push(EqIterationRecord {
                broadcasts: broadcasts.try_into().unwrap(),
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

        Ok(EqProof {
            mode,
            rounds,
            circuit_hashes,
            field_modulus,
            input_count,
            mul_counts,
            statements,
            challenge,
            iterations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{BitRef, CircuitBuilder};
    use crate::field::Field;

    /// yA = (x0 AND x1) XOR x2 over GF(2).
    fn circ_a_gf2() -> Circuit {
        let mut b = CircuitBuilder::new(Field::BINARY, 3);
        let t = b.and(BitRef::Wire(0), BitRef::Wire(1));
        let out = b.xor(t, BitRef::Wire(2));
        b.finish(&[out])
    }

    /// yB = (x0 AND x2) XOR (x1 AND x2) XOR x0 over GF(2).
    fn circ_b_gf2() -> Circuit {
        let mut b = CircuitBuilder::new(Field::BINARY, 3);
        let t1 = b.and(BitRef::Wire(0), BitRef::Wire(2));
        let t2 = b.and(BitRef::Wire(1), BitRef::Wire(2));
        let x = b.xor(t1, t2);
        let out = b.xor(x, BitRef::Wire(0));
        b.finish(&[out])
    }

    /// yA = x0*x1 + 5 over GF(97).
    fn circ_a_gf97() -> Circuit {
        let mut b = CircuitBuilder::new(Field::new(97).unwrap(), 2);
        let t = b.mul(BitRef::Wire(0), BitRef::Wire(1));
        let out = b.add(t, BitRef::Const(5));
        b.finish(&[out])
    }

    /// yB = (x0 + x1) * x1 over GF(97).
    fn circ_b_gf97() -> Circuit {
        let mut b = CircuitBuilder::new(Field::new(97).unwrap(), 2);
        let s = b.add(BitRef::Wire(0), BitRef::Wire(1));
        let out = b.mul(s, BitRef::Wire(1));
        b.finish(&[out])
    }

    fn prove_pair(
        ca: &Circuit,
        cb: &Circuit,
        w: &[u64],
        rounds: u32,
        mode: Mode,
        seed: u64,
    ) -> (Vec<u64>, Vec<u64>, EqProof) {
        let ya = ca.evaluate(w).unwrap();
        let yb = cb.evaluate(w).unwrap();
        let proof = eq_prove(ca, &ya, cb, &yb, w, rounds, mode, seed).unwrap();
        (ya, yb, proof)
    }

    #[test]
    fn roundtrip_both_modes_gf2() {
        let (ca, cb) = (circ_a_gf2(), circ_b_gf2());
        for mode in [Mode::ZkBoo, Mode::ZkBpp] {
            let (ya, yb, proof) = prove_pair(&ca, &cb, &[1, 0, 1], 25, mode, 5);
            eq_verify(&ca, &ya, &cb, &yb, &proof).unwrap_or_else(|e| panic!("{mode:?}: {e}"));
        }
    }

    #[test]
    fn roundtrip_both_modes_gf97() {
        let (ca, cb) = (circ_a_gf97(), circ_b_gf97());
        for mode in [Mode::ZkBoo, Mode::ZkBpp] {
            let (ya, yb, proof) = prove_pair(&ca, &cb, &[13, 42], 25, mode, 6);
            assert_eq!(ya, vec![(13 * 42 + 5) % 97]);
            assert_eq!(yb, vec![((13 + 42) * 42) % 97]);
            eq_verify(&ca, &ya, &cb, &yb, &proof).unwrap_or_else(|e| panic!("{mode:?}: {e}"));
        }
    }

    #[test]
    fn compressed_mode_is_smaller_with_identical_broadcasts() {
        let (ca, cb) = (circ_a_gf2(), circ_b_gf2());
        let (ya, yb, base) = prove_pair(&ca, &cb, &[1, 1, 1], 30, Mode::ZkBoo, 9);
        let (_, _, comp) = prove_pair(&ca, &cb, &[1, 1, 1], 30, Mode::ZkBpp, 9);
        for (x, y) in base.iterations.iter().zip(&comp.iterations) {
            assert_eq!(x.broadcasts, y.broadcasts);
        }
        eq_verify(&ca, &ya, &cb, &yb, &base).unwrap();
        eq_verify(&ca, &ya, &cb, &yb, &comp).unwrap();
        assert!(comp.serialize().len() < base.serialize().len());
    }

    #[test]
    fn prove_rejects_incompatible_or_unsatisfied() {
        let ca = circ_a_gf2();
        let cb97 = circ_b_gf97();
        assert_eq!(
            eq_prove(&ca, &[0], &cb97, &[0], &[0, 0, 0], 5, Mode::ZkBoo, 0),
            Err(EqProveError::FieldMismatch)
        );

        // Same field, different input widths.
        let mut b = CircuitBuilder::new(Field::BINARY, 4);
        let t = b.and(BitRef::Wire(0), BitRef::Wire(3));
        let wide = b.finish(&[t]);
        assert_eq!(
            eq_prove(&ca, &[0], &wide, &[0], &[0, 0, 0], 5, Mode::ZkBoo, 0),
            Err(EqProveError::InputCountMismatch)
        );

        let cb = circ_b_gf2();
        let w = [1, 0, 1];
        let ya = ca.evaluate(&w).unwrap();
        let yb = cb.evaluate(&w).unwrap();
        let bad_yb: Vec<u64> = yb.iter().map(|&v| 1 - v).collect();
        assert_eq!(
            eq_prove(&ca, &ya, &cb, &bad_yb, &w, 5, Mode::ZkBoo, 0),
            Err(EqProveError::Side('B', ProveError::StatementMismatch))
        );
        let bad_ya: Vec<u64> = ya.iter().map(|&v| 1 - v).collect();
        assert_eq!(
            eq_prove(&ca, &bad_ya, &cb, &yb, &w, 5, Mode::ZkBoo, 0),
            Err(EqProveError::Side('A', ProveError::StatementMismatch))
        );
    }

    #[test]
    fn verify_rejects_tampering() {
        let (ca, cb) = (circ_a_gf2(), circ_b_gf2());
        let (ya, yb, proof) = prove_pair(&ca, &cb, &[0, 1, 1], 10, Mode::ZkBoo, 4);

        let mut bad = proof.clone();
        bad.iterations[3].openings[0].randomizers[1][0] ^= 1;
        assert_eq!(
            eq_verify(&ca, &ya, &cb, &yb, &bad),
            Err(VerifyError::CommitmentOpenFail { iteration: 3 })
        );

        let mut bad = proof.clone();
        bad.challenge[2] = bad.challenge[2] % 3 + 1;
        assert_eq!(
            eq_verify(&ca, &ya, &cb, &yb, &bad),
            Err(VerifyError::ChallengeMismatch)
        );

        let flipped: Vec<u64> = yb.iter().map(|&v| 1 - v).collect();
        assert!(matches!(
            eq_verify(&ca, &ya, &cb, &flipped, &proof),
            Err(VerifyError::Structure(_))
        ));
    }

    /// Stitching side B of one proof onto side A of another changes the joint
    /// transcript, so the challenge no longer matches.
    #[test]
    fn spliced_sides_fail_the_joint_challenge() {
        let (ca, cb) = (circ_a_gf2(), circ_b_gf2());
        let (ya, _yb1, p1) = prove_pair(&ca, &cb, &[1, 0, 1], 8, Mode::ZkBoo, 1);
        let (_, yb2, p2) = prove_pair(&ca, &cb, &[0, 1, 1], 8, Mode::ZkBoo, 2);

        let mut spliced = p1.clone();
        spliced.statements[1] = p2.statements[1].clone();
        for (dst, src) in spliced.iterations.iter_mut().zip(&p2.iterations) {
            dst.broadcasts[1] = src.broadcasts[1].clone();
            for (o_dst, o_src) in dst.openings.iter_mut().zip(&src.openings) {
                o_dst.randomizers[1] = o_src.randomizers[1];
                o_dst.mul_wires[1] = o_src.mul_wires[1].clone();
                if let (Some(t_dst), Some(t_src)) =
                    (o_dst.expanded_tapes.as_mut(), o_src.expanded_tapes.as_ref())
                {
                    t_dst[1] = t_src[1].clone();
                }
            }
        }
        assert_eq!(
            eq_verify(&ca, &ya, &cb, &yb2, &spliced),
            Err(VerifyError::ChallengeMismatch)
        );
    }

    /// A forger who wants side B to claim a *different* witness's output can
    /// only fabricate the hidden player's output share; the forgery survives
    /// an iteration only when the challenge never opens player 3, so the
    /// acceptance rate is bounded by the soundness error.
    #[test]
    fn cross_witness_forgery_is_caught_probabilistically() {
        let (ca, cb) = (circ_a_gf2(), circ_b_gf2());
        let field = ca.field();
        let w = vec![1u64, 0, 1];
        let w_other = vec![1u64, 1, 1]; // circ_b maps these to different outputs
        let ya = ca.evaluate(&w).unwrap();
        let yb_claim = cb.evaluate(&w_other).unwrap();
        assert_ne!(cb.evaluate(&w).unwrap(), yb_claim, "claim must be a real forgery");

        let rounds = 3u32;
        let trials = 300u64;
        let mut accepted = 0u32;
        for trial in 0..trials {
            let mut rng = ChaCha20Rng::seed_from_u64(1000 + trial);
            let secrets: Vec<EqIterationSecrets> = (0..rounds)
                .map(|_| EqIterationSecrets::from_rng(&mut rng))
                .collect();
            let iterations: Vec<([IterationBroadcast; 2], [EqPlayerArtifact; 3])> = secrets
                .iter()
                .map(|s| run_eq_iteration(&ca, &cb, &w, s).unwrap())
                .collect();

            // Fabricate y3 on side B so the shares sum to the claimed output.
            let doctored: Vec<[IterationBroadcast; 2]> = iterations
                .iter()
                .map(|(b, _)| {
                    let mut b = b.clone();
                    let y3: Vec<u64> = yb_claim
                        .iter()
                        .zip(b[1].output_shares[0].iter().zip(&b[1].output_shares[1]))
                        .map(|(&y, (&a, &c))| field.sub(field.sub(y, a), c))
                        .collect();
                    b[1].output_shares[2] = y3;
                    b
                })
                .collect();

            let ya_packed = pack_elements(true, &ya);
            let yb_packed = pack_elements(true, &yb_claim);
            let context = eq_fs_context(
                &ca.hash(),
                &cb.hash(),
                Mode::ZkBoo,
                rounds,
                &ya_packed,
                &yb_packed,
            );
            let ba: Vec<IterationBroadcast> = doctored.iter().map(|b| b[0].clone()).collect();
            let bb: Vec<IterationBroadcast> = doctored.iter().map(|b| b[1].clone()).collect();
            let challenge = eq_derive_challenge(&context, true, &ba, &bb);

            let records: Vec<EqIterationRecord> = doctored
                .into_iter()
                .zip(iterations.iter())
                .zip(&challenge)
                .map(|((broadcasts, (_, artifacts)), &trit)| {
                    assemble_eq_record(&ca, &cb, Mode::ZkBoo, broadcasts, artifacts, trit)
                })
                .collect();
            let forged = EqProof {
                mode: Mode::ZkBoo,
                rounds,
                circuit_hashes: [ca.hash(), cb.hash()],
                field_modulus: 2,
                input_count: 3,
                mul_counts: [ca.mul_count() as u32, cb.mul_count() as u32],
                statements: [ya.clone(), yb_claim.clone()],
                challenge: challenge.clone(),
                iterations: records,
            };
            match eq_verify(&ca, &ya, &cb, &yb_claim, &forged) {
                Ok(()) => {
                    accepted += 1;
                    // Survival requires player 3 hidden in every iteration.
                    assert!(challenge.iter().all(|&t| t == 1));
                }
                Err(VerifyError::OutputMismatch { .. }) => {}
                Err(e) => panic!("unexpected rejection path: {e}"),
            }
        }
        let rate = f64::from(accepted) / trials as f64;
        let bound = (2.0f64 / 3.0).powi(rounds as i32);
        assert!(rate < bound, "acceptance rate {rate} exceeds soundness bound {bound}");
        assert!(accepted > 0, "expected a few lucky forgeries at (1/3)^3 per trial");
    }

    #[test]
    fn serialization_roundtrip_and_integrity() {
        let (ca, cb) = (circ_a_gf97(), circ_b_gf97());
        for mode in [Mode::ZkBoo, Mode::ZkBpp] {
            let (ya, yb, proof) = prove_pair(&ca, &cb, &[7, 11], 12, mode, 33);
            let bytes = proof.serialize();
            let back = EqProof::deserialize(&bytes).unwrap();
            assert_eq!(back, proof);
            eq_verify(&ca, &ya, &cb, &yb, &back).unwrap();

            let (_, _, again) = prove_pair(&ca, &cb, &[7, 11], 12, mode, 33);
            assert_eq!(again.serialize(), bytes);

            let mut flip = bytes.clone();
            let last = flip.len() - 1;
            flip[last] ^= 1;
            assert_eq!(EqProof::deserialize(&flip), Err(DecodeError::TrailingHashMismatch));

            assert_eq!(EqProof::deserialize(&[]), Err(DecodeError::MagicMismatch));
            let mut vers = bytes.clone();
            vers[4] = 7;
            assert_eq!(EqProof::deserialize(&vers), Err(DecodeError::VersionMismatch(7)));
            assert!(EqProof::deserialize(&bytes[..bytes.len() - 40]).is_err());
        }
    }
}
