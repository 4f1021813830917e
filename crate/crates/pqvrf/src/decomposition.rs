//! Linear (2,3)-decomposition of circuit evaluation.
//!
//! A witness `w` is split into three additive shares, and three simulated
//! players evaluate the circuit on their shares so that the wire values of
//! any single player look uniformly random, the wire values of any *two*
//! players reveal nothing about the witness beyond the public output, and the
//! three per-wire values always sum to the cleartext wire value.
//!
//! Players are indexed 1, 2, 3 with wraparound (player 4 is player 1). Each
//! player `j` owns a random tape expanded from a 128-bit seed; the first `m`
//! tape elements provide input shares for players 1 and 2 (player 3 takes
//! `w - w1 - w2`), and every MUL gate consumes one correction element per
//! player starting at stream offset `m`. Gate rules:
//!
//! * ADD: `w_c = w_a + w_b` componentwise per player.
//! * ADDC (`+ δ`): only player 1 adds `δ`; the others copy the share.
//! * MULC (`· δ`): every player multiplies its share by `δ`.
//! * MUL: `w_c^(j) = w_a^(j) w_b^(j) + w_a^(j+1) w_b^(j) + w_a^(j) w_b^(j+1)
//!   + R_j(c) - R_{j+1}(c)` where `R_j(c)` is player `j`'s correction element
//!   for this gate. Summing over `j` telescopes the corrections away and
//!   expands the full product.

use crate::circuit::{Circuit, CircuitError, Gate, GateOp};
use crate::field::Field;
use crate::hashing::TAG_TAPE;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum DecompositionError {
    #[error("player index {0} is not in 1..=3")]
    BadPlayer(u8),
    #[error("gate index {0} is out of range")]
    BadGateIndex(usize),
    #[error("view is missing wire {0}")]
    MissingWire(u32),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// First mismatching wire found while checking a transcript or a replay.
#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum TranscriptError {
    #[error("wire {wire}: share sum {got} does not match cleartext value {expected}")]
    WireMismatch { wire: u32, expected: u64, got: u64 },
    #[error("player {player} recorded {got} for wire {wire}, update rule gives {expected}")]
    RecordedWireMismatch { player: u8, wire: u32, expected: u64, got: u64 },
    #[error("mul wire list has length {got}, circuit has {expected} MUL gates")]
    MulWireCount { expected: usize, got: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// A player's random tape: a 128-bit seed expanded on demand into field
/// elements through a counter-mode hash stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tape {
    seed: [u8; 16],
}

impl Tape {
    pub fn from_seed(seed: [u8; 16]) -> Tape {
        Tape { seed }
    }

    pub fn seed(&self) -> &[u8; 16] {
        &self.seed
    }

    fn stream_bytes(&self, nbytes: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(nbytes.div_ceil(32) * 32);
        let mut counter = 0u64;
        while out.len() < nbytes {
            let mut h = Sha256::new();
            h.update([TAG_TAPE]);
            h.update(self.seed);
            h.update(counter.to_le_bytes());
            out.extend_from_slice(&h.finalize());
            counter += 1;
        }
        out.truncate(nbytes);
        out
    }

    /// The first `count` elements of this tape's stream over `field`. Binary
    /// tapes yield one bit per element (LSB-first within each stream byte);
    /// prime-field tapes consume eight stream bytes per element.
    pub fn elements(&self, field: Field, count: usize) -> Vec<u64> {
        if field.is_binary() {
            let bytes = self.stream_bytes(count.div_ceil(8));
            (0..count)
                .map(|i| u64::from((bytes[i / 8] >> (i % 8)) & 1))
                .collect()
        } else {
            let bytes = self.stream_bytes(count * 8);
            bytes
                .chunks_exact(8)
                .map(|c| field.reduce(u64::from_le_bytes(c.try_into().unwrap())))
                .collect()
        }
    }
}

/// One player's complete record of a run: its input share and the value of
/// every gate output wire it computed, in gate order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct View {
    pub input_share: Vec<u64>,
    pub wires: Vec<u64>,
}

impl View {
    /// Value of wire `w` given the circuit's input count, if recorded.
    pub fn wire(&self, input_count: usize, w: u32) -> Option<u64> {
        let w = w as usize;
        if w < input_count {
            self.input_share.get(w).copied()
        } else {
            self.wires.get(w - input_count).copied()
        }
    }

    /// The MUL-gate output values in gate order; together with the input
    /// share this is the only data that needs to travel, since linear wires
    /// are recomputable.
    pub fn mul_wires(&self, circuit: &Circuit) -> Vec<u64> {
        circuit
            .gates()
            .iter()
            .enumerate()
            .filter(|(_, g)| g.is_mul())
            .map(|(i, _)| self.wires[i])
            .collect()
    }

    /// This player's share of the circuit output.
    pub fn output_share(&self, circuit: &Circuit) -> Result<Vec<u64>, DecompositionError> {
        circuit
            .output_wires()
            .iter()
            .map(|&o| {
                self.wire(circuit.input_count(), o)
                    .ok_or(DecompositionError::MissingWire(o))
            })
            .collect()
    }
}

/// The full three-player simulation of one circuit evaluation.
#[derive(Debug, Clone)]
pub struct DecompositionRun {
    pub views: [View; 3],
    pub output_shares: [Vec<u64>; 3],
}

/// Splits `witness` into three additive shares: players 1 and 2 read theirs
/// from their tapes, player 3 takes the remainder `w - w1 - w2`.
pub fn share(field: Field, witness: &[u64], tapes: &[Tape; 3]) -> [Vec<u64>; 3] {
    let m = witness.len();
    let w1 = tapes[0].elements(field, m);
    let w2 = tapes[1].elements(field, m);
    let w3 = field.sub_vec(&field.sub_vec(witness, &w1), &w2);
    [w1, w2, w3]
}

/// Recombines shares componentwise; the inverse of [`share`].
pub fn rec(field: Field, shares: &[Vec<u64>; 3]) -> Vec<u64> {
    field.add_vec(&field.add_vec(&shares[0], &shares[1]), &shares[2])
}

/// The MUL-gate share rule for one player.
#[inline]
fn mul_share(field: Field, a_j: u64, b_j: u64, a_j1: u64, b_j1: u64, r_j: u64, r_j1: u64) -> u64 {
    let own = field.mul(a_j, b_j);
    let cross = field.add(field.mul(a_j1, b_j), field.mul(a_j, b_j1));
    field.add(field.add(own, cross), field.sub(r_j, r_j1))
}

/// The linear-gate share rule for one player (`player` is 1-based).
#[inline]
fn linear_share(field: Field, op: &GateOp, player: u8, in_j: u64, in_b_j: u64) -> u64 {
    match *op {
        GateOp::Add { .. } => field.add(in_j, in_b_j),
        GateOp::AddConst { c, .. } => {
            if player == 1 {
                field.add(in_j, c)
            } else {
                in_j
            }
        }
        GateOp::MulConst { c, .. } => field.mul(in_j, c),
        GateOp::Mul { .. } => unreachable!("MUL handled by mul_share"),
    }
}

/// Runs the three-player simulation for the whole circuit. Players 1 and 2
/// read their input shares off their tape prefixes; player 3 takes the
/// remainder.
pub fn run_decomposition(
    circuit: &Circuit,
    witness: &[u64],
    tapes: &[Tape; 3],
) -> Result<DecompositionRun, DecompositionError> {
    circuit.validate_input(witness)?;
    let field = circuit.field();
    let m = circuit.input_count();
    let w1 = tapes[0].elements(field, m);
    let w2 = tapes[1].elements(field, m);
    let w3 = field.sub_vec(&field.sub_vec(witness, &w1), &w2);
    run_decomposition_with_shares(circuit, &[w1, w2, w3], tapes)
}

/// The same simulation with caller-supplied input shares. The tapes then feed
/// only the MUL correction elements, still read at stream offset `m`; this is
/// the building block for running several circuits over one shared witness
/// split.
pub fn run_decomposition_with_shares(
    circuit: &Circuit,
    input_shares: &[Vec<u64>; 3],
    tapes: &[Tape; 3],
) -> Result<DecompositionRun, DecompositionError> {
    for s in input_shares {
        circuit.validate_input(s)?;
    }
    let field = circuit.field();
    let m = circuit.input_count();
    let stream_len = m + circuit.mul_count();
    let streams: Vec<Vec<u64>> = tapes.iter().map(|t| t.elements(field, stream_len)).collect();

    let mut wires: Vec<Vec<u64>> = input_shares
        .iter()
        .map(|s| {
            let mut v = Vec::with_capacity(circuit.wire_count());
            v.extend_from_slice(s);
            v
        })
        .collect();

    let mut mul_idx = 0usize;
    for gate in circuit.gates() {
        match gate.op {
            GateOp::Mul { a, b } => {
                let (a, b) = (a as usize, b as usize);
                let corr = m + mul_idx;
                let mut new = [0u64; 3];
                for j in 0..3 {
                    let jn = (j + 1) % 3;
                    new[j] = mul_share(
                        field,
                        wires[j][a],
                        wires[j][b],
                        wires[jn][a],
                        wires[jn][b],
                        streams[j][corr],
                        streams[jn][corr],
                    );
                }
                for j in 0..3 {
                    wires[j].push(new[j]);
                }
                mul_idx += 1;
            }
            GateOp::Add { a, b } => {
                for w in wires.iter_mut() {
                    let v = field.add(w[a as usize], w[b as usize]);
                    w.push(v);
                }
            }
            ref op @ (GateOp::AddConst { a, .. } | GateOp::MulConst { a, .. }) => {
                for (j, w) in wires.iter_mut().enumerate() {
                    let v = linear_share(field, op, j as u8 + 1, w[a as usize], 0);
                    w.push(v);
                }
            }
        }
    }

    let views: [View; 3] = std::array::from_fn(|j| View {
        input_share: input_shares[j].clone(),
        wires: wires[j][m..].to_vec(),
    });
    let output_shares: [Vec<u64>; 3] = std::array::from_fn(|j| {
        circuit
            .output_wires()
            .iter()
            .map(|&o| wires[j][o as usize])
            .collect()
    });
    Ok(DecompositionRun { views, output_shares })
}

/// Computes the output wire value of one gate for one player, from the two
/// adjacent views and tapes. This is the single-gate reference rule; bulk
/// paths inline the same arithmetic. `player` is 1-based with wraparound, so
/// `view_j1`/`tape_j1` belong to player `player % 3 + 1`.
pub fn update_gate(
    circuit: &Circuit,
    gate_index: usize,
    view_j: &View,
    view_j1: &View,
    tape_j: &Tape,
    tape_j1: &Tape,
    player: u8,
) -> Result<u64, DecompositionError> {
    if !(1..=3).contains(&player) {
        return Err(DecompositionError::BadPlayer(player));
    }
    let gate: &Gate = circuit
        .gates()
        .get(gate_index)
        .ok_or(DecompositionError::BadGateIndex(gate_index))?;
    let field = circuit.field();
    let m = circuit.input_count();
    let value = |view: &View, w: u32| view.wire(m, w).ok_or(DecompositionError::MissingWire(w));
    match gate.op {
        GateOp::Mul { a, b } => {
            let mul_idx = circuit.gates()[..gate_index]
                .iter()
                .filter(|g| g.is_mul())
                .count();
            let corr = m + mul_idx;
            let r_j = tape_j.elements(field, corr + 1)[corr];
            let r_j1 = tape_j1.elements(field, corr + 1)[corr];
            Ok(mul_share(
                field,
                value(view_j, a)?,
                value(view_j, b)?,
                value(view_j1, a)?,
                value(view_j1, b)?,
                r_j,
                r_j1,
            ))
        }
        GateOp::Add { a, b } => Ok(field.add(value(view_j, a)?, value(view_j, b)?)),
        ref op @ (GateOp::AddConst { a, .. } | GateOp::MulConst { a, .. }) => {
            Ok(linear_share(field, op, player, value(view_j, a)?, 0))
        }
    }
}

/// Replay of an opened pair of players by a verifier.
#[derive(Debug)]
pub struct PairReplay {
    pub view_e: View,
    pub view_e1: View,
    pub out_e: Vec<u64>,
    pub out_e1: Vec<u64>,
}

/// Rebuilds the views of players `e` and `e+1` from their input shares,
/// transmitted MUL wires, and correction streams. Player `e`'s MUL wires are
/// recomputed through the update rule and must match the transmitted values;
/// player `e+1`'s are taken as transmitted (they are checked when that player
/// is the first of an opened pair under a different challenge). Linear wires
/// of both players are recomputed outright.
///
/// `corrections_*` are the correction elements only (stream offset `m`
/// already applied), one per MUL gate.
pub fn replay_pair(
    circuit: &Circuit,
    player_e: u8,
    share_e: &[u64],
    share_e1: &[u64],
    mul_e: &[u64],
    mul_e1: &[u64],
    corrections_e: &[u64],
    corrections_e1: &[u64],
) -> Result<PairReplay, TranscriptError> {
    let field = circuit.field();
    let m = circuit.input_count();
    let n_mul = circuit.mul_count();
    for mw in [mul_e, mul_e1] {
        if mw.len() != n_mul {
            return Err(TranscriptError::MulWireCount { expected: n_mul, got: mw.len() });
        }
    }
    circuit.validate_input(share_e)?;
    circuit.validate_input(share_e1)?;
    let e1 = player_e % 3 + 1;

    let mut wires_e = Vec::with_capacity(circuit.wire_count());
    wires_e.extend_from_slice(share_e);
    let mut wires_e1 = Vec::with_capacity(circuit.wire_count());
    wires_e1.extend_from_slice(share_e1);

    let mut mul_idx = 0usize;
    for gate in circuit.gates() {
        match gate.op {
            GateOp::Mul { a, b } => {
                let (a, b) = (a as usize, b as usize);
                let expected = mul_share(
                    field,
                    wires_e[a],
                    wires_e[b],
                    wires_e1[a],
                    wires_e1[b],
                    corrections_e[mul_idx],
                    corrections_e1[mul_idx],
                );
                if expected != mul_e[mul_idx] {
                    return Err(TranscriptError::RecordedWireMismatch {
                        player: player_e,
                        wire: gate.out,
                        expected,
                        got: mul_e[mul_idx],
                    });
                }
                wires_e.push(expected);
                wires_e1.push(mul_e1[mul_idx]);
                mul_idx += 1;
            }
            GateOp::Add { a, b } => {
                let (a, b) = (a as usize, b as usize);
                wires_e.push(field.add(wires_e[a], wires_e[b]));
                wires_e1.push(field.add(wires_e1[a], wires_e1[b]));
            }
            ref op @ (GateOp::AddConst { a, .. } | GateOp::MulConst { a, .. }) => {
                let a = a as usize;
                wires_e.push(linear_share(field, op, player_e, wires_e[a], 0));
                wires_e1.push(linear_share(field, op, e1, wires_e1[a], 0));
            }
        }
    }

    let outputs = |wires: &[u64]| -> Vec<u64> {
        circuit.output_wires().iter().map(|&o| wires[o as usize]).collect()
    };
    Ok(PairReplay {
        out_e: outputs(&wires_e),
        out_e1: outputs(&wires_e1),
        view_e: View { input_share: share_e.to_vec(), wires: wires_e[m..].to_vec() },
        view_e1: View { input_share: share_e1.to_vec(), wires: wires_e1[m..].to_vec() },
    })
}

/// Checks that the three views of a run sum, wire for wire, to the cleartext
/// evaluation of the witness they share. The witness is recovered as the sum
/// of the input shares.
pub fn reconstruct_wire_transcript(
    circuit: &Circuit,
    run: &DecompositionRun,
) -> Result<(), TranscriptError> {
    let field = circuit.field();
    let shares: [Vec<u64>; 3] = std::array::from_fn(|j| run.views[j].input_share.clone());
    let witness = rec(field, &shares);
    let plain = circuit.evaluate_wires(&witness)?;
    let m = circuit.input_count();
    for (g, _) in circuit.gates().iter().enumerate() {
        let got = run.views.iter().fold(0u64, |acc, v| field.add(acc, v.wires[g]));
        let wire = (m + g) as u32;
        let expected = plain[m + g];
        if got != expected {
            return Err(TranscriptError::WireMismatch { wire, expected, got });
        }
    }
    Ok(())
}
