//! Adversarial and statistical instrumentation for exercising the proof
//! system: seeded random circuits, a scripted cheating prover that walks the
//! soundness boundary, a byte-mutation engine for serialized artifacts, and
//! a witness-free transcript simulator for measuring the privacy of opened
//! views. Everything here is deterministic given its seeds.

use crate::circuit::{BitRef, Circuit, CircuitBuilder};
use crate::codec::{pack_elements, unpack_elements};
use crate::decomposition::Tape;
use crate::field::Field;
use crate::zkboo::{
    assemble_record, commit_view, derive_challenge, fs_context, run_iteration,
    IterationBroadcast, IterationSecrets, Mode, Opening, ProofBundle,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Random GF(2) circuit with at most `max_gates` gates and 2–8 inputs.
/// Output is the last emitted gate's wire, so the whole body is live.
pub fn random_circuit(rng: &mut impl RngCore, max_gates: usize) -> Circuit {
    assert!(max_gates >= 1);
    let input_count = 2 + rng.next_u32() % 7;
    let mut b = CircuitBuilder::new(Field::BINARY, input_count);
    let mut pool: Vec<BitRef> = (0..input_count).map(|i| b.input(i)).collect();
    let want = 1 + rng.next_u32() as usize % max_gates;
    let mut last_gate_wire = None;
    while b.gate_count() < want {
        let x = pool[rng.next_u32() as usize % pool.len()];
        let y = pool[rng.next_u32() as usize % pool.len()];
        let before = b.gate_count();
        let w = match rng.next_u32() % 4 {
            0 => b.xor(x, y),
            1 => b.and(x, y),
            2 => b.not(x),
            _ => b.add(x, BitRef::Const(u64::from(rng.next_u32() & 1))),
        };
        // The builder folds degenerate ops; only real gates join the pool.
        if b.gate_count() > before {
            pool.push(w);
            last_gate_wire = Some(w);
        }
    }
    b.finish(&[last_gate_wire.expect("loop emitted at least one gate")])
}

/// Like [`random_circuit`] but guaranteed to end in a MUL gate that is the
/// sole output — the shape [`cheat_prove`] needs a lie to hide in.
pub fn random_cheatable_circuit(rng: &mut impl RngCore, max_gates: usize) -> Circuit {
    assert!(max_gates >= 2);
    let input_count = 2 + rng.next_u32() % 7;
    let mut b = CircuitBuilder::new(Field::BINARY, input_count);
    let mut pool: Vec<u32> = (0..input_count).collect();
    let want = 1 + rng.next_u32() as usize % (max_gates - 1);
    while b.gate_count() < want {
        let x = BitRef::Wire(pool[rng.next_u32() as usize % pool.len()]);
        let y = BitRef::Wire(pool[rng.next_u32() as usize % pool.len()]);
        let before = b.gate_count();
        let w = match rng.next_u32() % 3 {
            0 => b.xor(x, y),
            1 => b.and(x, y),
            _ => b.not(x),
        };
        if b.gate_count() > before {
            let BitRef::Wire(w) = w else { unreachable!() };
            pool.push(w);
        }
    }
    // Final AND of two distinct wires always emits a fresh MUL gate.
    let a = pool[rng.next_u32() as usize % pool.len()];
    let mut bw = pool[rng.next_u32() as usize % pool.len()];
    if bw == a {
        bw = pool.iter().copied().find(|&w| w != a).expect("two inputs exist");
    }
    let out = b.and(BitRef::Wire(a), BitRef::Wire(bw));
    b.finish(&[out])
}

/// Bitwise equality comparator over two `bits`-wide inputs: output 1 iff
/// `a == b`. Inputs are laid out as `a₀..a_{bits−1}, b₀..b_{bits−1}`; the
/// AND-fold makes the final gate a MUL, so the circuit is also cheatable.
pub fn comparator_circuit(bits: u32) -> Circuit {
    assert!(bits >= 2);
    let mut b = CircuitBuilder::new(Field::BINARY, 2 * bits);
    let mut acc: Option<BitRef> = None;
    for i in 0..bits {
        let (ai, bi) = (b.input(i), b.input(bits + i));
        let diff = b.xor(ai, bi);
        let eq = b.not(diff);
        acc = Some(match acc {
            None => eq,
            Some(p) => b.and(p, eq),
        });
    }
    b.finish(&[acc.expect("bits >= 2")])
}

/// Scripted cheating prover for a false statement `truth + 1`.
///
/// The cheat flips the final MUL wire in player 3's committed view and lifts
/// its broadcast output share to match, so the shares recombine to the false
/// statement. The flipped wire is the last gate's output and feeds nothing,
/// so replaying the pair (2,3) never touches it and the pair (1,2) is fully
/// honest — only the pair (3,1) recomputes the flipped wire and catches the
/// lie. With challenge trits uniform on {1,2,3}, each iteration accepts with
/// probability exactly 2/3, the proof with `(2/3)^rounds`.
///
/// Requires the shape [`random_cheatable_circuit`] produces: single output,
/// written by the last gate, which is a MUL.
pub fn cheat_prove(
    circuit: &Circuit,
    witness: &[u64],
    rounds: u32,
    mode: Mode,
    rng_seed: u64,
) -> (Vec<u64>, ProofBundle) {
    let field = circuit.field();
    let binary = field.is_binary();
    let last = circuit.gates().last().expect("circuit has gates");
    assert!(
        circuit.output_wires() == [last.out] && last.is_mul(),
        "cheat needs a lone MUL output as the last gate"
    );

    let truth = circuit.evaluate(witness).expect("witness fits circuit");
    let statement = vec![field.add(truth[0], 1)];

    let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
    let mut broadcasts = Vec::with_capacity(rounds as usize);
    let mut artifact_sets = Vec::with_capacity(rounds as usize);
    for _ in 0..rounds {
        let secrets = IterationSecrets::from_rng(&mut rng);
        let (mut broadcast, mut artifacts) =
            run_iteration(circuit, witness, &secrets).expect("honest run");
        let mut wires = unpack_elements(binary, &artifacts[2].mul_wires_packed, circuit.mul_count())
            .expect("own packing");
        let lifted = field.add(*wires.last().unwrap(), 1);
        *wires.last_mut().unwrap() = lifted;
        artifacts[2].mul_wires_packed = pack_elements(binary, &wires);
        artifacts[2].commitment = commit_view(
            &artifacts[2].randomizer,
            &artifacts[2].seed,
            &artifacts[2].input_share_packed,
            &artifacts[2].mul_wires_packed,
        );
        broadcast.output_shares[2] = vec![lifted];
        broadcast.commitments[2] = artifacts[2].commitment;
        broadcasts.push(broadcast);
        artifact_sets.push(artifacts);
    }

    let context = fs_context(
        &circuit.hash(),
        mode,
        rounds,
        &pack_elements(binary, &statement),
    );
    let challenge = derive_challenge(&context, binary, &broadcasts);
    let iterations = broadcasts
        .into_iter()
        .zip(&artifact_sets)
        .zip(&challenge)
        .map(|((b, a), &trit)| assemble_record(circuit, mode, b, a, trit))
        .collect();
    let bundle = ProofBundle {
        mode,
        rounds,
        circuit_hash: circuit.hash(),
        field_modulus: field.modulus(),
        input_count: circuit.input_count() as u32,
        mul_count: circuit.mul_count() as u32,
        statement: statement.clone(),
        challenge,
        iterations,
    };
    (statement, bundle)
}

/// Whether [`cheat_prove`]'s output will verify: true iff no challenge trit
/// opens the inconsistent pair (3,1).
pub fn cheat_survives(challenge: &[u8]) -> bool {
    challenge.iter().all(|&t| t != 3)
}

/// One random structural mutation of a byte string: bit flip, byte
/// overwrite, deletion, duplication, truncation, or extension. Always
/// returns something different from the input.
pub fn mutate_bytes(bytes: &[u8], rng: &mut impl RngCore) -> Vec<u8> {
    loop {
        let mut out = bytes.to_vec();
        match rng.next_u32() % 6 {
            0 if !out.is_empty() => {
                let i = rng.next_u32() as usize % out.len();
                out[i] ^= 1 << (rng.next_u32() % 8);
            }
            1 if !out.is_empty() => {
                let i = rng.next_u32() as usize % out.len();
                out[i] = rng.next_u32() as u8;
            }
            2 if out.len() >= 2 => {
                let keep = 1 + rng.next_u32() as usize % (out.len() - 1);
                out.truncate(keep);
            }
            3 => {
                for _ in 0..1 + rng.next_u32() % 16 {
                    out.push(rng.next_u32() as u8);
                }
            }
            4 if !out.is_empty() => {
                let i = rng.next_u32() as usize % out.len();
                out.remove(i);
            }
            5 if !out.is_empty() => {
                let i = rng.next_u32() as usize % out.len();
                let b = out[i];
                out.insert(i, b);
            }
            _ => continue,
        }
        if out != bytes {
            return out;
        }
    }
}

/// Canonical bytes of what a verifier learns from one opened iteration: all
/// broadcast output shares plus both openings' view data. Commitment digests
/// and randomizers are omitted — they are hashes and fresh randomness.
fn pair_observable(binary: bool, broadcast: &IterationBroadcast, openings: &[Opening; 2]) -> Vec<u8> {
    let mut out = Vec::new();
    for y in &broadcast.output_shares {
        out.extend_from_slice(&pack_elements(binary, y));
    }
    for o in openings {
        out.push(o.player);
        if let Some(t) = &o.expanded_tape {
            out.extend_from_slice(t);
        }
        if let Some(s) = &o.input_share {
            out.extend_from_slice(s);
        }
        out.extend_from_slice(&o.mul_wires);
    }
    out
}

/// Draws one honest opened-pair observation for challenge trit `trit`.
pub fn sample_opened_pair(
    circuit: &Circuit,
    witness: &[u64],
    trit: u8,
    rng: &mut impl RngCore,
) -> Vec<u8> {
    let secrets = IterationSecrets::from_rng(rng);
    let (broadcast, artifacts) = run_iteration(circuit, witness, &secrets).expect("honest run");
    let record = assemble_record(circuit, Mode::ZkBpp, broadcast, &artifacts, trit);
    pair_observable(circuit.field().is_binary(), &record.broadcast, &record.openings)
}

/// Draws one opened-pair observation **without any witness**: the
/// decomposition runs on a random witness and the hidden player's broadcast
/// share is patched to make the shares recombine to `statement`. Because any
/// two views are independent of the witness and the hidden share always
/// equals `statement` minus the opened shares, this distribution coincides
/// exactly with the honest one — the 2-privacy simulator.
pub fn simulate_opened_pair(
    circuit: &Circuit,
    statement: &[u64],
    trit: u8,
    rng: &mut impl RngCore,
) -> Vec<u8> {
    let field = circuit.field();
    let mut seed = [0u8; 16];
    rng.fill_bytes(&mut seed);
    let fake_witness = Tape::from_seed(seed).elements(field, circuit.input_count());
    let secrets = IterationSecrets::from_rng(rng);
    let (mut broadcast, artifacts) =
        run_iteration(circuit, &fake_witness, &secrets).expect("any witness runs");
    let hidden = (trit as usize + 1) % 3;
    let opened_sum = field.add_vec(
        &broadcast.output_shares[trit as usize - 1],
        &broadcast.output_shares[trit as usize % 3],
    );
    broadcast.output_shares[hidden] = field.sub_vec(statement, &opened_sum);
    let record = assemble_record(circuit, Mode::ZkBpp, broadcast, &artifacts, trit);
    pair_observable(field.is_binary(), &record.broadcast, &record.openings)
}

/// Total variation distance between two (unnormalized) histograms.
pub fn total_variation(a: &[u64], b: &[u64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let sa: u64 = a.iter().sum();
    let sb: u64 = b.iter().sum();
    assert!(sa > 0 && sb > 0);
    0.5 * a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x as f64 / sa as f64 - y as f64 / sb as f64).abs())
        .sum::<f64>()
}
