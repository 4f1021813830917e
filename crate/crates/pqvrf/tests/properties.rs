//! Cross-module property tests: decomposition correctness over random
//! circuits, proof round-trips in both modes, robustness of the wire format
//! against byte mutations, linearity of MUL-free circuits, and the
//! statistics of the challenge stream.

use pqvrf::circuit::{BitRef, Circuit, CircuitBuilder};
use pqvrf::decomposition::{rec, reconstruct_wire_transcript, run_decomposition, share, Tape};
use pqvrf::field::Field;
use pqvrf::stats::chi_square_uniform;
use pqvrf::testkit::{mutate_bytes, random_cheatable_circuit, random_circuit};
use pqvrf::zkboo::{derive_challenge_from_transcript, prove, verify, Mode, ProofBundle};
use proptest::prelude::*;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::sync::OnceLock;

fn tapes_from(rng: &mut ChaCha20Rng) -> [Tape; 3] {
    std::array::from_fn(|_| {
        let mut seed = [0u8; 16];
        rng.fill_bytes(&mut seed);
        Tape::from_seed(seed)
    })
}

fn random_witness(rng: &mut ChaCha20Rng, field: Field, len: usize) -> Vec<u64> {
    (0..len)
        .map(|_| u64::from(rng.next_u32()) % field.modulus())
        .collect()
}

proptest! {
    /// Output shares always recombine to the plain evaluation, and the
    /// summed per-wire transcript matches it wire for wire.
    #[test]
    fn decomposition_recombines_on_random_circuits(seed in any::<u64>()) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let circuit = random_circuit(&mut rng, 64);
        let witness = random_witness(&mut rng, circuit.field(), circuit.input_count());
        let clear = circuit.evaluate(&witness).unwrap();
        let tapes = tapes_from(&mut rng);
        let run = run_decomposition(&circuit, &witness, &tapes).unwrap();
        prop_assert_eq!(rec(circuit.field(), &run.output_shares), clear);
        prop_assert!(reconstruct_wire_transcript(&circuit, &run).is_ok());
    }

    /// 256-bit witness splits XOR back together bit for bit.
    #[test]
    fn shares_recombine_bitwise(bits in proptest::collection::vec(0u64..2, 256), seed in any::<u64>()) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let tapes = tapes_from(&mut rng);
        let shares = share(Field::BINARY, &bits, &tapes);
        for i in 0..bits.len() {
            let sum = shares[0][i] ^ shares[1][i] ^ shares[2][i];
            prop_assert_eq!(sum, bits[i]);
        }
    }

    /// prove → verify → serialize → deserialize → verify, both modes.
    #[test]
    fn proofs_round_trip_through_bytes(seed in any::<u64>(), rounds in 1u32..4, compressed in any::<bool>()) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let circuit = random_cheatable_circuit(&mut rng, 32);
        let witness = random_witness(&mut rng, circuit.field(), circuit.input_count());
        let statement = circuit.evaluate(&witness).unwrap();
        let mode = if compressed { Mode::ZkBpp } else { Mode::ZkBoo };
        let bundle = prove(&circuit, &statement, &witness, rounds, mode, seed).unwrap();
        prop_assert!(verify(&circuit, &statement, &bundle).is_ok());
        let bytes = bundle.serialize();
        let back = ProofBundle::deserialize(&bytes).unwrap();
        prop_assert_eq!(&back, &bundle);
        prop_assert!(verify(&circuit, &statement, &back).is_ok());
    }

    /// Any random structural mutation of the serialized proof is rejected at
    /// decode time — the trailing digest and strict length accounting leave
    /// no silent corruption.
    #[test]
    fn mutated_proof_bytes_never_decode(seed in any::<u64>()) {
        static BYTES: OnceLock<Vec<u8>> = OnceLock::new();
        let bytes = BYTES.get_or_init(|| {
            let mut rng = ChaCha20Rng::seed_from_u64(40);
            let circuit = random_cheatable_circuit(&mut rng, 24);
            let witness = random_witness(&mut rng, circuit.field(), circuit.input_count());
            let statement = circuit.evaluate(&witness).unwrap();
            prove(&circuit, &statement, &witness, 2, Mode::ZkBpp, 1).unwrap().serialize()
        });
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        for _ in 0..8 {
            let mutant = mutate_bytes(bytes, &mut rng);
            prop_assert!(ProofBundle::deserialize(&mutant).is_err());
        }
    }

    /// Circuits of only ADD and MUL_CONST gates compute linear maps:
    /// f(a + b) = f(a) + f(b).
    #[test]
    fn mul_free_circuits_are_additive(seed in any::<u64>()) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let circuit = random_linear_circuit(&mut rng, false);
        let field = circuit.field();
        let a = random_witness(&mut rng, field, circuit.input_count());
        let b = random_witness(&mut rng, field, circuit.input_count());
        let sum = field.add_vec(&a, &b);
        let lhs = circuit.evaluate(&sum).unwrap();
        let rhs = field.add_vec(&circuit.evaluate(&a).unwrap(), &circuit.evaluate(&b).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    /// Adding ADD_CONST gates makes the map affine instead; the identity
    /// becomes f(a + b) = f(a) + f(b) − f(0).
    #[test]
    fn constant_offsets_shift_to_affine(seed in any::<u64>()) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let circuit = random_linear_circuit(&mut rng, true);
        let field = circuit.field();
        let a = random_witness(&mut rng, field, circuit.input_count());
        let b = random_witness(&mut rng, field, circuit.input_count());
        let zero = vec![0u64; circuit.input_count()];
        let sum = field.add_vec(&a, &b);
        let lhs = circuit.evaluate(&sum).unwrap();
        let rhs = field.sub_vec(
            &field.add_vec(&circuit.evaluate(&a).unwrap(), &circuit.evaluate(&b).unwrap()),
            &circuit.evaluate(&zero).unwrap(),
        );
        prop_assert_eq!(lhs, rhs);
    }
}

/// Random GF(97) circuit of ADD and MUL_CONST gates; with `with_offsets`,
/// ADD_CONST gates join the mix.
fn random_linear_circuit(rng: &mut ChaCha20Rng, with_offsets: bool) -> Circuit {
    let field = Field::new(97).unwrap();
    let inputs = 2 + rng.next_u32() % 5;
    let mut b = CircuitBuilder::new(field, inputs);
    let mut pool: Vec<BitRef> = (0..inputs).map(|i| b.input(i)).collect();
    let kinds = if with_offsets { 3 } else { 2 };
    for _ in 0..1 + rng.next_u32() % 30 {
        let x = pool[rng.next_u32() as usize % pool.len()];
        let y = pool[rng.next_u32() as usize % pool.len()];
        let w = match rng.next_u32() % kinds {
            0 => b.add(x, y),
            1 => b.mul(x, BitRef::Const(2 + u64::from(rng.next_u32()) % 95)),
            _ => b.add(x, BitRef::Const(1 + u64::from(rng.next_u32()) % 96)),
        };
        if matches!(w, BitRef::Wire(_)) {
            pool.push(w);
        }
    }
    let out = *pool.last().unwrap();
    b.finish(&[out])
}

/// Trit frequencies over 10⁵ independent derivations: each within 3σ of
/// 1/3, and the histogram passes a chi-square test at p > 0.001.
#[test]
fn challenge_trits_are_uniform() {
    let derivations = 100_000u32;
    let mut counts = [0u64; 3];
    for i in 0..derivations {
        let trit = derive_challenge_from_transcript(b"trit-census", &i.to_le_bytes(), 1)[0];
        counts[usize::from(trit) - 1] += 1;
    }
    let (stat, p) = chi_square_uniform(&counts);
    assert!(p > 0.001, "chi-square statistic {stat}, p = {p}");
    let expected = f64::from(derivations) / 3.0;
    let sigma = (f64::from(derivations) * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
    for (i, &c) in counts.iter().enumerate() {
        assert!(
            (c as f64 - expected).abs() <= 3.0 * sigma,
            "trit {} count {c} outside {expected} ± {}",
            i + 1,
            3.0 * sigma
        );
    }
}
