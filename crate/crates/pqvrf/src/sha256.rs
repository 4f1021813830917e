//! The SHA-256 compression function, both as straight-line code and as a
//! generated GF(2) circuit.
//!
//! The circuit generator emits ADD/MUL/ADDC gates for one call of the
//! compression function: 512 block bits in, 256 digest bits out, with the
//! chaining value baked in as constants. Ripple-carry adders use the
//! single-AND full adder (`carry' = carry ^ ((a^carry) & (b^carry))`), so the
//! multiplicative size stays close to the known minimum for this function.
//!
//! Two keyed relations are derived from the same generator by fixing half of
//! the block to public constants and using a tagged chaining value:
//!
//! * `F(k, s) = compress(IV_F, k || s)` — the key commitment relation; the
//!   256 `s` bits are the only circuit inputs, `k` is baked into the gates.
//! * `H2(s, h) = compress(IV_H2, s || h)` — the output relation for a hashed
//!   message `h`; again only `s` is an input.
//!
//! Baking the public half into the circuit matters for soundness: the proved
//! relation must bind `k` (respectively `h`), and a verifier rebuilds the
//! circuit from the public values itself, so a prover cannot substitute
//! different ones. The bit layout is big-endian throughout: block bit 0 is the
//! most significant bit of the first block byte.

use crate::circuit::{BitRef, Circuit, CircuitBuilder};
use crate::codec::bytes_to_bits_msb;
use crate::field::Field;
use crate::hashing::sha256;
use std::sync::OnceLock;

/// Standard SHA-256 initial chaining value.
pub const STD_IV: [u32; 8] = [
    0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19,
];

const K: [u32; 64] = [
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2,
];

/// Chaining value for the key-commitment relation `F`.
pub fn iv_f() -> &'static [u32; 8] {
    static IV: OnceLock<[u32; 8]> = OnceLock::new();
    IV.get_or_init(|| tagged_iv(b"pqvrf/F/v1"))
}

/// Chaining value for the message-output relation `H2`.
pub fn iv_h2() -> &'static [u32; 8] {
    static IV: OnceLock<[u32; 8]> = OnceLock::new();
    IV.get_or_init(|| tagged_iv(b"pqvrf/H2/v1"))
}

/// Derives a domain-separated chaining value as the digest words of a tag.
pub fn tagged_iv(tag: &[u8]) -> [u32; 8] {
    let d = sha256(tag);
    let mut iv = [0u32; 8];
    for (i, w) in iv.iter_mut().enumerate() {
        *w = u32::from_be_bytes(d[4 * i..4 * i + 4].try_into().unwrap());
    }
    iv
}

/// One application of the SHA-256 compression function (straight-line).
pub fn compress(iv: &[u32; 8], block: &[u8; 64]) -> [u8; 32] {
    let mut w = [0u32; 64];
    for i in 0..16 {
        w[i] = u32::from_be_bytes(block[4 * i..4 * i + 4].try_into().unwrap());
    }
    for i in 16..64 {
        let s0 = w[i - 15].rotate_right(7) ^ w[i - 15].rotate_right(18) ^ (w[i - 15] >> 3);
        let s1 = w[i - 2].rotate_right(17) ^ w[i - 2].rotate_right(19) ^ (w[i - 2] >> 10);
        w[i] = w[i - 16]
            .wrapping_add(s0)
            .wrapping_add(w[i - 7])
            .wrapping_add(s1);
    }
    let [mut a, mut b, mut c, mut d, mut e, mut f, mut g, mut h] = *iv;
    for i in 0..64 {
        let big_s1 = e.rotate_right(6) ^ e.rotate_right(11) ^ e.rotate_right(25);
        let ch = (e & f) ^ (!e & g);
        let t1 = h
            .wrapping_add(big_s1)
            .wrapping_add(ch)
            .wrapping_add(K[i])
            .wrapping_add(w[i]);
        let big_s0 = a.rotate_right(2) ^ a.rotate_right(13) ^ a.rotate_right(22);
        let maj = (a & b) ^ (a & c) ^ (b & c);
        let t2 = big_s0.wrapping_add(maj);
        h = g;
        g = f;
        f = e;
        e = d.wrapping_add(t1);
        d = c;
        c = b;
        b = a;
        a = t1.wrapping_add(t2);
    }
    let out_words = [
        iv[0].wrapping_add(a),
        iv[1].wrapping_add(b),
        iv[2].wrapping_add(c),
        iv[3].wrapping_add(d),
        iv[4].wrapping_add(e),
        iv[5].wrapping_add(f),
        iv[6].wrapping_add(g),
        iv[7].wrapping_add(h),
    ];
    let mut out = [0u8; 32];
    for (i, w) in out_words.iter().enumerate() {
        out[4 * i..4 * i + 4].copy_from_slice(&w.to_be_bytes());
    }
    out
}

/// Pads a message of at most 55 bytes into a single 512-bit block, so that
/// `compress(STD_IV, pad_single_block(m))` equals full SHA-256 of `m`.
pub fn pad_single_block(message: &[u8]) -> [u8; 64] {
    assert!(message.len() <= 55, "single-block padding requires <= 55 bytes");
    let mut block = [0u8; 64];
    block[..message.len()].copy_from_slice(message);
    block[message.len()] = 0x80;
    block[56..].copy_from_slice(&((message.len() as u64) * 8).to_be_bytes());
    block
}

/// `F(k, s)`: straight-line evaluation of the key-commitment relation.
pub fn f_direct(k: &[u8; 32], s: &[u8; 32]) -> [u8; 32] {
    let mut block = [0u8; 64];
    block[..32].copy_from_slice(k);
    block[32..].copy_from_slice(s);
    compress(iv_f(), &block)
}

/// `H2(s, h)`: straight-line evaluation of the message-output relation.
pub fn h2_direct(s: &[u8; 32], h: &[u8; 32]) -> [u8; 32] {
    let mut block = [0u8; 64];
    block[..32].copy_from_slice(s);
    block[32..].copy_from_slice(h);
    compress(iv_h2(), &block)
}

/// A 32-bit word under construction, bit index = significance (0 is the LSB).
#[derive(Clone, Copy)]
struct Word([BitRef; 32]);

impl Word {
    fn constant(v: u32) -> Word {
        let mut bits = [BitRef::Const(0); 32];
        for (i, b) in bits.iter_mut().enumerate() {
            *b = BitRef::Const(u64::from((v >> i) & 1));
        }
        Word(bits)
    }

    fn rotr(&self, r: usize) -> Word {
        let mut out = [BitRef::Const(0); 32];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.0[(i + r) % 32];
        }
        Word(out)
    }

    fn shr(&self, r: usize) -> Word {
        let mut out = [BitRef::Const(0); 32];
        for (i, o) in out.iter_mut().enumerate() {
            *o = if i + r < 32 {
                self.0[i + r]
            } else {
                BitRef::Const(0)
            };
        }
        Word(out)
    }
}

fn xor_words(b: &mut CircuitBuilder, x: &Word, y: &Word) -> Word {
    let mut out = [BitRef::Const(0); 32];
    for i in 0..32 {
        out[i] = b.xor(x.0[i], y.0[i]);
    }
    Word(out)
}

/// Addition mod 2^32 with a ripple-carry adder, one AND gate per carry bit.
fn add_words(b: &mut CircuitBuilder, x: &Word, y: &Word) -> Word {
    let mut out = [BitRef::Const(0); 32];
    let mut carry = BitRef::Const(0);
    for i in 0..32 {
        let xc = b.xor(x.0[i], carry);
        out[i] = b.xor(xc, y.0[i]);
        if i < 31 {
            let yc = b.xor(y.0[i], carry);
            let t = b.and(xc, yc);
            carry = b.xor(t, carry);
        }
    }
    Word(out)
}

fn add_many(b: &mut CircuitBuilder, words: &[Word]) -> Word {
    let mut acc = words[0];
    for w in &words[1..] {
        acc = add_words(b, &acc, w);
    }
    acc
}

/// `Ch(e, f, g) = g ^ (e & (f ^ g))`.
fn ch(b: &mut CircuitBuilder, e: &Word, f: &Word, g: &Word) -> Word {
    let mut out = [BitRef::Const(0); 32];
    for i in 0..32 {
        let fg = b.xor(f.0[i], g.0[i]);
        let t = b.and(e.0[i], fg);
        out[i] = b.xor(t, g.0[i]);
    }
    Word(out)
}

/// `Maj(a, b, c) = ((a ^ c) & (b ^ c)) ^ c`.
fn maj(bld: &mut CircuitBuilder, a: &Word, b: &Word, c: &Word) -> Word {
    let mut out = [BitRef::Const(0); 32];
    for i in 0..32 {
        let ac = bld.xor(a.0[i], c.0[i]);
        let bc = bld.xor(b.0[i], c.0[i]);
        let t = bld.and(ac, bc);
        out[i] = bld.xor(t, c.0[i]);
    }
    Word(out)
}

fn big_sigma0(b: &mut CircuitBuilder, w: &Word) -> Word {
    let t = xor_words(b, &w.rotr(2), &w.rotr(13));
    xor_words(b, &t, &w.rotr(22))
}

fn big_sigma1(b: &mut CircuitBuilder, w: &Word) -> Word {
    let t = xor_words(b, &w.rotr(6), &w.rotr(11));
    xor_words(b, &t, &w.rotr(25))
}

fn small_sigma0(b: &mut CircuitBuilder, w: &Word) -> Word {
    let t = xor_words(b, &w.rotr(7), &w.rotr(18));
    xor_words(b, &t, &w.shr(3))
}

fn small_sigma1(b: &mut CircuitBuilder, w: &Word) -> Word {
    let t = xor_words(b, &w.rotr(17), &w.rotr(19));
    xor_words(b, &t, &w.shr(10))
}

/// Builds the compression-function circuit for a given chaining value.
///
/// `fixed` has one entry per block bit (big-endian layout); `Some(bit)` bakes
/// that position to a constant, `None` makes it the next circuit input wire.
/// The returned circuit has one input per `None` and 256 outputs.
pub fn build_compression_circuit(iv: &[u32; 8], fixed: &[Option<bool>; 512]) -> Circuit {
    let input_count = fixed.iter().filter(|f| f.is_none()).count() as u32;
    assert!(input_count > 0, "at least one block bit must remain an input");
    let mut b = CircuitBuilder::new(Field::BINARY, input_count);

    // Load the sixteen block words. Block bit i is bit (31 - i % 32) of word
    // i / 32; input wires are assigned in block-bit order.
    let mut w: Vec<Word> = Vec::with_capacity(64);
    let mut next_input = 0u32;
    for word_idx in 0..16 {
        let mut bits = [BitRef::Const(0); 32];
        for bit_idx in 0..32 {
            let block_bit = word_idx * 32 + bit_idx;
            let significance = 31 - bit_idx;
            bits[significance] = match fixed[block_bit] {
                Some(v) => BitRef::Const(u64::from(v)),
                None => {
                    let r = b.input(next_input);
                    next_input += 1;
                    r
                }
            };
        }
        w.push(Word(bits));
    }

    // Message schedule.
    for i in 16..64 {
        let s0 = small_sigma0(&mut b, &w[i - 15]);
        let s1 = small_sigma1(&mut b, &w[i - 2]);
        let t = add_many(&mut b, &[w[i - 16], s0, w[i - 7], s1]);
        w.push(t);
    }

    // Round function.
    let mut state: Vec<Word> = iv.iter().map(|&v| Word::constant(v)).collect();
    for i in 0..64 {
        let (a, bb, c, d, e, f, g, h) = (
            state[0], state[1], state[2], state[3], state[4], state[5], state[6], state[7],
        );
        let s1 = big_sigma1(&mut b, &e);
        let ch_w = ch(&mut b, &e, &f, &g);
        let t1 = add_many(&mut b, &[h, s1, ch_w, Word::constant(K[i]), w[i]]);
        let s0 = big_sigma0(&mut b, &a);
        let maj_w = maj(&mut b, &a, &bb, &c);
        let t2 = add_words(&mut b, &s0, &maj_w);
        state = vec![
            add_words(&mut b, &t1, &t2),
            a,
            bb,
            c,
            add_words(&mut b, &d, &t1),
            e,
            f,
            g,
        ];
    }

    // Final feed-forward addition of the chaining value.
    let mut digest_bits: Vec<BitRef> = Vec::with_capacity(256);
    for (i, s) in state.iter().enumerate() {
        let sum = add_words(&mut b, &Word::constant(iv[i]), s);
        // Emit digest bits most significant first to match byte layout.
        for bit in (0..32).rev() {
            digest_bits.push(sum.0[bit]);
        }
    }
    b.finish(&digest_bits)
}

/// The generic compression circuit: standard chaining value, all 512 block
/// bits as inputs. This is the circuit shipped as `circuits/sha256_compress.txt`.
pub fn generic_circuit() -> &'static Circuit {
    static C: OnceLock<Circuit> = OnceLock::new();
    C.get_or_init(|| build_compression_circuit(&STD_IV, &[None; 512]))
}

fn fixed_from_bytes(bytes: &[u8; 32], first_half: bool) -> [Option<bool>; 512] {
    let bits = bytes_to_bits_msb(bytes);
    let mut fixed = [None; 512];
    let offset = if first_half { 0 } else { 256 };
    for (i, &bit) in bits.iter().enumerate() {
        fixed[offset + i] = Some(bit == 1);
    }
    fixed
}

/// Circuit for `F(k, ·)`: 256 inputs (the secret `s`), `k` baked in.
pub fn f_circuit(k: &[u8; 32]) -> Circuit {
    build_compression_circuit(iv_f(), &fixed_from_bytes(k, true))
}

/// Circuit for `H2(·, h)`: 256 inputs (the secret `s`), `h` baked in.
pub fn h2_circuit(h: &[u8; 32]) -> Circuit {
    build_compression_circuit(iv_h2(), &fixed_from_bytes(h, false))
}
