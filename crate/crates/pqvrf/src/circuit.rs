//! Arithmetic circuits as flat gate lists.
//!
//! A circuit over GF(q) has `m` input wires (indices `0..m`), `n` gates, and
//! `ℓ` designated output wires. Gate `g` writes wire `m + g`, so the gate list
//! is topologically ordered by construction and every wire is written exactly
//! once. Four gate kinds exist:
//!
//! * `ADD a b out` — `out = a + b`
//! * `MUL a b out` — `out = a * b`
//! * `ADDC a c out` — `out = a + c` for a field constant `c`
//! * `MULC a c out` — `out = a * c`
//!
//! Over GF(2), ADD is XOR and MUL is AND, so boolean circuits are the `q = 2`
//! special case.
//!
//! The text format is line-oriented: a header `m ℓ n q`, a line of `ℓ` output
//! wire indices, then one gate per line. `#` starts a comment.

use crate::field::Field;
use crate::hashing;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum CircuitError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("topology violation: {0}")]
    Topology(String),
    #[error("constant {value} is out of range for field modulus {modulus}")]
    ConstantRange { value: u64, modulus: u64 },
    #[error("input length mismatch: circuit expects {expected}, got {got}")]
    InputLength { expected: usize, got: usize },
    #[error("input element {index} is not canonical for field modulus {modulus}")]
    NonCanonicalInput { index: usize, modulus: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateOp {
    Add { a: u32, b: u32 },
    Mul { a: u32, b: u32 },
    AddConst { a: u32, c: u64 },
    MulConst { a: u32, c: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gate {
    pub op: GateOp,
    pub out: u32,
}

impl Gate {
    pub fn is_mul(&self) -> bool {
        matches!(self.op, GateOp::Mul { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    field: Field,
    input_count: u32,
    outputs: Vec<u32>,
    gates: Vec<Gate>,
    mul_count: u32,
}

impl Circuit {
    /// Validates and assembles a circuit. Gate `g` must write wire
    /// `input_count + g` and may only read wires below its own.
    pub fn new(
        field: Field,
        input_count: u32,
        outputs: Vec<u32>,
        gates: Vec<Gate>,
    ) -> Result<Circuit, CircuitError> {
        if input_count == 0 {
            return Err(CircuitError::Topology("circuit has no input wires".into()));
        }
        if outputs.is_empty() {
            return Err(CircuitError::Topology("circuit has no output wires".into()));
        }
        let wire_count = input_count as u64 + gates.len() as u64;
        if wire_count > u32::MAX as u64 {
            return Err(CircuitError::Topology("wire count exceeds u32 range".into()));
        }
        let mut mul_count = 0u32;
        for (g, gate) in gates.iter().enumerate() {
            let expected_out = input_count + g as u32;
            if gate.out != expected_out {
                return Err(CircuitError::Topology(format!(
                    "gate {g} writes wire {}, expected {expected_out} (wires must be written once, in order)",
                    gate.out
                )));
            }
            let check_in = |w: u32| -> Result<(), CircuitError> {
                if w >= expected_out {
                    Err(CircuitError::Topology(format!(
                        "gate {g} reads wire {w}, which is not below its output wire {expected_out}"
                    )))
                } else {
                    Ok(())
                }
            };
            match gate.op {
                GateOp::Add { a, b } | GateOp::Mul { a, b } => {
                    check_in(a)?;
                    check_in(b)?;
                }
                GateOp::AddConst { a, c } | GateOp::MulConst { a, c } => {
                    check_in(a)?;
                    if c >= field.modulus() {
                        return Err(CircuitError::ConstantRange {
                            value: c,
                            modulus: field.modulus(),
                        });
                    }
                }
            }
            if gate.is_mul() {
                mul_count += 1;
            }
        }
        for &o in &outputs {
            if u64::from(o) >= wire_count {
                return Err(CircuitError::Topology(format!(
                    "output wire {o} does not exist (wire count {wire_count})"
                )));
            }
        }
        Ok(Circuit {
            field,
            input_count,
            outputs,
            gates,
            mul_count,
        })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn input_count(&self) -> usize {
        self.input_count as usize
    }

    pub fn output_wires(&self) -> &[u32] {
        &self.outputs
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Number of MUL gates; this is what proof size and tape length scale with.
    pub fn mul_count(&self) -> usize {
        self.mul_count as usize
    }

    pub fn wire_count(&self) -> usize {
        self.input_count as usize + self.gates.len()
    }

    /// Checks that `input` has the right length and canonical field values.
    pub fn validate_input(&self, input: &[u64]) -> Result<(), CircuitError> {
        self.check_input(input)
    }

    fn check_input(&self, input: &[u64]) -> Result<(), CircuitError> {
        if input.len() != self.input_count() {
            return Err(CircuitError::InputLength {
                expected: self.input_count(),
                got: input.len(),
            });
        }
        for (i, &v) in input.iter().enumerate() {
            if v >= self.field.modulus() {
                return Err(CircuitError::NonCanonicalInput {
                    index: i,
                    modulus: self.field.modulus(),
                });
            }
        }
        Ok(())
    }

    /// Evaluates the circuit in the clear, returning every wire value.
    pub fn evaluate_wires(&self, input: &[u64]) -> Result<Vec<u64>, CircuitError> {
        self.check_input(input)?;
        let f = self.field;
        let mut wires = Vec::with_capacity(self.wire_count());
        wires.extend_from_slice(input);
        for gate in &self.gates {
            let v = match gate.op {
                GateOp::Add { a, b } => f.add(wires[a as usize], wires[b as usize]),
                GateOp::Mul { a, b } => f.mul(wires[a as usize], wires[b as usize]),
                GateOp::AddConst { a, c } => f.add(wires[a as usize], c),
                GateOp::MulConst { a, c } => f.mul(wires[a as usize], c),
            };
            wires.push(v);
        }
        Ok(wires)
    }

    /// Evaluates the circuit and returns the `ℓ` output wire values.
    pub fn evaluate(&self, input: &[u64]) -> Result<Vec<u64>, CircuitError> {
        let wires = self.evaluate_wires(input)?;
        Ok(self.outputs.iter().map(|&o| wires[o as usize]).collect())
    }

    /// Canonical digest of the circuit structure; used to bind proofs to the
    /// exact relation they were produced for.
    pub fn hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update([hashing::TAG_CIRCUIT]);
        h.update(b"PQCIRC1");
        h.update(self.field.modulus().to_le_bytes());
        h.update(self.input_count.to_le_bytes());
        h.update((self.outputs.len() as u32).to_le_bytes());
        h.update((self.gates.len() as u32).to_le_bytes());
        for &o in &self.outputs {
            h.update(o.to_le_bytes());
        }
        for gate in &self.gates {
            let (kind, a, bc): (u8, u32, u64) = match gate.op {
                GateOp::Add { a, b } => (0, a, b.into()),
                GateOp::Mul { a, b } => (1, a, b.into()),
                GateOp::AddConst { a, c } => (2, a, c),
                GateOp::MulConst { a, c } => (3, a, c),
            };
            h.update([kind]);
            h.update(a.to_le_bytes());
            h.update(bc.to_le_bytes());
            h.update(gate.out.to_le_bytes());
        }
        h.finalize().into()
    }

    /// Hex form of [`Circuit::hash`], used as a short identifier.
    pub fn id(&self) -> String {
        hex::encode(self.hash())
    }

    /// Renders the circuit in the text format accepted by [`parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} {} {} {}",
            self.input_count,
            self.outputs.len(),
            self.gates.len(),
            self.field.modulus()
        );
        let outs: Vec<String> = self.outputs.iter().map(|o| o.to_string()).collect();
        let _ = writeln!(s, "{}", outs.join(" "));
        for gate in &self.gates {
            let line = match gate.op {
                GateOp::Add { a, b } => format!("ADD {a} {b} {}", gate.out),
                GateOp::Mul { a, b } => format!("MUL {a} {b} {}", gate.out),
                GateOp::AddConst { a, c } => format!("ADDC {a} {c} {}", gate.out),
                GateOp::MulConst { a, c } => format!("MULC {a} {c} {}", gate.out),
            };
            let _ = writeln!(s, "{line}");
        }
        s
    }
}

/// Parses the line-oriented text format. Blank lines are skipped and `#`
/// starts a comment that runs to the end of the line.
pub fn parse(text: &str) -> Result<Circuit, CircuitError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines
        .next()
        .ok_or_else(|| CircuitError::Parse { line: 0, msg: "empty circuit file".into() })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(CircuitError::Parse {
            line: hline,
            msg: format!("header must be `m l n q`, got {} fields", fields.len()),
        });
    }
    let parse_num = |line: usize, s: &str, what: &str| -> Result<u64, CircuitError> {
        s.parse::<u64>().map_err(|_| CircuitError::Parse {
            line,
            msg: format!("invalid {what}: {s:?}"),
        })
    };
    let m = parse_num(hline, fields[0], "input count")?;
    let l = parse_num(hline, fields[1], "output count")?;
    let n = parse_num(hline, fields[2], "gate count")?;
    let q = parse_num(hline, fields[3], "field modulus")?;
    let field = Field::new(q).map_err(|e| CircuitError::Parse {
        line: hline,
        msg: e.to_string(),
    })?;
    if m > u32::MAX as u64 || l > u32::MAX as u64 || n > u32::MAX as u64 {
        return Err(CircuitError::Parse {
            line: hline,
            msg: "header counts exceed u32 range".into(),
        });
    }

    let (oline, outs_str) = lines.next().ok_or_else(|| CircuitError::Parse {
        line: hline,
        msg: "missing output-wire line".into(),
    })?;
    let outputs: Vec<u32> = outs_str
        .split_whitespace()
        .map(|s| parse_num(oline, s, "output wire index").map(|v| v as u32))
        .collect::<Result<_, _>>()?;
    if outputs.len() != l as usize {
        return Err(CircuitError::Parse {
            line: oline,
            msg: format!("expected {l} output wires, got {}", outputs.len()),
        });
    }

    let mut gates = Vec::with_capacity(n as usize);
    for (gline, gate_str) in lines {
        let parts: Vec<&str> = gate_str.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(CircuitError::Parse {
                line: gline,
                msg: format!("gate line must be `KIND a b out`, got {} fields", parts.len()),
            });
        }
        let a = parse_num(gline, parts[1], "wire index")? as u32;
        let bc = parse_num(gline, parts[2], "wire index or constant")?;
        let out = parse_num(gline, parts[3], "output wire index")? as u32;
        let op = match parts[0] {
            "ADD" => {
                if bc > u32::MAX as u64 {
                    return Err(CircuitError::Parse {
                        line: gline,
                        msg: format!("wire index {bc} out of range"),
                    });
                }
                GateOp::Add { a, b: bc as u32 }
            }
            "MUL" => {
                if bc > u32::MAX as u64 {
                    return Err(CircuitError::Parse {
                        line: gline,
                        msg: format!("wire index {bc} out of range"),
                    });
                }
                GateOp::Mul { a, b: bc as u32 }
            }
            "ADDC" => GateOp::AddConst { a, c: bc },
            "MULC" => GateOp::MulConst { a, c: bc },
            other => {
                return Err(CircuitError::Parse {
                    line: gline,
                    msg: format!("unknown gate kind {other:?}"),
                })
            }
        };
        gates.push(Gate { op, out });
    }
    if gates.len() != n as usize {
        return Err(CircuitError::Parse {
            line: 0,
            msg: format!("header declares {n} gates, file contains {}", gates.len()),
        });
    }
    Circuit::new(field, m as u32, outputs, gates)
}

/// A wire-or-constant handle used while building circuits programmatically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitRef {
    Wire(u32),
    Const(u64),
}

/// Incremental circuit builder with constant folding: operations involving
/// only constants emit no gates, and identities (`x + 0`, `x * 1`, `x * 0`)
/// collapse. Over GF(2), `x + x` folds to 0 and `x * x` folds to `x`.
pub struct CircuitBuilder {
    field: Field,
    input_count: u32,
    gates: Vec<Gate>,
    zero_wire: Option<u32>,
}

impl CircuitBuilder {
    pub fn new(field: Field, input_count: u32) -> CircuitBuilder {
        assert!(input_count > 0, "builder needs at least one input wire");
        CircuitBuilder {
            field,
            input_count,
            gates: Vec::new(),
            zero_wire: None,
        }
    }

    pub fn input(&self, i: u32) -> BitRef {
        assert!(i < self.input_count);
        BitRef::Wire(i)
    }

    fn emit(&mut self, op: GateOp) -> BitRef {
        let out = self.input_count + self.gates.len() as u32;
        self.gates.push(Gate { op, out });
        BitRef::Wire(out)
    }

    pub fn add(&mut self, x: BitRef, y: BitRef) -> BitRef {
        match (x, y) {
            (BitRef::Const(a), BitRef::Const(b)) => BitRef::Const(self.field.add(a, b)),
            (BitRef::Wire(w), BitRef::Const(c)) | (BitRef::Const(c), BitRef::Wire(w)) => {
                if c == 0 {
                    BitRef::Wire(w)
                } else {
                    self.emit(GateOp::AddConst { a: w, c })
                }
            }
            (BitRef::Wire(a), BitRef::Wire(b)) => {
                if self.field.is_binary() && a == b {
                    BitRef::Const(0)
                } else {
                    self.emit(GateOp::Add { a, b })
                }
            }
        }
    }

    pub fn mul(&mut self, x: BitRef, y: BitRef) -> BitRef {
        match (x, y) {
            (BitRef::Const(a), BitRef::Const(b)) => BitRef::Const(self.field.mul(a, b)),
            (BitRef::Wire(w), BitRef::Const(c)) | (BitRef::Const(c), BitRef::Wire(w)) => match c {
                0 => BitRef::Const(0),
                1 => BitRef::Wire(w),
                _ => self.emit(GateOp::MulConst { a: w, c }),
            },
            (BitRef::Wire(a), BitRef::Wire(b)) => {
                if self.field.is_binary() && a == b {
                    BitRef::Wire(a)
                } else {
                    self.emit(GateOp::Mul { a, b })
                }
            }
        }
    }

    /// GF(2) XOR; alias for [`CircuitBuilder::add`].
    pub fn xor(&mut self, x: BitRef, y: BitRef) -> BitRef {
        debug_assert!(self.field.is_binary());
        self.add(x, y)
    }

    /// GF(2) AND; alias for [`CircuitBuilder::mul`].
    pub fn and(&mut self, x: BitRef, y: BitRef) -> BitRef {
        debug_assert!(self.field.is_binary());
        self.mul(x, y)
    }

    /// GF(2) NOT, as addition of the constant 1.
    pub fn not(&mut self, x: BitRef) -> BitRef {
        debug_assert!(self.field.is_binary());
        self.add(x, BitRef::Const(1))
    }

    /// Returns a wire that always carries the given constant, materializing it
    /// through `in0 * 0 (+ c)` if no plain wire holds it yet.
    fn materialize(&mut self, c: u64) -> u32 {
        let zero = match self.zero_wire {
            Some(w) => w,
            None => {
                let BitRef::Wire(w) = self.emit(GateOp::MulConst { a: 0, c: 0 }) else {
                    unreachable!()
                };
                self.zero_wire = Some(w);
                w
            }
        };
        if c == 0 {
            zero
        } else {
            let BitRef::Wire(w) = self.emit(GateOp::AddConst { a: zero, c }) else {
                unreachable!()
            };
            w
        }
    }

    /// Finalizes the circuit with the given output references. Constant
    /// outputs are materialized as wires so the result is a plain gate list.
    pub fn finish(mut self, outputs: &[BitRef]) -> Circuit {
        let outs: Vec<u32> = outputs
            .to_vec()
            .into_iter()
            .map(|o| match o {
                BitRef::Wire(w) => w,
                BitRef::Const(c) => self.materialize(c),
            })
            .collect();
        Circuit::new(self.field, self.input_count, outs, self.gates)
            .expect("builder emits structurally valid circuits")
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_xor() {
        let c = parse("2 1 1 2\n2\nADD 0 1 2\n").unwrap();
        assert_eq!(c.input_count(), 2);
        assert_eq!(c.gate_count(), 1);
        assert_eq!(c.evaluate(&[1, 0]).unwrap(), vec![1]);
        assert_eq!(c.evaluate(&[1, 1]).unwrap(), vec![0]);
    }

    #[test]
    fn identity_circuit_passes_through() {
        let c = parse("1 1 0 2\n0\n").unwrap();
        assert_eq!(c.evaluate(&[1]).unwrap(), vec![1]);
        assert_eq!(c.evaluate(&[0]).unwrap(), vec![0]);
    }

    #[test]
    fn comments_and_blanks_are_skipped() {
        let text = "# top comment\n2 1 1 2\n\n2 # outputs\nMUL 0 1 2 # and gate\n";
        let c = parse(text).unwrap();
        assert_eq!(c.evaluate(&[1, 1]).unwrap(), vec![1]);
        assert_eq!(c.evaluate(&[1, 0]).unwrap(), vec![0]);
    }

    #[test]
    fn rejects_forward_reference() {
        // Gate 0 reads wire 3, which is not below its own output wire 2.
        let err = parse("2 1 2 2\n3\nADD 0 3 2\nADD 0 1 3\n").unwrap_err();
        assert!(matches!(err, CircuitError::Topology(_)), "{err:?}");
    }

    #[test]
    fn rejects_rewritten_wire() {
        let err = parse("2 1 2 2\n2\nADD 0 1 2\nADD 0 1 2\n").unwrap_err();
        assert!(matches!(err, CircuitError::Topology(_)), "{err:?}");
    }

    #[test]
    fn rejects_constant_out_of_range() {
        let err = parse("1 1 1 5\n1\nADDC 0 7 1\n").unwrap_err();
        assert_eq!(
            err,
            CircuitError::ConstantRange { value: 7, modulus: 5 }
        );
    }

    #[test]
    fn parse_error_carries_line_number() {
        let err = parse("2 1 1 2\n2\nNAND 0 1 2\n").unwrap_err();
        match err {
            CircuitError::Parse { line, msg } => {
                assert_eq!(line, 3);
                assert!(msg.contains("NAND"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn gf5_gate_semantics() {
        let text = "2 2 2 5\n2 3\nMULC 0 3 2\nADDC 1 4 3\n";
        let c = parse(text).unwrap();
        assert_eq!(c.evaluate(&[2, 2]).unwrap(), vec![1, 1]);
    }

    #[test]
    fn evaluate_checks_input() {
        let c = parse("2 1 1 2\n2\nADD 0 1 2\n").unwrap();
        assert!(matches!(
            c.evaluate(&[1]),
            Err(CircuitError::InputLength { expected: 2, got: 1 })
        ));
        assert!(matches!(
            c.evaluate(&[1, 2]),
            Err(CircuitError::NonCanonicalInput { index: 1, .. })
        ));
    }

    #[test]
    fn text_roundtrip_preserves_hash() {
        let text = "2 2 3 5\n3 4\nADD 0 1 2\nMULC 2 4 3\nMUL 3 0 4\n";
        let c = parse(text).unwrap();
        let c2 = parse(&c.to_text()).unwrap();
        assert_eq!(c, c2);
        assert_eq!(c.hash(), c2.hash());
    }

    #[test]
    fn builder_folds_constants() {
        let f = Field::BINARY;
        let mut b = CircuitBuilder::new(f, 2);
        let x = b.input(0);
        let y = b.input(1);
        let zero = b.xor(x, x);
        assert_eq!(zero, BitRef::Const(0));
        let same = b.xor(y, zero);
        assert_eq!(same, y);
        let z = b.and(x, y);
        let c = b.finish(&[z]);
        assert_eq!(c.gate_count(), 1);
        assert_eq!(c.evaluate(&[1, 1]).unwrap(), vec![1]);
    }

    #[test]
    fn builder_materializes_constant_outputs() {
        let f = Field::new(5).unwrap();
        let mut b = CircuitBuilder::new(f, 1);
        let c = b.add(BitRef::Const(2), BitRef::Const(4));
        let circ = b.finish(&[c]);
        assert_eq!(circ.evaluate(&[3]).unwrap(), vec![1]);
        assert_eq!(circ.evaluate(&[0]).unwrap(), vec![1]);
    }

    #[test]
    fn distinct_circuits_have_distinct_hashes() {
        let a = parse("2 1 1 2\n2\nADD 0 1 2\n").unwrap();
        let b = parse("2 1 1 2\n2\nMUL 0 1 2\n").unwrap();
        assert_ne!(a.hash(), b.hash());
    }
}
