//! Little-endian byte reader/writer and field-element packing used by the
//! proof wire formats.

use thiserror::Error;

/// Upper bound accepted for any length prefix while decoding. Anything larger
/// is treated as corruption rather than attempted as an allocation.
pub const MAX_DECODE_LEN: usize = 1 << 30;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum CodecError {
    #[error("unexpected end of input at offset {0}")]
    Truncated(usize),
    #[error("length prefix {0} exceeds decode limit")]
    LengthOverflow(u64),
    #[error("invalid value for {what}: {value}")]
    BadValue { what: &'static str, value: u64 },
}

pub struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        ByteReader { buf, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn is_empty(&self) -> bool {
        self.remaining() == 0
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.remaining() < n {
            return Err(CodecError::Truncated(self.pos));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16, CodecError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// Reads a u32 length prefix and then that many bytes.
    pub fn bytes_u32(&mut self) -> Result<&'a [u8], CodecError> {
        let n = self.u32()? as usize;
        if n > MAX_DECODE_LEN {
            return Err(CodecError::LengthOverflow(n as u64));
        }
        self.take(n)
    }

    pub fn array<const N: usize>(&mut self) -> Result<[u8; N], CodecError> {
        Ok(self.take(N)?.try_into().unwrap())
    }
}

#[derive(Default)]
pub struct ByteWriter {
    buf: Vec<u8>,
}

impl ByteWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn bytes_u32(&mut self, b: &[u8]) {
        self.u32(b.len() as u32);
        self.bytes(b);
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.buf
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.buf
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }
}

/// Packs field elements: one bit per element (LSB-first within each byte) for
/// the binary field, eight little-endian bytes per element otherwise.
pub fn pack_elements(binary: bool, elems: &[u64]) -> Vec<u8> {
    if binary {
        let mut out = vec![0u8; elems.len().div_ceil(8)];
        for (i, &e) in elems.iter().enumerate() {
            if e & 1 == 1 {
                out[i / 8] |= 1 << (i % 8);
            }
        }
        out
    } else {
        let mut out = Vec::with_capacity(elems.len() * 8);
        for &e in elems {
            out.extend_from_slice(&e.to_le_bytes());
        }
        out
    }
}

/// Inverse of [`pack_elements`]; `count` is the element count to recover.
pub fn unpack_elements(binary: bool, bytes: &[u8], count: usize) -> Result<Vec<u64>, CodecError> {
    if binary {
        if bytes.len() != count.div_ceil(8) {
            return Err(CodecError::Truncated(bytes.len()));
        }
        Ok((0..count)
            .map(|i| u64::from((bytes[i / 8] >> (i % 8)) & 1))
            .collect())
    } else {
        if bytes.len() != count * 8 {
            return Err(CodecError::Truncated(bytes.len()));
        }
        Ok(bytes
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

/// Byte length of `count` packed elements.
pub fn packed_len(binary: bool, count: usize) -> usize {
    if binary {
        count.div_ceil(8)
    } else {
        count * 8
    }
}

/// Expands bytes to bits, most significant bit of each byte first. This is the
/// convention used for SHA-256 block and digest bit layouts.
pub fn bytes_to_bits_msb(bytes: &[u8]) -> Vec<u64> {
    let mut bits = Vec::with_capacity(bytes.len() * 8);
    for &b in bytes {
        for i in (0..8).rev() {
            bits.push(u64::from((b >> i) & 1));
        }
    }
    bits
}

/// Inverse of [`bytes_to_bits_msb`]; bit count must be a multiple of 8.
pub fn bits_to_bytes_msb(bits: &[u64]) -> Vec<u8> {
    assert!(bits.len() % 8 == 0, "bit count must be a multiple of 8");
    bits.chunks_exact(8)
        .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | (b as u8 & 1)))
        .collect()
}
