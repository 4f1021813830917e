//! Arithmetic over GF(2) or a small odd prime field GF(q).
//!
//! Elements are held as canonical `u64` values in `[0, q)`. The modulus is
//! restricted to fit in 32 bits so products never overflow a `u64`.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum FieldError {
    #[error("modulus {0} is not supported: must be 2 or an odd prime below 2^32")]
    BadModulus(u64),
}

/// A prime field with modulus `2 <= q < 2^32`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Field {
    modulus: u64,
}

impl Field {
    /// The binary field GF(2); circuit ADD is XOR and MUL is AND.
    pub const BINARY: Field = Field { modulus: 2 };

    pub fn new(modulus: u64) -> Result<Field, FieldError> {
        if modulus < 2 || modulus > u32::MAX as u64 || !is_prime(modulus) {
            return Err(FieldError::BadModulus(modulus));
        }
        Ok(Field { modulus })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_binary(&self) -> bool {
        self.modulus == 2
    }

    pub fn reduce(&self, v: u64) -> u64 {
        v % self.modulus
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        debug_assert!(a < self.modulus && b < self.modulus);
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        debug_assert!(a < self.modulus && b < self.modulus);
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        debug_assert!(a < self.modulus && b < self.modulus);
        a * b % self.modulus
    }

    /// Componentwise sum of equal-length vectors.
    pub fn add_vec(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        debug_assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(&x, &y)| self.add(x, y)).collect()
    }

    /// Componentwise difference of equal-length vectors.
    pub fn sub_vec(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        debug_assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(&x, &y)| self.sub(x, y)).collect()
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}
