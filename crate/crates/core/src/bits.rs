//! Bit-vector helpers shared by the shapers and the PAS framing.
//!
//! Words are `&[bool]` in big-endian order: `bits[0]` is the most significant
//! bit of the integer a word encodes.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, RngExt};

use crate::error::{Error, Result};

/// Interpret a big-endian bit slice as an unsigned integer.
pub fn bits_to_uint(bits: &[bool]) -> BigUint {
    let mut x = BigUint::zero();
    for &b in bits {
        x <<= 1u8;
        if b {
            x += 1u8;
        }
    }
    x
}

/// Write `x` as exactly `len` big-endian bits.
///
/// Fails if `x >= 2^len`.
pub fn uint_to_bits(x: &BigUint, len: usize) -> Result<Vec<bool>> {
    if x.bits() as usize > len {
        return Err(Error::DecodeFailure { k: len });
    }
    let mut out = vec![false; len];
    for i in 0..len {
        out[len - 1 - i] = x.bit(i as u64);
    }
    Ok(out)
}

/// Uniform random bit vector.
pub fn random_bits<R: Rng>(rng: &mut R, len: usize) -> Vec<bool> {
    (0..len).map(|_| rng.random()).collect()
}

/// Pack bits as a `String` of `0`/`1` (diagnostic dumps).
pub fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}
