//! Small numeric and hashing helpers.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

/// `num / den` as `f64` for arbitrarily large operands.
///
/// Both are shifted down together so the leading 100 bits survive; the result
/// is accurate to well below 1e-15 relative error.
pub fn big_ratio(num: &BigUint, den: &BigUint) -> f64 {
    assert!(den.bits() > 0, "division by zero");
    if num.bits() == 0 {
        return 0.0;
    }
    let top = num.bits().max(den.bits());
    let shift = top.saturating_sub(100);
    let n = (num >> shift).to_f64().expect("shifted numerator fits f64");
    let d = (den >> shift).to_f64().expect("shifted denominator fits f64");
    n / d
}

/// `log2(x)` for a positive big integer, accurate to ~1e-12.
pub fn big_log2(x: &BigUint) -> f64 {
    assert!(x.bits() > 0, "log2 of zero");
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let head = (x >> shift).to_f64().expect("head fits f64");
    head.log2() + shift as f64
}

/// FNV-1a over a byte string. Used for config hashes that must be stable
/// across runs and platforms (std's default hasher is randomly keyed).
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Convert dB to linear power ratio.
pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Convert linear power ratio to dB.
pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Convert a launch power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * db_to_lin(dbm)
}
