//! Amplitude alphabets and target distributions.
//!
//! A `2^m`-PAM constellation factors into a sign and an amplitude alphabet;
//! shaping acts on the amplitudes `{1, 3, ..., 2^m - 1}` only. This module
//! holds the alphabet, the Maxwell-Boltzmann target family, and entropy.

use crate::error::{Error, Result};

/// The positive odd amplitude levels of a `2^m`-PAM constellation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmplitudeAlphabet {
    m: u32,
    amplitudes: Vec<u32>,
}

impl AmplitudeAlphabet {
    /// Alphabet `{1, 3, ..., 2^m - 1}` for `m` bits per PAM symbol.
    pub fn for_bits(m: u32) -> Result<Self> {
        if m < 2 || m > 16 {
            return Err(Error::InvalidParameter(format!(
                "bits per PAM symbol must be in 2..=16, got {m}"
            )));
        }
        let amplitudes = (0..1u32 << (m - 1)).map(|i| 2 * i + 1).collect();
        Ok(Self { m, amplitudes })
    }

    /// Bits per PAM symbol.
    pub fn bits_per_symbol(&self) -> u32 {
        self.m
    }

    /// Number of amplitude levels, `2^(m-1)`.
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Ordered amplitude values.
    pub fn amplitudes(&self) -> &[u32] {
        &self.amplitudes
    }

    /// Largest amplitude, `2^m - 1`.
    pub fn max_amplitude(&self) -> u32 {
        *self.amplitudes.last().unwrap()
    }

    /// Index of an amplitude value within the alphabet.
    pub fn index_of(&self, amplitude: u32) -> Result<usize> {
        self.amplitudes
            .binary_search(&amplitude)
            .map_err(|_| Error::InvalidAmplitude(amplitude))
    }

    /// Uniform distribution over the alphabet.
    pub fn uniform(&self) -> AmplitudeDistribution {
        let p = 1.0 / self.len() as f64;
        AmplitudeDistribution {
            alphabet: self.clone(),
            probabilities: vec![p; self.len()],
        }
    }
}

/// A probability assignment over an amplitude alphabet.
#[derive(Debug, Clone)]
pub struct AmplitudeDistribution {
    alphabet: AmplitudeAlphabet,
    probabilities: Vec<f64>,
}

impl AmplitudeDistribution {
    /// Build from explicit probabilities; they must be nonnegative and sum
    /// to one within 1e-12.
    pub fn new(alphabet: AmplitudeAlphabet, probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() != alphabet.len() {
            return Err(Error::InvalidParameter(format!(
                "{} probabilities for {} amplitudes",
                probabilities.len(),
                alphabet.len()
            )));
        }
        if probabilities.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameter(
                "probabilities must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(Self {
            alphabet,
            probabilities,
        })
    }

    pub fn alphabet(&self) -> &AmplitudeAlphabet {
        &self.alphabet
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Entropy in bits per amplitude, with `0 log 0 := 0`.
    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.probabilities)
    }

    /// Mean squared amplitude `E[a^2]` under this distribution.
    pub fn mean_energy(&self) -> f64 {
        self.alphabet
            .amplitudes()
            .iter()
            .zip(&self.probabilities)
            .map(|(&a, &p)| p * (a as f64) * (a as f64))
            .sum()
    }
}

/// Shannon entropy of a probability vector in bits.
pub fn entropy_bits(probabilities: &[f64]) -> f64 {
    probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Maxwell-Boltzmann distribution `P(a) ∝ exp(-lambda * a^2)`.
pub fn mb_distribution(alphabet: &AmplitudeAlphabet, lambda: f64) -> Result<AmplitudeDistribution> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        )));
    }
    // Subtract the smallest exponent so large lambda cannot underflow to an
    // all-zero vector.
    let e_min = (alphabet.amplitudes()[0] as f64).powi(2);
    let weights: Vec<f64> = alphabet
        .amplitudes()
        .iter()
        .map(|&a| (-lambda * ((a as f64).powi(2) - e_min)).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let probabilities = weights.iter().map(|w| w / z).collect();
    AmplitudeDistribution::new(alphabet.clone(), probabilities)
}

/// Find `lambda` such that the Maxwell-Boltzmann entropy equals
/// `target_entropy` bits per amplitude.
///
/// Entropy is strictly decreasing in `lambda` (from `m-1` at `lambda = 0`
/// towards 0), so bisection converges; the result reproduces the target to
/// 1e-9 bits.
pub fn fit_mb_for_entropy(alphabet: &AmplitudeAlphabet, target_entropy: f64) -> Result<f64> {
    let h_max = (alphabet.len() as f64).log2();
    if !(target_entropy > 0.0) || target_entropy > h_max {
        return Err(Error::InvalidParameter(format!(
            "target entropy {target_entropy} outside (0, {h_max}]"
        )));
    }
    if target_entropy == h_max {
        return Ok(0.0);
    }
    let entropy_at = |lambda: f64| -> f64 { mb_distribution(alphabet, lambda).unwrap().entropy() };
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while entropy_at(hi) > target_entropy {
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::InvalidParameter(format!(
                "entropy target {target_entropy} unreachable"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let h = entropy_at(mid);
        if (h - target_entropy).abs() <= 1e-12 {
            return Ok(mid);
        }
        if h > target_entropy {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < f64::EPSILON * hi.max(1.0) {
            break;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let h = entropy_at(lambda);
    if (h - target_entropy).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "bisection stalled at entropy {h} for target {target_entropy}"
        )));
    }
    Ok(lambda)
}

/// Find `lambda` such that the Maxwell-Boltzmann mean energy `E[a^2]` equals
/// `target_energy` (monotone decreasing in `lambda`, so bisection).
pub fn fit_mb_for_mean_energy(alphabet: &AmplitudeAlphabet, target_energy: f64) -> Result<f64> {
    let uniform_energy = alphabet
        .amplitudes()
        .iter()
        .map(|&a| (a as f64).powi(2))
        .sum::<f64>()
        / alphabet.len() as f64;
    let min_energy = (alphabet.amplitudes()[0] as f64).powi(2);
    if target_energy >= uniform_energy {
        return Ok(0.0);
    }
    if target_energy <= min_energy {
        return Err(Error::InvalidParameter(format!(
            "mean energy {target_energy} at or below the minimum amplitude energy {min_energy}"
        )));
    }
    let energy_at = |lambda: f64| mb_distribution(alphabet, lambda).unwrap().mean_energy();
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while energy_at(hi) > target_energy {
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::InvalidParameter(format!(
                "mean energy target {target_energy} unreachable"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if energy_at(mid) > target_energy {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < f64::EPSILON * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
