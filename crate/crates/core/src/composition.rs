//! Compositions (per-amplitude count vectors) and rate-loss accounting.

use num_bigint::BigUint;
use num_traits::One;

use crate::alphabet::{AmplitudeAlphabet, AmplitudeDistribution};
use crate::error::{Error, Result};

/// Occurrence counts per amplitude for a fixed blocklength.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composition {
    counts: Vec<usize>,
    blocklength: usize,
}

impl Composition {
    pub fn new(counts: Vec<usize>, blocklength: usize) -> Result<Self> {
        let sum: usize = counts.iter().sum();
        if sum != blocklength {
            return Err(Error::InvalidParameter(format!(
                "counts sum to {sum}, expected blocklength {blocklength}"
            )));
        }
        Ok(Self {
            counts,
            blocklength,
        })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn blocklength(&self) -> usize {
        self.blocklength
    }

    /// Empirical distribution `counts / N`.
    pub fn distribution(&self, alphabet: &AmplitudeAlphabet) -> Result<AmplitudeDistribution> {
        let n = self.blocklength as f64;
        AmplitudeDistribution::new(
            alphabet.clone(),
            self.counts.iter().map(|&c| c as f64 / n).collect(),
        )
    }

    /// Per-codeword energy `sum_i n_i * a_i^2`; identical for every sequence
    /// with this composition.
    pub fn energy(&self, alphabet: &AmplitudeAlphabet) -> u64 {
        self.counts
            .iter()
            .zip(alphabet.amplitudes())
            .map(|(&c, &a)| c as u64 * (a as u64) * (a as u64))
            .sum()
    }
}

/// Quantize a distribution to integer counts summing to `blocklength`.
///
/// Counts start at `round(N * p_i)`; the surplus or deficit is then settled
/// one unit at a time on the amplitude with the smallest (when removing) or
/// largest (when adding) rounding residual `N*p_i - c_i`, breaking ties
/// toward the lower-energy outcome.
pub fn composition_from_distribution(
    dist: &AmplitudeDistribution,
    blocklength: usize,
) -> Result<Composition> {
    if blocklength == 0 {
        return Err(Error::InvalidParameter("blocklength must be >= 1".into()));
    }
    let n = blocklength as f64;
    let targets: Vec<f64> = dist.probabilities().iter().map(|&p| n * p).collect();
    let mut counts: Vec<usize> = targets.iter().map(|&t| t.round() as usize).collect();
    let residual = |counts: &[usize], i: usize| targets[i] - counts[i] as f64;

    let mut sum: isize = counts.iter().map(|&c| c as isize).sum();
    while sum > blocklength as isize {
        // Remove from the smallest residual; a tie is settled by removing
        // from the larger amplitude, which lowers the total energy.
        let mut pick = None;
        for i in 0..counts.len() {
            if counts[i] == 0 {
                continue;
            }
            let r = residual(&counts, i);
            pick = match pick {
                None => Some((i, r)),
                Some((_, best)) if r < best - 1e-12 => Some((i, r)),
                Some((j, best)) if (r - best).abs() <= 1e-12 && i > j => Some((i, r)),
                keep => keep,
            };
        }
        let (i, _) = pick.expect("some count is positive");
        counts[i] -= 1;
        sum -= 1;
    }
    while sum < blocklength as isize {
        // Add to the largest residual; a tie goes to the smaller amplitude.
        let mut pick = None;
        for i in 0..counts.len() {
            let r = residual(&counts, i);
            pick = match pick {
                None => Some((i, r)),
                Some((_, best)) if r > best + 1e-12 => Some((i, r)),
                keep => keep,
            };
        }
        let (i, _) = pick.expect("alphabet nonempty");
        counts[i] += 1;
        sum += 1;
    }
    Composition::new(counts, blocklength)
}

/// Exact multinomial coefficient `N! / prod_i n_i!`.
pub fn multinomial(composition: &Composition) -> BigUint {
    // Product of binomials C(s_i, n_i) over the running prefix sums s_i;
    // each factor is computed incrementally with exact division.
    let mut result = BigUint::one();
    let mut seen = 0usize;
    for &c in composition.counts() {
        for j in 1..=c {
            seen += 1;
            result = result * BigUint::from(seen) / BigUint::from(j);
        }
    }
    result
}

/// CCDM information content of a composition: `floor(log2 multinomial)` bits.
pub fn ccdm_rate_bits(composition: &Composition) -> usize {
    let m = multinomial(composition);
    (m.bits() - 1) as usize
}

/// Shaping rate, entropy, and rate loss of a shaper configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RateLossReport {
    /// Input bits per block.
    pub input_bits: usize,
    /// Shaping blocklength in amplitudes.
    pub blocklength: usize,
    /// Operational shaping rate `k / N` in bits per amplitude.
    pub shaping_rate: f64,
    /// Entropy of the shaper's amplitude distribution in bits per amplitude.
    pub entropy: f64,
    /// `entropy - shaping_rate`, nonnegative for any valid shaper.
    pub rate_loss: f64,
}

/// Rate loss `H(P_A) - k/N` for a shaper emitting `dist` at `k` bits per
/// `blocklength` amplitudes.
pub fn rate_loss(dist: &AmplitudeDistribution, input_bits: usize, blocklength: usize) -> RateLossReport {
    assert!(blocklength >= 1, "blocklength must be >= 1");
    let shaping_rate = input_bits as f64 / blocklength as f64;
    let entropy = dist.entropy();
    RateLossReport {
        input_bits,
        blocklength,
        shaping_rate,
        entropy,
        rate_loss: entropy - shaping_rate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{fit_mb_for_entropy, mb_distribution};

    fn alpha3() -> AmplitudeAlphabet {
        AmplitudeAlphabet::for_bits(3).unwrap()
    }

    #[test]
    fn uniform_composition_splits_evenly() {
        let d = alpha3().uniform();
        let c = composition_from_distribution(&d, 4).unwrap();
        assert_eq!(c.counts(), &[1, 1, 1, 1]);
    }

    #[test]
    fn residual_rule_resolves_half_ties_toward_low_energy() {
        let d = AmplitudeDistribution::new(alpha3(), vec![0.5, 0.3, 0.15, 0.05]).unwrap();
        let c = composition_from_distribution(&d, 10).unwrap();
        // round() gives (5,3,2,1), one too many; residuals are
        // (0, 0, -0.5, -0.5) and the tie is removed from amplitude 7.
        assert_eq!(c.counts(), &[5, 3, 2, 0]);
    }

    #[test]
    fn mb_target_composition_tracks_entropy() {
        let a = alpha3();
        let lambda = fit_mb_for_entropy(&a, 1.85).unwrap();
        let d = mb_distribution(&a, lambda).unwrap();
        let c = composition_from_distribution(&d, 3600).unwrap();
        let h = c.distribution(&a).unwrap().entropy();
        assert!((h - 1.85).abs() < 5e-3, "empirical entropy {h}");
    }

    #[test]
    fn multinomial_small_cases() {
        let c = Composition::new(vec![2, 1, 1, 0], 4).unwrap();
        assert_eq!(multinomial(&c), BigUint::from(12u32));
        assert_eq!(ccdm_rate_bits(&c), 3); // floor(log2 12)

        let single = Composition::new(vec![4, 0, 0, 0], 4).unwrap();
        assert_eq!(multinomial(&single), BigUint::one());
        assert_eq!(ccdm_rate_bits(&single), 0);

        let pair = Composition::new(vec![1, 1], 2).unwrap();
        assert_eq!(multinomial(&pair), BigUint::from(2u32));
        assert_eq!(ccdm_rate_bits(&pair), 1);
    }

    #[test]
    fn constant_codeword_energy() {
        let c = Composition::new(vec![2, 1, 1, 0], 4).unwrap();
        assert_eq!(c.energy(&alpha3()), 2 + 9 + 25);
    }

    #[test]
    fn rate_loss_is_exact_algebra() {
        let d = alpha3().uniform();
        let r = rate_loss(&d, 8, 4); // k = 2N
        assert!(r.rate_loss.abs() < 1e-12);
        assert!((r.entropy - r.shaping_rate - r.rate_loss).abs() < 1e-15);
    }
}
