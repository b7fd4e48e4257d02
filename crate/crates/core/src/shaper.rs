//! Common interface the PAS framing consumes from either shaper.

use crate::alphabet::{AmplitudeAlphabet, AmplitudeDistribution};
use crate::composition::{rate_loss, RateLossReport};
use crate::error::Result;

/// An invertible mapper from uniform bits to amplitude sequences.
pub trait AmplitudeShaper: Send + Sync {
    /// The amplitude alphabet this shaper emits from.
    fn alphabet(&self) -> &AmplitudeAlphabet;

    /// Output amplitudes per block.
    fn blocklength(&self) -> usize;

    /// Input bits per block.
    fn input_bits(&self) -> usize;

    /// Bits to amplitudes.
    fn shape(&self, word: &[bool]) -> Result<Vec<u32>>;

    /// Amplitudes back to bits; decode failures are typed errors.
    fn deshape(&self, sequence: &[u32]) -> Result<Vec<bool>>;

    /// Amplitude distribution at the shaper output (the exact marginal the
    /// channel sees; demapper priors come from here).
    fn distribution(&self) -> AmplitudeDistribution;

    /// The distribution this shaper targets, the `P_A` of the rate-loss
    /// definition. Equal to the output distribution for composition-based
    /// shapers; sphere shapers target the Maxwell-Boltzmann law their bound
    /// hardens onto.
    fn target_distribution(&self) -> AmplitudeDistribution {
        self.distribution()
    }

    /// Shaping rate `k/N` in bits per amplitude.
    fn shaping_rate(&self) -> f64 {
        self.input_bits() as f64 / self.blocklength() as f64
    }

    /// Rate, entropy, and rate loss of this configuration, with entropy
    /// taken on the target distribution.
    fn rate_report(&self) -> RateLossReport {
        rate_loss(
            &self.target_distribution(),
            self.input_bits(),
            self.blocklength(),
        )
    }
}
