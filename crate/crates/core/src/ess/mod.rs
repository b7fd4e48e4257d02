//! Enumerative sphere shaping.
//!
//! All amplitude sequences with energy at most `Emax` are ordered
//! lexicographically and addressed by exact integer index. Shaping maps a
//! `k`-bit word to the sequence with that index; deshaping recovers the word.
//! Counts are exact big integers throughout, so round trips are exact at any
//! blocklength.

pub mod stream;
pub mod trellis;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::alphabet::AmplitudeDistribution;
use crate::bits::{bits_to_uint, uint_to_bits};
use crate::composition::{rate_loss, RateLossReport};
use crate::error::{Error, Result};
use crate::shaper::AmplitudeShaper;

pub use trellis::{
    build_trellis, choose_emax_for_rate, sequence_count, sphere_marginal, EnergySpectrum,
    EnumerativeTrellis,
};

/// The Maxwell-Boltzmann law a sphere of bound `emax` targets: mean energy
/// on the surface, `E[a^2] = emax / N`. (Saturates to uniform once the
/// sphere covers the whole space, and to the all-ones point mass when only
/// the minimum-energy sequence fits.)
pub fn sphere_target_distribution(
    alphabet: &crate::alphabet::AmplitudeAlphabet,
    blocklength: usize,
    emax: u64,
) -> AmplitudeDistribution {
    let surface = emax as f64 / blocklength as f64;
    match crate::alphabet::fit_mb_for_mean_energy(alphabet, surface) {
        Ok(lambda) => crate::alphabet::mb_distribution(alphabet, lambda).expect("lambda >= 0"),
        Err(_) => {
            let mut probs = vec![0.0; alphabet.len()];
            probs[0] = 1.0;
            AmplitudeDistribution::new(alphabet.clone(), probs).expect("point mass")
        }
    }
}

/// Rate-loss report for the minimal sphere at a given bit budget, computed
/// from energy spectra alone (no trellis is materialized, so blocklengths in
/// the thousands stay cheap).
pub fn rate_loss_for(
    alphabet: &crate::alphabet::AmplitudeAlphabet,
    blocklength: usize,
    input_bits: usize,
) -> crate::error::Result<RateLossReport> {
    let emax = choose_emax_for_rate(alphabet, blocklength, input_bits)?;
    Ok(rate_loss(
        &sphere_target_distribution(alphabet, blocklength, emax),
        input_bits,
        blocklength,
    ))
}

/// A sphere-shaping code: a count trellis plus its operational bit budget
/// `k = floor(log2 T_0^0)`.
#[derive(Debug, Clone)]
pub struct EssCode {
    trellis: EnumerativeTrellis,
    input_bits: usize,
}

impl EssCode {
    pub fn new(trellis: EnumerativeTrellis) -> Self {
        let input_bits = (trellis.total_sequences().bits() - 1) as usize;
        EssCode {
            trellis,
            input_bits,
        }
    }

    /// Code over the same sphere but addressing only `2^input_bits` of its
    /// sequences (`input_bits` at most `floor(log2 T_0^0)`).
    pub fn with_input_bits(trellis: EnumerativeTrellis, input_bits: usize) -> Result<Self> {
        let max_bits = (trellis.total_sequences().bits() - 1) as usize;
        if input_bits > max_bits {
            return Err(Error::InvalidParameter(format!(
                "{input_bits} bits exceed the sphere's {max_bits}-bit budget"
            )));
        }
        Ok(EssCode {
            trellis,
            input_bits,
        })
    }

    /// Build the code with the smallest sphere holding `2^input_bits`
    /// sequences.
    pub fn for_rate(
        alphabet: &crate::alphabet::AmplitudeAlphabet,
        blocklength: usize,
        input_bits: usize,
    ) -> Result<Self> {
        let emax = choose_emax_for_rate(alphabet, blocklength, input_bits)?;
        let code = EssCode::new(build_trellis(alphabet, blocklength, emax)?);
        debug_assert!(code.input_bits >= input_bits);
        Ok(code)
    }

    pub fn trellis(&self) -> &EnumerativeTrellis {
        &self.trellis
    }

    /// Input bits per shaped block.
    pub fn input_bits(&self) -> usize {
        self.input_bits
    }

    pub fn blocklength(&self) -> usize {
        self.trellis.blocklength()
    }

    /// Shaping rate `k/N` in bits per amplitude.
    pub fn shaping_rate(&self) -> f64 {
        self.input_bits as f64 / self.blocklength() as f64
    }

    fn validate_sequence(&self, sequence: &[u32]) -> Result<()> {
        if sequence.len() != self.blocklength() {
            return Err(Error::SequenceLength {
                expected: self.blocklength(),
                got: sequence.len(),
            });
        }
        let mut energy = 0u64;
        for &a in sequence {
            self.trellis.alphabet().index_of(a)?;
            energy += a as u64 * a as u64;
        }
        if energy > self.trellis.emax() {
            return Err(Error::EnergyOverflow {
                energy,
                emax: self.trellis.emax(),
            });
        }
        Ok(())
    }

    /// Lexicographic index of an in-sphere sequence (Cover's formula): the
    /// number of admissible sequences that sort strictly before it.
    pub fn index(&self, sequence: &[u32]) -> Result<BigUint> {
        Ok(self.index_trace(sequence)?.0)
    }

    /// Index plus the running partial sums after each position.
    pub fn index_trace(&self, sequence: &[u32]) -> Result<(BigUint, Vec<BigUint>)> {
        self.validate_sequence(sequence)?;
        let offsets = self.trellis.slot_offsets();
        let slots = self.trellis.slots();
        let mut index = BigUint::zero();
        let mut partials = Vec::with_capacity(sequence.len());
        let mut slot = 0usize;
        for (pos, &a) in sequence.iter().enumerate() {
            let ai = self.trellis.alphabet().index_of(a)?;
            let next = self.trellis.row(pos + 1);
            // Sequences starting with the same prefix and a smaller amplitude
            // here all sort before this one.
            for &w in &offsets[..ai] {
                if slot + w < slots {
                    index += &next[slot + w];
                }
            }
            partials.push(index.clone());
            slot += offsets[ai];
        }
        Ok((index, partials))
    }

    /// Sequence at a given lexicographic index.
    pub fn sequence_at(&self, index: &BigUint) -> Result<Vec<u32>> {
        if index >= self.trellis.total_sequences() {
            return Err(Error::InvalidParameter(format!(
                "index needs {} sequences, sphere holds {}",
                index + 1u32,
                self.trellis.total_sequences()
            )));
        }
        let offsets = self.trellis.slot_offsets();
        let slots = self.trellis.slots();
        let amplitudes = self.trellis.alphabet().amplitudes();
        let mut remaining = index.clone();
        let mut slot = 0usize;
        let mut out = Vec::with_capacity(self.blocklength());
        for pos in 0..self.blocklength() {
            let next = self.trellis.row(pos + 1);
            let mut chosen = None;
            for (ai, &w) in offsets.iter().enumerate() {
                let count = if slot + w < slots {
                    &next[slot + w]
                } else {
                    break;
                };
                if &remaining < count {
                    chosen = Some(ai);
                    break;
                }
                remaining -= count;
            }
            let ai = chosen.expect("index < T_n^e guarantees a branch");
            out.push(amplitudes[ai]);
            slot += offsets[ai];
        }
        debug_assert!(remaining.is_zero());
        Ok(out)
    }

    /// Map a `k`-bit word to its amplitude sequence.
    pub fn shape(&self, word: &[bool]) -> Result<Vec<u32>> {
        if word.len() != self.input_bits {
            return Err(Error::WordLength {
                expected: self.input_bits,
                got: word.len(),
            });
        }
        self.sequence_at(&bits_to_uint(word))
    }

    /// Recover the `k`-bit word from a shaped sequence. A valid in-sphere
    /// sequence whose index is not addressable in `k` bits (possible after
    /// channel errors) reports a decode failure.
    pub fn deshape(&self, sequence: &[u32]) -> Result<Vec<bool>> {
        let index = self.index(sequence)?;
        uint_to_bits(&index, self.input_bits)
    }

    /// Exact position-averaged amplitude marginal of the codebook sphere.
    pub fn induced_distribution(&self) -> AmplitudeDistribution {
        self.trellis.induced_distribution()
    }

    /// The Maxwell-Boltzmann law this sphere targets: the one whose mean
    /// energy sits on the sphere surface, `E[a^2] = Emax / N`, where the
    /// bounded-energy ensemble concentrates as N grows. The rate loss is
    /// measured against it.
    pub fn target_distribution(&self) -> AmplitudeDistribution {
        sphere_target_distribution(
            self.trellis.alphabet(),
            self.blocklength(),
            self.trellis.emax(),
        )
    }

    pub fn rate_report(&self) -> RateLossReport {
        rate_loss(
            &self.target_distribution(),
            self.input_bits,
            self.blocklength(),
        )
    }
}

impl AmplitudeShaper for EssCode {
    fn alphabet(&self) -> &crate::alphabet::AmplitudeAlphabet {
        self.trellis.alphabet()
    }

    fn blocklength(&self) -> usize {
        self.blocklength()
    }

    fn input_bits(&self) -> usize {
        self.input_bits
    }

    fn shape(&self, word: &[bool]) -> Result<Vec<u32>> {
        EssCode::shape(self, word)
    }

    fn deshape(&self, sequence: &[u32]) -> Result<Vec<bool>> {
        EssCode::deshape(self, sequence)
    }

    fn distribution(&self) -> AmplitudeDistribution {
        self.induced_distribution()
    }

    fn target_distribution(&self) -> AmplitudeDistribution {
        EssCode::target_distribution(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::AmplitudeAlphabet;
    use crate::bits::random_bits;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn tiny_sphere_code() -> EssCode {
        let alphabet = AmplitudeAlphabet::for_bits(3).unwrap();
        EssCode::new(build_trellis(&alphabet, 4, 60).unwrap())
    }

    #[test]
    fn tiny_sphere_rate() {
        let code = tiny_sphere_code();
        assert_eq!(code.input_bits(), 6); // floor(log2 82)
        assert!((code.shaping_rate() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn index_trace_partial_sums() {
        let code = tiny_sphere_code();
        let (index, partials) = code.index_trace(&[5, 3, 1, 3]).unwrap();
        assert_eq!(index, BigUint::from(70u32));
        let expect: Vec<BigUint> = [61u32, 69, 69, 70]
            .iter()
            .map(|&x| BigUint::from(x))
            .collect();
        assert_eq!(partials, expect);
    }

    #[test]
    fn all_ones_is_index_zero() {
        let code = tiny_sphere_code();
        assert_eq!(code.index(&[1, 1, 1, 1]).unwrap(), BigUint::zero());
        assert_eq!(code.shape(&[false; 6]).unwrap(), vec![1, 1, 1, 1]);
        assert_eq!(code.deshape(&[1, 1, 1, 1]).unwrap(), vec![false; 6]);
    }

    #[test]
    fn out_of_codebook_sequence_is_decode_failure() {
        // Index 70 needs 7 bits; the 6-bit codebook cannot address it.
        let code = tiny_sphere_code();
        assert!(matches!(
            code.deshape(&[5, 3, 1, 3]),
            Err(Error::DecodeFailure { k: 6 })
        ));
    }

    #[test]
    fn energy_violation_and_bad_amplitude_are_rejected() {
        let code = tiny_sphere_code();
        assert!(matches!(
            code.index(&[7, 7, 7, 1]),
            Err(Error::EnergyOverflow { .. })
        ));
        assert!(matches!(
            code.index(&[2, 1, 1, 1]),
            Err(Error::InvalidAmplitude(2))
        ));
        assert!(matches!(
            code.index(&[1, 1, 1]),
            Err(Error::SequenceLength { .. })
        ));
    }

    #[test]
    fn shape_rejects_wrong_word_length() {
        let code = tiny_sphere_code();
        assert!(matches!(
            code.shape(&[false; 5]),
            Err(Error::WordLength { .. })
        ));
    }

    #[test]
    fn exhaustive_roundtrip_tiny_sphere() {
        let code = tiny_sphere_code();
        for value in 0u32..64 {
            let word = uint_to_bits(&BigUint::from(value), 6).unwrap();
            let seq = code.shape(&word).unwrap();
            let back = code.deshape(&seq).unwrap();
            assert_eq!(back, word, "word {value}");
        }
    }

    #[test]
    fn random_roundtrips_n200() {
        let alphabet = AmplitudeAlphabet::for_bits(3).unwrap();
        let code = EssCode::for_rate(&alphabet, 200, 370).unwrap();
        assert_eq!(code.input_bits(), 370);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..50 {
            let word = random_bits(&mut rng, code.input_bits());
            let seq = code.shape(&word).unwrap();
            let energy: u64 = seq.iter().map(|&a| a as u64 * a as u64).sum();
            assert!(energy <= code.trellis().emax());
            assert_eq!(code.deshape(&seq).unwrap(), word);
        }
    }
}
