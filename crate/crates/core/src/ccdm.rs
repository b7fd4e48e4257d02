//! Constant-composition distribution matching.
//!
//! Every codeword carries exactly the target composition, hence the same
//! per-codeword energy. Words map to sequences by exact enumerative ranking
//! over multiset permutations: the sequence of lexicographic rank `w` is
//! found by multinomial-count descent, which realizes the arithmetic-coding
//! codebook without any finite-precision state to manage. Round trips are
//! therefore exact at every blocklength.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;

use crate::alphabet::{
    fit_mb_for_entropy, mb_distribution, AmplitudeAlphabet, AmplitudeDistribution,
};
use crate::bits::{bits_to_uint, uint_to_bits};
use crate::composition::{
    ccdm_rate_bits, composition_from_distribution, multinomial, rate_loss, Composition,
    RateLossReport,
};
use crate::error::{Error, Result};
use crate::shaper::AmplitudeShaper;

/// A constant-composition code with its `k = floor(log2 multinomial)` bit
/// budget.
#[derive(Debug, Clone)]
pub struct CcdmCode {
    alphabet: AmplitudeAlphabet,
    composition: Composition,
    input_bits: usize,
    codebook_size: BigUint,
}

impl CcdmCode {
    pub fn new(alphabet: AmplitudeAlphabet, composition: Composition) -> Result<Self> {
        if composition.counts().len() != alphabet.len() {
            return Err(Error::InvalidParameter(format!(
                "{} counts for {} amplitudes",
                composition.counts().len(),
                alphabet.len()
            )));
        }
        let codebook_size = multinomial(&composition);
        let input_bits = (codebook_size.bits().max(1) - 1) as usize;
        Ok(CcdmCode {
            alphabet,
            composition,
            input_bits,
            codebook_size,
        })
    }

    /// Smallest-entropy Maxwell-Boltzmann-quantized composition that still
    /// admits `input_bits` bits, found by bisection on the target entropy.
    ///
    /// The target distribution is only reachable through the integer counts,
    /// so feasibility is not perfectly monotone in entropy; the bisection is
    /// followed by a short downward scan to settle on the boundary.
    pub fn for_rate(
        alphabet: &AmplitudeAlphabet,
        blocklength: usize,
        input_bits: usize,
    ) -> Result<Self> {
        let h_max = (alphabet.len() as f64).log2();
        let feasible = |h: f64| -> Result<Option<Composition>> {
            let lambda = fit_mb_for_entropy(alphabet, h)?;
            let dist = mb_distribution(alphabet, lambda)?;
            let comp = composition_from_distribution(&dist, blocklength)?;
            if ccdm_rate_bits(&comp) >= input_bits {
                Ok(Some(comp))
            } else {
                Ok(None)
            }
        };
        if feasible(h_max)?.is_none() {
            return Err(Error::InvalidParameter(format!(
                "no composition of {blocklength} amplitudes reaches {input_bits} bits"
            )));
        }
        let mut lo = (input_bits as f64 / blocklength as f64).min(h_max) * 0.5;
        let mut hi = h_max;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid)?.is_some() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        // Scan a small neighborhood below the bisection point; count
        // quantization can make a slightly lower entropy feasible.
        let mut best = feasible(hi)?.expect("upper end stays feasible");
        let mut best_h = best.distribution(alphabet)?.entropy();
        let step = 2e-4;
        for i in 1..=50 {
            let h = hi - step * i as f64;
            if h <= 0.0 {
                break;
            }
            if let Some(comp) = feasible(h)? {
                let he = comp.distribution(alphabet)?.entropy();
                if he < best_h {
                    best = comp;
                    best_h = he;
                }
            }
        }
        // Greedy single-unit moves reach compositions the rounded
        // Maxwell-Boltzmann family skips over; at long blocklengths this is
        // what closes the last fraction of a millibit to the multinomial
        // bound.
        loop {
            let mut improved = false;
            for from in 0..alphabet.len() {
                if best.counts()[from] == 0 {
                    continue;
                }
                for to in 0..alphabet.len() {
                    if to == from {
                        continue;
                    }
                    let mut counts = best.counts().to_vec();
                    counts[from] -= 1;
                    counts[to] += 1;
                    let cand = Composition::new(counts, blocklength)?;
                    if ccdm_rate_bits(&cand) < input_bits {
                        continue;
                    }
                    let h = cand.distribution(alphabet)?.entropy();
                    if h < best_h - 1e-12 {
                        best = cand;
                        best_h = h;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        let code = CcdmCode::new(alphabet.clone(), best)?;
        debug_assert!(code.input_bits >= input_bits);
        Ok(CcdmCode {
            input_bits,
            ..code
        })
    }

    pub fn alphabet(&self) -> &AmplitudeAlphabet {
        &self.alphabet
    }

    pub fn composition(&self) -> &Composition {
        &self.composition
    }

    pub fn blocklength(&self) -> usize {
        self.composition.blocklength()
    }

    pub fn input_bits(&self) -> usize {
        self.input_bits
    }

    /// Number of multiset permutations of the composition.
    pub fn codebook_size(&self) -> &BigUint {
        &self.codebook_size
    }

    /// Per-codeword energy (identical for all codewords).
    pub fn codeword_energy(&self) -> u64 {
        self.composition.energy(&self.alphabet)
    }

    /// The exact output distribution `counts / N`.
    pub fn empirical_distribution(&self) -> AmplitudeDistribution {
        self.composition
            .distribution(&self.alphabet)
            .expect("counts sum to N")
    }

    pub fn rate_report(&self) -> RateLossReport {
        rate_loss(
            &self.empirical_distribution(),
            self.input_bits,
            self.blocklength(),
        )
    }

    /// Sequence of lexicographic rank `rank` among all permutations of the
    /// composition.
    pub fn sequence_at(&self, rank: &BigUint) -> Result<Vec<u32>> {
        if rank >= &self.codebook_size {
            return Err(Error::InvalidParameter(format!(
                "rank {rank} outside codebook of {} sequences",
                self.codebook_size
            )));
        }
        let mut counts: Vec<usize> = self.composition.counts().to_vec();
        let mut permutations = self.codebook_size.clone();
        let mut remaining = rank.clone();
        let mut out = Vec::with_capacity(self.blocklength());
        for pos in (1..=self.blocklength()).rev() {
            // Sequences beginning with amplitude index `ai` number
            // permutations * counts[ai] / pos.
            let mut chosen = None;
            for ai in 0..counts.len() {
                if counts[ai] == 0 {
                    continue;
                }
                let with_a = exact_scaled(&permutations, counts[ai], pos);
                if remaining < with_a {
                    chosen = Some((ai, with_a));
                    break;
                }
                remaining -= &with_a;
            }
            let (ai, with_a) = chosen.expect("rank below the codebook size");
            out.push(self.alphabet.amplitudes()[ai]);
            counts[ai] -= 1;
            permutations = with_a;
        }
        debug_assert!(remaining.is_zero());
        Ok(out)
    }

    /// Lexicographic rank of a sequence with exactly the code composition.
    pub fn rank(&self, sequence: &[u32]) -> Result<BigUint> {
        if sequence.len() != self.blocklength() {
            return Err(Error::SequenceLength {
                expected: self.blocklength(),
                got: sequence.len(),
            });
        }
        let mut histogram = vec![0usize; self.alphabet.len()];
        for &a in sequence {
            histogram[self.alphabet.index_of(a)?] += 1;
        }
        if histogram != self.composition.counts() {
            return Err(Error::CompositionMismatch);
        }
        let mut counts = histogram;
        let mut permutations = self.codebook_size.clone();
        let mut rank = BigUint::zero();
        for (offset, &a) in sequence.iter().enumerate() {
            let pos = self.blocklength() - offset;
            let ai = self.alphabet.index_of(a)?;
            for smaller in 0..ai {
                if counts[smaller] > 0 {
                    rank += exact_scaled(&permutations, counts[smaller], pos);
                }
            }
            permutations = exact_scaled(&permutations, counts[ai], pos);
            counts[ai] -= 1;
        }
        Ok(rank)
    }

    /// Bits to constant-composition sequence.
    pub fn encode(&self, word: &[bool]) -> Result<Vec<u32>> {
        if word.len() != self.input_bits {
            return Err(Error::WordLength {
                expected: self.input_bits,
                got: word.len(),
            });
        }
        self.sequence_at(&bits_to_uint(word))
    }

    /// Sequence back to bits. A valid constant-composition sequence whose
    /// rank exceeds the `2^k` codebook reports a decode failure.
    pub fn decode(&self, sequence: &[u32]) -> Result<Vec<bool>> {
        let rank = self.rank(sequence)?;
        uint_to_bits(&rank, self.input_bits)
    }
}

/// `base * count / pos`, exact by construction (it counts the permutations
/// of the reduced multiset).
fn exact_scaled(base: &BigUint, count: usize, pos: usize) -> BigUint {
    let scaled = base * BigUint::from(count);
    let (q, r) = scaled.div_rem(&BigUint::from(pos));
    debug_assert!(r.is_zero(), "multinomial descent must divide exactly");
    q
}

impl AmplitudeShaper for CcdmCode {
    fn alphabet(&self) -> &AmplitudeAlphabet {
        &self.alphabet
    }

    fn blocklength(&self) -> usize {
        self.blocklength()
    }

    fn input_bits(&self) -> usize {
        self.input_bits
    }

    fn shape(&self, word: &[bool]) -> Result<Vec<u32>> {
        self.encode(word)
    }

    fn deshape(&self, sequence: &[u32]) -> Result<Vec<bool>> {
        self.decode(sequence)
    }

    fn distribution(&self) -> AmplitudeDistribution {
        self.empirical_distribution()
    }
}
