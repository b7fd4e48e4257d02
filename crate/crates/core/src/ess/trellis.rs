//! Bounded-energy amplitude trellis with exact path counts.
//!
//! States are (stage `n`, accumulated energy `e`) pairs. Every odd amplitude
//! satisfies `a^2 ≡ 1 (mod 8)`, so any reachable energy at stage `n`
//! satisfies `e ≡ n (mod 8)`; energies are therefore stored as slot indices
//! `j = (e - n) / 8`. A state has surviving continuations iff
//! `e + (N - n) <= Emax`, which makes the live band exactly
//! `(Emax - N)/8 + 1` slots wide at every stage.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::alphabet::{AmplitudeAlphabet, AmplitudeDistribution};
use crate::error::{Error, Result};
use crate::util::big_ratio;

/// Path-count table `T_n^e` for sequences of length `n` with energy at most
/// `emax`, counted backward from the final stage.
#[derive(Debug, Clone)]
pub struct EnumerativeTrellis {
    alphabet: AmplitudeAlphabet,
    blocklength: usize,
    emax: u64,
    /// Slot offset contributed by appending each amplitude: `(a^2 - 1) / 8`.
    slot_offsets: Vec<usize>,
    /// `rows[n][j] = T_n^(n + 8j)`, each row `slots` wide.
    rows: Vec<Vec<BigUint>>,
    slots: usize,
}

/// Slot offsets `(a^2 - 1) / 8` for an alphabet (e.g. `[0, 1, 3, 6]` for
/// amplitudes `{1, 3, 5, 7}`).
pub fn slot_offsets(alphabet: &AmplitudeAlphabet) -> Vec<usize> {
    alphabet
        .amplitudes()
        .iter()
        .map(|&a| ((a as usize) * (a as usize) - 1) / 8)
        .collect()
}

/// Number of live energy slots per stage for the given geometry.
pub fn live_slots(alphabet: &AmplitudeAlphabet, blocklength: usize, emax: u64) -> usize {
    let n = blocklength as u64;
    let amax = alphabet.max_amplitude() as u64;
    let top = emax.min(n * amax * amax);
    ((top - n) / 8) as usize + 1
}

/// Build the count table by the backward recursion, initializing the final
/// stage with ones on every admissible energy level.
pub fn build_trellis(
    alphabet: &AmplitudeAlphabet,
    blocklength: usize,
    emax: u64,
) -> Result<EnumerativeTrellis> {
    if blocklength == 0 {
        return Err(Error::InvalidParameter("blocklength must be >= 1".into()));
    }
    if emax < blocklength as u64 {
        return Err(Error::InvalidParameter(format!(
            "Emax {emax} below minimum sequence energy {blocklength}; codebook empty"
        )));
    }
    let slots = live_slots(alphabet, blocklength, emax);
    let offsets = slot_offsets(alphabet);
    let mut rows = vec![Vec::new(); blocklength + 1];
    rows[blocklength] = vec![BigUint::one(); slots];
    for n in (0..blocklength).rev() {
        let next = &rows[n + 1];
        let mut row = vec![BigUint::zero(); slots];
        for (j, cell) in row.iter_mut().enumerate() {
            for &w in &offsets {
                if j + w < slots {
                    *cell += &next[j + w];
                }
            }
        }
        rows[n] = row;
    }
    Ok(EnumerativeTrellis {
        alphabet: alphabet.clone(),
        blocklength,
        emax,
        slot_offsets: offsets,
        rows,
        slots,
    })
}

impl EnumerativeTrellis {
    pub fn alphabet(&self) -> &AmplitudeAlphabet {
        &self.alphabet
    }

    pub fn blocklength(&self) -> usize {
        self.blocklength
    }

    pub fn emax(&self) -> u64 {
        self.emax
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub(crate) fn slot_offsets(&self) -> &[usize] {
        &self.slot_offsets
    }

    pub(crate) fn row(&self, stage: usize) -> &[BigUint] {
        &self.rows[stage]
    }

    /// Total number of bounded-energy sequences, `T_0^0`.
    pub fn total_sequences(&self) -> &BigUint {
        &self.rows[0][0]
    }

    /// `T_n^e`, zero for energies that are unreachable or dead.
    pub fn count(&self, stage: usize, energy: u64) -> BigUint {
        assert!(stage <= self.blocklength, "stage out of range");
        let stage_e = stage as u64;
        if energy < stage_e || (energy - stage_e) % 8 != 0 {
            return BigUint::zero();
        }
        let j = ((energy - stage_e) / 8) as usize;
        if j >= self.slots {
            return BigUint::zero();
        }
        self.rows[stage][j].clone()
    }

    /// Render the nonzero counts per stage (the demo view of the table).
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        for n in 0..=self.blocklength {
            let mut cells = Vec::new();
            for (j, c) in self.rows[n].iter().enumerate() {
                if !c.is_zero() {
                    cells.push(format!("e={}:{}", n as u64 + 8 * j as u64, c));
                }
            }
            out.push_str(&format!("stage {n}: {}\n", cells.join(" ")));
        }
        out
    }

    /// Per-position amplitude marginal over all `T_0^0` sequences, computed
    /// exactly by forward x backward path counting:
    /// `P(a) = (1/N) sum_n sum_e F_n^e T_(n+1)^(e+a^2) / T_0^0`.
    pub fn induced_distribution(&self) -> AmplitudeDistribution {
        let mut occupancy = vec![BigUint::zero(); self.alphabet.len()];
        let mut forward = vec![BigUint::zero(); self.slots];
        forward[0] = BigUint::one();
        for n in 0..self.blocklength {
            let next_row = &self.rows[n + 1];
            let mut forward_next = vec![BigUint::zero(); self.slots];
            for j in 0..self.slots {
                if forward[j].is_zero() {
                    continue;
                }
                for (ai, &w) in self.slot_offsets.iter().enumerate() {
                    if j + w < self.slots {
                        if !next_row[j + w].is_zero() {
                            occupancy[ai] += &forward[j] * &next_row[j + w];
                        }
                        forward_next[j + w] += &forward[j];
                    }
                }
            }
            forward = forward_next;
        }
        let denom = self.total_sequences() * BigUint::from(self.blocklength);
        debug_assert_eq!(
            occupancy.iter().fold(BigUint::zero(), |s, o| s + o),
            denom,
            "occupancy must partition position-sequence pairs"
        );
        let probs: Vec<f64> = occupancy.iter().map(|o| big_ratio(o, &denom)).collect();
        AmplitudeDistribution::new(self.alphabet.clone(), probs)
            .expect("exact occupancy ratios form a distribution")
    }
}

/// Exact count of length-`len` sequences by total energy, capped so that only
/// energies at most `cap_energy` are tracked. Truncation is safe because
/// appending amplitudes only moves energy upward.
#[derive(Debug, Clone)]
pub struct EnergySpectrum {
    len: usize,
    cap_energy: u64,
    /// `counts[j]` = number of sequences with energy `len + 8j`.
    counts: Vec<BigUint>,
}

impl EnergySpectrum {
    pub fn build(alphabet: &AmplitudeAlphabet, len: usize, cap_energy: u64) -> Self {
        let offsets = slot_offsets(alphabet);
        let mut counts = vec![BigUint::one()];
        for step in 1..=len {
            counts = Self::convolve(&counts, &offsets, step, cap_energy, alphabet);
        }
        EnergySpectrum {
            len,
            cap_energy,
            counts,
        }
    }

    /// One more symbol appended; consumes the current spectrum.
    pub fn extend(self, alphabet: &AmplitudeAlphabet) -> Self {
        let offsets = slot_offsets(alphabet);
        let counts = Self::convolve(&self.counts, &offsets, self.len + 1, self.cap_energy, alphabet);
        EnergySpectrum {
            len: self.len + 1,
            cap_energy: self.cap_energy,
            counts,
        }
    }

    fn convolve(
        prev: &[BigUint],
        offsets: &[usize],
        step: usize,
        cap_energy: u64,
        alphabet: &AmplitudeAlphabet,
    ) -> Vec<BigUint> {
        let amax = alphabet.max_amplitude() as u64;
        let natural = step as u64 * (amax * amax - 1) / 8;
        let capped = cap_energy.saturating_sub(step as u64) / 8;
        let slots = natural.min(capped) as usize + 1;
        let mut next = vec![BigUint::zero(); slots];
        for (j, cell) in next.iter_mut().enumerate() {
            for &w in offsets {
                if j >= w && j - w < prev.len() {
                    *cell += &prev[j - w];
                }
            }
        }
        next
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of length-`len` sequences with energy at most `emax`.
    /// `emax` must not exceed the build cap.
    pub fn cumulative_through(&self, emax: u64) -> BigUint {
        assert!(
            emax <= self.cap_energy,
            "query {emax} beyond spectrum cap {}",
            self.cap_energy
        );
        let mut total = BigUint::zero();
        for (j, c) in self.counts.iter().enumerate() {
            let energy = self.len as u64 + 8 * j as u64;
            if energy <= emax {
                total += c;
            }
        }
        total
    }
}

/// Exact `|{a in A^N : sum a^2 <= emax}|`.
pub fn sequence_count(alphabet: &AmplitudeAlphabet, blocklength: usize, emax: u64) -> BigUint {
    if emax < blocklength as u64 {
        return BigUint::zero();
    }
    EnergySpectrum::build(alphabet, blocklength, emax).cumulative_through(emax)
}

/// Smallest `Emax` (of the admissible form `N, N+8, ...`) whose sphere holds
/// at least `2^k` sequences.
pub fn choose_emax_for_rate(
    alphabet: &AmplitudeAlphabet,
    blocklength: usize,
    input_bits: usize,
) -> Result<u64> {
    if blocklength == 0 {
        return Err(Error::InvalidParameter("blocklength must be >= 1".into()));
    }
    let max_bits = blocklength * (alphabet.bits_per_symbol() as usize - 1);
    if input_bits > max_bits {
        return Err(Error::InvalidParameter(format!(
            "{input_bits} bits exceed the {max_bits}-bit capacity of {blocklength} amplitudes"
        )));
    }
    let amax = alphabet.max_amplitude() as u64;
    let full = blocklength as u64 * amax * amax;
    if input_bits == max_bits {
        // Only the full space reaches 2^(N (m-1)) sequences.
        return Ok(full);
    }
    let threshold = BigUint::one() << input_bits;
    // Guess a cap from the Maxwell-Boltzmann energy at a slightly padded
    // rate, growing it if the scan comes up short.
    let mut pad = 0.25f64;
    loop {
        let cap = if blocklength <= 32 {
            full
        } else {
            let h_max = (alphabet.len() as f64).log2();
            let h = (input_bits as f64 / blocklength as f64 + pad).min(h_max);
            let mean_energy = if h >= h_max {
                alphabet
                    .amplitudes()
                    .iter()
                    .map(|&a| (a as f64).powi(2))
                    .sum::<f64>()
                    / alphabet.len() as f64
            } else {
                crate::alphabet::mb_distribution(
                    alphabet,
                    crate::alphabet::fit_mb_for_entropy(alphabet, h)?,
                )?
                .mean_energy()
            };
            (((blocklength as f64) * mean_energy).ceil() as u64 + 512).min(full)
        };
        let spectrum = EnergySpectrum::build(alphabet, blocklength, cap);
        let mut cumulative = BigUint::zero();
        for (j, c) in spectrum.counts.iter().enumerate() {
            cumulative += c;
            if cumulative >= threshold {
                return Ok(blocklength as u64 + 8 * j as u64);
            }
        }
        if cap >= full {
            return Err(Error::InvalidParameter(format!(
                "no admissible Emax reaches 2^{input_bits} sequences"
            )));
        }
        pad *= 2.0;
    }
}

/// Exact per-position amplitude marginal of the sphere ensemble.
///
/// The energy bound is permutation-invariant, so the marginal at every
/// position equals the first-position marginal
/// `P(a) = |sphere(N-1, Emax - a^2)| / |sphere(N, Emax)|`. Agrees with
/// [`EnumerativeTrellis::induced_distribution`] but needs only one spectrum
/// row of memory, which is what makes blocklengths in the thousands cheap.
pub fn sphere_marginal(
    alphabet: &AmplitudeAlphabet,
    blocklength: usize,
    emax: u64,
) -> Result<AmplitudeDistribution> {
    if blocklength == 0 || emax < blocklength as u64 {
        return Err(Error::InvalidParameter(
            "sphere is empty for this blocklength/Emax".into(),
        ));
    }
    let prefix = EnergySpectrum::build(alphabet, blocklength - 1, emax);
    let numerators: Vec<BigUint> = alphabet
        .amplitudes()
        .iter()
        .map(|&a| {
            let e = (a as u64) * (a as u64);
            if blocklength == 1 {
                if e <= emax {
                    BigUint::one()
                } else {
                    BigUint::zero()
                }
            } else if emax >= e + (blocklength as u64 - 1) {
                prefix.cumulative_through(emax - e)
            } else {
                BigUint::zero()
            }
        })
        .collect();
    let denom = prefix.extend(alphabet).cumulative_through(emax);
    debug_assert_eq!(
        numerators.iter().fold(BigUint::zero(), |s, x| s + x),
        denom
    );
    let probs = numerators.iter().map(|x| big_ratio(x, &denom)).collect();
    AmplitudeDistribution::new(alphabet.clone(), probs)
}
