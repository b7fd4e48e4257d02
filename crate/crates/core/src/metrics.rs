//! Effective SNR, prior-aware LLRs, the finite-blocklength BMD rate, and
//! pre-FEC BER.

use rustfft::num_complex::Complex64;

use crate::alphabet::AmplitudeDistribution;
use crate::error::{Error, Result};
use crate::pas::PamConstellation;

/// LLR magnitudes are clamped here; keeps degenerate priors (zero-count
/// amplitudes) and vanishing noise finite.
pub const LLR_CLAMP: f64 = 300.0;

/// `10 log10( E[|X|^2] / E[|Y-X|^2] )` over the record, `+inf` when the
/// error power is exactly zero.
pub fn effective_snr_db(tx: &[Complex64], rx: &[Complex64]) -> f64 {
    assert_eq!(tx.len(), rx.len(), "record lengths differ");
    assert!(!tx.is_empty(), "empty record");
    let signal: f64 = tx.iter().map(|x| x.norm_sqr()).sum();
    let error: f64 = tx
        .iter()
        .zip(rx)
        .map(|(x, y)| (y - x).norm_sqr())
        .sum();
    if error == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (signal / error).log10()
}

/// Mean squared error per 2D symbol (the Gaussian auxiliary-channel
/// variance handed to the demapper).
pub fn error_variance(tx: &[Complex64], rx: &[Complex64]) -> f64 {
    assert_eq!(tx.len(), rx.len());
    assert!(!tx.is_empty());
    tx.iter()
        .zip(rx)
        .map(|(x, y)| (y - x).norm_sqr())
        .sum::<f64>()
        / tx.len() as f64
}

/// Soft demapper for one PAM dimension of a square QAM constellation with
/// (possibly shaped) symbol priors: sign bits uniform, amplitudes from the
/// shaper's distribution.
#[derive(Debug, Clone)]
pub struct Demapper {
    points: Vec<f64>,
    log_priors: Vec<f64>,
    labels: Vec<u32>,
    m: usize,
}

impl Demapper {
    /// `scale` divides the integer constellation points (use
    /// [`Demapper::unit_energy`] for the normalized chain).
    pub fn new(
        constellation: &PamConstellation,
        priors: &AmplitudeDistribution,
        scale: f64,
    ) -> Result<Self> {
        if priors.alphabet().bits_per_symbol() != constellation.bits_per_symbol() {
            return Err(Error::InvalidParameter(
                "prior alphabet does not match the constellation".into(),
            ));
        }
        if !(scale > 0.0) {
            return Err(Error::InvalidParameter("scale must be positive".into()));
        }
        let m = constellation.bits_per_symbol() as usize;
        let mut points = Vec::with_capacity(1 << m);
        let mut log_priors = Vec::with_capacity(1 << m);
        let mut labels = Vec::with_capacity(1 << m);
        for (idx, &p) in constellation.points().iter().enumerate() {
            let amp_idx = priors.alphabet().index_of(p.unsigned_abs())?;
            let prob = priors.probabilities()[amp_idx] / 2.0;
            points.push(p as f64 / scale);
            log_priors.push(if prob > 0.0 { prob.ln() } else { f64::NEG_INFINITY });
            labels.push(constellation.labels()[idx]);
        }
        Ok(Self {
            points,
            log_priors,
            labels,
            m,
        })
    }

    /// Normalization that gives the paired-PAM (QAM) stream unit energy:
    /// points divided by `sqrt(2 E[a^2])`.
    pub fn unit_energy(
        constellation: &PamConstellation,
        priors: &AmplitudeDistribution,
    ) -> Result<Self> {
        Self::new(constellation, priors, (2.0 * priors.mean_energy()).sqrt())
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.m
    }

    /// Scaled TX point for a (sign, amplitude) pair.
    pub fn tx_point(&self, constellation: &PamConstellation, sign: bool, amplitude: u32) -> f64 {
        let p = constellation.point_for_sign_amplitude(sign, amplitude);
        let idx = constellation
            .points()
            .iter()
            .position(|&q| q == p)
            .expect("point in constellation");
        self.points[idx]
    }

    /// Bit LLRs `ln P(c_j = 0 | y) / P(c_j = 1 | y)` for one received PAM
    /// sample under a Gaussian auxiliary channel with per-2D variance
    /// `sigma2`. Stabilized by log-sum-exp and clamped to `LLR_CLAMP`.
    pub fn llrs(&self, y: f64, sigma2: f64, out: &mut [f64]) {
        assert_eq!(out.len(), self.m);
        assert!(sigma2 > 0.0, "auxiliary channel variance must be positive");
        assert!(self.points.len() <= 64, "metric scratch sized for m <= 6");
        // Per-dimension Gaussian exponent: (y - x)^2 / sigma2_2D, since each
        // quadrature carries half the 2D noise variance.
        let mut metric = [0f64; 64];
        let size = self.points.len();
        for i in 0..size {
            let d = y - self.points[i];
            metric[i] = self.log_priors[i] - d * d / sigma2;
        }
        for (j, slot) in out.iter_mut().enumerate() {
            let bit = self.m - 1 - j; // label bit j is this position from MSB
            let mut max0 = f64::NEG_INFINITY;
            let mut max1 = f64::NEG_INFINITY;
            for i in 0..size {
                if self.labels[i] >> bit & 1 == 0 {
                    max0 = max0.max(metric[i]);
                } else {
                    max1 = max1.max(metric[i]);
                }
            }
            let lse = |max: f64, class: u32| -> f64 {
                if max == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                let mut sum = 0.0;
                for i in 0..size {
                    if self.labels[i] >> bit & 1 == class {
                        sum += (metric[i] - max).exp();
                    }
                }
                max + sum.ln()
            };
            let l0 = lse(max0, 0);
            let l1 = lse(max1, 1);
            *slot = if l0 == f64::NEG_INFINITY {
                -LLR_CLAMP
            } else if l1 == f64::NEG_INFINITY {
                LLR_CLAMP
            } else {
                (l0 - l1).clamp(-LLR_CLAMP, LLR_CLAMP)
            };
        }
    }
}

/// One-shot LLR computation (see [`Demapper::llrs`] for the hot-loop form).
pub fn compute_llrs(
    rx_pam: f64,
    constellation: &PamConstellation,
    priors: &AmplitudeDistribution,
    sigma2: f64,
) -> Result<Vec<f64>> {
    let demapper = Demapper::unit_energy(constellation, priors)?;
    let mut out = vec![0.0; demapper.bits_per_symbol()];
    demapper.llrs(rx_pam, sigma2, &mut out);
    Ok(out)
}

/// `log2(1 + exp(x))`, stable for large magnitudes.
fn log2_1p_exp(x: f64) -> f64 {
    const LN2: f64 = std::f64::consts::LN_2;
    if x <= 0.0 {
        x.exp().ln_1p() / LN2
    } else {
        x / LN2 + (-x).exp().ln_1p() / LN2
    }
}

/// Monte-Carlo accumulator for the bitwise conditional entropies
/// `H(C_j | Y) ~= (1/n) sum log2(1 + exp(-(1-2c) lambda))`.
#[derive(Debug, Clone)]
pub struct BmdAccumulator {
    sums: Vec<f64>,
    samples: usize,
}

impl BmdAccumulator {
    pub fn new(bits_per_symbol: usize) -> Self {
        Self {
            sums: vec![0.0; bits_per_symbol],
            samples: 0,
        }
    }

    /// Fold one PAM symbol's transmitted bits and LLRs.
    pub fn push(&mut self, bits: &[bool], llrs: &[f64]) {
        debug_assert_eq!(bits.len(), self.sums.len());
        debug_assert_eq!(llrs.len(), self.sums.len());
        for ((sum, &c), &llr) in self.sums.iter_mut().zip(bits).zip(llrs) {
            let sign = if c { -1.0 } else { 1.0 }; // (1 - 2c)
            *sum += log2_1p_exp(-sign * llr);
        }
        self.samples += 1;
    }

    pub fn merge(&mut self, other: &BmdAccumulator) {
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
        self.samples += other.samples;
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Estimated `H(C_j | Y)` per bit level, bits.
    pub fn conditional_entropies(&self) -> Vec<f64> {
        assert!(self.samples > 0, "no samples folded");
        self.sums.iter().map(|s| s / self.samples as f64).collect()
    }

    /// Finite-blocklength BMD rate per 2D symbol:
    /// `2 [ H(C) - sum_j H(C_j|Y) ] - 2 R_L`, with `H(C)` the per-PAM mapped
    /// bit-vector entropy and `R_L` in bits per amplitude.
    pub fn air_n_2d(&self, h_c_per_pam: f64, rate_loss: f64) -> f64 {
        let cond: f64 = self.conditional_entropies().iter().sum();
        2.0 * (h_c_per_pam - cond) - 2.0 * rate_loss
    }
}

/// Entropy of the mapped bit vector of one PAM symbol: a uniform sign bit
/// plus the amplitude entropy (sign and amplitude are independent in PAS).
pub fn pam_bit_vector_entropy(dist: &AmplitudeDistribution) -> f64 {
    1.0 + dist.entropy()
}

/// Convenience over [`BmdAccumulator`] for whole records.
pub fn air_n(
    bit_rows: &[Vec<bool>],
    llr_rows: &[Vec<f64>],
    h_c_per_pam: f64,
    rate_loss: f64,
) -> f64 {
    assert_eq!(bit_rows.len(), llr_rows.len());
    let m = bit_rows.first().map(|r| r.len()).unwrap_or(0);
    let mut acc = BmdAccumulator::new(m);
    for (bits, llrs) in bit_rows.iter().zip(llr_rows) {
        acc.push(bits, llrs);
    }
    acc.air_n_2d(h_c_per_pam, rate_loss)
}

/// Hard-decision bit error ratio against reference bits (`llr < 0` decides 1).
pub fn ber_from_llrs(reference: &[bool], llrs: &[f64]) -> f64 {
    assert_eq!(reference.len(), llrs.len());
    assert!(!reference.is_empty());
    let errors = reference
        .iter()
        .zip(llrs)
        .filter(|(&c, &l)| c != (l < 0.0))
        .count();
    errors as f64 / reference.len() as f64
}

/// Bit error ratio between two decided bit streams.
pub fn ber_from_decisions(reference: &[bool], decided: &[bool]) -> f64 {
    assert_eq!(reference.len(), decided.len());
    assert!(!reference.is_empty());
    let errors = reference
        .iter()
        .zip(decided)
        .filter(|(a, b)| a != b)
        .count();
    errors as f64 / reference.len() as f64
}

/// One measured operating point, serialized as one CSV row per
/// (scheme, blocklength, sweep value, seed).
#[derive(Debug, Clone)]
pub struct MetricReport {
    pub scheme: String,
    /// Shaping blocklength; 0 for uniform signaling.
    pub blocklength: usize,
    /// Sweep coordinate: SNR in dB for AWGN runs, launch power in dBm for
    /// fiber runs.
    pub x_value: f64,
    pub effective_snr_db: f64,
    pub air_n_bits_per_2d: f64,
    pub rate_loss_bits_per_amp: f64,
    pub pre_fec_ber: f64,
    /// Number of 2D symbols measured.
    pub qam_symbols: usize,
    pub seed: u64,
}

impl MetricReport {
    pub fn csv_header() -> &'static str {
        "scheme,blocklength,x_value,effective_snr_db,air_n_bits_per_2d,rate_loss_bits_per_amp,pre_fec_ber,qam_symbols,seed"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6e},{},{}",
            self.scheme,
            self.blocklength,
            self.x_value,
            self.effective_snr_db,
            self.air_n_bits_per_2d,
            self.rate_loss_bits_per_amp,
            self.pre_fec_ber,
            self.qam_symbols,
            self.seed
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::AmplitudeAlphabet;

    fn c3() -> PamConstellation {
        PamConstellation::brgc(3).unwrap()
    }

    fn uniform3() -> AmplitudeDistribution {
        AmplitudeAlphabet::for_bits(3).unwrap().uniform()
    }

    #[test]
    fn effective_snr_known_cases() {
        let x = vec![Complex64::new(1.0, 0.0); 4];
        // y = 2x: error power equals signal power -> 0 dB
        let y: Vec<Complex64> = x.iter().map(|v| v * 2.0).collect();
        assert!(effective_snr_db(&x, &y).abs() < 1e-12);
        // y = x: infinite SNR, distinctly signaled
        assert_eq!(effective_snr_db(&x, &x), f64::INFINITY);
    }

    #[test]
    fn llr_signs_match_labels_at_vanishing_noise() {
        let c = c3();
        let demapper = Demapper::unit_energy(&c, &uniform3()).unwrap();
        let scale = (2.0 * uniform3().mean_energy()).sqrt();
        let mut llrs = vec![0.0; 3];
        for &p in c.points() {
            demapper.llrs(p as f64 / scale, 1e-6, &mut llrs);
            let bits = c.label_bits(p).unwrap();
            for (j, &b) in bits.iter().enumerate() {
                assert!(llrs[j].is_finite());
                assert_eq!(llrs[j] < 0.0, b, "point {p} bit {j}");
            }
        }
    }

    #[test]
    fn sign_llr_is_zero_on_the_boundary() {
        let demapper = Demapper::unit_energy(&c3(), &uniform3()).unwrap();
        let mut llrs = vec![0.0; 3];
        demapper.llrs(0.0, 0.05, &mut llrs);
        assert!(llrs[0].abs() < 1e-12, "sign LLR {} at y=0", llrs[0]);
    }

    #[test]
    fn shaped_priors_skew_amplitude_llrs() {
        // Strong shaping pulls the amplitude decision toward low energy at a
        // point equidistant between amplitudes 1 and 3. Verified against a
        // direct posterior summation.
        let alphabet = AmplitudeAlphabet::for_bits(3).unwrap();
        let shaped =
            AmplitudeDistribution::new(alphabet.clone(), vec![0.55, 0.30, 0.10, 0.05]).unwrap();
        let c = c3();
        let sigma2 = 0.2;
        let y_mid = 2.0; // halfway between +1 and +3 in unscaled units
        let scale = (2.0 * shaped.mean_energy()).sqrt();
        let shaped_llrs = compute_llrs(y_mid / scale, &c, &shaped, sigma2).unwrap();
        let uniform_llrs = compute_llrs(y_mid / scale, &c, &uniform3(), sigma2).unwrap();

        // brute-force posterior over the 8 points (no log-sum-exp tricks)
        let posterior = |bit: usize, value: bool| -> f64 {
            let mut total = 0.0;
            for &p in c.points() {
                let bits = c.label_bits(p).unwrap();
                if bits[bit] != value {
                    continue;
                }
                let amp = p.unsigned_abs();
                let i = alphabet.index_of(amp).unwrap();
                let prior = shaped.probabilities()[i] / 2.0;
                let d = y_mid / scale - p as f64 / scale;
                total += prior * (-d * d / sigma2).exp();
            }
            total
        };
        for j in 0..3 {
            let direct = (posterior(j, false) / posterior(j, true)).ln();
            assert!(
                (shaped_llrs[j] - direct).abs() < 1e-9,
                "bit {j}: {} vs {direct}",
                shaped_llrs[j]
            );
        }
        // The second bit separates {1,3} (bit=1) from {5,7} (bit=0); shaping
        // toward low amplitudes drives it more negative than uniform.
        assert!(shaped_llrs[1] < uniform_llrs[1]);
    }

    #[test]
    fn air_reaches_capacity_without_noise() {
        // Uniform 64-QAM, vanishing noise: AIR -> 6 bits/2D.
        let c = c3();
        let dist = uniform3();
        let demapper = Demapper::unit_energy(&c, &dist).unwrap();
        let scale = (2.0 * dist.mean_energy()).sqrt();
        let mut acc = BmdAccumulator::new(3);
        let mut llrs = vec![0.0; 3];
        for &p in c.points() {
            demapper.llrs(p as f64 / scale, 1e-8, &mut llrs);
            acc.push(&c.label_bits(p).unwrap(), &llrs);
        }
        let air = acc.air_n_2d(pam_bit_vector_entropy(&dist), 0.0);
        assert!((air - 6.0).abs() < 1e-6, "AIR {air}");
    }

    #[test]
    fn ber_endpoints() {
        let bits = vec![true, false, true, true];
        assert_eq!(ber_from_llrs(&bits, &[-1.0, 1.0, -2.0, -0.5]), 0.0);
        assert_eq!(ber_from_llrs(&bits, &[1.0, -1.0, 2.0, 0.5]), 1.0);
        assert_eq!(ber_from_decisions(&bits, &bits), 0.0);
    }

    #[test]
    fn csv_row_is_stable() {
        let r = MetricReport {
            scheme: "ess-200".into(),
            blocklength: 200,
            x_value: 14.0,
            effective_snr_db: 13.97,
            air_n_bits_per_2d: 4.41,
            rate_loss_bits_per_amp: 0.02,
            pre_fec_ber: 0.0123,
            qam_symbols: 1000,
            seed: 7,
        };
        assert_eq!(r.csv_row(), r.csv_row());
        assert!(r.csv_row().starts_with("ess-200,200,14.000000,"));
    }
}
