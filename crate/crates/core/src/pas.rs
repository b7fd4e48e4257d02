//! Probabilistic amplitude shaping: shaped amplitudes carry the last `m-1`
//! Gray-label bits of each PAM symbol, while sign bits are taken from parity
//! of a systematic FEC (plus, above FEC rate `(m-1)/m`, a fraction `gamma` of
//! extra uniform information bits).

use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::bits::bit_string;
use crate::error::{Error, Result};
use crate::shaper::AmplitudeShaper;
use crate::util::fnv1a64;

/// A `2^m`-PAM constellation with binary reflected Gray labels.
///
/// Points are ascending `{-(2^m-1), ..., -1, +1, ..., +(2^m-1)}` and the
/// label of the i-th point is `i ^ (i >> 1)`, read MSB first. The first label
/// bit is the sign bit (1 for positive points) and the trailing `m-1` bits
/// identify the amplitude, identically for `+a` and `-a`.
#[derive(Debug, Clone)]
pub struct PamConstellation {
    m: u32,
    points: Vec<i32>,
    labels: Vec<u32>,
    point_by_label: Vec<usize>,
    amplitude_by_suffix: Vec<u32>,
}

impl PamConstellation {
    pub fn brgc(m: u32) -> Result<Self> {
        if m < 2 || m > 16 {
            return Err(Error::InvalidParameter(format!(
                "bits per PAM symbol must be in 2..=16, got {m}"
            )));
        }
        let size = 1usize << m;
        let points: Vec<i32> = (0..size).map(|i| 2 * i as i32 - (size as i32 - 1)).collect();
        let labels: Vec<u32> = (0..size as u32).map(|i| i ^ (i >> 1)).collect();
        let mut point_by_label = vec![0usize; size];
        for (idx, &label) in labels.iter().enumerate() {
            point_by_label[label as usize] = idx;
        }
        let mut amplitude_by_suffix = vec![0u32; size / 2];
        for (idx, &label) in labels.iter().enumerate() {
            if points[idx] > 0 {
                let suffix = label & ((1 << (m - 1)) - 1);
                amplitude_by_suffix[suffix as usize] = points[idx] as u32;
            }
        }
        Ok(Self {
            m,
            points,
            labels,
            point_by_label,
            amplitude_by_suffix,
        })
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.m
    }

    pub fn points(&self) -> &[i32] {
        &self.points
    }

    /// Gray label of each point, aligned with `points()`.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Label bits of a point, MSB first (`bits[0]` is the sign bit).
    pub fn label_bits(&self, point: i32) -> Result<Vec<bool>> {
        let idx = self
            .points
            .binary_search(&point)
            .map_err(|_| Error::InvalidParameter(format!("{point} is not a constellation point")))?;
        let label = self.labels[idx];
        Ok((0..self.m).map(|j| label >> (self.m - 1 - j) & 1 == 1).collect())
    }

    /// Point carrying the given label bits (MSB first).
    pub fn point_for_bits(&self, bits: &[bool]) -> Result<i32> {
        if bits.len() != self.m as usize {
            return Err(Error::FrameLength(format!(
                "{} label bits for {}-bit symbols",
                bits.len(),
                self.m
            )));
        }
        let mut label = 0u32;
        for &b in bits {
            label = label << 1 | b as u32;
        }
        Ok(self.points[self.point_by_label[label as usize]])
    }

    /// The `m-1` amplitude bits shared by `+a` and `-a`.
    pub fn amplitude_bits(&self, amplitude: u32) -> Result<Vec<bool>> {
        let bits = self.label_bits(amplitude as i32)?;
        Ok(bits[1..].to_vec())
    }

    /// Amplitude identified by `m-1` label bits.
    pub fn amplitude_for_bits(&self, bits: &[bool]) -> Result<u32> {
        if bits.len() != self.m as usize - 1 {
            return Err(Error::FrameLength(format!(
                "{} amplitude bits for {}-bit symbols",
                bits.len(),
                self.m
            )));
        }
        let mut suffix = 0u32;
        for &b in bits {
            suffix = suffix << 1 | b as u32;
        }
        Ok(self.amplitude_by_suffix[suffix as usize])
    }

    /// Signed point from a sign bit (true = positive) and an amplitude.
    pub fn point_for_sign_amplitude(&self, sign: bool, amplitude: u32) -> i32 {
        if sign {
            amplitude as i32
        } else {
            -(amplitude as i32)
        }
    }
}

/// Map uniform bits straight onto PAM symbols, `m` bits each (the unshaped
/// baseline).
pub fn uniform_map(bits: &[bool], constellation: &PamConstellation) -> Result<Vec<i32>> {
    let m = constellation.bits_per_symbol() as usize;
    if bits.len() % m != 0 {
        return Err(Error::FrameLength(format!(
            "{} bits is not a multiple of {m}",
            bits.len()
        )));
    }
    bits.chunks(m)
        .map(|chunk| constellation.point_for_bits(chunk))
        .collect()
}

/// Systematic FEC seen from the PAS framing: payload in, parity out.
pub trait SystematicFec: Send + Sync {
    fn payload_bits(&self) -> usize;
    fn parity_bits(&self) -> usize;
    fn encode_parity(&self, payload: &[bool]) -> Result<Vec<bool>>;
}

/// Structural stand-in for the LDPC encoder: parity is the payload times a
/// fixed pseudo-random binary matrix over GF(2). Deterministic for a given
/// shape, encode-only.
pub struct PseudoRandomFec {
    payload_bits: usize,
    parity_bits: usize,
    parity_words: usize,
    /// Row-major `payload_bits x parity_words` packed matrix.
    rows: Vec<u64>,
}

impl PseudoRandomFec {
    pub fn new(payload_bits: usize, parity_bits: usize) -> Self {
        let parity_words = parity_bits.div_ceil(64);
        let seed = fnv1a64(format!("pasim-fec-v1:{payload_bits}x{parity_bits}").as_bytes());
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let rows = (0..payload_bits * parity_words)
            .map(|_| rng.random::<u64>())
            .collect();
        Self {
            payload_bits,
            parity_bits,
            parity_words,
            rows,
        }
    }
}

impl SystematicFec for PseudoRandomFec {
    fn payload_bits(&self) -> usize {
        self.payload_bits
    }

    fn parity_bits(&self) -> usize {
        self.parity_bits
    }

    fn encode_parity(&self, payload: &[bool]) -> Result<Vec<bool>> {
        if payload.len() != self.payload_bits {
            return Err(Error::FrameLength(format!(
                "payload {} bits, FEC expects {}",
                payload.len(),
                self.payload_bits
            )));
        }
        let mut acc = vec![0u64; self.parity_words];
        for (i, &bit) in payload.iter().enumerate() {
            if bit {
                let row = &self.rows[i * self.parity_words..(i + 1) * self.parity_words];
                for (a, &r) in acc.iter_mut().zip(row) {
                    *a ^= r;
                }
            }
        }
        Ok((0..self.parity_bits)
            .map(|j| acc[j / 64] >> (j % 64) & 1 == 1)
            .collect())
    }
}

/// Per-frame bit accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameBookkeeping {
    /// Shaper input bits `k`.
    pub shaped_bits: usize,
    /// Uniform information bits on the sign plane, `gamma * N`.
    pub info_sign_bits: usize,
    /// Parity bits on the sign plane, `(1 - gamma) * N`.
    pub parity_sign_bits: usize,
}

/// One assembled PAS frame.
#[derive(Debug, Clone)]
pub struct PasFrame {
    pub amplitudes: Vec<u32>,
    /// Sign bits in transmit order (true maps to the positive point).
    pub sign_bits: Vec<bool>,
    pub symbols: Vec<i32>,
    pub bookkeeping: FrameBookkeeping,
}

impl PasFrame {
    /// The `N * m` mapped label bits in transmit order (sign bit first within
    /// each symbol), i.e. what a bit-metric receiver decides on.
    pub fn mapped_bits(&self, constellation: &PamConstellation) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.symbols.len() * constellation.bits_per_symbol() as usize);
        for &s in &self.symbols {
            out.extend(constellation.label_bits(s).expect("frame symbols are points"));
        }
        out
    }

    /// Diagnostic per-position dump: `position,amplitude,sign,symbol,bits`.
    pub fn dump_csv(&self, constellation: &PamConstellation) -> String {
        let mut out = String::from("position,amplitude,sign,symbol,bits\n");
        for (i, &s) in self.symbols.iter().enumerate() {
            let bits = constellation.label_bits(s).expect("frame symbols are points");
            out.push_str(&format!(
                "{i},{},{},{s},{}\n",
                self.amplitudes[i],
                if self.sign_bits[i] { 1 } else { -1 },
                bit_string(&bits)
            ));
        }
        out
    }
}

/// PAS transmitter/receiver configuration for one shaper.
pub struct PasConfig {
    shaper: Arc<dyn AmplitudeShaper>,
    constellation: PamConstellation,
    gamma: f64,
    info_sign_bits: usize,
    parity_sign_bits: usize,
    fec: Box<dyn SystematicFec>,
}

impl PasConfig {
    /// `gamma` in `[0, 1)` selects the FEC rate `(m-1+gamma)/m`; the boundary
    /// `gamma = 1` (uncoded transmission) is accepted for experiments.
    /// `gamma * N` must be an integer.
    pub fn new(shaper: Arc<dyn AmplitudeShaper>, m: u32, gamma: f64) -> Result<Self> {
        let constellation = PamConstellation::brgc(m)?;
        if shaper.alphabet().bits_per_symbol() != m {
            return Err(Error::InvalidParameter(format!(
                "shaper alphabet is {}-bit, constellation is {m}-bit",
                shaper.alphabet().bits_per_symbol()
            )));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!(
                "gamma {gamma} outside [0, 1]"
            )));
        }
        let n = shaper.blocklength();
        let info_exact = gamma * n as f64;
        let info_sign_bits = info_exact.round() as usize;
        if (info_exact - info_sign_bits as f64).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "gamma * N = {info_exact} must be an integer"
            )));
        }
        let parity_sign_bits = n - info_sign_bits;
        let payload = info_sign_bits + (m as usize - 1) * n;
        let fec = Box::new(PseudoRandomFec::new(payload, parity_sign_bits));
        Ok(Self {
            shaper,
            constellation,
            gamma,
            info_sign_bits,
            parity_sign_bits,
            fec,
        })
    }

    pub fn shaper(&self) -> &dyn AmplitudeShaper {
        self.shaper.as_ref()
    }

    pub fn constellation(&self) -> &PamConstellation {
        &self.constellation
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn blocklength(&self) -> usize {
        self.shaper.blocklength()
    }

    /// Information bits consumed per frame, `k + gamma N`.
    pub fn information_bits(&self) -> usize {
        self.shaper.input_bits() + self.info_sign_bits
    }

    /// FEC rate `(m - 1 + gamma) / m`.
    pub fn fec_rate(&self) -> f64 {
        let m = self.constellation.bits_per_symbol() as f64;
        (m - 1.0 + self.gamma) / m
    }

    /// Information rate in bits per 1D symbol, `R_s + gamma`.
    pub fn information_rate(&self) -> f64 {
        self.shaper.shaping_rate() + self.gamma
    }

    /// Build a frame from `k + gamma N` information bits: the first `k` bits
    /// feed the shaper, the rest ride the sign plane ahead of the parity.
    pub fn assemble(&self, info_bits: &[bool]) -> Result<PasFrame> {
        if info_bits.len() != self.information_bits() {
            return Err(Error::FrameLength(format!(
                "{} information bits, frame takes {}",
                info_bits.len(),
                self.information_bits()
            )));
        }
        let k = self.shaper.input_bits();
        let amplitudes = self.shaper.shape(&info_bits[..k])?;
        let mut amplitude_bits =
            Vec::with_capacity((self.constellation.m as usize - 1) * amplitudes.len());
        for &a in &amplitudes {
            amplitude_bits.extend(self.constellation.amplitude_bits(a)?);
        }
        // FEC payload: the gamma-branch information bits, then the shaped
        // amplitude bits.
        let mut payload = Vec::with_capacity(self.fec.payload_bits());
        payload.extend_from_slice(&info_bits[k..]);
        payload.extend_from_slice(&amplitude_bits);
        let parity = self.fec.encode_parity(&payload)?;
        debug_assert_eq!(parity.len(), self.parity_sign_bits);

        let mut sign_bits = Vec::with_capacity(self.blocklength());
        sign_bits.extend_from_slice(&info_bits[k..]);
        sign_bits.extend_from_slice(&parity);
        let symbols = amplitudes
            .iter()
            .zip(&sign_bits)
            .map(|(&a, &s)| self.constellation.point_for_sign_amplitude(s, a))
            .collect();
        Ok(PasFrame {
            amplitudes,
            sign_bits,
            symbols,
            bookkeeping: FrameBookkeeping {
                shaped_bits: k,
                info_sign_bits: self.info_sign_bits,
                parity_sign_bits: self.parity_sign_bits,
            },
        })
    }

    /// Invert the mapping from `N * m` decided label bits back to the
    /// `k + gamma N` information bits. Error-free input round-trips; corrupt
    /// amplitude bits either change the payload or surface the shaper's
    /// decode failure.
    pub fn disassemble(&self, decided_bits: &[bool]) -> Result<Vec<bool>> {
        let m = self.constellation.bits_per_symbol() as usize;
        let n = self.blocklength();
        if decided_bits.len() != n * m {
            return Err(Error::FrameLength(format!(
                "{} decided bits, frame carries {}",
                decided_bits.len(),
                n * m
            )));
        }
        let mut amplitudes = Vec::with_capacity(n);
        let mut sign_info = Vec::with_capacity(self.info_sign_bits);
        for (i, chunk) in decided_bits.chunks(m).enumerate() {
            if i < self.info_sign_bits {
                sign_info.push(chunk[0]);
            }
            amplitudes.push(self.constellation.amplitude_for_bits(&chunk[1..])?);
        }
        let mut info = self.shaper.deshape(&amplitudes)?;
        info.extend_from_slice(&sign_info);
        Ok(info)
    }
}
