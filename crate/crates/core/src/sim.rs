//! Experiment harness: builds a signaling scheme, drives it over the AWGN or
//! fiber channel, and reduces the record to a `MetricReport`.
//!
//! Determinism: every block (AWGN) or record (fiber) draws from its own
//! generator seeded `master_seed ^ block_index`, and reductions fold in
//! block order, so a report is a pure function of (config, seed) even when
//! records are processed on a thread pool.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand_chacha::ChaCha12Rng;
use rand::SeedableRng;
use rustfft::num_complex::Complex64;

use crate::alphabet::{AmplitudeAlphabet, AmplitudeDistribution};
use crate::bits::random_bits;
use crate::ccdm::CcdmCode;
use crate::channel::fiber::{cd_compensate, phase_derotate, FiberLinkConfig, SsfmEngine};
use crate::channel::rrc::{rrc_matched_filter, rrc_shape, sample_symbols, RrcFilter};
use crate::channel::{awgn, AwgnConfig};
use crate::error::{Error, Result};
use crate::ess::{choose_emax_for_rate, stream::load_or_build, EssCode};
use crate::metrics::{
    effective_snr_db, error_variance, pam_bit_vector_entropy, BmdAccumulator, Demapper,
    MetricReport,
};
use crate::pas::{uniform_map, PamConstellation, PasConfig};
use crate::shaper::AmplitudeShaper;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Uniform,
    Ess,
    Ccdm,
}

impl SchemeKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(SchemeKind::Uniform),
            "ess" => Ok(SchemeKind::Ess),
            "ccdm" => Ok(SchemeKind::Ccdm),
            other => Err(Error::InvalidParameter(format!(
                "unknown scheme '{other}' (uniform | ess | ccdm)"
            ))),
        }
    }
}

/// What to transmit: modulation size, shaper, and the PAS rate split.
#[derive(Debug, Clone)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub bits_per_symbol: u32,
    /// Shaping blocklength (0 for uniform).
    pub blocklength: usize,
    /// Shaper input bits per block (0 for uniform).
    pub shaping_bits: usize,
    /// Extra uniform information bits per sign, FEC rate `(m-1+gamma)/m`.
    pub gamma: f64,
}

impl SchemeConfig {
    pub fn uniform(bits_per_symbol: u32) -> Self {
        Self {
            kind: SchemeKind::Uniform,
            bits_per_symbol,
            blocklength: 0,
            shaping_bits: 0,
            gamma: 0.0,
        }
    }

    /// Shaped scheme at rate `shaping_rate` bits/amplitude;
    /// `shaping_rate * blocklength` must be an integer bit budget.
    pub fn shaped(
        kind: SchemeKind,
        bits_per_symbol: u32,
        blocklength: usize,
        shaping_rate: f64,
        gamma: f64,
    ) -> Result<Self> {
        if kind == SchemeKind::Uniform {
            return Ok(Self::uniform(bits_per_symbol));
        }
        let bits_exact = shaping_rate * blocklength as f64;
        let shaping_bits = bits_exact.round() as usize;
        if (bits_exact - shaping_bits as f64).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "shaping rate {shaping_rate} at N={blocklength} is not an integer bit budget"
            )));
        }
        Ok(Self {
            kind,
            bits_per_symbol,
            blocklength,
            shaping_bits,
            gamma,
        })
    }

    pub fn label(&self) -> String {
        match self.kind {
            SchemeKind::Uniform => "uniform".into(),
            SchemeKind::Ess => format!("ess-{}", self.blocklength),
            SchemeKind::Ccdm => format!("ccdm-{}", self.blocklength),
        }
    }
}

/// A built scheme: constellation, framing, and the analytic quantities the
/// metrics need.
pub struct SchemeInstance {
    pub config: SchemeConfig,
    pub constellation: PamConstellation,
    pub pas: Option<PasConfig>,
    pub distribution: AmplitudeDistribution,
    /// Entropy of the mapped bit vector per PAM symbol.
    pub h_c: f64,
    pub rate_loss: f64,
    /// PAM symbols per generation/derotation block.
    pub frame_pam: usize,
}

/// Derotation/framing unit for uniform signaling, chosen to match the short
/// shaped blocks it is compared against.
const UNIFORM_BLOCK_PAM: usize = 200;

/// Instantiate a scheme; ESS tables can be cached under `cache_dir`.
pub fn build_scheme(config: &SchemeConfig, cache_dir: Option<&Path>) -> Result<SchemeInstance> {
    let constellation = PamConstellation::brgc(config.bits_per_symbol)?;
    let alphabet = AmplitudeAlphabet::for_bits(config.bits_per_symbol)?;
    match config.kind {
        SchemeKind::Uniform => {
            let distribution = alphabet.uniform();
            let h_c = pam_bit_vector_entropy(&distribution);
            Ok(SchemeInstance {
                config: config.clone(),
                constellation,
                pas: None,
                distribution,
                h_c,
                rate_loss: 0.0,
                frame_pam: UNIFORM_BLOCK_PAM,
            })
        }
        SchemeKind::Ess => {
            let emax = choose_emax_for_rate(&alphabet, config.blocklength, config.shaping_bits)?;
            let trellis = load_or_build(&alphabet, config.blocklength, emax, cache_dir)?;
            let code = EssCode::with_input_bits(trellis, config.shaping_bits)?;
            finish_shaped(config, constellation, Arc::new(code))
        }
        SchemeKind::Ccdm => {
            let code = CcdmCode::for_rate(&alphabet, config.blocklength, config.shaping_bits)?;
            finish_shaped(config, constellation, Arc::new(code))
        }
    }
}

fn finish_shaped(
    config: &SchemeConfig,
    constellation: PamConstellation,
    shaper: Arc<dyn AmplitudeShaper>,
) -> Result<SchemeInstance> {
    let distribution = shaper.distribution();
    // H(C) and the rate loss both come from the shaper's target law, which
    // keeps the finite-blocklength rate identity H(C) - R_L = 1 + R_s exact.
    let report = shaper.rate_report();
    let h_c = pam_bit_vector_entropy(&shaper.target_distribution());
    let pas = PasConfig::new(shaper, config.bits_per_symbol, config.gamma)?;
    Ok(SchemeInstance {
        config: config.clone(),
        constellation,
        pas: Some(pas),
        distribution,
        h_c,
        rate_loss: report.rate_loss,
        frame_pam: config.blocklength,
    })
}

impl SchemeInstance {
    pub fn label(&self) -> String {
        self.config.label()
    }

    /// Scale that gives paired-PAM QAM symbols unit mean energy.
    pub fn qam_scale(&self) -> f64 {
        (2.0 * self.distribution.mean_energy()).sqrt()
    }

    /// Generate one block of PAM symbols and their mapped label bits.
    pub fn generate_block(&self, rng: &mut ChaCha12Rng) -> (Vec<i32>, Vec<bool>) {
        match &self.pas {
            Some(pas) => {
                let info = random_bits(rng, pas.information_bits());
                let frame = pas.assemble(&info).expect("sized info bits");
                let bits = frame.mapped_bits(&self.constellation);
                (frame.symbols, bits)
            }
            None => {
                let m = self.constellation.bits_per_symbol() as usize;
                let bits = random_bits(rng, self.frame_pam * m);
                let symbols = uniform_map(&bits, &self.constellation).expect("sized bits");
                (symbols, bits)
            }
        }
    }
}

/// Pair consecutive PAM symbols into unit-energy QAM symbols.
fn pam_to_qam(pam: &[i32], scale: f64) -> Vec<Complex64> {
    pam.chunks_exact(2)
        .map(|p| Complex64::new(p[0] as f64 / scale, p[1] as f64 / scale))
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct AwgnPointSpec {
    pub snr_db: f64,
    /// Lower bound; rounded up to whole shaping blocks.
    pub min_qam_symbols: usize,
    pub seed: u64,
}

/// Measure one scheme at one AWGN operating point.
///
/// Runs the block loop twice with identical per-block seeds: first to
/// measure the error variance that parameterizes the demapper, then to fold
/// LLR statistics, so memory stays flat regardless of record length.
pub fn run_awgn_point(inst: &SchemeInstance, spec: &AwgnPointSpec) -> Result<MetricReport> {
    if inst.frame_pam % 2 != 0 {
        return Err(Error::InvalidParameter(
            "odd PAM count per block cannot pair into QAM symbols".into(),
        ));
    }
    let qam_per_block = inst.frame_pam / 2;
    let blocks = spec.min_qam_symbols.div_ceil(qam_per_block).max(1);
    let noise = AwgnConfig::from_snr_db(spec.snr_db, 1.0)?;
    let scale = inst.qam_scale();

    let mut signal_power = 0.0;
    let mut error_power = 0.0;
    for b in 0..blocks {
        let mut rng = ChaCha12Rng::seed_from_u64(spec.seed ^ b as u64);
        let (pam, _bits) = inst.generate_block(&mut rng);
        let tx = pam_to_qam(&pam, scale);
        let rx = awgn(&tx, &noise, &mut rng);
        for (x, y) in tx.iter().zip(&rx) {
            signal_power += x.norm_sqr();
            error_power += (y - x).norm_sqr();
        }
    }
    let qam_symbols = blocks * qam_per_block;
    let sigma2 = error_power / qam_symbols as f64;
    let snr_measured = 10.0 * (signal_power / error_power).log10();

    let demapper = Demapper::unit_energy(&inst.constellation, &inst.distribution)?;
    let m = inst.constellation.bits_per_symbol() as usize;
    let mut acc = BmdAccumulator::new(m);
    let mut llrs = vec![0.0; m];
    let mut bit_errors = 0usize;
    let mut bit_total = 0usize;
    for b in 0..blocks {
        let mut rng = ChaCha12Rng::seed_from_u64(spec.seed ^ b as u64);
        let (pam, bits) = inst.generate_block(&mut rng);
        let tx = pam_to_qam(&pam, scale);
        let rx = awgn(&tx, &noise, &mut rng);
        for (i, y) in rx.iter().enumerate() {
            for (dim, y_pam) in [y.re, y.im].into_iter().enumerate() {
                let pam_idx = 2 * i + dim;
                let pam_bits = &bits[pam_idx * m..(pam_idx + 1) * m];
                demapper.llrs(y_pam, sigma2, &mut llrs);
                acc.push(pam_bits, &llrs);
                for (j, &c) in pam_bits.iter().enumerate() {
                    if c != (llrs[j] < 0.0) {
                        bit_errors += 1;
                    }
                }
                bit_total += m;
            }
        }
    }
    Ok(MetricReport {
        scheme: inst.label(),
        blocklength: inst.config.blocklength,
        x_value: spec.snr_db,
        effective_snr_db: snr_measured,
        air_n_bits_per_2d: acc.air_n_2d(inst.h_c, inst.rate_loss),
        rate_loss_bits_per_amp: inst.rate_loss,
        pre_fec_ber: bit_errors as f64 / bit_total as f64,
        qam_symbols,
        seed: spec.seed,
    })
}

#[derive(Debug, Clone)]
pub struct FiberPointSpec {
    pub link: FiberLinkConfig,
    pub power_dbm: f64,
    /// Lower bound; rounded up to whole records.
    pub min_qam_symbols: usize,
    /// Target QAM symbols per propagation record; rounded to whole shaping
    /// blocks.
    pub record_qam: usize,
    pub oversampling: usize,
    pub rolloff: f64,
    pub symbol_rate: f64,
    pub seed: u64,
    /// Worker threads; 0 picks the machine parallelism.
    pub threads: usize,
}

impl FiberPointSpec {
    pub fn new(link: FiberLinkConfig, power_dbm: f64, min_qam_symbols: usize, seed: u64) -> Self {
        Self {
            link,
            power_dbm,
            min_qam_symbols,
            // 8100 rounds to FFT-friendly record lengths for both the
            // N=200 and N=3600 framings at 16 samples/symbol.
            record_qam: 8100,
            oversampling: 16,
            rolloff: 0.1,
            symbol_rate: 45e9,
            seed,
            threads: 0,
        }
    }
}

struct RecordOut {
    tx: Vec<Complex64>,
    rx: Vec<Complex64>,
    bits: Vec<bool>,
}

/// Transmit over the full fiber chain: RRC shaping, amplified spans,
/// dispersion compensation, matched filter, symbol-rate sampling, and
/// per-shaping-block ideal phase derotation.
pub fn run_fiber_point(inst: &SchemeInstance, spec: &FiberPointSpec) -> Result<MetricReport> {
    spec.link.validate()?;
    if inst.frame_pam % 2 != 0 {
        return Err(Error::InvalidParameter(
            "odd PAM count per block cannot pair into QAM symbols".into(),
        ));
    }
    let qam_per_frame = inst.frame_pam / 2;
    let frames_per_record = (spec.record_qam as f64 / qam_per_frame as f64).round().max(1.0) as usize;
    let record_qam = frames_per_record * qam_per_frame;
    let records = spec.min_qam_symbols.div_ceil(record_qam).max(1);
    let record_samples = record_qam * spec.oversampling;

    let filter = RrcFilter::default_tx(spec.rolloff, spec.oversampling)?;
    if record_samples < filter.taps().len() {
        return Err(Error::InvalidParameter(format!(
            "record of {record_samples} samples shorter than the RRC filter"
        )));
    }
    let engine = SsfmEngine::new(record_samples, spec.symbol_rate * spec.oversampling as f64, &spec.link)?;
    let scale = inst.qam_scale();
    let launch = crate::util::dbm_to_watts(spec.power_dbm);
    let field_scale = (launch * spec.oversampling as f64).sqrt();

    let run_record = |r: usize| -> Result<RecordOut> {
        let mut rng = ChaCha12Rng::seed_from_u64(spec.seed ^ r as u64);
        let mut pam = Vec::with_capacity(inst.frame_pam * frames_per_record);
        let mut bits = Vec::with_capacity(
            inst.frame_pam * frames_per_record * inst.constellation.bits_per_symbol() as usize,
        );
        for _ in 0..frames_per_record {
            let (p, b) = inst.generate_block(&mut rng);
            pam.extend_from_slice(&p);
            bits.extend_from_slice(&b);
        }
        let tx = pam_to_qam(&pam, scale);
        let mut wf = rrc_shape(&tx, &filter, spec.symbol_rate);
        for s in wf.samples.iter_mut() {
            *s *= field_scale;
        }
        let propagated = engine.propagate(&wf, &mut rng)?;
        let equalized = cd_compensate(&propagated, &spec.link);
        let matched = rrc_matched_filter(&equalized, &filter);
        let mut rx = sample_symbols(&matched, spec.oversampling);
        for y in rx.iter_mut() {
            *y /= field_scale;
        }
        for (rx_block, tx_block) in rx
            .chunks_mut(qam_per_frame)
            .zip(tx.chunks(qam_per_frame))
        {
            phase_derotate(rx_block, tx_block);
        }
        Ok(RecordOut { tx, rx, bits })
    };

    let threads = if spec.threads == 0 {
        std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1)
    } else {
        spec.threads
    }
    .min(records);
    let mut outputs: Vec<Option<RecordOut>> = Vec::with_capacity(records);
    for _ in 0..records {
        outputs.push(None);
    }
    if threads <= 1 {
        for (r, slot) in outputs.iter_mut().enumerate() {
            *slot = Some(run_record(r)?);
        }
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let results: Vec<std::sync::Mutex<Option<Result<RecordOut>>>> =
            (0..records).map(|_| std::sync::Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..threads {
                scope.spawn(|| loop {
                    let r = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if r >= records {
                        break;
                    }
                    *results[r].lock().unwrap() = Some(run_record(r));
                });
            }
        });
        for (slot, cell) in outputs.iter_mut().zip(results) {
            *slot = Some(cell.into_inner().unwrap().expect("worker visited record")?);
        }
    }

    let mut tx_all = Vec::with_capacity(records * record_qam);
    let mut rx_all = Vec::with_capacity(records * record_qam);
    let mut bits_all = Vec::new();
    for out in outputs.into_iter().flatten() {
        tx_all.extend(out.tx);
        rx_all.extend(out.rx);
        bits_all.extend(out.bits);
    }
    let sigma2 = error_variance(&tx_all, &rx_all);
    let snr = effective_snr_db(&tx_all, &rx_all);

    let demapper = Demapper::unit_energy(&inst.constellation, &inst.distribution)?;
    let m = inst.constellation.bits_per_symbol() as usize;
    let mut acc = BmdAccumulator::new(m);
    let mut llrs = vec![0.0; m];
    let mut bit_errors = 0usize;
    let mut bit_total = 0usize;
    for (i, y) in rx_all.iter().enumerate() {
        for (dim, y_pam) in [y.re, y.im].into_iter().enumerate() {
            let pam_idx = 2 * i + dim;
            let pam_bits = &bits_all[pam_idx * m..(pam_idx + 1) * m];
            demapper.llrs(y_pam, sigma2, &mut llrs);
            acc.push(pam_bits, &llrs);
            for (j, &c) in pam_bits.iter().enumerate() {
                if c != (llrs[j] < 0.0) {
                    bit_errors += 1;
                }
            }
            bit_total += m;
        }
    }
    Ok(MetricReport {
        scheme: inst.label(),
        blocklength: inst.config.blocklength,
        x_value: spec.power_dbm,
        effective_snr_db: snr,
        air_n_bits_per_2d: acc.air_n_2d(inst.h_c, inst.rate_loss),
        rate_loss_bits_per_amp: inst.rate_loss,
        pre_fec_ber: bit_errors as f64 / bit_total as f64,
        qam_symbols: tx_all.len(),
        seed: spec.seed,
    })
}

/// Cache directory from the conventional environment variable.
pub fn cache_dir_from_env() -> Option<PathBuf> {
    std::env::var_os("PASIM_CACHE_DIR").map(PathBuf::from)
}
