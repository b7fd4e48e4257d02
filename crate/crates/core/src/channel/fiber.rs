//! Split-step propagation over amplified standard single-mode fiber spans,
//! plus the receiver-side linear compensation blocks.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::channel::{add_complex_noise, SignalWaveform};
use crate::error::{Error, Result};
use crate::util::db_to_lin;

const SPEED_OF_LIGHT: f64 = 2.997_924_58e8; // m/s
const PLANCK: f64 = 6.626_070_15e-34; // J s

/// Per-span fiber and amplifier parameters.
#[derive(Debug, Clone)]
pub struct FiberLinkConfig {
    /// Attenuation, dB/km.
    pub attenuation_db_km: f64,
    /// Dispersion parameter D, ps/(nm km).
    pub dispersion_ps_nm_km: f64,
    /// Kerr coefficient, 1/(W km).
    pub nonlinear_per_w_km: f64,
    /// Span length, km.
    pub span_km: f64,
    pub n_spans: usize,
    /// EDFA gain, dB; must compensate the span loss.
    pub edfa_gain_db: f64,
    /// EDFA noise figure, dB.
    pub edfa_noise_figure_db: f64,
    /// Carrier wavelength, nm.
    pub wavelength_nm: f64,
    /// Split-step size, km.
    pub step_km: f64,
}

impl FiberLinkConfig {
    /// The standard link of this study: 0.2 dB/km, 17 ps/(nm km),
    /// 1.3 /(W km), 80 km spans, 16 dB gain, 5 dB noise figure, 1550 nm,
    /// 0.1 km steps.
    pub fn standard(n_spans: usize) -> Self {
        Self {
            attenuation_db_km: 0.2,
            dispersion_ps_nm_km: 17.0,
            nonlinear_per_w_km: 1.3,
            span_km: 80.0,
            n_spans,
            edfa_gain_db: 16.0,
            edfa_noise_figure_db: 5.0,
            wavelength_nm: 1550.0,
            step_km: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.span_km <= 0.0
            || self.n_spans == 0
            || self.step_km <= 0.0
            || self.wavelength_nm <= 0.0
            || self.attenuation_db_km < 0.0
        {
            return Err(Error::InvalidParameter("non-positive link parameter".into()));
        }
        if self.step_km > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "step size {} km exceeds the 1 km bound",
                self.step_km
            )));
        }
        let loss = self.attenuation_db_km * self.span_km;
        if (self.edfa_gain_db - loss).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "EDFA gain {} dB does not compensate the {loss} dB span loss",
                self.edfa_gain_db
            )));
        }
        Ok(())
    }

    /// Group-velocity dispersion `beta_2 = -D lambda^2 / (2 pi c)`, s^2/m.
    pub fn beta2_s2_per_m(&self) -> f64 {
        let d_si = self.dispersion_ps_nm_km * 1e-6; // s/m^2
        let lambda = self.wavelength_nm * 1e-9;
        -d_si * lambda * lambda / (2.0 * PI * SPEED_OF_LIGHT)
    }

    /// Field attenuation rate, Np/m (power decays as `exp(-alpha z)`).
    pub fn alpha_np_per_m(&self) -> f64 {
        self.attenuation_db_km / (10.0 / std::f64::consts::LN_10) / 1e3
    }

    /// Photon energy at the carrier, J.
    pub fn photon_energy(&self) -> f64 {
        PLANCK * SPEED_OF_LIGHT / (self.wavelength_nm * 1e-9)
    }

    /// One-polarization ASE power spectral density added per amplifier,
    /// `(G - 1) n_sp h nu` in W/Hz, with `n_sp = 10^(NF/10) / 2`.
    pub fn ase_psd_per_amp(&self) -> f64 {
        let gain = db_to_lin(self.edfa_gain_db);
        let n_sp = db_to_lin(self.edfa_noise_figure_db) / 2.0;
        (gain - 1.0) * n_sp * self.photon_energy()
    }
}

/// Amplify by `gain_db` and add amplified spontaneous emission with PSD
/// `(G-1) n_sp h nu` (one polarization). `NF -> 0 dB` lands on the quantum
/// limit `n_sp = 1/2`.
pub fn edfa_amplify<R: Rng>(
    waveform: &mut SignalWaveform,
    gain_db: f64,
    noise_figure_db: f64,
    wavelength_nm: f64,
    rng: &mut R,
) {
    let gain = db_to_lin(gain_db);
    let field_gain = gain.sqrt();
    for s in waveform.samples.iter_mut() {
        *s *= field_gain;
    }
    let h_nu = PLANCK * SPEED_OF_LIGHT / (wavelength_nm * 1e-9);
    let psd = (gain - 1.0) * (db_to_lin(noise_figure_db) / 2.0) * h_nu;
    add_complex_noise(&mut waveform.samples, psd * waveform.sample_rate, rng);
}

/// Precomputed spectral operators and FFT plans for one record length.
pub struct SsfmEngine {
    link: FiberLinkConfig,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// Linear operator over half a step: loss and dispersion.
    half_step: Vec<Complex64>,
    /// Linear operator over a full step.
    full_step: Vec<Complex64>,
    steps_per_span: usize,
    dz_m: f64,
    /// Kerr effective length per step, referenced to the mid-step field.
    dz_eff_m: f64,
    len: usize,
}

impl SsfmEngine {
    pub fn new(len: usize, sample_rate: f64, link: &FiberLinkConfig) -> Result<Self> {
        link.validate()?;
        if len == 0 {
            return Err(Error::InvalidParameter("empty record".into()));
        }
        let steps_per_span = (link.span_km / link.step_km).ceil() as usize;
        let dz_m = link.span_km * 1e3 / steps_per_span as f64;
        let alpha = link.alpha_np_per_m();
        let beta2 = link.beta2_s2_per_m();
        let omega = angular_frequencies(len, sample_rate);
        let lin = |dz: f64| -> Vec<Complex64> {
            omega
                .iter()
                .map(|&w| {
                    // exp((-alpha/2 + j beta2/2 w^2) dz)
                    let mag = (-alpha / 2.0 * dz).exp();
                    let phase = beta2 / 2.0 * w * w * dz;
                    Complex64::from_polar(mag, phase)
                })
                .collect()
        };
        // Kerr phase uses the mid-step field; 2 sinh(alpha dz / 2) / alpha is
        // the loss-exact effective length referenced to that point.
        let dz_eff_m = if alpha * dz_m < 1e-12 {
            dz_m
        } else {
            2.0 * (alpha * dz_m / 2.0).sinh() / alpha
        };
        let mut planner = FftPlanner::new();
        Ok(Self {
            link: link.clone(),
            fft: planner.plan_fft_forward(len),
            ifft: planner.plan_fft_inverse(len),
            half_step: lin(dz_m / 2.0),
            full_step: lin(dz_m),
            steps_per_span,
            dz_m,
            dz_eff_m,
            len,
        })
    }

    fn apply_spectral(&self, samples: &mut [Complex64], op: &[Complex64]) {
        self.fft.process(samples);
        let scale = 1.0 / self.len as f64;
        for (s, o) in samples.iter_mut().zip(op) {
            *s *= o * scale;
        }
        self.ifft.process(samples);
    }

    fn kerr_rotate(&self, samples: &mut [Complex64]) {
        let gamma_per_m = self.link.nonlinear_per_w_km * 1e-3;
        let coef = gamma_per_m * self.dz_eff_m;
        for s in samples.iter_mut() {
            let phase = coef * s.norm_sqr();
            *s *= Complex64::from_polar(1.0, phase);
        }
    }

    /// Propagate one span with the symmetrized scheme
    /// (half linear, Kerr, [full linear, Kerr]*, half linear).
    fn span(&self, samples: &mut [Complex64]) {
        self.apply_spectral(samples, &self.half_step);
        self.kerr_rotate(samples);
        for _ in 1..self.steps_per_span {
            self.apply_spectral(samples, &self.full_step);
            self.kerr_rotate(samples);
        }
        self.apply_spectral(samples, &self.half_step);
    }

    /// Propagate the whole link: each span followed by its amplifier.
    pub fn propagate<R: Rng>(
        &self,
        waveform: &SignalWaveform,
        rng: &mut R,
    ) -> Result<SignalWaveform> {
        if waveform.samples.len() != self.len {
            return Err(Error::InvalidParameter(format!(
                "engine planned for {} samples, got {}",
                self.len,
                waveform.samples.len()
            )));
        }
        let mut out = waveform.clone();
        for _ in 0..self.link.n_spans {
            self.span(&mut out.samples);
            edfa_amplify(
                &mut out,
                self.link.edfa_gain_db,
                self.link.edfa_noise_figure_db,
                self.link.wavelength_nm,
                rng,
            );
            out.assert_finite("split-step span")?;
        }
        Ok(out)
    }

    pub fn step_km(&self) -> f64 {
        self.dz_m / 1e3
    }
}

/// One-shot propagation over the link.
pub fn ssfm_propagate<R: Rng>(
    waveform: &SignalWaveform,
    link: &FiberLinkConfig,
    rng: &mut R,
) -> Result<SignalWaveform> {
    SsfmEngine::new(waveform.samples.len(), waveform.sample_rate, link)?.propagate(waveform, rng)
}

/// Remove the accumulated dispersion of the whole link (data-aided, exact
/// inverse of the propagation phase).
pub fn cd_compensate(waveform: &SignalWaveform, link: &FiberLinkConfig) -> SignalWaveform {
    let len = waveform.samples.len();
    let total_m = link.span_km * 1e3 * link.n_spans as f64;
    let beta2 = link.beta2_s2_per_m();
    let omega = angular_frequencies(len, waveform.sample_rate);
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(len);
    let ifft = planner.plan_fft_inverse(len);
    let mut out = waveform.clone();
    fft.process(&mut out.samples);
    let scale = 1.0 / len as f64;
    for (s, &w) in out.samples.iter_mut().zip(&omega) {
        *s *= Complex64::from_polar(scale, -beta2 / 2.0 * w * w * total_m);
    }
    ifft.process(&mut out.samples);
    out
}

/// Data-aided phase derotation: multiply the received block by
/// `exp(-j arg(sum y x*))`. Leaves magnitudes untouched.
pub fn phase_derotate(rx: &mut [Complex64], tx: &[Complex64]) -> f64 {
    assert_eq!(rx.len(), tx.len());
    let corr: Complex64 = rx.iter().zip(tx).map(|(y, x)| y * x.conj()).sum();
    let theta = corr.arg();
    let rot = Complex64::from_polar(1.0, -theta);
    for y in rx.iter_mut() {
        *y *= rot;
    }
    theta
}

/// DFT bin angular frequencies for an `len`-point record.
fn angular_frequencies(len: usize, sample_rate: f64) -> Vec<f64> {
    let df = sample_rate / len as f64;
    (0..len)
        .map(|i| {
            let f = if i <= len / 2 {
                i as f64 * df
            } else {
                (i as f64 - len as f64) * df
            };
            2.0 * PI * f
        })
        .collect()
}
