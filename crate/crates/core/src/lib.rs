//! Probabilistic amplitude shaping with enumerative sphere shaping and
//! constant-composition distribution matching, plus the AWGN and
//! single-channel fiber machinery to measure what the shapers buy:
//! effective SNR, finite-blocklength BMD rate, and pre-FEC BER.
//!
//! Layout:
//! - [`alphabet`], [`composition`]: amplitude alphabets, Maxwell-Boltzmann
//!   targets, compositions, entropy and rate-loss accounting.
//! - [`ess`]: bounded-energy trellis with exact big-integer path counts,
//!   lexicographic indexing, shaping/deshaping, and serialized tables.
//! - [`ccdm`]: constant-composition matching via exact multiset ranking.
//! - [`pas`]: Gray-labeled PAM, sign-bit assembly with the gamma extension,
//!   and the systematic-FEC stub.
//! - [`channel`]: RRC pulse shaping, split-step fiber propagation with EDFA
//!   noise, dispersion compensation, AWGN.
//! - [`metrics`]: effective SNR, prior-aware LLRs, BMD-rate estimation, BER.
//! - [`sim`]: seeded experiment harness producing metric reports.

pub mod alphabet;
pub mod bits;
pub mod ccdm;
pub mod channel;
pub mod composition;
pub mod error;
pub mod ess;
pub mod metrics;
pub mod pas;
pub mod shaper;
pub mod sim;
pub mod util;

pub use alphabet::{
    entropy_bits, fit_mb_for_entropy, mb_distribution, AmplitudeAlphabet, AmplitudeDistribution,
};
pub use ccdm::CcdmCode;
pub use composition::{
    ccdm_rate_bits, composition_from_distribution, multinomial, rate_loss, Composition,
    RateLossReport,
};
pub use error::{Error, Result};
pub use ess::{build_trellis, choose_emax_for_rate, sphere_marginal, EnumerativeTrellis, EssCode};
pub use pas::{PamConstellation, PasConfig, PasFrame};
pub use shaper::AmplitudeShaper;
