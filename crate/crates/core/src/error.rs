use thiserror::Error;

/// Errors produced by shaping, framing, and channel processing.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Input word has the wrong number of bits for this code.
    #[error("word length {got}, expected {expected} bits")]
    WordLength { expected: usize, got: usize },

    /// Amplitude sequence has the wrong length for this code.
    #[error("sequence length {got}, expected {expected}")]
    SequenceLength { expected: usize, got: usize },

    /// Amplitude value is not a member of the alphabet.
    #[error("amplitude {0} not in alphabet")]
    InvalidAmplitude(u32),

    /// Sequence energy exceeds the sphere bound of the trellis.
    #[error("sequence energy {energy} exceeds Emax {emax}")]
    EnergyOverflow { energy: u64, emax: u64 },

    /// Sequence histogram does not match the code composition.
    #[error("sequence does not match the code composition")]
    CompositionMismatch,

    /// Valid sequence whose rank falls outside the 2^k codebook. This is an
    /// expected outcome after channel errors in uncoded experiments, so it is
    /// a typed failure rather than a panic.
    #[error("decode failure: sequence rank is not addressable with {k} bits")]
    DecodeFailure { k: usize },

    /// Frame bit counts do not reconcile.
    #[error("frame length mismatch: {0}")]
    FrameLength(String),

    /// Numerical blow-up during propagation.
    #[error("non-finite samples after {0}")]
    NonFinite(&'static str),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed or incompatible serialized table.
    #[error("bad trellis file: {0}")]
    TrellisFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
