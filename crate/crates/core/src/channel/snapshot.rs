//! Waveform snapshot files (diagnostic): a small header with the rates and
//! the originating config hash, then interleaved real/imag 64-bit floats.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rustfft::num_complex::Complex64;

use crate::channel::SignalWaveform;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"WVSNAP01";

pub fn write_snapshot(waveform: &SignalWaveform, config_hash: u64, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&waveform.sample_rate.to_le_bytes())?;
    w.write_all(&waveform.symbol_rate.to_le_bytes())?;
    w.write_all(&config_hash.to_le_bytes())?;
    w.write_all(&(waveform.samples.len() as u64).to_le_bytes())?;
    for s in &waveform.samples {
        w.write_all(&s.re.to_le_bytes())?;
        w.write_all(&s.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(SignalWaveform, u64)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::TrellisFormat("not a waveform snapshot".into()));
    }
    let mut f = [0u8; 8];
    r.read_exact(&mut f)?;
    let sample_rate = f64::from_le_bytes(f);
    r.read_exact(&mut f)?;
    let symbol_rate = f64::from_le_bytes(f);
    r.read_exact(&mut f)?;
    let config_hash = u64::from_le_bytes(f);
    r.read_exact(&mut f)?;
    let count = u64::from_le_bytes(f) as usize;
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut f)?;
        let re = f64::from_le_bytes(f);
        r.read_exact(&mut f)?;
        let im = f64::from_le_bytes(f);
        samples.push(Complex64::new(re, im));
    }
    Ok((
        SignalWaveform {
            samples,
            sample_rate,
            symbol_rate,
        },
        config_hash,
    ))
}
