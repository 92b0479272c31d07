//! Time-resolved intensity traces and their CSV / binary round trips.
//!
//! Binary layout (little endian): 8-byte magic `PTLTRACE`, u32 version,
//! f64 sample interval, u64 sample count, then the samples as f64.
//! CSV layout: `time_s,intensity` with 17 significant digits.

use std::io::{BufRead, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::stats::pairwise_sum;

const TRACE_MAGIC: &[u8; 8] = b"PTLTRACE";
const TRACE_VERSION: u32 = 1;

/// A uniformly sampled, non-negative intensity trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityTrace {
    dt: f64,
    samples: Vec<f64>,
    mean: f64,
    /// Longest stage coherence time of the generating cascade, when known.
    /// Used by the correlator to enforce its duration precondition and to
    /// size bootstrap blocks; not persisted by the file formats.
    coherence_hint: Option<f64>,
}

impl IntensityTrace {
    pub fn new(dt: f64, samples: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Contract(format!("sample interval must be > 0, got {dt}")));
        }
        if samples.is_empty() {
            return Err(Error::Contract("trace must contain at least one sample".into()));
        }
        if samples.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::Contract(
                "intensity samples must be finite and non-negative".into(),
            ));
        }
        let mean = pairwise_sum(&samples) / samples.len() as f64;
        Ok(IntensityTrace {
            dt,
            samples,
            mean,
            coherence_hint: None,
        })
    }

    /// Attach the longest stage coherence time of the generating cascade.
    pub fn with_coherence_hint(mut self, tau_c: f64) -> Self {
        self.coherence_hint = Some(tau_c);
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Cached arithmetic mean intensity.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.samples.len() as f64
    }

    pub fn coherence_hint(&self) -> Option<f64> {
        self.coherence_hint
    }

    pub fn max_sample(&self) -> f64 {
        self.samples.iter().cloned().fold(0.0, f64::max)
    }

    // -- CSV ----------------------------------------------------------------

    pub fn write_csv<W: Write>(&self, w: &mut W, header_comment: Option<&str>) -> Result<()> {
        if let Some(c) = header_comment {
            for line in c.lines() {
                writeln!(w, "# {line}")?;
            }
        }
        writeln!(w, "time_s,intensity")?;
        for (i, s) in self.samples.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e}", i as f64 * self.dt, s)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path, header_comment: Option<&str>) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(&mut w, header_comment)
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut times = Vec::new();
        let mut samples = Vec::new();
        for (ln, line) in r.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') || t.starts_with("time_s") {
                continue;
            }
            let mut cols = t.split(',');
            let time: f64 = cols
                .next()
                .ok_or_else(|| Error::Format(format!("line {}: missing time", ln + 1)))?
                .trim()
                .parse()
                .map_err(|e| Error::Format(format!("line {}: bad time: {e}", ln + 1)))?;
            let s: f64 = cols
                .next()
                .ok_or_else(|| Error::Format(format!("line {}: missing intensity", ln + 1)))?
                .trim()
                .parse()
                .map_err(|e| Error::Format(format!("line {}: bad intensity: {e}", ln + 1)))?;
            times.push(time);
            samples.push(s);
        }
        if samples.len() < 2 {
            return Err(Error::Format("trace CSV needs at least two samples".into()));
        }
        let dt = times[1] - times[0];
        Self::new(dt, samples)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }

    // -- binary ---------------------------------------------------------------

    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(TRACE_MAGIC)?;
        w.write_all(&TRACE_VERSION.to_le_bytes())?;
        w.write_all(&self.dt.to_le_bytes())?;
        w.write_all(&(self.samples.len() as u64).to_le_bytes())?;
        for s in &self.samples {
            w.write_all(&s.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        self.write_binary(&mut w)
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != TRACE_MAGIC {
            return Err(Error::Format("bad trace magic".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != TRACE_VERSION {
            return Err(Error::Format(format!("unsupported trace version {version}")));
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let dt = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let count = u64::from_le_bytes(b8) as usize;
        let mut samples = Vec::with_capacity(count);
        for _ in 0..count {
            r.read_exact(&mut b8)?;
            samples.push(f64::from_le_bytes(b8));
        }
        Self::new(dt, samples)
    }

    pub fn load_binary(path: &Path) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_binary(&mut f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_trace() -> IntensityTrace {
        IntensityTrace::new(2.16e-8, vec![0.0, 1.5, 0.3333333333333333, 2.0e-9, 7.25]).unwrap()
    }

    #[test]
    fn mean_is_arithmetic_mean() {
        let t = demo_trace();
        let direct: f64 = t.samples().iter().sum::<f64>() / t.len() as f64;
        assert!((t.mean() - direct).abs() <= 1e-12 * direct.abs());
        assert!((t.duration() - 5.0 * 2.16e-8).abs() < 1e-20);
    }

    #[test]
    fn rejects_invalid_construction() {
        assert!(IntensityTrace::new(0.0, vec![1.0]).is_err());
        assert!(IntensityTrace::new(1.0, vec![]).is_err());
        assert!(IntensityTrace::new(1.0, vec![-0.1]).is_err());
        assert!(IntensityTrace::new(1.0, vec![f64::NAN]).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = demo_trace();
        let mut buf = Vec::new();
        t.write_csv(&mut buf, Some("config_hash=0x1 seed=9")).unwrap();
        let back = IntensityTrace::read_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(t.dt(), back.dt());
        assert_eq!(t.samples(), back.samples());
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let t = demo_trace();
        let mut buf = Vec::new();
        t.write_binary(&mut buf).unwrap();
        let back = IntensityTrace::read_binary(&mut std::io::Cursor::new(buf)).unwrap();
        assert_eq!(t.dt(), back.dt());
        assert_eq!(t.samples(), back.samples());
    }

    #[test]
    fn binary_rejects_corrupt_headers() {
        let t = demo_trace();
        let mut buf = Vec::new();
        t.write_binary(&mut buf).unwrap();
        buf[0] = b'X';
        assert!(IntensityTrace::read_binary(&mut std::io::Cursor::new(buf)).is_err());
    }
}
