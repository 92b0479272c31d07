//! Sampled normalized second-order coherence curves g²(τ) with per-point
//! standard errors, plus their CSV round trip.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A g²(τ) curve on a strictly increasing lag grid.
///
/// `stderr` entries are zero for exact (analytic) curves.
#[derive(Debug, Clone, PartialEq)]
pub struct G2Curve {
    lags: Vec<f64>,
    values: Vec<f64>,
    stderr: Vec<f64>,
}

impl G2Curve {
    pub fn new(lags: Vec<f64>, values: Vec<f64>, stderr: Vec<f64>) -> Result<Self> {
        if lags.len() != values.len() || lags.len() != stderr.len() {
            return Err(Error::Contract(format!(
                "curve columns must have equal length: {} lags, {} values, {} stderr",
                lags.len(),
                values.len(),
                stderr.len()
            )));
        }
        if lags.is_empty() {
            return Err(Error::Contract("curve must contain at least one point".into()));
        }
        if lags.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Contract("lags must be strictly increasing".into()));
        }
        if lags.iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract("lags must be finite".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Contract("values must be finite and non-negative".into()));
        }
        if stderr.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Contract("stderr must be finite and non-negative".into()));
        }
        Ok(G2Curve { lags, values, stderr })
    }

    /// Exact curve: all standard errors zero.
    pub fn exact(lags: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = lags.len();
        Self::new(lags, values, vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    pub fn lags(&self) -> &[f64] {
        &self.lags
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn stderr(&self) -> &[f64] {
        &self.stderr
    }

    /// True when any point carries a positive standard error.
    pub fn has_errors(&self) -> bool {
        self.stderr.iter().any(|&s| s > 0.0)
    }

    /// Root-mean-square of the per-point standard errors.
    pub fn pooled_stderr(&self) -> f64 {
        let n = self.stderr.len() as f64;
        (self.stderr.iter().map(|s| s * s).sum::<f64>() / n).sqrt()
    }

    /// Linear interpolation of the value at `lag`.
    ///
    /// Errors if `lag` lies outside the curve's lag range.
    pub fn value_at(&self, lag: f64) -> Result<f64> {
        let (first, last) = (self.lags[0], *self.lags.last().unwrap());
        if !(lag >= first && lag <= last) {
            return Err(Error::Contract(format!(
                "lag {lag:e} outside curve range [{first:e}, {last:e}]"
            )));
        }
        match self.lags.binary_search_by(|l| l.partial_cmp(&lag).unwrap()) {
            Ok(i) => Ok(self.values[i]),
            Err(i) => {
                let (l0, l1) = (self.lags[i - 1], self.lags[i]);
                let t = (lag - l0) / (l1 - l0);
                Ok(self.values[i - 1] * (1.0 - t) + self.values[i] * t)
            }
        }
    }

    /// Write `lag_s,value,stderr` CSV with 17 significant digits.
    ///
    /// `header_comment`, when given, is emitted as leading `# ...` lines.
    pub fn write_csv<W: Write>(&self, w: &mut W, header_comment: Option<&str>) -> Result<()> {
        if let Some(c) = header_comment {
            for line in c.lines() {
                writeln!(w, "# {line}")?;
            }
        }
        writeln!(w, "lag_s,value,stderr")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e}",
                self.lags[i], self.values[i], self.stderr[i]
            )?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path, header_comment: Option<&str>) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(&mut w, header_comment)
    }

    /// Parse a curve from the `lag_s,value,stderr` CSV layout; `#` comment
    /// lines and the column header are skipped.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lags = Vec::new();
        let mut values = Vec::new();
        let mut stderr = Vec::new();
        for (ln, line) in r.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') || t.starts_with("lag_s") {
                continue;
            }
            let mut cols = t.split(',');
            let mut next = |name: &str| -> Result<f64> {
                cols.next()
                    .ok_or_else(|| Error::Format(format!("line {}: missing {name}", ln + 1)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("line {}: bad {name}: {e}", ln + 1)))
            };
            lags.push(next("lag_s")?);
            values.push(next("value")?);
            stderr.push(next("stderr")?);
        }
        Self::new(lags, values, stderr)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

/// A symmetric lag grid of `n` points over [-max_lag, +max_lag].
///
/// `n` must be odd so the grid contains τ = 0 exactly.
pub fn symmetric_lag_grid(max_lag: f64, n: usize) -> Result<Vec<f64>> {
    if !(max_lag > 0.0) {
        return Err(Error::Domain(format!("max_lag must be positive, got {max_lag}")));
    }
    if n < 3 || n % 2 == 0 {
        return Err(Error::Domain(format!(
            "lag grid needs an odd point count >= 3 to contain zero, got {n}"
        )));
    }
    let half = (n - 1) / 2;
    Ok((0..n)
        .map(|i| (i as f64 - half as f64) / half as f64 * max_lag)
        .collect())
}
