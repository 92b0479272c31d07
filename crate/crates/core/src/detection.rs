//! Virtual Hanbury Brown-Twiss detection chain: an intensity trace drives
//! an inhomogeneous Poisson photodetection process, a 50:50 (or biased)
//! splitter routes events to two detectors with dark counts and dead
//! time, and a full pair-correlation histogram of arrival-time
//! differences is normalized against its flat background.
//!
//! File formats: CSV `time_s,channel` and binary (8-byte magic `PTLTAGS\0`,
//! u32 version, u64 count, then one f64 time + u8 channel per record),
//! both holding the merged, time-ordered tags of the two channels.

use std::io::{BufRead, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;

use crate::curve::G2Curve;
use crate::error::{Error, Result};
use crate::rng::{derive_rng, stream};
use crate::trace::IntensityTrace;

const TAGS_MAGIC: &[u8; 8] = b"PTLTAGS\0";
const TAGS_VERSION: u32 = 1;

/// Photon arrival times on one detector channel.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTagStream {
    tags: Vec<f64>,
    pub channel: u8,
    pub duration: f64,
    pub dead_time: f64,
    pub dark_rate: f64,
}

impl TimeTagStream {
    pub fn new(
        tags: Vec<f64>,
        channel: u8,
        duration: f64,
        dead_time: f64,
        dark_rate: f64,
    ) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::Contract(format!("duration must be > 0, got {duration}")));
        }
        if !(dead_time >= 0.0) || !(dark_rate >= 0.0) {
            return Err(Error::Contract(
                "dead time and dark rate must be non-negative".into(),
            ));
        }
        for w in tags.windows(2) {
            if !(w[1] > w[0]) || w[1] - w[0] < dead_time {
                return Err(Error::Contract(format!(
                    "tags must be strictly increasing with spacing >= dead time ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        if tags.iter().any(|&t| !(0.0..=duration).contains(&t)) {
            return Err(Error::Contract("tags must lie within [0, duration]".into()));
        }
        Ok(TimeTagStream {
            tags,
            channel,
            duration,
            dead_time,
            dark_rate,
        })
    }

    pub fn tags(&self) -> &[f64] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    /// Mean detected count rate.
    pub fn rate(&self) -> f64 {
        self.tags.len() as f64 / self.duration
    }
}

/// Exponential interarrival sampling of a homogeneous Poisson process.
fn homogeneous_arrivals<R: Rng>(rate: f64, duration: f64, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::new();
    if rate <= 0.0 {
        return out;
    }
    let mut t = 0.0;
    loop {
        t += -(1.0 - rng.random::<f64>()).ln() / rate;
        if t >= duration {
            return out;
        }
        out.push(t);
    }
}

/// Merge two sorted tag lists and apply a non-paralyzable dead time.
fn merge_with_dead_time(a: Vec<f64>, b: Vec<f64>, dead_time: f64) -> Vec<f64> {
    let mut merged = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i] <= b[j]);
        let t = if take_a {
            let t = a[i];
            i += 1;
            t
        } else {
            let t = b[j];
            j += 1;
            t
        };
        match merged.last() {
            Some(&last) if !(t > last) || t - last < dead_time => {}
            _ => merged.push(t),
        }
    }
    merged
}

/// Convert an intensity trace into photon time tags on two channels.
///
/// An inhomogeneous Poisson process with rate λ(t) = mean_rate·I(t)/⟨I⟩
/// (piecewise constant over each trace sample) is generated by thinning a
/// homogeneous process at the peak rate; each event goes to channel 1
/// with probability `split_ratio`. Independent dark counts at `dark_rate`
/// per detector are superposed, then the per-channel dead time is applied.
/// `mean_rate` is the rate of the full beam before the splitter.
pub fn sample_timetags(
    trace: &IntensityTrace,
    mean_rate: f64,
    split_ratio: f64,
    dead_time: f64,
    dark_rate: f64,
    seed: u64,
) -> Result<(TimeTagStream, TimeTagStream)> {
    if !(mean_rate > 0.0 && mean_rate.is_finite()) {
        return Err(Error::Contract(format!("mean rate must be > 0, got {mean_rate}")));
    }
    let dt = trace.dt();
    if !(mean_rate * dt < 0.1) {
        return Err(Error::Contract(format!(
            "violated thinning bound mean_rate * dt < 0.1: got {:.3}",
            mean_rate * dt
        )));
    }
    if !(split_ratio > 0.0 && split_ratio < 1.0) {
        return Err(Error::Contract(format!(
            "split ratio must lie strictly between 0 and 1, got {split_ratio}"
        )));
    }
    if !(dead_time >= 0.0) || !(dark_rate >= 0.0) {
        return Err(Error::Contract(
            "dead time and dark rate must be non-negative".into(),
        ));
    }
    let duration = trace.duration();
    let samples = trace.samples();
    let mean = trace.mean();
    if !(mean > 0.0) {
        return Err(Error::Contract("trace mean intensity must be > 0".into()));
    }
    let peak = trace.max_sample();
    let lambda_max = mean_rate * peak / mean;

    let mut rng = derive_rng(seed, stream::TIMETAG_SIGNAL, 0);
    let mut ch1 = Vec::new();
    let mut ch2 = Vec::new();
    if lambda_max > 0.0 {
        let mut t = 0.0;
        loop {
            t += -(1.0 - rng.random::<f64>()).ln() / lambda_max;
            if t >= duration {
                break;
            }
            let idx = ((t / dt) as usize).min(samples.len() - 1);
            if rng.random::<f64>() * peak < samples[idx] {
                if rng.random::<f64>() < split_ratio {
                    ch1.push(t);
                } else {
                    ch2.push(t);
                }
            }
        }
    }

    let mut dark_rng1 = derive_rng(seed, stream::TIMETAG_DARK_CH1, 0);
    let mut dark_rng2 = derive_rng(seed, stream::TIMETAG_DARK_CH2, 0);
    let dark1 = homogeneous_arrivals(dark_rate, duration, &mut dark_rng1);
    let dark2 = homogeneous_arrivals(dark_rate, duration, &mut dark_rng2);

    let tags1 = merge_with_dead_time(ch1, dark1, dead_time);
    let tags2 = merge_with_dead_time(ch2, dark2, dead_time);
    Ok((
        TimeTagStream::new(tags1, 1, duration, dead_time, dark_rate)?,
        TimeTagStream::new(tags2, 2, duration, dead_time, dark_rate)?,
    ))
}

/// Binned counts of detection-time differences between two channels.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceHistogram {
    pub bin_width: f64,
    /// counts[k + half_bins] holds the bin centered at k·bin_width
    counts: Vec<u64>,
    half_bins: usize,
    pub duration: f64,
    pub counts_ch1: u64,
    pub counts_ch2: u64,
}

impl CoincidenceHistogram {
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Bin centers, ascending.
    pub fn centers(&self) -> Vec<f64> {
        (0..self.counts.len())
            .map(|i| (i as i64 - self.half_bins as i64) as f64 * self.bin_width)
            .collect()
    }

    /// Raw histogram export in the shared curve CSV layout
    /// (`lag_s,value,stderr` with Poisson errors).
    pub fn write_csv<W: Write>(&self, w: &mut W, header_comment: Option<&str>) -> Result<()> {
        if let Some(c) = header_comment {
            for line in c.lines() {
                writeln!(w, "# {line}")?;
            }
        }
        writeln!(w, "lag_s,value,stderr")?;
        for (center, &count) in self.centers().iter().zip(&self.counts) {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e}",
                center,
                count as f64,
                (count as f64).sqrt()
            )?;
        }
        Ok(())
    }
}

/// Count every tag pair within the lag window into centered lag bins
/// (full pair correlation, not start-stop).
///
/// Bin k covers [kΔ − Δ/2, kΔ + Δ/2), k = -K..K with K = round(max_lag/Δ),
/// and a pair lands in the histogram exactly when its difference rounds
/// into one of the bins; the outermost bins therefore keep their full
/// width (pairs up to half a bin beyond max_lag are included).
pub fn coincidence_histogram(
    s1: &TimeTagStream,
    s2: &TimeTagStream,
    bin_width: f64,
    max_lag: f64,
) -> Result<CoincidenceHistogram> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::Contract(format!("bin width must be > 0, got {bin_width}")));
    }
    let duration = s1.duration.max(s2.duration);
    if !(max_lag > 0.0) || max_lag > duration / 100.0 {
        return Err(Error::Contract(format!(
            "violated lag bound 0 < max_lag <= duration/100: max_lag = {max_lag:e}, duration = {duration:e}"
        )));
    }
    let half_bins = (max_lag / bin_width).round() as usize;
    if half_bins > 50_000_000 {
        return Err(Error::Contract(format!(
            "bin width {bin_width:e} is too fine for the lag span {max_lag:e} ({half_bins} bins per side)"
        )));
    }
    let window = (half_bins as f64 + 0.5) * bin_width;
    let mut counts = vec![0u64; 2 * half_bins + 1];
    let t2 = s2.tags();
    let mut lo = 0usize;
    for &t in s1.tags() {
        while lo < t2.len() && t2[lo] < t - window {
            lo += 1;
        }
        let mut j = lo;
        while j < t2.len() && t2[j] <= t + window {
            let d = t - t2[j];
            let k = (d / bin_width).round() as i64;
            if k.unsigned_abs() as usize <= half_bins {
                counts[(k + half_bins as i64) as usize] += 1;
            }
            j += 1;
        }
    }
    Ok(CoincidenceHistogram {
        bin_width,
        counts,
        half_bins,
        duration,
        counts_ch1: s1.len() as u64,
        counts_ch2: s2.len() as u64,
    })
}

/// Normalize a coincidence histogram by its flat background.
///
/// `baseline` is the |lag| window (lo, hi) whose bins define the
/// background level; it must sit where the correlation has decayed
/// (beyond ~5 coherence times). Per-bin Poisson errors propagate into
/// the curve's stderr.
pub fn normalize_histogram(h: &CoincidenceHistogram, baseline: (f64, f64)) -> Result<G2Curve> {
    let (lo, hi) = baseline;
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::Contract(format!(
            "baseline window needs 0 <= lo < hi, got ({lo}, {hi})"
        )));
    }
    let centers = h.centers();
    let base_bins: Vec<u64> = centers
        .iter()
        .zip(h.counts())
        .filter(|(c, _)| {
            let a = c.abs();
            a >= lo && a <= hi
        })
        .map(|(_, &n)| n)
        .collect();
    if base_bins.is_empty() {
        return Err(Error::Contract(
            "empty baseline window: no histogram bins fall inside it".into(),
        ));
    }
    let background = base_bins.iter().sum::<u64>() as f64 / base_bins.len() as f64;
    if !(background > 0.0) {
        return Err(Error::Contract("baseline window contains no counts".into()));
    }
    let values: Vec<f64> = h.counts().iter().map(|&n| n as f64 / background).collect();
    let stderr: Vec<f64> = h
        .counts()
        .iter()
        .map(|&n| (n.max(1) as f64).sqrt() / background)
        .collect();
    G2Curve::new(centers, values, stderr)
}

// -- tag file round trips ----------------------------------------------------

/// Write both channels as merged, time-ordered `time_s,channel` CSV.
pub fn write_timetags_csv<W: Write>(
    s1: &TimeTagStream,
    s2: &TimeTagStream,
    w: &mut W,
    header_comment: Option<&str>,
) -> Result<()> {
    if let Some(c) = header_comment {
        for line in c.lines() {
            writeln!(w, "# {line}")?;
        }
    }
    writeln!(w, "time_s,channel")?;
    for (t, ch) in merged_tags(s1, s2) {
        writeln!(w, "{t:.16e},{ch}")?;
    }
    Ok(())
}

/// Write both channels in the binary tag layout.
pub fn write_timetags_binary<W: Write>(s1: &TimeTagStream, s2: &TimeTagStream, w: &mut W) -> Result<()> {
    let merged = merged_tags(s1, s2);
    w.write_all(TAGS_MAGIC)?;
    w.write_all(&TAGS_VERSION.to_le_bytes())?;
    w.write_all(&(merged.len() as u64).to_le_bytes())?;
    for (t, ch) in merged {
        w.write_all(&t.to_le_bytes())?;
        w.write_all(&[ch])?;
    }
    Ok(())
}

fn merged_tags(s1: &TimeTagStream, s2: &TimeTagStream) -> Vec<(f64, u8)> {
    let mut merged: Vec<(f64, u8)> = s1
        .tags()
        .iter()
        .map(|&t| (t, s1.channel))
        .chain(s2.tags().iter().map(|&t| (t, s2.channel)))
        .collect();
    merged.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    merged
}

fn split_tags(records: Vec<(f64, u8)>, duration: f64) -> Result<(TimeTagStream, TimeTagStream)> {
    let ch1: Vec<f64> = records.iter().filter(|(_, c)| *c == 1).map(|(t, _)| *t).collect();
    let ch2: Vec<f64> = records.iter().filter(|(_, c)| *c == 2).map(|(t, _)| *t).collect();
    // files carry tags and channels only; acquisition metadata is not persisted
    Ok((
        TimeTagStream::new(ch1, 1, duration, 0.0, 0.0)?,
        TimeTagStream::new(ch2, 2, duration, 0.0, 0.0)?,
    ))
}

/// Read the merged CSV layout back into the two channel streams; the
/// duration is taken from the last tag.
pub fn read_timetags_csv<R: BufRead>(r: R) -> Result<(TimeTagStream, TimeTagStream)> {
    let mut records = Vec::new();
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
        let ch: u8 = cols
            .next()
            .ok_or_else(|| Error::Format(format!("line {}: missing channel", ln + 1)))?
            .trim()
            .parse()
            .map_err(|e| Error::Format(format!("line {}: bad channel: {e}", ln + 1)))?;
        records.push((time, ch));
    }
    let duration = records.iter().map(|(t, _)| *t).fold(f64::MIN, f64::max).max(f64::MIN_POSITIVE);
    split_tags(records, duration)
}

/// Read the binary tag layout back into the two channel streams.
pub fn read_timetags_binary<R: Read>(r: &mut R) -> Result<(TimeTagStream, TimeTagStream)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != TAGS_MAGIC {
        return Err(Error::Format("bad tag-file magic".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != TAGS_VERSION {
        return Err(Error::Format(format!("unsupported tag-file version {version}")));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let count = u64::from_le_bytes(b8);
    let mut records = Vec::with_capacity(count as usize);
    let mut chb = [0u8; 1];
    for _ in 0..count {
        r.read_exact(&mut b8)?;
        r.read_exact(&mut chb)?;
        records.push((f64::from_le_bytes(b8), chb[0]));
    }
    let duration = records.iter().map(|(t, _)| *t).fold(f64::MIN, f64::max).max(f64::MIN_POSITIVE);
    split_tags(records, duration)
}

/// Save tags to a path in the requested format.
pub fn save_timetags(
    s1: &TimeTagStream,
    s2: &TimeTagStream,
    path: &Path,
    binary: bool,
    header_comment: Option<&str>,
) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    if binary {
        write_timetags_binary(s1, s2, &mut w)
    } else {
        write_timetags_csv(s1, s2, &mut w, header_comment)
    }
}
