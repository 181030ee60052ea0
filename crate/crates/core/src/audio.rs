//! Sample buffers, channel mixdown, sample-rate conversion and edge
//! silence trimming.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{invariant, Error, Result};

/// Interleaved PCM samples.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f32>,
    sample_rate_hz: u32,
    channels: u16,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f32>, sample_rate_hz: u32, channels: u16) -> Result<Self> {
        if channels == 0 {
            return Err(invariant("channels", "must be at least 1"));
        }
        if sample_rate_hz == 0 {
            return Err(Error::SampleRate(0));
        }
        if !samples.len().is_multiple_of(channels as usize) {
            return Err(invariant("samples", "length must be a multiple of the channel count"));
        }
        Ok(AudioBuffer {
            samples,
            sample_rate_hz,
            channels,
        })
    }

    pub fn mono(samples: Vec<f32>, sample_rate_hz: u32) -> Result<Self> {
        AudioBuffer::new(samples, sample_rate_hz, 1)
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f32> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn channels(&self) -> u16 {
        self.channels
    }

    pub fn frames(&self) -> usize {
        self.samples.len() / self.channels as usize
    }

    pub fn duration_s(&self) -> f64 {
        self.frames() as f64 / self.sample_rate_hz as f64
    }

    /// Mono copy of the frames in `range` (frame indices, clamped).
    pub fn slice_frames(&self, range: Range<usize>) -> Result<AudioBuffer> {
        self.require_mono()?;
        let end = range.end.min(self.samples.len());
        let start = range.start.min(end);
        AudioBuffer::mono(self.samples[start..end].to_vec(), self.sample_rate_hz)
    }

    fn require_mono(&self) -> Result<()> {
        if self.channels != 1 {
            return Err(Error::NotMono(self.channels));
        }
        Ok(())
    }
}

/// Per-frame arithmetic mean across channels.
pub fn mixdown(buf: &AudioBuffer) -> AudioBuffer {
    if buf.channels == 1 {
        return buf.clone();
    }
    let ch = buf.channels as usize;
    let samples = buf
        .samples
        .chunks_exact(ch)
        .map(|frame| (frame.iter().map(|&s| s as f64).sum::<f64>() / ch as f64) as f32)
        .collect();
    AudioBuffer {
        samples,
        sample_rate_hz: buf.sample_rate_hz,
        channels: 1,
    }
}

// ---------------------------------------------------------------------------
// Resampling
// ---------------------------------------------------------------------------

/// Taps per polyphase branch.
pub const RESAMPLER_TAPS: usize = 64;
/// Low-pass cutoff as a fraction of the output rate when decimating: the
/// -60 dB stopband then starts just above the new Nyquist frequency while the
/// passband stays flat to 0.45 of the output rate.
const DOWN_CUTOFF_RATIO: f64 = 0.4785;
/// Cutoff as a fraction of the input rate when interpolating, placing the
/// -60 dB edge at the input Nyquist so no images appear above it.
const UP_CUTOFF_RATIO: f64 = 0.468;
const KAISER_BETA: f64 = 6.0;
/// Above this many phases coefficients are evaluated on the fly.
const MAX_TABLE_PHASES: u64 = 4096;

/// Kaiser-windowed sinc polyphase resampler for a fixed rate pair.
#[derive(Debug, Clone)]
pub struct Resampler {
    from_hz: u32,
    to_hz: u32,
    /// Interpolation factor (output step numerator).
    up: u64,
    /// Decimation factor.
    down: u64,
    /// Normalized cutoff, in cycles per input sample times two.
    cutoff: f64,
    table: Option<Vec<[f32; RESAMPLER_TAPS]>>,
}

impl Resampler {
    pub fn new(from_hz: u32, to_hz: u32) -> Result<Self> {
        if from_hz == 0 {
            return Err(Error::SampleRate(from_hz));
        }
        if to_hz == 0 {
            return Err(Error::SampleRate(to_hz));
        }
        let g = gcd(from_hz as u64, to_hz as u64);
        let up = to_hz as u64 / g;
        let down = from_hz as u64 / g;
        let cutoff = if to_hz < from_hz {
            2.0 * DOWN_CUTOFF_RATIO * to_hz as f64 / from_hz as f64
        } else {
            2.0 * UP_CUTOFF_RATIO
        };
        let mut r = Resampler {
            from_hz,
            to_hz,
            up,
            down,
            cutoff,
            table: None,
        };
        if from_hz != to_hz && up <= MAX_TABLE_PHASES {
            let table = (0..up).map(|p| r.taps(p as f64 / up as f64)).collect();
            r.table = Some(table);
        }
        Ok(r)
    }

    /// Output length for `input_len` input samples.
    pub fn output_len(&self, input_len: usize) -> usize {
        let num = input_len as u128 * self.up as u128;
        let den = self.down as u128;
        ((2 * num + den) / (2 * den)) as usize
    }

    /// Filter taps for an output sample whose position lies `frac` input
    /// samples past its base input index. Taps are normalized to unit DC
    /// gain.
    fn taps(&self, frac: f64) -> [f32; RESAMPLER_TAPS] {
        let half = (RESAMPLER_TAPS / 2) as f64;
        let mut taps = [0f64; RESAMPLER_TAPS];
        for (j, t) in taps.iter_mut().enumerate() {
            let tau = frac + (half - 1.0) - j as f64;
            *t = self.cutoff * sinc(self.cutoff * tau) * kaiser(tau / half, KAISER_BETA);
        }
        let sum: f64 = taps.iter().sum();
        let mut out = [0f32; RESAMPLER_TAPS];
        for (o, t) in out.iter_mut().zip(taps) {
            *o = (t / sum) as f32;
        }
        out
    }

    pub fn process(&self, input: &[f32]) -> Vec<f32> {
        if self.from_hz == self.to_hz {
            return input.to_vec();
        }
        let n_out = self.output_len(input.len());
        let half = RESAMPLER_TAPS / 2;
        let mut out = Vec::with_capacity(n_out);
        for n in 0..n_out as u64 {
            let pos = n * self.down;
            let base = (pos / self.up) as isize;
            let phase = pos % self.up;
            let computed;
            let taps = match &self.table {
                Some(t) => &t[phase as usize],
                None => {
                    computed = self.taps(phase as f64 / self.up as f64);
                    &computed
                }
            };
            let first = base - (half as isize - 1);
            let mut acc = 0f64;
            for (j, &h) in taps.iter().enumerate() {
                let i = first + j as isize;
                if i >= 0 && (i as usize) < input.len() {
                    acc += h as f64 * input[i as usize] as f64;
                }
            }
            out.push(acc as f32);
        }
        out
    }
}

/// Converts a mono buffer to `target_hz`. Equal rates return an exact copy.
pub fn resample(buf: &AudioBuffer, target_hz: u32) -> Result<AudioBuffer> {
    buf.require_mono()?;
    if target_hz == buf.sample_rate_hz {
        return Ok(buf.clone());
    }
    let r = Resampler::new(buf.sample_rate_hz, target_hz)?;
    AudioBuffer::mono(r.process(&buf.samples), target_hz)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = core::f64::consts::PI * x;
        libm::sin(px) / px
    }
}

/// Kaiser window evaluated at `x` in [-1, 1].
fn kaiser(x: f64, beta: f64) -> f64 {
    if x.abs() > 1.0 {
        return 0.0;
    }
    bessel_i0(beta * libm::sqrt(1.0 - x * x)) / bessel_i0(beta)
}

fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > sum * 1e-17 {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

// ---------------------------------------------------------------------------
// Silence trimming
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrimParams {
    /// Frames quieter than the loudest frame by more than this are silent.
    pub threshold_db: f64,
    /// Silence kept before the first and after the last voiced sample.
    pub max_edge_silence_s: f64,
    pub frame_s: f64,
    pub hop_s: f64,
}

impl Default for TrimParams {
    fn default() -> Self {
        TrimParams {
            threshold_db: 50.0,
            max_edge_silence_s: 0.5,
            frame_s: 0.025,
            hop_s: 0.010,
        }
    }
}

impl TrimParams {
    pub fn frame_len(&self, rate_hz: u32) -> usize {
        (libm::round(self.frame_s * rate_hz as f64) as usize).max(1)
    }

    pub fn hop_len(&self, rate_hz: u32) -> usize {
        (libm::round(self.hop_s * rate_hz as f64) as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrimResult {
    pub trimmed: AudioBuffer,
    pub leading_removed_s: f64,
    pub trailing_removed_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Trim {
    Kept(TrimResult),
    /// Peak frame energy is zero; nothing survives.
    Empty,
}

impl Trim {
    pub fn is_empty(&self) -> bool {
        matches!(self, Trim::Empty)
    }
}

/// Start offsets of the analysis frames covering `len` samples. The last
/// frame may be truncated.
fn frame_starts(len: usize, frame: usize, hop: usize) -> impl Iterator<Item = usize> {
    let count = if len == 0 {
        0
    } else if len <= frame {
        1
    } else {
        (len - frame).div_ceil(hop) + 1
    };
    (0..count).map(move |i| i * hop)
}

fn rms(x: &[f32]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let sum: f64 = x.iter().map(|&s| s as f64 * s as f64).sum();
    libm::sqrt(sum / x.len() as f64)
}

/// Per-frame voicing decisions for `samples`: `(frame_start, frame_end,
/// voiced)`, plus the amplitude threshold that separated them.
pub fn classify_frames(samples: &[f32], rate_hz: u32, params: &TrimParams) -> (Vec<(usize, usize, bool)>, f64) {
    let frame = params.frame_len(rate_hz);
    let hop = params.hop_len(rate_hz);
    let energies: Vec<(usize, usize, f64)> = frame_starts(samples.len(), frame, hop)
        .map(|s| {
            let e = (s + frame).min(samples.len());
            (s, e, rms(&samples[s..e]))
        })
        .collect();
    let peak = energies.iter().fold(0.0f64, |m, &(_, _, r)| m.max(r));
    let threshold = peak * libm::pow(10.0, -params.threshold_db / 20.0);
    let frames = energies
        .into_iter()
        .map(|(s, e, r)| (s, e, peak > 0.0 && r >= threshold))
        .collect();
    (frames, threshold)
}

/// Sample range kept by trimming, or `None` when the buffer is silent.
///
/// The first and last voiced frames are refined to the first and last sample
/// reaching the energy threshold; at most `max_edge_silence_s` is then kept
/// around that, but never less than the voiced frames themselves.
pub fn trim_span(samples: &[f32], rate_hz: u32, params: &TrimParams) -> Option<Range<usize>> {
    let (frames, threshold) = classify_frames(samples, rate_hz, params);
    let first = frames.iter().position(|f| f.2)?;
    let last = frames.iter().rposition(|f| f.2)?;
    let (fs, fe, _) = frames[first];
    let (ls, le, _) = frames[last];
    let onset = fs + samples[fs..fe].iter().position(|s| (s.abs() as f64) >= threshold)?;
    let offset = ls + samples[ls..le].iter().rposition(|s| (s.abs() as f64) >= threshold)? + 1;
    let edge = libm::round(params.max_edge_silence_s.max(0.0) * rate_hz as f64) as usize;
    let start = onset.saturating_sub(edge).min(fs);
    let end = (offset + edge).max(le).min(samples.len());
    Some(start..end)
}

/// Removes leading and trailing silence from a mono buffer.
pub fn trim_silence(buf: &AudioBuffer, params: &TrimParams) -> Result<Trim> {
    buf.require_mono()?;
    let Some(span) = trim_span(&buf.samples, buf.sample_rate_hz, params) else {
        return Ok(Trim::Empty);
    };
    let rate = buf.sample_rate_hz as f64;
    let leading = span.start as f64 / rate;
    let trailing = (buf.samples.len() - span.end) as f64 / rate;
    Ok(Trim::Kept(TrimResult {
        trimmed: buf.slice_frames(span)?,
        leading_removed_s: leading,
        trailing_removed_s: trailing,
    }))
}

/// `len` samples of a sine at `freq_hz`.
pub fn sine(freq_hz: f64, amplitude: f64, rate_hz: u32, len: usize) -> Vec<f32> {
    let w = 2.0 * core::f64::consts::PI * freq_hz / rate_hz as f64;
    (0..len).map(|i| (amplitude * libm::sin(w * i as f64)) as f32).collect()
}

/// Silence of the given length.
pub fn silence(len: usize) -> Vec<f32> {
    vec![0.0; len]
}
