//! Spectral bandwidth estimation.
//!
//! The bandwidth of a recording is the highest frequency whose mean power
//! stays within a fixed dB distance of the spectral peak. It is estimated
//! once per chapter on the opening seconds of audio and inherited by every
//! utterance cut from that chapter.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::audio::{mixdown, AudioBuffer};
use crate::error::{Error, Result};
use crate::fft::{Complex, Fft};
use crate::record::{SubsetSpec, UtteranceRecord};

/// Default relative level defining the band edge.
pub const DEFAULT_THRESHOLD_DB: f64 = -50.0;
/// Seconds of chapter audio analyzed.
pub const DEFAULT_ANALYSIS_S: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Hann,
    /// Classic three-term Blackman; its sidelobes sit below the -50 dB
    /// criterion within three bins of a band edge.
    Blackman,
}

impl Window {
    fn coefficients(self, n: usize) -> Vec<f64> {
        // periodic form
        (0..n)
            .map(|i| {
                let x = 2.0 * PI * i as f64 / n as f64;
                match self {
                    Window::Hann => 0.5 - 0.5 * libm::cos(x),
                    Window::Blackman => 0.42 - 0.5 * libm::cos(x) + 0.08 * libm::cos(2.0 * x),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumParams {
    /// FFT length in samples; must be a power of two.
    pub fft_size: usize,
    pub hop: usize,
    pub window: Window,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        SpectrumParams {
            fft_size: 2048,
            hop: 1024,
            window: Window::Blackman,
        }
    }
}

impl SpectrumParams {
    /// Window and hop given in seconds; the window is rounded to the nearest
    /// power of two samples.
    pub fn from_seconds(window_s: f64, hop_s: f64, rate_hz: u32) -> Self {
        let target = (window_s * rate_hz as f64).max(2.0);
        let lower = 1usize << (libm::floor(libm::log2(target)) as u32);
        let fft_size = if target / lower as f64 > 1.5 { lower * 2 } else { lower };
        SpectrumParams {
            fft_size,
            hop: (libm::round(hop_s * rate_hz as f64) as usize).max(1),
            window: Window::Blackman,
        }
    }
}

/// Frame-averaged power per FFT bin, DC through Nyquist inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    pub psd: Vec<f64>,
    pub bin_hz: f64,
    pub nyquist_hz: f64,
    pub analyzed_s: f64,
}

impl PowerSpectrum {
    pub fn bin_center_hz(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_hz
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthEstimate {
    pub f_max_hz: f64,
    pub peak_power: f64,
    pub threshold_db: f64,
    pub analyzed_s: f64,
    /// Set when the spectrum carries no energy; `f_max_hz` is then 0.
    pub degenerate: bool,
}

impl BandwidthEstimate {
    /// Band edge rounded to whole Hz, as stored in manifests.
    pub fn bandwidth_hz(&self) -> u32 {
        libm::round(self.f_max_hz) as u32
    }
}

/// Welch-style mean periodogram of a mono buffer.
pub fn mean_power_spectrum(buf: &AudioBuffer, params: &SpectrumParams) -> Result<PowerSpectrum> {
    if buf.channels() != 1 {
        return Err(Error::NotMono(buf.channels()));
    }
    let n = params.fft_size;
    let x = buf.samples();
    if x.len() < n || n < 2 {
        return Err(Error::BufferTooShort {
            needed: n.max(2),
            got: x.len(),
        });
    }
    let fft = Fft::new(n);
    let window = params.window.coefficients(n);
    let bins = n / 2 + 1;
    let mut acc = vec![0f64; bins];
    let mut frame = vec![Complex::default(); n];
    let hop = params.hop.max(1);
    let mut frames = 0usize;
    let mut start = 0usize;
    while start + n <= x.len() {
        for ((dst, &s), &w) in frame.iter_mut().zip(&x[start..start + n]).zip(&window) {
            *dst = Complex::new(s as f64 * w, 0.0);
        }
        fft.forward(&mut frame);
        for (a, c) in acc.iter_mut().zip(&frame[..bins]) {
            *a += c.norm_sqr();
        }
        frames += 1;
        start += hop;
    }
    for a in &mut acc {
        *a /= frames as f64;
    }
    let rate = buf.sample_rate_hz() as f64;
    Ok(PowerSpectrum {
        psd: acc,
        bin_hz: rate / n as f64,
        nyquist_hz: rate / 2.0,
        analyzed_s: buf.duration_s(),
    })
}

/// Highest bin center whose power is at least `threshold_db` relative to the
/// spectral peak (inclusive).
pub fn estimate_bandwidth(spec: &PowerSpectrum, threshold_db: f64) -> BandwidthEstimate {
    let peak = spec.psd.iter().cloned().fold(0.0f64, f64::max);
    let mut est = BandwidthEstimate {
        f_max_hz: 0.0,
        peak_power: peak,
        threshold_db,
        analyzed_s: spec.analyzed_s,
        degenerate: true,
    };
    if peak.is_nan() || peak <= 0.0 {
        return est;
    }
    let top = spec
        .psd
        .iter()
        .rposition(|&p| p > 0.0 && 10.0 * libm::log10(p / peak) >= threshold_db);
    if let Some(bin) = top {
        est.f_max_hz = spec.bin_center_hz(bin).min(spec.nyquist_hz);
        est.degenerate = false;
    }
    est
}

/// The first `analysis_s` seconds of `buf` mixed to mono (all of it if
/// shorter).
pub fn chapter_head(buf: &AudioBuffer, analysis_s: f64) -> AudioBuffer {
    let mono = mixdown(buf);
    let limit = libm::round(analysis_s * mono.sample_rate_hz() as f64) as usize;
    if mono.frames() <= limit {
        return mono;
    }
    let rate = mono.sample_rate_hz();
    let mut samples = mono.into_samples();
    samples.truncate(limit);
    AudioBuffer::mono(samples, rate).expect("mono buffer")
}

/// Bandwidth of a chapter's decoded audio, measured on its head before any
/// trimming.
pub fn chapter_bandwidth(
    audio: &AudioBuffer,
    analysis_s: f64,
    threshold_db: f64,
    params: &SpectrumParams,
) -> Result<BandwidthEstimate> {
    let head = chapter_head(audio, analysis_s);
    let spec = mean_power_spectrum(&head, params)?;
    Ok(estimate_bandwidth(&spec, threshold_db))
}

/// `bandwidth_hz >= spec.min_bandwidth_hz`.
pub fn passes_bandwidth_gate(rec: &UtteranceRecord, spec: &SubsetSpec) -> Result<bool> {
    Ok(rec.require_bandwidth()? >= spec.min_bandwidth_hz)
}
