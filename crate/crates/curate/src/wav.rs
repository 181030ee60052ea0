//! PCM WAV reading and writing.

use std::io::{Cursor, Read, Seek};
use std::path::Path;

use curate_core::audio::AudioBuffer;
use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};

fn wav_err(path: &Path) -> impl FnOnce(hound::Error) -> Error + '_ {
    move |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads 16/24/32-bit integer or 32-bit float PCM, scaled to [-1, 1).
pub fn load_pcm(path: &Path) -> Result<AudioBuffer> {
    let reader = WavReader::open(path).map_err(wav_err(path))?;
    decode(reader, path)
}

/// Same as [`load_pcm`] for an in-memory WAV stream; `origin` only labels
/// errors.
pub fn load_pcm_bytes(bytes: &[u8], origin: &Path) -> Result<AudioBuffer> {
    let reader = WavReader::new(Cursor::new(bytes)).map_err(wav_err(origin))?;
    decode(reader, origin)
}

fn decode<R: Read + Seek>(reader: WavReader<R>, path: &Path) -> Result<AudioBuffer> {
    let spec = reader.spec();
    let samples: Vec<f32> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err(path))?,
        (SampleFormat::Int, bits @ (16 | 24 | 32)) => {
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| (v as f64 * scale) as f32))
                .collect::<std::result::Result<_, _>>()
                .map_err(wav_err(path))?
        }
        _ => return Err(wav_err(path)(hound::Error::Unsupported)),
    };
    Ok(AudioBuffer::new(samples, spec.sample_rate, spec.channels)?)
}

/// Writes 16-bit PCM. Samples are clamped to the representable range and
/// rounded to the nearest step.
pub fn save_pcm(buf: &AudioBuffer, path: &Path) -> Result<()> {
    let spec = WavSpec {
        channels: buf.channels(),
        sample_rate: buf.sample_rate_hz(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut w = WavWriter::create(path, spec).map_err(wav_err(path))?;
    for &s in buf.samples() {
        let q = (s as f64 * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        w.write_sample(q).map_err(wav_err(path))?;
    }
    w.finalize().map_err(wav_err(path))
}
