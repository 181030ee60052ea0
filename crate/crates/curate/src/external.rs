//! Loading and encoding audio through operator-supplied commands.
//!
//! Templates are shell-quoted command lines with `{input}` and `{output}`
//! placeholders, e.g. `ffmpeg -v error -i {input} -f wav -` for decoding
//! or `flac -s -f -o {output} {input}` for encoding. They are split with
//! POSIX quoting rules and run without a shell.

use std::path::Path;
use std::process::{Command, Stdio};

use curate_core::audio::AudioBuffer;

use crate::error::{Error, Result};
use crate::wav;

fn command(template: &str, input: &Path, output: Option<&Path>) -> Result<Command> {
    let err = |message: &str| Error::Command {
        command: template.to_string(),
        message: message.to_string(),
    };
    let words = shlex::split(template).ok_or_else(|| err("unbalanced quoting"))?;
    let input = input.to_string_lossy();
    let output = output.map(|p| p.to_string_lossy());
    let words: Vec<String> = words
        .into_iter()
        .map(|w| {
            let w = w.replace("{input}", &input);
            match &output {
                Some(o) => w.replace("{output}", o),
                None => w,
            }
        })
        .collect();
    let (prog, args) = words.split_first().ok_or_else(|| err("empty command"))?;
    let mut cmd = Command::new(prog);
    cmd.args(args);
    Ok(cmd)
}

fn run(template: &str, mut cmd: Command, capture: bool) -> Result<Vec<u8>> {
    cmd.stdin(Stdio::null()).stderr(Stdio::piped());
    cmd.stdout(if capture { Stdio::piped() } else { Stdio::null() });
    let out = cmd.output().map_err(|e| Error::Command {
        command: template.to_string(),
        message: e.to_string(),
    })?;
    if !out.status.success() {
        let stderr = String::from_utf8_lossy(&out.stderr);
        return Err(Error::Command {
            command: template.to_string(),
            message: format!("{}: {}", out.status, stderr.trim()),
        });
    }
    Ok(out.stdout)
}

/// Decodes `path` by running `template`, which must write WAV to stdout.
pub fn decode(template: &str, path: &Path) -> Result<AudioBuffer> {
    let bytes = run(template, command(template, path, None)?, true)?;
    wav::load_pcm_bytes(&bytes, path)
}

/// Runs the encoder template over `input`, producing `output`.
pub fn encode(template: &str, input: &Path, output: &Path) -> Result<()> {
    run(template, command(template, input, Some(output))?, false).map(drop)
}

/// Reads `path` directly when it is a WAV file, otherwise through the
/// decoder template.
pub fn load_audio(path: &Path, decoder: Option<&str>) -> Result<AudioBuffer> {
    let is_wav = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav"));
    match decoder {
        Some(t) if !is_wav => decode(t, path),
        _ => wav::load_pcm(path),
    }
}
