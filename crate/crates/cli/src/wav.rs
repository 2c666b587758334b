//! WAV input and output. Samples are processed as `f64`; PCM16 output
//! truncates toward zero without dither.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Audio {
    pub spec: WavSpec,
    /// One vector per channel.
    pub channels: Vec<Vec<f64>>,
}

const PCM16_SCALE: f64 = 32768.0;

impl Audio {
    pub fn frames(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn rate(&self) -> f64 {
        self.spec.sample_rate as f64
    }
}

fn describe(spec: &WavSpec) -> String {
    let kind = match spec.sample_format {
        SampleFormat::Int => "integer PCM",
        SampleFormat::Float => "float",
    };
    format!("{}-bit {kind}, {} channel(s)", spec.bits_per_sample, spec.channels)
}

pub fn read(path: &Path) -> Result<Audio, CliError> {
    let io = |e: hound::Error| CliError::Input(format!("{}: {e}", path.display()));
    let mut reader = WavReader::open(path).map_err(io)?;
    let spec = reader.spec();
    if !matches!(spec.channels, 1 | 2) {
        return Err(CliError::Input(format!(
            "{}: unsupported WAV layout ({}); expected mono or stereo",
            path.display(),
            describe(&spec)
        )));
    }
    let n = spec.channels as usize;
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => {
            reader.samples::<i16>().map(|s| s.map(|v| v as f64 / PCM16_SCALE)).collect::<Result<_, _>>().map_err(io)?
        }
        (SampleFormat::Float, 32) => {
            reader.samples::<f32>().map(|s| s.map(f64::from)).collect::<Result<_, _>>().map_err(io)?
        }
        _ => {
            return Err(CliError::Input(format!(
                "{}: unsupported WAV format ({}); expected 16-bit PCM or 32-bit float",
                path.display(),
                describe(&spec)
            )))
        }
    };
    let mut channels = vec![Vec::with_capacity(interleaved.len() / n); n];
    for (i, v) in interleaved.into_iter().enumerate() {
        channels[i % n].push(v);
    }
    Ok(Audio { spec, channels })
}

fn pcm16(v: f64) -> i16 {
    (v * PCM16_SCALE).trunc().clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

pub fn write(path: &Path, audio: &Audio) -> Result<(), CliError> {
    let io = |e: hound::Error| CliError::Output(format!("{}: {e}", path.display()));
    let mut w = WavWriter::create(path, audio.spec).map_err(io)?;
    for i in 0..audio.frames() {
        for ch in &audio.channels {
            match audio.spec.sample_format {
                SampleFormat::Int => w.write_sample(pcm16(ch[i])).map_err(io)?,
                SampleFormat::Float => w.write_sample(ch[i] as f32).map_err(io)?,
            }
        }
    }
    w.finalize().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pcm16_truncates_toward_zero() {
        assert_eq!(pcm16(0.5 / PCM16_SCALE), 0);
        assert_eq!(pcm16(-1.7 / PCM16_SCALE), -1);
        assert_eq!(pcm16(2.0), i16::MAX);
        assert_eq!(pcm16(-1.0), i16::MIN);
    }

    fn spec(channels: u16, bits: u16, format: SampleFormat) -> WavSpec {
        WavSpec { channels, sample_rate: 8000, bits_per_sample: bits, sample_format: format }
    }

    #[test]
    fn float32_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.wav"), dir.path().join("b.wav"));
        let mut w = WavWriter::create(&a, spec(2, 32, SampleFormat::Float)).unwrap();
        for i in 0..1000 {
            w.write_sample((i as f32 * 0.37).sin() * 0.9).unwrap();
        }
        w.finalize().unwrap();
        write(&b, &read(&a).unwrap()).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn pcm16_round_trip_is_sample_exact() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.wav"), dir.path().join("b.wav"));
        let mut w = WavWriter::create(&a, spec(1, 16, SampleFormat::Int)).unwrap();
        let src: Vec<i16> = (0..2000).map(|i| ((i * 7919) % 65536 - 32768) as i16).collect();
        for &v in &src {
            w.write_sample(v).unwrap();
        }
        w.finalize().unwrap();
        let audio = read(&a).unwrap();
        assert_eq!(audio.channels.len(), 1);
        write(&b, &audio).unwrap();
        let back: Vec<i16> = WavReader::open(&b).unwrap().samples::<i16>().map(|s| s.unwrap()).collect();
        assert_eq!(back, src);
    }

    #[test]
    fn unsupported_formats_are_diagnosed() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.wav");
        let mut w = WavWriter::create(&a, spec(1, 24, SampleFormat::Int)).unwrap();
        w.write_sample(5i32).unwrap();
        w.finalize().unwrap();
        let err = read(&a).unwrap_err().to_string();
        assert!(err.contains("24-bit integer PCM"), "{err}");
    }
}
