//! Binary PGM (`P5`, 8-bit) frames and numbered frame sequences with an
//! optional timestamp sidecar.
//!
//! A sequence directory holds `frame_NNNNNN.pgm` files (any `*.pgm` names
//! are accepted and read in lexicographic order) plus an optional
//! `timestamps.txt` with one float, in seconds, per line.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::Frame;
use crate::error::{Result, TrackError};

pub const TIMESTAMP_SIDECAR: &str = "timestamps.txt";

/// Decode a `P5` image with maxval at most 255.
pub fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let mut pos = 0usize;
    let next_token = |pos: &mut usize| -> Result<String> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(TrackError::Pgm("truncated header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };

    let magic = next_token(&mut pos)?;
    if magic != "P5" {
        return Err(TrackError::Pgm(format!("unsupported magic {magic:?}, expected P5")));
    }
    let mut field = |name: &str| -> Result<usize> {
        let tok = next_token(&mut pos)?;
        tok.parse::<usize>()
            .map_err(|_| TrackError::Pgm(format!("bad {name} {tok:?}")))
    };
    let width = field("width")?;
    let height = field("height")?;
    let maxval = field("maxval")?;
    if width == 0 || height == 0 {
        return Err(TrackError::Pgm(format!("empty image {width}x{height}")));
    }
    if maxval == 0 || maxval > 255 {
        return Err(TrackError::Pgm(format!("maxval {maxval} is not 8-bit")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let need = width * height;
    if bytes.len() < pos + need {
        return Err(TrackError::Pgm(format!(
            "raster truncated: need {need} bytes, have {}",
            bytes.len().saturating_sub(pos)
        )));
    }
    let mut data = bytes[pos..pos + need].to_vec();
    if maxval != 255 {
        for v in &mut data {
            *v = ((u32::from(*v) * 255 + maxval as u32 / 2) / maxval as u32).min(255) as u8;
        }
    }
    Ok((width, height, data))
}

pub fn encode_pgm(width: usize, height: usize, data: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(data);
    out
}

pub fn read_frame(path: &Path, timestamp: f64, frame_index: u64) -> Result<Frame> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| TrackError::io(path, e))?;
    let (w, h, data) = decode_pgm(&bytes)
        .map_err(|e| TrackError::Pgm(format!("{}: {e}", path.display())))?;
    Frame::from_u8(w, h, &data, timestamp, frame_index)
}

/// Write `frame` as 8-bit PGM, rounding and clamping intensities.
pub fn write_frame(path: &Path, frame: &Frame) -> Result<()> {
    let bytes = encode_pgm(frame.width(), frame.height(), &frame.to_u8());
    fs::write(path, bytes).map_err(|e| TrackError::io(path, e))
}

/// Sorted list of `*.pgm` files in `dir`.
pub fn list_sequence(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| TrackError::io(dir, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .map(|e| e.eq_ignore_ascii_case("pgm"))
                    .unwrap_or(false)
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(TrackError::EmptySequence(dir.to_path_buf()));
    }
    Ok(files)
}

pub fn parse_timestamps(text: &str, origin: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let t: f64 = line.parse().map_err(|_| TrackError::Parse {
            path: origin.to_string(),
            line: i + 1,
            message: format!("expected seconds, got {line:?}"),
        })?;
        if let Some(&prev) = out.last() {
            if t <= prev {
                return Err(TrackError::Parse {
                    path: origin.to_string(),
                    line: i + 1,
                    message: format!("timestamp {t} does not increase past {prev}"),
                });
            }
        }
        out.push(t);
    }
    Ok(out)
}

pub fn format_timestamps(timestamps: &[f64]) -> String {
    let mut s = String::new();
    for t in timestamps {
        s.push_str(&format!("{t}\n"));
    }
    s
}

/// Frame timestamps for a sequence: the sidecar when present, otherwise
/// `index / fps`.
pub fn sequence_timestamps(dir: &Path, count: usize, fps: f64) -> Result<Vec<f64>> {
    let sidecar = dir.join(TIMESTAMP_SIDECAR);
    if sidecar.is_file() {
        let text = fs::read_to_string(&sidecar).map_err(|e| TrackError::io(&sidecar, e))?;
        let ts = parse_timestamps(&text, &sidecar.display().to_string())?;
        if ts.len() < count {
            return Err(TrackError::Parse {
                path: sidecar.display().to_string(),
                line: ts.len() + 1,
                message: format!("{} timestamps for {count} frames", ts.len()),
            });
        }
        Ok(ts[..count].to_vec())
    } else {
        Ok((0..count).map(|i| i as f64 / fps).collect())
    }
}

/// Lazily reads the frames of a sequence directory in order.
pub struct SequenceReader {
    files: Vec<PathBuf>,
    timestamps: Vec<f64>,
    next: usize,
}

impl SequenceReader {
    pub fn open(dir: &Path, fallback_fps: f64) -> Result<Self> {
        let files = list_sequence(dir)?;
        let timestamps = sequence_timestamps(dir, files.len(), fallback_fps)?;
        Ok(Self {
            files,
            timestamps,
            next: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }
}

impl Iterator for SequenceReader {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        let i = self.next;
        let path = self.files.get(i)?;
        self.next += 1;
        Some(read_frame(path, self.timestamps[i], i as u64))
    }
}

/// Streams frames into a sequence directory.
pub struct SequenceWriter {
    dir: PathBuf,
    timestamps: Vec<f64>,
}

impl SequenceWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| TrackError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            timestamps: Vec::new(),
        })
    }

    pub fn frame_path(dir: &Path, index: usize) -> PathBuf {
        dir.join(format!("frame_{index:06}.pgm"))
    }

    pub fn push(&mut self, frame: &Frame) -> Result<()> {
        write_frame(&Self::frame_path(&self.dir, self.timestamps.len()), frame)?;
        self.timestamps.push(frame.timestamp);
        Ok(())
    }

    pub fn finish(self) -> Result<()> {
        let path = self.dir.join(TIMESTAMP_SIDECAR);
        let file = fs::File::create(&path).map_err(|e| TrackError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(format_timestamps(&self.timestamps).as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| TrackError::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_with_comments() {
        let mut bytes = b"P5\n# made by hand\n3 2 # dims\n255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3, 4, 5, 6]);
        let (w, h, d) = decode_pgm(&bytes).unwrap();
        assert_eq!((w, h), (3, 2));
        assert_eq!(d, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn rejects_ascii_and_truncated() {
        assert!(decode_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(decode_pgm(b"P5\n4 4\n255\n\x00\x01").is_err());
        assert!(decode_pgm(b"P5\n1 1\n65535\n\x00\x00").is_err());
        assert!(decode_pgm(b"P5\n").is_err());
    }

    #[test]
    fn low_maxval_is_rescaled() {
        let (_, _, d) = decode_pgm(b"P5 2 1 15\n\x00\x0f").unwrap();
        assert_eq!(d, vec![0, 255]);
    }

    #[test]
    fn timestamps_must_increase() {
        assert_eq!(parse_timestamps("0\n0.5\n\n1.0\n", "t").unwrap(), vec![0.0, 0.5, 1.0]);
        let err = parse_timestamps("0\n0.5\n0.5\n", "t").unwrap_err();
        assert!(matches!(err, TrackError::Parse { line: 3, .. }));
        assert!(parse_timestamps("zero\n", "t").is_err());
    }

    #[test]
    fn sequence_round_trip_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = SequenceWriter::create(dir.path()).unwrap();
        for i in 0..3u8 {
            let f = Frame::from_u8(2, 2, &[i, 10, 20, 30], f64::from(i) * 0.04, u64::from(i)).unwrap();
            w.push(&f).unwrap();
        }
        w.finish().unwrap();
        let r = SequenceReader::open(dir.path(), 25.0).unwrap();
        assert_eq!(r.len(), 3);
        let frames: Vec<Frame> = r.collect::<Result<_>>().unwrap();
        assert_eq!(frames[2].pixels(), &[2.0, 10.0, 20.0, 30.0]);
        assert_eq!(frames[1].timestamp, 0.04);
        assert_eq!(frames[2].frame_index, 2);
    }

    #[test]
    fn empty_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            SequenceReader::open(dir.path(), 25.0),
            Err(TrackError::EmptySequence(_))
        ));
    }

    proptest! {
        #[test]
        fn encode_decode_identity(w in 1usize..20, h in 1usize..20, seed in any::<u64>()) {
            let data: Vec<u8> = (0..w * h).map(|i| (seed.wrapping_mul(i as u64 + 7) >> 13) as u8).collect();
            let (w2, h2, d2) = decode_pgm(&encode_pgm(w, h, &data)).unwrap();
            prop_assert_eq!((w2, h2), (w, h));
            prop_assert_eq!(d2, data);
        }
    }
}
