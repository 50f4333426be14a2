//! Line-delimited JSON datasets.
//!
//! Trajectories: one object per line,
//! `{"label": string|null, "seed": int, "points": [[x,y],...], "t_ms": [int,...]}`.
//!
//! Frames: `{"seed": int, "tip": [x,y], "shape": [3,99,99], "image": base64}`
//! where the payload holds one byte per value (`value · 255`), channel-major.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use crate::nn::Tensor;
use crate::synth::frame::FrameSample;
use crate::synth::label::GestureLabel;
use crate::synth::trajectory::{Point, Trajectory};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub label: Option<String>,
    pub seed: u64,
    pub points: Vec<[f64; 2]>,
    pub t_ms: Vec<u64>,
}

impl From<&Trajectory> for TrajectoryRecord {
    fn from(t: &Trajectory) -> Self {
        Self {
            label: t.label.map(|l| l.name().to_string()),
            seed: t.seed,
            points: t.points.iter().map(|p| [p.x, p.y]).collect(),
            t_ms: t.timestamps_ms.clone(),
        }
    }
}

impl TryFrom<TrajectoryRecord> for Trajectory {
    type Error = Error;

    fn try_from(r: TrajectoryRecord) -> Result<Self> {
        let label = r.label.as_deref().map(str::parse::<GestureLabel>).transpose()?;
        Trajectory::new(
            r.points.iter().map(|&[x, y]| Point::new(x, y)).collect(),
            r.t_ms,
            label,
            r.seed,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub seed: u64,
    pub tip: [f64; 2],
    pub shape: [usize; 3],
    pub image: String,
}

impl From<&FrameSample> for FrameRecord {
    fn from(f: &FrameSample) -> Self {
        let bytes: Vec<u8> = f.image.data().iter().map(|v| (v * 255.0).round() as u8).collect();
        let s = f.image.shape();
        Self {
            seed: f.seed,
            tip: [f.tip.0, f.tip.1],
            shape: [s[0], s[1], s[2]],
            image: STANDARD.encode(bytes),
        }
    }
}

impl TryFrom<FrameRecord> for FrameSample {
    type Error = Error;

    fn try_from(r: FrameRecord) -> Result<Self> {
        let bytes = STANDARD
            .decode(r.image.as_bytes())
            .map_err(|e| Error::invalid(format!("image payload: {e}")))?;
        let data = bytes.iter().map(|&b| b as f64 / 255.0).collect();
        let image = Tensor::new(r.shape.to_vec(), data)?;
        let (h, w) = (r.shape[1] as f64, r.shape[2] as f64);
        if !(0.0..w).contains(&r.tip[0]) || !(0.0..h).contains(&r.tip[1]) {
            return Err(Error::OutOfBounds(format!("tip {:?} outside the frame", r.tip)));
        }
        Ok(FrameSample {
            image,
            tip: (r.tip[0], r.tip[1]),
            seed: r.seed,
        })
    }
}

/// Writes any serializable records, one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, records: impl IntoIterator<Item = T>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut out, &r).map_err(|e| Error::io(path, e.into()))?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Parses JSON lines; blank lines are skipped and errors carry 1-based line
/// numbers.
pub fn parse_jsonl<T, R, F>(reader: R, mut convert: F) -> Result<Vec<T>>
where
    R: BufRead,
    F: FnMut(&str) -> Result<T>,
{
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(convert(&line).map_err(|e| Error::Parse {
            line: i + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?))
}

pub fn parse_trajectory_line(line: &str) -> Result<Trajectory> {
    let record: TrajectoryRecord = serde_json::from_str(line).map_err(|e| Error::invalid(e.to_string()))?;
    Trajectory::try_from(record)
}

pub fn write_trajectories(path: impl AsRef<Path>, data: &[Trajectory]) -> Result<()> {
    write_jsonl(path, data.iter().map(TrajectoryRecord::from))
}

pub fn read_trajectories(path: impl AsRef<Path>) -> Result<Vec<Trajectory>> {
    parse_jsonl(open(path.as_ref())?, parse_trajectory_line)
}

pub fn write_frames(path: impl AsRef<Path>, data: &[FrameSample]) -> Result<()> {
    write_jsonl(path, data.iter().map(FrameRecord::from))
}

pub fn read_frames(path: impl AsRef<Path>) -> Result<Vec<FrameSample>> {
    parse_jsonl(open(path.as_ref())?, |line| {
        let record: FrameRecord = serde_json::from_str(line).map_err(|e| Error::invalid(e.to_string()))?;
        FrameSample::try_from(record)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::frame::render_fingertip_frame;
    use crate::synth::generate::{generate_dataset, SynthConfig};

    #[test]
    fn trajectories_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        let data = generate_dataset(2, &SynthConfig::default()).unwrap();
        write_trajectories(&path, &data).unwrap();
        assert_eq!(read_trajectories(&path).unwrap(), data);
    }

    #[test]
    fn frames_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.jsonl");
        let frames: Vec<_> = (0..3).map(render_fingertip_frame).collect();
        write_frames(&path, &frames).unwrap();
        assert_eq!(read_frames(&path).unwrap(), frames);
    }

    #[test]
    fn empty_file_is_empty_dataset() {
        assert!(parse_jsonl(&b""[..], parse_trajectory_line).unwrap().is_empty());
    }

    #[test]
    fn out_of_canvas_point_rejected_with_line_number() {
        let text = concat!(
            r#"{"label":"Up","seed":1,"points":[[1,2],[3,4]],"t_ms":[0,33]}"#,
            "\n",
            r#"{"label":"Up","seed":2,"points":[[1,2],[700,4]],"t_ms":[0,33]}"#,
            "\n"
        );
        match parse_jsonl(text.as_bytes(), parse_trajectory_line) {
            Err(Error::Parse { line, reason }) => {
                assert_eq!(line, 2);
                assert!(reason.contains("outside"), "{reason}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn schema_violations_rejected() {
        for bad in [
            r#"{"label":"Up","seed":1,"points":[[1,2]],"t_ms":[0]}"#,
            r#"{"label":"Blob","seed":1,"points":[[1,2],[3,4]],"t_ms":[0,33]}"#,
            r#"{"label":"Up","seed":1,"points":[[1,2],[3,4]]}"#,
            r#"not json"#,
        ] {
            assert!(parse_jsonl(bad.as_bytes(), parse_trajectory_line).is_err(), "{bad}");
        }
    }

    #[test]
    fn unlabelled_records_allowed() {
        let line = r#"{"label":null,"seed":1,"points":[[1,2],[3,4]],"t_ms":[0,33]}"#;
        assert_eq!(parse_trajectory_line(line).unwrap().label, None);
    }
}
