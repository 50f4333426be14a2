//! Stream fixtures: a trajectory record plus its per-frame detector events,
//! one JSON object per line.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::pipeline::events::DetectionEvent;
use crate::synth::io::{parse_jsonl, write_jsonl, TrajectoryRecord};
use crate::synth::Trajectory;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamFixture {
    #[serde(flatten)]
    pub source: TrajectoryRecord,
    pub events: Vec<DetectionEvent>,
}

impl StreamFixture {
    pub fn new(source: &Trajectory, events: Vec<DetectionEvent>) -> Self {
        Self {
            source: TrajectoryRecord::from(source),
            events,
        }
    }

    pub fn trajectory(&self) -> Result<Trajectory> {
        Trajectory::try_from(self.source.clone())
    }

    pub fn validate(&self) -> Result<()> {
        self.trajectory()?;
        for w in self.events.windows(2) {
            if w[1].frame_index <= w[0].frame_index {
                return Err(Error::OutOfOrder {
                    last: w[0].frame_index,
                    got: w[1].frame_index,
                });
            }
        }
        self.events.iter().try_for_each(DetectionEvent::validate)
    }
}

pub fn write_fixtures(path: impl AsRef<Path>, fixtures: &[StreamFixture]) -> Result<()> {
    write_jsonl(path, fixtures)
}

pub fn read_fixtures(path: impl AsRef<Path>) -> Result<Vec<StreamFixture>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_jsonl(std::io::BufReader::new(file), |line| {
        let f: StreamFixture = serde_json::from_str(line).map_err(|e| Error::invalid(e.to_string()))?;
        f.validate()?;
        Ok(f)
    })
}
