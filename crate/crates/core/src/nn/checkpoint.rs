//! Binary checkpoint container.
//!
//! Byte layout (all integers little-endian):
//!
//! | offset | size | content                                            |
//! |--------|------|----------------------------------------------------|
//! | 0      | 8    | magic `GSTLCKPT`                                   |
//! | 8      | 4    | `u32` format version                               |
//! | 12     | 8    | `u64` header length `N`                            |
//! | 20     | N    | UTF-8 JSON header (see [`Header`])                 |
//! | 20+N   | …    | parameter data: `f64` LE, tensors in header order  |
//!
//! The file must end exactly after the last declared value. The version in
//! the fixed prefix and in the JSON header must both equal
//! [`FORMAT_VERSION`].

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::nn::model::Parameterized;
use crate::nn::spec::LayerSpec;
use crate::nn::tensor::Tensor;
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"GSTLCKPT";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEntry {
    pub name: String,
    pub shape: Vec<usize>,
}

/// JSON header record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format_version: u32,
    /// Input shape the architecture expects (e.g. `[3, 99, 99]`, or `[0, 2]`
    /// for variable-length sequences of 2-vectors).
    pub input_shape: Vec<usize>,
    pub architecture: Vec<LayerSpec>,
    pub rng_seed: u64,
    pub parameters: Vec<ParamEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelCheckpoint {
    pub format_version: u32,
    pub input_shape: Vec<usize>,
    pub architecture: Vec<LayerSpec>,
    pub parameters: Vec<(String, Tensor)>,
    pub rng_seed: u64,
}

impl ModelCheckpoint {
    pub fn capture<M: Parameterized>(
        model: &M,
        input_shape: Vec<usize>,
        architecture: Vec<LayerSpec>,
        rng_seed: u64,
    ) -> Result<Self> {
        let parameters = model
            .param_names()
            .into_iter()
            .zip(model.params().into_iter().cloned())
            .collect();
        let ckpt = Self {
            format_version: FORMAT_VERSION,
            input_shape,
            architecture,
            parameters,
            rng_seed,
        };
        ckpt.check_names()?;
        Ok(ckpt)
    }

    fn check_names(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (name, _) in &self.parameters {
            if !seen.insert(name.as_str()) {
                return Err(Error::Checkpoint(format!("duplicate parameter name {name:?}")));
            }
        }
        Ok(())
    }

    pub fn tensors(&self) -> Vec<Tensor> {
        self.parameters.iter().map(|(_, t)| t.clone()).collect()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.check_names()?;
        let header = Header {
            format_version: self.format_version,
            input_shape: self.input_shape.clone(),
            architecture: self.architecture.clone(),
            rng_seed: self.rng_seed,
            parameters: self
                .parameters
                .iter()
                .map(|(name, t)| ParamEntry {
                    name: name.clone(),
                    shape: t.shape().to_vec(),
                })
                .collect(),
        };
        let json = serde_json::to_vec(&header).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let values: usize = self.parameters.iter().map(|(_, t)| t.len()).sum();
        let mut out = Vec::with_capacity(20 + json.len() + 8 * values);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.format_version.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for (_, t) in &self.parameters {
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let err = |msg: String| Error::Checkpoint(msg);
        if bytes.len() < 20 {
            return Err(err(format!("truncated prefix ({} bytes)", bytes.len())));
        }
        if &bytes[..8] != MAGIC {
            return Err(err("bad magic; not a checkpoint file".into()));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(err(format!(
                "unsupported format_version {version} (expected {FORMAT_VERSION})"
            )));
        }
        let header_len = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
        let header_end = 20usize
            .checked_add(header_len)
            .filter(|&end| end <= bytes.len())
            .ok_or_else(|| err("truncated header".into()))?;
        let header: Header = serde_json::from_slice(&bytes[20..header_end])
            .map_err(|e| err(format!("malformed header: {e}")))?;
        if header.format_version != FORMAT_VERSION {
            return Err(err(format!(
                "unsupported format_version {} in header",
                header.format_version
            )));
        }
        let mut offset = header_end;
        let mut parameters = Vec::with_capacity(header.parameters.len());
        for entry in header.parameters {
            let n: usize = entry.shape.iter().product();
            let end = offset
                .checked_add(n * 8)
                .filter(|&end| end <= bytes.len())
                .ok_or_else(|| err(format!("truncated data in parameter {:?}", entry.name)))?;
            let data = bytes[offset..end]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            parameters.push((entry.name, Tensor::new(entry.shape, data)?));
            offset = end;
        }
        if offset != bytes.len() {
            return Err(err(format!("{} trailing bytes", bytes.len() - offset)));
        }
        let ckpt = Self {
            format_version: version,
            input_shape: header.input_shape,
            architecture: header.architecture,
            parameters,
            rng_seed: header.rng_seed,
        };
        ckpt.check_names()?;
        Ok(ckpt)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
