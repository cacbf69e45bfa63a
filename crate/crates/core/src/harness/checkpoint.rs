//! Versioned, checksummed checkpoint container.
//!
//! ```text
//! focusnet-checkpoint v1\n
//! header-bytes <N>\n
//! <N bytes of TOML: epoch, network spec, train config, rng state, block table>
//! <blocks: little-endian f64 values, in block-table order>
//! <CRC-32 (IEEE) of every preceding byte, little-endian u32>
//! ```
//!
//! Each block-table entry records the block name and its length in values;
//! the byte length is `8 * len`. Wall-clock data is never stored, so equal
//! training state always gives equal bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::{Network, NetworkSpec};
use super::train::Trainer;
use crate::analysis::FociTrajectory;
use crate::data::Standardization;
use crate::error::{Error, Result};
use crate::layers::Layer;
use crate::numerics::{Rng, RngState};
use crate::optim::{ClipBounds, Sgd, TrainConfig};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "focusnet-checkpoint v";

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub network: Network,
    pub epoch: usize,
    pub config: Option<TrainConfig>,
    pub rng: Option<RngState>,
    pub velocities: Vec<Vec<f64>>,
    pub standardization: Option<Standardization>,
}

impl Checkpoint {
    /// A bare network with no training state.
    pub fn from_network(network: Network) -> Self {
        Self {
            network,
            epoch: 0,
            config: None,
            rng: None,
            velocities: Vec::new(),
            standardization: None,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RngHeader {
    seed: String,
    stream: String,
    word_pos: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockHeader {
    name: String,
    len: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    epoch: usize,
    network: NetworkSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    train: Option<TrainConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rng: Option<RngHeader>,
    blocks: Vec<BlockHeader>,
}

fn layer_blocks(layer: &Layer) -> Vec<(&'static str, &[f64])> {
    match layer {
        Layer::Dense(l) => vec![("weights", l.weights.as_slice()), ("bias", &l.bias)],
        Layer::Focus(l) => vec![
            ("weights", l.weights.as_slice()),
            ("bias", &l.bias),
            ("mu", &l.focus.mu),
            ("sigma", &l.focus.sigma),
        ],
        Layer::BatchNorm(l) => vec![
            ("gamma", &l.gamma),
            ("beta", &l.beta),
            ("running_mean", &l.running_mean),
            ("running_var", &l.running_var),
        ],
        Layer::Dropout(_) | Layer::Relu(_) => Vec::new(),
    }
}

fn layer_blocks_mut(layer: &mut Layer) -> Vec<&mut [f64]> {
    match layer {
        Layer::Dense(l) => vec![l.weights.as_mut_slice(), &mut l.bias],
        Layer::Focus(l) => vec![
            l.weights.as_mut_slice(),
            &mut l.bias,
            &mut l.focus.mu,
            &mut l.focus.sigma,
        ],
        Layer::BatchNorm(l) => vec![&mut l.gamma, &mut l.beta, &mut l.running_mean, &mut l.running_var],
        Layer::Dropout(_) | Layer::Relu(_) => Vec::new(),
    }
}

pub fn to_bytes(ckpt: &Checkpoint) -> Result<Vec<u8>> {
    let mut blocks: Vec<(String, &[f64])> = Vec::new();
    for (i, layer) in ckpt.network.layers.iter().enumerate() {
        for (name, values) in layer_blocks(layer) {
            blocks.push((format!("layer{i}.{name}"), values));
        }
    }
    for (k, v) in ckpt.velocities.iter().enumerate() {
        blocks.push((format!("optimizer.velocity{k}"), v));
    }
    if let Some(s) = &ckpt.standardization {
        blocks.push(("standardization.mean".into(), &s.mean));
        blocks.push(("standardization.std".into(), &s.std));
    }
    let header = Header {
        epoch: ckpt.epoch,
        network: ckpt.network.spec.clone(),
        train: ckpt.config.clone(),
        rng: ckpt.rng.map(|r| RngHeader {
            seed: r.seed.to_string(),
            stream: r.stream.to_string(),
            word_pos: r.word_pos.to_string(),
        }),
        blocks: blocks
            .iter()
            .map(|(name, v)| BlockHeader {
                name: name.clone(),
                len: v.len(),
            })
            .collect(),
    };
    let text = toml::to_string(&header).map_err(|e| Error::CheckpointFormat(e.to_string()))?;
    let mut out = format!("{MAGIC}{FORMAT_VERSION}\nheader-bytes {}\n", text.len()).into_bytes();
    out.extend_from_slice(text.as_bytes());
    for (_, values) in &blocks {
        for v in *values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

fn take_line<'a>(bytes: &'a [u8], at: &mut usize, what: &str) -> Result<&'a str> {
    let rest = &bytes[*at..];
    let end = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::CheckpointTruncated(format!("missing {what} line")))?;
    *at += end + 1;
    std::str::from_utf8(&rest[..end]).map_err(|_| Error::CheckpointFormat(format!("{what} line is not UTF-8")))
}

fn parse_u<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::CheckpointFormat(format!("bad {what} `{s}`")))
}

pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint> {
    let mut at = 0;
    let first = take_line(bytes, &mut at, "version")?;
    let version = first
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::CheckpointFormat("not a focusnet checkpoint".into()))?;
    if version != FORMAT_VERSION.to_string() {
        return Err(Error::CheckpointVersion {
            expected: FORMAT_VERSION,
            found: version.to_string(),
        });
    }
    let size_line = take_line(bytes, &mut at, "header size")?;
    let header_len: usize = parse_u(
        size_line
            .strip_prefix("header-bytes ")
            .ok_or_else(|| Error::CheckpointFormat("missing header-bytes line".into()))?,
        "header size",
    )?;
    let header_end = at + header_len;
    if bytes.len() < header_end + 4 {
        return Err(Error::CheckpointTruncated(format!(
            "file has {} bytes, header alone needs {}",
            bytes.len(),
            header_end + 4
        )));
    }
    // parsed before the checksum only to tell truncation from corruption
    let header: std::result::Result<Header, String> = std::str::from_utf8(&bytes[at..header_end])
        .map_err(|e| e.to_string())
        .and_then(|s| toml::from_str(s).map_err(|e| e.to_string()));
    if let Ok(h) = &header {
        let expected = header_end + 8 * h.blocks.iter().map(|b| b.len).sum::<usize>() + 4;
        if bytes.len() < expected {
            return Err(Error::CheckpointTruncated(format!(
                "file has {} bytes, blocks need {expected}",
                bytes.len()
            )));
        }
    }
    let body = &bytes[..bytes.len() - 4];
    let stored = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().expect("4 bytes"));
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(Error::CheckpointChecksum { stored, computed });
    }
    let header = header.map_err(Error::CheckpointFormat)?;

    let mut cursor = header_end;
    let mut blocks = std::collections::HashMap::new();
    for b in &header.blocks {
        let end = cursor + 8 * b.len;
        if end > body.len() {
            return Err(Error::CheckpointTruncated(format!("block `{}`", b.name)));
        }
        let values: Vec<f64> = body[cursor..end]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        cursor = end;
        if blocks.insert(b.name.clone(), values).is_some() {
            return Err(Error::CheckpointFormat(format!("duplicate block `{}`", b.name)));
        }
    }
    if cursor != body.len() {
        return Err(Error::CheckpointFormat(format!(
            "{} trailing bytes after the last block",
            body.len() - cursor
        )));
    }
    let mut take = |name: &str| {
        blocks
            .remove(name)
            .ok_or_else(|| Error::CheckpointFormat(format!("missing block `{name}`")))
    };

    let clip = header.train.as_ref().map_or_else(ClipBounds::default, |c| c.clip);
    // structure from the spec; every value is overwritten below
    let mut network = Network::build(&header.network, &clip, &mut Rng::new(0))?;
    let names: Vec<Vec<&'static str>> = network
        .layers
        .iter()
        .map(|l| layer_blocks(l).into_iter().map(|b| b.0).collect())
        .collect();
    for (i, layer) in network.layers.iter_mut().enumerate() {
        for (slot, name) in layer_blocks_mut(layer).into_iter().zip(&names[i]) {
            let full = format!("layer{i}.{name}");
            let values = take(&full)?;
            if values.len() != slot.len() {
                return Err(Error::CheckpointFormat(format!(
                    "block `{full}` has {} values, layer needs {}",
                    values.len(),
                    slot.len()
                )));
            }
            slot.copy_from_slice(&values);
        }
    }
    if let Some(cfg) = &header.train {
        network.set_scaler_gradient(cfg.scaler_gradient);
    }
    let mut velocities = Vec::new();
    while let Some(v) = blocks.remove(&format!("optimizer.velocity{}", velocities.len())) {
        velocities.push(v);
    }
    let standardization = match (
        blocks.remove("standardization.mean"),
        blocks.remove("standardization.std"),
    ) {
        (Some(mean), Some(std)) => Some(Standardization { mean, std }),
        (None, None) => None,
        _ => return Err(Error::CheckpointFormat("incomplete standardization blocks".into())),
    };
    if let Some(extra) = blocks.keys().next() {
        return Err(Error::CheckpointFormat(format!("unexpected block `{extra}`")));
    }
    let rng = header
        .rng
        .map(|r| -> Result<RngState> {
            Ok(RngState {
                seed: parse_u(&r.seed, "rng seed")?,
                stream: parse_u(&r.stream, "rng stream")?,
                word_pos: parse_u(&r.word_pos, "rng position")?,
            })
        })
        .transpose()?;
    Ok(Checkpoint {
        network,
        epoch: header.epoch,
        config: header.train,
        rng,
        velocities,
        standardization,
    })
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_bytes(ckpt)?)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    from_bytes(&crate::error::read_file(path.as_ref())?)
}

impl Trainer {
    pub fn checkpoint(&self, standardization: Option<&Standardization>) -> Checkpoint {
        Checkpoint {
            network: self.network.clone(),
            epoch: self.epoch,
            config: Some(self.config.clone()),
            rng: Some(self.rng.state()),
            velocities: self.optimizer.velocities().to_vec(),
            standardization: standardization.cloned(),
        }
    }

    /// Continues a saved run; the run record starts empty.
    pub fn resume(ckpt: Checkpoint) -> Result<Trainer> {
        let config = ckpt
            .config
            .ok_or_else(|| Error::CheckpointFormat("checkpoint carries no training config".into()))?;
        let rng = ckpt
            .rng
            .ok_or_else(|| Error::CheckpointFormat("checkpoint carries no rng state".into()))?;
        config.validate()?;
        let mut network = ckpt.network;
        network.set_scaler_gradient(config.scaler_gradient);
        let trajectory = if config.log_trajectory && network.focus_layers().next().is_some() {
            let mut t = FociTrajectory::default();
            t.log(&network, ckpt.epoch)?;
            Some(t)
        } else {
            None
        };
        Ok(Trainer {
            optimizer: Sgd::with_velocities(config.momentum, ckpt.velocities),
            network,
            config,
            rng: Rng::from_state(rng),
            epoch: ckpt.epoch,
            record: Default::default(),
            trajectory,
        })
    }
}
