//! Checkpoint serialization: a magic string, a JSON header describing the
//! config and every parameter tensor, then one flat blob of little-endian
//! 32-bit floats.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::element::Element;
use crate::error::NetError;
use crate::unet::{DistgNetConfig, DistgUnet};
use crate::Result;

/// Format identifier; bump when the layout changes.
pub const MAGIC: &[u8; 9] = b"DISTGNET1";

#[derive(Debug, Serialize, Deserialize)]
struct ParamEntry {
    name: String,
    shape: Vec<usize>,
    /// Byte offset of this tensor within the data blob.
    offset: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    config: DistgNetConfig,
    params: Vec<ParamEntry>,
}

/// Writes the network to `path` (atomically, via a sibling temp file).
pub fn save_checkpoint<E: Element>(net: &DistgUnet<E>, path: &Path) -> Result<()> {
    let mut entries = Vec::new();
    let mut blob: Vec<u8> = Vec::new();
    net.visit("", &mut |name, view| {
        entries.push(ParamEntry {
            name: name.to_string(),
            shape: view.shape().to_vec(),
            offset: blob.len() as u64,
        });
        for v in view.iter() {
            blob.extend_from_slice(&(Element::to_f64(*v) as f32).to_le_bytes());
        }
    });
    let header = Header { config: net.config().clone(), params: entries };
    let header_bytes = serde_json::to_vec(&header)?;

    let mut bytes = Vec::with_capacity(MAGIC.len() + 8 + header_bytes.len() + blob.len());
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&(header_bytes.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&header_bytes);
    bytes.extend_from_slice(&blob);

    let tmp = path.with_extension("ckpt.tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads a checkpoint back into a freshly built network of element type `E`.
pub fn load_checkpoint<E: Element>(path: &Path) -> Result<DistgUnet<E>> {
    let bytes = fs::read(path)?;
    if bytes.len() < MAGIC.len() + 8 || &bytes[..MAGIC.len()] != MAGIC {
        return Err(NetError::Checkpoint(format!(
            "{} is not a DISTGNET1 checkpoint",
            path.display()
        )));
    }
    let mut cursor = MAGIC.len();
    let header_len = u64::from_le_bytes(bytes[cursor..cursor + 8].try_into().unwrap()) as usize;
    cursor += 8;
    if bytes.len() < cursor + header_len {
        return Err(NetError::Checkpoint("truncated header".into()));
    }
    let header: Header = serde_json::from_slice(&bytes[cursor..cursor + header_len])?;
    cursor += header_len;
    let blob = &bytes[cursor..];

    let by_name: HashMap<&str, &ParamEntry> =
        header.params.iter().map(|e| (e.name.as_str(), e)).collect();
    if by_name.len() != header.params.len() {
        return Err(NetError::Checkpoint("duplicate parameter names".into()));
    }

    let mut net: DistgUnet<E> = DistgUnet::build_with_seed(header.config.clone(), 0)?;
    let mut failure: Option<NetError> = None;
    let mut consumed = 0usize;
    net.visit_mut("", &mut |name, mut view| {
        if failure.is_some() {
            return;
        }
        let Some(entry) = by_name.get(name) else {
            failure = Some(NetError::MissingParam(name.to_string()));
            return;
        };
        if entry.shape != view.shape() {
            failure = Some(NetError::Checkpoint(format!(
                "parameter {name}: stored shape {:?} vs expected {:?}",
                entry.shape,
                view.shape()
            )));
            return;
        }
        let count = view.len();
        let start = entry.offset as usize;
        let end = start + 4 * count;
        if end > blob.len() {
            failure = Some(NetError::Checkpoint(format!(
                "parameter {name}: data range {start}..{end} exceeds blob of {} bytes",
                blob.len()
            )));
            return;
        }
        for (i, v) in view.iter_mut().enumerate() {
            let raw = f32::from_le_bytes(blob[start + 4 * i..start + 4 * i + 4].try_into().unwrap());
            *v = E::from_f64(raw as f64);
        }
        consumed += 1;
    });
    if let Some(err) = failure {
        return Err(err);
    }
    if consumed != header.params.len() {
        return Err(NetError::Checkpoint(format!(
            "checkpoint lists {} parameters but the network has {consumed}",
            header.params.len()
        )));
    }
    Ok(net)
}
