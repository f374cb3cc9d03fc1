//! Dataset manifest: the `dataset.json` at a dataset root listing scene
//! directories, their generation seeds, and the shared geometry.

use std::path::Path;

use serde::{Deserialize, Serialize};

use lf_core::io::write_bytes_atomic;

use crate::error::SceneError;
use crate::Result;

/// One scene directory plus the seed that regenerates it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEntry {
    pub id: String,
    pub seed: u64,
}

/// Contents of `dataset.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    #[serde(rename = "U")]
    pub u: usize,
    #[serde(rename = "V")]
    pub v: usize,
    #[serde(rename = "H")]
    pub h: usize,
    #[serde(rename = "W")]
    pub w: usize,
    pub channels: usize,
    pub disparity_range: [f64; 2],
    pub master_seed: u64,
    pub train: Vec<SceneEntry>,
    pub val: Vec<SceneEntry>,
}

impl DatasetManifest {
    pub fn save(&self, root: &Path) -> Result<()> {
        std::fs::create_dir_all(root)?;
        let mut json = serde_json::to_vec_pretty(self)?;
        json.push(b'\n');
        write_bytes_atomic(&root.join("dataset.json"), &json)?;
        Ok(())
    }

    pub fn load(root: &Path) -> Result<Self> {
        let path = root.join("dataset.json");
        if !path.exists() {
            return Err(SceneError::InvalidSpec(format!(
                "{} has no dataset.json manifest",
                root.display()
            )));
        }
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }

    /// Root-relative directory of a scene.
    pub fn scene_dir(id: &str) -> String {
        format!("scenes/{id}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let m = DatasetManifest {
            u: 5,
            v: 5,
            h: 16,
            w: 16,
            channels: 3,
            disparity_range: [-2.0, 2.0],
            master_seed: 1234,
            train: (0..3)
                .map(|i| SceneEntry { id: format!("scene_{i:04}"), seed: 100 + i })
                .collect(),
            val: vec![SceneEntry { id: "scene_0099".into(), seed: 999 }],
        };
        m.save(dir.path()).unwrap();
        let back = DatasetManifest::load(dir.path()).unwrap();
        assert_eq!(back, m);
        assert_eq!(DatasetManifest::scene_dir("scene_0001"), "scenes/scene_0001");
    }

    #[test]
    fn missing_manifest_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(DatasetManifest::load(dir.path()).is_err());
    }
}
