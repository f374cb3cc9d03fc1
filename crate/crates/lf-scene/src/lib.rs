//! Procedural layered light-field scenes with exact ground-truth
//! disparity, plus the dataset plumbing around them: patch extraction,
//! external depth ingestion, super-resolution pair export, and manifests.
//!
//! The renderer shares its sampling law with the warping operator, so for
//! single-layer scenes, warping the central view with the ground-truth
//! disparity reproduces every rendered view bit-exactly. Multi-layer
//! scenes are composited back to front with per-view visibility, making
//! occlusions correct by construction.

pub mod depth;
pub mod error;
pub mod manifest;
pub mod mask;
pub mod patch;
pub mod scene;
pub mod sr;
pub mod texture;

pub use depth::{ingest_depth, normalize_inverse_depth};
pub use error::SceneError;
pub use manifest::{DatasetManifest, SceneEntry};
pub use mask::MaskSpec;
pub use patch::{crop_patches, TrainingPatch};
pub use scene::{generate_scene, sample_scene_spec, Layer, SceneSpec};
pub use sr::{box_downsample, export_sr_pairs, SrManifest, SrPairEntry, SrProvenance};
pub use texture::TextureSpec;

pub type Result<T> = std::result::Result<T, SceneError>;
