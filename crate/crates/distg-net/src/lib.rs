//! A disentangling denoiser for light-field diffusion.
//!
//! The network consumes macro-pixel arrays `[A*H', A*W', channels]` whose
//! rows interleave an `A x A` view grid with the per-view spatial lattice.
//! Each [`DistgBlock`] extracts features from four 2D subspaces of that
//! grid — spatial (same view), angular (same pixel), and the two
//! epipolar-plane orientations — fuses them, and conditions on the
//! diffusion timestep. [`DistgUnet`] stacks these blocks in a U shape,
//! pooling the per-view lattice between scales while the angular
//! arrangement survives untouched.
//!
//! Everything is generic over the scalar type: training runs in `f32`,
//! while gradient verification runs the identical code in `f64`.

pub mod block;
pub mod checkpoint;
pub mod conv;
pub mod element;
pub mod embed;
pub mod error;
pub mod norm;
pub mod ops;
pub mod optim;
pub mod param;
pub mod unet;

pub use block::{angular_spec, epi_h_spec, epi_v_spec, spatial_spec, DistgBlock, NORM_GROUPS};
pub use checkpoint::{load_checkpoint, save_checkpoint, MAGIC};
pub use conv::{Conv2d, ConvSpec, Init};
pub use element::Element;
pub use embed::timestep_embedding;
pub use error::NetError;
pub use norm::GroupNorm;
pub use ops::{
    leaky_relu, leaky_relu_backward, upsample_nearest, upsample_nearest_backward, view_pool2,
    view_pool2_backward, view_up2, view_up2_backward, LEAKY_SLOPE,
};
pub use optim::{cosine_lr, AdamW};
pub use param::Param;
pub use unet::{DistgNetConfig, DistgUnet};

pub type Result<T> = std::result::Result<T, NetError>;
