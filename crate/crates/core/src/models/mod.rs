//! Problem generators.

mod deconvolution;
mod grid;
mod synthetic;
mod texture;

pub use deconvolution::{
    blur, deconvolution_energy, gaussian_kernel, gen_deconvolution, three_tone_scene,
    DeconvolutionParams, DeconvolutionProblem,
};
pub use grid::{full_topology, grid_topology, window_offsets, Structure};
pub use synthetic::{gen_binary_characterization, gen_synthetic, SyntheticSpec};
pub use texture::{gen_texture, learn_offsets, select_offsets, OffsetStats, TextureParams};
