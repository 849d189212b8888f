//! Dataset ingestion and export: the PFM disparity codec, PNG view grids in
//! the benchmark directory layout, visualization output and raw volume
//! dumps.

pub mod pfm;
pub mod scene;
pub mod visual;
pub mod volume;

pub use pfm::{read_disparity, read_pfm, write_disparity, write_pfm, PfmData};
pub use scene::{export_scene, load_scene, render_pattern, SceneLayout};
pub use visual::{colormap, write_badpix_png, write_disparity_png, write_gray_png};
pub use volume::{read_volume, write_volume};
