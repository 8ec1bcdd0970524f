//! Image ingestion.
//!
//! Records reach the models as `[N, side, side, 3]` stacks of values in
//! `[0, 1]`. A stack comes either from decoding raster files, resized with a
//! triangle filter, or from a prebuilt PFT1 file whose rows are keyed by
//! source record index.

use std::path::{Path, PathBuf};

use image::imageops::FilterType;
use pricefuse_core::Tensor;

use crate::error::{Error, Result};
use crate::io;

/// Side length real images are resized to.
pub const IMAGE_SIDE: usize = 128;

pub enum ImageSource {
    /// Raster files; each record names its file relative to this directory.
    Directory { dir: PathBuf, side: usize },
    /// A PFT1 `[source_records, H, W, 3]` stack.
    Stack(Tensor<f32>),
}

impl ImageSource {
    pub fn directory(dir: &Path, side: usize) -> Result<Self> {
        io::require_exists(dir, "image directory")?;
        Ok(ImageSource::Directory {
            dir: dir.to_path_buf(),
            side,
        })
    }

    pub fn stack(path: &Path) -> Result<Self> {
        let t = io::read_tensor(path)?;
        let s = t.shape();
        if s.len() != 4 || s[3] != 3 {
            return Err(Error::parse(
                path,
                format!("image stack must be [N, H, W, 3], got {s:?}"),
            ));
        }
        Ok(ImageSource::Stack(t))
    }

    /// `[H, W, 3]` of the images this source yields.
    pub fn image_shape(&self) -> [usize; 3] {
        match self {
            ImageSource::Directory { side, .. } => [*side, *side, 3],
            ImageSource::Stack(t) => [t.shape()[1], t.shape()[2], 3],
        }
    }

    /// Pixels of one record, row-major `H × W × 3`.
    pub fn load(&self, record_index: usize, file_name: &str) -> Result<Vec<f32>> {
        match self {
            ImageSource::Directory { dir, side } => {
                if file_name.is_empty() {
                    return Err(Error::Config("record has no picture file".into()));
                }
                decode_resized(&dir.join(file_name), *side)
            }
            ImageSource::Stack(t) => {
                if record_index >= t.rows() {
                    return Err(Error::Config(format!(
                        "image stack has {} rows, no row for record {record_index}",
                        t.rows()
                    )));
                }
                Ok(t.row(record_index).to_vec())
            }
        }
    }
}

/// Decodes any supported raster file to RGB, resizes to `side × side` and
/// scales to `[0, 1]`.
pub fn decode_resized(path: &Path, side: usize) -> Result<Vec<f32>> {
    if !path.is_file() {
        return Err(Error::Config(format!("missing image `{}`", path.display())));
    }
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let rgb = image::imageops::resize(
        &img.to_rgb8(),
        side as u32,
        side as u32,
        FilterType::Triangle,
    );
    Ok(rgb.as_raw().iter().map(|&b| b as f32 / 255.0).collect())
}
