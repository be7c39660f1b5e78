//! Feature grids and reconstructions as 8-bit graymaps.

use serde::{Deserialize, Serialize};

use crate::error::{NbmfError, Result};
use crate::io::pgm::{unit_to_byte, PgmImage};
use crate::matrix::DenseMatrix;

const SEPARATOR: u16 = 255;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Contrast {
    /// Zero is black; white is `max(1, max W)`.
    Absolute,
    /// Each feature's own minimum is black and maximum is white; a constant
    /// feature renders black.
    Rescaled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureGrid {
    pub image: PgmImage,
    pub contrast: Contrast,
    /// Intensity mapped to white in absolute mode.
    pub white_level: Option<f64>,
}

/// Tiles the columns of `W` as `image_width × image_height` images,
/// `grid_cols` per row, separated by one-pixel white lines.
pub fn render_feature_grid(
    w: &DenseMatrix,
    image_width: usize,
    image_height: usize,
    grid_cols: usize,
    contrast: Contrast,
) -> Result<FeatureGrid> {
    let (n, k) = w.shape();
    if n != image_width * image_height {
        return Err(NbmfError::dim(format!(
            "W has {n} rows, a {image_width}x{image_height} image needs {}",
            image_width * image_height
        )));
    }
    if grid_cols == 0 || k == 0 {
        return Err(NbmfError::dim("feature grid needs at least one column and one feature"));
    }
    let grid_rows = k.div_ceil(grid_cols);
    let out_w = grid_cols * image_width + (grid_cols - 1);
    let out_h = grid_rows * image_height + (grid_rows - 1);
    let mut pixels = vec![SEPARATOR; out_w * out_h];

    let white_level = match contrast {
        Contrast::Absolute => Some(w.max().max(1.0)),
        Contrast::Rescaled => None,
    };
    for j in 0..k {
        let feature = w.column(j);
        let (lo, hi) = feature
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let map = |x: f64| -> f64 {
            match white_level {
                Some(white) => x / white,
                None if hi > lo => (x - lo) / (hi - lo),
                None => 0.0,
            }
        };
        let (tx, ty) = (j % grid_cols, j / grid_cols);
        let (x0, y0) = (tx * (image_width + 1), ty * (image_height + 1));
        for y in 0..image_height {
            for x in 0..image_width {
                let value = map(feature[y * image_width + x]);
                pixels[(y0 + y) * out_w + x0 + x] = unit_to_byte(value) as u16;
            }
        }
    }
    Ok(FeatureGrid {
        image: PgmImage::new(out_w, out_h, 255, pixels)?,
        contrast,
        white_level,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub original: PgmImage,
    pub reconstruction: PgmImage,
    /// Features switched on in `h_col`.
    pub selected: Vec<usize>,
}

/// Original image next to `W · h_col` clamped to `[0, 1]`.
pub fn render_reconstruction(
    v_col: &[f64],
    w: &DenseMatrix,
    h_col: &[u8],
    width: usize,
    height: usize,
) -> Result<Reconstruction> {
    let (n, k) = w.shape();
    if v_col.len() != n || h_col.len() != k || n != width * height {
        return Err(NbmfError::dim(format!(
            "column of length {}, W {n}x{k}, H column of length {} and {width}x{height} image do not conform",
            v_col.len(),
            h_col.len()
        )));
    }
    let selected: Vec<usize> = h_col.iter().enumerate().filter(|(_, &b)| b == 1).map(|(j, _)| j).collect();
    let recon: Vec<f64> = (0..n)
        .map(|r| selected.iter().map(|&j| w.get(r, j)).sum::<f64>().clamp(0.0, 1.0))
        .collect();
    Ok(Reconstruction {
        original: PgmImage::from_unit(width, height, v_col)?,
        reconstruction: PgmImage::from_unit(width, height, &recon)?,
        selected,
    })
}
