use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{NbmfError, Result};
use crate::io::pgm::{read_pgm, write_pgm, PgmFormat, PgmImage};
use crate::matrix::DenseMatrix;
use crate::par;

/// Equal-sized grayscale images as the columns of a `(width·height) × count`
/// matrix. Each column is its image flattened row by row, scaled to `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageDataset {
    pub width: usize,
    pub height: usize,
    pub names: Vec<String>,
    pub matrix: DenseMatrix,
}

impl ImageDataset {
    pub fn count(&self) -> usize {
        self.matrix.cols()
    }

    pub fn image(&self, i: usize) -> Vec<f64> {
        self.matrix.column(i)
    }
}

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

/// Loads every `*.pgm` in `dir` (sorted by file name) into one matrix.
pub fn load_pgm_directory(dir: &Path) -> Result<ImageDataset> {
    let entries = fs::read_dir(dir).map_err(|e| NbmfError::io(dir, e))?;
    let mut files: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| NbmfError::io(dir, e))?.path();
        if path.is_file() && is_pgm(&path) {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    if files.is_empty() {
        return Err(NbmfError::EmptyInput(format!("no .pgm files in {}", dir.display())));
    }
    let images: Vec<PgmImage> = par::try_map_indexed(files.len(), |i| read_pgm(&files[i]))?;
    let (width, height) = (images[0].width, images[0].height);
    let n = width * height;
    let mut matrix = DenseMatrix::zeros(n, images.len());
    for (c, (img, path)) in images.iter().zip(&files).enumerate() {
        if (img.width, img.height) != (width, height) {
            return Err(NbmfError::dim(format!(
                "{} is {}x{}, expected {width}x{height}",
                path.display(),
                img.width,
                img.height
            )));
        }
        for (r, x) in img.intensities().into_iter().enumerate() {
            matrix.set(r, c, x);
        }
    }
    let names = files
        .iter()
        .map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned())
        .collect();
    Ok(ImageDataset {
        width,
        height,
        names,
        matrix,
    })
}

/// Writes each column as an 8-bit raw PGM named after `dataset.names`.
pub fn write_pgm_directory(dataset: &ImageDataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| NbmfError::io(dir, e))?;
    for (i, name) in dataset.names.iter().enumerate() {
        let img = PgmImage::from_unit(dataset.width, dataset.height, &dataset.image(i))?;
        write_pgm(&dir.join(name), &img, PgmFormat::Raw)?;
    }
    Ok(())
}
