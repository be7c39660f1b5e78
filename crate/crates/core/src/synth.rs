//! Synthetic inputs: planted factorizations and a small face-like image corpus.

use crate::error::{NbmfError, Result};
use crate::io::ImageDataset;
use crate::matrix::{BinaryMatrix, DenseMatrix};
use crate::par;
use crate::rng::SeedStream;

/// `V = W H` exactly, so the optimal residual is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Planted {
    pub v: DenseMatrix,
    pub w: DenseMatrix,
    pub h: BinaryMatrix,
}

/// Random planted instance with `W` entries in `[0.1, 1.1)` and every column
/// of `H` nonzero.
pub fn planted(n: usize, m: usize, k: usize, seed: u64) -> Result<Planted> {
    if n == 0 || m == 0 || k == 0 {
        return Err(NbmfError::dim(format!("planted instance needs positive sizes, got {n}x{m} with k={k}")));
    }
    let mut rng = SeedStream::new(seed);
    let w = DenseMatrix::from_vec(n, k, (0..n * k).map(|_| 0.1 + rng.next_f64()).collect())?;
    let mut h = BinaryMatrix::zeros(k, m);
    for c in 0..m {
        let mut col: Vec<u8> = (0..k).map(|_| rng.coin() as u8).collect();
        if col.iter().all(|&b| b == 0) {
            col[rng.below(k)] = 1;
        }
        h.set_column(c, &col);
    }
    let v = w.matmul(&h)?;
    Ok(Planted { v, w, h })
}

fn gaussian_blob(x: f64, y: f64, cx: f64, cy: f64, sx: f64, sy: f64) -> f64 {
    let dx = (x - cx) / sx;
    let dy = (y - cy) / sy;
    (-0.5 * (dx * dx + dy * dy)).exp()
}

fn face(width: usize, height: usize, rng: &mut SeedStream) -> Vec<f64> {
    let (w, h) = (width as f64, height as f64);
    let mut u = |lo: f64, hi: f64| lo + (hi - lo) * rng.next_f64();

    let cx = w / 2.0 + u(-0.6, 0.6);
    let cy = h / 2.0 + u(-0.6, 0.6);
    let rx = w * u(0.32, 0.42);
    let ry = h * u(0.40, 0.48);
    let skin = u(0.45, 0.75);
    let background = u(0.0, 0.3);
    let light = u(-0.25, 0.25);

    let eye_y = cy - ry * u(0.2, 0.35);
    let eye_dx = rx * u(0.38, 0.5);
    let eye_size = u(0.7, 1.3);
    let eye_depth = u(0.3, 0.6);
    let brow = u(0.0, 0.35);
    let nose_len = ry * u(0.2, 0.35);
    let mouth_y = cy + ry * u(0.45, 0.62);
    let mouth_w = rx * u(0.3, 0.6);
    let mouth_depth = u(0.2, 0.5);
    let glasses = rng.next_f64() < 0.2;

    let mut pixels = Vec::with_capacity(width * height);
    for py in 0..height {
        for px in 0..width {
            let (x, y) = (px as f64 + 0.5, py as f64 + 0.5);
            let e = ((x - cx) / rx).powi(2) + ((y - cy) / ry).powi(2);
            let inside = 1.0 / (1.0 + ((e - 1.0) * 8.0).exp());
            let shade = skin * (1.0 + light * (x - cx) / w);
            let mut value = background + inside * (shade - background);
            for side in [-1.0, 1.0] {
                let ex = cx + side * eye_dx;
                value -= eye_depth * gaussian_blob(x, y, ex, eye_y, eye_size, 0.7 * eye_size);
                value -= brow * gaussian_blob(x, y, ex, eye_y - 1.8, 1.6, 0.5);
                if glasses {
                    let ring = ((x - ex).hypot(y - eye_y) - 2.2).abs();
                    value -= 0.3 * (-(ring * ring) / 0.3).exp();
                }
            }
            value += 0.15 * gaussian_blob(x, y, cx, eye_y + nose_len, 0.8, nose_len * 0.6);
            value -= mouth_depth * gaussian_blob(x, y, cx, mouth_y, mouth_w, 0.6);
            pixels.push(value.clamp(0.0, 1.0));
        }
    }
    pixels
}

/// `count` grayscale face-like images, each an oval with eyes, brows, nose
/// and mouth whose placement and contrast vary. Image `i` depends only on
/// `seed` and `i`.
pub fn synthetic_faces(count: usize, width: usize, height: usize, seed: u64) -> Result<ImageDataset> {
    if count == 0 || width < 4 || height < 4 {
        return Err(NbmfError::Validation(format!(
            "synthetic corpus needs at least one image of at least 4x4 pixels, got {count} of {width}x{height}"
        )));
    }
    let root = SeedStream::new(seed);
    let images = par::map_indexed(count, |i| face(width, height, &mut root.fork(i as u64)));
    let n = width * height;
    let mut matrix = DenseMatrix::zeros(n, count);
    for (c, img) in images.iter().enumerate() {
        for (r, &x) in img.iter().enumerate() {
            matrix.set(r, c, x);
        }
    }
    Ok(ImageDataset {
        width,
        height,
        names: (0..count).map(|i| format!("face_{i:05}.pgm")).collect(),
        matrix,
    })
}
