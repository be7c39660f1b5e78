//! Dense row-major containers for the factors `V ≈ W H`.

use serde::{Deserialize, Serialize};

use crate::error::{NbmfError, Result};

/// Read access shared by real and binary factors.
pub trait MatrixView {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn value(&self, r: usize, c: usize) -> f64;

    fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }
}

#[derive(Deserialize)]
struct RawDense {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<RawDense> for DenseMatrix {
    type Error = NbmfError;

    fn try_from(raw: RawDense) -> Result<Self> {
        DenseMatrix::from_vec(raw.rows, raw.cols, raw.data)
    }
}

/// Real matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDense")]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(NbmfError::dim(format!(
                "{} values supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds from nested rows; every row must have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(NbmfError::dim(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(DenseMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Rejects NaN, infinite and negative entries, naming the first offending cell.
    pub fn validate_nonnegative(&self, what: &str) -> Result<()> {
        for (idx, &x) in self.data.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                let (r, c) = (idx / self.cols.max(1), idx % self.cols.max(1));
                return Err(NbmfError::Validation(format!(
                    "{what} has invalid entry {x} at row {r}, column {c}"
                )));
            }
        }
        Ok(())
    }

    /// `self · rhs` for any right-hand factor.
    pub fn matmul<M: MatrixView>(&self, rhs: &M) -> Result<DenseMatrix> {
        if self.cols != rhs.rows() {
            return Err(NbmfError::dim(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows,
                self.cols,
                rhs.rows(),
                rhs.cols()
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols());
        for r in 0..self.rows {
            for j in 0..self.cols {
                let w = self.get(r, j);
                if w == 0.0 {
                    continue;
                }
                for c in 0..rhs.cols() {
                    out.data[r * out.cols + c] += w * rhs.value(j, c);
                }
            }
        }
        Ok(out)
    }
}

impl MatrixView for DenseMatrix {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn value(&self, r: usize, c: usize) -> f64 {
        self.get(r, c)
    }
}

#[derive(Deserialize)]
struct RawBinary {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl TryFrom<RawBinary> for BinaryMatrix {
    type Error = NbmfError;

    fn try_from(raw: RawBinary) -> Result<Self> {
        BinaryMatrix::from_vec(raw.rows, raw.cols, raw.data)
    }
}

/// {0,1}-valued matrix stored row-major, one byte per entry.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawBinary")]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl BinaryMatrix {
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        BinaryMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(NbmfError::dim(format!(
                "{} bits supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|&b| b > 1) {
            return Err(NbmfError::Validation(format!(
                "binary matrix entry at row {}, column {} is {}",
                pos / cols.max(1),
                pos % cols.max(1),
                data[pos]
            )));
        }
        Ok(BinaryMatrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(NbmfError::dim(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        BinaryMatrix::from_vec(rows.len(), cols, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BinaryMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.cols + c] == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, bit: bool) {
        self.data[r * self.cols + c] = bit as u8;
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u8> {
        (0..self.rows).map(|r| self.data[r * self.cols + c]).collect()
    }

    pub fn set_column(&mut self, c: usize, bits: &[u8]) {
        debug_assert_eq!(bits.len(), self.rows);
        for (r, &b) in bits.iter().enumerate() {
            self.data[r * self.cols + c] = b;
        }
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&b| b == 1).count()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&b| b as f64).collect(),
        }
    }
}

impl MatrixView for BinaryMatrix {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn value(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c] as f64
    }
}

/// Squared Euclidean distance `||v - W q||²` for one column.
pub fn column_residual_sq(w: &DenseMatrix, v: &[f64], q: &[u8]) -> f64 {
    let mut total = 0.0;
    for (r, &vr) in v.iter().enumerate() {
        let row = w.row(r);
        let mut pred = 0.0;
        for (wj, &bit) in row.iter().zip(q) {
            if bit == 1 {
                pred += wj;
            }
        }
        let d = vr - pred;
        total += d * d;
    }
    total
}

/// `||V - W H||_F` for a real or binary right factor.
///
/// Errors name the operand whose shape does not conform.
pub fn frobenius_residual<H: MatrixView>(v: &DenseMatrix, w: &DenseMatrix, h: &H) -> Result<f64> {
    let (n, m) = v.shape();
    if w.rows() != n {
        return Err(NbmfError::dim(format!(
            "W has {} rows but V has {n}",
            w.rows()
        )));
    }
    if h.rows() != w.cols() {
        return Err(NbmfError::dim(format!(
            "H has {} rows but W has {} columns",
            h.rows(),
            w.cols()
        )));
    }
    if h.cols() != m {
        return Err(NbmfError::dim(format!(
            "H has {} columns but V has {m}",
            h.cols()
        )));
    }
    let k = w.cols();
    let mut total = 0.0;
    let mut pred = vec![0.0; m];
    for r in 0..n {
        pred.iter_mut().for_each(|p| *p = 0.0);
        for j in 0..k {
            let wj = w.get(r, j);
            if wj == 0.0 {
                continue;
            }
            for (c, p) in pred.iter_mut().enumerate() {
                *p += wj * h.value(j, c);
            }
        }
        for (c, p) in pred.iter().enumerate() {
            let d = v.get(r, c) - p;
            total += d * d;
        }
    }
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    fn random_dense(rows: usize, cols: usize, rng: &mut SeedStream) -> DenseMatrix {
        let data = (0..rows * cols).map(|_| rng.next_f64()).collect();
        DenseMatrix::from_vec(rows, cols, data).unwrap()
    }

    fn random_binary(rows: usize, cols: usize, rng: &mut SeedStream) -> BinaryMatrix {
        let data = (0..rows * cols).map(|_| rng.coin() as u8).collect();
        BinaryMatrix::from_vec(rows, cols, data).unwrap()
    }

    #[test]
    fn identity_factorization_has_zero_residual() {
        let v = DenseMatrix::identity(2);
        let w = DenseMatrix::identity(2);
        let h = BinaryMatrix::identity(2);
        assert_eq!(frobenius_residual(&v, &w, &h).unwrap(), 0.0);
    }

    #[test]
    fn residual_equals_v_when_product_vanishes() {
        let v = DenseMatrix::from_rows(&[[1.0]]).unwrap();
        let w = DenseMatrix::from_rows(&[[0.0]]).unwrap();
        let h = BinaryMatrix::from_rows(&[[1u8]]).unwrap();
        assert_eq!(frobenius_residual(&v, &w, &h).unwrap(), 1.0);
    }

    #[test]
    fn residual_matches_naive_double_loop() {
        let mut rng = SeedStream::new(11);
        let v = random_dense(5, 4, &mut rng);
        let w = random_dense(5, 3, &mut rng);
        let h = random_binary(3, 4, &mut rng);
        // Independent oracle: explicit triple loop over every entry.
        let mut naive = 0.0;
        for i in 0..5 {
            for c in 0..4 {
                let mut p = 0.0;
                for j in 0..3 {
                    p += w.get(i, j) * if h.get(j, c) { 1.0 } else { 0.0 };
                }
                naive += (v.get(i, c) - p).powi(2);
            }
        }
        let got = frobenius_residual(&v, &w, &h).unwrap();
        assert!((got - naive.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn shape_errors_name_operand() {
        let v = DenseMatrix::zeros(3, 4);
        let w = DenseMatrix::zeros(2, 2);
        let h = BinaryMatrix::zeros(2, 4);
        let err = frobenius_residual(&v, &w, &h).unwrap_err().to_string();
        assert!(err.contains("W has 2 rows"), "{err}");
        let w = DenseMatrix::zeros(3, 2);
        let h = BinaryMatrix::zeros(3, 4);
        let err = frobenius_residual(&v, &w, &h).unwrap_err().to_string();
        assert!(err.contains("H has 3 rows"), "{err}");
        let h = BinaryMatrix::zeros(2, 5);
        let err = frobenius_residual(&v, &w, &h).unwrap_err().to_string();
        assert!(err.contains("H has 5 columns"), "{err}");
    }

    #[test]
    fn squared_residual_is_sum_of_column_residuals() {
        let mut rng = SeedStream::new(3);
        for _ in 0..20 {
            let (n, m, k) = (1 + rng.below(8), 1 + rng.below(8), 1 + rng.below(5));
            let v = random_dense(n, m, &mut rng);
            let w = random_dense(n, k, &mut rng);
            let h = random_binary(k, m, &mut rng);
            let total = frobenius_residual(&v, &w, &h).unwrap().powi(2);
            let by_col: f64 = (0..m)
                .map(|c| column_residual_sq(&w, &v.column(c), &h.column(c)))
                .sum();
            assert!((total - by_col).abs() <= 1e-9 * total.max(1.0));
        }
    }

    #[test]
    fn residual_invariant_under_shared_row_permutation() {
        let mut rng = SeedStream::new(5);
        let v = random_dense(6, 4, &mut rng);
        let w = random_dense(6, 3, &mut rng);
        let h = random_binary(3, 4, &mut rng);
        let perm = [4, 2, 0, 5, 1, 3];
        let vp = DenseMatrix::from_rows(&perm.iter().map(|&i| v.row(i).to_vec()).collect::<Vec<_>>())
            .unwrap();
        let wp = DenseMatrix::from_rows(&perm.iter().map(|&i| w.row(i).to_vec()).collect::<Vec<_>>())
            .unwrap();
        let a = frobenius_residual(&v, &w, &h).unwrap();
        let b = frobenius_residual(&vp, &wp, &h).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn binary_rejects_non_bits() {
        assert!(BinaryMatrix::from_vec(1, 2, vec![0, 2]).is_err());
    }

    #[test]
    fn validation_names_cell() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, -1.0]]).unwrap();
        let err = m.validate_nonnegative("V").unwrap_err().to_string();
        assert!(err.contains("row 1, column 1"), "{err}");
        let m = DenseMatrix::from_rows(&[[f64::NAN]]).unwrap();
        assert!(m.validate_nonnegative("V").is_err());
    }
}
