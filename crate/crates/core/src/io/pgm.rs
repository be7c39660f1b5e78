//! Netpbm graymaps: plain (`P2`) and raw (`P5`), 8- or 16-bit samples.

use std::fs;
use std::path::Path;

use crate::error::{NbmfError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgmFormat {
    /// `P2`: decimal samples.
    Plain,
    /// `P5`: binary samples, big-endian when `maxval > 255`.
    Raw,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Row-major samples, each `≤ maxval`.
    pub pixels: Vec<u16>,
}

impl PgmImage {
    pub fn new(width: usize, height: usize, maxval: u16, pixels: Vec<u16>) -> Result<Self> {
        if maxval == 0 {
            return Err(NbmfError::Validation("PGM maxval must be at least 1".into()));
        }
        if pixels.len() != width * height {
            return Err(NbmfError::dim(format!(
                "{} samples for a {width}x{height} image",
                pixels.len()
            )));
        }
        if let Some(p) = pixels.iter().find(|&&p| p > maxval) {
            return Err(NbmfError::Validation(format!("sample {p} exceeds maxval {maxval}")));
        }
        Ok(PgmImage { width, height, maxval, pixels })
    }

    /// 8-bit image from intensities in `[0, 1]` (values outside are clamped).
    pub fn from_unit(width: usize, height: usize, values: &[f64]) -> Result<Self> {
        let pixels = values.iter().map(|&x| unit_to_byte(x) as u16).collect();
        PgmImage::new(width, height, 255, pixels)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.pixels[y * self.width + x]
    }

    /// Samples divided by `maxval`.
    pub fn intensities(&self) -> Vec<f64> {
        let scale = self.maxval as f64;
        self.pixels.iter().map(|&p| p as f64 / scale).collect()
    }

    pub fn encode(&self, format: PgmFormat) -> Vec<u8> {
        let magic = match format {
            PgmFormat::Plain => "P2",
            PgmFormat::Raw => "P5",
        };
        let mut out = format!("{magic}\n{} {}\n{}\n", self.width, self.height, self.maxval).into_bytes();
        match format {
            PgmFormat::Raw => {
                for &p in &self.pixels {
                    if self.maxval > 255 {
                        out.extend_from_slice(&p.to_be_bytes());
                    } else {
                        out.push(p as u8);
                    }
                }
            }
            PgmFormat::Plain => {
                // Plain PGM lines stay within 70 characters.
                let mut line_len = 0;
                for &p in &self.pixels {
                    let s = p.to_string();
                    if line_len > 0 && line_len + 1 + s.len() > 70 {
                        out.push(b'\n');
                        line_len = 0;
                    } else if line_len > 0 {
                        out.push(b' ');
                        line_len += 1;
                    }
                    out.extend_from_slice(s.as_bytes());
                    line_len += s.len();
                }
                out.push(b'\n');
            }
        }
        out
    }

    pub fn decode(bytes: &[u8], origin: &Path) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0, origin };
        let magic = cur.token()?;
        let format = match magic.as_str() {
            "P2" => PgmFormat::Plain,
            "P5" => PgmFormat::Raw,
            other => return Err(cur.error(format!("unsupported magic `{other}` (expected P2 or P5)"))),
        };
        let width = cur.number("width")?;
        let height = cur.number("height")?;
        let maxval = cur.number("maxval")?;
        if maxval == 0 || maxval > 65535 {
            return Err(cur.error(format!("maxval {maxval} outside 1..=65535")));
        }
        let maxval = maxval as u16;
        let count = width * height;
        let mut pixels = Vec::with_capacity(count);
        match format {
            PgmFormat::Raw => {
                if !cur.bytes.get(cur.pos).is_some_and(|b| b.is_ascii_whitespace()) {
                    return Err(cur.error("missing whitespace after maxval"));
                }
                cur.pos += 1;
                let wide = maxval > 255;
                let need = count * if wide { 2 } else { 1 };
                let raster = cur
                    .bytes
                    .get(cur.pos..cur.pos + need)
                    .ok_or_else(|| cur.error(format!("raster truncated: need {need} bytes")))?;
                if wide {
                    pixels.extend(raster.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])));
                } else {
                    pixels.extend(raster.iter().map(|&b| b as u16));
                }
            }
            PgmFormat::Plain => {
                for _ in 0..count {
                    let v = cur.number("sample")?;
                    if v > maxval as usize {
                        return Err(cur.error(format!("sample {v} exceeds maxval {maxval}")));
                    }
                    pixels.push(v as u16);
                }
            }
        }
        if let Some(p) = pixels.iter().find(|&&p| p > maxval) {
            return Err(cur.error(format!("sample {p} exceeds maxval {maxval}")));
        }
        Ok(PgmImage { width, height, maxval, pixels })
    }
}

pub(crate) fn unit_to_byte(x: f64) -> u8 {
    let x = if x.is_nan() { 0.0 } else { x.clamp(0.0, 1.0) };
    (x * 255.0).round() as u8
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    origin: &'a Path,
}

impl Cursor<'_> {
    fn line(&self) -> u64 {
        1 + self.bytes[..self.pos.min(self.bytes.len())].iter().filter(|&&b| b == b'\n').count() as u64
    }

    fn error(&self, message: impl Into<String>) -> NbmfError {
        NbmfError::Parse {
            path: self.origin.to_path_buf(),
            line: self.line(),
            message: message.into(),
        }
    }

    fn token(&mut self) -> Result<String> {
        loop {
            match self.bytes.get(self.pos) {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'#') => {
                    while self.bytes.get(self.pos).is_some_and(|&b| b != b'\n') {
                        self.pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(self.error("unexpected end of file")),
            }
        }
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|&b| !b.is_ascii_whitespace() && b != b'#')
        {
            self.pos += 1;
        }
        Ok(String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned())
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| self.error(format!("{what}: `{tok}` is not a nonnegative integer")))
    }
}

pub fn read_pgm(path: &Path) -> Result<PgmImage> {
    let bytes = fs::read(path).map_err(|e| NbmfError::io(path, e))?;
    PgmImage::decode(&bytes, path)
}

pub fn write_pgm(path: &Path, image: &PgmImage, format: PgmFormat) -> Result<()> {
    fs::write(path, image.encode(format)).map_err(|e| NbmfError::io(path, e))
}
