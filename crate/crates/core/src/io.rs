//! Point-cloud files and the grayscale gasket raster.
//!
//! CSV carries one `a,b` pair per line with 17 significant digits, after
//! `#` comment lines. The binary layout is
//!
//! ```text
//! "RGPTS001" | u32 LE provenance length | provenance JSON | u64 LE count | count × (f64 LE a, f64 LE b)
//! ```

use serde_json::Value;
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"RGPTS001";

#[derive(Debug, Error)]
pub enum PointFileError {
    #[error("line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error("not a point file (bad magic)")]
    BadMagic,
    #[error("truncated point file")]
    Truncated,
    #[error("bad provenance block: {0}")]
    Provenance(#[from] serde_json::Error),
}

pub fn points_to_csv(points: &[[f64; 2]], comments: &[String]) -> String {
    let mut out = String::with_capacity(points.len() * 48 + 64);
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    out.push_str("a,b\n");
    for p in points {
        out.push_str(&format!("{:.16e},{:.16e}\n", p[0], p[1]));
    }
    out
}

pub fn points_from_csv(text: &str) -> Result<Vec<[f64; 2]>, PointFileError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == "a,b" {
            continue;
        }
        let bad = |msg: &str| PointFileError::Csv { line: i + 1, msg: msg.to_string() };
        let (a, b) = line.split_once(',').ok_or_else(|| bad("expected a,b"))?;
        let a: f64 = a.trim().parse().map_err(|_| bad("bad number"))?;
        let b: f64 = b.trim().parse().map_err(|_| bad("bad number"))?;
        out.push([a, b]);
    }
    Ok(out)
}

pub fn points_to_binary(points: &[[f64; 2]], provenance: &Value) -> Vec<u8> {
    let prov = provenance.to_string().into_bytes();
    let mut out = Vec::with_capacity(8 + 4 + prov.len() + 8 + 16 * points.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(prov.len() as u32).to_le_bytes());
    out.extend_from_slice(&prov);
    out.extend_from_slice(&(points.len() as u64).to_le_bytes());
    for p in points {
        out.extend_from_slice(&p[0].to_le_bytes());
        out.extend_from_slice(&p[1].to_le_bytes());
    }
    out
}

pub fn points_from_binary(bytes: &[u8]) -> Result<(Vec<[f64; 2]>, Value), PointFileError> {
    fn take<'a>(bytes: &'a [u8], at: &mut usize, n: usize) -> Result<&'a [u8], PointFileError> {
        let s = bytes.get(*at..*at + n).ok_or(PointFileError::Truncated)?;
        *at += n;
        Ok(s)
    }
    let mut at = 0;
    if take(bytes, &mut at, 8)? != MAGIC {
        return Err(PointFileError::BadMagic);
    }
    let plen = u32::from_le_bytes(take(bytes, &mut at, 4)?.try_into().unwrap()) as usize;
    let prov: Value = serde_json::from_slice(take(bytes, &mut at, plen)?)?;
    let count = u64::from_le_bytes(take(bytes, &mut at, 8)?.try_into().unwrap()) as usize;
    if bytes.len() - at != count.checked_mul(16).ok_or(PointFileError::Truncated)? {
        return Err(PointFileError::Truncated);
    }
    let f = |s: &[u8]| f64::from_le_bytes(s.try_into().unwrap());
    let points = bytes[at..].chunks_exact(16).map(|c| [f(&c[..8]), f(&c[8..])]).collect();
    Ok((points, prov))
}

/// Density raster of barycentric points: vertex 1 bottom left, vertex 2
/// bottom right, vertex 3 on top. Row-major, top row first.
#[derive(Clone, Debug, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub counts: Vec<u64>,
}

const MARGIN: f64 = 2.0;
const TRI_HEIGHT: f64 = 0.866_025_403_784_438_6;

impl Raster {
    pub fn new(width: usize, height: usize) -> Self {
        Raster { width, height, counts: vec![0; width * height] }
    }

    fn scale(&self) -> f64 {
        ((self.width as f64 - 2.0 * MARGIN) / 1.0).min((self.height as f64 - 2.0 * MARGIN) / TRI_HEIGHT)
    }

    /// Pixel `(column, row)` of a barycentric point.
    pub fn pixel(&self, x: [f64; 3]) -> (usize, usize) {
        let s = self.scale();
        let px = x[1] + 0.5 * x[2];
        let py = TRI_HEIGHT * x[2];
        let col = (MARGIN + px * s).floor().clamp(0.0, self.width as f64 - 1.0) as usize;
        let row = (self.height as f64 - 1.0 - (MARGIN + py * s).floor()).clamp(0.0, self.height as f64 - 1.0) as usize;
        (col, row)
    }

    /// Barycentric point at the centre of a pixel; coordinates may be
    /// negative outside the triangle.
    pub fn unpixel(&self, col: usize, row: usize) -> [f64; 3] {
        let s = self.scale();
        let px = (col as f64 + 0.5 - MARGIN) / s;
        let py = (self.height as f64 - 1.0 - row as f64 + 0.5 - MARGIN) / s;
        let x2 = py / TRI_HEIGHT;
        let x1 = px - 0.5 * x2;
        [1.0 - x1 - x2, x1, x2]
    }

    pub fn add(&mut self, x: [f64; 3]) {
        let (c, r) = self.pixel(x);
        self.counts[r * self.width + c] += 1;
    }

    pub fn lit(&self) -> usize {
        self.counts.iter().filter(|&&n| n > 0).count()
    }

    /// Gray levels, `255 · ln(1+n) / ln(1+max)`.
    pub fn gray(&self) -> Vec<u8> {
        let max = self.counts.iter().copied().max().unwrap_or(0);
        if max == 0 {
            return vec![0; self.counts.len()];
        }
        let top = (1.0 + max as f64).ln();
        self.counts
            .iter()
            .map(|&n| if n == 0 { 0 } else { (255.0 * (1.0 + n as f64).ln() / top).round().max(1.0) as u8 })
            .collect()
    }

    pub fn to_pgm(&self, comment: &str) -> Vec<u8> {
        let mut out = String::from("P5\n");
        for line in comment.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&format!("{} {}\n255\n", self.width, self.height));
        let mut bytes = out.into_bytes();
        bytes.extend(self.gray());
        bytes
    }
}

pub fn render(points: &[[f64; 3]], width: usize, height: usize) -> Raster {
    let mut r = Raster::new(width, height);
    for &p in points {
        r.add(p);
    }
    r
}
