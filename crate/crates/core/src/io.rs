//! File formats: PGM (P2/P5, 8 or 16 bit), 8/16-bit grayscale PNG,
//! ground-truth JSON and plain CSV tables.
//!
//! Integer levels are converted to `f64` exactly; 16-bit data is never
//! rescaled.

use std::fmt::Write as _;
use std::fs;
use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::region::GroundTruth;

/// On-disk raster encodings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFormat {
    /// ASCII PGM.
    PgmP2,
    /// Binary PGM.
    PgmP5,
    /// Grayscale PNG.
    Png,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    fn max_level(self) -> f64 {
        match self {
            BitDepth::Eight => 255.0,
            BitDepth::Sixteen => 65535.0,
        }
    }
}

const PNG_SIGNATURE: &[u8] = &[0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

/// Sniffs the format from the leading bytes.
pub fn detect_format(bytes: &[u8]) -> Option<ImageFormat> {
    if bytes.starts_with(PNG_SIGNATURE) {
        Some(ImageFormat::Png)
    } else if bytes.starts_with(b"P2") {
        Some(ImageFormat::PgmP2)
    } else if bytes.starts_with(b"P5") {
        Some(ImageFormat::PgmP5)
    } else {
        None
    }
}

/// Loads a grayscale image, detecting the format from its content.
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let format = detect_format(&bytes)
        .ok_or_else(|| Error::UnsupportedFormat(format!("{}: unknown magic", path.display())))?;
    decode_gray(&bytes, format, path)
}

/// Loads a grayscale image that must be in `format`.
pub fn load_gray_as(path: impl AsRef<Path>, format: ImageFormat) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_gray(&bytes, format, path)
}

/// Decodes an in-memory buffer; `origin` is only used in error messages.
pub fn decode_gray(bytes: &[u8], format: ImageFormat, origin: &Path) -> Result<GrayImage> {
    match format {
        ImageFormat::PgmP2 | ImageFormat::PgmP5 => decode_pgm(bytes, format, origin),
        ImageFormat::Png => decode_png(bytes, origin),
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            if c == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }
}

fn decode_pgm(bytes: &[u8], format: ImageFormat, origin: &Path) -> Result<GrayImage> {
    let malformed = |reason: &str| Error::MalformedHeader {
        path: origin.to_path_buf(),
        reason: reason.to_string(),
    };
    let mut cur = HeaderCursor { bytes, pos: 0 };
    let magic = cur.token().ok_or_else(|| malformed("missing magic"))?;
    let expected = if format == ImageFormat::PgmP2 { b"P2" } else { b"P5" };
    if magic != expected {
        return Err(malformed("unexpected magic number"));
    }
    let mut header_number = |name: &str| -> Result<u64> {
        let tok = cur
            .token()
            .ok_or_else(|| malformed(&format!("missing {name}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| malformed(&format!("invalid {name}")))
    };
    let width = header_number("width")? as usize;
    let height = header_number("height")? as usize;
    let maxval = header_number("maxval")?;
    if width == 0 || height == 0 {
        return Err(malformed("zero dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::UnsupportedBitDepth {
            path: origin.to_path_buf(),
            depth: format!("maxval {maxval}"),
        });
    }
    let count = width * height;
    let truncated = |found: usize| Error::TruncatedPayload {
        path: origin.to_path_buf(),
        expected: count,
        found,
    };

    let mut samples = Vec::with_capacity(count);
    match format {
        ImageFormat::PgmP2 => {
            while samples.len() < count {
                let Some(tok) = cur.token() else {
                    return Err(truncated(samples.len()));
                };
                let v = std::str::from_utf8(tok)
                    .ok()
                    .and_then(|s| s.parse::<u64>().ok())
                    .ok_or_else(|| malformed("non-numeric sample"))?;
                if v > maxval {
                    return Err(malformed("sample exceeds maxval"));
                }
                samples.push(v as f64);
            }
        }
        _ => {
            // Exactly one whitespace byte separates maxval from the raster.
            let start = cur.pos + 1;
            let bytes_per = if maxval < 256 { 1 } else { 2 };
            let payload = bytes.get(start..).unwrap_or(&[]);
            if payload.len() < count * bytes_per {
                return Err(truncated(payload.len() / bytes_per));
            }
            for i in 0..count {
                let v = if bytes_per == 1 {
                    payload[i] as u64
                } else {
                    u16::from_be_bytes([payload[2 * i], payload[2 * i + 1]]) as u64
                };
                if v > maxval {
                    return Err(malformed("sample exceeds maxval"));
                }
                samples.push(v as f64);
            }
        }
    }
    GrayImage::new(width, height, samples)
}

fn decode_png(bytes: &[u8], origin: &Path) -> Result<GrayImage> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::Png(format!("{}: {e}", origin.display())))?;
    let info = reader.info();
    let (width, height) = (info.width as usize, info.height as usize);
    let (color, depth) = (info.color_type, info.bit_depth);
    if color != png::ColorType::Grayscale {
        return Err(Error::UnsupportedFormat(format!(
            "{}: PNG color type {color:?} is not grayscale",
            origin.display()
        )));
    }
    let bytes_per = match depth {
        png::BitDepth::Eight => 1,
        png::BitDepth::Sixteen => 2,
        other => {
            return Err(Error::UnsupportedBitDepth {
                path: origin.to_path_buf(),
                depth: format!("{other:?}"),
            })
        }
    };
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Png("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(|e| match e {
        png::DecodingError::IoError(io) if io.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::TruncatedPayload {
                path: origin.to_path_buf(),
                expected: width * height,
                found: 0,
            }
        }
        other => Error::Png(format!("{}: {other}", origin.display())),
    })?;
    let stride = frame.line_size;
    let mut samples = Vec::with_capacity(width * height);
    for y in 0..height {
        let line = &buf[y * stride..y * stride + width * bytes_per];
        if bytes_per == 1 {
            samples.extend(line.iter().map(|&b| b as f64));
        } else {
            samples.extend(
                line.chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64),
            );
        }
    }
    GrayImage::new(width, height, samples)
}

fn integer_levels(img: &GrayImage, depth: BitDepth) -> Result<Vec<u16>> {
    let max = depth.max_level();
    img.samples()
        .iter()
        .map(|&v| {
            if v.fract() == 0.0 && (0.0..=max).contains(&v) {
                Ok(v as u16)
            } else {
                Err(Error::param(format!(
                    "sample {v} is not an integer level in [0, {max}]"
                )))
            }
        })
        .collect()
}

/// Encodes an image whose samples are integer levels for `depth`.
pub fn encode_gray(img: &GrayImage, format: ImageFormat, depth: BitDepth) -> Result<Vec<u8>> {
    let levels = integer_levels(img, depth)?;
    let (w, h) = img.dims();
    let maxval = depth.max_level() as u32;
    match format {
        ImageFormat::PgmP2 => {
            let mut out = format!("P2\n{w} {h}\n{maxval}\n");
            for row in levels.chunks(w) {
                let line: Vec<String> = row.iter().map(u16::to_string).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            Ok(out.into_bytes())
        }
        ImageFormat::PgmP5 => {
            let mut out = format!("P5\n{w} {h}\n{maxval}\n").into_bytes();
            for v in levels {
                match depth {
                    BitDepth::Eight => out.push(v as u8),
                    BitDepth::Sixteen => out.extend_from_slice(&v.to_be_bytes()),
                }
            }
            Ok(out)
        }
        ImageFormat::Png => {
            let mut out = Vec::new();
            {
                let mut enc = png::Encoder::new(&mut out, w as u32, h as u32);
                enc.set_color(png::ColorType::Grayscale);
                let data: Vec<u8> = match depth {
                    BitDepth::Eight => {
                        enc.set_depth(png::BitDepth::Eight);
                        levels.iter().map(|&v| v as u8).collect()
                    }
                    BitDepth::Sixteen => {
                        enc.set_depth(png::BitDepth::Sixteen);
                        levels.iter().flat_map(|v| v.to_be_bytes()).collect()
                    }
                };
                let mut writer = enc.write_header().map_err(|e| Error::Png(e.to_string()))?;
                writer
                    .write_image_data(&data)
                    .map_err(|e| Error::Png(e.to_string()))?;
            }
            Ok(out)
        }
    }
}

pub fn save_gray(
    path: impl AsRef<Path>,
    img: &GrayImage,
    format: ImageFormat,
    depth: BitDepth,
) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_gray(img, format, depth)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Affine map that sends a real-valued map onto the full 16-bit range.
/// `level = round((value - offset) * scale)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LevelScaling {
    pub offset: f64,
    pub scale: f64,
    pub min: f64,
    pub max: f64,
}

impl LevelScaling {
    pub fn fit(img: &GrayImage) -> Self {
        let (min, max) = (img.min(), img.max());
        let scale = if max > min { 65535.0 / (max - min) } else { 0.0 };
        Self {
            offset: min,
            scale,
            min,
            max,
        }
    }

    pub fn quantize(&self, img: &GrayImage) -> GrayImage {
        img.map(|v| ((v - self.offset) * self.scale).round().clamp(0.0, 65535.0))
    }

    pub fn restore(&self, levels: &GrayImage) -> GrayImage {
        if self.scale == 0.0 {
            return levels.map(|_| self.offset);
        }
        levels.map(|l| l / self.scale + self.offset)
    }
}

/// Shortest-exact float formatting with at least nine significant digits.
pub fn fmt_float(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v.is_nan() {
        return "nan".into();
    }
    format!("{v:.16e}")
}

/// Writes a raster as CSV: one line per row, comma separated.
pub fn grid_to_csv(img: &GrayImage) -> String {
    let mut out = String::new();
    for y in 0..img.height() {
        let line: Vec<String> = img.row(y).iter().map(|&v| fmt_float(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn grid_from_csv(text: &str) -> Result<GrayImage> {
    let mut width = None;
    let mut samples = Vec::new();
    let mut height = 0;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Csv(format!("line {}: {e}", lineno + 1)))?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Csv(format!(
                    "line {}: expected {w} columns, found {}",
                    lineno + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        samples.extend(row);
        height += 1;
    }
    GrayImage::new(width.unwrap_or(0), height, samples)
}

/// Two-column curve CSV with the given header, e.g. `k,pfa` or `pfa,pd`.
pub fn curve_to_csv(header: [&str; 2], rows: &[(f64, f64)]) -> String {
    let mut out = format!("{},{}\n", header[0], header[1]);
    for &(a, b) in rows {
        let _ = writeln!(out, "{},{}", fmt_float(a), fmt_float(b));
    }
    out
}

pub fn curve_from_csv(text: &str) -> Result<([String; 2], Vec<(f64, f64)>)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Csv("empty file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() != 2 {
        return Err(Error::Csv(format!("expected 2 header columns, got {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split(',').map(|t| t.trim().parse::<f64>());
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(a)), Some(Ok(b)), None) => rows.push((a, b)),
            _ => return Err(Error::Csv(format!("line {}: malformed row", i + 2))),
        }
    }
    Ok(([cols[0].to_string(), cols[1].to_string()], rows))
}

pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    GroundTruth::from_json(&text)
}

pub fn save_ground_truth(path: impl AsRef<Path>, gt: &GroundTruth) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, gt.to_json()? + "\n").map_err(|e| Error::io(path, e))
}
