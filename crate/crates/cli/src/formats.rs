//! On-disk formats: PLFD1 depth rasters, whitespace-separated cloud/flow
//! text, ASCII PLY export and binary PGM/PPM images.

use crate::error::{CliError, Result};
use image::codecs::pnm::PnmDecoder;
use image::{ColorType, ImageDecoder};
use plflow_core::geometry::DepthMap;
use plflow_core::hdfilter::Raster;
use std::fmt::Write as _;
use std::io::Cursor;
use std::path::Path;

pub const DEPTH_MAGIC: &[u8] = b"PLFD1\n";

/// A depth raster exactly as stored: NaN marks an invalid pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthRaster {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl DepthRaster {
    pub fn to_depth_map(&self) -> Result<DepthMap> {
        let depth = self.data.iter().map(|&z| f64::from(z)).collect();
        Ok(DepthMap::new(self.width, self.height, depth)?)
    }

    /// Invalid pixels of `dm` are written as NaN.
    pub fn from_depth_map(dm: &DepthMap) -> Self {
        let data = dm
            .depth()
            .iter()
            .zip(dm.valid())
            .map(|(&z, &ok)| if ok { z as f32 } else { f32::NAN })
            .collect();
        Self {
            width: dm.width(),
            height: dm.height(),
            data,
        }
    }
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn decode_depth(bytes: &[u8]) -> std::result::Result<DepthRaster, String> {
    let rest = bytes.strip_prefix(DEPTH_MAGIC).ok_or("missing PLFD1 magic")?;
    let eol = rest.iter().position(|&b| b == b'\n').ok_or("unterminated size line")?;
    let header = std::str::from_utf8(&rest[..eol]).map_err(|_| "size line is not text")?;
    let mut fields = header.split(' ');
    let (width, height) = match (fields.next(), fields.next(), fields.next()) {
        (Some(w), Some(h), None) => (
            w.parse::<usize>().map_err(|_| format!("bad width {w:?}"))?,
            h.parse::<usize>().map_err(|_| format!("bad height {h:?}"))?,
        ),
        _ => return Err(format!("size line must be \"width height\", got {header:?}")),
    };
    let payload = &rest[eol + 1..];
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .ok_or("raster size overflows")?;
    if payload.len() != expected {
        return Err(format!(
            "{width}x{height} raster needs {expected} payload bytes, found {}",
            payload.len()
        ));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok(DepthRaster { width, height, data })
}

pub fn encode_depth(raster: &DepthRaster) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + 4 * raster.data.len());
    out.extend_from_slice(DEPTH_MAGIC);
    out.extend_from_slice(format!("{} {}\n", raster.width, raster.height).as_bytes());
    for z in &raster.data {
        out.extend_from_slice(&z.to_le_bytes());
    }
    out
}

pub fn read_depth(path: &Path) -> Result<DepthRaster> {
    decode_depth(&read_file(path)?).map_err(|m| CliError::format(path, m))
}

pub fn write_depth(path: &Path, raster: &DepthRaster) -> Result<()> {
    write_file(path, &encode_depth(raster))
}

/// Rows of a cloud file: 3 columns (points) or 6 (points with flow).
#[derive(Debug, Clone, PartialEq)]
pub struct CloudFile {
    pub columns: usize,
    pub rows: Vec<[f64; 6]>,
}

impl CloudFile {
    pub fn points(&self) -> Vec<[f64; 3]> {
        self.rows.iter().map(|r| [r[0], r[1], r[2]]).collect()
    }

    /// Flow columns; `None` for a 3-column file.
    pub fn flows(&self) -> Option<Vec<[f64; 3]>> {
        (self.columns == 6).then(|| self.rows.iter().map(|r| [r[3], r[4], r[5]]).collect())
    }

    pub fn from_points(points: &[[f64; 3]]) -> Self {
        Self {
            columns: 3,
            rows: points.iter().map(|p| [p[0], p[1], p[2], 0.0, 0.0, 0.0]).collect(),
        }
    }
}

pub fn parse_cloud(text: &str) -> std::result::Result<CloudFile, String> {
    let mut columns = 0;
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut row = [0.0; 6];
        let mut count = 0;
        for tok in line.split_whitespace() {
            if count == 6 {
                return Err(format!("line {}: more than 6 columns", lineno + 1));
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| format!("line {}: {tok:?} is not a number", lineno + 1))?;
            if !v.is_finite() {
                return Err(format!("line {}: non-finite value {tok:?}", lineno + 1));
            }
            row[count] = v;
            count += 1;
        }
        if count != 3 && count != 6 {
            return Err(format!("line {}: expected 3 or 6 columns, found {count}", lineno + 1));
        }
        if columns == 0 {
            columns = count;
        } else if count != columns {
            return Err(format!("line {}: expected {columns} columns, found {count}", lineno + 1));
        }
        rows.push(row);
    }
    Ok(CloudFile {
        columns: columns.max(3),
        rows,
    })
}

/// One record per line, values in shortest round-trip decimal form.
pub fn format_cloud(cloud: &CloudFile) -> String {
    let mut out = String::new();
    for row in &cloud.rows {
        let cols = &row[..cloud.columns];
        for (i, v) in cols.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read_cloud(path: &Path) -> Result<CloudFile> {
    let bytes = read_file(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|_| CliError::format(path, "not UTF-8 text"))?;
    parse_cloud(text).map_err(|m| CliError::format(path, m))
}

pub fn write_cloud(path: &Path, cloud: &CloudFile) -> Result<()> {
    write_file(path, format_cloud(cloud).as_bytes())
}

pub fn format_ply(points: &[[f64; 3]]) -> String {
    let mut out = format!(
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nend_header\n",
        points.len()
    );
    for p in points {
        writeln!(out, "{} {} {}", p[0], p[1], p[2]).unwrap();
    }
    out
}

/// 8-bit binary PGM or PPM as a raster with values in `[0, 255]`.
pub fn decode_image(bytes: &[u8]) -> std::result::Result<Raster, String> {
    let decoder = PnmDecoder::new(Cursor::new(bytes)).map_err(|e| e.to_string())?;
    let (width, height) = decoder.dimensions();
    let channels = match decoder.color_type() {
        ColorType::L8 => 1,
        ColorType::Rgb8 => 3,
        other => return Err(format!("unsupported pixel type {other:?}; expected 8-bit gray or RGB")),
    };
    let mut buf = vec![0u8; decoder.total_bytes() as usize];
    decoder.read_image(&mut buf).map_err(|e| e.to_string())?;
    let data = buf.iter().map(|&b| f64::from(b)).collect();
    Raster::new(width as usize, height as usize, channels, data).map_err(|e| e.to_string())
}

/// Values are rounded to the nearest integer and clamped to `[0, 255]`.
/// The header follows the netpbm convention `P5\nW H\n255\n`.
pub fn encode_image(raster: &Raster) -> Result<Vec<u8>> {
    let magic = match raster.channels {
        1 => "P5",
        3 => "P6",
        c => return Err(CliError::Param(format!("cannot encode {c}-channel image"))),
    };
    let mut out = format!("{magic}\n{} {}\n255\n", raster.width, raster.height).into_bytes();
    out.extend(raster.data.iter().map(|&v| v.round().clamp(0.0, 255.0) as u8));
    Ok(out)
}

pub fn read_image(path: &Path) -> Result<Raster> {
    decode_image(&read_file(path)?).map_err(|m| CliError::format(path, m))
}

pub fn write_image(path: &Path, raster: &Raster) -> Result<()> {
    write_file(path, &encode_image(raster)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_round_trip_is_bit_exact() {
        let raster = DepthRaster {
            width: 3,
            height: 2,
            data: vec![1.5, f32::NAN, 0.1, -0.0, f32::MAX, 7e-30],
        };
        let bytes = encode_depth(&raster);
        assert!(bytes.starts_with(b"PLFD1\n3 2\n"));
        let back = decode_depth(&bytes).unwrap();
        let bits = |r: &DepthRaster| r.data.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&raster));
        assert_eq!((back.width, back.height), (3, 2));
    }

    #[test]
    fn depth_header_must_match_payload() {
        let mut bytes = encode_depth(&DepthRaster {
            width: 2,
            height: 2,
            data: vec![1.0; 4],
        });
        bytes.pop();
        assert!(decode_depth(&bytes).unwrap_err().contains("payload"));
        assert!(decode_depth(b"PLFD2\n1 1\n\0\0\0\0").is_err());
        assert!(decode_depth(b"PLFD1\n1 x\n\0\0\0\0").is_err());
        assert!(decode_depth(b"PLFD1\n1 1 1\n\0\0\0\0").is_err());
    }

    #[test]
    fn cloud_parsing() {
        let c = parse_cloud("# header\n1 2 3\n\n 4 5 6 # trailing\n").unwrap();
        assert_eq!(c.columns, 3);
        assert_eq!(c.points(), vec![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        assert_eq!(c.flows(), None);

        let f = parse_cloud("0 0 1 0.5 0 0\n").unwrap();
        assert_eq!(f.flows(), Some(vec![[0.5, 0.0, 0.0]]));

        assert!(parse_cloud("1 2 3\n1 2 3 4 5 6\n").unwrap_err().contains("line 2"));
        assert!(parse_cloud("1 2\n").is_err());
        assert!(parse_cloud("1 2 nan\n").is_err());
        assert!(parse_cloud("1 2 inf\n").is_err());
        assert!(parse_cloud("1 2 3 4 5 6 7\n").is_err());
    }

    #[test]
    fn cloud_round_trip_is_bit_exact() {
        let pts = [[0.1, -2.5e-7, 1e300], [5.0, -0.0, 1.0 / 3.0]];
        let text = format_cloud(&CloudFile::from_points(&pts));
        assert!(text.starts_with("0.1 -0.00000025 1000"));
        let back = parse_cloud(&text).unwrap().points();
        for (a, b) in back.iter().zip(&pts) {
            for i in 0..3 {
                assert_eq!(a[i].to_bits(), b[i].to_bits());
            }
        }
        assert_eq!(format_cloud(&CloudFile::from_points(&[[0.0, 0.0, 5.0]])), "0 0 5\n");
    }

    #[test]
    fn image_round_trip_is_byte_exact() {
        let gray = Raster::new(3, 2, 1, vec![0.0, 1.0, 2.0, 128.0, 254.0, 255.0]).unwrap();
        let bytes = encode_image(&gray).unwrap();
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        let back = decode_image(&bytes).unwrap();
        assert_eq!(back, gray);
        assert_eq!(encode_image(&back).unwrap(), bytes);

        let rgb = Raster::new(1, 2, 3, vec![1.0, 2.0, 3.0, 250.0, 251.0, 252.0]).unwrap();
        let bytes = encode_image(&rgb).unwrap();
        assert!(bytes.starts_with(b"P6"));
        assert_eq!(decode_image(&bytes).unwrap(), rgb);
    }

    #[test]
    fn image_quantization() {
        let r = Raster::new(4, 1, 1, vec![-3.0, 0.49, 0.5, 300.0]).unwrap();
        let back = decode_image(&encode_image(&r).unwrap()).unwrap();
        assert_eq!(back.data, vec![0.0, 0.0, 1.0, 255.0]);
    }

    #[test]
    fn ply_header() {
        let ply = format_ply(&[[1.0, 2.0, 3.0]]);
        assert!(ply.starts_with("ply\nformat ascii 1.0\nelement vertex 1\n"));
        assert!(ply.ends_with("end_header\n1 2 3\n"));
    }
}
