//! Grayscale image file formats: binary PGM (P5) for 28×28 images and the
//! IDX container for digit datasets.

use crate::error::{Error, Result};
use crate::simulators::image::{IMAGE_DIM, IMAGE_SIDE};
use std::fs;
use std::io::Write as _;
use std::path::Path;

/// Write a 28×28 image with values in [0, 1] as 8-bit binary PGM.
pub fn write_pgm(path: &Path, pixels: &[f64]) -> Result<()> {
    if pixels.len() != IMAGE_DIM {
        return Err(Error::Schema(format!("PGM writer expects {IMAGE_DIM} pixels")));
    }
    let mut buf = Vec::with_capacity(IMAGE_DIM + 16);
    write!(buf, "P5\n{IMAGE_SIDE} {IMAGE_SIDE}\n255\n")?;
    for p in pixels {
        buf.push((p.clamp(0.0, 1.0) * 255.0).round() as u8);
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Read a binary PGM (P5) into [0, 1] pixel values. Accepts comment lines.
pub fn read_pgm(path: &Path) -> Result<Vec<f64>> {
    let raw = fs::read(path)?;
    let mut pos = 0usize;
    let mut tokens = Vec::new();
    while tokens.len() < 4 && pos < raw.len() {
        // skip whitespace and comments
        while pos < raw.len() && (raw[pos].is_ascii_whitespace()) {
            pos += 1;
        }
        if pos < raw.len() && raw[pos] == b'#' {
            while pos < raw.len() && raw[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < raw.len() && !raw[pos].is_ascii_whitespace() {
            pos += 1;
        }
        tokens.push(String::from_utf8_lossy(&raw[start..pos]).into_owned());
    }
    if tokens.len() < 4 || tokens[0] != "P5" {
        return Err(Error::Format("expected binary PGM (P5) header".into()));
    }
    let width: usize =
        tokens[1].parse().map_err(|_| Error::Format("bad PGM width".into()))?;
    let height: usize =
        tokens[2].parse().map_err(|_| Error::Format("bad PGM height".into()))?;
    let maxval: f64 =
        tokens[3].parse().map_err(|_| Error::Format("bad PGM maxval".into()))?;
    pos += 1; // single whitespace after maxval
    let need = width * height;
    if raw.len() < pos + need {
        return Err(Error::Format("PGM pixel payload truncated".into()));
    }
    Ok(raw[pos..pos + need].iter().map(|b| *b as f64 / maxval).collect())
}

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;

/// Read images from an IDX file (the standard digit-dataset container).
/// Returns row-major [0, 1] images.
pub fn read_idx_images(path: &Path) -> Result<Vec<Vec<f64>>> {
    let raw = fs::read(path)?;
    if raw.len() < 16 {
        return Err(Error::Format("IDX header truncated".into()));
    }
    let be = |o: usize| u32::from_be_bytes([raw[o], raw[o + 1], raw[o + 2], raw[o + 3]]);
    if be(0) != IDX_IMAGES_MAGIC {
        return Err(Error::Format(format!("bad IDX magic 0x{:08x}", be(0))));
    }
    let count = be(4) as usize;
    let rows = be(8) as usize;
    let cols = be(12) as usize;
    let per = rows * cols;
    if raw.len() < 16 + count * per {
        return Err(Error::Format("IDX pixel payload truncated".into()));
    }
    Ok((0..count)
        .map(|i| {
            raw[16 + i * per..16 + (i + 1) * per]
                .iter()
                .map(|b| *b as f64 / 255.0)
                .collect()
        })
        .collect())
}

/// Write images to an IDX file (inverse of [`read_idx_images`]).
pub fn write_idx_images(path: &Path, images: &[Vec<f64>], rows: usize, cols: usize) -> Result<()> {
    let mut buf = Vec::with_capacity(16 + images.len() * rows * cols);
    buf.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    buf.extend_from_slice(&(images.len() as u32).to_be_bytes());
    buf.extend_from_slice(&(rows as u32).to_be_bytes());
    buf.extend_from_slice(&(cols as u32).to_be_bytes());
    for img in images {
        if img.len() != rows * cols {
            return Err(Error::Schema("image size does not match IDX dimensions".into()));
        }
        for p in img {
            buf.push((p.clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    fs::write(path, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulators::image::builtin_digit;

    #[test]
    fn pgm_roundtrip_preserves_quantized_pixels() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("digit.pgm");
        let img = builtin_digit();
        write_pgm(&path, &img).unwrap();
        let back = read_pgm(&path).unwrap();
        assert_eq!(back.len(), IMAGE_DIM);
        for (a, b) in img.iter().zip(&back) {
            assert!((a - b).abs() <= 0.5 / 255.0 + 1e-9);
        }
    }

    #[test]
    fn idx_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("digits.idx");
        let imgs = vec![builtin_digit(), vec![0.5; IMAGE_DIM]];
        write_idx_images(&path, &imgs, IMAGE_SIDE, IMAGE_SIDE).unwrap();
        let back = read_idx_images(&path).unwrap();
        assert_eq!(back.len(), 2);
        for (img, rec) in imgs.iter().zip(&back) {
            for (a, b) in img.iter().zip(rec) {
                assert!((a - b).abs() <= 0.5 / 255.0 + 1e-9);
            }
        }
    }

    #[test]
    fn pgm_reader_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.pgm");
        std::fs::write(&path, b"P2\n2 2\n255\n0 0 0 0\n").unwrap();
        assert!(read_pgm(&path).is_err());
    }
}
