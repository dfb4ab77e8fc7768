//! IDX (MNIST-family) file I/O. Big-endian, magic 0x00000803 for images
//! and 0x00000801 for labels.

use std::fs;
use std::path::Path;

use crate::error::{InvMlError, Result};
use crate::matrix::Matrix;

use super::Dataset;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Clone, Copy, Debug, Default)]
pub struct IdxOptions {
    /// When set, bilinearly resamples each image to `side x side`
    /// (e.g. 16 for the 256-dimensional variants).
    pub downsample_to: Option<usize>,
}

fn read_u32_be(buf: &[u8], off: usize) -> Result<u32> {
    if off + 4 > buf.len() {
        return Err(InvMlError::TruncatedFile { expected: off + 4, got: buf.len() });
    }
    Ok(u32::from_be_bytes([buf[off], buf[off + 1], buf[off + 2], buf[off + 3]]))
}

/// Loads an IDX image file plus an optional IDX label file. Pixels are
/// scaled to `[0, 1]`.
pub fn load_idx(
    images_path: &Path,
    labels_path: Option<&Path>,
    options: IdxOptions,
) -> Result<Dataset> {
    let buf = fs::read(images_path)?;
    let magic = read_u32_be(&buf, 0)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(InvMlError::BadMagic { got: magic, expected: IDX_IMAGES_MAGIC });
    }
    let count = read_u32_be(&buf, 4)? as usize;
    let height = read_u32_be(&buf, 8)? as usize;
    let width = read_u32_be(&buf, 12)? as usize;
    let payload = &buf[16..];
    let expected = count * height * width;
    if payload.len() < expected {
        return Err(InvMlError::TruncatedFile { expected, got: payload.len() });
    }

    let (out_h, out_w) = match options.downsample_to {
        Some(side) => (side, side),
        None => (height, width),
    };
    let mut x = Matrix::zeros(count, out_h * out_w);
    for i in 0..count {
        let img = &payload[i * height * width..(i + 1) * height * width];
        let row = x.row_mut(i);
        if (out_h, out_w) == (height, width) {
            for (dst, &px) in row.iter_mut().zip(img) {
                *dst = px as f64 / 255.0;
            }
        } else {
            bilinear_resample(img, height, width, row, out_h, out_w);
        }
    }

    let labels = match labels_path {
        Some(path) => {
            let lbuf = fs::read(path)?;
            let lmagic = read_u32_be(&lbuf, 0)?;
            if lmagic != IDX_LABELS_MAGIC {
                return Err(InvMlError::BadMagic { got: lmagic, expected: IDX_LABELS_MAGIC });
            }
            let lcount = read_u32_be(&lbuf, 4)? as usize;
            if lcount != count {
                return Err(InvMlError::CountMismatch { images: count, labels: lcount });
            }
            let payload = &lbuf[8..];
            if payload.len() < lcount {
                return Err(InvMlError::TruncatedFile { expected: lcount, got: payload.len() });
            }
            Some(payload[..lcount].iter().map(|&b| b as usize).collect())
        }
        None => None,
    };

    let stem = images_path.file_stem().and_then(|s| s.to_str()).unwrap_or("idx");
    Dataset::new(x, labels, stem)
}

fn bilinear_resample(src: &[u8], h: usize, w: usize, dst: &mut [f64], oh: usize, ow: usize) {
    for r in 0..oh {
        for c in 0..ow {
            // Map target pixel centers back into the source grid.
            let fy = (r as f64 + 0.5) * h as f64 / oh as f64 - 0.5;
            let fx = (c as f64 + 0.5) * w as f64 / ow as f64 - 0.5;
            let y0 = fy.floor().max(0.0) as usize;
            let x0 = fx.floor().max(0.0) as usize;
            let y1 = (y0 + 1).min(h - 1);
            let x1 = (x0 + 1).min(w - 1);
            let dy = (fy - y0 as f64).clamp(0.0, 1.0);
            let dx = (fx - x0 as f64).clamp(0.0, 1.0);
            let p = |yy: usize, xx: usize| src[yy * w + xx] as f64 / 255.0;
            dst[r * ow + c] = p(y0, x0) * (1.0 - dy) * (1.0 - dx)
                + p(y0, x1) * (1.0 - dy) * dx
                + p(y1, x0) * dy * (1.0 - dx)
                + p(y1, x1) * dy * dx;
        }
    }
}

/// Writes an IDX image/label pair; used by tests and for exporting
/// synthetic image data.
pub fn write_idx(
    images_path: &Path,
    labels_path: Option<&Path>,
    pixels: &Matrix,
    side: (usize, usize),
    labels: Option<&[usize]>,
) -> Result<()> {
    let (h, w) = side;
    if h * w != pixels.cols() {
        return Err(InvMlError::DimMismatch(format!(
            "{}x{} image does not match {} columns",
            h,
            w,
            pixels.cols()
        )));
    }
    let mut buf = Vec::with_capacity(16 + pixels.rows() * h * w);
    buf.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    buf.extend_from_slice(&(pixels.rows() as u32).to_be_bytes());
    buf.extend_from_slice(&(h as u32).to_be_bytes());
    buf.extend_from_slice(&(w as u32).to_be_bytes());
    for i in 0..pixels.rows() {
        for &v in pixels.row(i) {
            buf.push((v.clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    fs::write(images_path, buf)?;

    if let (Some(path), Some(labels)) = (labels_path, labels) {
        let mut buf = Vec::with_capacity(8 + labels.len());
        buf.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
        buf.extend_from_slice(&(labels.len() as u32).to_be_bytes());
        buf.extend(labels.iter().map(|&l| l as u8));
        fs::write(path, buf)?;
    }
    Ok(())
}
