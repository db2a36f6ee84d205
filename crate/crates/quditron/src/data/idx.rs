//! IDX image/label file parsing and writing, with transparent gzip.
//!
//! Layout: 4-byte big-endian magic (0x00000803 for u8 image tensors,
//! 0x00000801 for u8 label vectors), one big-endian u32 per dimension,
//! then the payload of unsigned bytes, whose length must equal the
//! dimension product exactly.

use crate::error::{Error, Result};
use flate2::read::GzDecoder;
use std::io::Read;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// Inflates gzip streams (sniffed by the 0x1f8b magic); passes other
/// bytes through untouched.
pub fn decompress_if_gzip(bytes: &[u8]) -> Result<Vec<u8>> {
    if bytes.len() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b {
        let mut out = Vec::new();
        GzDecoder::new(bytes).read_to_end(&mut out)?;
        Ok(out)
    } else {
        Ok(bytes.to_vec())
    }
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(Error::TruncatedPayload {
            expected: end,
            got: bytes.len(),
        });
    }
    Ok(u32::from_be_bytes([
        bytes[offset],
        bytes[offset + 1],
        bytes[offset + 2],
        bytes[offset + 3],
    ]))
}

/// Parses an IDX image tensor into (count, rows, cols, pixels).
pub fn parse_idx_images(raw: &[u8]) -> Result<(usize, usize, usize, Vec<u8>)> {
    let bytes = decompress_if_gzip(raw)?;
    let magic = read_u32(&bytes, 0)?;
    if magic != IMAGES_MAGIC {
        return Err(Error::BadMagic { got: magic });
    }
    let n = read_u32(&bytes, 4)? as usize;
    let rows = read_u32(&bytes, 8)? as usize;
    let cols = read_u32(&bytes, 12)? as usize;
    let total = n
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or(Error::DimensionOverflow)?;
    let payload = &bytes[16..];
    if payload.len() != total {
        return Err(Error::TruncatedPayload {
            expected: total,
            got: payload.len(),
        });
    }
    Ok((n, rows, cols, payload.to_vec()))
}

/// Parses an IDX label vector.
pub fn parse_idx_labels(raw: &[u8]) -> Result<Vec<u8>> {
    let bytes = decompress_if_gzip(raw)?;
    let magic = read_u32(&bytes, 0)?;
    if magic != LABELS_MAGIC {
        return Err(Error::BadMagic { got: magic });
    }
    let n = read_u32(&bytes, 4)? as usize;
    let payload = &bytes[8..];
    if payload.len() != n {
        return Err(Error::TruncatedPayload {
            expected: n,
            got: payload.len(),
        });
    }
    Ok(payload.to_vec())
}

pub fn write_idx_images(n: usize, rows: usize, cols: usize, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), n * rows * cols);
    let mut out = Vec::with_capacity(16 + pixels.len());
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&(n as u32).to_be_bytes());
    out.extend_from_slice(&(rows as u32).to_be_bytes());
    out.extend_from_slice(&(cols as u32).to_be_bytes());
    out.extend_from_slice(pixels);
    out
}

pub fn write_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}
