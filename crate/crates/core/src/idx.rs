//! MNIST-style IDX ubyte files.
//!
//! Layout: a big-endian magic (`0x00000803` for images, `0x00000801` for
//! labels), one big-endian `u32` per dimension, then unsigned bytes.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

/// A square grayscale image with intensities in `[0, 1]`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub side: usize,
    pub pixels: Vec<f64>,
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Idx {
            offset,
            reason: format!(
                "file truncated, need 4 bytes but {} remain",
                bytes.len().saturating_sub(offset)
            ),
        })
}

/// Parses a header with `dims` dimensions; returns the dimensions and the
/// offset of the payload.
fn parse_header(bytes: &[u8], magic: u32, dims: usize) -> Result<(Vec<usize>, usize)> {
    let found = read_u32(bytes, 0)?;
    if found != magic {
        return Err(Error::Idx {
            offset: 0,
            reason: format!("bad magic {found:#010x}, expected {magic:#010x}"),
        });
    }
    let shape = (0..dims)
        .map(|k| read_u32(bytes, 4 + 4 * k).map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    let header = 4 + 4 * dims;
    let payload: usize = shape.iter().product();
    if bytes.len() < header + payload {
        return Err(Error::Idx {
            offset: bytes.len(),
            reason: format!("file truncated, header promises {payload} data bytes from offset {header}"),
        });
    }
    Ok((shape, header))
}

/// Parses image and label buffers and returns the first `count` images
/// labelled `digit`.
pub fn parse_idx_images(images: &[u8], labels: &[u8], digit: u8, count: usize) -> Result<Vec<Image>> {
    if digit > 9 {
        return Err(Error::param("digit", format!("must be in 0..=9, got {digit}")));
    }
    if count == 0 {
        return Err(Error::param("count", "must be at least 1"));
    }
    let (shape, img_off) = parse_header(images, IMAGE_MAGIC, 3)?;
    let (lshape, lab_off) = parse_header(labels, LABEL_MAGIC, 1)?;
    let (total, rows, cols) = (shape[0], shape[1], shape[2]);
    if rows != cols {
        return Err(Error::Idx {
            offset: 8,
            reason: format!("images must be square, got {rows}x{cols}"),
        });
    }
    if lshape[0] != total {
        return Err(Error::Idx {
            offset: 4,
            reason: format!("label count {} does not match image count {total}", lshape[0]),
        });
    }
    let size = rows * cols;
    let picked: Vec<Image> = labels[lab_off..lab_off + total]
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == digit)
        .take(count)
        .map(|(i, _)| {
            let start = img_off + i * size;
            Image {
                side: rows,
                pixels: images[start..start + size]
                    .iter()
                    .map(|&p| f64::from(p) / 255.0)
                    .collect(),
            }
        })
        .collect();
    if picked.len() < count {
        return Err(Error::param(
            "count",
            format!("requested {count} images of digit {digit}, found {}", picked.len()),
        ));
    }
    Ok(picked)
}

pub fn load_idx_images(path: &Path, label_path: &Path, digit: u8, count: usize) -> Result<Vec<Image>> {
    let images = fs::read(path).map_err(|e| Error::io(path, e))?;
    let labels = fs::read(label_path).map_err(|e| Error::io(label_path, e))?;
    parse_idx_images(&images, &labels, digit, count)
}

/// Serializes images and labels in IDX layout.
pub fn encode_idx(images: &[Vec<u8>], side: usize, labels: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let mut img = Vec::with_capacity(16 + images.len() * side * side);
    img.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    for d in [images.len(), side, side] {
        img.extend_from_slice(&(d as u32).to_be_bytes());
    }
    for im in images {
        img.extend_from_slice(im);
    }
    let mut lab = Vec::with_capacity(8 + labels.len());
    lab.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    lab.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    lab.extend_from_slice(labels);
    (img, lab)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> (Vec<u8>, Vec<u8>) {
        let images: Vec<Vec<u8>> = (0..5u8).map(|k| vec![k * 50; 28 * 28]).collect();
        encode_idx(&images, 28, &[1, 8, 1, 8, 8])
    }

    #[test]
    fn picks_matching_labels_and_normalizes() {
        let (img, lab) = fixture();
        let ones = parse_idx_images(&img, &lab, 1, 1).unwrap();
        assert_eq!(ones.len(), 1);
        assert_eq!(ones[0].side, 28);
        assert!(ones[0].pixels.iter().all(|&p| (0.0..=1.0).contains(&p)));
        let eights = parse_idx_images(&img, &lab, 8, 3).unwrap();
        let firsts: Vec<f64> = eights.iter().map(|im| im.pixels[0]).collect();
        assert_eq!(firsts, vec![50.0 / 255.0, 150.0 / 255.0, 200.0 / 255.0]);
    }

    #[test]
    fn bad_magic_names_offset() {
        let (mut img, lab) = fixture();
        img[3] = 0x01;
        match parse_idx_images(&img, &lab, 1, 1) {
            Err(Error::Idx { offset: 0, reason }) => assert!(reason.contains("magic")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_idx_images(&lab, &lab, 1, 1),
            Err(Error::Idx { offset: 0, .. })
        ));
    }

    #[test]
    fn truncation_and_shortfall() {
        let (img, lab) = fixture();
        assert!(matches!(
            parse_idx_images(&img[..img.len() - 1], &lab, 1, 1),
            Err(Error::Idx { .. })
        ));
        assert!(matches!(
            parse_idx_images(&img[..6], &lab, 1, 1),
            Err(Error::Idx { offset: 4, .. })
        ));
        assert!(parse_idx_images(&img, &lab, 1, 3).is_err());
        assert!(parse_idx_images(&img, &lab, 10, 1).is_err());
    }

    #[test]
    fn loads_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let (img, lab) = fixture();
        let (ip, lp) = (dir.path().join("img"), dir.path().join("lab"));
        fs::write(&ip, img).unwrap();
        fs::write(&lp, lab).unwrap();
        assert_eq!(load_idx_images(&ip, &lp, 8, 2).unwrap().len(), 2);
        assert!(matches!(
            load_idx_images(&dir.path().join("missing"), &lp, 8, 1),
            Err(Error::Io { .. })
        ));
    }
}
