//! Dataset ingestion: IDX parsing, pixel normalization, label remapping,
//! PCA, fold plans, and metrics.

pub mod idx;
pub mod kfold;
pub mod metrics;
pub mod pca;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use std::path::Path;

/// Raw images and labels exactly as stored in the IDX pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImageSet {
    /// n·rows·cols pixel bytes, row-major per image.
    pub images: Vec<u8>,
    pub labels: Vec<u8>,
    pub rows: usize,
    pub cols: usize,
}

impl RawImageSet {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn pixels_per_image(&self) -> usize {
        self.rows * self.cols
    }

    pub fn from_bytes(image_bytes: &[u8], label_bytes: &[u8]) -> Result<Self> {
        let (n, rows, cols, images) = idx::parse_idx_images(image_bytes)?;
        let labels = idx::parse_idx_labels(label_bytes)?;
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                context: "image/label counts",
                expected: n,
                got: labels.len(),
            });
        }
        Ok(RawImageSet {
            images,
            labels,
            rows,
            cols,
        })
    }

    pub fn from_files(images_path: &Path, labels_path: &Path) -> Result<Self> {
        let image_bytes = std::fs::read(images_path)?;
        let label_bytes = std::fs::read(labels_path)?;
        Self::from_bytes(&image_bytes, &label_bytes)
    }

    /// Appends another set with identical geometry (used to pool official
    /// train and test splits).
    pub fn extend(&mut self, other: RawImageSet) -> Result<()> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch {
                context: "pooled image geometry",
                expected: self.rows * self.cols,
                got: other.rows * other.cols,
            });
        }
        self.images.extend_from_slice(&other.images);
        self.labels.extend_from_slice(&other.labels);
        Ok(())
    }

    /// Serializes back to an IDX byte pair.
    pub fn to_idx_bytes(&self) -> (Vec<u8>, Vec<u8>) {
        (
            idx::write_idx_images(self.n(), self.rows, self.cols, &self.images),
            idx::write_idx_labels(&self.labels),
        )
    }
}

/// Training-ready matrix: pixels scaled to [0, 1] and labels remapped to a
/// dense 0…d−1 range with the original values kept in `label_names`.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<usize>,
    pub label_names: Vec<i64>,
    pub name: String,
    pub fingerprint: String,
    /// How many IDX file pairs were pooled into this set.
    pub pooled_sources: usize,
}

impl Dataset {
    pub fn from_raw(raw: &RawImageSet, name: &str) -> Result<Self> {
        if raw.n() == 0 {
            return Err(Error::EmptySplit);
        }
        let fingerprint = fingerprint_raw(raw);
        let mut label_names: Vec<i64> = raw.labels.iter().map(|&l| i64::from(l)).collect();
        label_names.sort_unstable();
        label_names.dedup();
        let y: Vec<usize> = raw
            .labels
            .iter()
            .map(|&l| {
                label_names
                    .binary_search(&i64::from(l))
                    .expect("label present by construction")
            })
            .collect();
        let p = raw.pixels_per_image();
        let data: Vec<f64> = raw.images.iter().map(|&b| f64::from(b) / 255.0).collect();
        Ok(Dataset {
            x: Matrix::from_vec(raw.n(), p, data),
            y,
            label_names: label_names.clone(),
            name: name.to_string(),
            fingerprint,
            pooled_sources: 1,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn class_count(&self) -> usize {
        self.label_names.len()
    }

    /// Deterministic stratified subsample of at most `max` rows.
    pub fn subsample(&self, max: usize, seed: u64) -> Dataset {
        if max >= self.n() {
            return self.clone();
        }
        use rand::SeedableRng;
        use rand::seq::SliceRandom;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5a3e);
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); self.class_count()];
        for (i, &label) in self.y.iter().enumerate() {
            by_class[label].push(i);
        }
        for members in by_class.iter_mut() {
            members.shuffle(&mut rng);
        }
        // deal classes round-robin until the cap
        let mut keep = Vec::with_capacity(max);
        let mut depth = 0;
        while keep.len() < max {
            let mut advanced = false;
            for members in &by_class {
                if keep.len() == max {
                    break;
                }
                if let Some(&i) = members.get(depth) {
                    keep.push(i);
                    advanced = true;
                }
            }
            if !advanced {
                break;
            }
            depth += 1;
        }
        keep.sort_unstable();
        let p = self.x.cols();
        let mut data = Vec::with_capacity(keep.len() * p);
        let mut y = Vec::with_capacity(keep.len());
        for &i in &keep {
            data.extend_from_slice(self.x.row(i));
            y.push(self.y[i]);
        }
        Dataset {
            x: Matrix::from_vec(keep.len(), p, data),
            y,
            label_names: self.label_names.clone(),
            name: self.name.clone(),
            fingerprint: format!("{}-sub{}", self.fingerprint, keep.len()),
            pooled_sources: self.pooled_sources,
        }
    }
}

/// FNV-1a over geometry, labels, and pixels.
pub fn fingerprint_raw(raw: &RawImageSet) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |byte: u8| {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x1000_0000_01b3);
    };
    for v in [raw.n() as u64, raw.rows as u64, raw.cols as u64] {
        for b in v.to_le_bytes() {
            eat(b);
        }
    }
    for &b in &raw.labels {
        eat(b);
    }
    for &b in &raw.images {
        eat(b);
    }
    format!("{h:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_raw() -> RawImageSet {
        RawImageSet {
            images: vec![0, 51, 102, 153, 204, 255, 0, 255],
            labels: vec![3, 7, 3, 9],
            rows: 1,
            cols: 2,
        }
    }

    #[test]
    fn idx_roundtrip_identity() {
        let raw = tiny_raw();
        let (img, lab) = raw.to_idx_bytes();
        let back = RawImageSet::from_bytes(&img, &lab).unwrap();
        assert_eq!(raw, back);
    }

    #[test]
    fn labels_remap_densely() {
        let ds = Dataset::from_raw(&tiny_raw(), "tiny").unwrap();
        assert_eq!(ds.label_names, vec![3, 7, 9]);
        assert_eq!(ds.y, vec![0, 1, 0, 2]);
        assert_eq!(ds.class_count(), 3);
    }

    #[test]
    fn letters_style_labels_map_to_zero_based() {
        let raw = RawImageSet {
            images: vec![0; 26],
            labels: (1..=26).collect(),
            rows: 1,
            cols: 1,
        };
        let ds = Dataset::from_raw(&raw, "letters").unwrap();
        assert_eq!(*ds.y.iter().min().unwrap(), 0);
        assert_eq!(*ds.y.iter().max().unwrap(), 25);
        let mut seen = ds.y.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 26);
    }

    #[test]
    fn pixels_scale_to_unit_interval() {
        let ds = Dataset::from_raw(&tiny_raw(), "tiny").unwrap();
        assert_eq!(ds.x[(0, 0)], 0.0);
        assert_eq!(ds.x[(2, 1)], 1.0);
        assert!((ds.x[(0, 1)] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn mismatched_counts_rejected() {
        let raw = tiny_raw();
        let (img, _) = raw.to_idx_bytes();
        let lab = idx::write_idx_labels(&[1, 2]);
        assert!(matches!(
            RawImageSet::from_bytes(&img, &lab),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn subsample_caps_and_keeps_classes() {
        let raw = RawImageSet {
            images: (0..200u8).flat_map(|v| [v, v]).collect(),
            labels: (0..200u8).map(|i| i % 4).collect(),
            rows: 1,
            cols: 2,
        };
        let ds = Dataset::from_raw(&raw, "four").unwrap();
        let sub = ds.subsample(30, 5);
        assert_eq!(sub.n(), 30);
        let mut classes = sub.y.clone();
        classes.sort_unstable();
        classes.dedup();
        assert_eq!(classes.len(), 4);
        // deterministic
        let sub2 = ds.subsample(30, 5);
        assert_eq!(sub.y, sub2.y);
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = fingerprint_raw(&tiny_raw());
        let mut raw = tiny_raw();
        raw.images[0] ^= 1;
        assert_ne!(a, fingerprint_raw(&raw));
    }
}
