//! CIFAR-10 binary format: 3073-byte records, one label byte followed by a
//! 32x32 image as three 1024-byte planes (R, G, B), row-major.

use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};

pub const RECORD_LEN: usize = 1 + 3 * 32 * 32;
pub const TRAIN_FILES: [&str; 5] = [
    "data_batch_1.bin",
    "data_batch_2.bin",
    "data_batch_3.bin",
    "data_batch_4.bin",
    "data_batch_5.bin",
];
pub const TEST_FILE: &str = "test_batch.bin";

/// Pixel byte to model input: scale to [0, 1], then shift by -0.5.
pub fn normalize_pixel(byte: u8) -> f64 {
    byte as f64 / 255.0 - 0.5
}

/// Parse one batch file, appending to `inputs`/`labels`.
pub fn parse_batch_file(path: &Path, inputs: &mut Vec<f64>, labels: &mut Vec<usize>) -> Result<usize> {
    let bytes = std::fs::read(path).map_err(|e| Error::Ingestion {
        file: path.to_path_buf(),
        offset: 0,
        detail: e.to_string(),
    })?;
    if bytes.len() % RECORD_LEN != 0 {
        let offset = (bytes.len() / RECORD_LEN * RECORD_LEN) as u64;
        return Err(Error::Ingestion {
            file: path.to_path_buf(),
            offset,
            detail: format!(
                "truncated record: {} trailing bytes, expected {RECORD_LEN}",
                bytes.len() % RECORD_LEN
            ),
        });
    }
    let records = bytes.len() / RECORD_LEN;
    inputs.reserve(records * (RECORD_LEN - 1));
    labels.reserve(records);
    for (r, record) in bytes.chunks_exact(RECORD_LEN).enumerate() {
        let label = record[0];
        if label > 9 {
            return Err(Error::Corruption {
                file: path.to_path_buf(),
                offset: (r * RECORD_LEN) as u64,
                detail: format!("label byte {label} exceeds 9"),
            });
        }
        labels.push(label as usize);
        inputs.extend(record[1..].iter().map(|&b| normalize_pixel(b)));
    }
    Ok(records)
}

fn load_files(dir: &Path, files: &[&str], name: &str) -> Result<Dataset> {
    let mut inputs = Vec::new();
    let mut labels = Vec::new();
    for f in files {
        parse_batch_file(&dir.join(f), &mut inputs, &mut labels)?;
    }
    Dataset::new(name, inputs, labels, [3, 32, 32], 10)
}

/// Official train (5 files) and test (1 file) splits from an extracted
/// `cifar-10-batches-bin` directory.
pub fn load_cifar10(dir: &Path) -> Result<(Dataset, Dataset)> {
    Ok((
        load_files(dir, &TRAIN_FILES, "cifar10-train")?,
        load_files(dir, &[TEST_FILE], "cifar10-test")?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_records(path: &Path, labels: &[u8], fill: u8) {
        let mut bytes = Vec::new();
        for &l in labels {
            bytes.push(l);
            bytes.extend(std::iter::repeat_n(fill, RECORD_LEN - 1));
        }
        std::fs::write(path, bytes).unwrap();
    }

    #[test]
    fn pixel_normalization() {
        assert_eq!(normalize_pixel(255), 0.5);
        assert_eq!(normalize_pixel(0), -0.5);
    }

    #[test]
    fn truncated_file_names_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data_batch_1.bin");
        write_records(&path, &[1, 2], 7);
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(RECORD_LEN + 100);
        std::fs::write(&path, bytes).unwrap();
        let err = parse_batch_file(&path, &mut Vec::new(), &mut Vec::new()).unwrap_err();
        match err {
            Error::Ingestion { offset, ref file, .. } => {
                assert_eq!(offset, RECORD_LEN as u64);
                assert!(file.ends_with("data_batch_1.bin"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_label_is_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("test_batch.bin");
        write_records(&path, &[3, 10], 0);
        let err = parse_batch_file(&path, &mut Vec::new(), &mut Vec::new()).unwrap_err();
        assert!(matches!(err, Error::Corruption { offset, .. } if offset == RECORD_LEN as u64));
    }

    #[test]
    fn missing_file_is_ingestion_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_cifar10(dir.path()), Err(Error::Ingestion { .. })));
    }
}
