//! Dataset ingestion, synthetic generators, splitting and batching.

mod blobs;
mod cifar;
mod dataset;

pub use blobs::{blob_centres, make_blobs};
pub use cifar::{load_cifar10, normalize_pixel, parse_batch_file, RECORD_LEN, TEST_FILE, TRAIN_FILES};
pub use dataset::{batches, epoch_order, split, BatchPlan, Dataset, OwnedBatch};
