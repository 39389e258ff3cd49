//! Dataset files, streaming and ingestion.

pub mod dataset;
pub mod ingest;
pub mod shard;
pub mod stream;

pub use self::dataset::{
    generate_dataset, read_dataset, verify_checksums, DatasetFormat, DatasetManifest, FileEntry, GenerateOptions,
};
pub use self::ingest::{ingest_real, read_series, read_windows, split_by_seed, window_series, write_windows_csv};
pub use self::shard::{read_shard, ShardHeader, ShardRecord};
pub use self::stream::{read_frame, serve_tcp, stream_unlimited, Frame, StreamConfig};
