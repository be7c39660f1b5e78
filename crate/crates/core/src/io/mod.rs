//! Dataset ingestion, result persistence and image rendering.

mod dataset;
pub mod pgm;
mod records;
mod render;
mod table;

pub use dataset::{load_pgm_directory, write_pgm_directory, ImageDataset};
pub use pgm::{read_pgm, write_pgm, PgmFormat, PgmImage};
pub use records::{read_records, write_records, RECORDS_HEADER};
pub use render::{render_feature_grid, render_reconstruction, Contrast, FeatureGrid, Reconstruction};
pub use table::{load_binary_csv, load_csv_matrix, parse_csv_matrix, write_binary_csv, write_csv_matrix, write_csv_rows};
