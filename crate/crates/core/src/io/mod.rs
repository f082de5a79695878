//! File formats: Touchstone S-parameters, pattern grids and result records.

pub mod pattern_csv;
pub mod records;
pub mod touchstone;

pub use pattern_csv::{load_pattern_grid, parse_pattern_csv, save_pattern_grid};
pub use touchstone::{parse_touchstone, write_touchstone, DataFormat, TouchstoneDocument};
