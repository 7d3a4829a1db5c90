//! Reading and writing run-off triangles as CSV, rendering reserve reports as
//! tables or JSON documents, and the `runoff` command line built on
//! [`runoff_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod csv_format;
pub mod document;
pub mod parallel;
pub mod table;

pub use csv_format::{
    emit_csv, parse_csv, parse_csv_str, read_triangle, EmitOptions, EmittedCsv, FormatError,
    PredictionStyle,
};
