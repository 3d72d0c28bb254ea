//! Description files, CSV/SVG output, the benchmark harness and the CLI
//! around the `screwchain` library.

pub mod bench;
pub mod cli;
pub mod description;
pub mod format;
pub mod svg;
pub mod trajectory;
