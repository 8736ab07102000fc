//! Command-line harness around `bandlab-core`: distribution files,
//! case-study reports, and CSV/JSON experiment outputs.

pub mod cli;
pub mod commands;
pub mod dist_file;
pub mod error;
pub mod format;
pub mod report;

pub use error::CliError;

/// CSV writer with the project conventions: header row, LF line endings.
pub fn csv_writer<W: std::io::Write>(inner: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(inner)
}
