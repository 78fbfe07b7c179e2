//! Canonical data schemas, dataset validation, CSV ingestion, and the
//! parametric synthetic-data generator.

mod io;
mod synth;
mod types;
mod validate;

pub use io::{
    open_for_read, read_lineups_csv, read_playtypes_csv, read_segments_csv, write_lineups_csv,
    write_playtypes_csv, write_segments_csv,
};
pub use synth::{synthesize_dataset, SynthDataset, SynthTruth, TruthRow};
pub use types::{
    LineupRecord, PlaytypeProfile, ShotSegment, MERGED_PLAYTYPES, N_MERGED_PLAYTYPES,
    N_RAW_PLAYTYPES, RAW_PLAYTYPES, RIM_XY,
};
pub use validate::{validate_dataset, ValidationReport, Violation};
