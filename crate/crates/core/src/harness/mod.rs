//! Persistence, model export and experiment pipelines.

mod bounds;
mod instance_io;
mod lp;
mod sweep;

pub use bounds::{bounds_table, BoundsTable};
pub use instance_io::{parse_instance, read_instance, render_instance, write_instance, FORMAT_HEADER};
pub use lp::{export_mip, render_mip};
pub use sweep::{
    desk_scale_config, run_sweep, summarize, write_means_csv, write_records_csv, MeanRecord,
    SweepConfig, SweepMethod, SweepRecord, CSV_VERSION,
};
