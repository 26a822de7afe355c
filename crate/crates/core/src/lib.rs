//! Dynamical-systems analysis of scored message streams.
//!
//! A corpus of messages, each carrying five emotion scores and an account
//! automation ("bot") score, is cut into fixed-length windows. Each
//! window's emotion scores are discretized into a four-symbol string, an
//! epsilon-machine is reconstructed from the string with CSSR, and the
//! machine yields statistical complexity `C`, entropy rate `h` and
//! predictable information `E`. Those measures are then regressed on the
//! window's mean bot score and text/timing controls.
//!
//! ```
//! use botdyn::measures::{measure_symbols, MeasureParams};
//! use botdyn::simulate::{generate_symbols, Process, ProcessSpec};
//!
//! let spec = ProcessSpec { process: Process::GoldenMean { p: 0.5 }, seed: 1 };
//! let symbols = generate_symbols(&spec, 20_000).unwrap();
//! let m = measure_symbols(&symbols, 2, &MeasureParams::default()).unwrap();
//! assert_eq!(m.machine.num_states(), 2);
//! assert!((m.entropy_rate - 2.0 / 3.0).abs() < 0.03);
//! ```

pub mod cssr;
pub mod error;
pub mod features;
pub mod ingest;
pub mod measures;
pub mod pipeline;
pub mod regression;
pub mod report;
pub mod sequencing;
pub mod simulate;

pub use error::{Error, Result};
