//! Declarative scenario runner for the induced-coherence simulator.
//!
//! A scenario file names a crystal, pump, interferometer geometry, sample
//! and a list of tasks; [`run::run_scenario`] evaluates the tasks and writes
//! plot-ready series plus a `manifest.json`.

pub mod error;
pub mod output;
pub mod presets;
pub mod run;
pub mod scenario;

pub use error::SimError;
pub use run::{run_scenario, RunManifest};
pub use scenario::{parse_scenario, Format, Scenario, Task};

/// Environment variable that sets the worker-thread count.
pub const THREADS_ENV: &str = "NLINT_SIM_THREADS";
