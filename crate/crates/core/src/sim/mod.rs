//! Simulation machinery: random pedigree growth, Mendelian gene dropping,
//! trait generation, and the type-I-error / power experiment runner.

mod experiment;
mod genedrop;
mod grow;
mod traits;

pub use experiment::{
    parse_experiment_spec, run_experiment, write_experiment_table, Design, ExperimentOutcome,
    ExperimentRow, ExperimentSpec, Method,
};
pub use genedrop::gene_drop;
pub use grow::{grow_multifamily_sample, grow_pedigree, PedigreeGrowthConfig};
pub use traits::{generate_trait, TraitModel};
