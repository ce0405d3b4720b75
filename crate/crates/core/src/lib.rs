//! Core library for joint transceiver and backscatter-coefficient design
//! in a multiantenna-reader backscatter network: channel generation,
//! throughput evaluation, combiner construction, the individual and joint
//! optimization algorithms, benchmark schemes, and the Monte Carlo
//! simulation driver used by the command-line front end.

pub mod asymptotic;
pub mod benchmarks;
pub mod channel;
pub mod combiners;
pub mod config;
pub mod error;
pub mod individual;
mod linalg;
pub mod optim;
pub mod sim;
pub mod throughput;
pub mod validate;

pub use asymptotic::{
    eb_precoder, high_snr_design, joint_optimize, low_snr_design, precoder_angle,
    single_tag_mimo_design, trx_only_optimize, weighted_precoder,
};
pub use channel::{corrupt_csi, generate_channels, generate_deployment, pathloss};
pub use channel::{BCVector, ChannelSet, MIN_TAG_DISTANCE};
pub use combiners::{mmse_combiner, mrc_combiner, zf_combiner, ZF_CONDITION_LIMIT};
pub use config::{dbm_to_watts, default_rand_samples, SystemConfig};
pub use error::{Error, Result};
pub use benchmarks::{low_high_trx, mrt_zf_benchmark};
pub use individual::{optimize_bc, optimize_precoder, randomize_rank_one};
pub use sim::{
    emit_table, render_csv, render_json, run_experiment, run_scheme, ExperimentConfig,
    OutputFormat, ResultRow, ResultTable, Scheme, SweepParameter, CSV_HEADER,
};
pub use optim::{
    box_pg_maximize, nelder_mead, pga_psd_maximize, project_psd_trace, SolverReport,
};
pub use validate::{run_suite, CheckResult, ValidationReport, SUITES};
pub use throughput::{
    backscatter_sinr, per_tag_throughput, sinr_sdr_form, sum_throughput, sum_throughput_sdr,
    transmit_snr, CombinerMatrix, Design, Precoder, PrecoderMatrix,
};
