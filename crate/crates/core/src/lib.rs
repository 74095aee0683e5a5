//! Software model of an FPGA graph-convolution accelerator for event cameras.
//!
//! The crate follows the hardware pipeline stage by stage:
//!
//! - [`event_ingest`]: parse `t,x,y,p` event streams, cut them into time
//!   windows and scale them onto the `INPUT_SIZE³` grid.
//! - [`graph_builder`]: the asynchronous vertex store with its `R = 3`
//!   neighbourhood search.
//! - [`quant_arith`]: int8 fixed-point arithmetic, requantization and the
//!   27-entry position-contribution table.
//! - [`conv_dataflow`]: the float PointNetConv reference, the asynchronous
//!   convolution, Relaxing MaxPool into temporal channels and the baseline
//!   and two-step synchronous convolutions.
//! - [`cycle_cost`]: cycle budgets and parallel-multiplier sizing.
//! - [`resource_plan`]: LUT/DSP/BRAM estimation and per-layer variant search.
//! - [`config`], [`pipeline`] and [`commands`]: the configuration document,
//!   end-to-end driver and the report-producing commands behind the
//!   `evgraph` binary.
//!
//! Runnable walkthroughs for each stage live in `examples/`.

pub mod commands;
pub mod config;
pub mod conv_dataflow;
pub mod cycle_cost;
pub mod error;
pub mod event_ingest;
pub mod graph_builder;
pub mod pipeline;
pub mod quant_arith;
pub mod resource_plan;

pub use error::{Error, Result};
