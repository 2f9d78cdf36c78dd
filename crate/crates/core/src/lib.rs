//! Brick-wall random forests with locally correlated deaths.
//!
//! A brick wall stacks i.i.d. rows of bricks `(B, H)`: each brick removes `B`
//! adjacent individuals of one generation and replaces them with `H`
//! individuals of the next. The primal forest records the genealogy, the
//! dual forest the genealogy of the transposed model. At criticality
//! (`E[B] = E[H]`) slice populations are martingales whose scaling limit is
//! the Feller diffusion `dX = σ√X dW` with `σ² = E[(H−B)²]/E[B]`.
//!
//! The crate is organised as follows:
//!
//! * [`laws`]: brick distributions, size-biasing, transposition and the
//!   Galton–Watson and continuous-time constructors.
//! * [`row_flow`]: stationary rows of bricks and the one-generation endpoint
//!   flow, plus an exact batched stepper for large populations.
//! * [`forest`]: finite strips with primal and dual adjacency, dual surveys,
//!   re-rooting, duality checks and meshing.
//! * [`population`]: multi-generation slice chains and the statistics built
//!   on them.
//! * [`feller`]: the limiting diffusion (exact transitions, Euler scheme).
//! * [`stats`]: Kolmogorov–Smirnov, chi-square and interval helpers.
//! * [`harness`]: named experiments, configuration and reports.

pub mod error;
pub mod feller;
pub mod forest;
pub mod harness;
pub mod laws;
mod parallel;
pub mod population;
pub mod rng;
pub mod row_flow;
pub mod stats;

pub use error::{Error, Result};
pub use laws::{BiasedLaws, BrickLaw, Probability};
pub use rng::{SeedTree, SimRng};
pub use row_flow::{flow_step, one_step_population, Brick, FlowState, RowRealization};
