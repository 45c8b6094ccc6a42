//! Analysis engine for a two-strain SIR coinfection model with logistic
//! population growth.
//!
//! The reduced system tracks the susceptible class `S` and three infected
//! classes `I1`, `I2`, `I12` (single-strain and coinfected):
//!
//! ```text
//! S'   = (r(1 - S/K) - alpha1 I1 - alpha2 I2 - alpha3 I12) S
//! I1'  = (alpha1 S - eta1 I12 - gamma1 I2 - mu1) I1
//! I2'  = (alpha2 S - eta2 I12 - gamma2 I1 - mu2) I2
//! I12' = (alpha3 S + eta1 I1 + eta2 I2 - mu3) I12 + (gamma1 + gamma2) I1 I2
//! ```
//!
//! The crate computes every equilibrium family `G1..G8` in closed form (a
//! quadratic solve for the coexistence points), classifies local stability
//! both by eigenvalues of the analytic Jacobian and by the closed-form
//! predicates, and assembles the transition diagram of locally stable
//! equilibria as the carrying capacity `K` grows. An adaptive Dormand-Prince
//! integrator cross-validates the static analysis by direct simulation.
//!
//! Start with the runnable examples:
//!
//! - `analyze_equilibria` — all candidates and verdicts at a fixed `K`
//! - `transition_diagram` — the `G2 -> G3 -> G6 -> G5` staircase in `K`
//! - `parameter_sweep` — a sweep table suitable for plotting
//! - `simulate_trajectory` — time integration against the predicted attractor
//! - `scaled_transmission` — the `alpha_i = a_i/K` regime where the stable
//!   type is independent of `K`
//! - `single_strain_threshold` — the one-strain submodel and its `R0` threshold
//!
//! ```bash
//! cargo run -p coinfect --example transition_diagram
//! ```
//!
//! The same functionality is exposed by the thin `coinfect` binary
//! (`analyze`, `diagram`, `sweep`, `simulate` subcommands).

pub mod branch;
pub mod cli;
pub mod equilibria;
pub mod model;
pub mod params;
pub mod simulate;
pub mod stability;

pub use branch::{Scenario, Threshold, TransitionDiagram};
pub use equilibria::{CoexistencePolynomial, EquilibriumPoint, Label};
pub use params::{Derived, ParamFile, RawParams, ScaledParams, ValidatedParams};
pub use simulate::{IntegrateOpts, State, Trajectory};
pub use stability::{Classification, ClosedForm, StabilityVerdict};
