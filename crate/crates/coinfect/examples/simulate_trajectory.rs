//! Integrate the full five-compartment system toward its predicted attractor
//! and print the invariant report.
//!
//! ```bash
//! cargo run -p coinfect --example simulate_trajectory
//! ```

use coinfect::params::RawParams;
use coinfect::simulate::{self, IntegrateOpts, State, Termination};
use coinfect::stability;

fn main() {
    // Removal rates split into recovery + death so the recovered class and
    // the population balance can be simulated.
    let p = RawParams {
        r: 1.0,
        k: 2.0,
        alpha: [2.0, 1.0, 0.5],
        mu: None,
        rho: Some([0.6, 0.5, 0.4]),
        d: Some([0.0, 0.4, 0.5, 0.6, 0.3]),
        eta: [3.0, 1.2],
        gamma: [0.2, 0.1],
    }
    .validate()
    .expect("demo parameters are valid");

    let predicted = stability::stable_equilibrium(&p, p.k())
        .expect("unique stable equilibrium")
        .point;
    println!(
        "predicted attractor: {} at {:?}",
        predicted.label, predicted.coords
    );

    let y0 = State::new(0.9, 0.15, 0.25, 0.05, 0.0);
    let traj = simulate::integrate(&p, &y0, &IntegrateOpts::default()).expect("integration runs");
    println!(
        "steps: {} accepted, {} rejected, h in [{:.2e}, {:.2e}]",
        traj.stats.accepted, traj.stats.rejected, traj.stats.h_min, traj.stats.h_max
    );
    match &traj.termination {
        Termination::Converged { state, derivative_norm } => {
            println!(
                "converged at t = {:.2}: (S, I1, I2, I12) = ({:.6}, {:.6}, {:.6}, {:.6}), R = {:.6}",
                state.t, state.s, state.i1, state.i2, state.i12, state.r
            );
            println!("terminal derivative norm: {derivative_norm:.2e}");
            let err = state
                .coords()
                .iter()
                .zip(predicted.coords)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            println!("distance to predicted attractor: {err:.2e}");
        }
        other => println!("did not converge: {other:?}"),
    }

    let report = simulate::invariant_report(&traj, &p);
    println!("\ninvariants along the trajectory:");
    println!("  nonnegative: {} (min component {:.2e})", report.nonnegative, report.min_component);
    println!("  S bounded by max(S0, K): {} (max S {:.6})", report.s_bound_ok, report.s_max);
    if let Some(dev) = report.population_balance_dev {
        println!("  population balance identity deviation: {dev:.2e}");
    }
    if let Some(res) = report.limit_residual {
        println!("  equilibrium residual at the limit: {res:.2e}");
    }
    if !report.violations.is_empty() {
        println!("  violations: {:?}", report.violations);
    }
}
