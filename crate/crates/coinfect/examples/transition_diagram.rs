//! Build the transition diagram of locally stable equilibria as the carrying
//! capacity grows, and verify that the branch is continuous across
//! thresholds.
//!
//! ```bash
//! cargo run -p coinfect --example transition_diagram
//! ```

use coinfect::branch;
use coinfect::params::RawParams;

fn main() {
    let p = RawParams {
        r: 1.0,
        k: 2.0,
        alpha: [2.0, 1.0, 0.5],
        mu: Some([1.0, 1.0, 1.0]),
        rho: None,
        d: None,
        eta: [3.0, 1.2],
        gamma: [0.2, 0.1],
    }
    .validate()
    .expect("demo parameters are valid");

    let d = p.derived();
    println!("scenario: {}", branch::scenario_classify(&d));
    println!("predicted thresholds:");
    for t in branch::thresholds(&d) {
        println!("  K = {:<8.5} {}", t.k, t.event);
    }

    let diagram = branch::transition_diagram(&p, 10.0, 32).expect("diagram builds");
    println!("\ndiagram over (0, {}]: {}", diagram.k_max, diagram.schematic());
    for s in &diagram.segments {
        println!(
            "  ({:>8.5}, {:>8.5}]  {:<12} evidence: {:?}",
            s.k_lo,
            s.k_hi,
            s.label.to_string(),
            s.evidence
        );
    }

    let report = branch::continuity_check(&diagram, &p, 1e-8).expect("branch is continuous");
    println!("\ncontinuity at interior thresholds (tol {:.0e}):", report.tol);
    for e in &report.entries {
        println!(
            "  K = {:<8.5} {} meets {}: distance {:.2e}",
            e.k, e.left, e.right, e.distance
        );
    }

    println!("\nmachine-readable document:");
    println!(
        "{}",
        serde_json::to_string_pretty(&diagram).expect("diagram serializes")
    );
}
