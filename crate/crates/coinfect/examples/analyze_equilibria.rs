//! List every equilibrium candidate at a few carrying capacities, with
//! residuals, admissibility, and both stability verdicts.
//!
//! ```bash
//! cargo run -p coinfect --example analyze_equilibria
//! ```

use coinfect::params::RawParams;
use coinfect::stability;

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
    println!("sigma = {:?}", d.sigma);
    println!(
        "eta* = {:?}, gamma* = {:.3}, K1 = {:?}, K2 = {:?}",
        d.eta_star, d.gamma_star, d.k1, d.k2
    );
    println!();

    for k in [0.3, 0.8, 2.0, 8.0] {
        println!("K = {k}");
        println!(
            "  {:<5} {:>10} {:>10} {:>10} {:>10}  {:<11} {:>9}  {:<13} {:<13}",
            "label", "S", "I1", "I2", "I12", "admissible", "residual", "eigenvalues", "closed form"
        );
        let classified = stability::classify_all(&p, k).expect("classification succeeds");
        for c in &classified {
            let pt = &c.point;
            println!(
                "  {:<5} {:>10.5} {:>10.5} {:>10.5} {:>10.5}  {:<11} {:>9.1e}  {:<13} {:<13}",
                pt.label.to_string(),
                pt.coords[0],
                pt.coords[1],
                pt.coords[2],
                pt.coords[3],
                pt.admissible,
                pt.residual,
                c.verdict.classification.to_string(),
                c.verdict.closed_form.to_string(),
            );
        }
        match stability::stable_equilibrium(&p, k) {
            Ok(c) => println!("  -> locally stable: {}\n", c.point.label),
            Err(e) => println!("  -> {e}\n"),
        }
    }
}
