//! The one-strain submodel: the disease-free state hands over to the endemic
//! state exactly when the reproduction number K/sigma_i crosses 1.
//!
//! ```bash
//! cargo run -p coinfect --example single_strain_threshold
//! ```

use coinfect::equilibria::{self, Strain};
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

    for strain in [Strain::First, Strain::Second, Strain::Coinfection] {
        let sigma = p.sigma()[strain.index()];
        println!("strain {:?} (sigma = {sigma}):", strain);
        for k in [0.5 * sigma, 2.0 * sigma] {
            let r0 = k / sigma;
            println!("  K = {k:.3} (R0 = {r0:.2}):");
            for e in equilibria::single_strain(&p, k, strain) {
                println!(
                    "    {:<3} at (S, I) = ({:.4}, {:.4})  {:?}",
                    e.point.label.to_string(),
                    e.point.coords[0],
                    e.point.coords[strain.index() + 1],
                    e.verdict
                );
            }
        }
        println!();
    }
}
