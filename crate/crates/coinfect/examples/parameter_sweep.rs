//! Sweep the carrying capacity and emit the stable-equilibrium table
//! (K, label, coordinates, spectral margin) as CSV on stdout.
//!
//! ```bash
//! cargo run -p coinfect --example parameter_sweep > sweep.csv
//! ```

use coinfect::params::RawParams;
use coinfect::stability::{self, StabilityError};

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

    let (lo, hi, n) = (0.1_f64, 10.0_f64, 200usize);
    println!("K,stable_label,S,I1,I2,I12,max_real_part");
    for i in 0..n {
        let k = (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp();
        match stability::stable_equilibrium(&p, k) {
            Ok(c) => println!(
                "{k:.10e},{},{:.10e},{:.10e},{:.10e},{:.10e},{:.3e}",
                c.point.label,
                c.point.coords[0],
                c.point.coords[1],
                c.point.coords[2],
                c.point.coords[3],
                c.verdict.max_real_part,
            ),
            Err(StabilityError::NoneStable { .. }) => println!("{k:.10e},none-stable,,,,,"),
            Err(e) => {
                eprintln!("K = {k}: {e}");
                std::process::exit(1);
            }
        }
    }
}
