//! Scale-free transmission mode: with `alpha_i = a_i / K` (and the bilinear
//! coinfection rates scaled the same way) the stable equilibrium type no
//! longer depends on the carrying capacity. One case per regime of the
//! `(s1, s3, eta1*, eta2*)` table.
//!
//! ```bash
//! cargo run -p coinfect --example scaled_transmission
//! ```

use coinfect::branch;
use coinfect::params::ScaledParams;

fn demo(name: &str, sp: &ScaledParams) {
    let d = sp.materialize(1.0).expect("valid scaled set").derived();
    let predicted = branch::corollary9_label(sp).expect("valid scaled set");
    let diagram = branch::transition_diagram_scaled(sp, 1000.0, 17).expect("scale invariance");
    println!(
        "{name}: s = ({:.3}, {:.3}, {:.3}), eta* = ({:.3}, {:.3})",
        d.sigma[0], d.sigma[1], d.sigma[2], d.eta_star[0], d.eta_star[1]
    );
    println!(
        "  predicted {:?}; observed {} for K over four decades (scenario {})\n",
        predicted.map(|(l, _)| l),
        diagram.segments[0].label,
        diagram.scenario
    );
}

fn main() {
    let base = ScaledParams {
        r: 1.0,
        a: [2.0, 1.0, 0.5],
        mu: [1.0, 1.0, 1.0],
        eta: [3.0, 1.2],
        gamma: [0.2, 0.1],
        recovery: None,
    };

    // (i) s1 >= 1: the disease-free state wins at every K.
    let mut case_i = base.clone();
    case_i.mu = [2.4, 1.3, 1.0];
    demo("case i", &case_i);

    // (ii) s1 < 1 with eta1* below the invasion bound: strain 1 alone.
    let mut case_ii = base.clone();
    case_ii.eta = [0.4, 1.2];
    demo("case ii", &case_ii);

    // (iii) eta2* > eta1* above the bound, s3 >= 1: coinfected boundary state.
    let mut case_iii = base.clone();
    case_iii.mu = [0.6, 0.9, 1.0];
    case_iii.a = [2.0, 1.5, 0.5];
    case_iii.eta = [3.0, 2.1];
    demo("case iii", &case_iii);

    // (iv) s3 < 1 and eta1* above even the coinfection bound: pure coinfection.
    let mut case_iv = base.clone();
    case_iv.mu = [0.2, 0.3, 0.2];
    case_iv.eta = [3.0, 3.6];
    demo("case iv", &case_iv);
}
