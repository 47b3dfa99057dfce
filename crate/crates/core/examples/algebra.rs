//! Prints the spin-1 generators and the residual of each commutator identity.

use socsqueeze::spin_algebra::verify_algebra;
use socsqueeze::Generator;

fn main() {
    for g in Generator::ALL {
        println!("{}:", g.name());
        let m = g.matrix();
        for r in 0..3 {
            let row: Vec<String> = (0..3).map(|c| format!("{:>+7.4}{:>+7.4}i", m[(r, c)].re, m[(r, c)].im)).collect();
            println!("  {}", row.join("  "));
        }
    }
    println!();
    for check in verify_algebra() {
        println!("{:<28} max deviation {:.1e}", check.identity, check.max_deviation);
    }
}
