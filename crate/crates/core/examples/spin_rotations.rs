//! The spin frame rotation that diagonalises the magnetic Hamiltonian.

use magtrap::quantum::{conjugate, diagonalization_check, magnetic_hamiltonian, rotation, rotation_identity_check};

fn main() {
    let (mu_b, theta, phi) = (1.5, 0.7, -1.2);
    let h = magnetic_hamiltonian(mu_b, theta, phi);
    let d = conjugate(&rotation(theta, phi), &h);
    for i in 0..3 {
        let row: Vec<String> = (0..3).map(|j| format!("{:+.3}{:+.3}i", d[(i, j)].re, d[(i, j)].im)).collect();
        println!("{}", row.join("  "));
    }
    println!("diagonalisation residual {:.1e}", diagonalization_check(mu_b, theta, phi));
    for th in [0.3, 1.2, 2.9] {
        println!("theta = {th}: identity residual {:.1e}", rotation_identity_check(th));
    }
}
