//! Field of the default trap along the axes, and finite-difference checks
//! of its divergence and curl.

use magtrap::field::{check_maxwell, field_at};
use magtrap::TrapConfig;
use nalgebra::Vector3;

fn main() {
    let cfg = TrapConfig::table1();
    for x in [0.0, 1.0, 2.0] {
        let s = field_at(&cfg, &Vector3::new(x, 0.0, 0.0));
        println!("x = {x}: |B| = {:.6} Oe, theta = {:.4}", s.amplitude, s.theta);
    }
    let pos = Vector3::new(0.3, -0.8, 2.0);
    for h in [1e-1, 1e-2, 1e-3] {
        let r = check_maxwell(&cfg, &pos, h);
        println!("h = {h:e}: div {:.2e}, |curl| {:.2e}", r.divergence, r.curl.norm());
    }
}
