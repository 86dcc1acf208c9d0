//! Normal modes at a few points of the (K_r², K_z²) plane and a coarse
//! text rendering of the stable region.

use magtrap::stability::{boundary_curve, secular_roots, AdiabaticityPoint, Branch, MapCell, MapGrid, StabilityMap};

fn main() -> magtrap::Result<()> {
    let curve = boundary_curve(5);
    for s in &curve.samples {
        println!("t = {:.4}  K_r^2 = {:.5}  K_z^2 = {:.5}", s.t, s.k_r2, s.k_z2);
    }

    for (kr2, kz2) in [(0.01, 0.01), (0.1, 0.1), (0.15, 0.05)] {
        let point = AdiabaticityPoint::new(kr2, kz2)?;
        for branch in [Branch::Minus, Branch::Plus] {
            let m = secular_roots(&point, branch);
            let roots: Vec<String> = m.roots.iter().map(|z| format!("{:+.4}{:+.4}i", z.re, z.im)).collect();
            println!("({kr2}, {kz2}) {branch:?}: {:?} {}", m.class, roots.join(" "));
        }
    }

    let grid = MapGrid {
        n_r: 40,
        n_z: 20,
        ..MapGrid::standard(0)
    };
    let map = StabilityMap::compute(grid)?;
    for j in (0..grid.n_z).rev() {
        let row: String = (0..grid.n_r)
            .map(|i| match map.cell(i, j) {
                MapCell::Stable => '#',
                MapCell::Marginal => '+',
                MapCell::Unstable => '.',
            })
            .collect();
        println!("{row}");
    }
    println!("stable fraction {:.3}", map.fraction(MapCell::Stable));
    Ok(())
}
