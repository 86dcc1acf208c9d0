//! Rasterised stability region.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{is_stable, AdiabaticityPoint, BoundaryCurve};
use crate::error::{Error, Result};

/// Axis ranges and resolution of a `(K_r², K_z²)` raster.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MapGrid {
    pub k_r2: (f64, f64),
    pub k_z2: (f64, f64),
    pub n_r: usize,
    pub n_z: usize,
}

impl MapGrid {
    /// Square grid over `[0, 0.2] × [0, 0.6]`, which contains the whole
    /// stable region.
    pub fn standard(resolution: usize) -> Self {
        MapGrid {
            k_r2: (0.0, 0.2),
            k_z2: (0.0, 0.6),
            n_r: resolution,
            n_z: resolution,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("K_r^2", self.k_r2), ("K_z^2", self.k_z2)] {
            if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
                return Err(Error::Domain(format!("{name} range must satisfy 0 <= lo < hi, got [{lo}, {hi}]")));
            }
        }
        if self.n_r == 0 || self.n_z == 0 {
            return Err(Error::Domain("map resolution must be at least 1".into()));
        }
        Ok(())
    }

    pub fn cell_width(&self) -> (f64, f64) {
        (
            (self.k_r2.1 - self.k_r2.0) / self.n_r as f64,
            (self.k_z2.1 - self.k_z2.0) / self.n_z as f64,
        )
    }

    fn node(&self, i: usize, j: usize) -> (f64, f64) {
        let (dr, dz) = self.cell_width();
        (self.k_r2.0 + i as f64 * dr, self.k_z2.0 + j as f64 * dz)
    }
}

/// Classification of one raster cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MapCell {
    Unstable = 0,
    Stable = 1,
    /// The boundary passes through the cell.
    Marginal = 2,
}

impl MapCell {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityMap {
    pub grid: MapGrid,
    /// Row-major over `K_z²` outer, `K_r²` inner.
    pub cells: Vec<MapCell>,
}

impl StabilityMap {
    /// Evaluates every cell centre and corner; a cell whose five samples
    /// disagree is flagged marginal.
    pub fn compute(grid: MapGrid) -> Result<Self> {
        grid.validate()?;
        let (nr, nz) = (grid.n_r, grid.n_z);
        let corners: Vec<bool> = (0..(nr + 1) * (nz + 1))
            .into_par_iter()
            .map(|idx| {
                let (kr2, kz2) = grid.node(idx % (nr + 1), idx / (nr + 1));
                is_stable(&AdiabaticityPoint { k_r2: kr2, k_z2: kz2 })
            })
            .collect();
        let cells = (0..nr * nz)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx % nr, idx / nr);
                let (kr2, kz2) = grid.node(i, j);
                let (dr, dz) = grid.cell_width();
                let centre = is_stable(&AdiabaticityPoint {
                    k_r2: kr2 + 0.5 * dr,
                    k_z2: kz2 + 0.5 * dz,
                });
                let at = |a: usize, b: usize| corners[(j + b) * (nr + 1) + i + a];
                let samples = [at(0, 0), at(1, 0), at(0, 1), at(1, 1)];
                if samples.iter().any(|&s| s != centre) {
                    MapCell::Marginal
                } else if centre {
                    MapCell::Stable
                } else {
                    MapCell::Unstable
                }
            })
            .collect();
        Ok(StabilityMap { grid, cells })
    }

    /// Centre of cell `(i, j)`.
    pub fn centre(&self, i: usize, j: usize) -> AdiabaticityPoint {
        let (kr2, kz2) = self.grid.node(i, j);
        let (dr, dz) = self.grid.cell_width();
        AdiabaticityPoint {
            k_r2: kr2 + 0.5 * dr,
            k_z2: kz2 + 0.5 * dz,
        }
    }

    pub fn cell(&self, i: usize, j: usize) -> MapCell {
        self.cells[j * self.grid.n_r + i]
    }

    /// Iterates `(centre, cell)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (AdiabaticityPoint, MapCell)> + '_ {
        (0..self.grid.n_z).flat_map(move |j| (0..self.grid.n_r).map(move |i| (self.centre(i, j), self.cell(i, j))))
    }

    pub fn fraction(&self, kind: MapCell) -> f64 {
        self.cells.iter().filter(|&&c| c == kind).count() as f64 / self.cells.len() as f64
    }

    /// CSV with columns `K_r2,K_z2,stable`, one row per cell.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "K_r2,K_z2,stable")?;
        for (p, c) in self.iter() {
            writeln!(w, "{:.10e},{:.10e},{}", p.k_r2, p.k_z2, c.code())?;
        }
        Ok(())
    }
}

/// CSV with columns `t,K_r2,K_z2`.
pub fn write_boundary_csv<W: Write>(curve: &BoundaryCurve, mut w: W) -> std::io::Result<()> {
    writeln!(w, "t,K_r2,K_z2")?;
    for s in &curve.samples {
        writeln!(w, "{:.17e},{:.17e},{:.17e}", s.t, s.k_r2, s.k_z2)?;
    }
    Ok(())
}

/// A matplotlib script that draws the raster with the boundary curve on top.
pub fn plot_script(raster_csv: &str, boundary_csv: &str, figure: &str) -> String {
    format!(
        r##"import numpy as np
import matplotlib.pyplot as plt

raster = np.genfromtxt("{raster_csv}", delimiter=",", comments="#", names=True)
edge = np.genfromtxt("{boundary_csv}", delimiter=",", comments="#", names=True)

kr2 = np.unique(raster["K_r2"])
kz2 = np.unique(raster["K_z2"])
codes = raster["stable"].reshape(len(kz2), len(kr2))

fig, ax = plt.subplots(figsize=(5, 4))
ax.pcolormesh(kr2, kz2, codes, shading="nearest", cmap="RdYlGn", vmin=0, vmax=2)
ax.plot(edge["K_r2"], edge["K_z2"], "k-", lw=1.5)
ax.set_xlabel(r"$K_r^2$")
ax.set_ylabel(r"$K_z^2$")
ax.set_title("stable region")
fig.tight_layout()
fig.savefig("{figure}", dpi=150)
"##
    )
}

#[cfg(test)]
mod tests {
    use super::super::{boundary_curve, boundary_kr2};
    use super::*;

    #[test]
    fn standard_map_follows_boundary() {
        let map = StabilityMap::compute(MapGrid::standard(200)).unwrap();
        let (dr, dz) = map.grid.cell_width();
        for (p, c) in map.iter() {
            let inside = boundary_kr2(p.k_z2).is_some_and(|k| p.k_r2 <= k);
            match c {
                MapCell::Stable => assert!(inside, "{p:?}"),
                MapCell::Unstable => assert!(!inside, "{p:?}"),
                MapCell::Marginal => {
                    // some point of the curve within one cell of the centre
                    let near = boundary_curve(4001)
                        .samples
                        .iter()
                        .any(|s| (s.k_r2 - p.k_r2).abs() <= dr && (s.k_z2 - p.k_z2).abs() <= dz);
                    assert!(near, "{p:?}");
                }
            }
        }
    }

    #[test]
    fn sub_grids() {
        let inner = MapGrid {
            k_r2: (0.0, 0.01),
            k_z2: (0.0, 0.01),
            n_r: 20,
            n_z: 20,
        };
        assert_eq!(StabilityMap::compute(inner).unwrap().fraction(MapCell::Stable), 1.0);
        let outer = MapGrid {
            k_r2: (0.19, 0.2),
            k_z2: (0.55, 0.6),
            n_r: 20,
            n_z: 20,
        };
        assert_eq!(StabilityMap::compute(outer).unwrap().fraction(MapCell::Unstable), 1.0);
    }

    #[test]
    fn csv_rows_and_validation() {
        let map = StabilityMap::compute(MapGrid::standard(50)).unwrap();
        let mut buf = Vec::new();
        map.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2501);
        let bad = MapGrid {
            k_r2: (0.2, 0.1),
            ..MapGrid::standard(10)
        };
        assert!(StabilityMap::compute(bad).is_err());
        let script = plot_script("a.csv", "b.csv", "fig.png");
        assert!(script.contains("a.csv") && script.contains("fig.png"));
    }
}
