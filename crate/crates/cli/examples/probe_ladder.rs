//! Scratch probe: diagonalization discrepancy refinement ladder.

use dcmd_core::fields::{Orientation, PhysicalParams};
use dcmd_core::grid::Grid;
use dcmd_core::spectral::check_diagonalization;

fn main() {
    let params = PhysicalParams {
        alpha_f: 3.0,
        alpha_p: 3.5,
        beta_f: 0.6,
        beta_p: 0.7,
        gamma_f: 0.2,
        gamma_p: 0.1,
        orientation: Orientation::CoCurrent,
    };
    for (nx, ny, dt) in [(11, 21, 0.02), (21, 41, 0.005), (41, 81, 0.00125)] {
        let grid = Grid::new(nx, ny, 2.0).unwrap();
        let gap = check_diagonalization(&params, &grid, 0.25, dt).unwrap();
        println!("{nx}x{ny} dt={dt}: discrepancy {gap:.6e}");
    }
}
