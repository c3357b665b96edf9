use dcmd_core::adrc::{run_closed_loop, Scenario};
use dcmd_core::fields::{BoundarySignal, FieldPair, PhysicalParams};
use dcmd_core::grid::{Grid, SegmentTag};

fn main() {
    let grid = Grid::new(11, 21, 2.0).unwrap();
    let params = PhysicalParams::reference();
    use std::f64::consts::PI;
    let w0 = FieldPair::from_fn(&grid, |x, y| {
        (6.0 * (PI * x).sin() * (PI / 4.0 * y).cos(), 3.0 * (PI / 2.0 * x).sin() * (PI / 4.0 * y).cos())
    });
    let what0 = FieldPair::from_fn(&grid, |x, y| {
        (5.0 * (PI * x).sin() * (PI / 8.0 * y).cos(), 2.5 * (PI * x).sin() * (PI / 4.0 * y).cos())
    });
    let v0 = FieldPair::from_fn(&grid, |x, y| {
        (4.0 * (PI / 2.0 * x).sin() * (PI / 4.0 * y).cos(), 3.5 * (PI / 2.0 * x).sin() * (PI / 8.0 * y).cos())
    });
    let scn = Scenario::new(
        grid,
        params,
        BoundarySignal::new(SegmentTag::Gamma1, |t, _| {
            let v = 0.1 * (PI / 2.0 * t).sin();
            (v, v)
        }),
        BoundarySignal::new(SegmentTag::Gamma3, |t, x| {
            let decay = (-0.8 * t).exp();
            (15.0 * (PI / 2.0 * x * t).sin() * decay, 10.0 * (PI / 2.0 * x * t).sin() * decay)
        }),
        w0, what0, v0,
        14.0, 0.005,
    );
    let out = run_closed_loop(&scn).unwrap();
    let peak = out.metrics.iter().map(|m| m.tracking_error).fold(0.0f64, f64::max);
    let late: Vec<f64> = out.metrics.iter().filter(|m| m.t >= 12.0).map(|m| m.tracking_error).collect();
    let late_mean = late.iter().sum::<f64>() / late.len() as f64;
    println!("peak {peak:.4}, late mean {late_mean:.4}, ratio {:.4}", late_mean / peak);
    for m in out.metrics.iter().step_by(400) {
        println!("t={:5.2} e={:.4}", m.t, m.tracking_error);
    }
}
