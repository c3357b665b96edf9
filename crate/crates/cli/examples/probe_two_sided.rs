//! Scratch probe: what the tracking error looks like when BOTH components of
//! the servo's normal derivative are fed back (instead of (u1, 0)).

use dcmd_core::fields::{normal_derivative, trace, BoundarySignal};
use dcmd_core::grid::SegmentTag;
use dcmd_core::pde::{assemble, BackwardEulerStepper, BcSpec, BoundaryData};
use dcmd_core::scenario::{ScenarioConfig, PAPER_CI_PRESET};

fn main() {
    let cfg = ScenarioConfig::from_toml_str(PAPER_CI_PRESET).unwrap();
    let scn = cfg.build().unwrap();
    let grid = scn.grid;
    let params = scn.params;
    let g1 = grid.segment(SegmentTag::Gamma1);
    let g3 = grid.segment(SegmentTag::Gamma3);
    let dt = scn.dt;

    let plant_bc = BcSpec::plant(
        BoundarySignal::zero(SegmentTag::Gamma1),
        BoundarySignal::zero(SegmentTag::Gamma3),
    )
    .unwrap();
    let obs_bc = BcSpec::observer(
        BoundarySignal::zero(SegmentTag::Gamma1),
        BoundarySignal::zero(SegmentTag::Gamma3),
    )
    .unwrap();
    let servo_bc = BcSpec::servo(
        BoundarySignal::zero(SegmentTag::Gamma1),
        BoundarySignal::zero(SegmentTag::Gamma3),
    )
    .unwrap();

    let mut plant = BackwardEulerStepper::new(assemble(&grid, &params, &plant_bc).unwrap(), dt).unwrap();
    let mut obs = BackwardEulerStepper::new(assemble(&grid, &params, &obs_bc).unwrap(), dt).unwrap();
    let mut servo = BackwardEulerStepper::new(assemble(&grid, &params, &servo_bc).unwrap(), dt).unwrap();

    let mut w = scn.plant0.clone();
    let mut what = scn.observer0.clone();
    let mut v = scn.servo0.clone();

    for n in 0..scn.n_steps() {
        let t_next = (n + 1) as f64 * dt;
        // two-sided feedback: both components of the servo's outlet flux
        let (u1, u2) = normal_derivative(&v, &g3).unwrap();
        let (d_f, d_p) = scn.disturbance.sample(&g1, t_next);

        let mut pd = BoundaryData::zeros(&grid);
        pd.set_pair(SegmentTag::Gamma1, d_f, d_p).unwrap();
        pd.set_pair(SegmentTag::Gamma3, u1.clone(), u2.clone()).unwrap();
        w = plant.step_with(&w, &pd, None).unwrap();

        let (ym_f, ym_p) = trace(&w, &g1).unwrap();
        let mut od = BoundaryData::zeros(&grid);
        od.set_pair(SegmentTag::Gamma1, ym_f.clone(), ym_p.clone()).unwrap();
        od.set_pair(SegmentTag::Gamma3, u1, u2).unwrap();
        what = obs.step_with(&what, &od, None).unwrap();

        let (r_f, r_p) = scn.reference.sample(&g3, t_next);
        let mut sd = BoundaryData::zeros(&grid);
        sd.set_pair(SegmentTag::Gamma1, ym_f, ym_p).unwrap();
        sd.set_pair(SegmentTag::Gamma3, r_f.clone(), r_p.clone()).unwrap();
        v = servo.step_with(&v, &sd, None).unwrap();

        if (n + 1) % 500 == 0 {
            let (yf, yp) = trace(&w, &g3).unwrap();
            let ef: Vec<f64> = yf.iter().zip(&r_f).map(|(a, b)| a - b).collect();
            let ep: Vec<f64> = yp.iter().zip(&r_p).map(|(a, b)| a - b).collect();
            let nef = g3.l2_norm(&ef).unwrap();
            let nep = g3.l2_norm(&ep).unwrap();
            println!("t={t_next:5.2}  e_f={nef:9.4}  e_p={nep:9.4}");
        }
    }
}
