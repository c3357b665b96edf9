//! The output-tracking architecture: plant with an unknown inlet flux
//! disturbance, extended state observer driven by the inlet measurement,
//! servomechanism carrying the reference, the one-sided feedback law, and
//! the closed-loop orchestrator.
//!
//! One loop iteration advances all three subsystems from `t` to `t + dt`
//! with the control flux frozen from the servo state at `t`. The measurement
//! `y_m = w|_{Gamma1} + noise` is taken at `t + dt` (fully implicit Dirichlet
//! data), which makes the discrete observer-error system autonomous: it sees
//! homogeneous data regardless of the disturbance or reference.

use crate::error::{Error, Result};
use crate::fields::{
    normal_derivative, trace, weighted_norm, BoundarySignal, FieldPair, PhysicalParams,
};
use crate::grid::{Grid, SegmentTag};
use crate::pde::assemble::assemble;
use crate::pde::bc::{BcSpec, BoundaryData};
use crate::pde::linsolve::DEFAULT_RTOL;
use crate::pde::stepping::BackwardEulerStepper;

/// Closed-loop problem description.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: Grid,
    pub params: PhysicalParams,
    /// Unknown flux on `Gamma1` applied to the plant.
    pub disturbance: BoundarySignal,
    /// Reference the `Gamma3` trace should track.
    pub reference: BoundarySignal,
    /// Measurement noise added to the `Gamma1` trace (zero by default).
    pub noise: BoundarySignal,
    pub plant0: FieldPair,
    pub observer0: FieldPair,
    pub servo0: FieldPair,
    pub horizon: f64,
    pub dt: f64,
    /// Relative residual tolerance of the implicit solves.
    pub solver_rtol: f64,
}

impl Scenario {
    pub fn new(
        grid: Grid,
        params: PhysicalParams,
        disturbance: BoundarySignal,
        reference: BoundarySignal,
        plant0: FieldPair,
        observer0: FieldPair,
        servo0: FieldPair,
        horizon: f64,
        dt: f64,
    ) -> Self {
        Scenario {
            grid,
            params,
            disturbance,
            reference,
            noise: BoundarySignal::zero(SegmentTag::Gamma1),
            plant0,
            observer0,
            servo0,
            horizon,
            dt,
            solver_rtol: DEFAULT_RTOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidScenario(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if self.horizon < self.dt {
            return Err(Error::InvalidScenario(format!(
                "horizon {} is shorter than one step {}",
                self.horizon, self.dt
            )));
        }
        if self.disturbance.segment() != SegmentTag::Gamma1 {
            return Err(Error::InvalidScenario(
                "disturbance must live on Gamma1".to_string(),
            ));
        }
        if self.reference.segment() != SegmentTag::Gamma3 {
            return Err(Error::InvalidScenario(
                "reference must live on Gamma3".to_string(),
            ));
        }
        if self.noise.segment() != SegmentTag::Gamma1 {
            return Err(Error::InvalidScenario(
                "noise must live on Gamma1".to_string(),
            ));
        }
        for (name, w) in [
            ("plant", &self.plant0),
            ("observer", &self.observer0),
            ("servo", &self.servo0),
        ] {
            if !w.matches(&self.grid) {
                return Err(Error::InvalidScenario(format!(
                    "{name} initial state does not match the grid"
                )));
            }
            if !w.is_finite() {
                return Err(Error::InvalidScenario(format!(
                    "{name} initial state contains non-finite values"
                )));
            }
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt).round().max(1.0) as usize
    }
}

/// States and derived quantities at one time.
#[derive(Debug, Clone)]
pub struct ClosedLoopState {
    pub t: f64,
    pub plant: FieldPair,
    pub observer: FieldPair,
    pub servo: FieldPair,
    /// Control flux on `Gamma3` from the current servo state.
    pub control: Vec<f64>,
    /// Disturbance estimate on `Gamma1` from the current observer state.
    pub disturbance_estimate: (Vec<f64>, Vec<f64>),
}

/// Per-step diagnostics, all boundary norms trapezoidal, domain norms in the
/// weighted metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub t: f64,
    /// `||w|_{Gamma3} - r(t)||` over both components.
    pub tracking_error: f64,
    /// `||w - w_hat||` over the domain.
    pub observer_error: f64,
    /// `||w_hat - v||` over the domain.
    pub servo_gap: f64,
    /// `||d(t) - d_hat||` on `Gamma1` over both components.
    pub disturbance_error: f64,
    /// `||u_1||` on `Gamma3`.
    pub control_norm: f64,
}

impl MetricsRow {
    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.tracking_error,
            self.observer_error,
            self.servo_gap,
            self.disturbance_error,
            self.control_norm,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Output of [`run_closed_loop`]: one metrics row per time level
/// (`n_steps + 1` rows) and the final state.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub metrics: Vec<MetricsRow>,
    pub final_state: ClosedLoopState,
}

/// Feedback law: the outward normal derivative of the servo's first
/// component on `Gamma3`. The second control component is structurally zero.
pub fn compute_control(v: &FieldPair, grid: &Grid) -> Result<Vec<f64>> {
    let (df, _) = normal_derivative(v, &grid.segment(SegmentTag::Gamma3))?;
    Ok(df)
}

/// Disturbance estimate: the outward normal derivative of the observer state
/// on `Gamma1`, both components.
pub fn estimate_disturbance(observer: &FieldPair, grid: &Grid) -> Result<(Vec<f64>, Vec<f64>)> {
    normal_derivative(observer, &grid.segment(SegmentTag::Gamma1))
}

fn plant_bc() -> BcSpec {
    BcSpec::plant(
        BoundarySignal::zero(SegmentTag::Gamma1),
        BoundarySignal::zero(SegmentTag::Gamma3),
    )
    .expect("static configuration")
}

fn observer_bc() -> BcSpec {
    BcSpec::observer(
        BoundarySignal::zero(SegmentTag::Gamma1),
        BoundarySignal::zero(SegmentTag::Gamma3),
    )
    .expect("static configuration")
}

fn servo_bc() -> BcSpec {
    BcSpec::servo(
        BoundarySignal::zero(SegmentTag::Gamma1),
        BoundarySignal::zero(SegmentTag::Gamma3),
    )
    .expect("static configuration")
}

fn plant_data(grid: &Grid, u1: &[f64], d: (&[f64], &[f64])) -> Result<BoundaryData> {
    let mut data = BoundaryData::zeros(grid);
    data.set_pair(SegmentTag::Gamma1, d.0.to_vec(), d.1.to_vec())?;
    data.set(SegmentTag::Gamma3, 0, u1.to_vec())?;
    Ok(data)
}

fn observer_data(grid: &Grid, u1: &[f64], ym: (&[f64], &[f64])) -> Result<BoundaryData> {
    let mut data = BoundaryData::zeros(grid);
    data.set_pair(SegmentTag::Gamma1, ym.0.to_vec(), ym.1.to_vec())?;
    data.set(SegmentTag::Gamma3, 0, u1.to_vec())?;
    Ok(data)
}

fn servo_data(grid: &Grid, r: (&[f64], &[f64]), obs_g1: (&[f64], &[f64])) -> Result<BoundaryData> {
    let mut data = BoundaryData::zeros(grid);
    data.set_pair(SegmentTag::Gamma1, obs_g1.0.to_vec(), obs_g1.1.to_vec())?;
    data.set_pair(SegmentTag::Gamma3, r.0.to_vec(), r.1.to_vec())?;
    Ok(data)
}

/// One implicit plant step with explicit control and disturbance traces.
pub fn step_plant(
    state: &FieldPair,
    u1: &[f64],
    d: (&[f64], &[f64]),
    params: &PhysicalParams,
    grid: &Grid,
    dt: f64,
) -> Result<FieldPair> {
    let op = assemble(grid, params, &plant_bc())?;
    let mut stepper = BackwardEulerStepper::new(op, dt)?;
    stepper.step_with(state, &plant_data(grid, u1, d)?, None)
}

/// One implicit observer step with explicit control and measured traces.
pub fn step_observer(
    state: &FieldPair,
    u1: &[f64],
    ym: (&[f64], &[f64]),
    params: &PhysicalParams,
    grid: &Grid,
    dt: f64,
) -> Result<FieldPair> {
    let op = assemble(grid, params, &observer_bc())?;
    let mut stepper = BackwardEulerStepper::new(op, dt)?;
    stepper.step_with(state, &observer_data(grid, u1, ym)?, None)
}

/// One implicit servo step with explicit reference and observer traces.
pub fn step_servo(
    state: &FieldPair,
    r: (&[f64], &[f64]),
    observer_g1: (&[f64], &[f64]),
    params: &PhysicalParams,
    grid: &Grid,
    dt: f64,
) -> Result<FieldPair> {
    let op = assemble(grid, params, &servo_bc())?;
    let mut stepper = BackwardEulerStepper::new(op, dt)?;
    stepper.step_with(state, &servo_data(grid, r, observer_g1)?, None)
}

fn pair_boundary_norm(seg: &crate::grid::BoundarySegment, a: &[f64], b: &[f64]) -> Result<f64> {
    let na = seg.l2_norm(a)?;
    let nb = seg.l2_norm(b)?;
    Ok((na * na + nb * nb).sqrt())
}

/// Run the closed loop over the scenario horizon.
///
/// Per step: the control is computed from the servo state at `t` and applied
/// to all three subsystems; the plant advances under the disturbance; the
/// measurement at `t + dt` (plus noise) supplies the Dirichlet data of the
/// observer and the servo; metrics are recorded at every time level.
pub fn run_closed_loop(scn: &Scenario) -> Result<RunResult> {
    let (result, _) = run_closed_loop_with_snapshots(scn, &[])?;
    Ok(result)
}

/// Like [`run_closed_loop`], additionally capturing the plant field at the
/// time levels nearest to the requested times.
pub fn run_closed_loop_with_snapshots(
    scn: &Scenario,
    snapshot_times: &[f64],
) -> Result<(RunResult, Vec<(f64, FieldPair)>)> {
    scn.validate()?;
    let grid = &scn.grid;
    let g1 = grid.segment(SegmentTag::Gamma1);
    let g3 = grid.segment(SegmentTag::Gamma3);

    let max_iter = (20 * 2 * grid.n_nodes()).max(2000);
    let mut plant_stepper = BackwardEulerStepper::with_tolerance(
        assemble(grid, &scn.params, &plant_bc())?,
        scn.dt,
        scn.solver_rtol,
        max_iter,
    )?;
    let mut observer_stepper = BackwardEulerStepper::with_tolerance(
        assemble(grid, &scn.params, &observer_bc())?,
        scn.dt,
        scn.solver_rtol,
        max_iter,
    )?;
    let mut servo_stepper = BackwardEulerStepper::with_tolerance(
        assemble(grid, &scn.params, &servo_bc())?,
        scn.dt,
        scn.solver_rtol,
        max_iter,
    )?;

    let mut w = scn.plant0.clone();
    let mut what = scn.observer0.clone();
    let mut v = scn.servo0.clone();

    let n_steps = scn.n_steps();
    let mut metrics = Vec::with_capacity(n_steps + 1);

    let snapshot_steps: Vec<usize> = snapshot_times
        .iter()
        .map(|&t| ((t / scn.dt).round().max(0.0) as usize).min(n_steps))
        .collect();
    let mut snapshots: Vec<(f64, FieldPair)> = Vec::with_capacity(snapshot_steps.len());
    let capture = |n: usize, t: f64, w: &FieldPair, out: &mut Vec<(f64, FieldPair)>| {
        for &s in &snapshot_steps {
            if s == n {
                out.push((t, w.clone()));
            }
        }
    };

    let record = |t: f64, w: &FieldPair, what: &FieldPair, v: &FieldPair| -> Result<MetricsRow> {
        let u1 = compute_control(v, grid)?;
        let (yr_f, yr_p) = trace(w, &g3)?;
        let (r_f, r_p) = scn.reference.sample(&g3, t);
        let ef: Vec<f64> = yr_f.iter().zip(&r_f).map(|(a, b)| a - b).collect();
        let ep: Vec<f64> = yr_p.iter().zip(&r_p).map(|(a, b)| a - b).collect();
        let tracking_error = pair_boundary_norm(&g3, &ef, &ep)?;

        let observer_error = weighted_norm(&w.sub(what), grid, &scn.params)?;
        let servo_gap = weighted_norm(&what.sub(v), grid, &scn.params)?;

        let (dhat_f, dhat_p) = estimate_disturbance(what, grid)?;
        let (d_f, d_p) = scn.disturbance.sample(&g1, t);
        let df: Vec<f64> = d_f.iter().zip(&dhat_f).map(|(a, b)| a - b).collect();
        let dp: Vec<f64> = d_p.iter().zip(&dhat_p).map(|(a, b)| a - b).collect();
        let disturbance_error = pair_boundary_norm(&g1, &df, &dp)?;

        let control_norm = g3.l2_norm(&u1)?;
        let row = MetricsRow {
            t,
            tracking_error,
            observer_error,
            servo_gap,
            disturbance_error,
            control_norm,
        };
        if !row.is_finite() {
            return Err(Error::NonFinite("closed-loop metrics"));
        }
        Ok(row)
    };

    metrics.push(record(0.0, &w, &what, &v)?);
    capture(0, 0.0, &w, &mut snapshots);

    for n in 0..n_steps {
        let t_next = (n + 1) as f64 * scn.dt;
        let fail = |subsystem: &'static str| {
            move |e: Error| Error::StepFailed {
                subsystem,
                step: n,
                source: Box::new(e),
            }
        };

        // control frozen from the servo state at time t
        let u1 = compute_control(&v, grid)?;

        // plant under the true disturbance
        let (d_f, d_p) = scn.disturbance.sample(&g1, t_next);
        w = plant_stepper
            .step_with(&w, &plant_data(grid, &u1, (&d_f, &d_p))?, None)
            .map_err(fail("plant"))?;

        // measurement at the new time feeds observer and servo
        let (mut ym_f, mut ym_p) = trace(&w, &g1)?;
        let (noise_f, noise_p) = scn.noise.sample(&g1, t_next);
        for (m, s) in ym_f.iter_mut().zip(&noise_f) {
            *m += s;
        }
        for (m, s) in ym_p.iter_mut().zip(&noise_p) {
            *m += s;
        }

        what = observer_stepper
            .step_with(&what, &observer_data(grid, &u1, (&ym_f, &ym_p))?, None)
            .map_err(fail("observer"))?;

        let (r_f, r_p) = scn.reference.sample(&g3, t_next);
        v = servo_stepper
            .step_with(&v, &servo_data(grid, (&r_f, &r_p), (&ym_f, &ym_p))?, None)
            .map_err(fail("servo"))?;

        metrics.push(record(t_next, &w, &what, &v)?);
        capture(n + 1, t_next, &w, &mut snapshots);
    }

    let t_final = n_steps as f64 * scn.dt;
    let control = compute_control(&v, grid)?;
    let disturbance_estimate = estimate_disturbance(&what, grid)?;
    Ok((
        RunResult {
            metrics,
            final_state: ClosedLoopState {
                t: t_final,
                plant: w,
                observer: what,
                servo: v,
                control,
                disturbance_estimate,
            },
        },
        snapshots,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Orientation;

    fn small_grid() -> Grid {
        Grid::new(9, 17, 2.0).unwrap()
    }

    fn zero_scenario(grid: Grid) -> Scenario {
        Scenario::new(
            grid,
            PhysicalParams::reference(),
            BoundarySignal::zero(SegmentTag::Gamma1),
            BoundarySignal::zero(SegmentTag::Gamma3),
            FieldPair::zeros(&grid),
            FieldPair::zeros(&grid),
            FieldPair::zeros(&grid),
            0.1,
            0.01,
        )
    }

    #[test]
    fn all_zero_scenario_stays_identically_zero() {
        let out = run_closed_loop(&zero_scenario(small_grid())).unwrap();
        assert_eq!(out.metrics.len(), 11);
        for row in &out.metrics {
            assert_eq!(row.tracking_error, 0.0);
            assert_eq!(row.observer_error, 0.0);
            assert_eq!(row.servo_gap, 0.0);
            assert_eq!(row.disturbance_error, 0.0);
            assert_eq!(row.control_norm, 0.0);
        }
    }

    #[test]
    fn control_of_constant_servo_state_vanishes() {
        let grid = small_grid();
        let v = FieldPair::constant(&grid, 3.0, -2.0);
        let u = compute_control(&v, &grid).unwrap();
        assert!(u.iter().all(|&x| x.abs() < 1e-12));
    }

    #[test]
    fn control_of_linear_servo_state_is_exact() {
        let grid = small_grid();
        let v = FieldPair::from_fn(&grid, |_, y| (y, 0.0));
        let u = compute_control(&v, &grid).unwrap();
        assert!(u.iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn disturbance_estimate_of_constant_observer_vanishes() {
        let grid = small_grid();
        let what = FieldPair::constant(&grid, 7.0, 7.0);
        let (df, dp) = estimate_disturbance(&what, &grid).unwrap();
        assert!(df.iter().chain(dp.iter()).all(|&x| x.abs() < 1e-12));
    }

    #[test]
    fn scenario_validation_catches_misplaced_signals() {
        let grid = small_grid();
        let mut scn = zero_scenario(grid);
        scn.disturbance = BoundarySignal::zero(SegmentTag::Gamma3);
        assert!(matches!(
            run_closed_loop(&scn),
            Err(Error::InvalidScenario(_))
        ));

        let mut scn = zero_scenario(grid);
        scn.dt = -0.5;
        assert!(run_closed_loop(&scn).is_err());
    }

    #[test]
    fn identical_initial_states_track_without_disturbance() {
        let grid = small_grid();
        let w0 = FieldPair::from_fn(&grid, |x, y| ((x + y).sin(), (x * y).cos()));
        let mut scn = zero_scenario(grid);
        scn.plant0 = w0.clone();
        scn.observer0 = w0.clone();
        scn.servo0 = FieldPair::zeros(&grid);
        scn.horizon = 0.2;
        scn.dt = 0.01;
        let out = run_closed_loop(&scn).unwrap();
        for row in &out.metrics {
            assert!(
                row.observer_error < 1e-8,
                "observer diverged at t={}: {}",
                row.t,
                row.observer_error
            );
        }
    }

    #[test]
    fn plant_step_dissipates_without_inputs() {
        let grid = small_grid();
        let params = PhysicalParams {
            orientation: Orientation::CoCurrent,
            ..PhysicalParams::reference()
        };
        let zeros = vec![0.0; grid.nx()];
        let mut w = FieldPair::from_fn(&grid, |x, y| ((9.1 * x * y).sin(), (x - 2.0 * y).cos()));
        let mut prev = weighted_norm(&w, &grid, &params).unwrap();
        for _ in 0..4 {
            w = step_plant(&w, &zeros, (&zeros, &zeros), &params, &grid, 0.05).unwrap();
            let cur = weighted_norm(&w, &grid, &params).unwrap();
            assert!(cur < prev, "norm must strictly decrease: {prev} -> {cur}");
            prev = cur;
        }
    }
}
