//! Stationary solutions of the coupled elliptic system and settling-rate
//! estimation for transients that approach them.

use crate::error::{Error, Result};
use crate::fields::{weighted_norm, FieldPair, Orientation, PhysicalParams};
use crate::grid::{Grid, SegmentTag};
use crate::pde::assemble::{assemble, DiscreteOperator};
use crate::pde::bc::{BcSpec, BoundaryData};
use crate::pde::linsolve::{BiCgStab, CsrBuilder, CsrMatrix};

/// Stationary matrix: `-A` on free rows, identity on Dirichlet rows, so that
/// `S x = rhs_from_data` is the discrete elliptic system.
fn stationary_matrix(op: &DiscreteOperator) -> CsrMatrix {
    let n = op.n_unknowns();
    let mut builder = CsrBuilder::new(n);
    for r in 0..n {
        if op.is_dirichlet_row(r) {
            builder.add(r, r, 1.0);
        } else {
            let (cols, vals) = op.matrix().row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                builder.add(r, c, -v);
            }
        }
    }
    builder.build()
}

/// Solve the stationary problem of an assembled operator with the given
/// boundary samples. Iterative refinement pushes the residual toward the
/// attainable floor.
pub fn solve_stationary(op: &DiscreteOperator, data: &BoundaryData) -> Result<FieldPair> {
    let system = stationary_matrix(op);
    let b = op.rhs_from_data(data);
    let solver = BiCgStab::new(&system)?;
    let mut x = vec![0.0; system.n()];
    let max_iter = (40 * system.n()).max(2000);
    solver.solve(&system, &b, &mut x, 1e-11, max_iter)?;
    for _ in 0..2 {
        let r: Vec<f64> = {
            let ax = system.mul_vec_alloc(&x);
            b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
        };
        let mut dx = vec![0.0; system.n()];
        if solver.solve(&system, &r, &mut dx, 1e-2, 500).is_ok() {
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
        }
    }
    for r in 0..system.n() {
        if op.is_dirichlet_row(r) {
            x[r] = b[r];
        }
    }
    let w = FieldPair::unpack(&x);
    if !w.is_finite() {
        return Err(Error::NonFinite("stationary solve"));
    }
    Ok(w)
}

/// Weighted norm of the elliptic residual `A x + rhs` of a candidate
/// stationary state (Dirichlet rows measure the data mismatch instead).
pub fn stationary_residual(
    op: &DiscreteOperator,
    data: &BoundaryData,
    w: &FieldPair,
) -> Result<f64> {
    let x = w.pack();
    let ax = op.apply(&x);
    let rhs = op.rhs_from_data(data);
    let n = op.n_unknowns();
    let mut res = vec![0.0; n];
    for r in 0..n {
        res[r] = if op.is_dirichlet_row(r) {
            x[r] - rhs[r]
        } else {
            ax[r] + rhs[r]
        };
    }
    weighted_norm(&FieldPair::unpack(&res), op.grid(), op.params())
}

/// Solve the inlet-temperature stationary system: Dirichlet `T_f` on the
/// feed inlet `Gamma1`, Dirichlet `T_p` on the permeate inlet (`Gamma3`
/// counter-current, `Gamma1` co-current), insulated elsewhere, membrane
/// Robin coupling on `Gamma4`.
pub fn solve_steady(
    grid: &Grid,
    params: &PhysicalParams,
    t_f: &[f64],
    t_p: &[f64],
) -> Result<FieldPair> {
    params.validate()?;
    let nx = grid.nx();
    if t_f.len() != nx {
        return Err(Error::SizeMismatch {
            what: "feed inlet trace",
            expected: nx,
            got: t_f.len(),
        });
    }
    if t_p.len() != nx {
        return Err(Error::SizeMismatch {
            what: "permeate inlet trace",
            expected: nx,
            got: t_p.len(),
        });
    }
    let bc = BcSpec::physical_inlets(params.orientation, 0.0, 0.0);
    let op = assemble(grid, params, &bc)?;
    let mut data = BoundaryData::zeros(grid);
    data.set(SegmentTag::Gamma1, 0, t_f.to_vec())?;
    let p_inlet = match params.orientation {
        Orientation::CounterCurrent => SegmentTag::Gamma3,
        Orientation::CoCurrent => SegmentTag::Gamma1,
    };
    data.set(p_inlet, 1, t_p.to_vec())?;
    solve_stationary(&op, &data)
}

/// Outcome of a settling-rate measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SettlingRate {
    /// `||w(t) - w_inf||` fits `C e^{-rate t}`; positive rate means decay.
    Decay { rate: f64, r_squared: f64 },
    /// The gap is already at the numerical floor; no rate can be measured.
    Saturated,
}

/// Least-squares decay rate of `log ||w(t) - reference||_w` over the tail of
/// a sampled trajectory. The first fifth of the samples is discarded as
/// transient; at least 10 samples must remain.
pub fn settling_rate(
    samples: &[(f64, FieldPair)],
    reference: &FieldPair,
    grid: &Grid,
    params: &PhysicalParams,
) -> Result<SettlingRate> {
    let skip = samples.len() / 5;
    let tail = &samples[skip..];
    if tail.len() < 10 {
        return Err(Error::InvalidParams(format!(
            "settling_rate needs at least 10 samples after the transient window, got {}",
            tail.len()
        )));
    }
    let mut pts = Vec::with_capacity(tail.len());
    for (t, w) in tail {
        let gap = weighted_norm(&w.sub(reference), grid, params)?;
        if gap < 1e-13 {
            return Ok(SettlingRate::Saturated);
        }
        pts.push((*t, gap.ln()));
    }
    let n = pts.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y) in &pts {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let denom = (n * sxx - sx * sx) * (n * syy - sy * sy);
    let r_squared = if denom > 0.0 {
        let r = (n * sxy - sx * sy) / denom.sqrt();
        r * r
    } else {
        1.0
    };
    Ok(SettlingRate::Decay {
        rate: -slope,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::weighted_norm;
    use crate::pde::stepping::BackwardEulerStepper;

    fn constant_trace(grid: &Grid, v: f64) -> Vec<f64> {
        vec![v; grid.nx()]
    }

    #[test]
    fn equal_inlets_give_constant_state() {
        for orientation in [Orientation::CounterCurrent, Orientation::CoCurrent] {
            let grid = Grid::new(9, 17, 2.0).unwrap();
            let mut params = PhysicalParams::reference();
            params.orientation = orientation;
            let c = 42.0;
            let w = solve_steady(
                &grid,
                &params,
                &constant_trace(&grid, c),
                &constant_trace(&grid, c),
            )
            .unwrap();
            for v in w.f.iter().chain(w.p.iter()) {
                assert!((v - c).abs() < 1e-7, "{v} vs {c}");
            }
        }
    }

    #[test]
    fn zero_inlets_give_zero_state() {
        let grid = Grid::new(9, 17, 2.0).unwrap();
        let params = PhysicalParams::reference();
        let w = solve_steady(
            &grid,
            &params,
            &constant_trace(&grid, 0.0),
            &constant_trace(&grid, 0.0),
        )
        .unwrap();
        for v in w.f.iter().chain(w.p.iter()) {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn trace_length_is_checked() {
        let grid = Grid::new(9, 17, 2.0).unwrap();
        let params = PhysicalParams::reference();
        assert!(solve_steady(&grid, &params, &[0.0; 3], &constant_trace(&grid, 0.0)).is_err());
    }

    #[test]
    fn residual_of_steady_solution_is_tiny() {
        let grid = Grid::new(11, 21, 2.0).unwrap();
        let mut params = PhysicalParams::reference();
        params.orientation = Orientation::CounterCurrent;
        let w = solve_steady(
            &grid,
            &params,
            &constant_trace(&grid, 60.0),
            &constant_trace(&grid, 20.0),
        )
        .unwrap();

        let bc = BcSpec::physical_inlets(params.orientation, 0.0, 0.0);
        let op = assemble(&grid, &params, &bc).unwrap();
        let mut data = BoundaryData::zeros(&grid);
        data.set(SegmentTag::Gamma1, 0, constant_trace(&grid, 60.0))
            .unwrap();
        data.set(SegmentTag::Gamma3, 1, constant_trace(&grid, 20.0))
            .unwrap();
        let res = stationary_residual(&op, &data, &w).unwrap();
        assert!(res <= 1e-9, "weighted residual {res}");
    }

    #[test]
    fn hot_feed_dominates_cold_permeate_nodewise() {
        // long-time transient oracle at modest resolution
        let grid = Grid::new(11, 21, 2.0).unwrap();
        let mut params = PhysicalParams::reference();
        params.orientation = Orientation::CounterCurrent;
        let steady = solve_steady(
            &grid,
            &params,
            &constant_trace(&grid, 60.0),
            &constant_trace(&grid, 20.0),
        )
        .unwrap();
        for (f, p) in steady.f.iter().zip(&steady.p) {
            assert!(f >= p, "feed {f} below permeate {p}");
        }

        let bc = BcSpec::physical_inlets(params.orientation, 60.0, 20.0);
        let op = assemble(&grid, &params, &bc).unwrap();
        let mut stepper = BackwardEulerStepper::new(op, 0.2).unwrap();
        let mut w = FieldPair::from_fn(&grid, |x, y| {
            (30.0 + 10.0 * (5.0 * x + y).sin(), 30.0 - 8.0 * (3.0 * x * y).cos())
        });
        let mut gaps = Vec::new();
        for n in 0..400 {
            w = stepper.step(&w, n as f64 * 0.2).unwrap();
            gaps.push(weighted_norm(&w.sub(&steady), &grid, &params).unwrap());
        }
        let final_gap = *gaps.last().unwrap();
        assert!(final_gap <= 1e-6, "transient did not settle: gap {final_gap}");
        // monotone settling after the first few steps
        for k in 5..gaps.len() - 1 {
            assert!(
                gaps[k + 1] <= gaps[k] * (1.0 + 1e-10),
                "gap grew at step {k}: {} -> {}",
                gaps[k],
                gaps[k + 1]
            );
        }
    }

    #[test]
    fn settling_rate_recovers_synthetic_exponential() {
        let grid = Grid::new(5, 5, 1.0).unwrap();
        let params = PhysicalParams::reference();
        let reference = FieldPair::zeros(&grid);
        let shape = FieldPair::from_fn(&grid, |x, y| (1.0 + x, 1.0 + y));
        let samples: Vec<(f64, FieldPair)> = (0..40)
            .map(|n| {
                let t = n as f64 * 0.1;
                let scale = (-2.0 * t).exp();
                let w = FieldPair {
                    f: shape.f.iter().map(|v| v * scale).collect(),
                    p: shape.p.iter().map(|v| v * scale).collect(),
                };
                (t, w)
            })
            .collect();
        match settling_rate(&samples, &reference, &grid, &params).unwrap() {
            SettlingRate::Decay { rate, r_squared } => {
                assert!((rate - 2.0).abs() < 1e-6, "rate {rate}");
                assert!(r_squared > 0.999999);
            }
            SettlingRate::Saturated => panic!("unexpected saturation"),
        }
    }

    #[test]
    fn settling_rate_reports_saturation() {
        let grid = Grid::new(5, 5, 1.0).unwrap();
        let params = PhysicalParams::reference();
        let reference = FieldPair::constant(&grid, 1.0, -1.0);
        let samples: Vec<(f64, FieldPair)> =
            (0..20).map(|n| (n as f64, reference.clone())).collect();
        assert_eq!(
            settling_rate(&samples, &reference, &grid, &params).unwrap(),
            SettlingRate::Saturated
        );
    }

    #[test]
    fn settling_rate_needs_enough_samples() {
        let grid = Grid::new(5, 5, 1.0).unwrap();
        let params = PhysicalParams::reference();
        let reference = FieldPair::zeros(&grid);
        let samples: Vec<(f64, FieldPair)> = (0..5)
            .map(|n| (n as f64, FieldPair::constant(&grid, 1.0, 1.0)))
            .collect();
        assert!(settling_rate(&samples, &reference, &grid, &params).is_err());
    }
}
