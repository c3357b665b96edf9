//! Backward Euler time stepping: `(I - dt*A) w+ = w + dt*(data terms)` with
//! Dirichlet rows pinned to the data at the target time.

use crate::error::{Error, Result};
use crate::fields::FieldPair;
use crate::pde::assemble::DiscreteOperator;
use crate::pde::bc::BoundaryData;
use crate::pde::linsolve::{BiCgStab, CsrBuilder, CsrMatrix, SolveStats, DEFAULT_RTOL};

/// Interior forcing hook `(x, y) -> (source_f, source_p)`, already closed
/// over the target time. Used by the manufactured-solution studies.
pub type SourceFn<'a> = &'a dyn Fn(f64, f64) -> (f64, f64);

/// Reusable implicit stepper: the system matrix `I - dt*A` and its Jacobi
/// preconditioner are built once; solves are warm-started from the previous
/// solution.
#[derive(Debug, Clone)]
pub struct BackwardEulerStepper {
    op: DiscreteOperator,
    dt: f64,
    rtol: f64,
    max_iter: usize,
    system: CsrMatrix,
    solver: BiCgStab,
    warm: Option<Vec<f64>>,
}

fn backward_euler_matrix(op: &DiscreteOperator, dt: f64) -> CsrMatrix {
    let n = op.n_unknowns();
    let mut builder = CsrBuilder::new(n);
    for r in 0..n {
        if op.is_dirichlet_row(r) {
            builder.add(r, r, 1.0);
        } else {
            builder.add(r, r, 1.0);
            let (cols, vals) = op.matrix().row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                builder.add(r, c, -dt * v);
            }
        }
    }
    builder.build()
}

impl BackwardEulerStepper {
    pub fn new(op: DiscreteOperator, dt: f64) -> Result<Self> {
        Self::with_tolerance(op, dt, DEFAULT_RTOL, 20_000)
    }

    pub fn with_tolerance(
        op: DiscreteOperator,
        dt: f64,
        rtol: f64,
        max_iter: usize,
    ) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParams(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let system = backward_euler_matrix(&op, dt);
        let solver = BiCgStab::new(&system)?;
        Ok(BackwardEulerStepper {
            op,
            dt,
            rtol,
            max_iter,
            system,
            solver,
            warm: None,
        })
    }

    pub fn op(&self) -> &DiscreteOperator {
        &self.op
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advance one step with explicit nodal boundary samples (evaluated by
    /// the caller at the target time) and an optional interior source.
    pub fn step_with(
        &mut self,
        w: &FieldPair,
        data: &BoundaryData,
        source: Option<SourceFn<'_>>,
    ) -> Result<FieldPair> {
        let grid = self.op.grid();
        w.check_grid(grid)?;
        let packed = w.pack();
        let bc_rhs = self.op.rhs_from_data(data);
        let mut b = vec![0.0; self.op.n_unknowns()];
        for r in 0..b.len() {
            b[r] = if self.op.is_dirichlet_row(r) {
                bc_rhs[r]
            } else {
                packed[r] + self.dt * bc_rhs[r]
            };
        }
        if let Some(src) = source {
            for j in 0..grid.ny() {
                for i in 0..grid.nx() {
                    let (x, y) = grid.coords(i, j);
                    let (sf, sp) = src(x, y);
                    let rf = 2 * grid.node(i, j);
                    if !self.op.is_dirichlet_row(rf) {
                        b[rf] += self.dt * sf;
                    }
                    if !self.op.is_dirichlet_row(rf + 1) {
                        b[rf + 1] += self.dt * sp;
                    }
                }
            }
        }

        let mut x = match self.warm.take() {
            Some(prev) if prev.len() == b.len() => prev,
            _ => packed.clone(),
        };
        self.solver
            .solve(&self.system, &b, &mut x, self.rtol, self.max_iter)?;
        // pinned rows hold their data exactly, not just to solver tolerance
        for r in 0..b.len() {
            if self.op.is_dirichlet_row(r) {
                x[r] = b[r];
            }
        }
        let next = FieldPair::unpack(&x);
        self.warm = Some(x);
        if !next.is_finite() {
            return Err(Error::NonFinite("backward Euler step"));
        }
        Ok(next)
    }

    /// Advance one step sampling the operator's own boundary signals at
    /// `t + dt` (fully implicit data).
    pub fn step(&mut self, w: &FieldPair, t: f64) -> Result<FieldPair> {
        let data = self.op.sample_data(t + self.dt);
        self.step_with(w, &data, None)
    }

    /// Statistics of the last solve are not retained; expose the residual of
    /// a candidate solution against the current system instead.
    pub fn residual_norm(&self, b: &[f64], x: &[f64]) -> f64 {
        self.system.residual_norm(b, x)
    }

    pub fn system(&self) -> &CsrMatrix {
        &self.system
    }

    /// One-off solve statistics for diagnostics.
    pub fn solve_stats(
        &mut self,
        w: &FieldPair,
        data: &BoundaryData,
    ) -> Result<(FieldPair, SolveStats)> {
        let packed = w.pack();
        let bc_rhs = self.op.rhs_from_data(data);
        let mut b = vec![0.0; self.op.n_unknowns()];
        for r in 0..b.len() {
            b[r] = if self.op.is_dirichlet_row(r) {
                bc_rhs[r]
            } else {
                packed[r] + self.dt * bc_rhs[r]
            };
        }
        let mut x = packed.clone();
        let stats = self
            .solver
            .solve(&self.system, &b, &mut x, self.rtol, self.max_iter)?;
        Ok((FieldPair::unpack(&x), stats))
    }
}

/// Single backward Euler step without stepper reuse: boundary data is the
/// operator's signals at `t + dt`.
pub fn step_backward_euler(
    op: &DiscreteOperator,
    w: &FieldPair,
    t: f64,
    dt: f64,
) -> Result<FieldPair> {
    let mut stepper = BackwardEulerStepper::new(op.clone(), dt)?;
    stepper.step(w, t)
}
