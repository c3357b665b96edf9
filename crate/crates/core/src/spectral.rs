//! Numerical certification of the operator structure: symmetry of the
//! diffusion part in the weighted metric, dissipativity of the advected
//! operator, and the exponential change of variables that diagonalizes the
//! co-current system.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{
    weighted_inner_product, weighted_norm, FieldPair, Orientation, PhysicalParams,
};
use crate::grid::{Grid, SegmentTag};
use crate::pde::assemble::{assemble, assemble_with, AssemblyOptions, DiscreteOperator};
use crate::pde::bc::{BcSpec, SegmentBc};
use crate::pde::stepping::BackwardEulerStepper;

/// Assemble the homogeneous operator `A0 + t*B0`: diffusion plus `t`-scaled
/// advection under the inlet-homogeneous boundary conditions.
pub fn assemble_scaled_operator(
    grid: &Grid,
    params: &PhysicalParams,
    t: f64,
) -> Result<DiscreteOperator> {
    let scaled = params.with_advection_scaled(t);
    let bc = BcSpec::homogeneous_a0(scaled.orientation);
    assemble(grid, &scaled, &bc)
}

fn random_free_state(op: &DiscreteOperator, rng: &mut ChaCha8Rng) -> FieldPair {
    let n = op.n_unknowns();
    let mut x = vec![0.0; n];
    for (r, v) in x.iter_mut().enumerate() {
        if !op.is_dirichlet_row(r) {
            *v = rng.gen_range(-1.0..1.0);
        }
    }
    FieldPair::unpack(&x)
}

/// Maximum normalized symmetry defect
/// `|<A a, b>_w - <a, A b>_w| / (||a||_w ||b||_w)` over random state pairs
/// vanishing on Dirichlet-pinned nodes. The weights default to the
/// operator's own parameters; passing different weights is the negative
/// control for the metric.
pub fn check_weighted_symmetry(op: &DiscreteOperator, trials: usize, seed: u64) -> Result<f64> {
    check_weighted_symmetry_with(op, op.params(), trials, seed)
}

pub fn check_weighted_symmetry_with(
    op: &DiscreteOperator,
    weights: &PhysicalParams,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let grid = op.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let a = random_free_state(op, &mut rng);
        let b = random_free_state(op, &mut rng);
        let aa = FieldPair::unpack(&op.apply(&a.pack()));
        let ab = FieldPair::unpack(&op.apply(&b.pack()));
        let lhs = weighted_inner_product(&aa, &b, grid, weights)?;
        let rhs = weighted_inner_product(&a, &ab, grid, weights)?;
        let na = weighted_norm(&a, grid, weights)?;
        let nb = weighted_norm(&b, grid, weights)?;
        if na == 0.0 || nb == 0.0 {
            continue;
        }
        worst = worst.max((lhs - rhs).abs() / (na * nb));
    }
    Ok(worst)
}

/// Rayleigh quotient `<A w, w>_w / <w, w>_w` of one state.
pub fn rayleigh_quotient(op: &DiscreteOperator, state: &FieldPair) -> Result<f64> {
    let grid = op.grid();
    let denom = weighted_inner_product(state, state, grid, op.params())?;
    if denom <= 0.0 {
        return Err(Error::InvalidParams(
            "Rayleigh quotient of the zero state".to_string(),
        ));
    }
    let aw = FieldPair::unpack(&op.apply(&state.pack()));
    Ok(weighted_inner_product(&aw, state, grid, op.params())? / denom)
}

/// Maximum Rayleigh quotient over random nonzero states vanishing on
/// Dirichlet-pinned nodes; dissipativity holds when the result stays below
/// the assembly tolerance.
pub fn check_dissipativity(op: &DiscreteOperator, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut done = 0;
    let mut attempts = 0;
    while done < trials && attempts < 10 * trials.max(1) {
        attempts += 1;
        let w = random_free_state(op, &mut rng);
        match rayleigh_quotient(op, &w) {
            Ok(q) => {
                worst = worst.max(q);
                done += 1;
            }
            Err(_) => continue,
        }
    }
    if done == 0 {
        return Err(Error::InvalidParams(
            "no nonzero trial states available".to_string(),
        ));
    }
    Ok(worst)
}

/// Dense restriction of the operator to non-Dirichlet unknowns.
pub fn restricted_dense(op: &DiscreteOperator) -> (nalgebra::DMatrix<f64>, Vec<usize>) {
    let n = op.n_unknowns();
    let free: Vec<usize> = (0..n).filter(|&r| !op.is_dirichlet_row(r)).collect();
    let mut index = vec![usize::MAX; n];
    for (k, &r) in free.iter().enumerate() {
        index[r] = k;
    }
    let m = free.len();
    let mut dense = nalgebra::DMatrix::zeros(m, m);
    for (k, &r) in free.iter().enumerate() {
        let (cols, vals) = op.matrix().row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            if index[c] != usize::MAX {
                dense[(k, index[c])] = v;
            }
        }
    }
    (dense, free)
}

/// Largest real part among the eigenvalues of the dense restriction of the
/// operator. Intended for small grids; the matrix is densified.
pub fn dense_eigen_max_real_part(op: &DiscreteOperator) -> Result<f64> {
    let (dense, _) = restricted_dense(op);
    let eigs = dense.complex_eigenvalues();
    let max_re = eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if !max_re.is_finite() {
        return Err(Error::NonFinite("eigenvalue computation"));
    }
    Ok(max_re)
}

/// Direction of [`cocurrent_transform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformDirection {
    Forward,
    Inverse,
}

/// The exponential change of variables of the co-current system:
/// forward maps `(f, p)` to `(f e^{-b_f y / 2 a_f}, p e^{-b_p y / 2 a_p})`;
/// inverse undoes it.
pub fn cocurrent_transform(
    w: &FieldPair,
    params: &PhysicalParams,
    grid: &Grid,
    direction: TransformDirection,
) -> Result<FieldPair> {
    if params.orientation != Orientation::CoCurrent {
        return Err(Error::InvalidParams(
            "the exponential change of variables applies to the co-current arrangement".into(),
        ));
    }
    w.check_grid(grid)?;
    let cf = params.beta_f / (2.0 * params.alpha_f);
    let cp = params.beta_p / (2.0 * params.alpha_p);
    let mut out = FieldPair::zeros(grid);
    for j in 0..grid.ny() {
        let y = j as f64 * grid.hy();
        let (ff, fp) = ((-cf * y).exp(), (-cp * y).exp());
        for i in 0..grid.nx() {
            let k = grid.node(i, j);
            match direction {
                TransformDirection::Forward => {
                    out.f[k] = w.f[k] * ff;
                    out.p[k] = w.p[k] * fp;
                }
                TransformDirection::Inverse => {
                    out.f[k] = w.f[k] / ff;
                    out.p[k] = w.p[k] / fp;
                }
            }
        }
    }
    Ok(out)
}

/// Inlet temperatures and initial state used by [`check_diagonalization`];
/// fixed so the check is deterministic.
fn diagonalization_fixture(grid: &Grid) -> (f64, f64, FieldPair) {
    let w0 = FieldPair::from_fn(grid, |x, y| {
        (
            (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y / 4.0).cos(),
            (std::f64::consts::PI * x / 2.0).sin() * (std::f64::consts::PI * y / 4.0).cos(),
        )
    });
    (1.0, 0.5, w0)
}

/// Simulate the co-current system and, independently, its diagonalized form
/// (no advection, reaction `b^2/4a`, inlet-pinned bottom, flux-absorbing
/// top), and return the maximum weighted-norm discrepancy over time between
/// the transformed first simulation and the second. Requires the velocity
/// ratios `b_f/2a_f` and `b_p/2a_p` to agree.
pub fn check_diagonalization(
    params: &PhysicalParams,
    grid: &Grid,
    horizon: f64,
    dt: f64,
) -> Result<f64> {
    params.validate()?;
    if params.orientation != Orientation::CoCurrent {
        return Err(Error::InvalidParams(
            "diagonalization applies to the co-current arrangement".into(),
        ));
    }
    let cf = params.beta_f / (2.0 * params.alpha_f);
    let cp = params.beta_p / (2.0 * params.alpha_p);
    if (cf - cp).abs() > 1e-12 {
        return Err(Error::InvalidParams(format!(
            "velocity ratios must match: beta_f/2alpha_f = {cf}, beta_p/2alpha_p = {cp}"
        )));
    }

    let (t_f, t_p, w0) = diagonalization_fixture(grid);

    // original co-current system
    let bc_orig = BcSpec::physical_inlets(Orientation::CoCurrent, t_f, t_p);
    let op_orig = assemble(grid, params, &bc_orig)?;
    let mut stepper_orig = BackwardEulerStepper::new(op_orig, dt)?;

    // transformed system: reaction replaces advection, the top edge absorbs
    let mut transformed_params = *params;
    transformed_params.beta_f = 0.0;
    transformed_params.beta_p = 0.0;
    let reaction = [
        params.beta_f * params.beta_f / (4.0 * params.alpha_f),
        params.beta_p * params.beta_p / (4.0 * params.alpha_p),
    ];
    let bc_diag = BcSpec::new(
        SegmentBc::mixed(
            [
                crate::pde::bc::BcKind::Dirichlet,
                crate::pde::bc::BcKind::Dirichlet,
            ],
            crate::fields::BoundarySignal::constant(SegmentTag::Gamma1, t_f, t_p),
        ),
        SegmentBc::neumann_zero(SegmentTag::Gamma2),
        SegmentBc::robin_scalar(SegmentTag::Gamma3, cf, cp),
        SegmentBc::robin_coupled(SegmentTag::Gamma4),
    )?;
    let op_diag = assemble_with(
        grid,
        &transformed_params,
        &bc_diag,
        AssemblyOptions {
            reaction,
            ..Default::default()
        },
    )?;
    let mut stepper_diag = BackwardEulerStepper::new(op_diag, dt)?;

    let mut w = w0.clone();
    let mut g = cocurrent_transform(&w0, params, grid, TransformDirection::Forward)?;

    let n_steps = (horizon / dt).round().max(1.0) as usize;
    let mut worst = 0.0f64;
    for n in 0..n_steps {
        let t = n as f64 * dt;
        w = stepper_orig.step(&w, t)?;
        g = stepper_diag.step(&g, t)?;
        let transformed = cocurrent_transform(&w, params, grid, TransformDirection::Forward)?;
        let gap = weighted_norm(&transformed.sub(&g), grid, params)?;
        worst = worst.max(gap);
    }
    Ok(worst)
}
