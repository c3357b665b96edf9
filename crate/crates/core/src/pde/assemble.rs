//! Assembly of the space-discretized coupled operator
//! `A w = (alpha_f Lap f - b_f df/dy - rho_f f, alpha_p Lap p - b_p dp/dy - rho_p p)`
//! on the uniform grid, with boundary conditions folded in by second-order
//! ghost-node elimination. Unknowns are interleaved: `2*(j*nx + i) + c`.

use crate::error::{Error, Result};
use crate::fields::PhysicalParams;
use crate::grid::{Grid, SegmentTag};
use crate::pde::bc::{BcKind, BcSpec, BoundaryData};
use crate::pde::linsolve::{CsrBuilder, CsrMatrix};

/// Discretization of the advection term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdvectionScheme {
    /// Second-order centered differences (default).
    #[default]
    Centered,
    /// First-order upwind, for advection-dominated runs.
    Upwind,
}

/// Assembly switches beyond the physical parameters.
#[derive(Debug, Clone, Copy, Default)]
pub struct AssemblyOptions {
    pub advection: AdvectionScheme,
    /// Zeroth-order reaction coefficients entering as `-rho_c * w_c`; used by
    /// the diagonalized co-current system.
    pub reaction: [f64; 2],
}

/// One affine boundary-data contribution to the right-hand side:
/// `rhs[row] += coeff * data[tag][comp][k]`.
#[derive(Debug, Clone, Copy)]
struct FluxRhsTerm {
    row: usize,
    tag: SegmentTag,
    comp: usize,
    k: usize,
    coeff: f64,
}

/// A Dirichlet-pinned row: `value[row] = data[tag][comp][k]`.
#[derive(Debug, Clone, Copy)]
struct DirichletTerm {
    row: usize,
    tag: SegmentTag,
    comp: usize,
    k: usize,
}

/// Sparse form of the space-discretized operator together with the plan for
/// evaluating inhomogeneous boundary data. Dirichlet-pinned rows are stored
/// as identity rows; their data is supplied through [`DiscreteOperator::rhs_from_data`].
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    grid: Grid,
    params: PhysicalParams,
    bc: BcSpec,
    options: AssemblyOptions,
    matrix: CsrMatrix,
    dirichlet: Vec<bool>,
    flux_rhs: Vec<FluxRhsTerm>,
    dirichlet_rhs: Vec<DirichletTerm>,
}

/// Flat unknown index of component `c` at node `(i, j)`.
#[inline]
pub fn unknown(grid: &Grid, i: usize, j: usize, c: usize) -> usize {
    2 * grid.node(i, j) + c
}

pub fn assemble(grid: &Grid, params: &PhysicalParams, bc: &BcSpec) -> Result<DiscreteOperator> {
    assemble_with(grid, params, bc, AssemblyOptions::default())
}

pub fn assemble_with(
    grid: &Grid,
    params: &PhysicalParams,
    bc: &BcSpec,
    options: AssemblyOptions,
) -> Result<DiscreteOperator> {
    params.validate()?;
    let n = 2 * grid.n_nodes();
    let mut builder = CsrBuilder::new(n);
    let mut dirichlet = vec![false; n];
    let mut flux_rhs = Vec::new();
    let mut dirichlet_rhs = Vec::new();

    let hx = grid.hx();
    let hy = grid.hy();
    let alpha = [params.alpha_f, params.alpha_p];
    let beff = params.effective_advection();
    let gammas = [params.gamma_f, params.gamma_p];

    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            for c in 0..2 {
                let row = unknown(grid, i, j, c);
                let segs = grid.segments_at(i, j);

                if segs.iter().any(|&t| bc.is_dirichlet(t, c)) {
                    let owner = grid
                        .owner_at(i, j, |t| bc.is_dirichlet(t, c))
                        .expect("boundary node");
                    builder.add(row, row, 1.0);
                    dirichlet[row] = true;
                    let k = if owner.is_vertical() { j } else { i };
                    dirichlet_rhs.push(DirichletTerm {
                        row,
                        tag: owner,
                        comp: c,
                        k,
                    });
                    continue;
                }

                let a = alpha[c];
                let b = beff[c];
                let mut diag = -options.reaction[c];

                // x-direction diffusion
                if i > 0 && i < grid.nx() - 1 {
                    builder.add(row, unknown(grid, i - 1, j, c), a / (hx * hx));
                    builder.add(row, unknown(grid, i + 1, j, c), a / (hx * hx));
                    diag -= 2.0 * a / (hx * hx);
                } else if i == 0 {
                    match bc.kind(SegmentTag::Gamma2, c) {
                        BcKind::Flux { coeff } => {
                            builder.add(row, unknown(grid, 1, j, c), 2.0 * a / (hx * hx));
                            diag -= 2.0 * a / (hx * hx) + 2.0 * a * coeff / hx;
                            flux_rhs.push(FluxRhsTerm {
                                row,
                                tag: SegmentTag::Gamma2,
                                comp: c,
                                k: j,
                                coeff: 2.0 * a / hx,
                            });
                        }
                        BcKind::RobinCoupled => {
                            return Err(Error::InvalidBc(
                                "coupled Robin is only legal on Gamma4".into(),
                            ))
                        }
                        BcKind::Dirichlet => unreachable!(),
                    }
                } else {
                    match bc.kind(SegmentTag::Gamma4, c) {
                        BcKind::Flux { coeff } => {
                            builder.add(row, unknown(grid, i - 1, j, c), 2.0 * a / (hx * hx));
                            diag -= 2.0 * a / (hx * hx) + 2.0 * a * coeff / hx;
                            flux_rhs.push(FluxRhsTerm {
                                row,
                                tag: SegmentTag::Gamma4,
                                comp: c,
                                k: j,
                                coeff: 2.0 * a / hx,
                            });
                        }
                        BcKind::RobinCoupled => {
                            // df/dx = -gamma_f (f - p), dp/dx = +gamma_p (f - p)
                            let g = gammas[c];
                            builder.add(row, unknown(grid, i - 1, j, c), 2.0 * a / (hx * hx));
                            diag -= 2.0 * a / (hx * hx) + 2.0 * a * g / hx;
                            builder.add(row, unknown(grid, i, j, 1 - c), 2.0 * a * g / hx);
                        }
                        BcKind::Dirichlet => unreachable!(),
                    }
                }

                // y-direction diffusion
                if j > 0 && j < grid.ny() - 1 {
                    builder.add(row, unknown(grid, i, j - 1, c), a / (hy * hy));
                    builder.add(row, unknown(grid, i, j + 1, c), a / (hy * hy));
                    diag -= 2.0 * a / (hy * hy);
                } else {
                    let (tag, jn) = if j == 0 {
                        (SegmentTag::Gamma1, 1)
                    } else {
                        (SegmentTag::Gamma3, grid.ny() - 2)
                    };
                    match bc.kind(tag, c) {
                        BcKind::Flux { coeff } => {
                            builder.add(row, unknown(grid, i, jn, c), 2.0 * a / (hy * hy));
                            diag -= 2.0 * a / (hy * hy) + 2.0 * a * coeff / hy;
                            flux_rhs.push(FluxRhsTerm {
                                row,
                                tag,
                                comp: c,
                                k: i,
                                coeff: 2.0 * a / hy,
                            });
                        }
                        BcKind::RobinCoupled => {
                            return Err(Error::InvalidBc(
                                "coupled Robin is only legal on Gamma4".into(),
                            ))
                        }
                        BcKind::Dirichlet => unreachable!(),
                    }
                }

                // advection -b * dw/dy
                if b != 0.0 {
                    if j > 0 && j < grid.ny() - 1 {
                        match options.advection {
                            AdvectionScheme::Centered => {
                                builder.add(row, unknown(grid, i, j + 1, c), -b / (2.0 * hy));
                                builder.add(row, unknown(grid, i, j - 1, c), b / (2.0 * hy));
                            }
                            AdvectionScheme::Upwind => {
                                if b > 0.0 {
                                    builder.add(row, unknown(grid, i, j - 1, c), b / hy);
                                    diag -= b / hy;
                                } else {
                                    builder.add(row, unknown(grid, i, j + 1, c), -b / hy);
                                    diag += b / hy;
                                }
                            }
                        }
                    } else {
                        // On a flux boundary the normal derivative is known
                        // from the condition itself: dw/dy = coeff*w - g on
                        // Gamma1, dw/dy = g - coeff*w on Gamma3 (exact).
                        let tag = if j == 0 {
                            SegmentTag::Gamma1
                        } else {
                            SegmentTag::Gamma3
                        };
                        match bc.kind(tag, c) {
                            BcKind::Flux { coeff } => {
                                let sign = if j == 0 { 1.0 } else { -1.0 };
                                diag -= sign * b * coeff;
                                flux_rhs.push(FluxRhsTerm {
                                    row,
                                    tag,
                                    comp: c,
                                    k: i,
                                    coeff: sign * b,
                                });
                            }
                            _ => unreachable!("horizontal segments carry Dirichlet or flux"),
                        }
                    }
                }

                builder.add(row, row, diag);
            }
        }
    }

    Ok(DiscreteOperator {
        grid: *grid,
        params: *params,
        bc: bc.clone(),
        options,
        matrix: builder.build(),
        dirichlet,
        flux_rhs,
        dirichlet_rhs,
    })
}

impl DiscreteOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn bc(&self) -> &BcSpec {
        &self.bc
    }

    pub fn options(&self) -> &AssemblyOptions {
        &self.options
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn n_unknowns(&self) -> usize {
        2 * self.grid.n_nodes()
    }

    pub fn is_dirichlet_row(&self, row: usize) -> bool {
        self.dirichlet[row]
    }

    pub fn dirichlet_rows(&self) -> &[bool] {
        &self.dirichlet
    }

    /// Matrix action `y = A x` (identity on Dirichlet-pinned rows).
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec_alloc(x)
    }

    /// Affine boundary contribution for the given nodal samples: flux rows
    /// accumulate their data terms, Dirichlet rows carry the pinned value.
    pub fn rhs_from_data(&self, data: &BoundaryData) -> Vec<f64> {
        let mut rhs = vec![0.0; self.n_unknowns()];
        for term in &self.flux_rhs {
            rhs[term.row] += term.coeff * data.get(term.tag, term.comp)[term.k];
        }
        for term in &self.dirichlet_rhs {
            rhs[term.row] = data.get(term.tag, term.comp)[term.k];
        }
        rhs
    }

    /// Sample this operator's boundary signals at time `t`.
    pub fn sample_data(&self, t: f64) -> BoundaryData {
        BoundaryData::sample(&self.bc, &self.grid, t)
    }
}
