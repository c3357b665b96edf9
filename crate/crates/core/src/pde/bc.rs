//! Boundary-condition configurations for the coupled system and the sampled
//! nodal data they consume.

use crate::error::{Error, Result};
use crate::fields::{BoundarySignal, Orientation};
use crate::grid::{Grid, SegmentTag};

/// Kind of condition applied to one component on one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BcKind {
    /// Value pinned to the boundary data.
    Dirichlet,
    /// `dw/dnu = data - coeff * w`. `coeff = 0` is a plain Neumann flux.
    Flux { coeff: f64 },
    /// The membrane law on `Gamma4`, coupling both components:
    /// `df/dx = -gamma_f (f - p)`, `dp/dx = +gamma_p (f - p)`.
    RobinCoupled,
}

impl BcKind {
    pub fn is_dirichlet(self) -> bool {
        matches!(self, BcKind::Dirichlet)
    }
}

/// Conditions for both components on one segment plus the data signal.
/// The signal's first/second component feeds the `f`/`p` condition; it is
/// ignored for `RobinCoupled`.
#[derive(Debug, Clone)]
pub struct SegmentBc {
    pub kinds: [BcKind; 2],
    pub signal: BoundarySignal,
}

impl SegmentBc {
    pub fn dirichlet(signal: BoundarySignal) -> Self {
        SegmentBc {
            kinds: [BcKind::Dirichlet; 2],
            signal,
        }
    }

    pub fn neumann(signal: BoundarySignal) -> Self {
        SegmentBc {
            kinds: [BcKind::Flux { coeff: 0.0 }; 2],
            signal,
        }
    }

    pub fn neumann_zero(tag: SegmentTag) -> Self {
        SegmentBc::neumann(BoundarySignal::zero(tag))
    }

    pub fn robin_coupled(tag: SegmentTag) -> Self {
        SegmentBc {
            kinds: [BcKind::RobinCoupled; 2],
            signal: BoundarySignal::zero(tag),
        }
    }

    /// Homogeneous scalar Robin `dw/dnu + coeff*w = 0` per component.
    pub fn robin_scalar(tag: SegmentTag, coeff_f: f64, coeff_p: f64) -> Self {
        SegmentBc {
            kinds: [BcKind::Flux { coeff: coeff_f }, BcKind::Flux { coeff: coeff_p }],
            signal: BoundarySignal::zero(tag),
        }
    }

    pub fn mixed(kinds: [BcKind; 2], signal: BoundarySignal) -> Self {
        SegmentBc { kinds, signal }
    }
}

/// Full boundary configuration: one [`SegmentBc`] per edge.
#[derive(Debug, Clone)]
pub struct BcSpec {
    g1: SegmentBc,
    g2: SegmentBc,
    g3: SegmentBc,
    g4: SegmentBc,
}

impl BcSpec {
    pub fn new(g1: SegmentBc, g2: SegmentBc, g3: SegmentBc, g4: SegmentBc) -> Result<Self> {
        let spec = BcSpec { g1, g2, g3, g4 };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        for tag in SegmentTag::ALL {
            let side = self.side(tag);
            if side.signal.segment() != tag {
                return Err(Error::InvalidBc(format!(
                    "signal tagged {} attached to segment {}",
                    side.signal.segment(),
                    tag
                )));
            }
            let robin = side
                .kinds
                .iter()
                .filter(|k| matches!(k, BcKind::RobinCoupled))
                .count();
            if robin == 1 {
                return Err(Error::InvalidBc(format!(
                    "coupled Robin on {tag} must apply to both components"
                )));
            }
            if robin == 2 && tag != SegmentTag::Gamma4 {
                return Err(Error::InvalidBc(format!(
                    "coupled Robin is only legal on Gamma4, requested on {tag}"
                )));
            }
        }
        Ok(())
    }

    pub fn side(&self, tag: SegmentTag) -> &SegmentBc {
        match tag {
            SegmentTag::Gamma1 => &self.g1,
            SegmentTag::Gamma2 => &self.g2,
            SegmentTag::Gamma3 => &self.g3,
            SegmentTag::Gamma4 => &self.g4,
        }
    }

    pub fn kind(&self, tag: SegmentTag, comp: usize) -> BcKind {
        self.side(tag).kinds[comp]
    }

    /// True when `comp` is pinned by Dirichlet data somewhere on `tag`.
    pub fn is_dirichlet(&self, tag: SegmentTag, comp: usize) -> bool {
        self.kind(tag, comp).is_dirichlet()
    }

    /// Inlet-temperature configuration of the physical plant: Dirichlet
    /// `T_f` on `Gamma1` for the feed; Dirichlet `T_p` on the permeate inlet
    /// (`Gamma3` counter-current, `Gamma1` co-current); zero flux elsewhere;
    /// coupled Robin on the membrane.
    pub fn physical_inlets(orientation: Orientation, t_f: f64, t_p: f64) -> BcSpec {
        let neumann0 = BcKind::Flux { coeff: 0.0 };
        match orientation {
            Orientation::CounterCurrent => BcSpec {
                g1: SegmentBc::mixed(
                    [BcKind::Dirichlet, neumann0],
                    BoundarySignal::constant(SegmentTag::Gamma1, t_f, 0.0),
                ),
                g2: SegmentBc::neumann_zero(SegmentTag::Gamma2),
                g3: SegmentBc::mixed(
                    [neumann0, BcKind::Dirichlet],
                    BoundarySignal::constant(SegmentTag::Gamma3, 0.0, t_p),
                ),
                g4: SegmentBc::robin_coupled(SegmentTag::Gamma4),
            },
            Orientation::CoCurrent => BcSpec {
                g1: SegmentBc::mixed(
                    [BcKind::Dirichlet, BcKind::Dirichlet],
                    BoundarySignal::constant(SegmentTag::Gamma1, t_f, t_p),
                ),
                g2: SegmentBc::neumann_zero(SegmentTag::Gamma2),
                g3: SegmentBc::neumann_zero(SegmentTag::Gamma3),
                g4: SegmentBc::robin_coupled(SegmentTag::Gamma4),
            },
        }
    }

    /// Plant of the control loop: unknown flux `d` on `Gamma1`, control flux
    /// `(u1, 0)` on `Gamma3`, insulated `Gamma2`, membrane Robin on `Gamma4`.
    pub fn plant(disturbance: BoundarySignal, control: BoundarySignal) -> Result<BcSpec> {
        BcSpec::new(
            SegmentBc::neumann(disturbance),
            SegmentBc::neumann_zero(SegmentTag::Gamma2),
            SegmentBc::neumann(control),
            SegmentBc::robin_coupled(SegmentTag::Gamma4),
        )
    }

    /// Extended state observer: measured Dirichlet data on `Gamma1`, same
    /// control flux on `Gamma3` as the plant.
    pub fn observer(measurement: BoundarySignal, control: BoundarySignal) -> Result<BcSpec> {
        BcSpec::new(
            SegmentBc::dirichlet(measurement),
            SegmentBc::neumann_zero(SegmentTag::Gamma2),
            SegmentBc::neumann(control),
            SegmentBc::robin_coupled(SegmentTag::Gamma4),
        )
    }

    /// Servomechanism: reference Dirichlet data on `Gamma3`, observer trace
    /// Dirichlet data on `Gamma1`.
    pub fn servo(observer_trace: BoundarySignal, reference: BoundarySignal) -> Result<BcSpec> {
        BcSpec::new(
            SegmentBc::dirichlet(observer_trace),
            SegmentBc::neumann_zero(SegmentTag::Gamma2),
            SegmentBc::dirichlet(reference),
            SegmentBc::robin_coupled(SegmentTag::Gamma4),
        )
    }

    /// Homogeneous configuration of the appendix operator `A0`: Dirichlet
    /// zero on the feed inlet and on the orientation-dependent permeate
    /// inlet, zero flux elsewhere, Robin coupling on the membrane.
    pub fn homogeneous_a0(orientation: Orientation) -> BcSpec {
        BcSpec::physical_inlets(orientation, 0.0, 0.0)
    }
}

/// Nodal boundary samples, one vector per segment per component. This is the
/// raw data form consumed by assembly and stepping; it can come from a
/// [`BoundarySignal`] or from traces computed during a run.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    data: [[Vec<f64>; 2]; 4],
}

fn tag_index(tag: SegmentTag) -> usize {
    match tag {
        SegmentTag::Gamma1 => 0,
        SegmentTag::Gamma2 => 1,
        SegmentTag::Gamma3 => 2,
        SegmentTag::Gamma4 => 3,
    }
}

impl BoundaryData {
    pub fn zeros(grid: &Grid) -> Self {
        let make = |tag: SegmentTag| {
            let n = grid.segment(tag).n_nodes();
            [vec![0.0; n], vec![0.0; n]]
        };
        BoundaryData {
            data: [
                make(SegmentTag::Gamma1),
                make(SegmentTag::Gamma2),
                make(SegmentTag::Gamma3),
                make(SegmentTag::Gamma4),
            ],
        }
    }

    /// Sample every segment's signal at time `t`.
    pub fn sample(bc: &BcSpec, grid: &Grid, t: f64) -> Self {
        let mut out = BoundaryData::zeros(grid);
        for tag in SegmentTag::ALL {
            let seg = grid.segment(tag);
            let (vf, vp) = bc.side(tag).signal.sample(&seg, t);
            out.data[tag_index(tag)] = [vf, vp];
        }
        out
    }

    pub fn get(&self, tag: SegmentTag, comp: usize) -> &[f64] {
        &self.data[tag_index(tag)][comp]
    }

    pub fn set(&mut self, tag: SegmentTag, comp: usize, values: Vec<f64>) -> Result<()> {
        let expected = self.data[tag_index(tag)][comp].len();
        if values.len() != expected {
            return Err(Error::SizeMismatch {
                what: "boundary data",
                expected,
                got: values.len(),
            });
        }
        self.data[tag_index(tag)][comp] = values;
        Ok(())
    }

    /// Set both components of one segment at once.
    pub fn set_pair(&mut self, tag: SegmentTag, vf: Vec<f64>, vp: Vec<f64>) -> Result<()> {
        self.set(tag, 0, vf)?;
        self.set(tag, 1, vp)
    }
}
