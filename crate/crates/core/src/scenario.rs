//! TOML scenario documents: geometry, physics, analytic or tabulated
//! signals, initial fields and run control, compiled into a runnable
//! [`adrc::Scenario`]. Unknown keys are hard errors; omitted signals
//! default to zero.

use serde::{Deserialize, Serialize};

use crate::adrc;
use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::fields::{BoundarySignal, FieldPair, Orientation, PhysicalParams};
use crate::grid::{Grid, SegmentTag};

/// Reference scenario at the published resolution (`h = 1/100`).
pub const PAPER_PRESET: &str = include_str!("../../../presets/paper.toml");
/// Same scenario on the coarser 26x51 grid (`h = 1/25`) for fast runs.
pub const PAPER_CI_PRESET: &str = include_str!("../../../presets/paper-ci.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub nx: usize,
    pub ny: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub alpha_f: f64,
    pub alpha_p: f64,
    #[serde(default)]
    pub beta_f: f64,
    #[serde(default)]
    pub beta_p: f64,
    pub gamma_f: f64,
    pub gamma_p: f64,
    #[serde(default = "default_orientation")]
    pub orientation: Orientation,
}

fn default_orientation() -> Orientation {
    Orientation::CoCurrent
}

/// A boundary signal component: either an analytic expression over `(t, x)`
/// or samples `[[t, value], ...]` interpolated linearly in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SignalSpec {
    Expr(String),
    Table(TableSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub table: Vec<[f64; 2]>,
}

impl Default for SignalSpec {
    fn default() -> Self {
        SignalSpec::Expr("0".to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SignalsSection {
    pub disturbance_f: SignalSpec,
    pub disturbance_p: SignalSpec,
    pub reference_f: SignalSpec,
    pub reference_p: SignalSpec,
    pub noise_f: SignalSpec,
    pub noise_p: SignalSpec,
}

fn zero_expr() -> String {
    "0".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub plant_f: String,
    pub plant_p: String,
    pub observer_f: String,
    pub observer_p: String,
    pub servo_f: String,
    pub servo_p: String,
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection {
            plant_f: zero_expr(),
            plant_p: zero_expr(),
            observer_f: zero_expr(),
            observer_p: zero_expr(),
            servo_f: zero_expr(),
            servo_p: zero_expr(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub horizon: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Metrics file name, relative to the output directory.
    pub metrics: String,
    /// Times at which plant-field snapshots are written.
    pub snapshot_times: Vec<f64>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            metrics: "metrics.csv".to_string(),
            snapshot_times: Vec::new(),
        }
    }
}

/// Inlet temperatures for the stationary solve, as expressions over `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SteadySection {
    pub t_f: String,
    pub t_p: String,
}

impl Default for SteadySection {
    fn default() -> Self {
        SteadySection {
            t_f: zero_expr(),
            t_p: zero_expr(),
        }
    }
}

/// The parsed scenario document. `parse(serialize(c)) == c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub geometry: GeometrySection,
    pub physics: PhysicsSection,
    #[serde(default)]
    pub signals: SignalsSection,
    #[serde(default)]
    pub initial: InitialSection,
    pub time: TimeSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub steady: SteadySection,
}

enum CompiledComponent {
    Expr(Expr),
    Table(Vec<[f64; 2]>),
}

impl CompiledComponent {
    fn eval(&self, t: f64, s: f64) -> f64 {
        match self {
            CompiledComponent::Expr(e) => e.eval(t, s, 0.0),
            CompiledComponent::Table(rows) => {
                if rows.is_empty() {
                    return 0.0;
                }
                if t <= rows[0][0] {
                    return rows[0][1];
                }
                let last = rows[rows.len() - 1];
                if t >= last[0] {
                    return last[1];
                }
                let k = rows.partition_point(|row| row[0] <= t);
                let (t0, v0) = (rows[k - 1][0], rows[k - 1][1]);
                let (t1, v1) = (rows[k][0], rows[k][1]);
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }
}

fn compile_component(key: &str, spec: &SignalSpec) -> Result<CompiledComponent> {
    match spec {
        SignalSpec::Expr(src) => {
            let expr = Expr::parse(src, &[Var::T, Var::X]).map_err(|e| Error::ExprParse {
                key: key.to_string(),
                offset: e.offset,
                message: e.message,
            })?;
            Ok(CompiledComponent::Expr(expr))
        }
        SignalSpec::Table(tab) => {
            if tab.table.is_empty() {
                return Err(Error::InvalidScenario(format!(
                    "{key}: a tabulated signal needs at least one row"
                )));
            }
            for w in tab.table.windows(2) {
                if !(w[1][0] > w[0][0]) {
                    return Err(Error::InvalidScenario(format!(
                        "{key}: table times must be strictly increasing"
                    )));
                }
            }
            if tab.table.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidScenario(format!(
                    "{key}: table entries must be finite"
                )));
            }
            Ok(CompiledComponent::Table(tab.table.clone()))
        }
    }
}

fn compile_signal(
    segment: SegmentTag,
    key_f: &str,
    spec_f: &SignalSpec,
    key_p: &str,
    spec_p: &SignalSpec,
) -> Result<BoundarySignal> {
    let cf = compile_component(key_f, spec_f)?;
    let cp = compile_component(key_p, spec_p)?;
    Ok(BoundarySignal::new(segment, move |t, s| {
        (cf.eval(t, s), cp.eval(t, s))
    }))
}

fn compile_field(grid: &Grid, key_f: &str, src_f: &str, key_p: &str, src_p: &str) -> Result<FieldPair> {
    let allowed = [Var::X, Var::Y];
    let ef = Expr::parse(src_f, &allowed).map_err(|e| Error::ExprParse {
        key: key_f.to_string(),
        offset: e.offset,
        message: e.message,
    })?;
    let ep = Expr::parse(src_p, &allowed).map_err(|e| Error::ExprParse {
        key: key_p.to_string(),
        offset: e.offset,
        message: e.message,
    })?;
    Ok(FieldPair::from_fn(grid, |x, y| {
        (ef.eval(0.0, x, y), ep.eval(0.0, x, y))
    }))
}

impl ScenarioConfig {
    /// Parse a TOML document; syntax and unknown-key errors carry the
    /// offending location or key.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ScenarioParse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ScenarioParse(e.to_string()))
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.geometry.nx, self.geometry.ny, self.geometry.length)
    }

    pub fn params(&self) -> Result<PhysicalParams> {
        let params = PhysicalParams {
            alpha_f: self.physics.alpha_f,
            alpha_p: self.physics.alpha_p,
            beta_f: self.physics.beta_f,
            beta_p: self.physics.beta_p,
            gamma_f: self.physics.gamma_f,
            gamma_p: self.physics.gamma_p,
            orientation: self.physics.orientation,
        };
        params.validate()?;
        Ok(params)
    }

    /// Compile into a runnable closed-loop scenario.
    pub fn build(&self) -> Result<adrc::Scenario> {
        let grid = self.grid()?;
        let params = self.params()?;
        if !(self.time.dt > 0.0) || !self.time.dt.is_finite() {
            return Err(Error::InvalidScenario(format!(
                "time.dt must be positive, got {}",
                self.time.dt
            )));
        }
        if self.time.horizon < self.time.dt {
            return Err(Error::InvalidScenario(
                "time.horizon must cover at least one step".to_string(),
            ));
        }
        let disturbance = compile_signal(
            SegmentTag::Gamma1,
            "signals.disturbance_f",
            &self.signals.disturbance_f,
            "signals.disturbance_p",
            &self.signals.disturbance_p,
        )?;
        let reference = compile_signal(
            SegmentTag::Gamma3,
            "signals.reference_f",
            &self.signals.reference_f,
            "signals.reference_p",
            &self.signals.reference_p,
        )?;
        let noise = compile_signal(
            SegmentTag::Gamma1,
            "signals.noise_f",
            &self.signals.noise_f,
            "signals.noise_p",
            &self.signals.noise_p,
        )?;
        let plant0 = compile_field(
            &grid,
            "initial.plant_f",
            &self.initial.plant_f,
            "initial.plant_p",
            &self.initial.plant_p,
        )?;
        let observer0 = compile_field(
            &grid,
            "initial.observer_f",
            &self.initial.observer_f,
            "initial.observer_p",
            &self.initial.observer_p,
        )?;
        let servo0 = compile_field(
            &grid,
            "initial.servo_f",
            &self.initial.servo_f,
            "initial.servo_p",
            &self.initial.servo_p,
        )?;
        let mut scn = adrc::Scenario::new(
            grid,
            params,
            disturbance,
            reference,
            plant0,
            observer0,
            servo0,
            self.time.horizon,
            self.time.dt,
        );
        scn.noise = noise;
        scn.validate()?;
        Ok(scn)
    }

    /// Inlet-temperature traces for the stationary solve, sampled on the
    /// `Gamma1` node abscissas.
    pub fn steady_traces(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let grid = self.grid()?;
        let allowed = [Var::X];
        let ef = Expr::parse(&self.steady.t_f, &allowed).map_err(|e| Error::ExprParse {
            key: "steady.t_f".to_string(),
            offset: e.offset,
            message: e.message,
        })?;
        let ep = Expr::parse(&self.steady.t_p, &allowed).map_err(|e| Error::ExprParse {
            key: "steady.t_p".to_string(),
            offset: e.offset,
            message: e.message,
        })?;
        let seg = grid.segment(SegmentTag::Gamma1);
        let t_f = (0..seg.n_nodes())
            .map(|k| ef.eval(0.0, seg.arclength(k), 0.0))
            .collect();
        let t_p = (0..seg.n_nodes())
            .map(|k| ep.eval(0.0, seg.arclength(k), 0.0))
            .collect();
        Ok((t_f, t_p))
    }
}
