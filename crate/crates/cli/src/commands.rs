//! Implementations of the CLI subcommands.

use std::path::{Path, PathBuf};

use dcmd_core::adrc::run_closed_loop_with_snapshots;
use dcmd_core::error::Error;
use dcmd_core::expr::{Expr, Var};
use dcmd_core::fields::{FieldPair, Orientation, PhysicalParams};
use dcmd_core::grid::{Grid, SegmentTag};
use dcmd_core::pde::mms;
use dcmd_core::scenario::{ScenarioConfig, PAPER_CI_PRESET, PAPER_PRESET};
use dcmd_core::spectral::{
    assemble_scaled_operator, check_diagonalization, check_dissipativity,
    check_weighted_symmetry, cocurrent_transform, dense_eigen_max_real_part, TransformDirection,
};
use dcmd_core::steady::{solve_steady, stationary_residual};

use crate::io::{self, CheckLine};

/// Failure classes behind the process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: scenario, flags, expressions, file system. Exit 1.
    Validation(String),
    /// The numerics failed or a check did not pass. Exit 2.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::SolveFailed { .. }
            | Error::SingularMatrix { .. }
            | Error::StepFailed { .. }
            | Error::NonFinite(_) => CliError::Numerical(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("i/o error: {e}"))
    }
}

/// Resolve a `--scenario` argument: a file path, or one of the built-in
/// preset names `paper` and `paper-ci` when no such file exists.
pub fn load_scenario_text(arg: &str) -> Result<String, CliError> {
    let path = Path::new(arg);
    if path.exists() {
        return Ok(std::fs::read_to_string(path)?);
    }
    match arg {
        "paper" => Ok(PAPER_PRESET.to_string()),
        "paper-ci" => Ok(PAPER_CI_PRESET.to_string()),
        _ => Err(CliError::Validation(format!(
            "scenario '{arg}' is neither a file nor a built-in preset (paper, paper-ci)"
        ))),
    }
}

pub fn simulate(scenario_arg: &str, out_dir: &PathBuf, rtol: Option<f64>) -> Result<(), CliError> {
    let text = load_scenario_text(scenario_arg)?;
    let config = ScenarioConfig::from_toml_str(&text)?;
    let mut scn = config.build()?;
    if let Some(r) = rtol {
        if !(r > 0.0 && r < 1.0) {
            return Err(CliError::Validation(format!(
                "--rtol must be in (0, 1), got {r}"
            )));
        }
        scn.solver_rtol = r;
    }

    // everything validated; only now touch the file system
    std::fs::create_dir_all(out_dir)?;
    let (result, snapshots) = run_closed_loop_with_snapshots(&scn, &config.output.snapshot_times)?;
    io::write_metrics(&out_dir.join(&config.output.metrics), &result.metrics)?;
    for (t, w) in &snapshots {
        io::write_field_snapshot(out_dir, "w", &scn.grid, *t, w)?;
    }

    let last = result.metrics.last().expect("at least one row");
    println!(
        "simulated {} steps to t = {}; final tracking error {:.6e}; metrics in {}",
        result.metrics.len() - 1,
        last.t,
        last.tracking_error,
        out_dir.join(&config.output.metrics).display()
    );
    Ok(())
}

pub fn steady(
    scenario_arg: &str,
    out_dir: &PathBuf,
    t_f_override: Option<&str>,
    t_p_override: Option<&str>,
) -> Result<(), CliError> {
    let text = load_scenario_text(scenario_arg)?;
    let mut config = ScenarioConfig::from_toml_str(&text)?;
    if let Some(e) = t_f_override {
        config.steady.t_f = e.to_string();
    }
    if let Some(e) = t_p_override {
        config.steady.t_p = e.to_string();
    }
    let grid = config.grid()?;
    let params = config.params()?;
    let (t_f, t_p) = config.steady_traces()?;

    std::fs::create_dir_all(out_dir)?;
    let w = solve_steady(&grid, &params, &t_f, &t_p)?;

    // report the discrete elliptic residual alongside the fields
    let bc = dcmd_core::pde::BcSpec::physical_inlets(params.orientation, 0.0, 0.0);
    let op = dcmd_core::pde::assemble(&grid, &params, &bc)?;
    let mut data = dcmd_core::pde::BoundaryData::zeros(&grid);
    data.set(SegmentTag::Gamma1, 0, t_f.clone())?;
    let p_inlet = match params.orientation {
        Orientation::CounterCurrent => SegmentTag::Gamma3,
        Orientation::CoCurrent => SegmentTag::Gamma1,
    };
    data.set(p_inlet, 1, t_p.clone())?;
    let residual = stationary_residual(&op, &data, &w)?;

    io::write_field_snapshot(out_dir, "steady", &grid, 0.0, &w)?;
    println!(
        "stationary solution written to {}; weighted residual {residual:.3e}",
        out_dir.display()
    );
    Ok(())
}

fn verify_params(orientation: Orientation) -> PhysicalParams {
    PhysicalParams {
        alpha_f: 3.0,
        alpha_p: 3.5,
        beta_f: 0.6,
        beta_p: 0.7,
        gamma_f: 0.2,
        gamma_p: 0.1,
        orientation,
    }
}

pub fn parse_grid_arg(s: &str) -> Result<(usize, usize), CliError> {
    let (a, b) = s
        .split_once('x')
        .ok_or_else(|| CliError::Validation(format!("--grid expects NXxNY, got '{s}'")))?;
    let nx = a
        .parse()
        .map_err(|_| CliError::Validation(format!("bad grid dimension '{a}'")))?;
    let ny = b
        .parse()
        .map_err(|_| CliError::Validation(format!("bad grid dimension '{b}'")))?;
    Ok((nx, ny))
}

/// Run the operator checks and return the report lines.
pub fn verify_report(
    grid_dims: (usize, usize),
    trials: usize,
    seed: u64,
) -> Result<Vec<CheckLine>, CliError> {
    let grid = Grid::new(grid_dims.0, grid_dims.1, 2.0)?;
    let mut lines = Vec::new();

    for orientation in [Orientation::CoCurrent, Orientation::CounterCurrent] {
        let tag = match orientation {
            Orientation::CoCurrent => "co",
            Orientation::CounterCurrent => "counter",
        };
        let params = verify_params(orientation);

        let op0 = assemble_scaled_operator(&grid, &params, 0.0)?;
        let defect = check_weighted_symmetry(&op0, trials, seed)?;
        lines.push(CheckLine::new(
            format!("weighted-symmetry-defect-{tag}"),
            defect,
            "<=1e-10",
            defect <= 1e-10,
        ));

        for t in [0.0, 0.5, 1.0] {
            let op = assemble_scaled_operator(&grid, &params, t)?;
            let q = check_dissipativity(&op, trials, seed)?;
            lines.push(CheckLine::new(
                format!("dissipativity-max-quotient-{tag}-t{t}"),
                q,
                "<=1e-10",
                q <= 1e-10,
            ));
        }

        let op1 = assemble_scaled_operator(&grid, &params, 1.0)?;
        let max_re = dense_eigen_max_real_part(&op1)?;
        lines.push(CheckLine::new(
            format!("eigen-max-real-part-{tag}"),
            max_re,
            "<-1e-8",
            max_re < -1e-8,
        ));
    }

    // exponential change of variables: exact round trip
    let params = verify_params(Orientation::CoCurrent);
    let w = FieldPair::from_fn(&grid, |x, y| ((3.0 * x + y).sin() + 2.0, (x * y).cos()));
    let g = cocurrent_transform(&w, &params, &grid, TransformDirection::Forward)?;
    let back = cocurrent_transform(&g, &params, &grid, TransformDirection::Inverse)?;
    let mut roundtrip = 0.0f64;
    for (a, b) in w.f.iter().zip(&back.f).chain(w.p.iter().zip(&back.p)) {
        roundtrip = roundtrip.max((a - b).abs() / a.abs().max(1.0));
    }
    lines.push(CheckLine::new(
        "transform-roundtrip",
        roundtrip,
        "<=1e-13",
        roundtrip <= 1e-13,
    ));

    // diagonalized system agrees and improves under refinement
    let coarse = check_diagonalization(&params, &Grid::new(11, 21, 2.0)?, 0.25, 0.02)?;
    let fine = check_diagonalization(&params, &Grid::new(21, 41, 2.0)?, 0.25, 0.01)?;
    lines.push(CheckLine::new(
        "diagonalization-coarse",
        coarse,
        "finite",
        coarse.is_finite(),
    ));
    lines.push(CheckLine::new(
        "diagonalization-refined",
        fine,
        &format!("<{coarse:.6e}")[..],
        fine < coarse,
    ));

    Ok(lines)
}

pub fn verify(
    grid_arg: &str,
    trials: usize,
    seed: u64,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    let dims = parse_grid_arg(grid_arg)?;
    let lines = verify_report(dims, trials, seed)?;
    let report = io::render_report(&lines);
    print!("{report}");
    if let Some(path) = out {
        io::write_atomic(path, &report)?;
    }
    if lines.iter().all(|l| l.pass) {
        Ok(())
    } else {
        Err(CliError::Numerical(
            "one or more operator checks failed".to_string(),
        ))
    }
}

pub fn convergence(out: Option<&PathBuf>) -> Result<(), CliError> {
    let spatial = mms::spatial_order_study()?;
    let temporal = mms::temporal_order_study()?;

    let mut report = String::new();
    for (h, e) in &spatial.samples {
        report.push_str(&format!("spatial h={h:.6e} error={e:.6e}\n"));
    }
    report.push_str(&format!(
        "spatial-order {:.6} >=1.9 {}\n",
        spatial.order,
        if spatial.order >= 1.9 { "PASS" } else { "FAIL" }
    ));
    for (dt, e) in &temporal.samples {
        report.push_str(&format!("temporal dt={dt:.6e} error={e:.6e}\n"));
    }
    report.push_str(&format!(
        "temporal-order {:.6} >=0.9 {}\n",
        temporal.order,
        if temporal.order >= 0.9 { "PASS" } else { "FAIL" }
    ));
    print!("{report}");
    if let Some(path) = out {
        io::write_atomic(path, &report)?;
    }
    if spatial.order >= 1.9 && temporal.order >= 0.9 {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "observed orders too low: spatial {:.3}, temporal {:.3}",
            spatial.order, temporal.order
        )))
    }
}

/// Expression override for the steady inlets, validated against the `x`-only
/// variable set before use.
pub fn validate_steady_expr(key: &str, src: &str) -> Result<(), CliError> {
    Expr::parse(src, &[Var::X]).map_err(|e| {
        CliError::Validation(format!("{key}: {} (at offset {})", e.message, e.offset))
    })?;
    Ok(())
}
