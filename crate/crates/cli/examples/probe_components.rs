//! Scratch probe: component-wise tracking errors for the CI scenario.

use dcmd_core::adrc::run_closed_loop_with_snapshots;
use dcmd_core::fields::trace;
use dcmd_core::grid::SegmentTag;
use dcmd_core::scenario::{ScenarioConfig, PAPER_CI_PRESET};

fn main() {
    let mut text = PAPER_CI_PRESET.to_string();
    if std::env::args().any(|a| a == "--feed-only") {
        text = text.replace(
            "reference_p = \"10 * sin(pi/2 * x * t)\"",
            "reference_p = \"0\"",
        );
    }
    if std::env::args().any(|a| a == "--decaying") {
        text = text
            .replace(
                "reference_f = \"15 * sin(pi/2 * x * t)\"",
                "reference_f = \"15 * sin(pi/2 * x * t) * exp(-0.8*t)\"",
            )
            .replace(
                "reference_p = \"10 * sin(pi/2 * x * t)\"",
                "reference_p = \"10 * sin(pi/2 * x * t) * exp(-0.8*t)\"",
            );
    }
    let args: Vec<String> = std::env::args().collect();
    if let Some(pos) = args.iter().position(|a| a == "--noise") {
        let amp: f64 = args[pos + 1].parse().unwrap();
        text = text.replace(
            "[initial]",
            &format!(
                "noise_f = \"{amp} * sin(2*t + 3*x)\"\nnoise_p = \"{amp} * cos(2*t + 3*x)\"\n\n[initial]"
            ),
        );
    }
    let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
    let scn = cfg.build().unwrap();
    let grid = scn.grid;
    let g3 = grid.segment(SegmentTag::Gamma3);

    let times: Vec<f64> = (0..=10).map(|k| k as f64).collect();
    let (result, snapshots) = run_closed_loop_with_snapshots(&scn, &times).unwrap();

    let late: Vec<f64> = result
        .metrics
        .iter()
        .filter(|m| m.t >= 8.0)
        .map(|m| m.tracking_error)
        .collect();
    let late_mean = late.iter().sum::<f64>() / late.len() as f64;
    let early_max = result
        .metrics
        .iter()
        .filter(|m| m.t <= 1.0)
        .map(|m| m.tracking_error)
        .fold(0.0f64, f64::max);
    println!("late-window mean tracking error: {late_mean:.4}");
    println!("max tracking error over [0,1]:  {early_max:.4}");

    for (t, w) in &snapshots {
        let (yf, yp) = trace(w, &g3).unwrap();
        let (r_f, r_p) = scn.reference.sample(&g3, *t);
        let ef: Vec<f64> = yf.iter().zip(&r_f).map(|(a, b)| a - b).collect();
        let ep: Vec<f64> = yp.iter().zip(&r_p).map(|(a, b)| a - b).collect();
        let nef = g3.l2_norm(&ef).unwrap();
        let nep = g3.l2_norm(&ep).unwrap();
        let nrf = g3.l2_norm(&r_f).unwrap();
        let nrp = g3.l2_norm(&r_p).unwrap();
        println!("t={t:5.2}  e_f={nef:9.4}  e_p={nep:9.4}  |r_f|={nrf:8.3}  |r_p|={nrp:8.3}");
    }
}
