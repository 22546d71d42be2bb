//! Phase stochastic resonance: two interferers whose noise is damped at
//! different rates give the threshold an interior maximum in σ, here tall
//! enough to open a window where the key is never lost.
//!
//! `cargo run --example psr_sweep`

use mcf_qkd::psr::find_psr;
use mcf_qkd::threshold::{log_space, threshold_vs_noise, SweepGrid, ThresholdResult};
use mcf_qkd::units::{ChannelParams, CrosstalkSource};
use mcf_qkd::visibility::CrosstalkScene;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ChannelParams::new(0.01, 0.99)?;
    let sources = vec![
        CrosstalkSource::with_v_omega(0.85, 1.0, 0.1),
        CrosstalkSource::with_v_omega(0.15, -1.0, 3.0),
    ];
    let grid = SweepGrid::new(log_space(1e7, 1e11, 41), CrosstalkScene::new(params, sources, 0.0))?;
    let points = threshold_vs_noise(&grid)?;
    for p in &points {
        let c_bar = grid.scene_template.with_sigma(p.sigma_hz).mean_harmonic()?;
        let mark = if matches!(p.result, ThresholdResult::NoEffect) { "  no effect" } else { "" };
        println!("{:>12.3e}  C = {c_bar:+.4}  s*/s_inf = {:>9.4}{mark}", p.sigma_hz, p.normalized);
    }
    match find_psr(&grid)? {
        Some(s) => println!("resonance at sigma* = {s:.4e} Hz"),
        None => println!("no interior maximum"),
    }
    Ok(())
}
