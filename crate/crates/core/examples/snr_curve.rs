//! Threshold crosstalk in dB (the "SNR" curve) versus phase-noise width for a
//! single interferer, normalized to its infinite-noise value.
//!
//! `cargo run --example snr_curve`

use mcf_qkd::threshold::{log_space, snr_curve, threshold_vs_noise, SweepGrid};
use mcf_qkd::units::{ChannelParams, CrosstalkSource};
use mcf_qkd::visibility::CrosstalkScene;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ChannelParams::new(0.01, 0.99)?;
    for v in [-1.0, 0.5] {
        let scene = CrosstalkScene::new(params, vec![CrosstalkSource::with_v_omega(1.0, v, 1.0)], 0.0);
        let grid = SweepGrid::new(log_space(1e7, 1e11, 9), scene)?;
        println!("V_omega = {v:+}");
        println!("{:>12} {:>10} {:>10} {:>11}", "sigma_hz", "kind", "SNR (dB)", "normalized");
        for (snr, t) in snr_curve(&grid)?.iter().zip(threshold_vs_noise(&grid)?) {
            println!(
                "{:>12.3e} {:>10} {:>10.3} {:>11.5}",
                snr.sigma_hz,
                snr.result.kind_name(),
                snr.snr_db,
                t.normalized
            );
        }
        println!();
    }
    Ok(())
}
