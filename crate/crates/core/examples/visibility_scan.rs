//! Visibility and QBER of a channel with one interfering core as the phase
//! noise grows: seeded Monte Carlo against the closed-form average.
//!
//! `cargo run --example visibility_scan`

use mcf_qkd::noise::McConfig;
use mcf_qkd::threshold::log_space;
use mcf_qkd::units::{ChannelParams, CrosstalkSource, Detuning};
use mcf_qkd::visibility::{qber_estimate, visibility_avg, visibility_mc, CrosstalkScene};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ChannelParams::new(0.01, 0.99)?;
    // an interferer 0.08 nm from the carrier (half a fringe period, so anti-phase) at -30 dB
    let source = CrosstalkSource::new(1e-3, Detuning::WavelengthOffsetNm(0.08), 1.0);
    let scene = CrosstalkScene::new(params, vec![source], 0.0);
    let mc = McConfig::new(50_000, 7);

    println!("clean visibility {:.6}", visibility_avg(&CrosstalkScene::clean(params))?);
    println!("V_omega of the interferer {:+.4}", source.detuning.v_omega(params.delta_t));
    println!("{:>12} {:>10} {:>10} {:>10} {:>8}", "sigma_hz", "V_mc", "stderr", "V_avg", "QBER");
    for sigma in log_space(1e7, 1e11, 9) {
        let s = scene.with_sigma(sigma);
        let est = visibility_mc(&s, &mc);
        println!(
            "{sigma:>12.3e} {:>10.6} {:>10.2e} {:>10.6} {:>8.5}",
            est.mean,
            est.std_err,
            visibility_avg(&s)?,
            qber_estimate(&s, 0.01)?
        );
    }
    Ok(())
}
