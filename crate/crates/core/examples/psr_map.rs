//! Resonance position over a grid of mismatch factors for a two-source scene.
//!
//! `cargo run --example psr_map`

use mcf_qkd::psr::psr_map;
use mcf_qkd::threshold::log_space;
use mcf_qkd::units::{ChannelParams, CrosstalkSource};
use mcf_qkd::visibility::CrosstalkScene;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ChannelParams::new(0.01, 0.99)?;
    let template = CrosstalkScene::new(
        params,
        vec![
            CrosstalkSource::with_v_omega(0.5, 1.0, 0.1),
            CrosstalkSource::with_v_omega(0.5, -1.0, 3.0),
        ],
        0.0,
    );
    let v = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let map = psr_map(&v, &v, &template, &log_space(1e7, 1e11, 41))?;
    print!("{:>8}", "V1 \\ V2");
    for b in &v {
        print!("{b:>11.2}");
    }
    println!();
    for (i, a) in v.iter().enumerate() {
        print!("{a:>8.2}");
        for s in &map.sigma_star[i] {
            match s {
                Some(s) => print!("{s:>11.3e}"),
                None => print!("{:>11}", "-"),
            }
        }
        println!();
    }
    Ok(())
}
