//! Key-loss threshold: the crosstalk weight at which the visibility falls to
//! 80 %, from the closed form and from bisection on the visibility.
//!
//! `cargo run --example threshold`

use mcf_qkd::threshold::{find_threshold, find_threshold_bisect, infinite_noise_threshold, VisibilityModel};
use mcf_qkd::units::{linear_to_db, ChannelParams, CrosstalkSource};
use mcf_qkd::visibility::CrosstalkScene;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // ideal detectors, one anti-phase interferer: s* = (0.8 - 1)/(-1 - 0.8) = 1/9
    let ideal = ChannelParams::new(0.0, 1.0)?;
    let scene = CrosstalkScene::new(ideal, vec![CrosstalkSource::with_v_omega(1.0, -1.0, 1.0)], 0.0);
    let closed = find_threshold(&scene)?;
    let bisect = find_threshold_bisect(&scene, VisibilityModel::Averaged)?;
    println!("anti-phase interferer: {closed:?}");
    println!("  bisection           : {bisect:?}");
    println!("  infinite-noise s    : {:.9}", infinite_noise_threshold(&ideal)?);

    // the same channel against interferers of every mismatch factor
    let params = ChannelParams::new(0.01, 0.99)?;
    println!("\n{:>8} {:>12} {:>10}", "V_omega", "kind", "s* (dB)");
    for v in [-1.0, -0.5, 0.0, 0.5, 0.7, 1.0] {
        let s = CrosstalkScene::new(params, vec![CrosstalkSource::with_v_omega(1.0, v, 1.0)], 0.0);
        let r = find_threshold(&s)?;
        let db = r.scale().map_or("-".to_string(), |x| format!("{:.3}", linear_to_db(x)));
        println!("{v:>8.2} {:>12} {db:>10}", r.kind_name());
    }
    Ok(())
}
