//! First-passage percolation: Dijkstra against brute force on a 4x4 box, then the variance curve.

use hjb_variance::fpp::{box_distance, brute_force_distance, fpp_variance_curve, EdgeEnvironment, FppConfig};
use hjb_variance::{LatticeBox, Levels};

fn main() -> hjb_variance::Result<()> {
    let levels = Levels::new(1.0, 2.0)?;
    for seed in 0..5 {
        let env = EdgeEnvironment::sample(LatticeBox::new(vec![0, 0], vec![4, 4])?, 0.5, levels, seed)?;
        let d = box_distance(&env, &[0, 0], &[3, 3])?;
        let brute = brute_force_distance(&env, &[0, 0], &[3, 3])?;
        println!("seed {seed}: dijkstra {}  brute force {brute}  path {:?}", d.distance, d.vertices);
    }

    let cfg = FppConfig { samples: 300, bootstrap_resamples: 1000, ..FppConfig::default() };
    let res = fpp_variance_curve(&cfg)?;
    for p in &res.curve.points {
        println!("|v| = {:>4}  var = {:.3}  var/|v| = {:.4}", p.t, p.variance, p.ratio());
    }
    println!("var/|v| non-increasing within CI: {}", res.curve.ratio_non_increasing());
    Ok(())
}
