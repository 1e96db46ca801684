//! Exact integral of the piecewise-constant potential along a straight segment.

use hjb_variance::geometry::segment_pieces;
use hjb_variance::{Environment, LatticeBox, Levels};

fn main() -> hjb_variance::Result<()> {
    let x0 = [0.25, 0.5];
    let x1 = [3.75, 1.9];
    for p in segment_pieces(&x0, &x1) {
        println!("cube {:?}  fraction {:.4}", p.cube, p.frac);
    }

    let env = Environment::sample(LatticeBox::new(vec![-1, -1], vec![5, 5])?, 0.5, Levels::new(0.0, 1.0)?, 7)?;
    let exact = env.segment_potential_integral(&x0, &x1, 1.0)?;

    // midpoint rule for comparison
    let n = 200_000;
    let mut riemann = 0.0;
    for i in 0..n {
        let s = (i as f64 + 0.5) / n as f64;
        let x = [x0[0] + s * (x1[0] - x0[0]), x0[1] + s * (x1[1] - x0[1])];
        riemann += env.potential_at(&x)? / n as f64;
    }
    println!("exact {exact:.8}  midpoint rule {riemann:.8}");
    Ok(())
}
