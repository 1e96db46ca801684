//! Sample a cube environment, write it as a snapshot and read it back.

use hjb_variance::env::{read_snapshot, write_snapshot};
use hjb_variance::{Environment, LatticeBox, Levels};

fn main() -> hjb_variance::Result<()> {
    let bbox = LatticeBox::new(vec![-8, -8], vec![8, 8])?;
    let env = Environment::sample(bbox, 0.5, Levels::new(0.0, 1.0)?, 42)?;
    println!("{} sites, {} at level a", env.bbox().len(), env.count_a());

    for y in (-3..3).rev() {
        let row: String = (-6..6).map(|x| if env.is_b(&[x, y]).unwrap() { '#' } else { '.' }).collect();
        println!("  {row}");
    }

    let mut buf = Vec::new();
    write_snapshot(&mut buf, &env)?;
    let back = read_snapshot(buf.as_slice())?;
    assert_eq!(back.dense_levels(), env.dense_levels());
    println!("snapshot: {} bytes, round trip ok", buf.len());

    // same seed, same environment
    let again = Environment::sample(env.bbox().clone(), 0.5, env.levels(), 42)?;
    assert_eq!(again.dense_levels(), env.dense_levels());
    Ok(())
}
