//! First-passage percolation on the nearest-neighbour lattice: i.i.d. edge
//! weights in `{a, b}`, shortest-path distances and their variance.

mod curve;
mod edges;
mod path;

pub use curve::{fpp_variance_curve, write_fpp_samples_csv, FppConfig, FppResult, FppSample};
pub use edges::{read_edge_snapshot, write_edge_snapshot, Edge, EdgeEnvironment};
pub use path::{box_distance, brute_force_distance, fpp_distance, fpp_distance_between, required_box, FppPath};
