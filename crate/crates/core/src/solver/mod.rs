//! Discrete value function solver.

mod bounds;
mod brute;
mod dp;
mod kinetic;
mod params;
mod paths;
mod payoff;
mod stencil;

pub use bounds::{check_cost_bounds, check_finite_speed, hopf_lax_tolerance, BoundViolation, LeastKinetic};
pub use brute::{brute_force_paths, brute_force_value};
pub use dp::{solve_u, solve_value, solve_value_above, LinearBound, Region, SolverInputs, ValueTable};
pub use kinetic::KineticCost;
pub use params::{default_q_max, FiniteSpeed, Grid, SolverParams};
pub use paths::{backtrack_paths, occupation_times, write_paths_jsonl, PathRecord, PathSet};
pub use payoff::{Payoff, TabulatedPayoff};
pub use stencil::{Stencil, StepCost};

pub(crate) use dp::{solve_prepared, LayerGeom};
