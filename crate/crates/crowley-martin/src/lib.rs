//! Numerics for the diffusive Crowley-Martin predator-prey system on `[0, L]`
//! with no-flux boundaries.
//!
//! * [`kinetics`]: scalar functions, parameter regimes and the [`Kinetics`] trait.
//! * [`equilibria`]: constant positive equilibria and their predicted count.
//! * [`stability`]: Jacobian, Neumann dispersion, instability bands, index parity and
//!   the large-diffusion nonexistence threshold.
//! * [`sim`]: IMEX simulation with a Lyapunov monitor.
//! * [`steady`]: damped Newton for discrete steady states and multi-start search.
//! * [`limits`]: large-`c` limit systems and rescaled distance checks.

pub mod equilibria;
pub mod error;
pub mod kinetics;
pub mod limits;
mod roots;
pub mod sim;
pub mod stability;
pub mod steady;

pub use equilibria::{expected_count, solve_equilibria, Equilibrium};
pub use error::{Error, Result};
pub use kinetics::{classify_regime, Kinetics, ModelParams, RegimeClass, RegimeTag};
pub use sim::{Field, Grid, Problem};
