//! 2-level SLOPE regression, end to end: exact proximal operators, a FISTA
//! solver for the penalized program, asymptotic state-evolution analytics,
//! the TPP/FDP trade-off searches, and a reproducible simulation harness
//! that cross-validates the asymptotic predictions at finite sample sizes.

pub mod asymptotics;
pub mod gauss;
pub mod mat;
pub mod prox;
pub mod sim;
pub mod solver;
pub mod tradeoff;
