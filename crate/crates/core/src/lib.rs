//! Population-protocol size estimation.
//!
//! A sequential-interaction simulation engine ([`sim`]), reusable protocol
//! building blocks ([`primitives`]), the uniform leaderless log-size
//! estimation protocol in both its randomized and synthetic-coin variants
//! ([`estimate`]), auxiliary protocols (exact backup, combined upper bound,
//! leader-driven termination; [`variants`]), the closed-form concentration
//! bounds of the analysis ([`bounds`]), and a Monte Carlo harness that
//! checks the empirical distributions against those bounds ([`statlab`]).

pub mod bounds;
pub mod estimate;
pub mod primitives;
pub mod rng;
pub mod sim;
pub mod statlab;
pub mod variants;
