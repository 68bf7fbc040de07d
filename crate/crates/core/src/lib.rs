pub mod asymptotics;
pub mod ballgeom;
pub mod cli;
pub mod config;
pub mod criteria;
pub mod error;
pub mod fmt;
pub mod kernel;
pub mod montecarlo;
pub mod norms;
pub mod projection;
pub mod quad;
pub mod special;
pub mod verify;
pub mod weights;
