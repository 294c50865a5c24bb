pub mod asymptotics;
pub mod config;
pub mod electrodynamics;
pub mod error;
pub mod mean;
pub mod quadrature;
pub mod report;
pub mod units;
pub mod variance;
pub mod verify;
