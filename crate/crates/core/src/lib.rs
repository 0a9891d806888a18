pub mod geometry;
pub mod marker;
pub mod vehicle;
pub mod control;
pub mod msp;
pub mod planning;
pub mod harness;
