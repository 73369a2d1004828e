//! placeholder
pub struct Configuration;
pub struct Solution;
pub struct ShockGraph;
pub enum Problem {}
pub enum Regime {}
