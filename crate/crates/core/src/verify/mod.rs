pub mod exponents;
pub mod probes;
pub mod report;
pub mod sampler;
pub mod stats;
pub mod strichartz;
pub mod tails;
pub mod truncation;
pub mod variance;
