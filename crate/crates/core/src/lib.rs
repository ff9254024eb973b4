pub mod asymptotics;
pub mod cli;
pub mod cover_counts;
pub mod exact_kernel;
pub mod oracle;
pub mod sampler;
pub mod series;
