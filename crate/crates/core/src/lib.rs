pub mod lattice;
pub mod law;
pub mod oracle;
pub mod rng;
pub mod scaling;
pub mod special;
pub mod stats;
pub mod walk;
