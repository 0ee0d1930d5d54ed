pub mod anchors;
pub mod baselines;
pub mod error;
pub mod harness;
pub mod io;
pub mod lti;
pub mod matrix;
pub mod simulators;
pub mod snn;
pub mod spectral;
