//! Multiuser interference diversity in underlay cognitive multiple-access
//! channels with line-of-sight (Rician) interference, and random aerial
//! beamforming over the basis patterns of a parasitic-array antenna.
//!
//! The numerical modules are generic over [`Scalar`] (`f32` or `f64`);
//! the aliases below fix the scalar to `f64`, which is what the simulator
//! front end and the validation suite use.

pub mod analytic;
pub mod channels;
pub mod espar;
pub mod error;
mod linalg;
pub mod rab;
pub mod scalar;
pub mod simulator;
pub mod stats;
pub mod validation;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ComplexGain = num_complex::Complex<f64>;
pub type RicianSpec = analytic::RicianSpec<f64>;
pub type RatioDistParams = analytic::RatioDistParams<f64>;
pub type ScalingLawEval = analytic::ScalingLawEval<f64>;
pub type FadingSpec = channels::FadingSpec<f64>;
pub type ChannelModel = channels::ChannelModel<f64>;
pub type ChannelRealization = channels::ChannelRealization<f64>;
pub type RabWeights = rab::RabWeights<f64>;
pub type EquivalentChannels = rab::EquivalentChannels<f64>;
pub type EsparConfig = espar::EsparConfig<f64>;
pub type BasisSet = espar::BasisSet<f64>;
pub type NetworkConfig = simulator::NetworkConfig<f64>;
pub type SlotOutcome = simulator::SlotOutcome<f64>;
pub type CapacityEstimate = simulator::CapacityEstimate<f64>;
pub type SweepResult = simulator::SweepResult<f64>;
pub type EmpiricalDist = stats::EmpiricalDist<f64>;
pub type KsReport = stats::KsReport<f64>;
