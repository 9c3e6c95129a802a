//! attostm-core: simulation toolkit for laser-induced tunneling in an
//! ultrafast STM junction.
//!
//! The crate is organized as a pipeline: [`units`] and [`config`] fix the
//! conventions, [`junction`] and [`pulse`] define the system, [`tdse`]
//! propagates it, [`flux`] and [`sfa`] compute tunneling amplitudes two
//! independent ways, and [`saddle`] analyzes the SFA integrand in the
//! complex time plane.

pub mod config;
pub mod error;
pub mod flux;
pub mod grid;
pub mod junction;
pub mod math;
pub mod pulse;
pub mod saddle;
pub mod sfa;
pub mod spectrum;
pub mod tdse;
pub mod units;

pub use config::{GridConfig, JunctionConfig, PulseConfig, RunConfig, SfaConfig, SpectrumConfig};
pub use error::CoreError;
pub use flux::{flux_balance, FluxBalance, FluxOptions, NetCurrentResult};
pub use grid::{SpatialGrid, WaveField};
pub use junction::{PotentialProfile, SampleEigenstate, StaticEigenstate};
pub use pulse::{Waveform, WaveformKind};
pub use saddle::{Damping, Leg, SaddleSolution, Trajectory, TravelTimeAsymptotics};
pub use spectrum::Spectrum;
pub use tdse::{BoundaryTrace, CurrentMap, PropagateOptions, Propagator};
