//! Gravitational-phase transfer through an entangled atomic channel.
//!
//! A probe atom that shares an internal-state entangled pair with one or more
//! remote atoms crosses a π/2–π–π/2 light-pulse interferometer. After
//! velocity selection, the remote atom's spin statistics carry the same
//! fringe `cos Δφ` as a direct readout, at half the amplitude. The crate
//! covers the state engine, both interferometer routes, cavity preparation
//! of the channel, the transfer protocol, shot/phase-noise analysis, and the
//! choice of channel amplitude.

pub mod channel;
pub mod error;
pub mod interferometer;
pub mod noise;
pub mod numeric;
pub mod optimize;
pub mod protocol;
pub mod state;

pub use channel::{make_channel, prepare_bell, Channel, ChannelSpec};
pub use error::{Error, Result};
pub use interferometer::{InterferometerParams, LaserPhases};
pub use num_complex::Complex64;
pub use protocol::{run_transfer, TransferOutcome};
pub use state::{BasisVector, Ensemble, MomentumIndex, PureState, SpinLabel};
