//! Rough-path integration and discrete gamma hedging.

pub mod error;
pub mod hedging;
pub mod integrate;
pub mod io;
pub mod models;
pub mod paths;
pub mod signature;
pub mod roughpath;

pub use error::{Error, Result};
pub use models::{GreekSet, Instrument, InstrumentSpec, MarketState, PayoffSpec};
pub use roughpath::{BracketPath, LiftKind, RoughPath, Tensor2, TimeGrid, TracePath};
