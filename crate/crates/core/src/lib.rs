//! Spectral Galerkin simulator for a whole-core geodynamo: a conducting fluid
//! shell around a rigid, rotating, conducting inner core, inside an
//! insulating exterior.

pub mod audit;
pub mod basis;
pub mod biot_savart;
pub mod config;
pub mod driver;
pub mod dynamo;
pub mod error;
pub mod forms;
pub mod linalg;
pub mod magnetic;
pub mod mechanical;
pub mod par;
pub mod snapshot;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
