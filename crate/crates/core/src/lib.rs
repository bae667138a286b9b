//! Signaling-design analysis for integrated sensing and communication.

pub mod constellation;
pub mod error;
pub mod modulation;
pub mod nr_grid;
pub mod pulse;
pub mod radar_channel;
pub mod seed;
pub mod sensing_stats;
pub mod v2i_sim;

pub use error::{IsacError, Result};
pub use num_complex::Complex64;
