pub mod error;
pub mod exact;
pub mod field;
pub mod fsplit;
pub mod hk;
pub mod ideal;
pub mod local;
pub mod parse;
pub mod poly;
pub mod scan;
pub mod series;
pub mod staircase;
pub mod tame;
pub mod testing;

pub use error::{Error, Result};
