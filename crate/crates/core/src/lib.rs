pub mod chain;
pub mod contour;
pub mod error;
pub mod exec;
pub mod ladder;
pub mod linalg;
pub mod model2;
pub mod oracle;
pub mod oscillations;
pub mod semiclassic;
pub mod specfun;
pub mod validation;

pub use error::{Error, Result};
pub use exec::Exec;
