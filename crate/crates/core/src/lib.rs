pub mod audio;
pub mod condition;
pub mod embed;
pub mod error;
pub mod experiments;
pub mod fx;
pub mod matrix;
pub mod pipeline;
pub mod probe;
pub mod projection;
pub mod seeding;

pub use error::{Error, Result};
