pub mod corpus;
pub mod error;
pub mod graphmap;
pub mod nielsen;
pub mod report;
pub mod stabletree;
pub mod stallings;
pub mod traintrack;
pub mod words;

pub use error::{Error, Result};
