//! Self-avoiding walks on graphs described by finitely many cone types of a
//! tree decomposition: configurations, their grammars, generating-function
//! coefficients, and a brute-force oracle to check all of it against.

pub mod alphabet;
pub mod config;
pub mod contraction;
pub mod corpus;
pub mod decomposition;
pub mod error;
pub mod grammar;
pub mod limits;
pub mod mcfg;
pub mod oracle;
pub mod series;

pub use alphabet::{Alphabet, Symbol, Word};
pub use error::{Error, Result};
pub use limits::Limits;
pub use series::{ExactSeries, FloatSeries, TruncatedSeries};
