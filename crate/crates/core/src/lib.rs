//! Shared data model and the corpus-level algorithms: CDX parsing, URL
//! language and spam filtering, balanced sampling, language identification
//! and statistics.

pub mod cdx;
pub mod lang;
pub mod langid;
pub mod layout;
pub mod par;
pub mod reading;
pub mod sampler;
pub mod stats;
pub mod suffix;
pub mod urlfilter;

pub use lang::LangCode;
