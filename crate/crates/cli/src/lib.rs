//! Library surface of the CLI package: the shipped output schema and its
//! validator, reused by the integration tests.

pub mod schema;
