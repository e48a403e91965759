//! Library side of the CLI crate: the acceptance criteria live here so the
//! `verify` subcommand and the integration tests share one implementation.

pub mod verify;
