//! Operator tools and the streaming classification service.
//!
//! The binary wraps [`commands`]; the WebSocket service lives in [`server`]
//! with per-connection logic in [`session`] and message types in
//! [`protocol`].

pub mod commands;
pub mod protocol;
pub mod server;
pub mod session;

pub use protocol::{ClientMessage, ServerMessage};
pub use session::SessionState;
