//! Hardware-free long-take filming engine: a multi-actor tracker, a
//! leniency-aware framing controller, a cue-driven script engine, and the
//! simulator and evaluation harness that close the loop without a gimbal.

pub mod geometry;
pub mod script;
pub mod filter;
pub mod tracker;
pub mod controller;
pub mod sim;
pub mod eval;
pub mod engine;
pub mod session;
pub mod scenes;
