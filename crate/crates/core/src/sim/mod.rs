//! Closed-loop stand-ins for the camera world: scenes, a detection renderer,
//! and a gimbal plant.

mod plant;
mod scene;
mod world;

pub use plant::{GimbalPlant, GimbalState, PlantConfig};
pub use scene::*;
pub use world::{project, unproject, Frame, TruthBox, World};
