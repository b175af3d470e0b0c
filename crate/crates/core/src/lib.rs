//! Exact and numerical checks for paramodular groups, their cusps, Igusa's
//! weight 10 cusp form, Shioda surface intersection numbers and genus 2
//! Voronoi cones.

pub mod cusps;
pub mod error;
pub mod exact;
pub mod groups;
pub mod invariants;
pub mod real;
pub mod theta;
pub mod verify;
pub mod voronoi;

pub use error::{Error, Result};
