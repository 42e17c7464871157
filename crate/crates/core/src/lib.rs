//! Straight-line flows on translation surfaces and their Z-covers, with
//! exact number-field geometry.

pub mod approx;
pub mod cover;
pub mod cylinders;
pub mod examples;
pub mod flow;
pub mod format;
pub mod intmat;
pub mod numfield;
pub mod surface;
pub mod veech;
