pub mod error;
pub mod geometry;
pub mod intersect;
pub mod io;
pub mod octree;
pub mod shapes;
pub mod earclip;
pub mod merge;
pub mod retriangulate;
pub mod loops;
pub mod subsurface;
pub mod containment;
pub mod blocks;
pub mod pipeline;
pub mod fixtures;
pub mod cli;
