//! TL-RRT*: sampling-based optimal planning of prefix–suffix paths for teams
//! of robots that must satisfy an LTL task without the next operator.

pub mod formula;
pub mod buchi;
pub mod geometry;
pub mod product;
pub mod rng;
pub mod scenario;
pub mod rrt;
pub mod bias;
pub mod bench;
pub mod svg;
