//! Correct-by-construction task planning and control for teams of robots that
//! transport unactuated objects.
//!
//! The crate is organised bottom-up:
//!
//! - [`ltl`]: LTL parsing, negation normal form, tableau translation to Büchi
//!   automata, and an independent lasso-word semantics.
//! - [`world`]: the scenario model (workspace, regions of interest, robots,
//!   objects, grasp configurations, packing and power predicates).
//! - [`ts`]: the coupled transition system over discrete robot/object/grasp states.
//! - [`product`]: the product Büchi automaton and an exact prefix-suffix planner.
//! - [`planner`]: a sampling-based prefix-suffix planner growing trees over the
//!   product space.
//! - [`control`]: the continuous layer (point-world transform, navigation
//!   function, adaptive navigation and transport controllers, integration).
//! - [`executor`]: runs discrete plans through the continuous layer and checks
//!   the resulting behaviors.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the `parallel`
//! feature is enabled and falls back to plain iterators otherwise.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod executor;
pub mod geom;
pub mod ltl;
pub mod par;
pub mod planner;
pub mod product;
pub mod ts;
pub mod world;

pub use ltl::{Formula, LassoWord, Nba};

pub use world::Scenario;
