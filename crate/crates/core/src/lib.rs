//! Trajectory generation for a lamp-shaped 6-DOF robot that weighs
//! functional goals against expressive ones.
//!
//! A functional baseline moves straight to the goal. Expressive primitives
//! (gestures, gaze, pauses, approach, light emphasis) are layered on top
//! without changing the final state, and a planner picks the plan that
//! maximizes `F + gamma * E`.

// `!(x > 0.0)` is how NaN gets rejected; joint loops index several arrays.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod io;
pub mod kinematics;
pub mod planner;
pub mod primitives;
pub mod scenarios;
pub mod serve;
pub mod trajectory;
pub mod utility;

pub use error::{Error, Result};
