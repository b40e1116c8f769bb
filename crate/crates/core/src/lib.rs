//! Requirements analysis toolkit.
//!
//! * [`language`]: the requirements language (parse and print).
//! * [`classification`]: satisfiability, falsifiability, and vagueness.
//! * [`monitor`]: evaluation of requirements over timed traces.
//! * [`goals`]: AND-OR goal models, happy sets, and designation.
//! * [`switching`]: machine- and mode-switching systems and their equivalence.

pub mod classification;
pub mod exec;
pub mod goals;
pub mod language;
pub mod monitor;
mod rational;
pub mod switching;

pub use exec::Strategy;
pub use rational::{ParseRationalError, Rational};
