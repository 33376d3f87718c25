//! Exact degrees-of-freedom analysis for K-cell MISO interference channels
//! with imperfect CSIT: ZFBF with power control, rate-splitting (RS) and
//! topological rate-splitting (TRS).

pub mod lp;
pub mod optimizer;
pub mod packing;
pub mod plan;
pub mod rational;
pub mod region;
pub mod topology;

pub use rational::{q, Rational};
