#![no_std]
extern crate alloc;

pub mod cerf;
pub mod family;
pub mod field;
pub mod homology;
pub mod module3;
pub mod rational;
pub mod simplicial;
pub mod stability;

pub use field::{Field, Matrix};
pub use rational::Rational;
