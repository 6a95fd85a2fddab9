//! Multiple-merger coalescents under fluctuating population size, and the
//! Cannings models that converge to them.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod math;
pub mod measures;
pub mod profiles;
pub mod scenario;
pub mod seed;
pub mod limit;
pub mod newick;
pub mod cannings;
pub mod harness;
