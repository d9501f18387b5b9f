//! Alphabets, distributions, deterministic functions and memoryless channels.

mod alphabet;
mod channel;
mod function;
mod instance;
mod pmf;
pub mod seq;

pub use alphabet::Alphabet;
pub use channel::DMChannel;
pub use function::DetFunction;
pub use instance::NoisyComputationInstance;
pub use pmf::{Pmf, PROB_TOL};
