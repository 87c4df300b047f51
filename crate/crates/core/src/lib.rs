//! Fixed-length q-ary feedback codes against adversarial substitution errors.
//!
//! The crate is organised around the *state* of a questioning game: a vector
//! `c` whose entry `c_i` counts the candidate messages that can still absorb
//! `i` more errors. One channel use is a question that partitions the
//! candidates into `q` parts; each possible answer reduces the state.
//!
//! * [`state`]: states, partitions, the reduction rule and its inverse.
//! * [`bounds`]: volume and translated-volume converses, rate-region curves.
//! * [`solver`]: exact winning-state decision with strategy extraction.
//! * [`table`]: the recursive achievability table and its explicit partitions.
//! * [`codec`]: executable encoder/decoder built from a strategy or the table.
//! * [`channel`]: adaptive adversaries and exhaustive verification.
//!
//! States are written bottom-up, `c_0,c_1,...,c_e`, everywhere in this crate.
//!
//! ```
//! use fbcode_core::codec::FeedbackCode;
//! use fbcode_core::solver::Solver;
//! use fbcode_core::{Alphabet, State};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let q = Alphabet::new(3)?;
//! let mut solver = Solver::new(q);
//! let start: State = "0,9".parse()?;
//! assert!(solver.decide(&start, 4)?);
//! let code = FeedbackCode::from_strategy(solver.extract_strategy(&start, 4)?, q, 9, 1)?;
//!
//! // Message 4 over a channel that corrupts the first symbol.
//! let mut received = Vec::new();
//! for round in 0..code.block_length() {
//!     let sent = code.encode_step(4, &received)?;
//!     received.push(if round == 0 { (sent + 1) % 3 } else { sent });
//! }
//! assert_eq!(code.decode(&received)?, 4);
//! # Ok(())
//! # }
//! ```

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bounds;
pub mod channel;
pub mod codec;
mod error;
pub mod solver;
pub mod state;
pub mod table;

pub use error::Error;
pub use state::{Alphabet, Partition, ReductionOutcome, State};

pub type Result<T, E = Error> = core::result::Result<T, E>;
