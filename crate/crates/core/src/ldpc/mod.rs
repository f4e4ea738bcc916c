//! A (512, 256) irregular repeat-accumulate LDPC code built by progressive
//! edge growth, periodic parity puncturing, a sum-product decoder and a
//! Monte Carlo BLER simulator for pilot-aided BPSK frames.

mod alist;
mod code;
mod decoder;
mod degree;
mod peg;
mod puncture;
mod sim;

pub use alist::{read_alist, write_alist, CodeSidecar};
pub use code::{LdpcCode, SparseMatrix};
pub use decoder::{bp_decode, DecodeOutput, DecoderConfig, LLR_CLIP};
pub use degree::{DegreeDistribution, Polynomial};
pub use peg::{girth, peg_construct, PegConfig};
pub use puncture::{puncture_mask, puncture_period, PunctureMask};
pub use sim::{min_snr_ldpc, mismatched_llrs, simulate_bler, LdpcSnrSearch, SimConfig, SimRecord};
