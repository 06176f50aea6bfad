//! Core library for protein-to-molecule translation experiments.
//!
//! Everything in this crate is pure computation on owned data: SMILES
//! parsing and canonicalization, scaffold/fragment extraction, byte-pair
//! tokenization, global sequence alignment and similarity-binned data
//! splitting, affinity labeling rules, a small encoder-decoder transformer
//! with explicit backward passes and warm-start weight surgery, beam and
//! temperature-sampling decoders, the molecule-set benchmark metrics, and
//! the docking rank statistics.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the companion CLI
//! crate carries all file formats and IO.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod biotok;
pub mod chem;
pub mod datapipe;
pub mod decode;
pub mod dockstats;
pub mod frag;
pub mod math;
pub mod metrics;
pub mod nn;
pub mod rng;
pub mod seqalign;

pub use chem::{parse_smiles, Molecule};
pub use rng::Rng;
