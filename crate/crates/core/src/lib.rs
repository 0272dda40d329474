//! A universal kernel for regular languages.
//!
//! Strings over a finite alphabet are compared by counting the labeled DFAs that
//! accept both of them. The crate evaluates that kernel exactly (by enumerating
//! transition tables) or by Monte Carlo sampling with a Chernoff-backed sample
//! budget, builds the explicit finite-support feature map behind it, and trains a
//! dual perceptron whose support strings describe a learned regular language.

pub mod automata;
pub mod embedding;
pub mod error;
pub mod kernel;
pub mod learner;
pub mod verify;

pub use automata::{parse_dfa, sample_dfa, serialize_dfa, Alphabet, Dfa, DfaSpace};
pub use error::{Error, Result};
pub use kernel::{gram_matrix, kernel_value, GramMatrix, KernelParams, KernelValue, Mode, Scaling};
pub use learner::{predict, train, Dataset, Label, PerceptronModel};
