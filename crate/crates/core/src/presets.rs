//! Parameter sets of the three worked examples.

use crate::channels::{IdeParams, IdeTriple};

pub const EXAMPLE_D: usize = 16;

/// Noiseless channel when the target is absent, full depolarization when present.
pub fn example1(theta1: f64) -> IdeParams {
    IdeParams::new(EXAMPLE_D, IdeTriple::IDENTITY, IdeTriple::DEPOLARIZE, theta1, 0.5)
        .expect("example 1 parameters are valid")
}

pub const EXAMPLE1_THETAS: [f64; 3] = [0.01, 0.02, 0.05];

/// State 1 fixed at `(0.8, 0.1, 0.1)`, equal priors and weights.
pub fn example2(state2: IdeTriple) -> IdeParams {
    IdeParams::new(EXAMPLE_D, IdeTriple::new(0.8, 0.1, 0.1), state2, 0.5, 0.5)
        .expect("example 2 parameters are valid")
}

pub const EXAMPLE2_STATE2: [IdeTriple; 4] = [
    IdeTriple::new(0.2, 0.7, 0.1),
    IdeTriple::new(0.4, 0.5, 0.1),
    IdeTriple::new(0.6, 0.3, 0.1),
    IdeTriple::new(0.8, 0.1, 0.1),
];

/// Same channel as example 1; the receiver's entangled halves are depolarized.
pub fn example3(theta1: f64) -> IdeParams {
    example1(theta1)
}

pub const EXAMPLE3_THETAS: [f64; 2] = [0.05, 0.5];
pub const EXAMPLE3_ALPHA_TILDES: [f64; 3] = [0.95, 0.8, 0.5];
