//! Files bundled with the crate: the blocks-world domain, the L-shape
//! example with its reference theory, and the standard constraint library.

use crate::advice::ConstraintLibrary;
use crate::domain::{parse_domain, Domain};
use crate::logic::parse::{parse_example, parse_theory, GroundExample};
use crate::logic::term::Theory;

pub const BLOCKS_DOM: &str = include_str!("../data/blocks.dom");
pub const LSHAPE_FACTS: &str = include_str!("../data/lshape.facts");
pub const LSHAPE_TRUTH: &str = include_str!("../data/lshape_truth.thy");
pub const STD_CONSTRAINTS: &str = include_str!("../data/std.constraints");

pub fn blocks_domain() -> Domain {
    parse_domain(BLOCKS_DOM).expect("bundled domain parses")
}

pub fn lshape_example() -> GroundExample {
    parse_example(LSHAPE_FACTS).expect("bundled example parses")
}

pub fn lshape_truth() -> Theory {
    parse_theory(LSHAPE_TRUTH).expect("bundled theory parses")
}

pub fn std_library() -> ConstraintLibrary {
    ConstraintLibrary::parse(STD_CONSTRAINTS).expect("bundled library parses")
}
