pub mod bias;
pub mod corpus;
pub mod ec;
pub mod learn;
pub mod logic;
pub mod nl;
pub mod pipeline;
pub mod solver;
