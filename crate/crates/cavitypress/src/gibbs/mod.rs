//! Partition functions, Gibbs specifications, exact small measures,
//! sampling, and certified conditional-probability brackets.

pub mod bracket;
pub mod markov;
pub mod oracle;
pub mod partition;
pub mod sampler;
pub mod torus;

pub use bracket::{conditional_bracket, ProbInterval};
pub use markov::MarkovOracle;
pub use oracle::{MeasureOracle, PointSource};
pub use partition::{
    partition_boundary, partition_free, rn_bound, sandwich_defect, specification_prob, Model,
};
pub use sampler::{glauber_samples, EmpiricalOracle};
pub use torus::TorusOracle;
