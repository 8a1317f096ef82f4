pub mod agents;
pub mod bandit;
pub mod experiments;
pub mod grammar;
pub mod lexicon;
pub mod metrics;
pub mod mutation;
pub mod pareto;
pub mod report;
