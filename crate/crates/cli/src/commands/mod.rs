pub mod count_corpus;
pub mod interpret;
pub mod overlap;
pub mod probe;
pub mod prune;
