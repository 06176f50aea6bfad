pub mod checkpoint;
pub mod tsv;
