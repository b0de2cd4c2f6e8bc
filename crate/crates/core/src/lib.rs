pub mod chem;
pub mod peptide;
pub mod dataset;
pub mod rng;
pub mod ndmath;
pub mod model;
pub mod traineval;
pub mod explain;
pub mod baseline;
