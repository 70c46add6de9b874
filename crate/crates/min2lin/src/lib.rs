pub mod ring;
pub mod biased;
pub mod cuts;
pub mod ibs;
pub mod system;
pub mod solver;
pub mod oracle;
pub mod cli;
