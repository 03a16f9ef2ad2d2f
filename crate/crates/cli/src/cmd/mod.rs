pub mod gwp;
pub mod netplan;
pub mod report;
pub mod route;
pub mod scenario_gen;
pub mod simulate;
