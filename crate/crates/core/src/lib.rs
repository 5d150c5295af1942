pub mod bounds;
pub mod cli;
pub mod measures;
pub mod montecarlo;
pub mod processes;
pub mod quadrature;
pub mod simulate;
