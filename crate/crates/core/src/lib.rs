pub mod allocation;
pub mod beamformer;
pub mod cli;
pub mod dof_model;
pub mod linalg;
pub mod linksim;
pub mod polyhedra;
