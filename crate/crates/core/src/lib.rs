//! Complex-time Hamiltonian flows computed with truncated Lie series, and
//! the Kähler structures, potentials and polarizations they generate.

pub mod symcore;
pub mod kahler;
pub mod lieseries;
pub mod complexification;
pub mod geodesic;
pub mod models;
