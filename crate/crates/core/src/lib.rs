//! Numerical laboratory for the singular elliptic equation `Δu = u⁻ᵖ + f`,
//! its mollified monotone densities and Almgren frequency, quantitative
//! symmetry of blow-ups, and the geometry of the rupture set `{u = 0}`.

pub mod field;
pub mod exact;
pub mod quad;
pub mod density;
pub mod solver;
pub mod symmetry;
pub mod gmt;
