pub mod bubbles;
pub mod dispersion;
pub mod fitlab;
pub mod geometry;
pub mod matsubara;
pub mod orthant;
pub mod quad;
pub mod selfenergy;
pub mod special;
