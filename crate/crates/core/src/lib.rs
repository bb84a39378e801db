//! Symbolic operads: trees, finite table operads, the extended Barratt-Eccles
//! operad, free operads, the W-construction as a rewriting system over exact
//! rational edge lengths, and the height homotopies acting on it.

pub mod bemonoid;
pub mod forest;
pub mod freeop;
pub mod homotopy_lab;
pub mod opcore;
pub mod perm;
pub mod wcons;
