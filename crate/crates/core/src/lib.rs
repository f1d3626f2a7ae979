//! Quadrilaterals inscribed in conics: the points, lines and conics they
//! determine, incidence checks over exact rationals or doubles, Poncelet
//! chains, and a diagonal map on twelve-gons.
//!
//! The guide in `book/` walks through each layer; its code blocks run as
//! doctests of this crate.

pub mod claims;
pub mod config;
pub mod conic;
pub mod errata;
pub mod error;
pub mod expr;
pub mod figures;
mod linalg;
pub mod oracle;
pub mod pentagram;
pub mod poncelet;
pub mod projective;
pub mod protocol;
pub mod render;
pub mod sampler;
pub mod scalar;
pub mod scene;

// Chapters of the guide, compiled as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/index.md")]
    mod index {}
    #[doc = include_str!("../../../book/src/scalars.md")]
    mod scalars {}
    #[doc = include_str!("../../../book/src/projective.md")]
    mod projective {}
    #[doc = include_str!("../../../book/src/conics.md")]
    mod conics {}
    #[doc = include_str!("../../../book/src/configurations.md")]
    mod configurations {}
    #[doc = include_str!("../../../book/src/claims.md")]
    mod claims {}
    #[doc = include_str!("../../../book/src/poncelet.md")]
    mod poncelet {}
    #[doc = include_str!("../../../book/src/pentagram.md")]
    mod pentagram {}
    #[doc = include_str!("../../../book/src/scenes.md")]
    mod scenes {}
}
