pub mod arith;
pub mod format;
pub mod golden;
pub mod guess;
pub mod groebner;
pub mod jones;
pub mod lattice_gb;
pub mod linalg;
pub mod manifest;
pub mod ore;
pub mod pipeline;
pub mod recon;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/sequences.md")]
    mod sequences {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/groebner.md")]
    mod groebner {}
    #[doc = include_str!("../../../book/src/guessing.md")]
    mod guessing {}
    #[doc = include_str!("../../../book/src/epsilon-transport.md")]
    mod epsilon_transport {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
