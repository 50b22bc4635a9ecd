pub mod quad;
mod roots;
pub mod sl;
pub mod mittleff;
pub mod forward;
pub mod weyl;
pub mod uniqueness;
pub mod inverse;

/// Chapters of the mdbook guide, compiled here so their snippets run as doctests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/mittag_leffler.md")]
    mod mittag_leffler {}
    #[doc = include_str!("../../../book/src/forward.md")]
    mod forward {}
    #[doc = include_str!("../../../book/src/weyl.md")]
    mod weyl {}
    #[doc = include_str!("../../../book/src/uniqueness.md")]
    mod uniqueness {}
    #[doc = include_str!("../../../book/src/inverse.md")]
    mod inverse {}
}
