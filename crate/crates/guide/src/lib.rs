//! Doc-test carrier for the mdbook guide in `book/`.
//!
//! mdbook renders the chapters but cannot compile their snippets against
//! this workspace's crates. Each chapter is therefore also included here
//! as module documentation, so `cargo test --doc` runs every code block
//! in the book. If a snippet drifts from the library, the build breaks.
//!
//! Render the book itself with `mdbook build book/` (requires mdbook).

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/instances.md")]
pub mod instances {}

#[doc = include_str!("../../../book/src/dyadic-windows.md")]
pub mod dyadic_windows {}

#[doc = include_str!("../../../book/src/identification.md")]
pub mod identification {}

#[doc = include_str!("../../../book/src/countsketch.md")]
pub mod countsketch {}

#[doc = include_str!("../../../book/src/memory.md")]
pub mod memory {}

#[doc = include_str!("../../../book/src/regret.md")]
pub mod regret {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
