//! The chapters of the guide in `book/`, compiled so `cargo test` runs
//! their code blocks.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/lrt.md")]
pub mod lrt {}

#[doc = include_str!("../../../book/src/keys.md")]
pub mod keys {}

#[doc = include_str!("../../../book/src/inner.md")]
pub mod inner {}

#[doc = include_str!("../../../book/src/routing.md")]
pub mod routing {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
