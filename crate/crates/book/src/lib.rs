//! Doc-test harness for the guide. Every chapter of `book/src` is included
//! here so `cargo test` runs its Rust snippets against the current library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/charts.md")]
pub mod charts {}
#[doc = include_str!("../../../book/src/dirac.md")]
pub mod dirac {}
#[doc = include_str!("../../../book/src/solver.md")]
pub mod solver {}
#[doc = include_str!("../../../book/src/blowup.md")]
pub mod blowup {}
#[doc = include_str!("../../../book/src/weierstrass.md")]
pub mod weierstrass {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
