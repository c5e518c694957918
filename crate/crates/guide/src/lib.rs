//! The book under `book/src`, included chapter by chapter so that its Rust
//! snippets compile and run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/elliptic.md")]
pub mod elliptic {}

#[doc = include_str!("../../../book/src/frobenius.md")]
pub mod frobenius {}

#[doc = include_str!("../../../book/src/bloch.md")]
pub mod bloch {}

#[doc = include_str!("../../../book/src/susy.md")]
pub mod susy {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
