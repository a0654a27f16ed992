//! Independent oracles and generators shared by the integration tests.

#![allow(dead_code)]

pub mod a3;
pub mod embed_oracle;
pub mod gen;
