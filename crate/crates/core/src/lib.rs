//! Cross-lingual treebank reordering, annotation projection and parse ensembling.

pub mod align_lex;
pub mod cli;
pub mod demo;
pub mod direction;
pub mod ensemble;
pub mod error;
pub mod eval_report;
pub mod par;
pub mod projection;
pub mod reorder_data;
pub mod reorder_model;
pub mod reorder_rule;
pub mod treebank;

pub use error::{Error, Result};
