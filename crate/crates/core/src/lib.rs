//! Symbolic calculator for Whitehead products in homotopy groups of spheres.

pub mod db;
pub mod error;
pub mod expr;
pub mod fatwedge;
pub mod groups;
pub mod parser;
pub mod rewrite;
pub mod scenario;
pub mod space;
pub mod typecheck;
pub mod whitehead;

pub use db::RelationDB;
pub use error::{Error, Result};
pub use expr::{format, Expr, Symbol};
pub use groups::{add, coset_eq, order_of, subgroup_generated, Coset, GroupElement, GroupTable, Subgroup};
pub use parser::parse;
pub use rewrite::{normalize, smash, suspend, NormalForm, Step};
pub use space::{Field, Signature, Space, TableKey};
pub use typecheck::typecheck;
