//! PDDL subset: reading completed domains, writing partial ones, extracting candidates.

pub mod domain;
pub mod partial;
pub mod sexpr;

pub use domain::{parse_domain, parse_domain_lenient, serialize_domain, ActionDecl, Diagnostic, Literal, PddlAtom, PddlDomain, PredicateDecl, TypedVar};
pub use partial::{extract_candidates, serialize_partial, Extraction, TODO_SENTINEL};
