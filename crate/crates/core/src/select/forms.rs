//! Negated and singly quantified variants of a basic predicate.

use crate::types::{LiftedPredicate, PredicateKind, Quantifier};

/// Negation, then per argument position ∀P, ∀¬P and ∃P. ∃¬P is left out: it is ¬∀P,
/// which needs a negation over a quantifier and is not a single-step form.
pub fn derive_forms(basic: &LiftedPredicate) -> Vec<LiftedPredicate> {
    if basic.kind != PredicateKind::BasicDynamic {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(1 + 3 * basic.arity());
    out.push(LiftedPredicate::derived(basic, Quantifier::None, None, true).expect("negation of a basic predicate"));
    for i in 0..basic.arity() {
        for (q, neg) in [(Quantifier::Forall, false), (Quantifier::Forall, true), (Quantifier::Exists, false)] {
            out.push(LiftedPredicate::derived(basic, q, Some(i), neg).expect("quantified form of a basic predicate"));
        }
    }
    out
}
