//! The benchmark tautologies for consistency measurements.

use alloc::vec::Vec;

use crate::dsl::{parse, Formula};

#[derive(Debug, Clone, PartialEq)]
pub struct Tautology {
    pub group: &'static str,
    pub source: &'static str,
    pub formula: Formula,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TautologySuite {
    pub entries: Vec<Tautology>,
}

const TRANSPOSITION_CLASSICAL: &str = "((P & Q) -> R) <-> ((P & !R) -> !Q)";
// Same right-hand side with a disjunctive premise; not a classical
// tautology, but the variant the published reference values follow.
const TRANSPOSITION_REFERENCE: &str = "((P | Q) -> R) <-> ((P & !R) -> !Q)";

const ROWS: [(&str, &str); 22] = [
    ("Axiom schemata", "P -> (Q -> P)"),
    ("Axiom schemata", "(P -> (Q -> R)) -> ((P -> Q) -> (P -> R))"),
    ("Axiom schemata", "(!P -> !Q) -> (Q -> P)"),
    ("Primitive propositions", "P | P -> P"),
    ("Primitive propositions", "Q -> P | Q"),
    ("Primitive propositions", "P | Q -> Q | P"),
    ("Primitive propositions", "P | (Q | R) -> Q | (P | R)"),
    ("Primitive propositions", "(Q -> R) -> (P | Q -> P | R)"),
    ("Law of excluded middle", "P | !P"),
    ("Law of contradiction", "!(P & !P)"),
    ("Law of double negation", "P <-> !!P"),
    ("Principles of transposition", "(P <-> Q) <-> (!P <-> !Q)"),
    ("Principles of transposition", TRANSPOSITION_CLASSICAL),
    ("Laws of tautology", "P <-> P & P"),
    ("Laws of tautology", "P <-> P | P"),
    ("Laws of absorption", "(P -> Q) <-> (P <-> P & Q)"),
    ("Laws of absorption", "Q -> (P <-> P & Q)"),
    ("Assoc., comm., dist. laws", "P & (Q | R) <-> P & Q | P & R"),
    ("Assoc., comm., dist. laws", "P | Q & R <-> (P | Q) & (P | R)"),
    ("De Morgan's laws", "!(P & Q) <-> !P | !Q"),
    ("De Morgan's laws", "!(P | Q) <-> !P & !Q"),
    ("Material excluded middle", "(P -> Q) | (Q -> P)"),
];

impl TautologySuite {
    fn build(transposition: &'static str) -> Self {
        let entries = ROWS
            .iter()
            .map(|&(group, src)| {
                let source = if src == TRANSPOSITION_CLASSICAL { transposition } else { src };
                Tautology { group, source, formula: parse(source).expect("suite formulas parse") }
            })
            .collect();
        TautologySuite { entries }
    }

    /// The 22 laws, all classical tautologies.
    pub fn classical() -> Self {
        Self::build(TRANSPOSITION_CLASSICAL)
    }

    /// The 22 laws with the second transposition row in the form the
    /// reference consistency values were computed for.
    pub fn reference() -> Self {
        Self::build(TRANSPOSITION_REFERENCE)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{holds, Leaf, Valuation};

    struct Bits(u8, Vec<alloc::string::String>);

    impl Valuation for Bits {
        fn leaf(&self, _: &Leaf) -> Option<f64> {
            None
        }

        fn prop(&self, name: &str) -> Option<bool> {
            self.1.iter().position(|v| v == name).map(|i| self.0 >> i & 1 == 1)
        }
    }

    fn is_tautology(f: &Formula) -> bool {
        let vars = f.props();
        (0..1u8 << vars.len()).all(|b| holds(f, &Bits(b, vars.clone())).unwrap())
    }

    #[test]
    fn classical_suite_is_all_tautologies() {
        let s = TautologySuite::classical();
        assert_eq!(s.len(), 22);
        for t in &s.entries {
            assert!(is_tautology(&t.formula), "{}", t.source);
            assert!(t.formula.props().len() <= 3);
        }
    }

    #[test]
    fn reference_suite_differs_in_one_row() {
        let (c, r) = (TautologySuite::classical(), TautologySuite::reference());
        let diff: Vec<usize> = (0..22).filter(|&i| c.entries[i] != r.entries[i]).collect();
        assert_eq!(diff, [12]);
        assert!(!is_tautology(&r.entries[12].formula));
    }
}
