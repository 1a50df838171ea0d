//! Canonical ASCII rendering; `parse(print(f)) == f` for every formula whose
//! constants are finite.

use alloc::string::String;
use core::fmt::{self, Write};

use super::ast::*;

fn formula_prec(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(..) => 3,
        Formula::And(..) => 4,
        _ => 5,
    }
}

fn term_prec(t: &Term) -> u8 {
    match t {
        Term::Bin(ArithOp::Add | ArithOp::Sub, ..) => 1,
        Term::Bin(ArithOp::Mul | ArithOp::Div, ..) => 2,
        Term::Neg(_) => 3,
        _ => 4,
    }
}

fn wrap(out: &mut String, parens: bool, body: impl FnOnce(&mut String)) {
    if parens {
        out.push('(');
    }
    body(out);
    if parens {
        out.push(')');
    }
}

fn write_index(out: &mut String, i: &Index) {
    match i {
        Index::Lit(k) => {
            let _ = write!(out, "{k}");
        }
        Index::Var(v) => out.push_str(v),
    }
}

fn write_value(out: &mut String, v: &IndexValue) {
    match v {
        IndexValue::Int(k) => {
            let _ = write!(out, "{k}");
        }
        IndexValue::Name(n) => out.push_str(n),
    }
}

pub fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::Const(c) => {
            let _ = write!(out, "{c}");
        }
        Term::Input(w, i) => {
            out.push_str(w.name());
            out.push('[');
            write_index(out, i);
            out.push(']');
        }
        Term::NetOut(w, i) => {
            let _ = write!(out, "N({})[", w.name());
            write_index(out, i);
            out.push(']');
        }
        Term::GroupProb(w, g) => {
            out.push_str("group(");
            match g {
                GroupRef::Name(n) | GroupRef::Var(n) => out.push_str(n),
            }
            if *w == Which::X0 {
                out.push_str(", x0");
            }
            out.push(')');
        }
        Term::InfNormDiff => out.push_str("inf_norm_diff()"),
        Term::Neg(inner) => {
            out.push('-');
            // `-c` would read back as a negative literal
            let parens = matches!(**inner, Term::Const(_)) || term_prec(inner) < 3;
            wrap(out, parens, |o| write_term(o, inner));
        }
        Term::Bin(op, a, b) => {
            let p = term_prec(t);
            wrap(out, term_prec(a) < p, |o| write_term(o, a));
            let _ = write!(out, " {} ", op.symbol());
            wrap(out, term_prec(b) <= p, |o| write_term(o, b));
        }
    }
}

pub fn write_formula(out: &mut String, f: &Formula) {
    match f {
        Formula::Compare(op, a, b) => {
            write_term(out, a);
            let _ = write!(out, " {} ", op.symbol());
            write_term(out, b);
        }
        Formula::Prop(p) => out.push_str(p),
        Formula::Not(a) => {
            out.push('!');
            wrap(out, formula_prec(a) < 5 || matches!(**a, Formula::Compare(..)), |o| write_formula(o, a));
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Iff(a, b) => {
            let p = formula_prec(f);
            let sym = match f {
                Formula::And(..) => "&",
                Formula::Or(..) => "|",
                _ => "<->",
            };
            wrap(out, formula_prec(a) < p, |o| write_formula(o, a));
            let _ = write!(out, " {sym} ");
            wrap(out, formula_prec(b) <= p, |o| write_formula(o, b));
        }
        Formula::Implies(a, b) => {
            wrap(out, formula_prec(a) <= 2, |o| write_formula(o, a));
            out.push_str(" -> ");
            wrap(out, formula_prec(b) <= 2, |o| write_formula(o, b));
        }
        Formula::BigAnd(q) | Formula::BigOr(q) => {
            out.push_str(if matches!(f, Formula::BigAnd(_)) { "all " } else { "any " });
            let tuple = q.vars.len() > 1;
            wrap(out, tuple, |o| {
                for (i, v) in q.vars.iter().enumerate() {
                    if i > 0 {
                        o.push_str(", ");
                    }
                    o.push_str(v);
                }
            });
            out.push_str(" in [");
            for (i, t) in q.domain.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                wrap(out, tuple, |o| {
                    for (k, v) in t.iter().enumerate() {
                        if k > 0 {
                            o.push_str(", ");
                        }
                        write_value(o, v);
                    }
                });
            }
            out.push_str("] { ");
            write_formula(out, &q.body);
            out.push_str(" }");
        }
    }
}

pub fn print(f: &Formula) -> String {
    let mut s = String::new();
    write_formula(&mut s, f);
    s
}

pub fn print_constraint(c: &Constraint) -> String {
    let mut s = String::new();
    if let Some(eps) = c.epsilon {
        let _ = write!(s, "forall_ball({eps}): ");
    }
    write_formula(&mut s, &c.formula);
    s
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_term(&mut s, self);
        f.write_str(&s)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_constraint(self))
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::{parse, parse_constraint};
    use super::*;

    #[test]
    fn round_trips_documented_examples() {
        for src in ["N(xadv)[3] >= 0.52", "P -> (Q -> P)"] {
            let f = parse(src).unwrap();
            assert_eq!(print(&f), src);
            assert_eq!(parse(&print(&f)).unwrap(), f);
        }
        let c = parse_constraint("forall_ball(0.4):   inf_norm_diff()<=0.01").unwrap();
        assert_eq!(print_constraint(&c), "forall_ball(0.4): inf_norm_diff() <= 0.01");
        assert_eq!(parse_constraint(&print_constraint(&c)).unwrap(), c);
    }

    #[test]
    fn minimal_parentheses() {
        let cases = [
            ("(P -> Q) -> R", "(P -> Q) -> R"),
            ("P -> Q -> R", "P -> (Q -> R)"),
            ("(P & Q) | R", "P & Q | R"),
            ("P & (Q | R)", "P & (Q | R)"),
            ("P <-> (Q <-> R)", "P <-> (Q <-> R)"),
            ("!(P & Q)", "!(P & Q)"),
            ("!!P", "!!P"),
            ("!(N(x0)[0] <= 1)", "!(N(x0)[0] <= 1)"),
            ("1 - (2 - 3) <= 2 * (1 + x0[1])", "1 - (2 - 3) <= 2 * (1 + x0[1])"),
            ("-(1) <= --N(x0)[2]", "-(1) <= --N(x0)[2]"),
            ("all (a, b) in [(0, 1), (1, 0)] { N(xadv)[a] >= N(xadv)[b] }", "all (a, b) in [(0, 1), (1, 0)] { N(xadv)[a] >= N(xadv)[b] }"),
        ];
        for (src, want) in cases {
            let f = parse(src).unwrap();
            assert_eq!(print(&f), want);
            assert_eq!(parse(want).unwrap(), f);
        }
    }
}
