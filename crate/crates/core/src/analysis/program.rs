//! Propositional formulas compiled to a postfix program over a fuzzy
//! operator set, evaluated on whole batches of points at once.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dsl::{Formula, LowerError};
use crate::logic::{FuzzyOperatorSet, LogicConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Instr {
    Var(usize),
    Not,
    And,
    Or,
    Implies,
    Iff,
}

#[derive(Debug, Clone)]
pub struct Program {
    code: Vec<Instr>,
    vars: Vec<String>,
    ops: FuzzyOperatorSet,
    depth: usize,
}

impl Program {
    /// Compiles a formula built only from propositional variables and
    /// connectives. Variables are numbered in order of first occurrence.
    pub fn compile(f: &Formula, logic: &LogicConfig) -> Result<Self, LowerError> {
        logic.validate()?;
        let ops = logic.operators()?;
        let vars = f.props();
        let mut code = Vec::new();
        emit(f, &vars, &mut code)?;
        let mut depth: usize = 0;
        let mut max_depth = 0;
        for i in &code {
            match i {
                Instr::Var(_) => depth += 1,
                Instr::Not => {}
                _ => depth -= 1,
            }
            max_depth = max_depth.max(depth);
        }
        Ok(Program { code, vars, ops, depth: max_depth })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn dimension(&self) -> usize {
        self.vars.len()
    }

    pub fn operators(&self) -> &FuzzyOperatorSet {
        &self.ops
    }

    /// Truth value at one point; `point[i]` is the value of `vars()[i]`.
    pub fn eval(&self, point: &[f64]) -> f64 {
        let mut stack = [0.0f64; 64];
        let mut heap = Vec::new();
        let st: &mut [f64] = if self.depth <= stack.len() {
            &mut stack
        } else {
            heap.resize(self.depth, 0.0);
            &mut heap
        };
        let mut sp = 0;
        let ops = &self.ops;
        for i in &self.code {
            match *i {
                Instr::Var(v) => {
                    st[sp] = point[v];
                    sp += 1;
                }
                Instr::Not => st[sp - 1] = ops.negation(st[sp - 1]),
                op => {
                    sp -= 1;
                    let (x, y) = (st[sp - 1], st[sp]);
                    st[sp - 1] = binary(ops, op, x, y);
                }
            }
        }
        st[0]
    }

    /// Evaluates a batch: `columns[i]` holds the values of variable `i` for
    /// every point, all of the same length as `out`.
    pub fn eval_batch(&self, columns: &[&[f64]], out: &mut [f64], scratch: &mut Scratch) {
        let n = out.len();
        scratch.ensure(self.depth, n);
        let ops = &self.ops;
        let mut sp = 0;
        for i in &self.code {
            match *i {
                Instr::Var(v) => {
                    scratch.bufs[sp][..n].copy_from_slice(&columns[v][..n]);
                    sp += 1;
                }
                Instr::Not => {
                    for x in &mut scratch.bufs[sp - 1][..n] {
                        *x = ops.negation(*x);
                    }
                }
                op => {
                    sp -= 1;
                    let (lo, hi) = scratch.bufs.split_at_mut(sp);
                    let (a, b) = (&mut lo[sp - 1][..n], &hi[0][..n]);
                    match op {
                        Instr::And => a.iter_mut().zip(b).for_each(|(x, y)| *x = ops.tnorm(*x, *y)),
                        Instr::Or => a.iter_mut().zip(b).for_each(|(x, y)| *x = ops.snorm(*x, *y)),
                        Instr::Implies => a.iter_mut().zip(b).for_each(|(x, y)| *x = ops.implication(*x, *y)),
                        _ => a.iter_mut().zip(b).for_each(|(x, y)| *x = ops.equivalence(*x, *y)),
                    }
                }
            }
        }
        out.copy_from_slice(&scratch.bufs[0][..n]);
    }
}

#[inline]
fn binary(ops: &FuzzyOperatorSet, op: Instr, x: f64, y: f64) -> f64 {
    match op {
        Instr::And => ops.tnorm(x, y),
        Instr::Or => ops.snorm(x, y),
        Instr::Implies => ops.implication(x, y),
        _ => ops.equivalence(x, y),
    }
}

fn emit(f: &Formula, vars: &[String], code: &mut Vec<Instr>) -> Result<(), LowerError> {
    match f {
        Formula::Prop(p) => {
            let i = vars.iter().position(|v| v == p).ok_or_else(|| LowerError::UnboundProp(p.clone()))?;
            code.push(Instr::Var(i));
        }
        Formula::Not(a) => {
            emit(a, vars, code)?;
            code.push(Instr::Not);
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            emit(a, vars, code)?;
            emit(b, vars, code)?;
            code.push(match f {
                Formula::And(..) => Instr::And,
                Formula::Or(..) => Instr::Or,
                Formula::Implies(..) => Instr::Implies,
                _ => Instr::Iff,
            });
        }
        Formula::Compare(..) | Formula::BigAnd(_) | Formula::BigOr(_) => {
            return Err(LowerError::NotPropositional)
        }
    }
    Ok(())
}

/// Reusable evaluation buffers.
#[derive(Debug, Default)]
pub struct Scratch {
    bufs: Vec<Vec<f64>>,
}

impl Scratch {
    fn ensure(&mut self, depth: usize, n: usize) {
        while self.bufs.len() < depth.max(1) {
            self.bufs.push(vec![0.0; n]);
        }
        for b in &mut self.bufs {
            if b.len() < n {
                b.resize(n, 0.0);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::logic::LogicKind;

    #[test]
    fn scalar_and_batch_agree() {
        let f = parse("((P -> Q) & !R) <-> (P | Q)").unwrap();
        let p = Program::compile(&f, &LogicConfig::new(LogicKind::Yager)).unwrap();
        assert_eq!(p.vars(), ["P", "Q", "R"]);
        let cols: [Vec<f64>; 3] = [
            (0..50).map(|i| i as f64 / 49.0).collect(),
            (0..50).map(|i| ((i * 7) % 50) as f64 / 49.0).collect(),
            (0..50).map(|i| ((i * 13) % 50) as f64 / 49.0).collect(),
        ];
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        let mut out = vec![0.0; 50];
        p.eval_batch(&refs, &mut out, &mut Scratch::default());
        for i in 0..50 {
            assert_eq!(out[i], p.eval(&[cols[0][i], cols[1][i], cols[2][i]]));
        }
    }

    #[test]
    fn rejects_comparisons() {
        let f = parse("x0[0] <= 1").unwrap();
        assert!(Program::compile(&f, &LogicConfig::new(LogicKind::Godel)).is_err());
        let f = parse("P").unwrap();
        assert!(Program::compile(&f, &LogicConfig::new(LogicKind::Dl2)).is_err());
    }
}
