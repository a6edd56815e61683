//! ER-DIMACS: DIMACS CNF extended with quantifier lines.
//!
//! ```text
//! c comment
//! p cnf <num_vars> <num_clauses>
//! e v1 v2 ... 0
//! r <prob> v1 v2 ... 0
//! l1 l2 ... 0
//! ```
//!
//! Quantifier lines may appear in any order but must precede the clauses.
//! Each clause occupies one line and ends with `0`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::{Clause, Literal, Problem, ValidationError, Variable};

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Declared variables that are neither quantified nor used join `X`
    /// instead of being rejected.
    pub free_as_exist: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {msg}")]
    Syntax {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("line {line}: variable {var} is quantified more than once")]
    QuantifiedTwice { line: usize, var: Variable },
    #[error("line {line}: variable {var} occurs in a clause but is not quantified")]
    Unquantified { line: usize, var: Variable },
    #[error("line {line}: probability {prob} is outside [0, 1]")]
    ProbabilityRange { line: usize, prob: f64 },
    #[error("line {line}: clause is not terminated by 0")]
    Unterminated { line: usize },
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("header declares {declared} clauses but {found} were read")]
    ClauseCount { declared: usize, found: usize },
    #[error("variable {var} is declared but neither quantified nor used (see --free-as-exist)")]
    FreeVariable { var: Variable },
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push(Token {
                    text: &line[s..i],
                    column: s + 1,
                });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: s + 1,
        });
    }
    out
}

struct LineCtx {
    line: usize,
}

impl LineCtx {
    fn syntax(&self, tok: &Token<'_>, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            column: tok.column,
            msg: msg.into(),
        }
    }

    fn int(&self, tok: &Token<'_>) -> Result<i64, ParseError> {
        tok.text
            .parse::<i64>()
            .map_err(|_| self.syntax(tok, format!("expected an integer, found `{}`", tok.text)))
    }

    fn var(&self, tok: &Token<'_>, num_vars: u32) -> Result<Variable, ParseError> {
        let n = self.int(tok)?;
        if n < 1 || n > i64::from(num_vars) {
            return Err(self.syntax(tok, format!("variable {n} outside 1..={num_vars}")));
        }
        Ok(Variable::new(n as u32))
    }

    /// Splits off the trailing `0` of a 0-terminated list.
    fn terminated<'t, 'a>(&self, toks: &'t [Token<'a>]) -> Result<&'t [Token<'a>], ParseError> {
        match toks.split_last() {
            Some((last, body)) if last.text == "0" => {
                if let Some(tok) = body.iter().find(|t| t.text == "0") {
                    return Err(self.syntax(tok, "unexpected 0 before the end of the line"));
                }
                Ok(body)
            }
            _ => Err(ParseError::Unterminated { line: self.line }),
        }
    }
}

pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    parse_problem_with(text, ParseOptions::default())
}

pub fn parse_problem_with(text: &str, opts: ParseOptions) -> Result<Problem, ParseError> {
    let mut header: Option<(u32, usize)> = None;
    let mut exist = BTreeSet::new();
    let mut random: BTreeMap<Variable, f64> = BTreeMap::new();
    let mut clauses = Vec::new();
    // (clause, line) for the quantification check at the end.
    let mut clause_lines = Vec::new();
    let mut raw_clauses = 0usize;

    for (i, line) in text.lines().enumerate() {
        let ctx = LineCtx { line: i + 1 };
        let toks = tokens(line);
        let Some(first) = toks.first() else { continue };
        if first.text == "c" {
            continue;
        }
        if first.text == "p" {
            if header.is_some() {
                return Err(ctx.syntax(first, "duplicate header"));
            }
            if toks.len() != 4 || toks[1].text != "cnf" {
                return Err(ctx.syntax(first, "expected `p cnf <num_vars> <num_clauses>`"));
            }
            let nv = toks[2]
                .text
                .parse::<u32>()
                .map_err(|_| ctx.syntax(&toks[2], "bad variable count"))?;
            let nc = toks[3]
                .text
                .parse::<usize>()
                .map_err(|_| ctx.syntax(&toks[3], "bad clause count"))?;
            header = Some((nv, nc));
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(ctx.syntax(first, "expected `p cnf` header before content"));
        };
        match first.text {
            "e" | "r" => {
                if raw_clauses > 0 {
                    return Err(ctx.syntax(first, "quantifier line after clauses"));
                }
                let (prob, rest) = if first.text == "r" {
                    let Some(ptok) = toks.get(1) else {
                        return Err(ctx.syntax(first, "missing probability"));
                    };
                    let prob = ptok
                        .text
                        .parse::<f64>()
                        .map_err(|_| ctx.syntax(ptok, format!("bad probability `{}`", ptok.text)))?;
                    if !(0.0..=1.0).contains(&prob) {
                        return Err(ParseError::ProbabilityRange { line: ctx.line, prob });
                    }
                    (Some(prob), &toks[2..])
                } else {
                    (None, &toks[1..])
                };
                for tok in ctx.terminated(rest)? {
                    let var = ctx.var(tok, num_vars)?;
                    if exist.contains(&var) || random.contains_key(&var) {
                        return Err(ParseError::QuantifiedTwice { line: ctx.line, var });
                    }
                    match prob {
                        Some(p) => {
                            random.insert(var, p);
                        }
                        None => {
                            exist.insert(var);
                        }
                    }
                }
            }
            _ => {
                let mut lits = Vec::new();
                for tok in ctx.terminated(&toks)? {
                    let n = ctx.int(tok)?;
                    if n.unsigned_abs() > u64::from(num_vars) {
                        return Err(ctx.syntax(tok, format!("literal {n} outside ±1..={num_vars}")));
                    }
                    lits.push(Literal::from_dimacs(n).expect("nonzero literal"));
                }
                raw_clauses += 1;
                if let Some(clause) = Clause::new(lits) {
                    clause_lines.push(ctx.line);
                    clauses.push(clause);
                }
            }
        }
    }

    let (num_vars, declared) = header.ok_or(ParseError::MissingHeader)?;
    if declared != raw_clauses {
        return Err(ParseError::ClauseCount {
            declared,
            found: raw_clauses,
        });
    }
    let mut used = BTreeSet::new();
    for (clause, &line) in clauses.iter().zip(&clause_lines) {
        for var in clause.vars() {
            if !exist.contains(&var) && !random.contains_key(&var) {
                return Err(ParseError::Unquantified { line, var });
            }
            used.insert(var);
        }
    }
    for id in 1..=num_vars {
        let var = Variable::new(id);
        if !exist.contains(&var) && !random.contains_key(&var) {
            if opts.free_as_exist {
                exist.insert(var);
            } else {
                return Err(ParseError::FreeVariable { var });
            }
        }
    }

    let problem = Problem {
        num_vars,
        clauses,
        exist,
        random,
    };
    problem.validate()?;
    Ok(problem)
}

/// Serializes a problem in ER-DIMACS. Randomized variables are grouped by
/// probability; probabilities print in shortest round-trip form.
pub fn write_problem(p: &Problem) -> String {
    let mut out = String::new();
    writeln!(out, "p cnf {} {}", p.num_vars, p.clauses.len()).unwrap();
    if !p.exist.is_empty() {
        out.push('e');
        for v in &p.exist {
            write!(out, " {v}").unwrap();
        }
        out.push_str(" 0\n");
    }
    let mut groups: Vec<(f64, Vec<Variable>)> = Vec::new();
    for (&v, &prob) in &p.random {
        match groups.iter_mut().find(|(q, _)| q.to_bits() == prob.to_bits()) {
            Some((_, vs)) => vs.push(v),
            None => groups.push((prob, vec![v])),
        }
    }
    for (prob, vars) in groups {
        write!(out, "r {prob:?}").unwrap();
        for v in vars {
            write!(out, " {v}").unwrap();
        }
        out.push_str(" 0\n");
    }
    for clause in &p.clauses {
        for lit in clause.literals() {
            write!(out, "{lit} ").unwrap();
        }
        out.push_str("0\n");
    }
    out
}
