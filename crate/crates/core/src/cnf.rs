//! CNF formulas: representation, DIMACS parsing and writing, and random
//! K-SAT instance generation.

use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

use crate::rng::Rng;

/// A variable or its negation. Variables are indexed from 1, DIMACS style.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal(i32);

impl Literal {
    /// Builds the literal for `var` (positive) or `¬var` (negated).
    ///
    /// # Panics
    ///
    /// Panics if `var` is zero or exceeds `i32::MAX`.
    pub fn new(var: usize, negated: bool) -> Self {
        assert!(var >= 1, "variable indices start at 1");
        let code = i32::try_from(var).expect("variable index too large");
        Literal(if negated { -code } else { code })
    }

    /// Parses a nonzero DIMACS literal code.
    pub fn from_dimacs(code: i32) -> Option<Self> {
        if code == 0 || code == i32::MIN {
            None
        } else {
            Some(Literal(code))
        }
    }

    #[inline]
    pub fn var(self) -> usize {
        self.0.unsigned_abs() as usize
    }

    #[inline]
    pub fn is_negated(self) -> bool {
        self.0 < 0
    }

    #[inline]
    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    /// Whether the literal is satisfied when its variable has `value`.
    #[inline]
    pub fn is_true_under(self, value: bool) -> bool {
        value != self.is_negated()
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One appearance of a variable: which clause, at which position, and with
/// which sign. Carrying the sign here lets hot loops test literal truth
/// without touching the clause storage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occurrence {
    pub clause: u32,
    pub position: u16,
    pub negated: bool,
}

/// An immutable CNF instance.
///
/// Clauses are stored flat in file order; a per-variable occurrence index is
/// built at construction and kept consistent with the clause list. Safe to
/// share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    num_vars: usize,
    width: usize,
    lits: Vec<Literal>,
    clause_start: Vec<u32>,
    occ: Vec<Occurrence>,
    occ_start: Vec<u32>,
    duplicate_vars: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("formula must declare at least one variable")]
    NoVariables,
    #[error("clause {clause}: variable {var} out of range 1..={num_vars}")]
    VariableOutOfRange {
        clause: usize,
        var: usize,
        num_vars: usize,
    },
    #[error("clause {clause} is empty")]
    EmptyClause { clause: usize },
    #[error("formula exceeds the supported size (2^32 - 2 clauses or literals)")]
    TooLarge,
}

impl Formula {
    /// Builds a formula from explicit clauses, validating variable ranges
    /// and constructing the occurrence index.
    pub fn from_clauses(num_vars: usize, clauses: &[Vec<Literal>]) -> Result<Self, FormulaError> {
        let mut lits = Vec::with_capacity(clauses.iter().map(Vec::len).sum());
        let mut clause_start = Vec::with_capacity(clauses.len() + 1);
        clause_start.push(0);
        for clause in clauses {
            lits.extend_from_slice(clause);
            clause_start.push(lits.len() as u32);
        }
        Self::build(num_vars, lits, clause_start)
    }

    /// Internal constructor over flat clause storage. `clause_start` has one
    /// entry per clause plus a final end offset.
    fn build(
        num_vars: usize,
        lits: Vec<Literal>,
        clause_start: Vec<u32>,
    ) -> Result<Self, FormulaError> {
        if num_vars == 0 {
            return Err(FormulaError::NoVariables);
        }
        if lits.len() >= u32::MAX as usize
            || clause_start.len() >= u32::MAX as usize
            || num_vars >= u32::MAX as usize
        {
            return Err(FormulaError::TooLarge);
        }
        let num_clauses = clause_start.len() - 1;

        let mut width = 0usize;
        let mut duplicate_vars = false;
        for c in 0..num_clauses {
            let (lo, hi) = (clause_start[c] as usize, clause_start[c + 1] as usize);
            let clause = &lits[lo..hi];
            if clause.is_empty() {
                return Err(FormulaError::EmptyClause { clause: c });
            }
            if clause.len() > u16::MAX as usize {
                return Err(FormulaError::TooLarge);
            }
            width = width.max(clause.len());
            for (i, lit) in clause.iter().enumerate() {
                if lit.var() > num_vars {
                    return Err(FormulaError::VariableOutOfRange {
                        clause: c,
                        var: lit.var(),
                        num_vars,
                    });
                }
                if clause[..i].iter().any(|prev| prev.var() == lit.var()) {
                    duplicate_vars = true;
                }
            }
        }

        // occurrence index as a CSR layout: counting pass, prefix sums, fill
        let mut occ_start = vec![0u32; num_vars + 2];
        for lit in &lits {
            occ_start[lit.var() + 1] += 1;
        }
        for v in 1..occ_start.len() {
            occ_start[v] += occ_start[v - 1];
        }
        let mut occ = vec![
            Occurrence {
                clause: 0,
                position: 0,
                negated: false
            };
            lits.len()
        ];
        let mut cursor = occ_start.clone();
        for c in 0..num_clauses {
            let lo = clause_start[c] as usize;
            let hi = clause_start[c + 1] as usize;
            for (pos, lit) in lits[lo..hi].iter().enumerate() {
                let slot = &mut cursor[lit.var()];
                occ[*slot as usize] = Occurrence {
                    clause: c as u32,
                    position: pos as u16,
                    negated: lit.is_negated(),
                };
                *slot += 1;
            }
        }

        Ok(Formula {
            num_vars,
            width,
            lits,
            clause_start,
            occ,
            occ_start,
            duplicate_vars,
        })
    }

    #[inline]
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    #[inline]
    pub fn num_clauses(&self) -> usize {
        self.clause_start.len() - 1
    }

    /// Widest clause; equals K for uniform K-SAT instances, 0 if empty.
    #[inline]
    pub fn k(&self) -> usize {
        self.width
    }

    /// Clause density M/N.
    pub fn alpha(&self) -> f64 {
        self.num_clauses() as f64 / self.num_vars as f64
    }

    /// Literals of clause `c`, in input order.
    #[inline]
    pub fn clause(&self, c: usize) -> &[Literal] {
        &self.lits[self.clause_start[c] as usize..self.clause_start[c + 1] as usize]
    }

    pub fn clauses(&self) -> impl Iterator<Item = &[Literal]> + '_ {
        (0..self.num_clauses()).map(move |c| self.clause(c))
    }

    /// All appearances of `var`, ordered by clause id then position, so
    /// repeated appearances within one clause are adjacent.
    #[inline]
    pub fn occurrences(&self, var: usize) -> &[Occurrence] {
        &self.occ[self.occ_start[var] as usize..self.occ_start[var + 1] as usize]
    }

    /// True when some parsed clause repeats a variable (possibly as a
    /// tautology). The generator never produces such clauses.
    pub fn has_duplicate_vars(&self) -> bool {
        self.duplicate_vars
    }
}

/// Counts clauses with no true literal under `value(var)`.
///
/// This walks the clause list directly and shares no state with the
/// incremental solver machinery, so it can serve as an independent check on
/// claimed solutions.
pub fn count_unsatisfied<F: Fn(usize) -> bool>(formula: &Formula, value: F) -> usize {
    formula
        .clauses()
        .filter(|clause| !clause.iter().any(|lit| lit.is_true_under(value(lit.var()))))
        .count()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: expected 'p cnf <vars> <clauses>' header before clause data")]
    MissingHeader { line: usize },
    #[error("line {line}: duplicate header")]
    DuplicateHeader { line: usize },
    #[error("line {line}: malformed header")]
    InvalidHeader { line: usize },
    #[error("line {line}: header declares zero variables")]
    ZeroVariables { line: usize },
    #[error("literal out of range, line {line}")]
    LiteralOutOfRange { line: usize },
    #[error("line {line}: '{token}' is not a literal")]
    InvalidToken { line: usize, token: String },
    #[error("empty clause, line {line}")]
    EmptyClause { line: usize },
    #[error("clause count mismatch: header declares {declared}, input has {found}")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("line {line}: unterminated clause at end of input")]
    UnterminatedClause { line: usize },
}

/// Parses DIMACS CNF text.
///
/// Comment lines start with `c` and may appear anywhere; clauses are
/// zero-terminated and may span lines. Clauses that repeat a variable
/// (including tautologies) are accepted and flagged on the formula.
pub fn parse_dimacs(input: &str) -> Result<Formula, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut lits: Vec<Literal> = Vec::new();
    let mut clause_start: Vec<u32> = vec![0];
    let mut open_clause = false;
    let mut open_clause_line = 0;
    let mut line_no = 0;

    for line in input.lines() {
        line_no += 1;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::DuplicateHeader { line: line_no });
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(ParseError::InvalidHeader { line: line_no });
            }
            let num_vars: usize = fields[2]
                .parse()
                .map_err(|_| ParseError::InvalidHeader { line: line_no })?;
            let num_clauses: usize = fields[3]
                .parse()
                .map_err(|_| ParseError::InvalidHeader { line: line_no })?;
            if num_vars == 0 {
                return Err(ParseError::ZeroVariables { line: line_no });
            }
            header = Some((num_vars, num_clauses));
            continue;
        }

        let (num_vars, num_clauses) = header.ok_or(ParseError::MissingHeader { line: line_no })?;
        for token in trimmed.split_whitespace() {
            let code: i64 = token.parse().map_err(|_| ParseError::InvalidToken {
                line: line_no,
                token: token.to_string(),
            })?;
            if code == 0 {
                if !open_clause {
                    return Err(ParseError::EmptyClause { line: line_no });
                }
                clause_start.push(lits.len() as u32);
                open_clause = false;
                continue;
            }
            if clause_start.len() > num_clauses && !open_clause {
                return Err(ParseError::ClauseCountMismatch {
                    declared: num_clauses,
                    found: num_clauses + 1,
                });
            }
            if code.unsigned_abs() > num_vars as u64 {
                return Err(ParseError::LiteralOutOfRange { line: line_no });
            }
            if !open_clause {
                open_clause = true;
                open_clause_line = line_no;
            }
            lits.push(Literal(code as i32));
        }
    }

    let (num_vars, num_clauses) = header.ok_or(ParseError::MissingHeader {
        line: line_no.max(1),
    })?;
    if open_clause {
        return Err(ParseError::UnterminatedClause {
            line: open_clause_line,
        });
    }
    let found = clause_start.len() - 1;
    if found != num_clauses {
        return Err(ParseError::ClauseCountMismatch {
            declared: num_clauses,
            found,
        });
    }
    Ok(Formula::build(num_vars, lits, clause_start).expect("parser enforces formula invariants"))
}

/// Writes `formula` in DIMACS CNF format. `parse_dimacs` reproduces the
/// formula exactly, clause and literal order included.
pub fn write_dimacs<W: Write>(formula: &Formula, w: &mut W) -> io::Result<()> {
    writeln!(w, "p cnf {} {}", formula.num_vars(), formula.num_clauses())?;
    for clause in formula.clauses() {
        for lit in clause {
            write!(w, "{} ", lit)?;
        }
        writeln!(w, "0")?;
    }
    Ok(())
}

/// `write_dimacs` into a string.
pub fn to_dimacs_string(formula: &Formula) -> String {
    let mut buf = Vec::new();
    write_dimacs(formula, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("DIMACS output is ASCII")
}

/// Clause count for a target density: round(alpha * n_vars), ties to even.
pub fn clause_count(n_vars: usize, alpha: f64) -> usize {
    (alpha * n_vars as f64).round_ties_even() as usize
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenerateError {
    #[error("clause width k={k} must be at least 2")]
    WidthTooSmall { k: usize },
    #[error("need at least k={k} variables, got {n_vars}")]
    TooFewVariables { n_vars: usize, k: usize },
}

/// Generates a uniform random K-SAT instance: each clause picks `k` distinct
/// variables without replacement (partial Fisher-Yates over `1..=n_vars`,
/// undone after each clause) and negates each independently with probability
/// 1/2. Duplicate clauses across the formula are allowed. The same
/// `(n_vars, n_clauses, k, seed)` always yields the same formula.
///
/// Draw order per clause: `k` swap-index draws, then `k` sign draws.
pub fn generate_random_ksat(
    n_vars: usize,
    n_clauses: usize,
    k: usize,
    seed: u64,
) -> Result<Formula, GenerateError> {
    if k < 2 {
        return Err(GenerateError::WidthTooSmall { k });
    }
    if n_vars < k {
        return Err(GenerateError::TooFewVariables { n_vars, k });
    }

    let mut rng = Rng::new(seed);
    let mut perm: Vec<u32> = (1..=n_vars as u32).collect();
    let mut swaps = [0usize; 64];
    assert!(k <= swaps.len(), "clause width too large");

    let mut lits = Vec::with_capacity(n_clauses * k);
    let mut clause_start = Vec::with_capacity(n_clauses + 1);
    clause_start.push(0u32);
    for _ in 0..n_clauses {
        for (j, swap_slot) in swaps.iter_mut().enumerate().take(k) {
            let r = j + rng.index(n_vars - j);
            perm.swap(j, r);
            *swap_slot = r;
        }
        for &var in &perm[..k] {
            let negated = rng.next_bool();
            lits.push(Literal::new(var as usize, negated));
        }
        for j in (0..k).rev() {
            perm.swap(j, swaps[j]);
        }
        clause_start.push(lits.len() as u32);
    }

    Ok(Formula::build(n_vars, lits, clause_start).expect("generator output is always valid"))
}
