//! Incremental stochastic local search over CNF formulas.
//!
//! The search state tracks, per clause, how many of its literals are
//! currently true, plus two O(1)-sampleable sets: the unsatisfied clauses
//! and the variables occurring in at least one unsatisfied clause. Energy
//! is the number of unsatisfied clauses. All updates are incremental in the
//! occurrences of the flipped variable; nothing rescans the formula.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cnf::Formula;
use crate::rng::Rng;
use crate::sample_set::SampleSet;
use crate::trace::TraceRecorder;

/// Truth values for variables `1..=N`: entry `v - 1` holds variable `v`,
/// so the length equals the formula's variable count.
pub type Assignment = Vec<bool>;

/// Proposal and acceptance rule of the search loop.
///
/// - `Vfms`: propose a variable uniformly from those in unsatisfied clauses,
///   accept by the Metropolis rule.
/// - `Fms`: propose by picking an unsatisfied clause uniformly and then a
///   literal position in it uniformly, accept by the Metropolis rule. This
///   weights variables by how many unsatisfied clauses they sit in.
/// - `FocusedWalk`: propose like `Fms`, always accept. The zero-greediness
///   baseline random walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heuristic {
    Vfms,
    Fms,
    FocusedWalk,
}

impl Heuristic {
    pub fn name(self) -> &'static str {
        match self {
            Heuristic::Vfms => "vfms",
            Heuristic::Fms => "fms",
            Heuristic::FocusedWalk => "focused-walk",
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vfms" => Ok(Heuristic::Vfms),
            "fms" => Ok(Heuristic::Fms),
            "focused-walk" | "focused_walk" => Ok(Heuristic::FocusedWalk),
            other => Err(format!(
                "unknown heuristic '{other}' (expected vfms, fms, or focused-walk)"
            )),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("noise parameter eta must be in (0, 1], got {eta}")]
    InvalidEta { eta: f64 },
}

/// Outcome of one search run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunResult {
    pub solved: bool,
    /// Accepted proposals. The primary time unit in all outputs.
    pub flips: u64,
    /// Loop iterations, accepted or not. Always >= flips.
    pub proposals: u64,
    pub final_energy: usize,
    pub seed: u64,
    pub eta: f64,
    pub heuristic: Heuristic,
}

/// Metropolis acceptance at noise `eta`: downhill and level moves always
/// pass; an uphill move of `delta_e` passes with probability `eta^delta_e`.
/// Draws from `rng` only when `delta_e > 0`.
#[inline]
pub fn metropolis_accept(delta_e: i64, eta: f64, rng: &mut Rng) -> bool {
    if delta_e <= 0 {
        return true;
    }
    let exponent = delta_e.min(i32::MAX as i64) as i32;
    rng.next_f64() < eta.powi(exponent)
}

/// Mutable search state for one run over a shared, immutable formula.
///
/// A state is owned by exactly one run; independent runs (each with its own
/// seed) may proceed in parallel over the same formula.
pub struct SolverState<'a> {
    formula: &'a Formula,
    /// Index 0 unused; entry v holds variable v's value.
    values: Vec<bool>,
    /// Per clause, the number of literals currently true.
    true_count: Vec<u32>,
    /// Clauses with true_count == 0.
    unsat_clauses: SampleSet,
    /// Per variable, the number of unsatisfied clauses containing it.
    unsat_degree: Vec<u32>,
    /// Variables with unsat_degree >= 1 (the focused proposal support).
    unsat_vars: SampleSet,
    /// Some parsed clause repeats a variable: take the grouped update paths.
    has_dups: bool,
    flips: u64,
    proposals: u64,
    seed: u64,
    rng: Rng,
}

impl<'a> SolverState<'a> {
    /// Starts from a uniformly random assignment drawn from `seed` (one
    /// boolean per variable, in index order, before any proposal draws).
    pub fn init(formula: &'a Formula, seed: u64) -> Self {
        let mut rng = Rng::new(seed);
        let mut values = vec![false; formula.num_vars() + 1];
        for v in values.iter_mut().skip(1) {
            *v = rng.next_bool();
        }
        Self::from_parts(formula, values, seed, rng)
    }

    /// Starts from a caller-supplied assignment (`assignment[v - 1]` is
    /// variable v). The seed feeds only the proposal stream.
    ///
    /// # Panics
    ///
    /// Panics if the assignment length differs from the variable count.
    pub fn init_with_assignment(formula: &'a Formula, assignment: &[bool], seed: u64) -> Self {
        assert_eq!(
            assignment.len(),
            formula.num_vars(),
            "assignment length must equal the variable count"
        );
        let mut values = vec![false; formula.num_vars() + 1];
        values[1..].copy_from_slice(assignment);
        Self::from_parts(formula, values, seed, Rng::new(seed))
    }

    fn from_parts(formula: &'a Formula, values: Vec<bool>, seed: u64, rng: Rng) -> Self {
        let m = formula.num_clauses();
        let mut state = SolverState {
            formula,
            values,
            true_count: vec![0; m],
            unsat_clauses: SampleSet::new(m),
            unsat_degree: vec![0; formula.num_vars() + 1],
            unsat_vars: SampleSet::new(formula.num_vars() + 1),
            has_dups: formula.has_duplicate_vars(),
            flips: 0,
            proposals: 0,
            seed,
            rng,
        };
        for c in 0..m {
            let tc = formula
                .clause(c)
                .iter()
                .filter(|lit| lit.is_true_under(state.values[lit.var()]))
                .count() as u32;
            state.true_count[c] = tc;
            if tc == 0 {
                state.unsat_clauses.insert(c as u32);
                state.enter_unsat(c);
            }
        }
        state
    }

    #[inline]
    pub fn formula(&self) -> &Formula {
        self.formula
    }

    /// Number of unsatisfied clauses (the energy E).
    #[inline]
    pub fn energy(&self) -> usize {
        self.unsat_clauses.len()
    }

    /// Number of variables in at least one unsatisfied clause (N_u).
    #[inline]
    pub fn num_unsat_vars(&self) -> usize {
        self.unsat_vars.len()
    }

    #[inline]
    pub fn flips(&self) -> u64 {
        self.flips
    }

    /// Loop iterations so far, accepted or not.
    #[inline]
    pub fn proposals(&self) -> u64 {
        self.proposals
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn value(&self, v: usize) -> bool {
        self.values[v]
    }

    /// Current assignment; entry `v - 1` is variable v.
    pub fn assignment(&self) -> &[bool] {
        &self.values[1..]
    }

    #[inline]
    pub fn true_count(&self, c: usize) -> u32 {
        self.true_count[c]
    }

    #[inline]
    pub fn unsat_degree(&self, v: usize) -> u32 {
        self.unsat_degree[v]
    }

    /// Unsatisfied clause ids in ascending order (for state comparison).
    pub fn unsat_clause_ids(&self) -> Vec<u32> {
        self.unsat_clauses.sorted()
    }

    /// Members of the unsatisfied-variable support in ascending order.
    pub fn unsat_var_ids(&self) -> Vec<u32> {
        self.unsat_vars.sorted()
    }

    /// Energy change if `v` were flipped: clauses that would lose their last
    /// true literal minus clauses that would gain their first. Walks only
    /// v's occurrence list; the state is unmodified.
    pub fn delta_energy(&self, v: usize) -> i64 {
        let value = self.values[v];
        let occs = self.formula.occurrences(v);
        let mut breaks = 0i64;
        let mut makes = 0i64;
        if !self.has_dups {
            // v appears at most once per clause: its literal is the last
            // true one exactly when it is true and the count is 1
            for occ in occs {
                let tc = self.true_count[occ.clause as usize];
                if tc == 0 {
                    makes += 1;
                } else if tc == 1 && value != occ.negated {
                    breaks += 1;
                }
            }
            return breaks - makes;
        }
        let mut i = 0;
        while i < occs.len() {
            let c = occs[i].clause;
            let mut true_here = 0u32;
            let mut false_here = 0u32;
            let mut j = i;
            // occurrences are clause-ordered, so repeats of v in one clause
            // form a contiguous run; count its true/false literals together
            while j < occs.len() && occs[j].clause == c {
                if value != occs[j].negated {
                    true_here += 1;
                } else {
                    false_here += 1;
                }
                j += 1;
            }
            let tc = self.true_count[c as usize];
            if tc == 0 {
                makes += 1;
            } else if tc == true_here && false_here == 0 {
                breaks += 1;
            }
            i = j;
        }
        breaks - makes
    }

    /// Flips `v`, updating every incremental structure and the flip counter.
    pub fn flip(&mut self, v: usize) {
        let formula = self.formula;
        let old = self.values[v];
        self.values[v] = !old;
        let occs = formula.occurrences(v);
        if !self.has_dups {
            for occ in occs {
                let c = occ.clause as usize;
                if old != occ.negated {
                    // v's literal turns false
                    let tc = self.true_count[c] - 1;
                    self.true_count[c] = tc;
                    if tc == 0 {
                        self.unsat_clauses.insert(c as u32);
                        self.enter_unsat(c);
                    }
                } else {
                    // v's literal turns true
                    let tc = self.true_count[c] + 1;
                    self.true_count[c] = tc;
                    if tc == 1 {
                        self.unsat_clauses.remove(c as u32);
                        self.leave_unsat(c);
                    }
                }
            }
            self.flips += 1;
            return;
        }
        let mut i = 0;
        while i < occs.len() {
            let c = occs[i].clause;
            let mut true_before = 0u32;
            let mut j = i;
            while j < occs.len() && occs[j].clause == c {
                if old != occs[j].negated {
                    true_before += 1;
                }
                j += 1;
            }
            let run = (j - i) as u32;
            let false_before = run - true_before;
            let c = c as usize;
            let tc = self.true_count[c];
            let new_tc = tc - true_before + false_before;
            self.true_count[c] = new_tc;
            if tc == 0 {
                // was unsatisfied; v occurs here, so at least one literal
                // just turned true
                self.unsat_clauses.remove(c as u32);
                self.leave_unsat(c);
            } else if new_tc == 0 {
                self.unsat_clauses.insert(c as u32);
                self.enter_unsat(c);
            }
            i = j;
        }
        self.flips += 1;
    }

    /// Clause `c` just became unsatisfied: bump each distinct member
    /// variable's degree, adding fresh ones to the support set.
    fn enter_unsat(&mut self, c: usize) {
        let formula = self.formula;
        let clause = formula.clause(c);
        for (i, lit) in clause.iter().enumerate() {
            let w = lit.var();
            if clause[..i].iter().any(|p| p.var() == w) {
                continue;
            }
            if self.unsat_degree[w] == 0 {
                self.unsat_vars.insert(w as u32);
            }
            self.unsat_degree[w] += 1;
        }
    }

    /// Clause `c` just became satisfied: reverse of `enter_unsat`.
    fn leave_unsat(&mut self, c: usize) {
        let formula = self.formula;
        let clause = formula.clause(c);
        for (i, lit) in clause.iter().enumerate() {
            let w = lit.var();
            if clause[..i].iter().any(|p| p.var() == w) {
                continue;
            }
            self.unsat_degree[w] -= 1;
            if self.unsat_degree[w] == 0 {
                self.unsat_vars.remove(w as u32);
            }
        }
    }

    /// Uniform draw from the variables in unsatisfied clauses: each member
    /// with probability 1/N_u. Requires energy() >= 1.
    #[inline]
    pub fn sample_unsat_variable(&mut self) -> usize {
        self.unsat_vars.sample(&mut self.rng) as usize
    }

    /// Uniform unsatisfied clause, then a uniform literal position in it,
    /// so a variable's probability grows with the number of unsatisfied
    /// clauses it sits in. Requires energy() >= 1. Draw order: clause, then
    /// position.
    #[inline]
    pub fn sample_clause_then_variable(&mut self) -> usize {
        let c = self.unsat_clauses.sample(&mut self.rng) as usize;
        let clause = self.formula.clause(c);
        let pos = self.rng.index(clause.len());
        clause[pos].var()
    }

    /// One iteration of the search loop: propose per the heuristic, accept
    /// per its rule, flip if accepted. Returns whether a flip happened.
    /// Must not be called with energy() == 0.
    pub fn step(&mut self, heuristic: Heuristic, eta: f64) -> bool {
        debug_assert!(self.energy() > 0, "step requires an unsatisfied clause");
        self.proposals += 1;
        let (v, accept) = match heuristic {
            Heuristic::Vfms => {
                let v = self.sample_unsat_variable();
                let delta = self.delta_energy(v);
                (v, metropolis_accept(delta, eta, &mut self.rng))
            }
            Heuristic::Fms => {
                let v = self.sample_clause_then_variable();
                let delta = self.delta_energy(v);
                (v, metropolis_accept(delta, eta, &mut self.rng))
            }
            Heuristic::FocusedWalk => (self.sample_clause_then_variable(), true),
        };
        if accept {
            self.flip(v);
        }
        accept
    }

    /// Runs the loop until solved or until `max_flips` accepted flips
    /// (0 = unbounded). Rejected proposals consume randomness but never
    /// count toward the budget. Trace points are emitted on the recorder's
    /// flip schedule, plus one terminal point.
    pub fn run(
        &mut self,
        heuristic: Heuristic,
        eta: f64,
        max_flips: u64,
        mut trace: Option<&mut TraceRecorder>,
    ) -> Result<RunResult, EngineError> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(EngineError::InvalidEta { eta });
        }
        if let Some(t) = trace.as_deref_mut() {
            t.observe(self.flips, self.proposals, self.energy(), self.num_unsat_vars());
        }
        let solved = loop {
            if self.energy() == 0 {
                break true;
            }
            if max_flips > 0 && self.flips >= max_flips {
                break false;
            }
            if self.step(heuristic, eta) {
                if let Some(t) = trace.as_deref_mut() {
                    t.observe(self.flips, self.proposals, self.energy(), self.num_unsat_vars());
                }
            }
        };
        if let Some(t) = trace {
            t.record_terminal(self.flips, self.proposals, self.energy(), self.num_unsat_vars());
        }
        Ok(RunResult {
            solved,
            flips: self.flips,
            proposals: self.proposals,
            final_energy: self.energy(),
            seed: self.seed,
            eta,
            heuristic,
        })
    }
}

/// Runs one complete search from a random initial assignment: `seed` drives
/// both the start assignment and every proposal. Identical inputs produce
/// identical results and traces.
pub fn run(
    formula: &Formula,
    heuristic: Heuristic,
    eta: f64,
    seed: u64,
    max_flips: u64,
    trace: Option<&mut TraceRecorder>,
) -> Result<RunResult, EngineError> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(EngineError::InvalidEta { eta });
    }
    SolverState::init(formula, seed).run(heuristic, eta, max_flips, trace)
}
