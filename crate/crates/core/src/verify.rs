//! Independent solution checking.
//!
//! A solution is trusted only after it survives checks that share nothing
//! with the solver: every function here builds its own BDD manager from
//! the circuit text alone. The cheap path is the witness-based inductive
//! invariant check; the fallback is full forward-reachability model
//! checking with counterexample extraction. An explicit-state game solver
//! over small circuits doubles as the test oracle for the symbolic side.

use std::collections::HashMap;
use std::fmt;
use std::time::Instant;

use crate::aiger::{partition_inputs, AigCircuit, InputPartition, Simulator};
use crate::bdd::{BddManager, BddVar};
use crate::game::{build_game, lower_literals};

/// Latch bound for the explicit oracle.
pub const MAX_ORACLE_LATCHES: usize = 16;
/// Bound on log2 of the explicit oracle's (state, input) table.
const MAX_ORACLE_TABLE_BITS: usize = 22;

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("witness input `{0}` does not name a solution latch")]
    WitnessLatchMismatch(String),
    #[error("witness must be combinational with exactly one output")]
    WitnessShape,
    #[error("explicit oracle supports at most {limit} latches, circuit has {actual}")]
    TooManyLatches { actual: usize, limit: usize },
    #[error("explicit oracle table needs 2^{bits} entries, over the 2^{limit} bound")]
    StateSpaceTooLarge { bits: usize, limit: usize },
}

/// A concrete uncontrollable-input sequence. Step `k` holds one bit per
/// circuit input, in input order; the error output is raised while the
/// final step's inputs are applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<Vec<bool>>,
}

impl Trace {
    /// One line per step: space-separated `name=bit` pairs in input order.
    pub fn render(&self, circuit: &AigCircuit) -> String {
        let mut out = String::new();
        for step in &self.steps {
            let line: Vec<String> = step
                .iter()
                .enumerate()
                .map(|(i, bit)| {
                    format!("{}={}", circuit.input_display_name(i), u8::from(*bit))
                })
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Replays the trace from the all-zero state under gate-level
    /// simulation; true iff the error output rises at some step.
    pub fn replays_to_error(&self, circuit: &AigCircuit) -> bool {
        let mut sim = Simulator::new(circuit);
        let mut state = vec![false; circuit.latches.len()];
        for inputs in &self.steps {
            let step = sim.step(&state, inputs);
            if step.outputs[0] {
                return true;
            }
            state = step.next_state;
        }
        false
    }
}

/// Why a check stopped short of a verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InconclusiveReason {
    /// The initial state is not inside the witness region.
    InitOutsideWitness,
    /// Some witness state can leave the region in one step.
    WitnessNotInductive,
    /// Some witness state can raise the error output.
    WitnessPermitsError,
    /// A deadline or node budget ran out mid-check.
    ResourceLimit(String),
}

impl fmt::Display for InconclusiveReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InconclusiveReason::InitOutsideWitness => {
                write!(f, "initial state lies outside the witness region")
            }
            InconclusiveReason::WitnessNotInductive => {
                write!(f, "witness region is not inductive")
            }
            InconclusiveReason::WitnessPermitsError => {
                write!(f, "witness region permits the error output")
            }
            InconclusiveReason::ResourceLimit(detail) => {
                write!(f, "resource limit reached: {detail}")
            }
        }
    }
}

/// Outcome of a verification pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Verified,
    /// Refuted, with a trace that drives the solution into the error.
    Falsified(Trace),
    /// Neither proven nor refuted; the reason says which check gave up.
    Inconclusive(InconclusiveReason),
}

/// Resource budget for model checking. `Default` is unlimited.
#[derive(Clone, Debug, Default)]
pub struct VerifyLimits {
    pub deadline: Option<Instant>,
    pub node_limit: Option<usize>,
}

/// One conformance problem found by [`check_syntactic`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SyntacticViolation {
    /// The solution still declares a controller-owned input.
    ControllableInputRetained(String),
    /// Uncontrollable input names or their order differ from the
    /// specification's.
    UncontrollableInputsChanged { expected: Vec<String>, actual: Vec<String> },
    OutputCount(usize),
    OutputNameChanged { expected: String, actual: String },
}

impl fmt::Display for SyntacticViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyntacticViolation::ControllableInputRetained(name) => {
                write!(f, "controllable input `{name}` was not resolved")
            }
            SyntacticViolation::UncontrollableInputsChanged { expected, actual } => {
                write!(
                    f,
                    "uncontrollable inputs changed: expected [{}], got [{}]",
                    expected.join(", "),
                    actual.join(", ")
                )
            }
            SyntacticViolation::OutputCount(n) => {
                write!(f, "solution must keep exactly one output, found {n}")
            }
            SyntacticViolation::OutputNameChanged { expected, actual } => {
                write!(f, "output renamed: expected `{expected}`, got `{actual}`")
            }
        }
    }
}

/// Conformance report; empty means the solution's interface matches.
#[derive(Clone, Debug, Default)]
pub struct SyntacticReport {
    pub violations: Vec<SyntacticViolation>,
}

impl SyntacticReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Interface conformance: the solution must keep the specification's
/// uncontrollable inputs (names and order), define away every controllable
/// input, and preserve the single named output.
pub fn check_syntactic(spec: &AigCircuit, solution: &AigCircuit) -> SyntacticReport {
    let mut report = SyntacticReport::default();
    let sol_partition = partition_inputs(solution);
    for &index in &sol_partition.controllable {
        let name = solution.input_display_name(index);
        report.violations.push(SyntacticViolation::ControllableInputRetained(name));
    }

    let spec_partition = partition_inputs(spec);
    let expected: Vec<String> = spec_partition
        .uncontrollable
        .iter()
        .map(|&i| spec.input_display_name(i))
        .collect();
    let actual: Vec<String> = sol_partition
        .uncontrollable
        .iter()
        .map(|&i| solution.input_display_name(i))
        .collect();
    if expected != actual {
        report
            .violations
            .push(SyntacticViolation::UncontrollableInputsChanged { expected, actual });
    }

    if solution.outputs.len() != 1 {
        report.violations.push(SyntacticViolation::OutputCount(solution.outputs.len()));
    } else {
        let expected = spec.output_name(0).unwrap_or("o0").to_string();
        let actual = solution.output_name(0).unwrap_or("o0").to_string();
        if expected != actual {
            report
                .violations
                .push(SyntacticViolation::OutputNameChanged { expected, actual });
        }
    }
    report
}

/// Maps each witness input variable to the solution latch variable of the
/// same name.
fn witness_var_map(
    solution: &AigCircuit,
    witness: &AigCircuit,
    latch_vars: &[BddVar],
) -> Result<HashMap<u32, BddVar>, VerifyError> {
    let latch_by_name: HashMap<&str, usize> = solution
        .latches
        .iter()
        .enumerate()
        .filter_map(|(i, _)| solution.latch_name(i).map(|name| (name, i)))
        .collect();
    let mut map = HashMap::with_capacity(witness.inputs.len());
    for (index, input) in witness.inputs.iter().enumerate() {
        let name = witness
            .input_name(index)
            .ok_or_else(|| VerifyError::WitnessLatchMismatch(format!("i{index}")))?;
        let latch_index = *latch_by_name
            .get(name)
            .ok_or_else(|| VerifyError::WitnessLatchMismatch(name.to_string()))?;
        map.insert(input.var(), latch_vars[latch_index]);
    }
    Ok(map)
}

/// Witness-based inductive invariant check, the fast verification path.
///
/// Verified iff the region W encoded by the witness (a) contains the
/// all-zero initial state, (b) is closed under the solution's transition
/// functions for every input, and (c) excludes every error-raising
/// combination. A failing clause yields `Inconclusive` naming it; this
/// check can never produce a counterexample trace.
pub fn check_invariant(
    solution: &AigCircuit,
    witness: &AigCircuit,
) -> Result<Verdict, VerifyError> {
    if !witness.latches.is_empty() || witness.outputs.len() != 1 {
        return Err(VerifyError::WitnessShape);
    }
    // Fresh manager: verification shares no state with the solver.
    let mut m = BddManager::new();
    let partition = partition_inputs(solution);
    let game = build_game(&mut m, solution, &partition);
    let var_of = witness_var_map(solution, witness, &game.latch_vars)?;
    let w = lower_literals(&mut m, witness, &var_of, &[witness.outputs[0]])[0];

    let all_zero: HashMap<BddVar, bool> =
        game.latch_vars.iter().map(|&v| (v, false)).collect();
    if !m.eval(w, &all_zero) {
        return Ok(Verdict::Inconclusive(InconclusiveReason::InitOutsideWitness));
    }
    let stepped = m.vector_compose(w, &game.substitution());
    let inductive = m.implies(w, stepped);
    if inductive != m.constant(true) {
        return Ok(Verdict::Inconclusive(InconclusiveReason::WitnessNotInductive));
    }
    let erring = m.and(w, game.error);
    if erring != m.constant(false) {
        return Ok(Verdict::Inconclusive(InconclusiveReason::WitnessPermitsError));
    }
    Ok(Verdict::Verified)
}

/// Forward-reachability model check of a closed solution, the fallback
/// when the invariant check is inconclusive.
///
/// Explores breadth-first from the all-zero state, so a `Falsified`
/// verdict carries a minimal-length trace, reconstructed by backward
/// replay through the stored frontiers.
pub fn model_check_forward(solution: &AigCircuit, limits: &VerifyLimits) -> Verdict {
    let mut m = BddManager::new();

    // Current-state variable per input and latch in circuit-variable
    // order; each latch's primed variable sits directly below its current
    // one. Primed variables exist only here, never in solving.
    let mut circuit_vars: Vec<(u32, Option<usize>)> = solution
        .inputs
        .iter()
        .map(|l| (l.var(), None))
        .chain(solution.latches.iter().enumerate().map(|(i, l)| (l.current.var(), Some(i))))
        .collect();
    circuit_vars.sort_unstable_by_key(|&(var, _)| var);
    let mut var_of: HashMap<u32, BddVar> = HashMap::with_capacity(circuit_vars.len());
    let mut primed = vec![BddVar(0); solution.latches.len()];
    let mut current_vars = Vec::with_capacity(circuit_vars.len());
    for &(circuit_var, latch_index) in &circuit_vars {
        let var = m.add_var();
        var_of.insert(circuit_var, var);
        current_vars.push(var);
        if let Some(index) = latch_index {
            primed[index] = m.add_var();
        }
    }

    let wanted: Vec<_> = solution
        .latches
        .iter()
        .map(|l| l.next)
        .chain(std::iter::once(solution.outputs[0]))
        .collect();
    let mut lowered = lower_literals(&mut m, solution, &var_of, &wanted);
    let error = lowered.pop().expect("output literal was requested");
    let next_functions = lowered;

    // Transition relation ⋀ℓ (ℓ' ↔ fℓ) and the rename L' → L.
    let mut relation = m.constant(true);
    for (index, &f) in next_functions.iter().enumerate() {
        let primed_node = m.var_node(primed[index]);
        let clause = m.iff(primed_node, f);
        relation = m.and(relation, clause);
    }
    let unprime: Vec<(BddVar, crate::bdd::NodeRef)> = solution
        .latches
        .iter()
        .enumerate()
        .map(|(i, latch)| (primed[i], m.var_node(var_of[&latch.current.var()])))
        .collect();

    let mut init = m.constant(true);
    for latch in &solution.latches {
        let node = m.var_node(var_of[&latch.current.var()]);
        let cleared = m.not(node);
        init = m.and(init, cleared);
    }

    let mut frontiers = vec![init];
    let mut reached = init;
    loop {
        if let Some(deadline) = limits.deadline {
            if Instant::now() >= deadline {
                return Verdict::Inconclusive(InconclusiveReason::ResourceLimit(
                    format!("deadline hit after {} frontiers", frontiers.len()),
                ));
            }
        }
        if let Some(limit) = limits.node_limit {
            if m.live_node_count() > limit {
                return Verdict::Inconclusive(InconclusiveReason::ResourceLimit(
                    format!("node budget of {limit} exhausted"),
                ));
            }
        }
        let frontier = *frontiers.last().expect("at least the initial frontier");
        let erring = m.and(frontier, error);
        if erring != m.constant(false) {
            let latch_current: Vec<BddVar> = solution
                .latches
                .iter()
                .map(|latch| var_of[&latch.current.var()])
                .collect();
            let ordered_inputs: Vec<BddVar> =
                solution.inputs.iter().map(|input| var_of[&input.var()]).collect();
            let trace = extract_trace(
                &mut m,
                &frontiers,
                erring,
                &next_functions,
                &latch_current,
                &ordered_inputs,
            );
            debug_assert!(trace.replays_to_error(solution));
            return Verdict::Falsified(trace);
        }
        let image_primed = m.and_exists(frontier, relation, &current_vars);
        let image = m.vector_compose(image_primed, &unprime);
        let seen = m.not(reached);
        let fresh = m.and(image, seen);
        if fresh == m.constant(false) {
            return Verdict::Verified;
        }
        reached = m.or(reached, image);
        frontiers.push(fresh);
    }
}

/// Walks backward through the frontier layers, fixing one concrete
/// (state, input) pair per step, and returns the input sequence.
///
/// `erring` must be the non-empty intersection of the last frontier with
/// the error function. A satisfying assignment is partial: variables the
/// diagram never tests are free, so they default to zero, which keeps
/// every completion inside the constraint set.
fn extract_trace(
    m: &mut BddManager,
    frontiers: &[crate::bdd::NodeRef],
    erring: crate::bdd::NodeRef,
    next_functions: &[crate::bdd::NodeRef],
    latch_vars: &[BddVar],
    input_vars: &[BddVar],
) -> Trace {
    let read = |assignment: &HashMap<BddVar, bool>, var: BddVar| {
        assignment.get(&var).copied().unwrap_or(false)
    };
    let pick = |m: &BddManager, node: crate::bdd::NodeRef| -> HashMap<BddVar, bool> {
        m.any_sat(node)
            .expect("constraint was checked non-empty")
            .into_iter()
            .collect()
    };

    let last = pick(m, erring);
    let mut state: Vec<bool> = latch_vars.iter().map(|&v| read(&last, v)).collect();
    let mut steps = vec![input_vars.iter().map(|&v| read(&last, v)).collect::<Vec<bool>>()];

    for layer in (0..frontiers.len() - 1).rev() {
        // A concrete (state, input) pair in this layer that steps exactly
        // onto `state`; one exists because each frontier is the image of
        // the previous one.
        let mut constraint = frontiers[layer];
        for (index, &f) in next_functions.iter().enumerate() {
            let clause = if state[index] { f } else { m.not(f) };
            constraint = m.and(constraint, clause);
        }
        let sat = pick(m, constraint);
        state = latch_vars.iter().map(|&v| read(&sat, v)).collect();
        steps.insert(0, input_vars.iter().map(|&v| read(&sat, v)).collect());
    }
    Trace { steps }
}

/// Precomputed one-step table of a small game, the ground truth the
/// symbolic solver is tested against. States pack latch values with latch
/// `i` at bit `i`; environment and controller choices pack the partition's
/// input lists the same way.
pub struct ExplicitGame {
    num_latches: usize,
    num_uncontrollable: usize,
    num_controllable: usize,
    /// Error bit per (state, u, c) triple.
    err: Vec<bool>,
    /// Packed successor state per (state, u, c) triple.
    next: Vec<u32>,
}

impl ExplicitGame {
    pub fn build(
        circuit: &AigCircuit,
        partition: &InputPartition,
    ) -> Result<ExplicitGame, VerifyError> {
        let num_latches = circuit.latches.len();
        if num_latches > MAX_ORACLE_LATCHES {
            return Err(VerifyError::TooManyLatches {
                actual: num_latches,
                limit: MAX_ORACLE_LATCHES,
            });
        }
        let num_uncontrollable = partition.uncontrollable.len();
        let num_controllable = partition.controllable.len();
        let bits = num_latches + num_uncontrollable + num_controllable;
        if bits > MAX_ORACLE_TABLE_BITS {
            return Err(VerifyError::StateSpaceTooLarge {
                bits,
                limit: MAX_ORACLE_TABLE_BITS,
            });
        }

        let mut sim = Simulator::new(circuit);
        let entries = 1usize << bits;
        let mut err = Vec::with_capacity(entries);
        let mut next = Vec::with_capacity(entries);
        let mut state_bits = vec![false; num_latches];
        let mut inputs = vec![false; circuit.inputs.len()];
        for state in 0..1usize << num_latches {
            for (i, bit) in state_bits.iter_mut().enumerate() {
                *bit = state >> i & 1 == 1;
            }
            for u in 0..1usize << num_uncontrollable {
                for c in 0..1usize << num_controllable {
                    for (i, &input_index) in partition.uncontrollable.iter().enumerate() {
                        inputs[input_index] = u >> i & 1 == 1;
                    }
                    for (i, &input_index) in partition.controllable.iter().enumerate() {
                        inputs[input_index] = c >> i & 1 == 1;
                    }
                    let step = sim.step(&state_bits, &inputs);
                    err.push(step.outputs[0]);
                    let mut packed = 0u32;
                    for (i, bit) in step.next_state.iter().enumerate() {
                        packed |= u32::from(*bit) << i;
                    }
                    next.push(packed);
                }
            }
        }
        Ok(ExplicitGame { num_latches, num_uncontrollable, num_controllable, err, next })
    }

    pub fn num_states(&self) -> usize {
        1 << self.num_latches
    }

    fn index(&self, state: usize, u: usize, c: usize) -> usize {
        ((state << self.num_uncontrollable | u) << self.num_controllable) | c
    }

    /// Error bit and packed successor for one concrete move.
    pub fn step(&self, state: usize, u: usize, c: usize) -> (bool, usize) {
        let index = self.index(state, u, c);
        (self.err[index], self.next[index] as usize)
    }

    /// One backward step with the same convention as the symbolic solver:
    /// a state joins when the environment has a choice against which every
    /// controller answer errs now or lands in `losing`.
    pub fn losing_one_step(&self, losing: &[bool]) -> Vec<bool> {
        (0..self.num_states())
            .map(|state| {
                (0..1usize << self.num_uncontrollable).any(|u| {
                    (0..1usize << self.num_controllable).all(|c| {
                        let (err, next) = self.step(state, u, c);
                        err || losing[next]
                    })
                })
            })
            .collect()
    }

    /// Least fixpoint of [`ExplicitGame::losing_one_step`].
    pub fn attractor(&self) -> Vec<bool> {
        let mut losing = vec![false; self.num_states()];
        loop {
            let forced = self.losing_one_step(&losing);
            let grown = forced
                .iter()
                .zip(&losing)
                .any(|(now, before)| *now && !before);
            for (slot, now) in losing.iter_mut().zip(&forced) {
                *slot = *slot || *now;
            }
            if !grown {
                return losing;
            }
        }
    }

    /// Complement of the attractor.
    pub fn winning_states(&self) -> Vec<bool> {
        self.attractor().into_iter().map(|lost| !lost).collect()
    }
}

/// Verdict of the explicit oracle over the full state space.
pub struct ExplicitGameResult {
    pub realizable: bool,
    /// Winning flag per packed state.
    pub winning_states: Vec<bool>,
}

/// Solves a small game by explicit enumeration; the all-zero initial state
/// decides realizability.
pub fn explicit_game_oracle(
    circuit: &AigCircuit,
    partition: &InputPartition,
) -> Result<ExplicitGameResult, VerifyError> {
    let game = ExplicitGame::build(circuit, partition)?;
    let winning_states = game.winning_states();
    let realizable = winning_states[0];
    Ok(ExplicitGameResult { realizable, winning_states })
}

#[cfg(test)]
mod tests {
    use std::time::{Duration, Instant};

    use super::*;
    use crate::aiger::{CircuitBuilder, Literal};
    use crate::gen::counter_spec;

    fn and_spec() -> AigCircuit {
        let mut b = CircuitBuilder::new();
        let u = b.add_input(Some("u"));
        let c = b.add_input(Some("controllable_c"));
        let err = b.and(u, c);
        b.add_output(err, Some("err"));
        b.finish()
    }

    /// Latch that holds its value; error output selectable.
    fn hold_latch_solution(err_is_latch: bool) -> AigCircuit {
        let mut b = CircuitBuilder::new();
        let l = b.add_latch(Some("l"));
        b.set_latch_next(l, l);
        b.add_output(if err_is_latch { l } else { Literal::FALSE }, Some("err"));
        b.finish()
    }

    fn witness_from(output_of: impl FnOnce(&mut CircuitBuilder, Literal) -> Literal) -> AigCircuit {
        let mut b = CircuitBuilder::new();
        let l = b.add_input(Some("l"));
        let out = output_of(&mut b, l);
        b.add_output(out, Some("winning_region"));
        b.finish()
    }

    #[test]
    fn syntactic_check_accepts_matching_interface() {
        let spec = and_spec();
        let mut b = CircuitBuilder::new();
        let _u = b.add_input(Some("u"));
        b.add_output(Literal::FALSE, Some("err"));
        let solution = b.finish();
        assert!(check_syntactic(&spec, &solution).is_clean());
    }

    #[test]
    fn syntactic_check_flags_retained_controllable() {
        let spec = and_spec();
        let report = check_syntactic(&spec, &spec);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, SyntacticViolation::ControllableInputRetained(name) if name == "controllable_c")));
    }

    #[test]
    fn syntactic_check_flags_dropped_input_and_renamed_output() {
        let spec = and_spec();
        let mut b = CircuitBuilder::new();
        b.add_output(Literal::FALSE, Some("oops"));
        let solution = b.finish();
        let report = check_syntactic(&spec, &solution);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, SyntacticViolation::UncontrollableInputsChanged { .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, SyntacticViolation::OutputNameChanged { expected, actual }
                if expected == "err" && actual == "oops")));
    }

    #[test]
    fn invariant_check_verifies_safe_latch() {
        let solution = hold_latch_solution(true);
        // W = ¬l: holds initially, inductive under next = l, excludes err = l.
        let witness = witness_from(|_, l| l.negate());
        assert_eq!(check_invariant(&solution, &witness).unwrap(), Verdict::Verified);
    }

    #[test]
    fn invariant_check_verifies_trivial_witness_when_error_unreachable() {
        let solution = hold_latch_solution(false);
        let witness = witness_from(|_, _| Literal::TRUE);
        assert_eq!(check_invariant(&solution, &witness).unwrap(), Verdict::Verified);
    }

    #[test]
    fn invariant_check_reports_init_outside_region() {
        let solution = hold_latch_solution(false);
        let witness = witness_from(|_, _| Literal::FALSE);
        assert_eq!(
            check_invariant(&solution, &witness).unwrap(),
            Verdict::Inconclusive(InconclusiveReason::InitOutsideWitness)
        );
    }

    #[test]
    fn invariant_check_reports_non_inductive_region() {
        let mut b = CircuitBuilder::new();
        let l = b.add_latch(Some("l"));
        b.set_latch_next(l, l.negate());
        b.add_output(Literal::FALSE, Some("err"));
        let solution = b.finish();
        let witness = witness_from(|_, l| l.negate());
        assert_eq!(
            check_invariant(&solution, &witness).unwrap(),
            Verdict::Inconclusive(InconclusiveReason::WitnessNotInductive)
        );
    }

    #[test]
    fn invariant_check_reports_region_touching_error() {
        let solution = hold_latch_solution(true);
        let witness = witness_from(|_, _| Literal::TRUE);
        assert_eq!(
            check_invariant(&solution, &witness).unwrap(),
            Verdict::Inconclusive(InconclusiveReason::WitnessPermitsError)
        );
    }

    #[test]
    fn invariant_check_rejects_unknown_witness_input() {
        let solution = hold_latch_solution(false);
        let mut b = CircuitBuilder::new();
        let _ = b.add_input(Some("nope"));
        b.add_output(Literal::TRUE, Some("winning_region"));
        let witness = b.finish();
        assert!(matches!(
            check_invariant(&solution, &witness),
            Err(VerifyError::WitnessLatchMismatch(name)) if name == "nope"
        ));
    }

    #[test]
    fn invariant_check_rejects_stateful_witness() {
        let solution = hold_latch_solution(false);
        let mut b = CircuitBuilder::new();
        let l = b.add_latch(Some("w"));
        b.set_latch_next(l, l);
        b.add_output(Literal::TRUE, Some("winning_region"));
        let witness = b.finish();
        assert!(matches!(check_invariant(&solution, &witness), Err(VerifyError::WitnessShape)));
    }

    #[test]
    fn forward_check_accepts_unreachable_error() {
        let solution = hold_latch_solution(false);
        assert_eq!(
            model_check_forward(&solution, &VerifyLimits::default()),
            Verdict::Verified
        );
    }

    #[test]
    fn forward_check_refutes_combinational_error() {
        let mut b = CircuitBuilder::new();
        let u = b.add_input(Some("u"));
        b.add_output(u, Some("err"));
        let solution = b.finish();
        match model_check_forward(&solution, &VerifyLimits::default()) {
            Verdict::Falsified(trace) => {
                assert_eq!(trace.steps, vec![vec![true]]);
                assert_eq!(trace.render(&solution), "u=1\n");
                assert!(trace.replays_to_error(&solution));
            }
            other => panic!("expected a counterexample, got {other:?}"),
        }
    }

    #[test]
    fn forward_check_finds_minimal_deep_trace() {
        let mut b = CircuitBuilder::new();
        let u = b.add_input(Some("u"));
        let l1 = b.add_latch(Some("l1"));
        let l2 = b.add_latch(Some("l2"));
        b.set_latch_next(l1, u);
        b.set_latch_next(l2, l1);
        b.add_output(l2, Some("err"));
        let solution = b.finish();
        match model_check_forward(&solution, &VerifyLimits::default()) {
            Verdict::Falsified(trace) => {
                assert_eq!(trace.steps.len(), 3, "error needs two latch hops plus the read");
                assert_eq!(trace.steps[0], vec![true], "u must fire on the first step");
                assert!(trace.replays_to_error(&solution));
                for prefix in 1..trace.steps.len() {
                    let shorter = Trace { steps: trace.steps[..prefix].to_vec() };
                    assert!(
                        !shorter.replays_to_error(&solution),
                        "trace must be minimal, but a {prefix}-step prefix already errs"
                    );
                }
            }
            other => panic!("expected a counterexample, got {other:?}"),
        }
    }

    #[test]
    fn forward_check_honors_resource_limits() {
        let solution = hold_latch_solution(false);
        let expired = VerifyLimits {
            deadline: Some(Instant::now() - Duration::from_secs(1)),
            ..VerifyLimits::default()
        };
        assert!(matches!(
            model_check_forward(&solution, &expired),
            Verdict::Inconclusive(InconclusiveReason::ResourceLimit(_))
        ));
        let strangled = VerifyLimits { node_limit: Some(1), ..VerifyLimits::default() };
        assert!(matches!(
            model_check_forward(&solution, &strangled),
            Verdict::Inconclusive(InconclusiveReason::ResourceLimit(_))
        ));
    }

    #[test]
    fn oracle_marks_controllable_error_winning() {
        let mut b = CircuitBuilder::new();
        let c = b.add_input(Some("controllable_c"));
        b.add_output(c, Some("err"));
        let circuit = b.finish();
        let partition = partition_inputs(&circuit);
        let result = explicit_game_oracle(&circuit, &partition).unwrap();
        assert!(result.realizable);
        assert!(result.winning_states.iter().all(|&w| w));
    }

    #[test]
    fn oracle_marks_uncontrollable_error_losing() {
        let mut b = CircuitBuilder::new();
        let u = b.add_input(Some("u"));
        b.add_output(u, Some("err"));
        let circuit = b.finish();
        let partition = partition_inputs(&circuit);
        let result = explicit_game_oracle(&circuit, &partition).unwrap();
        assert!(!result.realizable);
    }

    #[test]
    fn oracle_attracts_doomed_toggle() {
        let mut b = CircuitBuilder::new();
        let l = b.add_latch(Some("l"));
        b.set_latch_next(l, l.negate());
        b.add_output(l, Some("err"));
        let circuit = b.finish();
        let partition = partition_inputs(&circuit);
        let result = explicit_game_oracle(&circuit, &partition).unwrap();
        assert!(!result.realizable);
        assert_eq!(result.winning_states, vec![false, false]);
    }

    #[test]
    fn oracle_solves_counters() {
        for (controllable_reset, expected) in [(true, true), (false, false)] {
            let circuit = counter_spec(2, controllable_reset);
            let partition = partition_inputs(&circuit);
            let result = explicit_game_oracle(&circuit, &partition).unwrap();
            assert_eq!(result.realizable, expected);
        }
    }

    #[test]
    fn oracle_enforces_bounds() {
        let mut b = CircuitBuilder::new();
        for i in 0..17 {
            let l = b.add_latch(Some(&format!("l{i}")));
            b.set_latch_next(l, l);
        }
        b.add_output(Literal::FALSE, Some("err"));
        let circuit = b.finish();
        let partition = partition_inputs(&circuit);
        assert!(matches!(
            ExplicitGame::build(&circuit, &partition),
            Err(VerifyError::TooManyLatches { actual: 17, limit: 16 })
        ));

        let mut b = CircuitBuilder::new();
        for i in 0..16 {
            let l = b.add_latch(Some(&format!("l{i}")));
            b.set_latch_next(l, l);
        }
        for i in 0..7 {
            b.add_input(Some(&format!("u{i}")));
        }
        b.add_output(Literal::FALSE, Some("err"));
        let circuit = b.finish();
        let partition = partition_inputs(&circuit);
        assert!(matches!(
            ExplicitGame::build(&circuit, &partition),
            Err(VerifyError::StateSpaceTooLarge { bits: 23, limit: 22 })
        ));
    }

    #[test]
    fn trace_rendering_lists_inputs_in_order() {
        let mut b = CircuitBuilder::new();
        let _u = b.add_input(Some("u"));
        let _v = b.add_input(Some("v"));
        b.add_output(Literal::FALSE, Some("err"));
        let circuit = b.finish();
        let trace = Trace { steps: vec![vec![true, false], vec![false, true]] };
        assert_eq!(trace.render(&circuit), "u=1 v=0\nu=0 v=1\n");
    }
}
