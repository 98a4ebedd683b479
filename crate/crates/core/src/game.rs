//! Symbolic safety games over AIGER specifications.
//!
//! The environment drives the uncontrollable inputs, the controller answers
//! with the controllable ones, and the controller loses any play that ever
//! raises the error output. [`build_game`] lowers a specification circuit
//! to one transition BDD per latch plus an error BDD; [`solve`] runs the
//! backward attractor fixpoint and decides realizability from the initial
//! all-zero state.
//!
//! Variables are never primed: stepping a set of states happens by
//! substituting the transition functions for the latch variables.

use std::collections::HashMap;
use std::time::Instant;

use crate::aiger::{AigCircuit, InputPartition, Literal};
use crate::bdd::{BddConfig, BddManager, BddVar, NodeRef, Quant, ReorderPolicy};

/// Cache size for solver-owned managers.
const SOLVER_CACHE_BITS: u32 = 18;
/// Dead-node pileup tolerated before an automatic collection.
const SOLVER_GC_THRESHOLD: usize = 50_000;
/// Live-node floor below which automatic reordering never triggers.
const SOLVER_REORDER_FLOOR: usize = 5_000;

/// Tuning knobs for [`solve`], each one isolatable for differential runs.
#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Fuse the conjunction and controllable quantification inside UPRE.
    pub use_and_exists: bool,
    /// Let the manager sift variables as the diagrams grow.
    pub reorder: bool,
    /// Release intermediate results as soon as they are dead. Disabling
    /// this keeps every intermediate pinned, trading memory for nothing;
    /// it exists so the cost of the discipline can be measured.
    pub eager_deref: bool,
    /// Absolute wall-clock deadline for the fixpoint loop.
    pub deadline: Option<Instant>,
    /// Upper bound on live BDD nodes, checked between iterations.
    pub node_limit: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            use_and_exists: true,
            reorder: true,
            eager_deref: true,
            deadline: None,
            node_limit: None,
        }
    }
}

impl SolverOptions {
    /// A manager configured for these options. Games and solving must use
    /// a manager built here (or one at least as permissive).
    pub fn manager(&self) -> BddManager {
        BddManager::with_config(BddConfig {
            cache_bits: SOLVER_CACHE_BITS,
            gc_dead_threshold: Some(SOLVER_GC_THRESHOLD),
            reorder: if self.reorder {
                ReorderPolicy::SiftOnGrowth { floor: SOLVER_REORDER_FLOOR }
            } else {
                ReorderPolicy::Off
            },
        })
    }
}

/// A lowered safety game. All contained nodes hold one reference owned by
/// the game; call [`SafetyGame::release`] to give them back.
pub struct SafetyGame {
    /// One variable per latch, in latch order.
    pub latch_vars: Vec<BddVar>,
    /// Environment-owned input variables, in partition order.
    pub uncontrollable_vars: Vec<BddVar>,
    /// Controller-owned input variables, in partition order.
    pub controllable_vars: Vec<BddVar>,
    /// Next-state function per latch, aligned with `latch_vars`.
    pub transitions: Vec<NodeRef>,
    /// Error output over latch and input variables.
    pub error: NodeRef,
    /// The all-zero latch minterm.
    pub init: NodeRef,
}

/// Outcome of the attractor fixpoint. The region nodes hold one reference
/// each, owned by the caller.
#[derive(Debug)]
pub struct GameResult {
    pub realizable: bool,
    /// States from which the environment can force an error.
    pub losing_region: NodeRef,
    /// Complement of the losing region.
    pub winning_region: NodeRef,
    /// Number of one-step preimage computations performed.
    pub iterations: usize,
}

/// Resource exhaustion during solving. Never a verdict: callers must treat
/// these as "unknown".
#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("deadline exceeded after {iterations} fixpoint iterations")]
    Timeout { iterations: usize },
    #[error("live node count {live} exceeds the limit of {limit}")]
    NodeLimit { live: usize, limit: usize },
}

/// Literal-to-node lookup against the per-variable map. Negation costs one
/// `not`, so callers must pin the result before the next operation.
fn literal_node(
    m: &mut BddManager,
    node_of: &HashMap<u32, NodeRef>,
    literal: Literal,
) -> NodeRef {
    if literal.is_constant() {
        return m.constant(literal == Literal::TRUE);
    }
    let base = node_of[&literal.var()];
    if literal.is_negated() {
        m.not(base)
    } else {
        base
    }
}

/// Lowers circuit literals to BDDs. `var_of` maps every input and latch
/// variable of `circuit` that the literals depend on to a BDD variable;
/// gates are lowered at most once each, in dependency order. The returned
/// nodes are aligned with `literals` and each holds one reference owned by
/// the caller; scaffolding references are released before returning.
///
/// Panics on a literal whose variable is neither mapped nor defined by a
/// gate; `validate_spec` rules this out for whole circuits.
pub fn lower_literals(
    m: &mut BddManager,
    circuit: &AigCircuit,
    var_of: &HashMap<u32, BddVar>,
    literals: &[Literal],
) -> Vec<NodeRef> {
    // Every entry holds one reference until the final release below.
    let mut node_of: HashMap<u32, NodeRef> = HashMap::with_capacity(var_of.len());
    for (&circuit_var, &bdd_var) in var_of {
        let node = m.var_node(bdd_var);
        m.ref_node(node);
        node_of.insert(circuit_var, node);
    }

    let gate_by_var: HashMap<u32, usize> =
        circuit.ands.iter().enumerate().map(|(i, g)| (g.lhs.var(), i)).collect();
    let defined = |node_of: &HashMap<u32, NodeRef>, lit: Literal| {
        lit.is_constant() || node_of.contains_key(&lit.var())
    };
    for literal in literals {
        if defined(&node_of, *literal) {
            continue;
        }
        let mut stack = vec![literal.var()];
        while let Some(var) = stack.pop() {
            if node_of.contains_key(&var) {
                continue;
            }
            let gate_index = *gate_by_var
                .get(&var)
                .unwrap_or_else(|| panic!("variable {var} is neither mapped nor gate-defined"));
            let gate = &circuit.ands[gate_index];
            let mut ready = true;
            for operand in [gate.rhs0, gate.rhs1] {
                if !defined(&node_of, operand) {
                    if ready {
                        stack.push(var);
                        ready = false;
                    }
                    stack.push(operand.var());
                }
            }
            if !ready {
                continue;
            }
            let left = literal_node(m, &node_of, gate.rhs0);
            m.ref_node(left);
            let right = literal_node(m, &node_of, gate.rhs1);
            m.ref_node(right);
            let conj = m.and(left, right);
            m.ref_node(conj);
            m.deref_node(left);
            m.deref_node(right);
            node_of.insert(var, conj);
        }
    }

    let results: Vec<NodeRef> = literals
        .iter()
        .map(|&literal| {
            let node = literal_node(m, &node_of, literal);
            m.ref_node(node)
        })
        .collect();
    for (_, node) in node_of {
        m.deref_node(node);
    }
    results
}

/// Lowers a validated specification circuit into a [`SafetyGame`].
///
/// BDD variables are created in circuit-variable order, so latches and
/// inputs start interleaved exactly as the specification numbered them;
/// reordering can move them later. Gates are lowered once each, in
/// dependency order.
pub fn build_game(
    m: &mut BddManager,
    circuit: &AigCircuit,
    partition: &InputPartition,
) -> SafetyGame {
    // Variable creation in circuit index order.
    let mut state_vars: Vec<u32> = circuit
        .inputs
        .iter()
        .map(|lit| lit.var())
        .chain(circuit.latches.iter().map(|l| l.current.var()))
        .collect();
    state_vars.sort_unstable();
    let mut var_of: HashMap<u32, BddVar> = HashMap::with_capacity(state_vars.len());
    for circuit_var in &state_vars {
        var_of.insert(*circuit_var, m.add_var());
    }

    let wanted: Vec<Literal> = circuit
        .latches
        .iter()
        .map(|l| l.next)
        .chain(std::iter::once(circuit.outputs[0]))
        .collect();
    let mut lowered = lower_literals(m, circuit, &var_of, &wanted);
    let error = lowered.pop().expect("output literal was requested");
    let transitions = lowered;

    // init: every latch variable false.
    let mut init = m.constant(true);
    m.ref_node(init);
    for latch in &circuit.latches {
        let var_node = m.var_node(var_of[&latch.current.var()]);
        m.ref_node(var_node);
        let negated = m.not(var_node);
        m.ref_node(negated);
        let extended = m.and(init, negated);
        m.ref_node(extended);
        m.deref_node(var_node);
        m.deref_node(negated);
        m.deref_node(init);
        init = extended;
    }

    SafetyGame {
        latch_vars: circuit.latches.iter().map(|l| var_of[&l.current.var()]).collect(),
        uncontrollable_vars: partition
            .uncontrollable
            .iter()
            .map(|&i| var_of[&circuit.inputs[i].var()])
            .collect(),
        controllable_vars: partition
            .controllable
            .iter()
            .map(|&i| var_of[&circuit.inputs[i].var()])
            .collect(),
        transitions,
        error,
        init,
    }
}

impl SafetyGame {
    /// Latch substitution list for stepping a state set.
    pub fn substitution(&self) -> Vec<(BddVar, NodeRef)> {
        self.latch_vars.iter().copied().zip(self.transitions.iter().copied()).collect()
    }

    /// Gives back the references held by the game's nodes.
    pub fn release(&self, m: &mut BddManager) {
        for &f in &self.transitions {
            m.deref_node(f);
        }
        m.deref_node(self.error);
        m.deref_node(self.init);
    }
}

/// Releases `nodes` when eager mode is on; otherwise leaves them pinned.
fn release_all(m: &mut BddManager, eager: bool, nodes: &[NodeRef]) {
    if eager {
        for &node in nodes {
            m.deref_node(node);
        }
    }
}

/// Uncontrollable preimage: states from which the environment can pick an
/// input such that, whatever the controller answers, the step errs or
/// lands in `states`.
///
/// Computes `∃U ∀C (err ∨ states[L := f])`. The result is returned
/// unreferenced; `states` must be over latch variables only.
pub fn upre(
    m: &mut BddManager,
    game: &SafetyGame,
    states: NodeRef,
    options: &SolverOptions,
) -> NodeRef {
    debug_assert!(
        m.support(states).iter().all(|v| game.latch_vars.contains(v)),
        "preimage argument must range over latch variables"
    );
    let eager = options.eager_deref;
    let stepped = m.vector_compose(states, &game.substitution());
    m.ref_node(stepped);
    let forced = if options.use_and_exists {
        // ∀C (err ∨ stepped) = ¬∃C (¬err ∧ ¬stepped), fused into one pass.
        let safe = m.not(game.error);
        m.ref_node(safe);
        let avoiding = m.not(stepped);
        m.ref_node(avoiding);
        let escape = m.and_exists(safe, avoiding, &game.controllable_vars);
        m.ref_node(escape);
        let forced = m.not(escape);
        m.ref_node(forced);
        release_all(m, eager, &[safe, avoiding, escape]);
        forced
    } else {
        let bad = m.or(game.error, stepped);
        m.ref_node(bad);
        let forced = m.quantify(bad, &game.controllable_vars, Quant::Forall);
        m.ref_node(forced);
        release_all(m, eager, &[bad]);
        forced
    };
    let result = m.quantify(forced, &game.uncontrollable_vars, Quant::Exists);
    release_all(m, eager, &[stepped, forced]);
    result
}

/// Controllable preimage, implemented directly (not via the [`upre`]
/// duality): states where the controller can answer every environment
/// input without erring and while staying in `states`.
///
/// Computes `∀U ∃C (¬err ∧ states[L := f])`, returned unreferenced.
pub fn cpre(m: &mut BddManager, game: &SafetyGame, states: NodeRef) -> NodeRef {
    let stepped = m.vector_compose(states, &game.substitution());
    m.ref_node(stepped);
    let safe = m.not(game.error);
    m.ref_node(safe);
    let good = m.and(safe, stepped);
    m.ref_node(good);
    let answered = m.quantify(good, &game.controllable_vars, Quant::Exists);
    m.ref_node(answered);
    let result = m.quantify(answered, &game.uncontrollable_vars, Quant::Forall);
    for node in [stepped, safe, good, answered] {
        m.deref_node(node);
    }
    result
}

/// Backward attractor fixpoint. The losing region is the least fixpoint of
/// one-step forcing; the game is realizable iff the all-zero initial state
/// stays outside it. Region handles in the result are referenced for the
/// caller.
///
/// The fixpoint always runs to completion, so the returned regions are
/// exact even when the verdict is already determined earlier.
pub fn solve(
    m: &mut BddManager,
    game: &SafetyGame,
    options: &SolverOptions,
) -> Result<GameResult, SolveError> {
    let mut attractor = m.constant(false);
    m.ref_node(attractor);
    let mut iterations = 0usize;
    loop {
        if let Some(deadline) = options.deadline {
            if Instant::now() >= deadline {
                m.deref_node(attractor);
                return Err(SolveError::Timeout { iterations });
            }
        }
        if let Some(limit) = options.node_limit {
            let live = m.live_node_count();
            if live > limit {
                m.deref_node(attractor);
                return Err(SolveError::NodeLimit { live, limit });
            }
        }
        let pre = upre(m, game, attractor, options);
        m.ref_node(pre);
        iterations += 1;
        let extended = m.or(attractor, pre);
        m.ref_node(extended);
        release_all(m, options.eager_deref, &[pre]);
        if extended == attractor {
            m.deref_node(extended);
            break;
        }
        release_all(m, options.eager_deref, &[attractor]);
        attractor = extended;
    }

    let winning = m.not(attractor);
    m.ref_node(winning);
    let all_zero: HashMap<BddVar, bool> =
        game.latch_vars.iter().map(|&v| (v, false)).collect();
    let realizable = !m.eval(attractor, &all_zero);
    Ok(GameResult {
        realizable,
        losing_region: attractor,
        winning_region: winning,
        iterations,
    })
}
