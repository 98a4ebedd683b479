//! Determinization of winning strategies.
//!
//! Solving yields a winning region `W` over latch variables. This module
//! turns it into one concrete move function per controllable input and
//! splices those functions back into the specification, producing a
//! self-contained circuit whose only inputs are the environment's.

use std::collections::HashMap;

use crate::aiger::{AigCircuit, CircuitBuilder, InputPartition, LatchReset, Literal};
use crate::bdd::{BddManager, BddVar, NodeRef, Quant};
use crate::game::SafetyGame;

/// Knobs for move-function extraction.
#[derive(Clone, Copy, Debug)]
pub struct ExtractOptions {
    /// Shrink each move function against its care set. Off, the move is the
    /// canonical "play 1 exactly where 0 loses" choice.
    pub use_restrict: bool,
}

impl Default for ExtractOptions {
    fn default() -> ExtractOptions {
        ExtractOptions { use_restrict: true }
    }
}

/// A synthesized implementation together with its certificate.
#[derive(Clone, Debug)]
pub struct Solution {
    /// The specification with every controllable input replaced by
    /// synthesized logic. Inputs are exactly the uncontrollable ones.
    pub circuit: AigCircuit,
    /// Combinational winning-region certificate: one input per latch of
    /// `circuit`, named alike, and a single output `winning_region`.
    pub witness: AigCircuit,
    /// AND gates added on top of the specification.
    pub strategy_size: usize,
}

/// Builds the strategy relation: triples (state, environment move, controller
/// move) that start inside `winning`, avoid the error now, and land back
/// inside `winning`. Returns an unreferenced node.
pub fn strategy_relation(m: &mut BddManager, game: &SafetyGame, winning: NodeRef) -> NodeRef {
    let stepped = m.vector_compose(winning, &game.substitution());
    m.ref_node(stepped);
    let safe = m.not(game.error);
    m.ref_node(safe);
    let now = m.and(winning, safe);
    m.ref_node(now);
    let relation = m.and(now, stepped);
    m.deref_node(stepped);
    m.deref_node(safe);
    m.deref_node(now);
    relation
}

/// Extracts one move function per controllable input, in input order. Each
/// returned node holds a reference owned by the caller.
///
/// Move `k` is chosen from the quantified cofactors of the relation: with
/// `p1 = ∃ later moves. Λ[c:=1]` and `p0` alike, the function plays 1 exactly
/// where only 1 keeps the play winning, 0 everywhere else. Any function
/// between `p1 ∧ ¬p0` and `p1 ∨ ¬p0` would do; the restrict option exploits
/// that freedom to shed nodes. After each choice the relation is rewritten
/// with it, so later moves account for earlier ones.
pub fn extract_functions(
    m: &mut BddManager,
    game: &SafetyGame,
    winning: NodeRef,
    options: &ExtractOptions,
) -> Vec<(BddVar, NodeRef)> {
    let mut relation = strategy_relation(m, game, winning);
    m.ref_node(relation);
    let mut moves = Vec::with_capacity(game.controllable_vars.len());
    for (k, &c) in game.controllable_vars.iter().enumerate() {
        let later = &game.controllable_vars[k + 1..];
        let quantified_cofactor = |m: &mut BddManager, value: bool| {
            let co = m.cofactor(relation, c, value);
            m.ref_node(co);
            let q = m.quantify(co, later, Quant::Exists);
            m.ref_node(q);
            m.deref_node(co);
            q
        };
        let p1 = quantified_cofactor(m, true);
        let p0 = quantified_cofactor(m, false);
        let must_play_one = m.not(p0);
        m.ref_node(must_play_one);
        let mut g = m.and(p1, must_play_one);
        m.ref_node(g);
        if options.use_restrict {
            let care = m.or(p1, p0);
            m.ref_node(care);
            let shrunk = m.restrict(g, care);
            m.ref_node(shrunk);
            m.deref_node(care);
            m.deref_node(g);
            g = shrunk;
        }
        m.deref_node(p1);
        m.deref_node(p0);
        m.deref_node(must_play_one);
        let rewritten = m.vector_compose(relation, &[(c, g)]);
        m.ref_node(rewritten);
        m.deref_node(relation);
        relation = rewritten;
        moves.push((c, g));
    }
    m.deref_node(relation);
    moves
}

/// Lowers `node` into AND gates of `builder`, reading variable literals from
/// `literal_of`. Each internal node costs at most three gates; shared
/// subgraphs are emitted once per call, and the builder's structural hash
/// deduplicates across calls.
pub fn bdd_to_circuit(
    m: &BddManager,
    node: NodeRef,
    builder: &mut CircuitBuilder,
    literal_of: &HashMap<BddVar, Literal>,
) -> Literal {
    fn lower(
        m: &BddManager,
        node: NodeRef,
        builder: &mut CircuitBuilder,
        literal_of: &HashMap<BddVar, Literal>,
        memo: &mut HashMap<NodeRef, Literal>,
    ) -> Literal {
        if let Some(value) = m.constant_value(node) {
            return if value { Literal::TRUE } else { Literal::FALSE };
        }
        if let Some(&cached) = memo.get(&node) {
            return cached;
        }
        let var = m.node_var(node).expect("non-terminal node has a variable");
        let selector = *literal_of
            .get(&var)
            .unwrap_or_else(|| panic!("no circuit literal for BDD variable {var:?}"));
        let high = lower(m, m.node_high(node), builder, literal_of, memo);
        let low = lower(m, m.node_low(node), builder, literal_of, memo);
        let result = builder.mux(selector, high, low);
        memo.insert(node, result);
        result
    }
    let mut memo = HashMap::new();
    lower(m, node, builder, literal_of, &mut memo)
}

fn rewire(map: &HashMap<u32, Literal>, literal: Literal) -> Literal {
    let base = *map
        .get(&literal.var())
        .unwrap_or_else(|| panic!("literal {literal} has no replacement"));
    if literal.is_negated() {
        base.negate()
    } else {
        base
    }
}

fn latch_label(circuit: &AigCircuit, position: usize) -> String {
    match circuit.latch_name(position) {
        Some(name) => name.to_string(),
        None => format!("l{position}"),
    }
}

/// Splices synthesized move functions into the specification and certifies
/// the result. `game` must have been built from `spec` under `partition`,
/// and `winning` must be a winning region on the same manager. Meaningful
/// only when the game is realizable.
pub fn build_solution(
    m: &mut BddManager,
    spec: &AigCircuit,
    partition: &InputPartition,
    game: &SafetyGame,
    winning: NodeRef,
    options: &ExtractOptions,
) -> Solution {
    let moves = extract_functions(m, game, winning, options);

    let mut builder = CircuitBuilder::new();
    let mut map: HashMap<u32, Literal> = HashMap::new();
    map.insert(0, Literal::FALSE);

    for &position in &partition.uncontrollable {
        let fresh = builder.add_input(spec.input_name(position));
        map.insert(spec.inputs[position].var(), fresh);
    }
    // Latch names survive, with positional fallbacks so the witness can
    // always address them by name.
    let mut latch_literals = Vec::with_capacity(spec.latches.len());
    for (position, latch) in spec.latches.iter().enumerate() {
        debug_assert_eq!(latch.reset, LatchReset::Zero);
        let fresh = builder.add_latch(Some(&latch_label(spec, position)));
        map.insert(latch.current.var(), fresh);
        latch_literals.push(fresh);
    }

    let mut literal_of: HashMap<BddVar, Literal> = HashMap::new();
    for (i, &var) in game.latch_vars.iter().enumerate() {
        literal_of.insert(var, latch_literals[i]);
    }
    for (j, &var) in game.uncontrollable_vars.iter().enumerate() {
        let position = partition.uncontrollable[j];
        literal_of.insert(var, map[&spec.inputs[position].var()]);
    }
    for (k, &(_, function)) in moves.iter().enumerate() {
        let lowered = bdd_to_circuit(m, function, &mut builder, &literal_of);
        let position = partition.controllable[k];
        map.insert(spec.inputs[position].var(), lowered);
    }

    for gate in &spec.ands {
        let a = rewire(&map, gate.rhs0);
        let b = rewire(&map, gate.rhs1);
        let fresh = builder.and(a, b);
        map.insert(gate.lhs.var(), fresh);
    }
    for (position, latch) in spec.latches.iter().enumerate() {
        builder.set_latch_next(latch_literals[position], rewire(&map, latch.next));
    }
    builder.add_output(rewire(&map, spec.outputs[0]), spec.output_name(0));
    let circuit = builder.finish();

    let mut witness_builder = CircuitBuilder::new();
    let mut witness_literals: HashMap<BddVar, Literal> = HashMap::new();
    for (position, &var) in game.latch_vars.iter().enumerate() {
        let fresh = witness_builder.add_input(Some(&latch_label(spec, position)));
        witness_literals.insert(var, fresh);
    }
    let region = bdd_to_circuit(m, winning, &mut witness_builder, &witness_literals);
    witness_builder.add_output(region, Some("winning_region"));
    let witness = witness_builder.finish();

    for (_, function) in moves {
        m.deref_node(function);
    }

    let strategy_size = circuit.ands.len().saturating_sub(spec.ands.len());
    Solution { circuit, witness, strategy_size }
}

#[cfg(test)]
mod tests {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    use super::*;
    use crate::aiger::partition_inputs;
    use crate::game::{build_game, solve, SolverOptions};
    use crate::gen::{counter_spec, random_circuit, RandomCircuitParams};
    use crate::verify::{
        check_invariant, check_syntactic, explicit_game_oracle, model_check_forward, Verdict,
        VerifyLimits,
    };

    fn plain_options() -> SolverOptions {
        SolverOptions { reorder: false, ..SolverOptions::default() }
    }

    fn small_params() -> RandomCircuitParams {
        RandomCircuitParams {
            max_latches: 3,
            max_uncontrollable: 2,
            max_controllable: 2,
            max_ands: 10,
        }
    }

    #[test]
    fn relation_is_total_on_the_winning_region() {
        let mut rng = StdRng::seed_from_u64(0x5712);
        for _ in 0..60 {
            let circuit = random_circuit(&mut rng, &small_params());
            let partition = partition_inputs(&circuit);
            let options = plain_options();
            let mut m = options.manager();
            let game = build_game(&mut m, &circuit, &partition);
            let result = solve(&mut m, &game, &options).unwrap();
            let relation = strategy_relation(&mut m, &game, result.winning_region);
            m.ref_node(relation);
            let some_move = m.quantify(relation, &game.controllable_vars, Quant::Exists);
            m.ref_node(some_move);
            let all_env = m.quantify(some_move, &game.uncontrollable_vars, Quant::Forall);
            m.ref_node(all_env);
            let total = m.implies(result.winning_region, all_env);
            assert_eq!(total, m.constant(true), "every winning state must offer a move");
        }
    }

    #[test]
    fn moves_depend_only_on_state_and_environment() {
        let mut rng = StdRng::seed_from_u64(0x5713);
        for _ in 0..40 {
            let circuit = random_circuit(&mut rng, &small_params());
            let partition = partition_inputs(&circuit);
            let options = plain_options();
            let mut m = options.manager();
            let game = build_game(&mut m, &circuit, &partition);
            let result = solve(&mut m, &game, &options).unwrap();
            let use_restrict = rng.gen_bool(0.5);
            let moves = extract_functions(
                &mut m,
                &game,
                result.winning_region,
                &ExtractOptions { use_restrict },
            );
            for &(_, g) in &moves {
                for var in m.support(g) {
                    assert!(
                        !game.controllable_vars.contains(&var),
                        "a move function may not read controller inputs"
                    );
                }
            }
        }
    }

    #[test]
    fn substituted_relation_still_covers_the_winning_region() {
        let mut rng = StdRng::seed_from_u64(0x5714);
        for _ in 0..40 {
            let circuit = random_circuit(&mut rng, &small_params());
            let partition = partition_inputs(&circuit);
            let options = plain_options();
            let mut m = options.manager();
            let game = build_game(&mut m, &circuit, &partition);
            let result = solve(&mut m, &game, &options).unwrap();
            let use_restrict = rng.gen_bool(0.5);
            let moves = extract_functions(
                &mut m,
                &game,
                result.winning_region,
                &ExtractOptions { use_restrict },
            );
            let relation = strategy_relation(&mut m, &game, result.winning_region);
            let fixed = m.vector_compose(relation, &moves);
            let all_env = m.quantify(fixed, &game.uncontrollable_vars, Quant::Forall);
            let covered = m.implies(result.winning_region, all_env);
            assert_eq!(
                covered,
                m.constant(true),
                "the chosen moves must keep every winning state winning"
            );
        }
    }

    #[test]
    fn lowering_constants_and_variables_costs_nothing() {
        let mut m = BddManager::new();
        let v = m.add_var();
        let node = m.var_node(v);
        let mut builder = CircuitBuilder::new();
        let x = builder.add_input(Some("x"));
        let literal_of = HashMap::from([(v, x)]);
        assert_eq!(bdd_to_circuit(&m, m.constant(true), &mut builder, &literal_of), Literal::TRUE);
        assert_eq!(
            bdd_to_circuit(&m, m.constant(false), &mut builder, &literal_of),
            Literal::FALSE
        );
        assert_eq!(bdd_to_circuit(&m, node, &mut builder, &literal_of), x);
        let negated = m.not(node);
        assert_eq!(bdd_to_circuit(&m, negated, &mut builder, &literal_of), x.negate());
        assert_eq!(builder.and_count(), 0);
    }

    #[test]
    fn lowering_shares_gates_across_calls() {
        let mut m = BddManager::new();
        let v0 = m.add_var();
        let v1 = m.add_var();
        let a = m.var_node(v0);
        let b = m.var_node(v1);
        let conj = m.and(a, b);
        let mut builder = CircuitBuilder::new();
        let x = builder.add_input(Some("x"));
        let y = builder.add_input(Some("y"));
        let literal_of = HashMap::from([(v0, x), (v1, y)]);
        let first = bdd_to_circuit(&m, conj, &mut builder, &literal_of);
        let gates_after_first = builder.and_count();
        let second = bdd_to_circuit(&m, conj, &mut builder, &literal_of);
        assert_eq!(first, second);
        assert_eq!(builder.and_count(), gates_after_first);
    }

    #[test]
    fn lowering_agrees_with_bdd_evaluation() {
        let mut rng = StdRng::seed_from_u64(0x5715);
        for _ in 0..100 {
            let mut m = BddManager::new();
            let vars: Vec<_> = (0..5).map(|_| m.add_var()).collect();
            let formula = crate::gen::random_formula(&mut rng, 5, 4);
            let node = build_formula(&mut m, &formula, &vars);
            let mut builder = CircuitBuilder::new();
            let inputs: Vec<_> =
                (0..5).map(|i| builder.add_input(Some(&format!("x{i}")))).collect();
            let literal_of: HashMap<_, _> = vars.iter().copied().zip(inputs.iter().copied()).collect();
            let out = bdd_to_circuit(&m, node, &mut builder, &literal_of);
            builder.add_output(out, Some("f"));
            let circuit = builder.finish();
            let mut simulator = crate::aiger::Simulator::new(&circuit);
            for index in 0..32usize {
                let bits = crate::gen::assignment_bits(index, 5);
                let assignment: HashMap<_, _> =
                    vars.iter().copied().zip(bits.iter().copied()).collect();
                let step = simulator.step(&[], &bits);
                assert_eq!(step.outputs[0], m.eval(node, &assignment));
            }
        }
    }

    fn build_formula(m: &mut BddManager, formula: &crate::gen::Formula, vars: &[BddVar]) -> NodeRef {
        use crate::gen::Formula::*;
        match formula {
            Const(value) => m.constant(*value),
            Var(index) => m.var_node(vars[*index]),
            Not(inner) => {
                let a = build_formula(m, inner, vars);
                m.not(a)
            }
            And(lhs, rhs) => {
                let a = build_formula(m, lhs, vars);
                let b = build_formula(m, rhs, vars);
                m.and(a, b)
            }
            Or(lhs, rhs) => {
                let a = build_formula(m, lhs, vars);
                let b = build_formula(m, rhs, vars);
                m.or(a, b)
            }
            Xor(lhs, rhs) => {
                let a = build_formula(m, lhs, vars);
                let b = build_formula(m, rhs, vars);
                m.xor(a, b)
            }
        }
    }

    fn synthesize(spec: &AigCircuit, use_restrict: bool) -> Option<Solution> {
        let partition = partition_inputs(spec);
        let options = plain_options();
        let mut m = options.manager();
        let game = build_game(&mut m, spec, &partition);
        let result = solve(&mut m, &game, &options).unwrap();
        if !result.realizable {
            return None;
        }
        Some(build_solution(
            &mut m,
            spec,
            &partition,
            &game,
            result.winning_region,
            &ExtractOptions { use_restrict },
        ))
    }

    #[test]
    fn counter_solution_passes_every_check() {
        let spec = counter_spec(3, true);
        let solution = synthesize(&spec, true).expect("counter with controllable reset");
        assert!(check_syntactic(&spec, &solution.circuit).is_clean());
        assert_eq!(
            check_invariant(&solution.circuit, &solution.witness).unwrap(),
            Verdict::Verified
        );
        assert_eq!(
            model_check_forward(&solution.circuit, &VerifyLimits::default()),
            Verdict::Verified
        );
        assert_eq!(solution.witness.outputs.len(), 1);
        assert_eq!(solution.witness.output_name(0), Some("winning_region"));
        assert_eq!(solution.witness.inputs.len(), spec.latches.len());
    }

    #[test]
    fn random_realizable_games_synthesize_verified_solutions() {
        let mut rng = StdRng::seed_from_u64(0x5716);
        let mut synthesized = 0;
        while synthesized < 40 {
            let spec = random_circuit(&mut rng, &small_params());
            let use_restrict = rng.gen_bool(0.5);
            let Some(solution) = synthesize(&spec, use_restrict) else { continue };
            synthesized += 1;
            assert!(check_syntactic(&spec, &solution.circuit).is_clean());
            assert_eq!(
                check_invariant(&solution.circuit, &solution.witness).unwrap(),
                Verdict::Verified,
                "witness must certify the closed loop for\n{}",
                crate::aiger::serialize_ascii(&spec)
            );
            assert_eq!(
                model_check_forward(&solution.circuit, &VerifyLimits::default()),
                Verdict::Verified
            );
            // The closed loop is a one-player game; the explicit oracle
            // doubles as an independent reachability check.
            let closed_partition = partition_inputs(&solution.circuit);
            let explicit = explicit_game_oracle(&solution.circuit, &closed_partition).unwrap();
            assert!(explicit.realizable);
        }
    }

    #[test]
    fn solution_interface_mirrors_the_specification() {
        let mut b = CircuitBuilder::new();
        let u = b.add_input(Some("request"));
        let c = b.add_input(Some("controllable_grant"));
        let l = b.add_latch(Some("pending"));
        let unanswered = b.and(l, c.negate());
        b.set_latch_next(l, u);
        b.add_output(unanswered, Some("err"));
        let spec = b.finish();
        let solution = synthesize(&spec, true).expect("grant every pending request");
        assert_eq!(solution.circuit.inputs.len(), 1);
        assert_eq!(solution.circuit.input_name(0), Some("request"));
        assert_eq!(solution.circuit.latches.len(), 1);
        assert_eq!(solution.circuit.latch_name(0), Some("pending"));
        assert_eq!(solution.circuit.output_name(0), Some("err"));
        assert_eq!(solution.witness.input_name(0), Some("pending"));
        assert_eq!(
            solution.strategy_size,
            solution.circuit.ands.len().saturating_sub(spec.ands.len())
        );
    }

    #[test]
    fn broken_witness_is_never_certified() {
        let spec = counter_spec(3, true);
        let solution = synthesize(&spec, false).expect("counter with controllable reset");
        // Negating the witness output empties the region at the initial
        // state; the check must notice rather than rubber-stamp.
        let mut tampered = solution.witness.clone();
        tampered.outputs[0] = tampered.outputs[0].negate();
        assert_ne!(check_invariant(&solution.circuit, &tampered).unwrap(), Verdict::Verified);
    }

    #[test]
    fn broken_solution_is_never_certified() {
        let spec = counter_spec(2, true);
        let solution = synthesize(&spec, true).expect("counter with controllable reset");
        // Forcing the error output high makes the closed loop unsafe; both
        // checks must refuse it.
        let mut tampered = solution.circuit.clone();
        tampered.outputs[0] = Literal::TRUE;
        assert_ne!(check_invariant(&tampered, &solution.witness).unwrap(), Verdict::Verified);
        assert!(matches!(
            model_check_forward(&tampered, &VerifyLimits::default()),
            Verdict::Falsified(_)
        ));
    }
}
