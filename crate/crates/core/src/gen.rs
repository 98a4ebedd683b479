//! Deterministic fixture generators: random circuits, parameterized counter
//! specifications, and random boolean formulas with a truth-table evaluator.
//!
//! Tests and benchmarks seed these with a fixed RNG so corpora are
//! reproducible. The formula evaluator doubles as an independent oracle for
//! checking symbolic results by exhaustive enumeration.

use rand::Rng;

use crate::aiger::{AigCircuit, CircuitBuilder, Literal};

/// Bounds for [`random_circuit`]. Actual counts are drawn uniformly from
/// `0..=max` per section, so small degenerate circuits appear regularly.
#[derive(Clone, Debug)]
pub struct RandomCircuitParams {
    pub max_latches: usize,
    pub max_uncontrollable: usize,
    pub max_controllable: usize,
    pub max_ands: usize,
}

impl Default for RandomCircuitParams {
    fn default() -> Self {
        RandomCircuitParams {
            max_latches: 6,
            max_uncontrollable: 3,
            max_controllable: 3,
            max_ands: 20,
        }
    }
}

/// Generates a random safety specification: named inputs (`u<k>` for the
/// environment, `controllable_c<k>` for the controller), latches with reset
/// 0, random AND logic over everything defined so far, and a single `err`
/// output drawn from the literal pool. Always passes `validate_spec`.
pub fn random_circuit<R: Rng>(rng: &mut R, params: &RandomCircuitParams) -> AigCircuit {
    let num_uncontrollable = rng.gen_range(0..=params.max_uncontrollable);
    let num_controllable = rng.gen_range(0..=params.max_controllable);
    let num_latches = rng.gen_range(0..=params.max_latches);
    let num_ands = rng.gen_range(0..=params.max_ands);

    let mut builder = CircuitBuilder::new();
    let mut pool = vec![Literal::FALSE];
    for position in 0..num_uncontrollable {
        pool.push(builder.add_input(Some(&format!("u{position}"))));
    }
    for position in 0..num_controllable {
        pool.push(builder.add_input(Some(&format!("controllable_c{position}"))));
    }
    let mut latch_literals = Vec::with_capacity(num_latches);
    for position in 0..num_latches {
        let latch = builder.add_latch(Some(&format!("l{position}")));
        latch_literals.push(latch);
        pool.push(latch);
    }

    let pick = |rng: &mut R, pool: &[Literal]| {
        let literal = pool[rng.gen_range(0..pool.len())];
        if rng.gen::<bool>() {
            literal.negate()
        } else {
            literal
        }
    };
    for _ in 0..num_ands {
        let a = pick(rng, &pool);
        let b = pick(rng, &pool);
        let gate = builder.and(a, b);
        // Folding may return an existing literal; only grow the pool on
        // genuinely new gates to keep later picks diverse.
        if !pool.contains(&gate) && !pool.contains(&gate.negate()) {
            pool.push(gate);
        }
    }

    for latch in latch_literals {
        let next = pick(rng, &pool);
        builder.set_latch_next(latch, next);
    }
    let err = pick(rng, &pool);
    builder.add_output(err, Some("err"));
    builder.finish()
}

/// Builds a counter specification: `bits` latches hold a counter that
/// increments whenever the environment raises `tick`, and the error output
/// fires when the counter saturates at all ones.
///
/// With `controllable_reset` the controller gets a reset input that clears
/// the counter, making the specification realizable; without it the
/// environment can tick the counter into the error state, making it
/// unrealizable.
pub fn counter_spec(bits: u32, controllable_reset: bool) -> AigCircuit {
    assert!(bits >= 1, "counter needs at least one bit");
    let mut builder = CircuitBuilder::new();
    let tick = builder.add_input(Some("tick"));
    let reset = controllable_reset.then(|| builder.add_input(Some("controllable_reset")));
    let latches: Vec<Literal> = (0..bits)
        .map(|bit| builder.add_latch(Some(&format!("count{bit}"))))
        .collect();

    let mut carry = tick;
    for &latch in &latches {
        let sum = builder.xor(latch, carry);
        let next_carry = builder.and(latch, carry);
        let next = match reset {
            Some(reset) => builder.and(reset.negate(), sum),
            None => sum,
        };
        builder.set_latch_next(latch, next);
        carry = next_carry;
    }

    let mut saturated = Literal::TRUE;
    for &latch in &latches {
        saturated = builder.and(saturated, latch);
    }
    builder.add_output(saturated, Some("err"));
    builder.finish()
}

/// Boolean formula AST for oracle checks.
#[derive(Clone, Debug)]
pub enum Formula {
    Const(bool),
    Var(usize),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Xor(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn eval(&self, assignment: &[bool]) -> bool {
        match self {
            Formula::Const(value) => *value,
            Formula::Var(index) => assignment[*index],
            Formula::Not(inner) => !inner.eval(assignment),
            Formula::And(a, b) => a.eval(assignment) && b.eval(assignment),
            Formula::Or(a, b) => a.eval(assignment) || b.eval(assignment),
            Formula::Xor(a, b) => a.eval(assignment) != b.eval(assignment),
        }
    }
}

/// Draws a random formula over `num_vars` variables with the given
/// connective depth. Leaves are variables with an occasional constant.
pub fn random_formula<R: Rng>(rng: &mut R, num_vars: usize, depth: usize) -> Formula {
    if depth == 0 || num_vars == 0 {
        return if num_vars > 0 && rng.gen_range(0..8) > 0 {
            Formula::Var(rng.gen_range(0..num_vars))
        } else {
            Formula::Const(rng.gen())
        };
    }
    let left = Box::new(random_formula(rng, num_vars, depth - 1));
    match rng.gen_range(0..4) {
        0 => Formula::Not(left),
        1 => Formula::And(left, Box::new(random_formula(rng, num_vars, depth - 1))),
        2 => Formula::Or(left, Box::new(random_formula(rng, num_vars, depth - 1))),
        _ => Formula::Xor(left, Box::new(random_formula(rng, num_vars, depth - 1))),
    }
}

/// Expands an assignment index into per-variable bits: bit `i` of `index`
/// is the value of variable `i`.
pub fn assignment_bits(index: usize, num_vars: usize) -> Vec<bool> {
    (0..num_vars).map(|bit| index >> bit & 1 == 1).collect()
}

/// Full truth table of a formula: entry `i` is the value under
/// [`assignment_bits`]`(i, num_vars)`.
pub fn truth_table(formula: &Formula, num_vars: usize) -> Vec<bool> {
    (0..1usize << num_vars)
        .map(|index| formula.eval(&assignment_bits(index, num_vars)))
        .collect()
}
