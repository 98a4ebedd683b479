//! Shared fixtures for the criterion benchmarks.

use aigsynth::bdd::{BddManager, BddVar, NodeRef};
use aigsynth::gen::Formula;

pub fn manager_with_vars(count: usize) -> (BddManager, Vec<BddVar>) {
    let mut m = BddManager::new();
    let vars = (0..count).map(|_| m.add_var()).collect();
    (m, vars)
}

pub fn build_formula(m: &mut BddManager, formula: &Formula, vars: &[BddVar]) -> NodeRef {
    match formula {
        Formula::Const(value) => m.constant(*value),
        Formula::Var(index) => m.var_node(vars[*index]),
        Formula::Not(inner) => {
            let a = build_formula(m, inner, vars);
            m.not(a)
        }
        Formula::And(lhs, rhs) => {
            let a = build_formula(m, lhs, vars);
            let b = build_formula(m, rhs, vars);
            m.and(a, b)
        }
        Formula::Or(lhs, rhs) => {
            let a = build_formula(m, lhs, vars);
            let b = build_formula(m, rhs, vars);
            m.or(a, b)
        }
        Formula::Xor(lhs, rhs) => {
            let a = build_formula(m, lhs, vars);
            let b = build_formula(m, rhs, vars);
            m.xor(a, b)
        }
    }
}

/// (x1 y1)+(x2 y2)+... with the whole x block ordered before the y block,
/// the classic worst case for a fixed order and best case for sifting.
pub fn separated_pairs(pairs: usize) -> (BddManager, NodeRef) {
    let (mut m, vars) = manager_with_vars(pairs * 2);
    let mut f = m.constant(false);
    for i in 0..pairs {
        let x = m.var_node(vars[i]);
        let y = m.var_node(vars[pairs + i]);
        let conjunction = m.and(x, y);
        f = m.or(f, conjunction);
    }
    m.ref_node(f);
    (m, f)
}
