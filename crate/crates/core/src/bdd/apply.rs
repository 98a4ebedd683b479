//! Apply operations. Everything reduces to `ite`; quantification and the
//! combined conjoin-and-quantify pass have dedicated recursions with their
//! own cache keys. Public entry points run deferred maintenance first and
//! pin their operands across it; internal recursions never trigger
//! collection or reordering, so unreferenced intermediates stay valid
//! until the operation returns.

use std::collections::HashMap;

use super::{op, BddManager, BddVar, NodeRef, Quant, ONE, ZERO};

impl BddManager {
    pub fn ite(&mut self, f: NodeRef, g: NodeRef, h: NodeRef) -> NodeRef {
        let (f, g, h) = (self.unwrap(f), self.unwrap(g), self.unwrap(h));
        self.housekeep(&[f, g, h]);
        let result = self.ite_rec(f, g, h);
        self.wrap(result)
    }

    pub fn not(&mut self, f: NodeRef) -> NodeRef {
        let f = self.unwrap(f);
        self.housekeep(&[f]);
        let result = self.ite_rec(f, ZERO, ONE);
        self.wrap(result)
    }

    pub fn and(&mut self, f: NodeRef, g: NodeRef) -> NodeRef {
        let (f, g) = (self.unwrap(f), self.unwrap(g));
        self.housekeep(&[f, g]);
        let (a, b) = (f.min(g), f.max(g));
        let result = self.ite_rec(a, b, ZERO);
        self.wrap(result)
    }

    pub fn or(&mut self, f: NodeRef, g: NodeRef) -> NodeRef {
        let (f, g) = (self.unwrap(f), self.unwrap(g));
        self.housekeep(&[f, g]);
        let (a, b) = (f.min(g), f.max(g));
        let result = self.ite_rec(a, ONE, b);
        self.wrap(result)
    }

    pub fn xor(&mut self, f: NodeRef, g: NodeRef) -> NodeRef {
        let (f, g) = (self.unwrap(f), self.unwrap(g));
        self.housekeep(&[f, g]);
        let (a, b) = (f.min(g), f.max(g));
        let not_b = self.ite_rec(b, ZERO, ONE);
        let result = self.ite_rec(a, not_b, b);
        self.wrap(result)
    }

    pub fn implies(&mut self, f: NodeRef, g: NodeRef) -> NodeRef {
        let (f, g) = (self.unwrap(f), self.unwrap(g));
        self.housekeep(&[f, g]);
        let result = self.ite_rec(f, g, ONE);
        self.wrap(result)
    }

    pub fn iff(&mut self, f: NodeRef, g: NodeRef) -> NodeRef {
        let (f, g) = (self.unwrap(f), self.unwrap(g));
        self.housekeep(&[f, g]);
        let (a, b) = (f.min(g), f.max(g));
        let not_b = self.ite_rec(b, ZERO, ONE);
        let result = self.ite_rec(a, b, not_b);
        self.wrap(result)
    }

    /// Quantifies the given variables out of `f`. Duplicate variables in
    /// the list are harmless.
    pub fn quantify(&mut self, f: NodeRef, vars: &[BddVar], kind: Quant) -> NodeRef {
        let f = self.unwrap(f);
        self.housekeep(&[f]);
        let cube = self.cube_of(vars);
        let result = match kind {
            Quant::Exists => self.exists_rec(f, cube),
            Quant::Forall => self.forall_rec(f, cube),
        };
        self.wrap(result)
    }

    /// `∃ vars. f ∧ g` in one pass, without materializing the conjunction.
    pub fn and_exists(&mut self, f: NodeRef, g: NodeRef, vars: &[BddVar]) -> NodeRef {
        let (f, g) = (self.unwrap(f), self.unwrap(g));
        self.housekeep(&[f, g]);
        let cube = self.cube_of(vars);
        let result = self.and_exists_rec(f, g, cube);
        self.wrap(result)
    }

    /// Simultaneous substitution: every occurrence of a mapped variable is
    /// replaced by its image in one pass, so images are never re-substituted.
    /// Unmapped variables stay themselves.
    pub fn vector_compose(&mut self, f: NodeRef, substitution: &[(BddVar, NodeRef)]) -> NodeRef {
        let f = self.unwrap(f);
        let mut protect = vec![f];
        let mut map: HashMap<u32, u32> = HashMap::with_capacity(substitution.len());
        for (var, image) in substitution {
            self.check_var(*var);
            let image = self.unwrap(*image);
            protect.push(image);
            map.insert(var.0, image);
        }
        self.housekeep(&protect);
        let mut memo = HashMap::new();
        let result = self.compose_rec(f, &map, &mut memo);
        self.wrap(result)
    }

    /// Cofactor: `f` with `var` fixed to `value`.
    pub fn cofactor(&mut self, f: NodeRef, var: BddVar, value: bool) -> NodeRef {
        let f = self.unwrap(f);
        self.check_var(var);
        self.housekeep(&[f]);
        let result = self.cofactor_rec(f, var.0, value);
        self.wrap(result)
    }

    /// Coudert-Madre simplification: returns a function that agrees with
    /// `f` wherever `care` holds and is free elsewhere, typically smaller
    /// than `f`.
    pub fn restrict(&mut self, f: NodeRef, care: NodeRef) -> NodeRef {
        let (f, care) = (self.unwrap(f), self.unwrap(care));
        self.housekeep(&[f, care]);
        let result = self.restrict_rec(f, care);
        self.wrap(result)
    }

    // ---- recursions ----

    pub(crate) fn ite_rec(&mut self, f: u32, g: u32, h: u32) -> u32 {
        if f == ONE {
            return g;
        }
        if f == ZERO {
            return h;
        }
        if g == h {
            return g;
        }
        if g == ONE && h == ZERO {
            return f;
        }
        // ite(f, f, h) = ite(f, 1, h); ite(f, g, f) = ite(f, g, 0).
        let g = if g == f { ONE } else { g };
        let h = if h == f { ZERO } else { h };
        if g == ONE && h == ZERO {
            return f;
        }
        if let Some(result) = self.cache_lookup(op::ITE, f, g, h) {
            return result;
        }
        let top = self.level(f).min(self.level(g)).min(self.level(h));
        let var = self.order[top as usize].0;
        let (f0, f1) = self.cofactors_at(f, top);
        let (g0, g1) = self.cofactors_at(g, top);
        let (h0, h1) = self.cofactors_at(h, top);
        let high = self.ite_rec(f1, g1, h1);
        let low = self.ite_rec(f0, g0, h0);
        let result = self.mk_node(var, low, high);
        self.cache_store(op::ITE, f, g, h, result);
        result
    }

    /// Both cofactors with respect to the variable at `level`. Nodes whose
    /// top lies below that level are unaffected by it.
    fn cofactors_at(&self, idx: u32, level: u32) -> (u32, u32) {
        if self.level(idx) == level {
            let node = self.node(idx);
            (node.low, node.high)
        } else {
            (idx, idx)
        }
    }

    /// Conjunction of the positive literals of `vars`, as a node chain.
    /// Doubles as the cache identity of the quantified set.
    fn cube_of(&mut self, vars: &[BddVar]) -> u32 {
        for var in vars {
            self.check_var(*var);
        }
        let mut sorted: Vec<u32> = vars.iter().map(|v| v.0).collect();
        sorted.sort_by_key(|&v| self.level_of[v as usize]);
        sorted.dedup();
        let mut cube = ONE;
        for &var in sorted.iter().rev() {
            cube = self.mk_node(var, ZERO, cube);
        }
        cube
    }

    /// Drops cube variables that lie above `level`; they cannot occur in
    /// the function being quantified.
    fn advance_cube(&self, mut cube: u32, level: u32) -> u32 {
        while cube != ONE && self.level(cube) < level {
            cube = self.node(cube).high;
        }
        cube
    }

    pub(crate) fn exists_rec(&mut self, f: u32, cube: u32) -> u32 {
        if f <= ONE {
            return f;
        }
        let cube = self.advance_cube(cube, self.level(f));
        if cube == ONE {
            return f;
        }
        if let Some(result) = self.cache_lookup(op::EXISTS, f, cube, 0) {
            return result;
        }
        let node = self.node(f);
        let result = if self.level(f) == self.level(cube) {
            let rest = self.node(cube).high;
            let low = self.exists_rec(node.low, rest);
            if low == ONE {
                ONE
            } else {
                let high = self.exists_rec(node.high, rest);
                let (a, b) = (low.min(high), low.max(high));
                self.ite_rec(a, ONE, b)
            }
        } else {
            let low = self.exists_rec(node.low, cube);
            let high = self.exists_rec(node.high, cube);
            self.mk_node(node.var, low, high)
        };
        self.cache_store(op::EXISTS, f, cube, 0, result);
        result
    }

    /// Universal quantification by conjoining cofactors directly.
    pub(crate) fn forall_rec(&mut self, f: u32, cube: u32) -> u32 {
        if f <= ONE {
            return f;
        }
        let cube = self.advance_cube(cube, self.level(f));
        if cube == ONE {
            return f;
        }
        if let Some(result) = self.cache_lookup(op::FORALL, f, cube, 0) {
            return result;
        }
        let node = self.node(f);
        let result = if self.level(f) == self.level(cube) {
            let rest = self.node(cube).high;
            let low = self.forall_rec(node.low, rest);
            if low == ZERO {
                ZERO
            } else {
                let high = self.forall_rec(node.high, rest);
                let (a, b) = (low.min(high), low.max(high));
                self.ite_rec(a, b, ZERO)
            }
        } else {
            let low = self.forall_rec(node.low, cube);
            let high = self.forall_rec(node.high, cube);
            self.mk_node(node.var, low, high)
        };
        self.cache_store(op::FORALL, f, cube, 0, result);
        result
    }

    pub(crate) fn and_exists_rec(&mut self, f: u32, g: u32, cube: u32) -> u32 {
        if f == ZERO || g == ZERO {
            return ZERO;
        }
        let (f, g) = (f.min(g), f.max(g));
        let top = self.level(f).min(self.level(g));
        let cube = self.advance_cube(cube, top);
        if f == ONE || f == g {
            return self.exists_rec(g, cube);
        }
        // Both operands are internal nodes from here on.
        if cube == ONE {
            return self.ite_rec(f, g, ZERO);
        }
        if let Some(result) = self.cache_lookup(op::AND_EXISTS, f, g, cube) {
            return result;
        }
        let (f0, f1) = self.cofactors_at(f, top);
        let (g0, g1) = self.cofactors_at(g, top);
        let result = if self.level(cube) == top {
            let rest = self.node(cube).high;
            let low = self.and_exists_rec(f0, g0, rest);
            if low == ONE {
                ONE
            } else {
                let high = self.and_exists_rec(f1, g1, rest);
                let (a, b) = (low.min(high), low.max(high));
                self.ite_rec(a, ONE, b)
            }
        } else {
            let var = self.order[top as usize].0;
            let low = self.and_exists_rec(f0, g0, cube);
            let high = self.and_exists_rec(f1, g1, cube);
            self.mk_node(var, low, high)
        };
        self.cache_store(op::AND_EXISTS, f, g, cube, result);
        result
    }

    fn compose_rec(&mut self, f: u32, map: &HashMap<u32, u32>, memo: &mut HashMap<u32, u32>) -> u32 {
        if f <= ONE {
            return f;
        }
        if let Some(&result) = memo.get(&f) {
            return result;
        }
        let node = self.node(f);
        let low = self.compose_rec(node.low, map, memo);
        let high = self.compose_rec(node.high, map, memo);
        let image = match map.get(&node.var) {
            Some(&image) => image,
            None => self.mk_node(node.var, ZERO, ONE),
        };
        let result = self.ite_rec(image, high, low);
        memo.insert(f, result);
        result
    }

    fn cofactor_rec(&mut self, f: u32, var: u32, value: bool) -> u32 {
        let var_level = self.level_of[var as usize];
        if f <= ONE || self.level(f) > var_level {
            return f;
        }
        let node = self.node(f);
        if self.level(f) == var_level {
            return if value { node.high } else { node.low };
        }
        let tag = if value { op::COFACTOR1 } else { op::COFACTOR0 };
        if let Some(result) = self.cache_lookup(tag, f, var, 0) {
            return result;
        }
        let low = self.cofactor_rec(node.low, var, value);
        let high = self.cofactor_rec(node.high, var, value);
        let result = self.mk_node(node.var, low, high);
        self.cache_store(tag, f, var, 0, result);
        result
    }

    fn restrict_rec(&mut self, f: u32, care: u32) -> u32 {
        if care == ZERO {
            // Nothing is cared about; any function will do.
            return ZERO;
        }
        if f <= ONE || care == ONE {
            return f;
        }
        // Care variables above f's top cannot constrain it; abstract them.
        if self.level(care) < self.level(f) {
            let node = self.node(care);
            let (a, b) = (node.low.min(node.high), node.low.max(node.high));
            let widened = self.ite_rec(a, ONE, b);
            return self.restrict_rec(f, widened);
        }
        if let Some(result) = self.cache_lookup(op::RESTRICT, f, care, 0) {
            return result;
        }
        let node = self.node(f);
        let result = if self.level(f) == self.level(care) {
            let care_node = self.node(care);
            if care_node.low == ZERO {
                self.restrict_rec(node.high, care_node.high)
            } else if care_node.high == ZERO {
                self.restrict_rec(node.low, care_node.low)
            } else {
                let low = self.restrict_rec(node.low, care_node.low);
                let high = self.restrict_rec(node.high, care_node.high);
                self.mk_node(node.var, low, high)
            }
        } else {
            let low = self.restrict_rec(node.low, care);
            let high = self.restrict_rec(node.high, care);
            self.mk_node(node.var, low, high)
        };
        self.cache_store(op::RESTRICT, f, care, 0, result);
        result
    }
}
