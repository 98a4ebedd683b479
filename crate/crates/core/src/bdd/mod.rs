//! Reduced ordered binary decision diagrams without complement edges.
//!
//! A [`BddManager`] owns a node arena, a unique table per variable, and a
//! lossy operation cache. Canonicity holds at all times: two functions are
//! equal iff their [`NodeRef`] handles are equal. Nodes are reference
//! counted; operations return unreferenced results, so callers that keep a
//! node across further manager calls must [`BddManager::ref_node`] it and
//! release it with [`BddManager::deref_node`] when done. Garbage collection
//! and dynamic reordering run only between operations (at public entry
//! points or on explicit calls), never mid-recursion, and both preserve the
//! meaning of every referenced handle.
//!
//! The manager is single-threaded; move it between threads whole.

mod apply;
mod reorder;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, Ordering};

/// Stable variable identifier, independent of the variable's current
/// position in the order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BddVar(pub u32);

/// Handle to a BDD node. Carries the owning manager's id so cross-manager
/// mixups are diagnosed instead of silently corrupting results.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeRef {
    mgr: u32,
    idx: u32,
}

impl NodeRef {
    /// Arena index, for diagnostics only.
    pub fn index(self) -> u32 {
        self.idx
    }
}

/// Existential or universal quantification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quant {
    Exists,
    Forall,
}

/// When the manager reorders variables on its own.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReorderPolicy {
    Off,
    /// Sift when the live node count has doubled since the last reorder
    /// and exceeds `floor`.
    SiftOnGrowth { floor: usize },
}

#[derive(Clone, Debug)]
pub struct BddConfig {
    /// log2 of the operation cache slot count.
    pub cache_bits: u32,
    /// Collect garbage at operation boundaries once this many dead nodes
    /// accumulate. `None` leaves collection fully manual.
    pub gc_dead_threshold: Option<usize>,
    pub reorder: ReorderPolicy,
}

impl Default for BddConfig {
    fn default() -> Self {
        BddConfig { cache_bits: 16, gc_dead_threshold: None, reorder: ReorderPolicy::Off }
    }
}

pub(crate) const ZERO: u32 = 0;
pub(crate) const ONE: u32 = 1;
/// Level reported for terminals: below every variable.
pub(crate) const TERMINAL_LEVEL: u32 = u32::MAX;
const TERMINAL_VAR: u32 = u32::MAX;
const FREE_VAR: u32 = u32::MAX - 1;

#[derive(Clone, Copy)]
pub(crate) struct Node {
    pub var: u32,
    pub low: u32,
    pub high: u32,
}

pub(crate) mod op {
    pub const ITE: u8 = 1;
    pub const EXISTS: u8 = 2;
    pub const FORALL: u8 = 3;
    pub const AND_EXISTS: u8 = 4;
    pub const RESTRICT: u8 = 5;
    pub const COFACTOR0: u8 = 6;
    pub const COFACTOR1: u8 = 7;
}

/// Fixed-capacity, lossy: colliding entries overwrite each other. Cleared
/// on garbage collection and reordering, since entries may reference nodes
/// that those operations reclaim.
struct OpCache {
    slots: Vec<CacheSlot>,
    mask: usize,
    /// Stores since the last clear; lets an empty cache clear in O(1).
    stores: usize,
}

#[derive(Clone, Copy)]
struct CacheSlot {
    op: u8,
    a: u32,
    b: u32,
    c: u32,
    result: u32,
}

const EMPTY_SLOT: CacheSlot = CacheSlot { op: 0, a: 0, b: 0, c: 0, result: 0 };

impl OpCache {
    fn new(bits: u32) -> OpCache {
        let size = 1usize << bits;
        OpCache { slots: vec![EMPTY_SLOT; size], mask: size - 1, stores: 0 }
    }

    fn slot(&self, op: u8, a: u32, b: u32, c: u32) -> usize {
        let mut h = (a as u64) << 40 ^ (b as u64) << 20 ^ (c as u64) ^ (op as u64) << 56;
        h = h.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        h ^= h >> 29;
        h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        (h >> 32) as usize & self.mask
    }

    fn lookup(&self, op: u8, a: u32, b: u32, c: u32) -> Option<u32> {
        let slot = self.slots[self.slot(op, a, b, c)];
        (slot.op == op && slot.a == a && slot.b == b && slot.c == c).then_some(slot.result)
    }

    fn store(&mut self, op: u8, a: u32, b: u32, c: u32, result: u32) {
        let index = self.slot(op, a, b, c);
        self.slots[index] = CacheSlot { op, a, b, c, result };
        self.stores += 1;
    }

    fn clear(&mut self) {
        if self.stores > 0 {
            self.slots.fill(EMPTY_SLOT);
            self.stores = 0;
        }
    }
}

static NEXT_MANAGER_ID: AtomicU32 = AtomicU32::new(1);

pub struct BddManager {
    id: u32,
    pub(crate) nodes: Vec<Node>,
    refs: Vec<u32>,
    free: Vec<u32>,
    /// Unique table per variable id: (low, high) -> node index.
    pub(crate) subtables: Vec<HashMap<(u32, u32), u32>>,
    /// Position -> variable id.
    pub(crate) order: Vec<BddVar>,
    /// Variable id -> position.
    pub(crate) level_of: Vec<u32>,
    cache: OpCache,
    config: BddConfig,
    /// Live internal nodes (terminals excluded).
    num_nodes: usize,
    /// Live internal nodes with reference count zero.
    num_dead: usize,
    reorder_checkpoint: usize,
    gc_runs: usize,
    reorder_runs: usize,
    /// Monotone count of nodes ever reclaimed; used to detect frees.
    reclaims: usize,
}

impl BddManager {
    pub fn new() -> BddManager {
        BddManager::with_config(BddConfig::default())
    }

    pub fn with_config(config: BddConfig) -> BddManager {
        let terminal = |var| Node { var, low: 0, high: 0 };
        BddManager {
            id: NEXT_MANAGER_ID.fetch_add(1, Ordering::Relaxed),
            nodes: vec![terminal(TERMINAL_VAR), terminal(TERMINAL_VAR)],
            refs: vec![1, 1],
            free: Vec::new(),
            subtables: Vec::new(),
            order: Vec::new(),
            level_of: Vec::new(),
            cache: OpCache::new(config.cache_bits),
            config,
            num_nodes: 0,
            num_dead: 0,
            reorder_checkpoint: 1,
            gc_runs: 0,
            reorder_runs: 0,
            reclaims: 0,
        }
    }

    /// Registers a fresh variable at the bottom of the current order.
    pub fn add_var(&mut self) -> BddVar {
        let var = BddVar(self.subtables.len() as u32);
        self.subtables.push(HashMap::new());
        self.level_of.push(self.order.len() as u32);
        self.order.push(var);
        var
    }

    pub fn num_vars(&self) -> usize {
        self.subtables.len()
    }

    /// Current variable order, outermost first.
    pub fn current_order(&self) -> Vec<BddVar> {
        self.order.clone()
    }

    pub fn constant(&self, value: bool) -> NodeRef {
        self.wrap(if value { ONE } else { ZERO })
    }

    /// The function of a single variable.
    pub fn var_node(&mut self, var: BddVar) -> NodeRef {
        self.check_var(var);
        let idx = self.mk_node(var.0, ZERO, ONE);
        self.wrap(idx)
    }

    /// `Some(value)` when the node is a terminal.
    pub fn constant_value(&self, node: NodeRef) -> Option<bool> {
        match self.unwrap(node) {
            ZERO => Some(false),
            ONE => Some(true),
            _ => None,
        }
    }

    /// Deciding variable of an internal node; `None` for terminals.
    pub fn node_var(&self, node: NodeRef) -> Option<BddVar> {
        let idx = self.unwrap(node);
        (idx > ONE).then(|| BddVar(self.nodes[idx as usize].var))
    }

    /// Branch taken when the deciding variable is false. Panics on terminals.
    pub fn node_low(&self, node: NodeRef) -> NodeRef {
        let idx = self.unwrap(node);
        assert!(idx > ONE, "terminals have no branches");
        self.wrap(self.nodes[idx as usize].low)
    }

    /// Branch taken when the deciding variable is true. Panics on terminals.
    pub fn node_high(&self, node: NodeRef) -> NodeRef {
        let idx = self.unwrap(node);
        assert!(idx > ONE, "terminals have no branches");
        self.wrap(self.nodes[idx as usize].high)
    }

    /// Pins a node so garbage collection and reordering keep it.
    pub fn ref_node(&mut self, node: NodeRef) -> NodeRef {
        let idx = self.unwrap(node);
        self.inc_ref(idx);
        node
    }

    /// Releases one reference. Panics when the count is already zero; that
    /// is a caller bookkeeping bug, and clamping would hide it.
    pub fn deref_node(&mut self, node: NodeRef) {
        let idx = self.unwrap(node);
        self.dec_ref(idx);
    }

    /// Reclaims every node without references. Returns the number of nodes
    /// collected. Also clears the operation cache, whose entries may
    /// mention reclaimed nodes.
    pub fn collect_garbage(&mut self) -> usize {
        self.collect_garbage_internal()
    }

    pub fn live_node_count(&self) -> usize {
        self.num_nodes
    }

    pub fn dead_node_count(&self) -> usize {
        self.num_dead
    }

    pub fn gc_runs(&self) -> usize {
        self.gc_runs
    }

    pub fn reorder_runs(&self) -> usize {
        self.reorder_runs
    }

    // ---- internal plumbing ----

    pub(crate) fn wrap(&self, idx: u32) -> NodeRef {
        NodeRef { mgr: self.id, idx }
    }

    pub(crate) fn unwrap(&self, node: NodeRef) -> u32 {
        assert!(
            node.mgr == self.id,
            "node belongs to manager {}, not manager {}",
            node.mgr,
            self.id
        );
        debug_assert!(self.is_live(node.idx), "stale node handle {}", node.idx);
        node.idx
    }

    fn check_var(&self, var: BddVar) {
        assert!(
            (var.0 as usize) < self.subtables.len(),
            "variable {:?} is not registered with this manager",
            var
        );
    }

    pub(crate) fn is_live(&self, idx: u32) -> bool {
        idx <= ONE || self.nodes[idx as usize].var != FREE_VAR
    }

    /// Position of the node's variable in the order; terminals sort below
    /// every variable.
    pub(crate) fn level(&self, idx: u32) -> u32 {
        let var = self.nodes[idx as usize].var;
        if var == TERMINAL_VAR {
            TERMINAL_LEVEL
        } else {
            self.level_of[var as usize]
        }
    }

    pub(crate) fn node(&self, idx: u32) -> Node {
        self.nodes[idx as usize]
    }

    /// Find-or-create with both reduction rules: equal branches collapse,
    /// and identical triples share one node.
    pub(crate) fn mk_node(&mut self, var: u32, low: u32, high: u32) -> u32 {
        if low == high {
            return low;
        }
        debug_assert!(self.level_of[var as usize] < self.level(low), "order violation");
        debug_assert!(self.level_of[var as usize] < self.level(high), "order violation");
        if let Some(&existing) = self.subtables[var as usize].get(&(low, high)) {
            return existing;
        }
        let idx = match self.free.pop() {
            Some(idx) => {
                self.nodes[idx as usize] = Node { var, low, high };
                self.refs[idx as usize] = 0;
                idx
            }
            None => {
                let idx = self.nodes.len() as u32;
                self.nodes.push(Node { var, low, high });
                self.refs.push(0);
                idx
            }
        };
        self.subtables[var as usize].insert((low, high), idx);
        self.inc_ref(low);
        self.inc_ref(high);
        self.num_nodes += 1;
        self.num_dead += 1; // fresh nodes are unreferenced until adopted
        idx
    }

    pub(crate) fn inc_ref(&mut self, idx: u32) {
        if idx <= ONE {
            return;
        }
        let count = &mut self.refs[idx as usize];
        if *count == u32::MAX {
            return; // saturated counts stay pinned forever
        }
        if *count == 0 {
            self.num_dead -= 1;
        }
        *count += 1;
    }

    pub(crate) fn dec_ref(&mut self, idx: u32) {
        if idx <= ONE {
            return;
        }
        let count = &mut self.refs[idx as usize];
        if *count == u32::MAX {
            return;
        }
        assert!(*count > 0, "reference count of node {idx} would drop below zero");
        *count -= 1;
        if *count == 0 {
            self.num_dead += 1;
        }
    }

    /// Decrement and, when the node dies, reclaim it and its exclusive
    /// descendants immediately. Used during reordering where exact live
    /// counts drive sifting decisions.
    pub(crate) fn dec_ref_reclaim(&mut self, idx: u32) {
        if idx <= ONE {
            return;
        }
        self.dec_ref(idx);
        if self.refs[idx as usize] == 0 {
            self.reclaim_cascade(idx);
        }
    }

    fn reclaim_cascade(&mut self, root: u32) {
        let mut stack = vec![root];
        while let Some(idx) = stack.pop() {
            if idx <= ONE || self.refs[idx as usize] != 0 || !self.is_live(idx) {
                continue;
            }
            let node = self.nodes[idx as usize];
            self.subtables[node.var as usize].remove(&(node.low, node.high));
            self.nodes[idx as usize].var = FREE_VAR;
            self.free.push(idx);
            self.num_nodes -= 1;
            self.num_dead -= 1;
            self.reclaims += 1;
            for child in [node.low, node.high] {
                if child > ONE {
                    self.dec_ref(child);
                    if self.refs[child as usize] == 0 {
                        stack.push(child);
                    }
                }
            }
        }
    }

    pub(crate) fn collect_garbage_internal(&mut self) -> usize {
        self.cache.clear();
        let before = self.num_nodes;
        let dead: Vec<u32> = (2..self.nodes.len() as u32)
            .filter(|&idx| self.is_live(idx) && self.refs[idx as usize] == 0)
            .collect();
        for idx in dead {
            if self.is_live(idx) && self.refs[idx as usize] == 0 {
                self.reclaim_cascade(idx);
            }
        }
        self.gc_runs += 1;
        before - self.num_nodes
    }

    /// Runs deferred maintenance at an operation boundary. `protect` pins
    /// the operands so collection or reordering cannot reclaim them.
    pub(crate) fn housekeep(&mut self, protect: &[u32]) {
        let reorder_due = match self.config.reorder {
            ReorderPolicy::SiftOnGrowth { floor } => {
                self.num_nodes > floor && self.num_nodes >= 2 * self.reorder_checkpoint
            }
            ReorderPolicy::Off => false,
        };
        let gc_due = self.config.gc_dead_threshold.is_some_and(|t| self.num_dead >= t);
        if !reorder_due && !gc_due {
            return;
        }
        for &idx in protect {
            self.inc_ref(idx);
        }
        if reorder_due {
            self.sift_reorder_internal();
        } else {
            self.collect_garbage_internal();
        }
        for &idx in protect {
            self.dec_ref(idx);
        }
    }

    pub(crate) fn cache_lookup(&self, op: u8, a: u32, b: u32, c: u32) -> Option<u32> {
        self.cache.lookup(op, a, b, c)
    }

    pub(crate) fn cache_store(&mut self, op: u8, a: u32, b: u32, c: u32, result: u32) {
        self.cache.store(op, a, b, c, result);
    }

    pub(crate) fn cache_clear(&mut self) {
        self.cache.clear();
    }

    pub(crate) fn note_reorder_done(&mut self) {
        self.reorder_checkpoint = self.num_nodes.max(1);
        self.reorder_runs += 1;
    }

    pub(crate) fn reclaim_count(&self) -> usize {
        self.reclaims
    }

    // ---- read-only queries ----

    /// Evaluates the function under a total assignment of its support.
    /// Panics when a variable on the decision path has no value.
    pub fn eval(&self, node: NodeRef, assignment: &HashMap<BddVar, bool>) -> bool {
        let mut idx = self.unwrap(node);
        while idx > ONE {
            let node = self.nodes[idx as usize];
            let value = assignment
                .get(&BddVar(node.var))
                .unwrap_or_else(|| panic!("no assignment for variable {} in eval", node.var));
            idx = if *value { node.high } else { node.low };
        }
        idx == ONE
    }

    /// Number of distinct internal nodes reachable from `node`. Terminals
    /// count zero, single variables count one.
    pub fn node_count(&self, node: NodeRef) -> usize {
        let root = self.unwrap(node);
        if root <= ONE {
            return 0;
        }
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![root];
        while let Some(idx) = stack.pop() {
            if idx <= ONE || !seen.insert(idx) {
                continue;
            }
            let node = self.nodes[idx as usize];
            stack.push(node.low);
            stack.push(node.high);
        }
        seen.len()
    }

    /// Variables the function actually depends on, outermost first.
    pub fn support(&self, node: NodeRef) -> Vec<BddVar> {
        let root = self.unwrap(node);
        let mut vars = std::collections::HashSet::new();
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![root];
        while let Some(idx) = stack.pop() {
            if idx <= ONE || !seen.insert(idx) {
                continue;
            }
            let node = self.nodes[idx as usize];
            vars.insert(node.var);
            stack.push(node.low);
            stack.push(node.high);
        }
        let mut result: Vec<BddVar> = vars.into_iter().map(BddVar).collect();
        result.sort_by_key(|v| self.level_of[v.0 as usize]);
        result
    }

    /// Some satisfying assignment over the function's support, preferring
    /// false branches; `None` for the constant false function. Variables
    /// absent from the result are unconstrained.
    pub fn any_sat(&self, node: NodeRef) -> Option<Vec<(BddVar, bool)>> {
        let mut idx = self.unwrap(node);
        if idx == ZERO {
            return None;
        }
        let mut assignment = Vec::new();
        while idx > ONE {
            let node = self.nodes[idx as usize];
            if node.low != ZERO {
                assignment.push((BddVar(node.var), false));
                idx = node.low;
            } else {
                assignment.push((BddVar(node.var), true));
                idx = node.high;
            }
        }
        Some(assignment)
    }

    /// Graphviz dump for debugging.
    pub fn to_dot(&self, node: NodeRef) -> String {
        let root = self.unwrap(node);
        let mut out = String::from("digraph bdd {\n  0 [label=\"0\" shape=box];\n  1 [label=\"1\" shape=box];\n");
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![root];
        while let Some(idx) = stack.pop() {
            if idx <= ONE || !seen.insert(idx) {
                continue;
            }
            let node = self.nodes[idx as usize];
            out.push_str(&format!("  {idx} [label=\"x{}\"];\n", node.var));
            out.push_str(&format!("  {idx} -> {} [style=dashed];\n", node.low));
            out.push_str(&format!("  {idx} -> {};\n", node.high));
            stack.push(node.low);
            stack.push(node.high);
        }
        out.push_str("}\n");
        out
    }

    /// Structural audit: unique-table consistency, ordering, reduction,
    /// and reference-count lower bounds. Panics on corruption. Intended
    /// for tests and debugging, not hot paths.
    pub fn debug_check(&self) {
        assert_eq!(self.order.len(), self.level_of.len());
        for (position, var) in self.order.iter().enumerate() {
            assert_eq!(self.level_of[var.0 as usize] as usize, position, "order maps are inconsistent");
        }
        let mut live = 0usize;
        let mut dead = 0usize;
        let mut parents: HashMap<u32, u32> = HashMap::new();
        for idx in 2..self.nodes.len() as u32 {
            if !self.is_live(idx) {
                continue;
            }
            live += 1;
            if self.refs[idx as usize] == 0 {
                dead += 1;
            }
            let node = self.nodes[idx as usize];
            assert_ne!(node.low, node.high, "unreduced node {idx}");
            assert!(self.is_live(node.low) && self.is_live(node.high), "node {idx} references a freed child");
            assert!(
                self.level(idx) < self.level(node.low) && self.level(idx) < self.level(node.high),
                "node {idx} violates the variable order"
            );
            assert_eq!(
                self.subtables[node.var as usize].get(&(node.low, node.high)),
                Some(&idx),
                "node {idx} missing from its unique table"
            );
            for child in [node.low, node.high] {
                if child > ONE {
                    *parents.entry(child).or_insert(0) += 1;
                }
            }
        }
        assert_eq!(live, self.num_nodes, "live count drifted");
        assert_eq!(dead, self.num_dead, "dead count drifted");
        let table_total: usize = self.subtables.iter().map(HashMap::len).sum();
        assert_eq!(table_total, live, "unique tables hold stale entries");
        for (idx, count) in parents {
            assert!(
                self.refs[idx as usize] >= count,
                "node {idx} has {count} parents but only {} references",
                self.refs[idx as usize]
            );
        }
    }
}

impl Default for BddManager {
    fn default() -> Self {
        BddManager::new()
    }
}
