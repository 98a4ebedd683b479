//! Dynamic variable reordering by sifting.
//!
//! The primitive is an in-place swap of two adjacent levels: nodes at the
//! upper level that depend on the lower variable are rewritten in place to
//! test the lower variable instead, so every existing handle keeps its
//! meaning. Sifting moves each variable through all positions and leaves
//! it wherever the total live node count was smallest, which can only
//! shrink the diagram or keep it the same size.

use super::{BddManager, BddVar, Node};

impl BddManager {
    /// Sifts every variable to its locally best position. Variables are
    /// processed in decreasing order of unique-table population. Returns
    /// the new order. All handles remain valid and denote the functions
    /// they denoted before.
    pub fn sift_reorder(&mut self) -> Vec<BddVar> {
        self.sift_reorder_internal();
        self.current_order()
    }

    pub(crate) fn sift_reorder_internal(&mut self) {
        // Dead nodes would distort size measurements; drop them first.
        // This also clears the operation cache, so entries can never
        // mention nodes reclaimed by the swaps below.
        self.collect_garbage_internal();
        let mut vars: Vec<BddVar> = (0..self.num_vars() as u32).map(BddVar).collect();
        vars.sort_by_key(|v| {
            (std::cmp::Reverse(self.subtables[v.0 as usize].len()), v.0)
        });
        for var in vars {
            if !self.subtables[var.0 as usize].is_empty() {
                self.sift_one(var);
            }
        }
        self.note_reorder_done();
    }

    fn sift_one(&mut self, var: BddVar) {
        let positions = self.order.len();
        if positions <= 1 {
            return;
        }
        let start = self.level_of[var.0 as usize] as usize;
        let mut position = start;
        let mut best_size = self.live_node_count();
        let mut best_position = start;
        let record = |size: usize, position: usize, best: &mut usize, best_pos: &mut usize| {
            if size < *best {
                *best = size;
                *best_pos = position;
            }
        };

        while position + 1 < positions {
            self.swap_adjacent(position);
            position += 1;
            record(self.live_node_count(), position, &mut best_size, &mut best_position);
        }
        while position > 0 {
            self.swap_adjacent(position - 1);
            position -= 1;
            record(self.live_node_count(), position, &mut best_size, &mut best_position);
        }
        while position < best_position {
            self.swap_adjacent(position);
            position += 1;
        }
    }

    /// Swaps the variables at `position` and `position + 1`.
    ///
    /// Let x be the upper and y the lower variable. An x-node without a
    /// y-child keeps its structure and simply ends up one level lower. An
    /// x-node with a y-child is rewritten in place to test y on top, with
    /// fresh (or shared) x-nodes below; its old children lose one parent
    /// and are reclaimed immediately when that was the last reference.
    /// Node identity is preserved for everything referenced from outside,
    /// so handles stay valid across the swap.
    pub(crate) fn swap_adjacent(&mut self, position: usize) {
        assert!(position + 1 < self.order.len(), "no level below {position} to swap with");
        let x = self.order[position];
        let y = self.order[position + 1];
        self.order.swap(position, position + 1);
        self.level_of[x.0 as usize] = (position + 1) as u32;
        self.level_of[y.0 as usize] = position as u32;

        // Nodes testing x whose meaning involves y must move y on top.
        let rewrite: Vec<(u32, Node)> = self.subtables[x.0 as usize]
            .iter()
            .filter(|&(&(low, high), _)| {
                self.nodes[low as usize].var == y.0 || self.nodes[high as usize].var == y.0
            })
            .map(|(_, &idx)| (idx, self.nodes[idx as usize]))
            .collect();
        if rewrite.is_empty() {
            return;
        }
        for (_, node) in &rewrite {
            self.subtables[x.0 as usize].remove(&(node.low, node.high));
        }

        let reclaims_before = self.reclaim_count();
        for (idx, node) in rewrite {
            let (f00, f01) = self.split(node.low, y.0);
            let (f10, f11) = self.split(node.high, y.0);
            let new_low = self.mk_node(x.0, f00, f10);
            let new_high = self.mk_node(x.0, f01, f11);
            self.inc_ref(new_low);
            self.inc_ref(new_high);
            self.nodes[idx as usize] = Node { var: y.0, low: new_low, high: new_high };
            let previous = self.subtables[y.0 as usize].insert((new_low, new_high), idx);
            debug_assert!(previous.is_none(), "swap produced a duplicate node");
            self.dec_ref_reclaim(node.low);
            self.dec_ref_reclaim(node.high);
        }
        if self.reclaim_count() > reclaims_before {
            // Reclaimed nodes may appear in cached results; drop them.
            self.cache_clear();
        }
    }

    /// Cofactors of a child with respect to variable `var`: its branches
    /// when it tests `var`, itself twice otherwise.
    fn split(&self, idx: u32, var: u32) -> (u32, u32) {
        let node = self.nodes[idx as usize];
        if idx > 1 && node.var == var {
            (node.low, node.high)
        } else {
            (idx, idx)
        }
    }
}
