//! Ordinal-tree navigation over a balanced-parentheses encoding.
//!
//! Nodes are identified by 1-based preorder rank. The excess directory is a
//! binary min/max tree over fixed-size blocks of the parenthesis bitvector;
//! every navigation call costs a constant number of directory probes, each
//! O(log n) worst case.

use crate::bits::{read_u64, BitVector, Builder};
use crate::error::{Error, Result};

/// 1-based preorder rank.
pub type Node = usize;

/// Bits per excess-directory leaf block.
const EX_BLOCK: usize = 128;

const NEUTRAL: ExNode = ExNode { total: 0, min: i32::MAX, max: i32::MIN, cnt: 0 };

#[derive(Clone, Copy, Debug)]
struct ExNode {
    total: i32,
    // min/max running excess within the block, relative to block entry.
    min: i32,
    max: i32,
    // how many positions attain `min`
    cnt: u32,
}

fn combine(l: ExNode, r: ExNode) -> ExNode {
    if r.cnt == 0 {
        return l;
    }
    if l.cnt == 0 {
        return r;
    }
    let rmin = l.total + r.min;
    let rmax = l.total + r.max;
    let min = l.min.min(rmin);
    ExNode {
        total: l.total + r.total,
        min,
        max: l.max.max(rmax),
        cnt: (if l.min == min { l.cnt } else { 0 }) + (if rmin == min { r.cnt } else { 0 }),
    }
}

/// Min/max-excess directory over the BP bitvector.
#[derive(Clone, Debug)]
struct ExcessIndex {
    nodes: Vec<ExNode>,
    n_internal: usize,
    n_blocks: usize,
}

impl ExcessIndex {
    fn build(bp: &BitVector) -> Self {
        let len = bp.len();
        let n_blocks = ((len + EX_BLOCK - 1) / EX_BLOCK).max(1);
        let n_internal = n_blocks.next_power_of_two() - 1;
        let mut nodes = vec![NEUTRAL; n_internal + n_blocks];
        for b in 0..n_blocks {
            let start = b * EX_BLOCK;
            let end = ((b + 1) * EX_BLOCK).min(len);
            let mut e = 0i32;
            let mut min = i32::MAX;
            let mut max = i32::MIN;
            let mut cnt = 0u32;
            for j in start..end {
                e += if bp.get(j) { 1 } else { -1 };
                if e < min {
                    min = e;
                    cnt = 1;
                } else if e == min {
                    cnt += 1;
                }
                if e > max {
                    max = e;
                }
            }
            nodes[n_internal + b] = ExNode { total: e, min, max, cnt };
        }
        let mut idx = n_internal;
        while idx > 0 {
            idx -= 1;
            let l = 2 * idx + 1;
            let r = 2 * idx + 2;
            let ln = if l < nodes.len() { nodes[l] } else { NEUTRAL };
            let rn = if r < nodes.len() { nodes[r] } else { NEUTRAL };
            nodes[idx] = combine(ln, rn);
        }
        ExcessIndex { nodes, n_internal, n_blocks }
    }

    fn node(&self, idx: usize) -> ExNode {
        if idx < self.nodes.len() {
            self.nodes[idx]
        } else {
            NEUTRAL
        }
    }

    fn bit_size(&self) -> usize {
        self.nodes.len() * std::mem::size_of::<ExNode>() * 8
    }

    /// Smallest bit position `j >= j0` whose running excess `E(j+1)` equals
    /// `target`.
    fn fwd_excess(&self, bp: &BitVector, j0: usize, target: i32) -> Option<usize> {
        let len = bp.len();
        if j0 >= len {
            return None;
        }
        let b0 = j0 / EX_BLOCK;
        let end = ((b0 + 1) * EX_BLOCK).min(len);
        let mut e = 2 * bp.rank1(j0) as i32 - j0 as i32;
        for j in j0..end {
            e += if bp.get(j) { 1 } else { -1 };
            if e == target {
                return Some(j);
            }
        }
        // e is now the excess at the end of block b0; climb and look right.
        let mut idx = self.n_internal + b0;
        while idx != 0 {
            if idx % 2 == 1 {
                // left child: examine the right sibling subtree
                let sib = self.node(idx + 1);
                if sib.cnt > 0 && e + sib.min <= target && target <= e + sib.max {
                    return Some(self.descend_fwd(bp, idx + 1, e, target));
                }
                e += sib.total;
            }
            idx = (idx - 1) / 2;
        }
        None
    }

    fn descend_fwd(&self, bp: &BitVector, mut idx: usize, mut e: i32, target: i32) -> usize {
        while idx < self.n_internal {
            let l = self.node(2 * idx + 1);
            if l.cnt > 0 && e + l.min <= target && target <= e + l.max {
                idx = 2 * idx + 1;
            } else {
                e += l.total;
                idx = 2 * idx + 2;
            }
        }
        let b = idx - self.n_internal;
        let start = b * EX_BLOCK;
        let end = ((b + 1) * EX_BLOCK).min(bp.len());
        for j in start..end {
            e += if bp.get(j) { 1 } else { -1 };
            if e == target {
                return j;
            }
        }
        unreachable!("directory promised a match in this block")
    }

    /// Largest bit position `j <= j0` whose running excess `E(j+1)` equals
    /// `target`.
    fn bwd_excess(&self, bp: &BitVector, j0: usize, target: i32) -> Option<usize> {
        let len = bp.len();
        if len == 0 {
            return None;
        }
        let j0 = j0.min(len - 1);
        let b0 = j0 / EX_BLOCK;
        let start = b0 * EX_BLOCK;
        let mut e = 2 * bp.rank1(j0 + 1) as i32 - (j0 + 1) as i32;
        for j in (start..=j0).rev() {
            if e == target {
                return Some(j);
            }
            e -= if bp.get(j) { 1 } else { -1 };
        }
        // e is now the excess at the start of block b0; climb and look left.
        let mut idx = self.n_internal + b0;
        while idx != 0 {
            if idx % 2 == 0 {
                // right child: examine the left sibling subtree
                let sib = self.node(idx - 1);
                let entry = e - sib.total;
                if sib.cnt > 0 && entry + sib.min <= target && target <= entry + sib.max {
                    return Some(self.descend_bwd(bp, idx - 1, e, target));
                }
                e = entry;
            }
            idx = (idx - 1) / 2;
        }
        None
    }

    fn descend_bwd(&self, bp: &BitVector, mut idx: usize, mut e_end: i32, target: i32) -> usize {
        while idx < self.n_internal {
            let r = self.node(2 * idx + 2);
            let entry = e_end - r.total;
            if r.cnt > 0 && entry + r.min <= target && target <= entry + r.max {
                idx = 2 * idx + 2;
            } else {
                e_end = entry;
                idx = 2 * idx + 1;
            }
        }
        let b = idx - self.n_internal;
        let start = b * EX_BLOCK;
        let end = ((b + 1) * EX_BLOCK).min(bp.len());
        let mut e = e_end;
        for j in (start..end).rev() {
            if e == target {
                return j;
            }
            e -= if bp.get(j) { 1 } else { -1 };
        }
        unreachable!("directory promised a match in this block")
    }

    /// Minimum of `E(j+1)` over bits `ba..=bb` and the number of positions
    /// attaining it.
    fn range_min(&self, bp: &BitVector, ba: usize, bb: usize) -> (i32, u32) {
        debug_assert!(ba <= bb && bb < bp.len());
        let mut e = 2 * bp.rank1(ba) as i32 - ba as i32;
        let mut min = i32::MAX;
        let mut cnt = 0u32;
        let take = |val: i32, c: u32, min: &mut i32, cnt: &mut u32| {
            if val < *min {
                *min = val;
                *cnt = c;
            } else if val == *min {
                *cnt += c;
            }
        };
        let b0 = ba / EX_BLOCK;
        let b1 = bb / EX_BLOCK;
        if b0 == b1 {
            for j in ba..=bb {
                e += if bp.get(j) { 1 } else { -1 };
                take(e, 1, &mut min, &mut cnt);
            }
            return (min, cnt);
        }
        for j in ba..(b0 + 1) * EX_BLOCK {
            e += if bp.get(j) { 1 } else { -1 };
            take(e, 1, &mut min, &mut cnt);
        }
        // whole blocks b0+1 ..= b1-1 via the tree
        e = self.visit_blocks(b0 + 1, b1, e, &mut |entry, _idx, n: ExNode| {
            if n.cnt > 0 {
                take(entry + n.min, n.cnt, &mut min, &mut cnt);
            }
        });
        for j in b1 * EX_BLOCK..=bb {
            e += if bp.get(j) { 1 } else { -1 };
            take(e, 1, &mut min, &mut cnt);
        }
        (min, cnt)
    }

    /// Visits maximal subtrees covering whole blocks `[blo, bhi)` in order,
    /// feeding the absolute excess at entry, the node index and the node to
    /// `f`; returns the absolute excess after the last block.
    fn visit_blocks(&self, blo: usize, bhi: usize, e: i32, f: &mut impl FnMut(i32, usize, ExNode)) -> i32 {
        fn go(
            ix: &ExcessIndex,
            idx: usize,
            lo: usize,
            hi: usize,
            blo: usize,
            bhi: usize,
            mut e: i32,
            f: &mut impl FnMut(i32, usize, ExNode),
        ) -> i32 {
            if bhi <= lo || hi <= blo || lo >= ix.n_blocks {
                return e;
            }
            let n = ix.node(idx);
            if blo <= lo && hi.min(ix.n_blocks) <= bhi {
                f(e, idx, n);
                return e + n.total;
            }
            let mid = (lo + hi) / 2;
            e = go(ix, 2 * idx + 1, lo, mid, blo, bhi, e, f);
            go(ix, 2 * idx + 2, mid, hi, blo, bhi, e, f)
        }
        if blo >= bhi {
            return e;
        }
        go(self, 0, 0, self.n_internal + 1, blo, bhi, e, f)
    }

    // Position of the k-th (1-based) occurrence of `target` as running excess
    // inside the subtree at `idx`, entered with absolute excess `entry`.
    fn descend_select(&self, bp: &BitVector, mut idx: usize, mut entry: i32, target: i32, mut k: u32) -> usize {
        while idx < self.n_internal {
            let l = self.node(2 * idx + 1);
            let hits = if l.cnt > 0 && entry + l.min == target { l.cnt } else { 0 };
            if hits >= k {
                idx = 2 * idx + 1;
            } else {
                k -= hits;
                entry += l.total;
                idx = 2 * idx + 2;
            }
        }
        let b = idx - self.n_internal;
        let start = b * EX_BLOCK;
        let end = ((b + 1) * EX_BLOCK).min(bp.len());
        let mut e = entry;
        for j in start..end {
            e += if bp.get(j) { 1 } else { -1 };
            if e == target {
                k -= 1;
                if k == 0 {
                    return j;
                }
            }
        }
        unreachable!("directory promised enough matches")
    }

    /// 1-based `i`-th bit position in `ba..=bb` whose running excess equals
    /// the range minimum.
    fn range_min_select(&self, bp: &BitVector, ba: usize, bb: usize, i: usize) -> usize {
        let (min, cnt) = self.range_min(bp, ba, bb);
        assert!(i >= 1 && i as u32 <= cnt, "min-select index {} of {}", i, cnt);
        let mut remaining = i as u32;
        let mut e = 2 * bp.rank1(ba) as i32 - ba as i32;
        let b0 = ba / EX_BLOCK;
        let b1 = bb / EX_BLOCK;
        let hi_in_first = if b0 == b1 { bb } else { (b0 + 1) * EX_BLOCK - 1 };
        for j in ba..=hi_in_first {
            e += if bp.get(j) { 1 } else { -1 };
            if e == min {
                remaining -= 1;
                if remaining == 0 {
                    return j;
                }
            }
        }
        if b0 != b1 {
            let mut found: Option<usize> = None;
            e = self.visit_blocks(b0 + 1, b1, e, &mut |entry, idx, n: ExNode| {
                if found.is_none() && n.cnt > 0 && entry + n.min == min {
                    if n.cnt < remaining {
                        remaining -= n.cnt;
                    } else {
                        found = Some(self.descend_select(bp, idx, entry, min, remaining));
                    }
                }
            });
            if let Some(j) = found {
                return j;
            }
            for j in b1 * EX_BLOCK..=bb {
                e += if bp.get(j) { 1 } else { -1 };
                if e == min {
                    remaining -= 1;
                    if remaining == 0 {
                        return j;
                    }
                }
            }
        }
        unreachable!("count promised a match")
    }
}

/// Pointer-based rooted ordered tree, used as the construction input, as the
/// explicit representation for over-trees, and as the test oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlainTree {
    /// Number of nodes; ids are `1..=n`.
    pub n: usize,
    pub root: usize,
    /// `children[v]` in left-to-right order; index 0 unused.
    pub children: Vec<Vec<usize>>,
}

impl PlainTree {
    pub fn new(n: usize, root: usize) -> Self {
        assert!(n >= 1 && root >= 1 && root <= n);
        PlainTree { n, root, children: vec![Vec::new(); n + 1] }
    }

    pub fn add_child(&mut self, parent: usize, child: usize) {
        debug_assert!(parent >= 1 && parent <= self.n && child >= 1 && child <= self.n);
        self.children[parent].push(child);
    }

    /// Builds from a parent array (`parents[v] == 0` marks the root), with
    /// siblings ordered by node id.
    pub fn from_parents(parents: &[usize]) -> Result<Self> {
        let n = parents.len().checked_sub(1).ok_or(Error::Invalid("empty parent array"))?;
        let mut root = 0;
        let mut t = PlainTree { n, root: 1, children: vec![Vec::new(); n + 1] };
        for v in 1..=n {
            if parents[v] == 0 {
                if root != 0 {
                    return Err(Error::Invalid("multiple roots"));
                }
                root = v;
            } else {
                if parents[v] > n {
                    return Err(Error::Invalid("parent out of range"));
                }
                t.children[parents[v]].push(v);
            }
        }
        if root == 0 {
            return Err(Error::Invalid("no root"));
        }
        t.root = root;
        Ok(t)
    }

    pub fn parents(&self) -> Vec<usize> {
        let mut p = vec![0usize; self.n + 1];
        for v in 1..=self.n {
            for &c in &self.children[v] {
                p[c] = v;
            }
        }
        p
    }
}

/// Immutable ordinal tree over balanced parentheses; open = 1, close = 0.
#[derive(Clone, Debug)]
pub struct BpTree {
    bp: BitVector,
    leaves: BitVector,
    excess: ExcessIndex,
    n: usize,
}

impl BpTree {
    /// Builds from an explicit tree; returns the tree and the map from old
    /// node ids to preorder ranks (index 0 unused).
    pub fn from_plain(t: &PlainTree) -> (Self, Vec<Node>) {
        let mut bits = Builder::with_capacity(2 * t.n);
        let mut map = vec![0 as Node; t.n + 1];
        let mut pre = 0;
        // stack entries: (node, next child index) — explicit to survive deep trees
        let mut stack: Vec<(usize, usize)> = Vec::with_capacity(64);
        bits.push(true);
        pre += 1;
        map[t.root] = pre;
        stack.push((t.root, 0));
        while let Some(top) = stack.last_mut() {
            let v = top.0;
            if top.1 < t.children[v].len() {
                let c = t.children[v][top.1];
                top.1 += 1;
                bits.push(true);
                pre += 1;
                map[c] = pre;
                stack.push((c, 0));
            } else {
                bits.push(false);
                stack.pop();
            }
        }
        assert_eq!(pre, t.n, "tree node count mismatch (disconnected input?)");
        let bp = bits.finish();
        (Self::from_bitvector(bp, t.n), map)
    }

    /// Builds from raw balanced parentheses (true = open).
    pub fn from_bp_bits(bits: &[bool]) -> Result<Self> {
        if bits.is_empty() || bits.len() % 2 != 0 {
            return Err(Error::Invalid("balanced parentheses must be nonempty and even"));
        }
        let mut e = 0i64;
        for (i, &b) in bits.iter().enumerate() {
            e += if b { 1 } else { -1 };
            if e < 0 || (e == 0 && i + 1 != bits.len()) {
                return Err(Error::Invalid("unbalanced or forest-shaped parentheses"));
            }
        }
        if e != 0 {
            return Err(Error::Invalid("unbalanced parentheses"));
        }
        let bp = BitVector::from_bits(bits);
        let n = bits.len() / 2;
        Ok(Self::from_bitvector(bp, n))
    }

    fn from_bitvector(bp: BitVector, n: usize) -> Self {
        let mut leaf_bits = Builder::with_capacity(bp.len());
        for i in 0..bp.len() {
            // a leaf opens at i when "10" occurs
            leaf_bits.push(bp.get(i) && i + 1 < bp.len() && !bp.get(i + 1));
        }
        let leaves = leaf_bits.finish();
        let excess = ExcessIndex::build(&bp);
        BpTree { bp, leaves, excess, n }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> Node {
        1
    }

    /// BP position of the opening parenthesis of `v`.
    #[inline]
    pub fn open_pos(&self, v: Node) -> usize {
        assert!(v >= 1 && v <= self.n, "node {} out of range {}", v, self.n);
        self.bp.select1(v)
    }

    /// Node whose opening parenthesis sits at `pos`.
    #[inline]
    pub fn node_at_open(&self, pos: usize) -> Node {
        debug_assert!(self.bp.get(pos), "position {} is not an open parenthesis", pos);
        self.bp.rank1(pos) + 1
    }

    /// BP position of the closing parenthesis of `v`.
    pub fn close_pos(&self, v: Node) -> usize {
        let o = self.open_pos(v);
        let d = self.depth_at(o);
        self.excess
            .fwd_excess(&self.bp, o + 1, d)
            .expect("balanced parentheses always close")
    }

    #[inline]
    fn depth_at(&self, open: usize) -> i32 {
        2 * self.bp.rank1(open) as i32 - open as i32
    }

    /// Depth of `v`; the root has depth 0.
    pub fn depth(&self, v: Node) -> usize {
        self.depth_at(self.open_pos(v)) as usize
    }

    pub fn is_leaf(&self, v: Node) -> bool {
        !self.bp.get(self.open_pos(v) + 1)
    }

    pub fn parent(&self, v: Node) -> Option<Node> {
        if v == self.root() {
            return None;
        }
        let o = self.open_pos(v);
        let d = self.depth_at(o);
        if d == 1 {
            return Some(self.root());
        }
        let j = self
            .excess
            .bwd_excess(&self.bp, o - 1, d - 1)
            .expect("non-root nodes have parents");
        Some(self.node_at_open(j + 1))
    }

    /// Number of children.
    pub fn degree(&self, v: Node) -> usize {
        let o = self.open_pos(v);
        if !self.bp.get(o + 1) {
            return 0;
        }
        let c = self.close_pos(v);
        self.excess.range_min(&self.bp, o, c - 2).1 as usize
    }

    /// `i`-th child, 1-based. Panics when `i` is out of range.
    pub fn child(&self, v: Node, i: usize) -> Node {
        assert!(i >= 1, "child index is 1-based");
        let o = self.open_pos(v);
        assert!(self.bp.get(o + 1), "leaf {} has no children", v);
        let c = self.close_pos(v);
        let j = self.excess.range_min_select(&self.bp, o, c - 2, i);
        self.node_at_open(j + 1)
    }

    /// Rank of `v` among its siblings, 1-based; 0 for the root.
    pub fn child_rank(&self, v: Node) -> usize {
        if v == self.root() {
            return 0;
        }
        let o = self.open_pos(v);
        let p = self.parent(v).unwrap();
        let po = self.open_pos(p);
        self.excess.range_min(&self.bp, po, o - 1).1 as usize
    }

    pub fn subtree_size(&self, v: Node) -> usize {
        let o = self.open_pos(v);
        let c = self.close_pos(v);
        (c - o + 1) / 2
    }

    pub fn first_child(&self, v: Node) -> Option<Node> {
        let o = self.open_pos(v);
        if self.bp.get(o + 1) {
            Some(self.node_at_open(o + 1))
        } else {
            None
        }
    }

    pub fn last_child(&self, v: Node) -> Option<Node> {
        let o = self.open_pos(v);
        if !self.bp.get(o + 1) {
            return None;
        }
        let c = self.close_pos(v);
        let d = self.depth_at(o);
        let j = self
            .excess
            .bwd_excess(&self.bp, c - 2, d + 1)
            .expect("non-leaf has a last child");
        Some(self.node_at_open(j + 1))
    }

    pub fn next_sibling(&self, v: Node) -> Option<Node> {
        let c = self.close_pos(v);
        if c + 1 < self.bp.len() && self.bp.get(c + 1) {
            Some(self.node_at_open(c + 1))
        } else {
            None
        }
    }

    pub fn prev_sibling(&self, v: Node) -> Option<Node> {
        let o = self.open_pos(v);
        if o == 0 || self.bp.get(o - 1) {
            return None;
        }
        // o-1 closes the previous sibling; find its opening parenthesis.
        let d = self.depth_at(o);
        let j = self
            .excess
            .bwd_excess(&self.bp, o.saturating_sub(2), d)
            .expect("closing parenthesis has a match");
        Some(self.node_at_open(j + 1))
    }

    /// Ancestor of `v` at depth `d` (`d <= depth(v)`).
    pub fn level_ancestor(&self, v: Node, d: usize) -> Node {
        let o = self.open_pos(v);
        let dv = self.depth_at(o);
        assert!(d as i32 <= dv, "level ancestor below node");
        if d as i32 == dv {
            return v;
        }
        if d == 0 {
            return self.root();
        }
        let j = self
            .excess
            .bwd_excess(&self.bp, o - 1, d as i32)
            .expect("ancestor exists at every smaller depth");
        self.node_at_open(j + 1)
    }

    pub fn lca(&self, u: Node, v: Node) -> Node {
        if u == v {
            return u;
        }
        let (a, b) = if self.open_pos(u) < self.open_pos(v) { (u, v) } else { (v, u) };
        let ca = self.close_pos(a);
        let ob = self.open_pos(b);
        if ca > ob {
            return a; // b inside a
        }
        // leftmost minimum between a's close and b's open is the opening
        // parenthesis of some child of the lca
        let (min, _) = self.excess.range_min(&self.bp, ca, ob - 1);
        let j = self.excess.fwd_excess(&self.bp, ca, min).unwrap();
        debug_assert!(self.bp.get(j + 1) || j + 1 == ob);
        let child = self.node_at_open(j + 1);
        self.parent(child).expect("lca child has a parent")
    }

    /// True when `anc` is `v` or an ancestor of `v`.
    pub fn is_ancestor(&self, anc: Node, v: Node) -> bool {
        let oa = self.open_pos(anc);
        let ov = self.open_pos(v);
        oa <= ov && self.close_pos(anc) >= ov
    }

    /// Number of leaves with preorder rank strictly less than `v`.
    pub fn leaf_rank(&self, v: Node) -> usize {
        self.leaves.rank1(self.open_pos(v))
    }

    /// `j`-th leaf in preorder, 1-based.
    pub fn leaf_select(&self, j: usize) -> Node {
        self.node_at_open(self.leaves.select1(j))
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.count_ones()
    }

    /// Rebuilds the explicit tree with ids equal to preorder ranks.
    pub fn to_plain(&self) -> PlainTree {
        let mut t = PlainTree::new(self.n, 1);
        let mut stack: Vec<Node> = Vec::new();
        for pos in 0..self.bp.len() {
            if self.bp.get(pos) {
                let v = self.bp.rank1(pos) + 1;
                if let Some(&p) = stack.last() {
                    t.add_child(p, v);
                }
                stack.push(v);
            } else {
                stack.pop();
            }
        }
        t
    }

    pub fn bp(&self) -> &BitVector {
        &self.bp
    }

    pub fn bit_size(&self) -> usize {
        self.bp.bit_size() + self.leaves.bit_size() + self.excess.bit_size() + 64
    }

    /// Serialization is the BP bitvector plus the node count.
    pub fn serialize(&self, out: &mut Vec<u8>) {
        self.bp.serialize(out);
        out.extend_from_slice(&(self.n as u64).to_le_bytes());
    }

    pub fn deserialize(input: &mut &[u8]) -> Result<Self> {
        let bp = BitVector::deserialize(input)?;
        let n = read_u64(input)? as usize;
        if bp.len() != 2 * n || bp.count_ones() != n {
            return Err(Error::Corrupt("bp length does not match node count"));
        }
        Ok(Self::from_bitvector(bp, n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tiny() -> BpTree {
        // (()()) : root with two leaf children
        BpTree::from_bp_bits(&[true, true, false, true, false, false]).unwrap()
    }

    #[test]
    fn tiny_tree_navigation() {
        let t = tiny();
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.parent(3), Some(1));
        assert_eq!(t.parent(2), Some(1));
        assert_eq!(t.parent(1), None);
        assert_eq!(t.child(1, 2), 3);
        assert_eq!(t.child(1, 1), 2);
        assert_eq!(t.degree(1), 2);
        assert_eq!(t.subtree_size(1), 3);
        assert_eq!(t.depth(1), 0);
        assert_eq!(t.depth(2), 1);
        assert_eq!(t.leaf_select(2), 3);
        assert_eq!(t.lca(2, 3), 1);
        assert_eq!(t.lca(2, 2), 2);
        assert_eq!(t.next_sibling(2), Some(3));
        assert_eq!(t.prev_sibling(3), Some(2));
        assert_eq!(t.prev_sibling(2), None);
        assert_eq!(t.next_sibling(3), None);
    }

    #[test]
    fn single_node() {
        let t = BpTree::from_bp_bits(&[true, false]).unwrap();
        assert_eq!(t.node_count(), 1);
        assert!(t.is_leaf(1));
        assert_eq!(t.parent(1), None);
        assert_eq!(t.degree(1), 0);
        assert_eq!(t.subtree_size(1), 1);
        assert_eq!(t.leaf_count(), 1);
    }

    #[test]
    fn rejects_malformed() {
        assert!(BpTree::from_bp_bits(&[]).is_err());
        assert!(BpTree::from_bp_bits(&[true, false, true, false]).is_err()); // forest
        assert!(BpTree::from_bp_bits(&[false, true]).is_err());
        assert!(BpTree::from_bp_bits(&[true, true, false]).is_err());
    }

    fn random_plain(n: usize, rng: &mut impl Rng) -> PlainTree {
        let mut t = PlainTree::new(n, 1);
        for v in 2..=n {
            let p = rng.gen_range(1..v);
            t.add_child(p, v);
        }
        t
    }

    // Relabels a plain tree so node ids equal preorder ranks.
    fn preorder_labeled(t: &PlainTree, map: &[Node]) -> PlainTree {
        let mut out = PlainTree::new(t.n, map[t.root]);
        for v in 1..=t.n {
            for &c in &t.children[v] {
                out.add_child(map[v], map[c]);
            }
        }
        out
    }

    struct Oracle {
        t: PlainTree,
        parent: Vec<usize>,
        depth: Vec<usize>,
        size: Vec<usize>,
        pre_leaves: Vec<usize>,
    }

    impl Oracle {
        fn new(t: PlainTree) -> Self {
            let parent = t.parents();
            let n = t.n;
            let mut depth = vec![0usize; n + 1];
            let mut size = vec![1usize; n + 1];
            // ids are preorder ranks, so parents precede children
            for v in 1..=n {
                if parent[v] != 0 {
                    depth[v] = depth[parent[v]] + 1;
                }
            }
            for v in (1..=n).rev() {
                if parent[v] != 0 {
                    size[parent[v]] += size[v];
                }
            }
            let pre_leaves = (1..=n).filter(|&v| t.children[v].is_empty()).collect();
            Oracle { t, parent, depth, size, pre_leaves }
        }

        fn lca(&self, mut u: usize, mut v: usize) -> usize {
            while u != v {
                if self.depth[u] >= self.depth[v] {
                    u = self.parent[u];
                } else {
                    v = self.parent[v];
                }
            }
            u
        }
    }

    #[test]
    fn navigation_matches_explicit_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..30 {
            let n = match trial % 3 {
                0 => rng.gen_range(1..30),
                1 => rng.gen_range(30..200),
                _ => rng.gen_range(200..1000),
            };
            let plain = random_plain(n, &mut rng);
            let (bp, map) = BpTree::from_plain(&plain);
            let oracle = Oracle::new(preorder_labeled(&plain, &map));
            assert_eq!(bp.node_count(), n);
            for v in 1..=n {
                let p = oracle.parent[v];
                assert_eq!(bp.parent(v), if p == 0 { None } else { Some(p) }, "parent({})", v);
                assert_eq!(bp.depth(v), oracle.depth[v], "depth({})", v);
                assert_eq!(bp.subtree_size(v), oracle.size[v], "size({})", v);
                assert_eq!(bp.degree(v), oracle.t.children[v].len(), "degree({})", v);
                assert_eq!(bp.is_leaf(v), oracle.t.children[v].is_empty());
                for (i, &c) in oracle.t.children[v].iter().enumerate() {
                    assert_eq!(bp.child(v, i + 1), c, "child({},{})", v, i + 1);
                    assert_eq!(bp.child_rank(c), i + 1, "child_rank({})", c);
                }
                let kids = &oracle.t.children[v];
                assert_eq!(bp.first_child(v), kids.first().copied());
                assert_eq!(bp.last_child(v), kids.last().copied());
                if p != 0 {
                    let sibs = &oracle.t.children[p];
                    let at = sibs.iter().position(|&x| x == v).unwrap();
                    assert_eq!(bp.next_sibling(v), sibs.get(at + 1).copied());
                    assert_eq!(bp.prev_sibling(v), if at == 0 { None } else { Some(sibs[at - 1]) });
                } else {
                    assert_eq!(bp.next_sibling(v), None);
                    assert_eq!(bp.prev_sibling(v), None);
                }
                let leaves_before = oracle.pre_leaves.iter().filter(|&&l| l < v).count();
                assert_eq!(bp.leaf_rank(v), leaves_before, "leaf_rank({})", v);
                let d = oracle.depth[v];
                if d > 0 {
                    let target = rng.gen_range(0..d);
                    let mut anc = v;
                    while oracle.depth[anc] != target {
                        anc = oracle.parent[anc];
                    }
                    assert_eq!(bp.level_ancestor(v, target), anc);
                }
                assert_eq!(bp.level_ancestor(v, d), v);
            }
            for (j, &l) in oracle.pre_leaves.iter().enumerate() {
                assert_eq!(bp.leaf_select(j + 1), l);
                assert_eq!(bp.leaf_rank(l), j);
            }
            assert_eq!(bp.leaf_count(), oracle.pre_leaves.len());
            for _ in 0..200 {
                let u = rng.gen_range(1..=n);
                let v = rng.gen_range(1..=n);
                assert_eq!(bp.lca(u, v), oracle.lca(u, v), "lca({},{})", u, v);
            }
        }
    }

    #[test]
    fn deep_path_tree() {
        // depth-heavy shape exercises directory climbing
        let n = 5000;
        let mut t = PlainTree::new(n, 1);
        for v in 2..=n {
            t.add_child(v - 1, v);
        }
        let (bp, _) = BpTree::from_plain(&t);
        assert_eq!(bp.depth(n), n - 1);
        assert_eq!(bp.parent(n), Some(n - 1));
        assert_eq!(bp.level_ancestor(n, 0), 1);
        assert_eq!(bp.subtree_size(1), n);
        assert_eq!(bp.lca(n, n / 2), n / 2);
    }

    #[test]
    fn wide_star_tree() {
        let n = 5000;
        let mut t = PlainTree::new(n, 1);
        for v in 2..=n {
            t.add_child(1, v);
        }
        let (bp, _) = BpTree::from_plain(&t);
        assert_eq!(bp.degree(1), n - 1);
        assert_eq!(bp.child(1, 1), 2);
        assert_eq!(bp.child(1, n - 1), n);
        assert_eq!(bp.child_rank(n), n - 1);
        assert_eq!(bp.lca(2, n), 1);
    }

    #[test]
    fn round_trip_parent_arrays() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.gen_range(1..500);
            let plain = random_plain(n, &mut rng);
            let (bp, map) = BpTree::from_plain(&plain);
            let relabeled = preorder_labeled(&plain, &map);
            assert_eq!(bp.to_plain(), relabeled);

            let mut buf = Vec::new();
            bp.serialize(&mut buf);
            let mut slice = buf.as_slice();
            let bp2 = BpTree::deserialize(&mut slice).unwrap();
            assert_eq!(bp2.to_plain(), relabeled);
        }
    }

    #[test]
    fn child_of_parent_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let plain = random_plain(800, &mut rng);
        let (bp, _) = BpTree::from_plain(&plain);
        for v in 2..=800 {
            let p = bp.parent(v).unwrap();
            assert_eq!(bp.child(p, bp.child_rank(v)), v);
        }
    }
}
