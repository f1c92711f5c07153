//! Tree-covering engine: one-level decomposition into bounded subtrees,
//! two-level mini/micro covering with dummy-node over-trees, and an interned
//! table of canonical micro shapes with memoized per-shape payloads.
//!
//! The decomposition is a bottom-up greedy packing. Components are closed at
//! the node under scrutiny, so component roots may be shared; every node is a
//! *member* of exactly one component, and each component contains at most one
//! node whose subtree continues in other components (the connector, target of
//! the non-root boundary edge). This keeps each component's member set equal
//! to at most two consecutive preorder runs, which the inorder interval
//! machinery of the graph layers relies on.

use std::collections::HashMap;

use crate::bits::{read_u64, SparseDict};
use crate::error::{Error, Result};
use crate::ordtree::{BpTree, Node, PlainTree};

/// Tree-covering size parameters.
#[derive(Clone, Copy, Debug)]
pub struct CoverConfig {
    /// Mini-tree size parameter L.
    pub mini: usize,
    /// Micro-tree size parameter ell.
    pub micro: usize,
}

/// Default hard ceiling on the micro-tree parameter; keeps canonical shape
/// keys machine-word-sized and the shape table small.
pub const DEFAULT_MICRO_CAP: usize = 8;

impl CoverConfig {
    /// Derives parameters for a tree of `n` nodes: `L = lg^2 n` and
    /// `ell = max(1, min(floor(lg n / (2 alpha)), cap))` with `lg = ceil(log2)`.
    pub fn derive(n: usize, alpha: f64, micro_cap: usize) -> Self {
        let lg = (usize::BITS - n.max(2).leading_zeros()) as usize;
        let mini = (lg * lg).max(1);
        let micro = ((lg as f64 / (2.0 * alpha)).floor() as usize).clamp(1, micro_cap.max(1));
        CoverConfig { mini, micro: micro.min(mini) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.micro < 1 || self.mini < self.micro {
            return Err(Error::Invalid("cover parameters must satisfy 1 <= ell <= L"));
        }
        Ok(())
    }
}

/// One component of a tree decomposition.
#[derive(Clone, Debug)]
pub struct Subtree {
    /// Structural root; shared with other components unless `root_is_member`.
    pub root: Node,
    /// Whether the root's unique membership lies in this component.
    pub root_is_member: bool,
    /// Member nodes in preorder, including the root when `root_is_member`.
    pub members: Vec<Node>,
    /// Node whose subtree continues in other components; target of the
    /// non-root boundary edge (may itself be a member when the continuation
    /// was injected from an enclosing decomposition level).
    pub connector: Option<Node>,
}

impl Subtree {
    /// Structural node count: members plus shared root plus connector.
    pub fn structural_size(&self) -> usize {
        let mut extra = 0;
        if !self.root_is_member {
            extra += 1;
        }
        if let Some(c) = self.connector {
            if c != self.root && self.members.binary_search(&c).is_err() {
                extra += 1;
            }
        }
        self.members.len() + extra
    }

    /// Structural node list in preorder.
    pub fn structural_nodes(&self) -> Vec<Node> {
        let mut nodes = self.members.clone();
        if !self.root_is_member {
            nodes.push(self.root);
        }
        if let Some(c) = self.connector {
            nodes.push(c);
        }
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }
}

struct Temp {
    root: Node,
    members: Vec<Node>,
    root_is_member: bool,
    conn: Option<Node>,
}

impl Temp {
    // The hole this temp creates inside an absorbing component.
    fn conn_node(&self) -> Option<Node> {
        if self.root_is_member {
            self.conn
        } else {
            Some(self.root)
        }
    }
}

struct Frame {
    node: Node,
    next_child: usize,
    pending: Vec<Node>,
    conn: Option<Node>,
    closed_any: bool,
}

/// Decomposes `t` into components of at most `2L` member nodes, `O(n/L)`
/// components, at most one non-root boundary edge each.
pub fn decompose(t: &BpTree, l: usize) -> Vec<Subtree> {
    decompose_plain(&t.to_plain(), l, &[])
}

/// Like [`decompose`] over an explicit tree. `phantom` nodes start with their
/// hole budget spent, reserving their component's connector slot for a hole
/// injected by an enclosing decomposition level.
pub fn decompose_plain(t: &PlainTree, l: usize, phantom: &[Node]) -> Vec<Subtree> {
    assert!(l >= 1);
    let mut out: Vec<Subtree> = Vec::new();
    let new_frame = |v: Node| Frame {
        node: v,
        next_child: 0,
        pending: Vec::new(),
        conn: if phantom.contains(&v) { Some(v) } else { None },
        closed_any: false,
    };

    let mut stack: Vec<Frame> = vec![new_frame(t.root)];
    let mut returned: Option<Temp> = None;
    while let Some(frame) = stack.last_mut() {
        if let Some(tmp) = returned.take() {
            fold_temp(frame, tmp, l, &mut out);
        }
        let v = frame.node;
        if frame.next_child < t.children[v].len() {
            let c = t.children[v][frame.next_child];
            frame.next_child += 1;
            stack.push(new_frame(c));
            continue;
        }
        let frame = stack.pop().unwrap();
        let root_is_member = !frame.closed_any;
        let mut members = frame.pending;
        if root_is_member {
            members.insert(0, v);
        }
        debug_assert!(!frame.closed_any || frame.conn.is_none());
        returned = Some(Temp { root: v, members, root_is_member, conn: frame.conn });
    }

    let tmp = returned.unwrap();
    if !tmp.members.is_empty() {
        let mut members = tmp.members;
        members.sort_unstable();
        out.push(Subtree {
            root: tmp.root,
            root_is_member: tmp.root_is_member,
            members,
            connector: tmp.conn,
        });
    }

    out.sort_by_key(|s| (s.members.first().copied().unwrap_or(s.root), s.root));
    out
}

fn fold_temp(frame: &mut Frame, tmp: Temp, l: usize, out: &mut Vec<Subtree>) {
    let t_conn = tmp.conn_node();
    let cur_holes = usize::from(frame.conn.is_some() || frame.closed_any);
    if frame.pending.len() + tmp.members.len() < l && cur_holes + usize::from(t_conn.is_some()) <= 1
    {
        frame.pending.extend(tmp.members);
        frame.conn = frame.conn.or(t_conn);
        return;
    }
    if frame.conn.is_none() || t_conn.is_none() {
        close_bunch(frame, Some((tmp.members, t_conn)), out);
        return;
    }
    // Two connectors would collide: close the accumulator alone, then retry.
    close_bunch(frame, None, out);
    if frame.pending.len() + tmp.members.len() < l && t_conn.is_none() {
        frame.pending.extend(tmp.members);
    } else {
        close_bunch(frame, Some((tmp.members, t_conn)), out);
    }
}

fn close_bunch(frame: &mut Frame, extra: Option<(Vec<Node>, Option<Node>)>, out: &mut Vec<Subtree>) {
    let mut members = std::mem::take(&mut frame.pending);
    let mut conn = frame.conn.take();
    if let Some((extra_members, t_conn)) = extra {
        members.extend(extra_members);
        conn = conn.or(t_conn);
    }
    let root_is_member = !frame.closed_any;
    frame.closed_any = true;
    if root_is_member {
        members.insert(0, frame.node);
    }
    if members.is_empty() {
        return;
    }
    members.sort_unstable();
    out.push(Subtree { root: frame.node, root_is_member, members, connector: conn });
}

/// Interned micro-shape identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShapeId(pub u32);

/// Canonical key -> id table with one memoized payload per shape.
#[derive(Clone, Debug, Default)]
pub struct ShapeTable<P> {
    ids: HashMap<Vec<u8>, ShapeId>,
    keys: Vec<Vec<u8>>,
    payloads: Vec<P>,
}

impl<P> ShapeTable<P> {
    pub fn new() -> Self {
        ShapeTable { ids: HashMap::new(), keys: Vec::new(), payloads: Vec::new() }
    }

    /// Interns `key`, building the payload on first sight. Equal keys yield
    /// equal ids and share one payload.
    pub fn intern_with(&mut self, key: &[u8], build: impl FnOnce() -> P) -> ShapeId {
        if let Some(&id) = self.ids.get(key) {
            return id;
        }
        let id = ShapeId(self.keys.len() as u32);
        self.ids.insert(key.to_vec(), id);
        self.keys.push(key.to_vec());
        self.payloads.push(build());
        id
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn payload(&self, id: ShapeId) -> &P {
        &self.payloads[id.0 as usize]
    }

    pub fn key(&self, id: ShapeId) -> &[u8] {
        &self.keys[id.0 as usize]
    }

    pub fn bit_size(&self) -> usize {
        self.keys.iter().map(|k| 8 * k.len() + 32).sum::<usize>()
    }

    pub fn serialize(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.keys.len() as u64).to_le_bytes());
        for k in &self.keys {
            out.extend_from_slice(&(k.len() as u64).to_le_bytes());
            out.extend_from_slice(k);
        }
    }

    /// Restores keys and ids; payloads are rebuilt from keys via `build`.
    pub fn deserialize(input: &mut &[u8], mut build: impl FnMut(&[u8]) -> P) -> Result<Self> {
        let n = read_u64(input)? as usize;
        let mut table = ShapeTable::new();
        for _ in 0..n {
            let len = read_u64(input)? as usize;
            if input.len() < len {
                return Err(Error::Corrupt("shape key truncated"));
            }
            let (key, rest) = input.split_at(len);
            *input = rest;
            let id = ShapeId(table.keys.len() as u32);
            table.ids.insert(key.to_vec(), id);
            table.keys.push(key.to_vec());
            table.payloads.push(build(key));
        }
        Ok(table)
    }
}

/// A mini-tree of the two-level cover.
#[derive(Clone, Debug)]
pub struct MiniTree {
    pub root: Node,
    pub root_is_member: bool,
    pub members: Vec<Node>,
    pub connector: Option<Node>,
    /// Indices into [`TwoLevelCover::micros`].
    pub micros: std::ops::Range<usize>,
    /// Structural local tree: members plus shared root plus connector, ids
    /// assigned by global preorder (1-based).
    pub local: PlainTree,
    /// Local id -> global preorder.
    pub local_to_global: Vec<Node>,
}

impl MiniTree {
    pub fn local_id(&self, v: Node) -> usize {
        let i = self.local_to_global.partition_point(|&g| g < v);
        assert!(i < self.local_to_global.len() && self.local_to_global[i] == v);
        i + 1
    }
}

/// A micro-tree of the two-level cover; node references are mini-local ids.
#[derive(Clone, Debug)]
pub struct MicroTree {
    pub mini: usize,
    pub root_local: usize,
    pub root_is_member: bool,
    pub members_local: Vec<usize>,
    pub connector_local: Option<usize>,
    /// Global preorder runs of member nodes: at most two (start, len) pairs.
    pub runs: Vec<(u32, u32)>,
    /// Class-assigned shape id (u32::MAX until assigned).
    pub shape: ShapeId,
}

impl MicroTree {
    /// Structural node list (mini-local ids, sorted).
    pub fn structural_local(&self) -> Vec<usize> {
        let mut nodes = self.members_local.clone();
        nodes.push(self.root_local);
        if let Some(c) = self.connector_local {
            nodes.push(c);
        }
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }
}

/// Two-level mini/micro tree cover.
#[derive(Clone, Debug)]
pub struct TwoLevelCover {
    pub config: CoverConfig,
    pub minis: Vec<MiniTree>,
    pub micros: Vec<MicroTree>,
    /// Tree over mini-trees with dummy nodes for shared roots. Node ids
    /// `1..=minis.len()` are minis, higher ids are dummies.
    pub tree_over_minis: PlainTree,
    /// Per-mini tree over its micro-trees, same id convention.
    pub mini_over_micros: Vec<PlainTree>,
    // run start BP open positions; satellite = run table index
    run_dict: SparseDict,
    // (micro, run_start_pre, len, member_offset)
    run_table: Vec<(u32, u32, u32, u32)>,
}

impl TwoLevelCover {
    pub fn build(t: &BpTree, config: CoverConfig) -> Result<Self> {
        config.validate()?;
        let plain = t.to_plain();
        Self::build_from_plain(t, &plain, config)
    }

    pub fn build_from_plain(t: &BpTree, plain: &PlainTree, config: CoverConfig) -> Result<Self> {
        config.validate()?;
        let minis_raw = decompose_plain(plain, config.mini, &[]);
        let mut minis: Vec<MiniTree> = Vec::with_capacity(minis_raw.len());
        let mut micros: Vec<MicroTree> = Vec::new();
        for sub in &minis_raw {
            let (local, local_to_global) = local_tree(plain, sub);
            // structural-only local nodes must not become micro members
            let mut stripped: Vec<usize> = Vec::new();
            if !sub.root_is_member {
                stripped.push(1);
            }
            let mut phantom: Vec<usize> = Vec::new();
            if let Some(c) = sub.connector {
                let lc = local_index(&local_to_global, c);
                phantom.push(lc);
                if sub.members.binary_search(&c).is_err() {
                    stripped.push(lc);
                }
            }
            let micro_subs = decompose_plain(&local, config.micro, &phantom);
            let start = micros.len();
            for ms in &micro_subs {
                let mut members_local = ms.members.clone();
                let mut root_is_member = ms.root_is_member;
                members_local.retain(|m| !stripped.contains(m));
                if stripped.contains(&ms.root) {
                    root_is_member = false;
                }
                let members_global: Vec<Node> =
                    members_local.iter().map(|&m| local_to_global[m - 1 + 1 - 1]).collect();
                micros.push(MicroTree {
                    mini: minis.len(),
                    root_local: ms.root,
                    root_is_member,
                    members_local,
                    connector_local: ms.connector,
                    runs: preorder_runs(&members_global),
                    shape: ShapeId(u32::MAX),
                });
            }
            minis.push(MiniTree {
                root: sub.root,
                root_is_member: sub.root_is_member,
                members: sub.members.clone(),
                connector: sub.connector,
                micros: start..micros.len(),
                local,
                local_to_global,
            });
        }

        let mut entries: Vec<(u64, (u32, u32, u32, u32))> = Vec::new();
        for (mi, micro) in micros.iter().enumerate() {
            let mut off = 0u32;
            for &(start, len) in &micro.runs {
                entries.push((t.open_pos(start as Node) as u64, (mi as u32, start, len, off)));
                off += len;
            }
        }
        entries.sort_unstable_by_key(|e| e.0);
        let positions: Vec<u64> = entries.iter().map(|e| e.0).collect();
        let sats: Vec<u64> = (0..entries.len() as u64).collect();
        let run_dict = SparseDict::build(t.bp().len().max(1) as u64, &positions, &sats)?;
        let run_table: Vec<(u32, u32, u32, u32)> = entries.iter().map(|e| e.1).collect();

        let parents = plain.parents();
        // structural non-root home: the component where v's parent edge lives
        let mini_home = |v: Node| -> Option<usize> {
            minis
                .iter()
                .position(|m| {
                    (m.members.binary_search(&v).is_ok() && m.root != v)
                        || (m.connector == Some(v) && m.root != v)
                })
        };
        let tree_over_minis = over_tree(
            &minis.iter().map(|m| m.root).collect::<Vec<_>>(),
            &mini_home,
            &parents,
        );
        let mini_over_micros: Vec<PlainTree> = minis
            .iter()
            .map(|mini| {
                let local_parents = mini.local.parents();
                let micro_home = |v: usize| -> Option<usize> {
                    mini.micros.clone().position(|i| {
                        let m = &micros[i];
                        (m.members_local.binary_search(&v).is_ok() && m.root_local != v)
                            || (m.connector_local == Some(v) && m.root_local != v)
                    })
                };
                over_tree(
                    &mini.micros.clone().map(|i| micros[i].root_local).collect::<Vec<_>>(),
                    &micro_home,
                    &local_parents,
                )
            })
            .collect();

        Ok(TwoLevelCover {
            config,
            minis,
            micros,
            tree_over_minis,
            mini_over_micros,
            run_dict,
            run_table,
        })
    }

    /// Finds the unique micro containing `v` as a member. Returns
    /// `(mini index, micro index, offset among the micro's members)`.
    pub fn locate(&self, t: &BpTree, v: Node) -> (usize, usize, usize) {
        let pos = t.open_pos(v) as u64;
        let r = self.run_dict.rank(pos + 1);
        assert!(r >= 1, "node {} outside every run", v);
        let (micro, start, len, off) = self.run_table[self.run_dict.satellite(r) as usize];
        debug_assert!(v as u32 >= start && (v as u32) < start + len, "run mismatch for {}", v);
        let _ = len;
        (self.micros[micro as usize].mini, micro as usize, (off + v as u32 - start) as usize)
    }

    /// Member micro of `v`, without offsets.
    pub fn micro_of(&self, t: &BpTree, v: Node) -> usize {
        self.locate(t, v).1
    }

    pub fn member_count(&self) -> usize {
        self.micros.iter().map(|m| m.members_local.len()).sum()
    }

    /// Approximate serialized size of the cover structures.
    pub fn bit_size(&self) -> usize {
        self.run_dict.bit_size()
            + self.run_table.len() * 128
            + self.micros.len() * 4 * 32
            + self.minis.len() * 6 * 32
            + (self.tree_over_minis.n + self.mini_over_micros.iter().map(|t| t.n).sum::<usize>())
                * 32
    }
}

fn local_index(local_to_global: &[Node], v: Node) -> usize {
    let i = local_to_global.partition_point(|&g| g < v);
    assert!(i < local_to_global.len() && local_to_global[i] == v, "node not in local map");
    i + 1
}

// Structural local tree of a component: members + shared root + connector,
// ids assigned by global preorder (the component root is always local id 1).
fn local_tree(plain: &PlainTree, sub: &Subtree) -> (PlainTree, Vec<Node>) {
    let nodes = sub.structural_nodes();
    debug_assert_eq!(nodes[0], sub.root);
    let mut t = PlainTree::new(nodes.len(), 1);
    for (li, &g) in nodes.iter().enumerate() {
        for &c in &plain.children[g] {
            if nodes.binary_search(&c).is_ok() {
                t.add_child(li + 1, local_index(&nodes, c));
            }
        }
    }
    (t, nodes)
}

// Splits a sorted member list into maximal consecutive preorder runs.
fn preorder_runs(members: &[Node]) -> Vec<(u32, u32)> {
    let mut runs: Vec<(u32, u32)> = Vec::new();
    for &m in members {
        match runs.last_mut() {
            Some((start, len)) if *start + *len == m as u32 => *len += 1,
            _ => runs.push((m as u32, 1)),
        }
    }
    runs
}

// Builds a tree over components. Components rooted at the same node hang
// under a fresh dummy; each component (or dummy) is parented by the component
// owning the membership of the nearest ancestor that has one outside the
// group.
fn over_tree(
    roots: &[Node],
    member_of: &impl Fn(Node) -> Option<usize>,
    parents: &[usize],
) -> PlainTree {
    let k = roots.len();
    let mut groups: HashMap<Node, Vec<usize>> = HashMap::new();
    let mut order: Vec<Node> = Vec::new();
    for (i, &r) in roots.iter().enumerate() {
        let e = groups.entry(r).or_default();
        if e.is_empty() {
            order.push(r);
        }
        e.push(i);
    }
    let dummies: Vec<(Node, Vec<usize>)> = order
        .iter()
        .filter(|r| groups[r].len() >= 2)
        .map(|&r| (r, groups[&r].clone()))
        .collect();
    let n = k + dummies.len();
    let mut parent_of: Vec<usize> = vec![0; n + 1];

    // nearest ancestor of `r` whose member component exists outside `grp`
    let outside_owner = |r: Node, grp: &[usize]| -> Option<usize> {
        let mut p = parents[r];
        while p != 0 {
            if let Some(o) = member_of(p) {
                if !grp.contains(&o) {
                    return Some(o);
                }
            }
            p = parents[p];
        }
        None
    };

    for (di, (r, comps)) in dummies.iter().enumerate() {
        let dummy_id = k + di + 1;
        for &c in comps {
            parent_of[c + 1] = dummy_id;
        }
        if let Some(o) = outside_owner(*r, comps) {
            parent_of[dummy_id] = o + 1;
        }
    }
    for (i, &r) in roots.iter().enumerate() {
        if groups[&r].len() >= 2 {
            continue;
        }
        let grp = [i];
        let owner = match member_of(r) {
            Some(o) if o != i => Some(o),
            _ => outside_owner(r, &grp),
        };
        if let Some(o) = owner {
            parent_of[i + 1] = o + 1;
        }
    }
    PlainTree::from_parents(&parent_of).expect("over-tree is a tree")
}

/// Summary statistics from [`check_invariants`].
#[derive(Clone, Copy, Debug, Default)]
pub struct CoverStats {
    pub component_count: usize,
    pub max_members: usize,
    pub max_structural: usize,
    pub max_runs: usize,
}

/// Asserts the decomposition invariants: member-size bound `2L` (exact),
/// node partition, connectivity of structural node sets, at most one
/// non-root boundary edge, and at most two preorder runs per component.
/// Returns measured statistics; the `O(n/L)` count bound is asserted as
/// `count <= 8n/L + 1`.
pub fn check_invariants(plain: &PlainTree, subs: &[Subtree], l: usize) -> CoverStats {
    let n = plain.n;
    let parents = plain.parents();
    // preorder ranks for the run check (input ids may be arbitrary)
    let mut pre = vec![0usize; n + 1];
    {
        let mut next = 0usize;
        let mut stack = vec![plain.root];
        while let Some(v) = stack.pop() {
            next += 1;
            pre[v] = next;
            for &c in plain.children[v].iter().rev() {
                stack.push(c);
            }
        }
    }
    let mut seen = vec![false; n + 1];
    let mut stats = CoverStats { component_count: subs.len(), ..Default::default() };
    for sub in subs {
        assert!(sub.members.len() <= 2 * l, "component exceeds 2L members");
        stats.max_members = stats.max_members.max(sub.members.len());
        stats.max_structural = stats.max_structural.max(sub.structural_size());
        for &m in &sub.members {
            assert!(!seen[m], "node {} in two components", m);
            seen[m] = true;
        }
        // structural connectivity: every structural node except the root has
        // its parent in the structural set
        let nodes = sub.structural_nodes();
        for &x in &nodes {
            if x != sub.root {
                assert!(
                    nodes.binary_search(&parents[x]).is_ok(),
                    "structural set disconnected at {}",
                    x
                );
            }
        }
        // at most one non-root boundary edge: member -> non-member child
        let mut boundary = 0;
        for &x in &sub.members {
            if x == sub.root {
                continue;
            }
            for &c in &plain.children[x] {
                if sub.members.binary_search(&c).is_err() {
                    boundary += 1;
                }
            }
        }
        assert!(boundary <= 1, "component has {} non-root boundary edges", boundary);
        if boundary == 1 {
            assert!(sub.connector.is_some(), "boundary edge without connector record");
        }
        let mut member_pre: Vec<Node> = sub.members.iter().map(|&m| pre[m]).collect();
        member_pre.sort_unstable();
        let runs = preorder_runs(&member_pre);
        assert!(runs.len() <= 2, "component members form {} preorder runs", runs.len());
        stats.max_runs = stats.max_runs.max(runs.len());
    }
    assert!(seen[1..].iter().all(|&s| s), "some node belongs to no component");
    assert!(
        subs.len() <= 8 * n / l + 1,
        "component count {} exceeds 8n/L+1 = {}",
        subs.len(),
        8 * n / l + 1
    );
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn path(n: usize) -> PlainTree {
        let mut t = PlainTree::new(n, 1);
        for v in 2..=n {
            t.add_child(v - 1, v);
        }
        t
    }

    fn star(leaves: usize) -> PlainTree {
        let mut t = PlainTree::new(leaves + 1, 1);
        for v in 2..=leaves + 1 {
            t.add_child(1, v);
        }
        t
    }

    fn random_tree(n: usize, rng: &mut impl Rng) -> PlainTree {
        let mut t = PlainTree::new(n, 1);
        for v in 2..=n {
            // bias toward recent nodes for path-like stretches
            let lo = if rng.gen_bool(0.5) && v > 8 { v - 8 } else { 1 };
            let p = rng.gen_range(lo..v);
            t.add_child(p, v);
        }
        t
    }

    #[test]
    fn path_decomposition() {
        let t = path(16);
        let subs = decompose_plain(&t, 4, &[]);
        let stats = check_invariants(&t, &subs, 4);
        assert!(stats.max_members <= 8);
        assert!(subs.len() <= 16);
    }

    #[test]
    fn single_node_any_l() {
        let t = path(1);
        for l in [1, 2, 10] {
            let subs = decompose_plain(&t, l, &[]);
            assert_eq!(subs.len(), 1);
            assert_eq!(subs[0].members, vec![1]);
            check_invariants(&t, &subs, l);
        }
    }

    #[test]
    fn star_shares_root() {
        let t = star(9);
        let subs = decompose_plain(&t, 2, &[]);
        check_invariants(&t, &subs, 2);
        assert!(subs.iter().all(|s| s.members.len() <= 4));
        assert!(subs.len() <= 4 * 9 / 2);
        // the root must be shared: more than one component rooted at node 1
        assert!(subs.iter().filter(|s| s.root == 1).count() >= 2);
        assert_eq!(subs.iter().filter(|s| s.root == 1 && s.root_is_member).count(), 1);
    }

    #[test]
    fn random_trees_hold_theorem_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let n = rng.gen_range(1..2000);
            let t = random_tree(n, &mut rng);
            for l in [1usize, 4, 16, 64] {
                let subs = decompose_plain(&t, l, &[]);
                check_invariants(&t, &subs, l);
            }
        }
    }

    #[test]
    fn phantom_reserves_connector_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let n = rng.gen_range(2..500);
            let t = random_tree(n, &mut rng);
            let ph = rng.gen_range(1..=n);
            let subs = decompose_plain(&t, 4, &[ph]);
            check_invariants(&t, &subs, 4);
            // the component owning the phantom node must use its connector on it
            let owner = subs
                .iter()
                .find(|s| s.members.binary_search(&ph).is_ok())
                .expect("phantom node is a member somewhere");
            assert_eq!(owner.connector, Some(ph));
        }
    }

    #[test]
    fn two_level_partitions_nodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..15 {
            let n = rng.gen_range(1..3000);
            let plain = random_tree(n, &mut rng);
            let (bp, _) = BpTree::from_plain(&plain);
            let relabeled = bp.to_plain();
            let cover =
                TwoLevelCover::build(&bp, CoverConfig { mini: 64, micro: 8 }).unwrap();
            assert_eq!(cover.member_count(), n, "micro members partition nodes");
            let mut seen = vec![false; n + 1];
            for (mi, micro) in cover.micros.iter().enumerate() {
                let mini = &cover.minis[micro.mini];
                assert!(micro.runs.len() <= 2, "micro has {} runs", micro.runs.len());
                for &ml in &micro.members_local {
                    let g = mini.local_to_global[ml - 1];
                    assert!(!seen[g]);
                    seen[g] = true;
                    let (mini_idx, micro_idx, _off) = cover.locate(&bp, g);
                    assert_eq!(micro_idx, mi);
                    assert_eq!(mini_idx, micro.mini);
                }
            }
            assert!(seen[1..].iter().all(|&s| s));
            let _ = relabeled;
        }
    }

    #[test]
    fn two_level_mini_and_micro_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let plain = random_tree(10_000, &mut rng);
        let (bp, _) = BpTree::from_plain(&plain);
        let relabeled = bp.to_plain();
        let cfg = CoverConfig { mini: 64, micro: 8 };
        let cover = TwoLevelCover::build(&bp, cfg).unwrap();
        let minis = decompose_plain(&relabeled, cfg.mini, &[]);
        check_invariants(&relabeled, &minis, cfg.mini);
        for mini in &cover.minis {
            assert!(mini.members.len() <= 2 * cfg.mini);
            for i in mini.micros.clone() {
                assert!(cover.micros[i].members_local.len() <= 2 * cfg.micro);
            }
        }
    }

    #[test]
    fn over_tree_dummies_have_two_children() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let n = rng.gen_range(50..2000);
            let plain = random_tree(n, &mut rng);
            let (bp, _) = BpTree::from_plain(&plain);
            let cover = TwoLevelCover::build(&bp, CoverConfig { mini: 16, micro: 4 }).unwrap();
            let k = cover.minis.len();
            let over = &cover.tree_over_minis;
            for d in k + 1..=over.n {
                assert!(over.children[d].len() >= 2, "dummy with < 2 children");
            }
            for (mi, over) in cover.mini_over_micros.iter().enumerate() {
                let kk = cover.minis[mi].micros.len();
                for d in kk + 1..=over.n {
                    assert!(over.children[d].len() >= 2);
                }
            }
        }
    }

    #[test]
    fn complete_binary_tree_micro_partition() {
        let n = 1023;
        let mut t = PlainTree::new(n, 1);
        for v in 2..=n {
            t.add_child(v / 2, v);
        }
        let (bp, _) = BpTree::from_plain(&t);
        let cover = TwoLevelCover::build(&bp, CoverConfig { mini: 100, micro: 8 }).unwrap();
        assert_eq!(cover.member_count(), n);
    }

    #[test]
    fn interning_is_idempotent() {
        let mut table: ShapeTable<u32> = ShapeTable::new();
        let a = table.intern_with(b"alpha", || 1);
        let b = table.intern_with(b"beta", || 2);
        let a2 = table.intern_with(b"alpha", || 99);
        assert_eq!(a, a2);
        assert_ne!(a, b);
        assert_eq!(*table.payload(a), 1, "payload memoized on first intern");
        assert_eq!(table.len(), 2);
    }

    #[test]
    fn intern_count_matches_distinct_keys() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut table: ShapeTable<()> = ShapeTable::new();
        let mut reference = std::collections::HashSet::new();
        for _ in 0..1000 {
            let key: Vec<u8> = (0..rng.gen_range(1..6)).map(|_| rng.gen_range(0..4u8)).collect();
            reference.insert(key.clone());
            table.intern_with(&key, || ());
        }
        assert_eq!(table.len(), reference.len());
    }

    #[test]
    fn shape_table_round_trip() {
        let mut table: ShapeTable<usize> = ShapeTable::new();
        table.intern_with(b"k1", || 2);
        table.intern_with(b"k2longer", || 8);
        let mut buf = Vec::new();
        table.serialize(&mut buf);
        let mut slice = buf.as_slice();
        let restored = ShapeTable::deserialize(&mut slice, |k| k.len()).unwrap();
        assert_eq!(restored.len(), 2);
        assert_eq!(*restored.payload(ShapeId(1)), 8);
    }
}
