//! Persistent dynamic strings with canonical, content-determined tree shape.
//!
//! A string is stored as a tree whose shape is a pure function of the string
//! content and the epoch's hash seed. Levels alternate: odd levels group
//! maximal runs of equal-fingerprint children into duplicate nodes, even
//! levels group maximal strictly-increasing-fingerprint runs into increasing
//! nodes. Construction stops at the first level holding exactly one node.
//!
//! Because the grouping rule at every level is pairwise-local (a boundary
//! between two adjacent nodes depends only on their two fingerprints), two
//! trees over the same content are identical node-for-node, and editing a
//! string only rebuilds the seam between preserved left and right context.
//! That is what makes equality O(1) and split/concatenate O(log n): the
//! untouched subtrees are shared, and one rebuild pass regroups the few
//! dissolved nodes per level along the seam.
//!
//! Nodes are immutable and reference-counted; a [`StringHandle`] pins one
//! version forever, so every operation is persistent by construction.

use std::collections::VecDeque;
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::DdtError;
use crate::fingerprint::{
    hash_bytes, serialize_duplicate_into, serialize_increasing_into, serialize_leaf_into,
    Fingerprint, FingerprintTable, HashSeed,
};

pub type Symbol = u8;

/// Height caps for tiny collections are floored at this leaf count so that
/// short strings cannot trip the cap by unlucky coin flips; 256 leaves give
/// a cap of 40 levels, far above any plausible honest height.
const MIN_CAP_LEAVES: u64 = 256;

const ALPHA: u32 = 5;

static NEXT_EPOCH: AtomicU64 = AtomicU64::new(1);

// ===========================================================================
// Nodes
// ===========================================================================

#[derive(Debug)]
pub enum NodeKind {
    Leaf(Symbol),
    /// A maximal run of equal-fingerprint children, stored as the run length
    /// plus one shared child: equal fingerprints mean identical subtrees, so
    /// one reference represents them all.
    Duplicate {
        multiplicity: u64,
        child: Rc<Node>,
    },
    /// A maximal strictly-increasing-fingerprint run of children.
    Increasing {
        children: Box<[Rc<Node>]>,
    },
}

#[derive(Debug)]
pub struct Node {
    fp: Fingerprint,
    level: u32,
    leaf_count: u64,
    kind: NodeKind,
}

impl Node {
    pub fn fingerprint(&self) -> Fingerprint {
        self.fp
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn leaf_count(&self) -> u64 {
        self.leaf_count
    }

    pub fn kind(&self) -> &NodeKind {
        &self.kind
    }
}

// ===========================================================================
// Handles
// ===========================================================================

/// Immutable reference to one version of one string. Cloning is free and the
/// referenced version stays readable regardless of later operations.
#[derive(Clone)]
pub struct StringHandle {
    root: Rc<Node>,
    epoch: u64,
}

impl StringHandle {
    pub fn len(&self) -> u64 {
        self.root.leaf_count
    }

    pub fn is_empty(&self) -> bool {
        false // strings are nonempty by construction
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.root.fp
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Height of this version's tree (root level; a lone leaf has height 0).
    pub fn height(&self) -> u32 {
        self.root.level
    }

    pub fn get(&self, index: u64) -> Result<Symbol, DdtError> {
        if index >= self.len() {
            return Err(DdtError::IndexOutOfRange {
                index,
                len: self.len(),
            });
        }
        let mut node = &self.root;
        let mut i = index;
        loop {
            match &node.kind {
                NodeKind::Leaf(sym) => return Ok(*sym),
                NodeKind::Duplicate { child, .. } => {
                    i %= child.leaf_count;
                    node = child;
                }
                NodeKind::Increasing { children } => {
                    for c in children.iter() {
                        if i < c.leaf_count {
                            node = c;
                            break;
                        }
                        i -= c.leaf_count;
                    }
                }
            }
        }
    }

    pub fn to_symbols(&self) -> Vec<Symbol> {
        fn walk(node: &Node, out: &mut Vec<Symbol>) {
            match &node.kind {
                NodeKind::Leaf(sym) => out.push(*sym),
                NodeKind::Duplicate {
                    multiplicity,
                    child,
                } => {
                    let start = out.len();
                    walk(child, out);
                    for _ in 1..*multiplicity {
                        out.extend_from_within(start..start + child.leaf_count as usize);
                    }
                }
                NodeKind::Increasing { children } => {
                    for c in children.iter() {
                        walk(c, out);
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(self.len() as usize);
        walk(&self.root, &mut out);
        out
    }

    /// Serialization of the tree shape alone: kinds, levels, multiplicities,
    /// child counts. No fingerprints and no symbols, so it captures exactly
    /// the structural side of canonicality.
    pub fn shape_digest(&self) -> Vec<u8> {
        fn walk(node: &Node, out: &mut Vec<u8>) {
            out.extend_from_slice(&node.level.to_le_bytes());
            match &node.kind {
                NodeKind::Leaf(_) => out.push(0),
                NodeKind::Duplicate {
                    multiplicity,
                    child,
                } => {
                    out.push(1);
                    out.extend_from_slice(&multiplicity.to_le_bytes());
                    walk(child, out);
                }
                NodeKind::Increasing { children } => {
                    out.push(2);
                    out.extend_from_slice(&(children.len() as u64).to_le_bytes());
                    for c in children.iter() {
                        walk(c, out);
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }
}

/// O(1) string equality: root fingerprint comparison, sound because the
/// epoch's fingerprint table rejects colliding registrations.
pub fn equal(a: &StringHandle, b: &StringHandle) -> Result<bool, DdtError> {
    check_epochs(a, b)?;
    Ok(a.root.fp == b.root.fp)
}

/// Longest common prefix length via synchronized descent.
///
/// Both trees are viewed as run-queues of (node, repeat) pairs covering the
/// unmatched suffixes. Equal front fingerprints consume whole subtrees at
/// once; differing fronts expand the deeper side (both when level-tied) until
/// two differing leaves meet or one queue empties.
pub fn lcp(a: &StringHandle, b: &StringHandle) -> Result<u64, DdtError> {
    check_epochs(a, b)?;
    let mut qa: VecDeque<(Rc<Node>, u64)> = VecDeque::new();
    let mut qb: VecDeque<(Rc<Node>, u64)> = VecDeque::new();
    qa.push_back((self_rc(&a.root), 1));
    qb.push_back((self_rc(&b.root), 1));
    let mut acc = 0u64;
    loop {
        let (fa, ca) = match qa.front() {
            Some(f) => (f.0.clone(), f.1),
            None => return Ok(acc),
        };
        let (fb, cb) = match qb.front() {
            Some(f) => (f.0.clone(), f.1),
            None => return Ok(acc),
        };
        if fa.fp == fb.fp {
            let take = ca.min(cb);
            acc += take * fa.leaf_count;
            consume(&mut qa, take);
            consume(&mut qb, take);
            continue;
        }
        if fa.level == 0 && fb.level == 0 {
            return Ok(acc); // differing symbols
        }
        if fa.level >= fb.level {
            expand_front(&mut qa);
        }
        if fb.level >= fa.level {
            expand_front(&mut qb);
        }
    }
}

fn self_rc(root: &Rc<Node>) -> Rc<Node> {
    Rc::clone(root)
}

fn consume(q: &mut VecDeque<(Rc<Node>, u64)>, take: u64) {
    let front = q.front_mut().expect("consume on empty queue");
    debug_assert!(front.1 >= take);
    front.1 -= take;
    if front.1 == 0 {
        q.pop_front();
    }
}

fn expand_front(q: &mut VecDeque<(Rc<Node>, u64)>) {
    let (node, count) = q.pop_front().expect("expand on empty queue");
    if count > 1 {
        q.push_front((Rc::clone(&node), count - 1));
    }
    match &node.kind {
        NodeKind::Leaf(_) => unreachable!("leaves are never expanded"),
        NodeKind::Duplicate {
            multiplicity,
            child,
        } => {
            q.push_front((Rc::clone(child), *multiplicity));
        }
        NodeKind::Increasing { children } => {
            for c in children.iter().rev() {
                q.push_front((Rc::clone(c), 1));
            }
        }
    }
}

fn check_epochs(a: &StringHandle, b: &StringHandle) -> Result<(), DdtError> {
    if a.epoch != b.epoch {
        return Err(DdtError::EpochMismatch {
            left: a.epoch,
            right: b.epoch,
        });
    }
    Ok(())
}

// ===========================================================================
// Collection
// ===========================================================================

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CollectionStats {
    /// Distinct nodes materialized (new fingerprint-table entries).
    /// Re-forming a node the table already knows is deduplicated work, not
    /// a build.
    pub nodes_built: u64,
    /// Symbols ever ingested; drives the height cap.
    pub leaves_built: u64,
    /// Times the height cap was exceeded (each one poisons the epoch).
    pub rebuilds: u64,
    /// Highest node level ever constructed.
    pub max_height: u32,
}

/// One epoch's worth of strings: the fingerprint table, the seed, and all
/// construction machinery. All handles issued by a collection carry its epoch
/// and may only be combined with each other.
pub struct Collection {
    table: FingerprintTable,
    epoch: u64,
    stats: CollectionStats,
    leaf_cache: Vec<Option<Rc<Node>>>,
    scratch: Vec<u8>,
    scratch_fps: Vec<Fingerprint>,
}

/// Per-level run sequences produced by dissolving a seam; input to `rebuild`.
type Parts = Vec<Vec<(Rc<Node>, u64)>>;

impl Collection {
    pub fn new(seed: HashSeed) -> Self {
        Self::with_table(FingerprintTable::new(seed))
    }

    /// Narrow fingerprint widths make collisions likely; used to exercise the
    /// collision-detection and restart paths.
    pub fn with_fingerprint_bits(seed: HashSeed, bits: u32) -> Self {
        Self::with_table(FingerprintTable::with_fingerprint_bits(seed, bits))
    }

    fn with_table(table: FingerprintTable) -> Self {
        Collection {
            table,
            epoch: NEXT_EPOCH.fetch_add(1, Ordering::Relaxed),
            stats: CollectionStats::default(),
            leaf_cache: vec![None; 256],
            scratch: Vec::with_capacity(64),
            scratch_fps: Vec::with_capacity(16),
        }
    }

    pub fn seed(&self) -> HashSeed {
        self.table.seed()
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn stats(&self) -> &CollectionStats {
        &self.stats
    }

    pub fn table(&self) -> &FingerprintTable {
        &self.table
    }

    /// Maximum node level tolerated before the epoch is declared unbalanced.
    pub fn height_cap(&self) -> u32 {
        let n = self.stats.leaves_built.max(MIN_CAP_LEAVES);
        ALPHA * ceil_log2(n)
    }

    // -- constructors -------------------------------------------------------

    pub fn new_string(&mut self, symbol: Symbol) -> Result<StringHandle, DdtError> {
        self.stats.leaves_built += 1;
        let leaf = self.make_leaf(symbol)?;
        Ok(self.handle(leaf))
    }

    pub fn from_symbols(&mut self, symbols: &[Symbol]) -> Result<StringHandle, DdtError> {
        assert!(!symbols.is_empty(), "strings are nonempty");
        self.stats.leaves_built += symbols.len() as u64;
        let mut level0: Vec<(Rc<Node>, u64)> = Vec::new();
        let mut i = 0;
        while i < symbols.len() {
            let sym = symbols[i];
            let mut run = 1u64;
            while i + (run as usize) < symbols.len() && symbols[i + run as usize] == sym {
                run += 1;
            }
            level0.push((self.make_leaf(sym)?, run));
            i += run as usize;
        }
        let mut left: Parts = vec![level0];
        let root = self.rebuild(&mut left, &mut Vec::new())?;
        Ok(self.handle(root))
    }

    /// One grouping pass: turns a level-(level−1) node sequence into the
    /// unique greedy run decomposition at `level`. Odd levels coalesce equal
    /// fingerprints, even levels cut wherever the next fingerprint fails to
    /// increase.
    pub fn build_level(
        &mut self,
        level: u32,
        nodes: &[Rc<Node>],
    ) -> Result<Vec<Rc<Node>>, DdtError> {
        assert!(level >= 1, "level 0 is the leaves");
        for n in nodes {
            assert_eq!(
                n.level + 1,
                level,
                "build_level input must sit one level down"
            );
        }
        let input: Vec<(Rc<Node>, u64)> = nodes.iter().map(|n| (Rc::clone(n), 1)).collect();
        let out = self.group(level, &input)?;
        Ok(out.into_iter().map(|(n, _)| n).collect())
    }

    // -- editing ------------------------------------------------------------

    pub fn set(
        &mut self,
        h: &StringHandle,
        index: u64,
        symbol: Symbol,
    ) -> Result<StringHandle, DdtError> {
        self.check_handle(h)?;
        let len = h.len();
        if index >= len {
            return Err(DdtError::IndexOutOfRange { index, len });
        }
        if len == 1 {
            return self.new_string(symbol);
        }
        // Composed of split / new / concatenate so canonicality is inherited
        // rather than re-argued; the boundary positions need only one split.
        if index == 0 {
            let (_, rest) = self.split(h, 1)?;
            let fresh = self.new_string(symbol)?;
            return self.concatenate(&fresh, &rest);
        }
        if index == len - 1 {
            let (front, _) = self.split(h, len - 1)?;
            let fresh = self.new_string(symbol)?;
            return self.concatenate(&front, &fresh);
        }
        let (front, back) = self.split(h, index)?;
        let (_, back) = self.split(&back, 1)?;
        let fresh = self.new_string(symbol)?;
        let front = self.concatenate(&front, &fresh)?;
        self.concatenate(&front, &back)
    }

    pub fn split(
        &mut self,
        h: &StringHandle,
        index: u64,
    ) -> Result<(StringHandle, StringHandle), DdtError> {
        self.check_handle(h)?;
        let len = h.len();
        if index == 0 || index == len {
            return Err(DdtError::SplitAtBoundary { index, len });
        }
        if index > len {
            return Err(DdtError::IndexOutOfRange { index, len });
        }
        let mut lparts: Parts = Vec::new();
        let mut rparts: Parts = Vec::new();
        split_collect(&h.root, index, &mut lparts, &mut rparts);
        let left = self.rebuild(&mut lparts, &mut Vec::new())?;
        let right = self.rebuild(&mut Vec::new(), &mut rparts)?;
        Ok((self.handle(left), self.handle(right)))
    }

    pub fn concatenate(
        &mut self,
        a: &StringHandle,
        b: &StringHandle,
    ) -> Result<StringHandle, DdtError> {
        self.check_handle(a)?;
        self.check_handle(b)?;
        let mut lparts: Parts = Vec::new();
        let mut rparts: Parts = Vec::new();
        unzip_right(&a.root, &mut lparts);
        unzip_left(&b.root, &mut rparts);
        let root = self.rebuild(&mut lparts, &mut rparts)?;
        Ok(self.handle(root))
    }

    /// Circular right shift: the last `k` symbols move to the front.
    pub fn rotate(&mut self, h: &StringHandle, k: u64) -> Result<StringHandle, DdtError> {
        self.check_handle(h)?;
        let len = h.len();
        if k >= len {
            return Err(DdtError::IndexOutOfRange { index: k, len });
        }
        if k == 0 {
            return Ok(h.clone());
        }
        let (front, back) = self.split(h, len - k)?;
        self.concatenate(&back, &front)
    }

    // -- diagnostics --------------------------------------------------------

    /// Full-tree invariant walk; used by tests, not by operations.
    pub fn validate(&self, h: &StringHandle) -> Result<(), String> {
        if h.epoch != self.epoch {
            return Err(format!(
                "handle epoch {} does not match collection epoch {}",
                h.epoch, self.epoch
            ));
        }
        fn walk(node: &Node, table: &FingerprintTable) -> Result<(), String> {
            match &node.kind {
                NodeKind::Leaf(_) => {
                    if node.level != 0 || node.leaf_count != 1 {
                        return Err(format!("malformed leaf at level {}", node.level));
                    }
                }
                NodeKind::Duplicate {
                    multiplicity,
                    child,
                } => {
                    if node.level.is_multiple_of(2) {
                        return Err(format!("duplicate node at even level {}", node.level));
                    }
                    if *multiplicity == 0 {
                        return Err("zero multiplicity".into());
                    }
                    if child.level + 1 != node.level {
                        return Err("child not one level down".into());
                    }
                    if node.leaf_count != multiplicity * child.leaf_count {
                        return Err("duplicate leaf_count mismatch".into());
                    }
                    walk(child, table)?;
                }
                NodeKind::Increasing { children } => {
                    if node.level % 2 == 1 || node.level == 0 {
                        return Err(format!("increasing node at odd level {}", node.level));
                    }
                    if children.is_empty() {
                        return Err("increasing node without children".into());
                    }
                    let mut sum = 0;
                    for pair in children.windows(2) {
                        if pair[1].fp <= pair[0].fp {
                            return Err("children fingerprints not strictly increasing".into());
                        }
                    }
                    for c in children.iter() {
                        if c.level + 1 != node.level {
                            return Err("child not one level down".into());
                        }
                        sum += c.leaf_count;
                        walk(c, table)?;
                    }
                    if sum != node.leaf_count {
                        return Err("increasing leaf_count mismatch".into());
                    }
                }
            }
            match table.lookup(node.fp) {
                None => Err(format!("{:?} not registered", node.fp)),
                Some(_) => Ok(()),
            }
        }
        walk(&h.root, &self.table)
    }

    // -- internal construction ---------------------------------------------

    fn handle(&self, root: Rc<Node>) -> StringHandle {
        StringHandle {
            root,
            epoch: self.epoch,
        }
    }

    fn check_handle(&self, h: &StringHandle) -> Result<(), DdtError> {
        if h.epoch != self.epoch {
            return Err(DdtError::EpochMismatch {
                left: h.epoch,
                right: self.epoch,
            });
        }
        Ok(())
    }

    fn make_leaf(&mut self, symbol: Symbol) -> Result<Rc<Node>, DdtError> {
        if let Some(leaf) = &self.leaf_cache[symbol as usize] {
            return Ok(Rc::clone(leaf));
        }
        self.scratch.clear();
        serialize_leaf_into(&mut self.scratch, symbol);
        let fp = self
            .table
            .mask_hash(hash_bytes(self.table.seed(), &self.scratch));
        if self.table.register_leaf(fp, symbol)? {
            self.stats.nodes_built += 1;
        }
        let leaf = Rc::new(Node {
            fp,
            level: 0,
            leaf_count: 1,
            kind: NodeKind::Leaf(symbol),
        });
        self.leaf_cache[symbol as usize] = Some(Rc::clone(&leaf));
        Ok(leaf)
    }

    fn check_cap(&mut self, level: u32) -> Result<(), DdtError> {
        let cap = self.height_cap();
        if level > cap {
            self.stats.rebuilds += 1;
            return Err(DdtError::RebuildRequired { level, cap });
        }
        Ok(())
    }

    fn close_duplicate(
        &mut self,
        level: u32,
        child: &Rc<Node>,
        multiplicity: u64,
    ) -> Result<Rc<Node>, DdtError> {
        debug_assert_eq!(level % 2, 1);
        debug_assert_eq!(child.level + 1, level);
        self.check_cap(level)?;
        self.scratch.clear();
        serialize_duplicate_into(&mut self.scratch, level, multiplicity, child.fp);
        let fp = self
            .table
            .mask_hash(hash_bytes(self.table.seed(), &self.scratch));
        if self
            .table
            .register_duplicate(fp, level, multiplicity, child.fp)?
        {
            self.stats.nodes_built += 1;
        }
        self.stats.max_height = self.stats.max_height.max(level);
        Ok(Rc::new(Node {
            fp,
            level,
            leaf_count: multiplicity * child.leaf_count,
            kind: NodeKind::Duplicate {
                multiplicity,
                child: Rc::clone(child),
            },
        }))
    }

    fn close_increasing(
        &mut self,
        level: u32,
        children: Vec<Rc<Node>>,
    ) -> Result<Rc<Node>, DdtError> {
        debug_assert_eq!(level % 2, 0);
        debug_assert!(!children.is_empty());
        self.check_cap(level)?;
        self.scratch_fps.clear();
        self.scratch_fps.extend(children.iter().map(|c| c.fp));
        self.scratch.clear();
        serialize_increasing_into(&mut self.scratch, level, &self.scratch_fps);
        let fp = self
            .table
            .mask_hash(hash_bytes(self.table.seed(), &self.scratch));
        if self
            .table
            .register_increasing(fp, level, &self.scratch_fps)?
        {
            self.stats.nodes_built += 1;
        }
        self.stats.max_height = self.stats.max_height.max(level);
        Ok(Rc::new(Node {
            fp,
            level,
            leaf_count: children.iter().map(|c| c.leaf_count).sum(),
            kind: NodeKind::Increasing {
                children: children.into(),
            },
        }))
    }

    fn group(
        &mut self,
        level: u32,
        input: &[(Rc<Node>, u64)],
    ) -> Result<Vec<(Rc<Node>, u64)>, DdtError> {
        if level % 2 == 1 {
            self.group_duplicate(level, input)
        } else {
            self.group_increasing(level, input)
        }
    }

    fn group_duplicate(
        &mut self,
        level: u32,
        input: &[(Rc<Node>, u64)],
    ) -> Result<Vec<(Rc<Node>, u64)>, DdtError> {
        let mut out = Vec::with_capacity(input.len());
        let mut i = 0;
        while i < input.len() {
            let (node, mut count) = (&input[i].0, input[i].1);
            i += 1;
            while i < input.len() && input[i].0.fp == node.fp {
                count += input[i].1;
                i += 1;
            }
            let parent = self.close_duplicate(level, node, count)?;
            out.push((parent, 1));
        }
        Ok(out)
    }

    fn group_increasing(
        &mut self,
        level: u32,
        input: &[(Rc<Node>, u64)],
    ) -> Result<Vec<(Rc<Node>, u64)>, DdtError> {
        let mut out = Vec::with_capacity(input.len());
        let mut i = 0;
        while i < input.len() {
            assert_eq!(
                input[i].1, 1,
                "runs must be expanded below increasing levels"
            );
            let mut children = vec![Rc::clone(&input[i].0)];
            i += 1;
            while i < input.len() {
                let prev = children.last().unwrap().fp;
                // Duplicate-run maximality one level down guarantees no equal
                // neighbors reach an increasing level.
                assert_ne!(
                    input[i].0.fp, prev,
                    "equal fingerprints fed to increasing level"
                );
                if input[i].0.fp <= prev {
                    break;
                }
                assert_eq!(
                    input[i].1, 1,
                    "runs must be expanded below increasing levels"
                );
                children.push(Rc::clone(&input[i].0));
                i += 1;
            }
            let parent = self.close_increasing(level, children)?;
            out.push((parent, 1));
        }
        Ok(out)
    }

    /// Core canonical construction: consumes per-level left/right context
    /// (preserved nodes flanking a dissolved seam) and regroups bottom-up
    /// until everything above is consumed and a single node remains.
    ///
    /// Banked parts are safe to keep whole only while the seam cannot merge
    /// into their content. Every banked entry's cut on its far side persists
    /// (the pair deciding it is unchanged), but the entry nearest the seam
    /// must take part in grouping. When a level has no banked entry — a
    /// spine of single-child nodes banked nothing — the seam's true
    /// neighbor is buried inside the nearest banked node above; `expose_*`
    /// dissolves that node's facing spine down to the current level so the
    /// deciding pair becomes two adjacent items.
    fn rebuild(&mut self, lparts: &mut Parts, rparts: &mut Parts) -> Result<Rc<Node>, DdtError> {
        let top = lparts.len().max(rparts.len());
        let mut mid: Vec<(Rc<Node>, u64)> = Vec::new();
        let mut items: Vec<(Rc<Node>, u64)> = Vec::new();
        let mut level: u32 = 1;
        loop {
            let li = (level - 1) as usize;
            if !mid.is_empty() && level_empty(lparts, li) && parts_remain(lparts, level) {
                expose_left(lparts, li);
            }
            items.clear();
            take_level(lparts, li, &mut items);
            items.append(&mut mid);
            if !items.is_empty() && level_empty(rparts, li) && parts_remain(rparts, level) {
                expose_right(rparts, li);
            }
            take_level(rparts, li, &mut items);
            let parts_above = parts_remain(lparts, level) || parts_remain(rparts, level);
            if !parts_above && items.len() == 1 && items[0].1 == 1 {
                let root = items.pop().unwrap().0;
                return Ok(strip_singletons(root));
            }
            debug_assert!(
                parts_above || !items.is_empty(),
                "rebuild ran out of material below level {level}"
            );
            mid = self.group(level, &items)?;
            level += 1;
            debug_assert!(level as usize <= top + self.height_cap() as usize + 2);
        }
    }
}

fn ceil_log2(n: u64) -> u32 {
    debug_assert!(n >= 2);
    64 - (n - 1).leading_zeros()
}

fn take_level(parts: &mut Parts, level: usize, out: &mut Vec<(Rc<Node>, u64)>) {
    if let Some(v) = parts.get_mut(level) {
        out.append(v);
    }
}

fn parts_remain(parts: &Parts, level: u32) -> bool {
    parts.iter().skip(level as usize).any(|v| !v.is_empty())
}

fn level_empty(parts: &Parts, level: usize) -> bool {
    parts.get(level).is_none_or(|v| v.is_empty())
}

/// Pops one node off the seam-facing end of the lowest banked level above
/// `target` and dissolves its facing spine down to `target`, so the node
/// bordering the seam at `target` becomes a grouping item. All pushes land
/// in levels that were empty, keeping content order intact.
fn expose_left(parts: &mut Parts, target: usize) {
    let j = (target + 1..parts.len())
        .find(|&j| !parts[j].is_empty())
        .expect("caller checked parts_remain");
    let (node, count) = parts[j].pop().unwrap();
    if count > 1 {
        parts[j].push((Rc::clone(&node), count - 1));
    }
    unzip_right_to(&node, target as u32, parts);
}

fn expose_right(parts: &mut Parts, target: usize) {
    let j = (target + 1..parts.len())
        .find(|&j| !parts[j].is_empty())
        .expect("caller checked parts_remain");
    let (node, count) = parts[j].remove(0);
    if count > 1 {
        parts[j].insert(0, (Rc::clone(&node), count - 1));
    }
    unzip_left_to(&node, target as u32, parts);
}

/// The root may not be a multiplicity-1 duplicate or a single-child
/// increasing node: canonical construction would have stopped one level
/// earlier. Such wrappers appear when a preserved seam node ends up alone.
fn strip_singletons(mut root: Rc<Node>) -> Rc<Node> {
    loop {
        let next = match &root.kind {
            NodeKind::Duplicate {
                multiplicity: 1,
                child,
            } => Rc::clone(child),
            NodeKind::Increasing { children } if children.len() == 1 => Rc::clone(&children[0]),
            _ => return root,
        };
        root = next;
    }
}

fn push_part(parts: &mut Parts, level: u32, node: Rc<Node>, count: u64) {
    if count == 0 {
        return;
    }
    let level = level as usize;
    if parts.len() <= level {
        parts.resize_with(level + 1, Vec::new);
    }
    parts[level].push((node, count));
}

/// Dissolves the right spine of a tree down to `target`: every spine node's
/// non-rightmost children become preserved parts at their level, and the
/// level-`target` spine node itself becomes an item to regroup against
/// whatever follows on the right.
fn unzip_right_to(root: &Rc<Node>, target: u32, parts: &mut Parts) {
    let mut node = Rc::clone(root);
    while node.level > target {
        let next = match &node.kind {
            NodeKind::Leaf(_) => unreachable!("leaves sit at level 0"),
            NodeKind::Duplicate {
                multiplicity,
                child,
            } => {
                push_part(parts, child.level, Rc::clone(child), multiplicity - 1);
                Rc::clone(child)
            }
            NodeKind::Increasing { children } => {
                for c in &children[..children.len() - 1] {
                    push_part(parts, c.level, Rc::clone(c), 1);
                }
                Rc::clone(children.last().unwrap())
            }
        };
        node = next;
    }
    push_part(parts, target, node, 1);
}

fn unzip_right(root: &Rc<Node>, parts: &mut Parts) {
    unzip_right_to(root, 0, parts);
}

/// Mirror image of `unzip_right_to` for the left spine. The spine item at
/// `target` is the leftmost content, so it must land before any siblings
/// pushed at that same level.
fn unzip_left_to(root: &Rc<Node>, target: u32, parts: &mut Parts) {
    let mut node = Rc::clone(root);
    if node.level == target {
        push_part(parts, target, node, 1);
        return;
    }
    loop {
        let next = match &node.kind {
            NodeKind::Leaf(_) => unreachable!("leaves sit at level 0"),
            NodeKind::Duplicate {
                multiplicity,
                child,
            } => {
                if child.level == target {
                    push_part(parts, target, Rc::clone(child), *multiplicity);
                    return;
                }
                push_part(parts, child.level, Rc::clone(child), multiplicity - 1);
                Rc::clone(child)
            }
            NodeKind::Increasing { children } => {
                if children[0].level == target {
                    for c in children.iter() {
                        push_part(parts, target, Rc::clone(c), 1);
                    }
                    return;
                }
                for c in children[1..].iter() {
                    push_part(parts, c.level, Rc::clone(c), 1);
                }
                Rc::clone(&children[0])
            }
        };
        node = next;
    }
}

fn unzip_left(root: &Rc<Node>, parts: &mut Parts) {
    unzip_left_to(root, 0, parts);
}

/// Descends to the split point, banking whole sub-runs left or right of the
/// path and dissolving every ancestor of the boundary. Duplicate ancestors
/// split by multiplicity arithmetic; increasing ancestors by child index.
fn split_collect(node: &Rc<Node>, index: u64, lparts: &mut Parts, rparts: &mut Parts) {
    debug_assert!(0 < index && index < node.leaf_count);
    match &node.kind {
        NodeKind::Leaf(_) => unreachable!("cannot split inside a single leaf"),
        NodeKind::Duplicate {
            multiplicity,
            child,
        } => {
            let w = child.leaf_count;
            let q = index / w;
            let r = index % w;
            if r == 0 {
                push_part(lparts, child.level, Rc::clone(child), q);
                push_part(rparts, child.level, Rc::clone(child), multiplicity - q);
            } else {
                push_part(lparts, child.level, Rc::clone(child), q);
                push_part(rparts, child.level, Rc::clone(child), multiplicity - q - 1);
                split_collect(child, r, lparts, rparts);
            }
        }
        NodeKind::Increasing { children } => {
            let mut cum = 0u64;
            for (pos, c) in children.iter().enumerate() {
                if index == cum {
                    for lc in &children[..pos] {
                        push_part(lparts, lc.level, Rc::clone(lc), 1);
                    }
                    for rc in &children[pos..] {
                        push_part(rparts, rc.level, Rc::clone(rc), 1);
                    }
                    return;
                }
                if index < cum + c.leaf_count {
                    for lc in &children[..pos] {
                        push_part(lparts, lc.level, Rc::clone(lc), 1);
                    }
                    for rc in &children[pos + 1..] {
                        push_part(rparts, rc.level, Rc::clone(rc), 1);
                    }
                    split_collect(c, index - cum, lparts, rparts);
                    return;
                }
                cum += c.leaf_count;
            }
            unreachable!("split index inside node bounds");
        }
    }
}
