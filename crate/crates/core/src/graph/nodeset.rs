use std::fmt;

use super::GraphError;

/// A subset of the node ids `0..capacity` of one topology.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NodeSet {
    members: Vec<bool>,
    len: usize,
}

impl NodeSet {
    pub fn empty(capacity: usize) -> Self {
        Self {
            members: vec![false; capacity],
            len: 0,
        }
    }

    pub fn full(capacity: usize) -> Self {
        Self {
            members: vec![true; capacity],
            len: capacity,
        }
    }

    /// Builds a set from node ids, rejecting ids outside `0..capacity`.
    /// Duplicate ids are accepted and collapse.
    pub fn from_ids<I>(capacity: usize, ids: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut set = Self::empty(capacity);
        for id in ids {
            if id >= capacity {
                return Err(GraphError::InvalidNode {
                    id,
                    node_count: capacity,
                });
            }
            set.insert(id);
        }
        Ok(set)
    }

    pub fn from_mask(members: Vec<bool>) -> Self {
        let len = members.iter().filter(|&&m| m).count();
        Self { members, len }
    }

    pub fn capacity(&self) -> usize {
        self.members.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, id: usize) -> bool {
        self.members.get(id).copied().unwrap_or(false)
    }

    /// Returns true if the node was newly inserted.
    ///
    /// Panics if `id` is out of range.
    pub fn insert(&mut self, id: usize) -> bool {
        let slot = &mut self.members[id];
        if *slot {
            false
        } else {
            *slot = true;
            self.len += 1;
            true
        }
    }

    /// Returns true if the node was present.
    ///
    /// Panics if `id` is out of range.
    pub fn remove(&mut self, id: usize) -> bool {
        let slot = &mut self.members[id];
        if *slot {
            *slot = false;
            self.len -= 1;
            true
        } else {
            false
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(id, &m)| m.then_some(id))
    }

    pub fn complement(&self) -> Self {
        Self {
            members: self.members.iter().map(|m| !m).collect(),
            len: self.members.len() - self.len,
        }
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        self.members
            .iter()
            .zip(&other.members)
            .all(|(a, b)| !(*a && *b))
    }

    pub fn as_mask(&self) -> &[bool] {
        &self.members
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
