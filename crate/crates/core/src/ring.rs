//! Circular doubly-linked list with a fixed number of round-robin cursors.
//!
//! Used for per-vertex owned-edge lists: scans advance a cursor through the
//! list, and new items are inserted directly behind a chosen cursor so they
//! are visited last.

use std::hash::Hash;

use crate::DetHashMap;

const NIL: usize = usize::MAX;

#[derive(Clone, Debug)]
struct Node<T> {
    value: T,
    prev: usize,
    next: usize,
}

#[derive(Clone, Debug)]
pub struct CursorRing<T: Copy + Eq + Hash> {
    nodes: Vec<Node<T>>,
    free: Vec<usize>,
    slot_of: DetHashMap<T, usize>,
    cursors: Vec<usize>,
    len: usize,
}

impl<T: Copy + Eq + Hash> CursorRing<T> {
    pub fn new(cursor_count: usize) -> Self {
        CursorRing {
            nodes: Vec::new(),
            free: Vec::new(),
            slot_of: DetHashMap::default(),
            cursors: vec![NIL; cursor_count],
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, value: &T) -> bool {
        self.slot_of.contains_key(value)
    }

    /// Inserts `value` directly behind cursor `cursor`, i.e. it becomes the
    /// last item that cursor reaches. Returns false if already present.
    pub fn insert_behind(&mut self, cursor: usize, value: T) -> bool {
        if self.slot_of.contains_key(&value) {
            return false;
        }
        let slot = match self.free.pop() {
            Some(slot) => {
                self.nodes[slot] = Node { value, prev: NIL, next: NIL };
                slot
            }
            None => {
                self.nodes.push(Node { value, prev: NIL, next: NIL });
                self.nodes.len() - 1
            }
        };
        self.slot_of.insert(value, slot);
        if self.len == 0 {
            self.nodes[slot].prev = slot;
            self.nodes[slot].next = slot;
            for c in self.cursors.iter_mut() {
                *c = slot;
            }
        } else {
            let at = self.cursors[cursor];
            let before = self.nodes[at].prev;
            self.nodes[slot].prev = before;
            self.nodes[slot].next = at;
            self.nodes[before].next = slot;
            self.nodes[at].prev = slot;
        }
        self.len += 1;
        true
    }

    /// Removes `value`; cursors resting on it move to its successor.
    pub fn remove(&mut self, value: &T) -> bool {
        let Some(slot) = self.slot_of.remove(value) else {
            return false;
        };
        self.len -= 1;
        if self.len == 0 {
            for c in self.cursors.iter_mut() {
                *c = NIL;
            }
        } else {
            let (prev, next) = (self.nodes[slot].prev, self.nodes[slot].next);
            self.nodes[prev].next = next;
            self.nodes[next].prev = prev;
            for c in self.cursors.iter_mut() {
                if *c == slot {
                    *c = next;
                }
            }
        }
        self.free.push(slot);
        true
    }

    /// Item under the cursor, if the list is non-empty.
    pub fn peek(&self, cursor: usize) -> Option<T> {
        match self.cursors[cursor] {
            NIL => None,
            slot => Some(self.nodes[slot].value),
        }
    }

    /// Returns the item under the cursor and moves the cursor forward.
    pub fn advance(&mut self, cursor: usize) -> Option<T> {
        let slot = self.cursors[cursor];
        if slot == NIL {
            return None;
        }
        self.cursors[cursor] = self.nodes[slot].next;
        Some(self.nodes[slot].value)
    }

    /// Items in list order starting at the given cursor.
    pub fn iter_from(&self, cursor: usize) -> impl Iterator<Item = T> + '_ {
        let start = self.cursors[cursor];
        let mut slot = start;
        let mut remaining = self.len;
        std::iter::from_fn(move || {
            if remaining == 0 || slot == NIL {
                return None;
            }
            let value = self.nodes[slot].value;
            slot = self.nodes[slot].next;
            remaining -= 1;
            Some(value)
        })
    }

    pub fn clear(&mut self) {
        self.nodes.clear();
        self.free.clear();
        self.slot_of.clear();
        for c in self.cursors.iter_mut() {
            *c = NIL;
        }
        self.len = 0;
    }
}
