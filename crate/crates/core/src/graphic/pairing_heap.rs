//! Arena-backed mergeable max-heaps (pairing heaps).

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node<K, V> {
    key: K,
    value: V,
    child: u32,
    sibling: u32,
}

/// Storage for many pairing heaps; a heap is identified by its root handle.
#[derive(Debug, Clone)]
pub struct PairingHeap<K, V> {
    nodes: Vec<Node<K, V>>,
    free: Vec<u32>,
    ops: u64,
}

/// Root handle of one heap in the arena; `None` is the empty heap.
pub type HeapRoot = Option<u32>;

impl<K: Ord + Copy, V: Copy> Default for PairingHeap<K, V> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Ord + Copy, V: Copy> PairingHeap<K, V> {
    pub fn new() -> Self {
        PairingHeap { nodes: Vec::new(), free: Vec::new(), ops: 0 }
    }

    /// Heap operations performed so far (pushes, pops, melds).
    pub fn ops(&self) -> u64 {
        self.ops
    }

    /// Live entries across all heaps.
    pub fn len(&self) -> usize {
        self.nodes.len() - self.free.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn link(&mut self, a: u32, b: u32) -> u32 {
        let (hi, lo) = if self.nodes[a as usize].key >= self.nodes[b as usize].key { (a, b) } else { (b, a) };
        self.nodes[lo as usize].sibling = self.nodes[hi as usize].child;
        self.nodes[hi as usize].child = lo;
        hi
    }

    pub fn meld(&mut self, a: HeapRoot, b: HeapRoot) -> HeapRoot {
        self.ops += 1;
        match (a, b) {
            (Some(x), Some(y)) => Some(self.link(x, y)),
            (x, None) => x,
            (None, y) => y,
        }
    }

    pub fn push(&mut self, root: &mut HeapRoot, key: K, value: V) {
        let node = Node { key, value, child: NIL, sibling: NIL };
        let id = match self.free.pop() {
            Some(id) => {
                self.nodes[id as usize] = node;
                id
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        };
        *root = self.meld(*root, Some(id));
    }

    pub fn peek(&self, root: HeapRoot) -> Option<(K, V)> {
        root.map(|r| {
            let n = &self.nodes[r as usize];
            (n.key, n.value)
        })
    }

    pub fn pop(&mut self, root: &mut HeapRoot) -> Option<(K, V)> {
        let r = (*root)?;
        self.ops += 1;
        let (key, value, mut child) = {
            let n = &self.nodes[r as usize];
            (n.key, n.value, n.child)
        };
        self.free.push(r);
        // first pass: pair up siblings left to right
        let mut pairs = Vec::new();
        while child != NIL {
            let a = child;
            let b = self.nodes[a as usize].sibling;
            if b == NIL {
                self.nodes[a as usize].sibling = NIL;
                pairs.push(a);
                break;
            }
            child = self.nodes[b as usize].sibling;
            self.nodes[a as usize].sibling = NIL;
            self.nodes[b as usize].sibling = NIL;
            pairs.push(self.link(a, b));
        }
        // second pass: fold right to left
        let mut acc = pairs.pop();
        while let Some(p) = pairs.pop() {
            acc = Some(self.link(p, acc.expect("non-empty accumulator")));
        }
        *root = acc;
        Some((key, value))
    }
}
