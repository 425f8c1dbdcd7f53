use std::collections::HashMap;

/// Trie keyed on dot-separated segments. Lookups return the value stored at
/// the longest stored prefix that ends on a segment boundary.
#[derive(Debug, Clone)]
pub(crate) struct SegmentTrie<T> {
    root: Node<T>,
}

#[derive(Debug, Clone)]
struct Node<T> {
    value: Option<T>,
    children: HashMap<String, Node<T>>,
}

impl<T> Default for Node<T> {
    fn default() -> Self {
        Node {
            value: None,
            children: HashMap::new(),
        }
    }
}

impl<T> Default for SegmentTrie<T> {
    fn default() -> Self {
        SegmentTrie {
            root: Node::default(),
        }
    }
}

impl<T> SegmentTrie<T> {
    /// Returns the previous value when the key was already present.
    pub fn insert(&mut self, key: &str, value: T) -> Option<T> {
        let mut node = &mut self.root;
        for seg in key.split('.') {
            node = node.children.entry(seg.to_string()).or_default();
        }
        node.value.replace(value)
    }

    pub fn longest_prefix(&self, name: &str) -> Option<&T> {
        let mut node = &self.root;
        let mut best = node.value.as_ref();
        for seg in name.split('.') {
            match node.children.get(seg) {
                Some(child) => {
                    node = child;
                    if node.value.is_some() {
                        best = node.value.as_ref();
                    }
                }
                None => break,
            }
        }
        best
    }
}

/// True when `prefix` equals `name` or is followed in `name` by a `.`.
pub fn is_segment_prefix(prefix: &str, name: &str) -> bool {
    match name.strip_prefix(prefix) {
        Some(rest) => rest.is_empty() || rest.starts_with('.'),
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn longest_match_wins() {
        let mut t = SegmentTrie::default();
        t.insert("a.b", 1);
        t.insert("a.b.c.D", 2);
        assert_eq!(t.longest_prefix("a.b.c.D.e"), Some(&2));
        assert_eq!(t.longest_prefix("a.b.c.E"), Some(&1));
        assert_eq!(t.longest_prefix("a.bc"), None);
        assert_eq!(t.longest_prefix("a"), None);
        assert_eq!(t.insert("a.b", 3), Some(1));
    }

    #[test]
    fn segment_prefix() {
        assert!(is_segment_prefix("android.nfc", "android.nfc"));
        assert!(is_segment_prefix("android.nfc", "android.nfc.Tag"));
        assert!(!is_segment_prefix("android.nfc", "android.nfcx"));
    }
}
