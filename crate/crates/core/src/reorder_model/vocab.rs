use std::collections::HashMap;

pub const UNK: &str = "<unk>";

/// String-to-row lookup; row 0 is reserved for unknown items.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    items: Vec<String>,
    index: HashMap<String, usize>,
}

impl Default for Vocab {
    fn default() -> Self {
        let mut v = Vocab {
            items: Vec::new(),
            index: HashMap::new(),
        };
        v.insert(UNK);
        v
    }
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_items(items: impl IntoIterator<Item = String>) -> Self {
        let mut v = Vocab::new();
        for item in items {
            v.insert(&item);
        }
        v
    }

    pub fn insert(&mut self, item: &str) -> usize {
        if let Some(&i) = self.index.get(item) {
            return i;
        }
        let i = self.items.len();
        self.items.push(item.to_string());
        self.index.insert(item.to_string(), i);
        i
    }

    pub fn get(&self, item: &str) -> usize {
        self.index.get(item).copied().unwrap_or(0)
    }

    pub fn contains(&self, item: &str) -> bool {
        self.index.contains_key(item)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }
}

/// Lookup tables for every categorical input of the classifier.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassifierVocab {
    pub words: Vocab,
    pub pos: Vocab,
    pub relations: Vocab,
    pub languages: Vocab,
}

/// Word forms are matched case-insensitively.
pub fn normalize_form(form: &str) -> String {
    form.to_lowercase()
}
