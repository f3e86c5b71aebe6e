use std::collections::HashMap;
use std::sync::Arc;

/// Dense index of a symbol within an [`Alphabet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventId(pub u32);

impl EventId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub silent: bool,
}

/// An interned symbol table with at most one silent (ε) symbol.
///
/// Automata hold alphabets behind an [`Arc`]; two automata are compatible
/// when their tables have identical content.
#[derive(Clone, Debug, Default)]
pub struct Alphabet {
    symbols: Vec<Symbol>,
    by_name: HashMap<String, EventId>,
    silent: Option<EventId>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
    }
}

impl Eq for Alphabet {}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an alphabet of visible symbols with the given names.
    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut a = Self::new();
        for n in names {
            a.push(n);
        }
        a
    }

    /// Adds a visible symbol, returning the existing id if the name is taken.
    pub fn push(&mut self, name: impl Into<String>) -> EventId {
        self.insert(name.into(), false)
    }

    /// Adds the silent symbol. Panics if a different silent symbol exists.
    pub fn push_silent(&mut self, name: impl Into<String>) -> EventId {
        let name = name.into();
        if let Some(s) = self.silent {
            assert_eq!(self.symbols[s.index()].name, name, "alphabet already has a silent symbol");
            return s;
        }
        let id = self.insert(name, true);
        self.silent = Some(id);
        id
    }

    fn insert(&mut self, name: String, silent: bool) -> EventId {
        if let Some(&id) = self.by_name.get(&name) {
            return id;
        }
        let id = EventId(self.symbols.len() as u32);
        self.by_name.insert(name.clone(), id);
        self.symbols.push(Symbol { name, silent });
        id
    }

    pub fn into_shared(self) -> Arc<Alphabet> {
        Arc::new(self)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn name(&self, e: EventId) -> &str {
        &self.symbols[e.index()].name
    }

    pub fn lookup(&self, name: &str) -> Option<EventId> {
        self.by_name.get(name).copied()
    }

    pub fn silent(&self) -> Option<EventId> {
        self.silent
    }

    pub fn is_silent(&self, e: EventId) -> bool {
        self.silent == Some(e)
    }

    pub fn ids(&self) -> impl Iterator<Item = EventId> + '_ {
        (0..self.symbols.len() as u32).map(EventId)
    }

    /// All non-silent symbols in id order.
    pub fn visible(&self) -> impl Iterator<Item = EventId> + '_ {
        self.ids().filter(move |&e| !self.is_silent(e))
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    /// Renders a string of symbols separated by spaces.
    pub fn render(&self, word: &[EventId]) -> String {
        word.iter().map(|&e| self.name(e)).collect::<Vec<_>>().join(" ")
    }
}

/// Compares two shared alphabets, cheaply when they are the same allocation.
pub(crate) fn same_alphabet(a: &Arc<Alphabet>, b: &Arc<Alphabet>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}
