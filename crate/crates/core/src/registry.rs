//! Name-keyed registries of interchangeable strategies.
//!
//! Each algorithm family (steady-state solvers, concurrence methods, oracle
//! mirror models) is a trait; a [`Registry`] maps a stable name to a shared
//! trait object so that the variant can be chosen at runtime from a config
//! file or a command-line flag.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Implemented by every registered strategy.
pub trait Named {
    fn name(&self) -> &'static str;
}

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<&'static str, Arc<T>>,
    default: Option<&'static str>,
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
            default: None,
        }
    }

    /// Adds a strategy under its own name, replacing any previous entry.
    /// The first strategy registered becomes the default.
    pub fn register(&mut self, strategy: Arc<T>) -> &mut Self {
        let name = strategy.name();
        self.default.get_or_insert(name);
        self.entries.insert(name, strategy);
        self
    }

    pub fn set_default(&mut self, name: &str) -> Result<()> {
        let (key, _) = self
            .entries
            .get_key_value(name)
            .ok_or_else(|| self.unknown(name))?;
        self.default = Some(*key);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| self.unknown(name))
    }

    pub fn default_strategy(&self) -> Option<Arc<T>> {
        self.default.and_then(|n| self.entries.get(n).cloned())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn kind(&self) -> &'static str {
        self.kind
    }

    fn unknown(&self, name: &str) -> Error {
        Error::UnknownStrategy {
            kind: self.kind,
            name: name.to_owned(),
            available: self.names().collect::<Vec<_>>().join(", "),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Greeter: Named {
        fn greet(&self) -> String;
    }

    struct Hello;
    impl Named for Hello {
        fn name(&self) -> &'static str {
            "hello"
        }
    }
    impl Greeter for Hello {
        fn greet(&self) -> String {
            "hello".into()
        }
    }

    struct Hi;
    impl Named for Hi {
        fn name(&self) -> &'static str {
            "hi"
        }
    }
    impl Greeter for Hi {
        fn greet(&self) -> String {
            "hi".into()
        }
    }

    #[test]
    fn lookup_and_default() {
        let mut reg: Registry<dyn Greeter> = Registry::new("greeter");
        reg.register(Arc::new(Hello)).register(Arc::new(Hi));
        assert_eq!(reg.default_strategy().unwrap().greet(), "hello");
        assert_eq!(reg.get("hi").unwrap().greet(), "hi");
        reg.set_default("hi").unwrap();
        assert_eq!(reg.default_strategy().unwrap().name(), "hi");
        assert_eq!(reg.names().collect::<Vec<_>>(), ["hello", "hi"]);
    }

    #[test]
    fn unknown_name_lists_alternatives() {
        let mut reg: Registry<dyn Greeter> = Registry::new("greeter");
        reg.register(Arc::new(Hello));
        let err = reg.get("hey").err().unwrap();
        assert_eq!(
            err.to_string(),
            "unknown greeter `hey` (available: hello)"
        );
        assert!(reg.set_default("hey").is_err());
    }
}
