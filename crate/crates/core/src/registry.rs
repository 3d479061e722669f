//! Name-keyed tables of interchangeable strategies (phase-field models,
//! linear solvers) selected at runtime from configuration.

use crate::error::{invalid, Result};

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: Vec<(&'static str, Box<T>)>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, item: Box<T>) -> Result<()> {
        if self.entries.iter().any(|(n, _)| *n == name) {
            return invalid(format!("{} '{name}' is already registered", self.kind));
        }
        self.entries.push((name, item));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        match self.entries.iter().find(|(n, _)| *n == name) {
            Some((_, item)) => Ok(item.as_ref()),
            None => invalid(format!(
                "unknown {} '{name}' (available: {})",
                self.kind,
                self.names().join(", ")
            )),
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }
}
