use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Finite ordered alphabet of opaque text labels.
///
/// Labels are addressed by position everywhere in the numerics; the text is
/// only used at I/O boundaries. Labels may not contain `.` or whitespace
/// because sequences are serialized as `.`-joined labels.
#[derive(Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = labels.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() || s.contains('.') || s.chars().any(char::is_whitespace) {
                return Err(Error::InvalidLabel(s.clone()));
            }
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::DuplicateSymbol(s.clone()));
            }
        }
        Ok(Alphabet { symbols, index })
    }

    /// The alphabet `{"0", "1", ..., "size-1"}`.
    pub fn numeric(size: usize) -> Result<Self> {
        Self::new((0..size).map(|i| i.to_string()))
    }

    pub fn binary() -> Self {
        Self::numeric(2).expect("two distinct labels")
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn label(&self, i: usize) -> &str {
        &self.symbols[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index.get(label).copied().ok_or_else(|| Error::UnknownSymbol(format!("{label:?}")))
    }

    pub fn check(&self, i: usize) -> Result<usize> {
        if i < self.len() {
            Ok(i)
        } else {
            Err(Error::UnknownSymbol(format!("index {i} (alphabet size {})", self.len())))
        }
    }

    pub fn check_seq(&self, seq: &[usize]) -> Result<()> {
        seq.iter().try_for_each(|&s| self.check(s).map(|_| ()))
    }

    /// Parses a `.`-joined label sequence. The empty string is the empty sequence.
    pub fn parse_seq(&self, text: &str) -> Result<Vec<usize>> {
        if text.is_empty() {
            return Ok(Vec::new());
        }
        text.split('.').map(|l| self.index_of(l)).collect()
    }

    pub fn format_seq(&self, seq: &[usize]) -> String {
        let labels: Vec<&str> = seq.iter().map(|&s| self.label(s)).collect();
        labels.join(".")
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.symbols).finish()
    }
}
