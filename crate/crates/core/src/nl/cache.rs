//! Persistent parse cache: one `sentence<TAB>parse` line per entry, appended
//! as new sentences are parsed.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::babi::Sentence;
use super::parse::{Exemplar, FluentRep, ParserBackend};
use super::NlError;

#[derive(Debug)]
pub struct ParseCache {
    path: Option<PathBuf>,
    entries: Mutex<HashMap<String, String>>,
    file: Mutex<Option<File>>,
}

impl ParseCache {
    pub fn in_memory() -> ParseCache {
        ParseCache { path: None, entries: Mutex::new(HashMap::new()), file: Mutex::new(None) }
    }

    /// Loads existing entries; lines that do not split on a tab are skipped.
    pub fn open(path: &Path) -> Result<ParseCache, NlError> {
        let io = |e: std::io::Error| NlError::Io(format!("{}: {e}", path.display()));
        let mut entries = HashMap::new();
        if path.exists() {
            for line in std::fs::read_to_string(path).map_err(io)?.lines() {
                if let Some((k, v)) = line.split_once('\t') {
                    entries.insert(k.to_string(), v.to_string());
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        Ok(ParseCache { path: Some(path.to_path_buf()), entries: Mutex::new(entries), file: Mutex::new(Some(file)) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, text: &str) -> Option<String> {
        self.entries.lock().expect("cache lock").get(text).cloned()
    }

    pub fn put(&self, text: &str, parse: &str) -> Result<(), NlError> {
        let key = text.replace(['\t', '\n'], " ");
        let mut entries = self.entries.lock().expect("cache lock");
        if entries.get(&key).map(String::as_str) == Some(parse) {
            return Ok(());
        }
        entries.insert(key.clone(), parse.to_string());
        if let Some(f) = self.file.lock().expect("cache lock").as_mut() {
            writeln!(f, "{key}\t{parse}").map_err(|e| NlError::Io(e.to_string()))?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
}

/// Wraps a backend so each distinct sentence is parsed once.
pub struct CachedParser<B> {
    inner: B,
    cache: ParseCache,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl<B: ParserBackend> CachedParser<B> {
    pub fn new(inner: B, cache: ParseCache) -> CachedParser<B> {
        CachedParser { inner, cache, hits: AtomicUsize::new(0), misses: AtomicUsize::new(0) }
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats { hits: self.hits.load(Ordering::Relaxed), misses: self.misses.load(Ordering::Relaxed) }
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

impl<B: ParserBackend> ParserBackend for CachedParser<B> {
    fn parse(&self, sentence: &Sentence, vocabulary: &[String], exemplars: &[Exemplar]) -> Result<FluentRep, NlError> {
        if let Some(text) = self.cache.get(&sentence.text) {
            if let Ok(rep) = FluentRep::parse(&text) {
                self.hits.fetch_add(1, Ordering::Relaxed);
                return Ok(rep);
            }
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let rep = self.inner.parse(sentence, vocabulary, exemplars)?;
        self.cache.put(&sentence.text, &rep.to_string())?;
        Ok(rep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nl::lexicon::Lexicon;
    use crate::nl::parse::DeterministicParser;

    #[test]
    fn second_parse_is_a_hit_and_survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("parses.tsv");
        let s = Sentence::statement(1, "Mary moved to the bathroom.");
        {
            let p = CachedParser::new(DeterministicParser::new(Lexicon::default_babi()), ParseCache::open(&path).unwrap());
            let a = p.parse(&s, &[], &[]).unwrap();
            let b = p.parse(&s, &[], &[]).unwrap();
            assert_eq!(a, b);
            assert_eq!(p.stats(), CacheStats { hits: 1, misses: 1 });
        }
        let p = CachedParser::new(DeterministicParser::new(Lexicon::default()), ParseCache::open(&path).unwrap());
        // the empty lexicon cannot parse anything, so this must come from disk
        assert_eq!(p.parse(&s, &[], &[]).unwrap().to_string(), "go_to(mary,bathroom)");
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "Mary moved to the bathroom.\tgo_to(mary,bathroom)\n");
    }

    #[test]
    fn corrupt_entry_is_reparsed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("parses.tsv");
        std::fs::write(&path, "Mary moved to the bathroom.\tgo_to(mary\nno tab here\n").unwrap();
        let p = CachedParser::new(DeterministicParser::new(Lexicon::default_babi()), ParseCache::open(&path).unwrap());
        let s = Sentence::statement(1, "Mary moved to the bathroom.");
        assert_eq!(p.parse(&s, &[], &[]).unwrap().to_string(), "go_to(mary,bathroom)");
        assert_eq!(p.stats().misses, 1);
    }
}
