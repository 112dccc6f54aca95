//! Certified arrangements keyed by `(n, d1, d2)`, with JSON persistence.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrangement::{Arrangement, ArrangementFile};
use crate::verify::{CertificateFile, FreenessCertificate};

/// Where a catalog entry came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// `seed`, `two_pencil`, `beam`, or the extension sources joined by `+`.
    pub source: String,
    pub seed_hash: Option<String>,
    pub delta_b2: Option<i64>,
    /// `𝔖` when the entry was found by a pre-filtered extension.
    pub saito: Option<f64>,
}

impl Provenance {
    pub fn seed() -> Provenance {
        Provenance {
            source: "seed".into(),
            seed_hash: None,
            delta_b2: None,
            saito: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub arrangement: Arrangement,
    pub certificate: FreenessCertificate,
    pub provenance: Provenance,
}

impl CatalogEntry {
    pub fn key(&self) -> (usize, usize, usize) {
        (self.arrangement.n(), self.certificate.d1, self.certificate.d2)
    }
}

/// Append-only set of certified arrangements; inserting an arrangement that
/// is already present (as a set of lines) does nothing.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    entries: BTreeMap<(usize, usize, usize), Vec<CatalogEntry>>,
    hashes: BTreeSet<String>,
}

impl Catalog {
    pub fn new() -> Catalog {
        Catalog::default()
    }

    /// Returns whether the entry was new.
    pub fn insert(&mut self, entry: CatalogEntry) -> bool {
        if !self.hashes.insert(entry.arrangement.hash()) {
            return false;
        }
        self.entries.entry(entry.key()).or_default().push(entry);
        true
    }

    pub fn contains_hash(&self, hash: &str) -> bool {
        self.hashes.contains(hash)
    }

    pub fn len(&self) -> usize {
        self.hashes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hashes.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = &(usize, usize, usize)> {
        self.entries.keys()
    }

    pub fn get(&self, n: usize, d1: usize, d2: usize) -> &[CatalogEntry] {
        self.entries.get(&(n, d1, d2)).map_or(&[], Vec::as_slice)
    }

    /// All entries, by cell and then insertion order.
    pub fn iter(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.values().flatten()
    }

    pub fn at_level(&self, n: usize) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.range((n, 0, 0)..(n + 1, 0, 0)).flat_map(|(_, v)| v)
    }

    /// `n -> set of hashes`, handy for determinism checks.
    pub fn fingerprint(&self) -> Vec<((usize, usize, usize), Vec<String>)> {
        self.entries
            .iter()
            .map(|(k, v)| (*k, v.iter().map(|e| e.arrangement.hash()).collect()))
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("bad catalog file {file}: {detail}")]
    Format { file: String, detail: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntryFile {
    pub n: usize,
    pub exponents: [usize; 2],
    pub arrangement: ArrangementFile,
    pub certificate: CertificateFile,
    pub provenance: Provenance,
}

/// `index.json`: cell key `"n,d1,d2"` to entry file names.
pub type IndexFile = BTreeMap<String, Vec<String>>;

pub fn entry_file_name(entry: &CatalogEntry) -> String {
    let (n, d1, d2) = entry.key();
    format!("n{n:02}_{d1}_{d2}_{}.json", &entry.arrangement.hash()[..16])
}

/// Writes one JSON file per entry plus `index.json` into `dir`.
pub fn write_catalog(catalog: &Catalog, dir: &Path) -> Result<(), CatalogError> {
    fs::create_dir_all(dir)?;
    let mut index = IndexFile::new();
    for e in catalog.iter() {
        let (n, d1, d2) = e.key();
        let name = entry_file_name(e);
        let file = EntryFile {
            n,
            exponents: [d1, d2],
            arrangement: ArrangementFile::from_arrangement(&e.arrangement),
            certificate: CertificateFile::from_certificate(&e.certificate),
            provenance: e.provenance.clone(),
        };
        let text = serde_json::to_string_pretty(&file).expect("entry serializes");
        fs::write(dir.join(&name), text)?;
        index.entry(format!("{n},{d1},{d2}")).or_default().push(name);
    }
    let text = serde_json::to_string_pretty(&index).expect("index serializes");
    fs::write(dir.join("index.json"), text)?;
    Ok(())
}

/// Reads a catalog written by [`write_catalog`]. A missing directory or
/// index is an empty catalog.
pub fn read_catalog(dir: &Path) -> Result<Catalog, CatalogError> {
    let mut catalog = Catalog::new();
    let index_path = dir.join("index.json");
    if !index_path.exists() {
        return Ok(catalog);
    }
    let bad = |file: &str, detail: String| CatalogError::Format {
        file: file.to_string(),
        detail,
    };
    let index: IndexFile =
        serde_json::from_str(&fs::read_to_string(&index_path)?).map_err(|e| bad("index.json", e.to_string()))?;
    for name in index.values().flatten() {
        let text = fs::read_to_string(dir.join(name))?;
        let file: EntryFile = serde_json::from_str(&text).map_err(|e| bad(name, e.to_string()))?;
        let arrangement = file.arrangement.to_arrangement().map_err(|e| bad(name, e.to_string()))?;
        let certificate = file.certificate.to_certificate().map_err(|e| bad(name, e.to_string()))?;
        catalog.insert(CatalogEntry {
            arrangement,
            certificate,
            provenance: file.provenance,
        });
    }
    Ok(catalog)
}
