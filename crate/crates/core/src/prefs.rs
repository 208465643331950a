//! Tagged preference database and embedding retrieval.
//!
//! The database is one UTF-8 file, one entry per line: `sentence<TAB>TAG`
//! with TAG one of RULE, PREFERENCE, GENERALITY (most to least important).
//! Entries are embedded into an in-process index and queried by cosine
//! similarity.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Importance tag of a stored sentence, most important first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Rule,
    Preference,
    Generality,
}

impl Tag {
    pub fn keyword(self) -> &'static str {
        match self {
            Tag::Rule => "RULE",
            Tag::Preference => "PREFERENCE",
            Tag::Generality => "GENERALITY",
        }
    }
}

/// One naturally written sentence with its importance tag and, once
/// embedded, a unit-normalized vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceEntry {
    pub text: String,
    pub tag: Tag,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f32>>,
}

#[derive(Debug, Error)]
pub enum PrefError {
    #[error("cannot read preference file `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: expected `sentence<TAB>TAG`, got `{content}`")]
    BadLine { line: usize, content: String },
    #[error("line {line}: unknown tag `{tag}` (RULE|PREFERENCE|GENERALITY)")]
    BadTag { line: usize, tag: String },
    #[error("line {line}: empty sentence")]
    EmptySentence { line: usize },
}

/// Errors talking to an embedding backend.
#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("embedding transport failed: {0}")]
    Transport(String),
    #[error("embedding backend returned {got} vectors for {want} texts")]
    CountMismatch { want: usize, got: usize },
    #[error("embedding dimension {got} does not match index dimension {want}")]
    DimensionMismatch { want: usize, got: usize },
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("embedding backend returned a zero vector")]
    ZeroVector,
}

/// Parse the preference database file. Blank lines are skipped; entries come
/// back in file order, without embeddings.
pub fn load_preferences(path: impl AsRef<std::path::Path>) -> Result<Vec<PreferenceEntry>, PrefError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| PrefError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_preferences_str(&text)
}

/// Parse preference entries from a string (one `sentence<TAB>TAG` per line).
pub fn load_preferences_str(text: &str) -> Result<Vec<PreferenceEntry>, PrefError> {
    let mut entries = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let (sentence, tag) = raw.rsplit_once('\t').ok_or_else(|| PrefError::BadLine {
            line,
            content: raw.to_string(),
        })?;
        let sentence = sentence.trim();
        if sentence.is_empty() {
            return Err(PrefError::EmptySentence { line });
        }
        let tag = match tag.trim() {
            "RULE" => Tag::Rule,
            "PREFERENCE" => Tag::Preference,
            "GENERALITY" => Tag::Generality,
            other => {
                return Err(PrefError::BadTag {
                    line,
                    tag: other.to_string(),
                })
            }
        };
        entries.push(PreferenceEntry {
            text: sentence.to_string(),
            tag,
            embedding: None,
        });
    }
    Ok(entries)
}

/// An embedding backend: a batch of texts in, one vector per text out.
/// Implementations must be stateless per call.
pub trait Embedder: Send + Sync {
    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f32>>, EmbedError>;

    fn dimension(&self) -> usize;
}

/// Embed one text and L2-normalize the result.
pub fn embed(text: &str, embedder: &dyn Embedder) -> Result<Vec<f32>, EmbedError> {
    if text.is_empty() {
        return Err(EmbedError::EmptyText);
    }
    let mut vectors = embedder.embed_batch(&[text])?;
    if vectors.len() != 1 {
        return Err(EmbedError::CountMismatch {
            want: 1,
            got: vectors.len(),
        });
    }
    let mut vector = vectors.pop().expect("one vector");
    normalize(&mut vector)?;
    Ok(vector)
}

fn normalize(vector: &mut [f32]) -> Result<(), EmbedError> {
    let norm = vector.iter().map(|x| (*x as f64) * (*x as f64)).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(EmbedError::ZeroVector);
    }
    for x in vector.iter_mut() {
        *x = (*x as f64 / norm) as f32;
    }
    Ok(())
}

pub fn cosine(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Deterministic test embedder: a hashed bag-of-tokens vector.
///
/// The algorithm is fixed so oracle values are reproducible bit-exactly:
/// lowercase the text, split into runs of ASCII alphanumerics, hash each
/// token with 64-bit FNV-1a (offset basis 0xcbf29ce484222325, prime
/// 0x100000001b3), add 1.0 to component `hash % dimension`. Normalization
/// to unit L2 norm happens in [`embed`]. Default dimension is 256.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dimension: usize,
}

impl HashEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0);
        HashEmbedder { dimension }
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder::new(256)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in bytes {
        hash ^= *byte as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

impl Embedder for HashEmbedder {
    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f32>>, EmbedError> {
        Ok(texts
            .iter()
            .map(|text| {
                let mut vector = vec![0.0f32; self.dimension];
                for token in text
                    .to_lowercase()
                    .split(|c: char| !c.is_ascii_alphanumeric())
                    .filter(|t| !t.is_empty())
                {
                    let bucket = (fnv1a(token.as_bytes()) % self.dimension as u64) as usize;
                    vector[bucket] += 1.0;
                }
                vector
            })
            .collect())
    }

    fn dimension(&self) -> usize {
        self.dimension
    }
}

/// HTTP embedding client. POSTs `{"inputs": [texts...]}` and accepts either
/// a bare array of vectors or `{"embeddings": [...]}` in response, which
/// covers the common local embedding servers.
pub struct HttpEmbedder {
    endpoint: String,
    dimension: usize,
    client: reqwest::blocking::Client,
}

impl HttpEmbedder {
    pub fn new(endpoint: impl Into<String>, dimension: usize, timeout: Duration) -> Self {
        HttpEmbedder {
            endpoint: endpoint.into(),
            dimension,
            client: reqwest::blocking::Client::builder()
                .timeout(timeout)
                .build()
                .expect("http client builds"),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EmbedResponse {
    Bare(Vec<Vec<f32>>),
    Wrapped { embeddings: Vec<Vec<f32>> },
}

impl Embedder for HttpEmbedder {
    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f32>>, EmbedError> {
        let body = serde_json::json!({ "inputs": texts });
        let response = self
            .client
            .post(&self.endpoint)
            .json(&body)
            .send()
            .map_err(|e| EmbedError::Transport(e.to_string()))?;
        if !response.status().is_success() {
            return Err(EmbedError::Transport(format!(
                "embedding server returned {}",
                response.status()
            )));
        }
        let parsed: EmbedResponse = response
            .json()
            .map_err(|e| EmbedError::Transport(e.to_string()))?;
        let vectors = match parsed {
            EmbedResponse::Bare(v) => v,
            EmbedResponse::Wrapped { embeddings } => embeddings,
        };
        if vectors.len() != texts.len() {
            return Err(EmbedError::CountMismatch {
                want: texts.len(),
                got: vectors.len(),
            });
        }
        for vector in &vectors {
            if vector.len() != self.dimension {
                return Err(EmbedError::DimensionMismatch {
                    want: self.dimension,
                    got: vector.len(),
                });
            }
        }
        Ok(vectors)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }
}

/// Immutable in-process vector index over embedded preference entries.
#[derive(Debug, Clone)]
pub struct VectorIndex {
    entries: Vec<PreferenceEntry>,
    dimension: usize,
}

impl VectorIndex {
    /// Embed all entries and build the index. Entry order is preserved and
    /// serves as the tie-break order for equal similarities.
    pub fn build(
        mut entries: Vec<PreferenceEntry>,
        embedder: &dyn Embedder,
    ) -> Result<Self, EmbedError> {
        for entry in &mut entries {
            entry.embedding = Some(embed(&entry.text, embedder)?);
        }
        Ok(VectorIndex {
            dimension: embedder.dimension(),
            entries,
        })
    }

    /// An index with no entries; queries return nothing.
    pub fn empty(dimension: usize) -> Self {
        VectorIndex {
            entries: Vec::new(),
            dimension,
        }
    }

    pub fn entries(&self) -> &[PreferenceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
}

/// The `k` entries most similar to the query, best first. Ties keep entry
/// load order. Asking for more entries than stored returns all of them
/// ranked; an empty index returns an empty list.
pub fn query_top_k(
    index: &VectorIndex,
    query: &str,
    k: usize,
    embedder: &dyn Embedder,
) -> Result<Vec<PreferenceEntry>, EmbedError> {
    if index.is_empty() || k == 0 {
        return Ok(Vec::new());
    }
    let query_vector = embed(query, embedder)?;
    let mut scored: Vec<(usize, f32)> = index
        .entries
        .iter()
        .enumerate()
        .map(|(position, entry)| {
            let embedding = entry.embedding.as_deref().unwrap_or(&[]);
            (position, cosine(&query_vector, embedding))
        })
        .collect();
    // Stable sort: equal similarities keep load order.
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    Ok(scored
        .into_iter()
        .take(k)
        .map(|(position, _)| index.entries[position].clone())
        .collect())
}

/// Format entries for inclusion in a prompt: deduplicated, grouped Rule →
/// Preference → Generality (stable within each group), one
/// `[TAG] sentence` line per entry.
pub fn format_for_prompt(entries: &[PreferenceEntry]) -> String {
    let mut seen: Vec<(&str, Tag)> = Vec::new();
    let mut by_tag: [Vec<&PreferenceEntry>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for entry in entries {
        let key = (entry.text.as_str(), entry.tag);
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let slot = match entry.tag {
            Tag::Rule => 0,
            Tag::Preference => 1,
            Tag::Generality => 2,
        };
        by_tag[slot].push(entry);
    }
    let mut text = String::new();
    for group in by_tag {
        for entry in group {
            text.push_str(&format!("[{}] {}\n", entry.tag.keyword(), entry.text));
        }
    }
    text
}
