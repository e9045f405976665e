//! Ingestion of text-format embedding tables (one word plus its
//! space-separated coordinates per line) and of human similarity judgments
//! (comma- or tab-separated word pairs with a 0-10 score), plus assembly of
//! a clusterable dataset from the two.

use std::collections::HashSet;
use std::io::{self, BufRead, Write};

use indexmap::{IndexMap, IndexSet};
use ndarray::Array2;
use thiserror::Error;

use crate::model::{Dataset, ModelError};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error reading corpus")]
    Io(#[from] io::Error),
    #[error("line {line}: vector has {got} coordinates, expected {expected}")]
    InconsistentDimension {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: vector has no coordinates")]
    MissingCoordinates { line: usize },
    #[error("line {line}: cannot parse coordinate {token:?}")]
    BadCoordinate { line: usize, token: String },
    #[error("line {line}: expected at least 3 fields, got {got}")]
    TooFewFields { line: usize, got: usize },
    #[error("line {line}: cannot parse similarity score {token:?}")]
    BadScore { line: usize, token: String },
    #[error("line {line}: score {score} outside [0, 10]")]
    ScoreOutOfRange { line: usize, score: f64 },
    #[error("line {line}: empty word field")]
    EmptyWord { line: usize },
    #[error("embedding stream contains no vectors")]
    EmptyTable,
    #[error("none of the requested words has an embedding vector")]
    EmptyIntersection,
    #[error(transparent)]
    Dataset(#[from] ModelError),
}

/// Word-to-vector table with a single shared dimension. Iteration follows
/// insertion (file) order; equality ignores it.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    entries: IndexMap<String, Vec<T>>,
    dim: usize,
}

impl<T: Scalar> EmbeddingTable<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn get(&self, word: &str) -> Option<&[T]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[T])> {
        self.entries.iter().map(|(w, v)| (w.as_str(), v.as_slice()))
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Writes the table back in the text format accepted by
    /// [`load_embeddings`]. Coordinates print in shortest round-trip form, so
    /// loading the output reproduces the table exactly.
    pub fn write_text<W: Write>(&self, mut writer: W) -> io::Result<()> {
        for (word, vector) in &self.entries {
            write!(writer, "{word}")?;
            for v in vector {
                write!(writer, " {v}")?;
            }
            writeln!(writer)?;
        }
        Ok(())
    }
}

/// Parses a text-format embedding stream: each line holds a word followed by
/// its coordinates, all whitespace-separated. Words are lowercased at
/// ingestion; when the same word then appears twice, the first vector wins
/// and the duplicate is logged and skipped. The vector dimension is fixed by
/// the first line and enforced on every later one. With `filter` given, only
/// the listed words (compared lowercase) are kept — but every line is still
/// shape-checked.
pub fn load_embeddings<T: Scalar, R: BufRead>(
    reader: R,
    filter: Option<&HashSet<String>>,
) -> Result<EmbeddingTable<T>, CorpusError> {
    let filter: Option<HashSet<String>> =
        filter.map(|set| set.iter().map(|w| w.to_lowercase()).collect());
    let mut entries: IndexMap<String, Vec<T>> = IndexMap::new();
    let mut dim: Option<usize> = None;
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let word = tokens.next().expect("non-empty line has a first token");
        let coordinate_count = tokens.clone().count();
        match dim {
            None => {
                if coordinate_count == 0 {
                    return Err(CorpusError::MissingCoordinates { line: line_no });
                }
                dim = Some(coordinate_count);
            }
            Some(expected) => {
                if coordinate_count != expected {
                    return Err(CorpusError::InconsistentDimension {
                        line: line_no,
                        expected,
                        got: coordinate_count,
                    });
                }
            }
        }
        let word = word.to_lowercase();
        if let Some(filter) = &filter {
            if !filter.contains(&word) {
                continue;
            }
        }
        if entries.contains_key(&word) {
            log::warn!("line {line_no}: duplicate word {word:?}, keeping the first vector");
            continue;
        }
        let mut vector = Vec::with_capacity(coordinate_count);
        for token in tokens {
            let parsed: f64 = token.parse().map_err(|_| CorpusError::BadCoordinate {
                line: line_no,
                token: token.into(),
            })?;
            let value = T::from_f64(parsed).filter(|v| v.is_finite() && parsed.is_finite());
            match value {
                Some(v) => vector.push(v),
                None => {
                    return Err(CorpusError::BadCoordinate {
                        line: line_no,
                        token: token.into(),
                    })
                }
            }
        }
        entries.insert(word, vector);
    }
    match dim {
        None => Err(CorpusError::EmptyTable),
        Some(dim) => Ok(EmbeddingTable { entries, dim }),
    }
}

/// One human similarity judgment: a word pair and its score on the 0-10
/// scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredWordPair {
    pub word_a: String,
    pub word_b: String,
    pub score: f64,
}

/// Parses similarity judgments: one `word,word,score` line each (tab also
/// accepted as the delimiter; extra columns ignored). A first line whose
/// third field is not numeric is treated as a header and skipped. Words are
/// lowercased; scores must lie in [0, 10].
pub fn load_word_pairs<R: BufRead>(reader: R) -> Result<Vec<ScoredWordPair>, CorpusError> {
    let mut pairs = Vec::new();
    let mut first_content_line = true;
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = if line.contains('\t') {
            line.split('\t').map(str::trim).collect()
        } else {
            line.split(',').map(str::trim).collect()
        };
        if fields.len() < 3 {
            return Err(CorpusError::TooFewFields {
                line: line_no,
                got: fields.len(),
            });
        }
        let score: Result<f64, _> = fields[2].parse();
        let is_first = first_content_line;
        first_content_line = false;
        let score = match score {
            Ok(s) => s,
            Err(_) if is_first => continue,
            Err(_) => {
                return Err(CorpusError::BadScore {
                    line: line_no,
                    token: fields[2].into(),
                })
            }
        };
        if !(0.0..=10.0).contains(&score) {
            return Err(CorpusError::ScoreOutOfRange {
                line: line_no,
                score,
            });
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(CorpusError::EmptyWord { line: line_no });
        }
        pairs.push(ScoredWordPair {
            word_a: fields[0].to_lowercase(),
            word_b: fields[1].to_lowercase(),
            score,
        });
    }
    Ok(pairs)
}

/// The distinct words mentioned by `pairs`, in first-appearance order.
pub fn distinct_words(pairs: &[ScoredWordPair]) -> Vec<String> {
    let mut words: IndexSet<&str> = IndexSet::new();
    for pair in pairs {
        words.insert(pair.word_a.as_str());
        words.insert(pair.word_b.as_str());
    }
    words.into_iter().map(String::from).collect()
}

/// Result of intersecting a word list with an embedding table: the
/// clusterable dataset plus the words that had no vector.
#[derive(Debug, Clone)]
pub struct DatasetBuild<T> {
    pub dataset: Dataset<T>,
    pub missing: Vec<String>,
}

/// Assembles a dataset for the requested words (compared lowercase, kept in
/// the requested order), recording words the table lacks. At least one word
/// must resolve to a vector.
pub fn build_dataset<T: Scalar>(
    table: &EmbeddingTable<T>,
    words: &[String],
) -> Result<DatasetBuild<T>, CorpusError> {
    let mut labels: Vec<String> = Vec::new();
    let mut rows: Vec<&[T]> = Vec::new();
    let mut missing = Vec::new();
    for word in words {
        let word = word.to_lowercase();
        match table.get(&word) {
            Some(vector) => {
                labels.push(word);
                rows.push(vector);
            }
            None => missing.push(word),
        }
    }
    if labels.is_empty() {
        return Err(CorpusError::EmptyIntersection);
    }
    let mut points = Array2::zeros((labels.len(), table.dim()));
    for (i, row) in rows.into_iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            points[[i, k]] = v;
        }
    }
    let dataset = Dataset::new(labels, points)?;
    Ok(DatasetBuild { dataset, missing })
}
