//! Task-file and embedding ingestion: SemEval-style TSV parsing, vector
//! files, dataset assembly, and class-balance statistics.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

/// Ordinal intensity label, 0 (none) through 3 (high).
pub type Label = u8;

pub const NUM_LABELS: usize = 4;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed row at line {line}: expected 4 tab-separated columns, got {got}")]
    MalformedRow { line: usize, got: usize },
    #[error("line {line}: cannot parse intensity label from `{field}`")]
    BadLabel { line: usize, field: String },
    #[error("line {line}: unknown affect dimension `{value}`")]
    UnknownEmotion { line: usize, value: String },
    #[error("line {line}: empty id")]
    EmptyId { line: usize },
    #[error("duplicate id {id}")]
    DuplicateId { id: String },
    #[error("line {line}: expected {expected} floats, got {got}")]
    ExpectedFloats {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: non-numeric token `{token}`")]
    InvalidFloat { line: usize, token: String },
    #[error("line {line}: expected `dim <D>` header")]
    BadDimHeader { line: usize },
    #[error("no vector for id {id}")]
    MissingVector { id: String },
    #[error("zero vector for id {id}")]
    ZeroVector { id: String },
    #[error("instance {id} has dimension {got}, dataset dimension is {expected}")]
    WrongDimension {
        id: String,
        expected: usize,
        got: usize,
    },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("dataset dimension must be positive")]
    ZeroDimension,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("label {0} out of range 0-3")]
    LabelOutOfRange(i64),
    #[error("unknown emotion `{0}` (expected anger|joy|sadness|fear)")]
    BadEmotionToken(String),
}

fn io_err(path: &Path, source: io::Error) -> DatasetError {
    DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// The four emotions of the intensity task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Emotion {
    Anger,
    Joy,
    Sadness,
    Fear,
}

impl Emotion {
    pub const ALL: [Emotion; 4] = [Emotion::Anger, Emotion::Joy, Emotion::Sadness, Emotion::Fear];

    pub fn token(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Joy => "joy",
            Emotion::Sadness => "sadness",
            Emotion::Fear => "fear",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Emotion {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, DatasetError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "anger" => Ok(Emotion::Anger),
            "joy" => Ok(Emotion::Joy),
            "sadness" => Ok(Emotion::Sadness),
            "fear" => Ok(Emotion::Fear),
            other => Err(DatasetError::BadEmotionToken(other.to_string())),
        }
    }
}

/// One row of a task file.
#[derive(Debug, Clone)]
pub struct TextRecord {
    pub id: String,
    pub text: String,
    pub emotion: Emotion,
    pub label: Label,
}

/// One row of a test file whose label column may be absent (e.g. `NONE`).
#[derive(Debug, Clone)]
pub struct TestRecord {
    pub id: String,
    pub text: String,
    pub emotion: Emotion,
    pub label: Option<Label>,
}

/// An instance ready for classification: id, embedding vector, label.
#[derive(Debug, Clone)]
pub struct LabeledInstance {
    pub id: String,
    pub vector: Vec<f64>,
    pub label: Label,
}

/// An ordered collection of labeled vectors sharing one dimension.
#[derive(Debug, Clone)]
pub struct VectorDataset {
    dimension: usize,
    instances: Vec<LabeledInstance>,
}

impl VectorDataset {
    /// Validates dimensions, non-zero vectors, label range, and id
    /// uniqueness.
    pub fn new(dimension: usize, instances: Vec<LabeledInstance>) -> Result<Self, DatasetError> {
        if dimension == 0 {
            return Err(DatasetError::ZeroDimension);
        }
        let mut seen = HashSet::with_capacity(instances.len());
        for inst in &instances {
            if inst.vector.len() != dimension {
                return Err(DatasetError::WrongDimension {
                    id: inst.id.clone(),
                    expected: dimension,
                    got: inst.vector.len(),
                });
            }
            if inst.vector.iter().all(|&v| v == 0.0) {
                return Err(DatasetError::ZeroVector { id: inst.id.clone() });
            }
            if inst.label as usize >= NUM_LABELS {
                return Err(DatasetError::LabelOutOfRange(inst.label as i64));
            }
            if !seen.insert(inst.id.as_str()) {
                return Err(DatasetError::DuplicateId { id: inst.id.clone() });
            }
        }
        drop(seen);
        Ok(Self { dimension, instances })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn instances(&self) -> &[LabeledInstance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// True labels in instance order.
    pub fn labels(&self) -> Vec<Label> {
        self.instances.iter().map(|i| i.label).collect()
    }
}

/// Class-balance statistics of a dataset (computed over observed labels).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassStats {
    /// Instance count per label 0-3.
    pub counts: [usize; NUM_LABELS],
    /// Imbalance ratio: largest observed class over smallest observed class.
    pub ir: f64,
    /// Size of the smallest observed class.
    pub smallest_class: usize,
    pub total: usize,
}

/// Parses the integer before the first `:` of an intensity field,
/// e.g. `2: moderate amount can be inferred` -> 2.
fn parse_label_field(field: &str) -> Option<i64> {
    let head = field.split(':').next().unwrap_or(field).trim();
    head.parse::<i64>().ok()
}

fn read_lines(path: &Path) -> Result<Vec<String>, DatasetError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    BufReader::new(file)
        .lines()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| io_err(path, e))
}

struct RawRow {
    id: String,
    text: String,
    emotion: Emotion,
    label: Option<Label>,
}

/// Shared row scanner for task files: 4 tab-separated columns
/// (id, tweet, affect dimension, intensity class), optional header row.
fn scan_task_rows(path: &Path, require_label: bool) -> Result<Vec<RawRow>, DatasetError> {
    let mut rows = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    let mut first_data_row = true;
    for (idx, raw) in read_lines(path)?.iter().enumerate() {
        let line = idx + 1;
        if raw.is_empty() {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 4 {
            return Err(DatasetError::MalformedRow { line, got: cols.len() });
        }
        let label_num = parse_label_field(cols[3]);
        if first_data_row && label_num.is_none() && require_label {
            // header row: 4th column has no leading integer
            first_data_row = false;
            continue;
        }
        if first_data_row && label_num.is_none() && cols[2].parse::<Emotion>().is_err() {
            // headers of unlabeled files are recognised by the affect column
            first_data_row = false;
            continue;
        }
        first_data_row = false;
        let label = match label_num {
            Some(n) => {
                if !(0..NUM_LABELS as i64).contains(&n) {
                    return Err(DatasetError::BadLabel {
                        line,
                        field: cols[3].to_string(),
                    });
                }
                Some(n as Label)
            }
            None if require_label => {
                return Err(DatasetError::BadLabel {
                    line,
                    field: cols[3].to_string(),
                })
            }
            None => None,
        };
        let emotion = cols[2]
            .parse::<Emotion>()
            .map_err(|_| DatasetError::UnknownEmotion {
                line,
                value: cols[2].to_string(),
            })?;
        let id = cols[0].trim();
        if id.is_empty() {
            return Err(DatasetError::EmptyId { line });
        }
        if !seen_ids.insert(id.to_string()) {
            return Err(DatasetError::DuplicateId { id: id.to_string() });
        }
        rows.push(RawRow {
            id: id.to_string(),
            text: cols[1].to_string(),
            emotion,
            label,
        });
    }
    Ok(rows)
}

/// Loads a labeled task TSV, preserving file order.
pub fn load_task_tsv(path: impl AsRef<Path>) -> Result<Vec<TextRecord>, DatasetError> {
    let rows = scan_task_rows(path.as_ref(), true)?;
    Ok(rows
        .into_iter()
        .map(|r| TextRecord {
            id: r.id,
            text: r.text,
            emotion: r.emotion,
            label: r.label.expect("strict scan yields labels"),
        })
        .collect())
}

/// Loads a task TSV whose intensity column may be unlabeled (`NONE` or
/// similar). Used for test-time prediction.
pub fn load_test_tsv(path: impl AsRef<Path>) -> Result<Vec<TestRecord>, DatasetError> {
    let rows = scan_task_rows(path.as_ref(), false)?;
    Ok(rows
        .into_iter()
        .map(|r| TestRecord {
            id: r.id,
            text: r.text,
            emotion: r.emotion,
            label: r.label,
        })
        .collect())
}

/// A parsed vector file: declared dimension plus id -> vector map.
#[derive(Debug, Clone)]
pub struct VectorFile {
    pub dimension: usize,
    pub vectors: HashMap<String, Vec<f64>>,
}

/// Loads a vector file: a `dim <D>` header, then one
/// `id<TAB>f1 f2 ... fD` line per vector.
pub fn load_vectors(path: impl AsRef<Path>) -> Result<VectorFile, DatasetError> {
    let path = path.as_ref();
    let lines = read_lines(path)?;
    let header = lines.first().ok_or(DatasetError::BadDimHeader { line: 1 })?;
    let dimension = header
        .strip_prefix("dim ")
        .and_then(|d| d.trim().parse::<usize>().ok())
        .filter(|&d| d > 0)
        .ok_or(DatasetError::BadDimHeader { line: 1 })?;
    let mut vectors = HashMap::new();
    for (idx, raw) in lines.iter().enumerate().skip(1) {
        let line = idx + 1;
        if raw.is_empty() {
            continue;
        }
        let (id, rest) = raw
            .split_once('\t')
            .ok_or(DatasetError::MalformedRow { line, got: 1 })?;
        if id.is_empty() {
            return Err(DatasetError::EmptyId { line });
        }
        let mut values = Vec::with_capacity(dimension);
        for token in rest.split_whitespace() {
            let v: f64 = token.parse().map_err(|_| DatasetError::InvalidFloat {
                line,
                token: token.to_string(),
            })?;
            values.push(v);
        }
        if values.len() != dimension {
            return Err(DatasetError::ExpectedFloats {
                line,
                expected: dimension,
                got: values.len(),
            });
        }
        if vectors.insert(id.to_string(), values).is_some() {
            return Err(DatasetError::DuplicateId { id: id.to_string() });
        }
    }
    Ok(VectorFile { dimension, vectors })
}

/// Writes a vector file readable by [`load_vectors`]. Ids are sorted so the
/// output is reproducible; floats use Rust's shortest round-trip formatting,
/// which preserves every bit of the value.
pub fn save_vectors(
    path: impl AsRef<Path>,
    dimension: usize,
    vectors: &HashMap<String, Vec<f64>>,
) -> Result<(), DatasetError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>, s: String| -> Result<(), DatasetError> {
        w.write_all(s.as_bytes()).map_err(|e| io_err(path, e))
    };
    write(&mut w, format!("dim {dimension}\n"))?;
    let mut ids: Vec<&String> = vectors.keys().collect();
    ids.sort();
    for id in ids {
        let values = &vectors[id];
        let joined = values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        write(&mut w, format!("{id}\t{joined}\n"))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Joins task records with their vectors, preserving record order.
pub fn join(records: &[TextRecord], vectors: &VectorFile) -> Result<VectorDataset, DatasetError> {
    let mut instances = Vec::with_capacity(records.len());
    for rec in records {
        let vector = vectors
            .vectors
            .get(&rec.id)
            .ok_or_else(|| DatasetError::MissingVector { id: rec.id.clone() })?;
        instances.push(LabeledInstance {
            id: rec.id.clone(),
            vector: vector.clone(),
            label: rec.label,
        });
    }
    VectorDataset::new(vectors.dimension, instances)
}

/// Class counts, smallest class, and imbalance ratio (largest/smallest over
/// the observed labels).
pub fn class_stats(ds: &VectorDataset) -> Result<ClassStats, DatasetError> {
    if ds.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    let mut counts = [0usize; NUM_LABELS];
    for inst in ds.instances() {
        counts[inst.label as usize] += 1;
    }
    let observed: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
    let largest = *observed.iter().max().expect("non-empty");
    let smallest = *observed.iter().min().expect("non-empty");
    Ok(ClassStats {
        counts,
        ir: largest as f64 / smallest as f64,
        smallest_class: smallest,
        total: ds.len(),
    })
}

/// Concatenates two datasets (a's instances first). Dimensions must match
/// and ids must be disjoint.
pub fn merge(a: &VectorDataset, b: &VectorDataset) -> Result<VectorDataset, DatasetError> {
    if a.dimension() != b.dimension() {
        return Err(DatasetError::DimensionMismatch(a.dimension(), b.dimension()));
    }
    let mut instances = a.instances().to_vec();
    instances.extend_from_slice(b.instances());
    VectorDataset::new(a.dimension(), instances)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn inst(id: &str, vector: Vec<f64>, label: Label) -> LabeledInstance {
        LabeledInstance {
            id: id.to_string(),
            vector,
            label,
        }
    }

    #[test]
    fn parses_task_rows() {
        let f = write_tmp(
            "2018-En-00866\tI hate waiting\tanger\t1: low amount of anger can be inferred\n\
             2018-En-00867\tcalm\tanger\t0: no anger can be inferred\n",
        );
        let recs = load_task_tsv(f.path()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].label, 1);
        assert_eq!(recs[0].emotion, Emotion::Anger);
        assert_eq!(recs[1].label, 0);
    }

    #[test]
    fn skips_header_row() {
        let f = write_tmp(
            "ID\tTweet\tAffect Dimension\tIntensity Class\n\
             a\thello\tjoy\t2: moderate amount of joy can be inferred\n",
        );
        let recs = load_task_tsv(f.path()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].label, 2);
    }

    #[test]
    fn malformed_row_names_line() {
        let f = write_tmp("a\thello\tjoy\t1: low\nb\tx\tjoy\n");
        let err = load_task_tsv(f.path()).unwrap_err();
        assert!(matches!(err, DatasetError::MalformedRow { line: 2, got: 3 }));
    }

    #[test]
    fn unknown_emotion_rejected() {
        let f = write_tmp("a\thello\tenvy\t1: low\n");
        assert!(matches!(
            load_task_tsv(f.path()).unwrap_err(),
            DatasetError::UnknownEmotion { line: 1, .. }
        ));
    }

    #[test]
    fn unlabeled_rows_allowed_in_test_files() {
        let f = write_tmp("a\thello\tfear\tNONE\nb\tbye\tfear\t3: high amount of fear can be inferred\n");
        let recs = load_test_tsv(f.path()).unwrap();
        assert_eq!(recs[0].label, None);
        assert_eq!(recs[1].label, Some(3));
    }

    #[test]
    fn loads_vector_file() {
        let f = write_tmp("dim 3\na\t1 0 0\nb\t0 1 0\n");
        let vf = load_vectors(f.path()).unwrap();
        assert_eq!(vf.dimension, 3);
        assert_eq!(vf.vectors.len(), 2);
        assert_eq!(vf.vectors["a"], vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn wrong_float_count_names_line() {
        let f = write_tmp("dim 3\na\t1 0 0\nc\t1 2\n");
        assert!(matches!(
            load_vectors(f.path()).unwrap_err(),
            DatasetError::ExpectedFloats {
                line: 3,
                expected: 3,
                got: 2
            }
        ));
    }

    #[test]
    fn duplicate_vector_id_rejected() {
        let f = write_tmp("dim 2\na\t1 0\na\t0 1\n");
        assert!(matches!(
            load_vectors(f.path()).unwrap_err(),
            DatasetError::DuplicateId { .. }
        ));
    }

    #[test]
    fn non_numeric_token_rejected() {
        let f = write_tmp("dim 2\na\t1 oops\n");
        assert!(matches!(
            load_vectors(f.path()).unwrap_err(),
            DatasetError::InvalidFloat { line: 2, .. }
        ));
    }

    #[test]
    fn join_preserves_order_and_reports_missing() {
        let recs = vec![
            TextRecord {
                id: "b".into(),
                text: String::new(),
                emotion: Emotion::Joy,
                label: 1,
            },
            TextRecord {
                id: "a".into(),
                text: String::new(),
                emotion: Emotion::Joy,
                label: 2,
            },
        ];
        let mut vectors = HashMap::new();
        vectors.insert("a".to_string(), vec![1.0, 0.0]);
        vectors.insert("b".to_string(), vec![0.0, 1.0]);
        let vf = VectorFile {
            dimension: 2,
            vectors,
        };
        let ds = join(&recs, &vf).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.instances()[0].id, "b");

        let missing = vec![TextRecord {
            id: "zzz".into(),
            text: String::new(),
            emotion: Emotion::Joy,
            label: 0,
        }];
        assert!(matches!(
            join(&missing, &vf).unwrap_err(),
            DatasetError::MissingVector { .. }
        ));
    }

    #[test]
    fn join_rejects_zero_vector() {
        let recs = vec![TextRecord {
            id: "a".into(),
            text: String::new(),
            emotion: Emotion::Fear,
            label: 0,
        }];
        let mut vectors = HashMap::new();
        vectors.insert("a".to_string(), vec![0.0, 0.0]);
        let vf = VectorFile {
            dimension: 2,
            vectors,
        };
        assert!(matches!(
            join(&recs, &vf).unwrap_err(),
            DatasetError::ZeroVector { .. }
        ));
    }

    #[test]
    fn stats_on_balanced_dataset() {
        let mut instances = Vec::new();
        for label in 0..4u8 {
            for i in 0..10 {
                instances.push(inst(&format!("{label}-{i}"), vec![1.0, label as f64], label));
            }
        }
        let ds = VectorDataset::new(2, instances).unwrap();
        let stats = class_stats(&ds).unwrap();
        assert_eq!(stats.total, 40);
        assert_eq!(stats.smallest_class, 10);
        assert_eq!(stats.ir, 1.0);
        assert_eq!(stats.counts, [10, 10, 10, 10]);
    }

    #[test]
    fn merge_concatenates_and_checks() {
        let a = VectorDataset::new(2, vec![inst("a", vec![1.0, 0.0], 0), inst("b", vec![0.0, 1.0], 1)])
            .unwrap();
        let b = VectorDataset::new(
            2,
            vec![
                inst("c", vec![1.0, 1.0], 2),
                inst("d", vec![1.0, 2.0], 3),
                inst("e", vec![2.0, 1.0], 0),
            ],
        )
        .unwrap();
        let merged = merge(&a, &b).unwrap();
        assert_eq!(merged.len(), 5);
        assert_eq!(merged.instances()[0].id, "a");
        assert_eq!(merged.instances()[2].id, "c");

        let shared = VectorDataset::new(2, vec![inst("a", vec![1.0, 1.0], 2)]).unwrap();
        assert!(matches!(
            merge(&a, &shared).unwrap_err(),
            DatasetError::DuplicateId { .. }
        ));

        let empty = VectorDataset::new(2, vec![]).unwrap();
        let same = merge(&a, &empty).unwrap();
        assert_eq!(same.len(), a.len());

        let wrong_dim = VectorDataset::new(3, vec![inst("z", vec![1.0, 0.0, 0.0], 1)]).unwrap();
        assert!(matches!(
            merge(&a, &wrong_dim).unwrap_err(),
            DatasetError::DimensionMismatch(2, 3)
        ));
    }

    #[test]
    fn save_load_round_trip_is_exact() {
        let mut vectors = HashMap::new();
        vectors.insert("x".to_string(), vec![0.1234567891234, -7.5e-11]);
        vectors.insert("y".to_string(), vec![1.0 / 3.0, 2.0f64.sqrt()]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.vec");
        save_vectors(&path, 2, &vectors).unwrap();
        let loaded = load_vectors(&path).unwrap();
        assert_eq!(loaded.dimension, 2);
        assert_eq!(loaded.vectors, vectors);
    }
}
