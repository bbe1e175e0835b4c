use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{Graph, SplitMasks};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct SplitsFile {
    train: Vec<usize>,
    val: Vec<usize>,
    test: Vec<usize>,
    num_classes: usize,
}

fn read(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(file: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Non-blank lines paired with their 1-based line number.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

/// Loads `edges.tsv`, `features.tsv`, `labels.tsv` and `splits.json` from `dir`.
///
/// The node count is the number of label lines. Edges are symmetrized and
/// deduplicated.
pub fn load_graph_bundle(dir: impl AsRef<Path>) -> Result<(Graph, SplitMasks)> {
    let dir = dir.as_ref();
    let edges_path = dir.join("edges.tsv");
    let features_path = dir.join("features.tsv");
    let labels_path = dir.join("labels.tsv");
    let splits_path = dir.join("splits.json");

    let splits_text = read(&splits_path)?;
    let labels_text = read(&labels_path)?;
    let features_text = read(&features_path)?;
    let edges_text = read(&edges_path)?;

    let splits: SplitsFile = serde_json::from_str(&splits_text)
        .map_err(|e| parse_err(&splits_path, e.line(), e.to_string()))?;
    let num_classes = splits.num_classes;

    let mut labels = Vec::new();
    for (ln, line) in lines(&labels_text) {
        let y: usize = line
            .trim()
            .parse()
            .map_err(|_| parse_err(&labels_path, ln, format!("non-integer label {line:?}")))?;
        if y >= num_classes {
            return Err(parse_err(
                &labels_path,
                ln,
                format!("label out of range: {y} with num_classes = {num_classes}"),
            ));
        }
        labels.push(y);
    }
    let n = labels.len();

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (ln, line) in lines(&features_text) {
        let row = line
            .split('\t')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(&features_path, ln, format!("bad real: {e}")))?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(
                    &features_path,
                    ln,
                    format!(
                        "feature row-length mismatch: {} values, expected {}",
                        row.len(),
                        first.len()
                    ),
                ));
            }
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(parse_err(
            &features_path,
            rows.len(),
            format!("{} feature rows for {n} labeled nodes", rows.len()),
        ));
    }
    let dim = rows.first().map_or(0, Vec::len);
    let features = Array2::from_shape_vec((n, dim), rows.into_iter().flatten().collect())
        .map_err(|e| Error::InvalidGraph(e.to_string()))?;

    let mut edges = Vec::new();
    for (ln, line) in lines(&edges_text) {
        let mut parts = line.split('\t');
        let mut id = |what: &str| -> Result<usize> {
            let tok = parts
                .next()
                .ok_or_else(|| parse_err(&edges_path, ln, format!("missing {what} id")))?;
            let v: usize = tok
                .trim()
                .parse()
                .map_err(|_| parse_err(&edges_path, ln, format!("non-integer node id {tok:?}")))?;
            if v >= n {
                return Err(parse_err(
                    &edges_path,
                    ln,
                    format!("node id {v} out of range for {n} nodes"),
                ));
            }
            Ok(v)
        };
        let a = id("source")?;
        let b = id("destination")?;
        edges.push((a, b));
    }

    let graph = Graph::new(&edges, features, labels, num_classes)?;
    let masks = SplitMasks::new(splits.train, splits.val, splits.test);
    masks.validate(&graph)?;
    Ok((graph, masks))
}

/// Writes a graph and its splits in the bundle layout read by [`load_graph_bundle`].
pub fn write_graph_bundle(dir: impl AsRef<Path>, graph: &Graph, masks: &SplitMasks) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, body: String| -> Result<PathBuf> {
        let path = dir.join(name);
        let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        f.write_all(body.as_bytes())
            .map_err(|e| Error::io(&path, e))?;
        Ok(path)
    };

    let mut edges = String::new();
    for (a, b) in graph.edge_list() {
        edges.push_str(&format!("{a}\t{b}\n"));
    }
    write("edges.tsv", edges)?;

    let mut features = String::new();
    for row in graph.features().rows() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
        features.push_str(&cells.join("\t"));
        features.push('\n');
    }
    write("features.tsv", features)?;

    let labels: String = graph.labels().iter().map(|y| format!("{y}\n")).collect();
    write("labels.tsv", labels)?;

    let splits = SplitsFile {
        train: masks.train.clone(),
        val: masks.validation.clone(),
        test: masks.test.clone(),
        num_classes: graph.num_classes(),
    };
    write("splits.json", serde_json::to_string_pretty(&splits)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bundle(edges: &str, features: &str, labels: &str, splits: &str) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("edges.tsv"), edges).unwrap();
        fs::write(dir.path().join("features.tsv"), features).unwrap();
        fs::write(dir.path().join("labels.tsv"), labels).unwrap();
        fs::write(dir.path().join("splits.json"), splits).unwrap();
        dir
    }

    const SPLITS: &str = r#"{"train":[0,2],"val":[1],"test":[],"num_classes":2}"#;

    #[test]
    fn three_node_bundle() {
        let dir = bundle("0\t1\n1\t2\n", "1\t0\n0\t1\n1\t1\n", "0\n0\n1\n", SPLITS);
        let (g, masks) = load_graph_bundle(dir.path()).unwrap();
        assert_eq!(g.degrees(), vec![1, 2, 1]);
        assert_eq!(masks.train, vec![0, 2]);
        assert_eq!(g.features()[[2, 1]], 1.0);
    }

    #[test]
    fn duplicate_edge_is_ignored() {
        let once = bundle("0\t1\n", "0\n0\n0\n", "0\n0\n1\n", SPLITS);
        let twice = bundle("0\t1\n0\t1\n1\t0\n", "0\n0\n0\n", "0\n0\n1\n", SPLITS);
        let a = load_graph_bundle(once.path()).unwrap();
        let b = load_graph_bundle(twice.path()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn label_out_of_range_names_file_and_line() {
        let splits = r#"{"train":[0],"val":[],"test":[],"num_classes":7}"#;
        let dir = bundle("", "0\n0\n", "0\n7\n", splits);
        let err = load_graph_bundle(dir.path()).unwrap_err().to_string();
        assert!(err.contains("label out of range"), "{err}");
        assert!(err.contains("labels.tsv:2"), "{err}");
    }

    #[test]
    fn non_integer_node_id() {
        let dir = bundle("0\tx\n", "0\n0\n0\n", "0\n0\n1\n", SPLITS);
        let err = load_graph_bundle(dir.path()).unwrap_err().to_string();
        assert!(
            err.contains("edges.tsv:1") && err.contains("non-integer"),
            "{err}"
        );
    }

    #[test]
    fn feature_row_length_mismatch() {
        let dir = bundle("", "0\t1\n0\n0\t1\n", "0\n0\n1\n", SPLITS);
        let err = load_graph_bundle(dir.path()).unwrap_err().to_string();
        assert!(
            err.contains("features.tsv:2") && err.contains("mismatch"),
            "{err}"
        );
    }

    #[test]
    fn missing_file() {
        let dir = bundle("", "0\n", "0\n", SPLITS);
        fs::remove_file(dir.path().join("edges.tsv")).unwrap();
        assert!(matches!(
            load_graph_bundle(dir.path()),
            Err(Error::MissingFile(p)) if p.ends_with("edges.tsv")
        ));
    }

    #[test]
    fn write_then_load() {
        let dir = bundle(
            "0\t1\n1\t2\n",
            "0.5\t-1\n2\t3\n1e-3\t4\n",
            "0\n0\n1\n",
            SPLITS,
        );
        let (g, masks) = load_graph_bundle(dir.path()).unwrap();
        let out = tempfile::tempdir().unwrap();
        write_graph_bundle(out.path(), &g, &masks).unwrap();
        assert_eq!(load_graph_bundle(out.path()).unwrap(), (g, masks));
    }
}
