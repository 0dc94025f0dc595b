//! Dataset ingestion: single edge-list files and TU-style benchmark
//! directories.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// An ordered collection of graphs with one integer class label each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphDataset {
    pub name: String,
    pub graphs: Vec<Graph>,
    pub labels: Vec<i64>,
}

impl GraphDataset {
    pub fn new(name: impl Into<String>, graphs: Vec<Graph>, labels: Vec<i64>) -> Result<Self> {
        if graphs.len() != labels.len() {
            return Err(Error::LabelCount {
                graphs: graphs.len(),
                labels: labels.len(),
            });
        }
        Ok(GraphDataset {
            name: name.into(),
            graphs,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Number of distinct class labels.
    pub fn class_count(&self) -> usize {
        let mut classes: Vec<i64> = self.labels.clone();
        classes.sort_unstable();
        classes.dedup();
        classes.len()
    }
}

/// Result of loading a graph source that may contain self-loops.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub self_loops_dropped: usize,
}

/// Result of loading a TU directory; reports self-loops dropped across the
/// whole file set.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub dataset: GraphDataset,
    pub self_loops_dropped: usize,
}

/// Parses the edge-list format: `#` comment lines, a header line `n m`,
/// then one `i j` pair per line with 0-based indices.
///
/// Duplicate and reversed pairs are merged. Self-loops are an error unless
/// `allow_self_loops` is set, in which case they are dropped and counted.
pub fn load_edge_list<R: BufRead>(reader: R, allow_self_loops: bool) -> Result<LoadedGraph> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    let mut dropped = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Malformed {
                line: line_no,
                reason: format!("expected two fields, found {}", fields.len()),
            });
        }
        let parse = |field: &str| -> Result<usize> {
            field.parse().map_err(|_| Error::Malformed {
                line: line_no,
                reason: format!("invalid integer {field:?}"),
            })
        };
        let (a, b) = (parse(fields[0])?, parse(fields[1])?);
        match n {
            None => n = Some(a), // header: `n <edge count>`; the count is advisory
            Some(n) => {
                if a == b {
                    if allow_self_loops {
                        dropped += 1;
                        continue;
                    }
                    return Err(Error::SelfLoop { node: a });
                }
                for node in [a, b] {
                    if node >= n {
                        return Err(Error::NodeOutOfRange { index: node, n });
                    }
                }
                edges.push((a, b));
            }
        }
    }
    let n = n.ok_or(Error::Malformed {
        line: 0,
        reason: "missing header line".into(),
    })?;
    Ok(LoadedGraph {
        graph: Graph::from_edges(n, edges)?,
        self_loops_dropped: dropped,
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    if !path.is_file() {
        return Err(Error::MissingFile {
            path: path.to_path_buf(),
        });
    }
    Ok(BufReader::new(File::open(path)?))
}

fn read_int_lines(path: &Path) -> Result<Vec<i64>> {
    let mut values = Vec::new();
    for (idx, line) in open(path)?.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        values.push(trimmed.parse().map_err(|_| Error::Malformed {
            line: idx + 1,
            reason: format!("invalid integer {trimmed:?} in {}", path.display()),
        })?);
    }
    Ok(values)
}

/// Loads a TU-style benchmark directory.
///
/// Expects `<name>_A.txt` with 1-based global edge pairs (comma- or
/// whitespace-separated), `<name>_graph_indicator.txt` mapping each global
/// node to its 1-based graph id, and `<name>_graph_labels.txt` with one
/// label per graph. Node indices are re-based to 0 per graph and directed
/// duplicates merged. Node and edge attribute files are ignored.
pub fn load_tu_dataset(dir: &Path, name: &str, allow_self_loops: bool) -> Result<LoadedDataset> {
    let indicator = read_int_lines(&dir.join(format!("{name}_graph_indicator.txt")))?;
    let total_nodes = indicator.len();
    let graph_count = indicator.iter().copied().max().unwrap_or(0).max(0) as usize;

    // Global 1-based node -> (0-based graph id, 0-based local index).
    let mut node_graph = vec![0usize; total_nodes];
    let mut node_local = vec![0usize; total_nodes];
    let mut sizes = vec![0usize; graph_count];
    for (node, &gid) in indicator.iter().enumerate() {
        if gid < 1 || gid as usize > graph_count {
            return Err(Error::NodeWithoutGraph { node: node + 1 });
        }
        let g = gid as usize - 1;
        node_graph[node] = g;
        node_local[node] = sizes[g];
        sizes[g] += 1;
    }

    let mut per_graph_edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); graph_count];
    let mut dropped = 0usize;
    let a_path = dir.join(format!("{name}_A.txt"));
    for (idx, line) in open(&a_path)?.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(Error::Malformed {
                line: line_no,
                reason: format!("expected two fields, found {} in {}", fields.len(), a_path.display()),
            });
        }
        let parse = |field: &str| -> Result<usize> {
            let value: i64 = field.parse().map_err(|_| Error::Malformed {
                line: line_no,
                reason: format!("invalid integer {field:?} in {}", a_path.display()),
            })?;
            if value < 1 || value as usize > total_nodes {
                return Err(Error::NodeWithoutGraph { node: value.max(0) as usize });
            }
            Ok(value as usize)
        };
        let (a, b) = (parse(fields[0])?, parse(fields[1])?);
        let (ga, gb) = (node_graph[a - 1], node_graph[b - 1]);
        if ga != gb {
            return Err(Error::CrossGraphEdge { a, b, ga, gb });
        }
        if a == b {
            if allow_self_loops {
                dropped += 1;
                continue;
            }
            return Err(Error::SelfLoop { node: a });
        }
        per_graph_edges[ga].push((node_local[a - 1], node_local[b - 1]));
    }

    let labels = read_int_lines(&dir.join(format!("{name}_graph_labels.txt")))?;
    if labels.len() != graph_count {
        return Err(Error::LabelCount {
            graphs: graph_count,
            labels: labels.len(),
        });
    }

    let graphs = sizes
        .into_iter()
        .zip(per_graph_edges)
        .map(|(n, edges)| Graph::from_edges(n, edges))
        .collect::<Result<Vec<_>>>()?;
    Ok(LoadedDataset {
        dataset: GraphDataset::new(name, graphs, labels)?,
        self_loops_dropped: dropped,
    })
}
