//! Built-in degree sequences and file formats for bipartite data.
//!
//! Two classic co-occurrence datasets ship as margins only: `finches`
//! (Darwin's finch species by Galapagos islands) and `women` (the Southern
//! Women event attendance study). The sampler's guarantees do not depend on
//! which realization of the margins is used as a start, so [`realize`]
//! suffices to turn either into a starting network.

use crate::error::{Error, Result};
use crate::network::{is_realizable, BipartiteNetwork, DegreeSequencePair};
use std::collections::{HashMap, HashSet};
use std::path::Path;

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 2] = ["finches", "women"];

/// A bipartite dataset: margins always, incidence and labels when known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedDataset {
    pub name: String,
    pub pair: DegreeSequencePair,
    /// Present when full incidence data was bundled or loaded.
    pub network: Option<BipartiteNetwork>,
    /// Top-node labels in index order, when the source provided them.
    pub top_labels: Option<Vec<String>>,
    pub bottom_labels: Option<Vec<String>>,
}

impl NamedDataset {
    fn margins_only(name: &str, top: Vec<usize>, bottom: Vec<usize>) -> Self {
        Self {
            name: name.to_string(),
            pair: DegreeSequencePair::new(top, bottom),
            network: None,
            top_labels: None,
            bottom_labels: None,
        }
    }
}

/// Look up a bundled dataset by name.
pub fn builtin(name: &str) -> Result<NamedDataset> {
    match name {
        // 13 finch species over 17 islands.
        "finches" => Ok(NamedDataset::margins_only(
            "finches",
            vec![14, 13, 14, 10, 12, 2, 10, 1, 10, 11, 6, 2, 17],
            vec![4, 4, 11, 10, 10, 8, 9, 10, 8, 9, 3, 10, 4, 7, 9, 3, 3],
        )),
        // 18 women over 14 social events.
        "women" => Ok(NamedDataset::margins_only(
            "women",
            vec![8, 7, 8, 7, 4, 4, 4, 3, 4, 4, 4, 6, 7, 8, 5, 2, 2, 2],
            vec![3, 3, 6, 4, 8, 8, 10, 14, 12, 5, 4, 6, 3, 3],
        )),
        other => Err(Error::UnknownDataset {
            name: other.to_string(),
            available: BUILTIN_NAMES.iter().map(|s| s.to_string()).collect(),
        }),
    }
}

/// Build one network with the given margins, deterministically.
///
/// Greedy construction: satisfy the largest remaining top degree from the
/// bottom nodes with the largest remaining residuals, ties broken by lowest
/// index. For realizable margins this always succeeds.
pub fn realize(pair: &DegreeSequencePair) -> Result<BipartiteNetwork> {
    if !is_realizable(pair) {
        return Err(Error::InfeasibleMargins);
    }
    let mut residual: Vec<usize> = pair.bottom.clone();
    let mut columns: Vec<usize> = (0..residual.len()).collect();
    let mut by_degree: Vec<usize> = (0..pair.top.len()).collect();
    by_degree.sort_by_key(|&i| (std::cmp::Reverse(pair.top[i]), i));

    let mut neighbors = vec![Vec::new(); pair.top.len()];
    for &i in &by_degree {
        let need = pair.top[i];
        if need == 0 {
            continue;
        }
        columns.sort_by_key(|&j| (std::cmp::Reverse(residual[j]), j));
        if need > columns.len() || residual[columns[need - 1]] == 0 {
            return Err(Error::InfeasibleMargins);
        }
        let mut row: Vec<u32> = columns[..need].iter().map(|&j| j as u32).collect();
        for &j in &columns[..need] {
            residual[j] -= 1;
        }
        row.sort_unstable();
        neighbors[i] = row;
    }
    debug_assert!(residual.iter().all(|&r| r == 0));
    Ok(BipartiteNetwork::from_sorted_lists_unchecked(
        neighbors,
        pair.bottom.len(),
    ))
}

/// Load a delimiter-separated 0/1 incidence matrix, rows as top nodes.
/// Header row and label column are auto-detected by non-numeric cells.
pub fn load_incidence<P: AsRef<Path>>(path: P) -> Result<NamedDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_incidence(&text, dataset_name(path))
}

/// Load a two-column edge list (top label, bottom label per line), `#` for
/// comments. Labels map to indices in order of first appearance.
pub fn load_edgelist<P: AsRef<Path>>(path: P) -> Result<NamedDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_edgelist(&text, dataset_name(path))
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string())
}

/// [`load_incidence`] on an in-memory string.
pub fn parse_incidence(text: &str, name: impl Into<String>) -> Result<NamedDataset> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let Some(&(first_line, first)) = lines.first() else {
        return Err(Error::Parse {
            line: 0,
            message: "empty file: no incidence rows".into(),
        });
    };
    // One delimiter for the whole file, picked from the first row.
    let delimiter = detect_delimiter(first);
    let rows: Vec<(usize, Vec<&str>)> = lines
        .iter()
        .map(|&(n, l)| (n, split_cells(l, delimiter)))
        .collect();

    let numeric = |s: &str| s.parse::<f64>().is_ok();
    // Data rows end in a 0/1 cell, so a non-numeric trailing cell marks a
    // header row; likewise a non-numeric leading cell marks a label column.
    let header = !numeric(rows[0].1.last().unwrap());
    let data_rows = &rows[if header { 1 } else { 0 }..];
    let Some(&(first_data_line, ref first_data)) = data_rows.first() else {
        return Err(Error::Parse {
            line: first_line,
            message: "no data rows after header".into(),
        });
    };
    let label_column = !numeric(first_data.first().unwrap());

    let mut top_labels: Vec<String> = Vec::new();
    let mut matrix: Vec<Vec<u32>> = Vec::new();
    let mut width: Option<usize> = None;
    for (line, cells) in data_rows {
        let data = if label_column {
            top_labels.push(cells[0].to_string());
            &cells[1..]
        } else {
            &cells[..]
        };
        match width {
            None => width = Some(data.len()),
            Some(w) if w != data.len() => {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("ragged row: expected {w} cells, found {}", data.len()),
                })
            }
            Some(_) => {}
        }
        let mut row = Vec::new();
        for (column, cell) in data.iter().enumerate() {
            match *cell {
                "0" => {}
                "1" => row.push(column as u32),
                other => {
                    return Err(Error::Parse {
                        line: *line,
                        message: format!("cell {other:?} is not 0 or 1"),
                    })
                }
            }
        }
        matrix.push(row);
    }
    let width = width.unwrap();
    if width == 0 {
        return Err(Error::Parse {
            line: first_data_line,
            message: "rows contain no incidence cells".into(),
        });
    }

    let bottom_labels = if header {
        let mut cells: Vec<String> = rows[0].1.iter().map(|c| c.to_string()).collect();
        // Drop the corner cell above the label column.
        if label_column && cells.len() == width + 1 {
            cells.remove(0);
        }
        if cells.len() != width {
            return Err(Error::Parse {
                line: rows[0].0,
                message: format!("header has {} labels for {width} columns", cells.len()),
            });
        }
        Some(cells)
    } else {
        None
    };

    let network = BipartiteNetwork::from_neighbor_lists(matrix, width)?;
    Ok(NamedDataset {
        name: name.into(),
        pair: network.degree_sequences(),
        network: Some(network),
        top_labels: label_column.then_some(top_labels),
        bottom_labels,
    })
}

/// [`load_edgelist`] on an in-memory string.
pub fn parse_edgelist(text: &str, name: impl Into<String>) -> Result<NamedDataset> {
    let mut top_index: HashMap<String, u32> = HashMap::new();
    let mut bottom_index: HashMap<String, u32> = HashMap::new();
    let mut top_labels: Vec<String> = Vec::new();
    let mut bottom_labels: Vec<String> = Vec::new();
    let mut neighbors: Vec<Vec<u32>> = Vec::new();
    let mut seen: HashSet<(u32, u32)> = HashSet::new();

    for (index, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(Error::Parse {
                line: index + 1,
                message: "expected exactly two whitespace-separated labels".into(),
            });
        };
        let t = *top_index.entry(a.to_string()).or_insert_with(|| {
            top_labels.push(a.to_string());
            neighbors.push(Vec::new());
            (top_labels.len() - 1) as u32
        });
        let u = *bottom_index.entry(b.to_string()).or_insert_with(|| {
            bottom_labels.push(b.to_string());
            (bottom_labels.len() - 1) as u32
        });
        if !seen.insert((t, u)) {
            return Err(Error::Parse {
                line: index + 1,
                message: format!("duplicate edge {a:?} {b:?}"),
            });
        }
        neighbors[t as usize].push(u);
    }
    if neighbors.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "empty file: no edges".into(),
        });
    }
    let network = BipartiteNetwork::from_neighbor_lists(neighbors, bottom_labels.len())?;
    Ok(NamedDataset {
        name: name.into(),
        pair: network.degree_sequences(),
        network: Some(network),
        top_labels: Some(top_labels),
        bottom_labels: Some(bottom_labels),
    })
}

/// Render a network as a comma-separated incidence matrix. Labels, when
/// given, become a header row and a leading label column; delimiter
/// characters inside labels are replaced to keep the file parseable.
pub fn format_incidence(
    network: &BipartiteNetwork,
    top_labels: Option<&[String]>,
    bottom_labels: Option<&[String]>,
) -> String {
    let clean = |s: &String| s.replace([',', ';', '\t'], "_");
    let mut out = String::new();
    if let Some(labels) = bottom_labels {
        let mut header: Vec<String> = labels.iter().map(clean).collect();
        if top_labels.is_some() {
            header.insert(0, String::new());
        }
        out.push_str(&header.join(","));
        out.push('\n');
    }
    for (i, list) in network.neighbors().iter().enumerate() {
        let mut cells: Vec<String> = Vec::with_capacity(network.bottom_count() + 1);
        if let Some(labels) = top_labels {
            cells.push(clean(&labels[i]));
        }
        let mut row = vec!["0"; network.bottom_count()];
        for &j in list {
            row[j as usize] = "1";
        }
        cells.extend(row.iter().map(|c| c.to_string()));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Render a network as a two-column edge list. Missing labels fall back to
/// `t<i>` and `b<j>`. Top nodes without edges leave no trace in this format.
pub fn format_edgelist(
    network: &BipartiteNetwork,
    top_labels: Option<&[String]>,
    bottom_labels: Option<&[String]>,
) -> String {
    let clean = |s: &str| s.split_whitespace().collect::<Vec<_>>().join("_");
    let top = |i: usize| match top_labels {
        Some(labels) => clean(&labels[i]),
        None => format!("t{i}"),
    };
    let bottom = |j: usize| match bottom_labels {
        Some(labels) => clean(&labels[j]),
        None => format!("b{j}"),
    };
    let mut out = String::new();
    for (i, list) in network.neighbors().iter().enumerate() {
        for &j in list {
            out.push_str(&format!("{} {}\n", top(i), bottom(j as usize)));
        }
    }
    out
}

/// Write a dataset's incidence matrix to a file.
pub fn write_incidence<P: AsRef<Path>>(dataset: &NamedDataset, path: P) -> Result<()> {
    let Some(network) = &dataset.network else {
        return Err(Error::RejectedInput(
            "dataset has no incidence data to write".into(),
        ));
    };
    std::fs::write(
        path,
        format_incidence(
            network,
            dataset.top_labels.as_deref(),
            dataset.bottom_labels.as_deref(),
        ),
    )?;
    Ok(())
}

/// Write a dataset's edges to a file.
pub fn write_edgelist<P: AsRef<Path>>(dataset: &NamedDataset, path: P) -> Result<()> {
    let Some(network) = &dataset.network else {
        return Err(Error::RejectedInput(
            "dataset has no incidence data to write".into(),
        ));
    };
    std::fs::write(
        path,
        format_edgelist(
            network,
            dataset.top_labels.as_deref(),
            dataset.bottom_labels.as_deref(),
        ),
    )?;
    Ok(())
}

fn detect_delimiter(line: &str) -> Option<char> {
    [',', ';', '\t'].into_iter().find(|&d| line.contains(d))
}

fn split_cells(line: &str, delimiter: Option<char>) -> Vec<&str> {
    match delimiter {
        Some(d) => line.split(d).map(str::trim).collect(),
        None => line.split_whitespace().collect(),
    }
}
