//! CSV writers and readers for run artifacts.
//!
//! Floats are written with Rust's shortest round-trip formatting, so files are
//! byte-stable for a fixed seed.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::growth::EdgeEvent;
use crate::model::{EdgeKind, NetworkState, PersonId, Relationship};
use crate::simulation::TimeSeriesRecord;
use crate::topology::{Assortativity, TopologyReport};

pub const EDGE_LIST_HEADER: &str = "female_id,male_id,formed_at,duration,kind";
pub const TIME_SERIES_HEADER: &str = "t,links,avg_degree,S,I,R";
pub const EVENT_LOG_HEADER: &str = "t,event,female_id,male_id,formed_at,duration,kind";
pub const TOPOLOGY_HEADER: &str = "avg_degree,gamma,r_squared,assortativity";
pub const DEGREE_HEADER: &str = "k,count,p_k";
pub const EXCESS_HEADER: &str = "k,q_k";
pub const UNDEFINED: &str = "undefined";

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_lines(path: &Path, header: &str, rows: impl IntoIterator<Item = String>) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{header}").map_err(io)?;
    for row in rows {
        writeln!(w, "{row}").map_err(io)?;
    }
    w.flush().map_err(io)
}

fn edge_row(e: &Relationship) -> String {
    format!("{},{},{},{},{}", e.female, e.male, e.formed_at, e.duration, e.kind.as_str())
}

/// Active edges sorted by `(female_id, male_id)`.
pub fn write_edge_list(state: &NetworkState, path: &Path) -> Result<()> {
    let mut edges = state.edges().to_vec();
    edges.sort_by_key(|e| (e.female, e.male));
    write_lines(path, EDGE_LIST_HEADER, edges.iter().map(edge_row))
}

pub fn read_edge_list(path: &Path) -> Result<Vec<Relationship>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut edges = Vec::new();
    let mut header_seen = false;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = i + 1;
        if i == 0 {
            if line.trim() != EDGE_LIST_HEADER {
                return Err(parse_error(path, lineno, format!("expected header `{EDGE_LIST_HEADER}`")));
            }
            header_seen = true;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 5 {
            return Err(parse_error(path, lineno, format!("expected 5 fields, found {}", fields.len())));
        }
        let num = |idx: usize| -> Result<u64> {
            fields[idx]
                .parse::<u64>()
                .map_err(|_| parse_error(path, lineno, format!("`{}` is not a non-negative integer", fields[idx])))
        };
        let kind = EdgeKind::parse(fields[4])
            .ok_or_else(|| parse_error(path, lineno, format!("unknown kind `{}`", fields[4])))?;
        edges.push(Relationship {
            female: num(0)? as PersonId,
            male: num(1)? as PersonId,
            formed_at: num(2)?,
            duration: num(3)?,
            kind,
        });
    }
    if !header_seen {
        return Err(parse_error(path, 1, "empty file, missing header".into()));
    }
    Ok(edges)
}

fn parse_error(path: &Path, line: usize, message: String) -> Error {
    Error::Parse { path: path.to_path_buf(), line, message }
}

pub fn write_time_series(records: &[TimeSeriesRecord], path: &Path) -> Result<()> {
    write_lines(
        path,
        TIME_SERIES_HEADER,
        records.iter().map(|r| {
            format!("{},{},{},{},{},{}", r.t, r.links, r.avg_degree, r.susceptible, r.infectious, r.recovered)
        }),
    )
}

pub fn write_event_log(events: &[EdgeEvent], path: &Path) -> Result<()> {
    write_lines(
        path,
        EVENT_LOG_HEADER,
        events.iter().map(|ev| format!("{},{},{}", ev.t, ev.kind.as_str(), edge_row(&ev.edge))),
    )
}

/// Paths of the `p_k` and `q_k` companion files for a topology report.
pub fn companion_paths(path: &Path) -> (PathBuf, PathBuf) {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    (path.with_file_name(format!("{stem}_pk.csv")), path.with_file_name(format!("{stem}_qk.csv")))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), |x| x.to_string())
}

/// The one-line summary row under [`TOPOLOGY_HEADER`].
pub fn topology_row(report: &TopologyReport) -> String {
    let r = match report.assortativity {
        Assortativity::Value(r) => r.to_string(),
        Assortativity::Undefined => UNDEFINED.to_string(),
    };
    format!(
        "{},{},{},{}",
        report.avg_degree,
        opt(report.fit.map(|f| f.gamma)),
        opt(report.fit.map(|f| f.r_squared)),
        r
    )
}

/// Writes the summary row plus `<stem>_pk.csv` and `<stem>_qk.csv` next to it.
pub fn write_topology_report(report: &TopologyReport, path: &Path) -> Result<()> {
    write_lines(path, TOPOLOGY_HEADER, [topology_row(report)])?;
    let (pk, qk) = companion_paths(path);
    let counts = report.degree.counts();
    write_lines(
        &pk,
        DEGREE_HEADER,
        (0..=report.degree.max_degree()).map(|k| {
            format!("{},{},{}", k, counts.get(k).copied().unwrap_or(0), report.degree.p(k))
        }),
    )?;
    write_lines(
        &qk,
        EXCESS_HEADER,
        report.excess.probs().iter().enumerate().map(|(k, q)| format!("{k},{q}")),
    )
}

/// Topology file for a snapshot with no edges: only the average degree is defined.
pub fn write_empty_topology(avg_degree: f64, path: &Path) -> Result<()> {
    write_lines(path, TOPOLOGY_HEADER, [format!("{avg_degree},{UNDEFINED},{UNDEFINED},{UNDEFINED}")])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{initialize_population, rng_from_seed, Gender, SimConfig};
    use crate::topology::{topology_report, Graph};

    fn state_with_people(n: usize) -> NetworkState {
        let config = SimConfig { population: n, m0: 1, ..SimConfig::default() };
        NetworkState::new(initialize_population(&config, &mut rng_from_seed(0)).unwrap())
    }

    #[test]
    fn edgeless_snapshot_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.csv");
        write_edge_list(&state_with_people(10), &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), format!("{EDGE_LIST_HEADER}\n"));
        assert!(read_edge_list(&path).unwrap().is_empty());
    }

    #[test]
    fn single_edge_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.csv");
        let mut state = state_with_people(12);
        state.persons[4].gender = Gender::Female;
        state.persons[9].gender = Gender::Male;
        state.t = 12;
        state.add_edge(4, 9, 30, EdgeKind::Secondary).unwrap();
        write_edge_list(&state, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("{EDGE_LIST_HEADER}\n4,9,12,30,secondary\n"));
        let back = read_edge_list(&path).unwrap();
        assert_eq!(back, state.edges());
    }

    #[test]
    fn malformed_edge_list_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.csv");
        std::fs::write(&path, format!("{EDGE_LIST_HEADER}\n1,2,0,5,primary\n1,x,0,5,primary\n")).unwrap();
        match read_edge_list(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn regular_graph_writes_undefined() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("topology.csv");
        let cycle = Graph::new(6, (0..6).map(|i| (i, (i + 1) % 6)).collect());
        write_topology_report(&topology_report(&cycle).unwrap(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("{TOPOLOGY_HEADER}\n2,undefined,undefined,undefined\n"));
        let (pk, qk) = companion_paths(&path);
        assert_eq!(std::fs::read_to_string(pk).unwrap(), "k,count,p_k\n0,0,0\n1,0,0\n2,6,1\n");
        assert_eq!(std::fs::read_to_string(qk).unwrap(), "k,q_k\n0,0\n1,1\n");
    }
}
