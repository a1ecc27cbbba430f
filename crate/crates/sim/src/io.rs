//! Graph file format and tabular writers.
//!
//! Graph files are plain text: line 1 holds `n d`; lines 2..=n+1 hold
//! the d neighbor ids of vertex (line-2), space-separated, sorted
//! ascending. The format is normative: write/read must round-trip
//! byte-identically.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use contact_core::graph::{SimpleRegularGraph, Topology};

use crate::error::{Result, SimError};

pub fn write_graph<W: Write>(g: &SimpleRegularGraph, mut sink: W) -> std::io::Result<()> {
    writeln!(sink, "{} {}", g.n(), g.degree())?;
    for v in 0..g.n() as u32 {
        let row: Vec<String> = g.neighbors(v).iter().map(u32::to_string).collect();
        writeln!(sink, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn write_graph_file(g: &SimpleRegularGraph, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| SimError::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_graph(g, &mut w).map_err(|e| SimError::io(path, e))?;
    w.flush().map_err(|e| SimError::io(path, e))
}

pub fn read_graph<R: Read>(source: R, path: &Path) -> Result<SimpleRegularGraph> {
    let reader = BufReader::new(source);
    let mut lines: Vec<String> = Vec::new();
    for line in reader.lines() {
        lines.push(line.map_err(|e| SimError::io(path, e))?);
    }
    let parse = |line_no: usize, msg: &str| SimError::Parse {
        path: path.to_path_buf(),
        line: line_no,
        message: msg.to_string(),
    };
    let header = lines.first().ok_or_else(|| parse(1, "empty file"))?;
    let mut it = header.split_whitespace();
    let n: usize = it
        .next()
        .ok_or_else(|| parse(1, "missing n"))?
        .parse()
        .map_err(|_| parse(1, "n is not an integer"))?;
    let d: usize = it
        .next()
        .ok_or_else(|| parse(1, "missing d"))?
        .parse()
        .map_err(|_| parse(1, "d is not an integer"))?;
    if it.next().is_some() {
        return Err(parse(1, "trailing tokens after n d"));
    }
    let mut adjacency: Vec<u32> = Vec::with_capacity(n * d);
    for v in 0..n {
        let line_no = v + 2;
        let row = lines
            .get(v + 1)
            .ok_or_else(|| parse(line_no, "unexpected end of file"))?;
        let mut count = 0usize;
        for tok in row.split_whitespace() {
            let w: u32 = tok
                .parse()
                .map_err(|_| parse(line_no, "neighbor id is not an integer"))?;
            if w as usize >= n {
                return Err(parse(line_no, "neighbor id out of range"));
            }
            adjacency.push(w);
            count += 1;
        }
        if count != d {
            return Err(SimError::Validation {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("vertex {v} has degree {count}, expected {d}"),
            });
        }
    }
    if lines.len() > n + 1 && lines[n + 1..].iter().any(|l| !l.trim().is_empty()) {
        return Err(parse(n + 2, "trailing content after adjacency"));
    }
    SimpleRegularGraph::from_adjacency(n, d, adjacency).map_err(|e| SimError::Validation {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })
}

pub fn read_graph_file(path: &Path) -> Result<SimpleRegularGraph> {
    let file = File::open(path).map_err(|e| SimError::io(path, e))?;
    read_graph(file, path)
}

/// CSV writer for contact-process time series:
/// columns (replica, t, infected, ever_infected).
pub struct SeriesCsv<W: Write> {
    sink: W,
}

impl<W: Write> SeriesCsv<W> {
    pub fn new(mut sink: W) -> std::io::Result<Self> {
        writeln!(sink, "replica,t,infected,ever_infected")?;
        Ok(SeriesCsv { sink })
    }

    pub fn row(&mut self, replica: u64, p: &contact_core::contact::SeriesPoint) -> std::io::Result<()> {
        writeln!(self.sink, "{},{},{},{}", replica, p.t, p.infected, p.ever)
    }
}

/// CSV writer for tree series: (replica, t, infected, ever, pioneers).
pub struct TreeSeriesCsv<W: Write> {
    sink: W,
}

impl<W: Write> TreeSeriesCsv<W> {
    pub fn new(mut sink: W) -> std::io::Result<Self> {
        writeln!(sink, "replica,t,infected,ever,pioneers")?;
        Ok(TreeSeriesCsv { sink })
    }

    pub fn row(&mut self, replica: u64, p: &contact_core::tree::TreePoint) -> std::io::Result<()> {
        writeln!(
            self.sink,
            "{},{},{},{},{}",
            replica, p.t, p.infected, p.ever, p.pioneers
        )
    }
}

/// JSON-lines writer for per-replica hit outcomes.
pub fn hit_jsonl(
    sink: &mut impl Write,
    replica: u64,
    hit: &contact_core::contact::HitOutcome,
) -> std::io::Result<()> {
    let record = serde_json::json!({
        "replica": replica,
        "hit": hit.hit,
        "hit_time": hit.hit_time,
        "extinction_time": hit.extinction_time,
        "final_infected_count": hit.final_infected_count,
    });
    writeln!(sink, "{record}")
}

/// JSON-lines writer for grow-and-explore event logs.
pub fn event_jsonl(
    sink: &mut impl Write,
    replica: u64,
    ev: &contact_core::explore::ExploreEvent,
) -> std::io::Result<()> {
    let kind = match ev.kind {
        contact_core::explore::ExploreEventKind::Recovery => "recover",
        contact_core::explore::ExploreEventKind::Infection => "infect",
        contact_core::explore::ExploreEventKind::Wasted => "wasted",
    };
    let record = serde_json::json!({
        "replica": replica,
        "time": ev.t,
        "kind": kind,
        "source": ev.source,
        "target": ev.target,
        "new_edge": ev.new_edge,
    });
    writeln!(sink, "{record}")
}
