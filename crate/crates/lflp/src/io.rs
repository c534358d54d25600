//! File formats: instance JSON, origin-destination CSVs, trace JSON Lines, vertex-cover graphs,
//! LP files and program/solution documents.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use lflp_core::engine::{side_name, Event, Trace};
use lflp_core::frp::{export_lp, FRProgram, FRSolution, ProgramSpec};
use lflp_core::gen::od_instance;
use lflp_core::hardness::VcGraph;
use lflp_core::{HyperEdges, Instance};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Errors raised while reading or writing files.
#[derive(Debug, thiserror::Error)]
pub enum IoError {
    /// Underlying file-system failure.
    #[error("{path}: {source}")]
    Io {
        /// File involved.
        path: PathBuf,
        /// Cause.
        source: std::io::Error,
    },
    /// Malformed content.
    #[error("{file}:{line}: {msg}")]
    Parse {
        /// File or stream name.
        file: String,
        /// 1-based line number, 0 when not line oriented.
        line: usize,
        /// Description.
        msg: String,
    },
    /// An identifier that does not appear in the location list.
    #[error("{file}:{line}: unknown id {id:?}")]
    UnknownId {
        /// File or stream name.
        file: String,
        /// 1-based line number.
        line: usize,
        /// The offending identifier.
        id: String,
    },
    /// The content parsed but describes an invalid model.
    #[error(transparent)]
    Model(#[from] lflp_core::Error),
}

/// Result alias for this module.
pub type Result<T> = std::result::Result<T, IoError>;

fn parse_err(file: &str, line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse { file: file.to_string(), line, msg: msg.into() }
}

/// Reads a whole file, attaching the path to errors.
pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

/// Writes a whole file, creating parent directories, attaching the path to errors.
pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    let wrap = |source| IoError::Io { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(wrap)?;
    }
    fs::write(path, contents).map_err(wrap)
}

// ---------------------------------------------------------------------------
// Extended reals
// ---------------------------------------------------------------------------

/// A real number that may be `+∞`, written as the string `"inf"` in JSON.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtReal(pub f64);

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(ExtReal(x)),
            Raw::Text(t) if t.eq_ignore_ascii_case("inf") => Ok(ExtReal(f64::INFINITY)),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }
}

fn ext(v: &[f64]) -> Vec<ExtReal> {
    v.iter().copied().map(ExtReal).collect()
}

fn unext(v: &[ExtReal]) -> Vec<f64> {
    v.iter().map(|x| x.0).collect()
}

// ---------------------------------------------------------------------------
// Instance JSON
// ---------------------------------------------------------------------------

/// On-disk form of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    /// Number of locations.
    pub n: usize,
    /// Planar coordinates; distances are Euclidean.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<[f64; 2]>>,
    /// Explicit distance matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<Vec<Vec<ExtReal>>>,
    /// Opening cost per location.
    pub opening: Vec<ExtReal>,
    /// `[home, work, mass]` triples.
    pub flows: Vec<(usize, usize, f64)>,
    /// Whether an explicit matrix is asserted to satisfy the triangle inequality.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub metric: bool,
}

impl InstanceFile {
    /// Snapshot of `inst`; coordinate instances keep their coordinates only.
    pub fn from_instance(inst: &Instance) -> Self {
        let n = inst.n();
        let coords = inst.coords().map(<[[f64; 2]]>::to_vec);
        let dist = if coords.is_some() { None } else { Some((0..n).map(|i| ext(inst.dist_row(i))).collect()) };
        InstanceFile {
            n,
            metric: coords.is_none() && inst.is_metric(),
            coords,
            dist,
            opening: ext(inst.opening()),
            flows: inst.edges().iter().map(|e| (e.h, e.w, e.mass)).collect(),
        }
    }

    /// Validated instance.
    pub fn into_instance(self) -> Result<Instance> {
        let file = "instance";
        if self.opening.len() != self.n {
            return Err(parse_err(file, 0, format!("{} opening costs for n = {}", self.opening.len(), self.n)));
        }
        let opening = unext(&self.opening);
        match (self.coords, self.dist) {
            (Some(c), None) => {
                if c.len() != self.n {
                    return Err(parse_err(file, 0, format!("{} coordinates for n = {}", c.len(), self.n)));
                }
                Ok(Instance::from_coords(c, opening, &self.flows)?)
            }
            (None, Some(d)) => {
                if d.len() != self.n {
                    return Err(parse_err(file, 0, format!("{} distance rows for n = {}", d.len(), self.n)));
                }
                let inst = Instance::new(d.iter().map(|r| unext(r)).collect(), opening, &self.flows)?;
                Ok(if self.metric { inst.into_metric()? } else { inst })
            }
            _ => Err(parse_err(file, 0, "exactly one of \"coords\" and \"dist\" must be present")),
        }
    }
}

/// Serializes an instance as pretty JSON.
pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(inst)).expect("instance JSON is always serializable")
}

/// Parses instance JSON.
pub fn instance_from_json(text: &str) -> Result<Instance> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| parse_err("instance", e.line(), e.to_string()))?;
    file.into_instance()
}

/// Reads an instance JSON file.
pub fn read_instance(path: &Path) -> Result<Instance> {
    instance_from_json(&read_to_string(path)?).map_err(|e| relabel(e, path))
}

/// Writes an instance JSON file.
pub fn write_instance(path: &Path, inst: &Instance) -> Result<()> {
    write_file(path, instance_to_json(inst).as_bytes())
}

fn relabel(e: IoError, path: &Path) -> IoError {
    match e {
        IoError::Parse { line, msg, .. } => IoError::Parse { file: path.display().to_string(), line, msg },
        other => other,
    }
}

/// On-disk form of K-sided hyperedges over an instance's locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperFile {
    /// Sides per hyperedge.
    pub k: usize,
    /// Location list of every hyperedge.
    pub sides: Vec<Vec<usize>>,
    /// Mass of every hyperedge.
    pub mass: Vec<f64>,
}

/// Reads a hyperedge file against `inst`.
pub fn read_hyperedges(path: &Path, inst: &Instance) -> Result<HyperEdges> {
    let f: HyperFile = serde_json::from_str(&read_to_string(path)?)
        .map_err(|e| parse_err(&path.display().to_string(), e.line(), e.to_string()))?;
    Ok(HyperEdges::new(inst, f.k, &f.sides, &f.mass)?)
}

// ---------------------------------------------------------------------------
// Origin-destination CSVs
// ---------------------------------------------------------------------------

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(r)
}

fn column(headers: &csv::StringRecord, name: &str, file: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case(name))
        .ok_or_else(|| parse_err(file, 1, format!("missing column {name:?}")))
}

fn number(rec: &csv::StringRecord, col: usize, file: &str, line: usize) -> Result<f64> {
    let raw = rec.get(col).unwrap_or("");
    raw.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| parse_err(file, line, format!("expected a finite number, got {raw:?}")))
}

fn line_of(rec: &csv::StringRecord) -> usize {
    rec.position().map_or(0, |p| p.line() as usize)
}

/// Location list read from a centroid CSV with columns `id, x, y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Centroids {
    /// Identifiers in file order; location `i` is `ids[i]`.
    pub ids: Vec<String>,
    /// Planar coordinates.
    pub coords: Vec<[f64; 2]>,
}

impl Centroids {
    fn index(&self) -> HashMap<&str, usize> {
        self.ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect()
    }
}

/// Parses a centroid CSV (`id, x, y`); duplicate ids are rejected.
pub fn read_centroids<R: Read>(r: R, file: &str) -> Result<Centroids> {
    let mut rd = csv_reader(r);
    let headers = rd.headers().map_err(|e| parse_err(file, 1, e.to_string()))?.clone();
    let (ci, cx, cy) = (column(&headers, "id", file)?, column(&headers, "x", file)?, column(&headers, "y", file)?);
    let mut out = Centroids { ids: Vec::new(), coords: Vec::new() };
    let mut seen = HashMap::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| parse_err(file, 0, e.to_string()))?;
        let line = line_of(&rec);
        let id = rec.get(ci).unwrap_or("").to_string();
        if seen.insert(id.clone(), line).is_some() {
            return Err(parse_err(file, line, format!("duplicate id {id:?}")));
        }
        out.coords.push([number(&rec, cx, file, line)?, number(&rec, cy, file, line)?]);
        out.ids.push(id);
    }
    Ok(out)
}

/// Parses an OD CSV (`home_id, work_id, count`) into flows; duplicate pairs are summed.
pub fn read_od<R: Read>(r: R, file: &str, locs: &Centroids) -> Result<Vec<(usize, usize, f64)>> {
    let index = locs.index();
    let mut rd = csv_reader(r);
    let headers = rd.headers().map_err(|e| parse_err(file, 1, e.to_string()))?.clone();
    let (ch, cw, cc) =
        (column(&headers, "home_id", file)?, column(&headers, "work_id", file)?, column(&headers, "count", file)?);
    let mut sums: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| parse_err(file, 0, e.to_string()))?;
        let line = line_of(&rec);
        let lookup = |col: usize| -> Result<usize> {
            let id = rec.get(col).unwrap_or("");
            index.get(id).copied().ok_or_else(|| IoError::UnknownId { file: file.to_string(), line, id: id.to_string() })
        };
        let (h, w) = (lookup(ch)?, lookup(cw)?);
        let count = number(&rec, cc, file, line)?;
        if count < 0.0 {
            return Err(parse_err(file, line, format!("negative count {count}")));
        }
        *sums.entry((h, w)).or_insert(0.0) += count;
    }
    Ok(sums.into_iter().map(|((h, w), c)| (h, w, c)).collect())
}

/// Parses an opening CSV (`id, cost`); ids without a row are `None`.
pub fn read_opening<R: Read>(r: R, file: &str, locs: &Centroids) -> Result<Vec<Option<f64>>> {
    let index = locs.index();
    let mut rd = csv_reader(r);
    let headers = rd.headers().map_err(|e| parse_err(file, 1, e.to_string()))?.clone();
    let (ci, cc) = (column(&headers, "id", file)?, column(&headers, "cost", file)?);
    let mut out = vec![None; locs.ids.len()];
    for rec in rd.records() {
        let rec = rec.map_err(|e| parse_err(file, 0, e.to_string()))?;
        let line = line_of(&rec);
        let id = rec.get(ci).unwrap_or("");
        let i = *index.get(id).ok_or_else(|| IoError::UnknownId { file: file.to_string(), line, id: id.to_string() })?;
        let v = number(&rec, cc, file, line)?;
        if v < 0.0 {
            return Err(parse_err(file, line, format!("negative cost {v}")));
        }
        out[i] = Some(v);
    }
    Ok(out)
}

/// Assembles an instance from centroid, OD and opening CSV files. Opening costs are `fbar` times
/// the listed value, with missing values replaced by the mean of the present ones.
pub fn load_od(centroids: &Path, od: &Path, opening: &Path, fbar: f64) -> Result<(Instance, Centroids)> {
    let open = |p: &Path| fs::File::open(p).map_err(|source| IoError::Io { path: p.to_path_buf(), source });
    let name = |p: &Path| p.display().to_string();
    let locs = read_centroids(open(centroids)?, &name(centroids))?;
    let flows = read_od(open(od)?, &name(od), &locs)?;
    let index = read_opening(open(opening)?, &name(opening), &locs)?;
    let inst = od_instance(locs.coords.clone(), &index, fbar, &flows)?;
    Ok((inst, locs))
}

// ---------------------------------------------------------------------------
// Trace JSON Lines
// ---------------------------------------------------------------------------

/// One line of a trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    /// Time stamp.
    pub t: f64,
    /// `"open"` or `"connect"`.
    pub kind: String,
    /// Opened or serving facility.
    pub i: usize,
    /// Locations of the connecting edge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<Vec<usize>>,
    /// Connecting side: `H`, `W`, then `L2`, `L3`, ...
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<String>,
}

/// Writes the event log of `trace` as JSON Lines; `edge_sides(e)` gives the locations of edge `e`.
pub fn write_trace<W: Write>(out: &mut W, trace: &Trace, edge_sides: &dyn Fn(usize) -> Vec<usize>) -> std::io::Result<()> {
    for ev in &trace.events {
        let line = match *ev {
            Event::Open { facility, t } => TraceLine { t, kind: "open".into(), i: facility, edge: None, side: None },
            Event::Connect { edge, side, facility, t } => TraceLine {
                t,
                kind: "connect".into(),
                i: facility,
                edge: Some(edge_sides(edge)),
                side: Some(side_name(side).into_owned()),
            },
        };
        serde_json::to_writer(&mut *out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes a two-sided trace of `inst` to `path`.
pub fn write_trace_file(path: &Path, inst: &Instance, trace: &Trace) -> Result<()> {
    let mut buf = Vec::new();
    write_trace(&mut buf, trace, &|e| {
        let edge = inst.edges()[e];
        vec![edge.h, edge.w]
    })
    .expect("writing to memory cannot fail");
    write_file(path, &buf)
}

fn side_index(name: &str) -> Option<usize> {
    match name {
        "H" => Some(0),
        "W" => Some(1),
        _ => name.strip_prefix('L').and_then(|k| k.parse().ok()).filter(|&k| k >= 2),
    }
}

/// Rebuilds a two-sided trace of `inst` from JSON Lines.
///
/// `α(e)` becomes the earliest connection time of `e`, unconnected sides take the last event
/// time, and events that contradict the instance are reported as parse errors.
pub fn read_trace<R: Read>(r: R, file: &str, inst: &Instance) -> Result<Trace> {
    let edges: HashMap<(usize, usize), usize> =
        inst.edges().iter().enumerate().map(|(k, e)| ((e.h, e.w), k)).collect();
    let m = inst.edges().len();
    let mut events = Vec::new();
    let mut psi = vec![vec![None; 2]; m];
    let mut ctime = vec![vec![f64::NAN; 2]; m];
    for (k, line) in BufReader::new(r).lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| parse_err(file, lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TraceLine = serde_json::from_str(&line).map_err(|e| parse_err(file, lineno, e.to_string()))?;
        if rec.i >= inst.n() {
            return Err(parse_err(file, lineno, format!("facility {} out of range", rec.i)));
        }
        match rec.kind.as_str() {
            "open" => events.push(Event::Open { facility: rec.i, t: rec.t }),
            "connect" => {
                let pair = rec.edge.as_deref().unwrap_or(&[]);
                let &[h, w] = pair else {
                    return Err(parse_err(file, lineno, "connect events need a two-location edge"));
                };
                let e = *edges.get(&(h, w)).ok_or_else(|| parse_err(file, lineno, format!("no edge [{h}, {w}]")))?;
                let side = rec
                    .side
                    .as_deref()
                    .and_then(side_index)
                    .filter(|&s| s < 2)
                    .ok_or_else(|| parse_err(file, lineno, format!("bad side {:?}", rec.side)))?;
                if psi[e][side].is_some() {
                    return Err(parse_err(file, lineno, format!("side {side} of edge {e} connects twice")));
                }
                psi[e][side] = Some(rec.i);
                ctime[e][side] = rec.t;
                events.push(Event::Connect { edge: e, side, facility: rec.i, t: rec.t });
            }
            other => return Err(parse_err(file, lineno, format!("unknown event kind {other:?}"))),
        }
    }
    let end_time = events.iter().map(Event::t).fold(0.0, f64::max);
    let alpha = ctime.iter().map(|c| c.iter().copied().filter(|x| !x.is_nan()).fold(end_time, f64::min)).collect();
    let connect_time = ctime.into_iter().map(|c| c.into_iter().map(|x| if x.is_nan() { end_time } else { x }).collect()).collect();
    Ok(Trace { events, alpha, psi, connect_time, end_time, sides: 2 })
}

/// Reads a two-sided trace file of `inst`.
pub fn read_trace_file(path: &Path, inst: &Instance) -> Result<Trace> {
    let f = fs::File::open(path).map_err(|source| IoError::Io { path: path.to_path_buf(), source })?;
    read_trace(f, &path.display().to_string(), inst)
}

// ---------------------------------------------------------------------------
// Vertex-cover graphs
// ---------------------------------------------------------------------------

/// Parses the edge-list graph format: `u v` lines for edges and `w id weight` lines for vertex
/// weights. Blank lines and lines starting with `#` are ignored. The vertex count is one more
/// than the largest id mentioned; vertices without a weight line weigh 1.
pub fn parse_graph(text: &str, file: &str) -> Result<VcGraph> {
    let mut edges = Vec::new();
    let mut weights: BTreeMap<usize, f64> = BTreeMap::new();
    let mut n = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        let id = |s: &str| s.parse::<usize>().map_err(|_| parse_err(file, k + 1, format!("bad vertex id {s:?}")));
        match tok.as_slice() {
            ["w", v, wt] => {
                let v = id(v)?;
                let wt: f64 = wt
                    .parse()
                    .ok()
                    .filter(|x: &f64| x.is_finite() && *x >= 0.0)
                    .ok_or_else(|| parse_err(file, k + 1, format!("bad weight {wt:?}")))?;
                if weights.insert(v, wt).is_some() {
                    return Err(parse_err(file, k + 1, format!("vertex {v} weighted twice")));
                }
                n = n.max(v + 1);
            }
            [u, v] => {
                let (u, v) = (id(u)?, id(v)?);
                edges.push((u, v));
                n = n.max(u.max(v) + 1);
            }
            _ => return Err(parse_err(file, k + 1, format!("expected \"u v\" or \"w id weight\", got {line:?}"))),
        }
    }
    let w = (0..n).map(|v| weights.get(&v).copied().unwrap_or(1.0)).collect();
    Ok(VcGraph::new(w, edges)?)
}

/// Renders a graph in the edge-list format.
pub fn format_graph(g: &VcGraph) -> String {
    let mut s = String::new();
    for (v, w) in g.weights().iter().enumerate() {
        s.push_str(&format!("w {v} {w}\n"));
    }
    for (u, v) in g.edges() {
        s.push_str(&format!("{u} {v}\n"));
    }
    s
}

// ---------------------------------------------------------------------------
// Programs
// ---------------------------------------------------------------------------

/// Writes `prog` to `dir/{kind}_{params}.lp` and returns the path.
pub fn write_lp(dir: &Path, prog: &FRProgram) -> Result<PathBuf> {
    let text = export_lp(prog)?;
    let path = dir.join(format!("{}.lp", prog.spec.file_stem()));
    write_file(&path, text.as_bytes())?;
    Ok(path)
}

/// A program together with a candidate point, as read and written by the `frp` commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramPoint {
    /// Program kind and parameters.
    pub program: ProgramSpec,
    /// Candidate point.
    pub solution: FRSolution,
}

/// Parses a program point document.
pub fn program_point_from_json(text: &str, file: &str) -> Result<ProgramPoint> {
    serde_json::from_str(text).map_err(|e| parse_err(file, e.line(), e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ext_real_round_trips_infinity() {
        let v = vec![ExtReal(1.5), ExtReal(f64::INFINITY)];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[1.5,"inf"]"#);
        assert_eq!(serde_json::from_str::<Vec<ExtReal>>(&s).unwrap(), v);
        assert!(serde_json::from_str::<ExtReal>(r#""nan""#).is_err());
    }

    #[test]
    fn side_names_parse() {
        assert_eq!(side_index("H"), Some(0));
        assert_eq!(side_index("W"), Some(1));
        assert_eq!(side_index("L3"), Some(3));
        assert_eq!(side_index("L1"), None);
        assert_eq!(side_index("X"), None);
    }
}
